use csoc_core::ccalc::ScalarField;
use csoc_core::dirac::{
    self, build_gammas, free_dispersion, hopf_cole_check, linearized_residual,
    nonlinear_linear_consistency, plane_wave_modes, LinearizedProblem, SignConvention, SpinorField,
};
use csoc_core::lagrangian::VectorPotential;
use csoc_core::probes::DomainBox;
use csoc_core::{Error, Metric, Sign, Signature, C64};
use serde_json::json;

use super::{max_of, quadratic_form, rand4, random_symmetric, Context};
use crate::config::complex4;
use crate::error::RunError;
use crate::output::{fmt_f64, Check, Outcome, Table};

const HOPF_COLE_TOL: f64 = 1e-6;
const ORDER_BAND: (f64, f64) = (1.7, 2.3);
const ORDER_STEPS: [f64; 3] = [0.04, 0.02, 0.01];

pub fn hopf_cole(ctx: &Context) -> Result<Outcome, RunError> {
    let cfg = &ctx.cfg;
    let mut out = Outcome::new(
        "hopf-cole",
        "logarithmic transformation: squared gradient plus d'Alembertian of J equals d'Alembertian of exp(J) over exp(J)",
    );
    let g = cfg.metric();
    let h = cfg.dirac.h;
    let probes = ctx.probes(0.1)?;
    let mut rng = ctx.rng(4000);
    let mut fields: Vec<(String, ScalarField)> = Vec::new();
    for k in 0..3 {
        let a = rand4(&mut rng, 0.5);
        fields.push((
            format!("linear-{k}"),
            ScalarField::unbounded(move |_, z| {
                (0..4).fold(C64::new(0.0, 0.0), |acc, mu| acc + a[mu] * z[mu])
            }),
        ));
    }
    for k in 0..3 {
        let b = random_symmetric(&mut rng, 0.15);
        let a = rand4(&mut rng, 0.2);
        let quad = quadratic_form(b, DomainBox::unbounded());
        fields.push((
            format!("quadratic-{k}"),
            ScalarField::unbounded(move |t, z| {
                quad.eval(t, z) + (0..4).fold(C64::new(0.0, 0.0), |acc, mu| acc + a[mu] * z[mu])
            }),
        ));
    }

    let np = probes.len();
    let d: Vec<Result<f64, Error>> = ctx.par_map(fields.len() * np, |k| {
        let (tau, z) = &probes[k % np];
        Ok(hopf_cole_check(&g, &fields[k / np].1, *tau, z, h)?.discrepancy)
    });
    let d = d.into_iter().collect::<Result<Vec<f64>, Error>>()?;
    let mut summary = Vec::new();
    let mut worst = 0.0f64;
    for (fi, (name, _)) in fields.iter().enumerate() {
        let w = max_of(d[fi * np..(fi + 1) * np].iter().copied());
        worst = worst.max(w);
        summary.push(json!({ "field": name, "max_discrepancy": w }));
    }
    out.check(Check::below("Hopf-Cole discrepancy", worst, HOPF_COLE_TOL));

    // refinement study on the quadratic exponents at the first probe
    let (tau, z) = &probes[0];
    let mut table = Table::new(&["field", "h", "discrepancy"]);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut orders = Vec::new();
    for (name, f) in fields.iter().filter(|(n, _)| n.starts_with("quadratic")) {
        let mut prev: Option<f64> = None;
        for step in ORDER_STEPS {
            let v = hopf_cole_check(&g, f, *tau, z, step)?.discrepancy;
            table.row(&[name.clone(), fmt_f64(step), fmt_f64(v)]);
            if let Some(p) = prev {
                let order = (p / v).log2();
                lo = lo.min(order);
                hi = hi.max(order);
                orders.push(json!({ "field": name, "h": step, "order": order }));
            }
            prev = Some(v);
        }
    }
    out.file("hopf_cole_refinement.csv", table.into_string());
    out.check(Check::above("smallest observed order", lo, ORDER_BAND.0));
    out.check(Check::below("largest observed order", hi, ORDER_BAND.1));
    out.detail("fields", json!(summary));
    out.detail("orders", json!(orders));
    out.detail("h", json!(h));
    Ok(out)
}

pub fn clifford(ctx: &Context) -> Result<Outcome, RunError> {
    let mut out = Outcome::new(
        "clifford",
        "gamma-matrix anticommutators and the linearization (gamma.a)^2 = (a.a) I",
    );
    let mut rng = ctx.rng(5000);
    let samples: Vec<[C64; 4]> = (0..100).map(|_| rand4(&mut rng, 2.0)).collect();
    let mut per_signature = Vec::new();
    for signature in [Signature::TimeNegative, Signature::TimePositive] {
        let gs = build_gammas(&Metric::new(signature, Sign::Plus));
        let mut pairs = Vec::new();
        for mu in 0..4 {
            for nu in 0..4 {
                let e = gs.clifford_error(mu, nu);
                pairs.push(json!({ "mu": mu, "nu": nu, "error": e, "passed": e < 1e-14 }));
            }
        }
        let clifford = gs.clifford_max_error();
        let lin = max_of(samples.iter().map(|a| gs.linearization_error(a)));
        out.check(Check::below(
            format!("{}: anticommutator error", signature.name()),
            clifford,
            1e-14,
        ));
        out.check(Check::below(
            format!("{}: linearization error over 100 samples", signature.name()),
            lin,
            1e-12,
        ));
        per_signature.push(json!({
            "signature": signature.name(),
            "anticommutators": pairs,
        }));
    }
    let gs = build_gammas(&ctx.cfg.metric());
    let mut text =
        serde_json::to_string(&gs.to_pairs()).map_err(|e| RunError::Config(e.to_string()))?;
    text.push('\n');
    out.file("gammas.json", text);
    out.detail("signatures", json!(per_signature));
    out.detail("representation", json!(gs.representation));
    Ok(out)
}

const WAVE_TOL: f64 = 1e-6;
const SPECTRUM_TOL: f64 = 1e-10;
const ROUTE_TOL: f64 = 1e-6;

pub fn dirac_planewave(ctx: &Context) -> Result<Outcome, RunError> {
    let cfg = &ctx.cfg;
    let mut out = Outcome::new(
        "dirac-planewave",
        "linearized HJB equation: plane waves with eigenproblem dispersion and agreement with the nonlinear route",
    );
    let h = cfg.dirac.h;
    let k = complex4(cfg.dirac.k_re, cfg.dirac.k_im);
    let with_a = cfg.em_config(&cfg.dirac.potential)?;
    let a = with_a.potential.constant_value().ok_or_else(|| {
        RunError::Config(format!(
            "dirac.potential `{}` is not constant",
            cfg.dirac.potential
        ))
    })?;
    let mut free = with_a.clone();
    free.potential = VectorPotential::zero();
    let hbar = cfg.physics.hbar;
    let probes: Vec<_> = ctx.probes(0.1)?.into_iter().take(4).collect();

    let mut table = Table::new(&[
        "convention",
        "potential",
        "mode",
        "lambda_re",
        "lambda_im",
        "eigen_residual",
        "wave_residual",
    ]);
    let mut worst_wave = 0.0f64;
    for conv in [SignConvention::AsPrinted, SignConvention::BranchSigned] {
        for (label, em) in [("zero", &free), ("constant", &with_a)] {
            let p = LinearizedProblem::new(em.clone(), hbar, conv)?;
            for (mi, mode) in plane_wave_modes(&p, &k)?.iter().enumerate() {
                let phi = SpinorField::plane_wave(mode.chi, k, mode.lambda, DomainBox::unbounded());
                let mut w = 0.0f64;
                for (tau, z) in &probes {
                    let r = linearized_residual(&p, &phi, *tau, z, h)?;
                    w = w.max(max_of(r.iter().map(|x| x.norm())));
                }
                worst_wave = worst_wave.max(w);
                table.row(&[
                    conv.name().to_string(),
                    label.to_string(),
                    mi.to_string(),
                    fmt_f64(mode.lambda.re),
                    fmt_f64(mode.lambda.im),
                    fmt_f64(mode.residual),
                    fmt_f64(w),
                ]);
            }
        }
    }
    out.file("dispersion.csv", table.into_string());
    out.check(Check::below("plane-wave residual", worst_wave, WAVE_TOL));

    // spectra against the closed-form free dispersion and the shifted wave vector
    let printed_free = LinearizedProblem::new(free.clone(), hbar, SignConvention::AsPrinted)?;
    let printed_a = LinearizedProblem::new(with_a.clone(), hbar, SignConvention::AsPrinted)?;
    let closed = free_dispersion(&printed_free, &k);
    let free_gap = max_of(plane_wave_modes(&printed_free, &k)?.iter().map(|m| {
        closed
            .iter()
            .map(|l| (l - m.lambda).norm())
            .fold(f64::INFINITY, f64::min)
    }));
    let shifted: [C64; 4] = core::array::from_fn(|mu| k[mu] + a[mu] * (with_a.q / hbar));
    let shift_gap = max_of(
        plane_wave_modes(&printed_a, &k)?
            .iter()
            .zip(plane_wave_modes(&printed_free, &shifted)?.iter())
            .map(|(x, y)| (x.lambda - y.lambda).norm()),
    );
    out.check(Check::below(
        "free spectrum against closed form",
        free_gap,
        SPECTRUM_TOL,
    ));
    out.check(Check::below(
        "constant-A spectrum against shifted k",
        shift_gap,
        SPECTRUM_TOL,
    ));

    // both routes on a generic spinor
    let chi = [
        C64::new(1.0, 0.2),
        C64::new(0.5, -0.3),
        C64::new(-0.4, 0.1),
        C64::new(0.3, 0.6),
    ];
    let phi = SpinorField::plane_wave(chi, k, C64::new(0.7, 0.0), DomainBox::unbounded());
    let mut routes = Vec::new();
    let mut worst_route = 0.0f64;
    for conv in [SignConvention::BranchSigned, SignConvention::AsPrinted] {
        let p = LinearizedProblem::new(with_a.clone(), hbar, conv)?;
        for r in 0..4 {
            let mut d = 0.0f64;
            for (tau, z) in &probes {
                d = d.max(nonlinear_linear_consistency(&p, &phi, r, *tau, z, h)?.discrepancy);
            }
            if conv == SignConvention::BranchSigned && (r == 0 || r == 2) {
                worst_route = worst_route.max(d);
            }
            routes.push(json!({
                "convention": conv.name(),
                "component": r,
                "branch_sign": dirac::branch_sign(r),
                "max_discrepancy": d,
            }));
        }
    }
    out.check(Check::below(
        "route discrepancy, components 0 and 2",
        worst_route,
        ROUTE_TOL,
    ));

    // an exact solution makes both routes vanish separately
    let p = LinearizedProblem::new(with_a.clone(), hbar, SignConvention::BranchSigned)?;
    let mut worst_individual = 0.0f64;
    for mode in plane_wave_modes(&p, &k)? {
        let phi = SpinorField::plane_wave(mode.chi, k, mode.lambda, DomainBox::unbounded());
        for r in (0..4).filter(|r| mode.chi[*r].norm() > 1e-3) {
            for (tau, z) in &probes {
                let c = nonlinear_linear_consistency(&p, &phi, r, *tau, z, h)?;
                worst_individual = worst_individual
                    .max(c.nonlinear.norm())
                    .max(c.linear.norm());
            }
        }
    }
    out.check(Check::below(
        "nonlinear and linear residuals of exact plane waves",
        worst_individual,
        ROUTE_TOL,
    ));
    out.detail("routes", json!(routes));
    out.detail(
        "k",
        json!(k.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>()),
    );
    out.detail("potential", json!(with_a.potential.name()));
    out.detail("h", json!(h));
    Ok(out)
}
