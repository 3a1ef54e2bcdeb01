use csoc_core::ccalc::ScalarField;
use csoc_core::hjb::{self, HJBProblem};
use csoc_core::lagrangian::em_lagrangian_weak;
use csoc_core::spacetime::Boost;
use csoc_core::{Error, C64};
use serde_json::{json, Value};

use super::{diagonal_quadratic, max_of, quadratic_form, rand4, random_symmetric, Context};
use crate::config::complex4;
use crate::error::RunError;
use crate::output::{complex_json, fmt_f64, Check, Outcome, Table};

const RESIDUAL_TOL: f64 = 1e-6;
const BOUNDARY_TOL: f64 = 1e-12;
const STENCIL_FACTOR: f64 = 5.0;

pub fn hjb_residual(ctx: &Context) -> Result<Outcome, RunError> {
    let cfg = &ctx.cfg;
    let mut out = Outcome::new(
        "hjb-residual",
        "complex HJB equation: free-particle solution, boundary condition and real-pair grouping",
    );
    let h = cfg.hjb.h;
    let em = cfg.em_config(&cfg.hjb.potential)?;
    let spec = cfg.diffusion()?;
    let bx = cfg.domain_box();
    let tau_f = cfg.hjb.tau_final;
    let problem = HJBProblem::new(em_lagrangian_weak(&em), spec, tau_f, bx)?;
    let probes = ctx.probes(0.1)?;

    let p = complex4(cfg.hjb.momentum_re, cfg.hjb.momentum_im);
    let moving = hjb::free_particle_field(&em, p, tau_f, bx)?;
    let at_rest = hjb::free_particle_field(&em, [C64::new(0.0, 0.0); 4], tau_f, bx)?;

    let scan = |j: &ScalarField| -> Result<Vec<hjb::HjbPoint>, Error> {
        ctx.par_map(probes.len(), |k| {
            let (tau, z) = &probes[k];
            hjb::hjb_residual_complex(&problem, j, *tau, z, h)
        })
        .into_iter()
        .collect()
    };
    let moving_pts = scan(&moving)?;
    let rest_pts = scan(&at_rest)?;
    let worst_moving = max_of(moving_pts.iter().map(|p| p.residual.norm()));
    let worst_rest = max_of(rest_pts.iter().map(|p| p.residual.norm()));
    let boundary = hjb::boundary_check(&at_rest, tau_f, &probes);
    out.check(Check::below(
        "free-particle residual, p != 0",
        worst_moving,
        RESIDUAL_TOL,
    ));
    out.check(Check::below(
        "free-particle residual, p = 0",
        worst_rest,
        RESIDUAL_TOL,
    ));
    out.check(Check::below(
        "boundary value |J(tau_f, z)|, p = 0",
        boundary,
        BOUNDARY_TOL,
    ));

    let per_probe: Vec<Value> = moving_pts
        .iter()
        .zip(&rest_pts)
        .map(|(a, b)| {
            json!({
                "tau": a.tau,
                "z": complex_json(&a.z.components),
                "residual": [a.residual.re, a.residual.im],
                "w_star": complex_json(&a.w_star.components),
                "residual_at_rest": [b.residual.re, b.residual.im],
            })
        })
        .collect();
    let mut text =
        serde_json::to_string_pretty(&per_probe).map_err(|e| RunError::Config(e.to_string()))?;
    text.push('\n');
    out.file("hjb_probes.json", text);

    // pair/complex grouping on three families
    let mut rng = ctx.rng(2000);
    let quad = diagonal_quadratic(rand4(&mut rng, 0.5), rand4(&mut rng, 0.5), 0.3, bx);
    let a = rand4(&mut rng, 0.4);
    let expo = ScalarField::new(bx, move |tau, z| {
        (0..4)
            .fold(C64::new(0.0, 0.0), |acc, mu| acc + a[mu] * z[mu])
            .exp()
            * 0.5
            + tau * tau
    });
    let families: [(&str, &ScalarField); 3] = [
        ("free-particle", &moving),
        ("quadratic", &quad),
        ("exponential", &expo),
    ];

    let mut table = Table::new(&[
        "family",
        "probe",
        "complex_re",
        "complex_im",
        "pair_re",
        "pair_im",
        "difference",
        "stencil_error",
        "nonmixed_re",
        "nonmixed_im",
    ]);
    let equal_sigma = (0..4).all(|mu| spec.sigma_x[mu] == spec.sigma_y[mu]);
    let mut family_summary = Vec::new();
    let mut worst_ratio = 0.0f64;
    let mut worst_nonmixed = 0.0f64;
    for (name, j) in families {
        let rows: Vec<Result<(hjb::PairConsistency, (f64, f64)), Error>> =
            ctx.par_map(probes.len(), |k| {
                let (tau, z) = &probes[k];
                let pc = hjb::pair_complex_consistency(&problem, j, *tau, z, h)?;
                let nm = hjb::nonmixed_terms(&spec, j, *tau, z, h)?;
                Ok((pc, nm))
            });
        let mut ratio = 0.0f64;
        let mut nonmixed = 0.0f64;
        for (k, r) in rows.into_iter().enumerate() {
            let (pc, nm) = r?;
            ratio = ratio.max(pc.difference / pc.stencil_error);
            nonmixed = nonmixed.max(nm.0).max(nm.1);
            table.row(&[
                name.to_string(),
                k.to_string(),
                fmt_f64(pc.complex.re),
                fmt_f64(pc.complex.im),
                fmt_f64(pc.pair.re),
                fmt_f64(pc.pair.im),
                fmt_f64(pc.difference),
                fmt_f64(pc.stencil_error),
                fmt_f64(nm.0),
                fmt_f64(nm.1),
            ]);
        }
        worst_ratio = worst_ratio.max(ratio);
        worst_nonmixed = worst_nonmixed.max(nonmixed);
        family_summary.push(json!({
            "family": name,
            "max_difference_over_stencil_error": ratio,
            "max_nonmixed_term": nonmixed,
        }));
    }
    out.file("pair_consistency.csv", table.into_string());
    out.check(Check::below(
        "pair/complex difference over stencil error",
        worst_ratio,
        STENCIL_FACTOR,
    ));
    if equal_sigma {
        out.check(Check::below(
            "non-mixed second-order terms",
            worst_nonmixed,
            RESIDUAL_TOL,
        ));
    }
    out.detail("families", json!(family_summary));
    out.detail("equal_sigma", json!(equal_sigma));
    out.detail("probes", json!(probes.len()));
    out.detail("h", json!(h));
    out.detail("potential", json!(em.potential.name()));
    Ok(out)
}

const RAPIDITIES: [f64; 4] = [-0.5, -0.2, 0.2, 0.5];
const COVARIANCE_TOL: f64 = 1e-6;

pub fn covariance(ctx: &Context) -> Result<Outcome, RunError> {
    let cfg = &ctx.cfg;
    let mut out = Outcome::new(
        "covariance",
        "invariance of the d'Alembertian term of the complex HJB equation under Lorentz boosts",
    );
    let g = cfg.metric();
    let h = cfg.hjb.h;
    let probes = ctx.probes(0.1)?;
    let mut rng = ctx.rng(3000);
    let fields: Vec<ScalarField> = (0..3)
        .map(|_| quadratic_form(random_symmetric(&mut rng, 1.0), cfg.domain_box()))
        .map(|f| f.with_domain(csoc_core::probes::DomainBox::unbounded()))
        .collect();
    let mut cases = Vec::new();
    for axis in 1..4 {
        for r in RAPIDITIES {
            cases.push(Boost::new(axis, r)?);
        }
    }
    let n = fields.len() * cases.len() * probes.len();
    let results: Vec<Result<f64, Error>> = ctx.par_map(n, |k| {
        let (tau, z) = &probes[k % probes.len()];
        let rest = k / probes.len();
        let boost = &cases[rest % cases.len()];
        let f = &fields[rest / cases.len()];
        Ok(hjb::covariance_check(&g, f, boost, *tau, z, h)?.discrepancy)
    });
    let results = results.into_iter().collect::<Result<Vec<f64>, Error>>()?;
    let mut table = Table::new(&["field", "axis", "rapidity", "max_discrepancy"]);
    let mut worst = 0.0f64;
    for fi in 0..fields.len() {
        for (bi, b) in cases.iter().enumerate() {
            let base = (fi * cases.len() + bi) * probes.len();
            let d = max_of(results[base..base + probes.len()].iter().copied());
            worst = worst.max(d);
            table.row(&[
                fi.to_string(),
                b.axis.to_string(),
                fmt_f64(b.rapidity),
                fmt_f64(d),
            ]);
        }
    }
    out.file("covariance.csv", table.into_string());
    out.check(Check::below(
        "d'Alembertian boost discrepancy",
        worst,
        COVARIANCE_TOL,
    ));
    out.detail("signature", json!(g.signature.name()));
    out.detail("boosts", json!(cases.len()));
    out.detail("probes", json!(probes.len()));
    Ok(out)
}
