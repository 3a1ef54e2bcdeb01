use csoc_core::ccalc::{self, ScalarField};
use csoc_core::control::{self, AuditOptions, ProbeStatus};
use csoc_core::lagrangian::{em_lagrangian_weak, EMFieldConfig, VectorPotential};
use csoc_core::probes::{halton_probes, DomainBox};
use csoc_core::{ComplexFourVector, Error, IndexPosition, C64};
use rand::Rng;
use serde_json::json;

use super::{diagonal_quadratic, max_of, rand4, Context};
use crate::error::RunError;
use crate::output::{fmt_f64, Check, Outcome, Table};

const CR_TOL: f64 = 1e-6;
const NON_ANALYTIC_FLOOR: f64 = 0.1;
const CR_STEP: f64 = 1e-4;

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Named test fields and whether each is analytic.
fn cr_fields() -> Vec<(&'static str, bool, ScalarField)> {
    let f = |g: fn(&ComplexFourVector) -> C64| ScalarField::unbounded(move |_, z| g(z));
    vec![
        (
            "polynomial",
            true,
            f(|z| z[0] * z[0] * z[1] + z[2] * 3.0 - z[3] * z[3] * z[3]),
        ),
        (
            "exponential",
            true,
            f(|z| (z[0] * 0.5 - z[1] * c(0.0, 0.3) + z[2] * z[3] * 0.2).exp()),
        ),
        (
            "trigonometric",
            true,
            f(|z| z[0].sin() * z[1].cos() + z[2] * z[3]),
        ),
        (
            "rational",
            true,
            f(|z| (z[0] * z[0] + 4.0).inv() + z[1] / (z[3] + 3.0)),
        ),
        (
            "logarithmic",
            true,
            f(|z| (z[1] + 3.0).ln() * z[0] + (z[2] + 4.0).sqrt()),
        ),
        (
            "modulus-squared",
            false,
            f(|z| (0..4).fold(c(0.0, 0.0), |a, mu| a + z[mu].norm_sqr())),
        ),
        ("conjugate-mix", false, f(|z| z[0].conj() + z[1] * z[2].re)),
    ]
}

pub fn cr_scan(ctx: &Context) -> Result<Outcome, RunError> {
    let mut out = Outcome::new(
        "cr-scan",
        "Cauchy-Riemann conditions and the equality of the x- and y-routes to the complex derivative",
    );
    let probes = ctx.probes(0.05)?;
    let fields = cr_fields();
    let np = probes.len();
    let residuals: Vec<Result<f64, Error>> = ctx.par_map(fields.len() * np, |k| {
        let (tau, z) = &probes[k % np];
        Ok(ccalc::complex_derivative(&fields[k / np].2, *tau, z, CR_STEP)?.worst())
    });
    let residuals = residuals.into_iter().collect::<Result<Vec<f64>, Error>>()?;
    let mut table = Table::new(&["field", "analytic", "probe", "tau", "residual"]);
    let mut summary = Vec::new();
    for (fi, (name, analytic, _)) in fields.iter().enumerate() {
        let mut worst = 0.0f64;
        let mut least = f64::INFINITY;
        for (pi, (tau, _)) in probes.iter().enumerate() {
            let r = residuals[fi * np + pi];
            worst = worst.max(r);
            least = least.min(r);
            table.row(&[
                name.to_string(),
                analytic.to_string(),
                pi.to_string(),
                fmt_f64(*tau),
                fmt_f64(r),
            ]);
        }
        if *analytic {
            out.check(Check::below(
                format!("{name}: worst residual"),
                worst,
                CR_TOL,
            ));
        } else {
            out.check(Check::above(
                format!("{name}: worst residual"),
                worst,
                NON_ANALYTIC_FLOOR,
            ));
        }
        summary.push(json!({
            "field": name,
            "analytic": analytic,
            "worst_residual": worst,
            "smallest_residual": least,
        }));
    }
    out.file("cr_scan.csv", table.into_string());
    out.detail("h", json!(CR_STEP));
    out.detail("probes", json!(np));
    out.detail("fields", json!(summary));
    Ok(out)
}

/// A random analytic `J` (diagonal quadratic) with a random constant potential.
#[derive(Clone, Debug)]
struct Instance {
    em: EMFieldConfig,
    b: [C64; 4],
    p: [C64; 4],
    probes: Vec<(f64, ComplexFourVector)>,
}

impl Instance {
    fn field(&self) -> ScalarField {
        diagonal_quadratic(self.b, self.p, 0.0, DomainBox::unbounded())
    }

    /// Exact `∂_μ J`, lower index.
    fn gradient(&self, z: &ComplexFourVector) -> ComplexFourVector {
        ComplexFourVector::lower(core::array::from_fn(|mu| self.b[mu] * z[mu] + self.p[mu]))
    }
}

fn instances(ctx: &Context) -> Result<Vec<Instance>, RunError> {
    let cfg = &ctx.cfg;
    let bx = cfg.domain_box().shrunk(0.05, 0.05);
    (0..cfg.audit.instances)
        .map(|k| {
            let mut rng = ctx.rng(1000 + k as u64);
            let q = rng.gen_range(-1.5..1.5);
            let m = rng.gen_range(0.5..2.0);
            let a = rand4(&mut rng, 1.0);
            let em = EMFieldConfig::new(
                q,
                m,
                cfg.physics.c,
                VectorPotential::constant(a),
                cfg.metric(),
            )?;
            let probes = halton_probes(&bx, cfg.audit.probes, (k * cfg.audit.probes) as u64)?;
            Ok(Instance {
                em,
                b: rand4(&mut rng, 1.0),
                p: rand4(&mut rng, 1.0),
                probes,
            })
        })
        .collect()
}

const CLOSED_FORM_TOL: f64 = 1e-10;
const AGREEMENT_TOL: f64 = 1e-8;

pub fn optimal_control(ctx: &Context) -> Result<Outcome, RunError> {
    let mut out = Outcome::new(
        "optimal-control",
        "stationarity of L + w.dJ and the closed-form EM control w* = -(dJ + qA)/m",
    );
    let inst = instances(ctx)?;
    type Row = (usize, usize, f64, ComplexFourVector, f64, f64);
    let rows: Vec<Result<Vec<Row>, Error>> = ctx.par_map(inst.len(), |k| {
        let it = &inst[k];
        let l = em_lagrangian_weak(&it.em);
        let guess = ComplexFourVector::zero(IndexPosition::Upper);
        it.probes
            .iter()
            .enumerate()
            .map(|(pi, (tau, z))| {
                let dj = it.gradient(z);
                let r = control::solve_optimal_control(&l, *tau, z, &dj, &guess, 1e-12)?;
                let closed = control::em_closed_form(&it.em, *tau, z, &dj);
                let stationarity = max_of(r.residual_complex.iter().map(|x| x.norm()));
                Ok((
                    k,
                    pi,
                    *tau,
                    r.w_star,
                    r.w_star.max_abs_diff(&closed),
                    stationarity,
                ))
            })
            .collect()
    });
    let mut table = Table::new(&[
        "instance",
        "probe",
        "tau",
        "w0_re",
        "w1_re",
        "w2_re",
        "w3_re",
        "w0_im",
        "w1_im",
        "w2_im",
        "w3_im",
        "closed_form_error",
        "stationarity_residual",
    ]);
    let (mut worst_cf, mut worst_res) = (0.0f64, 0.0f64);
    for r in rows {
        for (k, pi, tau, w, cf, res) in r? {
            worst_cf = worst_cf.max(cf);
            worst_res = worst_res.max(res);
            let mut row = vec![k.to_string(), pi.to_string(), fmt_f64(tau)];
            row.extend(w.re().iter().chain(w.im().iter()).map(|v| fmt_f64(*v)));
            row.push(fmt_f64(cf));
            row.push(fmt_f64(res));
            table.row(&row);
        }
    }
    out.file("optimal_control.csv", table.into_string());
    out.check(Check::below(
        "closed-form control error",
        worst_cf,
        CLOSED_FORM_TOL,
    ));
    out.check(Check::below(
        "complex stationarity residual",
        worst_res,
        1e-10,
    ));
    out.detail("instances", json!(inst.len()));
    out.detail("probes_per_instance", json!(ctx.cfg.audit.probes));
    Ok(out)
}

pub fn equivalence_audit(ctx: &Context) -> Result<Outcome, RunError> {
    let mut out = Outcome::new(
        "equivalence-audit",
        "real-part and imaginary-part stationarity conditions share their root for analytic J",
    );
    let inst = instances(ctx)?;
    let h = ctx.cfg.audit.h;
    let reports = ctx.par_map(inst.len(), |k| {
        let it = &inst[k];
        let l = em_lagrangian_weak(&it.em);
        let opts = AuditOptions {
            tol: AGREEMENT_TOL,
            h,
            em: Some(&it.em),
            ..AuditOptions::default()
        };
        control::equivalence_audit(&l, &it.field(), &it.probes, &opts)
    });
    let mut table = Table::new(&[
        "instance",
        "probe",
        "tau",
        "status",
        "disagreement",
        "closed_form_error",
    ]);
    let (mut worst_dis, mut worst_cf) = (0.0f64, 0.0f64);
    let (mut counter, mut singular) = (0usize, 0usize);
    for (k, r) in reports.into_iter().enumerate() {
        let r = r?;
        worst_dis = worst_dis.max(r.max_disagreement);
        worst_cf = worst_cf.max(r.max_closed_form_error.unwrap_or(f64::NAN));
        counter += r.counterexamples().count();
        singular += r.singular().count();
        for (pi, p) in r.probes.iter().enumerate() {
            let status = match p.status {
                ProbeStatus::Agree => "agree",
                ProbeStatus::Disagree => "disagree",
                ProbeStatus::NoInteriorStationaryPoint => "no-interior-stationary-point",
            };
            table.row(&[
                k.to_string(),
                pi.to_string(),
                fmt_f64(p.tau),
                status.to_string(),
                fmt_f64(p.disagreement),
                fmt_f64(p.closed_form_error.unwrap_or(f64::NAN)),
            ]);
        }
    }
    out.file("equivalence_audit.csv", table.into_string());
    out.check(Check::below(
        "max root disagreement",
        worst_dis,
        AGREEMENT_TOL,
    ));
    out.check(Check::below(
        "closed-form control error",
        worst_cf,
        CLOSED_FORM_TOL,
    ));
    out.check(Check::below("counterexamples", counter as f64, 0.5));
    out.check(Check::below(
        "probes without a stationary point",
        singular as f64,
        0.5,
    ));

    // a non-analytic J must be refused before any solve
    let em = &inst[0].em;
    let bad = ScalarField::unbounded(|_, z| z[0].conj() * z[1]);
    let refused = matches!(
        control::equivalence_audit(
            &em_lagrangian_weak(em),
            &bad,
            &inst[0].probes,
            &AuditOptions::default()
        ),
        Err(Error::NotAnalytic { .. })
    );
    out.check(Check::above(
        "non-analytic J refused",
        if refused { 1.0 } else { 0.0 },
        0.5,
    ));
    out.detail("instances", json!(inst.len()));
    out.detail("probes_per_instance", json!(ctx.cfg.audit.probes));
    out.detail("h", json!(h));
    Ok(out)
}
