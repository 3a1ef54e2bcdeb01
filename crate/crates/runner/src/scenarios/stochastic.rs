use csoc_core::control::em_closed_form;
use csoc_core::hjb::free_particle_field;
use csoc_core::lagrangian::em_lagrangian_weak;
use csoc_core::probes::DomainBox;
use csoc_core::sde::{self, ControlPolicy, Schedule, State};
use csoc_core::stats::RunningMoments;
use csoc_core::wiener::{moment_check, DiffusionSpec};
use csoc_core::{ComplexFourVector, IndexPosition, Metric, Sign, Signature, C64};
use serde_json::json;

use super::{max_of, Context};
use crate::config::complex4;
use crate::error::RunError;
use crate::output::{fmt_f64, Check, Outcome, Table};

const Z_LIMIT: f64 = 5.0;

pub fn moments(ctx: &Context) -> Result<Outcome, RunError> {
    let cfg = &ctx.cfg;
    let mut out = Outcome::new(
        "moments",
        "first and second moments of the signed, perfectly correlated complex Wiener increments",
    );
    let spec = cfg.diffusion()?;
    let report = moment_check(
        &spec,
        cfg.moments.drift_re,
        cfg.moments.drift_im,
        cfg.run.d_tau,
        cfg.run.n_paths,
        ctx.seed(),
    )?;

    let mut table = Table::new(&[
        "kind",
        "mu",
        "nu",
        "estimate",
        "std_error",
        "target",
        "leading_order_target",
        "z_score",
    ]);
    for e in &report.estimates {
        table.row(&[
            e.kind.label().replace(' ', "*"),
            e.mu.to_string(),
            e.nu.to_string(),
            fmt_f64(e.estimate),
            fmt_f64(e.std_error),
            fmt_f64(e.target),
            fmt_f64(e.leading_order_target),
            fmt_f64(e.z_score),
        ]);
    }
    out.file("moments.csv", table.into_string());
    out.check(Check::below("max moment z-score", report.max_z(), Z_LIMIT));
    out.detail("n", json!(report.n));
    out.detail("d_tau", json!(report.d_tau));
    out.detail(
        "flagged",
        json!(report
            .flagged()
            .map(|e| format!("<{}> [{},{}]", e.kind.label(), e.mu, e.nu))
            .collect::<Vec<_>>()),
    );

    // σσ = 2iεη ħ/m whenever σ_x² = σ_y² = ħ/m
    let mut worst = 0.0f64;
    let mut cases = Vec::new();
    for signature in [Signature::TimeNegative, Signature::TimePositive] {
        for eps in [Sign::Plus, Sign::Minus] {
            for (hbar, m) in [(1.0, 1.0), (1.054_571_817e-34, 9.109_383_7e-31)] {
                let g = Metric::new(signature, eps);
                let s = DiffusionSpec::quantum(hbar, m, g)?.complex_sigma_squared();
                let err = max_of((0..4).map(|mu| {
                    let expect = C64::new(0.0, 2.0 * eps.value() * g.eta(mu) * hbar / m);
                    (s[mu] - expect).norm() / (hbar / m)
                }));
                worst = worst.max(err);
                cases.push(json!({
                    "signature": signature.name(),
                    "epsilon": eps.value(),
                    "hbar_over_m": hbar / m,
                    "relative_error": err,
                }));
            }
        }
    }
    out.check(Check::below(
        "complex diffusion coefficient relative error",
        worst,
        8.0 * f64::EPSILON,
    ));
    out.detail("complex_diffusion_cases", json!(cases));
    Ok(out)
}

pub fn sde_demo(ctx: &Context) -> Result<Outcome, RunError> {
    let cfg = &ctx.cfg;
    let demo = &cfg.sde_demo;
    let mut out = Outcome::new(
        "sde-demo",
        "Euler-Maruyama transport of the complex coordinates under the optimal free-particle control",
    );
    let spec = cfg.diffusion()?;
    let em = cfg.em_config(&cfg.hjb.potential)?;
    let p = complex4(demo.momentum_re, demo.momentum_im);
    let z0 = ComplexFourVector::from_parts(demo.start_re, demo.start_im, IndexPosition::Upper);
    let sched = Schedule::new(cfg.domain.tau[0], cfg.run.d_tau, cfg.run.n_steps)?;
    let policy = {
        let em = em.clone();
        let dj = ComplexFourVector::lower(p);
        ControlPolicy::new(move |t, z| em_closed_form(&em, t, z, &dj))
    };
    let seed = ctx.seed();
    let n = cfg.run.n_paths;

    let runs: Vec<(Result<State, sde::Blowup>, Vec<State>)> = ctx.par_map(n, |i| {
        let mut hist = Vec::new();
        let keep = i < demo.saved_paths;
        let end = sde::simulate_path(&policy, &spec, &z0, &sched, seed, i as u64, |_, _, z, _| {
            if keep {
                hist.push(sde::state_of(z));
            }
        });
        if let (true, Ok(s)) = (keep, &end) {
            hist.push(*s);
        }
        (end, hist)
    });

    let mut table = Table::new(&[
        "path", "step", "tau", "x0", "x1", "x2", "x3", "y0", "y1", "y2", "y3",
    ]);
    for (i, (_, hist)) in runs.iter().enumerate().take(demo.saved_paths) {
        for (k, s) in hist.iter().enumerate() {
            let mut row = vec![i.to_string(), k.to_string(), fmt_f64(sched.tau(k))];
            row.extend(s.iter().map(|v| fmt_f64(*v)));
            table.row(&row);
        }
    }
    out.file("trajectories.csv", table.into_string());

    let mut acc = [RunningMoments::new(); 8];
    let mut excluded = 0usize;
    for (end, _) in &runs {
        match end {
            Ok(s) => acc.iter_mut().zip(s).for_each(|(a, v)| a.push(*v)),
            Err(_) => excluded += 1,
        }
    }
    let frac = excluded as f64 / n as f64;
    out.check(Check::below(
        "excluded path fraction",
        frac,
        sde::MAX_EXCLUDED_FRACTION + f64::EPSILON,
    ));

    // the control is constant, so z_T is Gaussian with known moments
    let t = sched.n_steps as f64 * sched.d_tau;
    let w = policy.eval(sched.tau0, &z0);
    let mut coords = Vec::new();
    let (mut worst_mean, mut worst_var) = (0.0f64, 0.0f64);
    for (k, a) in acc.iter().enumerate() {
        let mu = k % 4;
        let (mean_t, sigma) = if k < 4 {
            (z0[mu].re + w[mu].re * t, spec.sigma_x[mu])
        } else {
            (z0[mu].im + w[mu].im * t, spec.sigma_y[mu])
        };
        let var_t = sigma * sigma * t;
        let m = a.count() as f64;
        let z_mean = z_score(a.mean(), mean_t, (var_t / m).sqrt());
        let z_var = z_score(a.variance(), var_t, var_t * (2.0 / (m - 1.0)).sqrt());
        worst_mean = worst_mean.max(z_mean);
        worst_var = worst_var.max(z_var);
        coords.push(json!({
            "coordinate": if k < 4 { format!("x{mu}") } else { format!("y{mu}") },
            "mean": a.mean(),
            "expected_mean": mean_t,
            "variance": a.variance(),
            "expected_variance": var_t,
        }));
    }
    out.check(Check::below("endpoint mean z-score", worst_mean, Z_LIMIT));
    out.check(Check::below(
        "endpoint variance z-score",
        worst_var,
        Z_LIMIT,
    ));
    out.detail("endpoints", json!(coords));

    let j = free_particle_field(&em, p, cfg.hjb.tau_final, DomainBox::unbounded())?;
    let l = em_lagrangian_weak(&em);
    let d_tau = demo.bellman_d_tau;
    let b = sde::bellman_consistency(&j, &l, &policy, &spec, sched.tau0, &z0, d_tau, n, seed)?;
    let floor = d_tau * d_tau;
    out.check(Check::below(
        "one-step Bellman residual (real) over 10 max(dtau^2, stderr)",
        b.residual.re.abs() / (10.0 * floor.max(b.std_error_re)),
        1.0,
    ));
    out.check(Check::below(
        "one-step Bellman residual (imag) over 10 max(dtau^2, stderr)",
        b.residual.im.abs() / (10.0 * floor.max(b.std_error_im)),
        1.0,
    ));
    out.detail(
        "bellman",
        json!({
            "d_tau": d_tau,
            "residual": [b.residual.re, b.residual.im],
            "std_error": [b.std_error_re, b.std_error_im],
            "excluded": b.estimate.excluded.len(),
        }),
    );
    out.detail("n_paths", json!(n));
    out.detail("excluded", json!(excluded));
    Ok(out)
}

fn z_score(estimate: f64, target: f64, se: f64) -> f64 {
    let d = (estimate - target).abs();
    if se > 0.0 {
        d / se
    } else if d <= 1e-12 * (1.0 + target.abs()) {
        0.0
    } else {
        f64::INFINITY
    }
}
