use csoc_core::sde::{self, ControlPolicy, Schedule};
use csoc_core::spacetime::{ComplexFourVector, IndexPosition, Metric, C64};
use csoc_core::wiener::{
    draw_increment, moment_check, path_rng, sample_increments, DiffusionSpec, MomentKind,
};

fn origin() -> ComplexFourVector {
    ComplexFourVector::zero(IndexPosition::Upper)
}

#[test]
fn brownian_variance_at_unit_time() {
    let spec = DiffusionSpec::isotropic(1.0, Metric::default()).unwrap();
    let sched = Schedule::new(0.0, 0.01, 100).unwrap();
    let n = 100_000;
    let e = sde::integrate_endpoints(&ControlPolicy::zero(), &spec, &origin(), &sched, n, 2024)
        .unwrap();
    assert!(e.excluded.is_empty());
    let xs: Vec<f64> = e.finals.iter().map(|s| s[1]).collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let band = 5.0 * (2.0 / n as f64).sqrt();
    assert!((var - 1.0).abs() < band, "variance {var}, band {band}");
}

#[test]
fn increment_variance_scales_with_step() {
    let spec = DiffusionSpec::isotropic(1.0, Metric::default()).unwrap();
    let n = 40_000;
    for dt in [0.001, 0.01, 0.1] {
        let b = sample_increments(&spec, dt, n, 5).unwrap();
        let col = b.column_x(2);
        let var = col.iter().map(|x| x * x).sum::<f64>() / n as f64;
        // sample second moment of N(0, dt): sd = dt √(2/n)
        assert!(
            (var - dt).abs() < 5.0 * dt * (2.0 / n as f64).sqrt(),
            "dt {dt}: {var}"
        );
    }
}

#[test]
fn batch_rows_are_first_steps_of_paths() {
    let spec = DiffusionSpec::isotropic(1.0, Metric::default()).unwrap();
    let b = sample_increments(&spec, 0.01, 5, 77).unwrap();
    let sched = Schedule::new(0.0, 0.01, 1).unwrap();
    let e = sde::integrate(&ControlPolicy::zero(), &spec, &origin(), &sched, 5, 77).unwrap();
    for p in 0..5 {
        let s = e.state(p, 1);
        for mu in 0..4 {
            assert_eq!(s[mu], b.dwx[p][mu]);
            assert_eq!(s[mu + 4], b.dwy[p][mu]);
        }
    }
}

#[test]
fn moments_with_drift() {
    let spec = DiffusionSpec::new(
        [1.0, 0.5, 1.0, 2.0],
        [1.0, 0.5, 0.25, 1.0],
        Metric::default(),
    )
    .unwrap();
    let v = [1.0, -0.5, 0.0, 0.3];
    let u = [0.2, 0.0, 1.0, -0.4];
    let r = moment_check(&spec, v, u, 0.01, 200_000, 31).unwrap();
    assert!(r.passed(), "max z {}", r.max_z());
    let xy = r.get(MomentKind::XY, 0, 0).unwrap();
    assert!((xy.leading_order_target + 0.01).abs() < 1e-15);
}

fn linear_policy() -> ControlPolicy {
    let mut a = [[C64::new(0.0, 0.0); 4]; 4];
    a[0][0] = C64::new(-1.0, 0.3);
    a[1][1] = C64::new(0.5, 0.0);
    a[2][3] = C64::new(0.0, -1.0);
    a[3][2] = C64::new(0.4, 0.2);
    a[1][0] = C64::new(0.2, 0.0);
    ControlPolicy::linear(a)
}

#[test]
fn deterministic_limit_matches_explicit_euler() {
    let g = Metric::default();
    let spec = DiffusionSpec::deterministic(g);
    let z0 = ComplexFourVector::from_parts(
        [1.0, 0.5, -0.2, 0.3],
        [0.1, 0.0, 0.4, -0.3],
        IndexPosition::Upper,
    );
    let sched = Schedule::new(0.0, 0.01, 200).unwrap();
    let e = sde::integrate(&linear_policy(), &spec, &z0, &sched, 1, 0).unwrap();
    let pol = linear_policy();
    let mut z = z0;
    for k in 0..200 {
        let w = pol.eval(k as f64 * 0.01, &z);
        z = z + w * 0.01;
        let s = e.state(0, k + 1);
        for mu in 0..4 {
            assert!((s[mu] - z[mu].re).abs() < 1e-12);
            assert!((s[mu + 4] - z[mu].im).abs() < 1e-12);
        }
    }
}

#[test]
fn strong_error_halves_with_the_step() {
    let spec = DiffusionSpec::isotropic(0.5, Metric::default()).unwrap();
    let z0 = ComplexFourVector::from_parts(
        [1.0, 0.5, -0.2, 0.3],
        [0.1, 0.0, 0.4, -0.3],
        IndexPosition::Upper,
    );
    let pol = linear_policy();
    let (t, fine_n) = (1.0, 1024usize);
    let dt_fine = t / fine_n as f64;
    let mut err = [0.0f64; 2];
    for p in 0..100u64 {
        let mut rng = path_rng(99, p);
        let fine: Vec<[f64; 4]> = (0..fine_n)
            .map(|_| draw_increment(&mut rng, dt_fine.sqrt()))
            .collect();
        let reference = sde::integrate_with_increments(
            &pol,
            &spec,
            &z0,
            &Schedule::new(0.0, dt_fine, fine_n).unwrap(),
            &fine,
        )
        .unwrap();
        let exact = reference.last().unwrap();
        for (slot, steps) in [(0, 16usize), (1, 32)] {
            let ratio = fine_n / steps;
            let coarse: Vec<[f64; 4]> = fine
                .chunks(ratio)
                .map(|ch| {
                    let mut s = [0.0; 4];
                    ch.iter().for_each(|d| (0..4).for_each(|mu| s[mu] += d[mu]));
                    s
                })
                .collect();
            let path = sde::integrate_with_increments(
                &pol,
                &spec,
                &z0,
                &Schedule::new(0.0, t / steps as f64, steps).unwrap(),
                &coarse,
            )
            .unwrap();
            let last = path.last().unwrap();
            err[slot] += (0..8)
                .map(|i| (last[i] - exact[i]).powi(2))
                .sum::<f64>()
                .sqrt()
                / 100.0;
        }
    }
    let ratio = err[1] / err[0];
    assert!((0.35..=0.65).contains(&ratio), "ratio {ratio} ({:?})", err);
}
