use csoc_core::ccalc::{self, ScalarField};
use csoc_core::control::{self, AuditOptions};
use csoc_core::hjb::{self, HJBProblem};
use csoc_core::lagrangian::{em_lagrangian_weak, EMFieldConfig, VectorPotential};
use csoc_core::probes::DomainBox;
use csoc_core::spacetime::{
    contract, ComplexFourVector, IndexPosition, Metric, Sign, Signature, C64,
};
use csoc_core::wiener::{sample_increments, DiffusionSpec};
use proptest::prelude::*;

fn c64() -> impl Strategy<Value = C64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| C64::new(a, b))
}

fn vec4() -> impl Strategy<Value = [C64; 4]> {
    prop::array::uniform4(c64())
}

fn metric() -> impl Strategy<Value = Metric> {
    (any::<bool>(), any::<bool>()).prop_map(|(s, e)| {
        Metric::new(
            if s {
                Signature::TimeNegative
            } else {
                Signature::TimePositive
            },
            if e { Sign::Plus } else { Sign::Minus },
        )
    })
}

fn close(a: C64, b: C64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn contraction_is_symmetric_and_bilinear(a in vec4(), b in vec4(), d in vec4(), s in c64(), g in metric()) {
        let (a, b, d) = (ComplexFourVector::upper(a), ComplexFourVector::upper(b), ComplexFourVector::upper(d));
        prop_assert!(close(contract(&a, &b, &g), contract(&b, &a, &g), 1e-14));
        let lhs = contract(&(a.scale(s) + d), &b, &g);
        let rhs = s * contract(&a, &b, &g) + contract(&d, &b, &g);
        prop_assert!(close(lhs, rhs, 1e-13));
    }

    #[test]
    fn signatures_flip_the_contraction(a in vec4(), b in vec4()) {
        let (a, b) = (ComplexFourVector::upper(a), ComplexFourVector::upper(b));
        let neg = Metric::new(Signature::TimeNegative, Sign::Plus);
        let pos = Metric::new(Signature::TimePositive, Sign::Plus);
        prop_assert_eq!(contract(&a, &b, &neg), -contract(&a, &b, &pos));
    }

    #[test]
    fn increments_follow_the_sign_rule(g in metric(), seed in any::<u64>(), dt in 1e-4..1.0f64) {
        let spec = DiffusionSpec::isotropic(1.0, g).unwrap();
        let batch = sample_increments(&spec, dt, 8, seed).unwrap();
        for (x, y) in batch.dwx.iter().zip(&batch.dwy) {
            for mu in 0..4 {
                prop_assert_eq!(y[mu], g.epsilon() * g.eta(mu) * x[mu]);
            }
        }
        prop_assert_eq!(&batch, &sample_increments(&spec, dt, 8, seed).unwrap());
    }

    #[test]
    fn equal_coefficients_give_imaginary_diffusion(g in metric(), s in prop::array::uniform4(0.0..3.0f64)) {
        let spec = DiffusionSpec::new(s, s, g).unwrap();
        for (mu, v) in spec.complex_sigma_squared().iter().enumerate() {
            prop_assert_eq!(v.re, 0.0);
            prop_assert_eq!(v.im, 2.0 * g.epsilon() * g.eta(mu) * s[mu] * s[mu]);
        }
    }

    #[test]
    fn pair_identities_are_exact(z in c64()) {
        let i = C64::new(0.0, 1.0);
        prop_assert_eq!(ccalc::from_real_parts(z.re, (i * z).re), z);
        prop_assert_eq!(ccalc::from_imag_parts((i * z).im, z.im), z);
    }

    #[test]
    fn em_control_matches_closed_form(
        dj in vec4(),
        a in vec4(),
        q in -2.0..2.0f64,
        m in 0.5..3.0f64,
        g in metric(),
    ) {
        let cfg = EMFieldConfig::new(q, m, 1.0, VectorPotential::constant(a), g).unwrap();
        let l = em_lagrangian_weak(&cfg);
        let z = ComplexFourVector::zero(IndexPosition::Upper);
        let djv = ComplexFourVector::lower(dj);
        let r = control::solve_optimal_control(&l, 0.0, &z, &djv, &z, 1e-12).unwrap();
        let closed = control::em_closed_form(&cfg, 0.0, &z, &djv);
        prop_assert!(r.w_star.max_abs_diff(&closed) < 1e-10);
        for mu in 0..4 {
            let re = ccalc::from_real_parts(r.residual_real_pair[mu], r.residual_real_pair[mu + 4]);
            prop_assert!(close(re, r.residual_complex[mu], 1e-8));
        }
    }

    #[test]
    fn pair_sets_share_roots_for_quadratic_fields(b in vec4(), p in vec4(), q in -1.0..1.0f64, a in vec4()) {
        let cfg = EMFieldConfig::new(q, 1.0, 1.0, VectorPotential::constant(a), Metric::default()).unwrap();
        let l = em_lagrangian_weak(&cfg);
        let j = ScalarField::unbounded(move |_, z| {
            (0..4).fold(C64::new(0.0, 0.0), |acc, mu| acc + b[mu] * z[mu] * z[mu] * 0.5 + p[mu] * z[mu])
        });
        let bx = DomainBox::cube((0.0, 1.0), 0.5);
        let probes = csoc_core::probes::halton_probes(&bx, 3, 7).unwrap();
        let opts = AuditOptions { em: Some(&cfg), ..AuditOptions::default() };
        let r = control::equivalence_audit(&l, &j, &probes, &opts).unwrap();
        prop_assert!(r.max_disagreement < 1e-8, "{}", r.max_disagreement);
        prop_assert!(r.max_closed_form_error.unwrap() < 1e-8);
    }

    #[test]
    fn pair_and_complex_hjb_residuals_agree(b in vec4(), p in vec4(), g in metric()) {
        let cfg = EMFieldConfig::free(1.0, 1.0, g).unwrap();
        let spec = DiffusionSpec::quantum(1.0, 1.0, g).unwrap();
        let bx = DomainBox::cube((0.0, 1.0), 1.0);
        let prob = HJBProblem::new(em_lagrangian_weak(&cfg), spec, 1.0, bx).unwrap();
        let j = ScalarField::new(bx, move |t, z| {
            (0..4).fold(C64::new(t, 0.0), |acc, mu| acc + b[mu] * z[mu] * z[mu] * 0.5 + p[mu] * z[mu])
        });
        let z = ComplexFourVector::upper([C64::new(0.1, 0.2), C64::new(-0.3, 0.0), C64::new(0.2, 0.1), C64::new(0.0, -0.2)]);
        let r = hjb::pair_complex_consistency(&prob, &j, 0.5, &z, 1e-3).unwrap();
        prop_assert!(r.within(5.0), "{r:?}");
    }
}
