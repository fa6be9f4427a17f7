use cilab_core::beltrami::{build_families, gamma};
use cilab_core::field::{c0_norm, divergence_tensor, Field};
use cilab_core::inverse_div::inverse_divergence;
use cilab_core::iteration::CutoffFamily;
use cilab_core::linalg;
use cilab_core::parameters::{d_min, ParameterSchedule};
use cilab_core::verify::random_field;
use cilab_core::GridSpec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn inverse_divergence_inverts_on_random_fields(seed in any::<u64>()) {
        let g = GridSpec::new(16).unwrap();
        let v = random_field(&g, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut centred = v.clone();
        for c in &mut centred.comps {
            let m = c.iter().sum::<f64>() / c.len() as f64;
            c.iter_mut().for_each(|x| *x -= m);
        }
        let r = inverse_divergence(&v);
        let err = c0_norm(&divergence_tensor(&r).sub(&centred).unwrap());
        prop_assert!(err <= 1e-11 * c0_norm(&centred));
        prop_assert!(c0_norm(&r.trace()) <= 1e-12 * c0_norm(&r));
    }

    #[test]
    fn gamma_reconstructs_inside_the_ball(
        dir in prop::array::uniform6(-1.0f64..1.0),
        frac in 0.0f64..0.99,
        odd in any::<bool>(),
    ) {
        prop_assume!(linalg::sym_op_norm(dir) > 1e-3);
        let (e, o) = build_families().unwrap();
        let f = if odd { &o } else { &e };
        let unit = linalg::sym_scale(&dir, 1.0 / linalg::sym_op_norm(dir));
        let r: linalg::Sym3 = std::array::from_fn(|c| linalg::SYM_IDENTITY[c] + frac * f.r0 * unit[c]);
        let g = gamma(&r, f).unwrap();
        prop_assert!(g.values.iter().all(|&x| x > 0.0));
        let back = g.reconstruct(f);
        prop_assert!(linalg::sym_op_norm(linalg::sym_sub(&back, &r)) <= 1e-12);
    }

    #[test]
    fn log_space_matches_direct_arithmetic(lambda0 in 2u64..2000, eps0 in 0.01f64..=0.1) {
        let s = ParameterSchedule::build(eps0, (lambda0 as f64).ln(), 3, 1.0).unwrap();
        let b = -0.4 + 2.0 * eps0;
        for q in 1..=3 {
            let (Some(lp), Some(l)) = (s.lambda_exact[q - 1], s.lambda_exact[q]) else { continue };
            let (lp, l) = (lp as f64, l as f64);
            let delta = l.powf(b);
            let mu = (lp.powf(b) * delta).powf(0.25) * (lp * l).sqrt();
            prop_assert!((s.delta(q) / delta - 1.0).abs() <= 1e-12);
            prop_assert!((s.mu(q) / mu - 1.0).abs() <= 1e-12);
            prop_assert!((s.ell(q) / l.powf(-1.0 + s.eps1) - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn cutoffs_partition_unity(mu_log2 in 3u32..10, t in -0.5f64..0.5) {
        let mu = (1u64 << mu_log2) as f64;
        let c = CutoffFamily::new(mu, 0.05 * 0.05 / 18.0, 4.0, 1e-7).unwrap();
        prop_assert!((c.square_sum(t) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn d_min_gap_is_quadratic(eps0 in 0.001f64..=0.1) {
        let d = d_min(eps0);
        prop_assert!(d < 1.0);
        // 1 − d_min ≈ ε₀²/(9(4/5 + ε₀)(2 + ε₀)) · (1 + ε₀) for small ε₀
        prop_assert!((1.0 - d) / (eps0 * eps0) > 0.05);
    }
}
