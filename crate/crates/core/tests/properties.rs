//! Property tests for the algebraic invariants: convolution laws, the
//! decomposition round trip, palindromic root pairing, per-factor inverse
//! identities, and projection idempotence.

use invfir::charpoly::{
    char_polynomial, decompose, reconvolve, reduce_to_q, CharPolynomial, Decomposition,
    ElementaryFactor, FactorClass, Filter,
};
use invfir::deconv1d::{deconvolve, project_out_kernel, DeconvOptions};
use invfir::elementary::{invert_elementary, kernel_basis, pseudo_inverse, transfer_matrix};
use invfir::signal::{convolve, interior_rms, rms, Sequence};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn filter_from_params(params: &[f64]) -> Filter {
    let mut acc = Sequence::unitary();
    for &p in params {
        acc = convolve(&acc, &Filter::elementary(p).unwrap().as_sequence());
    }
    Filter::new(acc.values().to_vec()).unwrap()
}

fn eval_char(pc: &CharPolynomial, x: Complex64) -> Complex64 {
    let mut val = Complex64::new(0.0, 0.0);
    for &c in pc.coeffs().iter().rev() {
        val = val * x + c;
    }
    val
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn convolution_commutes_and_associates(
        a in prop::collection::vec(-1.0f64..1.0, 1..64),
        b in prop::collection::vec(-1.0f64..1.0, 1..64),
        c in prop::collection::vec(-1.0f64..1.0, 1..16),
    ) {
        let sa = Sequence::from_values(a).unwrap();
        let sb = Sequence::from_values(b).unwrap();
        let sc = Sequence::from_values(c).unwrap();
        let ab = convolve(&sa, &sb);
        let ba = convolve(&sb, &sa);
        prop_assert!(ab.rms(&ba).unwrap() <= 1e-12);
        let ab_c = convolve(&ab, &sc);
        let a_bc = convolve(&sa, &convolve(&sb, &sc));
        prop_assert!(ab_c.rms(&a_bc).unwrap() <= 1e-12);
    }

    #[test]
    fn convolution_with_unitary_is_exact_identity(
        a in prop::collection::vec(-100.0f64..100.0, 1..64),
    ) {
        let sa = Sequence::from_values(a).unwrap();
        let out = convolve(&sa, &Sequence::unitary());
        prop_assert_eq!(out.values(), sa.values());
    }

    #[test]
    fn q_reduction_matches_published_forms(c0 in -10.0f64..10.0, c1 in -10.0f64..10.0, c2 in -10.0f64..10.0) {
        let pc = CharPolynomial::new(vec![1.0, c1, c0, c1, 1.0]).unwrap();
        let q2 = reduce_to_q(&pc);
        prop_assert_eq!(q2.coeffs(), &[c0 - 2.0, -c1, 1.0]);

        let pc = CharPolynomial::new(vec![1.0, c2, c1, c0, c1, c2, 1.0]).unwrap();
        let q3 = reduce_to_q(&pc);
        prop_assert_eq!(q3.coeffs(), &[-(c0 - 2.0 * c2), c1 - 3.0, -c2, 1.0]);
    }

    #[test]
    fn decomposition_round_trip_recovers_parameters(
        mut params in prop::collection::vec(-5.0f64..5.0, 1..=8),
    ) {
        let f = filter_from_params(&params);
        let d = decompose(&f).unwrap();
        prop_assert!(d.residual <= 1e-9);
        let mut recovered: Vec<f64> = d.factors.iter().map(|x| x.center.re).collect();
        for x in &d.factors {
            prop_assert!(x.center.im.abs() <= 1e-7);
        }
        params.sort_by(f64::total_cmp);
        recovered.sort_by(f64::total_cmp);
        for (want, got) in params.iter().zip(&recovered) {
            prop_assert!((want - got).abs() <= 1e-7, "{want} vs {got}");
        }
    }

    #[test]
    fn palindromic_roots_pair_with_reciprocals(
        params in prop::collection::vec(-5.0f64..5.0, 1..=6),
    ) {
        let f = filter_from_params(&params);
        let pc = char_polynomial(&f);
        let d = decompose(&f).unwrap();
        for fac in &d.factors {
            // Roots of u^2 + pu + 1 for each recovered factor.
            let disc = (fac.center * fac.center - Complex64::new(4.0, 0.0)).sqrt();
            for u in [(-fac.center + disc) / 2.0, (-fac.center - disc) / 2.0] {
                prop_assert!(eval_char(&pc, u).norm() <= 1e-8 * (1.0 + u.norm().powi(pc.degree() as i32)));
                let inv = 1.0 / u;
                prop_assert!(eval_char(&pc, inv).norm() <= 1e-8 * (1.0 + inv.norm().powi(pc.degree() as i32)));
            }
        }
    }

    #[test]
    fn reconvolution_of_conjugate_pairs_is_real(re in -1.8f64..1.8, im in 0.1f64..1.5) {
        let center = Complex64::new(re, im);
        let d = Decomposition {
            gain: 1.0,
            factors: vec![
                ElementaryFactor { center, conjugate_partner: Some(1), class: FactorClass::Invertible },
                ElementaryFactor { center: center.conj(), conjugate_partner: Some(0), class: FactorClass::Invertible },
            ],
            residual: 0.0,
        };
        let f = reconvolve(&d).unwrap();
        prop_assert_eq!(f.coeffs().len(), 5);
    }

    #[test]
    fn elementary_inverse_identity_holds(p_abs in 2.05f64..8.0, negative in any::<bool>()) {
        let p = if negative { -p_abs } else { p_abs };
        let inv = invert_elementary(p, 1e-12).unwrap();
        let conv = convolve(&Filter::elementary(p).unwrap().as_sequence(), &inv.z);
        let mut worst = 0.0f64;
        for t in conv.start_position()..=conv.end_position() {
            let want = if t == 0 { 1.0 } else { 0.0 };
            worst = worst.max((conv.get(t) - want).abs());
        }
        prop_assert!(worst <= 1e-10);
    }

    #[test]
    fn inverse_tail_decays_geometrically(p_abs in 2.05f64..8.0) {
        let inv = invert_elementary(p_abs, 1e-12).unwrap();
        let u1 = (-p_abs + (p_abs * p_abs - 4.0).sqrt()) / 2.0;
        for t in 1..inv.half_support() as i64 {
            let ratio = inv.z.get(t + 1) / inv.z.get(t);
            prop_assert!((ratio - u1).abs() <= 1e-12 * (1.0 + u1.abs()));
        }
    }

    #[test]
    fn pseudo_inverse_is_bounded_and_solves_identity(p in -1.95f64..1.95) {
        let half = 48;
        let inv = pseudo_inverse(p, half).unwrap();
        let bound = 1.0 / (4.0 - p * p).sqrt();
        for &v in inv.z.values() {
            prop_assert!(v.abs() <= bound + 1e-12);
        }
        let conv = convolve(&Filter::elementary(p).unwrap().as_sequence(), &inv.z);
        for t in -(half as i64 - 2)..=(half as i64 - 2) {
            let want = if t == 0 { 1.0 } else { 0.0 };
            prop_assert!((conv.get(t) - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn kernel_vectors_are_annihilated(p in -1.999f64..1.999) {
        let kb = kernel_basis(p, 48).unwrap();
        let c = Filter::elementary(p).unwrap().as_sequence();
        for k in [&kb.k1, &kb.k2] {
            let conv = convolve(&c, k);
            for t in 1..=46 {
                prop_assert!(conv.get(t).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn transfer_matrix_satisfies_vieta(p in -8.0f64..8.0) {
        let tm = transfer_matrix(p);
        let [u1, u2] = tm.eigenvalues;
        prop_assert!((u1 * u2 - Complex64::new(1.0, 0.0)).norm() <= 1e-12);
        prop_assert!((u1 + u2 + Complex64::new(p, 0.0)).norm() <= 1e-12 * (1.0 + p.abs()));
    }

    #[test]
    fn kernel_projection_is_idempotent(
        values in prop::collection::vec(-1.0f64..1.0, 16..64),
        p in -1.9f64..1.9,
    ) {
        let x = Sequence::from_values(values).unwrap();
        let kb = kernel_basis(p, x.len()).unwrap();
        let once = project_out_kernel(&x, &kb).unwrap();
        let twice = project_out_kernel(&once, &kb).unwrap();
        prop_assert!(rms(once.values(), twice.values()).unwrap() <= 1e-12);
    }
}

// The heavier end-to-end invariants run over a fixed set of seeded draws.

#[test]
fn exact_inverse_round_trip_for_random_invertible_filters() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..8 {
        let n = rng.gen_range(1..=5);
        let params: Vec<f64> = (0..n)
            .map(|_| {
                let mag = rng.gen_range(2.05..6.0);
                if rng.gen::<bool>() {
                    mag
                } else {
                    -mag
                }
            })
            .collect();
        let f = {
            let mut acc = Sequence::unitary();
            for &p in &params {
                acc = convolve(&acc, &Filter::elementary(p).unwrap().as_sequence());
            }
            Filter::new(acc.values().to_vec()).unwrap()
        };
        let x = Sequence::from_values((0..512).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let y = convolve(&f.as_sequence(), &x);
        let (restored, report) = deconvolve(&y, &f, &DeconvOptions::default()).unwrap();
        let margin = report.inverse_support + f.order();
        let err = interior_rms(&restored, &x, margin).unwrap();
        assert!(err <= 1e-8, "params {params:?}: interior rms {err}");
    }
}

#[test]
fn pseudo_inverse_round_trip_with_one_oscillatory_factor() {
    let mut rng = ChaCha8Rng::seed_from_u64(777);
    for _ in 0..6 {
        let p_osc = rng.gen_range(-1.8..1.8);
        let p_inv = rng.gen_range(2.2..5.0);
        let f = {
            let a = Filter::elementary(p_inv).unwrap().as_sequence();
            let b = Filter::elementary(p_osc).unwrap().as_sequence();
            Filter::new(convolve(&a, &b).values().to_vec()).unwrap()
        };
        let raw = Sequence::from_values((0..384).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let truth = project_out_kernel(&raw, &kernel_basis(p_osc, raw.len()).unwrap()).unwrap();
        let y = convolve(&f.as_sequence(), &truth);
        let (restored, report) = deconvolve(&y, &f, &DeconvOptions::default()).unwrap();
        assert_eq!(report.length_loss, 2);
        let margin = report.inverse_support + f.order();
        let err = interior_rms(&restored, &truth, margin).unwrap();
        assert!(err <= 1e-8, "p_osc {p_osc}, p_inv {p_inv}: rms {err}");
    }
}
