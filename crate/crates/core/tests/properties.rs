use std::f64::consts::LN_2;

use nalgebra::DMatrix;
use proptest::prelude::*;
use qhyper_core::harness::{gen_random_hermitian, gen_random_operator, gen_random_psd};
use qhyper_core::operator::{
    degree, hs_inner, inverse_pauli_transform, normalized_trace, pauli_matrix, pauli_transform,
    MultiIndex,
};
use qhyper_core::semigroup::{depolarize, depolarize_dense, dirichlet_form, dirichlet_form_dense};
use qhyper_core::sobolev::{alpha, binary_entropy, binary_entropy_inverse, lsi_check, phi};
use qhyper_core::spectral::schatten_norm;
use qhyper_core::C64;

fn single(k: u8) -> DMatrix<C64> {
    let z = C64::new(0.0, 0.0);
    let o = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match k {
        0 => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        1 => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        2 => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        _ => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

fn naive_pauli(s: &[u8]) -> DMatrix<C64> {
    s.iter().fold(
        DMatrix::from_element(1, 1, C64::new(1.0, 0.0)),
        |acc, &k| acc.kronecker(&single(k)),
    )
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn parseval_and_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let x = gen_random_operator(n, seed).unwrap();
        let c = pauli_transform(&x);
        let hs = hs_inner(&x, &x).unwrap().re;
        prop_assert!((c.norm_sqr() - hs).abs() <= 1e-10 * hs.max(1.0));
        let back = inverse_pauli_transform(&c);
        prop_assert!(max_diff(back.matrix(), x.matrix()) <= 1e-10);
    }

    #[test]
    fn fast_transform_matches_naive(n in 1usize..=3, seed in any::<u64>()) {
        let x = gen_random_operator(n, seed).unwrap();
        let c = pauli_transform(&x);
        let dim = 1usize << n;
        for (s, value) in c.iter() {
            let p = naive_pauli(s.entries());
            let expected = (p.adjoint() * x.matrix()).trace() / C64::new(dim as f64, 0.0);
            prop_assert!((value - expected).norm() <= 1e-12);
        }
    }

    #[test]
    fn pauli_matrix_matches_kronecker(n in 1usize..=3, index in any::<usize>()) {
        let s = MultiIndex::from_linear(n, index % (1 << (2 * n)));
        let p = pauli_matrix(&s);
        prop_assert_eq!(p.matrix(), &naive_pauli(s.entries()));
        prop_assert_eq!(degree(&pauli_matrix(&s)), s.weight());
    }

    #[test]
    fn pauli_and_dense_paths_agree(n in 1usize..=3, seed in any::<u64>(), t in 0.0f64..3.0) {
        let x = gen_random_operator(n, seed).unwrap();
        let a = depolarize(&x, t).unwrap();
        let b = depolarize_dense(&x, t).unwrap();
        prop_assert!(max_diff(a.matrix(), b.matrix()) <= 1e-11);
        let d = dirichlet_form(&x);
        prop_assert!((d - dirichlet_form_dense(&x)).abs() <= 1e-11 * d.max(1.0));
    }

    #[test]
    fn semigroup_law_and_trace(n in 1usize..=3, seed in any::<u64>(), s in 0.0f64..2.0, t in 0.0f64..2.0) {
        let x = gen_random_hermitian(n, seed).unwrap();
        let lhs = depolarize(&depolarize(&x, s).unwrap(), t).unwrap();
        let rhs = depolarize(&x, s + t).unwrap();
        prop_assert!(max_diff(lhs.matrix(), rhs.matrix()) <= 1e-12);
        prop_assert!((normalized_trace(&rhs) - normalized_trace(&x)).norm() <= 1e-12);
    }

    #[test]
    fn depolarizing_contracts_schatten_norms(n in 1usize..=3, seed in any::<u64>(), t in 0.0f64..2.0, p in 1.0f64..6.0) {
        let x = gen_random_operator(n, seed).unwrap();
        let before = schatten_norm(&x, p).unwrap();
        let after = schatten_norm(&depolarize(&x, t).unwrap(), p).unwrap();
        prop_assert!(after <= before * (1.0 + 1e-12));
    }

    #[test]
    fn entropy_inverse_round_trip(s in 0.0f64..=0.5) {
        let y = binary_entropy(s).unwrap();
        let back = binary_entropy_inverse(y).unwrap();
        prop_assert!((binary_entropy(back).unwrap() - y).abs() <= 1e-14);
    }

    #[test]
    fn alpha_range_and_monotone(a in 0.0f64..=LN_2, b in 0.0f64..=LN_2) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let (alo, ahi) = (alpha(lo).unwrap(), alpha(hi).unwrap());
        prop_assert!(alo >= 0.5 && ahi <= 0.5 / LN_2 + 1e-15);
        prop_assert!(alo <= ahi + 1e-15);
        prop_assert!(phi(hi).unwrap() >= 0.0);
    }

    #[test]
    fn improved_lsi_on_random_psd(n in 1usize..=3, seed in any::<u64>()) {
        let x = gen_random_psd(n, seed).unwrap();
        let rep = lsi_check(&x, 1e-9).unwrap();
        prop_assert!(rep.passed());
        prop_assert!(rep.lhs >= rep.classical_lhs);
        prop_assert!((0.0..=LN_2).contains(&rep.xi));
    }
}
