use crate::harness;
use crate::operator::DenseOperator;

pub fn random_square(n: usize, seed: u64) -> DenseOperator {
    harness::gen_random_operator(n, seed).unwrap()
}

pub fn random_hermitian(n: usize, seed: u64) -> DenseOperator {
    harness::gen_random_hermitian(n, seed).unwrap()
}

pub fn random_psd(n: usize, seed: u64) -> DenseOperator {
    harness::gen_random_psd(n, seed).unwrap()
}

pub fn random_unitary(n: usize, seed: u64) -> DenseOperator {
    harness::gen_random_unitary(n, seed).unwrap()
}
