//! Random exact data shared by the integration tests.
#![allow(dead_code)]

use kslift::rational::ratio;
use kslift::{MultiIndex, Polynomial};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn small_rational<R: Rng>(rng: &mut R) -> kslift::Rational {
    let mut num = 0;
    while num == 0 {
        num = rng.gen_range(-9..=9);
    }
    ratio(num, rng.gen_range(1..=5))
}

/// Up to `terms` random monomials of total degree `≤ max_degree`.
pub fn random_polynomial<R: Rng>(rng: &mut R, dim: usize, max_degree: u32, terms: usize) -> Polynomial {
    let mut p = Polynomial::zero(dim);
    for _ in 0..terms {
        let d = rng.gen_range(0..=max_degree);
        p += &random_homogeneous(rng, dim, d, 1);
    }
    p
}

/// Up to `terms` random monomials of degree exactly `degree`.
pub fn random_homogeneous<R: Rng>(rng: &mut R, dim: usize, degree: u32, terms: usize) -> Polynomial {
    let all = MultiIndex::all_of_order(dim, degree);
    let mut p = Polynomial::zero(dim);
    for k in all.choose_multiple(rng, terms) {
        p += &Polynomial::monomial(k.clone(), small_rational(rng));
    }
    p
}
