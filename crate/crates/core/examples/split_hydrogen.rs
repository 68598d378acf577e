//! Splitting e^{−|y|²} = e^{−|x|}∘K into φ₁ + |x|φ₂, with cosh and −sinh(r)/r
//! as the exact answers, and the growth-based radius of validity.

use kslift::rational::int;
use kslift::series::{estimate_growth, growth_to_radius, TruncatedSeries};
use kslift::split::{recombine, split_even_series};
use kslift::{MultiIndex, Polynomial};

fn radial(p: &Polynomial, max: u32) -> Vec<String> {
    (0..=max / 2).map(|j| p.coeff(&MultiIndex::new(vec![2 * j, 0, 0])).to_string()).collect()
}

fn main() -> kslift::Result<()> {
    for degree in [8, 10, 12] {
        let s = TruncatedSeries::exp_norm_squared(4, &int(-1), degree);
        let pair = split_even_series(&s)?;
        println!(
            "degree {degree:>2}: phi1 |x|^(2j) coefficients {:?}, phi2 {:?}",
            radial(pair.phi1.polynomial(), pair.phi1.max_degree()),
            radial(pair.phi2.polynomial(), pair.phi2.max_degree())
        );
        println!("           recombines exactly: {}", recombine(&pair)? == s);
    }

    for a in [1, 3] {
        let s = TruncatedSeries::exp_norm_squared(4, &int(-a), 12);
        let g = estimate_growth(&s)?;
        let r = growth_to_radius(&g);
        println!("e^(-{a}|y|²): C = {}, M = {}, C~ = {}, M~ = {}, radius {}", g.c, g.m, r.c_tilde, r.m_tilde, r.r);
    }
    Ok(())
}
