//! Canonical decomposition Q = Σ |y|^{2j} H_j into harmonic layers.

use kslift::harmonic::{canonical_decompose, is_harmonic};
use kslift::rational::int;
use kslift::{HomogeneousPolynomial, MultiIndex, Polynomial};

fn main() -> kslift::Result<()> {
    // y1⁶ + 3 y1² y2² y3 y4
    let q = Polynomial::from_terms(
        4,
        [(MultiIndex::new(vec![6, 0, 0, 0]), int(1)), (MultiIndex::new(vec![2, 2, 1, 1]), int(3))],
    )?;
    let q = HomogeneousPolynomial::from_polynomial(q)?;
    let dec = canonical_decompose(&q)?;
    println!("Q = {}", q.as_polynomial());
    for layer in &dec.layers {
        println!(
            "  j = {}: degree {}, {} terms, harmonic: {}",
            layer.j,
            layer.h.degree(),
            layer.h.as_polynomial().len(),
            is_harmonic(layer.h.as_polynomial())
        );
    }
    println!("re-summation exact: {}", &dec.resum() == q.as_polynomial());
    println!("{}", serde_json::to_string(&dec).expect("serializable"));
    Ok(())
}
