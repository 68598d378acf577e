//! Splitting a series u(y, x′) in the lifted electron and one spectator
//! coordinate, one x′-monomial at a time.

use kslift::geometry::pullback_polynomial;
use kslift::rational::{int, ratio};
use kslift::series::TruncatedSeries;
use kslift::split::{recombine, reproducible_part, split_n_particle};
use kslift::{MultiIndex, Polynomial};

fn main() -> kslift::Result<()> {
    // u = (1 − x′ + x′²/2)·(1 − |y|² + |y|⁴/2 + (x2²/3)∘K), truncated at degree 6
    let x2_sq = pullback_polynomial(&Polynomial::monomial(MultiIndex::new(vec![0, 2, 0]), ratio(1, 3)))?;
    let radial = TruncatedSeries::exp_norm_squared(4, &int(-1), 4).into_polynomial();
    let g = (&radial + &x2_sq).extend_dim(1);
    let tail = Polynomial::from_terms(
        5,
        [
            (MultiIndex::new(vec![0, 0, 0, 0, 0]), int(1)),
            (MultiIndex::new(vec![0, 0, 0, 0, 1]), int(-1)),
            (MultiIndex::new(vec![0, 0, 0, 0, 2]), ratio(1, 2)),
        ],
    )?;
    let u = TruncatedSeries::new((&g * &tail).truncate(6), 6)?;
    let pair = split_n_particle(&u)?;
    println!("psi1 = {}", pair.phi1.polynomial());
    println!("psi2 = {}", pair.phi2.polynomial());
    println!("radius in x: {:?}, radius in x′: {:?}", pair.radius, pair.radius_xprime);

    let back = recombine(&pair)?;
    let kept = reproducible_part(&u);
    println!(
        "recombination reproduces the {} terms with |β| + 2|γ| ≤ 6: {}",
        kept.len(),
        reproducible_part(&back) == kept
    );

    // odd dependence on y for some x′-power is reported with that power
    let bad = Polynomial::monomial(MultiIndex::new(vec![1, 0, 0, 0, 2]), int(1));
    match split_n_particle(&TruncatedSeries::new(bad, 3)?) {
        Err(e) => println!("y1·x′² is rejected: {e}"),
        Ok(_) => println!("y1·x′² unexpectedly split"),
    }
    Ok(())
}
