//! The vector field L kills pullbacks and commutes with the Laplacian, and the
//! Laplacian of a pullback is 4|y|² times the pulled-back Laplacian.

use kslift::geometry::{laplacian_lift_defect, lift_laplacian_residual, pullback_polynomial};
use kslift::rational::{int, ratio};
use kslift::{MultiIndex, Polynomial};

fn main() -> kslift::Result<()> {
    // f = x1³ − 2 x1 x2 x3 + x3²/5
    let f = Polynomial::from_terms(
        3,
        [
            (MultiIndex::new(vec![3, 0, 0]), int(1)),
            (MultiIndex::new(vec![1, 1, 1]), int(-2)),
            (MultiIndex::new(vec![0, 0, 2]), ratio(1, 5)),
        ],
    )?;
    let g = pullback_polynomial(&f)?;
    println!("f       = {f}");
    println!("f∘K has {} terms of degree {:?}", g.len(), g.degree());
    println!("L(f∘K)  = {}", g.apply_l()?);
    println!("Δ(f∘K) − 4|y|²(Δf)∘K = {}", laplacian_lift_defect(&f)?);

    // a polynomial that is not a pullback: L does not kill it, yet [Δ, L] = 0
    let p = Polynomial::from_terms(
        4,
        [(MultiIndex::new(vec![3, 1, 0, 0]), int(1)), (MultiIndex::new(vec![0, 0, 2, 2]), int(3))],
    )?;
    let lp = p.apply_l()?;
    println!("p = {p}");
    println!("Lp = {lp}");
    println!("[Δ, L]p = {}", &lp.laplacian() - &p.laplacian().apply_l()?);

    let y = [0.4, -0.7, 0.2, 1.1];
    println!("pointwise residual of the lifted Laplacian at {y:?}: {:.2e}", lift_laplacian_residual(&f, &y)?);
    Ok(())
}
