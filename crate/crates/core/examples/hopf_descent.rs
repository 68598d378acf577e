//! Recovering a harmonic on ℝ³ from its pullback through K.

use kslift::geometry::pullback_polynomial;
use kslift::harmonic::{harmonic_projection, hopf_descend};
use kslift::rational::int;
use kslift::{Error, HomogeneousPolynomial, MultiIndex, Polynomial};

fn main() -> kslift::Result<()> {
    for exps in [vec![0, 1, 0], vec![2, 0, 0], vec![1, 2, 1], vec![0, 3, 1]] {
        let m = Polynomial::monomial(MultiIndex::new(exps), int(1));
        let y = harmonic_projection(&HomogeneousPolynomial::from_polynomial(m)?);
        let lifted = HomogeneousPolynomial::from_polynomial(pullback_polynomial(y.as_polynomial())?)?;
        let back = hopf_descend(&lifted)?;
        println!("Y = {}", y.as_polynomial());
        println!("  Y∘K has {} terms, descends back exactly: {}", lifted.as_polynomial().len(), back == y);
    }

    // inputs that are not harmonic pullbacks are rejected with a reason
    let r2 = HomogeneousPolynomial::from_polynomial(Polynomial::norm_squared(4))?;
    report("|y|²", hopf_descend(&r2));
    let y1y2 = Polynomial::monomial(MultiIndex::new(vec![1, 1, 0, 0]), int(1));
    report("y1 y2", hopf_descend(&HomogeneousPolynomial::from_polynomial(y1y2)?));
    Ok(())
}

fn report(name: &str, r: kslift::Result<HomogeneousPolynomial>) {
    match r {
        Ok(p) => println!("{name} descends to {}", p.as_polynomial()),
        Err(e @ (Error::NotHarmonic | Error::NotLAnnihilated | Error::OddDegree(_))) => {
            println!("{name} is rejected: {e}")
        }
        Err(e) => println!("{name}: unexpected error {e}"),
    }
}
