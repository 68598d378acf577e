//! Both sides of the pullback isometry by adaptive quadrature, plus the
//! convergence of a fixed Gauss–Legendre product rule.

use kslift::field::ScalarField;
use kslift::verify::{hydrogenic_field, isometry_check, isometry_fixed};
use kslift::Polynomial;

fn main() -> kslift::Result<()> {
    let one = ScalarField::constant(3, 1.0)?;
    let rep = isometry_check(&one, 1.0, 1e-9, false)?;
    println!("phi = 1, r = 1: lhs {:.12}, rhs {:.12}, pi²/2 = {:.12}", rep.lhs, rep.rhs, std::f64::consts::PI.powi(2) / 2.0);

    let decay = hydrogenic_field(1.0, &Polynomial::one(3))?;
    for weighted in [false, true] {
        let rep = isometry_check(&decay, 2.0, 1e-9, weighted)?;
        println!("e^(-|x|), r = 2, weighted {weighted}: lhs {:.12}, rhs {:.12}, ratio − 1 = {:+.1e}", rep.lhs, rep.rhs, rep.ratio() - 1.0);
    }

    println!("fixed product rule, 3 points per panel:");
    for panels in [1, 2, 4, 8] {
        let rep = isometry_fixed(&decay, 2.0, panels, 3, false)?;
        println!("  {panels} panel(s): lhs {:.10}, rhs {:.10}, |ratio − 1| = {:.1e}", rep.lhs, rep.rhs, (rep.ratio() - 1.0).abs());
    }
    Ok(())
}
