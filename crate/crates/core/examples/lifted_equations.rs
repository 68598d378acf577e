//! Residuals of the lifted equations: hydrogen in ℝ⁴, a manufactured
//! solution with a non-constant potential, and the two-electron lift identity.

use kslift::field::{DerivativeMode, ScalarField};
use kslift::rational::int;
use kslift::verify::{
    lift_identity_check, manufactured_sources, residual_one_particle, sample_ball, sample_shell, LiftProblem,
    Region,
};
use kslift::{MultiIndex, Polynomial};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> kslift::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let points: Vec<[f64; 4]> = (0..200)
        .map(|_| {
            let v = sample_shell(&mut rng, 4, 0.1, 1.0);
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    let c = |v: f64| ScalarField::constant(3, v);

    // e^{−|x|} with W1 = −Z = −2, W2 = −E = 1
    let hydrogen = ScalarField::polynomial(4, Polynomial::norm_squared(4).scale(&int(-1)))?.exp();
    for mode in [DerivativeMode::Analytic, DerivativeMode::FiniteDifference] {
        let r = residual_one_particle(&hydrogen, &c(-2.0)?, &c(1.0)?, &c(0.0)?, &c(0.0)?, &points, mode)?;
        println!("hydrogen, {mode:?}: max residual {r:.2e}");
    }

    // manufactured: φ = x1·e^{−|x|²}, W1 = |x|, W2 = x3²
    let x1 = ScalarField::polynomial(3, Polynomial::var(3, 0))?;
    let phi = x1.mul(&ScalarField::polynomial(3, Polynomial::norm_squared(3).scale(&int(-1)))?.exp())?;
    let w1 = ScalarField::norm(3, vec![0, 1, 2])?;
    let w2 = ScalarField::polynomial(3, Polynomial::monomial(MultiIndex::new(vec![0, 0, 2]), int(1)))?;
    let (f1, f2) = manufactured_sources(&phi, &w1, &w2)?;
    let r = residual_one_particle(&phi.ks_pullback(), &w1, &w2, &f1, &f2, &points, DerivativeMode::Auto)?;
    println!("manufactured solution: max residual {r:.2e}");

    // helium-like problem, electron 2 near (1.5, 0.5, −0.5)
    let region = Region { x_radius: 1.1, xprime_radius: 0.5, xprime_center: vec![1.5, 0.5, -0.5] };
    let problem = LiftProblem::atomic(2.0, -2.9, 2, region.clone())?;
    let tail = Polynomial::norm_squared(3).scale(&int(-1));
    let mut shifted = Polynomial::zero(6);
    for (k, v) in tail.terms() {
        let e = [0, 0, 0].into_iter().chain(k.exponents().iter().copied()).collect();
        shifted += &Polynomial::monomial(MultiIndex::new(e), v.clone());
    }
    let psi = ScalarField::norm(6, vec![0, 1, 2])?.scale(-1.0)?.add(&ScalarField::polynomial(6, shifted)?)?.exp();
    for mode in [DerivativeMode::Analytic, DerivativeMode::FiniteDifference] {
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let mut p = sample_shell(&mut rng, 4, 0.1, 1.0);
            p.extend(sample_ball(&mut rng, &region.xprime_center, region.xprime_radius));
            let s = lift_identity_check(&psi, &problem, &p, mode)?;
            worst = worst.max((s.lhs - s.rhs).abs());
        }
        println!("two-electron lift identity, {mode:?}: max |lhs − rhs| {worst:.2e}");
    }
    Ok(())
}
