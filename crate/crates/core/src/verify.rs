//! Numerical checks of the lifted equations.
//!
//! * The one-particle equation on ℝ⁴:
//!   `(−Δ_y + 4(W₁∘K + |y|² W₂∘K)) φ_K = 4(F₁∘K + |y|² F₂∘K)`.
//! * The Grušin-type operator on ℝ⁴ × ℝ^{3N−3}:
//!   `Q = −Δ_y − 4|y|²Δ_{x′} + 4|y|² W(K(y), x′) − 4Z`, and the identity
//!   `Q(ψ∘lift) = 4|y|²·((H − E)ψ)(K(y), x′)` for arbitrary smooth `ψ`.
//! * The pullback isometry `∫_{K⁻¹(U)} |φ∘K|² dy = (π/4) ∫_U |φ|²/|x| dx`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, TAU};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{DerivativeMode, ScalarField};
use crate::geometry::{ks_in_polar, ks_map, DoublePolar};
use crate::poly::Polynomial;
use crate::quadrature::{composite_gauss_legendre, integrate, Adaptive, Tolerance};
use crate::rational::from_f64;

/// Default tolerances for analytic-derivative residuals, finite-difference
/// residuals and quadrature.
pub const TOL_ANALYTIC: f64 = 1e-9;
pub const TOL_FINITE_DIFFERENCE: f64 = 1e-4;
pub const TOL_QUADRATURE: f64 = 1e-6;

/// Summary of a pointwise residual sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResidualReport {
    pub max_residual: f64,
    pub points: usize,
    pub tolerance: f64,
    pub pass: bool,
}

impl ResidualReport {
    pub fn from_residuals(residuals: &[f64], tolerance: f64) -> Self {
        let max_residual = residuals.iter().copied().fold(0.0, f64::max);
        ResidualReport { max_residual, points: residuals.len(), tolerance, pass: max_residual <= tolerance }
    }
}

/// Laplacians over several coordinate blocks, sharing one jet when
/// derivatives are analytic.
fn block_laplacians(f: &ScalarField, z: &[f64], blocks: &[&[usize]], mode: DerivativeMode) -> Result<Vec<f64>> {
    let analytic = match mode {
        DerivativeMode::Analytic => true,
        DerivativeMode::Auto => f.has_analytic_derivatives(),
        DerivativeMode::FiniteDifference => false,
    };
    if analytic {
        let jet = f.jet(z)?;
        Ok(blocks.iter().map(|b| jet.laplacian(b)).collect())
    } else {
        blocks.iter().map(|b| f.laplacian(z, b, DerivativeMode::FiniteDifference)).collect()
    }
}

fn norm_squared(v: &[f64]) -> f64 {
    v.iter().map(|t| t * t).sum()
}

/// Residuals of the lifted one-particle equation at each point.
pub fn one_particle_residuals(
    phi_k: &ScalarField,
    w1: &ScalarField,
    w2: &ScalarField,
    f1: &ScalarField,
    f2: &ScalarField,
    points: &[[f64; 4]],
    mode: DerivativeMode,
) -> Result<Vec<f64>> {
    if phi_k.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: phi_k.dim() });
    }
    if let Some(f) = [w1, w2, f1, f2].into_iter().find(|f| f.dim() != 3) {
        return Err(Error::DimensionMismatch { expected: 3, found: f.dim() });
    }
    points
        .par_iter()
        .map(|y| {
            let r2 = norm_squared(y);
            if r2 == 0.0 {
                return Err(Error::SingularPoint);
            }
            let x = ks_map(y);
            let lap = block_laplacians(phi_k, y, &[&[0, 1, 2, 3]], mode)?[0];
            let phi = phi_k.eval(y)?;
            let lhs = -lap + 4.0 * (w1.eval(&x)? + r2 * w2.eval(&x)?) * phi;
            let rhs = 4.0 * (f1.eval(&x)? + r2 * f2.eval(&x)?);
            Ok((lhs - rhs).abs())
        })
        .collect()
}

/// Maximum residual of the lifted one-particle equation over `points`.
pub fn residual_one_particle(
    phi_k: &ScalarField,
    w1: &ScalarField,
    w2: &ScalarField,
    f1: &ScalarField,
    f2: &ScalarField,
    points: &[[f64; 4]],
    mode: DerivativeMode,
) -> Result<f64> {
    let r = one_particle_residuals(phi_k, w1, w2, f1, f2, points, mode)?;
    Ok(r.into_iter().fold(0.0, f64::max))
}

/// Inhomogeneities that make `φ` an exact solution:
/// `F₁ = W₁φ`, `F₂ = −Δφ + W₂φ`.
pub fn manufactured_sources(
    phi: &ScalarField,
    w1: &ScalarField,
    w2: &ScalarField,
) -> Result<(ScalarField, ScalarField)> {
    let f1 = w1.mul(phi)?;
    let f2 = phi.laplacian_field(vec![0, 1, 2])?.scale(-1.0)?.add(&w2.mul(phi)?)?;
    Ok((f1, f2))
}

/// Ball `|x| < x_radius` (i.e. `|y|² < x_radius`) times `|x′ − x₀′| < xprime_radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Region {
    pub x_radius: f64,
    pub xprime_radius: f64,
    pub xprime_center: Vec<f64>,
}

/// `H − E = −Δ_x − Δ_{x′} − Z/|x| + V_E(x, x′)` near the nucleus for `N`
/// electrons. `w` is the full `V_E`, including the `−E` shift.
#[derive(Debug, Clone, PartialEq)]
pub struct LiftProblem {
    pub z: f64,
    pub e: f64,
    pub n: usize,
    pub w: ScalarField,
    pub region: Region,
}

impl LiftProblem {
    pub fn new(z: f64, e: f64, n: usize, w: ScalarField, region: Region) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("electron count must be positive".into()));
        }
        if w.dim() != 3 * n {
            return Err(Error::DimensionMismatch { expected: 3 * n, found: w.dim() });
        }
        if region.xprime_center.len() != 3 * (n - 1) {
            return Err(Error::DimensionMismatch { expected: 3 * (n - 1), found: region.xprime_center.len() });
        }
        if !(region.x_radius > 0.0 && region.xprime_radius > 0.0) {
            return Err(Error::InvalidArgument("region radii must be positive".into()));
        }
        Ok(LiftProblem { z, e, n, w, region })
    }

    /// Atomic Hamiltonian with electron 1 singled out:
    /// `V_E = Σ_{j≥2} −Z/|x_j| + Σ_{i<j} 1/|x_i − x_j| − E`.
    pub fn atomic(z: f64, e: f64, n: usize, region: Region) -> Result<Self> {
        let dim = 3 * n;
        let block = |j: usize| (3 * j..3 * j + 3).collect::<Vec<_>>();
        let mut terms = vec![ScalarField::constant(dim, -e)?];
        for j in 1..n {
            terms.push(ScalarField::norm(dim, block(j))?.powf(-1.0)?.scale(-z)?);
        }
        for i in 0..n {
            for j in i + 1..n {
                terms.push(ScalarField::distance(dim, block(i), block(j))?.powf(-1.0)?);
            }
        }
        Self::new(z, e, n, ScalarField::sum(&terms)?, region)
    }

    /// Dimension of the lifted space `ℝ⁴ × ℝ^{3N−3}`.
    pub fn lifted_dim(&self) -> usize {
        3 * self.n + 1
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        let r2 = norm_squared(&point[..4]);
        let dxp: f64 = point[4..].iter().zip(&self.region.xprime_center).map(|(a, b)| (a - b) * (a - b)).sum();
        r2 < self.region.x_radius && (self.n == 1 || dxp.sqrt() < self.region.xprime_radius)
    }

    fn check_point(&self, point: &[f64]) -> Result<()> {
        if point.len() != self.lifted_dim() {
            return Err(Error::DimensionMismatch { expected: self.lifted_dim(), found: point.len() });
        }
        if !self.contains(point) {
            return Err(Error::OutOfRegion);
        }
        Ok(())
    }
}

/// `(K(y), x′)` for a lifted point `(y, x′)`.
pub fn physical_point(point: &[f64]) -> Vec<f64> {
    let mut q = ks_map(&[point[0], point[1], point[2], point[3]]).to_vec();
    q.extend_from_slice(&point[4..]);
    q
}

/// `(Q u)(y, x′)`.
pub fn grusin_apply(u: &ScalarField, p: &LiftProblem, point: &[f64], mode: DerivativeMode) -> Result<f64> {
    p.check_point(point)?;
    if u.dim() != p.lifted_dim() {
        return Err(Error::DimensionMismatch { expected: p.lifted_dim(), found: u.dim() });
    }
    let y_block: Vec<usize> = (0..4).collect();
    let xp_block: Vec<usize> = (4..p.lifted_dim()).collect();
    let laps = block_laplacians(u, point, &[&y_block, &xp_block], mode)?;
    let r2 = norm_squared(&point[..4]);
    let w = p.w.eval(&physical_point(point))?;
    let value = u.eval(point)?;
    Ok(-laps[0] - 4.0 * r2 * laps[1] + 4.0 * r2 * w * value - 4.0 * p.z * value)
}

/// Both sides of the lift identity at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiftSides {
    pub lhs: f64,
    pub rhs: f64,
}

/// `lhs = (Q u)(y, x′)` with `u = ψ∘lift`, and
/// `rhs = 4|y|²·(−Δ_xψ − Δ_{x′}ψ − Zψ/|x| + V_Eψ)` at `(K(y), x′)`.
pub fn lift_identity_check(psi: &ScalarField, p: &LiftProblem, point: &[f64], mode: DerivativeMode) -> Result<LiftSides> {
    if psi.dim() != 3 * p.n {
        return Err(Error::DimensionMismatch { expected: 3 * p.n, found: psi.dim() });
    }
    if point.len() >= 4 && norm_squared(&point[..4]) == 0.0 {
        return Err(Error::SingularPoint);
    }
    let u = psi.ks_pullback();
    let lhs = grusin_apply(&u, p, point, mode)?;
    let q = physical_point(point);
    let x_block: Vec<usize> = (0..3).collect();
    let xp_block: Vec<usize> = (3..3 * p.n).collect();
    let laps = block_laplacians(psi, &q, &[&x_block, &xp_block], mode)?;
    let value = psi.eval(&q)?;
    let x_norm = norm_squared(&q[..3]).sqrt();
    let r2 = norm_squared(&point[..4]);
    let w = p.w.eval(&q)?;
    let rhs = 4.0 * r2 * (-laps[0] - laps[1] - p.z * value / x_norm + w * value);
    Ok(LiftSides { lhs, rhs })
}

/// `e^{−β|x|}·P(x)` on ℝ³.
pub fn hydrogenic_field(beta: f64, p: &Polynomial) -> Result<ScalarField> {
    if p.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: p.dim() });
    }
    let poly = ScalarField::polynomial(3, p.clone())?;
    if beta == 0.0 {
        return Ok(poly);
    }
    let decay = ScalarField::polynomial(3, Polynomial::constant(1, -from_f64(beta)?))?
        .mul(&ScalarField::norm(3, vec![0, 1, 2])?)?
        .exp();
    decay.mul(&poly)
}

/// The two sides of the isometry identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub lhs: f64,
    pub rhs: f64,
}

impl IsometryReport {
    pub fn ratio(&self) -> f64 {
        self.lhs / self.rhs
    }
}

/// `|φ(x)|²` at `x = ks_in_polar(ρ cos a, ρ sin a, ϑ, 0)`.
fn lifted_density(phi: &ScalarField, rho: f64, a: f64, theta: f64) -> Result<f64> {
    let x = ks_in_polar(&DoublePolar { r1: rho * a.cos(), r2: rho * a.sin(), theta1: theta, theta2: 0.0 });
    Ok(phi.eval(&x)?.powi(2))
}

fn sphere_density(phi: &ScalarField, rho: f64, t: f64, s: f64) -> Result<f64> {
    let (st, ct) = t.sin_cos();
    let (ss, cs) = s.sin_cos();
    Ok(phi.eval(&[rho * st * cs, rho * st * ss, rho * ct])?.powi(2) * st)
}

fn check_isometry_args(phi: &ScalarField, r: f64) -> Result<()> {
    if phi.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: phi.dim() });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    Ok(())
}

/// Both sides of the isometry over `|x| < r`, i.e. `|y| < √r`.
///
/// The left side is integrated in double polar coordinates of ℝ⁴ with volume
/// element `r₁r₂ dr₁dr₂dθ₁dθ₂`; since `K` depends on `θ₁ − θ₂` only, the `θ₂`
/// integral is `2π`, and `(r₁, r₂) = ρ(cos a, sin a)`. The right side is
/// integrated in spherical coordinates of ℝ³, where the Jacobian `ρ²` absorbs
/// the `1/|x|` weight. `weighted` selects `‖|y|φ_K‖² = (π/4)‖φ‖²`.
pub fn isometry_check(phi: &ScalarField, r: f64, tol: f64, weighted: bool) -> Result<IsometryReport> {
    check_isometry_args(phi, r)?;
    let budget = 400;
    let outer = Adaptive::new(Tolerance::new(1e-300, tol * 0.1), budget).parallel();
    let inner = Adaptive::new(Tolerance::new(1e-300, tol * 1e-2), budget);
    let extra = |rho: f64| if weighted { rho * rho } else { 1.0 };

    let lhs_radial = |rho: f64| -> Result<f64> {
        let angular = integrate(
            &|a: f64| {
                let ring = integrate(&|th: f64| lifted_density(phi, rho, a, th), 0.0, TAU, &inner)?;
                Ok(a.cos() * a.sin() * ring)
            },
            0.0,
            FRAC_PI_2,
            &inner,
        )?;
        Ok(rho.powi(3) * extra(rho) * angular)
    };
    let lhs = TAU * integrate(&lhs_radial, 0.0, r.sqrt(), &outer)?;

    let rhs_radial = |rho: f64| -> Result<f64> {
        let sphere = integrate(
            &|t: f64| integrate(&|s: f64| sphere_density(phi, rho, t, s), 0.0, TAU, &inner),
            0.0,
            PI,
            &inner,
        )?;
        Ok(rho * (if weighted { rho } else { 1.0 }) * sphere)
    };
    let rhs = FRAC_PI_4 * integrate(&rhs_radial, 0.0, r, &outer)?;
    Ok(IsometryReport { lhs, rhs })
}

/// The isometry sides with a fixed product rule: `panels` Gauss–Legendre
/// panels of `order` points in every direction.
pub fn isometry_fixed(phi: &ScalarField, r: f64, panels: usize, order: usize, weighted: bool) -> Result<IsometryReport> {
    check_isometry_args(phi, r)?;
    let rule = |f: &dyn Fn(f64) -> Result<f64>, a: f64, b: f64| composite_gauss_legendre(&f, a, b, panels, order);
    let lhs = TAU
        * rule(
            &|rho| {
                let ang = rule(
                    &|a| Ok(a.cos() * a.sin() * rule(&|th| lifted_density(phi, rho, a, th), 0.0, TAU)?),
                    0.0,
                    FRAC_PI_2,
                )?;
                Ok(rho.powi(3) * if weighted { rho * rho } else { 1.0 } * ang)
            },
            0.0,
            r.sqrt(),
        )?;
    let rhs = FRAC_PI_4
        * rule(
            &|rho| {
                let sph = rule(&|t| rule(&|s| sphere_density(phi, rho, t, s), 0.0, TAU), 0.0, PI)?;
                Ok(rho * if weighted { rho } else { 1.0 } * sph)
            },
            0.0,
            r,
        )?;
    Ok(IsometryReport { lhs, rhs })
}

/// A point uniform in direction with norm uniform in `[rmin, rmax]`.
pub fn sample_shell<R: Rng + ?Sized>(rng: &mut R, dim: usize, rmin: f64, rmax: f64) -> Vec<f64> {
    let dir = loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let n = norm_squared(&v).sqrt();
        if n > 1e-3 && n <= 1.0 {
            break v.into_iter().map(|t| t / n).collect::<Vec<_>>();
        }
    };
    let rho = rng.gen_range(rmin..=rmax);
    dir.into_iter().map(|t| t * rho).collect()
}

/// A point uniform in the ball of the given center and radius.
pub fn sample_ball<R: Rng + ?Sized>(rng: &mut R, center: &[f64], radius: f64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = center.iter().map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if norm_squared(&v) < 1.0 {
            return v.iter().zip(center).map(|(t, c)| c + radius * t).collect();
        }
    }
}
