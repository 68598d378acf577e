//! The KS map `K: ℝ⁴ → ℝ³`, double polar coordinates and Hopf fibers.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::Polynomial;
use crate::rational::{int, Rational};

/// `K(y) = (y₁² − y₂² − y₃² + y₄², 2(y₁y₂ − y₃y₄), 2(y₁y₃ + y₂y₄))`.
pub fn ks_map(y: &[f64; 4]) -> [f64; 3] {
    let [y1, y2, y3, y4] = *y;
    [
        y1 * y1 - y2 * y2 - y3 * y3 + y4 * y4,
        2.0 * (y1 * y2 - y3 * y4),
        2.0 * (y1 * y3 + y2 * y4),
    ]
}

pub fn ks_map_exact(y: &[Rational; 4]) -> [Rational; 3] {
    let [y1, y2, y3, y4] = y;
    let two = int(2);
    [
        y1 * y1 - y2 * y2 - y3 * y3 + y4 * y4,
        &two * (y1 * y2 - y3 * y4),
        &two * (y1 * y3 + y2 * y4),
    ]
}

/// The three components of `K` as polynomials in `y₁..y₄`.
pub fn ks_components() -> [Polynomial; 3] {
    let y = |i| Polynomial::var(4, i);
    let sq = |i| &y(i) * &y(i);
    let two = int(2);
    [
        &(&(&sq(0) - &sq(1)) - &sq(2)) + &sq(3),
        (&(&y(0) * &y(1)) - &(&y(2) * &y(3))).scale(&two),
        (&(&y(0) * &y(2)) + &(&y(1) * &y(3))).scale(&two),
    ]
}

/// `f ∘ K` for a polynomial `f` on ℝ³ (or on ℝ³ × ℝᵐ, where the trailing
/// coordinates are carried through unchanged). Degrees in the first block
/// double and the result is even in `y`.
pub fn pullback_polynomial(f: &Polynomial) -> Result<Polynomial> {
    if f.dim() < 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: f.dim() });
    }
    let extra = f.dim() - 3;
    let target = 4 + extra;
    let mut maps: Vec<Polynomial> = ks_components().iter().map(|k| k.extend_dim(extra)).collect();
    maps.extend((0..extra).map(|i| Polynomial::var(target, 4 + i)));
    f.compose(&maps)
}

/// Double polar coordinates `(y₁, y₄) = r₁(cos θ₁, sin θ₁)`,
/// `(y₃, y₂) = r₂(cos θ₂, sin θ₂)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoublePolar {
    pub r1: f64,
    pub r2: f64,
    pub theta1: f64,
    pub theta2: f64,
}

impl DoublePolar {
    pub fn from_point(y: &[f64; 4]) -> Self {
        let angle = |s: f64, c: f64| s.atan2(c).rem_euclid(TAU) + 0.0;
        DoublePolar {
            r1: y[0].hypot(y[3]),
            r2: y[2].hypot(y[1]),
            theta1: angle(y[3], y[0]),
            theta2: angle(y[1], y[2]),
        }
    }

    pub fn to_point(&self) -> [f64; 4] {
        let (s1, c1) = self.theta1.sin_cos();
        let (s2, c2) = self.theta2.sin_cos();
        [self.r1 * c1, self.r2 * s2, self.r2 * c2, self.r1 * s1]
    }
}

/// `K` in double polar form; depends on the angles only through `θ₁ − θ₂`.
pub fn ks_in_polar(c: &DoublePolar) -> [f64; 3] {
    let (s, co) = (c.theta1 - c.theta2).sin_cos();
    let p = 2.0 * c.r1 * c.r2;
    [c.r1 * c.r1 - c.r2 * c.r2, -p * s, p * co]
}

/// Determinant of the fixed-`θ₂` chart `(r₁, r₂, θ₁) ↦ K`.
pub fn jacobian_det(c: &DoublePolar) -> f64 {
    8.0 * c.r1 * c.r2 * (c.r1 * c.r1 + c.r2 * c.r2)
}

/// Which degenerate circle a point on the `x₁`-axis lifts to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisCircle {
    /// `x₁ > 0`: the circle in the `(y₁, y₄)` plane.
    Plus,
    /// `x₁ < 0`: the circle in the `(y₃, y₂)` plane.
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FiberPhase {
    /// `ϑ = θ₁ − θ₂ mod 2π`.
    Phase(f64),
    Axis(AxisCircle),
    /// `x = 0`, the fiber is the origin.
    Point,
}

/// The Hopf circle `K⁻¹({x})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberDescription {
    pub r1: f64,
    pub r2: f64,
    pub phase: FiberPhase,
    /// `√(r₁² + r₂²) = |x|^{1/2}`, the radius of the circle in ℝ⁴.
    pub center_radius: f64,
    pub is_point: bool,
}

impl FiberDescription {
    /// Point of the fiber at parameter `t`; the map has period `2π` and is
    /// injective on `[0, 2π)` unless the fiber is a point.
    pub fn point_at(&self, t: f64) -> [f64; 4] {
        let polar = match self.phase {
            FiberPhase::Point => return [0.0; 4],
            FiberPhase::Phase(v) => DoublePolar { r1: self.r1, r2: self.r2, theta1: t + v, theta2: t },
            FiberPhase::Axis(AxisCircle::Plus) => DoublePolar { r1: self.r1, r2: 0.0, theta1: t, theta2: 0.0 },
            FiberPhase::Axis(AxisCircle::Minus) => DoublePolar { r1: 0.0, r2: self.r2, theta1: 0.0, theta2: t },
        };
        polar.to_point()
    }

    /// `n` equally spaced points on the fiber.
    pub fn points(&self, n: usize) -> Vec<[f64; 4]> {
        (0..n).map(|i| self.point_at(TAU * i as f64 / n as f64)).collect()
    }
}

/// Inverts `K` on a single point: `r₁² = (|x| + x₁)/2`, `r₂² = (|x| − x₁)/2`,
/// and `ϑ` from `(−x₂, x₃) ∝ (sin ϑ, cos ϑ)`.
pub fn fiber(x: &[f64; 3]) -> FiberDescription {
    let norm = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
    if norm == 0.0 {
        return FiberDescription { r1: 0.0, r2: 0.0, phase: FiberPhase::Point, center_radius: 0.0, is_point: true };
    }
    // 2 r₁ r₂ = |(x₂, x₃)|; take the larger radius from the closed form and
    // the smaller from the product to avoid cancellation.
    let transverse = x[1].hypot(x[2]);
    let (r1, r2) = if x[0] >= 0.0 {
        let r1 = ((norm + x[0]) / 2.0).sqrt();
        (r1, transverse / (2.0 * r1))
    } else {
        let r2 = ((norm - x[0]) / 2.0).sqrt();
        (transverse / (2.0 * r2), r2)
    };
    let phase = if x[1] == 0.0 && x[2] == 0.0 {
        FiberPhase::Axis(if x[0] > 0.0 { AxisCircle::Plus } else { AxisCircle::Minus })
    } else {
        FiberPhase::Phase((-x[1]).atan2(x[2]).rem_euclid(TAU) + 0.0)
    };
    FiberDescription { r1, r2, phase, center_radius: norm.sqrt(), is_point: false }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberJson {
    r1: f64,
    r2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    phase: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    axis: Option<AxisCircle>,
    center_radius: f64,
    is_point: bool,
}

impl Serialize for FiberDescription {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let (phase, axis) = match self.phase {
            FiberPhase::Phase(v) => (Some(v), None),
            FiberPhase::Axis(a) => (None, Some(a)),
            FiberPhase::Point => (None, None),
        };
        FiberJson { r1: self.r1, r2: self.r2, phase, axis, center_radius: self.center_radius, is_point: self.is_point }
            .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FiberDescription {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let j = FiberJson::deserialize(deserializer)?;
        let phase = match (j.phase, j.axis, j.is_point) {
            (Some(v), None, false) => FiberPhase::Phase(v),
            (None, Some(a), false) => FiberPhase::Axis(a),
            (None, None, true) => FiberPhase::Point,
            _ => return Err(serde::de::Error::custom("fiber needs exactly one of phase, axis, is_point")),
        };
        Ok(FiberDescription { r1: j.r1, r2: j.r2, phase, center_radius: j.center_radius, is_point: j.is_point })
    }
}

/// `Δ(f∘K) − 4|y|²·((Δf)∘K)`; identically zero for every polynomial `f`.
pub fn laplacian_lift_defect(f: &Polynomial) -> Result<Polynomial> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: f.dim() });
    }
    let lhs = pullback_polynomial(f)?.laplacian();
    let rhs = &Polynomial::norm_squared(4).scale(&int(4)) * &pullback_polynomial(&f.laplacian())?;
    Ok(&lhs - &rhs)
}

/// `|(Δf)(K(y)) − Δ(f∘K)(y) / (4|y|²)|` at a point `y ≠ 0`.
pub fn lift_laplacian_residual(f: &Polynomial, y: &[f64; 4]) -> Result<f64> {
    if f.dim() != 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: f.dim() });
    }
    let r2: f64 = y.iter().map(|v| v * v).sum();
    if r2 == 0.0 {
        return Err(Error::SingularPoint);
    }
    let lhs = f.laplacian().eval(&ks_map(y));
    let rhs = pullback_polynomial(f)?.laplacian().eval(y) / (4.0 * r2);
    Ok((lhs - rhs).abs())
}
