//! Splitting an even `K`-invariant series `g = φ∘K` into `φ = φ₁ + |x|φ₂`.
//!
//! The degree-`2n` part of `g` decomposes as `Σⱼ |y|^{2j} H_{2n−2j}` and each
//! harmonic layer descends to `Y_{n−j}` on ℝ³. Because `|y|² = |x|` on the
//! image of `K`, layer `j` contributes `|x|ʲ Y_{n−j}`. For even `j` this is a
//! polynomial of degree `n` and goes to `φ₁`; for odd `j` the factor `|x|` is
//! pulled out and `|x|^{j−1} Y_{n−j}` (degree `n − 1`) goes to `φ₂`.
//!
//! Truncation: input known through `y`-order `2N` determines `φ₁` through
//! degree `N` and `φ₂` through degree `N − 1`.

use std::collections::BTreeMap;

use num::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::pullback_polynomial;
use crate::harmonic::{canonical_decompose, descend_pullback, KsPowers};
use crate::poly::{HomogeneousPolynomial, MultiIndex, Polynomial};
use crate::series::{estimate_growth, growth_to_radius, y_order, TruncatedSeries, Y_BLOCK};

/// Guaranteed convergence radius, `Unbounded` for the zero series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Radius {
    Finite(f64),
    Unbounded,
}

impl Radius {
    pub fn value(&self) -> f64 {
        match self {
            Radius::Finite(r) => *r,
            Radius::Unbounded => f64::INFINITY,
        }
    }
}

impl Serialize for Radius {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Radius::Finite(r) => serializer.serialize_f64(*r),
            Radius::Unbounded => serializer.serialize_str("unbounded"),
        }
    }
}

impl<'de> Deserialize<'de> for Radius {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        match serde_json::Value::deserialize(deserializer)? {
            serde_json::Value::Number(n) => match n.as_f64() {
                Some(r) if r > 0.0 => Ok(Radius::Finite(r)),
                _ => Err(serde::de::Error::custom("radius must be positive")),
            },
            serde_json::Value::String(s) if s == "unbounded" => Ok(Radius::Unbounded),
            _ => Err(serde::de::Error::custom("radius must be a positive number or \"unbounded\"")),
        }
    }
}

/// `(φ₁, φ₂)` with `φ = φ₁ + |x|φ₂`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitPair {
    pub phi1: TruncatedSeries,
    pub phi2: TruncatedSeries,
    pub radius: Radius,
    pub radius_xprime: Option<f64>,
}

impl SplitPair {
    /// A pair with no radius information, e.g. for feeding [`recombine`].
    pub fn new(phi1: TruncatedSeries, phi2: TruncatedSeries) -> Result<Self> {
        if phi1.dim() != phi2.dim() {
            return Err(Error::DimensionMismatch { expected: phi1.dim(), found: phi2.dim() });
        }
        Ok(SplitPair { phi1, phi2, radius: Radius::Unbounded, radius_xprime: None })
    }
}

/// The descended harmonic `Y^{(2n)}_{n−j}` of layer `j` at `y`-degree `2n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitLayer {
    pub n: u32,
    pub j: u32,
    pub y: HomogeneousPolynomial,
}

/// Layers of a `y`-only slice (dim 4) for `n ≤ max_n` (none if `max_n` is
/// `None`). Every component is checked for evenness and L-annihilation,
/// including those that are not descended.
fn slice_layers(g: &Polynomial, max_n: Option<u32>) -> Result<Vec<SplitLayer>> {
    if let Some(order) = g.terms().map(|(k, _)| k.order()).filter(|o| o % 2 == 1).min() {
        return Err(Error::EvennessViolation { order, gamma: None });
    }
    let components = g.homogeneous_components();
    for q in &components {
        if !q.as_polynomial().apply_l()?.is_zero() {
            return Err(Error::NotPullback { degree: q.degree(), gamma: None });
        }
    }
    let per_degree: Vec<Result<Vec<SplitLayer>>> = components
        .par_iter()
        .filter(|q| max_n.is_some_and(|m| q.degree() / 2 <= m))
        .map(|q| {
            let n = q.degree() / 2;
            let mut powers = KsPowers::new();
            canonical_decompose(q)?
                .layers
                .into_iter()
                .map(|layer| {
                    let k = n - layer.j;
                    let y = descend_pullback(layer.h.as_polynomial(), k, &mut powers)?;
                    Ok(SplitLayer { n, j: layer.j, y: HomogeneousPolynomial::new(y, k)? })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_degree {
        out.extend(r?);
    }
    Ok(out)
}

/// Routes layers into `(φ₁, φ₂)` as polynomials on ℝ³.
fn assemble(layers: &[SplitLayer]) -> (Polynomial, Polynomial) {
    let mut phi1 = Polynomial::zero(3);
    let mut phi2 = Polynomial::zero(3);
    for l in layers {
        let radial = Polynomial::norm_squared_pow(3, l.j / 2);
        let term = &radial * l.y.as_polynomial();
        if l.j % 2 == 0 {
            phi1 += &term;
        } else {
            phi2 += &term;
        }
    }
    (phi1, phi2)
}

fn check_y_center(s: &TruncatedSeries) -> Result<()> {
    if s.center().iter().take(Y_BLOCK).any(|c| !c.is_zero()) {
        return Err(Error::InvalidArgument("series must be centered at y = 0".into()));
    }
    Ok(())
}

/// All descended layers of an even one-particle series on ℝ⁴.
pub fn split_layers(s: &TruncatedSeries) -> Result<Vec<SplitLayer>> {
    if s.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: s.dim() });
    }
    check_y_center(s)?;
    slice_layers(s.polynomial(), Some(s.max_degree() / 2))
}

/// One-particle split of an even series `g = φ∘K` on ℝ⁴.
pub fn split_even_series(s: &TruncatedSeries) -> Result<SplitPair> {
    let layers = split_layers(s)?;
    let (phi1, phi2) = assemble(&layers);
    let n_max = s.max_degree() / 2;
    let radius = if s.is_zero() {
        Radius::Unbounded
    } else {
        Radius::Finite(growth_to_radius(&estimate_growth(s)?).r)
    };
    Ok(SplitPair {
        phi1: TruncatedSeries::new(phi1, n_max)?,
        phi2: TruncatedSeries::new(phi2, n_max.saturating_sub(1))?,
        radius,
        radius_xprime: None,
    })
}

/// `pullback(φ₁) + |y|²·pullback(φ₂)`, complete through `y`-order
/// `min(2·deg φ₁, 2·deg φ₂ + 2)`. Trailing `x′` coordinates are carried
/// through and recentered at the input's `x′` center.
pub fn recombine(p: &SplitPair) -> Result<TruncatedSeries> {
    let dim = p.phi1.dim();
    if dim != p.phi2.dim() {
        return Err(Error::DimensionMismatch { expected: dim, found: p.phi2.dim() });
    }
    if dim < 3 {
        return Err(Error::DimensionMismatch { expected: 3, found: dim });
    }
    if p.phi1.center() != p.phi2.center() {
        return Err(Error::InvalidArgument("phi1 and phi2 have different centers".into()));
    }
    if p.phi1.center().iter().take(3).any(|c| !c.is_zero()) {
        return Err(Error::InvalidArgument("split pair must be centered at x = 0".into()));
    }
    let extra = dim - 3;
    let g1 = pullback_polynomial(p.phi1.polynomial())?;
    let g2 = pullback_polynomial(p.phi2.polynomial())?;
    let r2 = Polynomial::norm_squared(4).extend_dim(extra);
    let sum = &g1 + &(&r2 * &g2);
    let max_degree = (2 * p.phi1.max_degree()).min(2 * p.phi2.max_degree() + 2);
    let mut center = vec![num::zero(); 4];
    center.extend(p.phi1.center()[3..].iter().cloned());
    TruncatedSeries::with_center(sum.truncate(max_degree), max_degree, center)
}

/// Split of a series `u(y, x′)` on ℝ⁴ × ℝᵐ, even in `y`, one `x′`-monomial
/// `(x′ − x₀′)^γ` at a time. With `D = max_degree`, `ψ₁` is complete through
/// total degree `⌊D/2⌋` and `ψ₂` through `⌊D/2⌋ − 1`.
pub fn split_n_particle(u: &TruncatedSeries) -> Result<SplitPair> {
    if u.dim() < Y_BLOCK {
        return Err(Error::DimensionMismatch { expected: Y_BLOCK, found: u.dim() });
    }
    check_y_center(u)?;
    let extra = u.dim() - Y_BLOCK;
    let half = u.max_degree() / 2;

    let mut slices: BTreeMap<MultiIndex, Polynomial> = BTreeMap::new();
    for (idx, c) in u.polynomial().terms() {
        let (beta, gamma) = idx.split_at(Y_BLOCK);
        slices
            .entry(gamma)
            .or_insert_with(|| Polynomial::zero(Y_BLOCK))
            .add_term(beta, c.clone());
    }

    let results: Vec<Result<(MultiIndex, Polynomial, Polynomial)>> = slices
        .into_par_iter()
        .map(|(gamma, g)| {
            let max_n = half.checked_sub(gamma.order());
            let with_gamma = |e: Error| match e {
                Error::EvennessViolation { order, .. } => {
                    Error::EvennessViolation { order, gamma: Some(gamma.exponents().to_vec()) }
                }
                Error::NotPullback { degree, .. } => {
                    Error::NotPullback { degree, gamma: Some(gamma.exponents().to_vec()) }
                }
                other => other,
            };
            // slices beyond the truncation are validated but not descended
            let layers = slice_layers(&g, max_n).map_err(with_gamma)?;
            let (a, b) = assemble(&layers);
            Ok((gamma, a, b))
        })
        .collect();

    let dim = 3 + extra;
    let mut psi1 = Polynomial::zero(dim);
    let mut psi2 = Polynomial::zero(dim);
    for r in results {
        let (gamma, a, b) = r?;
        for (alpha, c) in a.terms() {
            psi1.add_term(alpha.concat(&gamma), c.clone());
        }
        for (alpha, c) in b.terms() {
            psi2.add_term(alpha.concat(&gamma), c.clone());
        }
    }

    let mut center = vec![num::zero(); 3];
    center.extend(u.center()[Y_BLOCK..].iter().cloned());
    let (radius, radius_xprime) = if u.is_zero() {
        (Radius::Unbounded, None)
    } else {
        let m = estimate_growth(u)?.m;
        (Radius::Finite(1.0 / (4.0 * m * m)), Some(1.0 / (2.0 * m)))
    };
    Ok(SplitPair {
        phi1: TruncatedSeries::with_center(psi1, half, center.clone())?,
        phi2: TruncatedSeries::with_center(psi2, half.saturating_sub(1), center)?,
        radius,
        radius_xprime,
    })
}

/// Whether two splits of the same truncation order coincide termwise.
pub fn split_uniqueness_check(p: &SplitPair, q: &SplitPair) -> Result<bool> {
    if p.phi1.max_degree() != q.phi1.max_degree() {
        return Err(Error::DegreeMismatch(p.phi1.max_degree(), q.phi1.max_degree()));
    }
    if p.phi2.max_degree() != q.phi2.max_degree() {
        return Err(Error::DegreeMismatch(p.phi2.max_degree(), q.phi2.max_degree()));
    }
    Ok(p.phi1.polynomial() == q.phi1.polynomial() && p.phi2.polynomial() == q.phi2.polynomial())
}

/// Terms of `u(y, x′)` that a split through `⌊D/2⌋` reproduces:
/// `|β| + 2|γ| ≤ 2⌊D/2⌋`.
pub fn reproducible_part(u: &TruncatedSeries) -> Polynomial {
    let bound = 2 * (u.max_degree() / 2);
    u.polynomial().filter(|k| {
        let yo = y_order(k);
        yo + 2 * (k.order() - yo) <= bound
    })
}
