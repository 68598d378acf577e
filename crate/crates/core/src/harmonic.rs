//! Harmonic layers of homogeneous polynomials and descent from ℝ⁴ to ℝ³.
//!
//! A homogeneous `Q` of degree `m` in `n` variables has the unique expansion
//! `Q = Σⱼ |y|^{2j} H_{m−2j}` with every `H` harmonic. The top layer is the
//! harmonic projection
//!
//! ```text
//! H_m = Σⱼ aⱼ |y|^{2j} Δʲ Q,   a₀ = 1,   aⱼ = −aⱼ₋₁ / (2j (n + 2m − 2j − 2)),
//! ```
//!
//! obtained by requiring `Δ H_m = 0` term by term using
//! `Δ(|y|^{2j} q) = 2j(n + 2d + 2j − 2)|y|^{2j−2} q + |y|^{2j} Δq` for `q` of
//! degree `d`. The remainder `(Q − H_m)/|y|²` is read off the same sum, and the
//! lower layers follow by recursion.

use std::f64::consts::PI;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ks_components;
use crate::poly::{HomogeneousPolynomial, MultiIndex, Polynomial};
use crate::rational::{int, Rational};

/// One term `|y|^{2j} H` of a canonical decomposition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HarmonicLayer {
    pub j: u32,
    pub h: HomogeneousPolynomial,
}

/// `Q = Σⱼ |y|^{2j} Hⱼ`; zero layers are not stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalDecomposition {
    pub degree: u32,
    pub dim: usize,
    pub layers: Vec<HarmonicLayer>,
}

impl CanonicalDecomposition {
    pub fn layer(&self, j: u32) -> Option<&HomogeneousPolynomial> {
        self.layers.iter().find(|l| l.j == j).map(|l| &l.h)
    }

    /// `Σⱼ |y|^{2j} Hⱼ`.
    pub fn resum(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for l in &self.layers {
            out += &(&Polynomial::norm_squared_pow(self.dim, l.j) * l.h.as_polynomial());
        }
        out
    }
}

/// Splits homogeneous `p` of degree `m` as `H + |y|² R` with `H` harmonic.
fn peel_top_layer(p: &Polynomial, m: u32) -> (Polynomial, Polynomial) {
    let dim = p.dim();
    let n = dim as i64;
    let r2 = Polynomial::norm_squared(dim);
    let mut harmonic = p.clone();
    let mut rest = Polynomial::zero(dim);
    let mut lap = p.clone();
    let mut a = Rational::one();
    // |y|^{2(j-1)}
    let mut r2_prev = Polynomial::one(dim);
    for j in 1..=(m / 2) {
        lap = lap.laplacian();
        if lap.is_zero() {
            break;
        }
        let denom = 2 * j as i64 * (n + 2 * m as i64 - 2 * j as i64 - 2);
        a = -a / int(denom);
        let term = (&r2_prev * &lap).scale(&a);
        rest -= &term;
        harmonic += &(&r2 * &term);
        r2_prev = &r2_prev * &r2;
    }
    (harmonic, rest)
}

/// The harmonic part `H_m` of a homogeneous polynomial.
pub fn harmonic_projection(q: &HomogeneousPolynomial) -> HomogeneousPolynomial {
    let (h, _) = peel_top_layer(q.as_polynomial(), q.degree());
    HomogeneousPolynomial::new(h, q.degree()).expect("projection preserves degree")
}

/// Canonical decomposition of a homogeneous polynomial into harmonic layers.
pub fn canonical_decompose(q: &HomogeneousPolynomial) -> Result<CanonicalDecomposition> {
    let dim = q.dim();
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be positive".into()));
    }
    let mut layers = Vec::new();
    let mut current = q.as_polynomial().clone();
    let mut j = 0;
    let mut m = q.degree();
    while !current.is_zero() {
        let (h, rest) = peel_top_layer(&current, m);
        if !h.is_zero() {
            layers.push(HarmonicLayer { j, h: HomogeneousPolynomial::new(h, m)? });
        }
        if m < 2 {
            debug_assert!(rest.is_zero());
            break;
        }
        current = rest;
        m -= 2;
        j += 1;
    }
    Ok(CanonicalDecomposition { degree: q.degree(), dim, layers })
}

/// Exact test `Δp = 0`.
pub fn is_harmonic(p: &Polynomial) -> bool {
    p.laplacian().is_zero()
}

/// Powers of the KS components, grown on demand.
pub(crate) struct KsPowers {
    powers: [Vec<Polynomial>; 3],
}

impl KsPowers {
    pub(crate) fn new() -> Self {
        let ks = ks_components();
        KsPowers { powers: ks.map(|k| vec![Polynomial::one(4), k]) }
    }

    fn ensure(&mut self, comp: usize, e: u32) {
        let cache = &mut self.powers[comp];
        while cache.len() <= e as usize {
            let next = &cache[cache.len() - 1] * &cache[1];
            cache.push(next);
        }
    }

    /// `K^α = K₁^{α₁} K₂^{α₂} K₃^{α₃}`.
    pub(crate) fn monomial(&mut self, alpha: &MultiIndex) -> Polynomial {
        let a = alpha.exponents();
        for (c, &e) in a.iter().enumerate() {
            self.ensure(c, e);
        }
        let [p0, p1, p2] = &self.powers;
        &(&p0[a[0] as usize] * &p1[a[1] as usize]) * &p2[a[2] as usize]
    }
}

/// Recovers `Y` on ℝ³ from an L-annihilated harmonic `P = Y∘K` on ℝ⁴.
///
/// The coefficient-matching system for `Y∘K = P` is triangular in the pure
/// lexicographic order: the leading monomial of `K^α` (with `|α| = k`) is
/// `y₁^{k+α₁} y₂^{α₂} y₃^{α₃}` with coefficient `2^{α₂+α₃}`, distinct for
/// distinct `α`. The solve therefore repeatedly cancels the leading term of
/// the remainder. A nonzero remainder that cannot be cancelled means the
/// system is inconsistent.
pub fn hopf_descend(p: &HomogeneousPolynomial) -> Result<HomogeneousPolynomial> {
    if p.dim() != 4 {
        return Err(Error::DimensionMismatch { expected: 4, found: p.dim() });
    }
    let degree = p.degree();
    if degree % 2 == 1 {
        return Err(Error::OddDegree(degree));
    }
    let poly = p.as_polynomial();
    if !is_harmonic(poly) {
        return Err(Error::NotHarmonic);
    }
    if !poly.apply_l()?.is_zero() {
        return Err(Error::NotLAnnihilated);
    }
    let y = descend_pullback(poly, degree / 2, &mut KsPowers::new())?;
    HomogeneousPolynomial::new(y, degree / 2)
}

/// Triangular solve of `Y∘K = p` for homogeneous `p` of degree `2k`, without
/// the harmonicity precondition.
pub(crate) fn descend_pullback(p: &Polynomial, k: u32, powers: &mut KsPowers) -> Result<Polynomial> {
    let mut remainder = p.clone();
    let mut y = Polynomial::zero(3);
    while let Some(lead) = remainder.terms().map(|(idx, _)| idx).max_by(|a, b| a.cmp_lex(b)).cloned() {
        let e = lead.exponents();
        if e[3] != 0 || e[0] < k {
            return Err(Error::InconsistentSystem(2 * k));
        }
        let alpha = MultiIndex::new(vec![e[0] - k, e[1], e[2]]);
        let lead_coeff = num::pow(int(2), (e[1] + e[2]) as usize);
        let c = remainder.coeff(&lead) / lead_coeff;
        let image = powers.monomial(&alpha).scale(&c);
        remainder = &remainder - &image;
        debug_assert!(remainder.coeff(&lead).is_zero());
        y += &Polynomial::monomial(alpha, c);
    }
    Ok(y)
}

/// `(d + 1)/Vol(𝕊³)^{1/2}` with `Vol(𝕊³) = 2π²`: the sup norm on the unit
/// sphere of an `L²(𝕊³)`-normalized harmonic of degree `d` in ℝ⁴.
pub fn harmonic_sup_bound(d: u32) -> f64 {
    (d as f64 + 1.0) / (2.0 * PI * PI).sqrt()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LayerJson {
    j: u32,
    #[serde(rename = "H")]
    h: Polynomial,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionJson {
    degree: u32,
    dim: usize,
    layers: Vec<LayerJson>,
}

impl Serialize for CanonicalDecomposition {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        DecompositionJson {
            degree: self.degree,
            dim: self.dim,
            layers: self
                .layers
                .iter()
                .map(|l| LayerJson { j: l.j, h: l.h.as_polynomial().clone() })
                .collect(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CanonicalDecomposition {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = DecompositionJson::deserialize(deserializer)?;
        let mut layers = Vec::with_capacity(doc.layers.len());
        for l in doc.layers {
            if l.h.dim() != doc.dim {
                return Err(D::Error::custom(format!("layer {} has dimension {}", l.j, l.h.dim())));
            }
            let d = doc
                .degree
                .checked_sub(2 * l.j)
                .ok_or_else(|| D::Error::custom(format!("layer index {} exceeds degree", l.j)))?;
            let h = HomogeneousPolynomial::new(l.h, d).map_err(D::Error::custom)?;
            layers.push(HarmonicLayer { j: l.j, h });
        }
        Ok(CanonicalDecomposition { degree: doc.degree, dim: doc.dim, layers })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pullback_polynomial;
    use crate::rational::ratio;

    fn hom(p: Polynomial) -> HomogeneousPolynomial {
        HomogeneousPolynomial::from_polynomial(p).unwrap()
    }

    #[test]
    fn decompose_y1_squared() {
        let y1 = Polynomial::var(4, 0);
        let d = canonical_decompose(&hom(&y1 * &y1)).unwrap();
        let h2 = &(&y1 * &y1) - &Polynomial::norm_squared(4).scale(&ratio(1, 4));
        assert_eq!(d.layer(0).unwrap().as_polynomial(), &h2);
        assert_eq!(d.layer(1).unwrap().as_polynomial(), &Polynomial::constant(4, ratio(1, 4)));
        assert!(is_harmonic(&h2));
        assert_eq!(d.resum(), &y1 * &y1);
    }

    #[test]
    fn decompose_harmonic_and_radial() {
        let y = |i| Polynomial::var(4, i);
        let q = &(&y(0) * &y(1)) - &(&y(2) * &y(3));
        let d = canonical_decompose(&hom(q.clone())).unwrap();
        assert_eq!(d.layers.len(), 1);
        assert_eq!(d.layers[0].j, 0);
        assert_eq!(d.layers[0].h.as_polynomial(), &q);

        let d = canonical_decompose(&hom(Polynomial::norm_squared(4))).unwrap();
        assert_eq!(d.layers.len(), 1);
        assert_eq!(d.layers[0].j, 1);
        assert_eq!(d.layers[0].h.as_polynomial(), &Polynomial::one(4));
    }

    #[test]
    fn decompose_rejects_nonhomogeneous() {
        let p = &Polynomial::var(3, 0) + &Polynomial::one(3);
        assert_eq!(HomogeneousPolynomial::from_polynomial(p).unwrap_err(), Error::NotHomogeneous);
    }

    #[test]
    fn decompose_in_three_dimensions() {
        let x = |i| Polynomial::var(3, i);
        let q = (&(&x(0) * &x(0)) * &(&x(1) * &x(2))).pow(1);
        let d = canonical_decompose(&hom(q.clone())).unwrap();
        assert_eq!(d.resum(), q);
        assert!(d.layers.iter().all(|l| is_harmonic(l.h.as_polynomial())));
    }

    #[test]
    fn harmonic_predicate() {
        let y = |i| Polynomial::var(4, i);
        assert!(is_harmonic(&(&y(0) * &y(1))));
        assert!(!is_harmonic(&Polynomial::norm_squared(4)));
    }

    #[test]
    fn descend_examples() {
        let y = |i| Polynomial::var(4, i);
        let p = (&(&y(0) * &y(1)) - &(&y(2) * &y(3))).scale(&int(2));
        assert_eq!(hopf_descend(&hom(p)).unwrap().as_polynomial(), &Polynomial::var(3, 1));
        let c = Polynomial::constant(4, ratio(-7, 3));
        let out = hopf_descend(&HomogeneousPolynomial::new(c, 0).unwrap()).unwrap();
        assert_eq!(out.as_polynomial(), &Polynomial::constant(3, ratio(-7, 3)));
        // x₁x₂ is harmonic in ℝ³
        let yk = &Polynomial::var(3, 0) * &Polynomial::var(3, 1);
        let p = pullback_polynomial(&yk).unwrap();
        assert_eq!(hopf_descend(&hom(p)).unwrap().as_polynomial(), &yk);
    }

    #[test]
    fn descend_reports_each_precondition() {
        let y = |i| Polynomial::var(4, i);
        assert_eq!(hopf_descend(&hom(y(0))).unwrap_err(), Error::OddDegree(1));
        assert_eq!(hopf_descend(&hom(Polynomial::norm_squared(4))).unwrap_err(), Error::NotHarmonic);
        assert_eq!(hopf_descend(&hom(&y(0) * &y(1))).unwrap_err(), Error::NotLAnnihilated);
        assert!(matches!(
            hopf_descend(&hom(Polynomial::var(3, 0))),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn sup_bound_values() {
        let v = (2.0 * PI * PI).sqrt();
        assert!((harmonic_sup_bound(0) - 1.0 / v).abs() < 1e-15);
        assert!((harmonic_sup_bound(2) - 3.0 / v).abs() < 1e-15);
        assert!((1..20).all(|d| harmonic_sup_bound(d) > harmonic_sup_bound(d - 1)));
    }

    #[test]
    fn decomposition_json_round_trip() {
        let y1 = Polynomial::var(4, 0);
        let d = canonical_decompose(&hom((&y1 * &y1).pow(2))).unwrap();
        let text = serde_json::to_string(&d).unwrap();
        let back: CanonicalDecomposition = serde_json::from_str(&text).unwrap();
        assert_eq!(back, d);
    }
}
