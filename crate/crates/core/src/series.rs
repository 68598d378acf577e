//! Truncated power series about a center, and growth bounds
//! `|c_β| ≤ C·M^{|β|}` on their coefficients.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{MultiIndex, Polynomial, PolynomialJson, TermJson};
use crate::rational::{from_f64, int, to_f64, to_f64_up, JsonRational, Rational};

/// Number of leading coordinates that form the `y`-block.
pub const Y_BLOCK: usize = 4;

/// A power series `Σ c_β (z − center)^β` known through total order
/// `max_degree`. The polynomial stores the coefficients in the shifted
/// variables.
///
/// `even` records that every term has even order in the `y`-block, i.e. in
/// the first `min(dim, 4)` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    max_degree: u32,
    center: Vec<Rational>,
    even: bool,
    poly: Polynomial,
    pub growth: Option<GrowthBound>,
}

/// Order of a multi-index restricted to the `y`-block.
pub fn y_order(idx: &MultiIndex) -> u32 {
    idx.exponents().iter().take(Y_BLOCK).sum()
}

impl TruncatedSeries {
    /// Series about the origin. Terms of order above `max_degree` are an error.
    pub fn new(poly: Polynomial, max_degree: u32) -> Result<Self> {
        let center = vec![Rational::zero(); poly.dim()];
        Self::with_center(poly, max_degree, center)
    }

    pub fn with_center(poly: Polynomial, max_degree: u32, center: Vec<Rational>) -> Result<Self> {
        if center.len() != poly.dim() {
            return Err(Error::DimensionMismatch { expected: poly.dim(), found: center.len() });
        }
        if let Some(d) = poly.degree() {
            if d > max_degree {
                return Err(Error::InvalidArgument(format!(
                    "term of order {d} exceeds max_degree {max_degree}"
                )));
            }
        }
        let even = poly.terms().all(|(k, _)| y_order(k).is_multiple_of(2));
        Ok(TruncatedSeries { max_degree, center, even, poly, growth: None })
    }

    /// Truncates `poly` at `max_degree` instead of rejecting higher terms.
    pub fn truncating(poly: &Polynomial, max_degree: u32) -> Self {
        Self::new(poly.truncate(max_degree), max_degree).expect("truncated input")
    }

    pub fn zero(dim: usize, max_degree: u32) -> Self {
        Self::new(Polynomial::zero(dim), max_degree).expect("zero series")
    }

    /// `exp(a|y|²)` in `dim` variables through order `max_degree`.
    pub fn exp_norm_squared(dim: usize, a: &Rational, max_degree: u32) -> Self {
        let r2 = Polynomial::norm_squared(dim);
        let mut term = Polynomial::one(dim);
        let mut sum = Polynomial::one(dim);
        let mut k = 1i64;
        while 2 * k as u32 <= max_degree {
            term = (&term * &r2).scale(&(a / int(k)));
            sum += &term;
            k += 1;
        }
        Self::new(sum, max_degree).expect("orders bounded by construction")
    }

    pub fn dim(&self) -> usize {
        self.poly.dim()
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn center(&self) -> &[Rational] {
        &self.center
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    pub fn into_polynomial(self) -> Polynomial {
        self.poly
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Rational {
        self.poly.coeff(idx)
    }

    /// Lowest odd `y`-order present, if any.
    pub fn odd_y_order(&self) -> Option<u32> {
        self.poly.terms().map(|(k, _)| y_order(k)).filter(|o| o % 2 == 1).min()
    }

    /// Value at `z` (absolute coordinates, shifted by the center internally).
    pub fn eval(&self, z: &[f64]) -> f64 {
        let shifted: Vec<f64> = z.iter().zip(&self.center).map(|(v, c)| v - to_f64(c)).collect();
        self.poly.eval(&shifted)
    }
}

/// `|c_β| ≤ C·M^{|β|}` for every stored coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrowthBound {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "M")]
    pub m: f64,
}

impl GrowthBound {
    /// Exact check of the bound against every coefficient of `s`.
    pub fn holds_for(&self, s: &TruncatedSeries) -> bool {
        let (Ok(c), Ok(m)) = (from_f64(self.c), from_f64(self.m)) else {
            return false;
        };
        s.poly.terms().all(|(k, v)| v.abs() <= &c * num::pow(m.clone(), k.order() as usize))
    }
}

/// Canonical growth constants of a nonzero series:
/// `M = max(1, max_{|β|≥1} |c_β|^{1/|β|})`, `C = max |c_β| M^{−|β|}`.
///
/// `M` is computed in floating point; `C` is then computed exactly for that
/// `M` and rounded upward, so the bound holds exactly.
pub fn estimate_growth(s: &TruncatedSeries) -> Result<GrowthBound> {
    if s.is_zero() {
        return Err(Error::ZeroSeries);
    }
    let m = s
        .poly
        .terms()
        .filter(|(k, _)| k.order() >= 1)
        .map(|(k, v)| to_f64(&v.abs()).powf(1.0 / k.order() as f64))
        .fold(1.0f64, f64::max);
    let m_exact = from_f64(m)?;
    let c_exact = s
        .poly
        .terms()
        .map(|(k, v)| v.abs() / num::pow(m_exact.clone(), k.order() as usize))
        .max()
        .expect("nonzero series");
    Ok(GrowthBound { c: to_f64_up(&c_exact), m })
}

/// `R = 10·max_n n⁴ 2^{−n}`; the maximum is at `n = 6`, giving 202.5.
pub fn universal_constant_r() -> f64 {
    (1..=64).map(|n: i32| 10.0 * f64::from(n).powi(4) * 2f64.powi(-n)).fold(0.0, f64::max)
}

/// Constants of the harmonic-layer bound `|Y| ≤ C̃ M̃ⁿ |x|^{n−j}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusReport {
    pub c_tilde: f64,
    pub m_tilde: f64,
    pub r: f64,
}

/// `C̃ = R·C`, `M̃ = 2M²` and the radius `r = 1/(4M̃)`.
pub fn growth_to_radius(g: &GrowthBound) -> RadiusReport {
    let m_tilde = 2.0 * g.m * g.m;
    RadiusReport { c_tilde: universal_constant_r() * g.c, m_tilde, r: 1.0 / (4.0 * m_tilde) }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeriesJson {
    dim: usize,
    max_degree: u32,
    #[serde(default)]
    center: Vec<JsonRational>,
    #[serde(default)]
    even: Option<bool>,
    terms: Vec<TermJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    growth: Option<GrowthBound>,
}

impl Serialize for TruncatedSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        SeriesJson {
            dim: self.dim(),
            max_degree: self.max_degree,
            center: self.center.iter().cloned().map(JsonRational).collect(),
            even: Some(self.even),
            terms: PolynomialJson::from(&self.poly).terms,
            growth: self.growth,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TruncatedSeries {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = SeriesJson::deserialize(deserializer)?;
        let poly = Polynomial::try_from(PolynomialJson { dim: doc.dim, terms: doc.terms })
            .map_err(D::Error::custom)?;
        let center = if doc.center.is_empty() {
            vec![Rational::zero(); doc.dim]
        } else {
            doc.center.into_iter().map(|q| q.0).collect()
        };
        let mut s = TruncatedSeries::with_center(poly, doc.max_degree, center).map_err(D::Error::custom)?;
        if doc.even == Some(true) && !s.even {
            let order = s.odd_y_order().unwrap_or_default();
            return Err(D::Error::custom(Error::EvennessViolation { order, gamma: None }));
        }
        s.growth = doc.growth;
        Ok(s)
    }
}
