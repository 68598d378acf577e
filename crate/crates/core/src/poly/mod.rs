//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Variables are positional: `y₁..y₄` in the lifted space, `x₁..x₃` in the
//! physical space, with any `x′` coordinates appended after them. Terms are
//! kept in a `BTreeMap` so every traversal (and every JSON document) has a
//! fixed order: ascending total degree, then descending lexicographic
//! exponents within a degree.

mod json;

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num::{BigUint, One, Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

pub use json::{PolynomialJson, TermJson};

/// Exponent vector `β ∈ ℕᵈ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn unit(dim: usize, var: usize) -> Self {
        let mut e = vec![0; dim];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total order `|β|`.
    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, var: usize) -> u32 {
        self.0[var]
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// The index with `var` lowered by `by`, or `None` if that would go negative.
    pub fn lowered(&self, var: usize, by: u32) -> Option<MultiIndex> {
        let e = self.0[var].checked_sub(by)?;
        let mut out = self.0.clone();
        out[var] = e;
        Some(MultiIndex(out))
    }

    pub fn raised(&self, var: usize, by: u32) -> MultiIndex {
        let mut out = self.0.clone();
        out[var] += by;
        MultiIndex(out)
    }

    /// Splits into the first `k` exponents and the rest.
    pub fn split_at(&self, k: usize) -> (MultiIndex, MultiIndex) {
        let (a, b) = self.0.split_at(k);
        (MultiIndex(a.to_vec()), MultiIndex(b.to_vec()))
    }

    pub fn concat(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex([self.0.as_slice(), other.0.as_slice()].concat())
    }

    /// Pure lexicographic comparison, `y₁ > y₂ > …`.
    pub fn cmp_lex(&self, other: &MultiIndex) -> Ordering {
        self.0.cmp(&other.0)
    }

    /// All exponent vectors of length `dim` with order exactly `order`, in
    /// descending lexicographic order.
    pub fn all_of_order(dim: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(dim: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == dim {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                rec(dim, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if dim == 0 {
            if order == 0 {
                out.push(MultiIndex(Vec::new()));
            }
            return out;
        }
        rec(dim, order, &mut Vec::with_capacity(dim), &mut out);
        out
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `#{σ ∈ ℕᵏ : |σ| = ℓ} = binom(k+ℓ−1, k−1)`.
pub fn count_multi_indices(k: u32, l: u32) -> Result<BigUint> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    Ok(num::integer::binomial(BigUint::from(k + l - 1), BigUint::from(k - 1)))
}

/// Multivariate polynomial over ℚ. No stored coefficient is zero.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Rational>,
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Rational) -> Self {
        Self::monomial(MultiIndex::zeros(dim), c)
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Rational::one())
    }

    /// The coordinate function `y_var`.
    pub fn var(dim: usize, var: usize) -> Self {
        assert!(var < dim, "variable {var} out of range for dimension {dim}");
        Self::monomial(MultiIndex::unit(dim, var), Rational::one())
    }

    pub fn monomial(index: MultiIndex, c: Rational) -> Self {
        let mut p = Polynomial::zero(index.dim());
        p.add_term(index, c);
        p
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated exponents.
    pub fn from_terms<I>(dim: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (MultiIndex, Rational)>,
    {
        let mut p = Polynomial::zero(dim);
        for (idx, c) in terms {
            if idx.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: idx.dim() });
            }
            p.add_term(idx, c);
        }
        Ok(p)
    }

    /// `|y|² = Σ yᵢ²` in `dim` variables.
    pub fn norm_squared(dim: usize) -> Self {
        let mut p = Polynomial::zero(dim);
        for i in 0..dim {
            p.add_term(MultiIndex::unit(dim, i).raised(i, 1), Rational::one());
        }
        p
    }

    /// `|y|^{2j}`.
    pub fn norm_squared_pow(dim: usize, j: u32) -> Self {
        Self::norm_squared(dim).pow(j)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, index: &MultiIndex) -> Rational {
        self.terms.get(index).cloned().unwrap_or_else(Rational::zero)
    }

    /// Highest total degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::order).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut orders = self.terms.keys().map(MultiIndex::order);
        match orders.next() {
            None => true,
            Some(d) => orders.all(|o| o == d),
        }
    }

    /// True when every term has even total order, i.e. `p(−y) = p(y)`.
    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|k| k.order() % 2 == 0)
    }

    pub(crate) fn add_term(&mut self, index: MultiIndex, c: Rational) {
        if c.is_zero() {
            return;
        }
        debug_assert_eq!(index.dim(), self.dim);
        match self.terms.entry(index) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.dim);
        }
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(self.dim);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Terms of total order exactly `d`.
    pub fn component(&self, d: u32) -> Polynomial {
        self.filter(|k| k.order() == d)
    }

    /// Terms of total order at most `d`.
    pub fn truncate(&self, d: u32) -> Polynomial {
        self.filter(|k| k.order() <= d)
    }

    pub fn filter(&self, keep: impl Fn(&MultiIndex) -> bool) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .filter(|(k, _)| keep(k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect(),
        }
    }

    /// The graded pieces of `p`, by strictly increasing degree. Zero yields
    /// an empty list.
    pub fn homogeneous_components(&self) -> Vec<HomogeneousPolynomial> {
        let mut out: BTreeMap<u32, Polynomial> = BTreeMap::new();
        for (k, v) in &self.terms {
            out.entry(k.order())
                .or_insert_with(|| Polynomial::zero(self.dim))
                .terms
                .insert(k.clone(), v.clone());
        }
        out.into_iter()
            .map(|(degree, base)| HomogeneousPolynomial { base, degree })
            .collect()
    }

    /// `∂p/∂y_var`.
    pub fn derivative(&self, var: usize) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (k, v) in &self.terms {
            let e = k.get(var);
            if e > 0 {
                out.add_term(k.lowered(var, 1).unwrap(), v * rational::int(e as i64));
            }
        }
        out
    }

    /// `y_var · p`.
    pub fn mul_var(&self, var: usize) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.raised(var, 1), v.clone())).collect(),
        }
    }

    /// `Δp = Σᵢ ∂²p/∂yᵢ²`.
    pub fn laplacian(&self) -> Polynomial {
        let mut out = Polynomial::zero(self.dim);
        for (k, v) in &self.terms {
            for var in 0..self.dim {
                let e = k.get(var);
                if e >= 2 {
                    out.add_term(k.lowered(var, 2).unwrap(), v * rational::int((e * (e - 1)) as i64));
                }
            }
        }
        out
    }

    /// `L = y₁∂₄ − y₄∂₁ + y₃∂₂ − y₂∂₃`, the generator of the Hopf circle action.
    pub fn apply_l(&self) -> Result<Polynomial> {
        if self.dim != 4 {
            return Err(Error::DimensionMismatch { expected: 4, found: self.dim });
        }
        let mut out = Polynomial::zero(4);
        // (multiplier, differentiated variable, sign)
        const PARTS: [(usize, usize, i64); 4] = [(0, 3, 1), (3, 0, -1), (2, 1, 1), (1, 2, -1)];
        for (k, v) in &self.terms {
            for &(mul, diff, sign) in &PARTS {
                let e = k.get(diff);
                if e > 0 {
                    let idx = k.lowered(diff, 1).unwrap().raised(mul, 1);
                    out.add_term(idx, v * rational::int(sign * e as i64));
                }
            }
        }
        Ok(out)
    }

    /// Substitutes polynomial `maps[i]` for variable `i`. All maps must share
    /// one dimension, which becomes the dimension of the result.
    pub fn compose(&self, maps: &[Polynomial]) -> Result<Polynomial> {
        if maps.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: maps.len() });
        }
        let target = match maps.first() {
            Some(m) => m.dim,
            None => return Ok(self.clone()),
        };
        if let Some(m) = maps.iter().find(|m| m.dim != target) {
            return Err(Error::DimensionMismatch { expected: target, found: m.dim });
        }
        let mut powers: Vec<Vec<Polynomial>> = maps.iter().map(|m| vec![Polynomial::one(target), m.clone()]).collect();
        let mut out = Polynomial::zero(target);
        for (k, v) in &self.terms {
            let mut term = Polynomial::constant(target, v.clone());
            for (var, &e) in k.exponents().iter().enumerate() {
                let cache = &mut powers[var];
                while cache.len() <= e as usize {
                    let next = &cache[cache.len() - 1] * &maps[var];
                    cache.push(next);
                }
                if e > 0 {
                    term = &term * &cache[e as usize];
                }
            }
            out += &term;
        }
        Ok(out)
    }

    pub fn eval_exact(&self, point: &[Rational]) -> Result<Rational> {
        if point.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: point.len() });
        }
        let mut acc = Rational::zero();
        for (k, v) in &self.terms {
            let mut t = v.clone();
            for (x, &e) in point.iter().zip(k.exponents()) {
                if e > 0 {
                    t *= num::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Floating evaluation on the first `dim` coordinates of `point`.
    pub fn eval(&self, point: &[f64]) -> f64 {
        assert!(point.len() >= self.dim, "point has {} coordinates, need {}", point.len(), self.dim);
        self.terms
            .iter()
            .map(|(k, v)| {
                let m: f64 = point
                    .iter()
                    .zip(k.exponents())
                    .map(|(x, &e)| x.powi(e as i32))
                    .product();
                rational::to_f64(v) * m
            })
            .sum()
    }

    /// Largest coefficient magnitude, zero for the zero polynomial.
    pub fn max_abs_coeff(&self) -> Rational {
        self.terms.values().map(|v| v.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Reinterprets the polynomial in `dim + extra` variables, the new ones
    /// appended with exponent zero.
    pub fn extend_dim(&self, extra: usize) -> Polynomial {
        let pad = MultiIndex::zeros(extra);
        Polynomial {
            dim: self.dim + extra,
            terms: self.terms.iter().map(|(k, v)| (k.concat(&pad), v.clone())).collect(),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            let mono: Vec<String> = k
                .exponents()
                .iter()
                .enumerate()
                .filter(|(_, &e)| e > 0)
                .map(|(var, &e)| if e == 1 { format!("v{}", var + 1) } else { format!("v{}^{}", var + 1, e) })
                .collect();
            match (i, v.is_negative()) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = v.abs();
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{}", rational::format(&mag))?,
                (false, true) => write!(f, "{}", mono.join("*"))?,
                (false, false) => write!(f, "{}*{}", rational::format(&mag), mono.join("*"))?,
            }
        }
        Ok(())
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.dim, rhs.dim, "adding polynomials of different dimension");
        for (k, v) in &rhs.terms {
            self.add_term(k.clone(), v.clone());
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, rhs: &Polynomial) {
        assert_eq!(self.dim, rhs.dim, "subtracting polynomials of different dimension");
        for (k, v) in &rhs.terms {
            self.add_term(k.clone(), -v);
        }
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            dim: self.dim,
            terms: self.terms.iter().map(|(k, v)| (k.clone(), -v)).collect(),
        }
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        assert_eq!(self.dim, rhs.dim, "multiplying polynomials of different dimension");
        let mut out = Polynomial::zero(self.dim);
        for (ka, va) in &self.terms {
            for (kb, vb) in &rhs.terms {
                out.add_term(ka.add(kb), va * vb);
            }
        }
        out
    }
}

/// A polynomial all of whose terms have order exactly `degree`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogeneousPolynomial {
    base: Polynomial,
    degree: u32,
}

impl HomogeneousPolynomial {
    pub fn new(base: Polynomial, degree: u32) -> Result<Self> {
        if base.terms.keys().any(|k| k.order() != degree) {
            return Err(Error::NotHomogeneous);
        }
        Ok(HomogeneousPolynomial { base, degree })
    }

    /// Infers the degree; the zero polynomial is rejected since its degree
    /// is ambiguous.
    pub fn from_polynomial(base: Polynomial) -> Result<Self> {
        let degree = base
            .degree()
            .ok_or_else(|| Error::InvalidArgument("zero polynomial has no degree".into()))?;
        Self::new(base, degree)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.base.dim
    }

    pub fn as_polynomial(&self) -> &Polynomial {
        &self.base
    }

    pub fn into_polynomial(self) -> Polynomial {
        self.base
    }
}
