//! Scalar fields given as expression trees, with forward-mode second-order
//! derivatives and a finite-difference fallback.
//!
//! JSON form (`op` selects the node):
//!
//! ```text
//! {"op":"poly","poly":<polynomial>}            polynomial in the first poly.dim coordinates
//! {"op":"norm","coords":[i..],"minus":[j..]}   |z_i − z_j| ("minus" optional)
//! {"op":"exp","arg":<field>}
//! {"op":"add","args":[<field>..]}   {"op":"mul","args":[<field>..]}
//! {"op":"pow","base":<field>,"exponent":<real>}
//! {"op":"ks","arg":<field>}                    arg evaluated at (K(z₁..z₄), z₅..)
//! {"op":"laplacian","arg":<field>,"coords":[i..]}
//! ```

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geometry::ks_map;
use crate::poly::Polynomial;
use crate::rational::{from_f64, to_f64};

/// Value, gradient and Hessian (row-major `n × n`) at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Vec<f64>,
    pub hess: Vec<f64>,
}

impl Jet {
    pub fn constant(n: usize, value: f64) -> Self {
        Jet { value, grad: vec![0.0; n], hess: vec![0.0; n * n] }
    }

    pub fn dim(&self) -> usize {
        self.grad.len()
    }

    pub fn second(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim() + j]
    }

    /// Sum of `∂²/∂z_i²` over `coords`.
    pub fn laplacian(&self, coords: &[usize]) -> f64 {
        coords.iter().map(|&i| self.second(i, i)).sum()
    }

    fn add_assign(&mut self, o: &Jet) {
        self.value += o.value;
        self.grad.iter_mut().zip(&o.grad).for_each(|(a, b)| *a += b);
        self.hess.iter_mut().zip(&o.hess).for_each(|(a, b)| *a += b);
    }

    fn mul(&self, o: &Jet) -> Jet {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let k = i * n + j;
                hess[k] = self.hess[k] * o.value
                    + o.hess[k] * self.value
                    + self.grad[i] * o.grad[j]
                    + self.grad[j] * o.grad[i];
            }
        }
        Jet {
            value: self.value * o.value,
            grad: self.grad.iter().zip(&o.grad).map(|(a, b)| a * o.value + b * self.value).collect(),
            hess,
        }
    }

    /// `f∘self` given `f`, `f′`, `f″` at `self.value`.
    fn chain(&self, f0: f64, f1: f64, f2: f64) -> Jet {
        let n = self.dim();
        let mut hess = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hess[i * n + j] = f1 * self.hess[i * n + j] + f2 * self.grad[i] * self.grad[j];
            }
        }
        Jet { value: f0, grad: self.grad.iter().map(|g| f1 * g).collect(), hess }
    }
}

/// Polynomial node with coefficients cached in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyNode {
    poly: Polynomial,
    terms: Vec<(Vec<u32>, f64)>,
}

impl PolyNode {
    pub fn new(poly: Polynomial) -> Self {
        let terms = poly.terms().map(|(k, c)| (k.exponents().to_vec(), to_f64(c))).collect();
        PolyNode { poly, terms }
    }

    fn value(&self, z: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| c * e.iter().zip(z).map(|(&k, x)| x.powi(k as i32)).product::<f64>())
            .sum()
    }

    fn jet(&self, z: &[f64]) -> Jet {
        let n = z.len();
        let d = self.poly.dim();
        let mut out = Jet::constant(n, 0.0);
        let pw = |x: f64, k: i64| if k < 0 { 0.0 } else { x.powi(k as i32) };
        for (e, c) in &self.terms {
            // p0 = z^e, p1 = e z^{e-1}, p2 = e(e-1) z^{e-2}, per variable
            let p0: Vec<f64> = (0..d).map(|i| pw(z[i], e[i] as i64)).collect();
            let p1: Vec<f64> = (0..d).map(|i| e[i] as f64 * pw(z[i], e[i] as i64 - 1)).collect();
            let p2: Vec<f64> =
                (0..d).map(|i| (e[i] as f64) * (e[i] as f64 - 1.0) * pw(z[i], e[i] as i64 - 2)).collect();
            let prod_except = |skip: &[usize]| -> f64 {
                (0..d).filter(|k| !skip.contains(k)).map(|k| p0[k]).product::<f64>()
            };
            out.value += c * prod_except(&[]);
            for i in (0..d).filter(|&i| e[i] > 0) {
                out.grad[i] += c * p1[i] * prod_except(&[i]);
                out.hess[i * n + i] += c * p2[i] * prod_except(&[i]);
                for j in (0..d).filter(|&j| j != i && e[j] > 0) {
                    out.hess[i * n + j] += c * p1[i] * p1[j] * prod_except(&[i, j]);
                }
            }
        }
        out
    }
}

/// Value-only callback for fields without a closed form.
#[derive(Clone)]
pub struct OpaqueFn(pub Arc<OpaqueCallback>);

pub type OpaqueCallback = dyn Fn(&[f64]) -> f64 + Send + Sync;

impl fmt::Debug for OpaqueFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("OpaqueFn")
    }
}

impl PartialEq for OpaqueFn {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// Expression tree of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Poly(PolyNode),
    Norm { coords: Vec<usize>, minus: Option<Vec<usize>> },
    Exp(Box<FieldExpr>),
    Add(Vec<FieldExpr>),
    Mul(Vec<FieldExpr>),
    Pow { base: Box<FieldExpr>, exponent: f64 },
    Ks(Box<FieldExpr>),
    Laplacian { arg: Box<FieldExpr>, coords: Vec<usize> },
    Opaque(OpaqueFn),
}

fn eval_error(z: &[f64], reason: impl Into<String>) -> Error {
    Error::Evaluation { point: z.to_vec(), reason: reason.into() }
}

/// `(K(z₁..z₄), z₅..)`
fn ks_point(z: &[f64]) -> Vec<f64> {
    let x = ks_map(&[z[0], z[1], z[2], z[3]]);
    let mut w = x.to_vec();
    w.extend_from_slice(&z[4..]);
    w
}

impl FieldExpr {
    fn validate(&self, dim: usize) -> Result<()> {
        let index_ok = |idx: &[usize]| idx.iter().all(|&i| i < dim);
        match self {
            FieldExpr::Poly(p) if p.poly.dim() > dim => {
                Err(Error::DimensionMismatch { expected: dim, found: p.poly.dim() })
            }
            FieldExpr::Poly(_) | FieldExpr::Opaque(_) => Ok(()),
            FieldExpr::Norm { coords, minus } => {
                let minus_ok = minus.as_ref().is_none_or(|m| m.len() == coords.len() && index_ok(m));
                if coords.is_empty() || !index_ok(coords) || !minus_ok {
                    return Err(Error::InvalidArgument(format!("bad norm coordinates for dimension {dim}")));
                }
                Ok(())
            }
            FieldExpr::Exp(a) => a.validate(dim),
            FieldExpr::Add(args) | FieldExpr::Mul(args) => args.iter().try_for_each(|a| a.validate(dim)),
            FieldExpr::Pow { base, exponent } => {
                if !exponent.is_finite() {
                    return Err(Error::InvalidArgument("exponent must be finite".into()));
                }
                base.validate(dim)
            }
            FieldExpr::Ks(a) => {
                if dim < 4 {
                    return Err(Error::DimensionMismatch { expected: 4, found: dim });
                }
                a.validate(dim - 1)
            }
            FieldExpr::Laplacian { arg, coords } => {
                if !index_ok(coords) {
                    return Err(Error::InvalidArgument(format!("bad laplacian coordinates for dimension {dim}")));
                }
                arg.validate(dim)
            }
        }
    }

    fn analytic(&self) -> bool {
        match self {
            FieldExpr::Poly(_) | FieldExpr::Norm { .. } => true,
            FieldExpr::Exp(a) | FieldExpr::Ks(a) => a.analytic(),
            FieldExpr::Pow { base, .. } => base.analytic(),
            FieldExpr::Add(args) | FieldExpr::Mul(args) => args.iter().all(FieldExpr::analytic),
            FieldExpr::Laplacian { .. } | FieldExpr::Opaque(_) => false,
        }
    }

    fn norm_parts(coords: &[usize], minus: &Option<Vec<usize>>, z: &[f64]) -> Vec<f64> {
        coords
            .iter()
            .enumerate()
            .map(|(k, &i)| z[i] - minus.as_ref().map_or(0.0, |m| z[m[k]]))
            .collect()
    }

    fn eval(&self, z: &[f64]) -> Result<f64> {
        let v = match self {
            FieldExpr::Poly(p) => p.value(z),
            FieldExpr::Norm { coords, minus } => {
                Self::norm_parts(coords, minus, z).iter().map(|d| d * d).sum::<f64>().sqrt()
            }
            FieldExpr::Exp(a) => a.eval(z)?.exp(),
            FieldExpr::Add(args) => args.iter().map(|a| a.eval(z)).sum::<Result<f64>>()?,
            FieldExpr::Mul(args) => args.iter().map(|a| a.eval(z)).product::<Result<f64>>()?,
            FieldExpr::Pow { base, exponent } => {
                let b = base.eval(z)?;
                if b < 0.0 && exponent.fract() != 0.0 {
                    return Err(eval_error(z, "negative base with fractional exponent"));
                }
                if b == 0.0 && *exponent < 0.0 {
                    return Err(eval_error(z, "zero base with negative exponent"));
                }
                b.powf(*exponent)
            }
            FieldExpr::Ks(a) => a.eval(&ks_point(z))?,
            FieldExpr::Laplacian { arg, coords } => {
                if arg.analytic() {
                    arg.jet(z)?.laplacian(coords)
                } else {
                    laplacian_fd(&|w: &[f64]| arg.eval(w), z, coords)?
                }
            }
            FieldExpr::Opaque(f) => (f.0)(z),
        };
        if !v.is_finite() {
            return Err(eval_error(z, "non-finite value"));
        }
        Ok(v)
    }

    fn jet(&self, z: &[f64]) -> Result<Jet> {
        let n = z.len();
        match self {
            FieldExpr::Poly(p) => Ok(p.jet(z)),
            FieldExpr::Norm { coords, minus } => {
                let d = Self::norm_parts(coords, minus, z);
                let rho = d.iter().map(|v| v * v).sum::<f64>().sqrt();
                if rho == 0.0 {
                    return Err(eval_error(z, "norm is not differentiable at 0"));
                }
                // each component d_k touches coords[k] with sign +1 and minus[k] with −1
                let mut touches: Vec<(usize, usize, f64)> =
                    coords.iter().enumerate().map(|(k, &i)| (k, i, 1.0)).collect();
                if let Some(m) = minus {
                    touches.extend(m.iter().enumerate().map(|(k, &i)| (k, i, -1.0)));
                }
                let mut jet = Jet::constant(n, rho);
                for &(k, i, s) in &touches {
                    jet.grad[i] += s * d[k] / rho;
                    for &(l, j, t) in &touches {
                        let delta = if k == l { 1.0 } else { 0.0 };
                        jet.hess[i * n + j] += s * t * (delta - d[k] * d[l] / (rho * rho)) / rho;
                    }
                }
                Ok(jet)
            }
            FieldExpr::Exp(a) => {
                let inner = a.jet(z)?;
                let e = inner.value.exp();
                Ok(inner.chain(e, e, e))
            }
            FieldExpr::Add(args) => {
                let mut out = Jet::constant(n, 0.0);
                for a in args {
                    out.add_assign(&a.jet(z)?);
                }
                Ok(out)
            }
            FieldExpr::Mul(args) => {
                let mut out = Jet::constant(n, 1.0);
                for a in args {
                    out = out.mul(&a.jet(z)?);
                }
                Ok(out)
            }
            FieldExpr::Pow { base, exponent: p } => {
                let inner = base.jet(z)?;
                let b = inner.value;
                if b < 0.0 && p.fract() != 0.0 {
                    return Err(eval_error(z, "negative base with fractional exponent"));
                }
                if b == 0.0 && *p < 2.0 && *p != 0.0 && *p != 1.0 {
                    return Err(eval_error(z, "power is not twice differentiable at 0"));
                }
                let f0 = b.powf(*p);
                let f1 = p * b.powf(p - 1.0);
                let f2 = p * (p - 1.0) * b.powf(p - 2.0);
                let f1 = if *p == 0.0 { 0.0 } else { f1 };
                let f2 = if *p == 0.0 || *p == 1.0 { 0.0 } else { f2 };
                Ok(inner.chain(f0, f1, f2))
            }
            FieldExpr::Ks(a) => {
                let w = ks_point(z);
                let inner = a.jet(&w)?;
                Ok(compose_ks(&inner, z))
            }
            FieldExpr::Laplacian { .. } | FieldExpr::Opaque(_) => Err(Error::DerivativesUnavailable),
        }
    }
}

/// Pulls a jet at `w = (K(y), x′)` back to `z = (y, x′)`.
#[allow(clippy::needless_range_loop)]
fn compose_ks(inner: &Jet, z: &[f64]) -> Jet {
    let n = z.len();
    let m = n - 1;
    let [y1, y2, y3, y4] = [z[0], z[1], z[2], z[3]];
    // Jacobian rows of K₁, K₂, K₃ with respect to y
    let dk = [
        [2.0 * y1, -2.0 * y2, -2.0 * y3, 2.0 * y4],
        [2.0 * y2, 2.0 * y1, -2.0 * y4, -2.0 * y3],
        [2.0 * y3, 2.0 * y4, 2.0 * y1, 2.0 * y2],
    ];
    // constant Hessians of K₁, K₂, K₃
    let d2k: [[[f64; 4]; 4]; 3] = [
        [[2.0, 0.0, 0.0, 0.0], [0.0, -2.0, 0.0, 0.0], [0.0, 0.0, -2.0, 0.0], [0.0, 0.0, 0.0, 2.0]],
        [[0.0, 2.0, 0.0, 0.0], [2.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, -2.0], [0.0, 0.0, -2.0, 0.0]],
        [[0.0, 0.0, 2.0, 0.0], [0.0, 0.0, 0.0, 2.0], [2.0, 0.0, 0.0, 0.0], [0.0, 2.0, 0.0, 0.0]],
    ];
    // J[a][i] = ∂w_a/∂z_i
    let jac = |a: usize, i: usize| -> f64 {
        match (a < 3, i < 4) {
            (true, true) => dk[a][i],
            (true, false) | (false, true) => 0.0,
            (false, false) => f64::from(u8::from(a - 3 == i - 4)),
        }
    };
    let mut out = Jet::constant(n, inner.value);
    for i in 0..n {
        out.grad[i] = (0..m).map(|a| inner.grad[a] * jac(a, i)).sum();
    }
    for i in 0..n {
        for j in 0..n {
            let mut h = 0.0;
            for a in 0..m {
                let ja = jac(a, i);
                if ja == 0.0 {
                    continue;
                }
                for b in 0..m {
                    h += ja * inner.hess[a * m + b] * jac(b, j);
                }
            }
            if i < 4 && j < 4 {
                h += (0..3).map(|c| inner.grad[c] * d2k[c][i][j]).sum::<f64>();
            }
            out.hess[i * n + j] = h;
        }
    }
    out
}

/// A scalar field on ℝ^dim.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    dim: usize,
    expr: FieldExpr,
}

impl ScalarField {
    pub fn new(dim: usize, expr: FieldExpr) -> Result<Self> {
        expr.validate(dim)?;
        Ok(ScalarField { dim, expr })
    }

    pub fn polynomial(dim: usize, p: Polynomial) -> Result<Self> {
        Self::new(dim, FieldExpr::Poly(PolyNode::new(p)))
    }

    pub fn constant(dim: usize, c: f64) -> Result<Self> {
        Self::polynomial(dim, Polynomial::constant(dim, from_f64(c)?))
    }

    /// `|z_coords|`.
    pub fn norm(dim: usize, coords: Vec<usize>) -> Result<Self> {
        Self::new(dim, FieldExpr::Norm { coords, minus: None })
    }

    /// `|z_coords − z_minus|`.
    pub fn distance(dim: usize, coords: Vec<usize>, minus: Vec<usize>) -> Result<Self> {
        Self::new(dim, FieldExpr::Norm { coords, minus: Some(minus) })
    }

    /// A value-only field from a closure.
    pub fn opaque(dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField { dim, expr: FieldExpr::Opaque(OpaqueFn(Arc::new(f))) }
    }

    pub fn exp(&self) -> Self {
        ScalarField { dim: self.dim, expr: FieldExpr::Exp(Box::new(self.expr.clone())) }
    }

    pub fn powf(&self, exponent: f64) -> Result<Self> {
        Self::new(self.dim, FieldExpr::Pow { base: Box::new(self.expr.clone()), exponent })
    }

    pub fn sum(fields: &[ScalarField]) -> Result<Self> {
        Self::combine(fields, FieldExpr::Add)
    }

    pub fn product(fields: &[ScalarField]) -> Result<Self> {
        Self::combine(fields, FieldExpr::Mul)
    }

    fn combine(fields: &[ScalarField], op: fn(Vec<FieldExpr>) -> FieldExpr) -> Result<Self> {
        let dim = fields.first().map(|f| f.dim).ok_or_else(|| Error::InvalidArgument("empty field list".into()))?;
        if let Some(f) = fields.iter().find(|f| f.dim != dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: f.dim });
        }
        Ok(ScalarField { dim, expr: op(fields.iter().map(|f| f.expr.clone()).collect()) })
    }

    pub fn add(&self, other: &ScalarField) -> Result<Self> {
        Self::sum(&[self.clone(), other.clone()])
    }

    pub fn mul(&self, other: &ScalarField) -> Result<Self> {
        Self::product(&[self.clone(), other.clone()])
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        self.mul(&Self::constant(self.dim, c)?)
    }

    /// `z ↦ self(K(z₁..z₄), z₅..)`, a field on one more dimension.
    pub fn ks_pullback(&self) -> Self {
        ScalarField { dim: self.dim + 1, expr: FieldExpr::Ks(Box::new(self.expr.clone())) }
    }

    /// The Laplacian in the listed coordinates, as a value-only field.
    pub fn laplacian_field(&self, coords: Vec<usize>) -> Result<Self> {
        Self::new(self.dim, FieldExpr::Laplacian { arg: Box::new(self.expr.clone()), coords })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn expr(&self) -> &FieldExpr {
        &self.expr
    }

    pub fn has_analytic_derivatives(&self) -> bool {
        self.expr.analytic()
    }

    fn check_point(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: z.len() });
        }
        Ok(())
    }

    pub fn eval(&self, z: &[f64]) -> Result<f64> {
        self.check_point(z)?;
        self.expr.eval(z)
    }

    /// Analytic value, gradient and Hessian.
    pub fn jet(&self, z: &[f64]) -> Result<Jet> {
        self.check_point(z)?;
        if !self.has_analytic_derivatives() {
            return Err(Error::DerivativesUnavailable);
        }
        self.expr.jet(z)
    }

    /// Laplacian in `coords` by the requested method.
    pub fn laplacian(&self, z: &[f64], coords: &[usize], mode: DerivativeMode) -> Result<f64> {
        self.check_point(z)?;
        match mode {
            DerivativeMode::Analytic => Ok(self.jet(z)?.laplacian(coords)),
            DerivativeMode::Auto if self.has_analytic_derivatives() => Ok(self.jet(z)?.laplacian(coords)),
            DerivativeMode::Auto | DerivativeMode::FiniteDifference => {
                laplacian_fd(&|w: &[f64]| self.expr.eval(w), z, coords)
            }
        }
    }
}

/// How second derivatives are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeMode {
    Analytic,
    FiniteDifference,
    Auto,
}

/// Fourth-order central stencil for `∂²f/∂z_i²` with step `h`.
pub fn second_derivative_stencil(f: &dyn Fn(&[f64]) -> Result<f64>, z: &[f64], i: usize, h: f64) -> Result<f64> {
    let mut w = z.to_vec();
    let mut at = |t: f64| -> Result<f64> {
        w[i] = z[i] + t;
        f(&w)
    };
    let (m2, m1, c, p1, p2) = (at(-2.0 * h)?, at(-h)?, at(0.0)?, at(h)?, at(2.0 * h)?);
    Ok((-m2 + 16.0 * m1 - 30.0 * c + 16.0 * p1 - p2) / (12.0 * h * h))
}

/// Default step `10⁻³·(1 + |z_coords|)`, scaled to the differentiated block.
pub fn fd_step(z: &[f64], coords: &[usize]) -> f64 {
    1e-3 * (1.0 + coords.iter().map(|&i| z[i] * z[i]).sum::<f64>().sqrt())
}

/// Stencil Laplacian with one Richardson level, `(16 D(h/2) − D(h))/15`.
pub fn laplacian_fd(f: &dyn Fn(&[f64]) -> Result<f64>, z: &[f64], coords: &[usize]) -> Result<f64> {
    let h = fd_step(z, coords);
    let mut total = 0.0;
    for &i in coords {
        let coarse = second_derivative_stencil(f, z, i, h)?;
        let fine = second_derivative_stencil(f, z, i, h / 2.0)?;
        total += (16.0 * fine - coarse) / 15.0;
    }
    Ok(total)
}

fn field_to_json(e: &FieldExpr) -> std::result::Result<Value, String> {
    let list = |args: &[FieldExpr]| args.iter().map(field_to_json).collect::<std::result::Result<Vec<_>, _>>();
    Ok(match e {
        FieldExpr::Poly(p) => json!({"op": "poly", "poly": p.poly}),
        FieldExpr::Norm { coords, minus: None } => json!({"op": "norm", "coords": coords}),
        FieldExpr::Norm { coords, minus: Some(m) } => json!({"op": "norm", "coords": coords, "minus": m}),
        FieldExpr::Exp(a) => json!({"op": "exp", "arg": field_to_json(a)?}),
        FieldExpr::Add(args) => json!({"op": "add", "args": list(args)?}),
        FieldExpr::Mul(args) => json!({"op": "mul", "args": list(args)?}),
        FieldExpr::Pow { base, exponent } => json!({"op": "pow", "base": field_to_json(base)?, "exponent": exponent}),
        FieldExpr::Ks(a) => json!({"op": "ks", "arg": field_to_json(a)?}),
        FieldExpr::Laplacian { arg, coords } => {
            json!({"op": "laplacian", "arg": field_to_json(arg)?, "coords": coords})
        }
        FieldExpr::Opaque(_) => return Err("opaque fields cannot be serialized".into()),
    })
}

fn field_from_json(v: &Value) -> std::result::Result<FieldExpr, String> {
    let obj = v.as_object().ok_or("field must be a JSON object")?;
    let op = obj.get("op").and_then(Value::as_str).ok_or("field needs a string \"op\"")?;
    let allowed: &[&str] = match op {
        "poly" => &["poly"],
        "norm" => &["coords", "minus"],
        "exp" | "ks" => &["arg"],
        "add" | "mul" => &["args"],
        "pow" => &["base", "exponent"],
        "laplacian" => &["arg", "coords"],
        other => return Err(format!("unknown field op {other:?}")),
    };
    if let Some(k) = obj.keys().find(|k| k.as_str() != "op" && !allowed.contains(&k.as_str())) {
        return Err(format!("unknown field {k:?} in {op:?} node"));
    }
    let get = |k: &str| obj.get(k).ok_or_else(|| format!("{op:?} node needs {k:?}"));
    let sub = |k: &str| get(k).and_then(field_from_json).map(Box::new);
    let indices = |v: &Value| -> std::result::Result<Vec<usize>, String> {
        v.as_array()
            .ok_or("coordinate list must be an array")?
            .iter()
            .map(|i| i.as_u64().map(|i| i as usize).ok_or_else(|| "coordinate must be a natural number".to_string()))
            .collect()
    };
    Ok(match op {
        "poly" => {
            let p: Polynomial = serde_json::from_value(get("poly")?.clone()).map_err(|e| e.to_string())?;
            FieldExpr::Poly(PolyNode::new(p))
        }
        "norm" => FieldExpr::Norm {
            coords: indices(get("coords")?)?,
            minus: obj.get("minus").map(indices).transpose()?,
        },
        "exp" => FieldExpr::Exp(sub("arg")?),
        "ks" => FieldExpr::Ks(sub("arg")?),
        "add" | "mul" => {
            let args = get("args")?
                .as_array()
                .ok_or("\"args\" must be an array")?
                .iter()
                .map(field_from_json)
                .collect::<std::result::Result<Vec<_>, _>>()?;
            if op == "add" {
                FieldExpr::Add(args)
            } else {
                FieldExpr::Mul(args)
            }
        }
        "pow" => FieldExpr::Pow {
            base: sub("base")?,
            exponent: get("exponent")?.as_f64().ok_or("\"exponent\" must be a number")?,
        },
        _ => FieldExpr::Laplacian { arg: sub("arg")?, coords: indices(get("coords")?)? },
    })
}

impl Serialize for FieldExpr {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        field_to_json(self).map_err(serde::ser::Error::custom)?.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FieldExpr {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(deserializer)?;
        field_from_json(&v).map_err(serde::de::Error::custom)
    }
}

/// Parses a field of the given dimension from its JSON expression tree.
pub fn parse_field(v: &Value, dim: usize) -> Result<ScalarField> {
    let expr = field_from_json(v).map_err(Error::Parse)?;
    ScalarField::new(dim, expr)
}

/// The expression tree of a field as JSON.
pub fn field_json(f: &ScalarField) -> Result<Value> {
    field_to_json(&f.expr).map_err(Error::InvalidArgument)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn gaussian(dim: usize) -> ScalarField {
        let r2 = Polynomial::norm_squared(dim).scale(&ratio(-1, 2));
        ScalarField::polynomial(dim, r2).unwrap().exp()
    }

    #[test]
    fn polynomial_jet_matches_symbolic_derivatives() {
        let x = |i| Polynomial::var(3, i);
        let p = &(&(&x(0) * &x(0)) * &x(1)) + &x(2).pow(3).scale(&int(-2));
        let f = ScalarField::polynomial(3, p.clone()).unwrap();
        let z = [0.3, -1.2, 0.7];
        let jet = f.jet(&z).unwrap();
        assert!((jet.value - p.eval(&z)).abs() < 1e-14);
        for i in 0..3 {
            assert!((jet.grad[i] - p.derivative(i).eval(&z)).abs() < 1e-13);
            for j in 0..3 {
                let exact = p.derivative(i).derivative(j).eval(&z);
                assert!((jet.second(i, j) - exact).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn gaussian_laplacian_closed_form() {
        // Δ e^{−ρ²/2} = (ρ² − n) e^{−ρ²/2}
        let f = gaussian(4);
        let z = [0.2, -0.4, 0.1, 0.9];
        let rho2: f64 = z.iter().map(|v| v * v).sum();
        let exact = (rho2 - 4.0) * (-rho2 / 2.0).exp();
        let analytic = f.laplacian(&z, &[0, 1, 2, 3], DerivativeMode::Analytic).unwrap();
        let fd = f.laplacian(&z, &[0, 1, 2, 3], DerivativeMode::FiniteDifference).unwrap();
        assert!((analytic - exact).abs() < 1e-14);
        assert!((fd - exact).abs() < 1e-9);
    }

    #[test]
    fn norm_and_pow_derivatives() {
        // Δ|x|^p = p(p+1)|x|^{p−2} in ℝ³
        let f = ScalarField::norm(3, vec![0, 1, 2]).unwrap().powf(0.5).unwrap();
        let z = [0.3, 0.4, 1.2];
        let r: f64 = z.iter().map(|v| v * v).sum::<f64>().sqrt();
        let lap = f.laplacian(&z, &[0, 1, 2], DerivativeMode::Analytic).unwrap();
        assert!((lap - 0.75 * r.powf(-1.5)).abs() < 1e-13);
        let err = f.jet(&[0.0, 0.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Evaluation { .. }));
        assert_eq!(f.eval(&[0.0, 0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn distance_hessian() {
        let f = ScalarField::distance(6, vec![0, 1, 2], vec![3, 4, 5]).unwrap();
        let z = [1.0, 2.0, 0.5, -0.3, 0.1, 0.2];
        let jet = f.jet(&z).unwrap();
        let fd = laplacian_fd(&|w: &[f64]| f.eval(w), &z, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert!((jet.laplacian(&[0, 1, 2, 3, 4, 5]) - fd).abs() < 1e-8);
        let d = ((1.3f64).powi(2) + 1.9f64.powi(2) + 0.3f64.powi(2)).sqrt();
        assert!((jet.laplacian(&[0, 1, 2]) - 2.0 / d).abs() < 1e-13);
    }

    #[test]
    fn ks_pullback_of_radial_function() {
        // e^{−|x|}∘K = e^{−|y|²}
        let f = ScalarField::norm(3, vec![0, 1, 2]).unwrap().scale(-1.0).unwrap().exp();
        let g = f.ks_pullback();
        let direct = ScalarField::polynomial(4, Polynomial::norm_squared(4).scale(&int(-1))).unwrap().exp();
        let y = [0.3, -0.2, 0.5, 0.1];
        let a = g.jet(&y).unwrap();
        let b = direct.jet(&y).unwrap();
        for (u, v) in a.grad.iter().zip(&b.grad) {
            assert!((u - v).abs() < 1e-13);
        }
        for (u, v) in a.hess.iter().zip(&b.hess) {
            assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn ks_carries_trailing_coordinates() {
        let p = &Polynomial::var(4, 0) * &Polynomial::var(4, 3);
        let f = ScalarField::polynomial(4, p).unwrap().ks_pullback();
        assert_eq!(f.dim(), 5);
        let z = [1.0, 0.0, 0.0, 0.0, 3.0];
        assert_eq!(f.eval(&z).unwrap(), 3.0);
        let fd = laplacian_fd(&|w: &[f64]| f.eval(w), &z, &[0, 1, 2, 3, 4]).unwrap();
        let an = f.laplacian(&z, &[0, 1, 2, 3, 4], DerivativeMode::Analytic).unwrap();
        assert!((fd - an).abs() < 1e-7);
    }

    #[test]
    fn stencil_is_fourth_order() {
        let f = gaussian(2).mul(&ScalarField::polynomial(2, Polynomial::var(2, 0).pow(3)).unwrap()).unwrap();
        let z = [0.7, -0.4];
        let exact = f.jet(&z).unwrap().second(0, 0);
        let eval = |w: &[f64]| f.eval(w);
        let errs: Vec<f64> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (second_derivative_stencil(&eval, &z, 0, h).unwrap() - exact).abs())
            .collect();
        for w in errs.windows(2) {
            assert!((w[0] / w[1]).log2() >= 3.5, "{errs:?}");
        }
    }

    #[test]
    fn laplacian_node_and_opaque_are_value_only() {
        let f = gaussian(3);
        let lap = f.laplacian_field(vec![0, 1, 2]).unwrap();
        assert!(!lap.has_analytic_derivatives());
        assert_eq!(lap.jet(&[0.1, 0.2, 0.3]).unwrap_err(), Error::DerivativesUnavailable);
        let z = [0.1, 0.2, 0.3];
        let rho2: f64 = z.iter().map(|v| v * v).sum();
        assert!((lap.eval(&z).unwrap() - (rho2 - 3.0) * (-rho2 / 2.0).exp()).abs() < 1e-14);
        let o = ScalarField::opaque(1, |z| z[0].sin());
        assert!(!o.has_analytic_derivatives());
        assert!(field_json(&o).is_err());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"op":"mul","args":[{"op":"exp","arg":{"op":"mul","args":[{"op":"poly","poly":{"dim":1,"terms":[{"exp":[0],"num":-1,"den":2}]}},{"op":"norm","coords":[0,1,2]}]}},{"op":"pow","base":{"op":"norm","coords":[0,1,2],"minus":[3,4,5]},"exponent":-1.0}]}"#;
        let v: Value = serde_json::from_str(text).unwrap();
        let f = parse_field(&v, 6).unwrap();
        assert_eq!(serde_json::to_string(&field_json(&f).unwrap()).unwrap(), text);
        let z = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0];
        let expected = (-0.5f64).exp() / 2f64.sqrt();
        assert!((f.eval(&z).unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn json_rejects_bad_trees() {
        for text in [
            r#"{"op":"sin","arg":{"op":"norm","coords":[0]}}"#,
            r#"{"op":"exp","arg":{"op":"norm","coords":[0]},"extra":1}"#,
            r#"{"op":"norm","coords":[5]}"#,
            r#"{"op":"pow","base":{"op":"norm","coords":[0]}}"#,
        ] {
            let v: Value = serde_json::from_str(text).unwrap();
            assert!(parse_field(&v, 3).is_err(), "{text}");
        }
    }
}
