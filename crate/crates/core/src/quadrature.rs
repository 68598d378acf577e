//! One-dimensional quadrature: adaptive Gauss–Kronrod (7/15) with a global
//! error estimate, and fixed composite Gauss–Legendre rules. Sums use
//! Neumaier compensation so results do not depend on evaluation order.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Compensated (Neumaier) summation.
#[derive(Debug, Clone, Copy, Default)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = NeumaierSum::default();
        iter.into_iter().for_each(|x| s.add(x));
        s
    }
}

// Kronrod abscissae on [0, 1] (symmetric), largest first; odd positions are
// the 7-point Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Stopping rule: `error ≤ max(abs, rel·|integral|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Tolerance { abs, rel }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

/// Adaptive integration settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Adaptive {
    pub tol: Tolerance,
    /// Maximum number of subintervals.
    pub budget: usize,
    /// Evaluate the 15 nodes of a panel in parallel.
    pub parallel: bool,
}

impl Adaptive {
    pub fn new(tol: Tolerance, budget: usize) -> Self {
        Adaptive { tol, budget, parallel: false }
    }

    pub fn parallel(mut self) -> Self {
        self.parallel = true;
        self
    }
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod_nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut x = [0.0; 15];
    for k in 0..7 {
        x[2 * k] = c - h * XGK[k];
        x[2 * k + 1] = c + h * XGK[k];
    }
    x[14] = c;
    x
}

fn gk15<F>(f: &F, a: f64, b: f64, parallel: bool) -> Result<Panel>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let x = kronrod_nodes(a, b);
    let fx: Vec<f64> = if parallel {
        x.par_iter().map(|&t| f(t)).collect::<Result<_>>()?
    } else {
        x.iter().map(|&t| f(t)).collect::<Result<_>>()?
    };
    let h = 0.5 * (b - a);
    let mut kron = NeumaierSum::default();
    let mut gauss = NeumaierSum::default();
    for k in 0..7 {
        let pair = fx[2 * k] + fx[2 * k + 1];
        kron.add(WGK[k] * pair);
        if k % 2 == 1 {
            gauss.add(WG[k / 2] * pair);
        }
    }
    kron.add(WGK[7] * fx[14]);
    gauss.add(WG[3] * fx[14]);
    let value = h * kron.value();
    let error = (h * (kron.value() - gauss.value())).abs();
    Ok(Panel { a, b, value, error })
}

/// `∫_a^b f` by globally adaptive bisection of the panel with largest error.
pub fn integrate<F>(f: &F, a: f64, b: f64, opts: &Adaptive) -> Result<f64>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    let mut panels = vec![gk15(f, a, b, opts.parallel)?];
    loop {
        let value: NeumaierSum = panels.iter().map(|p| p.value).collect();
        let error: NeumaierSum = panels.iter().map(|p| p.error).collect();
        if error.value() <= opts.tol.target(value.value()) {
            return Ok(value.value());
        }
        if panels.len() >= opts.budget {
            return Err(Error::QuadratureBudget(opts.budget));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        panels.push(gk15(f, p.a, mid, opts.parallel)?);
        panels.push(gk15(f, mid, p.b, opts.parallel)?);
    }
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n and its derivative
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Fixed composite rule: `panels` equal panels with `order` Gauss points each.
pub fn composite_gauss_legendre<F>(f: &F, a: f64, b: f64, panels: usize, order: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut sum = NeumaierSum::default();
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            sum.add(0.5 * h * wi * f(c + 0.5 * h * xi)?);
        }
    }
    Ok(sum.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(tol: f64) -> Adaptive {
        Adaptive::new(Tolerance::new(tol, tol), 500)
    }

    #[test]
    fn kronrod_is_exact_for_degree_22() {
        // the 15-point Kronrod rule integrates polynomials of degree ≤ 22 exactly
        for d in 0..=22 {
            let p = gk15(&|x: f64| Ok(x.powi(d)), 0.0, 1.0, false).unwrap();
            assert!((p.value - 1.0 / (d as f64 + 1.0)).abs() < 1e-15, "degree {d}");
        }
        let weights: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        assert!((weights - 2.0).abs() < 1e-15);
        let gauss: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((gauss - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_handles_peaks() {
        let f = |x: f64| Ok(1.0 / (1e-4 + x * x));
        let v = integrate(&f, -1.0, 1.0, &opts(1e-12)).unwrap();
        let exact = 2.0 * (1.0 / 1e-2f64).atan() / 1e-2;
        assert!((v - exact).abs() < 1e-9 * exact);
        let p = integrate(&f, -1.0, 1.0, &opts(1e-12).parallel()).unwrap();
        assert_eq!(p, v);
    }

    #[test]
    fn budget_is_enforced() {
        let f = |x: f64| Ok(x.abs().sqrt().recip());
        let tight = Adaptive::new(Tolerance::new(1e-15, 0.0), 8);
        assert_eq!(integrate(&f, -1.0, 1.0, &tight).unwrap_err(), Error::QuadratureBudget(8));
    }

    #[test]
    fn legendre_rules() {
        for n in 1..=12 {
            let (x, w) = gauss_legendre(n);
            for d in 0..(2 * n) {
                let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
                let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
                assert!((q - exact).abs() < 1e-13, "n={n} d={d}");
            }
        }
        let v = composite_gauss_legendre(&|x: f64| Ok(x.exp()), 0.0, 1.0, 4, 3).unwrap();
        assert!((v - (1f64.exp() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn compensated_sum() {
        let s: NeumaierSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(s.value(), 2.0);
    }
}
