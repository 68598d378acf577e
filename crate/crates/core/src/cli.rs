//! JSON command surface behind the `ks` binary.
//!
//! Each subcommand reads one JSON document and writes one JSON document.
//! Exit status: 0 on success, 1 when a verification does not pass, 2 on
//! malformed or invalid input (with `{"error": code, "detail": text}`).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::field::{parse_field, DerivativeMode, ScalarField};
use crate::geometry::{fiber, ks_map_exact, pullback_polynomial};
use crate::harmonic::{canonical_decompose, hopf_descend};
use crate::poly::{HomogeneousPolynomial, Polynomial};
use crate::rational::{to_f64, JsonRational};
use crate::series::{estimate_growth, growth_to_radius, universal_constant_r, TruncatedSeries};
use crate::split::{split_even_series, split_n_particle};
use crate::verify::{
    grusin_apply, isometry_check, lift_identity_check, one_particle_residuals, sample_ball, sample_shell,
    LiftProblem, Region, ResidualReport, TOL_ANALYTIC, TOL_FINITE_DIFFERENCE, TOL_QUADRATURE,
};

pub const SUBCOMMANDS: [&str; 11] = [
    "map",
    "fiber",
    "pullback",
    "decompose",
    "descend",
    "split",
    "split-n",
    "growth",
    "verify-lift",
    "verify-grusin",
    "verify-isometry",
];

/// Command-line options shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub max_degree: u32,
    pub tol: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub precision: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { max_degree: 12, tol: None, samples: 200, seed: 0, precision: 15 }
    }
}

/// Exit status and the text written to standard output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
}

enum Failure {
    Input(Error),
    Verification(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

type CmdResult = std::result::Result<Value, Failure>;

/// Runs one subcommand on a JSON input document.
pub fn run(command: &str, input: &str, opts: &Options) -> Outcome {
    let result = serde_json::from_str::<Value>(input)
        .map_err(|e| Failure::Input(Error::Parse(e.to_string())))
        .and_then(|doc| dispatch(command, doc, opts));
    match result {
        Ok(v) => Outcome { code: 0, stdout: emit(&v, opts.precision) },
        Err(Failure::Verification(v)) => Outcome { code: 1, stdout: emit(&v, opts.precision) },
        Err(Failure::Input(e)) => {
            let v = json!({"error": e.code(), "detail": e.to_string()});
            Outcome { code: 2, stdout: emit(&v, opts.precision) }
        }
    }
}

fn dispatch(command: &str, doc: Value, opts: &Options) -> CmdResult {
    match command {
        "map" => cmd_map(doc),
        "fiber" => cmd_fiber(doc),
        "pullback" => cmd_pullback(doc),
        "decompose" => cmd_decompose(doc),
        "descend" => cmd_descend(doc),
        "split" => cmd_split(doc, opts),
        "split-n" => cmd_split_n(doc, opts),
        "growth" => cmd_growth(doc, opts),
        "verify-lift" => cmd_verify_lift(doc, opts),
        "verify-grusin" => cmd_verify_grusin(doc, opts),
        "verify-isometry" => cmd_verify_isometry(doc, opts),
        other => Err(Failure::Input(Error::InvalidArgument(format!("unknown subcommand {other:?}")))),
    }
}

fn parse<T: DeserializeOwned>(doc: Value) -> Result<T> {
    serde_json::from_value(doc).map_err(|e| Error::Parse(e.to_string()))
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value> {
    serde_json::to_value(v).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Rounds every non-integer number to `precision` significant digits.
fn round_numbers(v: &mut Value, precision: usize) {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            if text.contains(['.', 'e', 'E']) {
                if let Some(x) = n.as_f64() {
                    let digits = precision.clamp(1, 17);
                    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().unwrap_or(x);
                    if let Some(num) = serde_json::Number::from_f64(rounded) {
                        *n = num;
                    }
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|x| round_numbers(x, precision)),
        Value::Object(map) => map.values_mut().for_each(|x| round_numbers(x, precision)),
        _ => {}
    }
}

fn emit(v: &Value, precision: usize) -> String {
    let mut v = v.clone();
    round_numbers(&mut v, precision);
    let mut s = serde_json::to_string(&v).expect("JSON values serialize");
    s.push('\n');
    s
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MapInput {
    y: [JsonRational; 4],
}

fn cmd_map(doc: Value) -> CmdResult {
    let input: MapInput = parse(doc)?;
    let y = input.y.map(|q| q.0);
    let x = ks_map_exact(&y);
    Ok(json!({"x": x.into_iter().map(JsonRational).collect::<Vec<_>>()}))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FiberInput {
    x: [JsonRational; 3],
}

fn cmd_fiber(doc: Value) -> CmdResult {
    let input: FiberInput = parse(doc)?;
    let x = [to_f64(&input.x[0].0), to_f64(&input.x[1].0), to_f64(&input.x[2].0)];
    Ok(to_value(&fiber(&x))?)
}

fn cmd_pullback(doc: Value) -> CmdResult {
    let f: Polynomial = parse(doc)?;
    Ok(to_value(&pullback_polynomial(&f)?)?)
}

fn homogeneous(doc: Value) -> Result<HomogeneousPolynomial> {
    let p: Polynomial = parse(doc)?;
    if p.is_zero() {
        return Err(Error::InvalidArgument("the zero polynomial has no degree".into()));
    }
    HomogeneousPolynomial::from_polynomial(p)
}

fn cmd_decompose(doc: Value) -> CmdResult {
    Ok(to_value(&canonical_decompose(&homogeneous(doc)?)?)?)
}

fn cmd_descend(doc: Value) -> CmdResult {
    Ok(to_value(hopf_descend(&homogeneous(doc)?)?.as_polynomial())?)
}

/// Parses a series and truncates it at `--max-degree`.
fn series_input(doc: Value, opts: &Options) -> Result<TruncatedSeries> {
    let s: TruncatedSeries = parse(doc)?;
    if s.max_degree() <= opts.max_degree {
        return Ok(s);
    }
    let poly = s.polynomial().truncate(opts.max_degree);
    TruncatedSeries::with_center(poly, opts.max_degree, s.center().to_vec())
}

fn cmd_split(doc: Value, opts: &Options) -> CmdResult {
    Ok(to_value(&split_even_series(&series_input(doc, opts)?)?)?)
}

fn cmd_split_n(doc: Value, opts: &Options) -> CmdResult {
    Ok(to_value(&split_n_particle(&series_input(doc, opts)?)?)?)
}

fn cmd_growth(doc: Value, opts: &Options) -> CmdResult {
    let g = estimate_growth(&series_input(doc, opts)?)?;
    let r = growth_to_radius(&g);
    Ok(json!({
        "C": g.c,
        "M": g.m,
        "R": universal_constant_r(),
        "C_tilde": r.c_tilde,
        "M_tilde": r.m_tilde,
        "r": r.r,
    }))
}

fn field_at(obj: &serde_json::Map<String, Value>, key: &str, dim: usize) -> Result<Option<ScalarField>> {
    obj.get(key).map(|v| parse_field(v, dim)).transpose()
}

fn take_object(doc: Value, allowed: &[&str]) -> Result<serde_json::Map<String, Value>> {
    let Value::Object(obj) = doc else {
        return Err(Error::Parse("input must be a JSON object".into()));
    };
    if let Some(k) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        return Err(Error::Parse(format!("unknown field {k:?}")));
    }
    Ok(obj)
}

fn number(obj: &serde_json::Map<String, Value>, key: &str) -> Result<Option<f64>> {
    obj.get(key)
        .map(|v| v.as_f64().ok_or_else(|| Error::Parse(format!("{key:?} must be a number"))))
        .transpose()
}

fn mode_of(obj: &serde_json::Map<String, Value>) -> Result<DerivativeMode> {
    obj.get("mode").map_or(Ok(DerivativeMode::Auto), |v| parse(v.clone()))
}

/// Default tolerance for a residual check with the given derivative source.
fn residual_tol(opts: &Options, analytic: bool) -> f64 {
    opts.tol.unwrap_or(if analytic { TOL_ANALYTIC } else { TOL_FINITE_DIFFERENCE })
}

fn uses_analytic(mode: DerivativeMode, fields: &[&ScalarField]) -> bool {
    match mode {
        DerivativeMode::Analytic => true,
        DerivativeMode::FiniteDifference => false,
        DerivativeMode::Auto => fields.iter().all(|f| f.has_analytic_derivatives()),
    }
}

fn report(residuals: &[f64], tol: f64) -> CmdResult {
    let r = ResidualReport::from_residuals(residuals, tol);
    let v = to_value(&r)?;
    if r.pass {
        Ok(v)
    } else {
        Err(Failure::Verification(v))
    }
}

fn shell_bounds(obj: &serde_json::Map<String, Value>, default_max: f64) -> Result<(f64, f64)> {
    let rmin = number(obj, "r_min")?.unwrap_or(0.1);
    let rmax = number(obj, "r_max")?.unwrap_or(default_max);
    if !(0.0 < rmin && rmin <= rmax) {
        return Err(Error::InvalidArgument("need 0 < r_min <= r_max".into()));
    }
    Ok((rmin, rmax))
}

fn cmd_verify_lift(doc: Value, opts: &Options) -> CmdResult {
    let obj = take_object(doc, &["phi", "phi_K", "W1", "W2", "F1", "F2", "mode", "r_min", "r_max"])?;
    let phi_k = match (field_at(&obj, "phi", 3)?, field_at(&obj, "phi_K", 4)?) {
        (Some(phi), None) => phi.ks_pullback(),
        (None, Some(phi_k)) => phi_k,
        _ => return Err(Error::Parse("give exactly one of \"phi\" and \"phi_K\"".into()).into()),
    };
    let zero = ScalarField::constant(3, 0.0)?;
    let get = |k: &str| -> Result<ScalarField> { Ok(field_at(&obj, k, 3)?.unwrap_or_else(|| zero.clone())) };
    let (w1, w2, f1, f2) = (get("W1")?, get("W2")?, get("F1")?, get("F2")?);
    let mode = mode_of(&obj)?;
    let (rmin, rmax) = shell_bounds(&obj, 1.0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let points: Vec<[f64; 4]> = (0..opts.samples)
        .map(|_| {
            let v = sample_shell(&mut rng, 4, rmin, rmax);
            [v[0], v[1], v[2], v[3]]
        })
        .collect();
    let residuals = one_particle_residuals(&phi_k, &w1, &w2, &f1, &f2, &points, mode)?;
    report(&residuals, residual_tol(opts, uses_analytic(mode, &[&phi_k])))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProblemInput {
    #[serde(rename = "Z")]
    z: f64,
    #[serde(rename = "E", default)]
    e: f64,
    #[serde(rename = "N")]
    n: usize,
    region: Region,
}

fn cmd_verify_grusin(doc: Value, opts: &Options) -> CmdResult {
    let obj = take_object(doc, &["problem", "W", "psi", "u", "mode", "r_min", "r_max"])?;
    let problem_doc = obj.get("problem").cloned().ok_or_else(|| Error::Parse("missing \"problem\"".into()))?;
    let pi: ProblemInput = parse(problem_doc)?;
    let n = pi.n.max(1);
    let problem = match field_at(&obj, "W", 3 * n)? {
        Some(w) => LiftProblem::new(pi.z, pi.e, pi.n, w, pi.region)?,
        None => LiftProblem::atomic(pi.z, pi.e, pi.n, pi.region)?,
    };
    let mode = mode_of(&obj)?;
    let default_max = problem.region.x_radius.sqrt().min(1.0) * (1.0 - 1e-9);
    let (rmin, rmax) = shell_bounds(&obj, default_max)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let points: Vec<Vec<f64>> = (0..opts.samples)
        .map(|_| {
            let mut p = sample_shell(&mut rng, 4, rmin, rmax);
            p.extend(sample_ball(&mut rng, &problem.region.xprime_center, problem.region.xprime_radius));
            p
        })
        .collect();
    let residuals: Vec<f64> = match (field_at(&obj, "psi", 3 * n)?, field_at(&obj, "u", 3 * n + 1)?) {
        (Some(psi), None) => {
            let analytic = uses_analytic(mode, &[&psi, &problem.w]);
            let r = points
                .iter()
                .map(|p| lift_identity_check(&psi, &problem, p, mode).map(|s| (s.lhs - s.rhs).abs()))
                .collect::<Result<Vec<_>>>()?;
            return report(&r, residual_tol(opts, analytic));
        }
        (None, Some(u)) => points
            .iter()
            .map(|p| grusin_apply(&u, &problem, p, mode).map(f64::abs))
            .collect::<Result<Vec<_>>>()?,
        _ => return Err(Error::Parse("give exactly one of \"psi\" and \"u\"".into()).into()),
    };
    let analytic = uses_analytic(mode, &[&problem.w]) && mode != DerivativeMode::FiniteDifference;
    report(&residuals, residual_tol(opts, analytic))
}

fn cmd_verify_isometry(doc: Value, opts: &Options) -> CmdResult {
    let obj = take_object(doc, &["phi", "r", "weighted"])?;
    let phi = field_at(&obj, "phi", 3)?.ok_or_else(|| Error::Parse("missing \"phi\"".into()))?;
    let r = number(&obj, "r")?.ok_or_else(|| Error::Parse("missing \"r\"".into()))?;
    let weighted = match obj.get("weighted") {
        None => false,
        Some(v) => v.as_bool().ok_or_else(|| Error::Parse("\"weighted\" must be a boolean".into()))?,
    };
    let tol = opts.tol.unwrap_or(TOL_QUADRATURE);
    let rep = match isometry_check(&phi, r, tol * 1e-2, weighted) {
        Ok(rep) => rep,
        Err(e @ (Error::QuadratureBudget(_) | Error::Evaluation { .. })) => {
            return Err(Failure::Verification(json!({"error": e.code(), "detail": e.to_string(), "pass": false})));
        }
        Err(e) => return Err(e.into()),
    };
    let pass = (rep.lhs - rep.rhs).abs() <= tol * rep.rhs.abs().max(1.0);
    let v = json!({"lhs": rep.lhs, "rhs": rep.rhs, "pass": pass});
    if pass {
        Ok(v)
    } else {
        Err(Failure::Verification(v))
    }
}
