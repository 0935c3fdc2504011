//! Experiment drivers. Each driver evaluates both sides of one weighted
//! inequality on concrete inputs and returns a [`VerificationReport`]; decay
//! experiments also return a [`DecayCurve`] with its fitted model.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};
use serde_json::{Value, json};
use thiserror::Error;

use crate::grid::{CubeScope, DyadicCube, Domain, GridError, GridFunction, Interval};
use crate::maximal::{MaximalKind, MaximalVariant, MultiFlavor, hardy_littlewood, maximal, multilinear_maximal};
use crate::operators::{KernelOperator, OperatorError, bmo_norm, iterated_commutator, stein_square_function, weighted_bmo_norm};
use crate::orlicz::{Measure, OrliczError, YoungFunction, dilation_indices, quasi_convex_exponent};
use crate::sparse::{SparseError, oscillation_sparse, principal_cubes, sparse_operator};
use crate::stats::linear_fit;
use crate::weights::{DimensionalConstants, Weight, WeightError, k0_p0, k0_p0_ap, rubio_de_francia, s_u};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Weight(#[from] WeightError),
    #[error(transparent)]
    Sparse(#[from] SparseError),
    #[error(transparent)]
    Orlicz(#[from] OrliczError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("invalid parameter: {0}")]
    Parameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    HoldsWithMargin,
    Violated,
    Degenerate,
}

impl Verdict {
    pub fn is_ok(self) -> bool {
        matches!(self, Verdict::Holds | Verdict::HoldsWithMargin)
    }

    /// `ratio <= 1` holds with margin, `ratio <= bound` holds.
    pub fn from_ratio(ratio: f64, bound: f64) -> Self {
        if ratio.is_nan() {
            Verdict::Degenerate
        } else if ratio <= 1.0 {
            Verdict::HoldsWithMargin
        } else if ratio <= bound * (1.0 + 1e-12) {
            Verdict::Holds
        } else {
            Verdict::Violated
        }
    }
}

/// `φ(t) ≈ c·exp(-α t^p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fit {
    pub c: f64,
    pub alpha: f64,
    pub p: f64,
    pub r2: f64,
}

impl Fit {
    pub fn model(&self, t: f64) -> f64 {
        self.c * (-self.alpha * t.powf(self.p)).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub l: u32,
    pub pv_cutoff: usize,
    pub dimensional: DimensionalConstants,
    pub seed: u64,
}

/// Settings shared by every driver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Context {
    pub dimensional: DimensionalConstants,
    /// absorbs the implied constant of `≲`
    pub slack: f64,
    pub seed: u64,
}

impl Default for Context {
    fn default() -> Self {
        Self {
            dimensional: DimensionalConstants::default(),
            slack: 10.0,
            seed: 0,
        }
    }
}

impl Context {
    fn env(&self, d: &Domain) -> Environment {
        Environment {
            l: d.resolution_log2,
            pv_cutoff: 1,
            dimensional: self.dimensional,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub id: String,
    pub params: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub constants: BTreeMap<String, f64>,
    pub ratio: f64,
    pub fit: Option<Fit>,
    pub verdict: Verdict,
    pub env: Environment,
}

/// Report numbers must stay finite so the JSON round-trips.
fn finite(v: f64) -> f64 {
    if v.is_nan() {
        0.0
    } else {
        v.clamp(-f64::MAX, f64::MAX)
    }
}

fn safe_ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else if rhs == 0.0 {
        f64::INFINITY
    } else {
        lhs / rhs
    }
}

#[allow(clippy::too_many_arguments)]
fn report(
    id: &str,
    params: Value,
    lhs: f64,
    rhs: f64,
    ratio: f64,
    constants: BTreeMap<String, f64>,
    fit: Option<Fit>,
    verdict: Verdict,
    env: Environment,
) -> VerificationReport {
    VerificationReport {
        id: id.to_string(),
        params,
        lhs: finite(lhs),
        rhs: finite(rhs),
        constants: constants.into_iter().map(|(k, v)| (k, finite(v))).collect(),
        ratio: finite(ratio),
        fit,
        verdict,
        env,
    }
}

/// Cell masses `h·w` of a measure on the grid of `f`.
fn cell_masses(d: &Domain, mu: &Measure) -> Vec<f64> {
    let h = d.h();
    match mu {
        Measure::Lebesgue => vec![h; d.n_cells()],
        Measure::Weighted(w) => w.samples().iter().map(|v| v * h).collect(),
    }
}

/// Distinct values of `|f|` in decreasing order with the mass of `{|f| >= value}`.
fn decreasing_levels(f: &GridFunction, mu: &Measure) -> Vec<(f64, f64)> {
    let masses = cell_masses(f.domain(), mu);
    let mut pairs: Vec<(f64, f64)> = f.samples().iter().map(|v| v.abs()).zip(masses).collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    let mut cum = 0.0;
    for (v, m) in pairs {
        cum += m;
        match out.last_mut() {
            Some(last) if last.0 == v => last.1 = cum,
            _ => out.push((v, cum)),
        }
    }
    out
}

/// `‖f‖_{L^{p,∞}(μ)} = sup_λ λ μ({|f| > λ})^{1/p}`, exact over the sample values.
pub fn lorentz_quasinorm(f: &GridFunction, p: f64, mu: &Measure) -> f64 {
    assert!(p > 0.0);
    decreasing_levels(f, mu)
        .iter()
        .filter(|(v, _)| *v > 0.0)
        .map(|&(v, m)| v * m.powf(1.0 / p))
        .fold(0.0, f64::max)
}

/// `‖f‖_{L^{q,1}(μ)} = ∫_0^∞ t^{1/q} f*(t) dt/t = q ∫_0^∞ μ({|f| > λ})^{1/q} dλ`.
pub fn lorentz_p1_norm(f: &GridFunction, q: f64, mu: &Measure) -> f64 {
    assert!(q >= 1.0);
    let levels = decreasing_levels(f, mu);
    let mut s = 0.0;
    for (k, &(v, m)) in levels.iter().enumerate() {
        let next = levels.get(k + 1).map(|x| x.0).unwrap_or(0.0);
        s += (v - next) * m.powf(1.0 / q);
    }
    q * s
}

/// `|∫ f g dμ| / ‖g‖_{L^{p',1}(μ)}` maximised over a bank of `g`: the level-set
/// indicators of `f` with its sign, and the supplied extra functions.
pub fn lorentz_pairing_sup(f: &GridFunction, p: f64, mu: &Measure, extra: &[GridFunction]) -> f64 {
    let pp = p / (p - 1.0);
    let masses = cell_masses(f.domain(), mu);
    let pair = |g: &GridFunction| {
        let norm = lorentz_p1_norm(g, pp, mu);
        if norm == 0.0 {
            return 0.0;
        }
        let s: f64 = f.samples().iter().zip(g.samples()).zip(&masses).map(|((a, b), m)| a * b * m).sum();
        s.abs() / norm
    };
    let mut best = extra.iter().map(pair).fold(0.0, f64::max);
    for (lambda, _) in decreasing_levels(f, mu) {
        if lambda <= 0.0 {
            continue;
        }
        let g = f.map(|v| if v.abs() >= lambda { v.signum() } else { 0.0 });
        best = best.max(pair(&g));
    }
    best
}

/// Fits `ln φ = ln c - α t^p` on the points with `φ ∈ [1e-4, 0.5]`. For fixed
/// `p` the problem is linear in `(ln c, α)`; `p` itself is found by a scan over
/// `[0.05, 3]` refined by golden-section search. `None` with fewer than five
/// usable points.
pub fn fit_exponent(t: &[f64], phi: &[f64]) -> Option<Fit> {
    assert_eq!(t.len(), phi.len());
    let (ts, ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(phi)
        .filter(|(tt, v)| **tt > 0.0 && **v >= 1e-4 && **v <= 0.5)
        .map(|(tt, v)| (*tt, v.ln()))
        .unzip();
    if ts.len() < 5 {
        return None;
    }
    let sse = |p: f64| -> Option<(f64, f64, f64)> {
        let x: Vec<f64> = ts.iter().map(|v| v.powf(p)).collect();
        let lf = linear_fit(&x, &ys)?;
        Some((1.0 - lf.r2, -lf.slope, lf.intercept))
    };
    let mut best_p = 1.0;
    let mut best = f64::INFINITY;
    for k in 0..=590 {
        let p = 0.05 + 0.005 * k as f64;
        if let Some((e, _, _)) = sse(p) {
            if e < best {
                best = e;
                best_p = p;
            }
        }
    }
    let (mut a, mut b) = ((best_p - 0.005).max(0.05), (best_p + 0.005).min(3.0));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let score = |p: f64| sse(p).map(|s| s.0).unwrap_or(f64::INFINITY);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (score(c), score(d));
    for _ in 0..60 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = score(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = score(d);
        }
    }
    let p = if fc.min(fd) < best { 0.5 * (a + b) } else { best_p };
    let (e, alpha, intercept) = sse(p)?;
    Some(Fit {
        c: intercept.exp(),
        alpha,
        p,
        r2: 1.0 - e,
    })
}

/// `t` values where decay curves are sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TGrid {
    /// `n` points log-spaced in `[lo, hi]·Π‖b_s‖_BMO`
    LogSpaced { lo: f64, hi: f64, n: usize },
    /// `n` thresholds whose super-level measures are log-spaced in `[1e-4, 0.5]`
    Quantile { n: usize },
    Explicit { t: Vec<f64> },
}

impl Default for TGrid {
    fn default() -> Self {
        TGrid::LogSpaced { lo: 0.5, hi: 50.0, n: 24 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCurve {
    pub t: Vec<f64>,
    pub measure: Vec<f64>,
    pub fit: Option<Fit>,
}

impl DecayCurve {
    /// Normalised measures of `{ratio > t}` over cells with mass `masses`.
    pub fn from_ratios(ratios: &[f64], masses: &[f64], total: f64, grid: &TGrid, scale: f64) -> Self {
        let t = match grid {
            TGrid::LogSpaced { lo, hi, n } => (0..*n)
                .map(|k| scale * lo * (hi / lo).powf(k as f64 / (*n - 1).max(1) as f64))
                .collect(),
            TGrid::Explicit { t } => t.clone(),
            TGrid::Quantile { n } => {
                let mut pairs: Vec<(f64, f64)> = ratios.iter().copied().zip(masses.iter().copied()).collect();
                pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
                let mut out: Vec<f64> = Vec::new();
                for k in 0..*n {
                    let target = 0.5 * (1e-4f64 / 0.5).powf(k as f64 / (*n - 1).max(1) as f64) * total;
                    let mut cum = 0.0;
                    for &(r, m) in &pairs {
                        cum += m;
                        if cum >= target {
                            if out.last() != Some(&r) {
                                out.push(r);
                            }
                            break;
                        }
                    }
                }
                out.sort_by(|a, b| a.total_cmp(b));
                out.dedup();
                out
            }
        };
        let measure: Vec<f64> = t
            .iter()
            .map(|&tt| {
                let m: f64 = ratios.iter().zip(masses).filter(|(r, _)| **r > tt).fold(0.0, |acc, (_, m)| acc + m);
                (m / total).min(1.0)
            })
            .collect();
        let fit = fit_exponent(&t, &measure);
        Self { t, measure, fit }
    }

    /// CSV with header `t,measure,model`; `model` is empty without a fit.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut wr = csv::Writer::from_writer(out);
        wr.write_record(["t", "measure", "model"])?;
        for (t, m) in self.t.iter().zip(&self.measure) {
            let model = self.fit.map(|f| f.model(*t).to_string()).unwrap_or_default();
            wr.write_record([t.to_string(), m.to_string(), model])?;
        }
        wr.flush()?;
        Ok(())
    }
}

/// The operator `T` of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OperatorSpec {
    Hilbert,
    Calderon { m: usize },
    /// Stein's square function; sublinear, so no symbols
    Stein { alpha: f64 },
}

impl OperatorSpec {
    pub fn arity(&self) -> usize {
        match self {
            OperatorSpec::Hilbert | OperatorSpec::Stein { .. } => 1,
            OperatorSpec::Calderon { m } => m + 1,
        }
    }

    pub fn name(&self) -> String {
        match self {
            OperatorSpec::Hilbert => "hilbert".into(),
            OperatorSpec::Calderon { m } => format!("calderon-{m}"),
            OperatorSpec::Stein { alpha } => format!("stein-{alpha}"),
        }
    }

    pub fn validate(&self, l: usize) -> Result<(), HarnessError> {
        match *self {
            OperatorSpec::Stein { alpha } if alpha <= 0.5 => {
                Err(OperatorError::Parameter(format!("Stein square function needs α > 1/2, got {alpha}")).into())
            }
            OperatorSpec::Stein { .. } if l > 0 => {
                Err(HarnessError::Parameter("the square function takes no symbols".into()))
            }
            OperatorSpec::Calderon { m } if m == 0 => Err(HarnessError::Parameter("Calderón order must be at least 1".into())),
            _ if l > self.arity() => Err(HarnessError::Parameter(format!(
                "{} symbols for an operator with {} inputs",
                l,
                self.arity()
            ))),
            _ => Ok(()),
        }
    }

    /// `T_b⃗(f⃗)` with symbol `s` on input slot `s`.
    pub fn apply(&self, bs: &[GridFunction], fs: &[GridFunction]) -> Result<GridFunction, HarnessError> {
        self.validate(bs.len())?;
        let op = match *self {
            OperatorSpec::Hilbert => KernelOperator::hilbert(),
            OperatorSpec::Calderon { m } => KernelOperator::calderon(m),
            OperatorSpec::Stein { alpha } => {
                if fs.len() != 1 {
                    return Err(OperatorError::Arity { expected: 1, got: fs.len() }.into());
                }
                return Ok(stein_square_function(&fs[0], alpha)?);
            }
        };
        let slots: Vec<usize> = (0..bs.len()).collect();
        Ok(iterated_commutator(&op, bs, &slots, fs)?)
    }
}

/// Inputs of an experiment with the commutator output and the `L log L`
/// maximal function computed once.
#[derive(Debug, Clone)]
pub struct CommutatorInput {
    pub op: OperatorSpec,
    pub bs: Vec<GridFunction>,
    pub fs: Vec<GridFunction>,
    pub output: GridFunction,
    pub llogl: GridFunction,
    pub bmo: Vec<f64>,
}

impl CommutatorInput {
    pub fn new(op: OperatorSpec, bs: Vec<GridFunction>, fs: Vec<GridFunction>) -> Result<Self, HarnessError> {
        let output = op.apply(&bs, &fs)?;
        let llogl = multilinear_maximal(&fs, MultiFlavor::LLogL, CubeScope::DyadicShifted);
        let bmo = bs.iter().map(bmo_norm).collect();
        Ok(Self { op, bs, fs, output, llogl, bmo })
    }

    pub fn l(&self) -> usize {
        self.bs.len()
    }

    pub fn m(&self) -> usize {
        self.fs.len()
    }

    pub fn domain(&self) -> &Domain {
        self.output.domain()
    }

    pub fn bmo_product(&self) -> f64 {
        self.bmo.iter().product()
    }

    /// The same experiment with `f⃗ ↦ c_f f⃗` and `b⃗ ↦ c_b b⃗`, recomputed from scratch.
    pub fn scaled(&self, c_f: f64, c_b: f64) -> Result<Self, HarnessError> {
        Self::new(
            self.op,
            self.bs.iter().map(|b| b.scale(c_b)).collect(),
            self.fs.iter().map(|f| f.scale(c_f)).collect(),
        )
    }

    fn params(&self) -> Value {
        json!({
            "operator": self.op.name(),
            "l": self.l(),
            "m": self.m(),
            "bmo": self.bmo,
        })
    }
}

fn weighted_integral(f: &GridFunction, w: &GridFunction, g: impl Fn(f64) -> f64) -> f64 {
    let h = f.domain().h();
    f.samples().iter().zip(w.samples()).map(|(v, ww)| g(*v) * ww).sum::<f64>() * h
}

/// `∫|T_b⃗f⃗|^p w` against `Π‖b_s‖^p [w]_{A∞}^{pl + max(2,p)} ∫(M_{L log L} f⃗)^p w`.
pub fn coifman_fefferman_experiment(input: &CommutatorInput, p: f64, w: &Weight, ctx: &Context) -> VerificationReport {
    assert!(p > 0.0);
    let l = input.l() as f64;
    let fw = w.ainfty_fw();
    let lhs = weighted_integral(&input.output, w.function(), |v| v.abs().powf(p));
    let maximal_side = weighted_integral(&input.llogl, w.function(), |v| v.powf(p));
    let weight_factor = fw.powf(p * l + p.max(2.0));
    let bmo_factor = input.bmo_product().powf(p);
    let rhs = bmo_factor * weight_factor * maximal_side;
    let ratio = safe_ratio(lhs, rhs);
    let mut constants = BTreeMap::new();
    constants.insert("ainfty_fw".into(), fw);
    constants.insert("bmo_factor".into(), bmo_factor);
    constants.insert("weight_factor".into(), weight_factor);
    constants.insert("maximal_integral".into(), maximal_side);
    constants.insert("slack".into(), ctx.slack);
    let mut params = input.params();
    params["p"] = json!(p);
    let verdict = if rhs == 0.0 && lhs == 0.0 {
        Verdict::Degenerate
    } else {
        Verdict::from_ratio(ratio, ctx.slack)
    };
    report("coifman-fefferman", params, lhs, rhs, ratio, constants, None, verdict, ctx.env(input.domain()))
}

/// `u = Π w_i^{1/m}`.
pub fn product_weight(ws: &[Weight]) -> Result<Weight, HarnessError> {
    let m = ws.len() as f64;
    let d = *ws[0].domain();
    let mut u = GridFunction::constant(d, 1.0);
    for w in ws {
        u = u.zip_with(w.function(), |a, b| a * b.powf(1.0 / m));
    }
    Ok(Weight::new(u)?)
}

/// Mixed weak-type bounds: the `A_t` form with `(K0, p0)`, the `A_p` form with
/// `(K̃0, p̃0)` at `p = t`, and the `v ≡ 1` specialisation. Right-hand sides
/// are assembled in log space; `ln_rhs` is recorded.
pub fn mixed_weak_experiment(
    input: &CommutatorInput,
    ws: &[Weight],
    v: &Weight,
    t: f64,
    ctx: &Context,
) -> Result<Vec<VerificationReport>, HarnessError> {
    if ws.len() != input.m() {
        return Err(HarnessError::Parameter(format!("{} weights for {} inputs", ws.len(), input.m())));
    }
    if t <= 1.0 {
        return Err(HarnessError::Parameter(format!("t must exceed 1, got {t}")));
    }
    let m = input.m() as f64;
    let l = input.l() as f64;
    let dc = &ctx.dimensional;
    let u = product_weight(ws)?;
    let a1_u = u.a1();
    let v_root = v.powf(1.0 / m);
    let at_v = v_root.ap(t)?;
    let mu = Measure::Weighted(u.function().zip_with(v_root.function(), |a, b| a * b));
    let over_v = |g: &GridFunction| g.zip_with(v.function(), |a, b| a.abs() / b);
    let lhs = lorentz_quasinorm(&over_v(&input.output), 1.0 / m, &mu);
    let max_side = lorentz_quasinorm(&over_v(&input.llogl), 1.0 / m, &mu);
    let ln_bmo: f64 = input.bmo.iter().map(|b| b.ln()).sum();
    let mut params = input.params();
    params["t"] = json!(t);
    let env = ctx.env(input.domain());
    let mut out = Vec::new();

    let build = |id: &str, ln_const: f64, lhs: f64, max_side: f64, mut constants: BTreeMap<String, f64>| {
        let ln_rhs = ln_const + ln_bmo + max_side.ln();
        let ratio = if lhs == 0.0 { 0.0 } else { (lhs.ln() - ln_rhs).exp() };
        constants.insert("ln_rhs".into(), ln_rhs);
        constants.insert("maximal_quasinorm".into(), max_side);
        constants.insert("a1_u".into(), a1_u);
        constants.insert("slack".into(), ctx.slack);
        let verdict = if lhs == 0.0 && max_side == 0.0 {
            Verdict::Degenerate
        } else {
            Verdict::from_ratio(ratio, 1.0 + ctx.slack)
        };
        report(id, params.clone(), lhs, ln_rhs.exp(), ratio, constants, None, verdict, env.clone())
    };

    let k = k0_p0(t, a1_u, at_v, input.m(), dc);
    let ln_const = (2.0 * l + 6.0 * m) * k.ln_k0 + (2.0 * l + 4.0 * m) * at_v.ln();
    let mut c = BTreeMap::new();
    c.insert("p0".into(), k.p0);
    c.insert("ln_k0".into(), k.ln_k0);
    c.insert("at_v".into(), at_v);
    out.push(build("mixed-weak", ln_const, lhs, max_side, c));

    let kt = k0_p0_ap(t, a1_u, at_v, dc);
    let ln_const = (2.0 * l + 6.0 * m) * kt.ln_k0 + (2.0 * l + 4.0 * m) * at_v.ln();
    let mut c = BTreeMap::new();
    c.insert("p0".into(), kt.p0);
    c.insert("ln_k0".into(), kt.ln_k0);
    c.insert("ap_v".into(), at_v);
    out.push(build("mixed-weak-ap", ln_const, lhs, max_side, c));

    let mu_u = Measure::Weighted(u.function().clone());
    let lhs1 = lorentz_quasinorm(&input.output, 1.0 / m, &mu_u);
    let max1 = lorentz_quasinorm(&input.llogl, 1.0 / m, &mu_u);
    let expo = 2f64.powi(dc.n as i32 + 7) * m * a1_u;
    let mut c = BTreeMap::new();
    c.insert("ln_constant".into(), expo * (2.0 * a1_u).ln());
    out.push(build("mixed-weak-unweighted-v", expo * (2.0 * a1_u).ln(), lhs1, max1, c));
    Ok(out)
}

/// Every `γ⃗ ∈ {1,2}^l` as a list of booleans, `true` for `γ_s = 1`.
fn gammas(l: usize) -> Vec<Vec<bool>> {
    (0..1usize << l).map(|mask| (0..l).map(|s| mask >> s & 1 == 1).collect()).collect()
}

/// `‖T_b⃗f⃗‖_{L^p(ν)}` against `‖b⃗‖*_BMO Π‖f_s‖_{L^{p_s}(M w_s)}` for arbitrary
/// weights, with the `A_∞` and weak-`A_∞` forms recorded as extra ratios.
pub fn fefferman_stein_experiment(
    input: &CommutatorInput,
    ps: &[f64],
    ws: &[Weight],
    ctx: &Context,
) -> Result<VerificationReport, HarnessError> {
    let m = input.m();
    if ps.len() != m || ws.len() != m {
        return Err(HarnessError::Parameter("one exponent and one weight per input".into()));
    }
    if ps.iter().any(|&q| q <= 1.0) {
        return Err(HarnessError::Parameter("exponents p_s must exceed 1".into()));
    }
    let p = 1.0 / ps.iter().map(|q| 1.0 / q).sum::<f64>();
    if p > 1.0 + 1e-12 {
        return Err(HarnessError::Parameter(format!("p = {p} exceeds 1")));
    }
    let d = *input.domain();
    let mut nu = GridFunction::constant(d, 1.0);
    for (w, ps_) in ws.iter().zip(ps) {
        nu = nu.zip_with(w.function(), |a, b| a * b.powf(p / ps_));
    }
    let lhs = weighted_integral(&input.output, &nu, |v| v.abs().powf(p)).powf(1.0 / p);
    let mut f_norms = 1.0;
    for ((f, w), &q) in input.fs.iter().zip(ws).zip(ps) {
        let mw = hardy_littlewood(w.function(), w.scope());
        f_norms *= weighted_integral(f, &mw, |v| v.abs().powf(q)).powf(1.0 / q);
    }
    let l = input.l();
    let weighted: Vec<f64> = (0..l).map(|s| weighted_bmo_norm(&input.bs[s], ws[s].function(), ps[s])).collect();
    let mut star = 0.0f64;
    let mut weak_sum = 0.0;
    for g in gammas(l) {
        let mut prod = 1.0;
        let mut weak = 1.0;
        for s in 0..l {
            if g[s] {
                prod *= weighted[s];
                weak *= ws[s].ainfty_weak();
            } else {
                prod *= input.bmo[s];
            }
        }
        star = star.max(prod);
        weak_sum += weak;
    }
    if l == 0 {
        star = 1.0;
    }
    let rhs = star * f_norms;
    let ratio = safe_ratio(lhs, rhs);
    let bmo = input.bmo_product();
    let fw_prod: f64 = ws[..l].iter().map(|w| w.ainfty_fw()).product();
    let mut c = BTreeMap::new();
    c.insert("p".into(), p);
    c.insert("bmo_star".into(), star);
    c.insert("f_norms".into(), f_norms);
    c.insert("ratio_ainfty".into(), safe_ratio(lhs, fw_prod * bmo * f_norms));
    c.insert("ratio_weak_ainfty".into(), safe_ratio(lhs, weak_sum * bmo * f_norms));
    c.insert("slack".into(), ctx.slack);
    let mut params = input.params();
    params["ps"] = json!(ps);
    let verdict = if lhs == 0.0 && rhs == 0.0 {
        Verdict::Degenerate
    } else {
        Verdict::from_ratio(ratio, ctx.slack)
    };
    Ok(report("fefferman-stein", params, lhs, rhs, ratio, c, None, verdict, ctx.env(&d)))
}

/// Which modular bound applies for `(i_φ, r, q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModularBranch {
    /// `r < i_φ < ∞`, `1 < q < i_φ / r`
    Small,
    /// `1 < i_φ <= r`, `1 < q < i_φ`
    Large,
}

pub fn modular_branch(i_phi: f64, r: f64, q: f64) -> Result<ModularBranch, HarnessError> {
    if r <= 1.0 {
        return Err(HarnessError::Parameter(format!("r = {r} must exceed 1")));
    }
    if r < i_phi && i_phi.is_finite() {
        if q > 1.0 && q < i_phi / r {
            Ok(ModularBranch::Small)
        } else {
            Err(HarnessError::Parameter(format!("need 1 < q < i_φ/r = {} (i_φ = {i_phi}), got q = {q}", i_phi / r)))
        }
    } else if i_phi > 1.0 && i_phi <= r {
        if q > 1.0 && q < i_phi {
            Ok(ModularBranch::Large)
        } else {
            Err(HarnessError::Parameter(format!("need 1 < q < i_φ = {i_phi}, got q = {q}")))
        }
    } else {
        Err(HarnessError::Parameter(format!("no modular bound for i_φ = {i_phi} and r = {r}")))
    }
}

/// `∫φ(|T_b⃗f⃗|) w` against the branch's right-hand side.
pub fn modular_experiment(
    input: &CommutatorInput,
    phi: &YoungFunction,
    q: f64,
    r: f64,
    w: &Weight,
    ctx: &Context,
) -> Result<VerificationReport, HarnessError> {
    if !phi.is_n_function() || !phi.is_submultiplicative() {
        return Err(HarnessError::Parameter(format!("{} is not a sub-multiplicative N-function", phi.name())));
    }
    let (i_phi, _) = dilation_indices(phi);
    let branch = modular_branch(i_phi, r, q)?;
    let c1 = phi
        .delta2_c1()
        .ok_or_else(|| HarnessError::Parameter(format!("{} has no doubling constant", phi.name())))?;
    let alpha = quasi_convex_exponent(phi);
    let l = input.l() as f64;
    let m = input.m() as f64;
    let fw = w.ainfty_fw();
    let aq = w.ap(q)?;
    let (expo, k) = match branch {
        ModularBranch::Small => ((l + 1.0) * (alpha * c1 + 1.0), aq.powf(1.0 / (q * r))),
        ModularBranch::Large => ((l + 1.0) * (alpha * c1 + 1.0) + 1.0 + m * c1, aq.powf(2.0 / q)),
    };
    let lhs = weighted_integral(&input.output, w.function(), |v| phi.eval(v.abs()));
    let mut prod = 1.0;
    for f in &input.fs {
        prod *= weighted_integral(f, w.function(), |v| phi.eval(k * v.abs()).powf(m));
    }
    let bmo = input.bmo_product().powf(1.0 + alpha * c1);
    let weight_factor = fw.powf(expo);
    let rhs = weight_factor * bmo * prod.powf(1.0 / m);
    let ratio = safe_ratio(lhs, rhs);
    let mut c = BTreeMap::new();
    c.insert("i_phi".into(), i_phi);
    c.insert("c1".into(), c1);
    c.insert("alpha".into(), alpha);
    c.insert("ainfty_fw".into(), fw);
    c.insert("aq".into(), aq);
    c.insert("weight_exponent".into(), expo);
    c.insert("slack".into(), ctx.slack);
    let mut params = input.params();
    params["phi"] = json!(phi.name());
    params["q"] = json!(q);
    params["r"] = json!(r);
    params["branch"] = json!(branch);
    let verdict = if lhs == 0.0 && rhs == 0.0 {
        Verdict::Degenerate
    } else {
        Verdict::from_ratio(ratio, ctx.slack)
    };
    Ok(report("modular", params, lhs, rhs, ratio, c, None, verdict, ctx.env(input.domain())))
}

/// Comparator of a local decay experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparator {
    /// `min{M^{(1,l)}_{L log L}(f⃗), M(f⃗_0)}` with `f⃗_0` built from a sparse family
    MixedMin,
    /// `M_{L log L}(f⃗)`
    Llogl,
    /// `M^{l+1} f` for a single input
    Iterated,
}

/// Measures `{x ∈ Q0 : |T_b⃗f⃗| > t·comparator}` (Lebesgue, or `w` normalised
/// by `w(2Q0)` clipped to the domain) and fits the decay exponent. The fit
/// holds when `p ≥ 1/(l+1) - 0.1` and holds with margin when `p ≥ 1/(l+1)`.
pub fn local_decay_experiment(
    input: &CommutatorInput,
    q0: &DyadicCube,
    grid: &TGrid,
    comparator: Comparator,
    w: Option<&Weight>,
    ctx: &Context,
) -> Result<(DecayCurve, VerificationReport), HarnessError> {
    let d = *input.domain();
    let n = d.n_cells();
    let span = q0.span(&d);
    if span.lo < 0 || span.hi > n as i64 {
        return Err(HarnessError::Parameter("Q0 must lie inside the domain".into()));
    }
    let l = input.l();
    let mut c = BTreeMap::new();
    let comp = match comparator {
        Comparator::Llogl => input.llogl.clone(),
        Comparator::Iterated => {
            if input.m() != 1 {
                return Err(HarnessError::Parameter("the iterated comparator takes one input".into()));
            }
            maximal(&input.fs[0], &MaximalVariant::new(MaximalKind::Iterated(l as u32 + 1)))
        }
        Comparator::MixedMin => {
            let first = multilinear_maximal(&input.fs, MultiFlavor::Mixed(l), CubeScope::DyadicShifted);
            let mut fam = principal_cubes(&input.output, q0, 2.0)?;
            let mut violations = 0usize;
            for b in &input.bs {
                let (next, cert) = oscillation_sparse(b, &fam)?;
                violations += cert.violations;
                fam = next;
            }
            c.insert("certificate_violations".into(), violations as f64);
            let mut f0 = input.fs.clone();
            for f in f0.iter_mut().take(l) {
                *f = sparse_operator(&fam, 1.0, f, 3)?;
            }
            let second = multilinear_maximal(&f0, MultiFlavor::Plain, CubeScope::DyadicShifted);
            let active = span
                .cells(n)
                .filter(|&i| first.samples()[i] <= second.samples()[i])
                .count();
            c.insert("first_branch_fraction".into(), active as f64 / span.len() as f64);
            if violations > 0 {
                return Ok(degenerate_decay(input, q0, c, "domination certificate failed", ctx));
            }
            first.zip_with(&second, f64::min)
        }
    };
    let cells: Vec<usize> = span.cells(n).collect();
    let zero = cells.iter().filter(|&&i| comp.samples()[i] <= 0.0).count();
    let t_out = input.output.samples();
    if zero > 0 {
        c.insert("comparator_zero_cells".into(), zero as f64);
        if cells.iter().any(|&i| comp.samples()[i] <= 0.0 && t_out[i] != 0.0) || zero == cells.len() {
            return Ok(degenerate_decay(input, q0, c, "comparator vanishes on part of Q0", ctx));
        }
    }
    let h = d.h();
    let (masses, total) = match w {
        None => (vec![h; cells.len()], span.len() as f64 * h),
        Some(w) => {
            let qi = Interval::new(d.edge(span.lo), d.edge(span.hi));
            let two = qi.dilate(2.0).intersect(&d.as_interval());
            let ws = w.function().samples();
            (cells.iter().map(|&i| ws[i] * h).collect(), w.function().integral_over(&two))
        }
    };
    let ratios: Vec<f64> = cells
        .iter()
        .map(|&i| if comp.samples()[i] > 0.0 { t_out[i].abs() / comp.samples()[i] } else { 0.0 })
        .collect();
    let scale = input.bmo_product();
    let curve = DecayCurve::from_ratios(&ratios, &masses, total, grid, if l == 0 { 1.0 } else { scale });
    let target = 1.0 / (l as f64 + 1.0);
    c.insert("target_p".into(), target);
    if let Some(w) = w {
        c.insert("ainfty_weak".into(), w.ainfty_weak());
    }
    let mut params = input.params();
    params["comparator"] = json!(comparator);
    params["q0"] = json!([q0.level, q0.index[0]]);
    params["t_grid"] = json!(grid);
    params["weighted"] = json!(w.is_some());
    let (lhs, verdict) = match curve.fit {
        None => (0.0, Verdict::Degenerate),
        Some(f) if f.p >= target => (f.p, Verdict::HoldsWithMargin),
        Some(f) if f.p >= target - 0.1 => (f.p, Verdict::Holds),
        Some(f) => (f.p, Verdict::Violated),
    };
    let rep = report(
        "local-decay",
        params,
        lhs,
        target,
        if curve.fit.is_some() { safe_ratio(target, lhs) } else { 0.0 },
        c,
        curve.fit,
        verdict,
        ctx.env(&d),
    );
    Ok((curve, rep))
}

fn degenerate_decay(
    input: &CommutatorInput,
    q0: &DyadicCube,
    constants: BTreeMap<String, f64>,
    why: &str,
    ctx: &Context,
) -> (DecayCurve, VerificationReport) {
    let mut params = input.params();
    params["q0"] = json!([q0.level, q0.index[0]]);
    params["reason"] = json!(why);
    let curve = DecayCurve {
        t: Vec::new(),
        measure: Vec::new(),
        fit: None,
    };
    let rep = report("local-decay", params, 0.0, 0.0, 0.0, constants, None, Verdict::Degenerate, ctx.env(input.domain()));
    (curve, rep)
}

/// Symbol of the sharpness scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SharpnessSymbol {
    /// `log|x|`, unbounded; decay exponent 1/2 expected
    Log,
    /// `sin(2πx)`, bounded contrast case
    Sine,
}

/// `|{x ∈ (0,1) : |[b, H]χ_{(0,1)}(x)| > t}|` on the unit grid with comparator
/// `M²χ_{(0,1)} ≡ 1`. Besides the free fit, a fit with `p` fixed at 1/2 and the
/// lower-envelope constant `c0 = max (ln φ(t))²/t` are recorded.
pub fn sharpness_experiment(l: u32, symbol: SharpnessSymbol, ctx: &Context) -> Result<(DecayCurve, VerificationReport), HarnessError> {
    let d = Domain::unit(l);
    let b = match symbol {
        SharpnessSymbol::Log => GridFunction::from_fn(d, |x| x.abs().ln()),
        SharpnessSymbol::Sine => GridFunction::from_fn(d, |x| (2.0 * std::f64::consts::PI * x).sin()),
    };
    let f = GridFunction::constant(d, 1.0);
    let input = CommutatorInput::new(OperatorSpec::Hilbert, vec![b], vec![f])?;
    let grid = TGrid::Quantile { n: 24 };
    let (curve, mut rep) = local_decay_experiment(&input, &DyadicCube::base1(0, 0), &grid, Comparator::Iterated, None, ctx)?;
    rep.id = "sharpness".into();
    rep.params["symbol"] = json!(symbol);
    let usable: Vec<(f64, f64)> = curve
        .t
        .iter()
        .zip(&curve.measure)
        .filter(|(t, m)| **t > 0.0 && **m >= 1e-4 && **m <= 0.5)
        .map(|(t, m)| (*t, *m))
        .collect();
    let c0 = usable.iter().map(|(t, m)| m.ln().powi(2) / t).fold(0.0, f64::max);
    rep.constants.insert("lower_envelope_c0".into(), c0);
    let (x, y): (Vec<f64>, Vec<f64>) = usable.iter().map(|(t, m)| (t.sqrt(), m.ln())).unzip();
    if let Some(lf) = linear_fit(&x, &y) {
        rep.constants.insert("half_fit_alpha".into(), -lf.slope);
        rep.constants.insert("half_fit_r2".into(), lf.r2);
    }
    rep.verdict = match (symbol, curve.fit) {
        (_, None) => Verdict::Degenerate,
        (SharpnessSymbol::Log, Some(f)) if (0.4..=0.65).contains(&f.p) && f.r2 >= 0.9 => Verdict::Holds,
        (SharpnessSymbol::Sine, Some(f)) if f.p >= 0.8 => Verdict::Holds,
        _ => Verdict::Violated,
    };
    Ok((curve, rep))
}

/// Rubio de Francia iteration with the formula constant `K0`, checked for
/// `h ≤ Rh`, `S_u(Rh) ≤ 2K0·Rh`, `[Rh·u]_{A_1} ≤ 2K0` and
/// `‖Rh‖_{L^{r',1}(uv^{1/m})} ≤ 2‖h‖_{L^{r',1}(uv^{1/m})}` with
/// `1/r' = ½ min{1/(2^{n+3}K0), 1/(2p0)}`.
pub fn rubio_de_francia_experiment(
    h: &GridFunction,
    u: &Weight,
    v: &Weight,
    m: usize,
    t: f64,
    ctx: &Context,
) -> Result<VerificationReport, HarnessError> {
    let dc = &ctx.dimensional;
    let v_root = v.powf(1.0 / m as f64);
    let k = k0_p0(t, u.a1(), v_root.ap(t)?, m, dc);
    let eps = 0.5 * (1.0 / (2f64.powi(dc.n as i32 + 3) * k.k0)).min(1.0 / (2.0 * k.p0));
    let r_prime = 1.0 / eps;
    let mu = Measure::Weighted(u.function().zip_with(v_root.function(), |a, b| a * b));
    let h_norm = lorentz_p1_norm(h, r_prime, &mu);
    let su_norm = {
        let s = lorentz_p1_norm(&s_u(h, u), r_prime, &mu);
        if h_norm > 0.0 { s / h_norm } else { 0.0 }
    };
    let ratio_per_term = (su_norm.max(u.a1()) / (2.0 * k.k0)).min(0.5);
    let j = ((1e-8f64).ln() / ratio_per_term.ln()).ceil().max(1.0) as usize;
    let rd = rubio_de_francia(h, u, k.k0, j)?;
    let two_k0 = 2.0 * k.k0;
    let tol = 1.0 + 1e-6;
    let below = h.abs().samples().iter().zip(rd.rh.samples()).filter(|(a, b)| a > b).count();
    let su = s_u(&rd.rh, u);
    let dom = su
        .samples()
        .iter()
        .zip(rd.rh.samples())
        .map(|(s, r)| if *r > 0.0 { s / (two_k0 * r) } else if *s > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(0.0, f64::max);
    let rh_u = rd.rh.zip_with(u.function(), |a, b| a * b);
    let a1_ratio = if rd.rh.max_abs() > 0.0 {
        Weight::new(rh_u)?.a1() / two_k0
    } else {
        0.0
    };
    let rh_norm = lorentz_p1_norm(&rd.rh, r_prime, &mu);
    let lorentz_ratio = safe_ratio(rh_norm, 2.0 * h_norm);
    let mut c = BTreeMap::new();
    c.insert("k0".into(), k.k0);
    c.insert("p0".into(), k.p0);
    c.insert("r_prime".into(), r_prime);
    c.insert("terms".into(), rd.terms as f64);
    c.insert("tail".into(), rd.tail);
    c.insert("su_lorentz_norm".into(), su_norm);
    c.insert("cells_below_h".into(), below as f64);
    c.insert("domination_ratio".into(), dom);
    c.insert("a1_ratio".into(), a1_ratio);
    c.insert("lorentz_ratio".into(), lorentz_ratio);
    let ok = below == 0 && dom <= tol && a1_ratio <= tol && lorentz_ratio <= 1.0 + 1e-12;
    let worst = dom.max(a1_ratio).max(lorentz_ratio);
    let verdict = if ok { Verdict::HoldsWithMargin } else { Verdict::Violated };
    let params = json!({ "m": m, "t": t });
    Ok(report("rubio-de-francia", params, rh_norm, 2.0 * h_norm, worst, c, None, verdict, ctx.env(h.domain())))
}

/// Writes reports as a pretty-printed JSON array.
pub fn write_reports_json<W: Write>(reports: &[VerificationReport], out: W) -> serde_json::Result<()> {
    serde_json::to_writer_pretty(out, reports)
}

/// Test-function bank for configurations and suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant { c: f64 },
    Indicator { lo: f64, hi: f64 },
    /// `exp(-1/(1-s²))` with `s = (x - center)/radius`, zero outside
    Bump { center: f64, radius: f64 },
    /// sum of `count` bumps with random centres and radii inside `(0, 1)`
    RandomBumps { count: usize, seed: u64 },
    /// random dyadic step function on `2^k` blocks of `(0, 1)`-sized domain
    RandomStep { k: u32, seed: u64 },
    /// `cos(2π·freq·x)`
    Wave { freq: f64 },
    /// `sin(2π·freq·x)`
    Sine { freq: f64 },
    /// `log|x - x0|`
    Log { x0: f64 },
}

fn bump(x: f64, center: f64, radius: f64) -> f64 {
    let s = (x - center) / radius;
    if s.abs() < 1.0 { (-1.0 / (1.0 - s * s)).exp() } else { 0.0 }
}

impl FunctionSpec {
    pub fn sample(&self, d: Domain) -> GridFunction {
        use rand::{Rng, SeedableRng};
        match *self {
            FunctionSpec::Constant { c } => GridFunction::constant(d, c),
            FunctionSpec::Indicator { lo, hi } => GridFunction::from_fn(d, |x| if x >= lo && x < hi { 1.0 } else { 0.0 }),
            FunctionSpec::Bump { center, radius } => GridFunction::from_fn(d, |x| bump(x, center, radius)),
            FunctionSpec::RandomBumps { count, seed } => {
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
                let bumps: Vec<(f64, f64, f64)> = (0..count)
                    .map(|_| {
                        let r = rng.gen_range(0.05..0.3);
                        (rng.gen_range(r..1.0 - r), r, rng.gen_range(0.5..2.0))
                    })
                    .collect();
                GridFunction::from_fn(d, |x| bumps.iter().map(|&(c, r, a)| a * bump(x, c, r)).sum())
            }
            FunctionSpec::RandomStep { k, seed } => crate::sparse::random_dyadic_step(d, k, seed),
            FunctionSpec::Wave { freq } => GridFunction::from_fn(d, |x| (2.0 * std::f64::consts::PI * freq * x).cos()),
            FunctionSpec::Sine { freq } => GridFunction::from_fn(d, |x| (2.0 * std::f64::consts::PI * freq * x).sin()),
            FunctionSpec::Log { x0 } => GridFunction::from_fn(d, |x| (x - x0).abs().ln()),
        }
    }
}
