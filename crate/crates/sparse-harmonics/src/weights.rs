//! Muckenhoupt-type weight constants over the cube family, the reverse Hölder
//! check, the operator `S_u`, the Rubio de Francia iteration and the explicit
//! constants `p0`, `K0` of the mixed weak-type estimate.
//!
//! Suprema run over the cubes of the base lattice and the shifted lattices that
//! lie inside the domain. Conditions involving `2Q` use only cubes with `2Q`
//! inside the domain, since a weight carries no information outside it.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{CubeScope, CubeSums, Domain, EscapePolicy, FamilyCube, GridFunction, Interval, family_cubes};
use crate::maximal::hardy_littlewood;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error("weight must be positive and finite, found {value} at cell {cell}")]
    NotPositive { cell: usize, value: f64 },
    #[error("p must be at least 1, got {0}")]
    Exponent(f64),
    #[error("epsilon {eps} outside (0, {cap})")]
    Epsilon { eps: f64, cap: f64 },
    #[error("Rubio de Francia iteration does not contract: effective norm {norm} >= 2 K0 = {two_k0}")]
    Divergent { norm: f64, two_k0: f64 },
    #[error("unknown weight spec: {0}")]
    Spec(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DimensionalConstants {
    pub n: usize,
    pub tau_n: f64,
    pub big_c_n: f64,
    pub small_c_n: f64,
}

impl DimensionalConstants {
    pub fn for_dim(n: usize) -> Self {
        Self {
            n,
            tau_n: 2f64.powi(n as i32),
            big_c_n: 1.0,
            small_c_n: 1.0,
        }
    }
}

impl Default for DimensionalConstants {
    fn default() -> Self {
        Self::for_dim(1)
    }
}

const LN_CLAMP: f64 = 690.7755278982137; // ln(1e300)

fn family(l: u32, scope: CubeScope) -> Vec<FamilyCube> {
    family_cubes(l, scope, EscapePolicy::Interior)
}

/// Pyramid of cell minima, mirroring [`CubeSums`].
struct CubeMins {
    levels: Vec<Vec<f64>>,
}

impl CubeMins {
    fn new(values: &[f64]) -> Self {
        let l = values.len().trailing_zeros() as usize;
        let mut levels = vec![Vec::new(); l + 1];
        levels[l] = values.to_vec();
        for k in (0..l).rev() {
            levels[k] = levels[k + 1].chunks_exact(2).map(|p| p[0].min(p[1])).collect();
        }
        Self { levels }
    }

    fn min(&self, q: &FamilyCube) -> f64 {
        let row = &self.levels[q.level as usize];
        let get = |i: i64| {
            if i < 0 || i >= row.len() as i64 {
                f64::INFINITY
            } else {
                row[i as usize]
            }
        };
        if q.is_shifted() {
            get(q.index - 1).min(get(q.index)).min(get(q.index + 1))
        } else {
            get(q.index)
        }
    }
}

fn check_positive(w: &GridFunction) -> Result<(), WeightError> {
    match w.samples().iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(cell) => Err(WeightError::NotPositive {
            cell,
            value: w.samples()[cell],
        }),
        None => Ok(()),
    }
}

/// `[w]_{A_p}` over the interior cube family; `p = 1` gives `[w]_{A_1}`.
pub fn ap_constant_of(w: &GridFunction, p: f64, scope: CubeScope) -> Result<f64, WeightError> {
    check_positive(w)?;
    if p < 1.0 {
        return Err(WeightError::Exponent(p));
    }
    let l = w.domain().resolution_log2;
    let cubes = family(l, scope);
    let ws: Vec<f64> = w.samples().iter().map(|&v| v.clamp(1e-300, 1e300)).collect();
    let wsum = CubeSums::new(&ws);
    if p == 1.0 {
        let mins = CubeMins::new(&ws);
        return Ok(cubes
            .par_iter()
            .map(|q| wsum.sum(q) / q.span.len() as f64 / mins.min(q))
            .reduce(|| 0.0, f64::max));
    }
    let pp = p / (p - 1.0);
    let logs: Vec<f64> = ws
        .iter()
        .map(|&v| ((1.0 - pp) * v.ln()).clamp(-LN_CLAMP, LN_CLAMP))
        .collect();
    let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sig: Vec<f64> = logs.iter().map(|e| (e - shift).exp()).collect();
    let ssum = CubeSums::new(&sig);
    Ok(cubes
        .par_iter()
        .map(|q| {
            let len = q.span.len() as f64;
            let ln_a = (wsum.sum(q) / len).ln() + (p - 1.0) * ((ssum.sum(q) / len).ln() + shift);
            ln_a.exp()
        })
        .reduce(|| 0.0, f64::max))
}

#[derive(Debug, Clone)]
pub struct MultiWeight {
    pub components: Vec<GridFunction>,
    pub exponents: Vec<f64>,
}

impl MultiWeight {
    pub fn new(components: Vec<GridFunction>, exponents: Vec<f64>) -> Result<Self, WeightError> {
        assert_eq!(components.len(), exponents.len());
        for w in &components {
            check_positive(w)?;
        }
        if let Some(&p) = exponents.iter().find(|&&p| p < 1.0) {
            return Err(WeightError::Exponent(p));
        }
        Ok(Self { components, exponents })
    }

    /// `1/p = Σ 1/p_j`
    pub fn p(&self) -> f64 {
        1.0 / self.exponents.iter().map(|p| 1.0 / p).sum::<f64>()
    }

    /// `ν = Π w_j^{p/p_j}`
    pub fn nu(&self) -> GridFunction {
        let p = self.p();
        let mut out = GridFunction::constant(*self.components[0].domain(), 1.0);
        for (w, pj) in self.components.iter().zip(&self.exponents) {
            out = out.zip_with(w, |a, b| a * b.powf(p / pj));
        }
        out
    }
}

/// `[w⃗]_{A_p⃗} = sup ⟨ν⟩ Π ⟨w_j^{1-p_j'}⟩^{p/p_j'}`, with `(inf w_j)^{-p}` for `p_j = 1`.
pub fn multi_ap_constant(mw: &MultiWeight, scope: CubeScope) -> f64 {
    let p = mw.p();
    let l = mw.components[0].domain().resolution_log2;
    let cubes = family(l, scope);
    let nu = CubeSums::new(mw.nu().samples());
    enum Factor {
        Mean { sums: CubeSums, shift: f64, expo: f64 },
        Inf(CubeMins),
    }
    let factors: Vec<Factor> = mw
        .components
        .iter()
        .zip(&mw.exponents)
        .map(|(w, &pj)| {
            if pj == 1.0 {
                Factor::Inf(CubeMins::new(w.samples()))
            } else {
                let ppj = pj / (pj - 1.0);
                let logs: Vec<f64> = w
                    .samples()
                    .iter()
                    .map(|&v| ((1.0 - ppj) * v.ln()).clamp(-LN_CLAMP, LN_CLAMP))
                    .collect();
                let shift = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let vals: Vec<f64> = logs.iter().map(|e| (e - shift).exp()).collect();
                Factor::Mean {
                    sums: CubeSums::new(&vals),
                    shift,
                    expo: p / ppj,
                }
            }
        })
        .collect();
    cubes
        .par_iter()
        .map(|q| {
            let len = q.span.len() as f64;
            let mut ln_v = (nu.sum(q) / len).ln();
            for f in &factors {
                ln_v += match f {
                    Factor::Mean { sums, shift, expo } => expo * ((sums.sum(q) / len).ln() + shift),
                    Factor::Inf(m) => -p * m.min(q).ln(),
                };
            }
            ln_v.exp()
        })
        .reduce(|| 0.0, f64::max)
}

/// `∫_Q M(w χ_Q)` in cell units, with the inner supremum over `cubes`.
fn local_maximal_integral(sums: &CubeSums, q: &FamilyCube, by_level: &[Vec<FamilyCube>]) -> f64 {
    let (a, b) = (q.span.lo, q.span.hi);
    let mut best = vec![0.0f64; (b - a) as usize];
    for level in by_level.iter() {
        for r in level {
            if r.span.hi <= a || r.span.lo >= b {
                continue;
            }
            if r.span.contains_span(&q.span) && r.span != q.span {
                // dominated by Q itself
                continue;
            }
            let lo = a.max(r.span.lo);
            let hi = b.min(r.span.hi);
            let v = sums.range(lo, hi) / r.span.len() as f64;
            for c in lo..hi {
                let slot = &mut best[(c - a) as usize];
                if v > *slot {
                    *slot = v;
                }
            }
        }
    }
    best.iter().sum()
}

/// Cubes grouped by level for intersection scans.
fn cubes_by_level(cubes: &[FamilyCube], l: u32) -> Vec<Vec<FamilyCube>> {
    let mut out = vec![Vec::new(); l as usize + 1];
    for c in cubes {
        out[c.level as usize].push(*c);
    }
    out
}

/// Exact `w(rQ)` with partial cells; `None` when `rQ` leaves the domain.
fn dilated_mass(w: &GridFunction, q: &FamilyCube, r: f64) -> Option<f64> {
    let d = w.domain();
    let iv = Interval::new(d.edge(q.span.lo), d.edge(q.span.hi)).dilate(r);
    if d.escapes(&iv) {
        None
    } else {
        Some(w.integral_over(&iv) / d.h())
    }
}

/// `(Fujii–Wilson, weak)` A_∞ constants.
pub fn ainfty_constants_of(w: &GridFunction, scope: CubeScope) -> Result<(f64, f64), WeightError> {
    check_positive(w)?;
    let l = w.domain().resolution_log2;
    let cubes = family(l, scope);
    let sums = CubeSums::new(w.samples());
    let by_level = cubes_by_level(&cubes, l);
    let per_cube: Vec<(f64, f64)> = cubes
        .par_iter()
        .map(|q| {
            let integral = local_maximal_integral(&sums, q, &by_level);
            let fw = integral / sums.sum(q);
            let weak = dilated_mass(w, q, 2.0).map(|m| integral / m).unwrap_or(0.0);
            (fw, weak)
        })
        .collect();
    Ok(per_cube
        .iter()
        .fold((0.0f64, 0.0f64), |(a, b), &(x, y)| (a.max(x), b.max(y))))
}

/// A positive weight with lazily computed, write-once constants.
#[derive(Debug)]
pub struct Weight {
    w: GridFunction,
    scope: CubeScope,
    a1: OnceLock<f64>,
    ainfty: OnceLock<(f64, f64)>,
    ap: Mutex<HashMap<u64, f64>>,
}

impl Clone for Weight {
    fn clone(&self) -> Self {
        Self {
            w: self.w.clone(),
            scope: self.scope,
            a1: self.a1.clone(),
            ainfty: self.ainfty.clone(),
            ap: Mutex::new(self.ap.lock().expect("cache").clone()),
        }
    }
}

impl Weight {
    pub fn new(w: GridFunction) -> Result<Self, WeightError> {
        check_positive(&w)?;
        Ok(Self {
            w,
            scope: CubeScope::default(),
            a1: OnceLock::new(),
            ainfty: OnceLock::new(),
            ap: Mutex::new(HashMap::new()),
        })
    }

    pub fn with_scope(mut self, scope: CubeScope) -> Self {
        self.scope = scope;
        self
    }

    pub fn function(&self) -> &GridFunction {
        &self.w
    }

    pub fn domain(&self) -> &Domain {
        self.w.domain()
    }

    pub fn scope(&self) -> CubeScope {
        self.scope
    }

    pub fn a1(&self) -> f64 {
        *self
            .a1
            .get_or_init(|| ap_constant_of(&self.w, 1.0, self.scope).expect("validated weight"))
    }

    pub fn ap(&self, p: f64) -> Result<f64, WeightError> {
        if p == 1.0 {
            return Ok(self.a1());
        }
        let key = p.to_bits();
        if let Some(v) = self.ap.lock().expect("cache").get(&key) {
            return Ok(*v);
        }
        let v = ap_constant_of(&self.w, p, self.scope)?;
        self.ap.lock().expect("cache").insert(key, v);
        Ok(v)
    }

    /// `(Fujii–Wilson, weak)` A_∞ constants.
    pub fn ainfty(&self) -> (f64, f64) {
        *self
            .ainfty
            .get_or_init(|| ainfty_constants_of(&self.w, self.scope).expect("validated weight"))
    }

    pub fn ainfty_fw(&self) -> f64 {
        self.ainfty().0
    }

    pub fn ainfty_weak(&self) -> f64 {
        self.ainfty().1
    }

    pub fn powf(&self, e: f64) -> Weight {
        Weight::new(self.w.map(|v| v.powf(e))).expect("positive").with_scope(self.scope)
    }

    pub fn mul(&self, other: &Weight) -> Weight {
        Weight::new(self.w.zip_with(&other.w, |a, b| a * b))
            .expect("positive")
            .with_scope(self.scope)
    }
}

pub fn ap_constant(w: &Weight, p: f64) -> Result<f64, WeightError> {
    w.ap(p)
}

pub fn ainfty_constants(w: &Weight) -> (f64, f64) {
    w.ainfty()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReverseHolderReport {
    pub r: f64,
    pub cubes_checked: usize,
    pub violations: usize,
    pub worst_ratio: f64,
    pub worst_cube: Option<(u32, u32, i64)>,
}

/// `(<w^r>_Q)^{1/r} <= (2/|2Q|) ∫_{2Q} w` with `r = 1 + 1/(τ_n [w]^weak)`.
pub fn reverse_holder_check(w: &Weight, dc: &DimensionalConstants) -> ReverseHolderReport {
    let weak = w.ainfty_weak();
    let r = 1.0 + 1.0 / (dc.tau_n * weak);
    let f = w.function();
    let l = f.domain().resolution_log2;
    let wr: Vec<f64> = f.samples().iter().map(|v| v.powf(r)).collect();
    let sums = CubeSums::new(&wr);
    let cubes = family(l, w.scope());
    let rows: Vec<Option<(f64, FamilyCube)>> = cubes
        .par_iter()
        .map(|q| {
            let mass2 = dilated_mass(f, q, 2.0)?;
            let lhs = (sums.sum(q) / q.span.len() as f64).powf(1.0 / r);
            let rhs = 2.0 * mass2 / (2.0 * q.span.len() as f64);
            Some((lhs / rhs, *q))
        })
        .collect();
    let mut rep = ReverseHolderReport {
        r,
        cubes_checked: 0,
        violations: 0,
        worst_ratio: 0.0,
        worst_cube: None,
    };
    for (ratio, q) in rows.into_iter().flatten() {
        rep.cubes_checked += 1;
        if ratio > 1.0 {
            rep.violations += 1;
        }
        if ratio > rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.worst_cube = Some((q.lattice_id, q.level, q.index));
        }
    }
    rep
}

/// `S_u f = M(f u) / u`.
pub fn s_u(f: &GridFunction, u: &Weight) -> GridFunction {
    let fu = f.zip_with(u.function(), |a, b| a * b);
    hardy_littlewood(&fu, u.scope()).zip_with(u.function(), |m, w| m / w)
}

#[derive(Debug, Clone)]
pub struct RubioDeFrancia {
    pub rh: GridFunction,
    /// largest pointwise ratio of the first omitted term to `Rh`
    pub tail: f64,
    /// largest observed ratio `||S_u^{j+1} h||_∞ / ||S_u^j h||_∞`
    pub effective_norm: f64,
    pub terms: usize,
}

/// `Rh = Σ_{j=0}^{J} S_u^j h / (2 K0)^j`.
pub fn rubio_de_francia(h: &GridFunction, u: &Weight, k0: f64, j_max: usize) -> Result<RubioDeFrancia, WeightError> {
    let two_k0 = 2.0 * k0;
    let mut term = h.abs();
    let mut rh = term.clone();
    let mut eff = 0.0f64;
    let mut terms = 1;
    let mut next = s_u(&term, u).scale(1.0 / two_k0);
    for _ in 0..j_max {
        let (a, b) = (term.max_abs(), next.max_abs() * two_k0);
        if a > 0.0 {
            eff = eff.max(b / a);
        }
        if eff >= two_k0 {
            return Err(WeightError::Divergent { norm: eff, two_k0 });
        }
        rh = rh.zip_with(&next, |x, y| x + y);
        term = next;
        terms += 1;
        next = s_u(&term, u).scale(1.0 / two_k0);
        if next.max_abs() == 0.0 {
            break;
        }
    }
    let tail = rh
        .samples()
        .iter()
        .zip(next.samples())
        .map(|(r, t)| if *r > 0.0 { t / r } else { 0.0 })
        .fold(0.0, f64::max);
    Ok(RubioDeFrancia {
        rh,
        tail,
        effective_norm: eff,
        terms,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MixedConstants {
    pub p0: f64,
    pub p0_prime: f64,
    pub k0: f64,
    pub ln_k0: f64,
}

fn ln_add(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    if lo == f64::NEG_INFINITY {
        hi
    } else {
        hi + (lo - hi).exp().ln_1p()
    }
}

/// `p0 = 2^{n+3}(t-1)[u]_{A_1} + 1` and
/// `K0 = 4 C_n p0 p0' ([u]_{A_1} + 2^{p0-1} C_n^t [v^{1/m}]_{A_t}^2 [u]_{A_1}^{p0-1}) + 1`.
pub fn k0_p0(t: f64, a1_u: f64, at_v: f64, _m: usize, dc: &DimensionalConstants) -> MixedConstants {
    assert!(t > 1.0 && a1_u >= 1.0 && at_v >= 1.0);
    let n = dc.n as i32;
    let p0 = 2f64.powi(n + 3) * (t - 1.0) * a1_u + 1.0;
    let p0p = p0 / (p0 - 1.0);
    let ln_inner = ln_add(
        a1_u.ln(),
        (p0 - 1.0) * 2f64.ln() + t * dc.big_c_n.ln() + 2.0 * at_v.ln() + (p0 - 1.0) * a1_u.ln(),
    );
    let ln_main = (4.0 * dc.big_c_n * p0 * p0p).ln() + ln_inner;
    let ln_k0 = ln_add(ln_main, 0.0);
    MixedConstants {
        p0,
        p0_prime: p0p,
        k0: ln_k0.exp(),
        ln_k0,
    }
}

/// The variant for `v ∈ A_p`: `p̃0 = 2^{n+3}(p-1)[u]_{A_1} + 1`,
/// `K̃0 = C_n p̃0 p̃0' 2^{p̃0-1} [v^{1/m}]_{A_p}^2 [u]_{A_1}^{p̃0}`.
pub fn k0_p0_ap(p: f64, a1_u: f64, ap_v: f64, dc: &DimensionalConstants) -> MixedConstants {
    assert!(p > 1.0 && a1_u >= 1.0 && ap_v >= 1.0);
    let n = dc.n as i32;
    let p0 = 2f64.powi(n + 3) * (p - 1.0) * a1_u + 1.0;
    let p0p = p0 / (p0 - 1.0);
    let ln_k0 = (dc.big_c_n * p0 * p0p).ln() + (p0 - 1.0) * 2f64.ln() + 2.0 * ap_v.ln() + p0 * a1_u.ln();
    MixedConstants {
        p0,
        p0_prime: p0p,
        k0: ln_k0.exp(),
        ln_k0,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lemma51Report {
    pub eps: f64,
    pub cap: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `[u v^ε]_{A_p} <= 2 [u]_{A_1} [v]_{A_p}^ε` for admissible `ε`.
pub fn lemma51_check(u: &Weight, v: &Weight, p: f64, eps: f64, dc: &DimensionalConstants) -> Result<Lemma51Report, WeightError> {
    let a1 = u.a1();
    let cap = 1.0 / (2f64.powi(dc.n as i32 + 2) * a1);
    if !(eps > 0.0 && eps < cap) {
        return Err(WeightError::Epsilon { eps, cap });
    }
    let prod = u.mul(&v.powf(eps));
    let lhs = prod.ap(p)?;
    let rhs = 2.0 * a1 * v.ap(p)?.powf(eps);
    Ok(Lemma51Report {
        eps,
        cap,
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + 1e-12),
    })
}

/// Named weight generators used by fixtures and configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum WeightSpec {
    One,
    /// `|x - x0|^a`, sampled at cell centres
    Power { a: f64, x0: f64 },
    /// `e^{c x}`
    Exp { c: f64 },
    /// piecewise constant on equal blocks
    Step { values: Vec<f64> },
    /// `1 + height` on the single cell containing `x0`, `1` elsewhere
    Spike { height: f64, x0: f64 },
    /// `log(e + 1/|x - x0|)`
    Log { x0: f64 },
}

impl WeightSpec {
    pub fn name(&self) -> String {
        match self {
            WeightSpec::One => "one".into(),
            WeightSpec::Power { a, x0 } => format!("|x-{x0}|^{a}"),
            WeightSpec::Exp { c } => format!("exp({c}x)"),
            WeightSpec::Step { values } => format!(
                "step[{}]",
                values.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(";")
            ),
            WeightSpec::Spike { height, x0 } => format!("spike({height}@{x0})"),
            WeightSpec::Log { x0 } => format!("log(e+1/|x-{x0}|)"),
        }
    }

    pub fn sample(&self, d: Domain) -> Result<GridFunction, WeightError> {
        let n = d.n_cells();
        let g = match self {
            WeightSpec::One => GridFunction::constant(d, 1.0),
            WeightSpec::Power { a, x0 } => GridFunction::from_fn(d, |x| {
                let r = (x - x0).abs();
                (a * r.ln()).clamp(-LN_CLAMP, LN_CLAMP).exp()
            }),
            WeightSpec::Exp { c } => GridFunction::from_fn(d, |x| (c * x).exp()),
            WeightSpec::Step { values } => {
                if values.is_empty() || n % values.len() != 0 {
                    return Err(WeightError::Spec(format!("{} blocks do not divide {n} cells", values.len())));
                }
                let block = n / values.len();
                GridFunction::new(d, (0..n).map(|i| values[i / block]).collect())
                    .map_err(|e| WeightError::Spec(e.to_string()))?
            }
            WeightSpec::Spike { height, x0 } => {
                let c = (((x0 - d.left) / d.h()).floor().max(0.0) as usize).min(n - 1);
                let mut v = vec![1.0; n];
                v[c] += height;
                GridFunction::new(d, v).map_err(|e| WeightError::Spec(e.to_string()))?
            }
            WeightSpec::Log { x0 } => GridFunction::from_fn(d, |x| (std::f64::consts::E + 1.0 / (x - x0).abs()).ln()),
        };
        check_positive(&g)?;
        Ok(g)
    }

    pub fn weight(&self, d: Domain) -> Result<Weight, WeightError> {
        Weight::new(self.sample(d)?)
    }
}

/// The ten-weight bank used by the constants table and the oracle checks.
pub fn default_bank() -> Vec<WeightSpec> {
    vec![
        WeightSpec::One,
        WeightSpec::Power { a: 0.5, x0: 0.5 },
        WeightSpec::Power { a: -0.5, x0: 0.5 },
        WeightSpec::Power { a: 1.0 / 3.0, x0: 0.5 },
        WeightSpec::Power { a: -1.0 / 3.0, x0: 0.5 },
        WeightSpec::Power { a: -0.25, x0: 0.5 },
        WeightSpec::Exp { c: 1.0 },
        WeightSpec::Step { values: vec![2.0, 1.0] },
        WeightSpec::Step { values: vec![1.0, 4.0, 0.5, 2.0] },
        WeightSpec::Log { x0: 0.5 },
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub weight: String,
    pub p: f64,
    pub ap: f64,
    pub a1: f64,
    pub ainfty_fw: f64,
    pub ainfty_weak: f64,
}

/// One row per `(weight, p)`; serialised with header
/// `weight,p,ap,a1,ainfty_fw,ainfty_weak`.
pub fn constants_table(bank: &[WeightSpec], ps: &[f64], d: Domain) -> Result<Vec<ConstantsRow>, WeightError> {
    let mut rows = Vec::new();
    for spec in bank {
        let w = spec.weight(d)?;
        let (fw, weak) = w.ainfty();
        for &p in ps {
            rows.push(ConstantsRow {
                weight: spec.name(),
                p,
                ap: w.ap(p)?,
                a1: w.a1(),
                ainfty_fw: fw,
                ainfty_weak: weak,
            });
        }
    }
    Ok(rows)
}

pub fn write_constants_csv<W: std::io::Write>(rows: &[ConstantsRow], out: W) -> Result<(), csv::Error> {
    let mut wr = csv::Writer::from_writer(out);
    for r in rows {
        wr.serialize(r)?;
    }
    wr.flush()?;
    Ok(())
}
