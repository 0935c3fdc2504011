//! Young functions, Luxemburg norms and the inequalities tying a Young
//! function to its complementary function.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{GridError, GridFunction, Interval};

#[derive(Debug, Error)]
pub enum OrliczError {
    #[error("non-finite input at cell {0}")]
    NonFinite(usize),
    #[error("interval {0:?} has zero measure in the domain")]
    EmptyCube(Interval),
    #[error("weight must be positive, found {0}")]
    NonPositiveWeight(f64),
    #[error("grid size mismatch")]
    Mismatch,
    #[error("{inequality} fails at t = {t}: lhs {lhs} > rhs {rhs}")]
    Violation {
        inequality: &'static str,
        t: f64,
        lhs: f64,
        rhs: f64,
    },
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum YoungKind {
    /// `c t^r`
    Power { c: f64, r: f64 },
    /// `t log(e+t)^alpha`
    LLogL { alpha: f64 },
    /// `t^p log(e+t)^alpha`
    PowerLog { p: f64, alpha: f64 },
    /// `exp(t^s) - 1`
    Exp { s: f64 },
    /// `t log t - t + 1` for `t >= 1`, zero below; the complement of `e^t - 1`
    ExpDual,
    /// `phi(t)^m`
    Pow { inner: Box<YoungFunction>, m: u32 },
    /// complementary function of `inner`, evaluated numerically
    Conjugate { inner: Box<YoungFunction> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct YoungFunction {
    pub kind: YoungKind,
}

const E: f64 = std::f64::consts::E;

impl YoungFunction {
    pub fn new(kind: YoungKind) -> Self {
        Self { kind }
    }

    /// `t^r`
    pub fn power(r: f64) -> Self {
        assert!(r > 0.0);
        Self::new(YoungKind::Power { c: 1.0, r })
    }

    /// `t^p / p`
    pub fn power_over_p(p: f64) -> Self {
        assert!(p >= 1.0);
        Self::new(YoungKind::Power { c: 1.0 / p, r: p })
    }

    pub fn llogl(alpha: f64) -> Self {
        assert!(alpha >= 0.0);
        Self::new(YoungKind::LLogL { alpha })
    }

    pub fn power_log(p: f64, alpha: f64) -> Self {
        Self::new(YoungKind::PowerLog { p, alpha })
    }

    /// `exp(t^s) - 1`, the Young function of `exp L^s`.
    pub fn exp(s: f64) -> Self {
        assert!(s > 0.0);
        Self::new(YoungKind::Exp { s })
    }

    pub fn pow(&self, m: u32) -> Self {
        Self::new(YoungKind::Pow {
            inner: Box::new(self.clone()),
            m,
        })
    }

    pub fn name(&self) -> String {
        match &self.kind {
            YoungKind::Power { c, r } if *c == 1.0 => format!("t^{r}"),
            YoungKind::Power { c, r } if (*c * r - 1.0).abs() < 1e-15 => format!("t^{r}/{r}"),
            YoungKind::Power { c, r } => format!("{c}*t^{r}"),
            YoungKind::LLogL { alpha } => format!("t*log(e+t)^{alpha}"),
            YoungKind::PowerLog { p, alpha } => format!("t^{p}*log(e+t)^{alpha}"),
            YoungKind::Exp { s } => format!("exp(t^{s})-1"),
            YoungKind::ExpDual => "t*log(t)-t+1".into(),
            YoungKind::Pow { inner, m } => format!("({})^{m}", inner.name()),
            YoungKind::Conjugate { inner } => format!("conj[{}]", inner.name()),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.kind {
            YoungKind::Power { c, r } => c * t.powf(*r),
            YoungKind::LLogL { alpha } => t * (E + t).ln().powf(*alpha),
            YoungKind::PowerLog { p, alpha } => t.powf(*p) * (E + t).ln().powf(*alpha),
            YoungKind::Exp { s } => t.powf(*s).exp_m1(),
            YoungKind::ExpDual => {
                if t <= 1.0 {
                    0.0
                } else {
                    t * t.ln() - t + 1.0
                }
            }
            YoungKind::Pow { inner, m } => inner.eval(t).powi(*m as i32),
            YoungKind::Conjugate { inner } => numeric_conjugate(inner, t),
        }
    }

    /// Right inverse `sup{t : phi(t) <= y}`.
    pub fn inverse(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return match self.kind {
                YoungKind::ExpDual => 1.0,
                _ => 0.0,
            };
        }
        match &self.kind {
            YoungKind::Power { c, r } => (y / c).powf(1.0 / r),
            YoungKind::Exp { s } => y.ln_1p().powf(1.0 / s),
            YoungKind::Pow { inner, m } => inner.inverse(y.powf(1.0 / *m as f64)),
            _ => numeric_inverse(|t| self.eval(t), y),
        }
    }

    /// The complementary function `sup_s (s t - phi(s))`, in closed form when
    /// one exists.
    pub fn complement(&self) -> YoungFunction {
        match &self.kind {
            YoungKind::Power { c, r } if *r > 1.0 => {
                let rp = r / (r - 1.0);
                let cp = (r - 1.0) * c * (c * r).powf(-rp);
                Self::new(YoungKind::Power { c: cp, r: rp })
            }
            YoungKind::Exp { s } if *s == 1.0 => Self::new(YoungKind::ExpDual),
            YoungKind::ExpDual => Self::exp(1.0),
            _ => Self::new(YoungKind::Conjugate {
                inner: Box::new(self.clone()),
            }),
        }
    }

    pub fn complement_eval(&self, t: f64) -> f64 {
        self.complement().eval(t)
    }

    /// Closed-form lower and upper dilation indices where known.
    pub fn indices(&self) -> Option<(f64, f64)> {
        match &self.kind {
            YoungKind::Power { r, .. } => Some((*r, *r)),
            YoungKind::LLogL { .. } => Some((1.0, 1.0)),
            YoungKind::PowerLog { p, .. } => Some((*p, *p)),
            YoungKind::Exp { s } => Some((*s, f64::INFINITY)),
            YoungKind::Pow { inner, m } => inner.indices().map(|(i, u)| (i * *m as f64, u * *m as f64)),
            _ => None,
        }
    }

    /// Constant `C1` with `phi(lambda t) <= (2 lambda)^C1 phi(t)` for `lambda >= 2`,
    /// or `None` when `phi` is not doubling.
    pub fn delta2_c1(&self) -> Option<f64> {
        match &self.kind {
            YoungKind::Power { r, .. } => Some(*r),
            YoungKind::LLogL { alpha } => Some(1.0 + alpha),
            YoungKind::PowerLog { p, alpha } => Some(p + alpha),
            YoungKind::Pow { inner, m } => inner.delta2_c1().map(|c| c * *m as f64),
            _ => None,
        }
    }

    pub fn is_submultiplicative(&self) -> bool {
        match &self.kind {
            YoungKind::Power { c, .. } => *c >= 1.0,
            YoungKind::LLogL { .. } | YoungKind::PowerLog { .. } => true,
            YoungKind::Pow { inner, .. } => inner.is_submultiplicative(),
            _ => false,
        }
    }

    pub fn is_convex(&self) -> bool {
        match &self.kind {
            YoungKind::Power { r, .. } => *r >= 1.0,
            YoungKind::LLogL { .. } | YoungKind::ExpDual | YoungKind::Conjugate { .. } => true,
            YoungKind::PowerLog { p, .. } => *p >= 1.0,
            YoungKind::Exp { s } => *s >= 1.0,
            YoungKind::Pow { inner, .. } => inner.is_convex(),
        }
    }

    /// `phi(t)/t -> 0` at zero and `-> infinity` at infinity.
    pub fn is_n_function(&self) -> bool {
        match &self.kind {
            YoungKind::Power { r, .. } => *r > 1.0,
            YoungKind::PowerLog { p, .. } => *p > 1.0,
            YoungKind::Exp { s } => *s > 1.0,
            YoungKind::LLogL { .. } | YoungKind::ExpDual => false,
            YoungKind::Pow { inner, m } => {
                inner.indices().map(|(i, _)| i * *m as f64 > 1.0).unwrap_or(false)
            }
            YoungKind::Conjugate { inner } => inner.is_n_function(),
        }
    }
}

/// Root of the nondecreasing `f` at level `y`, by bracketing and bisection.
pub fn numeric_inverse(f: impl Fn(f64) -> f64, y: f64) -> f64 {
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < y {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    if lo == 0.0 {
        let mut l = hi / 2.0;
        while l > 1e-300 && f(l) >= y {
            hi = l;
            l /= 2.0;
        }
        lo = l;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < y {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // right inverse: largest t with f(t) <= y
    if f(hi) <= y {
        hi
    } else {
        lo
    }
}

const CONJ_GRID: usize = 4096;

/// `sup_s (s t - phi(s))`: a 4096-point log-spaced scan over `s` followed by a
/// golden-section refinement around the best grid point.
pub fn numeric_conjugate(phi: &YoungFunction, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let g = |u: f64| {
        let s = u.exp();
        let v = s * t - phi.eval(s);
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    };
    let (mut ulo, mut uhi) = (-40.0f64, 40.0f64);
    let step = (uhi - ulo) / (CONJ_GRID - 1) as f64;
    let mut best = 0usize;
    let mut best_v = f64::NEG_INFINITY;
    for k in 0..CONJ_GRID {
        let v = g(ulo + k as f64 * step);
        if v > best_v {
            best_v = v;
            best = k;
        }
    }
    if best_v <= 0.0 && best == 0 {
        // objective is nonpositive on the whole scan; s -> 0 gives 0
        return 0.0;
    }
    if best == CONJ_GRID - 1 {
        // maximiser beyond the scan range; extend upwards
        let mut u = uhi;
        let mut v = best_v;
        loop {
            let nu = u + 1.0;
            let nv = g(nu);
            if !(nv > v) || nu > 700.0 {
                break;
            }
            u = nu;
            v = nv;
        }
        ulo = u - 1.0;
        uhi = u + 1.0;
    } else {
        let c = ulo + best as f64 * step;
        ulo = c - step;
        uhi = c + step;
    }
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (ulo, uhi);
    let mut x1 = b - r * (b - a);
    let mut x2 = a + r * (b - a);
    let (mut f1, mut f2) = (g(x1), g(x2));
    for _ in 0..120 {
        if f1 < f2 {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + r * (b - a);
            f2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - r * (b - a);
            f1 = g(x1);
        }
        if b - a < 1e-15 {
            break;
        }
    }
    best_v.max(f1).max(f2).max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub enum Measure {
    #[default]
    Lebesgue,
    Weighted(GridFunction),
}

/// `(<|f|^r>_Q)^{1/r}` with exact cell weighting. Under zero extension the
/// average divides by `|Q|`; under clipping by `|Q ∩ domain|`.
pub fn average(f: &GridFunction, q: &Interval, r: f64) -> Result<f64, OrliczError> {
    let d = f.domain();
    let inside = q.intersect(&d.as_interval());
    if inside.is_empty() {
        return Err(OrliczError::EmptyCube(*q));
    }
    let g = f.map(|v| v.abs().powf(r));
    let denom = match d.boundary_mode {
        crate::grid::BoundaryMode::ZeroExtend => q.len(),
        crate::grid::BoundaryMode::Clip => inside.len(),
    };
    Ok((g.integral_over(q) / denom).powf(1.0 / r))
}

/// Cells meeting `q` with their overlap measure, optionally weighted.
fn cell_weights(f: &GridFunction, q: &Interval, mu: &Measure) -> Result<(Vec<f64>, Vec<f64>), OrliczError> {
    let d = f.domain();
    let h = d.h();
    let a = ((q.lo - d.left) / h).max(0.0);
    let b = ((q.hi - d.left) / h).min(d.n_cells() as f64);
    if b <= a {
        return Err(OrliczError::EmptyCube(*q));
    }
    let w = match mu {
        Measure::Lebesgue => None,
        Measure::Weighted(w) => {
            if w.len() != f.len() {
                return Err(OrliczError::Mismatch);
            }
            Some(w.samples())
        }
    };
    let mut vals = Vec::new();
    let mut wts = Vec::new();
    for c in (a.floor() as usize)..(b.ceil() as usize).min(d.n_cells()) {
        let overlap = b.min(c as f64 + 1.0) - a.max(c as f64);
        if overlap <= 0.0 {
            continue;
        }
        let v = f.samples()[c];
        if !v.is_finite() {
            return Err(OrliczError::NonFinite(c));
        }
        let wc = match w {
            Some(w) => {
                if !(w[c] > 0.0) {
                    return Err(OrliczError::NonPositiveWeight(w[c]));
                }
                w[c]
            }
            None => 1.0,
        };
        vals.push(v.abs());
        wts.push(overlap * wc);
    }
    Ok((vals, wts))
}

/// Luxemburg norm `inf{λ : (1/μ(Q)) ∫_Q φ(|f|/λ) dμ <= 1}`.
pub fn luxemburg_norm(
    f: &GridFunction,
    phi: &YoungFunction,
    q: &Interval,
    mu: &Measure,
) -> Result<f64, OrliczError> {
    let (vals, wts) = cell_weights(f, q, mu)?;
    Ok(luxemburg_weighted(&vals, Some(&wts), phi))
}

/// Luxemburg norm of nonnegative `vals` with optional nonnegative weights,
/// to relative tolerance `1e-12`.
pub fn luxemburg_weighted(vals: &[f64], wts: Option<&[f64]>, phi: &YoungFunction) -> f64 {
    let total: f64 = match wts {
        Some(w) => w.iter().sum(),
        None => vals.len() as f64,
    };
    luxemburg_with_total(vals, wts, total, phi)
}

/// As [`luxemburg_weighted`] but normalising by `total`, which may exceed the
/// summed weights when part of the cube carries the value zero implicitly.
pub fn luxemburg_with_total(vals: &[f64], wts: Option<&[f64]>, total: f64, phi: &YoungFunction) -> f64 {
    let max = vals.iter().fold(0.0f64, |m, &v| m.max(v));
    if max == 0.0 || total <= 0.0 {
        return 0.0;
    }
    let modular = |lam: f64| -> f64 {
        let s: f64 = match wts {
            Some(w) => vals.iter().zip(w).map(|(&v, &wt)| if v > 0.0 { wt * phi.eval(v / lam) } else { 0.0 }).sum(),
            None => vals.iter().map(|&v| if v > 0.0 { phi.eval(v / lam) } else { 0.0 }).sum(),
        };
        s / total
    };
    let one = phi.inverse(1.0);
    let mut hi = max / one;
    while modular(hi) > 1.0 {
        hi *= 1.0 + 1e-9;
        if modular(hi) > 1.0 {
            hi *= 2.0;
        }
    }
    let mut lo = if phi.is_convex() {
        let mean: f64 = match wts {
            Some(w) => vals.iter().zip(w).map(|(v, w)| v * w).sum::<f64>() / total,
            None => vals.iter().sum::<f64>() / total,
        };
        // Jensen: the modular at mean/φ^{-1}(1) is at least one
        (mean / one) * (1.0 - 1e-12)
    } else {
        hi / 2.0
    };
    while lo > 0.0 && modular(lo) <= 1.0 {
        hi = lo;
        lo /= 2.0;
    }
    if lo <= 0.0 {
        return hi;
    }
    while hi / lo - 1.0 > 1e-13 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolderCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Multilinear generalized Hölder inequality with `exp L^{s_i}` factors and
/// an `L(log L)^{1/s}` factor, `1/s = Σ 1/s_i`, on the measure `w dx`.
pub fn generalized_holder(
    fs: &[GridFunction],
    g: &GridFunction,
    q: &Interval,
    w: &GridFunction,
    s: &[f64],
) -> Result<HolderCheck, OrliczError> {
    assert_eq!(fs.len(), s.len());
    assert!(s.iter().all(|&si| si >= 1.0));
    let inv_s: f64 = s.iter().map(|si| 1.0 / si).sum();
    let mu = Measure::Weighted(w.clone());
    let mut prod = g.abs();
    for f in fs {
        prod = prod.zip_with(f, |a, b| a * b.abs());
    }
    let weighted = prod.zip_with(w, |a, b| a * b);
    let wq = w.integral_over(q);
    if wq <= 0.0 {
        return Err(OrliczError::EmptyCube(*q));
    }
    let lhs = weighted.integral_over(q) / wq;
    let constant = 2f64.powf(inv_s) * (1.0 + inv_s).powf(inv_s);
    let mut rhs = constant * luxemburg_norm(g, &YoungFunction::llogl(inv_s), q, &mu)?;
    for (f, &si) in fs.iter().zip(s) {
        rhs *= luxemburg_norm(f, &YoungFunction::exp(si), q, &mu)?;
    }
    let ratio = if rhs > 0.0 { lhs / rhs } else if lhs == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(HolderCheck { lhs, rhs, ratio })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YoungPairReport {
    pub function: String,
    pub points: usize,
    /// largest `lhs/rhs - 1` seen per inequality
    pub worst_inverse_lower: f64,
    pub worst_inverse_upper: f64,
    pub worst_complement_bound: f64,
    pub worst_young: f64,
}

const PAIR_SLACK: f64 = 1e-9;

fn excess(lhs: f64, rhs: f64) -> f64 {
    if lhs <= rhs {
        (lhs - rhs) / rhs.abs().max(1e-300)
    } else {
        (lhs - rhs) / rhs.abs().max(1e-12)
    }
}

/// Checks `t <= φ^{-1}(t) φ̄^{-1}(t) <= 2t`, `φ̄(φ(t)/t) <= φ(t)` and Young's
/// inequality `s t <= φ(s) + φ̄(t)` on the given points.
pub fn young_pair_checks(phi: &YoungFunction, t_grid: &[f64]) -> Result<YoungPairReport, OrliczError> {
    let conj = phi.complement();
    let mut rep = YoungPairReport {
        function: phi.name(),
        points: t_grid.len(),
        worst_inverse_lower: f64::NEG_INFINITY,
        worst_inverse_upper: f64::NEG_INFINITY,
        worst_complement_bound: f64::NEG_INFINITY,
        worst_young: f64::NEG_INFINITY,
    };
    let fail = |inequality, t, lhs, rhs| OrliczError::Violation { inequality, t, lhs, rhs };
    for &t in t_grid {
        let prod = phi.inverse(t) * conj.inverse(t);
        let e1 = excess(t, prod);
        let e2 = excess(prod, 2.0 * t);
        rep.worst_inverse_lower = rep.worst_inverse_lower.max(e1);
        rep.worst_inverse_upper = rep.worst_inverse_upper.max(e2);
        if e1 > PAIR_SLACK {
            return Err(fail("t <= inv(t) * conj_inv(t)", t, t, prod));
        }
        if e2 > PAIR_SLACK {
            return Err(fail("inv(t) * conj_inv(t) <= 2t", t, prod, 2.0 * t));
        }
        let pt = phi.eval(t);
        let lhs = conj.eval(pt / t);
        let e3 = excess(lhs, pt);
        rep.worst_complement_bound = rep.worst_complement_bound.max(e3);
        if e3 > PAIR_SLACK {
            return Err(fail("conj(phi(t)/t) <= phi(t)", t, lhs, pt));
        }
        for &s in t_grid {
            let rhs = phi.eval(s) + conj.eval(t);
            let e4 = excess(s * t, rhs);
            rep.worst_young = rep.worst_young.max(e4);
            if e4 > PAIR_SLACK {
                return Err(fail("s t <= phi(s) + conj(t)", t, s * t, rhs));
            }
        }
    }
    Ok(rep)
}

/// `h_φ(t) = sup_s φ(st)/φ(s)` over a log-spaced grid of `s` in `[1e-8, 1e8]`.
pub fn dilation_function(phi: &YoungFunction, t: f64) -> f64 {
    let n = 2001;
    let mut best = 0.0f64;
    for k in 0..n {
        let s = 10f64.powf(-8.0 + 16.0 * k as f64 / (n - 1) as f64);
        let den = phi.eval(s);
        if den > 0.0 && den.is_finite() {
            let v = phi.eval(s * t) / den;
            if v.is_nan() {
                continue;
            }
            best = best.max(v);
        }
    }
    best
}

/// Numeric dilation indices from probes at `t = 1e-6` and `t = 1e6`.
pub fn dilation_indices_numeric(phi: &YoungFunction) -> (f64, f64) {
    let lo = 1e-6f64;
    let hi = 1e6f64;
    let i = dilation_function(phi, lo).ln() / lo.ln();
    let big = dilation_function(phi, hi);
    let upper = if big.is_finite() { big.ln() / hi.ln() } else { f64::INFINITY };
    (i, upper)
}

/// Closed forms where available, numeric probes otherwise.
pub fn dilation_indices(phi: &YoungFunction) -> (f64, f64) {
    phi.indices().unwrap_or_else(|| dilation_indices_numeric(phi))
}

/// Sampled `sup ln(φ(λt)/φ(t)) / ln(2λ)` over `λ ∈ [2, 1e4]`, `t ∈ [1e-4, 1e4]`.
pub fn delta2_numeric(phi: &YoungFunction) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for a in 0..60 {
        let lam = 2.0 * 5000f64.powf(a as f64 / 59.0);
        for b in 0..80 {
            let t = 10f64.powf(-4.0 + 8.0 * b as f64 / 79.0);
            let den = phi.eval(t);
            if den <= 0.0 {
                continue;
            }
            let v = (phi.eval(lam * t) / den).ln() / (2.0 * lam).ln();
            best = best.max(v);
        }
    }
    best
}

/// Smallest `α ∈ (0, 1]` for which `φ̄(t)^α / t` is nondecreasing on a log grid
/// over `[1e-3, 1e3]`; such a power of `φ̄` is quasi-convex.
pub fn quasi_convex_exponent(phi: &YoungFunction) -> f64 {
    let conj = phi.complement();
    let ts: Vec<f64> = (0..121).map(|k| 10f64.powf(-3.0 + 6.0 * k as f64 / 120.0)).collect();
    let vals: Vec<f64> = ts.iter().map(|&t| conj.eval(t)).collect();
    let passes = |alpha: f64| {
        let mut prev = 0.0f64;
        for (t, v) in ts.iter().zip(&vals) {
            if *v <= 0.0 {
                continue;
            }
            let q = v.powf(alpha) / t;
            if q < prev * (1.0 - 1e-9) {
                return false;
            }
            prev = q;
        }
        true
    };
    if !passes(1.0) {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if passes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// The built-in Young functions used by the validation suites.
pub fn builtins() -> Vec<YoungFunction> {
    vec![
        YoungFunction::power(2.0),
        YoungFunction::power(3.0),
        YoungFunction::power_over_p(1.5),
        YoungFunction::power_over_p(3.0),
        YoungFunction::llogl(1.0),
        YoungFunction::llogl(2.0),
        YoungFunction::power_log(2.0, 1.0),
        YoungFunction::exp(1.0),
        YoungFunction::exp(2.0),
    ]
}
