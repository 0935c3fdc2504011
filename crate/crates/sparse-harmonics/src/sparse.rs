//! Sparse families of dyadic cubes: packing checks, sparse and commutator-type
//! sparse operators, the oscillation stopping family and the decay of the
//! counting function.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rand::{Rng, SeedableRng};
use rand::seq::index::sample;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{CubeSums, DyadicCube, GridFunction, Span};
use crate::stats::linear_fit;

#[derive(Debug, Error)]
pub enum SparseError {
    #[error("family mixes lattices {0} and {1}")]
    MixedLattices(u32, u32),
    #[error("cube at level {level} is finer than the grid (L = {max})")]
    Resolution { level: u32, max: u32 },
    #[error("operation needs one-dimensional cubes of the base lattice")]
    Unsupported,
    #[error("empty family")]
    Empty,
    #[error("csv: {0}")]
    Csv(String),
}

/// Cubes from a single lattice with a claimed sparseness constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseFamily {
    cubes: Vec<DyadicCube>,
    pub eta: f64,
}

impl SparseFamily {
    /// Sorts and deduplicates; rejects families that mix lattices.
    pub fn new(mut cubes: Vec<DyadicCube>, eta: f64) -> Result<Self, SparseError> {
        cubes.sort();
        cubes.dedup();
        if let Some(first) = cubes.first() {
            if let Some(other) = cubes.iter().find(|c| c.lattice_id != first.lattice_id) {
                return Err(SparseError::MixedLattices(first.lattice_id, other.lattice_id));
            }
        }
        Ok(Self { cubes, eta })
    }

    pub fn cubes(&self) -> &[DyadicCube] {
        &self.cubes
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn max_level(&self) -> u32 {
        self.cubes.iter().map(|c| c.level).max().unwrap_or(0)
    }

    pub fn union(&self, other: &SparseFamily, eta: f64) -> Result<Self, SparseError> {
        let mut all = self.cubes.clone();
        all.extend(other.cubes.iter().cloned());
        Self::new(all, eta)
    }

    /// Cubes contained in `q0`.
    pub fn restrict_to(&self, q0: &DyadicCube) -> Self {
        Self {
            cubes: self.cubes.iter().filter(|c| q0.contains(c)).cloned().collect(),
            eta: self.eta,
        }
    }

    /// CSV with header `lattice_id,level,index` (one-dimensional cubes).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), SparseError> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| SparseError::Csv(e.to_string());
        wr.write_record(["lattice_id", "level", "index"]).map_err(err)?;
        for c in &self.cubes {
            if c.dim() != 1 {
                return Err(SparseError::Unsupported);
            }
            wr.write_record([c.lattice_id.to_string(), c.level.to_string(), c.index[0].to_string()])
                .map_err(err)?;
        }
        wr.flush().map_err(|e| SparseError::Csv(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R, eta: f64) -> Result<Self, SparseError> {
        let mut rd = csv::Reader::from_reader(r);
        let mut cubes = Vec::new();
        for rec in rd.deserialize::<(u32, u32, i64)>() {
            let (lattice_id, level, index) = rec.map_err(|e| SparseError::Csv(e.to_string()))?;
            cubes.push(DyadicCube {
                lattice_id,
                level,
                index: vec![index],
            });
        }
        Self::new(cubes, eta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SparseReport {
    /// `best_packing_eta >= eta`
    pub is_sparse: bool,
    /// `min_Q |E(Q)|/|Q|` with `E(Q) = Q \ ⋃_{P⊊Q} P`
    pub best_eta: f64,
    /// `sup_Q (1/|Q|) Σ_{P⊆Q} |P|`
    pub carleson_constant: f64,
    /// `1 / carleson_constant`: the largest η admitting disjoint sets
    /// `E_Q ⊆ Q` with `|E_Q| >= η|Q|`
    pub best_packing_eta: f64,
    /// `|E(Q)|/|Q|` in the order of [`SparseFamily::cubes`]
    pub e_fractions: Vec<f64>,
}

fn cube_measure(c: &DyadicCube) -> f64 {
    let side = (-(c.level as f64)).exp2() * if c.is_shifted() { 3.0 } else { 1.0 };
    side.powi(c.dim() as i32)
}

/// Nearest strict ancestor of each cube inside the family.
fn family_parents(cubes: &[DyadicCube]) -> Vec<Option<usize>> {
    let pos: HashMap<&DyadicCube, usize> = cubes.iter().enumerate().map(|(i, c)| (c, i)).collect();
    cubes
        .iter()
        .map(|c| {
            let mut cur = c.parent();
            while let Some(p) = cur {
                if let Some(&i) = pos.get(&p) {
                    return Some(i);
                }
                cur = p.parent();
            }
            None
        })
        .collect()
}

pub fn verify_sparse(s: &SparseFamily) -> Result<SparseReport, SparseError> {
    if s.is_empty() {
        return Err(SparseError::Empty);
    }
    let lat = s.cubes[0].lattice_id;
    if let Some(c) = s.cubes.iter().find(|c| c.lattice_id != lat) {
        return Err(SparseError::MixedLattices(lat, c.lattice_id));
    }
    let parents = family_parents(&s.cubes);
    let meas: Vec<f64> = s.cubes.iter().map(cube_measure).collect();
    let mut covered = vec![0.0; s.len()];
    let mut packed = meas.clone();
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(s.cubes[i].level));
    for &i in &order {
        if let Some(p) = parents[i] {
            covered[p] += meas[i];
            packed[p] += packed[i];
        }
    }
    let e_fractions: Vec<f64> = (0..s.len()).map(|i| (meas[i] - covered[i]) / meas[i]).collect();
    let best_eta = e_fractions.iter().copied().fold(1.0, f64::min);
    let carleson = (0..s.len()).map(|i| packed[i] / meas[i]).fold(1.0, f64::max);
    let best_packing_eta = 1.0 / carleson;
    Ok(SparseReport {
        is_sparse: best_packing_eta >= s.eta - 1e-12,
        best_eta,
        carleson_constant: carleson,
        best_packing_eta,
        e_fractions,
    })
}

fn base_span(c: &DyadicCube, l: u32) -> Result<Span, SparseError> {
    if c.dim() != 1 || c.is_shifted() {
        return Err(SparseError::Unsupported);
    }
    if c.level > l {
        return Err(SparseError::Resolution { level: c.level, max: l });
    }
    let m = 1i64 << (l - c.level);
    Ok(Span {
        lo: c.index[0] * m,
        hi: (c.index[0] + 1) * m,
    })
}

fn triple_span(s: Span) -> Span {
    let len = s.len();
    Span {
        lo: s.lo - len,
        hi: s.hi + len,
    }
}

/// Sum of `vals` over a span and the divisor the domain's boundary mode uses.
fn span_mean(sums: &CubeSums, s: &Span, f: &GridFunction) -> f64 {
    let n = f.len();
    let m = s.measure_cells(n, f.domain().boundary_mode);
    if m == 0 {
        0.0
    } else {
        sums.span(s) / m as f64
    }
}

/// `A_{r,S} f = Σ_Q ⟨|f|^r⟩_{Q or 3Q}^{1/r} χ_Q`.
pub fn sparse_operator(s: &SparseFamily, r: f64, f: &GridFunction, dilation: u32) -> Result<GridFunction, SparseError> {
    assert!(r >= 1.0);
    assert!(dilation == 1 || dilation == 3, "dilation must be 1 or 3");
    let l = f.domain().resolution_log2;
    let n = f.len();
    let fr: Vec<f64> = f.samples().iter().map(|v| v.abs().powf(r)).collect();
    let sums = CubeSums::new(&fr);
    let mut out = vec![0.0; n];
    for c in &s.cubes {
        let q = base_span(c, l)?;
        let a = if dilation == 3 { triple_span(q) } else { q };
        let v = span_mean(&sums, &a, f).powf(1.0 / r);
        for x in q.cells(n) {
            out[x] += v;
        }
    }
    Ok(GridFunction::new(*f.domain(), out).expect("finite"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormVariant {
    /// averages over `Q`
    Global,
    /// averages over `3Q`
    Local3Q,
}

/// `Σ_Q Π_{s∈I} U_s(x) Π_{s∉I} ⟨|f_s|⟩ χ_Q(x)` where for slot `s < l`
/// `γ = 1` gives `|b_s(x) - ⟨b_s⟩| ⟨|f_s|⟩` and `γ = 2` gives `⟨|(b_s - ⟨b_s⟩) f_s|⟩`.
/// Averages run over `Q` or `3Q` according to `variant`; `⟨b_s⟩` always uses
/// the part of the cube inside the domain.
pub fn commutator_sparse_form(
    s: &SparseFamily,
    bs: &[GridFunction],
    fs: &[GridFunction],
    gammas: &[u8],
    variant: FormVariant,
) -> Result<GridFunction, SparseError> {
    assert!(!fs.is_empty());
    assert_eq!(bs.len(), gammas.len());
    assert!(bs.len() <= fs.len());
    assert!(gammas.iter().all(|g| *g == 1 || *g == 2));
    let d = *fs[0].domain();
    let n = d.n_cells();
    let l = d.resolution_log2;
    let mode = d.boundary_mode;
    let contributions: Vec<(Span, Vec<f64>)> = s
        .cubes
        .par_iter()
        .map(|c| {
            let q = base_span(c, l)?;
            let a = match variant {
                FormVariant::Global => q,
                FormVariant::Local3Q => triple_span(q),
            };
            let cells = a.cells(n);
            let denom = a.measure_cells(n, mode) as f64;
            let mean = |g: &dyn Fn(usize) -> f64| cells.clone().map(g).sum::<f64>() / denom;
            // symbols are averaged over the part of the cube inside the domain
            let inside = cells.len() as f64;
            let mut constant = 1.0;
            let mut pointwise: Vec<(usize, f64)> = Vec::new();
            for (slot, f) in fs.iter().enumerate() {
                let fv = f.samples();
                if slot < bs.len() {
                    let bv = bs[slot].samples();
                    let bq = cells.clone().map(|x| bv[x]).sum::<f64>() / inside;
                    if gammas[slot] == 2 {
                        constant *= mean(&|x| ((bv[x] - bq) * fv[x]).abs());
                    } else {
                        constant *= mean(&|x| fv[x].abs());
                        pointwise.push((slot, bq));
                    }
                } else {
                    constant *= mean(&|x| fv[x].abs());
                }
            }
            let vals: Vec<f64> = q
                .cells(n)
                .map(|x| {
                    pointwise
                        .iter()
                        .fold(constant, |acc, &(slot, bq)| acc * (bs[slot].samples()[x] - bq).abs())
                })
                .collect();
            Ok((q, vals))
        })
        .collect::<Result<_, SparseError>>()?;
    let mut out = vec![0.0; n];
    for (q, vals) in contributions {
        for (x, v) in q.cells(n).zip(vals) {
            out[x] += v;
        }
    }
    Ok(GridFunction::new(d, out).expect("finite"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationCertificate {
    /// `2^{n+2}`
    pub constant: f64,
    pub pairs_checked: usize,
    pub violations: usize,
    /// largest `lhs / rhs` over pairs with `rhs > 0`
    pub worst_ratio: f64,
}

type Key = (u32, i64);

fn key(c: &DyadicCube) -> Key {
    (c.level, c.index[0])
}

/// Stopping cubes generated below `root` inside its layer: maximal `R ⊊ Z` with
/// `⟨|b - ⟨b⟩_Z|⟩_R > 2^{n+1} ⟨|b - ⟨b⟩_Z|⟩_Z`, never descending into cubes of
/// the input family strictly inside `root`.
fn layer_cubes(b: &[f64], l: u32, root: Key, input: &HashSet<Key>) -> Vec<Key> {
    let threshold = 4.0;
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some((k, i)) = stack.pop() {
        if k == l {
            continue;
        }
        let s = 1usize << (l - k);
        let lo = i as usize * s;
        let z = &b[lo..lo + s];
        let mean = z.iter().sum::<f64>() / s as f64;
        let dev: Vec<f64> = z.iter().map(|v| (v - mean).abs()).collect();
        let sums = CubeSums::new(&dev);
        let omega = sums.total() / s as f64;
        if omega == 0.0 {
            continue;
        }
        let mut todo = vec![(k + 1, 2 * i), (k + 1, 2 * i + 1)];
        while let Some((kc, ic)) = todo.pop() {
            if input.contains(&(kc, ic)) {
                continue;
            }
            let rel_level = kc - k;
            let rel_index = ic - (i << rel_level);
            let avg = sums.base(rel_level, rel_index) / (1u64 << (l - kc)) as f64;
            if avg > threshold * omega {
                out.push((kc, ic));
                stack.push((kc, ic));
            } else if kc < l {
                todo.push((kc + 1, 2 * ic));
                todo.push((kc + 1, 2 * ic + 1));
            }
        }
    }
    out
}

/// Extends `s` by local-oscillation stopping cubes and certifies
/// `|b(x) - ⟨b⟩_Q| <= 2^{n+2} Σ_{R∈S̃, R⊆Q} ⟨|b - ⟨b⟩_R|⟩_R χ_R(x)` at every
/// cell of every `Q ∈ S̃`.
pub fn oscillation_sparse(b: &GridFunction, s: &SparseFamily) -> Result<(SparseFamily, OscillationCertificate), SparseError> {
    let l = b.domain().resolution_log2;
    for c in s.cubes() {
        base_span(c, l)?;
    }
    let bv = b.samples();
    let input: HashSet<Key> = s.cubes().iter().map(key).collect();
    let generated: Vec<Key> = s
        .cubes()
        .par_iter()
        .flat_map_iter(|c| layer_cubes(bv, l, key(c), &input))
        .collect();
    let mut all: Vec<DyadicCube> = s.cubes().to_vec();
    all.extend(generated.into_iter().map(|(k, i)| DyadicCube::base1(k, i)));
    let eta = s.eta / (2.0 * (1.0 + s.eta));
    let tilde = SparseFamily::new(all, eta)?;
    let cert = certify_oscillation(b, &tilde)?;
    Ok((tilde, cert))
}

/// Exhaustive check of the pointwise oscillation bound with constant `2^{n+2}`.
pub fn certify_oscillation(b: &GridFunction, s: &SparseFamily) -> Result<OscillationCertificate, SparseError> {
    let l = b.domain().resolution_log2;
    let n = b.len();
    let bv = b.samples();
    let constant = 8.0;
    let mut stats: HashMap<Key, (f64, f64)> = HashMap::new();
    for c in s.cubes() {
        let sp = base_span(c, l)?;
        let cells = &bv[sp.lo as usize..sp.hi as usize];
        let mean = cells.iter().sum::<f64>() / cells.len() as f64;
        let omega = cells.iter().map(|v| (v - mean).abs()).sum::<f64>() / cells.len() as f64;
        stats.insert(key(c), (mean, omega));
    }
    let scale = 1.0 + b.max_abs();
    let per_cell: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .map(|x| {
            let chain: Vec<(f64, f64)> = (0..=l)
                .filter_map(|k| stats.get(&(k, (x >> (l - k)) as i64)).copied())
                .collect();
            let mut suffix = 0.0;
            let mut checked = 0;
            let mut bad = 0;
            let mut worst = 0.0f64;
            for &(mean, omega) in chain.iter().rev() {
                suffix += omega;
                let lhs = (bv[x] - mean).abs();
                let rhs = constant * suffix;
                checked += 1;
                if lhs > rhs + 1e-12 * scale {
                    bad += 1;
                }
                if rhs > 0.0 {
                    worst = worst.max(lhs / rhs);
                }
            }
            (checked, bad, worst)
        })
        .collect();
    Ok(OscillationCertificate {
        constant,
        pairs_checked: per_cell.iter().map(|p| p.0).sum(),
        violations: per_cell.iter().map(|p| p.1).sum(),
        worst_ratio: per_cell.iter().map(|p| p.2).fold(0.0, f64::max),
    })
}

/// Principal cubes of `|g|` below `q0`: maximal `R ⊊ Z` with
/// `⟨|g|⟩_R > factor ⟨|g|⟩_Z`, recursively.
pub fn principal_cubes(g: &GridFunction, q0: &DyadicCube, factor: f64) -> Result<SparseFamily, SparseError> {
    assert!(factor > 1.0);
    let l = g.domain().resolution_log2;
    base_span(q0, l)?;
    let abs: Vec<f64> = g.samples().iter().map(|v| v.abs()).collect();
    let sums = CubeSums::new(&abs);
    let avg = |(k, i): Key| sums.base(k, i) / (1u64 << (l - k)) as f64;
    let mut out = vec![key(q0)];
    let mut stack = vec![key(q0)];
    while let Some(z) = stack.pop() {
        let az = avg(z);
        if az == 0.0 {
            continue;
        }
        let mut todo = if z.0 < l {
            vec![(z.0 + 1, 2 * z.1), (z.0 + 1, 2 * z.1 + 1)]
        } else {
            vec![]
        };
        while let Some(c) = todo.pop() {
            if avg(c) > factor * az {
                out.push(c);
                stack.push(c);
            } else if c.0 < l {
                todo.push((c.0 + 1, 2 * c.1));
                todo.push((c.0 + 1, 2 * c.1 + 1));
            }
        }
    }
    SparseFamily::new(
        out.into_iter().map(|(k, i)| DyadicCube::base1(k, i)).collect(),
        1.0 - 1.0 / factor,
    )
}

/// `Q, child, grandchild, ...` always taking the left child; `depth` cubes.
pub fn nested_chain(root: &DyadicCube, depth: usize) -> SparseFamily {
    let (k, i) = key(root);
    let cubes = (0..depth as u32).map(|j| DyadicCube::base1(k + j, i << j)).collect();
    SparseFamily::new(cubes, 0.5).expect("single lattice")
}

/// Random ½-sparse family below `root`: every selected cube picks a depth
/// `j ∈ {1,2,3}` and selects between a quarter and a half of its `2^j`
/// descendants at that depth.
pub fn random_sparse_family(root: &DyadicCube, max_level: u32, seed: u64) -> SparseFamily {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![key(root)];
    let mut stack = vec![key(root)];
    while let Some((k, i)) = stack.pop() {
        if k >= max_level {
            continue;
        }
        let j = rng.gen_range(1..=3u32.min(max_level - k));
        let total = 1usize << j;
        let lo = (total / 4).max(1);
        let hi = total / 2;
        let count = rng.gen_range(lo..=hi);
        for pick in sample(&mut rng, total, count) {
            let c = (k + j, (i << j) + pick as i64);
            out.push(c);
            stack.push(c);
        }
    }
    SparseFamily::new(out.into_iter().map(|(k, i)| DyadicCube::base1(k, i)).collect(), 0.5).expect("single lattice")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountingDecay {
    pub t: Vec<f64>,
    /// `|{x ∈ Q0 : Σ χ_{Q'}(x) > t}| / |Q0|`
    pub measure: Vec<f64>,
    pub alpha: Option<f64>,
    pub log_c: Option<f64>,
    pub r2: Option<f64>,
    pub degenerate: bool,
}

/// Super-level measures of `Σ_{Q'∈S, Q'⊆Q0} χ_{Q'}` on `Q0` and the fit
/// `ln measure ≈ ln c - α t` over the points with positive measure, leaving out
/// the top level set `{count = max}`, which is cut off by the finite depth.
/// The default grid is `t = 0, 1, ..., max - 1`.
pub fn counting_decay(s: &SparseFamily, q0: &DyadicCube, t_grid: Option<&[f64]>) -> Result<CountingDecay, SparseError> {
    let sub = s.restrict_to(q0);
    if sub.is_empty() {
        return Err(SparseError::Empty);
    }
    let l = sub.max_level();
    let root = base_span(q0, l)?;
    let n = root.len() as usize;
    let mut count = vec![0u32; n];
    for c in sub.cubes() {
        let sp = base_span(c, l)?;
        for x in sp.lo..sp.hi {
            count[(x - root.lo) as usize] += 1;
        }
    }
    let top = *count.iter().max().unwrap_or(&0);
    let default: Vec<f64> = (0..top).map(f64::from).collect();
    let t: Vec<f64> = t_grid.map(|g| g.to_vec()).unwrap_or(default);
    let measure: Vec<f64> = t
        .iter()
        .map(|&tt| count.iter().filter(|&&c| f64::from(c) > tt).count() as f64 / n as f64)
        .collect();
    let (mut xs, mut ys): (Vec<f64>, Vec<f64>) = t
        .iter()
        .zip(&measure)
        .filter(|(tt, m)| **m > 0.0 && **tt < f64::from(top))
        .map(|(tt, m)| (*tt, m.ln()))
        .unzip();
    // the top level set is where the family ran out of depth
    if xs.len() > 2 && xs.last().is_some_and(|&tt| tt >= f64::from(top) - 1.0) {
        xs.pop();
        ys.pop();
    }
    let constant = count.iter().all(|&c| c == count[0]);
    let fit = if constant { None } else { linear_fit(&xs, &ys) };
    Ok(CountingDecay {
        t,
        measure,
        alpha: fit.map(|f| -f.slope),
        log_c: fit.map(|f| f.intercept),
        r2: fit.map(|f| f.r2),
        degenerate: fit.is_none(),
    })
}

/// Random step function on dyadic blocks of level `k`.
pub fn random_dyadic_step(d: crate::grid::Domain, k: u32, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let blocks: Vec<f64> = (0..1usize << k).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let n = d.n_cells();
    let per = n >> k;
    GridFunction::new(d, (0..n).map(|x| blocks[x / per]).collect()).expect("finite")
}
