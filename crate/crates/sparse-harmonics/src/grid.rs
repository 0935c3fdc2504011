//! Uniform grids on a bounded interval, piecewise-constant sampled functions,
//! and dyadic cube geometry including the three shifted lattices of triples.
//!
//! Cells are indexed `0..N` with `N = 2^L`. A dyadic cube of the base lattice
//! at level `k` and index `i` covers cells `[i s, (i+1) s)` with `s = 2^(L-k)`.
//! The shifted lattices consist of the triples `3Q` of base cubes: the triple
//! centred on base cube `(k, i)` covers cells `[(i-1) s, (i+2) s)`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GridError {
    #[error("cube at level {level} cannot be refined past grid resolution {max}")]
    Resolution { level: u32, max: u32 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("expected {expected} samples, got {got}")]
    Length { expected: usize, got: usize },
    #[error("non-finite sample at cell {0}")]
    NonFinite(usize),
    #[error("interval {lo}..{hi} does not meet the domain")]
    EmptyIntersection { lo: f64, hi: f64 },
    #[error("csv: {0}")]
    Csv(String),
}

/// How cubes that stick out of the domain are treated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryMode {
    /// Functions vanish outside the domain; averages divide by the full length.
    #[default]
    ZeroExtend,
    /// Cubes are intersected with the domain before averaging.
    Clip,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub left: f64,
    pub length: f64,
    pub resolution_log2: u32,
    pub boundary_mode: BoundaryMode,
}

impl Domain {
    pub fn new(left: f64, length: f64, resolution_log2: u32) -> Result<Self, GridError> {
        if !(left.is_finite() && length.is_finite() && length > 0.0) {
            return Err(GridError::InvalidDomain(format!(
                "left={left}, length={length}"
            )));
        }
        if resolution_log2 == 0 || resolution_log2 > 26 {
            return Err(GridError::InvalidDomain(format!(
                "resolution_log2={resolution_log2} outside 1..=26"
            )));
        }
        Ok(Self {
            left,
            length,
            resolution_log2,
            boundary_mode: BoundaryMode::ZeroExtend,
        })
    }

    /// `[0, 1)` with `2^l` cells.
    pub fn unit(l: u32) -> Self {
        Self::new(0.0, 1.0, l).expect("unit domain")
    }

    pub fn with_boundary(mut self, mode: BoundaryMode) -> Self {
        self.boundary_mode = mode;
        self
    }

    pub fn n_cells(&self) -> usize {
        1usize << self.resolution_log2
    }

    pub fn h(&self) -> f64 {
        self.length / self.n_cells() as f64
    }

    pub fn right(&self) -> f64 {
        self.left + self.length
    }

    pub fn edge(&self, i: i64) -> f64 {
        self.left + i as f64 * self.h()
    }

    pub fn center(&self, i: usize) -> f64 {
        self.left + (i as f64 + 0.5) * self.h()
    }

    pub fn centers(&self) -> Vec<f64> {
        (0..self.n_cells()).map(|i| self.center(i)).collect()
    }

    pub fn as_interval(&self) -> Interval {
        Interval::new(self.left, self.right())
    }

    pub fn escapes(&self, iv: &Interval) -> bool {
        iv.lo < self.left - 1e-12 * self.length || iv.hi > self.right() + 1e-12 * self.length
    }

    /// Apply the boundary mode to a geometric interval.
    pub fn resolve(&self, iv: Interval) -> Interval {
        match self.boundary_mode {
            BoundaryMode::ZeroExtend => iv,
            BoundaryMode::Clip => iv.intersect(&self.as_interval()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        (self.hi - self.lo).max(0.0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }

    pub fn intersect(&self, other: &Interval) -> Interval {
        Interval::new(self.lo.max(other.lo), self.hi.min(other.hi))
    }

    /// Same centre, `r` times the length.
    pub fn dilate(&self, r: f64) -> Interval {
        let c = self.center();
        let half = 0.5 * r * self.len();
        Interval::new(c - half, c + half)
    }
}

/// Half-open range of cell indices, possibly reaching outside `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Span {
    pub lo: i64,
    pub hi: i64,
}

impl Span {
    pub fn len(&self) -> i64 {
        (self.hi - self.lo).max(0)
    }

    pub fn is_empty(&self) -> bool {
        self.hi <= self.lo
    }

    pub fn clip(&self, n: usize) -> Span {
        Span {
            lo: self.lo.max(0),
            hi: self.hi.min(n as i64),
        }
    }

    pub fn contains_cell(&self, c: i64) -> bool {
        self.lo <= c && c < self.hi
    }

    pub fn contains_span(&self, other: &Span) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn cells(&self, n: usize) -> std::ops::Range<usize> {
        let c = self.clip(n);
        if c.is_empty() {
            0..0
        } else {
            c.lo as usize..c.hi as usize
        }
    }

    /// Number of cells used as the averaging length under `mode`.
    pub fn measure_cells(&self, n: usize, mode: BoundaryMode) -> i64 {
        match mode {
            BoundaryMode::ZeroExtend => self.len(),
            BoundaryMode::Clip => self.clip(n).len(),
        }
    }
}

/// Real function given by its cell averages on a [`Domain`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    domain: Domain,
    samples: Vec<f64>,
}

impl GridFunction {
    pub fn new(domain: Domain, samples: Vec<f64>) -> Result<Self, GridError> {
        if samples.len() != domain.n_cells() {
            return Err(GridError::Length {
                expected: domain.n_cells(),
                got: samples.len(),
            });
        }
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(GridError::NonFinite(i));
        }
        Ok(Self { domain, samples })
    }

    pub fn zeros(domain: Domain) -> Self {
        Self::constant(domain, 0.0)
    }

    pub fn constant(domain: Domain, c: f64) -> Self {
        Self {
            samples: vec![c; domain.n_cells()],
            domain,
        }
    }

    /// Samples `f` at cell centres.
    pub fn from_fn(domain: Domain, f: impl Fn(f64) -> f64) -> Self {
        let samples = (0..domain.n_cells()).map(|i| f(domain.center(i))).collect();
        Self { domain, samples }
    }

    /// Exact cell averages of the indicator of `iv`.
    pub fn indicator(domain: Domain, iv: Interval) -> Self {
        let h = domain.h();
        let samples = (0..domain.n_cells())
            .map(|i| {
                let cell = Interval::new(domain.edge(i as i64), domain.edge(i as i64 + 1));
                cell.intersect(&iv).len() / h
            })
            .collect();
        Self { domain, samples }
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn integral(&self) -> f64 {
        self.domain.h() * self.samples.iter().sum::<f64>()
    }

    /// Exact integral over `iv`; the function is zero outside the domain.
    pub fn integral_over(&self, iv: &Interval) -> f64 {
        let d = &self.domain;
        let h = d.h();
        let a = ((iv.lo - d.left) / h).max(0.0);
        let b = ((iv.hi - d.left) / h).min(d.n_cells() as f64);
        if b <= a {
            return 0.0;
        }
        let first = a.floor() as usize;
        let last = (b.ceil() as usize).min(d.n_cells());
        let mut total = 0.0;
        for c in first..last {
            let lo = a.max(c as f64);
            let hi = b.min(c as f64 + 1.0);
            if hi > lo {
                total += self.samples[c] * (hi - lo);
            }
        }
        total * h
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            domain: self.domain,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> Self {
        assert_eq!(self.len(), other.len(), "grid size mismatch");
        Self {
            domain: self.domain,
            samples: self
                .samples
                .iter()
                .zip(&other.samples)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.samples.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), GridError> {
        let mut wr = csv::Writer::from_writer(w);
        let err = |e: csv::Error| GridError::Csv(e.to_string());
        wr.write_record(["x", "value"]).map_err(err)?;
        for (i, v) in self.samples.iter().enumerate() {
            wr.write_record([self.domain.center(i).to_string(), v.to_string()])
                .map_err(err)?;
        }
        wr.flush().map_err(|e| GridError::Csv(e.to_string()))
    }

    /// Reads `x,value` rows at cell centres; the domain is inferred from the
    /// centres and must have a power-of-two number of cells.
    pub fn read_csv<R: Read>(r: R) -> Result<Self, GridError> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(|e| GridError::Csv(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != ["x", "value"] {
            return Err(GridError::Csv("header must be x,value".into()));
        }
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for rec in rd.records() {
            let rec = rec.map_err(|e| GridError::Csv(e.to_string()))?;
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| GridError::Csv(format!("{s}: {e}")))
            };
            xs.push(parse(&rec[0])?);
            vs.push(parse(&rec[1])?);
        }
        let n = xs.len();
        if n < 2 || !n.is_power_of_two() {
            return Err(GridError::Csv(format!("{n} rows is not a power of two >= 2")));
        }
        let h = (xs[n - 1] - xs[0]) / (n - 1) as f64;
        let domain = Domain::new(xs[0] - 0.5 * h, h * n as f64, n.trailing_zeros())?;
        Self::new(domain, vs)
    }
}

/// Cube of one of the lattices. Lattice `0` is the base dyadic lattice; ids
/// `1..=3^n` are the shifted lattices returned by [`shifted_lattices`]. For a
/// shifted cube the index is that of the base cube at its centre.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DyadicCube {
    pub lattice_id: u32,
    pub level: u32,
    pub index: Vec<i64>,
}

impl DyadicCube {
    pub fn base(level: u32, index: Vec<i64>) -> Self {
        Self {
            lattice_id: 0,
            level,
            index,
        }
    }

    pub fn base1(level: u32, index: i64) -> Self {
        Self::base(level, vec![index])
    }

    pub fn dim(&self) -> usize {
        self.index.len()
    }

    pub fn is_shifted(&self) -> bool {
        self.lattice_id != 0
    }

    /// Per-axis bounds `[lo, hi)` in units of `2^-scale` base lengths.
    pub fn bounds_at(&self, scale: u32) -> Vec<(i64, i64)> {
        assert!(scale >= self.level, "scale finer than cube level required");
        let m = 1i64 << (scale - self.level);
        self.index
            .iter()
            .map(|&i| {
                if self.is_shifted() {
                    ((i - 1) * m, (i + 2) * m)
                } else {
                    (i * m, (i + 1) * m)
                }
            })
            .collect()
    }

    /// Side length as a fraction of the base length.
    pub fn side_fraction(&self) -> f64 {
        let s = (-(self.level as f64)).exp2();
        if self.is_shifted() {
            3.0 * s
        } else {
            s
        }
    }

    pub fn side(&self, domain: &Domain) -> f64 {
        domain.length * self.side_fraction()
    }

    pub fn contains(&self, other: &DyadicCube) -> bool {
        let s = self.level.max(other.level);
        self.bounds_at(s)
            .iter()
            .zip(other.bounds_at(s))
            .all(|(&(a, b), (c, d))| a <= c && d <= b)
    }

    pub fn is_disjoint(&self, other: &DyadicCube) -> bool {
        let s = self.level.max(other.level);
        self.bounds_at(s)
            .iter()
            .zip(other.bounds_at(s))
            .any(|(&(a, b), (c, d))| b <= c || d <= a)
    }

    /// Geometric interval along each axis.
    pub fn intervals(&self, domain: &Domain) -> Vec<Interval> {
        let s = self.level;
        let unit = domain.length * (-(s as f64)).exp2();
        self.bounds_at(s)
            .into_iter()
            .map(|(a, b)| Interval::new(domain.left + a as f64 * unit, domain.left + b as f64 * unit))
            .collect()
    }

    /// One-dimensional cell span; requires `level <= L`.
    pub fn span(&self, domain: &Domain) -> Span {
        assert_eq!(self.dim(), 1, "span is defined for n = 1");
        assert!(self.level <= domain.resolution_log2);
        let (lo, hi) = self.bounds_at(domain.resolution_log2)[0];
        Span { lo, hi }
    }

    pub fn parent(&self) -> Option<DyadicCube> {
        if self.level == 0 {
            return None;
        }
        let index = self
            .index
            .iter()
            .map(|&i| {
                if self.is_shifted() {
                    // children of (k, j) are (k+1, 2j-1) and (k+1, 2j+2)
                    if i.rem_euclid(2) == 1 {
                        (i + 1).div_euclid(2)
                    } else {
                        (i - 2).div_euclid(2)
                    }
                } else {
                    i.div_euclid(2)
                }
            })
            .collect();
        Some(DyadicCube {
            lattice_id: self.lattice_id,
            level: self.level - 1,
            index,
        })
    }
}

/// The `2^n` children of `q`; refuses to refine below the grid resolution.
pub fn children(q: &DyadicCube, domain: &Domain) -> Result<Vec<DyadicCube>, GridError> {
    if q.level >= domain.resolution_log2 {
        return Err(GridError::Resolution {
            level: q.level,
            max: domain.resolution_log2,
        });
    }
    let n = q.dim();
    let offsets: [i64; 2] = if q.is_shifted() { [-1, 2] } else { [0, 1] };
    let mut out = Vec::with_capacity(1 << n);
    for mask in 0..(1usize << n) {
        let index = q
            .index
            .iter()
            .enumerate()
            .map(|(d, &i)| 2 * i + offsets[(mask >> d) & 1])
            .collect();
        out.push(DyadicCube {
            lattice_id: q.lattice_id,
            level: q.level + 1,
            index,
        });
    }
    Ok(out)
}

/// `rQ` along each axis, with the domain's boundary mode applied.
pub fn dilate(q: &DyadicCube, r: f64, domain: &Domain) -> Vec<Interval> {
    assert!(r > 0.0, "dilation factor must be positive");
    q.intervals(domain)
        .into_iter()
        .map(|iv| domain.resolve(iv.dilate(r)))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DyadicLattice {
    pub id: u32,
    /// Offset of the level-0 tiling origin in base lengths, per axis.
    pub shift: Vec<i64>,
    pub base_level: u32,
    pub dim: usize,
}

/// Residue class mod 3 of triple centres taken by shifted lattice `t` at `level`.
fn residue(t: u8, level: u32) -> i64 {
    // the centre index map j -> 2j + 2 (mod 3) is an involution
    let t = t as i64;
    if level % 2 == 0 {
        t
    } else {
        (2 * t + 2).rem_euclid(3)
    }
}

impl DyadicLattice {
    pub fn base(dim: usize) -> Self {
        Self {
            id: 0,
            shift: vec![0; dim],
            base_level: 0,
            dim,
        }
    }

    fn digits(&self) -> Vec<u8> {
        let mut k = self.id - 1;
        (0..self.dim)
            .map(|_| {
                let t = (k % 3) as u8;
                k /= 3;
                t
            })
            .collect()
    }

    pub fn contains_cube(&self, q: &DyadicCube) -> bool {
        if q.lattice_id != self.id || q.dim() != self.dim {
            return false;
        }
        if self.id == 0 {
            return true;
        }
        self.digits()
            .iter()
            .zip(&q.index)
            .all(|(&t, &i)| i.rem_euclid(3) == residue(t, q.level))
    }

    /// All cubes of this lattice at `level` meeting the domain `[0,1)^n`.
    pub fn cubes_at_level(&self, level: u32) -> Vec<DyadicCube> {
        let count = 1i64 << level;
        let axis: Vec<Vec<i64>> = if self.id == 0 {
            vec![(0..count).collect(); self.dim]
        } else {
            self.digits()
                .iter()
                .map(|&t| {
                    (-1..=count)
                        .filter(|i| i.rem_euclid(3) == residue(t, level))
                        .collect()
                })
                .collect()
        };
        let mut out = vec![Vec::new()];
        for choices in &axis {
            let mut next = Vec::with_capacity(out.len() * choices.len());
            for prefix in &out {
                for &c in choices {
                    let mut p = prefix.clone();
                    p.push(c);
                    next.push(p);
                }
            }
            out = next;
        }
        out.into_iter()
            .map(|index| DyadicCube {
                lattice_id: self.id,
                level,
                index,
            })
            .collect()
    }
}

/// The `3^n` lattices whose union is `{3Q : Q in the base lattice}`.
pub fn shifted_lattices(n: usize) -> Vec<DyadicLattice> {
    assert!(n >= 1);
    let count = 3u32.pow(n as u32);
    (0..count)
        .map(|k| {
            let mut lat = DyadicLattice {
                id: k + 1,
                shift: Vec::new(),
                base_level: 0,
                dim: n,
            };
            lat.shift = lat.digits().iter().map(|&t| t as i64 - 1).collect();
            lat
        })
        .collect()
}

/// The cube `3Q` as a member of its shifted lattice.
pub fn triple(q: &DyadicCube) -> DyadicCube {
    assert!(!q.is_shifted(), "triple is taken of base cubes");
    let mut id = 0u32;
    for (d, &i) in q.index.iter().enumerate() {
        let r = i.rem_euclid(3);
        let t = if q.level % 2 == 0 { r } else { (2 * r + 2).rem_euclid(3) };
        id += t as u32 * 3u32.pow(d as u32);
    }
    DyadicCube {
        lattice_id: id + 1,
        level: q.level,
        index: q.index.clone(),
    }
}

/// Which cubes the one-dimensional suprema run over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CubeScope {
    Dyadic,
    #[default]
    DyadicShifted,
}

/// Whether cubes reaching outside the domain are kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum EscapePolicy {
    #[default]
    Keep,
    /// Only cubes contained in the domain.
    Interior,
}

/// A one-dimensional cube of the family, with its cell span.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FamilyCube {
    pub lattice_id: u32,
    pub level: u32,
    pub index: i64,
    pub span: Span,
}

impl FamilyCube {
    pub fn to_cube(&self) -> DyadicCube {
        DyadicCube {
            lattice_id: self.lattice_id,
            level: self.level,
            index: vec![self.index],
        }
    }

    pub fn is_shifted(&self) -> bool {
        self.lattice_id != 0
    }

    /// Cell span of `rQ` for integer-aligned dilations (`r` odd or level < L).
    pub fn dilated_span(&self, r: u32) -> Option<Span> {
        let len = self.span.len() * r as i64;
        let twice_center = self.span.lo + self.span.hi;
        if (twice_center - len) % 2 != 0 {
            return None;
        }
        Some(Span {
            lo: (twice_center - len) / 2,
            hi: (twice_center + len) / 2,
        })
    }
}

/// Enumerates the one-dimensional cube family, coarse levels first.
pub fn family_cubes(l: u32, scope: CubeScope, policy: EscapePolicy) -> Vec<FamilyCube> {
    let n = 1i64 << l;
    let mut out = Vec::new();
    for k in 0..=l {
        let s = 1i64 << (l - k);
        for i in 0..(1i64 << k) {
            out.push(FamilyCube {
                lattice_id: 0,
                level: k,
                index: i,
                span: Span {
                    lo: i * s,
                    hi: (i + 1) * s,
                },
            });
        }
        if scope == CubeScope::DyadicShifted {
            for i in 0..(1i64 << k) {
                let span = Span {
                    lo: (i - 1) * s,
                    hi: (i + 2) * s,
                };
                if policy == EscapePolicy::Interior && (span.lo < 0 || span.hi > n) {
                    continue;
                }
                let r = i.rem_euclid(3);
                let t = if k % 2 == 0 { r } else { (2 * r + 2).rem_euclid(3) };
                out.push(FamilyCube {
                    lattice_id: 1 + t as u32,
                    level: k,
                    index: i,
                    span,
                });
            }
        }
    }
    out
}

/// Dyadic pyramid of cell sums; gives the sum over any family cube in O(1).
#[derive(Debug, Clone)]
pub struct CubeSums {
    levels: Vec<Vec<f64>>,
}

impl CubeSums {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        assert!(n.is_power_of_two() && n >= 1);
        let l = n.trailing_zeros() as usize;
        let mut levels = vec![Vec::new(); l + 1];
        levels[l] = values.to_vec();
        for k in (0..l).rev() {
            let finer = &levels[k + 1];
            levels[k] = finer.chunks_exact(2).map(|p| p[0] + p[1]).collect();
        }
        Self { levels }
    }

    pub fn base(&self, level: u32, index: i64) -> f64 {
        let row = &self.levels[level as usize];
        if index < 0 || index >= row.len() as i64 {
            0.0
        } else {
            row[index as usize]
        }
    }

    pub fn sum(&self, q: &FamilyCube) -> f64 {
        if q.is_shifted() {
            self.base(q.level, q.index - 1) + self.base(q.level, q.index) + self.base(q.level, q.index + 1)
        } else {
            self.base(q.level, q.index)
        }
    }

    pub fn total(&self) -> f64 {
        self.levels[0][0]
    }

    /// Sum over cells `[lo, hi)` (clipped to the grid) by dyadic blocks.
    pub fn range(&self, lo: i64, hi: i64) -> f64 {
        let l = (self.levels.len() - 1) as u32;
        let (mut a, b) = (lo.max(0), hi.min(1i64 << l));
        let mut total = 0.0;
        while a < b {
            let mut k = if a == 0 { l } else { a.trailing_zeros().min(l) };
            while a + (1i64 << k) > b {
                k -= 1;
            }
            total += self.base(l - k, a >> k);
            a += 1i64 << k;
        }
        total
    }

    pub fn span(&self, s: &Span) -> f64 {
        self.range(s.lo, s.hi)
    }
}
