//! Maximal operators over the dyadic or dyadic-plus-shifted cube family:
//! Hardy–Littlewood, power, iterated, Orlicz, weighted dyadic, and the
//! multilinear variants.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::grid::{BoundaryMode, CubeScope, CubeSums, EscapePolicy, FamilyCube, GridFunction, family_cubes};
use crate::orlicz::{YoungFunction, luxemburg_with_total};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MaximalKind {
    HardyLittlewood,
    /// `M_r f = (M |f|^r)^{1/r}`
    Power(f64),
    /// `M` applied `k` times
    Iterated(u32),
    Orlicz(YoungFunction),
    /// `sup (1/w(Q)) ∫_Q |f| w`
    WeightedDyadic(GridFunction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaximalVariant {
    pub kind: MaximalKind,
    pub scope: CubeScope,
}

impl MaximalVariant {
    pub fn new(kind: MaximalKind) -> Self {
        Self {
            kind,
            scope: CubeScope::default(),
        }
    }

    pub fn with_scope(mut self, scope: CubeScope) -> Self {
        self.scope = scope;
        self
    }
}

/// Pointwise supremum over family cubes of a per-cube functional.
pub fn sup_over_cubes(
    l: u32,
    scope: CubeScope,
    policy: EscapePolicy,
    value: impl Fn(&FamilyCube) -> f64 + Sync,
) -> Vec<f64> {
    let n = 1usize << l;
    let cubes = family_cubes(l, scope, policy);
    let vals: Vec<f64> = cubes.par_iter().map(&value).collect();
    let mut out = vec![f64::NEG_INFINITY; n];
    for (q, v) in cubes.iter().zip(vals) {
        for c in q.span.cells(n) {
            if v > out[c] {
                out[c] = v;
            }
        }
    }
    out
}

fn cube_mean(sums: &CubeSums, q: &FamilyCube, n: usize, mode: BoundaryMode) -> f64 {
    let m = q.span.measure_cells(n, mode);
    if m == 0 {
        0.0
    } else {
        sums.sum(q) / m as f64
    }
}

/// Hardy–Littlewood maximal function in O(N log N) via the cube pyramid.
pub fn hardy_littlewood(f: &GridFunction, scope: CubeScope) -> GridFunction {
    let d = *f.domain();
    let n = d.n_cells();
    let l = d.resolution_log2;
    let abs: Vec<f64> = f.samples().iter().map(|v| v.abs()).collect();
    let sums = CubeSums::new(&abs);
    let mode = d.boundary_mode;
    let mut out = abs.clone();
    for c in 0..n as i64 {
        let mut best = out[c as usize];
        for k in 0..=l {
            let q = c >> (l - k);
            let s = 1i64 << (l - k);
            let base = FamilyCube {
                lattice_id: 0,
                level: k,
                index: q,
                span: crate::grid::Span { lo: q * s, hi: (q + 1) * s },
            };
            best = best.max(cube_mean(&sums, &base, n, mode));
            if scope == CubeScope::DyadicShifted {
                for j in [q - 1, q, q + 1] {
                    if j < 0 || j >= (1i64 << k) {
                        continue;
                    }
                    let t = FamilyCube {
                        lattice_id: 1,
                        level: k,
                        index: j,
                        span: crate::grid::Span { lo: (j - 1) * s, hi: (j + 2) * s },
                    };
                    best = best.max(cube_mean(&sums, &t, n, mode));
                }
            }
        }
        out[c as usize] = best;
    }
    GridFunction::new(d, out).expect("finite maximal function")
}

/// Luxemburg norm of `f` on a family cube under the domain's boundary mode.
pub fn cube_luxemburg(abs: &[f64], q: &FamilyCube, mode: BoundaryMode, phi: &YoungFunction) -> f64 {
    let n = abs.len();
    let r = q.span.cells(n);
    let total = q.span.measure_cells(n, mode) as f64;
    luxemburg_with_total(&abs[r], None, total, phi)
}

pub fn maximal(f: &GridFunction, v: &MaximalVariant) -> GridFunction {
    let d = *f.domain();
    let l = d.resolution_log2;
    let mode = d.boundary_mode;
    match &v.kind {
        MaximalKind::HardyLittlewood => hardy_littlewood(f, v.scope),
        MaximalKind::Power(r) => {
            let fr = f.map(|x| x.abs().powf(*r));
            hardy_littlewood(&fr, v.scope).map(|x| x.powf(1.0 / r))
        }
        MaximalKind::Iterated(k) => {
            let mut g = f.abs();
            for _ in 0..*k {
                g = hardy_littlewood(&g, v.scope);
            }
            g
        }
        MaximalKind::Orlicz(phi) => {
            let abs: Vec<f64> = f.samples().iter().map(|x| x.abs()).collect();
            let out = sup_over_cubes(l, v.scope, EscapePolicy::Keep, |q| cube_luxemburg(&abs, q, mode, phi));
            GridFunction::new(d, out).expect("finite")
        }
        MaximalKind::WeightedDyadic(w) => {
            let fw: Vec<f64> = f.samples().iter().zip(w.samples()).map(|(a, b)| a.abs() * b).collect();
            let num = CubeSums::new(&fw);
            let den = CubeSums::new(w.samples());
            let out = sup_over_cubes(l, v.scope, EscapePolicy::Keep, |q| {
                let wq = den.sum(q);
                if wq > 0.0 {
                    num.sum(q) / wq
                } else {
                    0.0
                }
            });
            GridFunction::new(d, out).expect("finite")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MultiFlavor {
    Plain,
    Power(f64),
    LLogL,
    /// `L log L` norms in the first `l` slots, plain averages after
    Mixed(usize),
}

/// `sup_{Q ∋ x}` of a product of per-slot cube functionals.
pub fn multilinear_maximal(fs: &[GridFunction], flavor: MultiFlavor, scope: CubeScope) -> GridFunction {
    assert!(!fs.is_empty());
    let d = *fs[0].domain();
    let n = d.n_cells();
    let l = d.resolution_log2;
    let mode = d.boundary_mode;
    let abs: Vec<Vec<f64>> = fs
        .iter()
        .map(|f| f.samples().iter().map(|x| x.abs()).collect())
        .collect();
    let llogl = YoungFunction::llogl(1.0);
    let power_sums: Vec<CubeSums> = abs
        .iter()
        .map(|a| match flavor {
            MultiFlavor::Power(r) => CubeSums::new(&a.iter().map(|x| x.powf(r)).collect::<Vec<_>>()),
            _ => CubeSums::new(a),
        })
        .collect();
    let out = sup_over_cubes(l, scope, EscapePolicy::Keep, |q| {
        let mut prod = 1.0;
        for (s, a) in abs.iter().enumerate() {
            let use_lux = match flavor {
                MultiFlavor::LLogL => true,
                MultiFlavor::Mixed(lim) => s < lim,
                _ => false,
            };
            let v = if use_lux {
                cube_luxemburg(a, q, mode, &llogl)
            } else {
                let m = cube_mean(&power_sums[s], q, n, mode);
                match flavor {
                    MultiFlavor::Power(r) => m.powf(1.0 / r),
                    _ => m,
                }
            };
            prod *= v;
            if prod == 0.0 {
                break;
            }
        }
        prod
    });
    GridFunction::new(d, out).expect("finite")
}

/// Smallest and largest pointwise ratio `a/b` over cells where `b > 0`.
pub fn ratio_bounds(a: &GridFunction, b: &GridFunction) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for (x, y) in a.samples().iter().zip(b.samples()) {
        if *y > 0.0 {
            let r = x / y;
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Domain, Interval};

    #[test]
    fn indicator_of_whole_domain() {
        let d = Domain::unit(8);
        let f = GridFunction::indicator(d, Interval::new(0.0, 1.0));
        let m = maximal(&f, &MaximalVariant::new(MaximalKind::HardyLittlewood));
        assert!(m.samples().iter().all(|&v| (v - 1.0).abs() < 1e-15));
        let m2 = maximal(&f, &MaximalVariant::new(MaximalKind::Iterated(2)));
        assert!(m2.samples().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn constants_are_fixed() {
        let d = Domain::unit(6).with_boundary(BoundaryMode::Clip);
        let f = GridFunction::constant(d, 2.5);
        for kind in [
            MaximalKind::HardyLittlewood,
            MaximalKind::Power(2.0),
            MaximalKind::Iterated(3),
        ] {
            let m = maximal(&f, &MaximalVariant::new(kind));
            assert!(m.samples().iter().all(|&v| (v - 2.5).abs() < 1e-12));
        }
        let phi = YoungFunction::llogl(1.0);
        let m = maximal(&f, &MaximalVariant::new(MaximalKind::Orlicz(phi.clone())));
        let expect = 2.5 / phi.inverse(1.0);
        assert!(m.samples().iter().all(|&v| (v - expect).abs() < 1e-9 * expect));
    }

    #[test]
    fn multilinear_of_ones() {
        let d = Domain::unit(5);
        let one = GridFunction::constant(d, 1.0);
        let m = multilinear_maximal(&[one.clone(), one], MultiFlavor::Plain, CubeScope::DyadicShifted);
        // zero-extended triples never beat the contained dyadic cube
        assert!(m.samples().iter().all(|&v| (v - 1.0).abs() < 1e-15));
    }
}
