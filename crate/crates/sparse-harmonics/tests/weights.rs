use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sparse_harmonics::grid::{CubeScope, Domain, GridFunction};
use sparse_harmonics::maximal::hardy_littlewood;
use sparse_harmonics::weights::*;

const L: u32 = 7;

/// Interior cubes as half-open cell ranges, listed without the library's enumerator.
fn brute_cubes(l: u32) -> Vec<(i64, i64)> {
    let n = 1i64 << l;
    let mut out = Vec::new();
    for k in 0..=l {
        let s = n >> k;
        for i in 0..(1i64 << k) {
            out.push((i * s, (i + 1) * s));
            let (a, b) = ((i - 1) * s, (i + 2) * s);
            if a >= 0 && b <= n {
                out.push((a, b));
            }
        }
    }
    out
}

fn mean(v: &[f64], a: i64, b: i64, f: impl Fn(f64) -> f64) -> f64 {
    v[a as usize..b as usize].iter().map(|&x| f(x)).sum::<f64>() / (b - a) as f64
}

fn brute_ap(v: &[f64], p: f64) -> f64 {
    brute_cubes(L)
        .iter()
        .map(|&(a, b)| {
            if p == 1.0 {
                let inf = v[a as usize..b as usize].iter().copied().fold(f64::INFINITY, f64::min);
                mean(v, a, b, |x| x) / inf
            } else {
                let pp = p / (p - 1.0);
                mean(v, a, b, |x| x) * mean(v, a, b, |x| x.powf(1.0 - pp)).powf(p - 1.0)
            }
        })
        .fold(0.0, f64::max)
}

/// `w` over `[lo, hi)` in cell units, partial cells weighted by overlap.
fn mass(v: &[f64], lo: f64, hi: f64) -> f64 {
    (0..v.len())
        .map(|c| {
            let ov = (hi.min(c as f64 + 1.0) - lo.max(c as f64)).max(0.0);
            ov * v[c]
        })
        .sum()
}

fn brute_ainfty(v: &[f64]) -> (f64, f64) {
    let cubes = brute_cubes(L);
    let n = v.len() as f64;
    let (mut fw, mut weak) = (0.0f64, 0.0f64);
    for &(a, b) in &cubes {
        let mut integral = 0.0;
        for x in a..b {
            let mut best = 0.0f64;
            for &(ra, rb) in &cubes {
                if ra <= x && x < rb {
                    let (lo, hi) = (a.max(ra), b.min(rb));
                    let wq: f64 = v[lo as usize..hi as usize].iter().sum();
                    best = best.max(wq / (rb - ra) as f64);
                }
            }
            integral += best;
        }
        let wq: f64 = v[a as usize..b as usize].iter().sum();
        fw = fw.max(integral / wq);
        let half = (b - a) as f64 / 2.0;
        let (lo, hi) = (a as f64 - half, b as f64 + half);
        if lo >= 0.0 && hi <= n {
            weak = weak.max(integral / mass(v, lo, hi));
        }
    }
    (fw, weak)
}

fn brute_multi(ws: &[&[f64]], ps: &[f64]) -> f64 {
    let p = 1.0 / ps.iter().map(|q| 1.0 / q).sum::<f64>();
    let n = ws[0].len();
    let nu: Vec<f64> = (0..n)
        .map(|i| ws.iter().zip(ps).map(|(w, pj)| w[i].powf(p / pj)).product())
        .collect();
    brute_cubes(L)
        .iter()
        .map(|&(a, b)| {
            let mut v = mean(&nu, a, b, |x| x);
            for (w, &pj) in ws.iter().zip(ps) {
                if pj == 1.0 {
                    let inf = w[a as usize..b as usize].iter().copied().fold(f64::INFINITY, f64::min);
                    v *= inf.powf(-p);
                } else {
                    let ppj = pj / (pj - 1.0);
                    v *= mean(w, a, b, |x| x.powf(1.0 - ppj)).powf(p / ppj);
                }
            }
            v
        })
        .fold(0.0, f64::max)
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1.0)
}

fn random_step(d: Domain, blocks: usize, seed: u64) -> GridFunction {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vals: Vec<f64> = (0..blocks).map(|_| rng.gen_range(0.2..5.0)).collect();
    WeightSpec::Step { values: vals }.sample(d).unwrap()
}

#[test]
fn bank_constants_match_brute_force() {
    let d = Domain::unit(L);
    for spec in default_bank() {
        let w = spec.sample(d).unwrap();
        for p in [1.0, 1.5, 2.0, 3.0] {
            let fast = ap_constant_of(&w, p, CubeScope::DyadicShifted).unwrap();
            let slow = brute_ap(w.samples(), p);
            assert!(close(fast, slow), "{} p={p}: {fast} vs {slow}", spec.name());
        }
        let (fw, weak) = ainfty_constants_of(&w, CubeScope::DyadicShifted).unwrap();
        let (bfw, bweak) = brute_ainfty(w.samples());
        assert!(close(fw, bfw), "{} fw: {fw} vs {bfw}", spec.name());
        assert!(close(weak, bweak), "{} weak: {weak} vs {bweak}", spec.name());
    }
}

#[test]
fn multi_ap_matches_brute_force() {
    let d = Domain::unit(L);
    let bank = default_bank();
    for (k, pair) in bank.windows(2).enumerate() {
        let w1 = pair[0].sample(d).unwrap();
        let w2 = pair[1].sample(d).unwrap();
        for ps in [[2.0, 2.0], [1.5, 3.0], [1.0, 2.0], [1.0, 1.0]] {
            let mw = MultiWeight::new(vec![w1.clone(), w2.clone()], ps.to_vec()).unwrap();
            let fast = multi_ap_constant(&mw, CubeScope::DyadicShifted);
            let slow = brute_multi(&[w1.samples(), w2.samples()], &ps);
            assert!(close(fast, slow), "pair {k} {ps:?}: {fast} vs {slow}");
        }
    }
}

// For p_j > 1, Hölder on each cube gives
//   [ν]_{A_{mp}} <= [w⃗]_{A_p⃗} <= [ν]_{A_{mp}} Π [σ_j]_{A_{m p_j'}}^{p/p_j'},  σ_j = w_j^{1-p_j'}.
#[test]
fn multi_ap_sandwiched_by_componentwise_constants() {
    let d = Domain::unit(L);
    for seed in 0..10u64 {
        let w1 = random_step(d, 8, seed);
        let w2 = random_step(d, 16, seed + 100);
        for ps in [[2.0, 2.0], [1.5, 3.0], [4.0, 1.25]] {
            let mw = MultiWeight::new(vec![w1.clone(), w2.clone()], ps.to_vec()).unwrap();
            let m = 2.0;
            let p = mw.p();
            let multi = multi_ap_constant(&mw, CubeScope::DyadicShifted);
            let nu = ap_constant_of(&mw.nu(), m * p, CubeScope::DyadicShifted).unwrap();
            let mut upper = nu;
            for (w, &pj) in [&w1, &w2].iter().zip(&ps) {
                let ppj = pj / (pj - 1.0);
                let sigma = w.map(|x| x.powf(1.0 - ppj));
                upper *= ap_constant_of(&sigma, m * ppj, CubeScope::DyadicShifted).unwrap().powf(p / ppj);
            }
            assert!(nu <= multi * (1.0 + 1e-12), "seed {seed} {ps:?}: {nu} > {multi}");
            assert!(multi <= upper * (1.0 + 1e-12), "seed {seed} {ps:?}: {multi} > {upper}");
        }
    }
}

#[test]
fn unit_and_exponential_weights() {
    let d = Domain::unit(10);
    let one = WeightSpec::One.weight(d).unwrap();
    assert_eq!(one.ap(2.0).unwrap(), 1.0);
    assert_eq!(one.a1(), 1.0);
    assert_eq!(one.ainfty(), (1.0, 0.5));
    let e = WeightSpec::Exp { c: 1.0 }.weight(d).unwrap();
    assert!(e.ainfty_weak() < 1.0);
}

#[test]
fn reverse_holder_holds_on_bank() {
    let d = Domain::unit(10);
    let dc = DimensionalConstants::default();
    for spec in default_bank() {
        let rep = reverse_holder_check(&spec.weight(d).unwrap(), &dc);
        assert_eq!(rep.violations, 0, "{}: {rep:?}", spec.name());
        assert!(rep.cubes_checked > 0);
    }
    let w = WeightSpec::Power { a: -0.25, x0: 0.5 }.weight(d).unwrap();
    let dc2 = DimensionalConstants { tau_n: 2.0, ..dc };
    assert_eq!(reverse_holder_check(&w, &dc2).violations, 0);
}

#[test]
fn s_u_matches_cube_sweep() {
    let d = Domain::unit(6);
    let u = WeightSpec::Step { values: vec![1.0, 4.0, 0.5, 2.0] }.weight(d).unwrap();
    let f = GridFunction::from_fn(d, |x| if x < 0.25 { 1.0 } else { 0.0 });
    let got = s_u(&f, &u);
    let fu: Vec<f64> = f.samples().iter().zip(u.function().samples()).map(|(a, b)| a * b).collect();
    let n = d.n_cells() as i64;
    // maximal function over the whole family, escaping triples averaged with zero extension
    for x in 0..n {
        let mut best = 0.0f64;
        for k in 0..=6u32 {
            let s = n >> k;
            for i in 0..(1i64 << k) {
                for (a, b) in [(i * s, (i + 1) * s), ((i - 1) * s, (i + 2) * s)] {
                    if a <= x && x < b {
                        let sum: f64 = (a.max(0)..b.min(n)).map(|c| fu[c as usize]).sum();
                        best = best.max(sum / (b - a) as f64);
                    }
                }
            }
        }
        let want = best / u.function().samples()[x as usize];
        assert!((got.samples()[x as usize] - want).abs() < 1e-12 * want.max(1.0));
    }
    let one = GridFunction::constant(d, 1.0);
    assert!(s_u(&one, &u).samples().iter().all(|&v| v >= 1.0 - 1e-12));
}

#[test]
fn rubio_de_francia_properties() {
    let d = Domain::unit(9);
    for (k, spec) in default_bank().iter().enumerate() {
        let u = spec.weight(d).unwrap();
        let h = random_step(d, 32, k as u64);
        // ||S_u||_∞ <= [u]_{A_1} on the interior family
        let k0 = u.a1().max(1.0) * 1.5;
        let r = rubio_de_francia(&h, &u, k0, 60).unwrap();
        assert!(r.tail < 1e-8, "{}: tail {}", spec.name(), r.tail);
        for (a, b) in h.samples().iter().zip(r.rh.samples()) {
            assert!(a <= b);
        }
        let su = s_u(&r.rh, &u);
        for (s, v) in su.samples().iter().zip(r.rh.samples()) {
            assert!(*s <= 2.0 * k0 * v * (1.0 + 1e-6), "{}", spec.name());
        }
        let a1 = ap_constant_of(&r.rh.zip_with(u.function(), |a, b| a * b), 1.0, u.scope()).unwrap();
        assert!(a1 <= 2.0 * k0 * (1.0 + 1e-6), "{}: {a1}", spec.name());
        assert!(r.rh.max_abs() <= 2.0 * h.max_abs() * (1.0 + 1e-9));
    }
}

#[test]
fn rubio_de_francia_fixture_and_divergence() {
    let d = Domain::unit(8);
    let u = WeightSpec::One.weight(d).unwrap();
    let h = GridFunction::from_fn(d, |x| if x < 0.5 { 1.0 } else { 0.0 });
    let r = rubio_de_francia(&h, &u, 10.0, 20).unwrap();
    assert!(r.rh.samples().iter().zip(h.samples()).all(|(a, b)| a >= b));
    let m = hardy_littlewood(&h, u.scope());
    assert!(r.rh.samples()[0] >= 1.0 + m.samples()[0] / 20.0 - 1e-12);
    // a K0 far below the operator norm must be rejected
    let spike = WeightSpec::Spike { height: 1e4, x0: 0.3 }.weight(d).unwrap();
    assert!(matches!(
        rubio_de_francia(&GridFunction::constant(d, 1.0), &spike, 0.01, 20),
        Err(WeightError::Divergent { .. })
    ));
}

#[test]
fn k0_p0_arithmetic() {
    let dc = DimensionalConstants::default();
    let c = k0_p0(2.0, 1.0, 1.0, 1, &dc);
    assert_eq!(c.p0, 17.0);
    assert!((c.p0_prime - 17.0 / 16.0).abs() < 1e-15);
    // 4·17·(17/16)·(1 + 2^16) + 1
    let want = 4.0 * 17.0 * (17.0 / 16.0) * (1.0 + 65536.0) + 1.0;
    assert!((c.k0 / want - 1.0).abs() < 1e-12);
    let near = k0_p0(1.0 + 1e-9, 1.0, 1.0, 1, &dc);
    assert!(near.p0 > 1.0 && near.k0.is_finite());
    let r = k0_p0_ap(1.5, 2.0, 3.0, &dc);
    // p̃0 = 16·½·2 + 1 = 17, K̃0 = 17·(17/16)·2^16·3^2·2^17
    assert_eq!(r.p0, 17.0);
    let want = 17.0 * (17.0 / 16.0) * 65536.0 * 9.0 * 131072.0;
    assert!((r.k0 / want - 1.0).abs() < 1e-12, "{} {want}", r.k0);
}

#[test]
fn lemma51_examples() {
    let d = Domain::unit(8);
    let dc = DimensionalConstants::default();
    for seed in 0..4 {
        let u = Weight::new(random_step(d, 4, seed)).unwrap();
        let v = Weight::new(random_step(d, 8, seed + 7)).unwrap();
        let cap = 1.0 / (8.0 * u.a1());
        let rep = lemma51_check(&u, &v, 2.0, 0.9 * cap, &dc).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!(lemma51_check(&u, &v, 2.0, 1.01 * cap, &dc).is_err());
    }
    let one = WeightSpec::One.weight(d).unwrap();
    let v = WeightSpec::Power { a: -0.5, x0: 0.5 }.weight(d).unwrap();
    assert!(lemma51_check(&one, &v, 3.0, 0.1, &dc).unwrap().holds);
}

#[test]
fn constants_csv_header() {
    let rows = constants_table(&default_bank()[..2], &[2.0], Domain::unit(6)).unwrap();
    let mut buf = Vec::new();
    write_constants_csv(&rows, &mut buf).unwrap();
    let s = String::from_utf8(buf).unwrap();
    assert!(s.starts_with("weight,p,ap,a1,ainfty_fw,ainfty_weak\n"));
    assert_eq!(s.lines().count(), 3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn constant_floors_and_orderings(seed in 0u64..10_000, blocks in 1usize..5) {
        let d = Domain::unit(7);
        let w = Weight::new(random_step(d, 1 << blocks, seed)).unwrap();
        let (fw, weak) = w.ainfty();
        prop_assert!(fw >= 1.0 - 1e-12);
        prop_assert!(weak >= 0.5 - 1e-12);
        prop_assert!(fw >= weak);
        let mut prev = w.a1();
        for p in [1.5, 2.0, 3.0, 6.0] {
            let a = w.ap(p).unwrap();
            prop_assert!(a >= 1.0 - 1e-12);
            prop_assert!(a <= prev * (1.0 + 1e-12));
            prev = a;
        }
    }

    #[test]
    fn ap_is_scale_invariant(seed in 0u64..10_000, c in 0.01f64..100.0) {
        let d = Domain::unit(6);
        let w = random_step(d, 8, seed);
        let a = ap_constant_of(&w, 2.5, CubeScope::Dyadic).unwrap();
        let b = ap_constant_of(&w.scale(c), 2.5, CubeScope::Dyadic).unwrap();
        prop_assert!((a - b).abs() < 1e-12 * a);
    }
}
