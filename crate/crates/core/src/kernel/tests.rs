use std::collections::HashMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::tilings::Partition;
use crate::walks::{transition_prob, WalkConfig};

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn cfg(v: &[i64]) -> WalkConfig {
    WalkConfig::new(v.to_vec()).unwrap()
}

fn pt(y: i64, t: i64) -> SpaceTimePoint {
    SpaceTimePoint::new(y, t)
}

// ---- oracles -------------------------------------------------------------

/// One step of the chain, by trying all 2^m jump patterns.
fn step_law(x: &[i64], qq: QParam) -> Vec<(Vec<i64>, f64)> {
    let m = x.len();
    let mut out = Vec::new();
    for mask in 0..(1u32 << m) {
        let y: Vec<i64> = (0..m).map(|i| x[i] - ((mask >> i) & 1) as i64).collect();
        if let Ok(yc) = WalkConfig::new(y.clone()) {
            let p = transition_prob(&cfg(x), &yc, qq);
            if p > 0.0 {
                out.push((y, p));
            }
        }
    }
    out
}

/// Law of the configuration at times 0..=t.
fn laws(x: &[i64], qq: QParam, t: usize) -> Vec<HashMap<Vec<i64>, f64>> {
    let mut all = vec![HashMap::from([(x.to_vec(), 1.0)])];
    for _ in 0..t {
        let mut next = HashMap::new();
        for (s, p) in all.last().unwrap() {
            for (y, pp) in step_law(s, qq) {
                *next.entry(y).or_insert(0.0) += p * pp;
            }
        }
        all.push(next);
    }
    all
}

/// Exact probability that all points are occupied, by propagating the joint
/// law forward in time and conditioning on each slice.
fn joint_occupation(x: &[i64], qq: QParam, points: &[SpaceTimePoint]) -> f64 {
    let tmax = points.iter().map(|p| p.t).max().unwrap_or(0) as usize;
    let mut dist: HashMap<Vec<i64>, f64> = HashMap::from([(x.to_vec(), 1.0)]);
    for t in 0..=tmax {
        dist.retain(|s, _| {
            points
                .iter()
                .filter(|p| p.t as usize == t)
                .all(|p| s.contains(&p.y))
        });
        if t == tmax {
            break;
        }
        let mut next = HashMap::new();
        for (s, p) in &dist {
            for (y, pp) in step_law(s, qq) {
                *next.entry(y).or_insert(0.0) += p * pp;
            }
        }
        dist = next;
    }
    dist.values().sum()
}

/// All interlacing arrays with top row λ, each as rows 1..=N, and their
/// weights q^{−(sum of entries below the top row)}.
fn arrays(lam: &[i64], qq: f64) -> Vec<(Vec<Vec<i64>>, f64)> {
    fn rec(rows: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
        let cur = rows[0].clone();
        if cur.len() == 1 {
            out.push(rows.clone());
            return;
        }
        let mut mu = vec![0i64; cur.len() - 1];
        fn fill(i: usize, cur: &[i64], mu: &mut Vec<i64>, rows: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) {
            if i == mu.len() {
                rows.insert(0, mu.clone());
                rec(rows, out);
                rows.remove(0);
                return;
            }
            for v in cur[i + 1]..=cur[i] {
                mu[i] = v;
                fill(i + 1, cur, mu, rows, out);
            }
        }
        fill(0, &cur, &mut mu, rows, out);
    }
    let mut out = Vec::new();
    rec(&mut vec![lam.to_vec()], &mut out);
    out.into_iter()
        .map(|rows| {
            let vol: i64 = rows[..rows.len() - 1].iter().flatten().sum();
            let w = qq.powi(-vol as i32);
            (rows, w)
        })
        .collect()
}

fn loz_occupation(lam: &[i64], qq: f64, points: &[LozengePoint]) -> f64 {
    let all = arrays(lam, qq);
    let z: f64 = all.iter().map(|(_, w)| w).sum();
    let hit: f64 = all
        .iter()
        .filter(|(rows, _)| {
            points.iter().all(|p| {
                let row = &rows[p.n as usize - 1];
                row.iter().enumerate().any(|(i, &v)| v - i as i64 - 1 == p.p)
            })
        })
        .map(|(_, w)| w)
        .sum();
    hit / z
}

fn det2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    a * d - b * c
}

// ---- contours ------------------------------------------------------------

#[test]
fn pole_bookkeeping_example() {
    let spec = classify_poles(&[3], pt(0, 0), pt(1, 1), q(0.5)).unwrap();
    assert!(spec.encloses_z(2));
    assert!(!spec.encloses_z(3), "cancelled by the x-product");
    assert!(spec.encloses_z(4) && spec.encloses_z(9));
    assert!(!spec.encloses_z(1) && !spec.encloses_z(0));
    assert_eq!(spec.z_excluded, vec![0, 1]);
    assert!((spec.r_z - 0.5f64.powf(1.5)).abs() < 1e-15);
    assert!(spec.r_w < 0.5f64.powi(3));
    assert!(spec.r_w < spec.r_z);
}

#[test]
fn domain_errors() {
    let x = cfg(&[2, 0]);
    let o = KernelOptions::default();
    assert!(matches!(kernel_walks(pt(0, 0), pt(0, 0), &x, q(0.5), &o), Err(Error::Domain(_))));
    assert!(matches!(kernel_walks(pt(0, -1), pt(0, 1), &x, q(0.5), &o), Err(Error::Domain(_))));
    let lam = Partition::zero(3);
    let bad = kernel_loz(LozengePoint::new(0, 1), LozengePoint::new(0, 3), &lam, q(0.5), &o);
    assert!(matches!(bad, Err(Error::Domain(_))));
}

#[test]
fn node_cap_is_reported() {
    let x = cfg(&[5, 3, 0]);
    let o = KernelOptions {
        tol: 1e-15,
        node_cap: 32,
        ..Default::default()
    };
    let r = kernel_walks(pt(2, 3), pt(2, 3), &x, q(0.9), &o);
    assert!(matches!(r, Err(Error::NonConvergence { .. })), "{r:?}");
}

// ---- walk kernel -----------------------------------------------------------

#[test]
fn one_point_function_matches_enumeration() {
    for (x, qv, tmax) in [(vec![3, 1], 0.5, 2usize), (vec![5, 3, 0], 0.6, 3)] {
        let qq = q(qv);
        let law = laws(&x, qq, tmax);
        for t in 1..=tmax {
            for y in 0..=x[0] {
                let exact: f64 = law[t]
                    .iter()
                    .filter(|(s, _)| s.contains(&y))
                    .map(|(_, p)| p)
                    .sum();
                for o in [KernelOptions::default(), KernelOptions::residue()] {
                    let k = kernel_walks(pt(y, t as i64), pt(y, t as i64), &cfg(&x), qq, &o).unwrap();
                    assert!((k.value.re - exact).abs() < 1e-9, "{x:?} y={y} t={t} {o:?}: {} vs {exact}", k.value);
                    assert!(k.value.im.abs() < 1e-8);
                }
            }
        }
    }
}

#[test]
fn particle_count() {
    let x = cfg(&[5, 3, 0]);
    let qq = q(0.6);
    for o in [KernelOptions::default(), KernelOptions::residue()] {
        for t in 1..=5 {
            let s: f64 = (0..=6)
                .map(|y| kernel_walks(pt(y, t), pt(y, t), &x, qq, &o).unwrap().value.re)
                .sum();
            assert!((s - 3.0).abs() < 1e-8, "t={t}: {s}");
        }
    }
}

#[test]
fn two_point_functions_match_enumeration() {
    let cases: Vec<(Vec<i64>, f64, Vec<SpaceTimePoint>)> = vec![
        (vec![3, 1], 0.5, vec![pt(3, 1), pt(1, 1)]),
        (vec![3, 1], 0.5, vec![pt(2, 1), pt(1, 2)]),
        (vec![3, 1], 0.5, vec![pt(0, 3), pt(2, 1)]),
        (vec![5, 3, 0], 0.6, vec![pt(4, 1), pt(2, 2), pt(0, 3)]),
        (vec![5, 3, 0], 0.6, vec![pt(3, 2), pt(3, 3)]),
    ];
    for (x, qv, pts) in cases {
        let exact = joint_occupation(&x, q(qv), &pts);
        for o in [KernelOptions::default(), KernelOptions::residue()] {
            let c = correlation_det(&pts, &cfg(&x), q(qv), &o).unwrap();
            assert!((c.value - exact).abs() < 1e-8, "{x:?} {pts:?}: {} vs {exact}", c.value);
            assert!(c.imag.abs() < 1e-8);
        }
    }
}

#[test]
fn correlation_edge_cases() {
    let x = cfg(&[3, 1]);
    let o = KernelOptions::default();
    assert_eq!(correlation_det(&[], &x, q(0.5), &o).unwrap().value, 1.0);
    let one = correlation_det(&[pt(2, 1)], &x, q(0.5), &o).unwrap().value;
    let k = kernel_walks(pt(2, 1), pt(2, 1), &x, q(0.5), &o).unwrap().value.re;
    assert_eq!(one, k);
    // t = 0 points come from the initial condition
    assert_eq!(correlation_det(&[pt(2, 0)], &x, q(0.5), &o).unwrap().value, 0.0);
    let with0 = correlation_det(&[pt(3, 0), pt(2, 1)], &x, q(0.5), &o).unwrap().value;
    assert_eq!(with0, one);
    assert!(correlation_det(&[pt(2, 1), pt(2, 1)], &x, q(0.5), &o).is_err());
}

#[test]
fn quadrature_agrees_with_residues() {
    let x = cfg(&[6, 4, 1]);
    let qq = q(0.7);
    let quad = KernelOptions::default();
    let res = KernelOptions::residue();
    for (a, b) in [
        (pt(3, 1), pt(2, 2)),
        (pt(2, 2), pt(3, 1)),
        (pt(0, 2), pt(4, 3)),
        (pt(5, 0), pt(1, 4)),
        (pt(1, 3), pt(1, 3)),
        (pt(4, 2), pt(0, 1)),
    ] {
        let u = kernel_walks(a, b, &x, qq, &quad).unwrap().value;
        let v = kernel_walks(a, b, &x, qq, &res).unwrap().value;
        let k = kernel_walks(a, b, &x, qq, &quad).unwrap();
        assert!((u - v).norm() < 1e-8 * v.norm().max(1.0), "{a:?} {b:?}: {u} vs {v}");
        assert!((u - v).norm() < 10.0 * k.est_error + 1e-12, "error estimate {} too small", k.est_error);
    }
}

#[test]
fn widely_separated_times_still_have_contours() {
    // the w-pole circle alone would not fit inside the z circle here
    let x = cfg(&[5, 3, 0]);
    let qq = q(0.6);
    for (a, b) in [(pt(1, 1), pt(4, 4)), (pt(2, 2), pt(4, 4)), (pt(0, 1), pt(5, 5))] {
        let spec = classify_poles(x.parts(), a, b, qq).unwrap();
        assert!(0.0 < spec.r_w && spec.r_w < spec.r_z);
        let u = kernel_walks(a, b, &x, qq, &KernelOptions::default()).unwrap().value;
        let v = kernel_walks(a, b, &x, qq, &KernelOptions::residue()).unwrap().value;
        assert!((u - v).norm() < 1e-8, "{a:?} {b:?}: {u} vs {v}");
    }
}

#[test]
fn radii_do_not_matter() {
    let x = cfg(&[5, 3, 0]);
    let qq = q(0.6);
    let o = KernelOptions::default();
    for (a, b) in [(pt(2, 2), pt(2, 2)), (pt(1, 1), pt(3, 2)), (pt(4, 3), pt(0, 1))] {
        let base = kernel_walks(a, b, &x, qq, &o).unwrap().value;
        for s in [(1.1, 1.0), (0.9, 1.0), (1.0, 1.1), (1.0, 0.9), (1.1, 0.9)] {
            let v = kernel_walks_stretched(a, b, &x, qq, &o, s).unwrap().value;
            assert!((v - base).norm() < 1e-9, "{a:?} {b:?} {s:?}");
        }
    }
}

#[test]
fn gauge_invariance() {
    let x = cfg(&[4, 2, 1]);
    let qq = q(0.55);
    let o = KernelOptions::default();
    let (a, b) = (pt(3, 1), pt(1, 2));
    let k = |u, v| kernel_walks(u, v, &x, qq, &o).unwrap().value;
    let f = |p: SpaceTimePoint| Complex64::new(1.7f64.powi(p.y as i32) * (0.3 + p.t as f64), 0.2);
    let plain = det2(k(a, a), k(a, b), k(b, a), k(b, b));
    let gauged = det2(k(a, a), k(a, b) * f(a) / f(b), k(b, a) * f(b) / f(a), k(b, b));
    assert!((plain - gauged).norm() < 1e-10);
}

// ---- limit kernel ----------------------------------------------------------

#[test]
fn complementation_identity() {
    let x = cfg(&[3, 1]);
    let qq = q(0.5);
    let o = KernelOptions::default();
    for (y1, t1, y2, t2) in [(1, 1, 1, 1), (2, 0, 0, 2), (0, 2, 2, 1), (1, 1, 0, 3)] {
        let kw = kernel_walks(pt(y1, t1), pt(y2, t2), &x, qq, &o).unwrap().value;
        let kl = kernel_loz_lim((y1 + t1, t1), (y2 + t2, t2), &x, qq, &o).unwrap().value;
        let same = if (y1, t1) == (y2, t2) { 1.0 } else { 0.0 };
        let gauge = qq.pow(t1 * (t1 + y1) - t2 * (t2 + y2));
        let rhs = same - kl * gauge;
        assert!((kw - rhs).norm() < 1e-10, "{kw} vs {rhs}");
        let klr = kernel_loz_lim((y1 + t1, t1), (y2 + t2, t2), &x, qq, &KernelOptions::residue())
            .unwrap()
            .value;
        assert!((kl - klr).norm() < 1e-9 * klr.norm().max(1.0));
    }
}

fn lam_for(x: &[i64], n: usize) -> Partition {
    let m = x.len() as i64;
    let mut s: Vec<i64> = (0..n as i64 + m).filter(|v| !x.contains(v)).collect();
    s.reverse();
    Partition::new((0..n).map(|i| s[i] + i as i64 + 1).collect()).unwrap()
}

#[test]
fn finite_n_kernel_converges_to_limit() {
    let x = cfg(&[3, 1]);
    let qq = q(0.5);
    let res = KernelOptions::residue();
    for (p1, t1, p2, t2) in [(2, 1, 2, 1), (3, 0, 2, 2), (1, 2, 3, 1)] {
        // quadrature on the limit side, residues on the finite side
        let lim = kernel_loz_lim((p1, t1), (p2, t2), &x, qq, &KernelOptions::default())
            .unwrap()
            .value
            .re;
        let mut errs = Vec::new();
        for n in [10usize, 20, 40] {
            let lam = lam_for(x.parts(), n);
            let a = LozengePoint::new(p1, n as i64 - t1);
            let b = LozengePoint::new(p2, n as i64 - t2);
            let v = kernel_loz_scaled(a, b, &lam, qq, n as i64 * (p2 - p1), &res).unwrap();
            errs.push((v.value.re - lim).abs());
        }
        assert!(errs[1] < errs[0] && errs[2] < errs[1], "{errs:?}");
        assert!(errs[2] < 1e-7, "{errs:?}");
    }
}

// ---- lozenge kernel --------------------------------------------------------

#[test]
fn frozen_tiling() {
    let n = 5usize;
    let lam = Partition::zero(n);
    for o in [KernelOptions::default(), KernelOptions::residue()] {
        for row in 1..n as i64 {
            for i in 1..=row {
                let p = LozengePoint::new(-i, row);
                let k = kernel_loz(p, p, &lam, q(0.6), &o).unwrap().value;
                assert!((k - 1.0).norm() < 1e-9, "row {row} i {i}: {k}");
            }
        }
    }
}

#[test]
fn lozenge_correlations_match_enumeration() {
    for (lam, qv) in [(vec![1, 0, 0], 0.7), (vec![2, 1, 0], 0.7), (vec![3, 1, 1, 0], 0.45)] {
        let n = lam.len() as i64;
        let part = Partition::new(lam.clone()).unwrap();
        let pts: Vec<LozengePoint> = (1..n)
            .flat_map(|r| (-r - 1..=lam[0]).map(move |p| LozengePoint::new(p, r)))
            .collect();
        for o in [KernelOptions::default(), KernelOptions::residue()] {
            let k = |a: LozengePoint, b: LozengePoint| kernel_loz(a, b, &part, q(qv), &o).unwrap().value;
            for &a in &pts {
                let exact = loz_occupation(&lam, qv, &[a]);
                assert!((k(a, a).re - exact).abs() < 1e-8, "{lam:?} {a:?}");
            }
            for (i, &a) in pts.iter().enumerate() {
                for &b in &pts[i + 1..] {
                    let exact = loz_occupation(&lam, qv, &[a, b]);
                    let d = det2(k(a, a), k(a, b), k(b, a), k(b, b));
                    assert!((d.re - exact).abs() < 1e-8, "{lam:?} {a:?} {b:?}: {} vs {exact}", d.re);
                }
            }
        }
    }
}

#[test]
fn lozenge_row_counts() {
    let lam = Partition::new(vec![4, 2, 2, 1, 0]).unwrap();
    let o = KernelOptions::default();
    for row in 1..5 {
        let s: f64 = (-row - 1..=4)
            .map(|p| {
                let a = LozengePoint::new(p, row);
                kernel_loz(a, a, &lam, q(0.8), &o).unwrap().value.re
            })
            .sum();
        assert!((s - row as f64).abs() < 1e-8, "row {row}: {s}");
    }
}

#[test]
fn lozenge_quadrature_matches_residues_at_moderate_n() {
    let x = [3, 1];
    let lam = lam_for(&x, 10);
    let qq = q(0.5);
    for (a, b) in [((2, 9), (2, 9)), ((3, 10), (2, 8)), ((1, 8), (3, 9))] {
        let (a, b) = (LozengePoint::new(a.0, a.1), LozengePoint::new(b.0, b.1));
        let u = kernel_loz(a, b, &lam, qq, &KernelOptions::default()).unwrap().value;
        let v = kernel_loz(a, b, &lam, qq, &KernelOptions::residue()).unwrap().value;
        assert!((u - v).norm() < 1e-8 * v.norm().max(1.0), "{a:?} {b:?}: {u} vs {v}");
    }
}

// ---- special functions -------------------------------------------------------

#[test]
fn gauss_qhyp_basics() {
    let qq = q(0.4);
    let z = Complex64::new(0.3, -1.2);
    assert_eq!(gauss_qhyp(1, 7, qq, z).unwrap(), Complex64::new(1.0, 0.0));
    assert!(gauss_qhyp(0, 7, qq, z).is_err());
    assert!(gauss_qhyp(8, 7, qq, z).is_err());
    // n1 = N: the ratio of Pochhammers is one and the sum is geometric
    let g = gauss_qhyp(5, 5, qq, z).unwrap();
    let geo = (Complex64::new(1.0, 0.0) - z.powi(5)) / (Complex64::new(1.0, 0.0) - z);
    assert!((g - geo).norm() < 1e-13);
}

#[test]
fn q_n_converges() {
    let qq = q(0.5);
    for th in [0.3, 2.0] {
        let w = Complex64::from_polar(0.01, th);
        let lim = q_n_limit(2, 1, qq, w).unwrap();
        let errs: Vec<f64> = [5usize, 10, 20, 40]
            .iter()
            .map(|&n| (q_n_function(n, 2, 1, qq, w).unwrap() - lim).norm())
            .collect();
        assert!(errs[0] > errs[1], "{errs:?}");
        assert!(errs[3] < 1e-10 * lim.norm(), "{errs:?}");
    }
}

#[test]
fn residue_identity() {
    let qq = q(0.5);
    assert!(residue_identity_check(2, 0, 1, 3, 8, qq) < 1e-12);
    assert_eq!(residue_identity_check(1, 2, 3, 3, 8, qq), 0.0);
    assert_eq!(residue_identity_check(1, 2, 4, 2, 8, qq), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let n = rng.gen_range(2..=12);
        let t1 = rng.gen_range(0..n);
        let t2 = rng.gen_range(1..n);
        let p1 = rng.gen_range(-4..=4);
        let p2 = rng.gen_range(-4..=4);
        let qq = q(rng.gen_range(0.1..0.9));
        let d = residue_identity_check(p1, p2, t1, t2, n, qq);
        assert!(d < 1e-10, "p1={p1} p2={p2} t1={t1} t2={t2} N={n}: {d}");
    }
}

