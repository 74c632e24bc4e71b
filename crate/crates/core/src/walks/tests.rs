use super::*;
use crate::rng::stream;
use proptest::prelude::*;
use std::collections::HashMap;

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

fn wc(v: &[i64]) -> WalkConfig {
    WalkConfig::new(v.to_vec()).unwrap()
}

/// Every configuration of 𝕎_m with x_1 ≤ top.
fn chamber(m: usize, top: i64) -> Vec<WalkConfig> {
    fn rec(m: usize, below: i64, cur: &mut Vec<i64>, out: &mut Vec<WalkConfig>) {
        if cur.len() == m {
            out.push(WalkConfig(cur.clone()));
            return;
        }
        let left = (m - cur.len() - 1) as i64;
        for v in left..below {
            cur.push(v);
            rec(m, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, top + 1, &mut Vec::new(), &mut out);
    out
}

/// Independent oracle: the displayed formula with raw powers of q.
fn transition_direct(x: &[i64], y: &[i64], qv: f64) -> f64 {
    let m = x.len();
    let mut p = 1.0;
    for i in 0..m {
        p *= if y[i] == x[i] {
            qv.powi(x[i] as i32)
        } else if y[i] == x[i] - 1 {
            1.0 - qv.powi(x[i] as i32)
        } else {
            return 0.0;
        };
    }
    let mut r = 1.0;
    for i in 0..m {
        for j in (i + 1)..m {
            r *= (qv.powi(y[j] as i32) - qv.powi(y[i] as i32))
                / (qv.powi(x[j] as i32) - qv.powi(x[i] as i32));
        }
    }
    let su: i64 = x.iter().sum::<i64>() - y.iter().sum::<i64>();
    let e = -((m * (m - 1) / 2) as i32) + (m as i32 - 1) * su as i32;
    qv.powi(e) * r * p
}

#[test]
fn single_walk_values() {
    assert_eq!(step_prob_single(0, 0, q(0.3)), 1.0);
    assert!((step_prob_single(2, 2, q(0.5)) - 0.25).abs() < 1e-16);
    assert_eq!(step_prob_single(2, 0, q(0.5)), 0.0);
    for x in 0..6 {
        assert!((multi_step_single(x, x, 1, q(0.4)) - 0.4f64.powi(x as i32)).abs() < 1e-15);
    }
    assert!((multi_step_single(1, 0, 2, q(0.5)) - 0.75).abs() < 1e-15);
    let s: f64 = (0..=3).map(|y| multi_step_single(3, y, 10, q(0.6))).sum();
    assert!((s - 1.0).abs() < 1e-14);
}

#[test]
fn t_step_kernel_matches_convolution() {
    let qq = q(0.65);
    for x in 0..7i64 {
        let mut dist = vec![0.0; (x + 1) as usize];
        dist[x as usize] = 1.0;
        for t in 1..12i64 {
            let mut nd = vec![0.0; (x + 1) as usize];
            for (s, &p) in dist.iter().enumerate() {
                let s = s as i64;
                nd[s as usize] += p * step_prob_single(s, s, qq);
                if s > 0 {
                    nd[(s - 1) as usize] += p * step_prob_single(s, s - 1, qq);
                }
            }
            dist = nd;
            for y in 0..=x {
                let v = multi_step_single(x, y, t, qq);
                assert!((v - dist[y as usize]).abs() < 1e-13, "x={x} y={y} t={t}");
            }
        }
    }
}

#[test]
fn q_exchangeability() {
    for &qv in &[0.2, 0.5, 0.9] {
        for x in 1..10 {
            let qq = q(qv);
            let l = step_prob_single(x, x, qq) * step_prob_single(x, x - 1, qq);
            let r = qv * step_prob_single(x, x - 1, qq) * step_prob_single(x - 1, x - 1, qq);
            assert!((l - r).abs() < 1e-15);
        }
    }
}

#[test]
fn transition_examples() {
    let qq = q(0.5);
    for x in 0..5 {
        for y in -1..6 {
            let a = transition_prob(&wc(&[x]), &WalkConfig(vec![y]), qq);
            assert!((a - step_prob_single(x, y, qq)).abs() < 1e-15);
        }
    }
    let x = wc(&[3, 1]);
    let total: f64 = admissible_targets(x.parts())
        .into_iter()
        .map(|y| transition_prob_raw(x.parts(), &y, qq))
        .sum();
    assert!((total - 1.0).abs() < 1e-14);
    for m in 1..6 {
        let d = WalkConfig::packed(m);
        assert!((transition_prob(&d, &d, q(0.7)) - 1.0).abs() < 1e-14);
    }
}

#[test]
fn stochasticity_and_eigenrelation_grid() {
    for &qv in &[0.3, 0.6, 0.9] {
        for m in 1..=4 {
            for x in chamber(m, 8) {
                let d = step_distribution(&x, q(qv)).unwrap();
                let s: f64 = d.support.iter().map(|(_, p)| p).sum();
                assert!((s - 1.0).abs() < 1e-12, "x={x:?} q={qv}");
                for (y, p) in &d.support {
                    let o = transition_direct(x.parts(), y.parts(), qv);
                    assert!((p - o).abs() < 1e-12 * (1.0 + o));
                }
                assert!(eigen_residual(&x, q(qv)) < 1e-12);
            }
        }
    }
}

#[test]
fn eigen_examples() {
    assert_eq!(eigen_residual(&wc(&[4]), q(0.3)), 0.0);
    assert!(eigen_residual(&wc(&[2, 0]), q(0.5)) < 1e-13);
    assert!(eigen_residual(&wc(&[7, 6, 3, 1]), q(0.7)) < 1e-12);
    assert_eq!(h_eigen(&wc(&[5]), q(0.4)), 1.0);
    assert!((h_eigen(&wc(&[1, 0]), q(0.5)) - 1.0).abs() < 1e-15);
}

#[test]
fn doob_structure() {
    let qv = 0.55;
    for x in chamber(3, 6) {
        let hx = h_eigen(&x, q(qv));
        for y in admissible_targets(x.parts()) {
            let y = WalkConfig(y);
            let lhs = transition_prob(&x, &y, q(qv)) * hx * qv.powi(3);
            let rhs = h_eigen(&y, q(qv)) * independent_prob(x.parts(), y.parts(), q(qv));
            assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }
}

proptest! {
    #[test]
    fn h_is_positive(a in 0i64..20, b in 1i64..5, c in 1i64..5, d in 1i64..5, qv in 0.05..0.95f64) {
        let x = wc(&[a + b + c + d, a + b + c, a + b, a]);
        prop_assert!(h_eigen(&x, q(qv)) > 0.0);
    }

    #[test]
    fn rows_sum_to_one(a in 0i64..30, b in 1i64..4, c in 1i64..4, qv in 0.05..0.98f64) {
        let x = wc(&[a + b + c, a + b, a]);
        let d = step_distribution(&x, q(qv)).unwrap();
        let s: f64 = d.support.iter().map(|(_, p)| p).sum();
        prop_assert!((s - 1.0).abs() < 1e-12);
    }
}

fn chi_square_against(x: &WalkConfig, qv: f64, draws: usize, sampler: StepSampler, seed: u64) -> (f64, usize) {
    let d = step_distribution(x, q(qv)).unwrap();
    let mut rng = stream(seed, 0);
    let mut counts: HashMap<WalkConfig, usize> = HashMap::new();
    for _ in 0..draws {
        let y = sample_step_with(x, q(qv), &mut rng, sampler).unwrap();
        *counts.entry(y).or_insert(0) += 1;
    }
    let mut chi = 0.0;
    for (y, p) in &d.support {
        let e = p * draws as f64;
        let o = *counts.get(y).unwrap_or(&0) as f64;
        chi += (o - e) * (o - e) / e;
    }
    assert_eq!(counts.len() <= d.support.len(), true, "sampler left the support");
    (chi, d.support.len() - 1)
}

#[test]
fn enumeration_sampler_frequencies() {
    let x = wc(&[3, 1]);
    let qq = q(0.5);
    let d = step_distribution(&x, qq).unwrap();
    let n = 100_000;
    let mut rng = stream(11, 0);
    let mut counts: HashMap<WalkConfig, usize> = HashMap::new();
    for _ in 0..n {
        *counts.entry(sample_step(&x, qq, &mut rng)).or_insert(0) += 1;
    }
    for (y, p) in &d.support {
        let f = *counts.get(y).unwrap_or(&0) as f64 / n as f64;
        let sigma = (p * (1.0 - p) / n as f64).sqrt();
        assert!((f - p).abs() < 4.0 * sigma, "{y:?}: {f} vs {p}");
    }
}

#[test]
fn coupled_sampler_matches_enumeration() {
    // 99.9% quantile of chi-square is below dof + 4.5 sqrt(2 dof) for these dof
    for (x, qv) in [
        (wc(&[9, 7, 4, 3, 1]), 0.8),
        (wc(&[6, 5, 4, 2, 0]), 0.6),
        (wc(&[12, 11, 10, 9, 8]), 0.9),
    ] {
        let (chi, dof) = chi_square_against(&x, qv, 60_000, StepSampler::Coupled, 5);
        let bound = dof as f64 + 4.5 * (2.0 * dof as f64).sqrt();
        assert!(chi < bound, "x={x:?}: chi2 {chi} with {dof} dof");
    }
}

#[test]
fn coupled_sampler_stays_admissible_at_large_m() {
    let m = 120;
    let x = WalkConfig((0..m as i64).rev().map(|i| 2 * i + (i % 3)).collect());
    let mut rng = stream(3, 1);
    let y = sample_step_with(&x, q((-1.0f64 / m as f64).exp()), &mut rng, StepSampler::Coupled).unwrap();
    assert!(WalkConfig::new(y.parts().to_vec()).is_ok());
    assert!(x.parts().iter().zip(y.parts()).all(|(a, b)| a - b == 0 || a - b == 1));
}

#[test]
fn trajectories() {
    let mut rng = stream(1, 0);
    let d = WalkConfig::packed(3);
    let t = sample_trajectory(&d, q(0.5), &mut rng, 1, STEP_CAP).unwrap();
    assert_eq!(t.absorption_time(), 0);
    for s in 0..200 {
        let mut rng = stream(2, s);
        let x = wc(&[7, 6, 3, 1]);
        let t = sample_trajectory(&x, q(0.6), &mut rng, 2, STEP_CAP).unwrap();
        assert!(t.absorption_time() as i64 >= 7 - 3);
        assert_eq!(t.states.last().unwrap(), &WalkConfig::packed(4));
        for w in t.states.windows(2) {
            assert!(w[0].parts().iter().zip(w[1].parts()).all(|(a, b)| a - b == 0 || a - b == 1));
        }
        assert!(t.states[..t.states.len() - 1].iter().all(|s| !s.is_packed()));
    }
    let mut rng = stream(9, 0);
    let n = 20_000;
    let mean = (0..n)
        .map(|_| sample_trajectory(&wc(&[1]), q(0.5), &mut rng, 9, STEP_CAP).unwrap().absorption_time() as f64)
        .sum::<f64>()
        / n as f64;
    // geometric with mean 2 and variance 2
    assert!((mean - 2.0).abs() < 4.0 * (2.0f64 / n as f64).sqrt());
}

#[test]
fn step_cap_is_reported() {
    let mut rng = stream(1, 0);
    let r = sample_trajectory(&wc(&[400, 0]), q(0.999), &mut rng, 1, 10);
    assert!(matches!(r, Err(Error::StepCap { cap: 10 })));
}

/// Every trajectory from x of length at most `len`.
fn all_trajectories(x: &WalkConfig, len: usize) -> Vec<Vec<WalkConfig>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![x.clone()]];
    while let Some(path) = stack.pop() {
        let last = path.last().unwrap();
        if last.is_packed() {
            out.push(path);
            continue;
        }
        if path.len() > len {
            continue;
        }
        for y in admissible_targets(last.parts()) {
            let mut p = path.clone();
            p.push(WalkConfig(y));
            stack.push(p);
        }
    }
    out
}

#[test]
fn volume_examples() {
    let x = wc(&[4, 2, 1]);
    let fast: Vec<WalkConfig> = (0..=2).map(|t| WalkConfig(fastest_at(x.parts(), t))).collect();
    assert_eq!(fast.last().unwrap(), &WalkConfig::packed(3));
    assert_eq!(volume_of(&fast), 0);
    for k in 0..6 {
        let mut states = vec![wc(&[1]); k + 1];
        states.push(wc(&[0]));
        assert_eq!(volume_of(&states), k as i64);
    }
}

#[test]
fn gibbs_law_on_every_trajectory() {
    for (x, qv) in [(wc(&[2, 0]), 0.5), (wc(&[3, 1]), 0.4), (wc(&[4, 2, 1]), 0.7)] {
        let z = partition_function(&x, q(qv));
        let trajs = all_trajectories(&x, 9);
        assert!(!trajs.is_empty());
        for tr in trajs {
            let p: f64 = tr
                .windows(2)
                .map(|w| transition_prob(&w[0], &w[1], q(qv)))
                .product();
            let v = volume_of(&tr);
            let w = qv.powi(v as i32);
            assert!((p * z - w).abs() < 1e-10 * w.max(1e-300), "{tr:?}");
        }
    }
}

#[test]
fn partition_function_values() {
    assert!((partition_function(&wc(&[1]), q(0.5)) - 2.0).abs() < 1e-15);
    assert!((partition_function(&wc(&[7, 4, 2]), q(1e-9)) - 1.0).abs() < 1e-7);
    for (x, qv) in [(wc(&[2, 0]), 0.5), (wc(&[3, 1]), 0.4), (wc(&[3, 1]), 0.7), (wc(&[4, 2, 1]), 0.4), (wc(&[4, 2, 1]), 0.7)] {
        let z = partition_function(&x, q(qv));
        let b = brute_force_gibbs_sum(&x, q(qv), 1e-14);
        assert!(((z - b) / z).abs() < 1e-10, "x={x:?}: {z} vs {b}");
    }
}

#[test]
fn km_examples() {
    let qq = q(0.5);
    let x = wc(&[3, 1]);
    let y = wc(&[2, 1]);
    let r = km_ratio(&x, &y, 200, qq).unwrap();
    let rhs = 0.5f64.powi(-1 + 1) * (0.5f64.powi(1) - 0.5f64.powi(2)) / (0.5f64.powi(1) - 0.5f64.powi(3));
    assert!((r - rhs).abs() < 1e-8);
    assert!((km_limit(&x, &y, qq) - rhs).abs() < 1e-15);
    let errs: Vec<f64> = [20, 40, 80, 160].iter().map(|&t| km_error(&x, &y, t, qq).unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    // m = 1: both determinants are hitting probabilities of 0
    let r1 = km_ratio(&wc(&[3]), &wc(&[2]), 30, qq).unwrap();
    let direct = multi_step_single(2, 0, 29, qq) / multi_step_single(3, 0, 30, qq);
    assert!((r1 - direct).abs() < 1e-14);
    assert!(matches!(km_ratio(&wc(&[5, 1]), &wc(&[4, 1]), 2, qq), Err(Error::Singular { .. })));
}

#[test]
fn exports() {
    let t = Trajectory { states: vec![wc(&[2, 0]), wc(&[1, 0])], seed: 4 };
    assert_eq!(trajectory_csv(&t), "t,i,y\n0,1,2\n0,2,0\n1,1,1\n1,2,0\n");
    assert_eq!(
        trajectory_json(&t, 0.5),
        "{\"m\":2,\"q\":0.5,\"x0\":[2,0],\"seed\":4,\"states\":[[2,0],[1,0]]}\n"
    );
}
