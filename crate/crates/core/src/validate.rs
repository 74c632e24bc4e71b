//! Cross-validation suites tying the exact formulas to enumeration, Monte
//! Carlo and each other. Shared by the command line and the acceptance run.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::asymptotics::{
    boundary_at_tau, bulk_limit_compare, complex_slope, double_root_certificate, frozen_boundary,
    incomplete_beta, incomplete_beta_via, liquid_membership, residue_at_zero, ClusterProfile, ComplexSlope,
};
use crate::error::Result;
use crate::kernel::{
    correlation_det, kernel_loz, kernel_loz_lim, kernel_loz_scaled, kernel_walks, residue_identity_check,
    KernelOptions, LozengePoint, SpaceTimePoint,
};
use crate::qcalc::QParam;
use crate::rng::stream;
use crate::tilings::{convergence_to_walks, encode_boundary, enumerate_arrays, Partition};
use crate::walks::{
    brute_force_gibbs_sum, eigen_residual, km_error, partition_function, sample_step, step_distribution, WalkConfig,
};

/// Outcome of one acceptance check.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidateOptions {
    pub mc_trajectories: usize,
    pub seed: u64,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        ValidateOptions {
            mc_trajectories: 1_000_000,
            seed: 20_240_601,
        }
    }
}

/// Suite names in criterion order.
pub const SUITES: [&str; 13] = [
    "stochasticity",
    "eigenfunction",
    "gibbs",
    "karlin-mcgregor",
    "monte-carlo",
    "lozenge-kernel",
    "kernel-convergence",
    "residue-identity",
    "particle-count",
    "bulk-limit",
    "frozen-boundary",
    "incomplete-beta",
    "tiling-convergence",
];

/// Runs one suite by name ("all" runs every suite).
pub fn run(suite: &str, opts: &ValidateOptions) -> Result<Vec<Check>> {
    if suite == "all" {
        let mut out = Vec::new();
        for s in SUITES {
            out.extend(run(s, opts)?);
        }
        return Ok(out);
    }
    let check = match suite {
        "stochasticity" => stochasticity()?,
        "eigenfunction" => eigenfunction(),
        "gibbs" => gibbs(),
        "karlin-mcgregor" => karlin_mcgregor()?,
        "monte-carlo" => monte_carlo(opts)?,
        "lozenge-kernel" => lozenge_kernel()?,
        "kernel-convergence" => kernel_convergence()?,
        "residue-identity" => residue_identity(),
        "particle-count" => particle_count()?,
        "bulk-limit" => bulk_limit()?,
        "frozen-boundary" => boundary()?,
        "incomplete-beta" => beta()?,
        "tiling-convergence" => tiling_convergence()?,
        other => {
            return Err(crate::Error::Domain(format!(
                "unknown suite '{other}'; expected one of {} or all",
                SUITES.join(", ")
            )))
        }
    };
    Ok(vec![check])
}

fn q(v: f64) -> QParam {
    QParam::new(v).expect("suite parameters are valid")
}

fn cfg(v: &[i64]) -> WalkConfig {
    WalkConfig::new(v.to_vec()).expect("suite configurations are valid")
}

fn id_of(name: &str) -> u32 {
    SUITES.iter().position(|s| *s == name).expect("known suite") as u32 + 1
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check {
        id: id_of(name),
        name,
        passed,
        detail,
    }
}

/// Every point of the chamber with m particles and x_1 ≤ top.
fn chamber(m: usize, top: i64) -> Vec<WalkConfig> {
    fn rec(m: usize, below: i64, cur: &mut Vec<i64>, out: &mut Vec<WalkConfig>) {
        if cur.len() == m {
            out.push(WalkConfig::new(cur.clone()).expect("strictly decreasing"));
            return;
        }
        let need = (m - cur.len() - 1) as i64;
        for v in (need..below).rev() {
            cur.push(v);
            rec(m, v, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, top + 1, &mut Vec::new(), &mut out);
    out
}

fn grid() -> Vec<(WalkConfig, f64)> {
    let mut g = Vec::new();
    for qv in [0.3, 0.6, 0.9] {
        for m in 1..=4 {
            g.extend(chamber(m, 8).into_iter().map(|x| (x, qv)));
        }
    }
    g
}

fn stochasticity() -> Result<Check> {
    let g = grid();
    let worst = g
        .par_iter()
        .map(|(x, qv)| {
            let d = step_distribution(x, q(*qv))?;
            Ok((d.support.iter().map(|(_, p)| p).sum::<f64>() - 1.0).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(check(
        "stochasticity",
        worst < 1e-12,
        format!("{} states, max |sum_y P(x,y) - 1| = {worst:.2e} (tol 1e-12)", g.len()),
    ))
}

fn eigenfunction() -> Check {
    let g = grid();
    let worst = g.par_iter().map(|(x, qv)| eigen_residual(x, q(*qv))).reduce(|| 0.0, f64::max);
    check(
        "eigenfunction",
        worst < 1e-12,
        format!("{} states, max residual = {worst:.2e} (tol 1e-12)", g.len()),
    )
}

fn gibbs() -> Check {
    let mut worst = 0.0f64;
    for x in [cfg(&[3, 1]), cfg(&[4, 2, 1])] {
        for qv in [0.4, 0.7] {
            let z = partition_function(&x, q(qv));
            let b = brute_force_gibbs_sum(&x, q(qv), 1e-14);
            worst = worst.max(((z - b) / z).abs());
        }
    }
    check(
        "gibbs",
        worst < 1e-10,
        format!("x in {{(3,1),(4,2,1)}}, q in {{0.4,0.7}}: max relative error = {worst:.2e} (tol 1e-10)"),
    )
}

fn karlin_mcgregor() -> Result<Check> {
    let qq = q(0.5);
    let pairs = [(cfg(&[3, 1]), cfg(&[2, 1])), (cfg(&[3, 1]), cfg(&[2, 0])), (cfg(&[4, 2, 1]), cfg(&[3, 2, 0])), (cfg(&[5, 3, 1]), cfg(&[5, 2, 1]))];
    let mut ok = true;
    let mut at500 = 0.0f64;
    let mut notes = Vec::new();
    for (x, y) in &pairs {
        let errs: Vec<f64> = [50, 100, 200, 400, 500]
            .iter()
            .map(|&t| km_error(x, y, t, qq))
            .collect::<Result<_>>()?;
        let mono = errs[..4].windows(2).all(|w| w[1] < w[0]);
        ok &= mono && errs[4] < 1e-6;
        at500 = at500.max(errs[4]);
        if !mono {
            notes.push(format!("not monotone for {:?}: {errs:?}", x.parts()));
        }
    }
    Ok(check(
        "karlin-mcgregor",
        ok,
        format!(
            "{} pairs (m=2,3), q=0.5: max error at T=500 = {at500:.2e} (tol 1e-6), monotone over T=50..400{}",
            pairs.len(),
            if notes.is_empty() { String::new() } else { format!("; {}", notes.join("; ")) }
        ),
    ))
}

fn pt(y: i64, t: i64) -> SpaceTimePoint {
    SpaceTimePoint::new(y, t)
}

/// Twenty point sets of size at most three with 1 ≤ t ≤ 4.
pub fn monte_carlo_point_sets() -> Vec<Vec<SpaceTimePoint>> {
    let raw: [&[(i64, i64)]; 20] = [
        &[(4, 1)],
        &[(3, 1)],
        &[(2, 2)],
        &[(1, 3)],
        &[(0, 4)],
        &[(3, 3)],
        &[(4, 1), (2, 1)],
        &[(5, 1), (3, 2)],
        &[(3, 2), (1, 2)],
        &[(2, 3), (0, 3)],
        &[(4, 1), (3, 2)],
        &[(1, 2), (0, 4)],
        &[(2, 2), (2, 3)],
        &[(3, 1), (1, 4)],
        &[(5, 1), (3, 1), (0, 1)],
        &[(4, 2), (2, 2), (0, 2)],
        &[(4, 1), (3, 2), (2, 3)],
        &[(2, 1), (1, 2), (0, 3)],
        &[(3, 3), (1, 3), (0, 4)],
        &[(4, 4), (1, 1), (2, 2)],
    ];
    raw.iter().map(|s| s.iter().map(|&(y, t)| pt(y, t)).collect()).collect()
}

/// Empirical frequencies of the point sets over `n` trajectories of length
/// `horizon`, one random stream per trajectory.
pub fn empirical_frequencies(
    x: &WalkConfig,
    qq: QParam,
    sets: &[Vec<SpaceTimePoint>],
    horizon: usize,
    n: usize,
    seed: u64,
) -> Vec<f64> {
    let counts = (0..n as u64)
        .into_par_iter()
        .fold(
            || vec![0u64; sets.len()],
            |mut acc, i| {
                let mut rng = stream(seed, i);
                let mut states = vec![x.clone()];
                for _ in 0..horizon {
                    let next = sample_step(states.last().expect("nonempty"), qq, &mut rng);
                    states.push(next);
                }
                for (k, set) in sets.iter().enumerate() {
                    if set.iter().all(|p| states[p.t as usize].contains(p.y)) {
                        acc[k] += 1;
                    }
                }
                acc
            },
        )
        .reduce(
            || vec![0u64; sets.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(u, v)| *u += v);
                a
            },
        );
    counts.into_iter().map(|c| c as f64 / n as f64).collect()
}

fn monte_carlo(opts: &ValidateOptions) -> Result<Check> {
    let x = cfg(&[5, 3, 0]);
    let qq = q(0.6);
    let sets = monte_carlo_point_sets();
    let n = opts.mc_trajectories;
    let ko = KernelOptions::default();
    let dets: Vec<f64> = sets
        .par_iter()
        .map(|s| correlation_det(s, &x, qq, &ko).map(|c| c.value))
        .collect::<Result<_>>()?;
    let freq = empirical_frequencies(&x, qq, &sets, 4, n, opts.seed);
    let mut worst = 0.0f64;
    let mut ok = true;
    for (p, f) in dets.iter().zip(&freq) {
        let sigma = (p.clamp(0.0, 1.0) * (1.0 - p.clamp(0.0, 1.0)) / n as f64).sqrt();
        let z = if sigma > 0.0 { (p - f).abs() / sigma } else { 0.0 };
        ok &= (p - f).abs() <= 4.0 * sigma + 1e-12;
        worst = worst.max(z);
    }
    Ok(check(
        "monte-carlo",
        ok,
        format!(
            "m=3, x=(5,3,0), q=0.6, {} point sets, {n} trajectories: max |det - freq| / sigma = {worst:.2} (limit 4)",
            sets.len()
        ),
    ))
}

fn lozenge_kernel() -> Result<Check> {
    let lam = Partition::new(vec![2, 1, 0]).expect("partition");
    let qq = q(0.7);
    let recs = enumerate_arrays(&lam, qq)?;
    let occupied = |rows: &[Partition], p: LozengePoint| rows[p.n as usize - 1].shifted().contains(&p.p);
    let exact = |pts: &[LozengePoint]| -> f64 {
        recs.iter().filter(|r| pts.iter().all(|&p| occupied(&r.array, p))).map(|r| r.prob).sum()
    };
    let pts: Vec<LozengePoint> = (1..3i64)
        .flat_map(|n| (-n - 1..=2).map(move |p| LozengePoint::new(p, n)))
        .collect();
    let mut worst = 0.0f64;
    let mut count = 0;
    for opts in [KernelOptions::default(), KernelOptions::residue()] {
        let k = |a, b| kernel_loz(a, b, &lam, qq, &opts).map(|v| v.value);
        for (i, &a) in pts.iter().enumerate() {
            let kaa = k(a, a)?;
            worst = worst.max((kaa.re - exact(&[a])).abs());
            count += 1;
            for &b in &pts[i + 1..] {
                let d = kaa * k(b, b)? - k(a, b)? * k(b, a)?;
                worst = worst.max((d.re - exact(&[a, b])).abs());
                count += 1;
            }
        }
    }
    Ok(check(
        "lozenge-kernel",
        worst < 1e-8,
        format!("N=3, lambda=(2,1,0), q=0.7: {count} one- and two-point values (quadrature and residues), max error vs enumeration = {worst:.2e} (tol 1e-8)"),
    ))
}

fn kernel_convergence() -> Result<Check> {
    let x = cfg(&[3, 1]);
    let qq = q(0.5);
    let ns = [10usize, 20, 40];
    let mut ok = true;
    let mut worst_ratio = 0.0f64;
    for (p1, t1, p2, t2) in [(2, 1, 2, 1), (3, 0, 2, 2), (1, 2, 3, 1), (4, 1, 2, 1)] {
        // quadrature on the limit side, residues on the finite side
        let lim = kernel_loz_lim((p1, t1), (p2, t2), &x, qq, &KernelOptions::default())?.value.re;
        let mut errs = Vec::new();
        for &n in &ns {
            let (lam, _) = encode_boundary(&x, &x, n)?;
            let a = LozengePoint::new(p1, n as i64 - t1);
            let b = LozengePoint::new(p2, n as i64 - t2);
            let v = kernel_loz_scaled(a, b, &lam, qq, n as i64 * (p2 - p1), &KernelOptions::residue())?;
            errs.push((v.value.re - lim).abs());
        }
        // least-squares slope of log error against N
        let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
        let ys: Vec<f64> = errs.iter().map(|e| e.max(1e-300).ln()).collect();
        let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
        let slope = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>()
            / xs.iter().map(|a| (a - mx).powi(2)).sum::<f64>();
        let ratio = slope.exp();
        ok &= ratio < 0.9 && errs.windows(2).all(|w| w[1] < w[0]);
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(check(
        "kernel-convergence",
        ok,
        format!("m=2, x=(3,1), q=0.5, N in {{10,20,40}}, 4 point pairs: errors decrease, largest fitted ratio per unit N = {worst_ratio:.3} (limit 0.9)"),
    ))
}

fn residue_identity() -> Check {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let n = rng.gen_range(2..=12);
        let t1 = rng.gen_range(0..n);
        let t2 = rng.gen_range(1..n);
        let p1 = rng.gen_range(-4..=4);
        let p2 = rng.gen_range(-4..=4);
        let qq = q(rng.gen_range(0.1..0.9));
        worst = worst.max(residue_identity_check(p1, p2, t1, t2, n, qq));
    }
    check(
        "residue-identity",
        worst < 1e-10,
        format!("100 random cases with N <= 12: max |extracted - closed form| = {worst:.2e} (tol 1e-10)"),
    )
}

fn particle_count() -> Result<Check> {
    let x = cfg(&[5, 3, 0]);
    let qq = q(0.6);
    let mut worst = 0.0f64;
    for t in 1..=5 {
        let mut s = 0.0;
        for y in 0..=5 {
            s += kernel_walks(pt(y, t), pt(y, t), &x, qq, &KernelOptions::default())?.value.re;
        }
        worst = worst.max((s - 3.0).abs());
    }
    Ok(check(
        "particle-count",
        worst < 1e-8,
        format!("m=3, x=(5,3,0), q=0.6, t=1..5: max |sum_y K(y,t;y,t) - 3| = {worst:.2e} (tol 1e-8)"),
    ))
}

fn bulk_limit() -> Result<Check> {
    let p = ClusterProfile::single(0.5, 1.0)?;
    let (tau, rho) = (0.7, 0.8);
    let offsets: Vec<(i64, i64)> = (-2..=2).flat_map(|a| (-2..=2).map(move |b| (a, b))).collect();
    let rows: Vec<_> = offsets
        .par_iter()
        .map(|&(dt, dp)| bulk_limit_compare(200, &p, tau, rho, dt, dp, 1e-12))
        .collect::<Result<_>>()?;
    let worst = rows.iter().map(|c| c.abs_err).fold(0.0, f64::max);
    let e50 = bulk_limit_compare(50, &p, tau, rho, 0, 0, 1e-12)?.abs_err;
    let e200 = rows[12].abs_err;
    Ok(check(
        "bulk-limit",
        worst < 0.05 && e200 < e50,
        format!(
            "L=1, C=0.5, gamma=1, (tau,rho)=(0.7,0.8), m=200: max error over |dt|,|dp| <= 2 = {worst:.4} (budget 0.05); (0,0) error {e50:.2e} at m=50 -> {e200:.2e} at m=200"
        ),
    ))
}

fn boundary() -> Result<Check> {
    let mut ok = true;
    let mut worst_cert = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut emitted = 0;
    let mut far_count = 0;
    for p in [ClusterProfile::new(vec![0.0, 0.1, 0.2, 0.6, 1.0], vec![0.05, 0.45, 0.8, 1.0], 1.0)?, ClusterProfile::single(0.5, 1.0)?] {
        let grid: Vec<f64> = (0..4000).map(|i| -5.0 + i as f64 * 0.0025 + 1e-7).collect();
        let pts = frozen_boundary(&p, &grid);
        emitted += pts.len();
        for pt in &pts {
            let (a, b) = double_root_certificate(pt, &p);
            worst_cert = worst_cert.max(a).max(b);
        }
        let mut fine: Vec<f64> = (0..=1400).map(|i| -(10f64).powf(-1.0 - i as f64 * 0.01)).collect();
        fine.extend((0..=1400).rev().map(|i| (10f64).powf(-1.0 - i as f64 * 0.01)));
        let far = boundary_at_tau(&p, 20.0, &fine);
        ok &= !far.is_empty();
        far_count += far.len();
        for pt in far {
            let (a, b) = double_root_certificate(&pt, &p);
            worst_cert = worst_cert.max(a).max(b);
            worst_gap = worst_gap.max((pt.rho - 1.0).abs());
        }
    }
    ok &= worst_cert < 1e-8 && worst_gap < 0.05;
    Ok(check(
        "frozen-boundary",
        ok,
        format!("{emitted} points (two profiles, gamma=1): max certificate = {worst_cert:.2e} (tol 1e-8); {far_count} points at tau=20 with max |rho - 1| = {worst_gap:.2e} (tol 0.05)"),
    ))
}

fn beta() -> Result<Check> {
    // slopes from the liquid region plus a few hand-picked ones
    let p = ClusterProfile::single(0.5, 1.0)?;
    let mut slopes: Vec<Complex64> = vec![Complex64::new(0.3, 0.5), Complex64::new(-2.0, 0.1), Complex64::new(4.0, 3.0)];
    for &(t, r) in &[(0.7, 0.8), (0.3, 0.6), (1.0, 0.9), (0.5, 0.3)] {
        if let Some(lp) = liquid_membership(t, r, &p)? {
            slopes.push(complex_slope(&lp, &p)?.omega);
        }
    }
    let (mut special, mut path, mut compl) = (0.0f64, 0.0f64, 0.0f64);
    for &om in &slopes {
        let s = ComplexSlope::new(om)?;
        special = special.max((incomplete_beta(s, 0, 0, 1e-14)?.re - om.arg() / PI).abs());
        special = special.max((incomplete_beta(s, 0, -1, 1e-14)?.re - om.im / PI).abs());
        for dt in -2..=2 {
            for dp in -2..=2 {
                let (a, b) = if dt >= 0 { (0.5, 0.3) } else { (-1.0, -3.0) };
                let u = incomplete_beta_via(om, dt, dp, a, 1e-14)?;
                let v = incomplete_beta_via(om, dt, dp, b, 1e-14)?;
                path = path.max((u - v).norm());
                if dt < 0 {
                    let right = incomplete_beta_via(om, dt, dp, 0.5, 1e-14)?;
                    compl = compl.max((right - u - residue_at_zero(dt, dp)).norm());
                }
            }
        }
    }
    Ok(check(
        "incomplete-beta",
        special < 1e-10 && path < 1e-12 && compl < 1e-10,
        format!(
            "{} slopes: special values {special:.2e} (tol 1e-10), path independence {path:.2e} (tol 1e-12), complement (0,1)-path = (-inf,0)-path + Res_0 {compl:.2e} (tol 1e-10)",
            slopes.len()
        ),
    ))
}

fn tiling_convergence() -> Result<Check> {
    let x = cfg(&[3, 1]);
    let mut ok = true;
    let mut at60 = 0.0f64;
    for y in [[2, 1], [3, 1], [2, 0], [3, 0]] {
        let errs = convergence_to_walks(&x, &cfg(&y), q(0.5), &[10, 20, 40, 60])?;
        ok &= errs.windows(2).all(|w| w[1] < w[0]) && errs[3] < 1e-3;
        at60 = at60.max(errs[3]);
    }
    Ok(check(
        "tiling-convergence",
        ok,
        format!("m=2, x=(3,1), q=0.5, four y: errors decrease over N=10,20,40,60, max at N=60 = {at60:.2e} (tol 1e-3)"),
    ))
}
