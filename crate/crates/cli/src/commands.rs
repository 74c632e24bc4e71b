use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use qwalks::asymptotics::{boundary_csv, frozen_boundary, realize_initial_config, scan_csv, scan_liquid, ClusterProfile};
use qwalks::format::sig12;
use qwalks::kernel::{
    correlation_det, kernel_loz, kernel_loz_lim, kernel_walks, KernelMethod, KernelOptions, KernelValue, LozengePoint,
    SpaceTimePoint,
};
use qwalks::rng::stream;
use qwalks::tilings::{cond_prob_top_row, encode_boundary, enumerate_arrays, tilings_json, Partition};
use qwalks::validate::{self, ValidateOptions};
use qwalks::walks::{sample_trajectory, trajectory_csv, trajectory_json, transition_prob, Trajectory, WalkConfig, STEP_CAP};
use qwalks::QParam;

use crate::config::RunConfig;
use crate::plot::{boundary_branches, boundary_svg, bounding_polygon, Window};
use crate::{write_output, BoundaryArgs, CliError, KernelArgs, KernelKind, Method, SimulateArgs, TilingsArgs, ValidateArgs};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_SCALING_SEEDS: usize = 100;

/// Default clustered profile for the asymptotic commands.
pub const DEFAULT_BREAKPOINTS: [f64; 5] = [0.0, 0.1, 0.2, 0.6, 1.0];
pub const DEFAULT_OFFSETS: [f64; 4] = [0.05, 0.45, 0.8, 1.0];

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_output(&p.to_path_buf(), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn in_dir(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

// ---- simulate ---------------------------------------------------------------

#[derive(Debug, Serialize)]
struct AbsorptionSummary {
    m: usize,
    q: f64,
    x0: WalkConfig,
    seed: u64,
    count: usize,
    mean: f64,
    std: f64,
    min: usize,
    q25: f64,
    median: f64,
    q75: f64,
    max: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[usize], p: f64) -> f64 {
    let h = p * (sorted.len() - 1) as f64;
    let (lo, hi) = (h.floor() as usize, h.ceil() as usize);
    sorted[lo] as f64 + (h - lo as f64) * (sorted[hi] as f64 - sorted[lo] as f64)
}

fn summarize(x: &WalkConfig, q: QParam, seed: u64, times: &[usize]) -> AbsorptionSummary {
    let n = times.len() as f64;
    let mean = times.iter().sum::<usize>() as f64 / n;
    let var = times.iter().map(|&t| (t as f64 - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    let mut s = times.to_vec();
    s.sort_unstable();
    AbsorptionSummary {
        m: x.m(),
        q: q.value(),
        x0: x.clone(),
        seed,
        count: times.len(),
        mean,
        std: var.sqrt(),
        min: s[0],
        q25: quantile(&s, 0.25),
        median: quantile(&s, 0.5),
        q75: quantile(&s, 0.75),
        max: s[s.len() - 1],
    }
}

/// Absorption times of `count` trajectories, stream i for trajectory i, and
/// the first `keep` trajectories in full.
fn run_many(
    x: &WalkConfig,
    q: QParam,
    seed: u64,
    count: usize,
    cap: usize,
    keep: usize,
) -> Result<(Vec<usize>, Vec<Trajectory>), CliError> {
    let runs: Vec<(usize, Option<Trajectory>)> = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let traj = sample_trajectory(x, q, &mut stream(seed, i), seed, cap)?;
            let t = traj.absorption_time();
            Ok((t, ((i as usize) < keep).then_some(traj)))
        })
        .collect::<Result<_, qwalks::Error>>()?;
    let mut kept = Vec::new();
    let times = runs
        .into_iter()
        .map(|(t, tr)| {
            kept.extend(tr);
            t
        })
        .collect();
    Ok((times, kept))
}

fn initial_config(cfg: &RunConfig, a: &SimulateArgs) -> Result<WalkConfig, CliError> {
    if let Some(x) = cfg.x(&a.x) {
        let x = WalkConfig::new(x)?;
        if let Some(m) = cfg.m.filter(|&m| m != x.m()) {
            return Err(CliError::Config(format!("--m {m} disagrees with {} entries of --x", x.m())));
        }
        return Ok(x);
    }
    let m = cfg.m.ok_or_else(|| CliError::Config("give --x, or --m with a cluster profile".into()))?;
    let p = cfg.profile(&a.breakpoints, &a.offsets, 1.0, (&[0.0, 1.0], &[0.0]))?;
    Ok(realize_initial_config(&p, m)?)
}

pub fn simulate(cfg: &RunConfig, a: &SimulateArgs) -> Result<(), CliError> {
    if a.scaling {
        return scaling(cfg, a);
    }
    let x = initial_config(cfg, a)?;
    let q = cfg.walk_q(x.m())?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let count = a.seeds.or(cfg.file.seeds).unwrap_or(1);
    if count == 0 {
        return Err(CliError::Config("--seeds must be at least 1".into()));
    }
    let cap = a.cap.or(cfg.file.cap).unwrap_or(STEP_CAP);
    let (times, kept) = run_many(&x, q, seed, count, cap, a.keep)?;
    let summary = serde_json::to_string_pretty(&summarize(&x, q, seed, &times)).expect("serializable") + "\n";
    if let Some(dir) = &cfg.out {
        for (i, tr) in kept.iter().enumerate() {
            write_output(&in_dir(dir, &format!("trajectory_{i}.csv")), &trajectory_csv(tr))?;
            write_output(&in_dir(dir, &format!("trajectory_{i}.json")), &trajectory_json(tr, q.value()))?;
        }
        let mut csv = String::from("index,t_abs\n");
        for (i, t) in times.iter().enumerate() {
            csv.push_str(&format!("{i},{t}\n"));
        }
        write_output(&in_dir(dir, "absorption.csv"), &csv)?;
        write_output(&in_dir(dir, "summary.json"), &summary)?;
    }
    print!("{summary}");
    Ok(())
}

/// Mean absorption time against m for the realized cluster profile at
/// q = e^{−γ/m}; a measurement, not a test.
fn scaling(cfg: &RunConfig, a: &SimulateArgs) -> Result<(), CliError> {
    let gamma = cfg.gamma(1.0)?;
    let p = cfg.profile(&a.breakpoints, &a.offsets, gamma, (&[0.0, 1.0], &[0.5]))?;
    let seed = cfg.seed.unwrap_or(DEFAULT_SEED);
    let count = a.seeds.or(cfg.file.seeds).unwrap_or(DEFAULT_SCALING_SEEDS);
    let cap = a.cap.or(cfg.file.cap).unwrap_or(STEP_CAP);
    let mut csv = String::from("m,log_m,seeds,mean_t_abs,t_abs_over_m,t_abs_over_m_log_m\n");
    for &m in &a.ms {
        let x = realize_initial_config(&p, m)?;
        let q = QParam::new((-gamma / m as f64).exp())?;
        let (times, _) = run_many(&x, q, seed, count, cap, 0)?;
        let mean = times.iter().sum::<usize>() as f64 / count as f64;
        let (mf, lm) = (m as f64, (m as f64).ln());
        csv.push_str(&format!(
            "{m},{},{count},{},{},{}\n",
            sig12(lm),
            sig12(mean),
            sig12(mean / mf),
            sig12(mean / (mf * lm))
        ));
    }
    if let Some(dir) = &cfg.out {
        write_output(&in_dir(dir, "scaling.csv"), &csv)?;
    }
    print!("{csv}");
    Ok(())
}

// ---- kernel -----------------------------------------------------------------

pub fn kernel(cfg: &RunConfig, a: &KernelArgs) -> Result<(), CliError> {
    let mut opts = KernelOptions {
        method: match a.method {
            Method::Quadrature => KernelMethod::Quadrature,
            Method::Residue => KernelMethod::Residue,
        },
        ..Default::default()
    };
    if let Some(t) = cfg.tol {
        opts.tol = t;
    }
    let pts = &a.points;
    let n = pts.len();
    let (q, entry): (QParam, Box<dyn Fn((i64, i64), (i64, i64)) -> qwalks::Result<KernelValue> + Sync>) = match a.kind {
        KernelKind::Walks | KernelKind::Limit => {
            let x = WalkConfig::new(cfg.x(&a.x).ok_or_else(|| CliError::Config("--x is required".into()))?)?;
            let q = cfg.walk_q(x.m())?;
            if a.kind == KernelKind::Walks {
                (q, Box::new(move |u, v| kernel_walks(SpaceTimePoint::new(u.0, u.1), SpaceTimePoint::new(v.0, v.1), &x, q, &opts)))
            } else {
                (q, Box::new(move |u, v| kernel_loz_lim(u, v, &x, q, &opts)))
            }
        }
        KernelKind::Lozenge => {
            let lam = Partition::new(a.lambda.clone().ok_or_else(|| CliError::Config("--lambda is required".into()))?)?;
            let q = cfg.walk_q(lam.len())?;
            (q, Box::new(move |u, v| kernel_loz(LozengePoint::new(u.0, u.1), LozengePoint::new(v.0, v.1), &lam, q, &opts)))
        }
    };
    let entries: Vec<KernelValue> = (0..n * n)
        .into_par_iter()
        .map(|k| entry(pts[k / n], pts[k % n]))
        .collect::<Result<_, _>>()?;
    let matrix: Vec<Vec<KernelValue>> = entries.chunks(n).map(|r| r.to_vec()).collect();
    let determinant = if a.kind == KernelKind::Walks {
        let x = WalkConfig::new(cfg.x(&a.x).expect("checked above"))?;
        let live: Vec<SpaceTimePoint> = pts.iter().map(|&(y, t)| SpaceTimePoint::new(y, t)).collect();
        let c = correlation_det(&live, &x, q, &opts)?;
        json!({ "re": c.value, "im": c.imag, "est_error": c.est_error })
    } else {
        let rows = matrix.iter().map(|r| r.iter().map(|v| v.value).collect()).collect();
        let d = qwalks::linalg::det(rows, Complex64::new(1.0, 0.0));
        json!({ "re": d.re, "im": d.im })
    };
    let doc = json!({
        "kind": format!("{:?}", a.kind).to_lowercase(),
        "q": q.value(),
        "points": pts,
        "kernel": matrix,
        "determinant": determinant,
    });
    emit(cfg.out.as_deref(), &(serde_json::to_string_pretty(&doc).expect("serializable") + "\n"))
}

// ---- boundary ---------------------------------------------------------------

/// A uniform grid on [−w_max, w_max] with logarithmic refinement towards 0
/// (where τ → ∞) and out to large |w|.
fn w_grid(n: usize, w_max: f64) -> Vec<f64> {
    let mut g: Vec<f64> = (0..n)
        .map(|i| -w_max + 2.0 * w_max * (i as f64 + 0.5) / n as f64)
        .collect();
    for i in 0..=600 {
        let small = 10f64.powf(-1.0 - 11.0 * i as f64 / 600.0);
        let large = w_max * 10f64.powf(5.0 * i as f64 / 600.0);
        g.extend([small, -small, large, -large]);
    }
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

pub fn boundary(cfg: &RunConfig, a: &BoundaryArgs) -> Result<(), CliError> {
    let gamma = cfg.gamma(1.0)?;
    let profile: ClusterProfile = cfg.profile(&a.breakpoints, &a.offsets, gamma, (&DEFAULT_BREAKPOINTS, &DEFAULT_OFFSETS))?;
    if !(a.tau_max > 0.0 && a.w_max > 0.0) || a.w_points < 2 {
        return Err(CliError::Config("need --tau-max > 0, --w-max > 0 and --w-points >= 2".into()));
    }
    let grid = w_grid(a.w_points, a.w_max);
    let points = frozen_boundary(&profile, &grid);
    let csv = boundary_csv(&points);
    let Some(dir) = &cfg.out else {
        print!("{csv}");
        return Ok(());
    };
    let top = profile.breakpoints()[profile.clusters()] + profile.offsets()[profile.clusters() - 1];
    let window = Window {
        tau_max: a.tau_max,
        rho_min: 0.0,
        rho_max: top * 1.05,
    };
    let mut liquid = Vec::new();
    if a.scan > 0 {
        let taus: Vec<f64> = (1..=a.scan).map(|i| a.tau_max * i as f64 / a.scan as f64).collect();
        let rhos: Vec<f64> = (1..=a.scan).map(|i| window.rho_max * i as f64 / (a.scan + 1) as f64).collect();
        let rows = scan_liquid(&profile, &taus, &rhos)?;
        liquid = rows.iter().filter(|r| r.liquid.is_some()).map(|r| (r.tau, r.rho)).collect();
        write_output(&in_dir(dir, "scan.csv"), &scan_csv(&rows))?;
    }
    let branches = boundary_branches(&profile, &grid, &window);
    let svg = boundary_svg(&window, &bounding_polygon(&profile, a.tau_max), &branches, &liquid);
    write_output(&in_dir(dir, "boundary.csv"), &csv)?;
    write_output(&in_dir(dir, "boundary.svg"), &svg)?;
    Ok(())
}

// ---- tilings ----------------------------------------------------------------

pub fn tilings(cfg: &RunConfig, a: &TilingsArgs) -> Result<(), CliError> {
    if let Some(lam) = &a.lambda {
        let lam = Partition::new(lam.clone())?;
        let q = cfg.walk_q(lam.len())?;
        let recs = enumerate_arrays(&lam, q)?;
        return emit(cfg.out.as_deref(), &(tilings_json(&recs) + "\n"));
    }
    let (Some(x), Some(y)) = (cfg.x(&a.x), a.y.clone()) else {
        return Err(CliError::Config("give --lambda, or --x and --y".into()));
    };
    let (x, y) = (WalkConfig::new(x)?, WalkConfig::new(y)?);
    let q = cfg.walk_q(x.m())?;
    let target = transition_prob(&x, &y, q);
    let mut csv = String::from("n,tiling_prob,walk_prob,abs_err\n");
    for &n in &a.n {
        let (lam, mu) = encode_boundary(&x, &y, n)?;
        let p = cond_prob_top_row(&mu, &lam, q);
        csv.push_str(&format!("{n},{},{},{}\n", sig12(p), sig12(target), sig12((p - target).abs())));
    }
    emit(cfg.out.as_deref(), &csv)
}

// ---- validate ---------------------------------------------------------------

pub fn validate(cfg: &RunConfig, a: &ValidateArgs) -> Result<(), CliError> {
    let mut opts = ValidateOptions {
        mc_trajectories: a.trajectories,
        ..Default::default()
    };
    if let Some(s) = cfg.seed {
        opts.seed = s;
    }
    let checks = validate::run(&a.suite, &opts)?;
    for c in &checks {
        println!("{c}");
    }
    if let Some(p) = &cfg.out {
        write_output(p, &(serde_json::to_string_pretty(&checks).expect("serializable") + "\n"))?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::ValidationFailed(failed));
    }
    Ok(())
}
