//! Trajectory export as CSV (`t,i,y`) and JSON ({m, q, x0, seed, states}).

use serde::Serialize;

use super::{Trajectory, WalkConfig};

/// CSV with header `t,i,y`, one row per particle per time, particles
/// numbered from 1 at the top.
pub fn trajectory_csv(traj: &Trajectory) -> String {
    let mut out = String::from("t,i,y\n");
    for (t, s) in traj.states.iter().enumerate() {
        for (i, y) in s.parts().iter().enumerate() {
            out.push_str(&format!("{t},{},{y}\n", i + 1));
        }
    }
    out
}

#[derive(Serialize)]
struct TrajectoryDoc<'a> {
    m: usize,
    q: f64,
    x0: &'a WalkConfig,
    seed: u64,
    states: &'a [WalkConfig],
}

/// One JSON document describing the trajectory.
pub fn trajectory_json(traj: &Trajectory, q: f64) -> String {
    let doc = TrajectoryDoc {
        m: traj.states[0].m(),
        q,
        x0: &traj.states[0],
        seed: traj.seed,
        states: &traj.states,
    };
    let mut s = serde_json::to_string(&doc).expect("serializable");
    s.push('\n');
    s
}
