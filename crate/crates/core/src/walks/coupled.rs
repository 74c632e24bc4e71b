//! Exact one-step sampling for large m by monotone coupling from the past.
//!
//! Write a step as d ∈ {0,1}^m (d_i = 1 when particle i moves down). Its
//! weight is a product of single-particle terms and pair terms
//! 1 − q^{D_ij − d_i + d_j}, D_ij = x_i − x_j. Since log(1 − q^D) is concave
//! in D, the pair interaction is attractive, so single-site heat-bath updates
//! are monotone and two chains started from the extreme states sandwich all
//! others. A packed run (consecutive gaps of one) can only take the states
//! 0^a 1^(b−a), and is updated as one block whose states form a chain.

use rand::Rng;

use super::WalkConfig;
use crate::qcalc::QParam;

struct Block {
    start: usize,
    len: usize,
    frozen: bool,
}

struct StepModel {
    m: usize,
    blocks: Vec<Block>,
    // self_move[i]: log weight of moving minus staying for particle i
    self_move: Vec<f64>,
    // pair[i*m + j] for i < j holds g(D−1), g(D), g(D+1) with g = log(1 − q^·)
    pair: Vec<[f64; 3]>,
}

fn log_one_minus(q: QParam, e: i64) -> f64 {
    if e <= 0 {
        f64::NEG_INFINITY
    } else {
        q.one_minus_pow(e).ln()
    }
}

impl StepModel {
    fn new(x: &[i64], q: QParam) -> Self {
        let m = x.len();
        let lq = q.ln();
        let self_move = (0..m)
            .map(|i| {
                if x[i] == 0 {
                    f64::NEG_INFINITY
                } else {
                    log_one_minus(q, x[i]) - x[i] as f64 * lq + (m - 1 - i) as f64 * lq
                }
            })
            .collect();
        let mut pair = vec![[0.0; 3]; m * m];
        for i in 0..m {
            for j in (i + 1)..m {
                let d = x[i] - x[j];
                pair[i * m + j] = [
                    log_one_minus(q, d - 1),
                    log_one_minus(q, d),
                    log_one_minus(q, d + 1),
                ];
            }
        }
        let mut blocks = Vec::new();
        let mut s = 0;
        while s < m {
            let mut e = s + 1;
            while e < m && x[e - 1] - x[e] == 1 {
                e += 1;
            }
            let frozen = x[e - 1] == 0;
            blocks.push(Block {
                start: s,
                len: e - s,
                frozen,
            });
            s = e;
        }
        StepModel {
            m,
            blocks,
            self_move,
            pair,
        }
    }

    #[inline]
    fn g(&self, i: usize, j: usize, di: u8, dj: u8) -> f64 {
        // pair term for i < j with exponent D − d_i + d_j
        let k = (1 + dj as i32 - di as i32) as usize;
        self.pair[i * self.m + j][k]
    }

    /// Change of the log weight when particle k flips from 0 to 1, all other
    /// entries of d held fixed.
    fn flip_gain(&self, d: &[u8], k: usize) -> f64 {
        let mut s = self.self_move[k];
        for j in 0..self.m {
            if j < k {
                s += self.g(j, k, d[j], 1) - self.g(j, k, d[j], 0);
            } else if j > k {
                s += self.g(k, j, 1, d[j]) - self.g(k, j, 0, d[j]);
            }
        }
        s
    }

    /// Number of movers in each block, extreme states of the lattice.
    fn extreme(&self, top: bool) -> Vec<usize> {
        self.blocks
            .iter()
            .map(|b| if top && !b.frozen { b.len } else { 0 })
            .collect()
    }

    fn write_block(&self, d: &mut [u8], b: &Block, movers: usize) {
        for k in 0..b.len {
            d[b.start + k] = u8::from(k >= b.len - movers);
        }
    }

    /// One systematic heat-bath sweep over the blocks with fixed uniforms.
    fn sweep(&self, state: &mut [usize], d: &mut [u8], us: &[f64], logw: &mut Vec<f64>) {
        for (bi, b) in self.blocks.iter().enumerate() {
            if b.frozen {
                continue;
            }
            self.write_block(d, b, 0);
            logw.clear();
            logw.push(0.0);
            let mut acc = 0.0;
            for s in 1..=b.len {
                // particle b.start + b.len − s joins the movers
                let k = b.start + b.len - s;
                acc += self.flip_gain(d, k);
                d[k] = 1;
                logw.push(acc);
            }
            let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let total: f64 = logw.iter().map(|l| (l - top).exp()).sum();
            let target = us[bi] * total;
            let mut cum = 0.0;
            let mut pick = b.len;
            for (s, l) in logw.iter().enumerate() {
                cum += (l - top).exp();
                if target < cum {
                    pick = s;
                    break;
                }
            }
            state[bi] = pick;
            self.write_block(d, b, pick);
        }
    }

    fn fill(&self, state: &[usize], d: &mut [u8]) {
        for (b, &s) in self.blocks.iter().zip(state) {
            self.write_block(d, b, s);
        }
    }
}

/// Draws y ~ Υ_m(x, ·) exactly, for any m.
pub fn sample_step_coupled<R: Rng + ?Sized>(x: &WalkConfig, q: QParam, rng: &mut R) -> WalkConfig {
    let xs = x.parts();
    let model = StepModel::new(xs, q);
    let nb = model.blocks.len();
    let mut uniforms: Vec<Vec<f64>> = Vec::new();
    let mut horizon = 1usize;
    let mut d_top = vec![0u8; model.m];
    let mut d_bot = vec![0u8; model.m];
    let mut logw = Vec::new();
    loop {
        while uniforms.len() < horizon {
            uniforms.push((0..nb).map(|_| rng.gen::<f64>()).collect());
        }
        let mut top = model.extreme(true);
        let mut bot = model.extreme(false);
        model.fill(&top, &mut d_top);
        model.fill(&bot, &mut d_bot);
        for us in uniforms[..horizon].iter().rev() {
            model.sweep(&mut top, &mut d_top, us, &mut logw);
            model.sweep(&mut bot, &mut d_bot, us, &mut logw);
        }
        if top == bot {
            let y = xs.iter().zip(&d_top).map(|(&v, &d)| v - d as i64).collect();
            return WalkConfig(y);
        }
        horizon *= 2;
    }
}
