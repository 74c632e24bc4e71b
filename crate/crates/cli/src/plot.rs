//! Static SVG plots in the (τ, ρ) plane: axes, polyline layers, markers.

use std::fmt::Write;

use qwalks::asymptotics::{boundary_point, BoundaryPoint, ClusterProfile};
use qwalks::format::sig12;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 48.0;

/// Plot window [0, tau_max] × [rho_min, rho_max].
#[derive(Debug, Clone, Copy)]
pub struct Window {
    pub tau_max: f64,
    pub rho_min: f64,
    pub rho_max: f64,
}

impl Window {
    fn px(&self, tau: f64, rho: f64) -> (f64, f64) {
        let x = MARGIN + tau / self.tau_max * (WIDTH - 2.0 * MARGIN);
        let y = HEIGHT - MARGIN - (rho - self.rho_min) / (self.rho_max - self.rho_min) * (HEIGHT - 2.0 * MARGIN);
        (x, y)
    }

    pub fn contains(&self, tau: f64, rho: f64) -> bool {
        (0.0..=self.tau_max).contains(&tau) && (self.rho_min..=self.rho_max).contains(&rho)
    }
}

/// The outline of where trajectories can lie: the clusters at τ = 0, each
/// gap closing along a horizontal (a cluster top stays put) and a diagonal
/// (the next cluster's bottom falls at unit speed), the top line and the
/// floor ρ = 0 reached by the lowest particle at τ = C₁.
pub fn bounding_polygon(profile: &ClusterProfile, tau_max: f64) -> Vec<(f64, f64)> {
    let a = profile.breakpoints();
    let c = profile.offsets();
    let l = c.len();
    let mut v = vec![(0.0, a[0] + c[0])];
    for k in 0..l {
        let top = a[k + 1] + c[k];
        v.push((0.0, top));
        if k + 1 < l {
            let gap = c[k + 1] - c[k];
            if gap > 0.0 {
                v.push((gap, top));
                v.push((0.0, top + gap));
            }
        }
    }
    let top = a[l] + c[l - 1];
    let floor_at = a[0] + c[0];
    v.push((tau_max, top));
    if floor_at <= tau_max {
        v.push((tau_max, 0.0));
        v.push((floor_at, 0.0));
    } else {
        v.push((tau_max, floor_at - tau_max));
    }
    v
}

/// Real w at which the boundary parametrization jumps between branches.
fn breaks(profile: &ClusterProfile) -> Vec<f64> {
    let mut b = profile.f_poles();
    b.push(0.0);
    b.push(1.0);
    b.sort_by(f64::total_cmp);
    b
}

/// Boundary points over a sorted w grid, split into connected branches:
/// a branch ends where the parametrization is undefined, leaves the window,
/// or crosses a pole of F.
pub fn boundary_branches(profile: &ClusterProfile, w_grid: &[f64], window: &Window) -> Vec<Vec<BoundaryPoint>> {
    use rayon::prelude::*;
    let pts: Vec<Option<BoundaryPoint>> = w_grid
        .par_iter()
        .map(|&w| boundary_point(w, profile).filter(|p| window.contains(p.tau, p.rho)))
        .collect();
    let cuts = breaks(profile);
    let mut out: Vec<Vec<BoundaryPoint>> = Vec::new();
    let mut cur: Vec<BoundaryPoint> = Vec::new();
    for p in pts {
        match p {
            Some(p) => {
                if let Some(last) = cur.last() {
                    if cuts.iter().any(|&c| (last.w - c) * (p.w - c) <= 0.0) {
                        out.push(std::mem::take(&mut cur));
                    }
                }
                cur.push(p);
            }
            None => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out.retain(|b| b.len() > 1);
    out
}

fn path(window: &Window, pts: &[(f64, f64)], closed: bool) -> String {
    let mut d = String::new();
    for (i, &(t, r)) in pts.iter().enumerate() {
        let (x, y) = window.px(t, r);
        let _ = write!(d, "{}{} {}", if i == 0 { "M" } else { " L" }, sig12(x), sig12(y));
    }
    if closed {
        d.push_str(" Z");
    }
    format!("<path d=\"{d}\"/>\n")
}

fn axes(window: &Window) -> String {
    let mut s = String::from("<g id=\"axes\" stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n");
    s.push_str(&path(window, &[(0.0, window.rho_max), (0.0, window.rho_min), (window.tau_max, window.rho_min)], false));
    s.push_str("</g>\n<g id=\"labels\" font-family=\"sans-serif\" font-size=\"12\" fill=\"black\">\n");
    let text = |s: &mut String, x: f64, y: f64, anchor: &str, label: &str| {
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"{anchor}\">{label}</text>", sig12(x), sig12(y));
    };
    for i in 0..=4 {
        let t = window.tau_max * i as f64 / 4.0;
        let r = window.rho_min + (window.rho_max - window.rho_min) * i as f64 / 4.0;
        let (x, y) = window.px(t, window.rho_min);
        text(&mut s, x, y + 16.0, "middle", &sig12(t));
        let (x, y) = window.px(0.0, r);
        text(&mut s, x - 6.0, y + 4.0, "end", &sig12(r));
    }
    let (x, _) = window.px(window.tau_max / 2.0, window.rho_min);
    text(&mut s, x, HEIGHT - 8.0, "middle", "tau");
    text(&mut s, 14.0, HEIGHT / 2.0, "middle", "rho");
    s.push_str("</g>\n");
    s
}

/// The layered plot: axes, bounding polygon, frozen boundary branches and
/// optional liquid-region markers.
pub fn boundary_svg(
    window: &Window,
    polygon: &[(f64, f64)],
    branches: &[Vec<BoundaryPoint>],
    liquid: &[(f64, f64)],
) -> String {
    let mut s = format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
        WIDTH, HEIGHT, WIDTH, HEIGHT
    );
    s.push_str(&axes(window));
    s.push_str("<g id=\"bounding-polygon\" stroke=\"#555555\" stroke-width=\"1.5\" fill=\"none\">\n");
    s.push_str(&path(window, polygon, true));
    s.push_str("</g>\n<g id=\"frozen-boundary\" stroke=\"#c02020\" stroke-width=\"1.5\" fill=\"none\">\n");
    for b in branches {
        let pts: Vec<(f64, f64)> = b.iter().map(|p| (p.tau, p.rho)).collect();
        s.push_str(&path(window, &pts, false));
    }
    s.push_str("</g>\n");
    if !liquid.is_empty() {
        s.push_str("<g id=\"liquid-region\" fill=\"#2060c0\" fill-opacity=\"0.5\">\n");
        for &(t, r) in liquid {
            let (x, y) = window.px(t, r);
            let _ = writeln!(s, "<circle cx=\"{}\" cy=\"{}\" r=\"1.5\"/>", sig12(x), sig12(y));
        }
        s.push_str("</g>\n");
    }
    s.push_str("</svg>\n");
    s
}
