//! Three equally likely states. The simplex is drawn as the unit triangle
//! `w1 = (0, 0)`, `w2 = (1, 0)`, `w3 = (1/2, sqrt(3)/2)`, and the sender's
//! scheme puts its posteriors on the boundary, each boundary segment
//! receiving mass proportional to the angle it subtends at the centroid.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::model::{Posterior, Prior, ReceiverUtility};
use crate::rng::stream;
use crate::standard::optimal_knapsack;

const SQRT3: f64 = 1.732_050_807_568_877_2;

pub const VERTICES: [(f64, f64); 3] = [(0.0, 0.0), (1.0, 0.0), (0.5, SQRT3 / 2.0)];
pub const CENTROID: (f64, f64) = (0.5, SQRT3 / 6.0);

/// Adoption region `{p : normal . p >= 0}` of a linear receiver utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfPlaneAdoption {
    normal: [f64; 3],
}

impl HalfPlaneAdoption {
    pub fn new(normal: [f64; 3]) -> Result<Self> {
        if normal.iter().any(|v| !v.is_finite()) {
            return Err(PersuasionError::NonFinite { field: "normal", index: 0 });
        }
        if normal.iter().all(|&v| v == 0.0) {
            return Err(PersuasionError::InvalidGame("half-plane normal is zero".into()));
        }
        Ok(Self { normal })
    }

    /// Half-plane `{P : a (x - cx) + b (y - cy) >= 0}` in the drawing.
    pub fn through_centroid(a: f64, b: f64) -> Result<Self> {
        Self::from_cartesian(a, b, -(a * CENTROID.0 + b * CENTROID.1))
    }

    /// Half-plane `{P : a x + b y + c >= 0}` in the drawing. An affine
    /// function of the point is linear in barycentric coordinates, with the
    /// vertex values as coefficients.
    pub fn from_cartesian(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(VERTICES.map(|(x, y)| a * x + b * y + c))
    }

    pub fn normal(&self) -> [f64; 3] {
        self.normal
    }

    pub fn complement(&self) -> Self {
        Self { normal: self.normal.map(|v| -v) }
    }

    pub fn contains(&self, p: &[f64; 3]) -> bool {
        self.value(p) >= 0.0
    }

    fn value(&self, p: &[f64; 3]) -> f64 {
        self.normal.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    pub fn utility(&self) -> ReceiverUtility {
        ReceiverUtility::new(self.normal.to_vec()).expect("finite normal")
    }
}

pub fn to_cartesian(p: &[f64; 3]) -> (f64, f64) {
    let x = p.iter().zip(&VERTICES).map(|(w, v)| w * v.0).sum();
    let y = p.iter().zip(&VERTICES).map(|(w, v)| w * v.1).sum();
    (x, y)
}

pub fn to_barycentric(x: f64, y: f64) -> [f64; 3] {
    let p3 = 2.0 * y / SQRT3;
    let p2 = x - 0.5 * p3;
    let p1 = 1.0 - p2 - p3;
    [p1, p2, p3]
}

/// Angle at the centroid between two points, in `[0, pi]`.
fn subtended(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (ax, ay) = (a.0 - CENTROID.0, a.1 - CENTROID.1);
    let (bx, by) = (b.0 - CENTROID.0, b.1 - CENTROID.1);
    (ax * by - ay * bx).abs().atan2(ax * bx + ay * by)
}

/// The boundary posterior hit by the ray from the centroid at angle `theta`.
pub fn boundary_point(theta: f64) -> [f64; 3] {
    let (dx, dy) = (theta.cos(), theta.sin());
    let mut best = f64::INFINITY;
    for k in 0..3 {
        let (a, b) = (VERTICES[k], VERTICES[(k + 1) % 3]);
        let (ex, ey) = (b.0 - a.0, b.1 - a.1);
        // centroid + s d = a + r e
        let det = ex * dy - ey * dx;
        if det.abs() < 1e-15 {
            continue;
        }
        let (cx, cy) = (a.0 - CENTROID.0, a.1 - CENTROID.1);
        let s = (ex * cy - ey * cx) / det;
        let r = (dx * cy - dy * cx) / det;
        if s > 0.0 && (-1e-12..=1.0 + 1e-12).contains(&r) {
            best = best.min(s);
        }
    }
    let p = to_barycentric(CENTROID.0 + best * dx, CENTROID.1 + best * dy);
    p.map(|v| v.clamp(0.0, 1.0))
}

/// One posterior of the boundary scheme.
pub fn ternary_sample(seed: u64) -> Posterior {
    let mut rng = stream(seed, 0);
    sample_with(&mut rng)
}

fn sample_with(rng: &mut impl Rng) -> Posterior {
    let theta = rng.random::<f64>() * 2.0 * PI;
    Posterior::from_masses(&boundary_point(theta)).expect("boundary point is a distribution")
}

/// `n` posteriors from parallel streams under `seed`.
pub fn ternary_samples(n: usize, seed: u64) -> Vec<[f64; 3]> {
    const CHUNK: usize = 1 << 14;
    (0..n.div_ceil(CHUNK))
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = stream(seed, c as u64);
            let len = CHUNK.min(n - c * CHUNK);
            (0..len)
                .map(move |_| {
                    let p = sample_with(&mut rng);
                    [p.probs()[0], p.probs()[1], p.probs()[2]]
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Exact mass the boundary scheme puts in `a`: the angle at the centroid
/// of the boundary part inside `a`, over `2 pi`.
pub fn ternary_mass_in(a: &HalfPlaneAdoption) -> f64 {
    let n = a.normal();
    if n.iter().all(|&v| v >= 0.0) {
        return 1.0;
    }
    let mut angle = 0.0;
    for k in 0..3 {
        let j = (k + 1) % 3;
        let (fa, fb) = (n[k], n[j]);
        // Along the edge from vertex k to vertex j the functional is
        // (1 - s) fa + s fb.
        let (s0, s1) = match (fa >= 0.0, fb >= 0.0) {
            (true, true) => (0.0, 1.0),
            (false, false) => continue,
            (true, false) => (0.0, fa / (fa - fb)),
            (false, true) => (fa / (fa - fb), 1.0),
        };
        let point = |s: f64| {
            let (va, vb) = (VERTICES[k], VERTICES[j]);
            (va.0 + s * (vb.0 - va.0), va.1 + s * (vb.1 - va.1))
        };
        angle += subtended(point(s0), point(s1));
    }
    (angle / (2.0 * PI)).clamp(0.0, 1.0)
}

fn uniform3() -> Prior {
    Prior::uniform(3).expect("valid")
}

/// Knowledgeable optimum minus the boundary scheme's adoption probability.
pub fn ternary_regret(a: &HalfPlaneAdoption) -> Result<f64> {
    let opt = optimal_knapsack(&uniform3(), &a.utility())?.optimal_utility;
    Ok(opt - ternary_mass_in(a))
}

/// The line through `D = (d, sqrt(3) d)` and `E = (e, 0)` with the
/// vertices relabelled by a cyclic shift, or `None` when `D = E`.
pub fn sweep_line(d: f64, e: f64, shift: usize) -> Option<HalfPlaneAdoption> {
    let dp = [1.0 - 2.0 * d, 0.0, 2.0 * d];
    let ep = [1.0 - e, e, 0.0];
    // A functional vanishing at both points.
    let n = [dp[1] * ep[2] - dp[2] * ep[1], dp[2] * ep[0] - dp[0] * ep[2], dp[0] * ep[1] - dp[1] * ep[0]];
    let rotated = [n[(3 - shift) % 3], n[(4 - shift) % 3], n[(5 - shift) % 3]];
    HalfPlaneAdoption::new(rotated).ok()
}

/// One row of the line sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: f64,
    pub e: f64,
    pub shift: usize,
    /// Whether the adoption side is the complement of the line's default.
    pub flipped: bool,
    pub regret: f64,
}

/// Regret of the boundary scheme for every line through `D` and `E` on a
/// `grid x grid` lattice, each cyclic relabelling and both sides.
pub fn ternary_sweep(grid: usize) -> Result<Vec<SweepRow>> {
    if grid < 2 {
        return Err(PersuasionError::OutOfRange { name: "grid", value: grid as f64, range: ">= 2" });
    }
    let rows: Vec<Vec<SweepRow>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let d = 0.5 * i as f64 / (grid - 1) as f64;
            let mut out = Vec::with_capacity(grid * 6);
            for j in 0..grid {
                let e = j as f64 / (grid - 1) as f64;
                for shift in 0..3 {
                    let Some(h) = sweep_line(d, e, shift) else { continue };
                    for (flipped, side) in [(false, h), (true, h.complement())] {
                        let regret = ternary_regret(&side).expect("three states");
                        out.push(SweepRow { d, e, shift, flipped, regret });
                    }
                }
            }
            out
        })
        .collect();
    Ok(rows.into_iter().flatten().collect())
}

/// Largest regret found by [`ternary_sweep`].
pub fn ternary_sweep_sup(grid: usize) -> Result<SweepRow> {
    let rows = ternary_sweep(grid)?;
    let mut best = rows[0];
    for r in rows {
        if r.regret > best.regret {
            best = r;
        }
    }
    Ok(best)
}

/// Mean of the boundary scheme's posterior, integrated exactly over
/// `bins` equal angular sectors (each sector's boundary piece is a straight
/// segment whose angle-weighted mean is computed in closed form).
pub fn ternary_mean_by_sectors(bins: usize) -> [f64; 3] {
    let mut mean = [0.0; 3];
    // Sector edges at the vertex angles keep each sector on one edge.
    let mut cuts: Vec<f64> =
        VERTICES.iter().map(|v| (v.1 - CENTROID.1).atan2(v.0 - CENTROID.0).rem_euclid(2.0 * PI)).collect();
    cuts.extend((0..=bins).map(|k| 2.0 * PI * k as f64 / bins as f64));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    for w in cuts.windows(2) {
        let (t0, t1) = (w[0], w[1]);
        if t1 <= t0 {
            continue;
        }
        // Gauss-Legendre in theta on the sector; the integrand is smooth
        // inside a sector that stays on one edge.
        const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
        const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
        for (x, wt) in NODES.iter().zip(WEIGHTS) {
            let theta = 0.5 * (t0 + t1) + 0.5 * (t1 - t0) * x;
            let p = boundary_point(theta);
            for k in 0..3 {
                mean[k] += wt * 0.5 * (t1 - t0) * p[k] / (2.0 * PI);
            }
        }
    }
    mean
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip() {
        let p = [0.2, 0.5, 0.3];
        let (x, y) = to_cartesian(&p);
        let q = to_barycentric(x, y);
        assert!(p.iter().zip(&q).all(|(a, b)| (a - b).abs() < 1e-15));
        let c = to_barycentric(CENTROID.0, CENTROID.1);
        assert!(c.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn mass_examples() {
        let h = HalfPlaneAdoption::through_centroid(0.3, -1.1).unwrap();
        assert!((ternary_mass_in(&h) - 0.5).abs() < 1e-12);
        let all = HalfPlaneAdoption::new([1.0, 2.0, 0.5]).unwrap();
        assert_eq!(ternary_mass_in(&all), 1.0);
        assert_eq!(ternary_mass_in(&all.complement()), 0.0);
        assert!((ternary_regret(&all).unwrap()).abs() < 1e-15);
        assert!(HalfPlaneAdoption::new([0.0; 3]).is_err());
    }

    #[test]
    fn corner_mass_matches_hand_angle() {
        // p1 >= 2/3 is the corner at w1 cut off by the line through the
        // points at 1/3 along both adjacent edges.
        let h = HalfPlaneAdoption::new([1.0 / 3.0, -2.0 / 3.0, -2.0 / 3.0]).unwrap();
        let a = (1.0 / 3.0, 0.0);
        let b = (1.0 / 6.0, SQRT3 / 6.0);
        let ang = |p: (f64, f64)| (p.1 - CENTROID.1).atan2(p.0 - CENTROID.0);
        let expected = (ang(a) - ang(b)).rem_euclid(2.0 * PI) / (2.0 * PI);
        assert!((expected - 1.0 / 6.0).abs() < 1e-12);
        assert!((ternary_mass_in(&h) - expected).abs() < 1e-12);
    }

    #[test]
    fn boundary_point_is_on_boundary() {
        for k in 0..100 {
            let p = boundary_point(2.0 * PI * k as f64 / 100.0 + 0.01);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().any(|&v| v.abs() < 1e-12));
        }
    }

    #[test]
    fn sweep_line_passes_through_both_points() {
        let h = sweep_line(0.2, 0.7, 0).unwrap();
        let dp = [0.6, 0.0, 0.4];
        let ep = [0.3, 0.7, 0.0];
        assert!(h.value(&dp).abs() < 1e-15 && h.value(&ep).abs() < 1e-15);
        assert!(sweep_line(0.0, 0.0, 1).is_none());
    }

    #[test]
    fn sector_mean_is_centroid() {
        let m = ternary_mean_by_sectors(3600);
        assert!(m.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-4));
    }
}
