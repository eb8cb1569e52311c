//! Persuasion with a known receiver: the greedy knapsack optimum and the
//! concave envelope of a one-dimensional piecewise-linear utility.

use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::model::{
    adopts, threshold_to_finite, FiniteScheme, Prior, ReceiverUtility, StateOrdering, ThresholdScheme,
};

/// Optimal threshold scheme for a known utility.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackSolution {
    /// The real-valued states above this point are pooled into the high signal.
    pub threshold_x: f64,
    /// States by ascending utility along `[0, 1]`, so the pooled set is a
    /// top segment.
    pub ordering: StateOrdering,
    pub optimal_utility: f64,
}

/// Greedy fractional knapsack: pool state mass from the highest utility
/// down while the pooled expectation stays non-negative.
pub fn optimal_knapsack(mu: &Prior, u: &ReceiverUtility) -> Result<KnapsackSolution> {
    let ordering = StateOrdering::by_utility(mu, u)?;
    let vals = u.values();
    let probs = mu.probs();
    let mut sum = 0.0;
    let mut threshold_x = 0.0;
    for pos in (0..ordering.order().len()).rev() {
        let state = ordering.order()[pos];
        let (lo, hi) = ordering.segment(pos);
        let (m, v) = (probs[state], vals[state]);
        if v >= 0.0 || sum + m * v >= 0.0 {
            sum += m * v;
            continue;
        }
        let take = (sum / -v).clamp(0.0, m);
        threshold_x = (hi - take).max(lo);
        break;
    }
    Ok(KnapsackSolution { threshold_x, optimal_utility: 1.0 - threshold_x, ordering })
}

impl KnapsackSolution {
    /// The optimal threshold scheme as a posterior distribution.
    ///
    /// Rounding can leave the pooled posterior's expectation a hair below
    /// zero; the threshold is then raised in doubling absolute steps from
    /// one ulp of 1 so the emitted scheme really is adopted.
    pub fn scheme(&self, mu: &Prior, u: &ReceiverUtility) -> Result<FiniteScheme> {
        let mut t = self.threshold_x;
        let mut step = f64::EPSILON;
        for _ in 0..64 {
            let s = threshold_to_finite(&ThresholdScheme::new(t, self.ordering.clone())?, mu)?;
            let high_ok = t <= 0.0 || t >= 1.0 || adopts(&s.atoms()[0].posterior, u)?;
            if high_ok {
                return Ok(s);
            }
            t = (t + step).min(1.0);
            step *= 2.0;
        }
        threshold_to_finite(&ThresholdScheme::new(1.0, self.ordering.clone())?, mu)
    }
}

/// A knot of a piecewise-linear function: the one-sided limits and the
/// value at `x`. Between knots the function is affine from the right limit
/// of one knot to the left limit of the next.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Knot {
    pub x: f64,
    pub left: f64,
    pub value: f64,
    pub right: f64,
}

impl Knot {
    pub fn continuous(x: f64, value: f64) -> Self {
        Self { x, left: value, value, right: value }
    }
}

/// Piecewise-linear function on `[0, 1]` with possible jumps at knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseLinear {
    knots: Vec<Knot>,
}

impl PiecewiseLinear {
    pub fn new(knots: Vec<Knot>) -> Result<Self> {
        let bad = |m: &str| Err(PersuasionError::InvalidDistribution(m.to_string()));
        if knots.len() < 2 {
            return bad("a piecewise-linear function needs at least two knots");
        }
        if knots[0].x != 0.0 || knots[knots.len() - 1].x != 1.0 {
            return bad("knots must start at 0 and end at 1");
        }
        if knots.windows(2).any(|w| w[1].x <= w[0].x) {
            return bad("knots must be strictly increasing");
        }
        if knots.iter().any(|k| !(k.left.is_finite() && k.value.is_finite() && k.right.is_finite())) {
            return bad("knot values must be finite");
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[Knot] {
        &self.knots
    }

    pub fn eval(&self, q: f64) -> f64 {
        let i = self.knots.partition_point(|k| k.x < q);
        if i < self.knots.len() && self.knots[i].x == q {
            return self.knots[i].value;
        }
        if i == 0 {
            return self.knots[0].value;
        }
        if i == self.knots.len() {
            return self.knots[i - 1].value;
        }
        let (a, b) = (self.knots[i - 1], self.knots[i]);
        let s = (q - a.x) / (b.x - a.x);
        a.right + s * (b.left - a.right)
    }

    /// Vertices of the least concave majorant, left to right. Collinear
    /// points are dropped, so every edge is maximal.
    pub fn upper_hull(&self) -> Vec<(f64, f64)> {
        let last = self.knots.len() - 1;
        let mut pts: Vec<(f64, f64)> = Vec::with_capacity(self.knots.len());
        for (i, k) in self.knots.iter().enumerate() {
            let mut y = k.value;
            if i > 0 {
                y = y.max(k.left);
            }
            if i < last {
                y = y.max(k.right);
            }
            pts.push((k.x, y));
        }
        let mut hull: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
        for p in pts {
            while hull.len() >= 2 {
                let (o, a) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
                let scale = (p.0 - o.0).abs() * (1.0 + o.1.abs().max(a.1.abs()).max(p.1.abs()));
                if cross >= -1e-12 * scale {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        hull
    }
}

/// Value of the concave envelope at a point and the hull edge attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Concavification {
    pub value: f64,
    pub support: (f64, f64),
}

/// Evaluates the least concave majorant of `f` at `q0`. The support segment
/// is the maximal hull edge through `q0`; it is degenerate only when `q0` is
/// a strict vertex of the hull.
pub fn concavify_at(f: &PiecewiseLinear, q0: f64) -> Result<Concavification> {
    crate::error::check_range("q0", q0, (0.0..=1.0).contains(&q0), "[0, 1]")?;
    let hull = f.upper_hull();
    if let Some(&(x, y)) = hull.iter().find(|p| p.0 == q0) {
        return Ok(Concavification { value: y, support: (x, x) });
    }
    let j = hull.partition_point(|p| p.0 < q0);
    let (a, b) = (hull[j - 1], hull[j]);
    let s = (q0 - a.0) / (b.0 - a.0);
    Ok(Concavification { value: a.1 + s * (b.1 - a.1), support: (a.0, b.0) })
}
