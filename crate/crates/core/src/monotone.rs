//! Regret minimization against monotone receivers.
//!
//! The sender randomizes over threshold schemes along the identity
//! ordering and the adversary, by the knapsack argument, effectively picks
//! a threshold too. The resulting game on `[0, 1 - alpha]` with payoff
//! `g` has closed-form optimal strategies, implemented here.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};
use crate::kernel::{best_response, integrate_density, BestResponse, Kernel, LogPoly, Player};
use crate::mixed::{Atom, DensityForm, DensityPiece, MixedThreshold};
use crate::model::{sender_utility, FiniteScheme, Prior, ReceiverUtility, StateOrdering};
use crate::standard::{optimal_knapsack, Knot, PiecewiseLinear};

/// `1/e`, where the value curve bends.
pub const INV_E: f64 = 1.0 / std::f64::consts::E;

/// Slack applied to pooled expectations when evaluating threshold
/// mixtures, so that exact ties lost to rounding still go to the sender.
pub const TIE_TOL: f64 = 1e-12;

/// `g(x, y) = (1-x) - (1-y) 1{y >= x}`.
pub fn g_payoff(x: f64, y: f64) -> f64 {
    Kernel::Regret.payoff(x, y)
}

/// Optimal regret against monotone receivers as a function of the top
/// state's prior mass.
pub fn reg_mon_value(mu_n: f64) -> Result<f64> {
    check_range("mu_n", mu_n, mu_n > 0.0 && mu_n <= 1.0, "(0, 1]")?;
    Ok(if mu_n <= INV_E { INV_E } else { (mu_n * mu_n.ln()).abs() })
}

/// The threshold game with top-state mass `alpha`; both players choose
/// from `[0, 1 - alpha]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdGameSpec {
    alpha: f64,
}

impl ThresholdGameSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        check_range("alpha", alpha, alpha > 0.0 && alpha < 1.0, "(0, 1)")?;
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, 1.0 - self.alpha)
    }

    pub fn value(&self) -> f64 {
        reg_mon_value(self.alpha).expect("alpha validated")
    }
}

/// The sender's optimal threshold distribution.
pub fn sender_opt(alpha: f64) -> Result<MixedThreshold> {
    ThresholdGameSpec::new(alpha)?;
    let (top, atoms) = if alpha >= INV_E {
        (1.0 - alpha, vec![Atom { at: 1.0 - alpha, weight: 1.0 + alpha.ln() }])
    } else {
        (1.0 - INV_E, Vec::new())
    };
    MixedThreshold::new(
        atoms,
        vec![DensityPiece { lo: 0.0, hi: top, coef: 1.0, form: DensityForm::InverseLinear }],
    )
}

/// The adversary's optimal threshold distribution.
pub fn adversary_opt(alpha: f64) -> Result<MixedThreshold> {
    ThresholdGameSpec::new(alpha)?;
    let c = alpha.max(INV_E);
    MixedThreshold::new(
        vec![Atom { at: 0.0, weight: c }],
        vec![DensityPiece { lo: 0.0, hi: 1.0 - c, coef: c, form: DensityForm::InverseSquare }],
    )
}

/// Exact `E[g(X, Y)]` for independent mixed thresholds.
pub fn expected_g(strategy_x: &MixedThreshold, strategy_y: &MixedThreshold) -> Result<f64> {
    Kernel::Regret.expected(strategy_x, strategy_y)
}

/// The adversary's best pure threshold on a uniform grid over `[0, 1]`.
pub fn best_response_x(strategy_y: &MixedThreshold, grid: usize) -> Result<BestResponse> {
    best_response(Kernel::Regret, Player::X, strategy_y, grid, 0.0, 1.0)
}

/// The adversary's best pure threshold over `[lo, hi]`.
pub fn best_response_x_on(
    strategy_y: &MixedThreshold,
    grid: usize,
    lo: f64,
    hi: f64,
) -> Result<BestResponse> {
    best_response(Kernel::Regret, Player::X, strategy_y, grid, lo, hi)
}

/// The sender's best pure threshold over `[lo, hi]` (it minimizes `g`).
pub fn best_response_y_on(
    strategy_x: &MixedThreshold,
    grid: usize,
    lo: f64,
    hi: f64,
) -> Result<BestResponse> {
    best_response(Kernel::Regret, Player::Y, strategy_x, grid, lo, hi)
}

/// The monotone utility whose knapsack threshold is exactly `t`:
/// `-mu_n` on every state but the top one, `1 - mu_n - t` on the top.
pub fn adversary_utility_from_threshold(t: f64, mu: &Prior) -> Result<ReceiverUtility> {
    let mu_n = mu.top_mass();
    check_range("t", t, (0.0..=1.0 - mu_n).contains(&t), "[0, 1 - mu_n]")?;
    let mut u = vec![-mu_n; mu.len()];
    *u.last_mut().expect("non-empty") = 1.0 - mu_n - t;
    ReceiverUtility::new(u)
}

/// Regret of a finite scheme against one utility.
pub fn regret_of_scheme(s: &FiniteScheme, mu: &Prior, u: &ReceiverUtility) -> Result<f64> {
    Ok(optimal_knapsack(mu, u)?.optimal_utility - sender_utility(s, u)?)
}

/// Regret of a randomized threshold scheme along `ordering` against one
/// utility.
pub fn regret_of_mixed(
    m: &MixedThreshold,
    ordering: &StateOrdering,
    mu: &Prior,
    u: &ReceiverUtility,
) -> Result<f64> {
    Ok(optimal_knapsack(mu, u)?.optimal_utility - mixture_utility(m, ordering, mu, u)?)
}

/// Sender utility of a threshold drawn from `m`, in closed form.
///
/// For a threshold `y` the high signal is adopted iff the receiver's
/// integrated utility over `[y, 1]` is non-negative, and the low signal iff
/// the one over `[0, y]` is. Both integrals are piecewise linear in `y`, so
/// the adoption sets are finite unions of intervals.
pub fn mixture_utility(
    m: &MixedThreshold,
    ordering: &StateOrdering,
    mu: &Prior,
    u: &ReceiverUtility,
) -> Result<f64> {
    let check = StateOrdering::new(mu, ordering.order().to_vec())?;
    if u.len() != mu.len() {
        return Err(crate::error::PersuasionError::DimensionMismatch { expected: mu.len(), got: u.len() });
    }
    let n = mu.len();
    let slope: Vec<f64> = check.order().iter().map(|&s| u.values()[s]).collect();
    // above[k]: integrated utility over positions k..n.
    let mut above = vec![0.0; n + 1];
    for k in (0..n).rev() {
        above[k] = above[k + 1] + mu.probs()[check.order()[k]] * slope[k];
    }
    let total = above[0];
    let high = |y: f64| -> f64 {
        let k = check.cum().partition_point(|&c| c <= y).min(n - 1);
        above[k + 1] + (check.cum()[k] - y) * slope[k]
    };
    let low = |y: f64| total - high(y);

    let mut value = 0.0;
    for a in m.atoms() {
        if a.at < 1.0 && high(a.at) >= -TIE_TOL {
            value += a.weight * (1.0 - a.at);
        }
        if a.at > 0.0 && low(a.at) >= -TIE_TOL {
            value += a.weight * a.at;
        }
    }
    let w = LogPoly::monomial(1.0, 1);
    let one_minus_w = LogPoly::monomial(1.0, 0).add(&LogPoly::monomial(-1.0, 1));
    for k in 0..n {
        let (lo, hi) = check.segment(k);
        let h_lo = above[k + 1] + (hi - lo) * slope[k];
        let h_hi = above[k + 1];
        if let Some((a, b)) = nonneg_part(lo, hi, h_lo, h_hi) {
            value += integrate_density(m, &w, a, b);
        }
        if let Some((a, b)) = nonneg_part(lo, hi, total - h_lo, total - h_hi) {
            value += integrate_density(m, &one_minus_w, a, b);
        }
    }
    Ok(value)
}

/// Sub-interval of `[lo, hi]` where the affine function with the given
/// endpoint values is non-negative.
fn nonneg_part(lo: f64, hi: f64, f_lo: f64, f_hi: f64) -> Option<(f64, f64)> {
    let (a, b) = (f_lo >= -TIE_TOL, f_hi >= -TIE_TOL);
    match (a, b) {
        (true, true) => Some((lo, hi)),
        (false, false) => None,
        _ => {
            let r = (lo + (hi - lo) * f_lo / (f_lo - f_hi)).clamp(lo, hi);
            Some(if a { (lo, r) } else { (r, hi) })
        }
    }
}

/// Probability, under the adversary's optimal mix, that the receiver's
/// threshold admits a posterior `q` on the bottom states, as a
/// piecewise-linear function of `q`.
pub fn binary_reduction_uprime(mu_n: f64) -> Result<PiecewiseLinear> {
    ThresholdGameSpec::new(mu_n)?;
    let mu0 = 1.0 - mu_n;
    let knots = if mu_n >= INV_E {
        vec![
            Knot::continuous(0.0, 1.0),
            Knot { x: mu0, left: 1.0 - mu0, value: 1.0 - mu0, right: 0.0 },
            Knot::continuous(1.0, 0.0),
        ]
    } else {
        let c = 1.0 - mu_n / INV_E;
        let at_mu0 = (1.0 - mu0) * INV_E / mu_n;
        vec![
            Knot::continuous(0.0, 1.0),
            Knot::continuous(c, 1.0),
            Knot { x: mu0, left: at_mu0, value: at_mu0, right: 0.0 },
            Knot::continuous(1.0, 0.0),
        ]
    };
    PiecewiseLinear::new(knots)
}
