//! Two states with arbitrary utilities. A posterior is the number `q`, the
//! probability of the lighter state; adoption sets are intervals `[0, t]`
//! or `[t, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::model::{FiniteScheme, Prior, ReceiverUtility};
use crate::monotone::regret_of_scheme;

/// Index of the state with prior mass at most 1/2 (the first on a tie) and
/// of the other one.
fn light_heavy(mu: &Prior) -> Result<(usize, usize)> {
    if mu.len() != 2 {
        return Err(PersuasionError::DimensionMismatch { expected: 2, got: mu.len() });
    }
    Ok(if mu.probs()[0] <= 0.5 { (0, 1) } else { (1, 0) })
}

/// Posteriors `0` and `2 mu_1` on the lighter state, half each.
pub fn prop1_scheme(mu: &Prior) -> Result<FiniteScheme> {
    let (light, heavy) = light_heavy(mu)?;
    let m = mu.probs()[light];
    let low = {
        let mut v = vec![0.0; 2];
        v[heavy] = 0.5;
        v
    };
    let high = {
        let mut v = vec![0.0; 2];
        v[light] = m;
        v[heavy] = 0.5 - m;
        v
    };
    FiniteScheme::from_signal_masses(&[low, high])
}

/// Utility whose adoption set is `[t, 1]` (`upper`) or `[0, t]` in the
/// lighter-state coordinate.
pub fn interval_utility(mu: &Prior, t: f64, upper: bool) -> Result<ReceiverUtility> {
    let (light, heavy) = light_heavy(mu)?;
    let mut u = vec![0.0; 2];
    // q (1 - t) - (1 - q) t = q - t
    if upper {
        u[light] = 1.0 - t;
        u[heavy] = -t;
    } else {
        u[light] = t - 1.0;
        u[heavy] = t;
    }
    ReceiverUtility::new(u)
}

/// The adversary from the two-state lower-bound argument and the regret it
/// achieves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prop1Adversary {
    pub utility: ReceiverUtility,
    pub regret: f64,
}

/// If the scheme puts at least half its mass strictly above `mu_1`, adopt
/// on `[0, mu_1]`; otherwise, with `eps = 1/2 - Pr[q > mu_1]`, adopt on
/// `[mu_1 / (1 - eps), 1]`. Either way the regret is at least 1/2.
pub fn prop1_adversary(s: &FiniteScheme, mu: &Prior) -> Result<Prop1Adversary> {
    let (light, _) = light_heavy(mu)?;
    let m = mu.probs()[light];
    let above: f64 = s.atoms().iter().filter(|a| a.posterior.probs()[light] > m).map(|a| a.weight).sum();
    let utility = if above >= 0.5 {
        interval_utility(mu, m, false)?
    } else {
        let eps = 0.5 - above;
        interval_utility(mu, m / (1.0 - eps), true)?
    };
    let regret = regret_of_scheme(s, mu, &utility)?;
    Ok(Prop1Adversary { utility, regret })
}

/// Largest regret over interval adoption sets `[0, t]` and `[t, 1]` with
/// `t` on a grid of the given step.
pub fn prop1_sweep_regret(s: &FiniteScheme, mu: &Prior, step: f64) -> Result<f64> {
    let k = (1.0 / step).round() as usize;
    let mut best = f64::NEG_INFINITY;
    for i in 0..=k {
        let t = i as f64 / k as f64;
        for upper in [false, true] {
            best = best.max(regret_of_scheme(s, mu, &interval_utility(mu, t, upper)?)?);
        }
    }
    Ok(best)
}
