//! Approximation ratio against monotone receivers: the sender maximizes the
//! worst-case fraction of the knowledgeable optimum it secures.

use serde::{Deserialize, Serialize};

use crate::error::{check_range, Result};
use crate::kernel::{best_response, BestResponse, Kernel, Player};
use crate::mixed::{Atom, DensityForm, DensityPiece, MixedThreshold};
use crate::model::{sender_utility, FiniteScheme, Prior, ReceiverUtility, StateOrdering};
use crate::monotone::mixture_utility;
use crate::standard::{optimal_knapsack, Knot, PiecewiseLinear};

/// `h(x, y) = (1-y) 1{y >= x} / (1-x)`, undefined at `x = 1`.
pub fn h_payoff(x: f64, y: f64) -> Result<f64> {
    check_range("x", x, (0.0..1.0).contains(&x), "[0, 1)")?;
    Ok(Kernel::Ratio.payoff(x, y))
}

/// Optimal approximation ratio against monotone receivers.
pub fn apr_mon_value(mu_n: f64) -> Result<f64> {
    check_range("mu_n", mu_n, mu_n > 0.0 && mu_n <= 1.0, "(0, 1]")?;
    Ok(1.0 / (1.0 - mu_n.ln()))
}

/// The ratio game with top-state mass `alpha` and value `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxGameSpec {
    alpha: f64,
    beta: f64,
}

impl ApproxGameSpec {
    pub fn new(alpha: f64) -> Result<Self> {
        check_range("alpha", alpha, alpha > 0.0 && alpha < 1.0, "(0, 1)")?;
        Ok(Self { alpha, beta: 1.0 / (1.0 - alpha.ln()) })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn domain(&self) -> (f64, f64) {
        (0.0, 1.0 - self.alpha)
    }
}

fn beta_mix(alpha: f64, atom_at: impl Fn(f64) -> f64) -> Result<MixedThreshold> {
    let spec = ApproxGameSpec::new(alpha)?;
    let b = spec.beta;
    MixedThreshold::new(
        vec![Atom { at: atom_at(alpha), weight: b }],
        vec![DensityPiece { lo: 0.0, hi: 1.0 - alpha, coef: b, form: DensityForm::InverseLinear }],
    )
}

/// Sender's optimal threshold mix: atom `beta` at `1 - alpha` plus density
/// `beta / (1 - y)`.
pub fn approx_sender_opt(alpha: f64) -> Result<MixedThreshold> {
    beta_mix(alpha, |a| 1.0 - a)
}

/// Adversary's optimal threshold mix: atom `beta` at 0 plus density
/// `beta / (1 - x)`.
pub fn approx_adversary_opt(alpha: f64) -> Result<MixedThreshold> {
    beta_mix(alpha, |_| 0.0)
}

/// Exact `E[h(X, Y)]`.
pub fn expected_h(strategy_x: &MixedThreshold, strategy_y: &MixedThreshold) -> Result<f64> {
    Kernel::Ratio.expected(strategy_x, strategy_y)
}

/// Adversary's best pure threshold over `[lo, hi]` (it minimizes `h`).
pub fn approx_best_response_x_on(
    strategy_y: &MixedThreshold,
    grid: usize,
    lo: f64,
    hi: f64,
) -> Result<BestResponse> {
    best_response(Kernel::Ratio, Player::X, strategy_y, grid, lo, hi)
}

/// Sender's best pure threshold over `[lo, hi]` (it maximizes `h`).
pub fn approx_best_response_y_on(
    strategy_x: &MixedThreshold,
    grid: usize,
    lo: f64,
    hi: f64,
) -> Result<BestResponse> {
    best_response(Kernel::Ratio, Player::Y, strategy_x, grid, lo, hi)
}

fn ratio(achieved: f64, optimum: f64) -> f64 {
    if optimum == 0.0 {
        1.0
    } else {
        achieved / optimum
    }
}

/// Fraction of the knowledgeable optimum a finite scheme secures; 1 when
/// the optimum is 0.
pub fn approx_of_scheme(s: &FiniteScheme, mu: &Prior, u: &ReceiverUtility) -> Result<f64> {
    let opt = optimal_knapsack(mu, u)?.optimal_utility;
    Ok(ratio(sender_utility(s, u)?, opt))
}

/// Same for a threshold mixture along `ordering`.
pub fn approx_of_mixed(
    m: &MixedThreshold,
    ordering: &StateOrdering,
    mu: &Prior,
    u: &ReceiverUtility,
) -> Result<f64> {
    let opt = optimal_knapsack(mu, u)?.optimal_utility;
    Ok(ratio(mixture_utility(m, ordering, mu, u)?, opt))
}

/// Whether `apr <= 1/reg - 1` (up to `1e-9`); vacuous for `reg = 0`.
pub fn check_reg_apr(reg: f64, apr: f64) -> Result<bool> {
    check_range("reg", reg, (0.0..=1.0).contains(&reg), "[0, 1]")?;
    check_range("apr", apr, (0.0..=1.0).contains(&apr), "[0, 1]")?;
    if reg == 0.0 {
        return Ok(true);
    }
    Ok(apr <= 1.0 / reg - 1.0 + 1e-9)
}

/// Expected ratio against the adversary's optimal mix as a function of the
/// posterior `q` on the bottom states.
pub fn approx_reduction_uprime(mu_n: f64) -> Result<PiecewiseLinear> {
    let spec = ApproxGameSpec::new(mu_n)?;
    let mu0 = 1.0 - mu_n;
    let at = spec.beta * (1.0 - mu0) / mu_n;
    PiecewiseLinear::new(vec![
        Knot::continuous(0.0, spec.beta / mu_n),
        Knot { x: mu0, left: at, value: at, right: 0.0 },
        Knot::continuous(1.0, 0.0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::standard::concavify_at;
    use std::f64::consts::E;

    #[test]
    fn payoff_examples() {
        let a = 0.3;
        assert!((h_payoff(0.0, 1.0 - a).unwrap() - a).abs() < 1e-15);
        assert_eq!(h_payoff(0.5, 0.2).unwrap(), 0.0);
        assert_eq!(h_payoff(0.3, 0.3).unwrap(), 1.0);
        assert!(h_payoff(1.0, 1.0).is_err());
    }

    #[test]
    fn value_examples() {
        assert!((apr_mon_value(1.0 / E).unwrap() - 0.5).abs() < 1e-15);
        assert!((apr_mon_value(E.powi(-2)).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(apr_mon_value(1.0).unwrap(), 1.0);
        assert!(apr_mon_value(1e-6).unwrap() < 0.07);
    }

    #[test]
    fn strategies_have_unit_mass() {
        for a in [0.1, 0.5, 0.9] {
            assert!((approx_sender_opt(a).unwrap().total_mass() - 1.0).abs() < 1e-12);
            assert!((approx_adversary_opt(a).unwrap().total_mass() - 1.0).abs() < 1e-12);
        }
        let x = approx_adversary_opt(1.0 / E).unwrap();
        assert!((x.atoms()[0].weight - 0.5).abs() < 1e-15);
        assert!((x.pieces()[0].mass() - 0.5).abs() < 1e-12);
        let y = approx_sender_opt(1.0 / E).unwrap();
        assert!((y.atoms()[0].at - (1.0 - 1.0 / E)).abs() < 1e-15);
    }

    #[test]
    fn ratio_conventions() {
        let mu = Prior::new(vec![0.5, 0.5]).unwrap();
        let neg = ReceiverUtility::new(vec![-1.0, -2.0]).unwrap();
        assert_eq!(approx_of_scheme(&FiniteScheme::no_information(&mu), &mu, &neg).unwrap(), 1.0);
        let u = ReceiverUtility::new(vec![-0.5, 0.25]).unwrap();
        assert_eq!(approx_of_scheme(&FiniteScheme::no_information(&mu), &mu, &u).unwrap(), 0.0);
    }

    #[test]
    fn reg_apr_inequality() {
        assert!(check_reg_apr(1.0 / E, 1.0).unwrap());
        let reg = -0.5 * 0.5f64.ln();
        assert!(check_reg_apr(reg, apr_mon_value(0.5).unwrap()).unwrap());
        assert!(!check_reg_apr(0.9, 0.2).unwrap());
        assert!(check_reg_apr(0.0, 1.0).unwrap());
    }

    #[test]
    fn reduction_chord_reaches_one() {
        for mu_n in [0.05, 0.3, 0.7] {
            let f = approx_reduction_uprime(mu_n).unwrap();
            let c = concavify_at(&f, 1.0 - mu_n).unwrap();
            assert_eq!(c.support.1, 1.0);
            assert!((c.value - ApproxGameSpec::new(mu_n).unwrap().beta()).abs() < 1e-12);
        }
    }
}
