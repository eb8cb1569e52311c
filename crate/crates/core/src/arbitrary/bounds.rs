//! Bounds for arbitrary utilities with `n` states: a scheme that keeps
//! regret below `1 - 1/(4n^2)`, and the good/normal/bad construction that
//! forces regret at least `1 - 2/sqrt(n)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::model::{FiniteScheme, Prior, ReceiverUtility};
use crate::monotone::regret_of_scheme;
use crate::rng::stream;

/// States of mass at least `1/(2n)`.
pub fn heavy_states(mu: &Prior) -> Vec<usize> {
    let cut = 1.0 / (2.0 * mu.len() as f64);
    (0..mu.len()).filter(|&i| mu.probs()[i] >= cut).collect()
}

/// Each heavy state `i` keeps most of its mass on its own signal `s_i` and
/// sends a little to one shared signal `s_{i,j}` per light state `j`; each
/// light state splits half its mass between its own signal and those pairs.
pub fn thm2_upper_scheme(mu: &Prior) -> Result<FiniteScheme> {
    let n = mu.len();
    let p = mu.probs();
    let heavy = heavy_states(mu);
    let light: Vec<usize> = (0..n).filter(|i| !heavy.contains(i)).collect();
    let nf = n as f64;
    let mut signals = Vec::with_capacity(n + heavy.len() * light.len());
    for i in 0..n {
        let mut v = vec![0.0; n];
        v[i] = if light.is_empty() {
            p[i]
        } else if heavy.contains(&i) {
            (1.0 - 1.0 / (2.0 * nf)) * p[i]
        } else {
            p[i] / 2.0
        };
        signals.push(v);
    }
    for &i in &heavy {
        for &j in &light {
            let mut v = vec![0.0; n];
            v[i] = p[i] / (2.0 * nf * light.len() as f64);
            v[j] = p[j] / (2.0 * heavy.len() as f64);
            signals.push(v);
        }
    }
    FiniteScheme::from_signal_masses(&signals)
}

/// Signed exponential utility: each entry `+-Exp(1)` with a fair sign.
pub fn signed_exp_utility(n: usize, rng: &mut impl Rng) -> ReceiverUtility {
    let u = (0..n)
        .map(|_| {
            let m: f64 = Exp1.sample(rng);
            if rng.random::<bool>() {
                m
            } else {
                -m
            }
        })
        .collect();
    ReceiverUtility::new(u).expect("finite")
}

/// One state with utility `Exp(1)`, all others `-Exp(1)`.
pub fn single_positive_utility(n: usize, rng: &mut impl Rng) -> ReceiverUtility {
    let good = rng.random_range(0..n);
    let u = (0..n)
        .map(|i| {
            let m: f64 = Exp1.sample(rng);
            if i == good {
                m
            } else {
                -m
            }
        })
        .collect();
    ReceiverUtility::new(u).expect("finite")
}

/// `1/mu(T)` on `T` and `-1/mu(T^c)` elsewhere, so the prior sits exactly
/// on the adoption boundary. `T` is a bitmask over states.
pub fn knife_edge_utility(mu: &Prior, t: u64) -> Result<ReceiverUtility> {
    let n = mu.len();
    let inside = |i: usize| t >> i & 1 == 1;
    let mass_t: f64 = (0..n).filter(|&i| inside(i)).map(|i| mu.probs()[i]).sum();
    if mass_t <= 0.0 || mass_t >= 1.0 || n > 63 {
        return Err(PersuasionError::InvalidGame("T must be a nonempty proper subset".into()));
    }
    let u = (0..n).map(|i| if inside(i) { 1.0 / mass_t } else { -1.0 / (1.0 - mass_t) }).collect();
    ReceiverUtility::new(u)
}

/// Every knife-edge utility, plus `1` on one state and `-1` elsewhere for
/// each state.
pub fn structured_utilities(mu: &Prior) -> Vec<ReceiverUtility> {
    let n = mu.len();
    let mut out: Vec<ReceiverUtility> =
        (1..(1u64 << n) - 1).map(|t| knife_edge_utility(mu, t).expect("proper subset")).collect();
    for i in 0..n {
        let mut u = vec![-1.0; n];
        u[i] = 1.0;
        out.push(ReceiverUtility::new(u).expect("finite"));
    }
    out
}

/// Random prior with `Exp(1)^skew` weights; larger `skew` gives more states
/// below `1/(2n)`.
pub fn random_prior(n: usize, skew: f64, rng: &mut impl Rng) -> Prior {
    loop {
        let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).map(|x: f64| x.powf(skew)).collect();
        if w.iter().all(|&x| x > 0.0 && x.is_finite()) {
            if let Ok(p) = Prior::from_weights(&w) {
                return p;
            }
        }
    }
}

/// Largest regret of `s` over `samples` random utilities (half signed
/// exponential, half single-positive) and all structured ones.
pub fn max_regret_random(s: &FiniteScheme, mu: &Prior, samples: usize, seed: u64) -> Result<f64> {
    let n = mu.len();
    let random = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream(seed, k as u64);
            let u = if k % 2 == 0 {
                signed_exp_utility(n, &mut rng)
            } else {
                single_positive_utility(n, &mut rng)
            };
            regret_of_scheme(s, mu, &u)
        })
        .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?;
    let structured = if n <= 20 {
        structured_utilities(mu)
            .par_iter()
            .map(|u| regret_of_scheme(s, mu, u))
            .try_reduce(|| f64::NEG_INFINITY, |a, b| Ok(a.max(b)))?
    } else {
        f64::NEG_INFINITY
    };
    Ok(random.max(structured))
}

/// `1 - 1/(4n^2)`.
pub fn thm2_upper_bound(n: usize) -> f64 {
    1.0 - 1.0 / (4.0 * (n * n) as f64)
}

/// `1 - 2/sqrt(n)`.
pub fn thm2_lower_bound(n: usize) -> f64 {
    1.0 - 2.0 / (n as f64).sqrt()
}

fn isqrt(n: usize) -> usize {
    let mut b = (n as f64).sqrt() as usize;
    while b * b > n {
        b -= 1;
    }
    while (b + 1) * (b + 1) <= n {
        b += 1;
    }
    b
}

fn check_supp(n: usize, s: usize) -> Result<()> {
    if n < 16 {
        return Err(PersuasionError::OutOfRange { name: "n", value: n as f64, range: ">= 16" });
    }
    if s == 0 || s > n {
        return Err(PersuasionError::OutOfRange { name: "supp_size", value: s as f64, range: "[1, n]" });
    }
    Ok(())
}

fn ratio(a: usize, b: usize) -> BigRational {
    BigRational::new(BigInt::from(a), BigInt::from(b))
}

/// Exact adoption bound for a posterior whose support has `s` states, under
/// a uniformly random labelling: `s/n` when `s <= floor(sqrt n)`, otherwise
/// the probability that no bad state and the good state are both in the
/// support.
pub fn thm2_lower_adoption_prob_exact(n: usize, s: usize) -> Result<BigRational> {
    check_supp(n, s)?;
    let b = isqrt(n);
    if s <= b {
        return Ok(ratio(s, n));
    }
    let mut p = BigRational::one();
    for r in 0..s {
        if n - r <= b {
            return Ok(BigRational::zero());
        }
        p *= ratio(n - r - b, n - r);
    }
    let good = if s >= n - b { BigRational::one() } else { ratio(s, n - b) };
    Ok(p * good)
}

pub fn thm2_lower_adoption_prob(n: usize, s: usize) -> Result<f64> {
    Ok(thm2_lower_adoption_prob_exact(n, s)?.to_f64().expect("in [0, 1]"))
}

/// Exact check of `p <= 1/sqrt(n)`, as `p^2 n <= 1`.
pub fn adoption_prob_within_bound(n: usize, s: usize) -> Result<bool> {
    let p = thm2_lower_adoption_prob_exact(n, s)?;
    Ok(&p * &p * BigRational::from_integer(BigInt::from(n)) <= BigRational::one())
}

/// Monte Carlo estimate of the probability that a fixed set of `s` states
/// contains the good state and no bad one.
pub fn adoption_prob_monte_carlo(n: usize, s: usize, trials: usize, seed: u64) -> Result<f64> {
    check_supp(n, s)?;
    let b = isqrt(n);
    const CHUNK: usize = 1 << 14;
    let hits: usize = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            // labels: 0 good, 1 normal, 2 bad
            let mut labels: Vec<u8> = (0..n)
                .map(|i| {
                    if i == 0 {
                        0
                    } else if i <= b {
                        2
                    } else {
                        1
                    }
                })
                .collect();
            let len = CHUNK.min(trials - c * CHUNK);
            (0..len)
                .filter(|_| {
                    labels.shuffle(&mut rng);
                    let head = &labels[..s];
                    head.contains(&0) && !head.contains(&2)
                })
                .count()
        })
        .sum();
    Ok(hits as f64 / trials as f64)
}

/// Default `delta = min mu / (4n)`.
pub fn default_delta(mu: &Prior) -> f64 {
    mu.min_mass() / (4.0 * mu.len() as f64)
}

/// One good state, `floor(sqrt n)` bad ones, the rest normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoodNormalBadInstance {
    prior: Prior,
    delta: f64,
    good: usize,
    bad: Vec<usize>,
}

impl GoodNormalBadInstance {
    /// Labels from `perm`: `perm[0]` is good and the next `floor(sqrt n)`
    /// entries are bad.
    pub fn new(prior: Prior, delta: f64, perm: &[usize]) -> Result<Self> {
        let n = prior.len();
        if perm.len() != n {
            return Err(PersuasionError::DimensionMismatch { expected: n, got: perm.len() });
        }
        let mut seen = vec![false; n];
        for &i in perm {
            if i >= n || std::mem::replace(&mut seen[i], true) {
                return Err(PersuasionError::InvalidOrdering("labels must be a permutation".into()));
            }
        }
        let cap = prior.min_mass() / (2.0 * n as f64);
        if !(delta > 0.0 && delta < cap) {
            return Err(PersuasionError::OutOfRange {
                name: "delta",
                value: delta,
                range: "(0, min mu / (2n))",
            });
        }
        let b = isqrt(n);
        Ok(Self { good: perm[0], bad: perm[1..=b].to_vec(), prior, delta })
    }

    /// Labels from a seeded uniform permutation.
    pub fn random(prior: Prior, delta: f64, seed: u64) -> Result<Self> {
        let mut perm: Vec<usize> = (0..prior.len()).collect();
        perm.shuffle(&mut stream(seed, 0));
        Self::new(prior, delta, &perm)
    }

    pub fn prior(&self) -> &Prior {
        &self.prior
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn good(&self) -> usize {
        self.good
    }

    pub fn bad(&self) -> &[usize] {
        &self.bad
    }

    /// Total prior mass of the normal states.
    pub fn normal_mass(&self) -> f64 {
        let p = self.prior.probs();
        (0..p.len()).filter(|&i| i != self.good && !self.bad.contains(&i)).map(|i| p[i]).sum()
    }

    /// `1/mu_good` on the good state, `-1/mu_normal` on each normal one
    /// (with `mu_normal` their total mass) and `-1/(delta mu_good)` on bad.
    pub fn utility(&self) -> ReceiverUtility {
        let p = self.prior.probs();
        let normal = self.normal_mass();
        let u = (0..p.len())
            .map(|i| {
                if i == self.good {
                    1.0 / p[i]
                } else if self.bad.contains(&i) {
                    -1.0 / (self.delta * p[self.good])
                } else {
                    -1.0 / normal
                }
            })
            .collect();
        ReceiverUtility::new(u).expect("finite")
    }
}

/// Number of entries above `delta`.
pub fn supp_delta(p: &[f64], delta: f64) -> usize {
    p.iter().filter(|&&v| v > delta).count()
}

/// Outcome of the lower-bound certificate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundCheck {
    /// `1 - floor(sqrt n)/n`, a floor on the knowledgeable optimum.
    pub u_star_lb: f64,
    /// Ceiling on the scheme's expected utility over random labellings.
    pub scheme_utility_ub: f64,
    /// `1 - 2/sqrt(n)`.
    pub bound: f64,
    pub certified: bool,
}

/// Bounds the regret of `scheme` on the good/normal/bad instance from below
/// by `u_star_lb - scheme_utility_ub`.
pub fn thm2_lower_bound_check(n: usize, scheme: &FiniteScheme, delta: f64) -> Result<LowerBoundCheck> {
    if scheme.dim() != n {
        return Err(PersuasionError::DimensionMismatch { expected: n, got: scheme.dim() });
    }
    let b = isqrt(n);
    let u_star_lb = 1.0 - b as f64 / n as f64;
    let mut ub = 0.0f64;
    for atom in scheme.atoms() {
        let s = supp_delta(atom.posterior.probs(), delta);
        if s > 0 {
            ub = ub.max(thm2_lower_adoption_prob(n, s)?);
        }
    }
    let bound = thm2_lower_bound(n);
    Ok(LowerBoundCheck {
        u_star_lb,
        scheme_utility_ub: ub,
        bound,
        certified: u_star_lb - ub >= bound - 1e-12,
    })
}
