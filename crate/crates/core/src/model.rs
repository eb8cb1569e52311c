//! Priors, posteriors, receiver utilities, finite signaling schemes and
//! threshold schemes.
//!
//! A signaling scheme is represented by the distribution over posteriors it
//! induces. A scheme is implementable exactly when its average posterior is
//! the prior, which [`is_bayes_plausible`] checks.

use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};

/// Tolerance for probability vectors read from user input.
pub const INPUT_TOL: f64 = 1e-12;
/// Tolerance for Bayes-plausibility of computed schemes.
pub const PLAUSIBILITY_TOL: f64 = 1e-9;

fn validate_simplex(field: &'static str, probs: &[f64], strict: bool) -> Result<()> {
    if probs.is_empty() {
        return Err(PersuasionError::Empty { field });
    }
    for (index, &value) in probs.iter().enumerate() {
        if !value.is_finite() {
            return Err(PersuasionError::NonFinite { field, index });
        }
        if strict && value <= 0.0 {
            return Err(PersuasionError::NonPositivePrior { index, value });
        }
        if value < 0.0 {
            return Err(PersuasionError::Negative { field, index, value });
        }
    }
    let sum: f64 = probs.iter().sum();
    if (sum - 1.0).abs() > INPUT_TOL {
        return Err(PersuasionError::NotNormalized { field, sum });
    }
    Ok(())
}

/// Common-knowledge prior over the states `0..n`. Every entry is strictly
/// positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Prior {
    probs: Vec<f64>,
}

impl Prior {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_simplex("prior", &probs, true)?;
        Ok(Self { probs })
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Normalizes strictly positive weights into a prior.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(PersuasionError::NotNormalized { field: "prior", sum: total });
        }
        Self::new(weights.iter().map(|w| w / total).collect())
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// Mass of the last state, the one a monotone receiver likes best.
    pub fn top_mass(&self) -> f64 {
        *self.probs.last().expect("prior is non-empty")
    }

    pub fn min_mass(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn as_posterior(&self) -> Posterior {
        Posterior { probs: self.probs.clone() }
    }
}

impl TryFrom<Vec<f64>> for Prior {
    type Error = PersuasionError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Prior> for Vec<f64> {
    fn from(p: Prior) -> Self {
        p.probs
    }
}

/// A receiver belief over states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Posterior {
    probs: Vec<f64>,
}

impl Posterior {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        validate_simplex("posterior", &probs, false)?;
        Ok(Self { probs })
    }

    /// Normalizes a non-negative mass vector (the per-state mass a signal
    /// collects) into the posterior it induces.
    pub fn from_masses(masses: &[f64]) -> Result<Self> {
        let total: f64 = masses.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(PersuasionError::NotNormalized { field: "signal mass", sum: total });
        }
        let probs = masses.iter().map(|m| (m / total).max(0.0)).collect();
        Ok(Self { probs })
    }

    /// Point mass on `state`.
    pub fn degenerate(n: usize, state: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[state] = 1.0;
        Self { probs }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

impl TryFrom<Vec<f64>> for Posterior {
    type Error = PersuasionError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Posterior> for Vec<f64> {
    fn from(p: Posterior) -> Self {
        p.probs
    }
}

/// Receiver's adoption utilities `u(i, adopt)`; rejecting is worth 0 in every
/// state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ReceiverUtility {
    adopt_utils: Vec<f64>,
}

impl ReceiverUtility {
    pub fn new(adopt_utils: Vec<f64>) -> Result<Self> {
        if adopt_utils.is_empty() {
            return Err(PersuasionError::Empty { field: "utility" });
        }
        if let Some(index) = adopt_utils.iter().position(|u| !u.is_finite()) {
            return Err(PersuasionError::NonFinite { field: "utility", index });
        }
        Ok(Self { adopt_utils })
    }

    pub fn len(&self) -> usize {
        self.adopt_utils.len()
    }

    pub fn is_empty(&self) -> bool {
        self.adopt_utils.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.adopt_utils
    }

    /// Non-decreasing in the state index.
    pub fn is_monotone(&self) -> bool {
        self.adopt_utils.windows(2).all(|w| w[0] <= w[1])
    }
}

impl TryFrom<Vec<f64>> for ReceiverUtility {
    type Error = PersuasionError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<ReceiverUtility> for Vec<f64> {
    fn from(u: ReceiverUtility) -> Self {
        u.adopt_utils
    }
}

fn check_dims(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(PersuasionError::DimensionMismatch { expected, got })
    }
}

/// Receiver's expected adoption utility at posterior `p`.
pub fn expected_adopt_utility(p: &Posterior, u: &ReceiverUtility) -> Result<f64> {
    check_dims(p.len(), u.len())?;
    Ok(p.probs.iter().zip(&u.adopt_utils).map(|(a, b)| a * b).sum())
}

/// Whether the receiver adopts at `p`. Ties go to adoption.
pub fn adopts(p: &Posterior, u: &ReceiverUtility) -> Result<bool> {
    adopts_with_tolerance(p, u, 0.0)
}

/// Adoption with a slack: adopts iff the expectation is at least `-eps`.
pub fn adopts_with_tolerance(p: &Posterior, u: &ReceiverUtility, eps: f64) -> Result<bool> {
    Ok(expected_adopt_utility(p, u)? >= -eps)
}

/// One posterior of a scheme together with its probability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeAtom {
    pub posterior: Posterior,
    pub weight: f64,
}

/// A signaling scheme with finitely many signals, stored as the
/// distribution over posteriors it induces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawScheme")]
pub struct FiniteScheme {
    atoms: Vec<SchemeAtom>,
}

#[derive(Deserialize)]
struct RawScheme {
    atoms: Vec<SchemeAtom>,
}

impl TryFrom<RawScheme> for FiniteScheme {
    type Error = PersuasionError;
    fn try_from(raw: RawScheme) -> Result<Self> {
        Self::new(raw.atoms)
    }
}

impl FiniteScheme {
    pub fn new(atoms: Vec<SchemeAtom>) -> Result<Self> {
        let first = atoms.first().ok_or(PersuasionError::Empty { field: "atoms" })?;
        let n = first.posterior.len();
        for (index, atom) in atoms.iter().enumerate() {
            check_dims(n, atom.posterior.len())?;
            if !atom.weight.is_finite() {
                return Err(PersuasionError::NonFinite { field: "weight", index });
            }
            if atom.weight < 0.0 {
                return Err(PersuasionError::Negative { field: "weight", index, value: atom.weight });
            }
        }
        let sum: f64 = atoms.iter().map(|a| a.weight).sum();
        if (sum - 1.0).abs() > PLAUSIBILITY_TOL {
            return Err(PersuasionError::NotNormalized { field: "weights", sum });
        }
        Ok(Self { atoms })
    }

    /// Builds a scheme from per-signal mass vectors: `signals[k][i]` is the
    /// joint probability of state `i` and signal `k`. Empty signals are
    /// dropped.
    pub fn from_signal_masses(signals: &[Vec<f64>]) -> Result<Self> {
        let mut atoms = Vec::with_capacity(signals.len());
        for masses in signals {
            let weight: f64 = masses.iter().sum();
            if weight > 0.0 {
                atoms.push(SchemeAtom { posterior: Posterior::from_masses(masses)?, weight });
            }
        }
        Self::new(atoms)
    }

    /// The scheme that reveals nothing: a single posterior equal to the prior.
    pub fn no_information(mu: &Prior) -> Self {
        Self { atoms: vec![SchemeAtom { posterior: mu.as_posterior(), weight: 1.0 }] }
    }

    /// The scheme that reveals the state.
    pub fn full_revelation(mu: &Prior) -> Self {
        let n = mu.len();
        Self {
            atoms: mu
                .probs()
                .iter()
                .enumerate()
                .map(|(i, &w)| SchemeAtom { posterior: Posterior::degenerate(n, i), weight: w })
                .collect(),
        }
    }

    pub fn atoms(&self) -> &[SchemeAtom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.atoms[0].posterior.len()
    }

    /// Merges atoms whose posteriors agree entry-wise within `tol`.
    pub fn merged(&self, tol: f64) -> Self {
        let mut out: Vec<SchemeAtom> = Vec::with_capacity(self.atoms.len());
        for atom in &self.atoms {
            let same = out.iter_mut().find(|a| {
                a.posterior.probs.iter().zip(&atom.posterior.probs).all(|(x, y)| (x - y).abs() <= tol)
            });
            match same {
                Some(a) => a.weight += atom.weight,
                None => out.push(atom.clone()),
            }
        }
        Self { atoms: out }
    }

    /// Average posterior.
    pub fn mean_posterior(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.dim()];
        for atom in &self.atoms {
            for (m, p) in mean.iter_mut().zip(atom.posterior.probs()) {
                *m += atom.weight * p;
            }
        }
        mean
    }
}

/// Whether the scheme's average posterior equals the prior within
/// [`PLAUSIBILITY_TOL`].
pub fn is_bayes_plausible(s: &FiniteScheme, mu: &Prior) -> Result<bool> {
    check_dims(mu.len(), s.dim())?;
    Ok(s.mean_posterior().iter().zip(mu.probs()).all(|(a, b)| (a - b).abs() <= PLAUSIBILITY_TOL))
}

/// Probability that the receiver adopts under scheme `s`.
pub fn sender_utility(s: &FiniteScheme, u: &ReceiverUtility) -> Result<f64> {
    let mut total = 0.0;
    for atom in s.atoms() {
        if adopts(&atom.posterior, u)? {
            total += atom.weight;
        }
    }
    Ok(total)
}

/// An ordering of the states laid out on `[0, 1]`: the state at position `m`
/// owns the segment `[cum[m-1], cum[m])` of the real-valued state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateOrdering {
    order: Vec<usize>,
    cum: Vec<f64>,
}

impl StateOrdering {
    pub fn new(mu: &Prior, order: Vec<usize>) -> Result<Self> {
        let n = mu.len();
        check_dims(n, order.len())?;
        let mut seen = vec![false; n];
        for &s in &order {
            if s >= n || seen[s] {
                return Err(PersuasionError::InvalidOrdering(format!(
                    "{order:?} is not a permutation of 0..{n}"
                )));
            }
            seen[s] = true;
        }
        let mut acc = 0.0;
        let mut cum: Vec<f64> = order
            .iter()
            .map(|&s| {
                acc += mu.probs()[s];
                acc
            })
            .collect();
        // The last segment ends at exactly 1 regardless of rounding.
        *cum.last_mut().expect("non-empty") = 1.0;
        Ok(Self { order, cum })
    }

    pub fn identity(mu: &Prior) -> Self {
        Self::new(mu, (0..mu.len()).collect()).expect("identity is a permutation")
    }

    /// Orders states by non-decreasing utility. Among equal utilities the
    /// lower state index sits higher, so it is pooled first.
    pub fn by_utility(mu: &Prior, u: &ReceiverUtility) -> Result<Self> {
        check_dims(mu.len(), u.len())?;
        let vals = u.values();
        let mut desc: Vec<usize> = (0..mu.len()).collect();
        desc.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
        desc.reverse();
        Self::new(mu, desc)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    /// Segment `[lo, hi)` owned by the state at `position`.
    pub fn segment(&self, position: usize) -> (f64, f64) {
        let lo = if position == 0 { 0.0 } else { self.cum[position - 1] };
        (lo, self.cum[position])
    }

    /// The state owning real-valued state `r`.
    pub fn state_at(&self, r: f64) -> usize {
        let pos = self.cum.partition_point(|&c| c <= r).min(self.order.len() - 1);
        self.order[pos]
    }
}

/// Binary scheme revealing whether the real-valued state is below `t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdScheme {
    t: f64,
    ordering: StateOrdering,
}

impl ThresholdScheme {
    pub fn new(t: f64, ordering: StateOrdering) -> Result<Self> {
        crate::error::check_range("t", t, (0.0..=1.0).contains(&t), "[0, 1]")?;
        Ok(Self { t, ordering })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn ordering(&self) -> &StateOrdering {
        &self.ordering
    }

    /// Per-state joint masses of the high and the low signal.
    pub fn signal_masses(&self, mu: &Prior) -> (Vec<f64>, Vec<f64>) {
        let n = mu.len();
        let mut high = vec![0.0; n];
        let mut low = vec![0.0; n];
        for (pos, &state) in self.ordering.order.iter().enumerate() {
            let (lo, hi) = self.ordering.segment(pos);
            let m = mu.probs()[state];
            // whole states on either side are assigned exactly
            let h = if self.t <= lo {
                m
            } else if self.t >= hi {
                0.0
            } else {
                (hi - self.t).clamp(0.0, m)
            };
            high[state] = h;
            low[state] = m - h;
        }
        (high, low)
    }
}

/// Posterior distribution induced by a threshold scheme.
///
/// `t = 0` reveals nothing. `t = 1` sends the low signal always, which as a
/// posterior distribution is again the prior.
pub fn threshold_to_finite(ts: &ThresholdScheme, mu: &Prior) -> Result<FiniteScheme> {
    if mu.is_empty() {
        return Err(PersuasionError::Empty { field: "prior" });
    }
    check_dims(mu.len(), ts.ordering.order.len())?;
    if ts.t <= 0.0 || ts.t >= 1.0 {
        return Ok(FiniteScheme::no_information(mu));
    }
    let (high, low) = ts.signal_masses(mu);
    FiniteScheme::from_signal_masses(&[high, low])
}
