//! States on a grid `n_1 x ... x n_k` with utilities monotone in every
//! coordinate. Grids are stored row-major, the last dimension fastest.

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::error::{PersuasionError, Result};
use crate::model::{sender_utility, FiniteScheme, Prior, ReceiverUtility, INPUT_TOL};
use crate::rng::stream;
use crate::standard::optimal_knapsack;

/// Prior over the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridPrior {
    /// One marginal per dimension.
    Marginals(Vec<Vec<f64>>),
    /// Full joint, row-major.
    Joint(Vec<f64>),
}

#[derive(Deserialize, Serialize)]
struct RawGrid {
    dims: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    marginals: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    joint: Option<Vec<f64>>,
    utility: Vec<f64>,
}

/// A grid instance: prior and adoption utilities indexed by grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", into = "RawGrid")]
pub struct GridInstance {
    dims: Vec<usize>,
    prior: GridPrior,
    utility: Vec<f64>,
}

impl TryFrom<RawGrid> for GridInstance {
    type Error = PersuasionError;

    fn try_from(raw: RawGrid) -> Result<Self> {
        let prior = match (raw.marginals, raw.joint) {
            (Some(m), None) => GridPrior::Marginals(m),
            (None, Some(j)) => GridPrior::Joint(j),
            _ => {
                return Err(PersuasionError::InvalidDistribution(
                    "exactly one of \"marginals\" and \"joint\" is required".into(),
                ))
            }
        };
        GridInstance::new(raw.dims, prior, raw.utility)
    }
}

impl From<GridInstance> for RawGrid {
    fn from(g: GridInstance) -> Self {
        let (marginals, joint) = match g.prior {
            GridPrior::Marginals(m) => (Some(m), None),
            GridPrior::Joint(j) => (None, Some(j)),
        };
        RawGrid { dims: g.dims, marginals, joint, utility: g.utility }
    }
}

fn check_distribution(field: &'static str, p: &[f64]) -> Result<()> {
    // Prior::new carries the positivity and normalization checks.
    Prior::new(p.to_vec()).map(|_| ()).map_err(|e| match e {
        PersuasionError::NotNormalized { sum, .. } => PersuasionError::NotNormalized { field, sum },
        other => other,
    })
}

impl GridInstance {
    pub fn new(dims: Vec<usize>, prior: GridPrior, utility: Vec<f64>) -> Result<Self> {
        if dims.is_empty() || dims.contains(&0) {
            return Err(PersuasionError::Empty { field: "dims" });
        }
        let cells = dims
            .iter()
            .try_fold(1usize, |a, &b| a.checked_mul(b))
            .ok_or_else(|| PersuasionError::InvalidGrid("grid too large".into()))?;
        match &prior {
            GridPrior::Marginals(m) => {
                if m.len() != dims.len() {
                    return Err(PersuasionError::DimensionMismatch { expected: dims.len(), got: m.len() });
                }
                for (marg, &n) in m.iter().zip(&dims) {
                    if marg.len() != n {
                        return Err(PersuasionError::DimensionMismatch { expected: n, got: marg.len() });
                    }
                    check_distribution("marginals", marg)?;
                }
            }
            GridPrior::Joint(j) => {
                if j.len() != cells {
                    return Err(PersuasionError::DimensionMismatch { expected: cells, got: j.len() });
                }
                check_distribution("joint", j)?;
            }
        }
        if utility.len() != cells {
            return Err(PersuasionError::DimensionMismatch { expected: cells, got: utility.len() });
        }
        if let Some(index) = utility.iter().position(|v| !v.is_finite()) {
            return Err(PersuasionError::NonFinite { field: "utility", index });
        }
        Ok(Self { dims, prior, utility })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn prior(&self) -> &GridPrior {
        &self.prior
    }

    pub fn utility(&self) -> &[f64] {
        &self.utility
    }

    pub fn with_utility(&self, utility: Vec<f64>) -> Result<Self> {
        Self::new(self.dims.clone(), self.prior.clone(), utility)
    }

    pub fn cells(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_product(&self) -> bool {
        matches!(self.prior, GridPrior::Marginals(_))
    }

    /// Joint prior, row-major.
    pub fn joint(&self) -> Vec<f64> {
        match &self.prior {
            GridPrior::Joint(j) => j.clone(),
            GridPrior::Marginals(m) => (0..self.cells())
                .map(|c| coords(&self.dims, c).iter().zip(m).map(|(&i, marg)| marg[i]).product())
                .collect(),
        }
    }

    pub fn flat_prior(&self) -> Result<Prior> {
        Prior::from_weights(&self.joint())
    }

    pub fn flat_utility(&self) -> ReceiverUtility {
        ReceiverUtility::new(self.utility.clone()).expect("validated")
    }

    /// Monotone in every coordinate, checked on adjacent cells.
    pub fn is_monotone(&self) -> bool {
        is_monotone_grid(&self.dims, &self.utility)
    }
}

/// Coordinates of cell `c`.
pub fn coords(dims: &[usize], mut c: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for j in (0..dims.len()).rev() {
        out[j] = c % dims[j];
        c /= dims[j];
    }
    out
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for j in (0..dims.len().saturating_sub(1)).rev() {
        s[j] = s[j + 1] * dims[j + 1];
    }
    s
}

pub fn is_monotone_grid(dims: &[usize], u: &[f64]) -> bool {
    let st = strides(dims);
    (0..u.len()).all(|c| {
        let x = coords(dims, c);
        (0..dims.len()).all(|j| x[j] + 1 >= dims[j] || u[c] <= u[c + st[j]])
    })
}

/// Upward-closed box `{r : r_j >= thresholds_j}` in the continuous cube
/// where state `m` of dimension `j` owns its cumulative-mass segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackRegion {
    thresholds: Vec<f64>,
}

impl KnapsackRegion {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if let Some(&t) = thresholds.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(PersuasionError::OutOfRange { name: "threshold", value: t, range: "[0, 1]" });
        }
        Ok(Self { thresholds })
    }

    /// The box above the median of every dimension.
    pub fn median(k: usize) -> Self {
        Self { thresholds: vec![0.5; k] }
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }

    pub fn contains(&self, r: &[f64]) -> bool {
        r.iter().zip(&self.thresholds).all(|(a, t)| a >= t)
    }

    /// Fraction of each grid cell's mass inside the box, for a product
    /// prior.
    pub fn cell_fractions(&self, marginals: &[Vec<f64>]) -> Vec<Vec<f64>> {
        marginals
            .iter()
            .zip(&self.thresholds)
            .map(|(marg, &t)| {
                let mut lo = 0.0;
                marg.iter()
                    .enumerate()
                    .map(|(i, &p)| {
                        let hi = if i + 1 == marg.len() { 1.0 } else { lo + p };
                        let f = ((hi - lo.max(t)) / p).clamp(0.0, 1.0);
                        lo = hi;
                        f
                    })
                    .collect()
            })
            .collect()
    }
}

/// Reveals whether the continuous state lies in the median box.
pub fn median_knapsack_scheme(inst: &GridInstance) -> Result<FiniteScheme> {
    let GridPrior::Marginals(m) = inst.prior() else {
        return Err(PersuasionError::Unsupported("the median scheme needs a product prior".into()));
    };
    let frac = KnapsackRegion::median(inst.dims().len()).cell_fractions(m);
    let joint = inst.joint();
    let mut high = vec![0.0; joint.len()];
    let mut low = vec![0.0; joint.len()];
    for c in 0..joint.len() {
        let f: f64 = coords(inst.dims(), c).iter().enumerate().map(|(j, &i)| frac[j][i]).product();
        high[c] = joint[c] * f;
        low[c] = joint[c] - high[c];
    }
    FiniteScheme::from_signal_masses(&[high, low])
}

/// Regret of the median scheme and the bound `1 - 2^-k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MdCheck {
    pub regret: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn md_regret_bound_check(inst: &GridInstance) -> Result<MdCheck> {
    if !inst.is_monotone() {
        return Err(PersuasionError::InvalidGame("utility is not monotone".into()));
    }
    let s = median_knapsack_scheme(inst)?;
    let u = inst.flat_utility();
    let regret = optimal_knapsack(&inst.flat_prior()?, &u)?.optimal_utility - sender_utility(&s, &u)?;
    let bound = 1.0 - 0.5f64.powi(inst.dims().len() as i32);
    Ok(MdCheck { regret, bound, holds: regret <= bound + 1e-9 })
}

/// `m x m` grid with mass `1 - eps` spread over the anti-diagonal and `eps`
/// over the rest. Utility is zero.
pub fn antidiagonal_embedding(m: usize, eps: f64) -> Result<GridInstance> {
    if m < 2 {
        return Err(PersuasionError::OutOfRange { name: "m", value: m as f64, range: ">= 2" });
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(PersuasionError::OutOfRange { name: "eps", value: eps, range: "(0, 1)" });
    }
    let joint = (0..m * m)
        .map(|c| if c / m + c % m == m - 1 { (1.0 - eps) / m as f64 } else { eps / (m * m - m) as f64 })
        .collect();
    GridInstance::new(vec![m, m], GridPrior::Joint(joint), vec![0.0; m * m])
}

/// Cells of the anti-diagonal, from `(0, m-1)` down to `(m-1, 0)`.
pub fn antidiagonal_cells(m: usize) -> Vec<usize> {
    (0..m).map(|i| i * m + (m - 1 - i)).collect()
}

/// Monotone grid utility with the given values on the anti-diagonal: the
/// minimum of them below it, the maximum above.
pub fn embed_antidiagonal_utility(m: usize, diag: &[f64]) -> Result<Vec<f64>> {
    if diag.len() != m {
        return Err(PersuasionError::DimensionMismatch { expected: m, got: diag.len() });
    }
    let lo = diag.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = diag.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((0..m * m)
        .map(|c| match (c / m + c % m).cmp(&(m - 1)) {
            std::cmp::Ordering::Less => lo,
            std::cmp::Ordering::Equal => diag[c / m],
            std::cmp::Ordering::Greater => hi,
        })
        .collect())
}

/// Prefix sums of `increments` over every dimension minus `offset`.
pub fn monotone_from_increments(dims: &[usize], increments: &[f64], offset: f64) -> Result<Vec<f64>> {
    let cells: usize = dims.iter().product();
    if increments.len() != cells {
        return Err(PersuasionError::DimensionMismatch { expected: cells, got: increments.len() });
    }
    if let Some(index) = increments.iter().position(|&v| v < 0.0 || !v.is_finite()) {
        return Err(PersuasionError::Negative { field: "increments", index, value: increments[index] });
    }
    let st = strides(dims);
    let mut u = increments.to_vec();
    for j in 0..dims.len() {
        for c in 0..cells {
            if coords(dims, c)[j] > 0 {
                u[c] += u[c - st[j]];
            }
        }
    }
    Ok(u.into_iter().map(|v| v - offset).collect())
}

/// Random monotone utility: half the increments are zero, the rest
/// `Exp(1)`, with an offset uniform on the range so both signs occur.
pub fn sample_monotone_utility(dims: &[usize], seed: u64) -> Result<Vec<f64>> {
    let cells: usize = dims.iter().product();
    if cells == 0 || cells > 10_000 {
        return Err(PersuasionError::InvalidGrid(format!("grid of {cells} cells")));
    }
    let mut rng = stream(seed, 0);
    let inc: Vec<f64> =
        (0..cells).map(|_| if rng.random::<bool>() { Exp1.sample(&mut rng) } else { 0.0 }).collect();
    let base = monotone_from_increments(dims, &inc, 0.0)?;
    let top = base.iter().copied().fold(0.0, f64::max);
    let offset = rng.random::<f64>() * top;
    Ok(base.into_iter().map(|v| v - offset).collect())
}

/// Random product prior with `Exp(1)` marginal weights.
pub fn random_marginals(dims: &[usize], seed: u64) -> Vec<Vec<f64>> {
    let mut rng = stream(seed, 1);
    dims.iter()
        .map(|&n| {
            let w: Vec<f64> = (0..n).map(|_| Exp1.sample(&mut rng)).map(|x: f64| x.max(INPUT_TOL)).collect();
            let s: f64 = w.iter().sum();
            w.into_iter().map(|x| x / s).collect()
        })
        .collect()
}
