//! Finite zero-sum games as an independent check of the threshold-game
//! values: discretize a kernel on a grid and solve the matrix game by
//! multiplicative-weights self-play with a certified duality gap.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{approx_adversary_opt, approx_sender_opt, ApproxGameSpec};
use crate::error::{PersuasionError, Result};
use crate::kernel::Kernel;
use crate::mixed::MixedThreshold;
use crate::monotone::{adversary_opt, sender_opt, ThresholdGameSpec};

pub const DEFAULT_MAX_ITERS: usize = 2_000_000;

/// Bins used to compare solver strategies with the analytic ones.
pub const SHAPE_BINS: usize = 20;

/// A zero-sum game whose row player maximizes. Implementors only need to
/// provide the two matrix-vector products, so the matrix need not be stored.
pub trait PayoffOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `out[i] = sum_j A[i][j] q[j]`
    fn row_payoffs(&self, q: &[f64], out: &mut [f64]);
    /// `out[j] = sum_i p[i] A[i][j]`
    fn col_payoffs(&self, p: &[f64], out: &mut [f64]);
    /// `max A - min A`, used to scale the step size.
    fn payoff_range(&self) -> f64;
}

/// Dense payoff matrix, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixGame {
    rows: usize,
    cols: usize,
    payoff: Vec<f64>,
}

impl MatrixGame {
    pub fn new(payoff: Vec<Vec<f64>>) -> Result<Self> {
        let rows = payoff.len();
        let cols = payoff.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 {
            return Err(PersuasionError::InvalidGame("empty payoff matrix".into()));
        }
        if payoff.iter().any(|r| r.len() != cols) {
            return Err(PersuasionError::InvalidGame("ragged payoff matrix".into()));
        }
        let flat: Vec<f64> = payoff.into_iter().flatten().collect();
        if let Some(k) = flat.iter().position(|v| !v.is_finite()) {
            return Err(PersuasionError::InvalidGame(format!(
                "entry ({}, {}) is not finite",
                k / cols,
                k % cols
            )));
        }
        Ok(Self { rows, cols, payoff: flat })
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.payoff[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.payoff[i * self.cols..(i + 1) * self.cols]
    }
}

impl PayoffOperator for MatrixGame {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn row_payoffs(&self, q: &[f64], out: &mut [f64]) {
        out.par_iter_mut().enumerate().for_each(|(i, o)| {
            *o = self.row(i).iter().zip(q).map(|(a, b)| a * b).sum();
        });
    }

    fn col_payoffs(&self, p: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (i, &pi) in p.iter().enumerate() {
            if pi != 0.0 {
                for (o, a) in out.iter_mut().zip(self.row(i)) {
                    *o += pi * a;
                }
            }
        }
    }

    fn payoff_range(&self) -> f64 {
        let (lo, hi) =
            self.payoff.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
        (hi - lo).max(f64::MIN_POSITIVE)
    }
}

/// Uniform grid on `[lo, hi]` with `m` points including both endpoints.
pub fn uniform_grid(lo: f64, hi: f64, m: usize) -> Vec<f64> {
    let step = (hi - lo) / (m - 1) as f64;
    (0..m).map(|i| if i + 1 == m { hi } else { lo + step * i as f64 }).collect()
}

/// Dense discretization of a kernel on `[lo, hi]^2`. The entry `(i, j)` is
/// `kernel(x_i, y_j)`; with the same grid for both players the jump at
/// `y = x` sits on the diagonal and the indicator uses `>=`.
pub fn discretize(f: impl Fn(f64, f64) -> f64, lo: f64, hi: f64, m: usize) -> Result<MatrixGame> {
    if m < 2 {
        return Err(PersuasionError::InvalidGame(format!("grid size {m} < 2")));
    }
    let xs = uniform_grid(lo, hi, m);
    MatrixGame::new(xs.iter().map(|&x| xs.iter().map(|&y| f(x, y)).collect()).collect())
}

/// A threshold game on an aligned grid with `O(m)` matrix-vector products.
/// Rows belong to the maximizer: `x` for the regret kernel, `y` for the
/// ratio kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedGridGame {
    kernel: Kernel,
    grid: Vec<f64>,
}

impl AlignedGridGame {
    pub fn new(kernel: Kernel, lo: f64, hi: f64, m: usize) -> Result<Self> {
        if m < 2 {
            return Err(PersuasionError::InvalidGame(format!("grid size {m} < 2")));
        }
        if !(0.0 <= lo && lo < hi && hi <= 1.0) || (kernel == Kernel::Ratio && hi >= 1.0) {
            return Err(PersuasionError::InvalidGame(format!(
                "interval [{lo}, {hi}] is not valid for {kernel:?}"
            )));
        }
        Ok(Self { kernel, grid: uniform_grid(lo, hi, m) })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    /// Entry with rows owned by the maximizer.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        match self.kernel {
            Kernel::Regret => self.kernel.payoff(self.grid[i], self.grid[j]),
            Kernel::Ratio => self.kernel.payoff(self.grid[j], self.grid[i]),
        }
    }

    pub fn to_dense(&self) -> MatrixGame {
        let m = self.grid.len();
        MatrixGame::new((0..m).map(|i| (0..m).map(|j| self.entry(i, j)).collect()).collect())
            .expect("kernel entries are finite")
    }
}

impl PayoffOperator for AlignedGridGame {
    fn rows(&self) -> usize {
        self.grid.len()
    }

    fn cols(&self) -> usize {
        self.grid.len()
    }

    fn row_payoffs(&self, q: &[f64], out: &mut [f64]) {
        let z = &self.grid;
        let m = z.len();
        match self.kernel {
            Kernel::Regret => {
                // (1 - x_i) sum q - sum_{j >= i} (1 - y_j) q_j
                let total: f64 = q.iter().sum();
                let mut suffix = 0.0;
                for i in (0..m).rev() {
                    suffix += (1.0 - z[i]) * q[i];
                    out[i] = (1.0 - z[i]) * total - suffix;
                }
            }
            Kernel::Ratio => {
                // rows are y_i: (1 - y_i) sum_{j <= i} q_j / (1 - x_j)
                let mut prefix = 0.0;
                for i in 0..m {
                    prefix += q[i] / (1.0 - z[i]);
                    out[i] = (1.0 - z[i]) * prefix;
                }
            }
        }
    }

    fn col_payoffs(&self, p: &[f64], out: &mut [f64]) {
        let z = &self.grid;
        let m = z.len();
        match self.kernel {
            Kernel::Regret => {
                // sum_i p_i (1 - x_i) - (1 - y_j) sum_{i <= j} p_i
                let base: f64 = p.iter().zip(z).map(|(pi, x)| pi * (1.0 - x)).sum();
                let mut prefix = 0.0;
                for j in 0..m {
                    prefix += p[j];
                    out[j] = base - (1.0 - z[j]) * prefix;
                }
            }
            Kernel::Ratio => {
                // columns are x_j: sum_{i >= j} p_i (1 - y_i) / (1 - x_j)
                let mut suffix = 0.0;
                for j in (0..m).rev() {
                    suffix += p[j] * (1.0 - z[j]);
                    out[j] = suffix / (1.0 - z[j]);
                }
            }
        }
    }

    fn payoff_range(&self) -> f64 {
        // On [0, 1]^2 both kernels take values in [0, 1]: g is y - x when
        // y >= x and 1 - x otherwise.
        1.0
    }
}

/// Output of the matrix-game solver.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameReport {
    /// `p^T A q` at the averaged strategies.
    pub value_estimate: f64,
    /// Best row response minus best column response to the averages.
    pub duality_gap: f64,
    /// Upper bound on the value: the row player's best pure payoff.
    pub row_best: f64,
    /// Lower bound on the value: the column player's best pure payoff.
    pub col_best: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn softmax_into(scores: &[f64], scale: f64, out: &mut [f64]) {
    let max = scores.iter().fold(f64::NEG_INFINITY, |a, &s| a.max(scale * s));
    let mut total = 0.0;
    for (o, &s) in out.iter_mut().zip(scores) {
        *o = (scale * s - max).exp();
        total += *o;
    }
    out.iter_mut().for_each(|o| *o /= total);
}

fn certify(game: &impl PayoffOperator, p: &[f64], q: &[f64]) -> (f64, f64, f64) {
    let mut r = vec![0.0; game.rows()];
    let mut c = vec![0.0; game.cols()];
    game.row_payoffs(q, &mut r);
    game.col_payoffs(p, &mut c);
    let row_best = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let col_best = c.iter().copied().fold(f64::INFINITY, f64::min);
    let value = p.iter().zip(&r).map(|(a, b)| a * b).sum();
    (value, row_best, col_best)
}

/// Multiplicative-weights self-play with step `sqrt(8 ln m / t)` (scaled by
/// the payoff range), stopped once the gap of the averaged strategies is at
/// most `eps` or after `max_iters` rounds.
pub fn solve_matrix_game(game: &impl PayoffOperator, eps: f64, max_iters: usize) -> Result<GameReport> {
    if eps.is_nan() || eps <= 0.0 {
        return Err(PersuasionError::OutOfRange { name: "eps", value: eps, range: "(0, inf)" });
    }
    let (rows, cols) = (game.rows(), game.cols());
    let range = game.payoff_range();
    let (ln_r, ln_c) = ((rows.max(2) as f64).ln(), (cols.max(2) as f64).ln());
    let mut p = vec![1.0 / rows as f64; rows];
    let mut q = vec![1.0 / cols as f64; cols];
    let (mut cum_r, mut cum_c) = (vec![0.0; rows], vec![0.0; cols]);
    let (mut avg_p, mut avg_q) = (vec![0.0; rows], vec![0.0; cols]);
    let (mut r, mut c) = (vec![0.0; rows], vec![0.0; cols]);
    let mut next_check = 64;
    let mut t = 0;
    let mut report = None;
    while t < max_iters {
        t += 1;
        game.row_payoffs(&q, &mut r);
        game.col_payoffs(&p, &mut c);
        for (a, v) in avg_p.iter_mut().zip(&p) {
            *a += v;
        }
        for (a, v) in avg_q.iter_mut().zip(&q) {
            *a += v;
        }
        for (s, v) in cum_r.iter_mut().zip(&r) {
            *s += v;
        }
        for (s, v) in cum_c.iter_mut().zip(&c) {
            *s += v;
        }
        if t == next_check || t == max_iters {
            next_check += (next_check / 8).max(64);
            let pb: Vec<f64> = avg_p.iter().map(|v| v / t as f64).collect();
            let qb: Vec<f64> = avg_q.iter().map(|v| v / t as f64).collect();
            let (value, row_best, col_best) = certify(game, &pb, &qb);
            let gap = (row_best - col_best).max(0.0);
            let converged = gap <= eps;
            report = Some(GameReport {
                value_estimate: value,
                duality_gap: gap,
                row_best,
                col_best,
                row_strategy: pb,
                col_strategy: qb,
                iterations: t,
                converged,
            });
            if converged {
                break;
            }
        }
        let eta_t = (8.0 / (t + 1) as f64).sqrt() / range;
        softmax_into(&cum_r, eta_t * ln_r.sqrt(), &mut p);
        softmax_into(&cum_c, -eta_t * ln_c.sqrt(), &mut q);
    }
    report.ok_or_else(|| PersuasionError::InvalidGame("max_iters must be positive".into()))
}

/// Comparison of a solved discretized threshold game with the closed form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub kernel: Kernel,
    pub alpha: f64,
    pub m: usize,
    pub analytic_value: f64,
    pub abs_error: f64,
    /// Total variation between binned solver and analytic strategies.
    pub tv_x: f64,
    pub tv_y: f64,
    /// Solver mass of the adversary in the first of the shape bins.
    pub x_first_bin_mass: f64,
    pub report: GameReport,
}

/// Bin masses of grid-supported weights over `SHAPE_BINS` equal bins of
/// `[lo, hi]`; the first bin is closed, the rest are left-open.
pub fn bin_grid_masses(grid: &[f64], weights: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let width = (hi - lo) / SHAPE_BINS as f64;
    let mut out = vec![0.0; SHAPE_BINS];
    for (&z, &w) in grid.iter().zip(weights) {
        let k = (((z - lo) / width).ceil() as usize).saturating_sub(1).min(SHAPE_BINS - 1);
        out[k] += w;
    }
    out
}

/// Analytic masses of the same bins.
pub fn bin_masses(m: &MixedThreshold, lo: f64, hi: f64) -> Vec<f64> {
    let edges = uniform_grid(lo, hi, SHAPE_BINS + 1);
    let mut prev = 0.0;
    edges[1..]
        .iter()
        .enumerate()
        .map(|(k, &e)| {
            let c = if k + 1 == SHAPE_BINS { 1.0 } else { m.cdf(e) };
            let mass = c - prev;
            prev = c;
            mass
        })
        .collect()
}

fn tv(a: &[f64], b: &[f64]) -> f64 {
    0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>()
}

/// Solves the discretized game for `kernel` at `alpha` on an `m`-point grid
/// and compares it with the analytic value and strategies.
pub fn verify_lemma(kernel: Kernel, alpha: f64, m: usize, eps: f64, max_iters: usize) -> Result<LemmaReport> {
    let (hi, analytic, x_opt, y_opt) = match kernel {
        Kernel::Regret => {
            let spec = ThresholdGameSpec::new(alpha)?;
            (spec.domain().1, spec.value(), adversary_opt(alpha)?, sender_opt(alpha)?)
        }
        Kernel::Ratio => {
            let spec = ApproxGameSpec::new(alpha)?;
            (spec.domain().1, spec.beta(), approx_adversary_opt(alpha)?, approx_sender_opt(alpha)?)
        }
    };
    let game = AlignedGridGame::new(kernel, 0.0, hi, m)?;
    let report = solve_matrix_game(&game, eps, max_iters)?;
    let (x_weights, y_weights) = match kernel {
        Kernel::Regret => (&report.row_strategy, &report.col_strategy),
        Kernel::Ratio => (&report.col_strategy, &report.row_strategy),
    };
    let x_bins = bin_grid_masses(game.grid(), x_weights, 0.0, hi);
    let y_bins = bin_grid_masses(game.grid(), y_weights, 0.0, hi);
    Ok(LemmaReport {
        kernel,
        alpha,
        m,
        analytic_value: analytic,
        abs_error: (report.value_estimate - analytic).abs(),
        tv_x: tv(&x_bins, &bin_masses(&x_opt, 0.0, hi)),
        tv_y: tv(&y_bins, &bin_masses(&y_opt, 0.0, hi)),
        x_first_bin_mass: x_bins[0],
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn discretize_examples() {
        let g = discretize(|x, y| Kernel::Regret.payoff(x, y), 0.0, 0.5, 2).unwrap();
        assert_eq!(g.row(0), &[0.0, 0.5]);
        assert_eq!(g.row(1), &[0.5, 0.0]);
        // Ratio kernel with rows owned by y.
        let h = AlignedGridGame::new(Kernel::Ratio, 0.0, 0.5, 2).unwrap().to_dense();
        assert_eq!(h.row(0), &[1.0, 0.0]);
        assert_eq!(h.row(1), &[0.5, 1.0]);
        assert!(discretize(|_, _| 0.0, 0.0, 1.0, 1).is_err());
    }

    #[test]
    fn structured_products_match_dense() {
        for kernel in [Kernel::Regret, Kernel::Ratio] {
            let game = AlignedGridGame::new(kernel, 0.0, 0.6, 37).unwrap();
            let dense = game.to_dense();
            let p: Vec<f64> = (0..37).map(|i| ((i * 7 % 11) as f64 + 1.0) / 300.0).collect();
            let (mut a, mut b) = (vec![0.0; 37], vec![0.0; 37]);
            game.row_payoffs(&p, &mut a);
            dense.row_payoffs(&p, &mut b);
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
            game.col_payoffs(&p, &mut a);
            dense.col_payoffs(&p, &mut b);
            assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-12));
        }
    }

    #[test]
    fn small_games() {
        let pennies = MatrixGame::new(vec![vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let r = solve_matrix_game(&pennies, 1e-3, 1_000_000).unwrap();
        assert!(r.converged && r.value_estimate.abs() < 1e-3);

        let g = MatrixGame::new(vec![vec![0.0, 0.5], vec![0.5, 0.0]]).unwrap();
        let r = solve_matrix_game(&g, 1e-4, 1_000_000).unwrap();
        // (ad - bc) / (a + d - b - c)
        assert!((r.value_estimate - 0.25).abs() < 1e-4);
        assert!(r.col_best <= 0.25 && 0.25 <= r.row_best);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(MatrixGame::new(vec![vec![f64::NAN]]).is_err());
        assert!(MatrixGame::new(vec![vec![1.0], vec![1.0, 2.0]]).is_err());
        let g = MatrixGame::new(vec![vec![1.0]]).unwrap();
        assert!(solve_matrix_game(&g, 0.0, 10).is_err());
    }

    #[test]
    fn bins_partition_mass() {
        let x = adversary_opt(0.5).unwrap();
        let b = bin_masses(&x, 0.0, 0.5);
        assert!((b.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(b[0] > 0.5);
        let grid = uniform_grid(0.0, 0.5, 41);
        let w = vec![1.0 / 41.0; 41];
        let gb = bin_grid_masses(&grid, &w, 0.0, 0.5);
        assert!((gb.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!((gb[0] - 3.0 / 41.0).abs() < 1e-12);
    }
}
