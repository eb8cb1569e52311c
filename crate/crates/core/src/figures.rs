//! Data behind the plots: value curves, the optimal density, the reduced
//! sender utility with its concave envelope, and the bounds for arbitrary
//! utilities.

use serde::{Deserialize, Serialize};

use crate::approx::apr_mon_value;
use crate::arbitrary::bounds::{thm2_lower_bound, thm2_upper_bound};
use crate::error::Result;
use crate::monotone::{binary_reduction_uprime, reg_mon_value, sender_opt, INV_E};
use crate::standard::concavify_at;

/// A named table of numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), rows: Vec::new() }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

/// `mu_n = k/points` for `k = 1..=points`, with `1/e` inserted.
fn mu_grid(points: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (1..=points).map(|k| k as f64 / points as f64).collect();
    xs.push(INV_E);
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    xs
}

pub fn regret_curve(points: usize) -> Result<Table> {
    let mut t = Table::new("regret_curve", &["mu_n", "reg_mon"]);
    for mu in mu_grid(points) {
        t.rows.push(vec![mu, reg_mon_value(mu)?]);
    }
    Ok(t)
}

pub fn apr_curve(points: usize) -> Result<Table> {
    let mut t = Table::new("apr_curve", &["mu_n", "apr_mon"]);
    let mut xs = mu_grid(points);
    xs.push((-2.0f64).exp());
    xs.sort_by(f64::total_cmp);
    for mu in xs {
        t.rows.push(vec![mu, apr_mon_value(mu)?]);
    }
    Ok(t)
}

/// Density of the sender's optimal threshold mix on its support, ending
/// at the support's right end.
pub fn density_curve(mu_n: f64, points: usize) -> Result<Table> {
    let m = sender_opt(mu_n)?;
    let mut t = Table::new("density", &["y", "density"]);
    let Some(piece) = m.pieces().first() else {
        return Ok(t);
    };
    let n = points.max(2);
    for k in 0..n {
        let y = piece.lo + (piece.hi - piece.lo) * k as f64 / (n - 1) as f64;
        t.rows.push(vec![y, piece.density(y)]);
    }
    Ok(t)
}

/// Reduced two-state sender utility and its concave envelope.
pub fn uprime_curve(mu_n: f64, points: usize) -> Result<Table> {
    let f = binary_reduction_uprime(mu_n)?;
    let mut t = Table::new("uprime", &["q", "uprime", "concavified"]);
    let n = points.max(2);
    for k in 0..n {
        let q = k as f64 / (n - 1) as f64;
        t.rows.push(vec![q, f.eval(q), concavify_at(&f, q)?.value]);
    }
    Ok(t)
}

pub fn thm2_bounds(n_max: usize) -> Table {
    let mut t = Table::new("thm2_bounds", &["n", "lower", "upper"]);
    for n in 2..=n_max {
        t.rows.push(vec![n as f64, thm2_lower_bound(n).max(0.0), thm2_upper_bound(n)]);
    }
    t
}

/// Every table with default resolutions.
pub fn all_figures(points: usize, mu_n: f64) -> Result<Vec<Table>> {
    Ok(vec![
        regret_curve(points)?,
        density_curve(mu_n, points)?,
        apr_curve(points)?,
        uprime_curve(mu_n, points)?,
        thm2_bounds(100),
    ])
}
