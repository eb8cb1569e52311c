//! Verification suites: each check compares a measured number with its
//! expected value or admissible range.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::approx::{
    approx_adversary_opt, approx_best_response_x_on, approx_best_response_y_on, approx_sender_opt,
    expected_h, ApproxGameSpec,
};
use crate::arbitrary::binary::{prop1_adversary, prop1_scheme, prop1_sweep_regret};
use crate::arbitrary::bounds::{
    adoption_prob_monte_carlo, adoption_prob_within_bound, default_delta, max_regret_random, random_prior,
    thm2_lower_adoption_prob, thm2_lower_bound_check, thm2_upper_bound, thm2_upper_scheme,
    GoodNormalBadInstance,
};
use crate::arbitrary::ternary::{
    ternary_mass_in, ternary_mean_by_sectors, ternary_samples, ternary_sweep_sup, HalfPlaneAdoption,
};
use crate::error::{PersuasionError, Result};
use crate::kernel::Kernel;
use crate::matrix_game::{verify_lemma, DEFAULT_MAX_ITERS};
use crate::mixed::MixedThreshold;
use crate::model::{is_bayes_plausible, FiniteScheme, Prior};
use crate::monotone::{
    adversary_opt, best_response_x_on, best_response_y_on, expected_g, sender_opt, ThresholdGameSpec, INV_E,
};
use crate::multidim::{
    md_regret_bound_check, median_knapsack_scheme, random_marginals, sample_monotone_utility, GridInstance,
    GridPrior,
};
use crate::rng::stream;
use crate::standard::optimal_knapsack;

pub const SUITES: [&str; 6] = ["lemma4", "lemma5", "prop1", "prop2", "prop4", "thm2"];

/// One line of a suite's report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub suite: String,
    pub param: String,
    pub check: String,
    pub measured: f64,
    pub expected: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

/// Knobs shared by the suites; `None` picks each suite's default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub alpha: Option<f64>,
    pub grid: Option<usize>,
    pub n: Option<usize>,
    pub eps: Option<f64>,
    pub seed: u64,
}

struct Rows<'a> {
    suite: &'a str,
    rows: Vec<CheckRow>,
}

impl<'a> Rows<'a> {
    fn new(suite: &'a str) -> Self {
        Self { suite, rows: Vec::new() }
    }

    fn range(&mut self, param: &str, check: &str, measured: f64, expected: f64, lo: f64, hi: f64) {
        self.rows.push(CheckRow {
            suite: self.suite.into(),
            param: param.into(),
            check: check.into(),
            measured,
            expected,
            lo,
            hi,
            pass: measured >= lo && measured <= hi,
        });
    }

    fn near(&mut self, param: &str, check: &str, measured: f64, expected: f64, tol: f64) {
        self.range(param, check, measured, expected, expected - tol, expected + tol);
    }

    fn at_most(&mut self, param: &str, check: &str, measured: f64, bound: f64) {
        self.range(param, check, measured, bound, f64::NEG_INFINITY, bound);
    }

    fn at_least(&mut self, param: &str, check: &str, measured: f64, bound: f64) {
        self.range(param, check, measured, bound, bound, f64::INFINITY);
    }

    fn flag(&mut self, param: &str, check: &str, ok: bool) {
        let v = if ok { 1.0 } else { 0.0 };
        self.range(param, check, v, 1.0, 1.0, 1.0);
    }
}

fn alphas(cfg: &VerifyConfig) -> Vec<f64> {
    cfg.alpha.map_or_else(|| vec![0.25, INV_E, 0.5], |a| vec![a])
}

fn alpha_label(a: f64) -> String {
    if a == INV_E {
        "alpha=1/e".into()
    } else {
        format!("alpha={a}")
    }
}

/// `count` equally spaced points of `[lo, hi]`.
fn points(lo: f64, hi: f64, count: usize) -> impl Iterator<Item = f64> {
    (0..count).map(move |k| if k + 1 == count { hi } else { lo + (hi - lo) * k as f64 / (count - 1) as f64 })
}

/// Largest deviation of `f` from `target` over the support points.
fn indifference(hi: f64, target: f64, f: impl Fn(f64) -> Result<f64>) -> Result<f64> {
    let mut worst = 0.0f64;
    for z in points(0.0, hi, 100) {
        worst = worst.max((f(z)? - target).abs());
    }
    Ok(worst)
}

pub fn lemma4(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut out = Rows::new("lemma4");
    let m = cfg.grid.unwrap_or(2001);
    let eps = cfg.eps.unwrap_or(2e-3);
    for a in alphas(cfg) {
        let p = alpha_label(a);
        let spec = ThresholdGameSpec::new(a)?;
        let v = spec.value();
        let (lo, hi) = spec.domain();
        let (x, y) = (adversary_opt(a)?, sender_opt(a)?);
        let c = a.max(INV_E);
        out.near(&p, "E[g(x*, y*)]", expected_g(&x, &y)?, v, 1e-9);
        let dev = indifference(1.0 - c, v, |z| expected_g(&MixedThreshold::point(z)?, &y))?;
        out.at_most(&p, "indifference of x vs y*", dev, 1e-9);
        let dev = indifference(1.0 - c, v, |z| expected_g(&x, &MixedThreshold::point(z)?))?;
        out.at_most(&p, "indifference of y vs x*", dev, 1e-9);
        out.at_most(&p, "best x vs y*", best_response_x_on(&y, 10_000, lo, hi)?.value, v + 1e-3);
        out.at_least(&p, "best y vs x*", best_response_y_on(&x, 10_000, lo, hi)?.value, v - 1e-3);
        let r = verify_lemma(Kernel::Regret, a, m, eps, DEFAULT_MAX_ITERS)?;
        out.at_most(&p, "duality gap", r.report.duality_gap, eps);
        out.near(&p, "discretized value", r.report.value_estimate, v, 5e-3);
    }
    Ok(out.rows)
}

pub fn lemma5(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut out = Rows::new("lemma5");
    let m = cfg.grid.unwrap_or(2001);
    let eps = cfg.eps.unwrap_or(2e-3);
    for a in alphas(cfg) {
        let p = alpha_label(a);
        let spec = ApproxGameSpec::new(a)?;
        let b = spec.beta();
        let (lo, hi) = spec.domain();
        let (x, y) = (approx_adversary_opt(a)?, approx_sender_opt(a)?);
        out.near(&p, "E[h(x*, y*)]", expected_h(&x, &y)?, b, 1e-9);
        let dev = indifference(hi, b, |z| expected_h(&MixedThreshold::point(z)?, &y))?;
        out.at_most(&p, "indifference of x vs y*", dev, 1e-9);
        let dev = indifference(hi, b, |z| expected_h(&x, &MixedThreshold::point(z)?))?;
        out.at_most(&p, "indifference of y vs x*", dev, 1e-9);
        out.at_least(&p, "best x vs y*", approx_best_response_x_on(&y, 10_000, lo, hi)?.value, b - 1e-3);
        out.at_most(&p, "best y vs x*", approx_best_response_y_on(&x, 10_000, lo, hi)?.value, b + 1e-3);
        let r = verify_lemma(Kernel::Ratio, a, m, eps, DEFAULT_MAX_ITERS)?;
        out.at_most(&p, "duality gap", r.report.duality_gap, eps);
        out.near(&p, "discretized value", r.report.value_estimate, b, 5e-3);
    }
    Ok(out.rows)
}

pub fn prop1(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut out = Rows::new("prop1");
    let priors = cfg.n.unwrap_or(50);
    let mut rng = stream(cfg.seed, 0);
    let mus: Vec<f64> = (0..priors).map(|_| rng.random_range(0.01..0.99)).collect();
    let results: Vec<(f64, f64)> = mus
        .par_iter()
        .map(|&m| {
            let mu = Prior::new(vec![m, 1.0 - m])?;
            let s = prop1_scheme(&mu)?;
            Ok((prop1_adversary(&s, &mu)?.regret, prop1_sweep_regret(&s, &mu, 1e-4)?))
        })
        .collect::<Result<_>>()?;
    let p = format!("priors={priors}");
    let adv_min = results.iter().map(|r| r.0).fold(f64::INFINITY, f64::min);
    let adv_max = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    let sweep_max = results.iter().map(|r| r.1).fold(f64::NEG_INFINITY, f64::max);
    out.range(&p, "min proof-adversary regret", adv_min, 0.5, 0.5 - 1e-3, 0.5 + 1e-6);
    out.range(&p, "max proof-adversary regret", adv_max, 0.5, 0.5 - 1e-3, 0.5 + 1e-6);
    out.range(&p, "max sweep regret", sweep_max, 0.5, 0.5 - 1e-3, 0.5 + 1e-6);
    let worst_none = mus
        .iter()
        .map(|&m| {
            let mu = Prior::new(vec![m, 1.0 - m])?;
            Ok(prop1_adversary(&FiniteScheme::no_information(&mu), &mu)?.regret)
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(f64::INFINITY, f64::min);
    out.at_least(&p, "no-information regret", worst_none, 0.5);
    Ok(out.rows)
}

pub fn prop2(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut out = Rows::new("prop2");
    let grid = cfg.grid.unwrap_or(400);
    let best = ternary_sweep_sup(grid)?;
    out.range(&format!("grid={grid}"), "sup regret", best.regret, 0.5, 0.49, 0.501);

    let mut rng = stream(cfg.seed, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let theta = rng.random::<f64>() * 2.0 * PI;
        let h = HalfPlaneAdoption::through_centroid(theta.cos(), theta.sin())?;
        worst = worst.max((ternary_mass_in(&h) - 0.5).abs());
        worst = worst.max((ternary_mass_in(&h) + ternary_mass_in(&h.complement()) - 1.0).abs());
    }
    out.at_most("lines=1000", "centroid half-plane mass deviation", worst, 1e-9);

    let mean = ternary_mean_by_sectors(3600);
    let dev = mean.iter().map(|m| (m - 1.0 / 3.0).abs()).fold(0.0, f64::max);
    out.at_most("bins=3600", "sector mean deviation", dev, 1e-4);

    let n = 1_000_000;
    let samples = ternary_samples(n, cfg.seed);
    for k in 0..3 {
        let xs: Vec<f64> = samples.iter().map(|p| p[k]).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        out.near(&format!("samples={n}"), &format!("mean p{}", k + 1), mean, 1.0 / 3.0, 3.0 * se);
    }
    Ok(out.rows)
}

pub fn thm2(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut out = Rows::new("thm2");
    let ns: Vec<usize> = cfg.n.map_or_else(|| (16..=100).collect(), |n| vec![n]);
    if ns.iter().any(|&n| n < 16) {
        return Err(PersuasionError::OutOfRange { name: "n", value: ns[0] as f64, range: ">= 16" });
    }
    let exact = ns
        .par_iter()
        .map(|&n| (1..=n).try_fold(true, |ok, s| Ok(ok && adoption_prob_within_bound(n, s)?)))
        .collect::<Result<Vec<bool>>>()?;
    let label = format!("n={}..={}", ns[0], ns[ns.len() - 1]);
    out.flag(&label, "adoption prob <= 1/sqrt(n) (exact)", exact.iter().all(|&b| b));

    for &n in &ns[..1] {
        let mu = Prior::uniform(n)?;
        let delta = default_delta(&mu);
        let c = thm2_lower_bound_check(n, &FiniteScheme::full_revelation(&mu), delta)?;
        let p = format!("n={n}");
        out.at_least(&p, "full revelation regret lower bound", c.u_star_lb - c.scheme_utility_ub, c.bound);
        let inst = GoodNormalBadInstance::random(mu.clone(), delta, cfg.seed)?;
        let opt = optimal_knapsack(&mu, &inst.utility())?.optimal_utility;
        out.at_least(&p, "knowledgeable optimum", opt, c.u_star_lb - 1e-12);
    }

    let (n, s, trials) = (25, 6, 1_000_000);
    let exact = thm2_lower_adoption_prob(n, s)?;
    let mc = adoption_prob_monte_carlo(n, s, trials, cfg.seed)?;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    out.near("n=25 s=6", "monte carlo adoption prob", mc, exact, 3.0 * se);

    for n in 2..=10 {
        let mut rng = stream(cfg.seed, n as u64);
        let mut worst = f64::NEG_INFINITY;
        let mut plausible = true;
        let priors: Vec<Prior> = std::iter::once(Prior::uniform(n))
            .chain((0..4).map(|_| Ok(random_prior(n, 3.0, &mut rng))))
            .collect::<Result<_>>()?;
        for (k, mu) in priors.iter().enumerate() {
            let s = thm2_upper_scheme(mu)?;
            plausible &= is_bayes_plausible(&s, mu)?;
            worst = worst.max(max_regret_random(&s, mu, 10_000, cfg.seed ^ (k as u64) << 32)?);
        }
        let p = format!("n={n}");
        out.flag(&p, "upper scheme plausible", plausible);
        out.at_most(&p, "upper scheme regret", worst, thm2_upper_bound(n) + 1e-9);
    }
    Ok(out.rows)
}

pub fn prop4(cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    let mut out = Rows::new("prop4");
    let run = |dims: &[usize], priors: usize, utils: usize, seed: u64| -> Result<(f64, bool)> {
        let rows = (0..priors)
            .into_par_iter()
            .map(|i| {
                let marg = random_marginals(dims, seed.wrapping_add(i as u64));
                let base = GridInstance::new(
                    dims.to_vec(),
                    GridPrior::Marginals(marg),
                    vec![0.0; dims.iter().product()],
                )?;
                let plausible = is_bayes_plausible(&median_knapsack_scheme(&base)?, &base.flat_prior()?)?;
                let mut worst = f64::NEG_INFINITY;
                for j in 0..utils {
                    let u = sample_monotone_utility(
                        dims,
                        seed.wrapping_mul(31).wrapping_add((i * utils + j) as u64),
                    )?;
                    worst = worst.max(md_regret_bound_check(&base.with_utility(u)?)?.regret);
                }
                Ok((worst, plausible))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(rows.iter().fold((f64::NEG_INFINITY, true), |(w, p), r| (w.max(r.0), p && r.1)))
    };
    let (worst, plausible) = run(&[3, 3], 20, 1000, cfg.seed)?;
    out.at_most("dims=3x3", "max regret", worst, 0.75 + 1e-9);
    out.flag("dims=3x3", "median scheme plausible", plausible);
    let (worst, plausible) = run(&[3, 3, 3], 5, 200, cfg.seed ^ 0x5eed)?;
    out.at_most("dims=3x3x3", "max regret", worst, 0.875 + 1e-9);
    out.flag("dims=3x3x3", "median scheme plausible", plausible);

    let tight = GridInstance::new(
        vec![2, 2],
        GridPrior::Marginals(vec![vec![0.5, 0.5], vec![0.5, 0.5]]),
        vec![-1.0, -1.0, -1.0, 3.0],
    )?;
    out.near("dims=2x2", "tight example regret", md_regret_bound_check(&tight)?.regret, 0.75, 1e-9);
    Ok(out.rows)
}

/// Runs one suite by name, or all of them in canonical order.
pub fn run_suite(name: &str, cfg: &VerifyConfig) -> Result<Vec<CheckRow>> {
    match name {
        "lemma4" => lemma4(cfg),
        "lemma5" => lemma5(cfg),
        "prop1" => prop1(cfg),
        "prop2" => prop2(cfg),
        "prop4" => prop4(cfg),
        "thm2" => thm2(cfg),
        "all" => {
            let mut rows = Vec::new();
            for s in SUITES {
                rows.extend(run_suite(s, cfg)?);
            }
            Ok(rows)
        }
        other => Err(PersuasionError::Unsupported(format!("unknown suite {other:?}"))),
    }
}
