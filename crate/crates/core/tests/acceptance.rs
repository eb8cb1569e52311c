//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::f64::consts::E;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;

use persuasion_core::approx::{
    approx_adversary_opt, approx_sender_opt, apr_mon_value, check_reg_apr, expected_h,
};
use persuasion_core::arbitrary::binary::{
    interval_utility, prop1_adversary, prop1_scheme, prop1_sweep_regret,
};
use persuasion_core::arbitrary::bounds::{
    default_delta, max_regret_random, random_prior, signed_exp_utility, single_positive_utility,
    thm2_lower_adoption_prob_exact, thm2_lower_bound_check, thm2_upper_scheme,
};
use persuasion_core::arbitrary::ternary::{ternary_mass_in, ternary_sweep_sup, HalfPlaneAdoption};
use persuasion_core::figures::regret_curve;
use persuasion_core::kernel::Kernel;
use persuasion_core::matrix_game::{verify_lemma, DEFAULT_MAX_ITERS};
use persuasion_core::monotone::{
    adversary_opt, best_response_x_on, best_response_y_on, expected_g, reg_mon_value, regret_of_scheme,
    sender_opt,
};
use persuasion_core::multidim::{
    md_regret_bound_check, median_knapsack_scheme, random_marginals, sample_monotone_utility, GridInstance,
    GridPrior,
};
use persuasion_core::rng::stream;
use persuasion_core::{sender_utility, FiniteScheme, MixedThreshold, Prior};

const INV_E: f64 = 1.0 / E;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// `E[g(x, Y)] = (1 - x) - E[(1 - Y) 1{Y >= x}]` by quadrature of the
/// density plus the atoms.
fn regret_vs_sender(x: f64, y: &MixedThreshold) -> f64 {
    let mut tail: f64 = y.atoms().iter().filter(|a| a.at >= x).map(|a| (1.0 - a.at) * a.weight).sum();
    for p in y.pieces() {
        tail += common::gauss(|z| (1.0 - z) * p.density(z), x.max(p.lo), p.hi, 20);
    }
    (1.0 - x) - tail
}

/// `E[g(X, y)] = E[1 - X] - (1 - y) P[X <= y]`.
fn regret_vs_adversary(xs: &MixedThreshold, y: f64) -> f64 {
    let mut mean = 0.0;
    let mut below = 0.0;
    for a in xs.atoms() {
        mean += (1.0 - a.at) * a.weight;
        if a.at <= y {
            below += a.weight;
        }
    }
    for p in xs.pieces() {
        mean += common::gauss(|z| (1.0 - z) * p.density(z), p.lo, p.hi, 20);
        below += common::gauss(|z| p.density(z), p.lo, y.min(p.hi), 20);
    }
    mean - (1.0 - y) * below
}

fn criterion_1() -> Outcome {
    let cases = [(0.1, INV_E), (0.25, INV_E), (INV_E, INV_E), (0.5, 0.346_573_6), (0.8, 0.178_514_8)];
    let mut ok = true;
    let mut worst_gap = 0.0f64;
    for (mu, want) in cases {
        let v = reg_mon_value(mu).unwrap();
        ok &= (v - want).abs() < 1e-7;
        let (y, x) = (sender_opt(mu).unwrap(), adversary_opt(mu).unwrap());
        let hi = 1.0 - mu;
        let grid: Vec<f64> = (0..10_000).map(|k| hi * k as f64 / 9_999.0).collect();
        let max_x = grid.iter().map(|&t| regret_vs_sender(t, &y)).fold(f64::NEG_INFINITY, f64::max);
        let min_y = grid.iter().map(|&t| regret_vs_adversary(&x, t)).fold(f64::INFINITY, f64::min);
        ok &= max_x <= v + 1e-3 && min_y >= v - 1e-3;
        // the library's best responses agree with the quadrature oracle
        let bx = best_response_x_on(&y, 10_000, 0.0, hi).unwrap().value;
        let by = best_response_y_on(&x, 10_000, 0.0, hi).unwrap().value;
        ok &= (bx - max_x).abs() < 1e-6 && (by - min_y).abs() < 1e-6;
        worst_gap = worst_gap.max(max_x - v).max(v - min_y);
    }
    outcome(ok, format!("max deviation of best responses from the value {worst_gap:.2e}"))
}

/// Analytic values and the matrix-game estimates, used again by 8.
struct GamePairs {
    analytic: Vec<(f64, f64)>,
    measured: Vec<(f64, f64)>,
}

fn criterion_2(pairs: &mut GamePairs) -> Outcome {
    let mut ok = true;
    let mut lines = Vec::new();
    for alpha in [0.25, INV_E, 0.5] {
        let reg = if alpha <= INV_E { INV_E } else { -alpha * alpha.ln() };
        let apr = 1.0 / (1.0 - alpha.ln());
        let mut got = [0.0; 2];
        for (k, (kernel, want)) in [(Kernel::Regret, reg), (Kernel::Ratio, apr)].into_iter().enumerate() {
            let t = Instant::now();
            let r = verify_lemma(kernel, alpha, 2001, 2e-3, DEFAULT_MAX_ITERS).unwrap();
            let err = (r.report.value_estimate - want).abs();
            ok &= r.report.duality_gap <= 2e-3 && err <= 5e-3 && t.elapsed() < Duration::from_secs(300);
            got[k] = r.report.value_estimate;
            lines.push(format!("{kernel:?}@{alpha:.4}: gap {:.1e} err {err:.1e}", r.report.duality_gap));
        }
        pairs.analytic.push((reg, apr));
        pairs.measured.push((got[0], got[1]));
    }
    outcome(ok, lines.join("; "))
}

fn criterion_3() -> Outcome {
    let mut worst = 0.0f64;
    for alpha in [0.1, 0.25, INV_E, 0.5, 0.8] {
        let v = reg_mon_value(alpha).unwrap();
        let c = alpha.max(INV_E);
        let (x, y) = (adversary_opt(alpha).unwrap(), sender_opt(alpha).unwrap());
        let b = 1.0 / (1.0 - alpha.ln());
        let (hx, hy) = (approx_adversary_opt(alpha).unwrap(), approx_sender_opt(alpha).unwrap());
        for k in 0..100 {
            // the last point must land exactly on the atom at the right end
            let z = if k == 99 { 1.0 - c } else { (1.0 - c) * k as f64 / 99.0 };
            let p = MixedThreshold::point(z).unwrap();
            worst = worst.max((expected_g(&p, &y).unwrap() - v).abs());
            worst = worst.max((expected_g(&x, &p).unwrap() - v).abs());
            let z = if k == 99 { 1.0 - alpha } else { (1.0 - alpha) * k as f64 / 99.0 };
            let p = MixedThreshold::point(z).unwrap();
            worst = worst.max((expected_h(&p, &hy).unwrap() - b).abs());
            worst = worst.max((expected_h(&hx, &p).unwrap() - b).abs());
        }
    }
    outcome(worst <= 1e-9, format!("max |E - value| {worst:.2e}"))
}

/// Regret on two states with adoption iff the light-state posterior lies
/// in `[0, t]` (`upper = false`) or `[t, 1]`, computed from scratch.
fn binary_regret(atoms: &[(f64, f64)], m: f64, t: f64, upper: bool) -> f64 {
    let inside = |q: f64| if upper { q >= t } else { q <= t };
    let opt = if inside(m) {
        1.0
    } else if upper {
        m / t
    } else {
        (1.0 - m) / (1.0 - t)
    };
    let got: f64 = atoms.iter().filter(|a| inside(a.0)).map(|a| a.1).sum();
    opt - got
}

fn criterion_4() -> Outcome {
    let t0 = Instant::now();
    let mut rng = stream(4, 0);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut agree = true;
    for _ in 0..50 {
        let p = rng.random_range(0.01..0.99);
        let mu = Prior::new(vec![p, 1.0 - p]).unwrap();
        let s = prop1_scheme(&mu).unwrap();
        let light = if p <= 0.5 { 0 } else { 1 };
        let m = mu.probs()[light];
        let atoms: Vec<(f64, f64)> =
            s.atoms().iter().map(|a| (a.posterior.probs()[light], a.weight)).collect();
        let adv = prop1_adversary(&s, &mu).unwrap().regret;
        let mut sweep = f64::NEG_INFINITY;
        for k in 1..10_000 {
            let t = k as f64 * 1e-4;
            for upper in [false, true] {
                sweep = sweep.max(binary_regret(&atoms, m, t, upper));
            }
        }
        let lib = prop1_sweep_regret(&s, &mu, 1e-4).unwrap();
        agree &= (lib - sweep).abs() < 1e-9;
        // spot-check the library's interval utilities against the oracle
        let u = interval_utility(&mu, 0.3, true).unwrap();
        agree &= (regret_of_scheme(&s, &mu, &u).unwrap() - binary_regret(&atoms, m, 0.3, true)).abs() < 1e-9;
        for r in [adv, sweep] {
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    let ok = agree && lo >= 0.5 - 1e-3 && hi <= 0.5 + 1e-6 && t0.elapsed() < Duration::from_secs(5);
    outcome(ok, format!("regret range [{lo:.9}, {hi:.9}] in {:.2?}", t0.elapsed()))
}

fn criterion_5() -> Outcome {
    let t0 = Instant::now();
    let sup = ternary_sweep_sup(400).unwrap().regret;
    let mut rng = stream(5, 0);
    let mut dev = 0.0f64;
    for _ in 0..1000 {
        let th = rng.random::<f64>() * std::f64::consts::TAU;
        dev = dev.max(
            (ternary_mass_in(&HalfPlaneAdoption::through_centroid(th.cos(), th.sin()).unwrap()) - 0.5).abs(),
        );
    }
    // exact angles against brute-force ray shooting on generic half-planes
    let mut ray_dev = 0.0f64;
    for _ in 0..50 {
        let (a, b, c) =
            (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-0.5..0.5));
        let h = HalfPlaneAdoption::from_cartesian(a, b, c).unwrap();
        let rays = common::ternary_mass_by_rays(|x, y| a * x + b * y + c, 200_000);
        ray_dev = ray_dev.max((ternary_mass_in(&h) - rays).abs());
    }
    let ok = (0.49..=0.501).contains(&sup)
        && dev <= 1e-9
        && ray_dev < 1e-4
        && t0.elapsed() < Duration::from_secs(60);
    outcome(
        ok,
        format!("sup regret {sup:.6}, centroid-line mass deviation {dev:.1e}, ray check {ray_dev:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    let mut slack = f64::INFINITY;
    for n in 2..=10usize {
        let bound = 1.0 - 1.0 / (4.0 * (n * n) as f64);
        let mut rng = stream(6, n as u64);
        let mut priors = vec![Prior::uniform(n).unwrap()];
        priors.extend((0..4).map(|_| random_prior(n, 3.0, &mut rng)));
        for (k, mu) in priors.iter().enumerate() {
            let s = thm2_upper_scheme(mu).unwrap();
            let worst = max_regret_random(&s, mu, 10_000, (n * 10 + k) as u64).unwrap();
            ok &= worst <= bound + 1e-9;
            slack = slack.min(bound - worst);
            // LP-vertex optimum as an independent check of the regret
            for j in 0..200 {
                let u = if j % 2 == 0 {
                    signed_exp_utility(n, &mut rng)
                } else {
                    single_positive_utility(n, &mut rng)
                };
                let r = common::lp_optimum(mu.probs(), u.values()) - sender_utility(&s, &u).unwrap();
                ok &= r <= bound + 1e-9;
                ok &= (r - regret_of_scheme(&s, mu, &u).unwrap()).abs() < 1e-9;
            }
        }
    }
    ok &= t0.elapsed() < Duration::from_secs(120);
    outcome(ok, format!("min slack to 1 - 1/(4n^2): {slack:.3e} in {:.2?}", t0.elapsed()))
}

fn criterion_7() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    for n in 16..=100u64 {
        let b = (n as f64).sqrt().floor() as u64;
        for s in 1..=n {
            let p = thm2_lower_adoption_prob_exact(n as usize, s as usize).unwrap();
            let want = if s <= b {
                BigRational::new(BigInt::from(s), BigInt::from(n))
            } else if s > n - b {
                BigRational::from_integer(BigInt::from(0))
            } else {
                BigRational::new(
                    common::binom(n - b, s) * BigInt::from(s),
                    common::binom(n, s) * BigInt::from(n - b),
                )
            };
            ok &= p == want;
            ok &= &p * &p * BigRational::from_integer(BigInt::from(n))
                <= BigRational::from_integer(BigInt::from(1));
        }
    }
    let mu = Prior::uniform(16).unwrap();
    let c = thm2_lower_bound_check(16, &FiniteScheme::full_revelation(&mu), default_delta(&mu)).unwrap();
    let witness = c.u_star_lb - c.scheme_utility_ub;
    ok &= c.certified && witness >= 0.5 && t0.elapsed() < Duration::from_secs(10);
    outcome(ok, format!("exact bound holds for n = 16..100; n = 16 witness {witness}"))
}

fn criterion_8(pairs: &GamePairs) -> Outcome {
    let a1 = apr_mon_value(INV_E).unwrap();
    let a2 = apr_mon_value(E.powi(-2)).unwrap();
    let mut ok = (a1 - 0.5).abs() < 1e-15 && (a2 - 1.0 / 3.0).abs() < 1e-15;
    let mut all: Vec<(f64, f64)> = [0.1, 0.25, INV_E, 0.5, 0.8]
        .iter()
        .map(|&m| (reg_mon_value(m).unwrap(), apr_mon_value(m).unwrap()))
        .collect();
    all.extend(&pairs.analytic);
    all.extend(&pairs.measured);
    for &(r, a) in &all {
        ok &= check_reg_apr(r, a).unwrap();
        ok &= a <= 1.0 / r - 1.0 + 1e-9;
    }
    outcome(ok, format!("apr(1/e) = {a1}, apr(e^-2) = {a2}, {} pairs checked", all.len()))
}

fn criterion_9() -> Outcome {
    let t0 = Instant::now();
    let mut ok = true;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..20u64 {
        let marg = random_marginals(&[3, 3], 900 + i);
        let base = GridInstance::new(vec![3, 3], GridPrior::Marginals(marg), vec![0.0; 9]).unwrap();
        let s = median_knapsack_scheme(&base).unwrap();
        ok &= (s.atoms()[0].weight - 0.25).abs() < 1e-12;
        let joint = base.joint();
        for j in 0..1000u64 {
            let u = sample_monotone_utility(&[3, 3], i * 1000 + j).unwrap();
            let inst = base.with_utility(u.clone()).unwrap();
            let c = md_regret_bound_check(&inst).unwrap();
            worst = worst.max(c.regret);
            ok &= c.regret <= 0.75 + 1e-9;
            if j < 100 {
                let r = common::lp_optimum(&joint, &u) - sender_utility(&s, &inst.flat_utility()).unwrap();
                ok &= (r - c.regret).abs() < 1e-9;
            }
        }
    }
    let mut k3 = f64::NEG_INFINITY;
    for j in 0..50u64 {
        let marg = random_marginals(&[3, 3, 3], 77 + j);
        let inst = GridInstance::new(
            vec![3, 3, 3],
            GridPrior::Marginals(marg),
            sample_monotone_utility(&[3, 3, 3], j).unwrap(),
        )
        .unwrap();
        let c = md_regret_bound_check(&inst).unwrap();
        ok &= (c.bound - 0.875).abs() < 1e-15 && c.regret <= 0.875 + 1e-9;
        k3 = k3.max(c.regret);
    }
    ok &= t0.elapsed() < Duration::from_secs(60);
    outcome(ok, format!("max regret {worst:.9} (3x3), {k3:.9} (3x3x3) in {:.2?}", t0.elapsed()))
}

fn criterion_10() -> Outcome {
    let n = 1_000_000;
    let mut xs = sender_opt(0.25).unwrap().sample_n(n, 10);
    xs.sort_by(f64::total_cmp);
    let f = |y: f64| -(1.0 - y.min(1.0 - INV_E)).ln();
    let mut ks = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let c = f(x);
        ks = ks.max((c - i as f64 / n as f64).abs()).max(((i + 1) as f64 / n as f64 - c).abs());
    }
    let ys = sender_opt(0.5).unwrap().sample_n(n, 11);
    let freq = ys.iter().filter(|&&y| y == 0.5).count() as f64 / n as f64;
    let p = 1.0 + 0.5f64.ln();
    let se = (p * (1.0 - p) / n as f64).sqrt();
    let ok = ks < 0.002 && (freq - p).abs() <= 3.0 * se;
    outcome(ok, format!("KS {ks:.2e}, atom frequency {freq:.5} vs {p:.5} (3 SE = {:.1e})", 3.0 * se))
}

fn criterion_11() -> Outcome {
    let t = regret_curve(2000).unwrap();
    let mu = t.column("mu_n").unwrap();
    let r = t.column("reg_mon").unwrap();
    let mut ok = true;
    for (&m, &v) in mu.iter().zip(&r) {
        if m <= INV_E {
            ok &= v == INV_E;
        } else {
            ok &= (v + m * m.ln()).abs() < 1e-15;
        }
    }
    let right: Vec<f64> = mu.iter().zip(&r).filter(|(&m, _)| m > INV_E).map(|(_, &v)| v).collect();
    ok &= right.windows(2).all(|w| w[1] < w[0]);
    let just_above = f64::from_bits(INV_E.to_bits() + 1);
    let jump = (reg_mon_value(INV_E).unwrap() - reg_mon_value(just_above).unwrap()).abs();
    ok &= jump < 1e-12;
    outcome(ok, format!("{} points, jump at 1/e {jump:.1e}", mu.len()))
}

fn main() {
    let mut pairs = GamePairs { analytic: Vec::new(), measured: Vec::new() };
    let names = [
        "best-response values",
        "discretized game oracle",
        "indifference identities",
        "two-state scheme regret",
        "three-state sweep",
        "upper bound for n states",
        "lower bound combinatorics",
        "approximation values",
        "grid median scheme",
        "sampling fidelity",
        "regret curve shape",
    ];
    let mut failed = 0;
    for (k, name) in names.iter().enumerate() {
        let t0 = Instant::now();
        let o = match k + 1 {
            1 => criterion_1(),
            2 => criterion_2(&mut pairs),
            3 => criterion_3(),
            4 => criterion_4(),
            5 => criterion_5(),
            6 => criterion_6(),
            7 => criterion_7(),
            8 => criterion_8(&pairs),
            9 => criterion_9(),
            10 => criterion_10(),
            _ => criterion_11(),
        };
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<27} {}  ({:.1?}) {}",
            k + 1,
            name,
            if o.pass { "PASS" } else { "FAIL" },
            t0.elapsed(),
            o.detail
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all {} criteria passed", names.len());
}
