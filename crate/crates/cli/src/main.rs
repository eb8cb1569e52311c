//! `persuade`: robust persuasion schemes from the command line.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::mpsc;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use persuasion_core::approx::{approx_adversary_opt, approx_sender_opt, apr_mon_value};
use persuasion_core::arbitrary::ternary::{ternary_sweep, SweepRow};
use persuasion_core::figures::{all_figures, Table};
use persuasion_core::io::{load_json, Instance, LoadError};
use persuasion_core::monotone::{adversary_opt, reg_mon_value, sender_opt};
use persuasion_core::multidim::{
    md_regret_bound_check, random_marginals, sample_monotone_utility, GridInstance, GridPrior,
};
use persuasion_core::verify::{run_suite, CheckRow, VerifyConfig};
use persuasion_core::{optimal_knapsack, sender_utility, MixedThreshold, PersuasionError};

use output::{csv_doc, json_doc, num, Csv, Manifest};

#[derive(Parser)]
#[command(name = "persuade", version, about = "Robust persuasion schemes and their verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Optimal scheme for a known utility (knapsack threshold).
    Solve,
    /// Analytic robust value and optimal threshold mixtures.
    Robust,
    /// Draw thresholds from the sender's optimal mixture.
    Sample,
    /// Run a verification suite; exits 3 if any check fails.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Curve data for the plots.
    Figures,
    /// Regret of the three-state boundary scheme over a grid of lines.
    TernarySweep,
    /// Median-box regret against random monotone grid utilities.
    MdSweep,
}

impl Command {
    fn name(self) -> String {
        match self {
            Command::Solve => "solve".into(),
            Command::Robust => "robust".into(),
            Command::Sample => "sample".into(),
            Command::Verify { suite } => format!("verify {}", suite.name()),
            Command::Figures => "figures".into(),
            Command::TernarySweep => "ternary-sweep".into(),
            Command::MdSweep => "md-sweep".into(),
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Suite {
    Lemma4,
    Lemma5,
    Prop1,
    Prop2,
    Thm2,
    Prop4,
    All,
}

impl Suite {
    fn name(self) -> &'static str {
        match self {
            Suite::Lemma4 => "lemma4",
            Suite::Lemma5 => "lemma5",
            Suite::Prop1 => "prop1",
            Suite::Prop2 => "prop2",
            Suite::Thm2 => "thm2",
            Suite::Prop4 => "prop4",
            Suite::All => "all",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(ValueEnum, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
enum Mode {
    Regret,
    Approx,
}

#[derive(Args, Clone, Serialize)]
struct Opts {
    /// Instance file (JSON).
    #[arg(long, global = true)]
    instance: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Grid size (matrix-game grid, line grid, or curve resolution).
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Target duality gap for the matrix-game solver.
    #[arg(long, global = true)]
    eps: Option<f64>,
    /// Output file (a directory for `figures --format csv`).
    #[arg(long, global = true)]
    #[serde(skip)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true, value_enum, default_value_t = Mode::Regret)]
    mode: Mode,
    /// Prior mass of the top state.
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// State count, or number of priors for `md-sweep`.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Number of samples (thresholds, or utilities per prior for `md-sweep`).
    #[arg(long, global = true)]
    sample: Option<usize>,
    /// Grid dimensions for `md-sweep`, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    dims: Option<Vec<usize>>,
    /// Seconds before giving up (exit 3).
    #[arg(long, global = true, default_value_t = 600)]
    #[serde(skip)]
    timeout: u64,
}

/// Invalid command-line input that is not a file or model error.
#[derive(Debug)]
struct BadInput(String);

impl std::fmt::Display for BadInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for BadInput {}

fn bad(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(BadInput(msg.into()))
}

/// What a command produced: the rendered text and whether its checks held.
struct Outcome {
    text: Option<String>,
    pass: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Self { text: Some(text), pass: true }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let timeout = Duration::from_secs(cli.opts.timeout);
    let (tx, rx) = mpsc::channel();
    std::thread::spawn(move || {
        let _ = tx.send(run(&cli));
    });
    match rx.recv_timeout(timeout) {
        Ok(Ok(outcome)) => {
            if outcome.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(3)
            }
        }
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        Err(_) => {
            eprintln!("error: timed out after {} s", timeout.as_secs());
            ExitCode::from(3)
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let bad_input = e.chain().any(|c| {
        c.is::<PersuasionError>() || c.is::<LoadError>() || c.is::<BadInput>() || c.is::<serde_json::Error>()
    });
    if bad_input {
        2
    } else {
        1
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    let manifest = Manifest {
        command: cli.command.name(),
        config: serde_json::to_value(&cli.opts)?,
        version: env!("CARGO_PKG_VERSION"),
    };
    let o = &cli.opts;
    let outcome = match cli.command {
        Command::Solve => solve(o, &manifest)?,
        Command::Robust => robust(o, &manifest, false)?,
        Command::Sample => robust(o, &manifest, true)?,
        Command::Verify { suite } => verify(o, &manifest, suite)?,
        Command::Figures => figures(o, &manifest)?,
        Command::TernarySweep => ternary(o, &manifest)?,
        Command::MdSweep => md_sweep(o, &manifest)?,
    };
    if let Some(text) = &outcome.text {
        output::write(o.out.as_deref(), text)?;
    }
    Ok(outcome)
}

fn instance_path(o: &Opts) -> Result<&Path> {
    o.instance.as_deref().ok_or_else(|| bad("--instance is required"))
}

fn solve(o: &Opts, manifest: &Manifest) -> Result<Outcome> {
    let inst: Instance = load_json(instance_path(o)?)?;
    let sol = optimal_knapsack(&inst.prior, &inst.utility)?;
    let scheme = sol.scheme(&inst.prior, &inst.utility)?;
    let achieved = sender_utility(&scheme, &inst.utility)?;
    Ok(Outcome::ok(match o.format {
        Format::Json => {
            json_doc(manifest, json!({ "knapsack": sol, "scheme": scheme, "sender_utility": achieved }))?
        }
        Format::Csv => {
            let n = inst.prior.len();
            let mut header = vec!["signal".to_string(), "weight".into(), "adopts".into()];
            header.extend((1..=n).map(|i| format!("p{i}")));
            let mut t = Csv { header, rows: Vec::new() };
            for (k, a) in scheme.atoms().iter().enumerate() {
                let adopts = persuasion_core::adopts(&a.posterior, &inst.utility)?;
                let mut row = vec![k.to_string(), num(a.weight), adopts.to_string()];
                row.extend(a.posterior.probs().iter().map(|&p| num(p)));
                t.push(row);
            }
            let extra = [
                ("threshold_x".to_string(), num(sol.threshold_x)),
                ("optimal_utility".to_string(), num(sol.optimal_utility)),
            ];
            csv_doc(manifest, &extra, &t)?
        }
    }))
}

fn top_mass(o: &Opts) -> Result<f64> {
    match (o.alpha, &o.instance) {
        (Some(a), _) => Ok(a),
        (None, Some(p)) => {
            let inst: Instance = load_json(p)?;
            Ok(*inst.prior.probs().last().expect("non-empty prior"))
        }
        (None, None) => Err(bad("--alpha or --instance is required")),
    }
}

fn strategy_rows(t: &mut Csv, role: &str, m: &MixedThreshold) {
    for a in m.atoms() {
        t.push(vec![
            role.into(),
            "atom".into(),
            num(a.at),
            num(a.at),
            num(a.weight),
            String::new(),
            String::new(),
        ]);
    }
    for p in m.pieces() {
        t.push(vec![
            role.into(),
            "density".into(),
            num(p.lo),
            num(p.hi),
            num(p.mass()),
            num(p.coef),
            p.form.exponent().to_string(),
        ]);
    }
}

fn robust(o: &Opts, manifest: &Manifest, samples_only: bool) -> Result<Outcome> {
    let mu_n = top_mass(o)?;
    let (mode, value, sender, adversary) = match o.mode {
        Mode::Regret => ("regret", reg_mon_value(mu_n)?, sender_opt(mu_n)?, adversary_opt(mu_n)?),
        Mode::Approx => {
            ("approx", apr_mon_value(mu_n)?, approx_sender_opt(mu_n)?, approx_adversary_opt(mu_n)?)
        }
    };
    let count = if samples_only { Some(o.sample.unwrap_or(1000)) } else { o.sample };
    let samples = count.map(|n| sender.sample_n(n, o.seed));
    let text = match o.format {
        Format::Json => {
            let mut body = json!({ "mu_n": mu_n, "mode": mode });
            if !samples_only {
                body["value"] = json!(value);
                body["sender_strategy"] = serde_json::to_value(&sender)?;
                body["adversary_strategy"] = serde_json::to_value(&adversary)?;
            }
            if let Some(s) = &samples {
                body["samples"] = json!(s);
            }
            json_doc(manifest, body)?
        }
        Format::Csv => {
            let mut extra = vec![("mu_n".to_string(), num(mu_n)), ("mode".to_string(), mode.to_string())];
            if !samples_only {
                extra.push(("value".to_string(), num(value)));
            }
            let t = match &samples {
                Some(s) => {
                    let mut t = Csv::new(&["index", "threshold"]);
                    for (i, &v) in s.iter().enumerate() {
                        t.push(vec![i.to_string(), num(v)]);
                    }
                    t
                }
                None => {
                    let mut t = Csv::new(&["role", "kind", "lo", "hi", "mass", "coef", "exponent"]);
                    strategy_rows(&mut t, "sender", &sender);
                    strategy_rows(&mut t, "adversary", &adversary);
                    t
                }
            };
            csv_doc(manifest, &extra, &t)?
        }
    };
    Ok(Outcome::ok(text))
}

fn verify(o: &Opts, manifest: &Manifest, suite: Suite) -> Result<Outcome> {
    let cfg = VerifyConfig { alpha: o.alpha, grid: o.grid, n: o.n, eps: o.eps, seed: o.seed };
    let rows: Vec<CheckRow> = run_suite(suite.name(), &cfg)?;
    let pass = rows.iter().all(|r| r.pass);
    for r in &rows {
        eprintln!(
            "{} {:<8} {:<14} {:<42} measured {:.10}",
            if r.pass { "PASS" } else { "FAIL" },
            r.suite,
            r.param,
            r.check,
            r.measured
        );
    }
    let text = match o.format {
        Format::Json => json_doc(manifest, json!({ "suite": suite.name(), "pass": pass, "checks": rows }))?,
        Format::Csv => {
            let mut t = Csv::new(&["suite", "param", "check", "measured", "expected", "lo", "hi", "pass"]);
            for r in &rows {
                t.push(vec![
                    r.suite.clone(),
                    r.param.clone(),
                    r.check.clone(),
                    num(r.measured),
                    num(r.expected),
                    num(r.lo),
                    num(r.hi),
                    r.pass.to_string(),
                ]);
            }
            csv_doc(manifest, &[("pass".to_string(), pass.to_string())], &t)?
        }
    };
    Ok(Outcome { text: Some(text), pass })
}

fn table_csv(t: &Table) -> Csv {
    let mut c = Csv { header: t.header.clone(), rows: Vec::new() };
    for r in &t.rows {
        c.push(r.iter().map(|&v| num(v)).collect());
    }
    c
}

fn figures(o: &Opts, manifest: &Manifest) -> Result<Outcome> {
    let tables = all_figures(o.grid.unwrap_or(200), o.alpha.unwrap_or(0.25))?;
    match o.format {
        Format::Json => Ok(Outcome::ok(json_doc(manifest, json!({ "tables": tables }))?)),
        Format::Csv => match &o.out {
            Some(dir) => {
                std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
                for t in &tables {
                    let extra = [("table".to_string(), t.name.clone())];
                    let path = dir.join(format!("{}.csv", t.name));
                    output::write(Some(&path), &csv_doc(manifest, &extra, &table_csv(t))?)?;
                }
                Ok(Outcome { text: None, pass: true })
            }
            None => {
                let mut s = String::new();
                for (k, t) in tables.iter().enumerate() {
                    if k > 0 {
                        s.push('\n');
                    }
                    s.push_str(&csv_doc(manifest, &[("table".to_string(), t.name.clone())], &table_csv(t))?);
                }
                Ok(Outcome::ok(s))
            }
        },
    }
}

fn ternary(o: &Opts, manifest: &Manifest) -> Result<Outcome> {
    let grid = o.grid.unwrap_or(400);
    // keep the worst orientation and side per (d, e)
    let mut best: Vec<SweepRow> = Vec::new();
    for r in ternary_sweep(grid)? {
        match best.last_mut() {
            Some(b) if b.d == r.d && b.e == r.e => {
                if r.regret > b.regret {
                    *b = r;
                }
            }
            _ => best.push(r),
        }
    }
    let sup = *best.iter().max_by(|a, b| a.regret.total_cmp(&b.regret)).ok_or_else(|| bad("empty sweep"))?;
    let text = match o.format {
        Format::Json => json_doc(manifest, json!({ "grid": grid, "sup": sup, "rows": best }))?,
        Format::Csv => {
            let mut t = Csv::new(&["d", "e", "shift", "flipped", "regret"]);
            for r in &best {
                t.push(vec![num(r.d), num(r.e), r.shift.to_string(), r.flipped.to_string(), num(r.regret)]);
            }
            csv_doc(manifest, &[("sup_regret".to_string(), num(sup.regret))], &t)?
        }
    };
    Ok(Outcome::ok(text))
}

#[derive(Serialize)]
struct MdRow {
    prior: usize,
    worst_regret: f64,
    bound: f64,
    holds: bool,
}

fn md_sweep(o: &Opts, manifest: &Manifest) -> Result<Outcome> {
    let rows: Vec<MdRow> = if let Some(p) = &o.instance {
        let inst: GridInstance = load_json(p)?;
        let c = md_regret_bound_check(&inst)?;
        vec![MdRow { prior: 0, worst_regret: c.regret, bound: c.bound, holds: c.holds }]
    } else {
        let dims = o.dims.clone().unwrap_or_else(|| vec![3, 3]);
        let cells: usize = dims.iter().product();
        if dims.is_empty() || cells == 0 || cells > 10_000 {
            bail!(bad("--dims must describe a grid of 1..=10000 cells"));
        }
        let (priors, utils) = (o.n.unwrap_or(20), o.sample.unwrap_or(1000));
        (0..priors)
            .map(|i| {
                let marg = random_marginals(&dims, o.seed.wrapping_add(i as u64));
                let base = GridInstance::new(dims.clone(), GridPrior::Marginals(marg), vec![0.0; cells])?;
                let mut worst = f64::NEG_INFINITY;
                let mut bound = 1.0;
                for j in 0..utils {
                    let seed = o.seed.wrapping_mul(31).wrapping_add((i * utils + j) as u64);
                    let c =
                        md_regret_bound_check(&base.with_utility(sample_monotone_utility(&dims, seed)?)?)?;
                    worst = worst.max(c.regret);
                    bound = c.bound;
                }
                Ok(MdRow { prior: i, worst_regret: worst, bound, holds: worst <= bound + 1e-9 })
            })
            .collect::<Result<_>>()?
    };
    let pass = rows.iter().all(|r| r.holds);
    let text = match o.format {
        Format::Json => json_doc(manifest, json!({ "pass": pass, "rows": rows }))?,
        Format::Csv => {
            let mut t = Csv::new(&["prior", "worst_regret", "bound", "holds"]);
            for r in &rows {
                t.push(vec![r.prior.to_string(), num(r.worst_regret), num(r.bound), r.holds.to_string()]);
            }
            csv_doc(manifest, &[("pass".to_string(), pass.to_string())], &t)?
        }
    };
    Ok(Outcome { text: Some(text), pass })
}
