//! Command-line front end for the hashrate-pegged mining market toolkit.
//!
//! Every subcommand reads plain inputs (a scenario JSON file or numeric
//! flags), runs the corresponding library routine, and writes one
//! deterministic document: pretty JSON for single results, CSV for sweeps,
//! JSONL for dynamics traces. Exit codes follow a small contract:
//!
//! * `0` — the requested computation succeeded (including a dynamics run
//!   that honestly reports non-convergence),
//! * `2` — bad input: unreadable or invalid scenario, rejected model
//!   parameters, malformed flags,
//! * `3` — a verification ran and the profile failed the certificate.

mod document;
mod scenario;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hashpeg::{
    best_response_dynamics, collusion_report, new_miner_optimum, revalue, solve_equilibrium_with,
    sybil_report, thresholds, verify_equilibrium, verify_profile, CollusionReport,
    CollusionScenario, CostProfile, Equilibrium, HashrateProfile, NewMinerEntry, RevaluationFactor,
    RevaluationReport, RewardParams, SelectionPolicy, SybilReport, SybilScenario, Thresholds,
    UpdateOrder, VerificationReport, VerifyOptions,
};
use serde::Serialize;

use crate::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "hashpeg",
    version,
    about = "Equilibria, certificates, and attack analysis for hashrate-pegged mining rewards"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a scenario for its mining equilibrium.
    Solve(SolveArgs),
    /// Check a hashrate profile against the epsilon-equilibrium certificate.
    Verify(VerifyArgs),
    /// Run best-response dynamics from a starting profile.
    Dynamics(DynamicsArgs),
    /// Sweep one parameter and emit a CSV row per equilibrium.
    Sweep(SweepArgs),
    /// Evaluate a coalition of identical miners merging into one player.
    Collude(ColludeArgs),
    /// Evaluate one of several identical miners splitting into fake identities.
    Sybil(SybilArgs),
    /// Compare equilibria before and after a token revaluation.
    Revalue(RevalueArgs),
    /// Optimal entry hashrate against a threshold-pinned network.
    NewMiner(NewMinerArgs),
}

/// Equilibrium-set point choice where the pinned regime leaves slack.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum SelectionArg {
    Canonical,
    Utilitarian,
}

impl From<SelectionArg> for SelectionPolicy {
    fn from(arg: SelectionArg) -> Self {
        match arg {
            SelectionArg::Canonical => SelectionPolicy::Canonical,
            SelectionArg::Utilitarian => SelectionPolicy::Utilitarian,
        }
    }
}

/// Miner update schedule for dynamics runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum OrderArg {
    RoundRobin,
    Random,
}

/// Which scenario parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepParam {
    /// Reward decay exponent.
    Delta,
    /// Peg threshold.
    Q,
    /// Token revaluation factor (costs divide by the value).
    Factor,
}

impl SweepParam {
    fn name(self) -> &'static str {
        match self {
            SweepParam::Delta => "delta",
            SweepParam::Q => "Q",
            SweepParam::Factor => "factor",
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Scenario JSON file (costs, Q, delta).
    scenario: PathBuf,
    /// Equilibrium-set point choice in the pinned regime.
    #[arg(long, value_enum, default_value_t = SelectionArg::Canonical)]
    selection: SelectionArg,
    /// Skip the independent certificate (the document carries `null`).
    #[arg(long)]
    no_verify: bool,
    /// Improvement tolerance for the certificate.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Deviation-grid intervals per miner for the certificate.
    #[arg(long, default_value_t = 1000)]
    grid_steps: usize,
    /// Deviation-grid upper end (defaults to twice the larger of H and Q).
    #[arg(long)]
    span: Option<f64>,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Scenario JSON file (costs, Q, delta).
    scenario: PathBuf,
    /// Comma-separated per-miner hashrates to certify.
    #[arg(long)]
    profile: String,
    /// Improvement tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps: f64,
    /// Deviation-grid intervals per miner.
    #[arg(long, default_value_t = 1000)]
    grid_steps: usize,
    /// Deviation-grid upper end (defaults to twice the larger of H and Q).
    #[arg(long)]
    span: Option<f64>,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct DynamicsArgs {
    /// Scenario JSON file (costs, Q, delta).
    scenario: PathBuf,
    /// Comma-separated starting hashrates (defaults to all zeros).
    #[arg(long)]
    start: Option<String>,
    /// Budget of single-miner updates.
    #[arg(long, default_value_t = 1000)]
    iterations: usize,
    /// Convergence tolerance on the residual improvement any miner has left.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Miner update schedule.
    #[arg(long, value_enum, default_value_t = OrderArg::RoundRobin)]
    order: OrderArg,
    /// Seed for the random schedule (ignored under round-robin).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the visited profiles as JSONL to this file.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Write the summary document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario JSON file; the swept parameter overrides its field.
    scenario: PathBuf,
    /// Parameter to vary.
    #[arg(long, value_enum)]
    param: SweepParam,
    /// First grid value.
    #[arg(long)]
    from: f64,
    /// Last grid value (inclusive).
    #[arg(long)]
    to: f64,
    /// Number of grid points (at least 2; evenly spaced).
    #[arg(long)]
    steps: usize,
    /// Equilibrium-set point choice in the pinned regime.
    #[arg(long, value_enum, default_value_t = SelectionArg::Canonical)]
    selection: SelectionArg,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ColludeArgs {
    /// Number of identical miners in the market.
    #[arg(short = 'm', long)]
    miners: usize,
    /// Common marginal cost.
    #[arg(short = 'c', long)]
    cost: f64,
    /// Coalition size (2..=miners-1).
    #[arg(short = 'k', long)]
    coalition: usize,
    /// Peg threshold.
    #[arg(short = 'Q', long, default_value_t = 1.0)]
    q_threshold: f64,
    /// Reward decay exponent.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SybilArgs {
    /// Number of identical miners in the market.
    #[arg(short = 'm', long)]
    miners: usize,
    /// Common marginal cost.
    #[arg(short = 'c', long)]
    cost: f64,
    /// Identities the attacker splits into.
    #[arg(short = 'k', long)]
    identities: usize,
    /// Peg threshold.
    #[arg(short = 'Q', long, default_value_t = 1.0)]
    q_threshold: f64,
    /// Reward decay exponent.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RevalueArgs {
    /// Scenario JSON file (costs, Q, delta).
    scenario: PathBuf,
    /// Token value multiplier (> 0; effective costs divide by it).
    #[arg(short = 'R', long)]
    factor: f64,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct NewMinerArgs {
    /// Entrant's marginal cost in normalized units.
    #[arg(long)]
    cost: f64,
    /// Reward decay exponent.
    #[arg(long, default_value_t = 0.0)]
    delta: f64,
    /// Write the document here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Solve(args) => cmd_solve(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Dynamics(args) => cmd_dynamics(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Collude(args) => cmd_collude(args),
        Command::Sybil(args) => cmd_sybil(args),
        Command::Revalue(args) => cmd_revalue(args),
        Command::NewMiner(args) => cmd_new_miner(args),
    }
}

#[derive(Serialize)]
struct SolveDocument {
    scenario: Scenario,
    thresholds: Thresholds,
    equilibrium: Equilibrium,
    /// `null` under --no-verify.
    verification: Option<VerificationReport>,
}

fn cmd_solve(args: SolveArgs) -> Result<ExitCode> {
    let scenario = Scenario::load(&args.scenario)?;
    let (costs, params) = scenario.to_model()?;
    let thresholds = thresholds(&costs, &params)?;
    let equilibrium = solve_equilibrium_with(&costs, &params, args.selection.into())?;
    let verification = if args.no_verify {
        None
    } else {
        let options = VerifyOptions {
            eps: args.eps,
            grid_steps: args.grid_steps,
            span: args.span,
        };
        Some(verify_equilibrium(&equilibrium, &costs, &params, &options)?)
    };
    let certified = verification.as_ref().is_none_or(|report| report.passed);
    let document = SolveDocument {
        scenario,
        thresholds,
        equilibrium,
        verification,
    };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    Ok(if certified {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

#[derive(Serialize)]
struct VerifyDocument {
    scenario: Scenario,
    profile: Vec<f64>,
    report: VerificationReport,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let scenario = Scenario::load(&args.scenario)?;
    let (costs, params) = scenario.to_model()?;
    let rates = parse_float_list(&args.profile).context("parsing --profile")?;
    let profile = HashrateProfile::new(rates.clone())?;
    let options = VerifyOptions {
        eps: args.eps,
        grid_steps: args.grid_steps,
        span: args.span,
    };
    let report = verify_profile(&profile, &costs, &params, &options)?;
    let passed = report.passed;
    let document = VerifyDocument {
        scenario,
        profile: rates,
        report,
    };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    Ok(if passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(3)
    })
}

#[derive(Serialize)]
struct DynamicsDocument {
    scenario: Scenario,
    order: OrderArg,
    /// Present only for the random schedule.
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    tol: f64,
    converged: bool,
    iterations: usize,
    final_gap: f64,
    hashrates: Vec<f64>,
    total_hashrate: f64,
}

#[derive(Serialize)]
struct TraceLine<'a> {
    iteration: usize,
    hashrates: &'a [f64],
}

fn cmd_dynamics(args: DynamicsArgs) -> Result<ExitCode> {
    let scenario = Scenario::load(&args.scenario)?;
    let (costs, params) = scenario.to_model()?;
    let start = match &args.start {
        Some(text) => parse_float_list(text).context("parsing --start")?,
        None => vec![0.0; scenario.costs.len()],
    };
    let start = HashrateProfile::new(start)?;
    let order = match args.order {
        OrderArg::RoundRobin => UpdateOrder::RoundRobin,
        OrderArg::Random => UpdateOrder::Random { seed: args.seed },
    };
    let trace = best_response_dynamics(&start, &costs, &params, order, args.iterations, args.tol)?;

    if let Some(path) = &args.trace {
        let mut lines = String::new();
        for (iteration, iterate) in trace.iterates.iter().enumerate() {
            lines.push_str(&document::render_line(&TraceLine {
                iteration,
                hashrates: iterate.rates(),
            })?);
        }
        fs::write(path, lines).with_context(|| format!("writing {}", path.display()))?;
    }

    let last = trace.final_profile();
    let document = DynamicsDocument {
        scenario,
        order: args.order,
        seed: (args.order == OrderArg::Random).then_some(args.seed),
        tol: args.tol,
        converged: trace.converged,
        iterations: trace.iterations,
        final_gap: trace.final_gap,
        hashrates: last.rates().to_vec(),
        total_hashrate: last.total(),
    };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    // a non-convergent run is a faithful result, not a failure
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> Result<ExitCode> {
    let scenario = Scenario::load(&args.scenario)?;
    ensure!(args.steps >= 2, "sweep needs at least two steps");
    ensure!(
        args.from.is_finite() && args.to.is_finite(),
        "sweep endpoints must be finite"
    );

    let miners = scenario.costs.len();
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "param".to_string(),
        "value".to_string(),
        "regime".to_string(),
        "c_star".to_string(),
        "c_dagger".to_string(),
        "total_hashrate".to_string(),
        "participants".to_string(),
        "share_top".to_string(),
        "r_low_high".to_string(),
    ];
    for i in 1..=miners {
        header.push(format!("q_{i}"));
        header.push(format!("lo_{i}"));
        header.push(format!("hi_{i}"));
    }
    writer.write_record(&header)?;

    for k in 0..args.steps {
        let value = if k + 1 == args.steps {
            args.to
        } else {
            args.from + (args.to - args.from) * k as f64 / (args.steps - 1) as f64
        };
        let (costs, params) = match args.param {
            SweepParam::Delta => (
                CostProfile::new(scenario.costs.clone())?,
                RewardParams::new(scenario.q_threshold, value)?,
            ),
            SweepParam::Q => (
                CostProfile::new(scenario.costs.clone())?,
                RewardParams::new(value, scenario.delta)?,
            ),
            SweepParam::Factor => {
                let factor = RevaluationFactor::new(value)?;
                let scaled = scenario.costs.iter().map(|c| c / factor.value()).collect();
                (
                    CostProfile::new(scaled)?,
                    RewardParams::new(scenario.q_threshold, scenario.delta)?,
                )
            }
        };
        let thresholds = thresholds(&costs, &params)?;
        let equilibrium = solve_equilibrium_with(&costs, &params, args.selection.into())?;
        writer.write_record(sweep_row(
            args.param,
            value,
            &thresholds,
            &equilibrium,
            &costs,
        )?)?;
    }

    let bytes = writer.into_inner().context("flushing CSV")?;
    let text = String::from_utf8(bytes).expect("CSV output is UTF-8");
    document::emit(&text, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

/// One CSV row: scalars, then a `q,lo,hi` triple per miner (the interval
/// degenerates to the point outside the pinned regime).
fn sweep_row(
    param: SweepParam,
    value: f64,
    thresholds: &Thresholds,
    equilibrium: &Equilibrium,
    costs: &CostProfile,
) -> Result<Vec<String>> {
    let total = equilibrium.total_hashrate;
    let share_top = equilibrium
        .hashrates
        .iter()
        .fold(0.0f64, |a, &q| a.max(q))
        / total;

    // cheapest versus priciest participant; blank when the ratio is
    // undefined (single participant or equal costs)
    let cheap = equilibrium
        .participants
        .iter()
        .copied()
        .min_by(|&a, &b| costs.cost(a).total_cmp(&costs.cost(b)));
    let dear = equilibrium
        .participants
        .iter()
        .copied()
        .max_by(|&a, &b| costs.cost(a).total_cmp(&costs.cost(b)));
    let ratio = match (cheap, dear) {
        (Some(i), Some(j)) if costs.cost(i) != costs.cost(j) => {
            format!("{}", hashpeg::relative_market_share(equilibrium, costs, i, j)?)
        }
        _ => String::new(),
    };

    let mut row = vec![
        param.name().to_string(),
        format!("{value}"),
        equilibrium.regime.to_string(),
        format!("{}", thresholds.c_star),
        thresholds
            .c_dagger
            .map_or_else(String::new, |c| format!("{c}")),
        format!("{total}"),
        equilibrium.participants.len().to_string(),
        format!("{share_top}"),
        ratio,
    ];
    for (i, &q) in equilibrium.hashrates.iter().enumerate() {
        let (lo, hi) = match &equilibrium.intervals {
            Some(intervals) => (intervals[i].lo, intervals[i].hi),
            None => (q, q),
        };
        row.push(format!("{q}"));
        row.push(format!("{lo}"));
        row.push(format!("{hi}"));
    }
    Ok(row)
}

#[derive(Serialize)]
struct ColludeDocument {
    cost: f64,
    q_threshold: f64,
    delta: f64,
    report: CollusionReport,
}

fn cmd_collude(args: ColludeArgs) -> Result<ExitCode> {
    let scenario = CollusionScenario::new(args.miners, args.cost, args.coalition)?;
    let params = RewardParams::new(args.q_threshold, args.delta)?;
    let report = collusion_report(&scenario, &params)?;
    let document = ColludeDocument {
        cost: args.cost,
        q_threshold: args.q_threshold,
        delta: args.delta,
        report,
    };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SybilDocument {
    cost: f64,
    q_threshold: f64,
    delta: f64,
    report: SybilReport,
}

fn cmd_sybil(args: SybilArgs) -> Result<ExitCode> {
    let scenario = SybilScenario::new(args.miners, args.cost, args.identities)?;
    let params = RewardParams::new(args.q_threshold, args.delta)?;
    let report = sybil_report(&scenario, &params)?;
    let document = SybilDocument {
        cost: args.cost,
        q_threshold: args.q_threshold,
        delta: args.delta,
        report,
    };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct RevalueDocument {
    scenario: Scenario,
    report: RevaluationReport,
}

fn cmd_revalue(args: RevalueArgs) -> Result<ExitCode> {
    let scenario = Scenario::load(&args.scenario)?;
    let (costs, params) = scenario.to_model()?;
    let report = revalue(&costs, &params, RevaluationFactor::new(args.factor)?)?;
    let document = RevalueDocument { scenario, report };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct NewMinerDocument {
    cost: f64,
    delta: f64,
    entry: NewMinerEntry,
}

fn cmd_new_miner(args: NewMinerArgs) -> Result<ExitCode> {
    let entry = new_miner_optimum(args.cost, args.delta)?;
    let document = NewMinerDocument {
        cost: args.cost,
        delta: args.delta,
        entry,
    };
    document::emit(&document::render(&document)?, args.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn parse_float_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|piece| {
            let piece = piece.trim();
            piece
                .parse::<f64>()
                .with_context(|| format!("invalid number {piece:?}"))
        })
        .collect()
}
