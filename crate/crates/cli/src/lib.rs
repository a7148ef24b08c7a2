//! Subcommands of the `convertbw` binary.
//!
//! Every command returns an [`Outcome`] holding both a human rendering and a
//! JSON document; `main` picks one and maps the status to an exit code.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use convertbw::bounds::{self, BoundResult, GridRow, ParamGrid};
use convertbw::code_model::{random_mds_pair, CodeParams, ModelError, SplitParams};
use convertbw::conversion::{check_feasible, cost, derive_transform, ConversionError};
use convertbw::example::{self, Fixture, VerifyOptions};
use convertbw::io::{load_json, save_json, CodeFile, IoError, MatrixFile, PlanFile};
use convertbw::lp_oracle::{self, LpSolution};
use convertbw::rational::display;
use convertbw::search::{
    min_read_search, verify_achievability, SearchConfig, SearchError, SearchMode,
};
use num_rational::BigRational;
use serde_json::{json, Value};
use thiserror::Error;

pub const SCHEMA: &str = "convertbw/1";

const INDEX_NOTE: &str = "Indices are 0-based everywhere: symbols 0..nI, subsymbols 0..ell, \
final codewords 0..lambda. A 1-based index i from the literature is i - 1 here, so a read set \
written {1,2} is stored as [0, 1].

Environment: CONVERTBW_THREADS caps worker threads (0 or unset = one per core).
Exit status: 0 all checks passed, 1 a check failed, 2 usage or input error.";

#[derive(Debug, Parser)]
#[command(name = "convertbw", version, about = "Read bandwidth of split MDS code conversion", after_help = INDEX_NOTE)]
pub struct Cli {
    /// Emit machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run every check of the bundled worked example (lambda=2, kF=2, rF=1, rI=4, ell=4, p=43).
    VerifyExample(VerifyExampleArgs),
    /// Evaluate a read-bandwidth lower bound.
    Bound(BoundArgs),
    /// Compare the bound with the prior bound over a parameter grid.
    Compare(CompareArgs),
    /// Check a read plan against a code and report its cost.
    VerifyPlan(VerifyPlanArgs),
    /// Find a minimum-read feasible plan for a code.
    Search(SearchArgs),
    /// Generate a random MDS pair and write it as a code file.
    GenCode(GenCodeArgs),
}

#[derive(Debug, Clone, Copy, Args)]
pub struct ParamArgs {
    #[arg(long)]
    pub lambda: usize,
    #[arg(long = "kF")]
    pub k_f: usize,
    #[arg(long = "rF")]
    pub r_f: usize,
    #[arg(long = "rI")]
    pub r_i: usize,
    #[arg(long, default_value_t = 1)]
    pub ell: usize,
}

impl ParamArgs {
    fn split(&self) -> Result<SplitParams, CliError> {
        SplitParams::new(self.lambda, self.k_f, self.r_f, self.r_i, self.ell)
            .map_err(|e| CliError::Input(e.to_string()))
    }
}

#[derive(Debug, Args)]
pub struct VerifyExampleArgs {
    /// Replace the bundled code file (skips the checksum check).
    #[arg(long)]
    pub code: Option<PathBuf>,
    /// Replace the bundled plan file (skips the checksum check).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Replace the bundled witness matrix E (skips the checksum check).
    #[arg(long)]
    pub e: Option<PathBuf>,
    #[arg(long, default_value_t = example::DEFAULT_MESSAGES)]
    pub messages: usize,
    #[arg(long, default_value_t = example::DEFAULT_SEED)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Which {
    Auto,
    Thm1,
    Thm2,
    Thm3,
    Prior,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long, value_enum, default_value_t = Which::Auto)]
    pub which: Which,
    /// Also solve the two-variable program exactly and require equality.
    #[arg(long)]
    pub lp_check: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Comma-separated `key=a..b` or `key=v` items; bare values extend the previous key.
    #[arg(long, default_value = ParamGrid::DEFAULT_SPEC)]
    pub grid: String,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyPlanArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long)]
    pub plan: PathBuf,
    /// Write the derived transform T to this matrix file.
    #[arg(long)]
    pub derive: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Exhaustive,
    Prefix,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub code: PathBuf,
    #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
    pub mode: ModeArg,
    #[arg(long)]
    pub max_read: Option<usize>,
    #[arg(long)]
    pub max_plans: Option<u64>,
    /// Shuffle the order within each cost level.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Report progress on stderr.
    #[arg(long)]
    pub progress: bool,
    /// Random messages used to confirm the found plan.
    #[arg(long, default_value_t = 20)]
    pub messages: usize,
}

#[derive(Debug, Args)]
pub struct GenCodeArgs {
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub p: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub max_attempts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    CheckFailed,
}

impl Status {
    pub fn exit_code(self) -> u8 {
        match self {
            Status::Pass => 0,
            Status::CheckFailed => 1,
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::CheckFailed
        }
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub human: String,
    pub json: Value,
}

#[derive(Debug, Error)]
pub enum CliError {
    /// Bad flags, unreadable files, or parameters outside a requested regime.
    #[error("{0}")]
    Input(String),
    /// A computation ran and a check did not hold.
    #[error("{0}")]
    Check(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Check(_) => 1,
        }
    }
}

impl From<IoError> for CliError {
    fn from(e: IoError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::VerifyExample(a) => verify_example(a),
        Command::Bound(a) => bound(a),
        Command::Compare(a) => compare(a),
        Command::VerifyPlan(a) => verify_plan(a),
        Command::Search(a) => search(a),
        Command::GenCode(a) => gen_code(a),
    }
}

/// Name of the subcommand, used as the `command` field of JSON output.
pub fn command_name(cli: &Cli) -> &'static str {
    match cli.command {
        Command::VerifyExample(_) => "verify-example",
        Command::Bound(_) => "bound",
        Command::Compare(_) => "compare",
        Command::VerifyPlan(_) => "verify-plan",
        Command::Search(_) => "search",
        Command::GenCode(_) => "gen-code",
    }
}

/// Sizes the global rayon pool from `CONVERTBW_THREADS`.
pub fn configure_threads() -> Result<(), CliError> {
    let threads = match std::env::var("CONVERTBW_THREADS") {
        Ok(v) if !v.trim().is_empty() => v.trim().parse::<usize>().map_err(|_| {
            CliError::Input(format!(
                "CONVERTBW_THREADS must be a non-negative integer, got {v:?}"
            ))
        })?,
        _ => 0,
    };
    // a pool may already exist when embedded; keep it
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global();
    Ok(())
}

fn rat(v: &BigRational) -> Value {
    json!(display(v))
}

fn bound_json(b: &BoundResult) -> Value {
    json!({
        "regime": b.regime,
        "value": rat(&b.value),
        "ceiling": b.ceiling.to_string(),
        "vertex": b.vertex.as_ref().map(|(x, y)| json!([display(x), display(y)])),
    })
}

fn lp_json(s: &LpSolution) -> Value {
    json!({"x": rat(&s.x), "y": rat(&s.y), "value": rat(&s.value), "tight": s.tight})
}

fn verify_example(a: &VerifyExampleArgs) -> Result<Outcome, CliError> {
    let mut fixture = Fixture::bundled();
    let edited = a.code.is_some() || a.plan.is_some() || a.e.is_some();
    if let Some(path) = &a.code {
        fixture.code = load_json(path)?;
    }
    if let Some(path) = &a.plan {
        fixture.plan = load_json(path)?;
    }
    if let Some(path) = &a.e {
        fixture.e = load_json(path)?;
    }
    let opts = VerifyOptions {
        expected_checksum: if edited {
            None
        } else {
            Some(example::CHECKSUM.to_string())
        },
        messages: a.messages,
        seed: a.seed,
    };
    let report = example::verify_fixture(&fixture, &opts);

    let mut human = String::new();
    for c in &report.checks {
        let _ = writeln!(
            human,
            "{:<5} {:<20} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    match report.first_failure() {
        None => {
            let _ = writeln!(
                human,
                "PASS read {} write {} bound {} regime {}",
                report.read.unwrap_or_default(),
                report.write.unwrap_or_default(),
                report.bound.as_deref().unwrap_or("?"),
                report.regime.map_or("?", |r| r.label()),
            );
        }
        Some(c) => {
            let _ = writeln!(human, "FAIL first failing check: {}", c.name);
        }
    }
    Ok(Outcome {
        status: Status::from_bool(report.passed()),
        human,
        json: json!({
            "passed": report.passed(),
            "first_failure": report.first_failure().map(|c| c.name),
            "checks": report.checks,
            "read": report.read,
            "write": report.write,
            "bound": report.bound,
            "regime": report.regime,
        }),
    })
}

fn bound(a: &BoundArgs) -> Result<Outcome, CliError> {
    let p = a.params.split()?;
    let input = |e: bounds::BoundError| CliError::Input(e.to_string());
    let result = match a.which {
        Which::Auto => bounds::lower_bound(&p).map_err(input)?,
        Which::Thm1 => bounds::bound_thm1(&p).map_err(input)?,
        Which::Thm2 => bounds::bound_thm2(&p).map_err(input)?,
        Which::Thm3 => bounds::bound_thm3(&p).map_err(input)?,
        Which::Prior => bounds::bound_prior(&p),
    };
    let mut human = format!(
        "regime {}\nvalue {}\nceiling {}\n",
        result.regime,
        display(&result.value),
        result.ceiling
    );
    if let Some((x, y)) = &result.vertex {
        let _ = writeln!(human, "vertex ({}, {})", display(x), display(y));
    }
    let mut doc = json!({"params": p, "bound": bound_json(&result)});
    let mut status = Status::Pass;
    if a.lp_check {
        let lp_input = |e: lp_oracle::LpError| CliError::Input(e.to_string());
        let problem = match a.which {
            Which::Auto => lp_oracle::problem_for(&p).map_err(lp_input)?.1,
            Which::Thm1 => lp_oracle::thm1_problem(&p).map_err(lp_input)?,
            Which::Thm2 => lp_oracle::thm2_problem(&p).map_err(lp_input)?,
            Which::Thm3 => lp_oracle::thm3_problem(&p).map_err(lp_input)?,
            Which::Prior => {
                return Err(CliError::Input(
                    "--lp-check has no program for the prior bound".into(),
                ))
            }
        };
        let s = lp_oracle::solve(&problem)
            .map_err(|e| CliError::Check(format!("oracle failed: {e}")))?;
        let agrees = s.value == result.value;
        let _ = writeln!(
            human,
            "oracle {} at ({}, {}): {}",
            display(&s.value),
            display(&s.x),
            display(&s.y),
            if agrees { "agrees" } else { "DISAGREES" }
        );
        doc["oracle"] = lp_json(&s);
        doc["oracle_agrees"] = json!(agrees);
        status = Status::from_bool(agrees);
    }
    Ok(Outcome {
        status,
        human,
        json: doc,
    })
}

fn compare(a: &CompareArgs) -> Result<Outcome, CliError> {
    let grid = ParamGrid::parse(&a.grid).map_err(|e| CliError::Input(e.to_string()))?;
    let rows = bounds::sweep(&grid).map_err(|e| CliError::Check(e.to_string()))?;
    let mut csv = String::from(GridRow::CSV_HEADER);
    csv.push('\n');
    for r in &rows {
        csv.push_str(&r.to_csv());
        csv.push('\n');
    }
    let strict = rows.iter().filter(|r| r.comparison.strict).count();
    let negative = rows
        .iter()
        .filter(|r| !bounds::is_nonnegative(&r.comparison.delta))
        .count();
    let summary = format!(
        "{} rows, {strict} strict improvements, {negative} negative deltas",
        rows.len()
    );

    let mut human = String::new();
    if let Some(path) = &a.out {
        fs::write(path, &csv).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        let _ = writeln!(human, "wrote {}", path.display());
    } else {
        human.push_str(&csv);
    }
    let _ = writeln!(human, "{summary}");
    Ok(Outcome {
        status: Status::from_bool(negative == 0),
        human,
        json: json!({
            "rows": rows.len(),
            "strict_improvements": strict,
            "negative_deltas": negative,
            "out": a.out.as_ref().map(|p| p.display().to_string()),
        }),
    })
}

fn load_pair(path: &Path) -> Result<convertbw::ConvertiblePair, CliError> {
    let file: CodeFile = load_json(path)?;
    Ok(file.to_pair()?)
}

fn verify_plan(a: &VerifyPlanArgs) -> Result<Outcome, CliError> {
    let pair = load_pair(&a.code)?;
    let params = pair.params;
    let plan = load_json::<PlanFile>(&a.plan)?.to_plan(&params)?;
    let feas = check_feasible(&pair, &plan).map_err(|e| CliError::Input(e.to_string()))?;
    let costs = cost(&plan, &params).map_err(|e| CliError::Input(e.to_string()))?;
    let comparison = bounds::compare(&params.split).map_err(|e| CliError::Check(e.to_string()))?;

    let mut human = format!(
        "feasible {}\nrank B~ {}\nrank C~ {}\nB~ full column rank {}\nread {} write {} total {}\nbound {} ({})\nprior {}\n",
        feas.holds,
        feas.rank_b,
        feas.rank_c,
        feas.b_full_col_rank,
        costs.read,
        costs.write,
        costs.total,
        display(&comparison.ours),
        comparison.regime,
        display(&comparison.prior),
    );
    let mut doc = json!({
        "params": params.split,
        "p": params.p(),
        "feasibility": feas,
        "cost": costs,
        "bound": {"regime": comparison.regime, "value": rat(&comparison.ours)},
        "prior": rat(&comparison.prior),
    });
    let mut status = Status::from_bool(feas.holds);
    if feas.holds {
        let read = BigRational::from_integer(costs.read.into());
        if read < comparison.ours {
            let _ = writeln!(human, "read cost is below the lower bound");
            status = Status::CheckFailed;
        }
    }
    if let Some(path) = &a.derive {
        match derive_transform(&pair, &plan) {
            Ok(t) => {
                save_json(path, &MatrixFile::from_matrix(&t.matrix))?;
                let _ = writeln!(
                    human,
                    "wrote T ({} x {}) to {}",
                    t.matrix.rows(),
                    t.matrix.cols(),
                    path.display()
                );
                doc["transform"] = json!(path.display().to_string());
            }
            Err(ConversionError::Infeasible { rank_b, rank_joint }) => {
                let _ = writeln!(
                    human,
                    "no transform: rank G~ = {rank_b}, rank [G~ | target] = {rank_joint}"
                );
                status = Status::CheckFailed;
            }
            Err(e) => return Err(CliError::Check(e.to_string())),
        }
    }
    Ok(Outcome {
        status,
        human,
        json: doc,
    })
}

fn search(a: &SearchArgs) -> Result<Outcome, CliError> {
    let pair = load_pair(&a.code)?;
    let config = SearchConfig {
        mode: match a.mode {
            ModeArg::Exhaustive => SearchMode::Exhaustive,
            ModeArg::Prefix => SearchMode::PrefixOnly,
        },
        max_read: a.max_read,
        max_plans: a.max_plans,
        seed: a.seed,
        progress: a.progress,
    };
    let result = match min_read_search(&pair, &config) {
        Ok(r) => r,
        Err(e @ SearchError::SpaceTooLarge { .. }) => return Err(CliError::Input(e.to_string())),
        Err(e) => return Err(CliError::Check(e.to_string())),
    };
    let report = verify_achievability(&pair, &result, a.messages, a.seed.unwrap_or(0))
        .map_err(|e| CliError::Check(e.to_string()))?;
    let sound = bounds::is_nonnegative(&report.gap);
    let human = format!(
        "plan {:?}\ncost {}\nexhaustive {}\nplans checked {}\nbound {}\ngap {}\nconversions verified on {} messages\n",
        result.best_plan.sets(),
        result.best_cost,
        result.exhaustive,
        result.plans_checked,
        display(&report.bound),
        display(&report.gap),
        report.messages_checked,
    );
    Ok(Outcome {
        status: Status::from_bool(sound),
        human,
        json: json!({
            "result": {
                "best_plan": {"D": result.best_plan.sets()},
                "best_cost": result.best_cost,
                "exhaustive": result.exhaustive,
                "plans_checked": result.plans_checked,
            },
            "achievability": {
                "bound": rat(&report.bound),
                "gap": rat(&report.gap),
                "messages_checked": report.messages_checked,
            },
        }),
    })
}

fn gen_code(a: &GenCodeArgs) -> Result<Outcome, CliError> {
    let s = a.params;
    let params = CodeParams::new(s.lambda, s.k_f, s.r_f, s.r_i, s.ell, a.p)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let pair = match random_mds_pair(params, a.seed, a.max_attempts) {
        Ok(pair) => pair,
        Err(e @ ModelError::GenerationFailed { .. }) => return Err(CliError::Check(e.to_string())),
        Err(e) => return Err(CliError::Input(e.to_string())),
    };
    save_json(&a.out, &CodeFile::from_pair(&pair))?;
    Ok(Outcome {
        status: Status::Pass,
        human: format!("wrote {}\n", a.out.display()),
        json: json!({"out": a.out.display().to_string(), "params": params.split, "p": params.p(), "seed": a.seed}),
    })
}
