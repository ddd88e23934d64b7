//! latintrade: construction, verification, search and planning for
//! mu-way k-homogeneous Latin trades.
//!
//! Machine-readable JSON goes to standard output, human summaries to
//! standard error. Exit codes: 0 success / exists / found / verified,
//! 1 usage or internal error, 2 nonexistent / verification failed /
//! exhausted without witness, 3 unknown / timeout.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use latin_trades::catalog::catalog;
use latin_trades::circulant::BaseRow;
use latin_trades::compose::partition_intercalates;
use latin_trades::label347::label_search_347;
use latin_trades::planner::{Existence, Planner, Recipe};
use latin_trades::search::{
    resume_base_row, resume_trade, search_base_row_seeded, search_trade, Checkpoint, SearchBudget,
    SearchOptions, SearchOutcome, SearchRun,
};
use latin_trades::Trade;

#[derive(Parser)]
#[command(name = "latintrade", version, about = "mu-way k-homogeneous Latin trade toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Plan, build and verify a (mu, k, m) trade.
    Construct {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 3)]
        mu: usize,
        /// Also write the trade JSON to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the recipe JSON to this file.
        #[arg(long)]
        recipe_out: Option<PathBuf>,
    },
    /// Check a trade file (or a base row with --base-row); report every violation.
    Verify {
        file: PathBuf,
        /// The file holds a circulant base row, not a full trade.
        #[arg(long)]
        base_row: bool,
    },
    /// Exhaustive search: circulant base rows, whole trades, or the label relaxation.
    Search {
        /// Search space; inferred from the checkpoint when resuming.
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long, default_value_t = 3)]
        mu: usize,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        /// Wall-clock budget in seconds.
        #[arg(long)]
        budget: Option<f64>,
        /// Node (candidate attempt) budget.
        #[arg(long)]
        nodes: Option<u64>,
        /// Parallel width.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Shuffle the branch order deterministically from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the resumable checkpoint on timeout.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Resume from a checkpoint file written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
        /// Disable the first-row/lex symmetry reduction (trade mode).
        #[arg(long)]
        no_symmetry: bool,
        /// Disable the structural prunes (trade mode).
        #[arg(long)]
        no_prunes: bool,
        /// Drop the union bound (label347 mode); solutions then exist.
        #[arg(long)]
        relaxed: bool,
        /// Write a found witness to this file.
        #[arg(long)]
        witness_out: Option<PathBuf>,
    },
    /// List the embedded catalog, or emit one base row with --emit K M.
    Catalog {
        #[arg(long)]
        list: bool,
        #[arg(long, num_args = 2, value_names = ["K", "M"])]
        emit: Option<Vec<usize>>,
    },
    /// Split a (mu, mu, m) trade into its forced intercalate blocks.
    Partition { file: PathBuf },
    /// Planner verdicts over the window 3 <= k <= min(m, KMAX), k <= m <= MMAX.
    Sweep {
        #[arg(long, default_value_t = 40)]
        kmax: usize,
        #[arg(long, default_value_t = 40)]
        mmax: usize,
        /// Parallel width for fallback searches.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    BaseRow,
    Trade,
    Label347,
}

const OK: u8 = 0;
const USAGE: u8 = 1;
const NEGATIVE: u8 = 2;
const UNDECIDED: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if e.use_stderr() {
                eprintln!("{}", e);
                return ExitCode::from(USAGE);
            }
            // --help / --version
            print!("{}", e);
            return ExitCode::from(OK);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::from(USAGE)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Box<dyn std::error::Error>> {
    match cli.cmd {
        Cmd::Construct { k, m, mu, out, recipe_out } => construct(mu, k, m, out, recipe_out),
        Cmd::Verify { file, base_row } => verify(&file, base_row),
        Cmd::Search {
            mode,
            mu,
            k,
            m,
            budget,
            nodes,
            jobs,
            seed,
            checkpoint,
            resume,
            no_symmetry,
            no_prunes,
            relaxed,
            witness_out,
        } => {
            let mut b = SearchBudget::default().parallel(jobs);
            if let Some(s) = budget {
                b = b.seconds(s);
            }
            if let Some(n) = nodes {
                b = b.nodes(n);
            }
            let opts = Opts {
                mu,
                k,
                m,
                budget: b,
                seed,
                checkpoint,
                resume,
                symmetry: !no_symmetry,
                prunes: !no_prunes,
                relaxed,
                witness_out,
            };
            let mode = match (mode, &opts.resume) {
                (Some(mode), _) => mode,
                (None, Some(path)) => {
                    let cp = Checkpoint::from_json_str(&std::fs::read_to_string(path)?)?;
                    match cp {
                        Checkpoint::BaseRow { .. } => Mode::BaseRow,
                        Checkpoint::Trade { .. } => Mode::Trade,
                    }
                }
                (None, None) => return Err("--mode is required without --resume".into()),
            };
            match mode {
                Mode::BaseRow => search_rows(opts),
                Mode::Trade => search_trades(opts),
                Mode::Label347 => search_labels(opts),
            }
        }
        Cmd::Catalog { list, emit } => catalog_cmd(list, emit),
        Cmd::Partition { file } => partition(&file),
        Cmd::Sweep { kmax, mmax, jobs } => sweep(kmax, mmax, jobs),
    }
}

fn emit(value: &Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("JSON output"));
}

fn trade_value(t: &Trade) -> Value {
    serde_json::from_str(&t.to_json_string()).expect("trade JSON round-trips")
}

fn row_value(r: &BaseRow) -> Value {
    serde_json::from_str(&r.to_json_string()).expect("base row JSON round-trips")
}

// ---------------------------------------------------------------------------

fn construct(
    mu: usize,
    k: usize,
    m: usize,
    out: Option<PathBuf>,
    recipe_out: Option<PathBuf>,
) -> Result<u8, Box<dyn std::error::Error>> {
    let mut planner = Planner::new()?;
    let status = planner.plan_mu(mu, k, m)?;
    match status {
        Existence::Exists { recipe } => {
            let trade = planner.execute(&recipe)?;
            let recipe_json = serde_json::to_value(&recipe)?;
            emit(&json!({
                "mu": mu, "k": k, "m": m,
                "status": "exists",
                "verified": true,
                "recipe": recipe_json,
                "trade": trade_value(&trade),
            }));
            if let Some(path) = out {
                std::fs::write(path, trade.to_json_string())?;
            }
            if let Some(path) = recipe_out {
                std::fs::write(path, serde_json::to_string_pretty(&recipe)?)?;
            }
            eprintln!("({}, {}, {}) exists; trade built and verified", mu, k, m);
            Ok(OK)
        }
        Existence::Nonexistent { reason } => {
            emit(&json!({
                "mu": mu, "k": k, "m": m,
                "status": "nonexistent",
                "reason": reason,
            }));
            eprintln!("({}, {}, {}) does not exist: {}", mu, k, m, reason);
            Ok(NEGATIVE)
        }
        Existence::Unknown { reason } => {
            emit(&json!({
                "mu": mu, "k": k, "m": m,
                "status": "unknown",
                "reason": reason,
            }));
            eprintln!("({}, {}, {}) undecided: {}", mu, k, m, reason);
            Ok(UNDECIDED)
        }
    }
}

fn verify(file: &PathBuf, base_row: bool) -> Result<u8, Box<dyn std::error::Error>> {
    let text = std::fs::read_to_string(file)?;
    let (report, params) = if base_row {
        let row = BaseRow::from_json_str(&text)?;
        (row.verify(), (row.mu(), row.k(), row.m()))
    } else {
        let trade = Trade::from_json_str(&text)?;
        (trade.verify(), (trade.mu(), trade.k(), trade.m()))
    };
    let ok = report.ok;
    emit(&json!({
        "file": file.display().to_string(),
        "kind": if base_row { "base_row" } else { "trade" },
        "mu": params.0, "k": params.1, "m": params.2,
        "report": serde_json::to_value(&report)?,
    }));
    if ok {
        eprintln!("ok: ({}, {}, {})", params.0, params.1, params.2);
        Ok(OK)
    } else {
        eprintln!("{}", report.summary());
        Ok(NEGATIVE)
    }
}

// ---------------------------------------------------------------------------

struct Opts {
    mu: usize,
    k: Option<usize>,
    m: Option<usize>,
    budget: SearchBudget,
    seed: Option<u64>,
    checkpoint: Option<PathBuf>,
    resume: Option<PathBuf>,
    symmetry: bool,
    prunes: bool,
    relaxed: bool,
    witness_out: Option<PathBuf>,
}

fn need_km(o: &Opts) -> Result<(usize, usize), Box<dyn std::error::Error>> {
    match (o.k, o.m) {
        (Some(k), Some(m)) => Ok((k, m)),
        _ => Err("this mode needs --k and --m".into()),
    }
}

fn finish_search<W>(
    run: SearchRun<W>,
    mode: &str,
    params: Value,
    o: &Opts,
    witness_json: impl Fn(&W) -> Value,
    witness_text: impl Fn(&W) -> String,
) -> Result<u8, Box<dyn std::error::Error>> {
    let stats = serde_json::to_value(&run.stats)?;
    match run.outcome {
        SearchOutcome::Found(w) => {
            emit(&json!({
                "mode": mode, "params": params,
                "verdict": "found",
                "witness": witness_json(&w),
                "stats": stats,
            }));
            if let Some(path) = &o.witness_out {
                std::fs::write(path, witness_text(&w))?;
            }
            eprintln!("found a witness in {} nodes", run.stats.nodes);
            Ok(OK)
        }
        SearchOutcome::None => {
            emit(&json!({
                "mode": mode, "params": params,
                "verdict": "none",
                "stats": stats,
            }));
            eprintln!("search space exhausted: no witness exists");
            Ok(NEGATIVE)
        }
        SearchOutcome::Timeout(cp) => {
            let mut doc = json!({
                "mode": mode, "params": params,
                "verdict": "timeout",
                "stats": stats,
            });
            if let Some(path) = &o.checkpoint {
                std::fs::write(path, cp.to_json_string()?)?;
                doc["checkpoint_file"] = Value::String(path.display().to_string());
                eprintln!("budget exhausted; checkpoint written to {}", path.display());
            } else {
                eprintln!("budget exhausted; rerun with --checkpoint FILE to save the frontier");
            }
            emit(&doc);
            Ok(UNDECIDED)
        }
    }
}

fn search_rows(o: Opts) -> Result<u8, Box<dyn std::error::Error>> {
    let (run, params) = if let Some(path) = &o.resume {
        let cp = Checkpoint::from_json_str(&std::fs::read_to_string(path)?)?;
        let run = resume_base_row(&cp, &o.budget)?;
        (run, json!({ "resumed_from": path.display().to_string() }))
    } else {
        let (k, m) = need_km(&o)?;
        let run = search_base_row_seeded(o.mu, k, m, &o.budget, o.seed)?;
        (run, json!({ "mu": o.mu, "k": k, "m": m, "seed": o.seed }))
    };
    finish_search(run, "base_row", params, &o, row_value, BaseRow::to_json_string)
}

fn search_trades(o: Opts) -> Result<u8, Box<dyn std::error::Error>> {
    let opts = if o.prunes {
        SearchOptions::default()
    } else {
        SearchOptions { prune_row_frequency: false, prune_transversal: false }
    };
    let (run, params) = if let Some(path) = &o.resume {
        let cp = Checkpoint::from_json_str(&std::fs::read_to_string(path)?)?;
        let run = resume_trade(&cp, &o.budget)?;
        (run, json!({ "resumed_from": path.display().to_string() }))
    } else {
        let (k, m) = need_km(&o)?;
        let run = search_trade(o.mu, k, m, &o.budget, o.symmetry, &opts)?;
        (run, json!({ "mu": o.mu, "k": k, "m": m, "symmetry": o.symmetry }))
    };
    finish_search(run, "trade", params, &o, trade_value, Trade::to_json_string)
}

fn search_labels(o: Opts) -> Result<u8, Box<dyn std::error::Error>> {
    let report = label_search_347(!o.relaxed, &o.budget)?;
    emit(&serde_json::to_value(&report)?);
    eprintln!(
        "{} solutions over {} x {} cases ({} nodes{})",
        report.total_solutions,
        report.distributions,
        report.configs,
        report.nodes,
        if report.exhausted { "" } else { ", budget hit before exhaustion" }
    );
    if !report.exhausted {
        Ok(UNDECIDED)
    } else if report.total_solutions == 0 {
        Ok(NEGATIVE)
    } else {
        Ok(OK)
    }
}

// ---------------------------------------------------------------------------

fn catalog_cmd(list: bool, emit_km: Option<Vec<usize>>) -> Result<u8, Box<dyn std::error::Error>> {
    if let Some(km) = emit_km {
        let (k, m) = (km[0], km[1]);
        match catalog().lookup(k, m) {
            Some((row, source)) => {
                emit(&json!({
                    "k": k, "m": m,
                    "source": source,
                    "base_row": row_value(&row),
                }));
                eprintln!("{}", source);
                Ok(OK)
            }
            None => {
                emit(&json!({ "k": k, "m": m, "found": false }));
                eprintln!("no catalog entry covers (3, {}, {})", k, m);
                Ok(NEGATIVE)
            }
        }
    } else if list {
        let c = catalog();
        let fixed: Vec<Value> = c
            .fixed()
            .iter()
            .map(|e| json!({ "name": e.name(), "k": e.k(), "m": e.m() }))
            .collect();
        let families: Vec<Value> = c
            .families()
            .iter()
            .map(|f| json!({ "name": f.name(), "k": f.k(), "min_m": f.min_m() }))
            .collect();
        emit(&json!({ "fixed": fixed, "families": families }));
        eprintln!("{} fixed base rows, {} parametric families", c.fixed().len(), c.families().len());
        Ok(OK)
    } else {
        Err("pass --list or --emit K M".into())
    }
}

fn partition(file: &PathBuf) -> Result<u8, Box<dyn std::error::Error>> {
    let trade = Trade::from_json_str(&std::fs::read_to_string(file)?)?;
    match partition_intercalates(&trade) {
        Ok(p) => {
            println!("{}", p.to_json_string());
            eprintln!("partitioned into {} intercalate blocks", trade.m() / trade.mu());
            Ok(OK)
        }
        Err(e) => {
            emit(&json!({ "ok": false, "reason": e.to_string() }));
            eprintln!("{}", e);
            Ok(NEGATIVE)
        }
    }
}

fn sweep(kmax: usize, mmax: usize, jobs: usize) -> Result<u8, Box<dyn std::error::Error>> {
    let mut planner = Planner::new()?;
    planner.search_budget = planner.search_budget.parallel(jobs);
    let mut points = Vec::new();
    let mut grid = String::new();
    for m in 3..=mmax {
        let mut line = format!("m={:>3}  ", m);
        for k in 3..=m.min(kmax) {
            let status = planner.plan(k, m)?;
            let (ch, entry) = match &status {
                Existence::Exists { recipe } => (
                    'E',
                    json!({ "k": k, "m": m, "status": "exists", "route": route_name(recipe) }),
                ),
                Existence::Nonexistent { reason } => {
                    ('N', json!({ "k": k, "m": m, "status": "nonexistent", "reason": reason }))
                }
                Existence::Unknown { reason } => {
                    ('U', json!({ "k": k, "m": m, "status": "unknown", "reason": reason }))
                }
            };
            line.push(ch);
            points.push(entry);
        }
        grid.push_str(&line);
        grid.push('\n');
    }
    emit(&json!({ "kmax": kmax, "mmax": mmax, "points": points }));
    eprint!("{}", grid);
    eprintln!("E = exists, N = nonexistent, U = unknown; k runs 3..min(m, {})", kmax);
    Ok(OK)
}

fn route_name(r: &Recipe) -> &'static str {
    match r {
        Recipe::Catalog { .. } => "catalog",
        Recipe::Cyclic { .. } => "cyclic",
        Recipe::DeleteDiagonal { .. } => "delete_diagonal",
        Recipe::DirectSum { .. } => "direct_sum",
        Recipe::Product { .. } => "product",
        Recipe::SumOverOls { .. } => "sum_over_ols",
        Recipe::Mod6 { .. } => "mod6",
        Recipe::Mod6Pair { .. } => "mod6_pair",
        Recipe::RestrictLayers { .. } => "restrict_layers",
        Recipe::SearchFound { .. } => "search_found",
        Recipe::Certificate { .. } => "certificate",
    }
}
