//! Command-line front end: runs the built-in experiments end to end and
//! emits machine-readable JSON reports.
//!
//! Exit codes: 0 success/confirmed, 1 verification failed, 2 usage error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::json;

use lsm_core::ensembles::{
    b3_pair_fact, product_basis_set, rate_compare, unmarkable_by_counting,
};
use lsm_core::locc::protocol_to_json;
use lsm_core::marking::{
    compose_m_to_nm, lsm_from_lsd, product_basis_lsd, product_extend, verify_marking,
};
use lsm_core::oneway::{
    bell_triple_unitaries, pauli_control_problem, problem_from_json, search_witness,
    GramSearchProblem, SearchConfig,
};
use lsm_core::report::{run_builtin_verification, RunReport, SearchResult};

#[derive(Parser)]
#[command(name = "lsm", version, about = "Local state marking protocol simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a built-in marking protocol and its entanglement accounting.
    Verify {
        /// One of: x4, b4-catalytic, b3-catalytic
        set: String,
        /// Write the full JSON report here ("-" for stdout)
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Build a marking protocol by composition and verify it.
    Compose {
        /// Source set (currently: product4)
        source: String,
        /// Slot count of the starting protocol
        #[arg(long)]
        from: usize,
        /// Slot count to reach
        #[arg(long)]
        to: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Search for a one-way distinguishability witness.
    Oneway {
        /// Built-in problem: bell-triple (alias prop4), pauli-z, pauli-x
        #[arg(long)]
        problem: Option<String>,
        /// JSON problem file (list of unitaries)
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Evaluate the counting bound for maximally entangled ensembles.
    Bounds {
        /// Set size K
        #[arg(long)]
        k: usize,
        /// Local dimension d
        #[arg(long)]
        d: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Compare discrimination and marking communication rates.
    Rate {
        /// Ensemble size
        #[arg(long)]
        n: usize,
        /// Local dimension (recorded in the report)
        #[arg(long)]
        d: usize,
        /// Copies needed for perfect discrimination
        #[arg(long)]
        k: usize,
        #[arg(long)]
        json: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

fn usage(msg: &str) -> ExitCode {
    eprintln!("usage error: {msg}");
    ExitCode::from(2)
}

/// The human summary goes to stdout unless the JSON report does.
fn summary_enabled(json: &Option<PathBuf>) -> bool {
    !matches!(json, Some(p) if p.as_os_str() == "-")
}

fn emit(report: &RunReport, json: &Option<PathBuf>) -> std::io::Result<()> {
    if let Some(path) = json {
        if path.as_os_str() == "-" {
            println!("{}", report.to_json());
        } else {
            std::fs::write(path, report.to_json())?;
        }
    }
    Ok(())
}

fn run(command: Command) -> Result<ExitCode, Box<dyn std::error::Error>> {
    match command {
        Command::Verify { set, json } => cmd_verify(&set, &json),
        Command::Compose { source, from, to, json } => cmd_compose(&source, from, to, &json),
        Command::Oneway { problem, file, restarts, seed, json } => {
            cmd_oneway(problem.as_deref(), &file, restarts, seed, &json)
        }
        Command::Bounds { k, d, json } => cmd_bounds(k, d, &json),
        Command::Rate { n, d, k, json } => cmd_rate(n, d, k, &json),
    }
}

fn cmd_verify(
    set_name: &str,
    json: &Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let started = Instant::now();
    if !matches!(set_name, "x4" | "b4-catalytic" | "b3-catalytic") {
        return Ok(usage(&format!(
            "unknown set {set_name:?}; expected x4, b4-catalytic, or b3-catalytic"
        )));
    }
    let result = run_builtin_verification(set_name)?;

    if summary_enabled(json) {
        println!("set:                {set_name}");
        println!("assignments:        {}", result.verdict.per_assignment.len());
        println!("perfect marking:    {}", result.perfect);
        println!("avg residual ebits: {:.9}", result.average_residual_ebits);
        if let Some(b) = &result.ledger.budget {
            println!("supplied ebits:     {:.9}", b.supplied_ebits);
            println!("returned ebits:     {:.9}", b.returned_ebits);
            println!("net consumed:       {:.9}", b.net_consumed_ebits);
        }
        println!("two-way CC:         {}", result.cc.two_way);
        println!("constants match:    {}", result.constants_match);
    }

    let constants_match = result.constants_match;
    let report = RunReport::new(
        "verify",
        json!({ "set": set_name }),
        None,
        serde_json::to_value(&result)?,
        started.elapsed().as_secs_f64() * 1e3,
    );
    emit(&report, json)?;
    Ok(if constants_match { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_compose(
    source: &str,
    from: usize,
    to: usize,
    json: &Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let started = Instant::now();
    if source != "product4" {
        return Ok(usage(&format!("unknown source {source:?}; expected product4")));
    }
    let set = product_basis_set()?;
    if from < 1 || from > to || to > set.len() {
        return Ok(usage(&format!(
            "need 1 ≤ from ≤ to ≤ {}, got from={from} to={to}",
            set.len()
        )));
    }

    let lsd = product_basis_lsd();
    let mut protocol = if from == 1 { lsd.clone() } else { lsm_from_lsd(&lsd, &set, from)? };
    let route = if to == from {
        "unchanged".to_string()
    } else if to.is_multiple_of(from) {
        protocol = compose_m_to_nm(&protocol, &set, from, to / from)?;
        format!("blocks of {from}")
    } else {
        let mut m = from;
        while m < to {
            protocol = product_extend(&protocol, &set, m)?;
            m += 1;
        }
        "single-slot product extensions".to_string()
    };

    let (verdict, ledger) = verify_marking(&protocol, &set, to, None)?;
    if summary_enabled(json) {
        println!("source:          {source}");
        println!("route:           {route}");
        println!("slots:           {from} -> {to}");
        println!("assignments:     {}", verdict.per_assignment.len());
        println!("perfect marking: {}", verdict.perfect);
    }

    let result = json!({
        "source": source,
        "from": from,
        "to": to,
        "route": route,
        "perfect": verdict.perfect,
        "assignments": verdict.per_assignment.len(),
        "average_residual_ebits": ledger.average_residual_ebits,
        "protocol": serde_json::from_str::<serde_json::Value>(&protocol_to_json(&protocol))?,
    });
    let report = RunReport::new(
        "compose",
        json!({ "source": source, "from": from, "to": to }),
        None,
        result,
        started.elapsed().as_secs_f64() * 1e3,
    );
    emit(&report, json)?;
    Ok(if verdict.perfect { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn cmd_oneway(
    problem_name: Option<&str>,
    file: &Option<PathBuf>,
    restarts: usize,
    seed: u64,
    json: &Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let started = Instant::now();
    if restarts < 1 {
        return Ok(usage("restarts must be at least 1"));
    }
    let (problem, label): (GramSearchProblem, String) = match (problem_name, file) {
        (Some(name), None) => {
            let p = match name {
                "bell-triple" | "prop4" => bell_triple_unitaries(),
                "pauli-z" => pauli_control_problem('z')?,
                "pauli-x" => pauli_control_problem('x')?,
                other => {
                    return Ok(usage(&format!(
                        "unknown problem {other:?}; expected bell-triple, pauli-z, or pauli-x"
                    )))
                }
            };
            (p, name.to_string())
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)?;
            (problem_from_json(&text)?, path.display().to_string())
        }
        _ => return Ok(usage("exactly one of --problem or --file is required")),
    };

    let result = search_witness(&problem, &SearchConfig::new(restarts, seed))?;
    if summary_enabled(json) {
        println!("problem:        {label} (dimension {})", problem.dim());
        println!("restarts:       {restarts}, seed {seed}");
        println!("verdict:        {:?}", result.verdict);
        println!("best objective: {:.3e}", result.best_objective);
    }

    let dto = SearchResult::from(&result);
    let report = RunReport::new(
        "oneway",
        json!({ "problem": label, "restarts": restarts, "dimension": problem.dim() }),
        Some(seed),
        serde_json::to_value(&dto)?,
        started.elapsed().as_secs_f64() * 1e3,
    );
    emit(&report, json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_bounds(
    k: usize,
    d: usize,
    json: &Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let started = Instant::now();
    if k < 1 || d < 2 {
        return Ok(usage("need k ≥ 1 and d ≥ 2"));
    }
    let unmarkable = unmarkable_by_counting(k, d)?;
    let fact = b3_pair_fact()?;
    if summary_enabled(json) {
        println!("K = {k}, d = {d}");
        if unmarkable {
            println!("verdict: locally unmarkable (K! > d^K)");
        } else {
            println!("verdict: bound silent (K! ≤ d^K); this does not imply markability");
        }
        println!(
            "pair-marking fact: {} ensemble of {} maximally entangled states in local dimension {}; bound applies: {}",
            fact.set_name, fact.ensemble_size, fact.local_dim, fact.bound_applies
        );
    }

    let result = json!({
        "k": k,
        "d": d,
        "unmarkable": unmarkable,
        "note": if unmarkable { "sufficient condition met" } else { "bound silent" },
        "b3_pair_fact": serde_json::to_value(&fact)?,
    });
    let report = RunReport::new(
        "bounds",
        json!({ "k": k, "d": d }),
        None,
        result,
        started.elapsed().as_secs_f64() * 1e3,
    );
    emit(&report, json)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_rate(
    n: usize,
    d: usize,
    k: usize,
    json: &Option<PathBuf>,
) -> Result<ExitCode, Box<dyn std::error::Error>> {
    let started = Instant::now();
    if n < 1 || k < 1 {
        return Ok(usage("need n ≥ 1 and k ≥ 1"));
    }
    let rates = rate_compare(n, d, k)?;
    if summary_enabled(json) {
        println!("n = {n}, d = {d}, k = {k}");
        println!("discrimination rate: {:.9} bits/qudit", rates.lsd_rate);
        println!("marking rate:        {:.9} bits/qudit", rates.lsm_rate);
    }

    let report = RunReport::new(
        "rate",
        json!({ "n": n, "d": d, "k": k }),
        None,
        serde_json::to_value(&rates)?,
        started.elapsed().as_secs_f64() * 1e3,
    );
    emit(&report, json)?;
    Ok(ExitCode::SUCCESS)
}
