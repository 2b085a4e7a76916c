//! Command-line front end: structural analysis, simulation runs, fault-set
//! sweeps, and the randomized verification suites.
//!
//! Exit codes: 0 success, 1 analysis ran fine but the property does not hold,
//! 2 usage error, 3 runtime error.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;

use jointnet::dynamics::combinations;
use jointnet::petri::{AgentId, ConsensuabilityReport, PetriNet};
use jointnet::scenario::{load_scenario, BuiltinNetwork, Scenario, ScenarioError};
use jointnet::simulate::SimulateError;
use jointnet::suites::{
    agreement_suite, envelope_suite, oracle_equivalence_suite, AgreementSuiteConfig,
    EnvelopeSuiteConfig, OracleSuiteConfig, SuiteReport, DEFAULT_SEED,
};

const EXIT_OK: i32 = 0;
const EXIT_NEGATIVE: i32 = 1;
const EXIT_USAGE: i32 = 2;
const EXIT_RUNTIME: i32 = 3;

#[derive(Parser)]
#[command(
    name = "jointnet",
    about = "Robustness analysis and fault-injection simulation for joint-agent consensus networks",
    version
)]
struct Cli {
    /// Output directory for reports and trajectories
    /// (defaults to $JOINTNET_OUT_DIR, then the working directory).
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural analysis: siphons, certificates, and the robustness verdict.
    Analyze(AnalyzeArgs),
    /// Integrate a scenario file and write its trajectory and monitors.
    Simulate(SimulateArgs),
    /// Check every fault set of a given size against the structural verdict.
    Sweep(SweepArgs),
    /// Run the randomized verification suites.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Generator spec (`grid3x3`, `arcp:n=5,trim=1`, ...), a scenario file,
    /// or a net text file.
    target: String,

    /// Fault agents, e.g. `3,4` or `(2,2),(3,3)` for the grid.
    #[arg(long, default_value = "")]
    faults: String,

    /// Path of the JSON report (defaults into the output directory).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario file.
    scenario: PathBuf,

    /// Trajectory CSV path (defaults into the output directory).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Monitor JSON path (defaults into the output directory).
    #[arg(long)]
    monitors: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// Generator spec.
    generator: String,

    /// Size of the fault sets to enumerate.
    #[arg(long)]
    fault_size: usize,

    /// Path of the JSON report (defaults into the output directory).
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite name: petri-oracle, envelopes, agreement, or all.
    #[arg(long)]
    suite: String,

    /// Seed for the randomized cases.
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,

    /// Random net count for the petri-oracle suite.
    #[arg(long, default_value_t = 200)]
    nets: usize,

    /// Scenario count for the envelopes suite.
    #[arg(long, default_value_t = 50)]
    scenarios: usize,

    /// Trials per robust configuration for the agreement suite.
    #[arg(long, default_value_t = 20)]
    trials: usize,

    /// Path of the JSON report (defaults into the output directory).
    #[arg(long)]
    json: Option<PathBuf>,
}

struct Failure {
    exit: i32,
    message: String,
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure { exit: EXIT_USAGE, message: msg.into() }
}

fn runtime(msg: impl Into<String>) -> Failure {
    Failure { exit: EXIT_RUNTIME, message: msg.into() }
}

fn main() {
    let cli = Cli::parse();
    let out_dir = cli
        .out_dir
        .or_else(|| std::env::var_os("JOINTNET_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let result = match cli.command {
        Command::Analyze(args) => cmd_analyze(&args, &out_dir),
        Command::Simulate(args) => cmd_simulate(&args, &out_dir),
        Command::Sweep(args) => cmd_sweep(&args, &out_dir),
        Command::Verify(args) => cmd_verify(&args, &out_dir),
    };
    match result {
        Ok(code) => std::process::exit(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            std::process::exit(f.exit);
        }
    }
}

/// What `analyze` works on: a net with optional dynamics context and labels.
struct AnalysisTarget {
    name: String,
    net: PetriNet,
    generator: Option<BuiltinNetwork>,
    default_faults: BTreeSet<AgentId>,
}

fn resolve_target(target: &str) -> Result<AnalysisTarget, Failure> {
    let path = Path::new(target);
    if path.exists() {
        let text = fs::read_to_string(path)
            .map_err(|e| runtime(format!("cannot read {}: {e}", path.display())))?;
        if text.trim_start().starts_with("jointnet-scenario") {
            let sc = jointnet::scenario::parse_scenario(&text)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            let generator = sc
                .generator
                .as_deref()
                .and_then(|spec| BuiltinNetwork::parse(spec).ok());
            return Ok(AnalysisTarget {
                name: sc.name.clone(),
                net: sc.dynamics.petri_net(),
                generator,
                default_faults: sc.fault_set,
            });
        }
        let net = PetriNet::from_text(&text)
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
        return Ok(AnalysisTarget {
            name: path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default(),
            net,
            generator: None,
            default_faults: BTreeSet::new(),
        });
    }
    let generator = BuiltinNetwork::parse(target).map_err(|e| usage(e.to_string()))?;
    Ok(AnalysisTarget {
        name: generator.spec_string(),
        net: generator.dynamics().petri_net(),
        generator: Some(generator),
        default_faults: BTreeSet::new(),
    })
}

/// Splits a fault list on commas that are not inside parentheses.
fn split_fault_list(text: &str) -> Vec<String> {
    let mut parts = Vec::new();
    let mut depth = 0usize;
    let mut current = String::new();
    for c in text.chars() {
        match c {
            '(' => {
                depth += 1;
                current.push(c);
            }
            ')' => {
                depth = depth.saturating_sub(1);
                current.push(c);
            }
            ',' if depth == 0 => {
                parts.push(current.trim().to_string());
                current.clear();
            }
            _ => current.push(c),
        }
    }
    if !current.trim().is_empty() {
        parts.push(current.trim().to_string());
    }
    parts.retain(|p| !p.is_empty());
    parts
}

fn parse_fault_list(
    text: &str,
    generator: Option<&BuiltinNetwork>,
    n_agents: usize,
) -> Result<BTreeSet<AgentId>, Failure> {
    let mut out = BTreeSet::new();
    for part in split_fault_list(text) {
        let agent = match generator {
            Some(g) => g.parse_agent(&part).map_err(|e| usage(e.to_string()))?,
            None => {
                let idx: usize = part
                    .parse()
                    .map_err(|_| usage(format!("bad agent reference `{part}`")))?;
                AgentId(idx)
            }
        };
        if agent.0 >= n_agents {
            return Err(usage(format!("agent {agent} out of range ({n_agents} agents)")));
        }
        out.insert(agent);
    }
    Ok(out)
}

fn label_of(generator: Option<&BuiltinNetwork>, agent: AgentId) -> String {
    match generator {
        Some(g) => g.label(agent),
        None => agent.to_string(),
    }
}

fn format_set(generator: Option<&BuiltinNetwork>, set: &BTreeSet<AgentId>) -> String {
    let labels: Vec<String> = set.iter().map(|&a| label_of(generator, a)).collect();
    format!("{{{}}}", labels.join(","))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    let mut body = serde_json::to_string_pretty(value)
        .map_err(|e| runtime(format!("serialization failed: {e}")))?;
    body.push('\n');
    fs::write(path, body).map_err(|e| runtime(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

#[derive(Serialize)]
struct AnalysisJson {
    schema: &'static str,
    target: String,
    n_agents: usize,
    transitions: Vec<String>,
    fault_set: Vec<String>,
    minimal_siphons: Vec<Vec<String>>,
    certificates: Vec<CertificateJson>,
    report: ConsensuabilityReport,
    verdict: &'static str,
}

#[derive(Serialize)]
struct CertificateJson {
    places: Vec<String>,
    switch: Vec<String>,
}

fn cmd_analyze(args: &AnalyzeArgs, out_dir: &Path) -> Result<i32, Failure> {
    let target = resolve_target(&args.target)?;
    let generator = target.generator.as_ref();
    let faults = if args.faults.trim().is_empty() {
        target.default_faults.clone()
    } else {
        parse_fault_list(&args.faults, generator, target.net.n_agents())?
    };

    println!(
        "net: {} ({} agents, {} transitions)",
        target.name,
        target.net.n_agents(),
        target.net.transitions().len()
    );
    println!("fault set: {}", format_set(generator, &faults));

    let siphons = target.net.minimal_siphons().map_err(|e| runtime(e.to_string()))?;
    println!("minimal siphons ({}):", siphons.len());
    for s in &siphons {
        println!("  {}", format_set(generator, s));
    }

    let certs = target
        .net
        .enumerate_minimal_controlled_siphons(&faults)
        .map_err(|e| usage(e.to_string()))?;
    println!("controlled-siphon certificates w.r.t. the fault set ({}):", certs.len());
    for c in &certs {
        println!(
            "  S={} switch={}",
            format_set(generator, &c.places),
            format_set(generator, &c.switch)
        );
    }

    let report = target
        .net
        .check_robust_consensuability(&faults)
        .map_err(|e| usage(e.to_string()))?;
    if report.verdict {
        println!("verdict: ROBUST (robust consensuability holds)");
    } else if !report.healthy_is_siphon {
        println!("verdict: NOT-ROBUST (healthy set is not a siphon)");
    } else {
        println!("verdict: NOT-ROBUST (disjoint controlled siphons with disjoint switches)");
    }
    if let Some((a, b)) = &report.witness {
        println!(
            "witness: S1={} switch1={}  |  S2={} switch2={}",
            format_set(generator, &a.places),
            format_set(generator, &a.switch),
            format_set(generator, &b.places),
            format_set(generator, &b.switch)
        );
    }

    let set_labels = |s: &BTreeSet<AgentId>| -> Vec<String> {
        s.iter().map(|&a| label_of(generator, a)).collect()
    };
    let json = AnalysisJson {
        schema: "jointnet.analysis/1",
        target: target.name.clone(),
        n_agents: target.net.n_agents(),
        transitions: target.net.transitions().iter().map(|t| t.to_string()).collect(),
        fault_set: set_labels(&faults),
        minimal_siphons: siphons.iter().map(&set_labels).collect(),
        certificates: certs
            .iter()
            .map(|c| CertificateJson { places: set_labels(&c.places), switch: set_labels(&c.switch) })
            .collect(),
        verdict: if report.verdict { "robust" } else { "not-robust" },
        report,
    };
    let path = args
        .json
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("analysis_{}.json", sanitize(&target.name))));
    write_json(&path, &json)?;
    Ok(if json.report.verdict { EXIT_OK } else { EXIT_NEGATIVE })
}

fn scenario_failure(e: ScenarioError) -> Failure {
    match e {
        ScenarioError::Io(e) => runtime(e.to_string()),
        other => usage(other.to_string()),
    }
}

fn cmd_simulate(args: &SimulateArgs, out_dir: &Path) -> Result<i32, Failure> {
    let sc: Scenario = load_scenario(&args.scenario).map_err(scenario_failure)?;
    println!(
        "scenario: {} ({} agents, {} faulty, horizon {}, step {})",
        sc.name,
        sc.dynamics.n_agents(),
        sc.fault_set.len(),
        sc.horizon,
        sc.step
    );
    let traj = match sc.run() {
        Ok(t) => t,
        Err(e @ SimulateError::IntegrationDiverged { .. }) => return Err(runtime(e.to_string())),
        Err(e) => return Err(usage(e.to_string())),
    };
    for w in &traj.warnings {
        eprintln!("warning: {w}");
    }

    let csv_path = args
        .out
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("{}_trajectory.csv", sanitize(&sc.name))));
    if let Some(parent) = csv_path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(&csv_path, traj.to_csv_string())
        .map_err(|e| runtime(format!("cannot write {}: {e}", csv_path.display())))?;
    println!("wrote {}", csv_path.display());

    let monitors_path = args
        .monitors
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("{}_monitors.json", sanitize(&sc.name))));
    write_json(&monitors_path, &traj.monitors)?;

    println!("final spread: {}", traj.monitors.final_spread);
    match traj.monitors.consensus_time {
        Some(t) => println!("consensus reached (spread < {}) from t = {t}", traj.monitors.epsilon),
        None => println!("consensus NOT reached by t = {}", sc.horizon),
    }
    Ok(if traj.monitors.consensus_reached { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
struct SweepJson {
    schema: &'static str,
    generator: String,
    fault_size: usize,
    total: usize,
    robust: usize,
    cases: Vec<SweepCaseJson>,
}

#[derive(Serialize)]
struct SweepCaseJson {
    faults: Vec<String>,
    robust: bool,
    healthy_is_siphon: bool,
    witness: Option<[CertificateJson; 2]>,
}

const SWEEP_CASE_LIMIT: usize = 100_000;

fn cmd_sweep(args: &SweepArgs, out_dir: &Path) -> Result<i32, Failure> {
    let generator = BuiltinNetwork::parse(&args.generator).map_err(|e| usage(e.to_string()))?;
    let net = generator.dynamics().petri_net();
    let n = net.n_agents();
    if args.fault_size == 0 || args.fault_size >= n {
        return Err(usage(format!(
            "fault size must be between 1 and {} for `{}`",
            n - 1,
            generator.spec_string()
        )));
    }
    let sets = combinations(&(0..n).collect::<Vec<_>>(), args.fault_size);
    if sets.len() > SWEEP_CASE_LIMIT {
        return Err(usage(format!(
            "{} fault sets exceed the sweep limit of {SWEEP_CASE_LIMIT}",
            sets.len()
        )));
    }

    let reports: Vec<(BTreeSet<AgentId>, ConsensuabilityReport)> = sets
        .into_par_iter()
        .map(|set| {
            let faults: BTreeSet<AgentId> = set.into_iter().map(AgentId).collect();
            let report = net
                .check_robust_consensuability(&faults)
                .expect("fault sets are proper subsets");
            (faults, report)
        })
        .collect();

    let set_labels = |s: &BTreeSet<AgentId>| -> Vec<String> {
        s.iter().map(|&a| generator.label(a)).collect()
    };
    let mut robust = 0;
    println!("sweep of `{}`, fault sets of size {}:", generator.spec_string(), args.fault_size);
    for (faults, report) in &reports {
        let verdict = if report.verdict {
            robust += 1;
            "ROBUST"
        } else if report.healthy_is_siphon {
            "not robust (witness pair)"
        } else {
            "not robust (healthy set not a siphon)"
        };
        println!("  {} -> {verdict}", format_set(Some(&generator), faults));
    }
    println!("{robust}/{} robust", reports.len());

    let json = SweepJson {
        schema: "jointnet.sweep/1",
        generator: generator.spec_string(),
        fault_size: args.fault_size,
        total: reports.len(),
        robust,
        cases: reports
            .iter()
            .map(|(faults, report)| SweepCaseJson {
                faults: set_labels(faults),
                robust: report.verdict,
                healthy_is_siphon: report.healthy_is_siphon,
                witness: report.witness.as_ref().map(|(a, b)| {
                    [
                        CertificateJson {
                            places: set_labels(&a.places),
                            switch: set_labels(&a.switch),
                        },
                        CertificateJson {
                            places: set_labels(&b.places),
                            switch: set_labels(&b.switch),
                        },
                    ]
                }),
            })
            .collect(),
    };
    let path = args.json.clone().unwrap_or_else(|| {
        out_dir.join(format!(
            "sweep_{}_k{}.json",
            sanitize(&generator.spec_string()),
            args.fault_size
        ))
    });
    write_json(&path, &json)?;
    Ok(if robust == reports.len() { EXIT_OK } else { EXIT_NEGATIVE })
}

#[derive(Serialize)]
struct VerifyJson {
    schema: &'static str,
    suites: Vec<SuiteReport>,
    passed: bool,
}

fn cmd_verify(args: &VerifyArgs, out_dir: &Path) -> Result<i32, Failure> {
    let run_oracle = || {
        oracle_equivalence_suite(&OracleSuiteConfig {
            seed: args.seed,
            random_nets: args.nets,
            ..Default::default()
        })
    };
    let run_envelopes = || {
        envelope_suite(&EnvelopeSuiteConfig {
            seed: args.seed,
            scenarios: args.scenarios,
            ..Default::default()
        })
    };
    let run_agreement = || {
        agreement_suite(&AgreementSuiteConfig {
            seed: args.seed,
            trials: args.trials,
            ..Default::default()
        })
    };
    let suites = match args.suite.as_str() {
        "petri-oracle" => vec![run_oracle()],
        "envelopes" => vec![run_envelopes()],
        "agreement" => vec![run_agreement()],
        "all" => vec![run_oracle(), run_envelopes(), run_agreement()],
        other => {
            return Err(usage(format!(
                "unknown suite `{other}` (expected petri-oracle, envelopes, agreement, or all)"
            )))
        }
    };

    let mut all_passed = true;
    for suite in &suites {
        println!("suite {} (seed {}):", suite.suite, suite.seed);
        for case in &suite.cases {
            let status = if case.passed { "PASS" } else { "FAIL" };
            println!("  {status} {}: {}", case.name, case.detail);
        }
        println!(
            "  => {} ({}/{} cases)",
            if suite.passed { "PASS" } else { "FAIL" },
            suite.cases.iter().filter(|c| c.passed).count(),
            suite.cases.len()
        );
        all_passed &= suite.passed;
    }

    let json = VerifyJson { schema: "jointnet.verify/1", suites, passed: all_passed };
    let path = args
        .json
        .clone()
        .unwrap_or_else(|| out_dir.join(format!("verify_{}.json", sanitize(&args.suite))));
    write_json(&path, &json)?;
    Ok(if all_passed { EXIT_OK } else { EXIT_NEGATIVE })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fault_list_splitting() {
        assert_eq!(split_fault_list("3,4"), vec!["3", "4"]);
        assert_eq!(split_fault_list("(2,2),(3,3)"), vec!["(2,2)", "(3,3)"]);
        assert_eq!(split_fault_list(" (1,2) , 4 "), vec!["(1,2)", "4"]);
        assert!(split_fault_list("").is_empty());
    }

    #[test]
    fn sanitize_names() {
        assert_eq!(sanitize("arcp:n=5,trim=1"), "arcp_n_5_trim_1");
    }
}
