//! Randomized verification suites: checker-versus-oracle equivalence,
//! envelope monotonicity on healthy-siphon topologies, and
//! checker-versus-simulation agreement. All suites are deterministic for a
//! given seed; independent cases run in parallel and are reported in
//! canonical order.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{Aggregator, InteractionRule, NetworkDynamics};
use crate::petri::{AgentId, PetriNet, Transition};
use crate::scenario::builtin_network;
use crate::simulate::{self, FaultSignal, MonitorConfig, SignalDef};

pub const DEFAULT_SEED: u64 = 20240;

#[derive(Debug, Clone, Serialize)]
pub struct CaseResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub cases: Vec<CaseResult>,
}

impl SuiteReport {
    fn from_cases(suite: &str, seed: u64, cases: Vec<CaseResult>) -> Self {
        let passed = cases.iter().all(|c| c.passed);
        Self { suite: suite.into(), seed, passed, cases }
    }
}

/// Draws a random net: 4..=`max_places` places and roughly one to three
/// transitions per place, with input groups of one to three agents.
pub fn random_net(rng: &mut impl Rng, max_places: usize) -> PetriNet {
    let n = rng.gen_range(4..=max_places.max(4));
    loop {
        let m = rng.gen_range(n..=3 * n);
        let mut transitions = Vec::new();
        for _ in 0..m {
            let output = AgentId(rng.gen_range(0..n));
            let size = rng.gen_range(1..=3usize.min(n - 1));
            let mut inputs = BTreeSet::new();
            while inputs.len() < size {
                let cand = AgentId(rng.gen_range(0..n));
                if cand != output {
                    inputs.insert(cand);
                }
            }
            transitions.push(Transition::new(inputs, output).expect("valid by construction"));
        }
        transitions.sort();
        transitions.dedup();
        if let Ok(net) = PetriNet::new(n, transitions) {
            return net;
        }
    }
}

fn subsets_of_size(places: usize, k: usize) -> Vec<BTreeSet<AgentId>> {
    crate::dynamics::combinations(&(0..places).collect::<Vec<_>>(), k)
        .into_iter()
        .map(|c| c.into_iter().map(AgentId).collect())
        .collect()
}

/// All fault sets of size `0..=max_size` over `places` agents.
pub fn fault_sets_up_to(places: usize, max_size: usize) -> Vec<BTreeSet<AgentId>> {
    (0..=max_size.min(places.saturating_sub(1)))
        .flat_map(|k| subsets_of_size(places, k))
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct OracleSuiteConfig {
    pub seed: u64,
    pub random_nets: usize,
    pub max_places: usize,
    /// Exhaustively checked fault-set size.
    pub exhaustive_fault_size: usize,
    /// Additional randomly drawn fault sets of size `exhaustive_fault_size+1`
    /// per net.
    pub sampled_larger_sets: usize,
}

impl Default for OracleSuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            random_nets: 200,
            max_places: 12,
            exhaustive_fault_size: 2,
            sampled_larger_sets: 5,
        }
    }
}

/// Compares the certificate checker against the exhaustive oracle on the
/// bundled nets and on random nets.
pub fn oracle_equivalence_suite(cfg: &OracleSuiteConfig) -> SuiteReport {
    let mut nets: Vec<(String, PetriNet)> = ["chain3", "ring5", "grid3x3", "arcp:n=5,trim=1"]
        .iter()
        .map(|name| {
            (name.to_string(), builtin_network(name).expect("bundled name").petri_net())
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for k in 0..cfg.random_nets {
        nets.push((format!("random{k:03}"), random_net(&mut rng, cfg.max_places)));
    }
    // pre-draw the sampled larger fault sets so parallelism stays deterministic
    let jobs: Vec<(String, PetriNet, Vec<BTreeSet<AgentId>>)> = nets
        .into_iter()
        .map(|(name, net)| {
            let mut fault_sets = fault_sets_up_to(net.n_agents(), cfg.exhaustive_fault_size);
            let larger = cfg.exhaustive_fault_size + 1;
            if net.n_agents() > larger {
                for _ in 0..cfg.sampled_larger_sets {
                    let mut set = BTreeSet::new();
                    while set.len() < larger {
                        set.insert(AgentId(rng.gen_range(0..net.n_agents())));
                    }
                    fault_sets.push(set);
                }
            }
            (name, net, fault_sets)
        })
        .collect();

    let cases: Vec<CaseResult> = jobs
        .into_par_iter()
        .map(|(name, net, fault_sets)| {
            let mut tested = 0usize;
            for faults in &fault_sets {
                let fast = match net.check_robust_consensuability(faults) {
                    Ok(r) => r.verdict,
                    Err(e) => {
                        return CaseResult {
                            name,
                            passed: false,
                            detail: format!("checker error on {faults:?}: {e}"),
                        }
                    }
                };
                let slow = match net.exhaustive_consensuability_oracle(faults) {
                    Ok(v) => v,
                    Err(e) => {
                        return CaseResult {
                            name,
                            passed: false,
                            detail: format!("oracle error on {faults:?}: {e}"),
                        }
                    }
                };
                if fast != slow {
                    return CaseResult {
                        name,
                        passed: false,
                        detail: format!(
                            "disagreement on fault set {faults:?}: checker={fast} oracle={slow}"
                        ),
                    };
                }
                tested += 1;
            }
            CaseResult {
                name,
                passed: true,
                detail: format!("{tested} fault sets agree"),
            }
        })
        .collect();
    SuiteReport::from_cases("petri-oracle", cfg.seed, cases)
}

#[derive(Debug, Clone, Copy)]
pub struct EnvelopeSuiteConfig {
    pub seed: u64,
    pub scenarios: usize,
    pub horizon: f64,
    pub step: f64,
}

impl Default for EnvelopeSuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, scenarios: 50, horizon: 6.0, step: 0.01 }
    }
}

struct EnvelopeScenario {
    name: String,
    dynamics: NetworkDynamics,
    fault_set: BTreeSet<AgentId>,
    signals: Vec<FaultSignal>,
    x0: Vec<f64>,
}

/// Random joint-interaction network whose aggregators mix all built-in kinds,
/// kept in a range where the fixed step is comfortably stable.
fn random_envelope_scenario(k: usize, rng: &mut impl Rng) -> EnvelopeScenario {
    loop {
        let net = random_net(rng, 8);
        let n = net.n_agents();
        let rules: Vec<InteractionRule> = net
            .transitions()
            .iter()
            .map(|t| InteractionRule::joint(t.inputs().clone(), t.output()))
            .collect();
        let aggregators: Vec<Aggregator> = (0..n)
            .map(|i| {
                let arity = rules.iter().filter(|r| r.target.0 == i).count();
                if arity == 0 {
                    return Aggregator::WeightedSum(Vec::new());
                }
                match rng.gen_range(0..4) {
                    0 => Aggregator::WeightedSum(
                        (0..arity).map(|_| rng.gen_range(0.3..1.0)).collect(),
                    ),
                    1 => Aggregator::MinPlusMax,
                    2 => Aggregator::SaturatedSum {
                        weights: (0..arity).map(|_| rng.gen_range(0.3..1.0)).collect(),
                        sat_level: rng.gen_range(0.5..2.0),
                    },
                    _ => Aggregator::CubedSum(
                        (0..arity).map(|_| rng.gen_range(0.05..0.15)).collect(),
                    ),
                }
            })
            .collect();
        let dynamics = match NetworkDynamics::new(n, rules, aggregators) {
            Ok(d) => d,
            Err(_) => continue,
        };
        // choose a fault set whose complement is a siphon; the full place set
        // always is one, so the empty fault set is a valid fallback
        let mut fault_set = BTreeSet::new();
        for _ in 0..8 {
            let size = rng.gen_range(1..=2usize.min(n - 1));
            let mut candidate = BTreeSet::new();
            while candidate.len() < size {
                candidate.insert(AgentId(rng.gen_range(0..n)));
            }
            let healthy: BTreeSet<AgentId> =
                (0..n).map(AgentId).filter(|a| !candidate.contains(a)).collect();
            if net.is_siphon(&healthy).unwrap_or(false) {
                fault_set = candidate;
                break;
            }
        }
        let signals: Vec<FaultSignal> = fault_set
            .iter()
            .map(|&agent| FaultSignal {
                agent,
                def: sinusoid_signal(
                    rng.gen_range(-2.0..2.0),
                    rng.gen_range(0.0..1.0),
                    rng.gen_range(0.3..3.0),
                    rng.gen_range(0.0..std::f64::consts::TAU),
                ),
            })
            .collect();
        let healthy_count = n - fault_set.len();
        let x0: Vec<f64> = (0..healthy_count).map(|_| rng.gen_range(-2.0..2.0)).collect();
        return EnvelopeScenario {
            name: format!("envelope{k:03}"),
            dynamics,
            fault_set,
            signals,
            x0,
        };
    }
}

/// Builds `offset + amplitude * sin(omega * t + phase)` as an expression.
fn sinusoid_signal(offset: f64, amplitude: f64, omega: f64, phase: f64) -> SignalDef {
    let text = format!("{offset} + {amplitude} * sin({omega} * t + {phase})");
    SignalDef::Expression(crate::scenario::parse_signal(&text).expect("well-formed sinusoid"))
}

/// Integrates random healthy-siphon scenarios and checks that the healthy
/// maximum never rises and the healthy minimum never falls beyond the
/// per-step tolerance.
pub fn envelope_suite(cfg: &EnvelopeSuiteConfig) -> SuiteReport {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scenarios: Vec<EnvelopeScenario> =
        (0..cfg.scenarios).map(|k| random_envelope_scenario(k, &mut rng)).collect();
    let step = cfg.step;
    let horizon = cfg.horizon;
    let cases: Vec<CaseResult> = scenarios
        .into_par_iter()
        .map(|sc| {
            let traj = simulate::integrate_with(
                &sc.dynamics,
                &sc.fault_set,
                &sc.signals,
                &[],
                &sc.x0,
                horizon,
                step,
                MonitorConfig::for_step(step),
            );
            match traj {
                Err(e) => CaseResult {
                    name: sc.name,
                    passed: false,
                    detail: format!("integration failed: {e}"),
                },
                Ok(traj) => {
                    let m = &traj.monitors;
                    let passed =
                        m.max_envelope_violation == 0.0 && m.min_envelope_violation == 0.0;
                    CaseResult {
                        name: sc.name,
                        passed,
                        detail: format!(
                            "max violation {:.3e}, min violation {:.3e}",
                            m.max_envelope_violation, m.min_envelope_violation
                        ),
                    }
                }
            }
        })
        .collect();
    SuiteReport::from_cases("envelopes", cfg.seed, cases)
}

#[derive(Debug, Clone, Copy)]
pub struct AgreementSuiteConfig {
    pub seed: u64,
    pub trials: usize,
    pub horizon: f64,
    pub step: f64,
    pub epsilon: f64,
}

impl Default for AgreementSuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, trials: 20, horizon: 40.0, step: 0.01, epsilon: 1e-2 }
    }
}

/// A named network together with a fault set the checker accepts.
pub type RobustConfiguration = (String, NetworkDynamics, BTreeSet<AgentId>);

/// The bundled networks with every fault set (size <= 2) that the checker
/// reports robust.
pub fn robust_configurations() -> Vec<RobustConfiguration> {
    let mut out = Vec::new();
    for name in ["chain3", "ring5", "grid3x3", "alltoall5_joint", "arcp:n=5,trim=1"] {
        let dynamics = builtin_network(name).expect("bundled name");
        let net = dynamics.petri_net();
        for faults in fault_sets_up_to(net.n_agents(), 2) {
            let robust = net
                .check_robust_consensuability(&faults)
                .expect("valid fault set")
                .verdict;
            if robust {
                out.push((format!("{name} faults {faults:?}"), dynamics.clone(), faults));
            }
        }
    }
    out
}

/// For every robust configuration, runs randomized trials (random initial
/// conditions, random bounded sinusoid fault signals) and requires the
/// healthy spread to fall below epsilon by the horizon.
pub fn agreement_suite(cfg: &AgreementSuiteConfig) -> SuiteReport {
    let configs = robust_configurations();
    // derive one rng stream per configuration for scheduling independence
    let jobs: Vec<(u64, RobustConfiguration)> = configs
        .into_iter()
        .enumerate()
        .map(|(i, c)| (cfg.seed.wrapping_add(i as u64 * 7919), c))
        .collect();
    let cases: Vec<CaseResult> = jobs
        .into_par_iter()
        .map(|(seed, (name, dynamics, faults))| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let healthy_count = dynamics.n_agents() - faults.len();
            let mut worst: f64 = 0.0;
            for trial in 0..cfg.trials {
                let x0: Vec<f64> =
                    (0..healthy_count).map(|_| rng.gen_range(-10.0..10.0)).collect();
                let signals: Vec<FaultSignal> = faults
                    .iter()
                    .map(|&agent| FaultSignal {
                        agent,
                        def: sinusoid_signal(
                            rng.gen_range(-8.0..8.0),
                            rng.gen_range(0.0..4.0),
                            rng.gen_range(0.3..3.0),
                            rng.gen_range(0.0..std::f64::consts::TAU),
                        ),
                    })
                    .collect();
                let traj = simulate::integrate_with(
                    &dynamics,
                    &faults,
                    &signals,
                    &[],
                    &x0,
                    cfg.horizon,
                    cfg.step,
                    MonitorConfig {
                        tolerance: simulate::ENVELOPE_TOLERANCE_FACTOR * cfg.step,
                        epsilon: cfg.epsilon,
                    },
                );
                match traj {
                    Err(e) => {
                        return CaseResult {
                            name,
                            passed: false,
                            detail: format!("trial {trial}: integration failed: {e}"),
                        }
                    }
                    Ok(traj) => {
                        let spread = traj.monitors.final_spread;
                        worst = worst.max(spread);
                        if spread >= cfg.epsilon {
                            return CaseResult {
                                name,
                                passed: false,
                                detail: format!(
                                    "trial {trial}: spread {spread:.3e} at horizon {}",
                                    cfg.horizon
                                ),
                            };
                        }
                    }
                }
            }
            CaseResult {
                name,
                passed: true,
                detail: format!("{} trials converged, worst spread {worst:.3e}", cfg.trials),
            }
        })
        .collect();
    SuiteReport::from_cases("agreement", cfg.seed, cases)
}
