//! Decide, from network structure alone, whether a multi-agent consensus
//! network with joint-agent interactions tolerates a given set of faulty or
//! malicious agents, and validate those verdicts by simulating the nonlinear
//! dynamics under adversarial fault signals.
//!
//! - [`petri`]: the interaction topology as a Petri net, siphon and
//!   controlled-siphon computations, and the robust-consensuability checker
//!   with its exhaustive oracle.
//! - [`dynamics`]: rate functions, aggregators, vector-field assembly, and
//!   the joint-influence / cooperativity probes.
//! - [`simulate`]: fixed-step integration under fault signals and Byzantine
//!   per-receiver corruption, with envelope and consensus monitors.
//! - [`arcp`]: the continuous-time trimmed-mean protocol and its implied
//!   interaction topology.
//! - [`scenario`]: runnable scenario records, the fault-signal expression
//!   language, network generators, and the scenario file format.
//! - [`suites`]: seeded randomized verification suites.

pub mod arcp;
pub mod dynamics;
pub mod petri;
pub mod scenario;
pub mod simulate;
pub mod suites;

pub use petri::{AgentId, ConsensuabilityReport, ControlledSiphonCertificate, PetriNet};
