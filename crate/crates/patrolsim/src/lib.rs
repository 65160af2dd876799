//! Simulator and red-team harness for multi-robot patrolling.
//!
//! A patrol team moves on a weighted graph trying to keep vertex idleness
//! low; adversary models watch the team and try to pick a vertex and moment
//! where they can stay undetected for a fixed attack duration. The crate
//! provides the graph and trace data model, a discrete-time patrol
//! simulator, five adversary models (including an online-trained neural
//! one), and an experiment harness that sweeps scenario parameters and
//! reports success probabilities.

pub mod adversaries;
pub mod graph;
pub mod harness;
pub mod maps;
pub mod sim;
pub mod tcml;
pub mod trace;
