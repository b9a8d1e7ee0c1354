//! Fixed-charge network flow under a single known edge failure: exact MILP
//! formulations, the Pareto front between initial and repaired flow cost, a
//! brute-force oracle, and a capture-and-storage front end.

pub mod ccs;
pub mod cli;
pub mod formulation;
pub mod generate;
pub mod milp;
pub mod network;
pub mod oracle;
pub mod pareto;
pub mod verify;
