//! Quantum multiparty session types.
//!
//! Parses protocol descriptions, projects global types onto roles, checks
//! quantum processes under a linear qubit discipline and runs well-typed
//! systems on a statevector simulator.
pub mod cli;
pub mod gtsem;
pub mod projection;
pub mod properties;
pub mod quantum;
pub mod semantics;
pub mod syntax;
pub mod typecheck;
