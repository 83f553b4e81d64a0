//! Reversible computation embedded as unitary quantum evolution, and the
//! statistics that fall out of it.
//!
//! The crate is organised around five concerns:
//!
//! - [`revmachine`]: reversible gate programs over a register of bits,
//!   applied as permutations of basis-state indices.
//! - [`qstate`]: dense state vectors, the unitary embedding of reversible
//!   programs, and the small set of genuinely quantum gates used here.
//! - [`histories`]: coarse-grained computational histories and their
//!   decoherence functional, exhaustively or by sampling.
//! - [`hamiltonian`]: the Hermitian generator `H = U + U†` of a circuit's
//!   step unitary, its spectrum, fractional powers, and operator support.
//! - [`algoprob`]: a prefix-free toy machine fed random program bits, and
//!   the resulting algorithmic-probability measurements.

pub mod algoprob;
pub mod error;
pub mod hamiltonian;
pub mod histories;
pub mod qstate;
pub mod revmachine;
pub mod tol;

pub use error::{Error, Result};
pub use revmachine::{BitString, ReversibleGate, ReversibleProgram, TimeStep};
pub use qstate::{QuantumCircuit, QuantumGate, StateVector, UnitaryStep};
pub use histories::{DecoherenceReport, EvalMode, Grain, History};
pub use hamiltonian::{DenseUnitary, HamiltonianModel};
pub use algoprob::{
    Bits, ComplexityEstimate, EnsembleReport, RunOutcome, RunStatus, SampleReport,
};
