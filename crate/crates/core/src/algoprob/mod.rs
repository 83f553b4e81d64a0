//! Randomly programmed computers: a self-delimiting toy machine, exact
//! enumeration of the random-program measure, on-demand random-bit
//! sampling, program-length complexity bounds, and the advantage of
//! computed outputs over coin-flipped ones.
//!
//! The machine reads its program as a bit stream, three bits per opcode
//! (five more for a loop operand), and stops consuming at `HALT` — so the
//! set of halting programs is prefix-free by construction and the uniform
//! measure assigns a halting program of length `ℓ` probability exactly
//! `2^{-ℓ}`. Enumeration computes that measure exactly (in integer units
//! of `2^{-ℓ_max}`); sampling realizes it by feeding fair coin flips to
//! the machine on demand; the two are cross-checked in the tests.
//!
//! Complexity is handled as honest upper bounds: `K̂(s)` is the shortest
//! program *found* — by enumeration up to `ℓ_max` or among supplied
//! witness programs — never a claim about the true minimum.

mod bits;
mod enumerate;
mod khat;
mod machine;
mod sample;
mod witness;

pub use bits::Bits;
pub use enumerate::{
    enumerate_programs, enumerate_with_programs, enumeration_csv, EnsembleReport, OutputStat,
};
pub use khat::{
    advantage, advantage_ratio, khat, khat_with_report, AdvantageEstimate, ComplexityEstimate,
    KhatSource,
};
pub use machine::{
    decode_and_run, Instr, Machine, MachinePhase, RunOutcome, RunStatus, DEFAULT_BUDGET,
    DEFAULT_L_MAX, MAX_L_MAX, TAPE_CELLS,
};
pub use sample::{sample_csv, sample_one, sample_programs, sample_programs_capped, SampleReport};
pub use witness::{
    parse_witness_file, render_witness_file, verify_witness, witness_alternating, witness_zeros,
};
