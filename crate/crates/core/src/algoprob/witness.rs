//! Hand-written witness programs and their verification.
//!
//! A witness is a concrete program offered as evidence that a target
//! output has a short producer — the constructive half of every
//! complexity bound here. The two shipped families exploit the machine's
//! `DBL` instruction to set a counter cell in O(log N) instructions and
//! then emit inside a three- or four-instruction loop, so `0^N` and
//! `(01)^k` targets have programs far shorter than their outputs.
//!
//! Witness files are plain text: one program of `0`/`1` characters per
//! line (whitespace allowed between opcode groups), `#` starts a comment.

use crate::error::{Error, Result};

use super::bits::Bits;
use super::machine::{decode_and_run, RunStatus};

const OP_HALT: u8 = 0b000;
const OP_OUT0: u8 = 0b001;
const OP_OUT1: u8 = 0b010;
const OP_INC: u8 = 0b011;
const OP_DEC: u8 = 0b100;
const OP_DBL: u8 = 0b101;

fn push_op(program: &mut Bits, opcode: u8) {
    for shift in (0..3).rev() {
        program.push(opcode >> shift & 1 == 1);
    }
}

fn push_loop(program: &mut Bits, k: u8) {
    debug_assert!(k < 32);
    push_op(program, 0b111);
    for shift in (0..5).rev() {
        program.push(k >> shift & 1 == 1);
    }
}

/// Emits `INC`/`DBL` instructions that set the current cell to `n` by its
/// binary expansion, high bit first.
fn push_set_cell(program: &mut Bits, n: u8) {
    debug_assert!(n >= 1);
    let top = 7 - n.leading_zeros() as u8;
    push_op(program, OP_INC);
    for shift in (0..top).rev() {
        push_op(program, OP_DBL);
        if n >> shift & 1 == 1 {
            push_op(program, OP_INC);
        }
    }
}

/// Program producing `0^n` (1 ≤ n ≤ 255): set the cell to `n`, then loop
/// `OUT0; DEC` until it drains.
pub fn witness_zeros(n: usize) -> Bits {
    assert!((1..=255).contains(&n), "witness_zeros covers 1..=255");
    let mut program = Bits::new();
    push_set_cell(&mut program, n as u8);
    push_op(&mut program, OP_OUT0);
    push_op(&mut program, OP_DEC);
    push_loop(&mut program, 3);
    push_op(&mut program, OP_HALT);
    program
}

/// Program producing `(01)^k` (1 ≤ k ≤ 255): set the cell to `k`, then
/// loop `OUT0; OUT1; DEC`.
pub fn witness_alternating(k: usize) -> Bits {
    assert!((1..=255).contains(&k), "witness_alternating covers 1..=255");
    let mut program = Bits::new();
    push_set_cell(&mut program, k as u8);
    push_op(&mut program, OP_OUT0);
    push_op(&mut program, OP_OUT1);
    push_op(&mut program, OP_DEC);
    push_loop(&mut program, 4);
    push_op(&mut program, OP_HALT);
    program
}

/// Verifies that `program` halts within `budget` steps and outputs
/// exactly `target`; returns the verified program length (the bits
/// actually consumed — trailing bits beyond `HALT` don't count).
pub fn verify_witness(program: &Bits, target: &Bits, budget: u64) -> Result<usize> {
    let outcome = decode_and_run(program, budget)?;
    match outcome.status {
        RunStatus::Halted => {
            if &outcome.output == target {
                Ok(outcome.consumed)
            } else {
                Err(Error::WitnessRejected(format!(
                    "outputs {} bit(s) `{}`, target is {} bit(s) `{}`",
                    outcome.output.len(),
                    clip(&outcome.output),
                    target.len(),
                    clip(target),
                )))
            }
        }
        RunStatus::BudgetExceeded => Err(Error::WitnessRejected(format!(
            "exceeded the {budget}-step budget"
        ))),
        RunStatus::BitsExhausted => Err(Error::WitnessRejected(format!(
            "ran out of program bits after {} (no HALT reached)",
            outcome.consumed
        ))),
    }
}

fn clip(bits: &Bits) -> String {
    let text = bits.to_string();
    if text.len() > 24 {
        format!("{}…", &text[..24])
    } else {
        text
    }
}

/// Parses a witness file: one program per line, `#` comments, blank
/// lines ignored.
pub fn parse_witness_file(text: &str) -> Result<Vec<Bits>> {
    let mut programs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let program: Bits = content.parse().map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse {
                line: lineno + 1,
                message,
            },
            other => other,
        })?;
        programs.push(program);
    }
    Ok(programs)
}

/// Renders witness programs to file text, one per line with a leading
/// comment each.
pub fn render_witness_file(entries: &[(String, Bits)]) -> String {
    let mut out = String::new();
    for (comment, program) in entries {
        out.push_str(&format!("# {comment}\n{program}\n"));
    }
    out
}
