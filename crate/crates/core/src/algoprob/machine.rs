//! The self-delimiting toy machine.
//!
//! Programs are bit streams decoded three bits at a time (high bit first)
//! into eight opcodes; `LOOP` reads five more operand bits. The machine
//! owns a 64-cell ring tape of byte cells and emits output bits with
//! `OUT0`/`OUT1`. Consumption is strictly on demand: once `HALT` runs, no
//! further bit is ever requested, which is what makes halting programs
//! prefix-free and the `2^{-ℓ}` program measure exact.
//!
//! [`Machine`] is resumable — [`Machine::run`] executes until it halts,
//! exhausts its step budget, or needs another program bit — so the same
//! core drives slice-fed runs ([`decode_and_run`]), coin-flip sampling,
//! and the forking walk of the enumeration.

use serde::Serialize;

use crate::error::{Error, Result};

use super::bits::Bits;

/// Ring-tape length in cells.
pub const TAPE_CELLS: usize = 64;

/// Default per-program step budget.
pub const DEFAULT_BUDGET: u64 = 4096;

/// Default enumeration depth (bit cap).
pub const DEFAULT_L_MAX: usize = 18;

/// Hard cap on the enumeration depth.
pub const MAX_L_MAX: usize = 24;

const OPCODE_BITS: u8 = 3;
const OPERAND_BITS: u8 = 5;

/// A decoded instruction.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Instr {
    /// `000` — stop; the program is the bits consumed so far.
    Halt,
    /// `001` — emit output bit 0.
    Out0,
    /// `010` — emit output bit 1.
    Out1,
    /// `011` — current cell += 1 (mod 256).
    Inc,
    /// `100` — current cell −= 1 (mod 256).
    Dec,
    /// `101` — current cell ×= 2 (mod 256).
    Dbl,
    /// `110` — move the head right (wraps at the tape end).
    Right,
    /// `111 kkkkk` — if the current cell is nonzero and `k > 0`, resume
    /// `k` instructions back from the next one (clamped to the program
    /// start); otherwise fall through.
    Loop { k: u8 },
}

/// Why [`Machine::run`] stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MachinePhase {
    /// The next instruction is not fully decoded; feed one more bit.
    NeedBit,
    /// `HALT` executed.
    Halted,
    /// The step budget ran out before halting.
    BudgetExceeded,
}

/// Final status of a complete run against a finite bit source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Halted,
    BudgetExceeded,
    BitsExhausted,
}

/// Result of running a program to completion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunOutcome {
    pub output: Bits,
    /// Exact number of program bits consumed.
    pub consumed: usize,
    /// Instructions executed.
    pub steps: u64,
    pub status: RunStatus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Decode {
    Opcode { acc: u8, got: u8 },
    Operand { acc: u8, got: u8 },
}

/// Resumable machine state.
#[derive(Clone, Debug)]
pub struct Machine {
    tape: [u8; TAPE_CELLS],
    head: usize,
    instrs: Vec<Instr>,
    pc: usize,
    output: Bits,
    steps: u64,
    budget: u64,
    consumed: usize,
    decode: Decode,
    halted: bool,
}

impl Machine {
    pub fn new(budget: u64) -> Result<Self> {
        if budget == 0 {
            return Err(Error::ZeroBudget);
        }
        Ok(Self {
            tape: [0; TAPE_CELLS],
            head: 0,
            instrs: Vec::new(),
            pc: 0,
            output: Bits::new(),
            steps: 0,
            budget,
            consumed: 0,
            decode: Decode::Opcode { acc: 0, got: 0 },
            halted: false,
        })
    }

    pub fn consumed(&self) -> usize {
        self.consumed
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }

    pub fn output(&self) -> &Bits {
        &self.output
    }

    pub fn instrs(&self) -> &[Instr] {
        &self.instrs
    }

    /// Executes until halt, budget exhaustion, or the need for another
    /// program bit. Idempotent once halted or out of budget.
    pub fn run(&mut self) -> MachinePhase {
        loop {
            if self.halted {
                return MachinePhase::Halted;
            }
            if self.pc == self.instrs.len() {
                return MachinePhase::NeedBit;
            }
            if self.steps == self.budget {
                return MachinePhase::BudgetExceeded;
            }
            self.steps += 1;
            let instr = self.instrs[self.pc];
            let at = self.pc;
            self.pc += 1;
            match instr {
                Instr::Halt => {
                    self.halted = true;
                    return MachinePhase::Halted;
                }
                Instr::Out0 => self.output.push(false),
                Instr::Out1 => self.output.push(true),
                Instr::Inc => self.tape[self.head] = self.tape[self.head].wrapping_add(1),
                Instr::Dec => self.tape[self.head] = self.tape[self.head].wrapping_sub(1),
                Instr::Dbl => self.tape[self.head] = self.tape[self.head].wrapping_mul(2),
                Instr::Right => self.head = (self.head + 1) % TAPE_CELLS,
                Instr::Loop { k } => {
                    if self.tape[self.head] != 0 && k > 0 {
                        self.pc = (at + 1).saturating_sub(k as usize);
                    }
                }
            }
        }
    }

    /// Feeds one program bit into the decoder. Call only after
    /// [`Machine::run`] returned [`MachinePhase::NeedBit`].
    pub fn feed_bit(&mut self, bit: bool) {
        debug_assert!(!self.halted && self.pc == self.instrs.len());
        self.consumed += 1;
        match self.decode {
            Decode::Opcode { acc, got } => {
                let acc = acc << 1 | bit as u8;
                if got + 1 < OPCODE_BITS {
                    self.decode = Decode::Opcode { acc, got: got + 1 };
                    return;
                }
                match acc {
                    0b000 => self.instrs.push(Instr::Halt),
                    0b001 => self.instrs.push(Instr::Out0),
                    0b010 => self.instrs.push(Instr::Out1),
                    0b011 => self.instrs.push(Instr::Inc),
                    0b100 => self.instrs.push(Instr::Dec),
                    0b101 => self.instrs.push(Instr::Dbl),
                    0b110 => self.instrs.push(Instr::Right),
                    _ => {
                        self.decode = Decode::Operand { acc: 0, got: 0 };
                        return;
                    }
                }
                self.decode = Decode::Opcode { acc: 0, got: 0 };
            }
            Decode::Operand { acc, got } => {
                let acc = acc << 1 | bit as u8;
                if got + 1 < OPERAND_BITS {
                    self.decode = Decode::Operand { acc, got: got + 1 };
                    return;
                }
                self.instrs.push(Instr::Loop { k: acc });
                self.decode = Decode::Opcode { acc: 0, got: 0 };
            }
        }
    }

    fn outcome(&self, status: RunStatus) -> RunOutcome {
        RunOutcome {
            output: self.output.clone(),
            consumed: self.consumed,
            steps: self.steps,
            status,
        }
    }
}

/// Runs a program supplied as a finite bit string. Bits beyond the
/// consumed prefix are ignored; running out of bits before halting yields
/// [`RunStatus::BitsExhausted`].
pub fn decode_and_run(bits: &Bits, budget: u64) -> Result<RunOutcome> {
    let mut machine = Machine::new(budget)?;
    let mut source = bits.iter();
    loop {
        match machine.run() {
            MachinePhase::NeedBit => match source.next() {
                Some(bit) => machine.feed_bit(bit),
                None => return Ok(machine.outcome(RunStatus::BitsExhausted)),
            },
            MachinePhase::Halted => return Ok(machine.outcome(RunStatus::Halted)),
            MachinePhase::BudgetExceeded => {
                return Ok(machine.outcome(RunStatus::BudgetExceeded))
            }
        }
    }
}
