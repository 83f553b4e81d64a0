//! Reversible register machines: bit strings, self-inverse gates, and
//! multi-step programs with declared locality footprints.
//!
//! A program is a sequence of time steps; each step is a list of gates
//! applied left to right and counts as one application of the machine's
//! update map. Every gate in the set is a bijection on basis states and its
//! own inverse, so any composition of steps is reversible by construction.
//! The step's footprint is the static union of its gate sites, used by the
//! local coarse-graining in [`crate::histories`].

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Largest supported register width. State vectors over the register hold
/// `2^width` amplitudes, so 16 keeps everything at desk scale.
pub const MAX_WIDTH: usize = 16;

/// Default width cap for exhaustive bijectivity checks.
pub const DEFAULT_CHECK_CAP: usize = 8;

/// A fixed-width register value. Bit 0 is the first (leftmost) bit in the
/// text rendering, and the integer encoding is `Σ bit_i << i`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitString {
    width: usize,
    value: usize,
}

impl BitString {
    pub fn new(width: usize, value: usize) -> Result<Self> {
        check_width(width)?;
        debug_assert!(value < (1 << width));
        Ok(Self {
            width,
            value: value & ((1 << width) - 1),
        })
    }

    /// All-zero register of the given width.
    pub fn zeros(width: usize) -> Result<Self> {
        Self::new(width, 0)
    }

    /// Parses a `0`/`1` text rendering; the first character is bit 0.
    pub fn parse(text: &str) -> Result<Self> {
        let width = text.len();
        check_width(width)?;
        let mut value = 0usize;
        for (i, c) in text.chars().enumerate() {
            match c {
                '0' => {}
                '1' => value |= 1 << i,
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("invalid bit character `{other}` in `{text}`"),
                    })
                }
            }
        }
        Ok(Self { width, value })
    }

    pub fn from_bits(bits: &[bool]) -> Result<Self> {
        check_width(bits.len())?;
        let value = bits
            .iter()
            .enumerate()
            .fold(0usize, |acc, (i, &b)| acc | ((b as usize) << i));
        Ok(Self {
            width: bits.len(),
            value,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Integer encoding in `[0, 2^width)`.
    pub fn index(&self) -> usize {
        self.value
    }

    pub fn bit(&self, site: usize) -> bool {
        debug_assert!(site < self.width);
        (self.value >> site) & 1 == 1
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.width).map(|i| self.bit(i)).collect()
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width {
            write!(f, "{}", if self.bit(i) { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

fn check_width(width: usize) -> Result<()> {
    if width == 0 || width > MAX_WIDTH {
        return Err(Error::WidthOutOfRange {
            width,
            max: MAX_WIDTH,
        });
    }
    Ok(())
}

/// One reversible gate. All five kinds are self-inverse bijections on basis
/// states, which makes program inversion a matter of reversing gate order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ReversibleGate {
    Not { site: usize },
    Cnot { control: usize, target: usize },
    Swap { a: usize, b: usize },
    Toffoli { c1: usize, c2: usize, target: usize },
    Fredkin { control: usize, a: usize, b: usize },
}

impl ReversibleGate {
    /// Gate sites in declaration order.
    pub fn sites(&self) -> Vec<usize> {
        match *self {
            ReversibleGate::Not { site } => vec![site],
            ReversibleGate::Cnot { control, target } => vec![control, target],
            ReversibleGate::Swap { a, b } => vec![a, b],
            ReversibleGate::Toffoli { c1, c2, target } => vec![c1, c2, target],
            ReversibleGate::Fredkin { control, a, b } => vec![control, a, b],
        }
    }

    /// Keyword used in circuit files.
    pub fn keyword(&self) -> &'static str {
        match self {
            ReversibleGate::Not { .. } => "NOT",
            ReversibleGate::Cnot { .. } => "CNOT",
            ReversibleGate::Swap { .. } => "SWAP",
            ReversibleGate::Toffoli { .. } => "TOF",
            ReversibleGate::Fredkin { .. } => "FRED",
        }
    }

    fn validate(&self, width: usize) -> Result<()> {
        let sites = self.sites();
        for &s in &sites {
            if s >= width {
                return Err(Error::SiteOutOfRange { site: s, width });
            }
        }
        for i in 0..sites.len() {
            for j in i + 1..sites.len() {
                if sites[i] == sites[j] {
                    return Err(Error::DuplicateSites(sites));
                }
            }
        }
        Ok(())
    }

    /// Image of a basis-state index under the gate.
    #[inline]
    pub fn apply_index(&self, index: usize) -> usize {
        match *self {
            ReversibleGate::Not { site } => index ^ (1 << site),
            ReversibleGate::Cnot { control, target } => {
                if index >> control & 1 == 1 {
                    index ^ (1 << target)
                } else {
                    index
                }
            }
            ReversibleGate::Swap { a, b } => swap_bits(index, a, b),
            ReversibleGate::Toffoli { c1, c2, target } => {
                if index >> c1 & 1 == 1 && index >> c2 & 1 == 1 {
                    index ^ (1 << target)
                } else {
                    index
                }
            }
            ReversibleGate::Fredkin { control, a, b } => {
                if index >> control & 1 == 1 {
                    swap_bits(index, a, b)
                } else {
                    index
                }
            }
        }
    }

    pub fn apply(&self, b: BitString) -> BitString {
        BitString {
            width: b.width,
            value: self.apply_index(b.value),
        }
    }
}

#[inline]
fn swap_bits(index: usize, a: usize, b: usize) -> usize {
    let bit_a = index >> a & 1;
    let bit_b = index >> b & 1;
    if bit_a == bit_b {
        index
    } else {
        index ^ (1 << a) ^ (1 << b)
    }
}

/// One application of the machine's update map: an ordered gate list plus
/// the static union of the gate sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TimeStep {
    gates: Vec<ReversibleGate>,
    footprint: u32,
}

impl TimeStep {
    /// Builds a step, validating each gate against the register width.
    /// An empty gate list is the identity step with an empty footprint.
    pub fn new(width: usize, gates: Vec<ReversibleGate>) -> Result<Self> {
        check_width(width)?;
        let mut footprint = 0u32;
        for gate in &gates {
            gate.validate(width)?;
            for site in gate.sites() {
                footprint |= 1 << site;
            }
        }
        Ok(Self { gates, footprint })
    }

    pub fn gates(&self) -> &[ReversibleGate] {
        &self.gates
    }

    /// Footprint as a site bitmask.
    pub fn footprint_mask(&self) -> u32 {
        self.footprint
    }

    /// Footprint as a sorted site list.
    pub fn footprint_sites(&self) -> Vec<usize> {
        (0..MAX_WIDTH).filter(|&i| self.footprint >> i & 1 == 1).collect()
    }

    /// Image of a basis-state index under the step's gates, left to right.
    #[inline]
    pub fn apply_index(&self, index: usize) -> usize {
        self.gates.iter().fold(index, |i, g| g.apply_index(i))
    }
}

/// A multi-step reversible program over a fixed-width register.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReversibleProgram {
    width: usize,
    steps: Vec<TimeStep>,
}

impl ReversibleProgram {
    pub fn new(width: usize, steps: Vec<TimeStep>) -> Result<Self> {
        check_width(width)?;
        for step in &steps {
            for gate in step.gates() {
                gate.validate(width)?;
            }
        }
        Ok(Self { width, steps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn steps(&self) -> &[TimeStep] {
        &self.steps
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// Applies one step to a register value.
    pub fn apply_step(&self, step_index: usize, b: BitString) -> Result<BitString> {
        if b.width != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: b.width,
            });
        }
        Ok(BitString {
            width: self.width,
            value: self.steps[step_index].apply_index(b.value),
        })
    }

    /// The classical trajectory `(b, Υ₁(b), Υ₂Υ₁(b), …)`, one entry per
    /// epoch, of length `steps + 1`.
    pub fn run_trajectory(&self, start: BitString) -> Result<Vec<BitString>> {
        if start.width != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: start.width,
            });
        }
        let mut out = Vec::with_capacity(self.steps.len() + 1);
        out.push(start);
        let mut value = start.value;
        for step in &self.steps {
            value = step.apply_index(value);
            out.push(BitString {
                width: self.width,
                value,
            });
        }
        Ok(out)
    }

    /// Exhaustively checks that every step is a bijection on the `2^width`
    /// register values, using the default width cap.
    pub fn check_reversible(&self) -> Result<Vec<bool>> {
        self.check_reversible_with_cap(DEFAULT_CHECK_CAP)
    }

    /// Exhaustive bijectivity check with an explicit width cap (at most
    /// [`MAX_WIDTH`]).
    pub fn check_reversible_with_cap(&self, cap: usize) -> Result<Vec<bool>> {
        let cap = cap.min(MAX_WIDTH);
        if self.width > cap {
            return Err(Error::CheckCapExceeded {
                width: self.width,
                cap,
            });
        }
        Ok(self
            .steps
            .iter()
            .map(|step| check_bijective(self.width, |i| step.apply_index(i)))
            .collect())
    }
}

/// Exhaustively checks whether `f` maps the `2^width` register values onto
/// `2^width` distinct values.
pub fn check_bijective(width: usize, f: impl Fn(usize) -> usize) -> bool {
    let size = 1usize << width;
    let mut seen = vec![false; size];
    for i in 0..size {
        let image = f(i);
        if image >= size || seen[image] {
            return false;
        }
        seen[image] = true;
    }
    true
}

/// Parses the line-oriented circuit format.
///
/// Line 1 is `WIDTH n`; the remaining lines are gate lines (`NOT i`,
/// `CNOT c t`, `SWAP a b`, `TOF c1 c2 t`, `FRED c a b`), the literal
/// separator `STEP`, blank lines, or `#` comments. Indices are
/// whitespace-separated decimals.
pub fn parse_circuit(text: &str) -> Result<ReversibleProgram> {
    let mut width: Option<usize> = None;
    let mut steps: Vec<TimeStep> = Vec::new();
    let mut current: Vec<ReversibleGate> = Vec::new();
    let mut saw_step_line = false;

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tokens = content.split_whitespace();
        let head = tokens.next().unwrap();
        let rest: Vec<&str> = tokens.collect();

        if width.is_none() {
            if head != "WIDTH" {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `WIDTH n` before `{head}`"),
                });
            }
            let n = parse_field(&rest, 0, line, "width")?;
            check_width(n).map_err(|e| Error::Parse {
                line,
                message: e.to_string(),
            })?;
            if rest.len() != 1 {
                return Err(Error::Parse {
                    line,
                    message: "WIDTH takes exactly one argument".into(),
                });
            }
            width = Some(n);
            continue;
        }
        let w = width.unwrap();

        if head == "STEP" {
            if !rest.is_empty() {
                return Err(Error::Parse {
                    line,
                    message: "STEP takes no arguments".into(),
                });
            }
            steps.push(TimeStep::new(w, std::mem::take(&mut current)).map_err(|e| {
                Error::Parse {
                    line,
                    message: e.to_string(),
                }
            })?);
            saw_step_line = true;
            continue;
        }

        let gate = parse_gate(head, &rest, line)?;
        gate.validate(w).map_err(|e| Error::Parse {
            line,
            message: e.to_string(),
        })?;
        current.push(gate);
    }

    let Some(w) = width else {
        return Err(Error::Parse {
            line: text.lines().count() + 1,
            message: "missing WIDTH line".into(),
        });
    };

    // A trailing gate group becomes the final step; `STEP` at end of file
    // leaves an explicit empty identity step.
    if !current.is_empty() || steps.is_empty() && !saw_step_line {
        steps.push(TimeStep::new(w, current)?);
    }
    ReversibleProgram::new(w, steps)
}

fn parse_gate(keyword: &str, args: &[&str], line: usize) -> Result<ReversibleGate> {
    let expect = |n: usize| -> Result<()> {
        if args.len() != n {
            Err(Error::Parse {
                line,
                message: format!("{keyword} takes {n} site argument(s), got {}", args.len()),
            })
        } else {
            Ok(())
        }
    };
    let site = |i: usize| parse_field(args, i, line, "site index");
    match keyword {
        "NOT" => {
            expect(1)?;
            Ok(ReversibleGate::Not { site: site(0)? })
        }
        "CNOT" => {
            expect(2)?;
            Ok(ReversibleGate::Cnot {
                control: site(0)?,
                target: site(1)?,
            })
        }
        "SWAP" => {
            expect(2)?;
            Ok(ReversibleGate::Swap {
                a: site(0)?,
                b: site(1)?,
            })
        }
        "TOF" => {
            expect(3)?;
            Ok(ReversibleGate::Toffoli {
                c1: site(0)?,
                c2: site(1)?,
                target: site(2)?,
            })
        }
        "FRED" => {
            expect(3)?;
            Ok(ReversibleGate::Fredkin {
                control: site(0)?,
                a: site(1)?,
                b: site(2)?,
            })
        }
        other => Err(Error::Parse {
            line,
            message: format!("unknown gate `{other}`"),
        }),
    }
}

fn parse_field(args: &[&str], i: usize, line: usize, what: &str) -> Result<usize> {
    let token = args.get(i).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    token.parse().map_err(|_| Error::Parse {
        line,
        message: format!("invalid {what} `{token}`"),
    })
}

/// Draws a random program: `steps` time steps, each holding 1 to
/// `max_gates_per_step` gates of random kinds on random distinct sites.
pub fn random_program<R: Rng>(
    width: usize,
    steps: usize,
    max_gates_per_step: usize,
    rng: &mut R,
) -> ReversibleProgram {
    assert!((1..=MAX_WIDTH).contains(&width));
    let step_list = (0..steps)
        .map(|_| {
            let count = rng.gen_range(1..=max_gates_per_step.max(1));
            let gates = (0..count).map(|_| random_gate(width, rng)).collect();
            TimeStep::new(width, gates).expect("generated gates are in range")
        })
        .collect();
    ReversibleProgram::new(width, step_list).expect("generated program is valid")
}

fn random_gate<R: Rng>(width: usize, rng: &mut R) -> ReversibleGate {
    let arity_cap = width.min(3);
    let kind = match arity_cap {
        1 => 0,
        2 => rng.gen_range(0..3),
        _ => rng.gen_range(0..5),
    };
    let mut sites = rand::seq::index::sample(rng, width, arity_cap.min(3)).into_vec();
    sites.truncate(3);
    match kind {
        0 => ReversibleGate::Not { site: sites[0] },
        1 => ReversibleGate::Cnot {
            control: sites[0],
            target: sites[1],
        },
        2 => ReversibleGate::Swap {
            a: sites[0],
            b: sites[1],
        },
        3 => ReversibleGate::Toffoli {
            c1: sites[0],
            c2: sites[1],
            target: sites[2],
        },
        _ => ReversibleGate::Fredkin {
            control: sites[0],
            a: sites[1],
            b: sites[2],
        },
    }
}
