//! Exact enumeration of the random-program measure.
//!
//! The walk explores the prefix tree of program bits, forking the
//! resumable machine at every requested bit and stopping each branch at
//! halt, budget exhaustion, or the depth cap `ℓ_max`. A branch resolved
//! after consuming `c` bits accounts for `2^{ℓ_max − c}` *units* of
//! `2^{-ℓ_max}` — integer bookkeeping, so the masses are exact and the
//! three buckets (halted, budget-exceeded, bits-exhausted) always sum to
//! exactly one.
//!
//! The prefix space is partitioned across workers by leading bits: the
//! tree is expanded breadth-first to a fixed frontier depth, the frontier
//! is split into contiguous chunks, and per-chunk tallies are merged in
//! chunk order — the result is identical for any worker count.

use std::collections::BTreeMap;
use std::thread;

use crate::error::{Error, Result};

use super::bits::Bits;
use super::machine::{Machine, MachinePhase, MAX_L_MAX};

/// Depth at which the prefix tree is split into worker chunks.
const FRONTIER_DEPTH: usize = 6;

/// Upper bound on worker threads; the shard merge is order-fixed, so the
/// result does not depend on how many actually run.
const MAX_WORKERS: usize = 8;

/// Per-output tally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OutputStat {
    /// Probability mass in units of `2^{-ℓ_max}`.
    pub mass_units: u64,
    /// Length of the shortest halting program producing this output.
    pub shortest: usize,
    /// Number of distinct halting programs producing this output.
    pub programs: u64,
}

/// Exact survey of the program measure up to depth `ℓ_max`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnsembleReport {
    pub l_max: usize,
    pub budget: u64,
    pub outputs: BTreeMap<Bits, OutputStat>,
    /// Distinct halting programs found.
    pub halting_programs: u64,
    /// Distinct consumed prefixes that ran out of step budget.
    pub budget_exceeded_prefixes: u64,
    /// Depth-`ℓ_max` leaves still waiting for program bits.
    pub bits_exhausted_prefixes: u64,
    /// Unit masses of the three buckets; they sum to `2^{ℓ_max}`.
    pub halted_units: u64,
    pub budget_units: u64,
    pub exhausted_units: u64,
}

impl EnsembleReport {
    /// One unit of mass, `2^{-ℓ_max}`.
    fn unit(&self) -> f64 {
        (self.l_max as f64).exp2().recip()
    }

    /// Exact enumerated probability `P(s)`.
    pub fn mass(&self, s: &Bits) -> f64 {
        self.outputs
            .get(s)
            .map(|stat| stat.mass_units as f64 * self.unit())
            .unwrap_or(0.0)
    }

    /// Length of the shortest known producer of `s`, if any halts by
    /// `ℓ_max`.
    pub fn shortest(&self, s: &Bits) -> Option<usize> {
        self.outputs.get(s).map(|stat| stat.shortest)
    }

    /// `Σ_halting 2^{-ℓ}` — at most 1 by prefix-freeness.
    pub fn kraft_sum(&self) -> f64 {
        self.halted_units as f64 * self.unit()
    }

    /// Mass not resolved into halting programs (budget + starved leaves).
    pub fn unresolved_mass(&self) -> f64 {
        (self.budget_units + self.exhausted_units) as f64 * self.unit()
    }

    /// True when the three buckets account for exactly the whole measure.
    pub fn mass_accounted(&self) -> bool {
        self.halted_units + self.budget_units + self.exhausted_units == 1u64 << self.l_max
    }
}

#[derive(Debug)]
struct Tally {
    l_max: usize,
    outputs: BTreeMap<Bits, OutputStat>,
    halting_programs: u64,
    budget_exceeded_prefixes: u64,
    bits_exhausted_prefixes: u64,
    halted_units: u64,
    budget_units: u64,
    exhausted_units: u64,
    programs: Option<Vec<Bits>>,
}

impl Tally {
    fn new(l_max: usize, collect: bool) -> Self {
        Self {
            l_max,
            outputs: BTreeMap::new(),
            halting_programs: 0,
            budget_exceeded_prefixes: 0,
            bits_exhausted_prefixes: 0,
            halted_units: 0,
            budget_units: 0,
            exhausted_units: 0,
            programs: collect.then(Vec::new),
        }
    }

    fn units_at(&self, consumed: usize) -> u64 {
        1u64 << (self.l_max - consumed)
    }

    fn record_halt(&mut self, machine: &Machine, path: &[bool]) {
        debug_assert_eq!(machine.consumed(), path.len());
        let units = self.units_at(machine.consumed());
        let entry = self
            .outputs
            .entry(machine.output().clone())
            .or_insert(OutputStat {
                mass_units: 0,
                shortest: usize::MAX,
                programs: 0,
            });
        entry.mass_units += units;
        entry.shortest = entry.shortest.min(machine.consumed());
        entry.programs += 1;
        self.halting_programs += 1;
        self.halted_units += units;
        if let Some(programs) = &mut self.programs {
            programs.push(path.iter().copied().collect());
        }
    }

    fn record_budget(&mut self, machine: &Machine) {
        self.budget_units += self.units_at(machine.consumed());
        self.budget_exceeded_prefixes += 1;
    }

    fn record_exhausted(&mut self) {
        self.exhausted_units += 1;
        self.bits_exhausted_prefixes += 1;
    }

    fn merge(&mut self, other: Tally) {
        for (output, stat) in other.outputs {
            let entry = self.outputs.entry(output).or_insert(OutputStat {
                mass_units: 0,
                shortest: usize::MAX,
                programs: 0,
            });
            entry.mass_units += stat.mass_units;
            entry.shortest = entry.shortest.min(stat.shortest);
            entry.programs += stat.programs;
        }
        self.halting_programs += other.halting_programs;
        self.budget_exceeded_prefixes += other.budget_exceeded_prefixes;
        self.bits_exhausted_prefixes += other.bits_exhausted_prefixes;
        self.halted_units += other.halted_units;
        self.budget_units += other.budget_units;
        self.exhausted_units += other.exhausted_units;
        if let (Some(mine), Some(theirs)) = (&mut self.programs, other.programs) {
            mine.extend(theirs);
        }
    }
}

fn walk_subtree(mut machine: Machine, path: &mut Vec<bool>, tally: &mut Tally) {
    match machine.run() {
        MachinePhase::Halted => tally.record_halt(&machine, path),
        MachinePhase::BudgetExceeded => tally.record_budget(&machine),
        MachinePhase::NeedBit => {
            if path.len() == tally.l_max {
                tally.record_exhausted();
                return;
            }
            let mut zero = machine.clone();
            zero.feed_bit(false);
            path.push(false);
            walk_subtree(zero, path, tally);
            path.pop();

            machine.feed_bit(true);
            path.push(true);
            walk_subtree(machine, path, tally);
            path.pop();
        }
    }
}

fn enumerate_impl(
    l_max: usize,
    budget: u64,
    collect: bool,
) -> Result<(EnsembleReport, Option<Vec<Bits>>)> {
    if l_max > MAX_L_MAX {
        return Err(Error::PrefixCapExceeded {
            l_max,
            max: MAX_L_MAX,
        });
    }
    let mut tally = Tally::new(l_max, collect);
    let root = Machine::new(budget)?;

    let workers = thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(MAX_WORKERS);

    if l_max <= FRONTIER_DEPTH || workers <= 1 {
        walk_subtree(root, &mut Vec::new(), &mut tally);
    } else {
        // Breadth-first expansion to the frontier depth; branches that
        // resolve early are tallied inline.
        let mut frontier: Vec<(Machine, Vec<bool>)> = vec![(root, Vec::new())];
        for _ in 0..FRONTIER_DEPTH {
            let mut next = Vec::with_capacity(frontier.len() * 2);
            for (mut machine, path) in frontier {
                match machine.run() {
                    MachinePhase::Halted => tally.record_halt(&machine, &path),
                    MachinePhase::BudgetExceeded => tally.record_budget(&machine),
                    MachinePhase::NeedBit => {
                        let mut zero = machine.clone();
                        zero.feed_bit(false);
                        let mut zero_path = path.clone();
                        zero_path.push(false);
                        next.push((zero, zero_path));

                        machine.feed_bit(true);
                        let mut one_path = path;
                        one_path.push(true);
                        next.push((machine, one_path));
                    }
                }
            }
            frontier = next;
        }

        let chunk_size = frontier.len().div_ceil(workers).max(1);
        let chunks: Vec<Vec<(Machine, Vec<bool>)>> = {
            let mut chunks = Vec::new();
            let mut rest = frontier;
            while !rest.is_empty() {
                let tail = rest.split_off(rest.len().min(chunk_size));
                chunks.push(rest);
                rest = tail;
            }
            chunks
        };

        let partials: Vec<Tally> = thread::scope(|scope| {
            let handles: Vec<_> = chunks
                .into_iter()
                .map(|chunk| {
                    scope.spawn(move || {
                        let mut part = Tally::new(l_max, collect);
                        for (machine, path) in chunk {
                            let mut path = path;
                            walk_subtree(machine, &mut path, &mut part);
                        }
                        part
                    })
                })
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect()
        });
        for part in partials {
            tally.merge(part);
        }
    }

    let mut programs = tally.programs.take();
    if let Some(programs) = &mut programs {
        programs.sort();
    }
    let report = EnsembleReport {
        l_max,
        budget,
        outputs: tally.outputs,
        halting_programs: tally.halting_programs,
        budget_exceeded_prefixes: tally.budget_exceeded_prefixes,
        bits_exhausted_prefixes: tally.bits_exhausted_prefixes,
        halted_units: tally.halted_units,
        budget_units: tally.budget_units,
        exhausted_units: tally.exhausted_units,
    };
    assert!(report.mass_accounted(), "unit bookkeeping must be exact");
    Ok((report, programs))
}

/// Enumerates every program prefix up to `ℓ_max` bits.
pub fn enumerate_programs(l_max: usize, budget: u64) -> Result<EnsembleReport> {
    enumerate_impl(l_max, budget, false).map(|(report, _)| report)
}

/// As [`enumerate_programs`], also returning the sorted list of halting
/// program bit strings (for prefix-freeness checks at moderate depths).
pub fn enumerate_with_programs(l_max: usize, budget: u64) -> Result<(EnsembleReport, Vec<Bits>)> {
    enumerate_impl(l_max, budget, true)
        .map(|(report, programs)| (report, programs.expect("collection requested")))
}

/// CSV rendering: `output_hex,output_len,mass,shortest_program_bits`,
/// sorted by descending mass, then shortest program, then output text.
pub fn enumeration_csv(report: &EnsembleReport) -> String {
    let mut rows: Vec<(&Bits, &OutputStat)> = report.outputs.iter().collect();
    rows.sort_by(|(s_a, a), (s_b, b)| {
        b.mass_units
            .cmp(&a.mass_units)
            .then_with(|| a.shortest.cmp(&b.shortest))
            .then_with(|| s_a.cmp(s_b))
    });
    let mut csv = String::from("output_hex,output_len,mass,shortest_program_bits\n");
    for (output, stat) in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            output.to_hex(),
            output.len(),
            stat.mass_units as f64 * report.unit(),
            stat.shortest
        ));
    }
    csv
}
