//! Random programming: feed fair coin flips to the machine on demand.
//!
//! Because bits are only drawn when the machine asks for one, a sampled
//! run lands on each halting program `p` with probability exactly
//! `2^{-|p|}` — the same measure the enumeration computes. The capped
//! variant stops a run once `ℓ_max` bits have been consumed, truncating
//! the measure the same way a depth-`ℓ_max` enumeration does, which makes
//! the two directly comparable output by output.
//!
//! Sampling shards by per-worker seeds derived from the root seed, and
//! shard tallies merge in fixed shard order, so reports are reproducible
//! bit for bit regardless of thread count.

use std::collections::BTreeMap;
use std::thread;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;

use super::bits::Bits;
use super::machine::{Machine, MachinePhase, RunOutcome, RunStatus};

/// Fixed shard count; part of the reproducibility contract, independent
/// of how many threads actually run.
const NUM_SHARDS: usize = 8;

/// Minimum trials before sharded execution bothers with threads.
const PARALLEL_THRESHOLD: u64 = 8192;

/// Empirical output frequencies from `n` randomly programmed runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SampleReport {
    pub n: u64,
    pub seed: u64,
    pub budget: u64,
    /// Bit cap per run, when sampling the truncated measure.
    pub bit_cap: Option<usize>,
    /// Halted-run outputs and their counts.
    pub outputs: BTreeMap<Bits, u64>,
    pub halted: u64,
    pub budget_exceeded: u64,
    pub bits_exhausted: u64,
}

impl SampleReport {
    /// Empirical probability of output `s` among all `n` runs.
    pub fn freq(&self, s: &Bits) -> f64 {
        self.outputs.get(s).copied().unwrap_or(0) as f64 / self.n as f64
    }
}

/// Runs one randomly programmed trial, drawing bits from `rng` on demand.
/// Returns the outcome and the exact program bits consumed.
pub fn sample_one<R: Rng>(
    rng: &mut R,
    budget: u64,
    bit_cap: Option<usize>,
) -> Result<(RunOutcome, Bits)> {
    let mut machine = Machine::new(budget)?;
    let mut program = Bits::new();
    let (status, output, steps) = loop {
        match machine.run() {
            MachinePhase::NeedBit => {
                if bit_cap.is_some_and(|cap| program.len() == cap) {
                    break (RunStatus::BitsExhausted, machine.output().clone(), machine.steps());
                }
                let bit = rng.gen::<bool>();
                program.push(bit);
                machine.feed_bit(bit);
            }
            MachinePhase::Halted => {
                break (RunStatus::Halted, machine.output().clone(), machine.steps())
            }
            MachinePhase::BudgetExceeded => {
                break (
                    RunStatus::BudgetExceeded,
                    machine.output().clone(),
                    machine.steps(),
                )
            }
        }
    };
    let consumed = machine.consumed();
    debug_assert_eq!(consumed, program.len());
    Ok((
        RunOutcome {
            output,
            consumed,
            steps,
            status,
        },
        program,
    ))
}

fn sample_impl(n: u64, seed: u64, budget: u64, bit_cap: Option<usize>) -> Result<SampleReport> {
    // Shard seeds come from the root seed up front; shard i then runs its
    // trials independently.
    let mut root = ChaCha8Rng::seed_from_u64(seed);
    let shard_seeds: Vec<u64> = (0..NUM_SHARDS).map(|_| root.gen()).collect();
    let shard_trials: Vec<u64> = (0..NUM_SHARDS as u64)
        .map(|i| n / NUM_SHARDS as u64 + u64::from(i < n % NUM_SHARDS as u64))
        .collect();

    let run_shard = |shard_seed: u64, trials: u64| -> Result<SampleReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(shard_seed);
        let mut shard = SampleReport {
            n: trials,
            seed: shard_seed,
            budget,
            bit_cap,
            outputs: BTreeMap::new(),
            halted: 0,
            budget_exceeded: 0,
            bits_exhausted: 0,
        };
        for _ in 0..trials {
            let (outcome, _) = sample_one(&mut rng, budget, bit_cap)?;
            match outcome.status {
                RunStatus::Halted => {
                    shard.halted += 1;
                    *shard.outputs.entry(outcome.output).or_insert(0) += 1;
                }
                RunStatus::BudgetExceeded => shard.budget_exceeded += 1,
                RunStatus::BitsExhausted => shard.bits_exhausted += 1,
            }
        }
        Ok(shard)
    };

    let workers = thread::available_parallelism()
        .map(|w| w.get())
        .unwrap_or(1);
    let shards: Vec<SampleReport> = if n < PARALLEL_THRESHOLD || workers <= 1 {
        shard_seeds
            .iter()
            .zip(&shard_trials)
            .map(|(&s, &t)| run_shard(s, t))
            .collect::<Result<_>>()?
    } else {
        thread::scope(|scope| {
            let handles: Vec<_> = shard_seeds
                .iter()
                .zip(&shard_trials)
                .map(|(&s, &t)| scope.spawn(move || run_shard(s, t)))
                .collect();
            handles.into_iter().map(|h| h.join().unwrap()).collect::<Vec<_>>()
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?
    };

    // Merge in fixed shard order.
    let mut report = SampleReport {
        n,
        seed,
        budget,
        bit_cap,
        outputs: BTreeMap::new(),
        halted: 0,
        budget_exceeded: 0,
        bits_exhausted: 0,
    };
    for shard in shards {
        for (output, count) in shard.outputs {
            *report.outputs.entry(output).or_insert(0) += count;
        }
        report.halted += shard.halted;
        report.budget_exceeded += shard.budget_exceeded;
        report.bits_exhausted += shard.bits_exhausted;
    }
    Ok(report)
}

/// Samples the full program measure: every run draws bits until it halts
/// or exhausts its step budget.
pub fn sample_programs(n: u64, seed: u64, budget: u64) -> Result<SampleReport> {
    sample_impl(n, seed, budget, None)
}

/// Samples the measure truncated at `bit_cap` consumed bits — the
/// sampling twin of a depth-`bit_cap` enumeration.
pub fn sample_programs_capped(
    n: u64,
    seed: u64,
    budget: u64,
    bit_cap: usize,
) -> Result<SampleReport> {
    sample_impl(n, seed, budget, Some(bit_cap))
}

/// CSV rendering: `output_hex,output_len,count,freq`, sorted by
/// descending count then output text.
pub fn sample_csv(report: &SampleReport) -> String {
    let mut rows: Vec<(&Bits, u64)> = report
        .outputs
        .iter()
        .map(|(output, &count)| (output, count))
        .collect();
    rows.sort_by(|(s_a, a), (s_b, b)| b.cmp(a).then_with(|| s_a.cmp(s_b)));
    let mut csv = String::from("output_hex,output_len,count,freq\n");
    for (output, count) in rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            output.to_hex(),
            output.len(),
            count,
            count as f64 / report.n as f64
        ));
    }
    csv
}
