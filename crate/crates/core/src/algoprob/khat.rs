//! Program-length complexity bounds and the computed-vs-coin advantage.
//!
//! True minimal program length is uncomputable, so everything here is an
//! upper bound `K̂(s)`: the shortest program *found* that verifiably
//! outputs `s` — by exhaustive enumeration up to a depth cap, or among
//! explicitly supplied witness programs. From the bound follows the
//! measure bound `P(s) ≥ 2^{-K̂(s)}`, and from that the advantage of a
//! randomly programmed computer over `|s|` fair coin flips: the coin hits
//! `s` with probability `2^{-|s|}`, the computer with at least
//! `2^{-K̂(s)}`, a ratio of `2^{|s|−K̂(s)}` that grows without bound on
//! compressible families.

use serde::Serialize;

use crate::error::Result;

use super::bits::Bits;
use super::enumerate::{enumerate_programs, EnsembleReport};
use super::witness::verify_witness;

/// Where the winning bound came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KhatSource {
    Enumerated,
    Witness,
}

/// An upper bound on the program-length complexity of one target.
#[derive(Clone, Debug, Serialize)]
pub struct ComplexityEstimate {
    /// Target output, as `0`/`1` text.
    pub target: String,
    pub target_len: usize,
    /// Shortest verified program length in bits; `None` when nothing up
    /// to `l_max` (nor any witness) produces the target.
    pub khat: Option<usize>,
    pub source: Option<KhatSource>,
    pub l_max: usize,
    /// Exact enumerated mass of the target at `l_max` (zero when no
    /// enumerated program produces it).
    pub mass: f64,
    /// Diagnostics for witnesses that failed verification.
    pub rejected_witnesses: Vec<String>,
}

/// Computes `K̂(target)` against an existing enumeration plus optional
/// witness programs. Witnesses that fail verification are reported in the
/// estimate, not silently dropped.
pub fn khat_with_report(
    target: &Bits,
    report: &EnsembleReport,
    witnesses: &[Bits],
) -> ComplexityEstimate {
    let enumerated = report.shortest(target);

    let mut best_witness: Option<usize> = None;
    let mut rejected = Vec::new();
    for (index, witness) in witnesses.iter().enumerate() {
        match verify_witness(witness, target, report.budget) {
            Ok(consumed) => {
                best_witness = Some(best_witness.map_or(consumed, |b| b.min(consumed)));
            }
            Err(err) => rejected.push(format!("witness {}: {err}", index + 1)),
        }
    }

    let (khat, source) = match (enumerated, best_witness) {
        (Some(e), Some(w)) if w < e => (Some(w), Some(KhatSource::Witness)),
        (Some(e), _) => (Some(e), Some(KhatSource::Enumerated)),
        (None, Some(w)) => (Some(w), Some(KhatSource::Witness)),
        (None, None) => (None, None),
    };

    ComplexityEstimate {
        target: target.to_string(),
        target_len: target.len(),
        khat,
        source,
        l_max: report.l_max,
        mass: report.mass(target),
        rejected_witnesses: rejected,
    }
}

/// Enumerates to `l_max`, then bounds as [`khat_with_report`].
pub fn khat(
    target: &Bits,
    l_max: usize,
    budget: u64,
    witnesses: &[Bits],
) -> Result<ComplexityEstimate> {
    let report = enumerate_programs(l_max, budget)?;
    Ok(khat_with_report(target, &report, witnesses))
}

/// The raw advantage ratio `P(s) · 2^{|s|}` from an enumeration, with a
/// flag for whether the target was produced at all at this depth. A
/// target never produced scores ratio 0 — the honest answer at the cap,
/// not a claim about the true measure.
pub fn advantage_ratio(target: &Bits, report: &EnsembleReport) -> (f64, bool) {
    let mass = report.mass(target);
    ((target.len() as f64).exp2() * mass, mass > 0.0)
}

/// Advantage of the randomly programmed computer over coin flipping for
/// one target, combining the enumerated ratio with the witness-backed
/// lower bound `2^{|s|−K̂}`.
#[derive(Clone, Debug, Serialize)]
pub struct AdvantageEstimate {
    pub target: String,
    pub target_len: usize,
    /// Exact enumerated mass at `l_max` (may be zero for long targets).
    pub mass: f64,
    /// `mass · 2^{|s|}`.
    pub enumerated_ratio: f64,
    /// Whether any enumerated program produced the target.
    pub produced: bool,
    pub khat: Option<usize>,
    /// `|s| − K̂`: the base-2 log of the guaranteed ratio.
    pub bound_log2: Option<f64>,
    /// `2^{|s|−K̂}`, the guaranteed ratio itself.
    pub bound_ratio: Option<f64>,
}

/// Combines an enumeration and a complexity estimate into the full
/// advantage picture for `target`.
pub fn advantage(
    target: &Bits,
    report: &EnsembleReport,
    estimate: &ComplexityEstimate,
) -> AdvantageEstimate {
    let (enumerated_ratio, produced) = advantage_ratio(target, report);
    let bound_log2 = estimate.khat.map(|k| target.len() as f64 - k as f64);
    AdvantageEstimate {
        target: target.to_string(),
        target_len: target.len(),
        mass: report.mass(target),
        enumerated_ratio,
        produced,
        khat: estimate.khat,
        bound_log2,
        bound_ratio: bound_log2.map(f64::exp2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algoprob::machine::{DEFAULT_BUDGET, DEFAULT_L_MAX};
    use crate::algoprob::witness::{witness_alternating, witness_zeros};

    fn bits(text: &str) -> Bits {
        text.parse().unwrap()
    }

    #[test]
    fn empty_string_costs_one_opcode() {
        let estimate = khat(&Bits::new(), 6, DEFAULT_BUDGET, &[]).unwrap();
        assert_eq!(estimate.khat, Some(3));
        assert_eq!(estimate.source, Some(KhatSource::Enumerated));
        assert!(estimate.mass >= 0.125);
    }

    #[test]
    fn single_zero_costs_two_opcodes() {
        let estimate = khat(&bits("0"), 9, DEFAULT_BUDGET, &[]).unwrap();
        assert_eq!(estimate.khat, Some(6));
        assert_eq!(estimate.source, Some(KhatSource::Enumerated));
    }

    #[test]
    fn unknown_above_cap_when_nothing_produces() {
        // 0^64 has no producer within 12 bits and no witness offered.
        let target = Bits::repeated(false, 64);
        let estimate = khat(&target, 12, DEFAULT_BUDGET, &[]).unwrap();
        assert_eq!(estimate.khat, None);
        assert_eq!(estimate.source, None);
        assert_eq!(estimate.mass, 0.0);
    }

    #[test]
    fn witness_beats_enumeration_only_when_shorter() {
        let report = enumerate_programs(9, DEFAULT_BUDGET).unwrap();
        // The zeros(1) witness emits "0" in 20 bits; enumeration knows a
        // 6-bit producer, which wins.
        let witness = witness_zeros(1);
        let estimate = khat_with_report(&bits("0"), &report, &[witness]);
        assert_eq!(estimate.khat, Some(6));
        assert_eq!(estimate.source, Some(KhatSource::Enumerated));
        assert!(estimate.rejected_witnesses.is_empty());
    }

    #[test]
    fn witness_supplies_bound_beyond_the_cap() {
        let report = enumerate_programs(12, DEFAULT_BUDGET).unwrap();
        let target = Bits::repeated(false, 64);
        let witness = witness_zeros(64);
        let estimate = khat_with_report(&target, &report, std::slice::from_ref(&witness));
        assert_eq!(estimate.khat, Some(witness.len()));
        assert_eq!(estimate.source, Some(KhatSource::Witness));
        assert!(estimate.khat.unwrap() < 64);
    }

    #[test]
    fn failed_witness_is_reported_with_diagnostic() {
        let report = enumerate_programs(6, DEFAULT_BUDGET).unwrap();
        // This witness emits one zero, not the empty string.
        let estimate = khat_with_report(&Bits::new(), &report, &[bits("001000")]);
        assert_eq!(estimate.khat, Some(3));
        assert_eq!(estimate.rejected_witnesses.len(), 1);
        assert!(estimate.rejected_witnesses[0].contains("witness 1"));
    }

    #[test]
    fn enumerated_lower_bound_holds_for_khat() {
        let report = enumerate_programs(DEFAULT_L_MAX.min(14), DEFAULT_BUDGET).unwrap();
        for target in ["", "0", "1", "00", "01"] {
            let estimate = khat_with_report(&bits(target), &report, &[]);
            let k = estimate.khat.unwrap() as f64;
            assert!(estimate.mass >= k.exp2().recip() - 1e-15, "target {target}");
        }
    }

    #[test]
    fn advantage_of_empty_string_is_its_mass() {
        let report = enumerate_programs(9, DEFAULT_BUDGET).unwrap();
        let (ratio, produced) = advantage_ratio(&Bits::new(), &report);
        assert!(produced);
        assert_eq!(ratio, report.mass(&Bits::new()));
    }

    #[test]
    fn advantage_of_single_zero_doubles_its_mass() {
        let report = enumerate_programs(9, DEFAULT_BUDGET).unwrap();
        let (ratio, produced) = advantage_ratio(&bits("0"), &report);
        assert!(produced);
        assert!((ratio - 2.0 * report.mass(&bits("0"))).abs() < 1e-15);
        // The computer clears the coin baseline for "0".
        assert!(ratio > 0.05);
    }

    #[test]
    fn unproduced_target_scores_zero_with_flag() {
        let report = enumerate_programs(9, DEFAULT_BUDGET).unwrap();
        let (ratio, produced) = advantage_ratio(&Bits::repeated(false, 64), &report);
        assert_eq!(ratio, 0.0);
        assert!(!produced);
    }

    #[test]
    fn witnessed_advantage_bound_exceeds_one() {
        let report = enumerate_programs(12, DEFAULT_BUDGET).unwrap();
        let target = Bits::repeated(false, 64);
        let estimate = khat_with_report(&target, &report, &[witness_zeros(64)]);
        let adv = advantage(&target, &report, &estimate);
        assert!(!adv.produced);
        assert_eq!(adv.enumerated_ratio, 0.0);
        let bound = adv.bound_ratio.unwrap();
        let log2 = adv.bound_log2.unwrap();
        assert!(bound > 1.0);
        assert_eq!(log2, 64.0 - estimate.khat.unwrap() as f64);
        assert_eq!(bound, log2.exp2());
    }

    #[test]
    fn alternating_family_also_beats_coins() {
        let report = enumerate_programs(12, DEFAULT_BUDGET).unwrap();
        let target: Bits = (0..64).map(|i| i % 2 == 1).collect();
        let witness = witness_alternating(32);
        let estimate = khat_with_report(&target, &report, &[witness]);
        let adv = advantage(&target, &report, &estimate);
        assert!(adv.bound_log2.unwrap() > 20.0);
    }
}
