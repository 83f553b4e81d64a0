//! Projector-chain histories and the decoherence functional.
//!
//! A history assigns a register pattern to each of the `n+1` epochs of an
//! `n`-step circuit (before the first step, between steps, after the last).
//! Its branch state is built by alternating projections and unitary steps,
//!
//! ```text
//! |φ_h⟩ = P(h_{n+1}) U_n ⋯ U_1 P(h_1) |ψ⟩,
//! ```
//!
//! and the decoherence functional is the Gram matrix of branch states,
//! `D(h, h') = ⟨φ_{h'}|φ_h⟩`, restricted to pairs that agree on the final
//! epoch (the convention that keeps `D` Hermitian with real diagonal).
//! Projectors act by zeroing amplitudes; no projector matrix is ever
//! formed.
//!
//! Two granularities are supported. The *full* grain constrains every site
//! at every epoch. The *local* grain constrains, at each epoch, only the
//! sites in the footprint of the adjacent time step — epoch 1 uses the
//! footprint of step 1, and epoch `k ≥ 2` uses the footprint of step
//! `k − 1`, so each constraint sits at a boundary of the step that touches
//! those sites.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{QuantumCircuit, QuantumGate, StateVector, UnitaryStep};
use crate::revmachine::{BitString, ReversibleGate, TimeStep, MAX_WIDTH};

/// Cap on the number of history tuples an exhaustive evaluation may visit.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 1 << 22;

/// How many off-diagonal entries a report retains verbatim; maxima are
/// always streamed over every pair regardless of this cap.
const REPORT_ENTRY_CAP: usize = 64;

/// Per-epoch site masks defining which bits a history constrains.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Grain {
    width: usize,
    masks: Vec<u32>,
}

impl Grain {
    /// Every site constrained at every one of the `epochs` epochs.
    pub fn full(width: usize, epochs: usize) -> Result<Self> {
        check_width(width)?;
        let all = ((1u64 << width) - 1) as u32;
        Ok(Self {
            width,
            masks: vec![all; epochs],
        })
    }

    /// The step-footprint grain of a circuit: epoch 1 takes the footprint
    /// of step 1, epoch `k ≥ 2` the footprint of step `k − 1`.
    pub fn local(circuit: &QuantumCircuit) -> Result<Self> {
        let steps = circuit.steps();
        if steps.is_empty() {
            return Err(Error::GrainMismatch(
                "local grain needs at least one step".into(),
            ));
        }
        let mut masks = Vec::with_capacity(steps.len() + 1);
        masks.push(steps[0].footprint_mask());
        for step in steps {
            masks.push(step.footprint_mask());
        }
        Ok(Self {
            width: circuit.width(),
            masks,
        })
    }

    /// Explicit per-epoch masks.
    pub fn from_masks(width: usize, masks: Vec<u32>) -> Result<Self> {
        check_width(width)?;
        let all = ((1u64 << width) - 1) as u32;
        for &m in &masks {
            if m & !all != 0 {
                return Err(Error::GrainMismatch(format!(
                    "mask {m:#b} addresses sites beyond width {width}"
                )));
            }
        }
        Ok(Self { width, masks })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn epochs(&self) -> usize {
        self.masks.len()
    }

    pub fn mask(&self, epoch_index: usize) -> u32 {
        self.masks[epoch_index]
    }

    /// Sorted constrained sites at one epoch.
    pub fn sites(&self, epoch_index: usize) -> Vec<usize> {
        (0..self.width)
            .filter(|&i| self.masks[epoch_index] >> i & 1 == 1)
            .collect()
    }

    /// Number of distinct patterns at one epoch (`2^|sites|`).
    pub fn pattern_count(&self, epoch_index: usize) -> usize {
        1usize << self.masks[epoch_index].count_ones()
    }

    /// True when `other` constrains at least the sites this grain
    /// constrains, epoch by epoch.
    pub fn refines(&self, other: &Self) -> bool {
        self.width == other.width
            && self.masks.len() == other.masks.len()
            && self
                .masks
                .iter()
                .zip(&other.masks)
                .all(|(&fine, &coarse)| fine & coarse == coarse)
    }

    /// Compresses a full-width register value to the constrained bits of
    /// one epoch, packed in ascending site order.
    #[cfg(test)]
    fn compress(&self, epoch_index: usize, value: usize) -> usize {
        let mut out = 0usize;
        let mut bit = 0;
        let mask = self.masks[epoch_index] as usize;
        for site in 0..self.width {
            if mask >> site & 1 == 1 {
                out |= ((value >> site) & 1) << bit;
                bit += 1;
            }
        }
        out
    }

    /// Expands a packed pattern back to a full-width value with
    /// unconstrained bits zero.
    fn expand(&self, epoch_index: usize, packed: usize) -> usize {
        let mut out = 0usize;
        let mut bit = 0;
        let mask = self.masks[epoch_index] as usize;
        for site in 0..self.width {
            if mask >> site & 1 == 1 {
                out |= ((packed >> bit) & 1) << site;
                bit += 1;
            }
        }
        out
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

/// One history: a register pattern per epoch. Patterns carry the full
/// register width; only the bits selected by the grain's epoch mask are
/// meaningful.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct History {
    patterns: Vec<BitString>,
}

impl History {
    pub fn new(patterns: Vec<BitString>) -> Self {
        Self { patterns }
    }

    /// The grain-compatible history passing through a classical
    /// trajectory.
    pub fn from_trajectory(grain: &Grain, trajectory: &[BitString]) -> Result<Self> {
        if trajectory.len() != grain.epochs() {
            return Err(Error::HistoryLength {
                expected: grain.epochs(),
                got: trajectory.len(),
            });
        }
        // Zero the unconstrained bits so equal coarse histories compare equal.
        let patterns = trajectory
            .iter()
            .enumerate()
            .map(|(k, b)| {
                BitString::new(grain.width(), b.index() & grain.mask(k) as usize)
                    .expect("width already validated")
            })
            .collect();
        Ok(Self { patterns })
    }

    pub fn patterns(&self) -> &[BitString] {
        &self.patterns
    }

    pub fn epochs(&self) -> usize {
        self.patterns.len()
    }

    fn validate(&self, grain: &Grain) -> Result<()> {
        if self.patterns.len() != grain.epochs() {
            return Err(Error::HistoryLength {
                expected: grain.epochs(),
                got: self.patterns.len(),
            });
        }
        for (k, p) in self.patterns.iter().enumerate() {
            if p.width() != grain.width() {
                return Err(Error::WidthMismatch {
                    expected: grain.width(),
                    got: p.width(),
                });
            }
            let mask = grain.mask(k) as usize;
            if p.index() & !mask != 0 {
                return Err(Error::HistoryPattern {
                    epoch: k + 1,
                    expected: format!("bits confined to mask {mask:#b}"),
                    got: p.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Text rendering: epoch patterns joined by `;`, each pattern showing
    /// only its constrained sites as `site=bit` pairs, or `*` for an
    /// unconstrained epoch.
    pub fn render(&self, grain: &Grain) -> String {
        let mut parts = Vec::with_capacity(self.patterns.len());
        for (k, p) in self.patterns.iter().enumerate() {
            let sites = grain.sites(k);
            if sites.is_empty() {
                parts.push("*".to_string());
            } else {
                parts.push(
                    sites
                        .iter()
                        .map(|&s| format!("{s}={}", p.bit(s) as u8))
                        .collect::<Vec<_>>()
                        .join(","),
                );
            }
        }
        parts.join(";")
    }
}

/// Builds the branch state `P(h_{n+1}) U_n ⋯ U_1 P(h_1)|ψ⟩`.
fn branch_state(
    circuit: &QuantumCircuit,
    initial: &StateVector,
    grain: &Grain,
    history: &History,
) -> Result<StateVector> {
    let mut state = initial.clone();
    state.project_onto(history.patterns[0], grain.mask(0))?;
    for k in 0..circuit.step_count() {
        circuit.apply_step(k, &mut state)?;
        state.project_onto(history.patterns[k + 1], grain.mask(k + 1))?;
    }
    Ok(state)
}

/// Evaluates one decoherence-functional entry `D(h, h')`.
///
/// Histories that differ in their final epoch are defined to have
/// `D(h, h') = 0`; the nonzero entries are inner products of branch
/// states, `⟨φ_{h'}|φ_h⟩`.
pub fn evaluate_d(
    circuit: &QuantumCircuit,
    initial: &StateVector,
    grain: &Grain,
    h: &History,
    h_prime: &History,
) -> Result<Complex64> {
    check_compatible(circuit, initial, grain)?;
    h.validate(grain)?;
    h_prime.validate(grain)?;
    if h.patterns.last() != h_prime.patterns.last() {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let phi = branch_state(circuit, initial, grain, h)?;
    let phi_prime = branch_state(circuit, initial, grain, h_prime)?;
    phi_prime.inner(&phi)
}

fn check_compatible(
    circuit: &QuantumCircuit,
    initial: &StateVector,
    grain: &Grain,
) -> Result<()> {
    if initial.width() != circuit.width() {
        return Err(Error::WidthMismatch {
            expected: circuit.width(),
            got: initial.width(),
        });
    }
    if grain.width() != circuit.width() {
        return Err(Error::WidthMismatch {
            expected: circuit.width(),
            got: grain.width(),
        });
    }
    if grain.epochs() != circuit.step_count() + 1 {
        return Err(Error::HistoryLength {
            expected: circuit.step_count() + 1,
            got: grain.epochs(),
        });
    }
    Ok(())
}

/// How a decoherence survey walks the history space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Visit every history tuple (subject to a tuple cap).
    Exhaustive,
    /// Diagonal over classical trajectories; off-diagonal maxima estimated
    /// from random same-final pairs. Requires an all-reversible circuit.
    Sampled { pairs: usize, seed: u64 },
}

/// One retained off-diagonal entry.
#[derive(Clone, Debug, Serialize)]
pub struct OffDiagEntry {
    pub h: String,
    pub h_prime: String,
    pub re: f64,
    pub im: f64,
}

/// One diagonal entry: a history and its probability.
#[derive(Clone, Debug, Serialize)]
pub struct DiagEntry {
    pub history: String,
    pub p: f64,
}

/// Survey of the decoherence functional over a grain.
#[derive(Clone, Debug, Serialize)]
pub struct DecoherenceReport {
    pub width: usize,
    pub epochs: usize,
    pub grain: Vec<Vec<usize>>,
    pub mode: String,
    /// Histories with nonzero probability, sorted by descending `p` then
    /// by history text.
    pub diag: Vec<DiagEntry>,
    pub sum_diag: f64,
    /// Largest `|D(h, h')|` over distinct same-final pairs.
    pub max_abs_offdiag: f64,
    /// Largest `|Re D(h, h')|` over the same pairs — the weak-decoherence
    /// statistic.
    pub max_re_offdiag: f64,
    pub pairs_evaluated: u64,
    /// Up to a fixed number of the largest-|Re| off-diagonal entries.
    pub offdiag_entries: Vec<OffDiagEntry>,
}

impl DecoherenceReport {
    /// Errors unless every off-diagonal real part is below `tolerance`.
    pub fn require_weak_decoherence(&self, tolerance: f64) -> Result<()> {
        if self.max_re_offdiag > tolerance {
            return Err(Error::NotDecoherent {
                max_re_offdiag: self.max_re_offdiag,
                tolerance,
            });
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Surveys `D` over all histories of `grain` (or a sampled subset) and
/// reports diagonal probabilities and off-diagonal maxima.
pub fn build_d(
    circuit: &QuantumCircuit,
    initial: &StateVector,
    grain: &Grain,
    mode: EvalMode,
) -> Result<DecoherenceReport> {
    check_compatible(circuit, initial, grain)?;
    match mode {
        EvalMode::Exhaustive => build_d_exhaustive(circuit, initial, grain, DEFAULT_EXHAUSTIVE_CAP),
        EvalMode::Sampled { pairs, seed } => build_d_sampled(circuit, initial, grain, pairs, seed),
    }
}

/// Exhaustive survey with an explicit cap on the number of history tuples.
pub fn build_d_exhaustive(
    circuit: &QuantumCircuit,
    initial: &StateVector,
    grain: &Grain,
    tuple_cap: usize,
) -> Result<DecoherenceReport> {
    check_compatible(circuit, initial, grain)?;
    let tuples: u128 = (0..grain.epochs())
        .map(|k| grain.pattern_count(k) as u128)
        .product();
    if tuples > tuple_cap as u128 {
        return Err(Error::ExhaustiveCapExceeded {
            tuples,
            cap: tuple_cap,
        });
    }

    // Depth-first over epochs, sharing projection/evolution prefixes.
    // Branches that hit an all-zero state are dropped: every deeper
    // history has a zero branch state and contributes nothing to either
    // the diagonal or any off-diagonal entry.
    let mut branches: Vec<(History, StateVector)> = Vec::new();
    collect_branches(
        circuit,
        grain,
        0,
        initial.clone(),
        &mut Vec::new(),
        &mut branches,
    );

    let mut diag: Vec<DiagEntry> = Vec::new();
    let mut sum_diag = 0.0;
    let mut max_abs = 0.0f64;
    let mut max_re = 0.0f64;
    let mut pairs: u64 = 0;
    let mut kept: Vec<OffDiagEntry> = Vec::new();

    // Group by final pattern: cross-final entries vanish by convention.
    let mut by_final: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (idx, (h, _)) in branches.iter().enumerate() {
        by_final
            .entry(h.patterns.last().unwrap().index())
            .or_default()
            .push(idx);
    }

    for (h, phi) in &branches {
        let p = phi.norm_sq();
        sum_diag += p;
        if p > 0.0 {
            diag.push(DiagEntry {
                history: h.render(grain),
                p,
            });
        }
    }

    for group in by_final.values() {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[a + 1..] {
                let (hi, phi_i) = &branches[i];
                let (hj, phi_j) = &branches[j];
                let d = phi_j.inner(phi_i)?;
                pairs += 1;
                max_abs = max_abs.max(d.norm());
                max_re = max_re.max(d.re.abs());
                if d.norm() > 0.0 {
                    kept.push(OffDiagEntry {
                        h: hi.render(grain),
                        h_prime: hj.render(grain),
                        re: d.re,
                        im: d.im,
                    });
                }
            }
        }
    }

    sort_diag(&mut diag);
    trim_offdiag(&mut kept);

    Ok(DecoherenceReport {
        width: circuit.width(),
        epochs: grain.epochs(),
        grain: (0..grain.epochs()).map(|k| grain.sites(k)).collect(),
        mode: "exhaustive".into(),
        diag,
        sum_diag,
        max_abs_offdiag: max_abs,
        max_re_offdiag: max_re,
        pairs_evaluated: pairs,
        offdiag_entries: kept,
    })
}

fn collect_branches(
    circuit: &QuantumCircuit,
    grain: &Grain,
    epoch: usize,
    state: StateVector,
    prefix: &mut Vec<BitString>,
    out: &mut Vec<(History, StateVector)>,
) {
    if epoch == grain.epochs() {
        out.push((History::new(prefix.clone()), state));
        return;
    }
    for packed in 0..grain.pattern_count(epoch) {
        let value = grain.expand(epoch, packed);
        let pattern = BitString::new(grain.width(), value).expect("width validated");
        let mut branch = state.clone();
        branch
            .project_onto(pattern, grain.mask(epoch))
            .expect("compatible widths");
        if branch.norm_sq() == 0.0 {
            continue;
        }
        if epoch < grain.epochs() - 1 {
            circuit
                .apply_step(epoch, &mut branch)
                .expect("compatible widths");
        }
        prefix.push(pattern);
        collect_branches(circuit, grain, epoch + 1, branch, prefix, out);
        prefix.pop();
    }
}

/// Sampled survey: exact diagonal over grain-distinct classical
/// trajectories, off-diagonal maxima from random same-final history pairs.
///
/// The diagonal walk needs classical trajectories, so the circuit must be
/// all-reversible; quantum steps make the trajectory notion meaningless
/// and are rejected.
pub fn build_d_sampled(
    circuit: &QuantumCircuit,
    initial: &StateVector,
    grain: &Grain,
    pairs: usize,
    seed: u64,
) -> Result<DecoherenceReport> {
    use rand::SeedableRng;

    check_compatible(circuit, initial, grain)?;
    let program = circuit
        .as_reversible()
        .ok_or(Error::SampledNeedsReversible)?;

    // Diagonal: group basis states by the coarse history of their
    // trajectory. Probabilities add because distinct trajectories sharing
    // a coarse history... cannot happen on the full grain, and on coarser
    // grains the branch state is a sum of orthogonal basis branches, so
    // ‖φ‖² is still the sum of the constituent |ψ_b|².
    let mut classes: BTreeMap<History, f64> = BTreeMap::new();
    for b in 0..initial.dim() {
        let p = initial.probability(b);
        if p == 0.0 {
            continue;
        }
        let start = BitString::new(circuit.width(), b)?;
        let trajectory = program.run_trajectory(start)?;
        let coarse = History::from_trajectory(grain, &trajectory)?;
        *classes.entry(coarse).or_insert(0.0) += p;
    }

    let mut diag: Vec<DiagEntry> = Vec::new();
    let mut sum_diag = 0.0;
    let trajectories: Vec<&History> = classes.keys().collect();
    for (h, &p) in &classes {
        sum_diag += p;
        diag.push(DiagEntry {
            history: h.render(grain),
            p,
        });
    }

    // Off-diagonals: draw random same-final pairs. Drawing a trajectory
    // history for one side exercises the physically relevant entries;
    // the other side is a uniformly random grain pattern with the same
    // final epoch.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut max_abs = 0.0f64;
    let mut max_re = 0.0f64;
    let mut kept: Vec<OffDiagEntry> = Vec::new();
    let mut evaluated: u64 = 0;

    for _ in 0..pairs {
        let h = if !trajectories.is_empty() && rng.gen_bool(0.5) {
            (*trajectories[rng.gen_range(0..trajectories.len())]).clone()
        } else {
            random_history(grain, &mut rng)
        };
        let mut h_prime = random_history_with_final(grain, *h.patterns.last().unwrap(), &mut rng);
        if h_prime == h {
            // Nudge one non-final epoch if possible; identical pairs are
            // diagonal entries, not off-diagonal samples.
            if !nudge(&mut h_prime, grain, &mut rng) {
                continue;
            }
        }
        let d = evaluate_d(circuit, initial, grain, &h, &h_prime)?;
        evaluated += 1;
        max_abs = max_abs.max(d.norm());
        max_re = max_re.max(d.re.abs());
        if d.norm() > 0.0 {
            kept.push(OffDiagEntry {
                h: h.render(grain),
                h_prime: h_prime.render(grain),
                re: d.re,
                im: d.im,
            });
        }
    }

    sort_diag(&mut diag);
    trim_offdiag(&mut kept);

    Ok(DecoherenceReport {
        width: circuit.width(),
        epochs: grain.epochs(),
        grain: (0..grain.epochs()).map(|k| grain.sites(k)).collect(),
        mode: "sampled".into(),
        diag,
        sum_diag,
        max_abs_offdiag: max_abs,
        max_re_offdiag: max_re,
        pairs_evaluated: evaluated,
        offdiag_entries: kept,
    })
}

fn random_history<R: Rng>(grain: &Grain, rng: &mut R) -> History {
    let patterns = (0..grain.epochs())
        .map(|k| {
            let packed = rng.gen_range(0..grain.pattern_count(k));
            BitString::new(grain.width(), grain.expand(k, packed)).expect("width validated")
        })
        .collect();
    History::new(patterns)
}

fn random_history_with_final<R: Rng>(grain: &Grain, final_pattern: BitString, rng: &mut R) -> History {
    let mut h = random_history(grain, rng);
    *h.patterns.last_mut().unwrap() = final_pattern;
    h
}

/// Re-randomizes one non-final epoch with more than one pattern; returns
/// false when no such epoch exists.
fn nudge<R: Rng>(h: &mut History, grain: &Grain, rng: &mut R) -> bool {
    let candidates: Vec<usize> = (0..grain.epochs() - 1)
        .filter(|&k| grain.pattern_count(k) > 1)
        .collect();
    if candidates.is_empty() {
        return false;
    }
    let k = candidates[rng.gen_range(0..candidates.len())];
    let old = h.patterns[k];
    loop {
        let packed = rng.gen_range(0..grain.pattern_count(k));
        let candidate = BitString::new(grain.width(), grain.expand(k, packed)).unwrap();
        if candidate != old {
            h.patterns[k] = candidate;
            return true;
        }
    }
}

fn sort_diag(diag: &mut [DiagEntry]) {
    diag.sort_by(|a, b| {
        b.p.partial_cmp(&a.p)
            .unwrap()
            .then_with(|| a.history.cmp(&b.history))
    });
}

fn trim_offdiag(kept: &mut Vec<OffDiagEntry>) {
    kept.sort_by(|a, b| {
        b.re.abs()
            .partial_cmp(&a.re.abs())
            .unwrap()
            .then_with(|| b.im.abs().partial_cmp(&a.im.abs()).unwrap())
            .then_with(|| (a.h.as_str(), a.h_prime.as_str()).cmp(&(b.h.as_str(), b.h_prime.as_str())))
    });
    kept.truncate(REPORT_ENTRY_CAP);
}

/// Checks that coarse-grain probabilities are the sums of their fine-grain
/// refinements, returning the largest absolute deviation.
///
/// `fine` must refine `coarse` (same epochs, superset sites per epoch).
/// Both reports must come from exhaustive surveys of the same circuit and
/// initial state. Probability sums agree only when the fine grain
/// decoheres, so callers should check weak decoherence first.
pub fn refinement_consistency(
    coarse_grain: &Grain,
    coarse: &DecoherenceReport,
    fine_grain: &Grain,
    fine: &DecoherenceReport,
) -> Result<f64> {
    if !fine_grain.refines(coarse_grain) {
        return Err(Error::GrainMismatch(
            "fine grain does not refine the coarse grain".into(),
        ));
    }
    // Parse rendered histories back into per-epoch packed patterns via the
    // site lists each report carries. Rebuild coarse keys from fine ones by
    // masking.
    let coarse_index: BTreeMap<&str, f64> = coarse
        .diag
        .iter()
        .map(|e| (e.history.as_str(), e.p))
        .collect();

    let mut aggregated: BTreeMap<String, f64> = BTreeMap::new();
    for entry in &fine.diag {
        let fine_h = parse_rendered(&entry.history, fine_grain)?;
        let coarse_patterns = fine_h
            .patterns
            .iter()
            .enumerate()
            .map(|(k, p)| {
                BitString::new(coarse_grain.width(), p.index() & coarse_grain.mask(k) as usize)
                    .expect("width validated")
            })
            .collect();
        let coarse_h = History::new(coarse_patterns);
        *aggregated.entry(coarse_h.render(coarse_grain)).or_insert(0.0) += entry.p;
    }

    let mut worst = 0.0f64;
    for (history, p_sum) in &aggregated {
        let p_coarse = coarse_index.get(history.as_str()).copied().unwrap_or(0.0);
        worst = worst.max((p_sum - p_coarse).abs());
    }
    for (history, p_coarse) in &coarse_index {
        if !aggregated.contains_key(*history) {
            worst = worst.max(p_coarse.abs());
        }
    }
    Ok(worst)
}

/// Parses the `render` format back into a history.
fn parse_rendered(text: &str, grain: &Grain) -> Result<History> {
    let parts: Vec<&str> = text.split(';').collect();
    if parts.len() != grain.epochs() {
        return Err(Error::HistoryLength {
            expected: grain.epochs(),
            got: parts.len(),
        });
    }
    let mut patterns = Vec::with_capacity(parts.len());
    for part in &parts {
        let mut value = 0usize;
        if *part != "*" {
            for assignment in part.split(',') {
                let (site, bit) = assignment.split_once('=').ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("bad history assignment `{assignment}`"),
                })?;
                let site: usize = site.parse().map_err(|_| Error::Parse {
                    line: 0,
                    message: format!("bad site in `{assignment}`"),
                })?;
                if bit == "1" {
                    value |= 1 << site;
                }
            }
        }
        patterns.push(BitString::new(grain.width(), value)?);
    }
    let h = History::new(patterns);
    h.validate(grain)?;
    Ok(h)
}

/// The coherent-superposition demonstration: two Hadamards on one site.
///
/// Returns the circuit (width 1, two quantum steps) and the basis start
/// state `|0⟩`. On the full grain the two intermediate branches interfere:
/// the off-diagonal entries have real part `±1/4`, so the full grain does
/// not decohere.
pub fn no_record_demo() -> (QuantumCircuit, StateVector) {
    let circuit = QuantumCircuit::new(
        1,
        vec![
            UnitaryStep::Quantum(vec![QuantumGate::Hadamard { site: 0 }]),
            UnitaryStep::Quantum(vec![QuantumGate::Hadamard { site: 0 }]),
        ],
    )
    .expect("static circuit is valid");
    (circuit, StateVector::basis(BitString::zeros(1).unwrap()))
}

/// The record demonstration: a Hadamard followed by a copy onto a second
/// site.
///
/// Returns the circuit (width 2: Hadamard on site 0, then CNOT 0→1), the
/// start state `|00⟩`, and the grain that reads site 0 at the two early
/// epochs and both sites at the end. The copy records the branch, so every
/// off-diagonal entry is exactly zero.
pub fn record_demo() -> (QuantumCircuit, StateVector, Grain) {
    let copy = TimeStep::new(
        2,
        vec![ReversibleGate::Cnot {
            control: 0,
            target: 1,
        }],
    )
    .expect("static gate is valid");
    let circuit = QuantumCircuit::new(
        2,
        vec![
            UnitaryStep::Quantum(vec![QuantumGate::Hadamard { site: 0 }]),
            UnitaryStep::Reversible(copy),
        ],
    )
    .expect("static circuit is valid");
    let grain = Grain::from_masks(2, vec![0b01, 0b01, 0b11]).expect("static grain is valid");
    (
        circuit,
        StateVector::basis(BitString::zeros(2).unwrap()),
        grain,
    )
}
