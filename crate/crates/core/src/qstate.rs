//! Dense state vectors over the register and the unitary embedding of
//! reversible programs, plus the two genuinely quantum gates used by the
//! record demonstrations.
//!
//! A reversible step permutes basis states, so its unitary action on a
//! state vector is an index permutation of the amplitude array — no
//! matrices are ever materialized here. Hadamard and phase gates act on
//! one site at a time via the usual stride-2 butterfly.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::revmachine::{BitString, ReversibleProgram, TimeStep, MAX_WIDTH};
use crate::tol;

/// Dense vector of `2^width` complex amplitudes, indexed by the integer
/// encoding of [`BitString`].
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    width: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// The all-zero (unnormalized, empty) vector; mostly useful as an
    /// accumulator.
    pub fn null(width: usize) -> Result<Self> {
        check_width(width)?;
        Ok(Self {
            width,
            amps: vec![Complex64::new(0.0, 0.0); 1 << width],
        })
    }

    /// Computational basis state `|b⟩`.
    pub fn basis(b: BitString) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << b.width()];
        amps[b.index()] = Complex64::new(1.0, 0.0);
        Self {
            width: b.width(),
            amps,
        }
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(width: usize) -> Result<Self> {
        check_width(width)?;
        let dim = 1usize << width;
        let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self {
            width,
            amps: vec![amp; dim],
        })
    }

    /// Haar-ish random state: i.i.d. complex Gaussian amplitudes,
    /// normalized.
    pub fn random<R: Rng>(width: usize, rng: &mut R) -> Result<Self> {
        check_width(width)?;
        let dim = 1usize << width;
        let mut amps = Vec::with_capacity(dim);
        for _ in 0..dim {
            // Box-Muller: one uniform pair gives one complex standard
            // Gaussian, which is all the isotropy the normalization needs.
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = (-2.0 * u.ln()).sqrt();
            amps.push(Complex64::new(r * v.cos(), r * v.sin()));
        }
        let mut state = Self { width, amps };
        let norm = state.norm();
        assert!(norm > 0.0);
        for a in &mut state.amps {
            *a /= norm;
        }
        Ok(state)
    }

    pub fn from_amplitudes(width: usize, amps: Vec<Complex64>) -> Result<Self> {
        check_width(width)?;
        if amps.len() != 1 << width {
            return Err(Error::DimensionMismatch {
                matrix: amps.len(),
                state: 1 << width,
            });
        }
        Ok(Self { width, amps })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn norm_sq(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `⟨self|other⟩` (conjugate-linear in `self`).
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.width != other.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: other.width,
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    /// `|⟨self|other⟩|²`.
    pub fn fidelity(&self, other: &Self) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }

    /// Probability of measuring basis state `index`.
    pub fn probability(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// Applies a reversible step by permuting amplitudes:
    /// `(U|ψ⟩)[Υ(i)] = ψ[i]`.
    pub fn apply_reversible(&mut self, step: &TimeStep) {
        let mut out = vec![Complex64::new(0.0, 0.0); self.amps.len()];
        for (i, &amp) in self.amps.iter().enumerate() {
            out[step.apply_index(i)] = amp;
        }
        self.amps = out;
    }

    /// Applies a single-site quantum gate in place.
    pub fn apply_quantum(&mut self, gate: &QuantumGate) -> Result<()> {
        match *gate {
            QuantumGate::Hadamard { site } => {
                self.check_site(site)?;
                let mask = 1usize << site;
                let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & mask == 0 {
                        let lo = self.amps[i];
                        let hi = self.amps[i | mask];
                        self.amps[i] = (lo + hi) * inv_sqrt2;
                        self.amps[i | mask] = (lo - hi) * inv_sqrt2;
                    }
                }
            }
            QuantumGate::Phase { site, angle } => {
                self.check_site(site)?;
                let mask = 1usize << site;
                let phase = Complex64::from_polar(1.0, angle);
                for (i, a) in self.amps.iter_mut().enumerate() {
                    if i & mask != 0 {
                        *a *= phase;
                    }
                }
            }
        }
        Ok(())
    }

    /// Zeroes every amplitude whose basis index disagrees with `b` on the
    /// sites of `mask` — the projector `P` applied without any matrix.
    pub fn project_onto(&mut self, b: BitString, mask: u32) -> Result<()> {
        if b.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: b.width(),
            });
        }
        let mask = mask as usize & ((1 << self.width) - 1);
        let want = b.index() & mask;
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & mask != want {
                *a = Complex64::new(0.0, 0.0);
            }
        }
        Ok(())
    }

    fn check_site(&self, site: usize) -> Result<()> {
        if site >= self.width {
            return Err(Error::SiteOutOfRange {
                site,
                width: self.width,
            });
        }
        Ok(())
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

/// Single-site quantum gates available alongside the reversible set.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuantumGate {
    Hadamard { site: usize },
    Phase { site: usize, angle: f64 },
}

impl QuantumGate {
    pub fn site(&self) -> usize {
        match *self {
            QuantumGate::Hadamard { site } => site,
            QuantumGate::Phase { site, .. } => site,
        }
    }
}

/// One epoch of evolution: either a reversible (classical, permutation)
/// step or a list of quantum gates applied left to right.
#[derive(Clone, Debug, PartialEq)]
pub enum UnitaryStep {
    Reversible(TimeStep),
    Quantum(Vec<QuantumGate>),
}

impl UnitaryStep {
    /// Sites the step can touch, as a bitmask.
    pub fn footprint_mask(&self) -> u32 {
        match self {
            UnitaryStep::Reversible(step) => step.footprint_mask(),
            UnitaryStep::Quantum(gates) => gates
                .iter()
                .fold(0u32, |mask, g| mask | (1 << g.site())),
        }
    }

    pub fn footprint_sites(&self) -> Vec<usize> {
        let mask = self.footprint_mask();
        (0..MAX_WIDTH).filter(|&i| mask >> i & 1 == 1).collect()
    }
}

/// A fixed-width sequence of unitary steps; the common program type for
/// history evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumCircuit {
    width: usize,
    steps: Vec<UnitaryStep>,
}

impl QuantumCircuit {
    pub fn new(width: usize, steps: Vec<UnitaryStep>) -> Result<Self> {
        check_width(width)?;
        for step in &steps {
            match step {
                UnitaryStep::Reversible(ts) => {
                    for gate in ts.gates() {
                        for site in gate.sites() {
                            if site >= width {
                                return Err(Error::SiteOutOfRange { site, width });
                            }
                        }
                    }
                }
                UnitaryStep::Quantum(gates) => {
                    for gate in gates {
                        if gate.site() >= width {
                            return Err(Error::SiteOutOfRange {
                                site: gate.site(),
                                width,
                            });
                        }
                    }
                }
            }
        }
        Ok(Self { width, steps })
    }

    /// Wraps a reversible program as a circuit of permutation steps.
    pub fn from_reversible(program: &ReversibleProgram) -> Self {
        Self {
            width: program.width(),
            steps: program
                .steps()
                .iter()
                .cloned()
                .map(UnitaryStep::Reversible)
                .collect(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn steps(&self) -> &[UnitaryStep] {
        &self.steps
    }

    pub fn step_count(&self) -> usize {
        self.steps.len()
    }

    /// True when every step is a reversible permutation step.
    pub fn is_reversible(&self) -> bool {
        self.steps
            .iter()
            .all(|s| matches!(s, UnitaryStep::Reversible(_)))
    }

    /// The underlying reversible program, when [`Self::is_reversible`].
    pub fn as_reversible(&self) -> Option<ReversibleProgram> {
        let steps: Option<Vec<TimeStep>> = self
            .steps
            .iter()
            .map(|s| match s {
                UnitaryStep::Reversible(ts) => Some(ts.clone()),
                UnitaryStep::Quantum(_) => None,
            })
            .collect();
        ReversibleProgram::new(self.width, steps?).ok()
    }

    /// Applies step `step_index` to the state in place.
    pub fn apply_step(&self, step_index: usize, state: &mut StateVector) -> Result<()> {
        if state.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: state.width(),
            });
        }
        match &self.steps[step_index] {
            UnitaryStep::Reversible(ts) => state.apply_reversible(ts),
            UnitaryStep::Quantum(gates) => {
                for gate in gates {
                    state.apply_quantum(gate)?;
                }
            }
        }
        Ok(())
    }

    /// Runs the whole circuit on `state`.
    pub fn run(&self, state: &mut StateVector) -> Result<()> {
        if state.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: state.width(),
            });
        }
        for k in 0..self.steps.len() {
            self.apply_step(k, state)?;
        }
        Ok(())
    }
}

/// Parses a state specification: `basis:<bits>`, `uniform`, or
/// `random:<seed>`.
pub fn make_state(spec: &str, width: usize) -> Result<StateVector> {
    if let Some(bits) = spec.strip_prefix("basis:") {
        let b = BitString::parse(bits).map_err(|e| Error::StateSpec(e.to_string()))?;
        if b.width() != width {
            return Err(Error::StateSpec(format!(
                "basis state has width {}, circuit has width {width}",
                b.width()
            )));
        }
        return Ok(StateVector::basis(b));
    }
    if spec == "uniform" {
        return StateVector::uniform(width);
    }
    if let Some(seed) = spec.strip_prefix("random:") {
        let seed: u64 = seed
            .parse()
            .map_err(|_| Error::StateSpec(format!("invalid random seed `{seed}`")))?;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        return StateVector::random(width, &mut rng);
    }
    Err(Error::StateSpec(format!(
        "unrecognized state spec `{spec}` (expected basis:<bits>, uniform, or random:<seed>)"
    )))
}

/// Checks that running the circuit preserves the norm of a batch of random
/// states to within [`tol::UNITARITY`].
pub fn check_unitary<R: Rng>(circuit: &QuantumCircuit, trials: usize, rng: &mut R) -> Result<()> {
    for _ in 0..trials {
        let mut state = StateVector::random(circuit.width(), rng)?;
        circuit.run(&mut state)?;
        let deviation = (state.norm() - 1.0).abs();
        if deviation > tol::UNITARITY {
            return Err(Error::NotUnitary { deviation });
        }
    }
    Ok(())
}
