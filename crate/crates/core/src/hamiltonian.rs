//! Dense unitaries, the Hermitian generator `H = U + U†`, continuous-time
//! evolution, principal square roots, and operator support.
//!
//! Everything here works with explicit `2^width × 2^width` matrices, so it
//! is the one corner of the crate with a deliberately tight width cap.
//! The central construction: for any unitary `U` with eigenvalues
//! `e^{iθ}`, the operator `H = U + U†` is Hermitian, commutes with `U`,
//! shares its eigenvectors, and has eigenvalues `2 cos θ`. Functions of
//! `U` (continuous evolution `e^{−iHt}`, fractional powers `U^{1/2}`) are
//! evaluated on the shared eigenbasis.
//!
//! The eigenbasis itself comes from a LAPACK-free route: the commuting
//! Hermitian pair `C = (U + U†)/2`, `S = (U − U†)/(2i)` is diagonalized by
//! first solving `C` (real symmetric solver on its real and imaginary
//! parts lifted to a Hermitian solver), then refining each degenerate
//! `C`-eigenspace against the projected `S`. The eigenphase is
//! `θ = atan2(s, c)` per joint eigenvector.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qstate::{QuantumCircuit, QuantumGate, StateVector, UnitaryStep};
use crate::revmachine::TimeStep;
use crate::tol;

/// Width cap for dense-matrix work: `2^10 × 2^10` complex entries is the
/// largest footprint this module will allocate.
pub const MAX_DENSE_WIDTH: usize = 10;

type CMatrix = DMatrix<Complex64>;

/// A dense unitary over a `width`-site register.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseUnitary {
    width: usize,
    matrix: CMatrix,
}

impl DenseUnitary {
    pub fn identity(width: usize) -> Result<Self> {
        check_dense_width(width)?;
        let dim = 1usize << width;
        Ok(Self {
            width,
            matrix: CMatrix::identity(dim, dim),
        })
    }

    /// Wraps an explicit matrix, checking unitarity `‖U†U − 1‖ ≤ tol`.
    pub fn from_matrix(width: usize, matrix: CMatrix) -> Result<Self> {
        check_dense_width(width)?;
        let dim = 1usize << width;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                matrix: matrix.nrows(),
                state: dim,
            });
        }
        let gram = matrix.adjoint() * &matrix;
        let deviation = (&gram - CMatrix::identity(dim, dim)).norm();
        if deviation > tol::UNITARITY {
            return Err(Error::NotUnitary { deviation });
        }
        Ok(Self { width, matrix })
    }

    /// The permutation matrix of one reversible step.
    pub fn from_step(width: usize, step: &TimeStep) -> Result<Self> {
        check_dense_width(width)?;
        let dim = 1usize << width;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            m[(step.apply_index(col), col)] = Complex64::new(1.0, 0.0);
        }
        Ok(Self { width, matrix: m })
    }

    /// The product unitary `U = U_n ⋯ U_1` of a whole circuit (step 1
    /// applied first).
    pub fn from_circuit(circuit: &QuantumCircuit) -> Result<Self> {
        check_dense_width(circuit.width())?;
        let dim = 1usize << circuit.width();
        let mut m = CMatrix::identity(dim, dim);
        for step in circuit.steps() {
            let step_matrix = match step {
                UnitaryStep::Reversible(ts) => Self::from_step(circuit.width(), ts)?.matrix,
                UnitaryStep::Quantum(gates) => {
                    let mut qm = CMatrix::identity(dim, dim);
                    for gate in gates {
                        qm = gate_matrix(circuit.width(), gate)? * qm;
                    }
                    qm
                }
            };
            m = step_matrix * m;
        }
        Ok(Self {
            width: circuit.width(),
            matrix: m,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            width: self.width,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Applies the unitary to a state vector.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.width() != self.width {
            return Err(Error::WidthMismatch {
                expected: self.width,
                got: state.width(),
            });
        }
        let v = DVector::from_column_slice(state.amplitudes());
        let out = &self.matrix * v;
        StateVector::from_amplitudes(self.width, out.iter().copied().collect())
    }
}

fn check_dense_width(width: usize) -> Result<()> {
    if width == 0 {
        return Err(Error::WidthOutOfRange {
            width,
            max: MAX_DENSE_WIDTH,
        });
    }
    if width > MAX_DENSE_WIDTH {
        return Err(Error::DenseCapExceeded {
            width,
            cap: MAX_DENSE_WIDTH,
        });
    }
    Ok(())
}

/// Dense matrix of a single-site quantum gate on a `width`-site register.
fn gate_matrix(width: usize, gate: &QuantumGate) -> Result<CMatrix> {
    let dim = 1usize << width;
    let site = gate.site();
    if site >= width {
        return Err(Error::SiteOutOfRange { site, width });
    }
    let mask = 1usize << site;
    let mut m = CMatrix::zeros(dim, dim);
    match *gate {
        QuantumGate::Hadamard { .. } => {
            let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for col in 0..dim {
                if col & mask == 0 {
                    m[(col, col)] = r;
                    m[(col | mask, col)] = r;
                } else {
                    m[(col & !mask, col)] = r;
                    m[(col, col)] = -r;
                }
            }
        }
        QuantumGate::Phase { angle, .. } => {
            let phase = Complex64::from_polar(1.0, angle);
            for col in 0..dim {
                m[(col, col)] = if col & mask != 0 {
                    phase
                } else {
                    Complex64::new(1.0, 0.0)
                };
            }
        }
    }
    Ok(m)
}

/// Eigendecomposition of a unitary: columns of `vectors` are orthonormal
/// eigenvectors, `phases[k] ∈ (−π, π]` the matching eigenphases.
#[derive(Clone, Debug)]
pub struct UnitaryEigen {
    pub phases: Vec<f64>,
    pub vectors: CMatrix,
}

/// Diagonalizes a unitary via the commuting Hermitian pair
/// `C = (U + U†)/2`, `S = (U − U†)/(2i)`.
pub fn eigendecompose(u: &DenseUnitary) -> Result<UnitaryEigen> {
    let dim = u.dim();
    let c = (&u.matrix + u.matrix.adjoint()).scale(0.5);
    let s = (&u.matrix - u.matrix.adjoint()) * Complex64::new(0.0, -0.5);

    // Hermitian eigensolve of C through the real symmetric embedding
    // [[Re C, −Im C], [Im C, Re C]]: its spectrum is that of C doubled,
    // and each C-eigenvector (x + iy) appears as (x, y) and (−y, x).
    let (c_values, c_vectors) = hermitian_eigen(&c)?;

    // Group C-eigenvectors into (near-)degenerate clusters, then refine
    // each cluster by diagonalizing the projected S, which commutes with C
    // and therefore acts within each cluster.
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| c_values[a].partial_cmp(&c_values[b]).unwrap());

    let mut phases = vec![0.0f64; dim];
    let mut vectors = CMatrix::zeros(dim, dim);
    let mut written = 0usize;

    let mut start = 0usize;
    while start < dim {
        let mut end = start + 1;
        while end < dim && (c_values[order[end]] - c_values[order[end - 1]]).abs() < 1e-8 {
            end += 1;
        }
        let cluster: Vec<usize> = order[start..end].to_vec();
        let k = cluster.len();

        // Basis of the cluster subspace as a dim×k matrix.
        let mut basis = CMatrix::zeros(dim, k);
        for (j, &idx) in cluster.iter().enumerate() {
            basis.set_column(j, &c_vectors.column(idx).into_owned());
        }

        // S restricted to the cluster: Hermitian k×k.
        let s_sub = basis.adjoint() * &s * &basis;
        let (s_values, s_vectors) = hermitian_eigen(&s_sub)?;
        let refined = &basis * &s_vectors;

        let c_here = c_values[cluster[0]];
        for (j, s_value) in s_values.iter().enumerate().take(k) {
            let theta = s_value.atan2(c_here);
            let column = refined.column(j).into_owned();
            phases[written] = normalize_phase(theta);
            vectors.set_column(written, &column);
            written += 1;
        }
        start = end;
    }
    debug_assert_eq!(written, dim);

    // Residual check: U v = e^{iθ} v for every pair.
    let mut worst = 0.0f64;
    for (k, &phase) in phases.iter().enumerate() {
        let v = vectors.column(k).into_owned();
        let lhs = &u.matrix * &v;
        let rhs = v * Complex64::from_polar(1.0, phase);
        worst = worst.max((lhs - rhs).norm());
    }
    if worst > 1e-7 {
        return Err(Error::NotUnitary { deviation: worst });
    }

    Ok(UnitaryEigen { phases, vectors })
}

/// Maps θ into `(−π, π]`, snapping the `−π` boundary (reached through
/// rounding dust in `atan2`) to `+π` so the principal branch is stable.
fn normalize_phase(theta: f64) -> f64 {
    if theta <= -std::f64::consts::PI + 1e-9 {
        std::f64::consts::PI
    } else {
        theta
    }
}

/// Hermitian eigensolve via the real symmetric embedding. Returns
/// `(values, vectors)` with orthonormal complex eigenvector columns.
fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    let mut embed = DMatrix::<f64>::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            embed[(i, j)] = z.re;
            embed[(i, j + n)] = -z.im;
            embed[(i + n, j)] = z.im;
            embed[(i + n, j + n)] = z.re;
        }
    }
    let eig = nalgebra::SymmetricEigen::new(embed);

    // Each complex eigenpair appears twice ((x, y) and (−y, x), same
    // value). Walk eigenvalues in ascending order, lift each vector back
    // to ℂⁿ, and keep the ones independent of what's already kept via
    // Gram–Schmidt.
    let mut order: Vec<usize> = (0..2 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());

    let mut values: Vec<f64> = Vec::with_capacity(n);
    let mut vectors = CMatrix::zeros(n, n);
    let mut kept = 0usize;
    for &idx in &order {
        if kept == n {
            break;
        }
        let col = eig.eigenvectors.column(idx);
        let mut v = DVector::<Complex64>::zeros(n);
        for i in 0..n {
            v[i] = Complex64::new(col[i], col[i + n]);
        }
        // Orthogonalize against previously kept vectors of (numerically)
        // equal eigenvalue; duplicates project to ~0 and are skipped.
        for j in 0..kept {
            if (values[j] - eig.eigenvalues[idx]).abs() < 1e-6 {
                let overlap: Complex64 = (0..n).map(|i| vectors[(i, j)].conj() * v[i]).sum();
                for i in 0..n {
                    let vj = vectors[(i, j)];
                    v[i] -= overlap * vj;
                }
            }
        }
        let norm = v.norm();
        if norm < 1e-8 {
            continue;
        }
        v /= Complex64::new(norm, 0.0);
        vectors.set_column(kept, &v);
        values.push(eig.eigenvalues[idx]);
        kept += 1;
    }
    if kept != n {
        return Err(Error::NotUnitary {
            deviation: (n - kept) as f64,
        });
    }
    Ok((values, vectors))
}

/// JSON-facing summary of the generator construction for one circuit.
#[derive(Clone, Debug, Serialize)]
pub struct HamiltonianReport {
    pub width: usize,
    /// `‖H − H†‖`.
    pub hermiticity_err: f64,
    /// `‖HU − UH‖`.
    pub commutator_err: f64,
    /// Worst `|h − 2 cos θ|` over matched eigenpairs.
    pub spectrum_err: f64,
    /// `‖R² − U‖` for the principal square root `R`.
    pub root_residual: f64,
    /// Sites the square root acts on.
    pub support: Vec<usize>,
}

/// The Hermitian generator `H = U + U†` of a circuit's product unitary,
/// with the shared eigenbasis cached for evolution and roots.
#[derive(Clone, Debug)]
pub struct HamiltonianModel {
    unitary: DenseUnitary,
    h: CMatrix,
    eigen: UnitaryEigen,
}

impl HamiltonianModel {
    pub fn new(circuit: &QuantumCircuit) -> Result<Self> {
        let unitary = DenseUnitary::from_circuit(circuit)?;
        Self::from_unitary(unitary)
    }

    pub fn from_unitary(unitary: DenseUnitary) -> Result<Self> {
        let h = &unitary.matrix + unitary.matrix.adjoint();
        let eigen = eigendecompose(&unitary)?;
        Ok(Self { unitary, h, eigen })
    }

    pub fn unitary(&self) -> &DenseUnitary {
        &self.unitary
    }

    /// The generator matrix `H = U + U†`.
    pub fn h_matrix(&self) -> &CMatrix {
        &self.h
    }

    pub fn eigen(&self) -> &UnitaryEigen {
        &self.eigen
    }

    /// `‖H − H†‖`.
    pub fn hermiticity_error(&self) -> f64 {
        (&self.h - self.h.adjoint()).norm()
    }

    /// `‖HU − UH‖`.
    pub fn commutator_error(&self) -> f64 {
        (&self.h * &self.unitary.matrix - &self.unitary.matrix * &self.h).norm()
    }

    /// Worst `|⟨v|H|v⟩ − 2 cos θ|` over the eigenbasis — checks that `H`'s
    /// spectrum is the image of `U`'s eigenphases under `2 cos`.
    pub fn spectrum_error(&self) -> f64 {
        let dim = self.unitary.dim();
        let mut worst = 0.0f64;
        for k in 0..dim {
            let v = self.eigen.vectors.column(k).into_owned();
            let hv = &self.h * &v;
            let expectation: Complex64 = v.iter().zip(hv.iter()).map(|(a, b)| a.conj() * b).sum();
            let expected = 2.0 * self.eigen.phases[k].cos();
            worst = worst
                .max((expectation.re - expected).abs())
                .max(expectation.im.abs());
        }
        worst
    }

    /// Continuous evolution `e^{−iHt}`, built on the shared eigenbasis.
    pub fn evolve(&self, t: f64) -> DenseUnitary {
        // H = Σ 2cosθ_k |v_k⟩⟨v_k| ⇒ e^{−iHt} = Σ e^{−2it cosθ_k} |v_k⟩⟨v_k|.
        self.function_of_u(|theta| Complex64::from_polar(1.0, -2.0 * t * theta.cos()))
    }

    /// The principal fractional power `U^s`: each eigenphase θ in
    /// `(−π, π]` maps to `e^{isθ}`.
    pub fn fractional_power(&self, s: f64) -> DenseUnitary {
        self.function_of_u(|theta| Complex64::from_polar(1.0, s * theta))
    }

    /// The principal square root `U^{1/2}`.
    pub fn sqrt_u(&self) -> DenseUnitary {
        self.fractional_power(0.5)
    }

    /// `‖R² − U‖` for the principal root.
    pub fn root_residual(&self) -> f64 {
        let r = self.sqrt_u();
        (&r.matrix * &r.matrix - &self.unitary.matrix).norm()
    }

    fn function_of_u(&self, f: impl Fn(f64) -> Complex64) -> DenseUnitary {
        let dim = self.unitary.dim();
        let mut m = CMatrix::zeros(dim, dim);
        for k in 0..dim {
            let v = self.eigen.vectors.column(k);
            let scale = f(self.eigen.phases[k]);
            // m += scale · v v†
            for col in 0..dim {
                let factor = scale * v[col].conj();
                if factor.norm_sqr() == 0.0 {
                    continue;
                }
                for row in 0..dim {
                    m[(row, col)] += v[row] * factor;
                }
            }
        }
        DenseUnitary {
            width: self.unitary.width,
            matrix: m,
        }
    }

    /// Full report for one circuit, including the support of the
    /// principal root.
    pub fn report(&self) -> HamiltonianReport {
        HamiltonianReport {
            width: self.unitary.width,
            hermiticity_err: self.hermiticity_error(),
            commutator_err: self.commutator_error(),
            spectrum_err: self.spectrum_error(),
            root_residual: self.root_residual(),
            support: operator_support(&self.sqrt_u()),
        }
    }
}

/// Sites an operator acts on: site `i` is in the support iff the operator
/// fails to commute with `X_i` or `Z_i`.
///
/// The commutators are evaluated without materializing `X_i` or `Z_i`:
/// `X_i M X_i` permutes rows and columns by the bit-flip, `Z_i M Z_i`
/// flips the sign of entries whose row and column disagree on bit `i`.
pub fn operator_support(op: &DenseUnitary) -> Vec<usize> {
    operator_support_with_tol(op, tol::SUPPORT_COMMUTATOR)
}

/// [`operator_support`] with an explicit commutator threshold.
pub fn operator_support_with_tol(op: &DenseUnitary, threshold: f64) -> Vec<usize> {
    let dim = op.dim();
    let mut support = Vec::new();
    for site in 0..op.width {
        let mask = 1usize << site;
        let mut x_comm = 0.0f64;
        let mut z_comm = 0.0f64;
        for row in 0..dim {
            for col in 0..dim {
                let m = op.matrix[(row, col)];
                // (X_i M X_i)[r, c] = M[r ^ mask, c ^ mask]
                let x_conj = op.matrix[(row ^ mask, col ^ mask)];
                x_comm = x_comm.max((m - x_conj).norm());
                // (Z_i M Z_i)[r, c] = ± M[r, c]
                let sign = if (row ^ col) & mask != 0 { -1.0 } else { 1.0 };
                z_comm = z_comm.max((m - m * sign).norm());
            }
        }
        if x_comm > threshold || z_comm > threshold {
            support.push(site);
        }
    }
    support
}
