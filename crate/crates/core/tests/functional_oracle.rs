//! Cross-checks the permutation/projection evaluators in the library
//! against a from-scratch dense-matrix implementation kept deliberately
//! naive: explicit truth tables, explicit matrix products, Taylor-series
//! exponentials. Nothing here calls into the library's numerics beyond
//! reading results back out.

// The oracle is written in explicit index arithmetic on purpose.
#![allow(clippy::needless_range_loop)]

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use decohist_core::hamiltonian::{operator_support, DenseUnitary, HamiltonianModel};
use decohist_core::histories::{
    build_d_exhaustive, evaluate_d, no_record_demo, record_demo, Grain, History,
};
use decohist_core::qstate::{QuantumCircuit, QuantumGate, StateVector, UnitaryStep};
use decohist_core::revmachine::{BitString, ReversibleGate, TimeStep};

type C = Complex64;
type M = Vec<Vec<C>>;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);

// ---------------------------------------------------------------- matrices

fn zeros(n: usize) -> M {
    vec![vec![ZERO; n]; n]
}

fn identity(n: usize) -> M {
    let mut m = zeros(n);
    for i in 0..n {
        m[i][i] = ONE;
    }
    m
}

fn mat_mul(a: &M, b: &M) -> M {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for k in 0..n {
            let aik = a[i][k];
            if aik == ZERO {
                continue;
            }
            for j in 0..n {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

fn mat_vec(a: &M, v: &[C]) -> Vec<C> {
    a.iter()
        .map(|row| row.iter().zip(v).map(|(&m, &x)| m * x).sum())
        .collect()
}

fn dagger(a: &M) -> M {
    let n = a.len();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

fn mat_add(a: &M, b: &M) -> M {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(&x, &y)| x + y).collect())
        .collect()
}

fn mat_scale(a: &M, s: C) -> M {
    a.iter()
        .map(|row| row.iter().map(|&x| x * s).collect())
        .collect()
}

fn frob_diff(a: &M, b: &M) -> f64 {
    let mut acc = 0.0;
    for (ra, rb) in a.iter().zip(b) {
        for (&x, &y) in ra.iter().zip(rb) {
            acc += (x - y).norm_sqr();
        }
    }
    acc.sqrt()
}

fn frob(a: &M) -> f64 {
    a.iter()
        .flatten()
        .map(|x| x.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Taylor-series matrix exponential with scaling and squaring.
fn expm(a: &M) -> M {
    let mut scale = 0u32;
    let mut norm = frob(a);
    while norm > 0.25 {
        norm /= 2.0;
        scale += 1;
    }
    let factor = C::new(1.0 / f64::from(1u32 << scale), 0.0);
    let small = mat_scale(a, factor);
    let n = a.len();
    let mut sum = identity(n);
    let mut term = identity(n);
    for k in 1..=30 {
        term = mat_mul(&term, &small);
        term = mat_scale(&term, C::new(1.0 / k as f64, 0.0));
        sum = mat_add(&sum, &term);
    }
    for _ in 0..scale {
        sum = mat_mul(&sum, &sum);
    }
    sum
}

fn from_dense(u: &DenseUnitary) -> M {
    let n = u.dim();
    let mut out = zeros(n);
    for i in 0..n {
        for j in 0..n {
            out[i][j] = u.matrix()[(i, j)];
        }
    }
    out
}

// ----------------------------------------------------------- test circuits

/// A gate in the test-side description, mapped independently to both the
/// library objects and the oracle matrices.
#[derive(Clone, Copy)]
enum G {
    Not(usize),
    Cnot(usize, usize),
    Swap(usize, usize),
    Tof(usize, usize, usize),
    Fred(usize, usize, usize),
    H(usize),
    Ph(usize, f64),
}

#[derive(Clone)]
enum Step {
    Rev(Vec<G>),
    Qu(Vec<G>),
}

/// Oracle truth table: classical action of a reversible gate on the bits
/// of one basis index. Bit `j` of the index is `(i >> j) & 1`.
fn classical_out(width: usize, g: G, index: usize) -> usize {
    let bit = |i: usize, s: usize| (i >> s) & 1;
    let mut bits: Vec<usize> = (0..width).map(|s| bit(index, s)).collect();
    match g {
        G::Not(a) => bits[a] ^= 1,
        G::Cnot(c, t) => {
            if bits[c] == 1 {
                bits[t] ^= 1;
            }
        }
        G::Swap(a, b) => bits.swap(a, b),
        G::Tof(c1, c2, t) => {
            if bits[c1] == 1 && bits[c2] == 1 {
                bits[t] ^= 1;
            }
        }
        G::Fred(c, a, b) => {
            if bits[c] == 1 {
                bits.swap(a, b);
            }
        }
        G::H(_) | G::Ph(_, _) => panic!("not a classical gate"),
    }
    bits.iter()
        .enumerate()
        .fold(0, |acc, (s, &b)| acc | (b << s))
}

fn gate_matrix(width: usize, g: G) -> M {
    let dim = 1 << width;
    let mut m = zeros(dim);
    match g {
        G::H(s) => {
            let r = C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            for i in 0..dim {
                if (i >> s) & 1 == 0 {
                    let j = i | (1 << s);
                    m[i][i] = r;
                    m[i][j] = r;
                    m[j][i] = r;
                    m[j][j] = -r;
                }
            }
        }
        G::Ph(s, angle) => {
            let phase = C::from_polar(1.0, angle);
            for i in 0..dim {
                m[i][i] = if (i >> s) & 1 == 1 { phase } else { ONE };
            }
        }
        _ => {
            for i in 0..dim {
                m[classical_out(width, g, i)][i] = ONE;
            }
        }
    }
    m
}

/// Gates inside one step apply left to right, so the step matrix is the
/// reversed product.
fn step_matrix(width: usize, step: &Step) -> M {
    let gates = match step {
        Step::Rev(g) | Step::Qu(g) => g,
    };
    let mut m = identity(1 << width);
    for &g in gates {
        m = mat_mul(&gate_matrix(width, g), &m);
    }
    m
}

fn lib_gate(g: G) -> ReversibleGate {
    match g {
        G::Not(site) => ReversibleGate::Not { site },
        G::Cnot(control, target) => ReversibleGate::Cnot { control, target },
        G::Swap(a, b) => ReversibleGate::Swap { a, b },
        G::Tof(c1, c2, target) => ReversibleGate::Toffoli { c1, c2, target },
        G::Fred(control, a, b) => ReversibleGate::Fredkin { control, a, b },
        G::H(_) | G::Ph(_, _) => panic!("not a reversible gate"),
    }
}

fn lib_circuit(width: usize, steps: &[Step]) -> QuantumCircuit {
    let unitary_steps = steps
        .iter()
        .map(|step| match step {
            Step::Rev(gates) => UnitaryStep::Reversible(
                TimeStep::new(width, gates.iter().copied().map(lib_gate).collect()).unwrap(),
            ),
            Step::Qu(gates) => UnitaryStep::Quantum(
                gates
                    .iter()
                    .map(|&g| match g {
                        G::H(site) => QuantumGate::Hadamard { site },
                        G::Ph(site, angle) => QuantumGate::Phase { site, angle },
                        _ => panic!("not a quantum gate"),
                    })
                    .collect(),
            ),
        })
        .collect();
    QuantumCircuit::new(width, unitary_steps).unwrap()
}

// ------------------------------------------------------------- projectors

fn projector(width: usize, mask: u32, value: usize) -> M {
    let dim = 1 << width;
    let mask = mask as usize;
    let mut m = zeros(dim);
    for i in 0..dim {
        if i & mask == value & mask {
            m[i][i] = ONE;
        }
    }
    m
}

/// Places the bits of `packed` at the set bits of `mask`, in ascending
/// site order.
fn expand(mask: u32, packed: usize) -> usize {
    let mut out = 0usize;
    let mut taken = 0;
    for site in 0..32 {
        if mask >> site & 1 == 1 {
            out |= ((packed >> taken) & 1) << site;
            taken += 1;
        }
    }
    out
}

/// All histories over the grain masks, as full-width pattern values.
fn all_histories(masks: &[u32]) -> Vec<Vec<usize>> {
    let mut tuples: Vec<Vec<usize>> = vec![vec![]];
    for &mask in masks {
        let count = 1usize << mask.count_ones();
        let mut next = Vec::with_capacity(tuples.len() * count);
        for t in &tuples {
            for packed in 0..count {
                let mut extended = t.clone();
                extended.push(expand(mask, packed));
                next.push(extended);
            }
        }
        tuples = next;
    }
    tuples
}

/// Dense-chain branch vector: alternate projections and step unitaries,
/// with one more projection than there are steps.
fn oracle_branch(
    width: usize,
    steps: &[M],
    masks: &[u32],
    patterns: &[usize],
    initial: &[C],
) -> Vec<C> {
    let mut v = mat_vec(&projector(width, masks[0], patterns[0]), initial);
    for (k, u) in steps.iter().enumerate() {
        v = mat_vec(u, &v);
        v = mat_vec(&projector(width, masks[k + 1], patterns[k + 1]), &v);
    }
    v
}

fn inner(a: &[C], b: &[C]) -> C {
    a.iter().zip(b).map(|(&x, &y)| x.conj() * y).sum()
}

fn state_vec(s: &StateVector) -> Vec<C> {
    s.amplitudes().to_vec()
}

fn lib_history(width: usize, patterns: &[usize]) -> History {
    History::new(
        patterns
            .iter()
            .map(|&p| BitString::new(width, p).unwrap())
            .collect(),
    )
}

/// Compares every same-final history pair of the library evaluator
/// against the dense chain, and the survey report against oracle-side
/// aggregates.
fn check_circuit_against_oracle(width: usize, steps: &[Step], initial: &StateVector, grain: &Grain) {
    let circuit = lib_circuit(width, steps);
    let oracle_steps: Vec<M> = steps.iter().map(|s| step_matrix(width, s)).collect();
    let masks: Vec<u32> = (0..grain.epochs()).map(|k| grain.mask(k)).collect();
    assert_eq!(masks.len(), steps.len() + 1);

    let init = state_vec(initial);
    let histories = all_histories(&masks);
    let branches: Vec<Vec<C>> = histories
        .iter()
        .map(|h| oracle_branch(width, &oracle_steps, &masks, h, &init))
        .collect();

    let mut oracle_diag: Vec<f64> = Vec::new();
    let mut sum_diag = 0.0;
    for (i, hi) in histories.iter().enumerate() {
        let p = inner(&branches[i], &branches[i]).re;
        sum_diag += p;
        if p > 1e-14 {
            oracle_diag.push(p);
        }
        let d_lib = evaluate_d(
            &circuit,
            initial,
            grain,
            &lib_history(width, hi),
            &lib_history(width, hi),
        )
        .unwrap();
        assert!((d_lib.re - p).abs() < 1e-12 && d_lib.im.abs() < 1e-12);
    }

    // Oracle-side maxima over every same-final pair, grouped by final
    // pattern so the scan never touches pairs that are zero by
    // convention.
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, h) in histories.iter().enumerate() {
        groups.entry(*h.last().unwrap()).or_default().push(i);
    }
    let mut max_abs = 0.0f64;
    let mut max_re = 0.0f64;
    let mut same_final_pairs: Vec<(usize, usize)> = Vec::new();
    for members in groups.values() {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                // D(i, j) and D(j, i) are conjugates, so one direction
                // fixes both maxima.
                let d = inner(&branches[j], &branches[i]);
                max_abs = max_abs.max(d.norm());
                max_re = max_re.max(d.re.abs());
                same_final_pairs.push((i, j));
            }
        }
    }

    // Library evaluator spot-checked on a seeded sample of those pairs.
    let mut r = ChaCha8Rng::seed_from_u64(1 + width as u64);
    for _ in 0..500.min(same_final_pairs.len()) {
        let (i, j) = same_final_pairs[r.gen_range(0..same_final_pairs.len())];
        let d_oracle = inner(&branches[j], &branches[i]);
        let d_lib = evaluate_d(
            &circuit,
            initial,
            grain,
            &lib_history(width, &histories[i]),
            &lib_history(width, &histories[j]),
        )
        .unwrap();
        assert!(
            (d_lib - d_oracle).norm() < 1e-12,
            "D mismatch at pair ({i},{j}): {d_lib} vs {d_oracle}"
        );
    }

    let report = build_d_exhaustive(&circuit, initial, grain, 1 << 22).unwrap();
    assert!((report.sum_diag - sum_diag).abs() < 1e-12);
    assert!((report.max_abs_offdiag - max_abs).abs() < 1e-12);
    assert!((report.max_re_offdiag - max_re).abs() < 1e-12);

    let mut lib_diag: Vec<f64> = report.diag.iter().map(|e| e.p).collect();
    lib_diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    oracle_diag.sort_by(|a, b| a.partial_cmp(b).unwrap());
    assert_eq!(lib_diag.len(), oracle_diag.len());
    for (a, b) in lib_diag.iter().zip(&oracle_diag) {
        assert!((a - b).abs() < 1e-12);
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

// ------------------------------------------------------------------ tests

#[test]
fn decoherence_chain_matches_dense_oracle_reversible() {
    let cases: Vec<(usize, Vec<Step>)> = vec![
        (2, vec![Step::Rev(vec![G::Cnot(0, 1)])]),
        (
            3,
            vec![
                Step::Rev(vec![G::Tof(0, 1, 2)]),
                Step::Rev(vec![G::Not(0), G::Swap(1, 2)]),
                Step::Rev(vec![G::Fred(2, 0, 1)]),
            ],
        ),
        (
            3,
            vec![
                Step::Rev(vec![G::Cnot(0, 1)]),
                Step::Rev(vec![G::Cnot(1, 2)]),
            ],
        ),
    ];
    let mut r = rng(11);
    for (width, steps) in &cases {
        let circuit = lib_circuit(*width, steps);
        let full = Grain::full(*width, steps.len() + 1).unwrap();
        let local = Grain::local(&circuit).unwrap();
        let uniform = StateVector::uniform(*width).unwrap();
        let random = StateVector::random(*width, &mut r).unwrap();
        for state in [&uniform, &random] {
            check_circuit_against_oracle(*width, steps, state, &full);
            check_circuit_against_oracle(*width, steps, state, &local);
        }
    }
}

#[test]
fn decoherence_chain_matches_dense_oracle_quantum() {
    let cases: Vec<(usize, Vec<Step>)> = vec![
        (
            2,
            vec![Step::Qu(vec![G::H(0)]), Step::Rev(vec![G::Cnot(0, 1)])],
        ),
        (1, vec![Step::Qu(vec![G::H(0)]), Step::Qu(vec![G::H(0)])]),
        (
            3,
            vec![
                Step::Qu(vec![G::H(1), G::Ph(1, 0.7)]),
                Step::Rev(vec![G::Cnot(1, 2)]),
                Step::Qu(vec![G::H(0)]),
            ],
        ),
    ];
    let mut r = rng(12);
    for (width, steps) in &cases {
        let full = Grain::full(*width, steps.len() + 1).unwrap();
        let basis = StateVector::basis(BitString::zeros(*width).unwrap());
        let random = StateVector::random(*width, &mut r).unwrap();
        for state in [&basis, &random] {
            check_circuit_against_oracle(*width, steps, state, &full);
        }
    }
}

#[test]
fn record_demos_match_dense_oracle() {
    // No record: H then H on one bit from |0>, full grain. The dense
    // chain must reproduce the library's report including the known
    // quarter-sized interference terms.
    let (circuit, initial) = no_record_demo();
    let grain = Grain::full(1, 3).unwrap();
    check_circuit_against_oracle(
        1,
        &[Step::Qu(vec![G::H(0)]), Step::Qu(vec![G::H(0)])],
        &initial,
        &grain,
    );
    let report = build_d_exhaustive(&circuit, &initial, &grain, 1 << 22).unwrap();
    assert!((report.max_re_offdiag - 0.25).abs() < 1e-12);

    // Record: H then CNOT from |00>, grain restricted to the branch bit
    // and then both bits. Every off-diagonal must vanish identically.
    let (circuit, initial, grain) = record_demo();
    let h = gate_matrix(2, G::H(0));
    let cx = gate_matrix(2, G::Cnot(0, 1));
    let masks: Vec<u32> = (0..grain.epochs()).map(|k| grain.mask(k)).collect();
    let init = state_vec(&initial);
    let steps = [h, cx];
    let mut max_off = 0.0f64;
    let histories = all_histories(&masks);
    for (i, hi) in histories.iter().enumerate() {
        for (j, hj) in histories.iter().enumerate() {
            if i == j || hi.last() != hj.last() {
                continue;
            }
            let a = oracle_branch(2, &steps, &masks, hi, &init);
            let b = oracle_branch(2, &steps, &masks, hj, &init);
            max_off = max_off.max(inner(&b, &a).norm());
        }
    }
    assert!(max_off < 1e-15, "oracle found interference {max_off}");
    let report = build_d_exhaustive(&circuit, &initial, &grain, 1 << 22).unwrap();
    assert!(report.max_abs_offdiag < 1e-15);
    // Two equal-weight branches survive.
    assert_eq!(report.diag.len(), 2);
    for entry in &report.diag {
        assert!((entry.p - 0.5).abs() < 1e-12);
    }
}

#[test]
fn embedded_unitary_matches_oracle_product() {
    let cases: Vec<(usize, Vec<Step>)> = vec![
        (2, vec![Step::Rev(vec![G::Cnot(0, 1)])]),
        (
            3,
            vec![
                Step::Qu(vec![G::H(2), G::Ph(0, -1.1)]),
                Step::Rev(vec![G::Tof(2, 0, 1)]),
                Step::Rev(vec![G::Not(1)]),
            ],
        ),
    ];
    for (width, steps) in &cases {
        let circuit = lib_circuit(*width, steps);
        let lib = DenseUnitary::from_circuit(&circuit).unwrap();
        let mut oracle = identity(1 << width);
        for step in steps {
            oracle = mat_mul(&step_matrix(*width, step), &oracle);
        }
        assert!(frob_diff(&from_dense(&lib), &oracle) < 1e-12);
    }
}

#[test]
fn hamiltonian_is_u_plus_u_dagger() {
    let steps = vec![
        Step::Rev(vec![G::Cnot(0, 1)]),
        Step::Rev(vec![G::Cnot(1, 2)]),
    ];
    let circuit = lib_circuit(3, &steps);
    let model = HamiltonianModel::new(&circuit).unwrap();
    let mut u = identity(8);
    for step in &steps {
        u = mat_mul(&step_matrix(3, step), &u);
    }
    let h_oracle = mat_add(&u, &dagger(&u));
    let n = 8;
    let mut h_lib = zeros(n);
    for i in 0..n {
        for j in 0..n {
            h_lib[i][j] = model.h_matrix()[(i, j)];
        }
    }
    assert!(frob_diff(&h_lib, &h_oracle) < 1e-13);
}

#[test]
fn evolution_matches_taylor_exponential() {
    let mut r = rng(21);
    for trial in 0..6 {
        let width = 1 + trial % 3;
        let program = decohist_core::revmachine::random_program(width, 1 + trial % 3, 2, &mut r);
        let circuit = QuantumCircuit::from_reversible(&program);
        let model = HamiltonianModel::new(&circuit).unwrap();
        let n = 1 << width;
        let mut h = zeros(n);
        for i in 0..n {
            for j in 0..n {
                h[i][j] = model.h_matrix()[(i, j)];
            }
        }
        for t in [0.0, 0.3, 1.0, -2.5] {
            let lib = from_dense(&model.evolve(t));
            let oracle = expm(&mat_scale(&h, C::new(0.0, -t)));
            assert!(
                frob_diff(&lib, &oracle) < 1e-10,
                "evolve({t}) mismatch at width {width}"
            );
        }
    }
}

#[test]
fn fractional_powers_multiply_back_to_u() {
    let mut r = rng(22);
    for _ in 0..5 {
        let program = decohist_core::revmachine::random_program(3, 2, 2, &mut r);
        let circuit = QuantumCircuit::from_reversible(&program);
        let model = HamiltonianModel::new(&circuit).unwrap();
        let u = from_dense(model.unitary());

        let root = from_dense(&model.sqrt_u());
        assert!(frob_diff(&mat_mul(&root, &root), &u) < 1e-10);

        let third = from_dense(&model.fractional_power(1.0 / 3.0));
        let cubed = mat_mul(&third, &mat_mul(&third, &third));
        assert!(frob_diff(&cubed, &u) < 1e-10);
    }
}

#[test]
fn operator_support_matches_bruteforce_commutators() {
    fn x_matrix(width: usize, site: usize) -> M {
        let dim = 1 << width;
        let mut m = zeros(dim);
        for i in 0..dim {
            m[i ^ (1 << site)][i] = ONE;
        }
        m
    }
    fn z_matrix(width: usize, site: usize) -> M {
        let dim = 1 << width;
        let mut m = zeros(dim);
        for i in 0..dim {
            m[i][i] = if (i >> site) & 1 == 1 { -ONE } else { ONE };
        }
        m
    }
    fn oracle_support(op: &M, width: usize) -> Vec<usize> {
        let mut sites = Vec::new();
        for s in 0..width {
            for probe in [x_matrix(width, s), z_matrix(width, s)] {
                let comm_norm = frob_diff(&mat_mul(op, &probe), &mat_mul(&probe, op));
                if comm_norm > 1e-8 {
                    sites.push(s);
                    break;
                }
            }
        }
        sites
    }

    // Identity: empty support both ways.
    let ident = DenseUnitary::identity(3).unwrap();
    assert!(operator_support(&ident).is_empty());
    assert!(oracle_support(&from_dense(&ident), 3).is_empty());

    // NOT on bit 1 of 3.
    let circuit = lib_circuit(3, &[Step::Rev(vec![G::Not(1)])]);
    let u = DenseUnitary::from_circuit(&circuit).unwrap();
    assert_eq!(operator_support(&u), vec![1]);
    assert_eq!(oracle_support(&from_dense(&u), 3), vec![1]);

    // The fractional root of the CNOT chain spreads over all three sites;
    // the oracle commutators must agree site by site with the library.
    let chain = lib_circuit(
        3,
        &[
            Step::Rev(vec![G::Cnot(0, 1)]),
            Step::Rev(vec![G::Cnot(1, 2)]),
        ],
    );
    let model = HamiltonianModel::new(&chain).unwrap();
    let root = model.sqrt_u();
    let lib_sites = operator_support(&root);
    let oracle_sites = oracle_support(&from_dense(&root), 3);
    assert_eq!(lib_sites, oracle_sites);
    assert_eq!(lib_sites, vec![0, 1, 2]);
}
