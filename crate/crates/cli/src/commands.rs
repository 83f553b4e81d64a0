//! One handler per subcommand. Each merges its config file, runs the
//! mapped library operation, writes one artifact, and returns the
//! one-line summary for standard output.
//!
//! Artifacts are deterministic: struct fields serialize in declaration
//! order, maps iterate in key order, and floats go through the standard
//! shortest-round-trip formatter — identical arguments and seeds yield
//! byte-identical files.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use clap::ArgMatches;
use serde::Serialize;

use decohist_core::algoprob::{
    advantage, enumerate_programs, enumeration_csv, khat_with_report, parse_witness_file,
    sample_csv, sample_programs, sample_programs_capped, AdvantageEstimate, Bits,
    ComplexityEstimate, EnsembleReport, SampleReport,
};
use decohist_core::hamiltonian::operator_support_with_tol;
use decohist_core::histories::{
    build_d_exhaustive, build_d_sampled, no_record_demo, record_demo, DecoherenceReport,
    DEFAULT_EXHAUSTIVE_CAP,
};
use decohist_core::qstate::make_state;
use decohist_core::revmachine::parse_circuit;
use decohist_core::{DenseUnitary, Grain, HamiltonianModel, QuantumCircuit, ReversibleProgram};

use crate::config;
use crate::target::parse_target;
use crate::{
    internal, validation, AdvantageArgs, CliError, CliResult, Command, DecohereArgs,
    EnumerateArgs, FormatKind, GrainKind, HamiltonianArgs, KhatArgs, ModeKind, RecordDemoArgs,
    SampleArgs,
};

/// History tuples an exhaustive evaluation may visit before it must be
/// rerun in sampled mode.
const TUPLE_CAP: usize = DEFAULT_EXHAUSTIVE_CAP;

pub fn dispatch(command: Command, matches: &ArgMatches) -> CliResult<String> {
    match command {
        Command::Decohere(args) => decohere(args, matches),
        Command::RecordDemo(args) => run_record_demo(args, matches),
        Command::Hamiltonian(args) => hamiltonian(args, matches),
        Command::Enumerate(args) => enumerate(args, matches),
        Command::Sample(args) => sample(args, matches),
        Command::Khat(args) => khat(args, matches),
        Command::Advantage(args) => advantage_cmd(args, matches),
    }
}

// ---------------------------------------------------------------- shared

fn write_artifact(path: &Path, content: &str) -> CliResult<()> {
    fs::write(path, content)
        .map_err(|err| validation(format!("cannot write {}: {err}", path.display())))
}

fn to_pretty_json<T: Serialize>(value: &T) -> CliResult<String> {
    serde_json::to_string_pretty(value)
        .map(|text| text + "\n")
        .map_err(internal)
}

/// Reads and parses a circuit file, then unrolls it `steps` times.
fn load_program(path: &Path, steps: usize) -> CliResult<ReversibleProgram> {
    if steps == 0 {
        return Err(CliError::Validation("--steps must be at least 1".into()));
    }
    let text = fs::read_to_string(path)
        .map_err(|err| validation(format!("cannot read {}: {err}", path.display())))?;
    let program = parse_circuit(&text).map_err(validation)?;
    if steps == 1 {
        return Ok(program);
    }
    let mut repeated = Vec::with_capacity(program.steps().len() * steps);
    for _ in 0..steps {
        repeated.extend_from_slice(program.steps());
    }
    ReversibleProgram::new(program.width(), repeated).map_err(internal)
}

fn required_target(spec: Option<&str>) -> CliResult<Bits> {
    let spec = spec.ok_or_else(|| {
        CliError::Validation("--target is required (flag or config)".into())
    })?;
    parse_target(spec).map_err(CliError::Validation)
}

fn load_witnesses(path: Option<&Path>) -> CliResult<Vec<Bits>> {
    let Some(path) = path else {
        return Ok(Vec::new());
    };
    let text = fs::read_to_string(path)
        .map_err(|err| validation(format!("cannot read {}: {err}", path.display())))?;
    parse_witness_file(&text).map_err(validation)
}

fn fmt_opt<T: ToString>(value: &Option<T>) -> String {
    value
        .as_ref()
        .map(|v| v.to_string())
        .unwrap_or_else(|| "none".into())
}

// -------------------------------------------------------------- decohere

#[derive(Serialize)]
struct DecohereArtifact<'a> {
    circuit: String,
    state: &'a str,
    tol_weak: f64,
    weakly_decoherent: bool,
    #[serde(flatten)]
    report: &'a DecoherenceReport,
}

fn diag_csv(report: &DecoherenceReport) -> String {
    let mut out = String::from("history,p\n");
    for entry in &report.diag {
        // History text contains commas, so the column is always quoted.
        let _ = writeln!(out, "\"{}\",{}", entry.history, entry.p);
    }
    out
}

fn decohere(mut args: DecohereArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_decohere(&mut args, matches)?;
    let circuit_path = args
        .circuit
        .as_deref()
        .ok_or_else(|| CliError::Validation("--circuit is required (flag or config)".into()))?;
    let program = load_program(circuit_path, args.steps)?;
    let circuit = QuantumCircuit::from_reversible(&program);
    let state = make_state(&args.state, circuit.width()).map_err(validation)?;
    let grain = match args.grain {
        GrainKind::Full => Grain::full(circuit.width(), circuit.steps().len() + 1),
        GrainKind::Local => Grain::local(&circuit),
    }
    .map_err(internal)?;
    let report = match args.mode {
        ModeKind::Exhaustive => build_d_exhaustive(&circuit, &state, &grain, TUPLE_CAP),
        ModeKind::Sampled => build_d_sampled(&circuit, &state, &grain, args.pairs, args.seed),
    }
    .map_err(validation)?;
    let weakly_decoherent = report.require_weak_decoherence(args.tol_weak).is_ok();

    let artifact = DecohereArtifact {
        circuit: circuit_path.display().to_string(),
        state: &args.state,
        tol_weak: args.tol_weak,
        weakly_decoherent,
        report: &report,
    };
    let content = match args.format {
        FormatKind::Json => to_pretty_json(&artifact)?,
        FormatKind::Csv => diag_csv(&report),
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "decohere: histories={} epochs={} sum_diag={:.12} max_abs_offdiag={:.3e} \
         max_re_offdiag={:.3e} weakly_decoherent={} out={}",
        report.diag.len(),
        report.epochs,
        report.sum_diag,
        report.max_abs_offdiag,
        report.max_re_offdiag,
        weakly_decoherent,
        args.out.display()
    ))
}

// ----------------------------------------------------------- record-demo

#[derive(Serialize)]
struct RecordDemoArtifact<'a> {
    tol_weak: f64,
    no_record: DemoSide<'a>,
    record: DemoSide<'a>,
}

#[derive(Serialize)]
struct DemoSide<'a> {
    weakly_decoherent: bool,
    #[serde(flatten)]
    report: &'a DecoherenceReport,
}

fn run_record_demo(mut args: RecordDemoArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_record_demo(&mut args, matches)?;
    let (bare_circuit, bare_state) = no_record_demo();
    let bare_grain = Grain::full(bare_circuit.width(), bare_circuit.steps().len() + 1)
        .map_err(internal)?;
    let no_record = build_d_exhaustive(&bare_circuit, &bare_state, &bare_grain, TUPLE_CAP)
        .map_err(internal)?;
    let (copy_circuit, copy_state, copy_grain) = record_demo();
    let record = build_d_exhaustive(&copy_circuit, &copy_state, &copy_grain, TUPLE_CAP)
        .map_err(internal)?;

    let artifact = RecordDemoArtifact {
        tol_weak: args.tol_weak,
        no_record: DemoSide {
            weakly_decoherent: no_record.require_weak_decoherence(args.tol_weak).is_ok(),
            report: &no_record,
        },
        record: DemoSide {
            weakly_decoherent: record.require_weak_decoherence(args.tol_weak).is_ok(),
            report: &record,
        },
    };
    let content = match args.format {
        FormatKind::Json => to_pretty_json(&artifact)?,
        FormatKind::Csv => {
            let mut out = String::from("demo,history,p\n");
            for (demo, report) in [("no_record", &no_record), ("record", &record)] {
                for entry in &report.diag {
                    let _ = writeln!(out, "{demo},\"{}\",{}", entry.history, entry.p);
                }
            }
            out
        }
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "record-demo: no_record max_re_offdiag={:.3e} record max_abs_offdiag={:.3e} out={}",
        no_record.max_re_offdiag,
        record.max_abs_offdiag,
        args.out.display()
    ))
}

// ----------------------------------------------------------- hamiltonian

#[derive(Serialize)]
struct HamiltonianArtifact {
    circuit: String,
    width: usize,
    hermiticity_err: f64,
    commutator_err: f64,
    spectrum_err: f64,
    root_residual: f64,
    tol_support: f64,
    /// Support of each unrolled step's unitary.
    step_supports: Vec<Vec<usize>>,
    /// Support of the principal square root of the whole walk.
    root_support: Vec<usize>,
}

fn hamiltonian(mut args: HamiltonianArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_hamiltonian(&mut args, matches)?;
    let circuit_path = args
        .circuit
        .as_deref()
        .ok_or_else(|| CliError::Validation("--circuit is required (flag or config)".into()))?;
    let program = load_program(circuit_path, args.steps)?;
    let circuit = QuantumCircuit::from_reversible(&program);
    let model = HamiltonianModel::new(&circuit).map_err(internal)?;
    let step_supports = program
        .steps()
        .iter()
        .map(|step| {
            DenseUnitary::from_step(program.width(), step)
                .map(|u| operator_support_with_tol(&u, args.tol_support))
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(internal)?;
    let root_support = operator_support_with_tol(&model.sqrt_u(), args.tol_support);

    let artifact = HamiltonianArtifact {
        circuit: circuit_path.display().to_string(),
        width: program.width(),
        hermiticity_err: model.hermiticity_error(),
        commutator_err: model.commutator_error(),
        spectrum_err: model.spectrum_error(),
        root_residual: model.root_residual(),
        tol_support: args.tol_support,
        step_supports,
        root_support,
    };
    let content = match args.format {
        FormatKind::Json => to_pretty_json(&artifact)?,
        FormatKind::Csv => {
            let mut out = String::from("key,value\n");
            let _ = writeln!(out, "width,{}", artifact.width);
            let _ = writeln!(out, "hermiticity_err,{}", artifact.hermiticity_err);
            let _ = writeln!(out, "commutator_err,{}", artifact.commutator_err);
            let _ = writeln!(out, "spectrum_err,{}", artifact.spectrum_err);
            let _ = writeln!(out, "root_residual,{}", artifact.root_residual);
            let _ = writeln!(out, "step_supports,{}", join_supports(&artifact.step_supports));
            let _ = writeln!(out, "root_support,{}", join_sites(&artifact.root_support));
            out
        }
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "hamiltonian: width={} hermiticity_err={:.3e} spectrum_err={:.3e} \
         root_residual={:.3e} step_supports={} root_support={} out={}",
        artifact.width,
        artifact.hermiticity_err,
        artifact.spectrum_err,
        artifact.root_residual,
        join_supports(&artifact.step_supports),
        join_sites(&artifact.root_support),
        args.out.display()
    ))
}

fn join_sites(sites: &[usize]) -> String {
    sites
        .iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

fn join_supports(supports: &[Vec<usize>]) -> String {
    supports
        .iter()
        .map(|s| join_sites(s))
        .collect::<Vec<_>>()
        .join("|")
}

// ------------------------------------------------------------- enumerate

#[derive(Serialize)]
struct EnumerateArtifact {
    l_max: usize,
    budget: u64,
    kraft_sum: f64,
    unresolved_mass: f64,
    halting_programs: u64,
    budget_exceeded_prefixes: u64,
    bits_exhausted_prefixes: u64,
    outputs: BTreeMap<String, OutputRow>,
}

#[derive(Serialize)]
struct OutputRow {
    mass: f64,
    mass_units: u64,
    shortest: usize,
    programs: u64,
}

impl EnumerateArtifact {
    fn from_report(report: &EnsembleReport) -> Self {
        let outputs = report
            .outputs
            .iter()
            .map(|(bits, stat)| {
                (
                    bits.to_string(),
                    OutputRow {
                        mass: report.mass(bits),
                        mass_units: stat.mass_units,
                        shortest: stat.shortest,
                        programs: stat.programs,
                    },
                )
            })
            .collect();
        Self {
            l_max: report.l_max,
            budget: report.budget,
            kraft_sum: report.kraft_sum(),
            unresolved_mass: report.unresolved_mass(),
            halting_programs: report.halting_programs,
            budget_exceeded_prefixes: report.budget_exceeded_prefixes,
            bits_exhausted_prefixes: report.bits_exhausted_prefixes,
            outputs,
        }
    }
}

fn enumerate(mut args: EnumerateArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_enumerate(&mut args, matches)?;
    let report = enumerate_programs(args.l_max, args.budget).map_err(validation)?;
    let content = match args.format {
        FormatKind::Json => to_pretty_json(&EnumerateArtifact::from_report(&report))?,
        FormatKind::Csv => enumeration_csv(&report),
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "enumerate: l_max={} budget={} halting_programs={} kraft_sum={:.6} outputs={} out={}",
        report.l_max,
        report.budget,
        report.halting_programs,
        report.kraft_sum(),
        report.outputs.len(),
        args.out.display()
    ))
}

// ---------------------------------------------------------------- sample

#[derive(Serialize)]
struct SampleArtifact {
    n: u64,
    seed: u64,
    budget: u64,
    bit_cap: Option<usize>,
    halted: u64,
    budget_exceeded: u64,
    bits_exhausted: u64,
    outputs: BTreeMap<String, u64>,
}

impl SampleArtifact {
    fn from_report(report: &SampleReport) -> Self {
        Self {
            n: report.n,
            seed: report.seed,
            budget: report.budget,
            bit_cap: report.bit_cap,
            halted: report.halted,
            budget_exceeded: report.budget_exceeded,
            bits_exhausted: report.bits_exhausted,
            outputs: report
                .outputs
                .iter()
                .map(|(bits, count)| (bits.to_string(), *count))
                .collect(),
        }
    }
}

fn sample(mut args: SampleArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_sample(&mut args, matches)?;
    let report = match args.bit_cap {
        Some(cap) => sample_programs_capped(args.samples, args.seed, args.budget, cap),
        None => sample_programs(args.samples, args.seed, args.budget),
    }
    .map_err(validation)?;
    let content = match args.format {
        FormatKind::Json => to_pretty_json(&SampleArtifact::from_report(&report))?,
        FormatKind::Csv => sample_csv(&report),
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "sample: n={} halted={} budget_exceeded={} bits_exhausted={} outputs={} out={}",
        report.n,
        report.halted,
        report.budget_exceeded,
        report.bits_exhausted,
        report.outputs.len(),
        args.out.display()
    ))
}

// ------------------------------------------------------------------ khat

#[derive(Serialize)]
struct KhatArtifact<'a> {
    budget: u64,
    #[serde(flatten)]
    estimate: &'a ComplexityEstimate,
}

fn khat_csv(estimate: &ComplexityEstimate, budget: u64) -> String {
    let mut out = String::from("key,value\n");
    let _ = writeln!(out, "target,{}", estimate.target);
    let _ = writeln!(out, "target_len,{}", estimate.target_len);
    let _ = writeln!(out, "khat,{}", fmt_opt(&estimate.khat));
    let _ = writeln!(out, "source,{}", source_name(estimate));
    let _ = writeln!(out, "l_max,{}", estimate.l_max);
    let _ = writeln!(out, "budget,{budget}");
    let _ = writeln!(out, "mass,{}", estimate.mass);
    let _ = writeln!(out, "rejected_witnesses,{}", estimate.rejected_witnesses.len());
    out
}

fn source_name(estimate: &ComplexityEstimate) -> String {
    match estimate.source {
        // Serialize the same way the JSON field does.
        Some(source) => serde_json::to_value(source)
            .ok()
            .and_then(|v| v.as_str().map(String::from))
            .unwrap_or_else(|| "unknown".into()),
        None => "none".into(),
    }
}

fn khat(mut args: KhatArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_khat(&mut args, matches)?;
    let target = required_target(args.target.as_deref())?;
    let witnesses = load_witnesses(args.witness_file.as_deref())?;
    let report = enumerate_programs(args.l_max, args.budget).map_err(validation)?;
    let estimate = khat_with_report(&target, &report, &witnesses);

    let content = match args.format {
        FormatKind::Json => to_pretty_json(&KhatArtifact {
            budget: args.budget,
            estimate: &estimate,
        })?,
        FormatKind::Csv => khat_csv(&estimate, args.budget),
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "khat: target_len={} khat={} source={} mass={} rejected_witnesses={} out={}",
        estimate.target_len,
        fmt_opt(&estimate.khat),
        source_name(&estimate),
        estimate.mass,
        estimate.rejected_witnesses.len(),
        args.out.display()
    ))
}

// ------------------------------------------------------------- advantage

#[derive(Serialize)]
struct AdvantageArtifact<'a> {
    l_max: usize,
    budget: u64,
    #[serde(flatten)]
    estimate: &'a AdvantageEstimate,
    rejected_witnesses: &'a [String],
}

fn advantage_cmd(mut args: AdvantageArgs, matches: &ArgMatches) -> CliResult<String> {
    config::apply_advantage(&mut args, matches)?;
    let target = required_target(args.target.as_deref())?;
    let witnesses = load_witnesses(args.witness_file.as_deref())?;
    let report = enumerate_programs(args.l_max, args.budget).map_err(validation)?;
    let estimate = khat_with_report(&target, &report, &witnesses);
    let adv = advantage(&target, &report, &estimate);

    let content = match args.format {
        FormatKind::Json => to_pretty_json(&AdvantageArtifact {
            l_max: args.l_max,
            budget: args.budget,
            estimate: &adv,
            rejected_witnesses: &estimate.rejected_witnesses,
        })?,
        FormatKind::Csv => {
            let mut out = String::from("key,value\n");
            let _ = writeln!(out, "target,{}", adv.target);
            let _ = writeln!(out, "target_len,{}", adv.target_len);
            let _ = writeln!(out, "l_max,{}", args.l_max);
            let _ = writeln!(out, "budget,{}", args.budget);
            let _ = writeln!(out, "mass,{}", adv.mass);
            let _ = writeln!(out, "enumerated_ratio,{}", adv.enumerated_ratio);
            let _ = writeln!(out, "produced,{}", adv.produced);
            let _ = writeln!(out, "khat,{}", fmt_opt(&adv.khat));
            let _ = writeln!(out, "bound_log2,{}", fmt_opt(&adv.bound_log2));
            let _ = writeln!(out, "bound_ratio,{}", fmt_opt(&adv.bound_ratio));
            let _ = writeln!(out, "rejected_witnesses,{}", estimate.rejected_witnesses.len());
            out
        }
    };
    write_artifact(&args.out, &content)?;

    Ok(format!(
        "advantage: target_len={} khat={} bound_log2={} bound_ratio={} \
         enumerated_ratio={} out={}",
        adv.target_len,
        fmt_opt(&adv.khat),
        fmt_opt(&adv.bound_log2),
        fmt_opt(&adv.bound_ratio),
        adv.enumerated_ratio,
        args.out.display()
    ))
}
