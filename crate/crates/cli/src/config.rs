//! Flat `key=value` config files.
//!
//! A config file supplies values for any long flag of its subcommand,
//! using the flag's name as the key (`l-max=12`). Precedence is built-in
//! default < config file < flag given explicitly on the command line.
//! Blank lines and `#` comments are ignored; on duplicate keys the last
//! line wins; unknown keys are errors.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use clap::parser::ValueSource;
use clap::ArgMatches;

use crate::{
    validation, AdvantageArgs, CliResult, DecohereArgs, EnumerateArgs, HamiltonianArgs, KhatArgs,
    RecordDemoArgs, SampleArgs,
};

struct Cfg {
    path: String,
    entries: BTreeMap<String, String>,
}

impl Cfg {
    fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|err| validation(format!("cannot read {}: {err}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(validation(format!(
                    "{}:{}: expected key=value, got {line:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self {
            path: path.display().to_string(),
            entries,
        })
    }

    /// Consumes `key`, returning its parsed value unless the flag with
    /// arg id `id` was given explicitly on the command line (the flag
    /// wins, and the key is discarded as merely shadowed, not unknown).
    fn take<T>(&mut self, matches: &ArgMatches, id: &str, key: &str) -> CliResult<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        let shadowed = matches.value_source(id) == Some(ValueSource::CommandLine);
        match self.entries.remove(key) {
            Some(_) if shadowed => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .map_err(|err| validation(format!("{}: key {key}: {err}", self.path))),
            None => Ok(None),
        }
    }

    fn finish(self) -> CliResult<()> {
        match self.entries.keys().next() {
            Some(key) => Err(validation(format!(
                "{}: unknown key {key:?}",
                self.path
            ))),
            None => Ok(()),
        }
    }
}

pub fn apply_decohere(args: &mut DecohereArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "circuit", "circuit")? {
        args.circuit = Some(v);
    }
    if let Some(v) = cfg.take(matches, "state", "state")? {
        args.state = v;
    }
    if let Some(v) = cfg.take(matches, "steps", "steps")? {
        args.steps = v;
    }
    if let Some(v) = cfg.take(matches, "grain", "grain")? {
        args.grain = v;
    }
    if let Some(v) = cfg.take(matches, "mode", "mode")? {
        args.mode = v;
    }
    if let Some(v) = cfg.take(matches, "pairs", "pairs")? {
        args.pairs = v;
    }
    if let Some(v) = cfg.take(matches, "seed", "seed")? {
        args.seed = v;
    }
    if let Some(v) = cfg.take(matches, "tol_weak", "tol-weak")? {
        args.tol_weak = v;
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}

pub fn apply_record_demo(args: &mut RecordDemoArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "tol_weak", "tol-weak")? {
        args.tol_weak = v;
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}

pub fn apply_hamiltonian(args: &mut HamiltonianArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "circuit", "circuit")? {
        args.circuit = Some(v);
    }
    if let Some(v) = cfg.take(matches, "steps", "steps")? {
        args.steps = v;
    }
    if let Some(v) = cfg.take(matches, "tol_support", "tol-support")? {
        args.tol_support = v;
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}

pub fn apply_enumerate(args: &mut EnumerateArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "l_max", "l-max")? {
        args.l_max = v;
    }
    if let Some(v) = cfg.take(matches, "budget", "budget")? {
        args.budget = v;
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}

pub fn apply_sample(args: &mut SampleArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "samples", "samples")? {
        args.samples = v;
    }
    if let Some(v) = cfg.take(matches, "seed", "seed")? {
        args.seed = v;
    }
    if let Some(v) = cfg.take(matches, "budget", "budget")? {
        args.budget = v;
    }
    if let Some(v) = cfg.take(matches, "bit_cap", "bit-cap")? {
        args.bit_cap = Some(v);
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}

pub fn apply_khat(args: &mut KhatArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "target", "target")? {
        args.target = Some(v);
    }
    if let Some(v) = cfg.take(matches, "l_max", "l-max")? {
        args.l_max = v;
    }
    if let Some(v) = cfg.take(matches, "budget", "budget")? {
        args.budget = v;
    }
    if let Some(v) = cfg.take(matches, "witness_file", "witness-file")? {
        args.witness_file = Some(v);
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}

pub fn apply_advantage(args: &mut AdvantageArgs, matches: &ArgMatches) -> CliResult<()> {
    let Some(path) = args.config.clone() else {
        return Ok(());
    };
    let mut cfg = Cfg::load(&path)?;
    if let Some(v) = cfg.take(matches, "target", "target")? {
        args.target = Some(v);
    }
    if let Some(v) = cfg.take(matches, "l_max", "l-max")? {
        args.l_max = v;
    }
    if let Some(v) = cfg.take(matches, "budget", "budget")? {
        args.budget = v;
    }
    if let Some(v) = cfg.take(matches, "witness_file", "witness-file")? {
        args.witness_file = Some(v);
    }
    if let Some(v) = cfg.take(matches, "format", "format")? {
        args.format = v;
    }
    if let Some(v) = cfg.take(matches, "out", "out")? {
        args.out = v;
    }
    cfg.finish()
}
