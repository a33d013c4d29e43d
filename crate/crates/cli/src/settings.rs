//! Command-line flags, the optional config file, and their merge.
//!
//! Precedence is flag over config file over the command's default. The
//! config file holds one `key = value` pair per line; `#` starts a comment.
//! Keys are the long flag names, with `-` or `_`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use irho_core::ensemble::PreparationMode;
use irho_core::protocol::{Bits, BlockSource, BobDevice, PhysicalStrategy};
use irho_core::qstate::{basis_from_axis, Basis};
use irho_core::stats::DEFAULT_SIGNIFICANCE;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    PartialTrace,
    RhoEquality,
    Nosignal,
    FtlDemo,
    FlashDemo,
    Chsh,
    Tomography,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Device {
    Physical,
    BasisOracle,
    CloneOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Sampled,
    ExactHalf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Source {
    Entangled,
    Direct,
}

/// Run one of the irho experiments and write its records.
#[derive(Debug, Parser)]
#[command(name = "irho", version)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// Flat `key = value` file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; stdout if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Block size, samples per arm or setting, shots per axis, or random bases, depending on the command.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub message: Option<String>,
    #[arg(long, value_enum)]
    pub device: Option<Device>,
    #[arg(long)]
    pub m_clones: Option<usize>,
    /// `theta,phi` in radians, or up-down, left-right, in-out.
    #[arg(long)]
    pub basis0: Option<String>,
    #[arg(long)]
    pub basis1: Option<String>,
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    #[arg(long)]
    pub differential: bool,
    /// Number of independent trials or runs.
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long, value_enum)]
    pub source: Option<Source>,
    /// Significance level of the physical receiver's tests.
    #[arg(long)]
    pub alpha: Option<f64>,
}

const CONFIG_KEYS: &[&str] = &[
    "seed",
    "out",
    "format",
    "n",
    "message",
    "device",
    "m_clones",
    "basis0",
    "basis1",
    "mode",
    "differential",
    "trials",
    "source",
    "alpha",
];

pub fn parse_config(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(
                format!("config line {}", line_no + 1),
                "expected `key = value`",
            )
        })?;
        let key = key.trim().replace('-', "_");
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(CliError::usage(key, "unknown config key"));
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            return Err(CliError::usage(key, "key given twice"));
        }
    }
    Ok(map)
}

/// A basis together with the text it was given as, kept for hashing.
#[derive(Debug, Clone)]
pub struct NamedBasis {
    pub basis: Basis,
    pub text: String,
}

impl FromStr for NamedBasis {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (basis, text) = match s.trim() {
            "up-down" => (Basis::up_down(), "up-down".to_string()),
            "left-right" | "right-left" => (Basis::right_left(), "left-right".to_string()),
            "in-out" => (Basis::in_out(), "in-out".to_string()),
            other => {
                let (t, p) = other
                    .split_once(',')
                    .ok_or("expected theta,phi or a named basis")?;
                let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
                let (t, p) = (parse(t)?, parse(p)?);
                let basis = basis_from_axis(t, p).map_err(|e| e.to_string())?;
                (basis, format!("{t},{p}"))
            }
        };
        Ok(NamedBasis { basis, text })
    }
}

/// Fully resolved run parameters.
#[derive(Debug, Clone)]
pub struct Settings {
    pub command: Command,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub n: usize,
    pub trials: usize,
    pub m_clones: usize,
    pub message: Bits,
    pub device: Device,
    pub basis0: NamedBasis,
    pub basis1: NamedBasis,
    pub mode: Mode,
    pub source: Source,
    pub differential: bool,
    pub alpha: f64,
}

struct Defaults {
    n: usize,
    trials: usize,
    m_clones: usize,
}

fn defaults(command: Command) -> Defaults {
    let (n, trials, m_clones) = match command {
        Command::PartialTrace => (1, 1, 1),
        Command::RhoEquality => (1000, 1, 1),
        Command::Nosignal => (100_000, 1, 1),
        Command::FtlDemo => (100, 1, 1000),
        Command::FlashDemo => (16, 1000, 10_000),
        Command::Chsh => (100_000, 1, 1),
        Command::Tomography => (10_000, 1000, 1),
    };
    Defaults {
        n,
        trials,
        m_clones,
    }
}

struct Layer<'a> {
    config: &'a BTreeMap<String, String>,
}

impl Layer<'_> {
    fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.config
            .get(key)
            .map(|raw| {
                raw.parse::<T>()
                    .map_err(|e| CliError::usage(key, e.to_string()))
            })
            .transpose()
    }

    fn pick_enum<T: ValueEnum>(&self, key: &str, flag: Option<T>) -> Result<Option<T>> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.config
            .get(key)
            .map(|raw| T::from_str(raw, false).map_err(|e| CliError::usage(key, e)))
            .transpose()
    }
}

fn positive(field: &str, value: usize) -> Result<usize> {
    if value == 0 {
        return Err(CliError::usage(field, "must be at least 1"));
    }
    Ok(value)
}

impl Settings {
    pub fn resolve(args: Args, config: &BTreeMap<String, String>) -> Result<Self> {
        let layer = Layer { config };
        let d = defaults(args.command);
        let message = layer
            .pick::<String>("message", args.message)?
            .unwrap_or_else(|| "1011".to_string());
        let message: Bits = message
            .parse()
            .map_err(|e: irho_core::Error| CliError::usage("message", e.to_string()))?;
        let differential =
            args.differential || layer.pick::<bool>("differential", None)?.unwrap_or(false);
        let alpha = layer
            .pick::<f64>("alpha", args.alpha)?
            .unwrap_or(DEFAULT_SIGNIFICANCE);
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::usage("alpha", "must lie in (0, 1)"));
        }
        Ok(Settings {
            command: args.command,
            seed: layer.pick("seed", args.seed)?.unwrap_or(0),
            out: layer.pick("out", args.out)?,
            format: layer
                .pick_enum("format", args.format)?
                .unwrap_or(Format::Json),
            n: positive("n", layer.pick("n", args.n)?.unwrap_or(d.n))?,
            trials: positive(
                "trials",
                layer.pick("trials", args.trials)?.unwrap_or(d.trials),
            )?,
            m_clones: positive(
                "m_clones",
                layer.pick("m_clones", args.m_clones)?.unwrap_or(d.m_clones),
            )?,
            message,
            device: layer
                .pick_enum("device", args.device)?
                .unwrap_or(Device::Physical),
            basis0: layer
                .pick(
                    "basis0",
                    args.basis0
                        .map(|s| s.parse())
                        .transpose()
                        .map_err(|e| CliError::usage("basis0", e))?,
                )?
                .unwrap_or_else(|| "up-down".parse().expect("named basis")),
            basis1: layer
                .pick(
                    "basis1",
                    args.basis1
                        .map(|s| s.parse())
                        .transpose()
                        .map_err(|e| CliError::usage("basis1", e))?,
                )?
                .unwrap_or_else(|| "left-right".parse().expect("named basis")),
            mode: layer.pick_enum("mode", args.mode)?.unwrap_or(Mode::Sampled),
            source: layer
                .pick_enum("source", args.source)?
                .unwrap_or(Source::Entangled),
            differential,
            alpha,
        })
    }

    pub fn bob_device(&self) -> BobDevice {
        match self.device {
            Device::Physical => BobDevice::Physical {
                strategy: PhysicalStrategy::Reference { alpha: self.alpha },
            },
            Device::BasisOracle => BobDevice::BasisOracle,
            Device::CloneOracle => BobDevice::CloneOracle {
                m_clones: self.m_clones,
            },
        }
    }

    pub fn preparation_mode(&self) -> PreparationMode {
        match self.mode {
            Mode::Sampled => PreparationMode::Sampled,
            Mode::ExactHalf => PreparationMode::ExactHalf,
        }
    }

    pub fn block_source(&self) -> BlockSource {
        match self.source {
            Source::Entangled => BlockSource::Entangled,
            Source::Direct => BlockSource::Direct,
        }
    }

    pub fn command_name(&self) -> String {
        value_name(&self.command)
    }

    /// Canonical text of everything that influences the records. The output
    /// path and format are excluded.
    pub fn canonical(&self) -> String {
        [
            ("command", self.command_name()),
            ("seed", self.seed.to_string()),
            ("n", self.n.to_string()),
            ("trials", self.trials.to_string()),
            ("m_clones", self.m_clones.to_string()),
            ("message", self.message.to_string()),
            ("device", value_name(&self.device)),
            ("basis0", self.basis0.text.clone()),
            ("basis1", self.basis1.text.clone()),
            ("mode", value_name(&self.mode)),
            ("source", value_name(&self.source)),
            ("differential", self.differential.to_string()),
            ("alpha", self.alpha.to_string()),
        ]
        .iter()
        .map(|(k, v)| format!("{k}={v}\n"))
        .collect()
    }

    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))[..16].to_string()
    }
}

pub fn value_name<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .expect("no skipped variants")
        .get_name()
        .to_string()
}

/// Uniformly random basis axis from two uniform draws.
pub fn random_basis(u: f64, v: f64) -> Basis {
    let theta = (1.0 - 2.0 * u).clamp(-1.0, 1.0).acos().min(PI);
    basis_from_axis(theta, 2.0 * PI * v).expect("angles in range")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn args(extra: &[&str]) -> Args {
        Args::try_parse_from(["irho"].iter().chain(extra)).unwrap()
    }

    #[test]
    fn config_file_syntax() {
        let map = parse_config("# comment\nseed = 9\nm-clones=5 # trailing\n\n").unwrap();
        assert_eq!(map["seed"], "9");
        assert_eq!(map["m_clones"], "5");
        assert!(
            matches!(parse_config("bogus = 1"), Err(CliError::Usage { field, .. }) if field == "bogus")
        );
        assert!(parse_config("seed 9").is_err());
        assert!(parse_config("seed = 1\nseed = 2").is_err());
    }

    #[test]
    fn flags_override_config() {
        let cfg = parse_config("seed = 9\nn = 3\ndevice = basis-oracle").unwrap();
        let s = Settings::resolve(args(&["ftl-demo", "--seed", "4"]), &cfg).unwrap();
        assert_eq!((s.seed, s.n, s.device), (4, 3, Device::BasisOracle));
    }

    #[test]
    fn bad_values_name_their_field() {
        let cfg = parse_config("n = many").unwrap();
        let err = Settings::resolve(args(&["chsh"]), &cfg).unwrap_err();
        assert!(matches!(err, CliError::Usage { ref field, .. } if field == "n"));
        let err =
            Settings::resolve(args(&["chsh", "--basis0", "4,0"]), &BTreeMap::new()).unwrap_err();
        assert!(matches!(err, CliError::Usage { ref field, .. } if field == "basis0"));
        let err = Settings::resolve(args(&["ftl-demo", "--message", "10a"]), &BTreeMap::new())
            .unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn named_bases() {
        let lr: NamedBasis = "left-right".parse().unwrap();
        assert_eq!(lr.basis, Basis::right_left());
        let custom: NamedBasis = "1.5, 0.25".parse().unwrap();
        assert_eq!(custom.text, "1.5,0.25");
        assert!("sideways".parse::<NamedBasis>().is_err());
    }

    #[test]
    fn hash_ignores_output_location() {
        let a =
            Settings::resolve(args(&["nosignal", "--out", "a.jsonl"]), &BTreeMap::new()).unwrap();
        let b =
            Settings::resolve(args(&["nosignal", "--format", "csv"]), &BTreeMap::new()).unwrap();
        let c = Settings::resolve(args(&["nosignal", "--seed", "1"]), &BTreeMap::new()).unwrap();
        assert_eq!(a.config_hash(), b.config_hash());
        assert_ne!(a.config_hash(), c.config_hash());
        assert_eq!(a.config_hash().len(), 16);
    }
}
