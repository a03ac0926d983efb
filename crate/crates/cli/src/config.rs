//! Flat `key=value` experiment configuration.
//!
//! Every key has a default; a config file and command-line overrides are
//! layered on top, in that order. Unknown keys are rejected so that a typo
//! can never silently fall back to a default.

use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::CliError;

/// Known keys with their defaults and a one-line description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("family", "sc-ldpc", "sc-ldpc, gscpcc, scscc, hscbcc or staircase"),
    ("length", "50", "coupling length L"),
    ("memory", "1", "coupling memory m"),
    ("lifting", "500", "lifting factor M of SC-LDPC codes"),
    ("spreading", "regular", "SC-LDPC edge spreading: `regular` or components `2 2;1 1` (rows split by `/`)"),
    ("code", "", "QC matrix file; replaces construction by lifting"),
    ("code-seed", "1", "seed for shifts, interleavers and puncturing patterns"),
    ("target-rate", "", "puncture to this rate, e.g. 1/2"),
    ("puncture", "", "SC-LDPC puncturing fraction (instead of target-rate)"),
    ("channel", "bec", "bec, bsc or biawgn"),
    ("params", "0.45", "comma-separated channel parameters (erasure, crossover or Eb/N0 in dB)"),
    ("window", "auto", "window size; 0 is full BP; auto is family dependent"),
    ("iters", "auto", "iteration budget; auto is family dependent"),
    ("frames", "1000", "maximum frames per channel parameter"),
    ("target-errors", "100", "stop a point after this many frame errors"),
    ("seed", "1", "master seed of the frame random streams"),
    ("tol", "1e-5", "bisection tolerance of thresholds"),
    ("gen", "auto", "component code, e.g. [1,5/7]"),
    ("q", "1", "GSC-PCC repetition factor"),
    ("lambda-r", "1", "GSC-PCC fraction of repeated bits"),
    ("sigma", "2", "HSC-BCC coupling parameter"),
    ("block", "2000", "information bits per chain position of turbo-like codes"),
    ("component", "254,238,2", "staircase component n,k,t"),
    ("blocks", "20", "staircase information blocks"),
    ("ihdd-window", "5", "staircase decoding window in blocks"),
    ("output", "-", "result file; - is standard output"),
    ("summary", "", "JSON summary file of `trace`; empty is standard error"),
    ("threads", "0", "worker threads; 0 uses all cores"),
];

/// Keys that never change results and are left out of the config hash.
const UNHASHED: &[&str] = &["output", "summary", "threads"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Construct,
    Threshold,
    Ber,
    Trace,
    Girth,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Construct => "construct",
            Command::Threshold => "threshold",
            Command::Ber => "ber",
            Command::Trace => "trace",
            Command::Girth => "girth",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    ScLdpc,
    GscPcc,
    ScScc,
    HscBcc,
    Staircase,
}

impl FromStr for Family {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "sc-ldpc" => Family::ScLdpc,
            "gscpcc" => Family::GscPcc,
            "scscc" => Family::ScScc,
            "hscbcc" => Family::HscBcc,
            "staircase" => Family::Staircase,
            _ => return Err(CliError::Config(format!("unknown family {s:?}"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelKind {
    Bec,
    Bsc,
    BiAwgn,
}

impl FromStr for ChannelKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "bec" => ChannelKind::Bec,
            "bsc" => ChannelKind::Bsc,
            "biawgn" => ChannelKind::BiAwgn,
            _ => return Err(CliError::Config(format!("unknown channel {s:?}"))),
        })
    }
}

/// Raw settings: every known key mapped to its effective value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Settings {
    /// Sets one key; unknown keys are a config error.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => Err(CliError::Config(format!("unknown key {key:?}"))),
        }
    }

    /// Applies a config file: one `key=value` per line, `#` starts a comment.
    pub fn apply_file(&mut self, text: &str) -> Result<(), CliError> {
        let mut seen = std::collections::BTreeSet::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", n + 1)))?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(CliError::Config(format!("line {}: duplicate key {key:?}", n + 1)));
            }
            self.set(key, value)?;
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("known key")
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<T, CliError> {
        let raw = self.get(key);
        raw.parse()
            .map_err(|_| CliError::Config(format!("{key} = {raw:?} is not a valid value")))
    }

    fn optional<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.get(key) {
            "" => Ok(None),
            _ => self.parse(key).map(Some),
        }
    }

    /// `key=value` lines of every result-affecting key, sorted.
    pub fn canonical(&self, command: Command) -> String {
        let mut out = format!("command={}\n", command.name());
        for (k, v) in &self.values {
            if !UNHASHED.contains(&k.as_str()) {
                out.push_str(&format!("{k}={v}\n"));
            }
        }
        out
    }

    pub fn hash(&self, command: Command) -> String {
        let digest = Sha256::digest(self.canonical(command).as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Auto-or-number setting.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Auto {
    Auto,
    Value(usize),
}

impl FromStr for Auto {
    type Err = std::num::ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            Ok(Auto::Auto)
        } else {
            s.parse().map(Auto::Value)
        }
    }
}

impl Auto {
    pub fn or(self, default: usize) -> usize {
        match self {
            Auto::Auto => default,
            Auto::Value(v) => v,
        }
    }
}

/// Typed, validated experiment configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub family: Family,
    pub length: usize,
    pub memory: usize,
    pub lifting: usize,
    pub spreading: Option<Vec<Vec<Vec<u32>>>>,
    pub code: Option<String>,
    pub code_seed: u64,
    pub target_rate: Option<sccode::chain::Rate>,
    pub puncture: Option<f64>,
    pub channel: ChannelKind,
    pub params: Vec<f64>,
    pub window: Auto,
    pub iters: Auto,
    pub frames: usize,
    pub target_errors: usize,
    pub seed: u64,
    pub tol: f64,
    pub generator: Option<String>,
    pub q: u64,
    pub lambda_r: sccode::chain::Rate,
    pub sigma: usize,
    pub block: usize,
    pub component: (usize, usize, usize),
    pub blocks: usize,
    pub ihdd_window: usize,
    pub output: String,
    pub summary: Option<String>,
    pub threads: usize,
    pub hash: String,
    pub canonical: String,
}

fn parse_spreading(raw: &str) -> Result<Vec<Vec<Vec<u32>>>, CliError> {
    raw.split(';')
        .map(|component| {
            component
                .split('/')
                .map(|row| {
                    row.split_whitespace()
                        .map(|e| {
                            e.parse()
                                .map_err(|_| CliError::Config(format!("spreading entry {e:?} is not an integer")))
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

impl ExperimentConfig {
    pub fn from_settings(command: Command, s: &Settings) -> Result<Self, CliError> {
        let component: Vec<usize> = s
            .get("component")
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Config("component must be n,k,t".into()))?;
        let component = match component[..] {
            [n, k, t] => (n, k, t),
            _ => return Err(CliError::Config("component must be n,k,t".into())),
        };
        let params: Vec<f64> = s
            .get("params")
            .split(',')
            .map(|p| p.trim().parse())
            .collect::<Result<_, _>>()
            .map_err(|_| CliError::Config(format!("params = {:?} is not a list of numbers", s.get("params"))))?;
        let cfg = Self {
            command,
            family: s.parse("family")?,
            length: s.parse("length")?,
            memory: s.parse("memory")?,
            lifting: s.parse("lifting")?,
            spreading: match s.get("spreading") {
                "regular" => None,
                raw => Some(parse_spreading(raw)?),
            },
            code: s.optional("code")?,
            code_seed: s.parse("code-seed")?,
            target_rate: s.optional("target-rate")?,
            puncture: s.optional("puncture")?,
            channel: s.parse("channel")?,
            params,
            window: s.parse("window")?,
            iters: s.parse("iters")?,
            frames: s.parse("frames")?,
            target_errors: s.parse("target-errors")?,
            seed: s.parse("seed")?,
            tol: s.parse("tol")?,
            generator: match s.get("gen") {
                "auto" => None,
                g => Some(g.to_string()),
            },
            q: s.parse("q")?,
            lambda_r: s.parse("lambda-r")?,
            sigma: s.parse("sigma")?,
            block: s.parse("block")?,
            component,
            blocks: s.parse("blocks")?,
            ihdd_window: s.parse("ihdd-window")?,
            output: s.get("output").to_string(),
            summary: s.optional("summary")?,
            threads: s.parse("threads")?,
            hash: s.hash(command),
            canonical: s.canonical(command),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        let bad = |msg: String| Err(CliError::Config(msg));
        if matches!(self.command, Command::Ber | Command::Trace) && self.frames == 0 {
            return bad("frames must be at least 1".into());
        }
        if self.target_errors == 0 {
            return bad("target-errors must be at least 1".into());
        }
        if self.params.is_empty() || self.params.iter().any(|p| !p.is_finite()) {
            return bad("params must be finite numbers".into());
        }
        let increasing = self.params.windows(2).all(|w| w[0] < w[1]);
        let decreasing = self.params.windows(2).all(|w| w[0] > w[1]);
        if !increasing && !decreasing {
            return bad("params must be strictly monotone".into());
        }
        if self.command == Command::Trace && self.params.len() != 1 {
            return bad("trace takes a single erasure probability".into());
        }
        if self.channel != ChannelKind::BiAwgn && self.params.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("channel parameters must be probabilities".into());
        }
        if let Some(r) = self.target_rate {
            if *r.numer() == 0 || r >= sccode::chain::Rate::from_integer(1) {
                return bad(format!("target-rate {r} must lie in (0, 1)"));
            }
        }
        if let Some(p) = self.puncture {
            if !(0.0..1.0).contains(&p) {
                return bad(format!("puncture {p} must lie in [0, 1)"));
            }
            if self.target_rate.is_some() {
                return bad("set either puncture or target-rate".into());
            }
        }
        if !(self.tol > 0.0 && self.tol < 0.5) {
            return bad(format!("tol {} must lie in (0, 0.5)", self.tol));
        }
        if self.family == Family::Staircase && self.command == Command::Ber && self.channel != ChannelKind::Bsc {
            return bad("staircase codes are simulated on the bsc".into());
        }
        if self.command == Command::Trace && self.channel != ChannelKind::Bec {
            return bad("trace runs on the bec".into());
        }
        if matches!(self.command, Command::Threshold | Command::Trace | Command::Construct | Command::Girth)
            && self.family != Family::ScLdpc
        {
            return bad(format!("{} supports only the sc-ldpc family", self.command.name()));
        }
        if matches!(self.iters, Auto::Value(0)) {
            return bad("iters must be at least 1".into());
        }
        Ok(())
    }

    /// Header comment lines shared by every output file.
    pub fn header(&self) -> String {
        let mut out = format!("#schema=1\n#config_hash={}\n", self.hash);
        for line in self.canonical.lines() {
            out.push_str(&format!("#{line}\n"));
        }
        out
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
