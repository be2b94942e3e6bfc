//! Run configuration resolved from a preset, a config file and flags, in
//! increasing order of precedence.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use cavity_bec::critical::DEFAULT_DOMINANCE;
use cavity_bec::spectral::BoundaryCondition;

use crate::{CliError, Command};

/// Every key accepted in a config file or as a flag.
pub const KEYS: [&str; 20] = [
    "L1",
    "L2",
    "L3",
    "bc",
    "m",
    "Q",
    "engine",
    "tmin",
    "tmax",
    "points",
    "scale",
    "format",
    "out",
    "a",
    "epsilon",
    "epsilon-max",
    "fit-floor",
    "dominance",
    "q-tilde",
    "decades",
];

const GEOMETRY: [&str; 6] = ["L1", "L2", "L3", "bc", "m", "Q"];
const SWEEP: [&str; 5] = ["engine", "tmin", "tmax", "points", "scale"];
const OUTPUT: [&str; 2] = ["format", "out"];

/// Keys a subcommand reads, in echo order.
pub fn keys_for(cmd: Command) -> Vec<&'static str> {
    let mut k: Vec<&str> = match cmd {
        Command::Fig1 => vec!["a", "bc", "epsilon-max", "fit-floor"],
        Command::Fig2 | Command::Fig4 => GEOMETRY.iter().chain(SWEEP.iter()).copied().collect(),
        Command::Fig3 => vec!["L1", "bc", "m", "q-tilde", "decades", "points", "dominance"],
        Command::Tc => GEOMETRY.to_vec(),
        Command::Count => vec!["a", "epsilon"],
        Command::Classify => GEOMETRY.iter().copied().chain(["dominance"]).collect(),
    };
    k.extend(OUTPUT);
    k
}

fn required_for(cmd: Command) -> &'static [&'static str] {
    match cmd {
        Command::Fig1 => &["a"],
        Command::Fig2 | Command::Fig4 | Command::Tc | Command::Classify => &["L1", "L2", "L3", "m", "Q"],
        Command::Fig3 => &["L1", "m", "q-tilde"],
        Command::Count => &["a", "epsilon"],
    }
}

/// Named parameter set.
pub struct Preset {
    pub name: &'static str,
    pub commands: &'static [Command],
    pub values: &'static [(&'static str, &'static str)],
}

const CAVITY_COMMANDS: &[Command] = &[Command::Fig2, Command::Fig4, Command::Tc, Command::Classify];

pub const PRESETS: &[Preset] = &[
    Preset { name: "fig1a", commands: &[Command::Fig1, Command::Count], values: &[("a", "1,1")] },
    Preset { name: "fig1b", commands: &[Command::Fig1, Command::Count], values: &[("a", "10,3")] },
    Preset {
        name: "fig2",
        commands: CAVITY_COMMANDS,
        values: &[("L1", "1"), ("L2", "10"), ("L3", "100"), ("Q", "10000"), ("m", "0.1"), ("bc", "neumann")],
    },
    Preset {
        name: "fig3",
        commands: &[Command::Fig3],
        values: &[("L1", "1"), ("m", "1"), ("q-tilde", "10000"), ("decades", "6"), ("bc", "neumann")],
    },
    Preset {
        name: "fig4a",
        commands: CAVITY_COMMANDS,
        values: &[("L1", "3"), ("L2", "3"), ("L3", "3"), ("Q", "100"), ("m", "2"), ("bc", "neumann")],
    },
    Preset {
        name: "fig4b",
        commands: CAVITY_COMMANDS,
        values: &[("L1", "2"), ("L2", "2"), ("L3", "300"), ("Q", "2000"), ("m", "1"), ("bc", "neumann")],
    },
    Preset {
        name: "fig4c",
        commands: CAVITY_COMMANDS,
        values: &[("L1", "2"), ("L2", "200"), ("L3", "200"), ("Q", "8000"), ("m", "0.5"), ("bc", "neumann")],
    },
    Preset {
        name: "fig4d",
        commands: CAVITY_COMMANDS,
        values: &[("L1", "2"), ("L2", "100"), ("L3", "600"), ("Q", "4000"), ("m", "0.5"), ("bc", "neumann")],
    },
    Preset {
        name: "fig4e",
        commands: CAVITY_COMMANDS,
        values: &[
            ("L1", "2"),
            ("L2", "100"),
            ("L3", "600"),
            ("Q", "4000"),
            ("m", "0.5"),
            ("bc", "neumann"),
            ("scale", "log"),
        ],
    },
];

pub fn find_preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

fn default_preset(cmd: Command) -> Option<&'static str> {
    match cmd {
        Command::Fig1 => Some("fig1a"),
        Command::Fig2 => Some("fig2"),
        Command::Fig3 => Some("fig3"),
        Command::Fig4 => Some("fig4a"),
        Command::Tc | Command::Count | Command::Classify => None,
    }
}

fn default_value(cmd: Command, key: &str) -> Option<String> {
    let figure = matches!(cmd, Command::Fig1 | Command::Fig2 | Command::Fig3 | Command::Fig4);
    let v = match (key, cmd) {
        ("bc", _) => "neumann".to_string(),
        ("engine", Command::Fig2) => "both".to_string(),
        ("engine", _) => "exact".to_string(),
        ("points", Command::Fig3) => "25".to_string(),
        ("points", _) => "200".to_string(),
        ("scale", _) => "linear".to_string(),
        ("format", _) => if figure { "csv" } else { "table" }.to_string(),
        ("epsilon-max", _) => "10000".to_string(),
        ("dominance", _) => DEFAULT_DOMINANCE.to_string(),
        ("decades", _) => "6".to_string(),
        _ => return None,
    };
    Some(v)
}

/// Where a resolved value came from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Source {
    Default,
    Preset(&'static str),
    Config,
    Flag,
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Default => f.write_str("default"),
            Source::Preset(p) => write!(f, "preset {p}"),
            Source::Config => f.write_str("config file"),
            Source::Flag => f.write_str("flag"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Setting {
    pub value: String,
    pub source: Source,
}

/// Raw key-value layers merged for one subcommand.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: Command,
    pub preset: Option<&'static str>,
    pub config: Option<PathBuf>,
    pub settings: BTreeMap<&'static str, Setting>,
}

fn known_key(key: &str) -> Option<&'static str> {
    KEYS.iter().copied().find(|k| *k == key)
}

/// Parses a line-based `key = value` file. Blank lines and lines starting
/// with `#` are skipped.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Validation(format!("config line {}: expected `key = value`", n + 1)))?;
        let (k, v) = (k.trim(), v.trim());
        if k != "preset" && known_key(k).is_none() {
            return Err(CliError::Validation(format!("config line {}: unknown key `{k}`", n + 1)));
        }
        out.push((k.to_string(), v.to_string()));
    }
    Ok(out)
}

/// Merges the layers. `flags` holds every flag value given on the command
/// line; a flag the subcommand does not read is an error.
pub fn resolve(
    cmd: Command,
    preset_flag: Option<&str>,
    config: Option<&Path>,
    flags: &[(&'static str, String)],
) -> Result<Resolved, CliError> {
    let file = match config {
        Some(p) => {
            let text =
                fs::read_to_string(p).map_err(|source| CliError::Io { path: p.display().to_string(), source })?;
            parse_config_file(&text)?
        }
        None => Vec::new(),
    };
    let file_preset = file.iter().rev().find(|(k, _)| k == "preset").map(|(_, v)| v.as_str());
    let preset_name = preset_flag.or(file_preset).or(default_preset(cmd));
    let preset = match preset_name {
        Some(name) => {
            let p = find_preset(name).ok_or_else(|| {
                let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
                CliError::Validation(format!("unknown preset `{name}`; choose one of {}", names.join(", ")))
            })?;
            if !p.commands.contains(&cmd) {
                return Err(CliError::Validation(format!("preset `{name}` does not apply to `{cmd}`")));
            }
            Some(p)
        }
        None => None,
    };

    let wanted = keys_for(cmd);
    let mut settings = BTreeMap::new();
    for &k in &wanted {
        if let Some(v) = default_value(cmd, k) {
            settings.insert(k, Setting { value: v, source: Source::Default });
        }
    }
    if let Some(p) = preset {
        for &(k, v) in p.values {
            if wanted.contains(&k) {
                settings.insert(k, Setting { value: v.to_string(), source: Source::Preset(p.name) });
            }
        }
    }
    for (k, v) in &file {
        if let Some(k) = known_key(k).filter(|k| wanted.contains(k)) {
            settings.insert(k, Setting { value: v.clone(), source: Source::Config });
        }
    }
    for (k, v) in flags {
        if !wanted.contains(k) {
            return Err(CliError::Validation(format!("--{k} is not used by `{cmd}`")));
        }
        settings.insert(k, Setting { value: v.clone(), source: Source::Flag });
    }
    let missing: Vec<&str> = required_for(cmd).iter().copied().filter(|k| !settings.contains_key(k)).collect();
    if !missing.is_empty() {
        return Err(CliError::Validation(format!(
            "`{cmd}` needs {}; pass them as flags, in a config file or through --preset",
            missing.iter().map(|k| format!("--{k}")).collect::<Vec<_>>().join(", ")
        )));
    }
    Ok(Resolved { command: cmd, preset: preset.map(|p| p.name), config: config.map(Path::to_path_buf), settings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EngineChoice {
    Exact,
    Asymptotic,
    Both,
}

impl EngineChoice {
    pub fn exact(self) -> bool {
        matches!(self, EngineChoice::Exact | EngineChoice::Both)
    }

    pub fn asymptotic(self) -> bool {
        matches!(self, EngineChoice::Asymptotic | EngineChoice::Both)
    }
}

impl FromStr for EngineChoice {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "exact" => Ok(EngineChoice::Exact),
            "asymptotic" => Ok(EngineChoice::Asymptotic),
            "both" => Ok(EngineChoice::Both),
            _ => Err("expected exact, asymptotic or both".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

impl FromStr for Scale {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "linear" => Ok(Scale::Linear),
            "log" => Ok(Scale::Log),
            _ => Err("expected linear or log".into()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Table,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "table" => Ok(Format::Table),
            _ => Err("expected csv, json or table".into()),
        }
    }
}

/// Temperature sweep; bounds left unset are derived from the reference
/// temperature of the subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sweep {
    pub tmin: Option<f64>,
    pub tmax: Option<f64>,
    pub points: usize,
    pub scale: Scale,
}

impl Sweep {
    pub fn temperatures(&self, tmin: f64, tmax: f64) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|k| {
                let s = k as f64 / (n - 1) as f64;
                match self.scale {
                    Scale::Linear => tmin + s * (tmax - tmin),
                    Scale::Log => tmin * (tmax / tmin).powf(s),
                }
            })
            .collect()
    }
}

/// Fully validated configuration of one run.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub preset: Option<&'static str>,
    pub config: Option<PathBuf>,
    /// Shortest edge of the fig3 grid.
    pub l1: Option<f64>,
    pub l: Option<[f64; 3]>,
    pub bc: BoundaryCondition,
    pub m: Option<f64>,
    pub q: Option<f64>,
    pub engine: EngineChoice,
    pub sweep: Sweep,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub a: Option<Vec<u64>>,
    pub epsilon: Option<f64>,
    pub epsilon_max: u64,
    pub fit_floor: Option<f64>,
    pub dominance: f64,
    pub q_tilde: Option<f64>,
    pub decades: f64,
    /// Resolved settings in echo order.
    pub echo: Vec<(&'static str, Setting)>,
}

fn bad(key: &str, value: &str, why: impl fmt::Display) -> CliError {
    CliError::Validation(format!("invalid {key} = `{value}`: {why}"))
}

struct Reader<'a>(&'a Resolved);

impl Reader<'_> {
    fn raw(&self, key: &str) -> Option<&str> {
        self.0.settings.get(key).map(|s| s.value.as_str())
    }

    fn parse<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError>
    where
        T::Err: fmt::Display,
    {
        self.raw(key).map(|v| v.parse::<T>().map_err(|e| bad(key, v, e))).transpose()
    }

    /// Positive finite number.
    fn positive(&self, key: &str) -> Result<Option<f64>, CliError> {
        let v = self.parse::<f64>(key)?;
        if let Some(x) = v {
            if !(x > 0.0) || !x.is_finite() {
                return Err(bad(key, self.raw(key).unwrap_or_default(), "must be positive and finite"));
            }
        }
        Ok(v)
    }

    fn list(&self, key: &str) -> Result<Option<Vec<u64>>, CliError> {
        let Some(v) = self.raw(key) else { return Ok(None) };
        let a =
            v.split(',').map(|s| s.trim().parse::<u64>()).collect::<Result<Vec<_>, _>>().map_err(|e| bad(key, v, e))?;
        if a.is_empty() || a.len() > 4 || a.contains(&0) {
            return Err(bad(key, v, "expected one to four positive integers"));
        }
        Ok(Some(a))
    }
}

impl RunConfig {
    pub fn from_resolved(r: &Resolved) -> Result<Self, CliError> {
        let rd = Reader(r);
        let l = match (rd.positive("L1")?, rd.positive("L2")?, rd.positive("L3")?) {
            (Some(a), Some(b), Some(c)) => Some([a, b, c]),
            _ => None,
        };
        let points: usize = rd.parse("points")?.unwrap_or(2);
        if points < 2 {
            return Err(bad("points", rd.raw("points").unwrap_or_default(), "need at least 2"));
        }
        let sweep = Sweep {
            tmin: rd.positive("tmin")?,
            tmax: rd.positive("tmax")?,
            points,
            scale: rd.parse("scale")?.unwrap_or(Scale::Linear),
        };
        if let (Some(lo), Some(hi)) = (sweep.tmin, sweep.tmax) {
            if !(hi > lo) {
                return Err(CliError::Validation(format!("tmax = {hi} must exceed tmin = {lo}")));
            }
        }
        let a = rd.list("a")?;
        if r.command == Command::Fig1 {
            if let Some(a) = &a {
                if a.len() != 2 {
                    return Err(bad("a", rd.raw("a").unwrap_or_default(), "fig1 takes two entries a1,a2"));
                }
            }
        }
        let epsilon_max: u64 = rd.parse("epsilon-max")?.unwrap_or(10_000);
        if !(1..=10_000_000).contains(&epsilon_max) {
            return Err(bad("epsilon-max", rd.raw("epsilon-max").unwrap_or_default(), "must lie in 1..=10000000"));
        }
        let fit_floor = rd.positive("fit-floor")?;
        let dominance = rd.positive("dominance")?.unwrap_or(DEFAULT_DOMINANCE);
        if dominance < 1.0 {
            return Err(bad("dominance", rd.raw("dominance").unwrap_or_default(), "must be at least 1"));
        }
        let decades = rd.positive("decades")?.unwrap_or(6.0);
        if decades > 12.0 {
            return Err(bad("decades", rd.raw("decades").unwrap_or_default(), "at most 12"));
        }
        let bc = rd.parse::<BoundaryCondition>("bc")?.unwrap_or(BoundaryCondition::Neumann);
        let echo = keys_for(r.command).into_iter().filter_map(|k| r.settings.get(k).map(|s| (k, s.clone()))).collect();
        Ok(RunConfig {
            command: r.command,
            preset: r.preset,
            config: r.config.clone(),
            l1: rd.positive("L1")?,
            l,
            bc,
            m: rd.positive("m")?,
            q: rd.positive("Q")?,
            engine: rd.parse("engine")?.unwrap_or(EngineChoice::Exact),
            sweep,
            format: rd.parse("format")?.unwrap_or(Format::Csv),
            out: rd.raw("out").map(PathBuf::from),
            a,
            epsilon: rd.positive("epsilon")?,
            epsilon_max,
            fit_floor,
            dominance,
            q_tilde: rd.positive("q-tilde")?,
            decades,
            echo,
        })
    }
}
