//! Run configuration: JSON document, command-line overrides, validation and
//! the config hash that names every output.

use std::fmt;
use std::path::PathBuf;

use flipline::Tolerances;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Landscape,
    Orbits,
    Rates,
    Activation,
    Sweep,
    Oracle,
    Figure,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Landscape => "landscape",
            Command::Orbits => "orbits",
            Command::Rates => "rates",
            Command::Activation => "activation",
            Command::Sweep => "sweep",
            Command::Oracle => "oracle",
            Command::Figure => "figure",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FigureId {
    Fig5,
    Fig6,
    Fig7,
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig5 => "fig5",
            FigureId::Fig6 => "fig6",
            FigureId::Fig7 => "fig7",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    Mu,
    AlphaD,
    Lambda,
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Params {
    pub mu: f64,
    pub alpha_d: f64,
    pub lambda: f64,
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub scale: Spacing,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        let n = self.count;
        (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                match self.scale {
                    Spacing::Linear => self.start + t * (self.stop - self.start),
                    Spacing::Log => self.start * (self.stop / self.start).powf(t),
                }
            })
            .collect()
    }
}

/// Sampling of the g axis (orbits, fig5) or of the α_d axis (fig6).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub count: usize,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default)]
    pub start: Option<f64>,
    #[serde(default)]
    pub stop: Option<f64>,
}

/// A validated configuration; serializes canonically for hashing.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: Params,
    pub sweep: Option<SweepSpec>,
    pub grid: GridSpec,
    pub tolerances: Tolerances,
    pub figure_id: Option<FigureId>,
    #[serde(skip)]
    pub output_dir: PathBuf,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawParams {
    mu: Option<f64>,
    alpha_d: Option<f64>,
    lambda: Option<f64>,
    kappa: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    parameter: Option<String>,
    start: Option<f64>,
    stop: Option<f64>,
    count: Option<usize>,
    #[serde(default)]
    scale: Spacing,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Option<Command>,
    params: Option<RawParams>,
    sweep: Option<RawSweep>,
    grid: Option<GridSpec>,
    output_dir: Option<PathBuf>,
    tolerances: Option<Tolerances>,
    figure_id: Option<FigureId>,
}

/// Values given on the command line; they take precedence over the document.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub figure_id: Option<FigureId>,
    pub mu: Option<f64>,
    pub alpha_d: Option<f64>,
    pub lambda: Option<f64>,
    pub kappa: Option<f64>,
    pub out: Option<PathBuf>,
}

/// Parses and validates a configuration document without overrides.
pub fn parse_config(text: &str) -> Result<RunConfig, CliError> {
    parse_with(text, &Overrides::default())
}

pub fn parse_with(text: &str, ov: &Overrides) -> Result<RunConfig, CliError> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    validate(raw, ov)
}

fn figure_defaults(id: FigureId) -> Params {
    // classical figures: λ and κ do not enter
    match id {
        FigureId::Fig5 => Params { mu: 0.2, alpha_d: 0.1, lambda: 1.0, kappa: 1.0 },
        FigureId::Fig6 | FigureId::Fig7 => Params { mu: f64::NAN, alpha_d: 0.0, lambda: 1.0, kappa: 1.0 },
    }
}

fn default_grid(command: Command, figure: Option<FigureId>) -> GridSpec {
    let count = match (command, figure) {
        (Command::Figure, Some(FigureId::Fig5)) => 240,
        (Command::Figure, Some(FigureId::Fig6)) => 12,
        (Command::Figure, _) => 200,
        _ => 101,
    };
    GridSpec { count, spacing: Spacing::Linear, start: None, stop: None }
}

fn validate(raw: RawConfig, ov: &Overrides) -> Result<RunConfig, CliError> {
    let mut v: Vec<String> = Vec::new();

    let command = match (ov.command, raw.command) {
        (Some(a), Some(b)) if a != b => {
            v.push(format!("command: the document says \"{b}\" but \"{a}\" was requested"));
            Some(a)
        }
        (Some(a), _) => Some(a),
        (None, Some(b)) => Some(b),
        (None, None) => {
            v.push("command: missing".into());
            None
        }
    };

    let figure_id = ov.figure_id.or(raw.figure_id);
    match (command, figure_id) {
        (Some(Command::Figure), None) => v.push("figure_id: required for the figure command".into()),
        (Some(c), Some(_)) if c != Command::Figure => v.push(format!("figure_id: only valid with the figure command, not {c}")),
        _ => {}
    }

    let rp = raw.params.unwrap_or_default();
    let defaults = match (command, figure_id) {
        (Some(Command::Figure), Some(id)) => Some(figure_defaults(id)),
        _ => None,
    };
    let mut field = |name: &str, o: Option<f64>, r: Option<f64>, d: Option<f64>| -> f64 {
        match o.or(r).or(d) {
            Some(x) => x,
            None => {
                v.push(format!("params.{name}: missing"));
                f64::NAN
            }
        }
    };
    let params = Params {
        mu: field("mu", ov.mu, rp.mu, defaults.map(|d| d.mu)),
        alpha_d: field("alpha_d", ov.alpha_d, rp.alpha_d, defaults.map(|d| d.alpha_d)),
        lambda: field("lambda", ov.lambda, rp.lambda, defaults.map(|d| d.lambda)),
        kappa: field("kappa", ov.kappa, rp.kappa, defaults.map(|d| d.kappa)),
    };
    let fig_free_mu = matches!(figure_id, Some(FigureId::Fig6 | FigureId::Fig7)) && command == Some(Command::Figure);
    for (name, x) in [("mu", params.mu), ("alpha_d", params.alpha_d), ("lambda", params.lambda), ("kappa", params.kappa)] {
        if x.is_nan() && name == "mu" && fig_free_mu {
            continue;
        }
        if !x.is_finite() && !v.iter().any(|s| s.starts_with(&format!("params.{name}:"))) {
            v.push(format!("params.{name}: must be finite"));
        }
    }
    if params.lambda.is_finite() && params.lambda <= 0.0 {
        v.push("params.lambda: must be > 0".into());
    }
    if params.kappa.is_finite() && params.kappa <= 0.0 {
        v.push("params.kappa: must be > 0".into());
    }
    if params.mu.is_finite() && params.mu > 2.0 {
        v.push("params.mu: must be ≤ 2".into());
    }

    let sweep = match (command, raw.sweep) {
        (Some(Command::Sweep), None) => {
            v.push("sweep: required for the sweep command".into());
            None
        }
        (Some(c), Some(_)) if c != Command::Sweep => {
            v.push(format!("sweep: only valid with the sweep command, not {c}"));
            None
        }
        (_, Some(s)) => validate_sweep(s, &mut v),
        (_, None) => None,
    };

    let grid = match raw.grid {
        Some(g) => {
            if g.count < 2 {
                v.push("grid.count: must be ≥ 2".into());
            }
            if let (Some(a), Some(b)) = (g.start, g.stop) {
                if !(a.is_finite() && b.is_finite() && a < b) {
                    v.push("grid: start must be finite and below stop".into());
                }
            }
            if g.start.is_some() != g.stop.is_some() {
                v.push("grid: give both start and stop or neither".into());
            }
            g
        }
        None => default_grid(command.unwrap_or(Command::Landscape), figure_id),
    };

    let tolerances = raw.tolerances.unwrap_or_default();
    for (name, x) in [
        ("root", tolerances.root),
        ("quad_rel", tolerances.quad_rel),
        ("critical", tolerances.critical),
        ("rate_floor", tolerances.rate_floor),
        ("resonance_window", tolerances.resonance_window),
    ] {
        if !(x.is_finite() && x > 0.0) {
            v.push(format!("tolerances.{name}: must be a positive number"));
        }
    }
    if tolerances.m_max == 0 {
        v.push("tolerances.m_max: must be ≥ 1".into());
    }
    if tolerances.max_dimension < 50 {
        v.push("tolerances.max_dimension: must be ≥ 50".into());
    }

    if !v.is_empty() {
        return Err(CliError::Validation { violations: v });
    }
    Ok(RunConfig {
        command: command.expect("checked"),
        params,
        sweep,
        grid,
        tolerances,
        figure_id,
        output_dir: ov.out.clone().or(raw.output_dir).unwrap_or_else(|| PathBuf::from(".")),
    })
}

fn validate_sweep(s: RawSweep, v: &mut Vec<String>) -> Option<SweepSpec> {
    let before = v.len();
    let parameter = match s.parameter.as_deref() {
        Some("mu") => Some(SweepParameter::Mu),
        Some("alpha_d") => Some(SweepParameter::AlphaD),
        Some("lambda") => Some(SweepParameter::Lambda),
        Some("kappa") => Some(SweepParameter::Kappa),
        Some(other) => {
            v.push(format!("sweep.parameter: \"{other}\" is not one of mu, alpha_d, lambda, kappa"));
            None
        }
        None => {
            v.push("sweep.parameter: missing".into());
            None
        }
    };
    let start = s.start.unwrap_or_else(|| {
        v.push("sweep.start: missing".into());
        f64::NAN
    });
    let stop = s.stop.unwrap_or_else(|| {
        v.push("sweep.stop: missing".into());
        f64::NAN
    });
    let count = s.count.unwrap_or_else(|| {
        v.push("sweep.count: missing".into());
        0
    });
    if s.count.is_some() && count < 2 {
        v.push("sweep.count: must be ≥ 2".into());
    }
    if start.is_finite() && stop.is_finite() {
        if start == stop {
            v.push("sweep: start must differ from stop".into());
        }
        if s.scale == Spacing::Log && !(start * stop > 0.0) {
            v.push("sweep: log scale needs start and stop of the same sign, both nonzero".into());
        }
    } else if s.start.is_some() && s.stop.is_some() {
        v.push("sweep: start and stop must be finite".into());
    }
    if v.len() > before {
        return None;
    }
    Some(SweepSpec { parameter: parameter?, start, stop, count, scale: s.scale })
}

impl RunConfig {
    /// Canonical JSON of everything that determines the results (the output
    /// directory excluded).
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON, hex encoded.
    pub fn hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_json().as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Prefix of the hash used in file names.
    pub fn short_hash(&self) -> String {
        self.hash()[..16].to_string()
    }

    pub fn model_params(&self) -> Result<flipline::ModelParams, CliError> {
        let p = &self.params;
        Ok(flipline::ModelParams::new(p.mu, p.alpha_d, p.lambda, p.kappa)?.with_tolerances(self.tolerances))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_landscape_config() {
        let c = parse_config(r#"{"command":"landscape","params":{"mu":0.2,"alpha_d":0.1,"lambda":0.05,"kappa":0.01}}"#).unwrap();
        assert_eq!(c.command, Command::Landscape);
        assert_eq!(c.params.alpha_d, 0.1);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn missing_lambda_is_named() {
        let e = parse_config(r#"{"command":"landscape","params":{"mu":0.2,"alpha_d":0.1,"kappa":0.01}}"#).unwrap_err();
        match e {
            CliError::Validation { violations } => {
                assert_eq!(violations.len(), 1);
                assert!(violations[0].contains("lambda"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn all_violations_are_listed() {
        let e = parse_config(r#"{"command":"sweep","params":{"mu":0.2,"lambda":-1,"kappa":0.01},"sweep":{"parameter":"beta","start":1,"stop":1,"count":1}}"#)
            .unwrap_err();
        let CliError::Validation { violations } = e else { panic!() };
        for needle in ["alpha_d", "lambda", "sweep.parameter", "sweep.count", "start must differ"] {
            assert!(violations.iter().any(|s| s.contains(needle)), "{needle}: {violations:?}");
        }
    }

    #[test]
    fn sweep_grid() {
        let c = parse_config(
            r#"{"command":"sweep","params":{"mu":0.2,"alpha_d":0.0,"lambda":0.05,"kappa":0.01},
                "sweep":{"parameter":"alpha_d","start":0,"stop":0.9,"count":50}}"#,
        )
        .unwrap();
        let vals = c.sweep.unwrap().values();
        assert_eq!(vals.len(), 50);
        assert_eq!(vals[0], 0.0);
        assert!((vals[49] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn unknown_keys_rejected_with_position() {
        let e = parse_config("{\"command\":\"landscape\",\n \"colour\":1}").unwrap_err();
        match e {
            CliError::Parse { line, message, .. } => {
                assert_eq!(line, 2);
                assert!(message.contains("colour"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn overrides_win_and_change_the_hash() {
        let text = r#"{"command":"landscape","params":{"mu":0.2,"alpha_d":0.1,"lambda":0.05,"kappa":0.01}}"#;
        let a = parse_config(text).unwrap();
        let b = parse_with(text, &Overrides { mu: Some(0.3), ..Default::default() }).unwrap();
        assert_eq!(b.params.mu, 0.3);
        assert_ne!(a.hash(), b.hash());
        let c = parse_with(text, &Overrides { out: Some("elsewhere".into()), ..Default::default() }).unwrap();
        assert_eq!(a.hash(), c.hash());
    }

    #[test]
    fn figure_defaults_filled() {
        let c = parse_config(r#"{"command":"figure","figure_id":"fig5"}"#).unwrap();
        assert_eq!((c.params.mu, c.params.alpha_d), (0.2, 0.1));
        let c = parse_config(r#"{"command":"figure","figure_id":"fig6"}"#).unwrap();
        assert!(c.params.mu.is_nan());
    }
}
