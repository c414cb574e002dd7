//! Run configuration: command-line flags layered over an optional TOML or
//! JSON file, resolved into a validated [`RunConfig`].

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, ValueEnum};
use dicke_core::wigner::GridSpec;
use dicke_core::{CouplingMode, ModelParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    ScanEntropy,
    FixedPoints,
    Bifurcation,
    Wigner,
    Trajectory,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::ScanEntropy => "scan-entropy",
            Command::FixedPoints => "fixed-points",
            Command::Bifurcation => "bifurcation",
            Command::Wigner => "wigner",
            Command::Trajectory => "trajectory",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Integrable,
    Symmetric,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

/// START:END:STEP, inclusive of END up to rounding.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaRange {
    pub start: f64,
    pub end: f64,
    pub step: f64,
}

impl LambdaRange {
    pub fn grid(&self) -> Vec<f64> {
        let n = ((self.end - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

impl FromStr for LambdaRange {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("lambda range `{s}` is not START:END:STEP"));
        }
        let num = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("lambda range `{s}`: {e}"));
        let r = LambdaRange { start: num(parts[0])?, end: num(parts[1])?, step: num(parts[2])? };
        if !(r.step > 0.0) || !r.step.is_finite() {
            return Err(format!("lambda step must be > 0, got {}", r.step));
        }
        if !(r.start >= 0.0 && r.end >= r.start && r.end.is_finite()) {
            return Err(format!("lambda range needs 0 <= START <= END, got {s}"));
        }
        Ok(r)
    }
}

impl fmt::Display for LambdaRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.end, self.step)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "dicke-lab",
    version,
    allow_negative_numbers = true,
    about = "Dicke model laboratory: entropy scans, classical fixed points, atomic Wigner functions"
)]
pub struct Cli {
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

/// Every flag is optional; unset flags fall back to the file, then to
/// defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// TOML or JSON file with the same keys as the flags (underscored).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Spin J (2J must be a positive integer). Required.
    #[arg(long)]
    pub j: Option<f64>,
    /// Field frequency, default 1.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Atomic level splitting, default 1.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Default 1.
    #[arg(long)]
    pub hbar: Option<f64>,
    /// Rotating coupling for single-point commands, default 0.
    #[arg(long)]
    pub g: Option<f64>,
    /// Counter-rotating coupling.
    #[arg(long = "g-prime")]
    pub g_prime: Option<f64>,
    /// Inferred from --g-prime when absent.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// START:END:STEP in λ = G/ε.
    #[arg(long)]
    pub lambda: Option<String>,
    /// Photon cutoff; converged automatically when absent.
    #[arg(long = "n-max")]
    pub n_max: Option<usize>,
    /// Output directory, default dicke-out.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Comma-separated subset of csv,json,svg.
    #[arg(long)]
    pub format: Option<String>,
    /// Wigner grid cells per side, default 512.
    #[arg(long = "grid-points")]
    pub grid_points: Option<usize>,
    /// Wigner grid radius in the unit disc, default 0.999.
    #[arg(long = "grid-radius")]
    pub grid_radius: Option<f64>,
    /// Energy shell for `trajectory`.
    #[arg(long)]
    pub energy: Option<f64>,
    /// Trajectory length, default 100.
    #[arg(long = "t-final")]
    pub t_final: Option<f64>,
}

/// On-disk schema. Unknown keys are rejected.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub j: Option<f64>,
    pub omega: Option<f64>,
    pub epsilon: Option<f64>,
    pub hbar: Option<f64>,
    pub g: Option<f64>,
    pub g_prime: Option<f64>,
    pub mode: Option<Mode>,
    pub lambda: Option<String>,
    pub n_max: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<Vec<Format>>,
    pub grid_points: Option<usize>,
    pub grid_radius: Option<f64>,
    pub energy: Option<f64>,
    pub t_final: Option<f64>,
}

impl FileConfig {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let parsed = if is_json {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub mode: Mode,
    pub lambda: LambdaRange,
    pub n_max: Option<usize>,
    pub out: PathBuf,
    pub formats: BTreeSet<Format>,
    pub grid: GridSpec,
    pub energy: Option<f64>,
    pub t_final: f64,
}

pub const DEFAULT_LAMBDA: &str = "0:2:0.01";
pub const DEFAULT_OUT: &str = "dicke-out";
pub const DEFAULT_T_FINAL: f64 = 100.0;

fn config_err(e: impl fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    /// Resolves `flags` over the file named by `--config`, if any.
    pub fn load(command: Command, flags: &Flags) -> Result<Self, CliError> {
        let file = match &flags.config {
            Some(p) => FileConfig::read(p)?,
            None => FileConfig::default(),
        };
        Self::resolve(command, flags, file)
    }

    pub fn resolve(command: Command, flags: &Flags, file: FileConfig) -> Result<Self, CliError> {
        let j = flags.j.or(file.j).ok_or_else(|| config_err("missing required field `j`"))?;
        let omega = flags.omega.or(file.omega).unwrap_or(1.0);
        let epsilon = flags.epsilon.or(file.epsilon).unwrap_or(1.0);
        let hbar = flags.hbar.or(file.hbar).unwrap_or(1.0);
        let g = flags.g.or(file.g).unwrap_or(0.0);
        let g_prime_set = flags.g_prime.or(file.g_prime);
        let mode = flags.mode.or(file.mode).unwrap_or(match g_prime_set {
            Some(gp) if gp != 0.0 => Mode::Custom,
            _ => Mode::Integrable,
        });
        let g_prime = match (mode, g_prime_set) {
            (Mode::Integrable, Some(gp)) if gp != 0.0 => {
                return Err(config_err(format!("mode integrable requires g_prime = 0, got {gp}")));
            }
            (Mode::Integrable, _) => 0.0,
            (Mode::Symmetric, Some(gp)) if gp != g => {
                return Err(config_err(format!("mode symmetric requires g_prime = g, got g = {g}, g_prime = {gp}")));
            }
            (Mode::Symmetric, _) => g,
            (Mode::Custom, gp) => gp.ok_or_else(|| config_err("mode custom requires g_prime"))?,
        };
        if mode == Mode::Custom && !(g > 0.0) {
            return Err(config_err("mode custom requires g > 0 (the scan ratio is g_prime / g)"));
        }
        let params =
            ModelParams::new(omega, epsilon, g, g_prime, j).and_then(|p| p.with_hbar(hbar)).map_err(config_err)?;

        let lambda: LambdaRange = flags
            .lambda
            .clone()
            .or(file.lambda)
            .unwrap_or_else(|| DEFAULT_LAMBDA.to_string())
            .parse()
            .map_err(config_err)?;

        let formats: BTreeSet<Format> = match (&flags.format, file.format) {
            (Some(s), _) => s.split(',').map(str::parse).collect::<Result<_, _>>().map_err(config_err)?,
            (None, Some(v)) => v.into_iter().collect(),
            (None, None) => [Format::Csv, Format::Json, Format::Svg].into_iter().collect(),
        };
        if formats.is_empty() {
            return Err(config_err("format list is empty"));
        }

        let defaults = GridSpec::default();
        let grid = GridSpec {
            points: flags.grid_points.or(file.grid_points).unwrap_or(defaults.points),
            radius: flags.grid_radius.or(file.grid_radius).unwrap_or(defaults.radius),
        };
        grid.validate().map_err(config_err)?;

        let t_final = flags.t_final.or(file.t_final).unwrap_or(DEFAULT_T_FINAL);
        if !(t_final > 0.0 && t_final.is_finite()) {
            return Err(config_err(format!("t_final must be > 0, got {t_final}")));
        }
        let energy = flags.energy.or(file.energy);
        if command == Command::Trajectory && energy.is_none() {
            return Err(config_err("missing required field `energy` for trajectory"));
        }

        Ok(RunConfig {
            command,
            params,
            mode,
            lambda,
            n_max: flags.n_max.or(file.n_max),
            out: flags.out.clone().or(file.out).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            formats,
            grid,
            energy,
            t_final,
        })
    }

    pub fn coupling_mode(&self) -> CouplingMode {
        match self.mode {
            Mode::Integrable => CouplingMode::Integrable,
            Mode::Symmetric => CouplingMode::Symmetric,
            Mode::Custom => CouplingMode::Custom { ratio: self.params.g_prime / self.params.g },
        }
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// The resolved configuration in file schema, loadable with `--config`.
    pub fn to_file_config(&self) -> FileConfig {
        let p = &self.params;
        FileConfig {
            command: Some(self.command),
            j: Some(p.j),
            omega: Some(p.omega),
            epsilon: Some(p.epsilon),
            hbar: Some(p.hbar),
            g: Some(p.g),
            g_prime: Some(p.g_prime),
            mode: Some(self.mode),
            lambda: Some(self.lambda.to_string()),
            n_max: self.n_max,
            out: Some(self.out.clone()),
            format: Some(self.formats.iter().copied().collect()),
            grid_points: Some(self.grid.points),
            grid_radius: Some(self.grid.radius),
            energy: self.energy,
            t_final: Some(self.t_final),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> Flags {
        Flags { j: Some(4.5), ..Flags::default() }
    }

    #[test]
    fn lambda_ranges() {
        let r: LambdaRange = "0:2:0.01".parse().unwrap();
        let g = r.grid();
        assert_eq!(g.len(), 201);
        assert_eq!(g[200], 2.0);
        assert!("0:2".parse::<LambdaRange>().is_err());
        assert!("0:2:0".parse::<LambdaRange>().is_err());
        assert!("2:1:0.1".parse::<LambdaRange>().is_err());
    }

    #[test]
    fn flags_only() {
        let f = Flags { mode: Some(Mode::Integrable), lambda: Some("0:2:0.01".into()), ..flags() };
        let c = RunConfig::resolve(Command::ScanEntropy, &f, FileConfig::default()).unwrap();
        assert_eq!(c.params.j, 4.5);
        assert_eq!(c.lambda.step, 0.01);
        assert_eq!(c.formats.len(), 3);
    }

    #[test]
    fn half_integer_spin_enforced() {
        let f = Flags { j: Some(4.6), ..Flags::default() };
        assert!(matches!(RunConfig::resolve(Command::Wigner, &f, FileConfig::default()), Err(CliError::Config(_))));
    }

    #[test]
    fn flags_override_file() {
        let file: FileConfig = toml::from_str("j = 1.5\ng = 0.3\nmode = \"symmetric\"").unwrap();
        let c = RunConfig::resolve(Command::FixedPoints, &flags(), file).unwrap();
        assert_eq!(c.params.j, 4.5);
        assert_eq!((c.params.g, c.params.g_prime), (0.3, 0.3));
    }

    #[test]
    fn unknown_key_is_named() {
        let e = toml::from_str::<FileConfig>("j = 1.5\ncouplingX = 2.0").unwrap_err().to_string();
        assert!(e.contains("couplingX"), "{e}");
        let e = serde_json::from_str::<FileConfig>(r#"{"j": 1.5, "couplingX": 2}"#).unwrap_err().to_string();
        assert!(e.contains("couplingX"), "{e}");
    }

    #[test]
    fn mode_consistency() {
        let f = Flags { mode: Some(Mode::Integrable), g_prime: Some(0.2), ..flags() };
        assert!(RunConfig::resolve(Command::Wigner, &f, FileConfig::default()).is_err());
        let f = Flags { g: Some(0.4), g_prime: Some(0.2), ..flags() };
        let c = RunConfig::resolve(Command::Wigner, &f, FileConfig::default()).unwrap();
        assert_eq!(c.mode, Mode::Custom);
        assert_eq!(c.coupling_mode(), CouplingMode::Custom { ratio: 0.5 });
    }

    #[test]
    fn trajectory_needs_energy() {
        assert!(RunConfig::resolve(Command::Trajectory, &flags(), FileConfig::default()).is_err());
    }

    #[test]
    fn echo_round_trips() {
        let f = Flags { g: Some(0.75), mode: Some(Mode::Symmetric), energy: Some(-5.5), ..flags() };
        let c = RunConfig::resolve(Command::Trajectory, &f, FileConfig::default()).unwrap();
        let text = serde_json::to_string(&c.to_file_config()).unwrap();
        let back: FileConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(RunConfig::resolve(Command::Trajectory, &Flags::default(), back).unwrap(), c);
    }
}
