use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use propeller::units::{MoleculeKind, MoleculeParams, Sign};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Parser, Debug)]
#[command(
    name = "propeller-sim",
    version,
    about = "Double-pulse molecular propeller simulations"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Monte Carlo ensemble of linear rotors.
    ClassicalLinear(Opts),
    /// Monte Carlo ensemble of oblate symmetric tops.
    ClassicalSymtop(Opts),
    /// Thermal wave packets of a linear rotor.
    QuantumLinear(Opts),
    /// Thermal wave packets of a symmetric top.
    QuantumSymtop(Opts),
    /// Orientation density on the sphere after the last pulse.
    Density(Opts),
    /// Classical and quantum traces side by side.
    Compare(Opts),
    /// Canned parameter sets for the standard figures.
    Preset(PresetArgs),
    /// Repeat every run recorded in a manifest.
    Rerun(RerunArgs),
}

#[derive(Args, Debug)]
pub struct PresetArgs {
    #[arg(value_enum)]
    pub name: Preset,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Override the preset's trajectory count.
    #[arg(long = "n-traj")]
    pub n_traj: Option<usize>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Args, Debug)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Fig2,
    Fig3a,
    Fig3b,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Spin {
    Uniform,
    Nitrogen,
}

#[derive(ValueEnum, Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum DensityKind {
    /// Belt average over each rotor's free orbit.
    Belt,
    /// Kernel estimate of the axes at `--time` after the last pulse.
    Snapshot,
    /// Zero-temperature sudden-limit law.
    Analytic,
    /// Time average of the quantum density after the last pulse.
    Quantum,
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    ClassicalLinear,
    ClassicalSymtop,
    QuantumLinear,
    QuantumSymtop,
    Density,
    Compare,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::ClassicalLinear => "classical-linear",
            Mode::ClassicalSymtop => "classical-symtop",
            Mode::QuantumLinear => "quantum-linear",
            Mode::QuantumSymtop => "quantum-symtop",
            Mode::Density => "density",
            Mode::Compare => "compare",
        }
    }

    fn wants_symtop(self) -> Option<bool> {
        match self {
            Mode::ClassicalLinear | Mode::QuantumLinear => Some(false),
            Mode::ClassicalSymtop | Mode::QuantumSymtop => Some(true),
            Mode::Density | Mode::Compare => None,
        }
    }
}

#[derive(Serialize, Deserialize, Debug, Clone, Copy, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum Delay {
    Auto,
    At(f64),
}

/// Command-line flags shared by the run commands.
#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// n2, benzene, or custom:B[,C] with constants in cm⁻¹.
    #[arg(long)]
    pub molecule: Option<String>,
    #[arg(long = "temp-K", allow_hyphen_values = true)]
    pub temp_k: Option<f64>,
    #[arg(long = "P1", allow_hyphen_values = true)]
    pub p1: Option<f64>,
    /// Second pulse strength; 0 runs a single pulse.
    #[arg(long = "P2", allow_hyphen_values = true)]
    pub p2: Option<f64>,
    /// Angle of the second polarization from z towards x.
    #[arg(long = "angle-deg", default_value_t = 45.0, allow_hyphen_values = true)]
    pub angle_deg: f64,
    /// auto, or the pulse separation in revival units.
    #[arg(long, default_value = "auto")]
    pub delay: String,
    #[arg(long = "n-traj", default_value_t = 10_000)]
    pub n_traj: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "t-max")]
    pub t_max: Option<f64>,
    #[arg(long = "dt-out")]
    pub dt_out: Option<f64>,
    #[arg(long = "sigma-kde", default_value_t = 0.1)]
    pub sigma_kde: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Quantum basis cutoff (l_max or J_max).
    #[arg(long, alias = "l-max", alias = "j-max")]
    pub cutoff: Option<i32>,
    /// Intensity FWHM of the quantum pulses, revival units; 0 is sudden.
    #[arg(long, default_value_t = 0.0)]
    pub fwhm: f64,
    #[arg(long, value_enum, default_value_t = Spin::Uniform)]
    pub spin: Spin,
    /// Scan the pulse separation from 0 to this value instead of
    /// recording a time trace.
    #[arg(long = "scan-to")]
    pub scan_to: Option<f64>,
    #[arg(long, value_enum, default_value_t = DensityKind::Belt)]
    pub kind: DensityKind,
    /// Snapshot time after the last pulse, revival units.
    #[arg(long)]
    pub time: Option<f64>,
    /// Comparison window LO,HI in revival units.
    #[arg(long, value_delimiter = ',', num_args = 1)]
    pub window: Option<Vec<f64>>,
}

/// Fully resolved parameters of one run. This is what manifests record.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct Settings {
    pub mode: Mode,
    pub molecule: String,
    pub temp_k: f64,
    pub p1: f64,
    pub p2: f64,
    pub angle_deg: f64,
    pub delay: Delay,
    pub n_traj: usize,
    pub seed: u64,
    pub t_max: f64,
    pub dt_out: f64,
    pub sigma_kde: f64,
    pub format: Format,
    pub cutoff: Option<i32>,
    pub fwhm: f64,
    pub spin: Spin,
    pub scan_to: Option<f64>,
    pub kind: DensityKind,
    pub time: Option<f64>,
    pub window: Option<(f64, f64)>,
}

pub fn parse_molecule(s: &str) -> CliResult<MoleculeParams> {
    let bad = || {
        CliError::Config(format!(
            "unknown molecule '{s}' (n2, benzene, custom:B[,C])"
        ))
    };
    match s.to_ascii_lowercase().as_str() {
        "n2" | "nitrogen" => Ok(MoleculeParams::nitrogen()),
        "benzene" | "c6h6" => Ok(MoleculeParams::benzene()),
        other => {
            let rest = other.strip_prefix("custom:").ok_or_else(bad)?;
            let nums: Vec<f64> = rest
                .split(',')
                .map(|x| x.trim().parse::<f64>())
                .collect::<Result<_, _>>()
                .map_err(|_| bad())?;
            Ok(match nums[..] {
                [b] => MoleculeParams::linear(b)?,
                [b, c] => MoleculeParams::oblate_symtop(b, c, Sign::Negative)?,
                _ => return Err(bad()),
            })
        }
    }
}

fn parse_delay(s: &str) -> CliResult<Delay> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(Delay::Auto);
    }
    match s.parse::<f64>() {
        Ok(v) if v >= 0.0 && v.is_finite() => Ok(Delay::At(v)),
        _ => Err(CliError::Config(format!(
            "--delay must be 'auto' or a non-negative number, got '{s}'"
        ))),
    }
}

impl Settings {
    pub fn resolve(mode: Mode, o: &Opts) -> CliResult<Self> {
        let molecule = o
            .molecule
            .clone()
            .unwrap_or_else(|| match mode.wants_symtop() {
                Some(true) => "benzene".into(),
                _ => "n2".into(),
            });
        let params = parse_molecule(&molecule)?;
        let symtop = params.kind == MoleculeKind::OblateSymtop;
        if let Some(want) = mode.wants_symtop() {
            if want != symtop {
                return Err(CliError::Config(format!(
                    "{} needs a {} molecule, got '{molecule}'",
                    mode.name(),
                    if want { "symmetric-top" } else { "linear" }
                )));
            }
        }
        let window = match o.window.as_deref() {
            None => None,
            Some([a, b]) if a <= b => Some((*a, *b)),
            Some(_) => {
                return Err(CliError::Config(
                    "--window takes LO,HI with LO <= HI".into(),
                ))
            }
        };
        let s = Self {
            mode,
            molecule,
            temp_k: o.temp_k.unwrap_or(if symtop { 0.9 } else { 50.0 }),
            p1: o.p1.unwrap_or(if symtop { -3.0 } else { 5.0 }),
            p2: o.p2.unwrap_or(0.0),
            angle_deg: o.angle_deg,
            delay: parse_delay(&o.delay)?,
            n_traj: o.n_traj,
            seed: o.seed,
            t_max: o.t_max.unwrap_or(if symtop { 0.5 } else { 1.0 }),
            dt_out: o.dt_out.unwrap_or(if symtop { 5e-4 } else { 1e-3 }),
            sigma_kde: o.sigma_kde,
            format: o.format,
            cutoff: o.cutoff,
            fwhm: o.fwhm,
            spin: o.spin,
            scan_to: o.scan_to,
            kind: o.kind,
            time: o.time,
            window,
        };
        s.check()?;
        Ok(s)
    }

    pub fn check(&self) -> CliResult<()> {
        let cfg = |m: &str| Err(CliError::Config(m.into()));
        if !(self.temp_k >= 0.0) {
            return cfg("--temp-K must be >= 0");
        }
        if self.n_traj == 0 {
            return cfg("--n-traj must be at least 1");
        }
        if !(self.sigma_kde > 0.0) {
            return cfg("--sigma-kde must be positive");
        }
        if !(self.fwhm >= 0.0) {
            return cfg("--fwhm must be >= 0");
        }
        if let Some(s) = self.scan_to {
            if !(s > 0.0) {
                return cfg("--scan-to must be positive");
            }
            if self.p2 == 0.0 {
                return cfg("a delay scan needs a second pulse (--P2)");
            }
        }
        if let Some(t) = self.time {
            if !(t >= 0.0) {
                return cfg("--time must be >= 0");
            }
        }
        Ok(())
    }

    pub fn molecule_params(&self) -> CliResult<MoleculeParams> {
        parse_molecule(&self.molecule)
    }

    pub fn is_symtop(&self) -> CliResult<bool> {
        Ok(self.molecule_params()?.kind == MoleculeKind::OblateSymtop)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(args: &[&str]) -> Opts {
        #[derive(Parser)]
        struct W {
            #[command(flatten)]
            o: Opts,
        }
        let mut v = vec!["x"];
        v.extend_from_slice(args);
        W::parse_from(v).o
    }

    #[test]
    fn molecules() {
        assert_eq!(parse_molecule("N2").unwrap(), MoleculeParams::nitrogen());
        assert_eq!(
            parse_molecule("benzene").unwrap(),
            MoleculeParams::benzene()
        );
        let m = parse_molecule("custom:1.5").unwrap();
        assert_eq!(m.kind, MoleculeKind::Linear);
        let m = parse_molecule("custom:0.2,0.1").unwrap();
        assert_eq!(m.kind, MoleculeKind::OblateSymtop);
        assert_eq!(m.delta_alpha_sign, Sign::Negative);
        for bad in ["h2o", "custom:", "custom:a", "custom:1,2,3", "custom:-1"] {
            assert!(parse_molecule(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn defaults_follow_the_command() {
        let s = Settings::resolve(Mode::ClassicalSymtop, &opts(&[])).unwrap();
        assert_eq!(
            (s.molecule.as_str(), s.temp_k, s.p1, s.t_max),
            ("benzene", 0.9, -3.0, 0.5)
        );
        let s =
            Settings::resolve(Mode::Compare, &opts(&["--P1", "-1", "--delay", "0.03"])).unwrap();
        assert_eq!((s.molecule.as_str(), s.temp_k, s.p1), ("n2", 50.0, -1.0));
        assert_eq!(s.delay, Delay::At(0.03));
        let s = Settings::resolve(Mode::Compare, &opts(&["--window", "0.1,0.2"])).unwrap();
        assert_eq!(s.window, Some((0.1, 0.2)));
    }

    #[test]
    fn inconsistent_settings_are_config_errors() {
        let cases: [(Mode, &[&str]); 6] = [
            (Mode::QuantumLinear, &["--molecule", "benzene"]),
            (Mode::ClassicalSymtop, &["--molecule", "n2"]),
            (Mode::ClassicalLinear, &["--delay", "soon"]),
            (Mode::ClassicalLinear, &["--scan-to", "0.2"]),
            (Mode::Compare, &["--window", "0.3,0.2"]),
            (Mode::Density, &["--temp-K", "-1"]),
        ];
        for (mode, args) in cases {
            let e = Settings::resolve(mode, &opts(args)).unwrap_err();
            assert_eq!(e.exit_code(), 2, "{args:?}");
        }
    }
}
