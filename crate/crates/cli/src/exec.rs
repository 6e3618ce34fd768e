use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use propeller::compare::{compare, first_oscillation};
use propeller::density::{
    analytic_grid, axes_after, belt_average, belts, kde_snapshot, DensityGrid, GridSpec,
};
use propeller::ensemble::{
    delay_scan, final_ensemble, run_protocol, DelayScan, EnsembleConfig, PulseTime, ScheduledPulse,
    SCAN_STEP,
};
use propeller::quantum::linear::{revival_density, QuantumLinearConfig, QuantumRun, RunReport};
use propeller::quantum::symtop::QuantumSymtopConfig;
use propeller::quantum::{linear as qlinear, symtop as qsymtop, SpinWeights};
use propeller::series::{channel, uniform_grid, TimeSeries};
use propeller::units::rev_to_dimless;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::opts::{Delay, DensityKind, Format, Mode, Settings, Spin};

pub enum Output {
    Series(TimeSeries),
    Density(DensityGrid),
}

impl Output {
    pub fn write(&self, dir: &Path, stem: &str, format: Format) -> CliResult<String> {
        let name = format!("{stem}.{}", format.ext());
        let path = dir.join(&name);
        match (self, format) {
            (Output::Series(s), Format::Csv) => fs::write(&path, s.to_csv_string())?,
            (Output::Series(s), Format::Json) => fs::write(&path, s.to_json())?,
            (Output::Density(d), Format::Csv) => {
                let mut buf = Vec::new();
                d.write_table(&mut buf)?;
                fs::write(&path, buf)?
            }
            (Output::Density(d), Format::Json) => {
                fs::write(&path, serde_json::to_string(d).expect("grid serializes"))?
            }
        }
        Ok(name)
    }
}

/// Cutoff bookkeeping of a quantum run.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TruncationNote {
    pub label: String,
    pub report: RunReport,
}

#[derive(Default)]
pub struct RunResult {
    /// File stems (without extension) and their contents.
    pub outputs: Vec<(String, Output)>,
    pub auto_delays: BTreeMap<String, f64>,
    pub truncation: Vec<TruncationNote>,
    pub summary: Vec<String>,
    /// Trailing comment line for comparison CSVs.
    pub footer: Option<String>,
}

fn pulses(s: &Settings) -> Vec<ScheduledPulse> {
    let mut v = vec![ScheduledPulse {
        strength: s.p1,
        polarization: [0.0, 0.0, 1.0],
        time: PulseTime::At(0.0),
    }];
    if s.p2 != 0.0 {
        let a = s.angle_deg.to_radians();
        v.push(ScheduledPulse {
            strength: s.p2,
            polarization: [a.sin(), 0.0, a.cos()],
            time: match s.delay {
                Delay::Auto => PulseTime::AutoExtremum,
                Delay::At(t) => PulseTime::At(t),
            },
        });
    }
    v
}

fn spin(s: &Settings) -> CliResult<SpinWeights> {
    match s.spin {
        Spin::Uniform => Ok(SpinWeights::Uniform),
        Spin::Nitrogen if s.is_symtop()? => Err(CliError::Config(
            "--spin nitrogen only applies to linear molecules".into(),
        )),
        Spin::Nitrogen => Ok(SpinWeights::nitrogen()),
    }
}

fn classical_cfg(s: &Settings) -> CliResult<EnsembleConfig> {
    let mut cfg = EnsembleConfig::new(s.molecule_params()?, s.temp_k, s.n_traj, s.seed)
        .with_grid(s.t_max, s.dt_out);
    cfg.pulses = pulses(s);
    Ok(cfg)
}

fn linear_cfg(s: &Settings) -> CliResult<QuantumLinearConfig> {
    let mut cfg =
        QuantumLinearConfig::new(s.molecule_params()?, s.temp_k).with_grid(s.t_max, s.dt_out);
    cfg.pulses = pulses(s);
    cfg.fwhm = s.fwhm;
    cfg.l_max = s.cutoff;
    cfg.spin = spin(s)?;
    Ok(cfg)
}

fn symtop_cfg(s: &Settings) -> CliResult<QuantumSymtopConfig> {
    let mut cfg =
        QuantumSymtopConfig::new(s.molecule_params()?, s.temp_k).with_grid(s.t_max, s.dt_out);
    cfg.pulses = pulses(s);
    cfg.fwhm = s.fwhm;
    cfg.j_max = s.cutoff;
    cfg.spin = spin(s)?;
    Ok(cfg)
}

fn scan_delays(s: &Settings) -> CliResult<Vec<f64>> {
    Ok(uniform_grid(s.scan_to.expect("scan requested"), SCAN_STEP)?)
}

fn scan_summary(label: &str, scan: &DelayScan) -> String {
    format!(
        "{label}: best delay {:.6} T_rev (first lobe {:.6} T_rev)",
        scan.best_delay().unwrap_or(f64::NAN),
        scan.best_delay_first_lobe().unwrap_or(f64::NAN)
    )
}

fn classical_scan(s: &Settings) -> CliResult<DelayScan> {
    Ok(delay_scan(&classical_cfg(s)?, &scan_delays(s)?)?)
}

fn quantum_scan(s: &Settings) -> CliResult<DelayScan> {
    if !s.is_symtop()? {
        return Err(CliError::Config(
            "quantum delay scans are available for symmetric tops only".into(),
        ));
    }
    Ok(qsymtop::delay_scan(&symtop_cfg(s)?, &scan_delays(s)?)?)
}

fn quantum_run(s: &Settings) -> CliResult<QuantumRun> {
    Ok(if s.is_symtop()? {
        qsymtop::thermal_run(&symtop_cfg(s)?)?
    } else {
        qlinear::thermal_run(&linear_cfg(s)?)?
    })
}

fn note_quantum(r: &mut RunResult, label: &str, run: &QuantumRun) {
    if let Some(d) = run.report.auto_delay {
        r.auto_delays.insert(label.into(), d);
    }
    r.truncation.push(TruncationNote {
        label: label.into(),
        report: run.report.clone(),
    });
    let means: Vec<String> = run
        .revival_means
        .iter()
        .map(|(k, v)| format!("{k}={v:.6}"))
        .collect();
    r.summary
        .push(format!("{label}: revival means {}", means.join(" ")));
}

fn classical_auto(series: &TimeSeries) -> Option<f64> {
    series.meta.get("auto_delay").and_then(|v| v.as_f64())
}

/// Runs one configuration. `label` prefixes output names.
pub fn run(s: &Settings, label: &str) -> CliResult<RunResult> {
    let mut r = RunResult::default();
    match s.mode {
        Mode::ClassicalLinear | Mode::ClassicalSymtop => {
            if s.scan_to.is_some() {
                let scan = classical_scan(s)?;
                r.summary.push(scan_summary(label, &scan));
                r.outputs
                    .push((format!("{label}_scan"), Output::Series(scan.to_series())));
            } else {
                let ts = run_protocol(&classical_cfg(s)?)?;
                if let Some(d) = classical_auto(&ts) {
                    r.auto_delays.insert(label.into(), d);
                }
                r.outputs.push((label.into(), Output::Series(ts)));
            }
        }
        Mode::QuantumLinear | Mode::QuantumSymtop => {
            if s.scan_to.is_some() {
                let scan = quantum_scan(s)?;
                r.summary.push(scan_summary(label, &scan));
                r.outputs
                    .push((format!("{label}_scan"), Output::Series(scan.to_series())));
            } else {
                let run = quantum_run(s)?;
                note_quantum(&mut r, label, &run);
                r.outputs.push((label.into(), Output::Series(run.series)));
            }
        }
        Mode::Density => {
            let grid = density(s, &mut r, label)?;
            let m = grid.second_moments();
            r.summary.push(format!(
                "{label}: integral {:.6}, <x2> {:.6}, <y2> {:.6}, <z2> {:.6}",
                grid.integral(),
                m[0],
                m[1],
                m[2]
            ));
            r.outputs.push((label.into(), Output::Density(grid)));
        }
        Mode::Compare => {
            let (classical, quantum, channels, default_window) = if let Some(scan_to) = s.scan_to {
                let c = classical_scan(s)?.to_series();
                let q = quantum_scan(s)?.to_series();
                (
                    c,
                    q,
                    vec![channel::LY, channel::L2, channel::LY_NORM],
                    (0.0, scan_to),
                )
            } else {
                let q = quantum_run(s)?;
                note_quantum(&mut r, &format!("{label}_quantum"), &q);
                // both sides fire the second pulse at the same moment; an
                // automatic delay is taken from the noise-free quantum trace
                let mut cc = classical_cfg(s)?;
                if let (Some(p), Some(t)) = (cc.pulses.get_mut(1), q.report.pulse_times.get(1)) {
                    p.time = PulseTime::At(*t);
                }
                let c = run_protocol(&cc)?;
                if s.is_symtop()? {
                    let w = (0.0, s.t_max.min(0.15));
                    let ch = vec![
                        channel::COS2_THETA,
                        channel::LY,
                        channel::L2,
                        channel::LY_NORM,
                    ];
                    (c, q.series, ch, w)
                } else {
                    // the first oscillation after the second pulse, where the
                    // two pictures are expected to agree best
                    let start = q.report.pulse_times.get(1).copied().unwrap_or(0.0);
                    let w = first_oscillation(&q.series, channel::COS2_PHI, start)
                        .unwrap_or((0.0, s.t_max));
                    (c, q.series, vec![channel::COS2_THETA, channel::COS2_PHI], w)
                }
            };
            let cmp = compare(
                &classical,
                &quantum,
                &channels,
                s.window.unwrap_or(default_window),
            )?;
            let line = format!("{label}: {}", cmp.summary_line());
            r.footer = Some(format!("# {}", cmp.summary_line()));
            r.summary.push(line);
            r.outputs.push((label.into(), Output::Series(cmp.series)));
        }
    }
    Ok(r)
}

fn density(s: &Settings, r: &mut RunResult, label: &str) -> CliResult<DensityGrid> {
    let spec = GridSpec::default();
    Ok(match s.kind {
        DensityKind::Analytic => analytic_grid(spec)?,
        DensityKind::Quantum => {
            if s.is_symtop()? {
                return Err(CliError::Config(
                    "quantum densities are available for linear molecules only".into(),
                ));
            }
            revival_density(&linear_cfg(s)?, spec)?
        }
        DensityKind::Belt | DensityKind::Snapshot => {
            let (ens, times) = final_ensemble(&classical_cfg(s)?)?;
            if s.p2 != 0.0 && matches!(s.delay, Delay::Auto) {
                if let Some(t) = times.get(1) {
                    r.auto_delays.insert(label.into(), *t);
                }
            }
            let grid = if s.kind == DensityKind::Belt {
                belt_average(&belts(&ens), s.sigma_kde, spec)?
            } else {
                let dt = rev_to_dimless(s.time.unwrap_or(0.0));
                kde_snapshot(&axes_after(&ens, dt), s.sigma_kde, spec)?
            };
            grid.with_seed(s.seed)
        }
    })
}

/// Writes every output of `r` into `dir` and returns the file names.
pub fn write_all(r: &RunResult, dir: &Path, format: Format) -> CliResult<Vec<String>> {
    let mut names = Vec::new();
    for (stem, out) in &r.outputs {
        let name = out.write(dir, stem, format)?;
        if let (Some(f), Format::Csv, Output::Series(_)) = (&r.footer, format, out) {
            let path = dir.join(&name);
            let mut text = fs::read_to_string(&path)?;
            text.push_str(f);
            text.push('\n');
            fs::write(&path, text)?;
        }
        names.push(name);
    }
    Ok(names)
}
