use propeller::series::TimeSeries;

use crate::error::{CliError, CliResult};
use crate::exec::{Output, RunResult};
use crate::manifest::RunEntry;
use crate::opts::{Delay, DensityKind, Format, Mode, Preset, Settings, Spin};

const BENZENE_P: [f64; 3] = [-1.0, -3.0, -10.0];

fn base(mode: Mode, molecule: &str, temp_k: f64, p1: f64, p2: f64) -> Settings {
    let symtop = molecule == "benzene";
    Settings {
        mode,
        molecule: molecule.into(),
        temp_k,
        p1,
        p2,
        angle_deg: 45.0,
        delay: Delay::Auto,
        n_traj: 10_000,
        seed: 1,
        t_max: if symtop { 0.5 } else { 1.0 },
        dt_out: if symtop { 5e-4 } else { 1e-3 },
        sigma_kde: 0.1,
        format: Format::Csv,
        cutoff: None,
        fwhm: 0.0,
        spin: Spin::Uniform,
        scan_to: None,
        kind: DensityKind::Belt,
        time: None,
        window: None,
    }
}

fn entry(label: impl Into<String>, settings: Settings) -> RunEntry {
    RunEntry {
        label: label.into(),
        settings,
    }
}

fn density(label: &str, temp_k: f64, p1: f64, p2: f64, kind: DensityKind) -> RunEntry {
    let mut s = base(Mode::Density, "n2", temp_k, p1, p2);
    s.kind = kind;
    entry(format!("{label}_{}", kind_name(kind)), s)
}

fn kind_name(k: DensityKind) -> &'static str {
    match k {
        DensityKind::Belt => "belt",
        DensityKind::Snapshot => "snapshot",
        DensityKind::Analytic => "analytic",
        DensityKind::Quantum => "quantum",
    }
}

fn p_tag(p: f64) -> String {
    format!("P{p}")
}

/// The runs making up a preset, before command-line overrides.
fn runs(p: Preset) -> Vec<RunEntry> {
    match p {
        Preset::Fig2 => {
            let mut s = base(Mode::ClassicalLinear, "n2", 50.0, 5.0, 5.0);
            s.t_max = 5.0;
            let q = Settings {
                mode: Mode::QuantumLinear,
                ..s.clone()
            };
            let c = Settings {
                mode: Mode::Compare,
                ..s.clone()
            };
            vec![
                entry("fig2_classical", s),
                entry("fig2_quantum", q),
                entry("fig2_compare", c),
            ]
        }
        Preset::Fig3a => [
            DensityKind::Belt,
            DensityKind::Analytic,
            DensityKind::Quantum,
        ]
        .into_iter()
        .map(|k| density("fig3a", 0.0, 10.0, 0.0, k))
        .collect(),
        Preset::Fig3b => [DensityKind::Belt, DensityKind::Quantum]
            .into_iter()
            .map(|k| density("fig3b", 50.0, 10.0, 0.0, k))
            .collect(),
        Preset::Fig4 => [DensityKind::Belt, DensityKind::Quantum]
            .into_iter()
            .map(|k| density("fig4", 50.0, 5.0, 5.0, k))
            .collect(),
        Preset::Fig5 | Preset::Fig6 => {
            let (mode, name, t_max, n) = if p == Preset::Fig5 {
                (Mode::ClassicalSymtop, "fig5", 0.5, 100_000)
            } else {
                (Mode::QuantumSymtop, "fig6", 1.1, 100_000)
            };
            let mut v = Vec::new();
            for pv in BENZENE_P {
                let mut s = base(mode, "benzene", 0.9, pv, 0.0);
                s.t_max = t_max;
                s.n_traj = n;
                v.push(entry(format!("{name}_alignment_{}", p_tag(pv)), s));
            }
            for pv in BENZENE_P {
                let mut s = base(mode, "benzene", 0.9, pv, pv);
                s.angle_deg = -45.0;
                s.t_max = t_max;
                s.scan_to = Some(t_max);
                s.n_traj = n;
                v.push(entry(format!("{name}_{}", p_tag(pv)), s));
            }
            v
        }
        Preset::Fig7 => {
            let mut v = Vec::new();
            for pv in BENZENE_P {
                let mut s = base(Mode::Compare, "benzene", 0.9, pv, 0.0);
                s.t_max = 0.15;
                s.n_traj = 100_000;
                v.push(entry(format!("fig7_alignment_{}", p_tag(pv)), s));
            }
            for pv in BENZENE_P {
                let mut s = base(Mode::Compare, "benzene", 0.9, pv, pv);
                s.angle_deg = -45.0;
                s.t_max = 0.15;
                s.scan_to = Some(0.15);
                s.n_traj = 100_000;
                v.push(entry(format!("fig7_scan_{}", p_tag(pv)), s));
            }
            v
        }
    }
}

pub fn plan(p: Preset, n_traj: Option<usize>, seed: u64, format: Format) -> Vec<RunEntry> {
    let mut v = runs(p);
    for e in &mut v {
        if let Some(n) = n_traj {
            e.settings.n_traj = n;
        }
        e.settings.seed = seed;
        e.settings.format = format;
    }
    v
}

/// Joins one channel of several runs into a single table, one column per
/// run, named `<channel>[<tag>]`.
fn join(parts: &[(&str, &TimeSeries)], channel: &str) -> CliResult<TimeSeries> {
    let grid = parts
        .first()
        .map(|(_, s)| s.grid.clone())
        .ok_or_else(|| CliError::Config("nothing to combine".into()))?;
    let mut out = TimeSeries::new(grid.clone());
    for (tag, s) in parts {
        if s.grid != grid {
            return Err(CliError::Config("combined runs must share a grid".into()));
        }
        let v = s
            .channel(channel)
            .ok_or_else(|| CliError::Config(format!("channel {channel} missing")))?;
        out.push(&format!("{channel}[{tag}]"), v.to_vec())?;
    }
    Ok(out)
}

/// Extra outputs built from the runs of a preset.
pub fn combine(
    p: Option<Preset>,
    done: &[(RunEntry, RunResult)],
) -> CliResult<Vec<(String, Output)>> {
    let Some(name @ (Preset::Fig5 | Preset::Fig6)) = p else {
        return Ok(Vec::new());
    };
    let stem = if name == Preset::Fig5 { "fig5" } else { "fig6" };
    let mut align = Vec::new();
    let mut scan = Vec::new();
    for (e, r) in done {
        for (file, out) in &r.outputs {
            if let Output::Series(s) = out {
                let tag = e.label.rsplit('_').next().unwrap_or(&e.label);
                if file.ends_with("_scan") {
                    scan.push((tag, s));
                } else {
                    align.push((tag, s));
                }
            }
        }
    }
    Ok(vec![
        (
            format!("{stem}_alignment"),
            Output::Series(join(&align, "cos2_theta")?),
        ),
        (
            format!("{stem}_scan"),
            Output::Series(join(&scan, "ly_norm")?),
        ),
    ])
}
