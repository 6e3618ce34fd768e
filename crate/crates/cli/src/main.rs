//! Command-line front end: runs one configuration or a canned preset and
//! writes the outputs together with a `manifest.json`.

mod error;
mod exec;
mod manifest;
mod opts;
mod preset;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::time::Instant;

use clap::Parser;

use error::{CliError, CliResult};
use manifest::{RunEntry, RunManifest};
use opts::{Cli, Command, Mode, Preset, Settings};

fn main() {
    let code = match real_main() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("propeller-sim: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn init_threads() -> CliResult<()> {
    let Ok(v) = std::env::var("PROPELLER_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().ok().filter(|n| *n > 0).ok_or_else(|| {
        CliError::Config(format!(
            "PROPELLER_THREADS must be a positive integer, got '{v}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

fn real_main() -> CliResult<()> {
    let cli = Cli::parse();
    init_threads()?;
    match cli.command {
        Command::ClassicalLinear(o) => single(Mode::ClassicalLinear, &o),
        Command::ClassicalSymtop(o) => single(Mode::ClassicalSymtop, &o),
        Command::QuantumLinear(o) => single(Mode::QuantumLinear, &o),
        Command::QuantumSymtop(o) => single(Mode::QuantumSymtop, &o),
        Command::Density(o) => single(Mode::Density, &o),
        Command::Compare(o) => single(Mode::Compare, &o),
        Command::Preset(a) => {
            let runs = preset::plan(a.name, a.n_traj, a.seed, a.format);
            let command = format!("preset {}", preset_name(a.name));
            execute(command, Some(a.name), runs, &a.out)
        }
        Command::Rerun(a) => {
            let m = RunManifest::load(&a.manifest)?;
            for e in &m.runs {
                e.settings.check()?;
            }
            execute(m.command, m.preset, m.runs, &a.out)
        }
    }
}

fn preset_name(p: Preset) -> String {
    use clap::ValueEnum;
    p.to_possible_value().expect("named").get_name().to_string()
}

fn single(mode: Mode, o: &opts::Opts) -> CliResult<()> {
    let s = Settings::resolve(mode, o)?;
    let label = match mode {
        Mode::Density => format!(
            "density_{}",
            serde_json::to_value(s.kind)?.as_str().unwrap_or("grid")
        ),
        _ => mode.name().replace('-', "_"),
    };
    execute(
        mode.name().into(),
        None,
        vec![RunEntry { label, settings: s }],
        &o.out,
    )
}

fn execute(
    command: String,
    preset: Option<Preset>,
    runs: Vec<RunEntry>,
    out: &Path,
) -> CliResult<()> {
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let format = runs
        .first()
        .map(|e| e.settings.format)
        .unwrap_or(opts::Format::Csv);
    let mut done = Vec::new();
    let mut outputs = Vec::new();
    let mut auto_delays = BTreeMap::new();
    let mut truncation = Vec::new();
    let mut summary = Vec::new();
    for e in &runs {
        let r = exec::run(&e.settings, &e.label)?;
        outputs.extend(exec::write_all(&r, out, e.settings.format)?);
        auto_delays.extend(r.auto_delays.iter().map(|(k, v)| (k.clone(), *v)));
        truncation.extend(r.truncation.iter().cloned());
        summary.extend(r.summary.iter().cloned());
        done.push((e.clone(), r));
    }
    for (stem, o) in preset::combine(preset, &done)? {
        outputs.push(o.write(out, &stem, format)?);
    }
    for line in &summary {
        println!("{line}");
    }
    let manifest = RunManifest {
        command,
        preset,
        runs,
        versions: RunManifest::versions(),
        threads: rayon::current_num_threads(),
        wall_time_s: start.elapsed().as_secs_f64(),
        auto_delays,
        truncation,
        outputs,
        summary,
    };
    fs::write(out.join("manifest.json"), manifest.to_json())?;
    Ok(())
}
