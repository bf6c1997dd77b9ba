//! Benchmark CLI: runs configured coupling scenarios and writes CSV/JSON
//! reports.
//!
//! Exit codes: 0 when every run converged, 2 when any run failed to
//! converge, 1 on usage or configuration errors.

use std::path::PathBuf;
use std::process::ExitCode;

use glc_bench::{config, emit_report, run_scenario, Overrides};

fn print_usage() {
    eprintln!("Usage: glc-bench [OPTIONS]");
    eprintln!();
    eprintln!("  --config <path>   Scenario config file (see configs/ for the format)");
    eprintln!("  --mode <list>     Override engines: comma list of sync,aitken,async");
    eprintln!("  --omega <x>       Override the relaxation factor (disables sweeps)");
    eprintln!("  --seed <n>        Override the random seed");
    eprintln!("  --out <dir>       Override the output directory");
    eprintln!("  --dump-meshes     Also write plain-text mesh dumps to the output dir");
    eprintln!("  --help            Show this help");
}

fn run() -> Result<ExitCode, String> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut config_path: Option<PathBuf> = None;
    let mut overrides = Overrides::default();
    let mut dump_meshes = false;

    let mut i = 0;
    while i < args.len() {
        let flag = args[i].as_str();
        let mut take_value = || -> Result<&str, String> {
            i += 1;
            args.get(i)
                .map(|s| s.as_str())
                .ok_or_else(|| format!("flag `{flag}` expects a value"))
        };
        match flag {
            "--config" => config_path = Some(PathBuf::from(take_value()?)),
            "--mode" => {
                let modes = take_value()?
                    .split(',')
                    .map(|m| m.parse::<config::Mode>())
                    .collect::<Result<Vec<_>, _>>()?;
                overrides.mode = Some(modes);
            }
            "--omega" => {
                let v = take_value()?;
                overrides.omega =
                    Some(v.parse().map_err(|e| format!("invalid --omega `{v}`: {e}"))?);
            }
            "--seed" => {
                let v = take_value()?;
                overrides.seed =
                    Some(v.parse().map_err(|e| format!("invalid --seed `{v}`: {e}"))?);
            }
            "--out" => overrides.out_dir = Some(PathBuf::from(take_value()?)),
            "--dump-meshes" => dump_meshes = true,
            "--help" | "-h" => {
                print_usage();
                return Ok(ExitCode::SUCCESS);
            }
            other => return Err(format!("unknown flag `{other}`")),
        }
        i += 1;
    }

    let mut cfg = match config_path {
        Some(path) => glc_bench::load_config(&path).map_err(|e| e.to_string())?,
        None => config::ScenarioConfig::default(),
    };
    overrides.apply(&mut cfg);
    cfg.validate().map_err(|e| e.to_string())?;

    if dump_meshes {
        std::fs::create_dir_all(&cfg.out_dir)
            .map_err(|e| format!("cannot create `{}`: {e}", cfg.out_dir.display()))?;
        for (name, mesh) in cfg.layout().meshes().map_err(|e| e.to_string())? {
            let path = cfg.out_dir.join(format!("{name}.mesh.txt"));
            let mut file =
                std::fs::File::create(&path).map_err(|e| format!("cannot write mesh dump: {e}"))?;
            mesh.write_text(&mut file)
                .map_err(|e| format!("cannot write mesh dump: {e}"))?;
        }
    }

    let outcome = run_scenario(&cfg).map_err(|e| e.to_string())?;
    let written = emit_report(&cfg.id, &outcome, &cfg.out_dir).map_err(|e| e.to_string())?;

    for row in &outcome.rows {
        println!(
            "{} mode={} omega={} it_global={} it_fine=[{}-{}] wall_ms={:.1} rel_residual={:.3e} converged={}",
            row.scenario,
            row.mode,
            row.omega,
            row.it_global,
            row.it_fine_min,
            row.it_fine_max,
            row.wall_ms,
            row.rel_residual,
            row.converged
        );
    }
    println!(
        "wrote {} file(s) to {}",
        written.len(),
        cfg.out_dir.display()
    );

    if outcome.rows.iter().any(|r| !r.converged) {
        Ok(ExitCode::from(2))
    } else {
        Ok(ExitCode::SUCCESS)
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            eprintln!();
            print_usage();
            ExitCode::from(1)
        }
    }
}
