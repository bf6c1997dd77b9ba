//! Scenario configuration: a flat `key = value` file with `[sections]`,
//! fail-closed on unknown keys, plus command-line overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use glc_core::engines::{AsyncBackend, DelayMode, DelaySchedule};
use glc_core::layout::{GridLayout, PatchCells};
use glc_core::mesh::Face;

use crate::BenchError;

/// Engine selection in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Sync,
    Aitken,
    Async,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Sync => "sync",
            Mode::Aitken => "aitken",
            Mode::Async => "async",
        }
    }
}

impl FromStr for Mode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "sync" => Ok(Mode::Sync),
            "aitken" => Ok(Mode::Aitken),
            "async" => Ok(Mode::Async),
            other => Err(format!("mode must be sync, aitken or async, got `{other}`")),
        }
    }
}

/// Fully validated scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub id: String,
    pub modes: Vec<Mode>,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
    /// Skip the reference oracle above this many total model DOFs.
    pub oracle_cap: usize,
    pub grid: [usize; 3],
    pub coarse_elems: usize,
    pub fine_elems: usize,
    pub cube_edge: f64,
    pub e_matrix: f64,
    pub e_ratio: f64,
    pub nu: f64,
    pub inclusion_radius_fraction: f64,
    pub body_load: [f64; 3],
    pub clamped_face: Face,
    /// Relaxation factors to run (a single value unless swept).
    pub omegas: Vec<f64>,
    /// Worker counts for async runs; 0 means one worker per patch.
    pub workers_list: Vec<usize>,
    pub backend: AsyncBackend,
    pub delay_mode: DelayMode,
    pub delay_params: Vec<f64>,
    pub out_dir: PathBuf,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            id: "scenario".into(),
            modes: vec![Mode::Sync],
            tol: 1e-8,
            max_iters: 10_000,
            seed: 0,
            oracle_cap: 60_000,
            grid: [1, 1, 1],
            coarse_elems: 2,
            fine_elems: 4,
            cube_edge: 1.0,
            e_matrix: 1000.0,
            e_ratio: 10.0,
            nu: 0.3,
            inclusion_radius_fraction: 0.5,
            body_load: [1.0, 1.0, 1.0],
            clamped_face: Face::ZMin,
            omegas: vec![1.0],
            workers_list: vec![0],
            backend: AsyncBackend::Simulator,
            delay_mode: DelayMode::None,
            delay_params: Vec::new(),
            out_dir: PathBuf::from("out"),
        }
    }
}

impl ScenarioConfig {
    pub fn layout(&self) -> GridLayout {
        GridLayout {
            grid: self.grid,
            cube_edge: self.cube_edge,
            coarse_elems: self.coarse_elems,
            fine_elems: self.fine_elems,
            patch_cells: PatchCells::All,
            clamped_face: Some(self.clamped_face),
            e_matrix: self.e_matrix,
            e_ratio: self.e_ratio,
            nu: self.nu,
            inclusion_radius_fraction: self.inclusion_radius_fraction,
            body_load: self.body_load,
        }
    }

    pub fn delay_schedule(&self) -> DelaySchedule {
        DelaySchedule {
            mode: self.delay_mode,
            seed: self.seed,
            params: self.delay_params.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |msg: String| Err(BenchError::Config(msg));
        if self.id.is_empty() {
            return bad("id must not be empty".into());
        }
        if self.modes.is_empty() {
            return bad("mode must name at least one engine".into());
        }
        if self.grid.iter().any(|&n| n < 1) {
            return bad(format!("nx/ny/nz must be >= 1, got {:?}", self.grid));
        }
        if !(self.tol > 0.0) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        if self.max_iters < 1 {
            return bad("max_iters must be >= 1".into());
        }
        if self.coarse_elems < 1 {
            return bad(format!("coarse_elems must be >= 1, got {}", self.coarse_elems));
        }
        if self.fine_elems < self.coarse_elems || self.fine_elems % self.coarse_elems != 0 {
            return bad(format!(
                "fine_elems must be an integer multiple of coarse_elems, got {} / {}",
                self.fine_elems, self.coarse_elems
            ));
        }
        if !(self.cube_edge > 0.0) {
            return bad(format!("cube_edge must be positive, got {}", self.cube_edge));
        }
        if !(self.e_matrix > 0.0) {
            return bad(format!("e_matrix must be positive, got {}", self.e_matrix));
        }
        if !(self.e_ratio > 0.0) {
            return bad(format!("e_ratio must be positive, got {}", self.e_ratio));
        }
        if !(0.0..0.5).contains(&self.nu) {
            return bad(format!("nu must lie in [0, 0.5), got {}", self.nu));
        }
        if !(0.0..1.0).contains(&self.inclusion_radius_fraction) {
            return bad(format!(
                "inclusion_radius_fraction must lie in [0, 1), got {}",
                self.inclusion_radius_fraction
            ));
        }
        if self.omegas.is_empty() || self.omegas.iter().any(|&w| !(w > 0.0)) {
            return bad(format!("omega values must be positive, got {:?}", self.omegas));
        }
        if self.workers_list.is_empty() {
            return bad("workers must name at least one value".into());
        }
        let schedule = self.delay_schedule();
        schedule.validate().map_err(BenchError::Core)?;
        Ok(())
    }
}

/// Parses the documented config format from a file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, BenchError> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        BenchError::Config(format!("cannot read config `{}`: {e}", path.display()))
    })?;
    parse_config(&text)
}

/// Parses the config text; see `configs/` for the documented format.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, BenchError> {
    let mut cfg = ScenarioConfig::default();
    let mut section = String::new();
    let mut seen: BTreeMap<String, ()> = BTreeMap::new();

    for (lineno, raw) in text.lines().enumerate() {
        let line = strip_comment(raw).trim().to_string();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| {
                BenchError::Config(format!("line {}: malformed section `{raw}`", lineno + 1))
            })?;
            section = name.trim().to_string();
            const SECTIONS: [&str; 7] = [
                "scenario",
                "grid",
                "material",
                "load",
                "relaxation",
                "async",
                "output",
            ];
            if !SECTIONS.contains(&section.as_str()) {
                return Err(BenchError::Config(format!(
                    "line {}: unknown section `[{section}]`",
                    lineno + 1
                )));
            }
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(BenchError::Config(format!(
                "line {}: expected `key = value`, got `{raw}`",
                lineno + 1
            )));
        };
        let key = key.trim();
        let value = value.trim();
        let qualified = format!("{section}.{key}");
        if seen.insert(qualified.clone(), ()).is_some() {
            return Err(BenchError::Config(format!(
                "line {}: duplicate key `{key}` in section [{section}]",
                lineno + 1
            )));
        }
        apply_key(&mut cfg, &section, key, value)
            .map_err(|msg| BenchError::Config(format!("line {}: {msg}", lineno + 1)))?;
    }

    cfg.validate()?;
    Ok(cfg)
}

fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
}

fn apply_key(cfg: &mut ScenarioConfig, section: &str, key: &str, value: &str) -> Result<(), String> {
    match (section, key) {
        ("scenario", "id") => cfg.id = value.to_string(),
        ("scenario", "mode") => {
            cfg.modes = value
                .split(',')
                .map(|m| m.parse::<Mode>())
                .collect::<Result<Vec<_>, _>>()?;
        }
        ("scenario", "tol") => cfg.tol = parse_num(key, value)?,
        ("scenario", "max_iters") => cfg.max_iters = parse_num(key, value)?,
        ("scenario", "seed") => cfg.seed = parse_num(key, value)?,
        ("scenario", "oracle_cap") => cfg.oracle_cap = parse_num(key, value)?,
        ("grid", "nx") => cfg.grid[0] = parse_num(key, value)?,
        ("grid", "ny") => cfg.grid[1] = parse_num(key, value)?,
        ("grid", "nz") => cfg.grid[2] = parse_num(key, value)?,
        ("grid", "coarse_elems") => cfg.coarse_elems = parse_num(key, value)?,
        ("grid", "fine_elems") => cfg.fine_elems = parse_num(key, value)?,
        ("grid", "cube_edge") => cfg.cube_edge = parse_num(key, value)?,
        ("material", "e_matrix") => cfg.e_matrix = parse_num(key, value)?,
        ("material", "e_ratio") => cfg.e_ratio = parse_num(key, value)?,
        ("material", "nu") => cfg.nu = parse_num(key, value)?,
        ("material", "inclusion_radius_fraction") => {
            cfg.inclusion_radius_fraction = parse_num(key, value)?
        }
        ("load", "fx") => cfg.body_load[0] = parse_num(key, value)?,
        ("load", "fy") => cfg.body_load[1] = parse_num(key, value)?,
        ("load", "fz") => cfg.body_load[2] = parse_num(key, value)?,
        ("load", "clamped_face") => cfg.clamped_face = value.parse::<Face>()?,
        ("relaxation", "omega") => cfg.omegas = vec![parse_num(key, value)?],
        ("relaxation", "omega_sweep") => cfg.omegas = parse_list(key, value)?,
        ("async", "workers") => cfg.workers_list = vec![parse_num(key, value)?],
        ("async", "workers_sweep") => cfg.workers_list = parse_list(key, value)?,
        ("async", "backend") => {
            cfg.backend = match value {
                "simulator" => AsyncBackend::Simulator,
                "threads" => AsyncBackend::Threads,
                other => return Err(format!("backend must be simulator or threads, got `{other}`")),
            }
        }
        ("async", "delay_mode") => {
            cfg.delay_mode = match value {
                "none" => DelayMode::None,
                "fixed" => DelayMode::Fixed,
                "random" => DelayMode::SeededRandom,
                "slowdown" => DelayMode::WorkerSlowdown,
                other => {
                    return Err(format!(
                        "delay_mode must be none, fixed, random or slowdown, got `{other}`"
                    ))
                }
            }
        }
        ("async", "delay_params") => cfg.delay_params = parse_list(key, value)?,
        ("output", "dir") => cfg.out_dir = PathBuf::from(value),
        _ => {
            return Err(format!(
                "unknown key `{key}` in section [{section}]"
            ))
        }
    }
    Ok(())
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T, String>
where
    T::Err: std::fmt::Display,
{
    value
        .parse::<T>()
        .map_err(|e| format!("invalid value for `{key}`: {e}"))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value
        .split(',')
        .map(|v| parse_num::<T>(key, v.trim()))
        .collect()
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Default, Clone)]
pub struct Overrides {
    pub mode: Option<Vec<Mode>>,
    pub omega: Option<f64>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(modes) = &self.mode {
            cfg.modes = modes.clone();
        }
        if let Some(omega) = self.omega {
            cfg.omegas = vec![omega];
        }
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(dir) = &self.out_dir {
            cfg.out_dir = dir.clone();
        }
    }
}
