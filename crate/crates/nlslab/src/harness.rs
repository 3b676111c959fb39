//! Run orchestration: layered configuration, initial-data families,
//! persistence, and amplitude sweeps.
//!
//! Configuration is resolved from ordered patches (defaults, then flags,
//! then a config file; later layers win), each patch a sparse TOML document:
//!
//! ```toml
//! run_id = "demo"
//! p = 3.0
//! dimension = 3
//! normalization = 1.0
//!
//! [grid]
//! r_max = 40.0
//! nodes = 4096
//!
//! [initial]
//! family = "soliton-multiple"   # soliton-scaling | gaussian | ring | file
//! amplitude = 0.9
//!
//! [evolution]
//! t_end = 10.0
//! sample_dt = 0.25
//!
//! [output]
//! dir = "out"
//! write_fields = true
//!
//! [sweep]
//! amplitudes = [0.5, 0.9, 1.1, 1.3]
//! ```
//!
//! Field files are plain text with `# key = value` headers; floats are
//! written in shortest round-trip form, so save/load is bit-exact and
//! repeated runs of one configuration produce byte-identical outputs.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::classifier::{classify, ClassifyOptions, Verdict};
use crate::error::{NlsError, Result};
use crate::evolver::{
    EvolutionRecord, EvolveOptions, Evolver, SpongeOptions,
};
use crate::field::RadialField;
use crate::grid::RadialGrid;
use crate::groundstate::{
    sharp_constants, solve_ground_state, GroundState, GroundStateSummary, SharpConstants,
    DEFAULT_SHOOTING_TOL,
};
use crate::invariants::{report, InvariantReport};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Sparse configuration layer (all fields optional).
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunPatch {
    pub run_id: Option<String>,
    pub p: Option<f64>,
    pub dimension: Option<u32>,
    pub normalization: Option<f64>,
    #[serde(default)]
    pub grid: GridPatch,
    #[serde(default)]
    pub initial: InitialPatch,
    #[serde(default)]
    pub evolution: EvolutionPatch,
    #[serde(default)]
    pub classify: ClassifyPatch,
    #[serde(default)]
    pub output: OutputPatch,
    #[serde(default)]
    pub sweep: SweepPatch,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridPatch {
    pub r_max: Option<f64>,
    pub nodes: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialPatch {
    pub family: Option<String>,
    pub amplitude: Option<f64>,
    pub width: Option<f64>,
    pub center: Option<f64>,
    pub scale: Option<f64>,
    pub path: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionPatch {
    pub t_end: Option<f64>,
    pub sample_dt: Option<f64>,
    pub dt_coeff: Option<f64>,
    pub dt_min: Option<f64>,
    pub cutoff_scale: Option<f64>,
    pub sponge: Option<bool>,
    pub sponge_start_frac: Option<f64>,
    pub sponge_strength: Option<f64>,
    pub shooting_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyPatch {
    pub apply_galilean: Option<bool>,
    pub radial: Option<bool>,
    pub finite_variance: Option<bool>,
    pub tie_tol: Option<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputPatch {
    pub dir: Option<String>,
    pub write_fields: Option<bool>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPatch {
    pub amplitudes: Option<Vec<f64>>,
}

impl RunPatch {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| NlsError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| NlsError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        Self::from_toml_str(&text)
    }
}

/// Initial data family, resolved.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum InitialData {
    /// `amplitude * Q`.
    SolitonMultiple { amplitude: f64 },
    /// The profile solved at `scale * normalization` (exercises the scaling
    /// family physically rather than by resampling).
    SolitonScaling { scale: f64 },
    /// `amplitude * exp(-(r/width)^2)`.
    Gaussian { amplitude: f64, width: f64 },
    /// `amplitude * (exp(-((r-center)/width)^2) + exp(-((r+center)/width)^2))`,
    /// symmetrized so the profile is smooth at the origin.
    Ring {
        amplitude: f64,
        width: f64,
        center: f64,
    },
    /// Load a persisted field; its grid must match the run grid.
    File { path: PathBuf },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct EvolveSettings {
    pub t_end: f64,
    pub sample_dt: f64,
    pub dt_coeff: f64,
    pub dt_min: f64,
    pub cutoff_scale: Option<f64>,
    pub sponge: Option<SpongeOptions>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputSettings {
    pub dir: PathBuf,
    pub write_fields: bool,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub run_id: String,
    pub p: f64,
    pub dimension: u32,
    pub normalization: f64,
    pub r_max: f64,
    pub nodes: usize,
    pub shooting_tol: f64,
    pub initial: InitialData,
    pub classify: ClassifyOptions,
    pub evolution: Option<EvolveSettings>,
    pub output: Option<OutputSettings>,
    pub sweep_amplitudes: Option<Vec<f64>>,
}

impl RunConfig {
    /// Folds patches left to right (later wins) over built-in defaults.
    /// Evolution runs only if some layer sets `t_end`.
    pub fn resolve(patches: &[&RunPatch]) -> Result<RunConfig> {
        let mut merged = RunPatch::default();
        for p in patches {
            let p = (*p).clone();
            merged.run_id = p.run_id.or(merged.run_id);
            merged.p = p.p.or(merged.p);
            merged.dimension = p.dimension.or(merged.dimension);
            merged.normalization = p.normalization.or(merged.normalization);
            merged.grid.r_max = p.grid.r_max.or(merged.grid.r_max);
            merged.grid.nodes = p.grid.nodes.or(merged.grid.nodes);
            merged.initial.family = p.initial.family.or(merged.initial.family);
            merged.initial.amplitude = p.initial.amplitude.or(merged.initial.amplitude);
            merged.initial.width = p.initial.width.or(merged.initial.width);
            merged.initial.center = p.initial.center.or(merged.initial.center);
            merged.initial.scale = p.initial.scale.or(merged.initial.scale);
            merged.initial.path = p.initial.path.or(merged.initial.path);
            merged.evolution.t_end = p.evolution.t_end.or(merged.evolution.t_end);
            merged.evolution.sample_dt = p.evolution.sample_dt.or(merged.evolution.sample_dt);
            merged.evolution.dt_coeff = p.evolution.dt_coeff.or(merged.evolution.dt_coeff);
            merged.evolution.dt_min = p.evolution.dt_min.or(merged.evolution.dt_min);
            merged.evolution.cutoff_scale =
                p.evolution.cutoff_scale.or(merged.evolution.cutoff_scale);
            merged.evolution.sponge = p.evolution.sponge.or(merged.evolution.sponge);
            merged.evolution.sponge_start_frac = p
                .evolution
                .sponge_start_frac
                .or(merged.evolution.sponge_start_frac);
            merged.evolution.sponge_strength = p
                .evolution
                .sponge_strength
                .or(merged.evolution.sponge_strength);
            merged.evolution.shooting_tol =
                p.evolution.shooting_tol.or(merged.evolution.shooting_tol);
            merged.classify.apply_galilean =
                p.classify.apply_galilean.or(merged.classify.apply_galilean);
            merged.classify.radial = p.classify.radial.or(merged.classify.radial);
            merged.classify.finite_variance = p
                .classify
                .finite_variance
                .or(merged.classify.finite_variance);
            merged.classify.tie_tol = p.classify.tie_tol.or(merged.classify.tie_tol);
            merged.output.dir = p.output.dir.or(merged.output.dir);
            merged.output.write_fields = p.output.write_fields.or(merged.output.write_fields);
            merged.sweep.amplitudes = p.sweep.amplitudes.or(merged.sweep.amplitudes);
        }

        let family = merged
            .initial
            .family
            .unwrap_or_else(|| "soliton-multiple".to_string());
        let amplitude = merged.initial.amplitude.unwrap_or(1.0);
        let width = merged.initial.width.unwrap_or(1.0);
        let center = merged.initial.center.unwrap_or(3.0);
        let scale = merged.initial.scale.unwrap_or(2.0);
        let initial = match family.as_str() {
            "soliton-multiple" => InitialData::SolitonMultiple { amplitude },
            "soliton-scaling" => InitialData::SolitonScaling { scale },
            "gaussian" => InitialData::Gaussian { amplitude, width },
            "ring" => InitialData::Ring {
                amplitude,
                width,
                center,
            },
            "file" => {
                let path = merged.initial.path.ok_or_else(|| {
                    NlsError::Config("initial family \"file\" needs initial.path".into())
                })?;
                InitialData::File { path: path.into() }
            }
            other => {
                return Err(NlsError::Config(format!(
                    "unknown initial family {other:?} (expected soliton-multiple, \
                     soliton-scaling, gaussian, ring, or file)"
                )))
            }
        };

        let evolution = merged.evolution.t_end.map(|t_end| EvolveSettings {
            t_end,
            sample_dt: merged.evolution.sample_dt.unwrap_or(0.25),
            dt_coeff: merged.evolution.dt_coeff.unwrap_or(4.0),
            dt_min: merged.evolution.dt_min.unwrap_or(1e-10),
            cutoff_scale: merged.evolution.cutoff_scale,
            sponge: match merged.evolution.sponge {
                Some(true) => Some(SpongeOptions {
                    start_frac: merged.evolution.sponge_start_frac.unwrap_or(0.85),
                    strength: merged.evolution.sponge_strength.unwrap_or(5.0),
                }),
                _ => None,
            },
        });

        Ok(RunConfig {
            run_id: merged.run_id.unwrap_or_else(|| "run".to_string()),
            p: merged.p.unwrap_or(3.0),
            dimension: merged.dimension.unwrap_or(3),
            normalization: merged.normalization.unwrap_or(1.0),
            r_max: merged.grid.r_max.unwrap_or(40.0),
            nodes: merged.grid.nodes.unwrap_or(4096),
            shooting_tol: merged
                .evolution
                .shooting_tol
                .unwrap_or(DEFAULT_SHOOTING_TOL),
            initial,
            classify: ClassifyOptions {
                apply_galilean: merged.classify.apply_galilean.unwrap_or(true),
                radial: merged.classify.radial.unwrap_or(true),
                finite_variance: merged.classify.finite_variance.unwrap_or(true),
                tie_tol: merged.classify.tie_tol.unwrap_or(1e-6),
            },
            evolution,
            output: merged.output.dir.map(|dir| OutputSettings {
                dir: dir.into(),
                write_fields: merged.output.write_fields.unwrap_or(false),
            }),
            sweep_amplitudes: merged.sweep.amplitudes,
        })
    }
}

/// Everything one run produced.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunArtifact {
    pub run_id: String,
    pub config: RunConfig,
    pub ground_state: GroundStateSummary,
    pub constants: SharpConstants,
    pub initial_report: InvariantReport,
    pub verdict: Verdict,
    pub evolution: Option<EvolutionRecord>,
}

/// One sweep entry: failures are isolated per run.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum SweepOutcome {
    Completed { artifact: Box<RunArtifact> },
    Failed { category: String, message: String },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepEntry {
    pub run_id: String,
    pub amplitude: f64,
    #[serde(flatten)]
    pub outcome: SweepOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRecord {
    pub base_run_id: String,
    pub entries: Vec<SweepEntry>,
}

fn build_initial(
    cfg: &RunConfig,
    grid: &Arc<RadialGrid>,
    gs: &GroundState,
) -> Result<RadialField> {
    match &cfg.initial {
        InitialData::SolitonMultiple { amplitude } => {
            if !amplitude.is_finite() {
                return Err(NlsError::InvalidParameter(format!(
                    "soliton multiple must be finite, got {amplitude}"
                )));
            }
            Ok(gs.profile().scaled(*amplitude))
        }
        InitialData::SolitonScaling { scale } => {
            if !(scale.is_finite() && *scale > 0.0) {
                return Err(NlsError::InvalidParameter(format!(
                    "scaling factor must be finite and positive, got {scale}"
                )));
            }
            let scaled = solve_ground_state(
                cfg.p,
                cfg.normalization * scale,
                grid,
                cfg.shooting_tol,
            )?;
            Ok(scaled.profile().clone())
        }
        InitialData::Gaussian { amplitude, width } => {
            if !(width.is_finite() && *width > 0.0) {
                return Err(NlsError::InvalidParameter(format!(
                    "gaussian width must be finite and positive, got {width}"
                )));
            }
            let (a, w) = (*amplitude, *width);
            RadialField::new(
                grid.clone(),
                grid.nodes()
                    .iter()
                    .map(|&r| Complex64::new(a * (-(r / w) * (r / w)).exp(), 0.0))
                    .collect(),
            )
        }
        InitialData::Ring {
            amplitude,
            width,
            center,
        } => {
            if !(width.is_finite() && *width > 0.0 && center.is_finite() && *center >= 0.0) {
                return Err(NlsError::InvalidParameter(
                    "ring needs positive width and nonnegative center".into(),
                ));
            }
            let (a, w, c) = (*amplitude, *width, *center);
            RadialField::new(
                grid.clone(),
                grid.nodes()
                    .iter()
                    .map(|&r| {
                        let lobe = |x: f64| (-(x / w) * (x / w)).exp();
                        Complex64::new(a * (lobe(r - c) + lobe(r + c)), 0.0)
                    })
                    .collect(),
            )
        }
        InitialData::File { path } => {
            let field = load_field(path)?;
            if field.grid().as_ref() != grid.as_ref() {
                return Err(NlsError::GridMismatch(format!(
                    "field file {} has grid (N={}, r_max={}, nodes={}) but the run wants \
                     (N={}, r_max={}, nodes={})",
                    path.display(),
                    field.grid().dimension(),
                    field.grid().r_max(),
                    field.grid().len(),
                    grid.dimension(),
                    grid.r_max(),
                    grid.len()
                )));
            }
            Ok(field)
        }
    }
}

/// Executes one configured run end to end and writes its outputs.
pub fn run_one(cfg: &RunConfig) -> Result<RunArtifact> {
    let grid = Arc::new(RadialGrid::uniform(cfg.dimension, cfg.r_max, cfg.nodes)?);
    let gs = solve_ground_state(cfg.p, cfg.normalization, &grid, cfg.shooting_tol)?;
    run_one_with(cfg, &grid, &gs)
}

fn run_one_with(
    cfg: &RunConfig,
    grid: &Arc<RadialGrid>,
    gs: &GroundState,
) -> Result<RunArtifact> {
    let constants = sharp_constants(gs);
    let initial = build_initial(cfg, grid, gs)?;
    let initial_report = report(&initial, cfg.p)?;
    let verdict = classify(&initial_report, &constants, &cfg.classify)?;

    let mut final_state: Option<RadialField> = None;
    let evolution = match &cfg.evolution {
        Some(settings) => {
            let mut opts = EvolveOptions::new(cfg.p, settings.t_end);
            opts.sample_dt = settings.sample_dt;
            opts.dt_coeff = settings.dt_coeff;
            opts.dt_min = settings.dt_min;
            opts.cutoff_scale = settings.cutoff_scale;
            opts.sponge = settings.sponge;
            let mut evolver = Evolver::new(&initial, opts)?;
            let record = evolver.run()?;
            final_state = Some(evolver.state());
            Some(record)
        }
        None => None,
    };

    // The echoed configuration drops the output location so artifacts are
    // byte-identical wherever they are written.
    let mut config_echo = cfg.clone();
    config_echo.output = None;
    let artifact = RunArtifact {
        run_id: cfg.run_id.clone(),
        config: config_echo,
        ground_state: gs.summary(),
        constants,
        initial_report,
        verdict,
        evolution,
    };

    if let Some(out) = &cfg.output {
        std::fs::create_dir_all(&out.dir).map_err(|e| NlsError::Io {
            path: out.dir.display().to_string(),
            source: e,
        })?;
        write_artifact(&artifact, &out.dir.join(format!("{}.json", cfg.run_id)))?;
        if let Some(record) = &artifact.evolution {
            write_record_csv(record, &out.dir.join(format!("{}.csv", cfg.run_id)))?;
        }
        if out.write_fields {
            write_field(&initial, &out.dir.join(format!("{}-initial.field", cfg.run_id)))?;
            if let Some(fin) = &final_state {
                write_field(fin, &out.dir.join(format!("{}-final.field", cfg.run_id)))?;
            }
        }
    }

    Ok(artifact)
}

/// Runs the amplitude sweep: one shared profile solve, then independent
/// runs (parallel when the `parallel` feature is on), each failure isolated
/// to its own entry.
pub fn sweep(cfg: &RunConfig) -> Result<SweepRecord> {
    let amplitudes = cfg.sweep_amplitudes.clone().ok_or_else(|| {
        NlsError::Config("sweep requested but [sweep] amplitudes is missing".into())
    })?;
    if amplitudes.is_empty() {
        return Err(NlsError::Config("sweep amplitude list is empty".into()));
    }
    match cfg.initial {
        InitialData::SolitonMultiple { .. } | InitialData::Gaussian { .. } => {}
        _ => {
            return Err(NlsError::Config(
                "sweeps vary an amplitude; use the soliton-multiple or gaussian family".into(),
            ))
        }
    }

    let grid = Arc::new(RadialGrid::uniform(cfg.dimension, cfg.r_max, cfg.nodes)?);
    let gs = solve_ground_state(cfg.p, cfg.normalization, &grid, cfg.shooting_tol)?;

    let configs: Vec<RunConfig> = amplitudes
        .iter()
        .map(|&a| {
            let mut sub = cfg.clone();
            sub.run_id = format!("{}-a{}", cfg.run_id, a);
            sub.initial = match &cfg.initial {
                InitialData::Gaussian { width, .. } => InitialData::Gaussian {
                    amplitude: a,
                    width: *width,
                },
                _ => InitialData::SolitonMultiple { amplitude: a },
            };
            sub.sweep_amplitudes = None;
            sub
        })
        .collect();

    let run_entry = |sub: &RunConfig| -> SweepEntry {
        let amplitude = match sub.initial {
            InitialData::SolitonMultiple { amplitude } => amplitude,
            InitialData::Gaussian { amplitude, .. } => amplitude,
            _ => f64::NAN,
        };
        let outcome = match run_one_with(sub, &grid, &gs) {
            Ok(artifact) => SweepOutcome::Completed {
                artifact: Box::new(artifact),
            },
            Err(e) => SweepOutcome::Failed {
                category: e.category().to_string(),
                message: e.to_string(),
            },
        };
        SweepEntry {
            run_id: sub.run_id.clone(),
            amplitude,
            outcome,
        }
    };

    #[cfg(feature = "parallel")]
    let entries: Vec<SweepEntry> = configs.par_iter().map(run_entry).collect();
    #[cfg(not(feature = "parallel"))]
    let entries: Vec<SweepEntry> = configs.iter().map(run_entry).collect();

    let record = SweepRecord {
        base_run_id: cfg.run_id.clone(),
        entries,
    };

    if let Some(out) = &cfg.output {
        std::fs::create_dir_all(&out.dir).map_err(|e| NlsError::Io {
            path: out.dir.display().to_string(),
            source: e,
        })?;
        let path = out.dir.join(format!("{}-sweep.json", cfg.run_id));
        let text = serde_json::to_string_pretty(&record)
            .map_err(|e| NlsError::Config(format!("sweep serialization failed: {e}")))?;
        write_text(&path, &(text + "\n"))?;
    }

    Ok(record)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| NlsError::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Persists an artifact as pretty JSON (floats in shortest round-trip form).
pub fn write_artifact(artifact: &RunArtifact, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(artifact)
        .map_err(|e| NlsError::Config(format!("artifact serialization failed: {e}")))?;
    write_text(path, &(text + "\n"))
}

pub fn load_artifact(path: &Path) -> Result<RunArtifact> {
    let text = std::fs::read_to_string(path).map_err(|e| NlsError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    serde_json::from_str(&text).map_err(|e| NlsError::Parse {
        path: path.display().to_string(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Writes a field as text: `# key = value` headers, then `r re im` rows.
pub fn write_field(u: &RadialField, path: &Path) -> Result<()> {
    let grid = u.grid();
    let mut text = String::with_capacity(u.len() * 48);
    text.push_str("# nlslab radial field\n# version = 1\n");
    text.push_str(&format!("# dimension = {}\n", grid.dimension()));
    text.push_str(&format!("# r_max = {}\n", grid.r_max()));
    text.push_str(&format!("# nodes = {}\n", grid.len()));
    text.push_str("# columns = r re im\n");
    for (&r, v) in grid.nodes().iter().zip(u.values()) {
        text.push_str(&format!("{} {} {}\n", r, v.re, v.im));
    }
    write_text(path, &text)
}

/// Loads a field written by [`write_field`], bit-exactly.
pub fn load_field(path: &Path) -> Result<RadialField> {
    let text = std::fs::read_to_string(path).map_err(|e| NlsError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let perr = |line: usize, message: String| NlsError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };

    let mut dimension: Option<u32> = None;
    let mut r_max: Option<f64> = None;
    let mut nodes: Option<usize> = None;
    let mut values: Vec<Complex64> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((key, value)) = rest.split_once('=') {
                let (key, value) = (key.trim(), value.trim());
                match key {
                    "dimension" => {
                        dimension = Some(value.parse().map_err(|_| {
                            perr(line_no, format!("bad dimension {value:?}"))
                        })?)
                    }
                    "r_max" => {
                        r_max = Some(value.parse().map_err(|_| {
                            perr(line_no, format!("bad r_max {value:?}"))
                        })?)
                    }
                    "nodes" => {
                        nodes = Some(value.parse().map_err(|_| {
                            perr(line_no, format!("bad node count {value:?}"))
                        })?)
                    }
                    _ => {}
                }
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let _r = parts.next();
        let re: f64 = parts
            .next()
            .ok_or_else(|| perr(line_no, "missing real part".into()))?
            .parse()
            .map_err(|_| perr(line_no, "bad real part".into()))?;
        let im: f64 = parts
            .next()
            .ok_or_else(|| perr(line_no, "missing imaginary part".into()))?
            .parse()
            .map_err(|_| perr(line_no, "bad imaginary part".into()))?;
        values.push(Complex64::new(re, im));
    }

    let dimension = dimension.ok_or_else(|| perr(0, "missing dimension header".into()))?;
    let r_max = r_max.ok_or_else(|| perr(0, "missing r_max header".into()))?;
    let nodes = nodes.ok_or_else(|| perr(0, "missing nodes header".into()))?;
    if values.len() != nodes {
        return Err(perr(
            0,
            format!("expected {nodes} rows, found {}", values.len()),
        ));
    }
    let grid = Arc::new(RadialGrid::uniform(dimension, r_max, nodes)?);
    RadialField::new(grid, values)
}

/// Writes evolution samples as CSV. Column order is fixed:
/// `t,mass,grad_sq,power_integral,energy,sup_abs,spacetime_accum,weighted_mass,local_virial,pullback_increment`
/// (optional columns empty when untracked).
pub fn write_record_csv(record: &EvolutionRecord, path: &Path) -> Result<()> {
    let mut text = String::with_capacity(record.samples.len() * 96 + 128);
    text.push_str(
        "t,mass,grad_sq,power_integral,energy,sup_abs,spacetime_accum,weighted_mass,\
         local_virial,pullback_increment\n",
    );
    let opt = |v: Option<f64>| v.map_or(String::new(), |x| format!("{x}"));
    for s in &record.samples {
        let mut line = String::new();
        line.push_str(&format!(
            "{},{},{},{},{},{},{}",
            s.t, s.mass, s.grad_sq, s.power_integral, s.energy, s.sup_abs, s.spacetime_accum
        ));
        line.push(',');
        line.push_str(&opt(s.weighted_mass));
        line.push(',');
        line.push_str(&opt(s.local_virial));
        line.push(',');
        line.push_str(&opt(s.pullback_increment));
        line.push('\n');
        text.push_str(&line);
    }
    let mut file = std::fs::File::create(path).map_err(|e| NlsError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    file.write_all(text.as_bytes()).map_err(|e| NlsError::Io {
        path: path.display().to_string(),
        source: e,
    })
}
