//! Command-line front end.
//!
//! Subcommands mirror the library pipeline: `groundstate` solves the
//! profile, `invariants` reports conserved quantities of a stored field,
//! `classify` places data against the thresholds, `evolve` runs one
//! split-step evolution, and `sweep` fans an amplitude list out in
//! parallel. Every run-shaped subcommand accepts `--config FILE` (TOML);
//! values from the file override the flags.
//!
//! Exit codes: 0 success, otherwise a stable per-category code printed
//! alongside `error[<category>]: <message>` on stderr (see `exit_code`).

use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use nlslab::classifier::{classify, ClassifyOptions};
use nlslab::groundstate::{sharp_constants, solve_ground_state, verify_pohozhaev};
use nlslab::harness::{
    load_field, run_one, sweep, write_field, RunConfig, RunPatch, SweepOutcome,
};
use nlslab::invariants::{report, report_from_scalars};
use nlslab::{NlsError, RadialGrid, Result};

#[derive(Parser)]
#[command(
    name = "nlslab",
    version,
    about = "Radial focusing NLS laboratory: profiles, invariants, dichotomy, evolution"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the ground-state profile and print its constants.
    Groundstate(GroundstateArgs),
    /// Report conserved quantities of a stored field.
    Invariants(InvariantsArgs),
    /// Classify data against the scattering/collapse thresholds.
    Classify(ClassifyArgs),
    /// Run one split-step evolution.
    Evolve(RunArgs),
    /// Run an amplitude sweep of independent evolutions.
    Sweep(SweepArgs),
}

#[derive(Args, Clone, Default)]
struct ProblemFlags {
    /// Nonlinearity exponent p (> 1).
    #[arg(long)]
    p: Option<f64>,
    /// Spatial dimension N.
    #[arg(long)]
    dimension: Option<u32>,
    /// Frequency of the standing wave.
    #[arg(long)]
    normalization: Option<f64>,
    /// Domain radius.
    #[arg(long)]
    r_max: Option<f64>,
    /// Number of grid nodes.
    #[arg(long)]
    nodes: Option<usize>,
    /// Shooting tolerance for the profile solve.
    #[arg(long)]
    tol: Option<f64>,
}

impl ProblemFlags {
    fn patch(&self) -> RunPatch {
        let mut p = RunPatch::default();
        p.p = self.p;
        p.dimension = self.dimension;
        p.normalization = self.normalization;
        p.grid.r_max = self.r_max;
        p.grid.nodes = self.nodes;
        p.evolution.shooting_tol = self.tol;
        p
    }
}

#[derive(Args, Clone, Default)]
struct InitialFlags {
    /// Initial data family: soliton-multiple | soliton-scaling | gaussian | ring | file.
    #[arg(long)]
    family: Option<String>,
    /// Amplitude (soliton multiple or bump height).
    #[arg(long)]
    amplitude: Option<f64>,
    /// Bump width (gaussian, ring).
    #[arg(long)]
    width: Option<f64>,
    /// Ring center radius.
    #[arg(long)]
    center: Option<f64>,
    /// Normalization multiplier (soliton-scaling).
    #[arg(long)]
    scale: Option<f64>,
    /// Field file (family "file").
    #[arg(long)]
    input: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct EvolutionFlags {
    /// Evolve up to this time.
    #[arg(long)]
    t_end: Option<f64>,
    /// Observable sampling interval.
    #[arg(long)]
    sample_dt: Option<f64>,
    /// Step size as a multiple of the spacing squared.
    #[arg(long)]
    dt_coeff: Option<f64>,
    /// Abort when the adaptive step falls below this.
    #[arg(long)]
    dt_min: Option<f64>,
    /// Variance cutoff scale (enables localized virial tracking).
    #[arg(long)]
    cutoff_scale: Option<f64>,
    /// Absorb outgoing radiation near the boundary.
    #[arg(long)]
    sponge: bool,
}

#[derive(Args, Clone, Default)]
struct OutputFlags {
    /// Directory for artifacts (JSON, CSV, fields).
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Also persist initial and final fields.
    #[arg(long)]
    write_fields: bool,
}

#[derive(Args)]
struct GroundstateArgs {
    #[command(flatten)]
    problem: ProblemFlags,
    /// Write the solved profile to this file.
    #[arg(long)]
    profile_out: Option<PathBuf>,
    /// TOML config; its values override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct InvariantsArgs {
    /// Stored field file.
    #[arg(long)]
    input: PathBuf,
    /// Nonlinearity exponent p (> 1).
    #[arg(long, default_value_t = 3.0)]
    p: f64,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Stored field file; omit to classify scalar inputs.
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    problem: ProblemFlags,
    /// Mass (scalar mode).
    #[arg(long, requires = "energy", requires = "grad_sq")]
    mass: Option<f64>,
    /// Energy (scalar mode).
    #[arg(long)]
    energy: Option<f64>,
    /// Squared gradient norm (scalar mode).
    #[arg(long)]
    grad_sq: Option<f64>,
    /// Momentum magnitude (scalar mode).
    #[arg(long, default_value_t = 0.0)]
    momentum: f64,
    /// Treat the data as radially symmetric.
    #[arg(long)]
    radial: bool,
    /// Treat the data as having finite variance.
    #[arg(long)]
    finite_variance: bool,
    /// Skip the Galilean reduction of a moving frame.
    #[arg(long)]
    no_galilean: bool,
    /// Width of the at-threshold tie band (relative).
    #[arg(long, default_value_t = 1e-6)]
    tie_tol: f64,
    /// Machine-readable output.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RunArgs {
    /// Identifier used in artifact file names.
    #[arg(long)]
    run_id: Option<String>,
    #[command(flatten)]
    problem: ProblemFlags,
    #[command(flatten)]
    initial: InitialFlags,
    #[command(flatten)]
    evolution: EvolutionFlags,
    #[command(flatten)]
    output: OutputFlags,
    /// TOML config; its values override the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Machine-readable output (full artifact).
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Amplitudes to fan out over.
    #[arg(long, value_delimiter = ',')]
    amplitudes: Vec<f64>,
}

impl RunArgs {
    fn flag_patch(&self) -> RunPatch {
        let mut patch = self.problem.patch();
        patch.run_id = self.run_id.clone();
        patch.initial.family = self.initial.family.clone();
        patch.initial.amplitude = self.initial.amplitude;
        patch.initial.width = self.initial.width;
        patch.initial.center = self.initial.center;
        patch.initial.scale = self.initial.scale;
        patch.initial.path = self
            .initial
            .input
            .as_ref()
            .map(|p| p.display().to_string());
        patch.evolution.t_end = self.evolution.t_end;
        patch.evolution.sample_dt = self.evolution.sample_dt;
        patch.evolution.dt_coeff = self.evolution.dt_coeff;
        patch.evolution.dt_min = self.evolution.dt_min;
        patch.evolution.cutoff_scale = self.evolution.cutoff_scale;
        if self.evolution.sponge {
            patch.evolution.sponge = Some(true);
        }
        patch.output.dir = self
            .output
            .out_dir
            .as_ref()
            .map(|p| p.display().to_string());
        if self.output.write_fields {
            patch.output.write_fields = Some(true);
        }
        patch
    }

    /// Defaults, then flags, then the config file: the file wins.
    fn resolve(&self, defaults: RunPatch) -> Result<RunConfig> {
        let flags = self.flag_patch();
        let layers: Vec<RunPatch> = match &self.config {
            Some(path) => vec![defaults, flags, RunPatch::load(path)?],
            None => vec![defaults, flags],
        };
        let refs: Vec<&RunPatch> = layers.iter().collect();
        RunConfig::resolve(&refs)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(exit_code(e.category()))
        }
    }
}

/// Stable mapping from error categories to process exit codes.
fn exit_code(category: &str) -> u8 {
    match category {
        "invalid-parameter" => 2,
        "critical-index-out-of-range" => 3,
        "grid-mismatch" | "grid-too-coarse" | "length-mismatch" => 4,
        "bracket-not-found" | "not-converged" => 5,
        "mass-not-positive" | "non-finite" => 6,
        "io" => 7,
        "parse" | "config" => 8,
        _ => 1,
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.cmd {
        Cmd::Groundstate(args) => cmd_groundstate(args),
        Cmd::Invariants(args) => cmd_invariants(args),
        Cmd::Classify(args) => cmd_classify(args),
        Cmd::Evolve(args) => cmd_evolve(args),
        Cmd::Sweep(args) => cmd_sweep(args),
    }
}

fn cmd_groundstate(args: GroundstateArgs) -> Result<()> {
    let mut layers: Vec<RunPatch> = vec![args.problem.patch()];
    if let Some(path) = &args.config {
        layers.push(RunPatch::load(path)?);
    }
    let refs: Vec<&RunPatch> = layers.iter().collect();
    let cfg = RunConfig::resolve(&refs)?;

    let grid = Arc::new(RadialGrid::uniform(cfg.dimension, cfg.r_max, cfg.nodes)?);
    let gs = solve_ground_state(cfg.p, cfg.normalization, &grid, cfg.shooting_tol)?;
    let constants = sharp_constants(&gs);
    let pohozhaev = verify_pohozhaev(&gs);

    if let Some(path) = &args.profile_out {
        write_field(gs.profile(), path)?;
    }

    if args.json {
        let doc = serde_json::json!({
            "summary": gs.summary(),
            "constants": constants,
            "pohozhaev": pohozhaev,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("serializable"));
    } else {
        let s = gs.summary();
        println!("ground state  p={} N={} normalization={}", s.p, s.dimension, s.normalization);
        println!("  origin value        {:.12}", s.q0);
        println!("  mass                {:.12}", s.mass);
        println!("  grad_sq             {:.12}", s.grad_sq);
        println!("  power integral      {:.12}", s.power_integral);
        println!("  energy              {:.12}", s.energy);
        println!("  sharp constant      {:.12}", constants.c_gn);
        println!("  threshold  M^(1-s)E^s   {:.12}", constants.threshold_me);
        println!("  threshold  grad product {:.12}", constants.threshold_grad);
        println!(
            "  identity residuals  multiplier {:.3e}  dilation {:.3e}",
            pohozhaev.multiplier_residual, pohozhaev.dilation_residual
        );
        if let Some(path) = &args.profile_out {
            println!("  profile written to  {}", path.display());
        }
    }
    Ok(())
}

fn cmd_invariants(args: InvariantsArgs) -> Result<()> {
    let field = load_field(&args.input)?;
    let rep = report(&field, args.p)?;
    if args.json {
        println!("{}", serde_json::to_string_pretty(&rep).expect("serializable"));
    } else {
        println!("invariants  p={} N={}", rep.p, rep.dimension);
        println!("  mass            {:.12}", rep.mass);
        println!("  grad_sq         {:.12}", rep.grad_sq);
        println!("  power integral  {:.12}", rep.power_integral);
        println!("  energy          {:.12}", rep.energy);
        println!("  momentum        {:.12}", rep.momentum_mag);
        match rep.product_me {
            Some(v) => println!("  M^(1-s)E^s      {:.12}", v),
            None => println!("  M^(1-s)E^s      (undefined here)"),
        }
    }
    Ok(())
}

fn cmd_classify(args: ClassifyArgs) -> Result<()> {
    let defaults = RunConfig::resolve(&[])?;
    let p = args.problem.p.unwrap_or(defaults.p);
    let normalization = args.problem.normalization.unwrap_or(defaults.normalization);
    let tol = args.problem.tol.unwrap_or(defaults.shooting_tol);

    let (rep, grid) = match &args.input {
        Some(path) => {
            let field = load_field(path)?;
            let grid = field.grid().clone();
            (report(&field, p)?, grid)
        }
        None => {
            let (mass, energy, grad_sq) = match (args.mass, args.energy, args.grad_sq) {
                (Some(m), Some(e), Some(g)) => (m, e, g),
                _ => {
                    return Err(NlsError::InvalidParameter(
                        "scalar mode needs --mass, --energy, and --grad-sq (or pass --input)"
                            .into(),
                    ))
                }
            };
            let dimension = args.problem.dimension.unwrap_or(defaults.dimension);
            let r_max = args.problem.r_max.unwrap_or(defaults.r_max);
            let nodes = args.problem.nodes.unwrap_or(defaults.nodes);
            let grid = Arc::new(RadialGrid::uniform(dimension, r_max, nodes)?);
            (
                report_from_scalars(p, dimension, mass, energy, grad_sq, args.momentum)?,
                grid,
            )
        }
    };

    let gs = solve_ground_state(p, normalization, &grid, tol)?;
    let constants = sharp_constants(&gs);
    let opts = ClassifyOptions {
        apply_galilean: !args.no_galilean,
        radial: args.radial,
        finite_variance: args.finite_variance,
        tie_tol: args.tie_tol,
    };
    let verdict = classify(&rep, &constants, &opts)?;

    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&verdict).expect("serializable")
        );
    } else {
        println!("{}", verdict.category);
        println!("  s_c             {:.6}", verdict.s_c);
        if let Some(m) = verdict.me_margin {
            println!("  me margin       {:+.6e}", m);
        }
        if let Some(m) = verdict.grad_margin {
            println!("  grad margin     {:+.6e}", m);
        }
        if let Some(met) = verdict.blowup_hypothesis_met {
            println!("  hypotheses met  {met}");
        }
        for note in &verdict.notes {
            println!("  note: {note}");
        }
    }
    Ok(())
}

fn evolve_defaults() -> RunPatch {
    let mut d = RunPatch::default();
    d.evolution.t_end = Some(10.0);
    d
}

fn cmd_evolve(args: RunArgs) -> Result<()> {
    let cfg = args.resolve(evolve_defaults())?;
    let artifact = run_one(&cfg)?;
    if args.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&artifact).expect("serializable")
        );
    } else {
        println!("run {}", artifact.run_id);
        println!("  initial verdict  {}", artifact.verdict.category);
        if let Some(rec) = &artifact.evolution {
            println!("  evolution        {}", rec.verdict);
            if let Some(last) = rec.samples.last() {
                println!(
                    "  final sample     t={:.4} mass={:.6e} grad_sq={:.6e}",
                    last.t, last.mass, last.grad_sq
                );
            }
            if let Some(fit) = &rec.blowup_fit {
                println!(
                    "  rate fit         t*={:.6} alpha={:.4} residual={:.3e}",
                    fit.t_star, fit.alpha, fit.residual
                );
            }
        }
        if let Some(out) = &cfg.output {
            println!("  artifacts in     {}", out.dir.display());
        }
    }
    Ok(())
}

fn cmd_sweep(args: SweepArgs) -> Result<()> {
    let mut defaults = RunPatch::default();
    if !args.amplitudes.is_empty() {
        defaults.sweep.amplitudes = Some(args.amplitudes.clone());
    }
    let cfg = args.run.resolve(defaults)?;
    let record = sweep(&cfg)?;
    if args.run.json {
        println!(
            "{}",
            serde_json::to_string_pretty(&record).expect("serializable")
        );
    } else {
        println!("sweep {} ({} runs)", record.base_run_id, record.entries.len());
        for entry in &record.entries {
            match &entry.outcome {
                SweepOutcome::Completed { artifact } => {
                    let evo = artifact
                        .evolution
                        .as_ref()
                        .map(|r| r.verdict.to_string())
                        .unwrap_or_else(|| "(not evolved)".to_string());
                    println!(
                        "  a={:<8} {:<28} {}",
                        entry.amplitude,
                        artifact.verdict.category.to_string(),
                        evo
                    );
                }
                SweepOutcome::Failed { category, message } => {
                    println!("  a={:<8} FAILED[{category}] {message}", entry.amplitude);
                }
            }
        }
        if let Some(out) = &cfg.output {
            println!("  artifacts in {}", out.dir.display());
        }
    }
    Ok(())
}
