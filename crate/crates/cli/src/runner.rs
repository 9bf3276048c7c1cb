use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use saddlescape::dynamics::{run, RunOutcome, RunResult};
use saddlescape::{IterationTrace, Result, SolverParams};

use crate::config::{ExperimentConfig, TraceFormat};
use crate::output::write_trace;
use crate::registry::{build, initial_point, Built};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_MAX_ITER: i32 = 2;
pub const EXIT_DIVERGED: i32 = 3;

pub fn exit_code(outcome: RunOutcome) -> i32 {
    match outcome {
        RunOutcome::Converged => EXIT_OK,
        RunOutcome::MaxIter => EXIT_MAX_ITER,
        RunOutcome::Diverged { .. } => EXIT_DIVERGED,
    }
}

/// Wall-clock seconds of the run loop (the last record's timestamp).
pub fn cpu_seconds(trace: &IterationTrace) -> f64 {
    trace.last().map_or(0.0, |r| r.wall_ns as f64 * 1e-9)
}

/// Runs `cfg` on an already constructed landscape, with `params` in place of
/// `cfg.params`.
pub fn run_on(built: &Built, cfg: &ExperimentConfig, params: &SolverParams) -> Result<RunResult> {
    let x0 = initial_point(built, &cfg.init, params.seed)?;
    run(built.land(), params, &x0, cfg.method)
}

pub fn run_config(cfg: &ExperimentConfig) -> Result<RunResult> {
    let built = build(&cfg.landscape)?;
    run_on(&built, cfg, &cfg.params)
}

pub fn save_trace(path: &Path, trace: &IterationTrace, format: TraceFormat, every: usize) -> std::io::Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_trace(&mut out, &trace.downsample(every), format)?;
    out.flush()
}
