use std::fmt::Write as _;

use saddlescape::dynamics::{RunOutcome, RunResult};
use saddlescape::SolverParams;

use crate::config::ExperimentConfig;
use crate::output::fmt_g17;
use crate::registry::Built;
use crate::runner::{cpu_seconds, run_on, EXIT_DIVERGED, EXIT_MAX_ITER, EXIT_OK, EXIT_USAGE};

#[derive(Debug, Clone, PartialEq)]
pub enum RowStatus {
    Converged,
    MaxIter,
    Diverged,
    Failed(String),
}

impl RowStatus {
    fn label(&self) -> &str {
        match self {
            Self::Converged => "converged",
            Self::MaxIter => "max_iter",
            Self::Diverged => "diverged",
            Self::Failed(_) => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub iters: usize,
    pub cpu_seconds: f64,
    pub status: RowStatus,
    /// `cpu(gamma = 0) / cpu(gamma)` when both rows converged.
    pub speedup_vs_gamma0: Option<f64>,
}

impl SweepRow {
    pub fn converged(&self) -> bool {
        self.status == RowStatus::Converged
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn row(&self, gamma: f64) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.gamma == gamma)
    }

    pub fn exit_code(&self) -> i32 {
        self.rows
            .iter()
            .map(|r| match r.status {
                RowStatus::Converged => EXIT_OK,
                RowStatus::Failed(_) => EXIT_USAGE,
                RowStatus::MaxIter => EXIT_MAX_ITER,
                RowStatus::Diverged => EXIT_DIVERGED,
            })
            .max()
            .unwrap_or(EXIT_OK)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("gamma,iters,cpu_seconds,converged,status,speedup_vs_gamma0\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                fmt_g17(r.gamma),
                r.iters,
                fmt_g17(r.cpu_seconds),
                r.converged(),
                r.status.label(),
                r.speedup_vs_gamma0.map(fmt_g17).unwrap_or_default()
            );
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = format!(
            "{:>8} {:>8} {:>12} {:>10} {:>8}\n",
            "gamma", "iters", "cpu_s", "status", "speedup"
        );
        for r in &self.rows {
            let speedup = r
                .speedup_vs_gamma0
                .map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
            let _ = writeln!(
                s,
                "{:>8} {:>8} {:>12.4} {:>10} {:>8}",
                r.gamma,
                r.iters,
                r.cpu_seconds,
                r.status.label(),
                speedup
            );
        }
        for r in &self.rows {
            if let RowStatus::Failed(msg) = &r.status {
                let _ = writeln!(s, "gamma {}: {msg}", r.gamma);
            }
        }
        s
    }
}

fn row_of(gamma: f64, res: saddlescape::Result<RunResult>) -> (SweepRow, Option<RunResult>) {
    match res {
        Ok(r) => {
            let status = match r.outcome {
                RunOutcome::Converged => RowStatus::Converged,
                RunOutcome::MaxIter => RowStatus::MaxIter,
                RunOutcome::Diverged { .. } => RowStatus::Diverged,
            };
            let row = SweepRow {
                gamma,
                iters: r.iterations(),
                cpu_seconds: cpu_seconds(&r.trace),
                status,
                speedup_vs_gamma0: None,
            };
            (row, Some(r))
        }
        Err(e) => (
            SweepRow {
                gamma,
                iters: 0,
                cpu_seconds: 0.0,
                status: RowStatus::Failed(e.to_string()),
                speedup_vs_gamma0: None,
            },
            None,
        ),
    }
}

/// Runs every `gamma` of `cfg.sweep` with otherwise identical parameters,
/// seed and initial point. Rows run on scoped threads when `parallel` is
/// set; timings are then less faithful.
pub fn run_sweep(built: &Built, cfg: &ExperimentConfig, parallel: bool) -> (SweepTable, Vec<Option<RunResult>>) {
    let gammas = cfg.sweep.clone().unwrap_or_else(|| vec![cfg.params.gamma]);
    let params_for = |g: f64| SolverParams {
        gamma: g,
        ..cfg.params.clone()
    };
    let results: Vec<(SweepRow, Option<RunResult>)> = if parallel {
        std::thread::scope(|scope| {
            let handles: Vec<_> = gammas
                .iter()
                .map(|&g| scope.spawn(move || row_of(g, run_on(built, cfg, &params_for(g)))))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("sweep row panicked"))
                .collect()
        })
    } else {
        gammas
            .iter()
            .map(|&g| row_of(g, run_on(built, cfg, &params_for(g))))
            .collect()
    };
    let (mut rows, runs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let base = rows
        .iter()
        .find(|r| r.gamma == 0.0 && r.converged())
        .map(|r| r.cpu_seconds);
    if let Some(base) = base {
        for r in rows.iter_mut().filter(|r| r.converged() && r.cpu_seconds > 0.0) {
            r.speedup_vs_gamma0 = Some(base / r.cpu_seconds);
        }
    }
    (SweepTable { rows }, runs)
}
