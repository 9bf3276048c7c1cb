use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use saddlescape_cli::config::{ExperimentConfig, TraceFormat};
use saddlescape_cli::registry::build;
use saddlescape_cli::runner::{cpu_seconds, exit_code, run_on, save_trace, EXIT_OK, EXIT_USAGE};
use saddlescape_cli::sweep::run_sweep;
use saddlescape_cli::verify::{run_suite, Suite};

#[derive(Parser)]
#[command(name = "saddlescape", version, about = "Saddle-point search experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its trace.
    Run {
        config: PathBuf,
        /// Trace path (overrides `output.path`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Keep every N-th record in the written trace.
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Write the effective configuration (defaults filled in) here.
        #[arg(long)]
        dump_config: Option<PathBuf>,
    },
    /// Run the config once per momentum value in its `sweep` list.
    Sweep {
        config: PathBuf,
        /// Table path stem (overrides `output.path`); writes `.csv` and `.txt`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        every: usize,
        /// Run rows concurrently.
        #[arg(long)]
        parallel: bool,
    },
    /// Run a property suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// One JSON object per check instead of tab-separated lines.
        #[arg(long)]
        json: bool,
    },
}

fn load(path: &Path) -> Result<ExperimentConfig, i32> {
    ExperimentConfig::load(path).map_err(|e| {
        eprintln!("{e}");
        EXIT_USAGE
    })
}

fn trace_ext(format: TraceFormat) -> &'static str {
    match format {
        TraceFormat::Csv => "csv",
        TraceFormat::Jsonl => "jsonl",
    }
}

fn cmd_run(config: &Path, out: Option<PathBuf>, every: usize, dump: Option<PathBuf>) -> Result<i32, i32> {
    let cfg = load(config)?;
    if let Some(dump) = dump {
        std::fs::write(&dump, cfg.effective_json()).map_err(|e| {
            eprintln!("cannot write {}: {e}", dump.display());
            EXIT_USAGE
        })?;
    }
    let built = build(&cfg.landscape).map_err(|e| {
        eprintln!("{e}");
        EXIT_USAGE
    })?;
    let res = run_on(&built, &cfg, &cfg.params).map_err(|e| {
        eprintln!("{e}");
        EXIT_USAGE
    })?;
    if let Some(path) = out.or_else(|| cfg.output.path.clone()) {
        save_trace(&path, &res.trace, cfg.output.format, every).map_err(|e| {
            eprintln!("cannot write {}: {e}", path.display());
            EXIT_USAGE
        })?;
    }
    let last = res.trace.last().expect("trace holds x0");
    println!(
        "{} {:?} iters={} err={} grad_norm={:e} cpu_s={:.4}",
        built.land().name(),
        res.outcome,
        res.iterations(),
        last.err.map_or_else(|| "-".into(), |e| format!("{e:e}")),
        last.grad_norm,
        cpu_seconds(&res.trace)
    );
    Ok(exit_code(res.outcome))
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>, every: usize, parallel: bool) -> Result<i32, i32> {
    let cfg = load(config)?;
    let built = build(&cfg.landscape).map_err(|e| {
        eprintln!("{e}");
        EXIT_USAGE
    })?;
    let (table, runs) = run_sweep(&built, &cfg, parallel);
    print!("{}", table.to_text());
    if let Some(stem) = out.or_else(|| cfg.output.path.clone()) {
        let write = |path: PathBuf, body: &str| {
            std::fs::write(&path, body).map_err(|e| {
                eprintln!("cannot write {}: {e}", path.display());
                EXIT_USAGE
            })
        };
        write(stem.with_extension("csv"), &table.to_csv())?;
        write(stem.with_extension("txt"), &table.to_text())?;
        let base = stem.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        for (row, run) in table.rows.iter().zip(&runs) {
            if let Some(run) = run {
                let name = format!("{base}_gamma{}.{}", row.gamma, trace_ext(cfg.output.format));
                let path = stem.with_file_name(name);
                save_trace(&path, &run.trace, cfg.output.format, every).map_err(|e| {
                    eprintln!("cannot write {}: {e}", path.display());
                    EXIT_USAGE
                })?;
            }
        }
    }
    Ok(table.exit_code())
}

fn cmd_verify(suite: Suite, json: bool) -> i32 {
    let checks = run_suite(suite);
    for c in &checks {
        if json {
            println!("{}", serde_json::to_string(c).expect("check serializes"));
        } else {
            println!("{c}");
        }
    }
    if checks.iter().all(|c| c.passed) {
        EXIT_OK
    } else {
        EXIT_USAGE
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    let code = match cli.cmd {
        Command::Run {
            config,
            out,
            every,
            dump_config,
        } => cmd_run(&config, out, every, dump_config).unwrap_or_else(|c| c),
        Command::Sweep {
            config,
            out,
            every,
            parallel,
        } => cmd_sweep(&config, out, every, parallel).unwrap_or_else(|c| c),
        Command::Verify { suite, json } => cmd_verify(suite, json),
    };
    ExitCode::from(code as u8)
}
