use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

use lolacheck::bench_gen::{generate, BenchKind};
use lolacheck::diagnostic::Diagnostic;
use lolacheck::evaluator::{Monitor, RunConfig};
use lolacheck::pipeline::{check_source, check_source_timed, check_unsafe, frontend, Phase};
use lolacheck::time::parse_decimal;
use lolacheck::trace_io::{read_csv_trace, write_report, ReportFormat, TraceError};
use lolacheck::wellformedness::build_graph;

const STATIC: u8 = 1;
const IO: u8 = 2;
const RUNTIME: u8 = 3;

#[derive(Parser)]
#[command(name = "lolacheck", version, about = "Type checker and monitor for stream specifications")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run all static checks on a specification.
    Check {
        spec: PathBuf,
        /// Print the wall time of each phase.
        #[arg(long)]
        timing: bool,
    },
    /// Replay a CSV trace through a checked specification.
    Monitor {
        spec: PathBuf,
        trace: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Report every output evaluation, not only trigger verdicts.
        #[arg(long)]
        dump: bool,
        /// Keep stepping periodic streams up to this time (seconds).
        #[arg(long)]
        end_time: Option<String>,
        /// Skip pacing, semantic and cycle checks. For debugging only.
        #[arg(long, hide = true)]
        bypass_checks: bool,
    },
    /// Generate a benchmark specification and time its type check.
    Bench {
        #[arg(value_enum)]
        kind: Kind,
        n: usize,
        /// Number of timed repetitions; the median is reported.
        #[arg(long, default_value_t = 10)]
        reps: usize,
        /// Also write the generated specification to this file.
        #[arg(long)]
        emit: Option<PathBuf>,
    },
    /// Write the dependency graph of a specification in DOT format.
    Graph {
        spec: PathBuf,
        #[arg(long)]
        dot: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Sync,
    Param,
    Conjunct,
}

impl From<Kind> for BenchKind {
    fn from(k: Kind) -> BenchKind {
        match k {
            Kind::Sync => BenchKind::SyncChain,
            Kind::Param => BenchKind::ParamChain,
            Kind::Conjunct => BenchKind::ConjunctChain,
        }
    }
}

/// A failure with its exit code. The message has already been printed when
/// it is empty.
struct Failure(u8, String);

impl Failure {
    fn io(e: impl std::fmt::Display) -> Failure {
        Failure(IO, format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Check { spec, timing } => check(&spec, timing),
        Command::Monitor { spec, trace, format, out, dump, end_time, bypass_checks } => {
            monitor(&spec, &trace, format, out.as_deref(), dump, end_time.as_deref(), bypass_checks)
        }
        Command::Bench { kind, n, reps, emit } => bench(kind.into(), n, reps, emit.as_deref()),
        Command::Graph { spec, dot } => graph(&spec, &dot),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure(code, msg)) => {
            if !msg.is_empty() {
                eprintln!("error: {msg}");
            }
            ExitCode::from(code)
        }
    }
}

fn read_spec(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display())).map_err(Failure::io)
}

fn report(diags: &[Diagnostic], src: &str, path: &Path) -> Failure {
    for d in diags {
        eprintln!("{}", d.render(src, &path.display().to_string()));
    }
    Failure(STATIC, String::new())
}

fn millis(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

fn check(path: &Path, timing: bool) -> Result<(), Failure> {
    let src = read_spec(path)?;
    let (result, timings) = check_source_timed(&src);
    if timing {
        let mut merged: Vec<(Phase, Duration)> = Vec::new();
        for &(phase, d) in &timings.phases {
            match merged.iter_mut().find(|(p, _)| *p == phase) {
                Some(entry) => entry.1 += d,
                None => merged.push((phase, d)),
            }
        }
        for (phase, d) in merged {
            println!("{:<16} {:>10.3} ms", phase.name(), millis(d));
        }
        println!("{:<16} {:>10.3} ms", "total", millis(timings.total()));
    }
    match result {
        Ok(_) => Ok(()),
        Err(diags) => Err(report(&diags, &src, path)),
    }
}

fn monitor(
    spec_path: &Path,
    trace_path: &Path,
    format: Format,
    out: Option<&Path>,
    dump: bool,
    end_time: Option<&str>,
    bypass: bool,
) -> Result<(), Failure> {
    let src = read_spec(spec_path)?;
    let (spec, values, pacing) = if bypass {
        check_unsafe(&src).map_err(|d| report(&d, &src, spec_path))?
    } else {
        let c = check_source(&src).map_err(|d| report(&d, &src, spec_path))?;
        (c.spec, c.values, c.pacing)
    };
    let end_time = match end_time {
        Some(text) => Some(parse_decimal(text).ok_or_else(|| Failure(IO, format!("invalid end time `{text}`")))?),
        None => None,
    };
    let file = fs::File::open(trace_path)
        .with_context(|| format!("cannot read {}", trace_path.display()))
        .map_err(Failure::io)?;
    let trace = read_csv_trace(io::BufReader::new(file), &spec, &values).map_err(|e| match e {
        TraceError::Io(e) => Failure::io(e),
        e => Failure(IO, format!("{}: {e}", trace_path.display())),
    })?;
    let config = RunConfig { end_time, dump, reverse_ties: false };
    let result = Monitor::new(&spec, &values, &pacing, config).run(&trace).map_err(|e| Failure(RUNTIME, e.to_string()))?;
    let format = match format {
        Format::Csv => ReportFormat::Csv,
        Format::Json => ReportFormat::Json,
    };
    match out {
        Some(path) => {
            let file = fs::File::create(path)
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(Failure::io)?;
            write_report(&result, format, dump, io::BufWriter::new(file)).map_err(Failure::io)
        }
        None => write_report(&result, format, dump, io::stdout().lock()).map_err(Failure::io),
    }
}

fn bench(kind: BenchKind, n: usize, reps: usize, emit: Option<&Path>) -> Result<(), Failure> {
    if n == 0 {
        return Err(Failure(IO, "benchmarks need n >= 1".into()));
    }
    let src = generate(kind, n);
    if let Some(path) = emit {
        fs::write(path, &src).with_context(|| format!("cannot write {}", path.display())).map_err(Failure::io)?;
    }
    let mut times = Vec::with_capacity(reps.max(1));
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let result = check_source(&src);
        times.push(start.elapsed());
        if let Err(diags) = result {
            return Err(report(&diags, &src, Path::new(&format!("<{} {n}>", kind.name()))));
        }
    }
    times.sort();
    let median = times[times.len() / 2];
    let mut stdout = io::stdout().lock();
    writeln!(stdout, "{} n={n}: accepted, median {:.3} ms over {} runs", kind.name(), millis(median), times.len())
        .map_err(Failure::io)
}

fn graph(path: &Path, dot: &Path) -> Result<(), Failure> {
    let src = read_spec(path)?;
    let spec = frontend(&src).map_err(|d| report(&d, &src, path))?;
    let text = build_graph(&spec).to_dot(&spec);
    fs::write(dot, text).with_context(|| format!("cannot write {}", dot.display())).map_err(Failure::io)
}
