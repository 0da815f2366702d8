use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use dialogue_core::generate::{generate, rng_from_seed, Variant};
use dialogue_core::utility::vpr_to_interval_structure;
use dialogue_core::verify::{run_suite, Suite};
use dialogue_core::{pareto, parse_problem, DominanceMode, Error, ParetoReport, Problem, RefinementEvent, Session};
use dialogue_service::{Config, Store};
use serde_json::json;

#[derive(Parser)]
#[command(name = "pareto-dialogue", version, about = "Pareto sets under incomplete information")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the Pareto set of a problem file.
    Solve {
        problem: PathBuf,
        /// Interval dominance mode; only valid for interval problems.
        #[arg(long)]
        mode: Option<DominanceMode>,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Turn a relation problem into an interval problem of utility bounds.
    Convert {
        problem: PathBuf,
        #[arg(long, value_enum)]
        to: Target,
        out: PathBuf,
    },
    /// Write a seeded random problem.
    Generate {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        alts: u32,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        criteria: u32,
        #[arg(long)]
        variant: Variant,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the hidden ground truth (interval and relation variants).
        #[arg(long)]
        hidden_truth: Option<PathBuf>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a property suite on generated instances.
    Verify {
        #[arg(long)]
        suite: Suite,
        #[arg(long, default_value_t = 1000)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Apply a scripted list of events to a session or problem file.
    Refine {
        session: PathBuf,
        #[arg(long)]
        script: PathBuf,
        /// Save the resulting session here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, default_value = "state")]
        state_dir: PathBuf,
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Intervals,
}

/// 1 for domain errors and violations, 2 for usage and I/O errors.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Failure {
            code: 1,
            message: message.into(),
        }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve { problem, mode, format } => solve(&problem, mode, format),
        Command::Convert { problem, to: Target::Intervals, out } => convert(&problem, &out),
        Command::Generate {
            alts,
            criteria,
            variant,
            seed,
            hidden_truth,
            out,
        } => generate_cmd(alts as usize, criteria as usize, variant, seed, hidden_truth.as_deref(), out.as_deref()),
        Command::Verify {
            suite,
            instances,
            seed,
            report,
        } => verify(suite, instances, seed, report.as_deref()),
        Command::Refine { session, script, out } => refine(&session, &script, out.as_deref()),
        Command::Serve {
            port,
            host,
            state_dir,
            cors_origin,
        } => serve(&host, port, state_dir, cors_origin),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn load_problem(path: &Path) -> Result<Problem, Failure> {
    parse_problem(&read(path)?).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

fn solve(path: &Path, mode: Option<DominanceMode>, format: Format) -> Outcome {
    let mut problem = load_problem(path)?;
    if let Some(mode) = mode {
        if problem.intervals().is_err() {
            return Err(Failure::domain(
                Error::WrongVariant {
                    expected: "interval",
                    found: problem.structure().kind(),
                }
                .to_string(),
            ));
        }
        problem = problem.with_mode(mode);
    }
    let report = pareto(&problem).report(&problem);
    match format {
        Format::Json => print!("{}", to_json(&report)),
        Format::Table => print!("{}", table(&report)),
    }
    Ok(())
}

fn table(report: &ParetoReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pareto: {}", report.pareto.join(", "));
    for (x, w) in &report.witnesses {
        let margins: Vec<String> = w.margins.iter().map(|(c, v)| format!("{c} {v:+}")).collect();
        let _ = writeln!(out, "{x} dominated by {}  [{}]", w.by, margins.join(", "));
    }
    out
}

fn convert(path: &Path, out: &Path) -> Outcome {
    let problem = load_problem(path)?;
    let converted = vpr_to_interval_structure(&problem).map_err(|e| Failure::domain(e.to_string()))?;
    write(out, &(converted.to_json_pretty() + "\n"))
}

fn generate_cmd(
    n: usize,
    m: usize,
    variant: Variant,
    seed: u64,
    hidden_path: Option<&Path>,
    out: Option<&Path>,
) -> Outcome {
    let instance = generate(&mut rng_from_seed(seed), n, m, variant);
    let text = instance.problem.to_json_pretty() + "\n";
    match out {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    if let Some(path) = hidden_path {
        match &instance.hidden {
            Some(hidden) => write(path, &(hidden.to_json_pretty() + "\n"))?,
            None => eprintln!("note: point instances have no hidden truth; {} not written", path.display()),
        }
    }
    Ok(())
}

fn verify(suite: Suite, instances: usize, seed: u64, report_path: Option<&Path>) -> Outcome {
    let report = run_suite(suite, instances, seed);
    let text = to_json(&report);
    match report_path {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    eprintln!(
        "{suite}: {} instances, {} violations",
        report.instances,
        report.violations.len()
    );
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::domain(format!("{} violations", report.violations.len())))
    }
}

/// Accepts a saved session or a bare problem file.
fn load_session(path: &Path) -> Result<Session, Failure> {
    let bytes = read(path)?;
    let value: serde_json::Value =
        serde_json::from_slice(&bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    if value.get("log").is_some() {
        return Session::load(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())));
    }
    let problem = parse_problem(&bytes).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    Session::create("session", problem, None).map_err(|e| Failure::domain(e.to_string()))
}

fn refine(session_path: &Path, script: &Path, out: Option<&Path>) -> Outcome {
    let mut session = load_session(session_path)?;
    let events: Vec<RefinementEvent> = serde_json::from_slice(&read(script)?)
        .map_err(|e| Failure::io(format!("{}: {e}", script.display())))?;
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let _ = writeln!(lock, "{}", json!({"initial": session.pareto_report().pareto}));
    for event in events {
        let sequence = event.sequence;
        match session.apply_event(event) {
            Ok(delta) => {
                let _ = writeln!(lock, "{}", serde_json::to_string(&delta).expect("serializable"));
            }
            Err(e) => {
                return Err(Failure::domain(format!("event {sequence} rejected: {e}")));
            }
        }
    }
    let history = session.pareto_history();
    let _ = writeln!(
        lock,
        "{}",
        json!({"final": session.pareto_report(), "chain": history.chain, "nesting_ok": history.nesting_ok})
    );
    drop(lock);
    if let Some(path) = out {
        session
            .save(path)
            .map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn serve(host: &str, port: u16, state_dir: PathBuf, cors_origin: Option<String>) -> Outcome {
    let (store, skipped) = Store::open(&state_dir).map_err(|e| Failure::io(format!("{}: {e}", state_dir.display())))?;
    for (path, e) in skipped {
        eprintln!("warning: skipped {}: {e}", path.display());
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| Failure::io(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind((host, port))
            .await
            .map_err(|e| Failure::io(format!("cannot bind {host}:{port}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| Failure::io(e.to_string()))?;
        println!("listening on http://{addr}");
        let _ = std::io::stdout().flush();
        dialogue_service::serve(listener, Arc::new(store), &Config { cors_origin })
            .await
            .map_err(|e| Failure::io(e.to_string()))
    })
}
