//! Argument parsing and subcommand dispatch.
//!
//! JSON goes to stdout, diagnostics to stderr. Exit codes: 0 on success,
//! 1 when the model cannot be loaded or the engine rejects it, 2 when the
//! invocation itself is wrong.

use std::collections::BTreeMap;
use std::io::Write;
use std::net::{IpAddr, SocketAddr};

use clap::{Args, Parser, Subcommand, ValueEnum};
use pathrisk::uncertainty::RngSeed;
use pathrisk::Identifier;
use serde::Serialize;

use crate::api::{self, ApiError, ApiQuantifyRequest, ModelSource, Snapshot};
use crate::server;

pub const EXIT_OK: i32 = 0;
pub const EXIT_MODEL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "pathrisk", version, about = "Fault-tree and influence-diagram risk models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file, or the name of a bundled model.
    #[arg(env = "PATHRISK_MODEL")]
    model: String,
}

#[derive(Debug, Args, Default)]
struct ScenarioArgs {
    /// Decisions to take, comma separated.
    #[arg(long, value_delimiter = ',', value_parser = parse_id)]
    decisions: Vec<Identifier>,
    /// Override an event's base probability, `event=p`.
    #[arg(long = "set", value_parser = parse_pair)]
    set: Vec<(Identifier, f64)>,
    /// Weight for an ANDOR gate, `gate=w`.
    #[arg(long = "gate-weight", value_parser = parse_pair)]
    gate_weight: Vec<(Identifier, f64)>,
}

impl ScenarioArgs {
    fn request(&self) -> ApiQuantifyRequest {
        ApiQuantifyRequest {
            decisions: self.decisions.iter().map(|d| (d.clone(), true)).collect(),
            overrides: self.set.iter().cloned().collect(),
            gate_weights: self.gate_weight.iter().cloned().collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Dot,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a model and list its diagnostics.
    Validate(ModelArg),
    /// Print the expanded model.
    Expand {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Minimal cut sets.
    Cutsets {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        max_order: Option<usize>,
        /// Fix an ANDOR gate, `gate=1` for AND or `gate=0` for OR.
        #[arg(long = "gate-weight", value_parser = parse_pair)]
        gate_weight: Vec<(Identifier, f64)>,
    },
    /// Exact top-event probability.
    Quantify {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Monte Carlo over parameter distributions and ANDOR gates.
    Mc {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
    },
    /// Birnbaum, Fussell-Vesely and risk reduction worth per event.
    Importance {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Effect of each decision and ranking of every portfolio.
    Whatif {
        #[command(flatten)]
        model: ModelArg,
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
    /// Graphviz diagram of the expanded model.
    Render {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        bind: IpAddr,
    },
}

fn parse_id(s: &str) -> Result<Identifier, String> {
    Identifier::new(s.trim()).map_err(|e| e.to_string())
}

fn parse_pair(s: &str) -> Result<(Identifier, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected id=value, got {s:?}"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("{v:?} is not a number"))?;
    Ok((parse_id(k)?, v))
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Io<'_> {
    fn json<T: Serialize>(&mut self, v: &T) -> i32 {
        let text = serde_json::to_string_pretty(v).expect("serializable");
        let _ = writeln!(self.out, "{text}");
        EXIT_OK
    }

    fn fail(&mut self, e: &ApiError) -> i32 {
        match &e.id {
            Some(id) => {
                let _ = writeln!(self.err, "error[{}] {id}: {}", e.code, e.message);
            }
            None => {
                let _ = writeln!(self.err, "error[{}] {}", e.code, e.message);
            }
        }
        if e.is_usage() {
            EXIT_USAGE
        } else {
            EXIT_MODEL
        }
    }

    fn result<T: Serialize>(&mut self, r: Result<T, ApiError>) -> i32 {
        match r {
            Ok(v) => self.json(&v),
            Err(e) => self.fail(&e),
        }
    }
}

fn load(io: &mut Io, arg: &ModelArg) -> Option<Snapshot> {
    match Snapshot::load(ModelSource::locate(&arg.model)) {
        Ok(s) => {
            for w in s.report.warnings() {
                let _ = writeln!(io.err, "{w}");
            }
            Some(s)
        }
        Err(e) => {
            for l in e.lines() {
                let _ = writeln!(io.err, "{l}");
            }
            None
        }
    }
}

/// Run the tool on `args` (program name first) and return the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(out, "{text}");
                EXIT_OK
            };
        }
    };
    let mut io = Io { out, err };
    dispatch(&mut io, cli.command)
}

fn dispatch(io: &mut Io, command: Command) -> i32 {
    match command {
        Command::Validate(m) => {
            let source = ModelSource::locate(&m.model);
            match Snapshot::load(source.clone()) {
                Ok(s) => io.json(&s.report),
                Err(api::LoadError::Invalid(report)) => {
                    io.json(&report);
                    for d in report.errors() {
                        let _ = writeln!(io.err, "{}: {d}", source.display());
                    }
                    EXIT_MODEL
                }
                Err(e) => {
                    for l in e.lines() {
                        let _ = writeln!(io.err, "{l}");
                    }
                    EXIT_MODEL
                }
            }
        }
        Command::Expand { model, format } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            match format {
                Format::Json => io.json(&api::model_view(&s)),
                Format::Dot => {
                    let _ = write!(io.out, "{}", pathrisk::render_dot(&s.flat));
                    EXIT_OK
                }
            }
        }
        Command::Cutsets { model, max_order, gate_weight } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            let weights: BTreeMap<Identifier, f64> = gate_weight.into_iter().collect();
            io.result(api::cutsets(&s, max_order, &weights))
        }
        Command::Quantify { model, scenario } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            io.result(api::quantify(&s, &scenario.request()))
        }
        Command::Mc { model, scenario, samples, seed, stream } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            io.result(api::monte_carlo(&s, &scenario.request(), samples, RngSeed::new(seed, stream)))
        }
        Command::Importance { model, scenario } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            io.result(api::importance(&s, &scenario.request()))
        }
        Command::Whatif { model, scenario } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            io.result(api::whatif(&s, &scenario.request()))
        }
        Command::Render { model, format } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            let dot = pathrisk::render_dot(&s.flat);
            match format {
                Format::Dot => {
                    let _ = write!(io.out, "{dot}");
                    EXIT_OK
                }
                Format::Json => io.json(&serde_json::json!({ "dot": dot })),
            }
        }
        Command::Serve { model, port, bind } => {
            let Some(s) = load(io, &model) else { return EXIT_MODEL };
            let runtime = match tokio::runtime::Runtime::new() {
                Ok(r) => r,
                Err(e) => {
                    let _ = writeln!(io.err, "cannot start runtime: {e}");
                    return EXIT_MODEL;
                }
            };
            match runtime.block_on(server::serve(server::AppState::new(s), SocketAddr::new(bind, port))) {
                Ok(()) => EXIT_OK,
                Err(e) => {
                    let _ = writeln!(io.err, "server error: {e}");
                    EXIT_MODEL
                }
            }
        }
    }
}
