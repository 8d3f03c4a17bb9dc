use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tropdeg::io::report;

mod commands;
mod human;

/// Divisors, twists and gonality on graphs and metric graphs.
#[derive(Debug, Parser)]
#[command(name = "tropdeg", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Print aligned text instead of JSON.
    #[arg(long, global = true)]
    pub human: bool,
    /// Seed for randomized choices.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for parallel searches (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    /// Cap on enumeration nodes; exceeding it reports BudgetExceeded.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
}

/// Where inputs come from. Values starting with `@` are read from a file.
#[derive(Debug, Clone, Args)]
pub struct GraphArg {
    /// Graph JSON file, `-` for stdin.
    #[arg(long, default_value = "-")]
    pub graph: String,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reduce a divisor at a vertex.
    Reduce {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        divisor: String,
        #[arg(long)]
        at: String,
    },
    /// Rank of a divisor on a finite graph.
    Rank {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        divisor: String,
        /// Stop once the rank reaches this value.
        #[arg(long)]
        cap: Option<i64>,
    },
    /// The twist of a multidegree concentrated at a vertex.
    Concentrate {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        multidegree: String,
        #[arg(long)]
        at: String,
    },
    /// Twist a multidegree at a vertex.
    Twist {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        multidegree: String,
        #[arg(long)]
        at: String,
        #[arg(long, default_value_t = 1, allow_hyphen_values = true)]
        times: i64,
    },
    /// Enumerate the finite twist graph of a multidegree.
    Barg {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        multidegree: String,
        /// Print a DOT graph instead of the report.
        #[arg(long)]
        dot: bool,
    },
    /// The node divisor D_{w,v}.
    Dwv {
        #[command(flatten)]
        g: GraphArg,
        /// Base multidegree fixing the reference family.
        #[arg(long)]
        multidegree: String,
        /// Member of the class (defaults to the base).
        #[arg(long)]
        w: Option<String>,
        #[arg(long)]
        at: String,
    },
    /// A twist with few sections, built from the canonical multidegree.
    Riemann {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        multidegree: String,
        #[arg(long)]
        at: String,
    },
    /// Rank of a divisor on a metric graph.
    MgRank {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        divisor: String,
        #[arg(long)]
        cap: Option<i64>,
        /// Also compute on the doubled lattice and require agreement.
        #[arg(long)]
        check_refinement: bool,
    },
    /// Reduce a metric divisor at a point.
    MgReduce {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        divisor: String,
        /// A vertex or `edge:offset`.
        #[arg(long)]
        at: String,
    },
    /// Smallest-degree pencil on the 1/N lattice.
    Gonality {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long)]
        d_max: Option<i64>,
    },
    /// Lattice test of Brill–Noether rank.
    BnRank {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        r: i64,
        #[arg(long)]
        d: i64,
        #[arg(long, default_value_t = 0)]
        rho: i64,
        #[arg(long, default_value_t = 1)]
        n: i64,
    },
    /// Structural obstructions, and gonality witnesses for fixture specs.
    Verdict {
        #[arg(long, conflicts_with = "spec")]
        graph: Option<String>,
        /// Fixture spec JSON; also runs the wedge or join construction.
        #[arg(long)]
        spec: Option<String>,
        #[arg(long, default_value_t = 1)]
        n: i64,
    },
    /// Witness twist on a multitree from vanishing profiles.
    Pct {
        #[command(flatten)]
        g: GraphArg,
        #[arg(long)]
        multidegree: String,
        /// Map from vertex to r_v, e.g. `{"v1":1,"v2":0}`.
        #[arg(long)]
        r_v: String,
        /// Profiles keyed "(e,v)"; random valid ones from --seed if absent.
        #[arg(long)]
        profiles: Option<String>,
    },
    /// Emit a fixture graph.
    Fixture {
        /// flower, banana, chain-of-loops, wedge or join.
        kind: String,
        #[arg(long)]
        g: Option<usize>,
        /// Comma-separated edge lengths.
        #[arg(long)]
        lengths: Option<String>,
        /// JSON list of parts for wedge and join.
        #[arg(long)]
        parts: Option<String>,
        #[arg(long)]
        m: Option<usize>,
        /// Full fixture spec JSON, overriding the other flags.
        #[arg(long)]
        spec: Option<String>,
        /// Write graph.json and README.md here instead of printing.
        #[arg(long)]
        out: Option<std::path::PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Reduce { .. } => "reduce",
            Command::Rank { .. } => "rank",
            Command::Concentrate { .. } => "concentrate",
            Command::Twist { .. } => "twist",
            Command::Barg { .. } => "barg",
            Command::Dwv { .. } => "dwv",
            Command::Riemann { .. } => "riemann",
            Command::MgRank { .. } => "mg-rank",
            Command::MgReduce { .. } => "mg-reduce",
            Command::Gonality { .. } => "gonality",
            Command::BnRank { .. } => "bn-rank",
            Command::Verdict { .. } => "verdict",
            Command::Pct { .. } => "pct",
            Command::Fixture { .. } => "fixture",
        }
    }
}

/// What a command produced.
pub enum Output {
    Report(serde_json::Value),
    /// Printed verbatim, e.g. a graph file or DOT text.
    Raw(String),
}

/// Failures, split by exit code.
#[derive(Debug)]
pub enum Failure {
    Domain(tropdeg::Error),
    Input(String),
}

impl From<tropdeg::Error> for Failure {
    fn from(e: tropdeg::Error) -> Self {
        if e.is_parse() {
            Failure::Input(e.to_string())
        } else {
            Failure::Domain(e)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 3,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if cli.global.jobs > 0 {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build_global();
    }
    let name = cli.command.name();
    let result = commands::run(&cli.command, &cli.global);
    let mut stdout = std::io::stdout().lock();
    match result {
        Ok(Output::Raw(text)) => {
            let _ = write!(stdout, "{text}");
            ExitCode::SUCCESS
        }
        Ok(Output::Report(body)) => {
            let doc = report(name, body);
            let text = if cli.global.human {
                human::render(&doc)
            } else {
                serde_json::to_string_pretty(&doc).expect("json") + "\n"
            };
            let _ = write!(stdout, "{text}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            let (code, kind, message) = match &f {
                Failure::Domain(e) => (2, e.kind(), e.to_string()),
                Failure::Input(m) => (3, "Parse".to_string(), m.clone()),
            };
            let doc = report(name, json!({ "error": { "kind": kind, "message": message } }));
            let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("json"));
            eprintln!("tropdeg {name}: {message}");
            ExitCode::from(code)
        }
    }
}
