//! `nonconical` command-line tool.

mod commands;
mod config;
mod render;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{ConfigError, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "nonconical", version, about = "Schottky limit sets: certified dimension bounds and ray diagnostics")]
struct Cli {
    /// Arithmetic backend: exact, hiprec or hiprec:<bits>.
    #[arg(long, global = true)]
    backend: Option<String>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for level sums and profiles.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// JSON file with default settings; flags take precedence.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Window {
    /// Use generators k+1 onward.
    #[arg(long)]
    k: Option<usize>,
    /// Number of generators in the window.
    #[arg(long)]
    m: Option<usize>,
    /// Deepest word length.
    #[arg(long = "n")]
    n: Option<usize>,
    /// Schedule JSON file; the standard schedule when omitted.
    #[arg(long)]
    schedule: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generator schedule as JSON.
    Schedule {
        /// Use the standard schedule (the default).
        #[arg(long = "paper")]
        standard: bool,
        /// Validate and re-emit this schedule file instead.
        #[arg(long, conflicts_with = "standard")]
        from: Option<String>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Certify an upper bound for the dimension of the limit set.
    Certify {
        #[command(flatten)]
        window: Window,
        /// Exponent as p/q.
        #[arg(long)]
        alpha: Option<String>,
    },
    /// Level-sum exponents and a box-counting slope, as CSV.
    Estimate {
        #[command(flatten)]
        window: Window,
        /// Depth of the limit-set sample used for box counting.
        #[arg(long)]
        box_depth: Option<usize>,
        /// Box sizes 2^-1 .. 2^-scales.
        #[arg(long)]
        scales: Option<u32>,
        /// Bisection tolerance on the exponent.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Draw the nested disks as SVG.
    Render {
        #[command(flatten)]
        window: Window,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long)]
        max_depth: Option<usize>,
    },
    /// Ray diagnostics toward the limit point of a word.
    Explore {
        /// Comma-separated letters, e.g. 1,2.
        #[arg(long)]
        word: Option<String>,
        /// Repeat the word forever.
        #[arg(long, conflicts_with = "escalate")]
        periodic: bool,
        /// Continue with last+1, last+2, ...
        #[arg(long)]
        escalate: bool,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        step: Option<f64>,
        /// Word radius of the orbit ball.
        #[arg(long)]
        ball: Option<usize>,
        /// Orbit-ball letters 1..=letters.
        #[arg(long)]
        letters: Option<usize>,
        /// Word length used for the limit point.
        #[arg(long)]
        depth: Option<usize>,
        /// Where to write the classification JSON; next to --out by default.
        #[arg(long)]
        summary: Option<PathBuf>,
        #[arg(long)]
        schedule: Option<String>,
    },
}

fn flags(cli: &Cli) -> RunConfig {
    let mut c = RunConfig { backend: cli.backend.clone(), out: cli.out.clone(), jobs: cli.jobs, ..Default::default() };
    let window = |c: &mut RunConfig, w: &Window| {
        c.k = w.k;
        c.m = w.m;
        c.n_max = w.n;
        c.schedule = w.schedule.clone();
    };
    match &cli.command {
        Command::Schedule { from, count, .. } => {
            c.schedule = from.clone();
            c.count = *count;
        }
        Command::Certify { window: w, alpha } => {
            window(&mut c, w);
            c.alpha = alpha.clone();
        }
        Command::Estimate { window: w, box_depth, scales, tol } => {
            window(&mut c, w);
            c.box_depth = *box_depth;
            c.scales = *scales;
            c.tol = *tol;
        }
        Command::Render { window: w, width, max_depth } => {
            window(&mut c, w);
            c.depth = w.n;
            c.width = *width;
            c.max_depth = *max_depth;
        }
        Command::Explore { word, horizon, step, ball, letters, depth, schedule, .. } => {
            c.word = word.clone();
            c.horizon = *horizon;
            c.step = *step;
            c.ball = *ball;
            c.letters = *letters;
            c.depth = *depth;
            c.schedule = schedule.clone();
        }
    }
    c
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    let file = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let cfg = file.overlay(&flags(cli));
    match &cli.command {
        Command::Schedule { .. } => commands::schedule(&cfg),
        Command::Certify { .. } => commands::certify(&cfg),
        Command::Estimate { .. } => commands::estimate(&cfg),
        Command::Render { .. } => commands::render(&cfg),
        Command::Explore { periodic, escalate, summary, .. } => commands::explore(&cfg, *periodic, *escalate, summary.as_deref()),
    }
}

/// Configuration errors exit with 2, everything else that fails with 3.
fn exit_code(result: &anyhow::Result<u8>) -> u8 {
    match result {
        Ok(code) => *code,
        Err(e) if e.downcast_ref::<ConfigError>().is_some() => 2,
        Err(_) => 3,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli);
    if let Err(e) = &result {
        eprintln!("error: {e:#}");
    }
    ExitCode::from(exit_code(&result))
}
