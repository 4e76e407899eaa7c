//! `hubalign`: command-line front end for cross-lingual embedding alignment.

mod align;
mod lexicon_cmds;
mod settings;
mod stats;
mod table;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use settings::{config_err, CliResult, Settings};

#[derive(Debug, Parser)]
#[command(name = "hubalign", version, about = "Cross-lingual embedding alignment and lexicon induction")]
struct Cli {
    /// Flat `key = value` file with default settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads (defaults to one per core).
    #[arg(long, global = true, env = "HUBALIGN_THREADS")]
    threads: Option<usize>,
    /// Seed for every random choice; recorded with each output.
    #[arg(long, global = true)]
    random_seed: Option<u64>,
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Learn an orthogonal map from one language into another.
    Align(align::AlignArgs),
    /// Map several languages into a shared hub space.
    MultiAlign(align::MultiAlignArgs),
    /// Score translation retrieval against a gold dictionary.
    Evaluate(align::EvaluateArgs),
    /// Compose two dictionaries through a pivot language.
    Triangulate(lexicon_cmds::TriangulateArgs),
    /// Drop translations whose morphological features disagree.
    FilterMorph(lexicon_cmds::FilterMorphArgs),
    /// Extract a dictionary from a word-aligned parallel corpus.
    Extract(lexicon_cmds::ExtractArgs),
    /// Expected gain of each hub language over a P@1 table.
    Gain(stats::GainArgs),
    /// Gromov-Hausdorff estimate between two embedding spaces.
    Gh(stats::GhArgs),
    /// Pearson or Spearman correlation.
    Correlate(stats::CorrelateArgs),
    /// Paired bootstrap test between two systems' per-query hits.
    Bootstrap(stats::BootstrapArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    let mut s = Settings::load(cli.config.as_deref())?;
    let threads = s.optional(cli.threads, "threads")?;
    if let Some(n) = threads {
        if n == 0 {
            return Err(config_err("threads must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(config_err)?;
    }
    let random_seed = s.value(cli.random_seed, "random_seed", 0u64)?;
    match cli.command {
        Command::Align(a) => align::cmd_align(a, &mut s, random_seed),
        Command::MultiAlign(a) => align::cmd_multi_align(a, &mut s, random_seed),
        Command::Evaluate(a) => align::cmd_evaluate(a, &mut s, random_seed),
        Command::Triangulate(a) => lexicon_cmds::cmd_triangulate(a, &mut s, random_seed),
        Command::FilterMorph(a) => lexicon_cmds::cmd_filter_morph(a, &mut s, random_seed),
        Command::Extract(a) => lexicon_cmds::cmd_extract(a, &mut s, random_seed),
        Command::Gain(a) => stats::cmd_gain(a, &mut s, random_seed),
        Command::Gh(a) => stats::cmd_gh(a, &mut s, random_seed),
        Command::Correlate(a) => stats::cmd_correlate(a, &mut s, random_seed),
        Command::Bootstrap(a) => stats::cmd_bootstrap(a, &mut s, random_seed),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { settings::EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hubalign: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
