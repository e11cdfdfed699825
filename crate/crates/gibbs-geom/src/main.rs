use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gibbs_geom::dto::DiagramDto;
use gibbs_geom::experiment::{load, run, validate, RunError, RunOptions};
use gibbs_geom::io::write_atomic;
use gibbs_geom::svg::render_diagram;

#[derive(Parser)]
#[command(name = "gibbs-geom", version, about = "Gibbs facet processes and Laguerre tessellations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for parallel experiments.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, short, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        seed_override: Option<u64>,
    },
    /// Check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Render a diagram JSON file as SVG.
    Render {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Run { config, out_dir, seed_override } => load(&config).and_then(|(cfg, bytes)| {
            let opts = RunOptions { out_dir, seed_override, verbose: cli.verbose };
            let m = run(&cfg, &bytes, &opts)?;
            println!("{}", serde_json::to_string_pretty(&m).expect("serialisable"));
            Ok(())
        }),
        Command::Validate { config } => load(&config).and_then(|(cfg, _)| {
            validate(&cfg)?;
            println!("ok: {}", cfg.experiment.kind());
            Ok(())
        }),
        Command::Render { input, out } => render(&input, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn render(input: &Path, out: &Path) -> Result<(), RunError> {
    let bytes = std::fs::read(input).map_err(|e| RunError::Schema(e.into()))?;
    let d: DiagramDto = serde_json::from_slice(&bytes).map_err(|e| RunError::Schema(e.into()))?;
    write_atomic(out, render_diagram(&d, &[]).as_bytes()).map_err(RunError::Runtime)
}
