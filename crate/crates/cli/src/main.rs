use std::path::PathBuf;

use clap::{Parser, Subcommand};
use sparse_harmonics::grid::Domain;
use sparse_harmonics::weights::{WeightSpec, constants_table, default_bank, write_constants_csv};
use sparse_harmonics_cli::{CliError, ExitCode, ExperimentConfig, fixtures, run_config, run_fixtures};

#[derive(Parser)]
#[command(name = "sparse-harmonics", version, about = "Weighted commutator experiments on dyadic grids")]
struct Cli {
    /// worker threads (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// fixture directory (configs/ and golden/)
    #[arg(long, global = true)]
    fixtures: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment configuration.
    Run {
        config: PathBuf,
        /// output directory, overriding the config's `output`
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the constants table of a weight bank as CSV (`default` for the shipped bank).
    Constants {
        bank: String,
        #[arg(long, default_value_t = 10)]
        l: u32,
        #[arg(long, value_delimiter = ',', default_value = "1,1.5,2,3")]
        ps: Vec<f64>,
    },
    /// List shipped fixtures and whether golden outputs exist.
    ListFixtures,
    /// Compare a directory of fixture runs against the golden outputs.
    DiffFixtures { dir: PathBuf },
    /// Run every fixture into `<out>/<name>`.
    RunFixtures { out: PathBuf },
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct BankFile {
    weights: Vec<WeightSpec>,
}

fn main() {
    let cli = Cli::parse();
    if let Some(j) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(j).build_global() {
            eprintln!("error: {e}");
            std::process::exit(ExitCode::Config as i32);
        }
    }
    let root = cli.fixtures.clone().unwrap_or_else(fixtures::default_root);
    let code = match dispatch(cli.command, &root) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code as i32);
}

fn dispatch(cmd: Command, root: &std::path::Path) -> Result<ExitCode, CliError> {
    match cmd {
        Command::Run { config, out } => {
            let out = match out {
                Some(o) => o,
                None => {
                    let cfg = ExperimentConfig::load(&config)?;
                    let base = config.parent().map(|p| p.to_path_buf()).unwrap_or_default();
                    match cfg.output {
                        Some(o) => base.join(o),
                        None => PathBuf::from("out").join(config.file_stem().unwrap_or_default()),
                    }
                }
            };
            let res = run_config(&config, &out)?;
            for r in &res.report.reports {
                println!("{} ratio={:e} verdict={:?}", r.id, r.ratio, r.verdict);
            }
            println!("wrote {}", out.display());
            Ok(res.exit_code())
        }
        Command::Constants { bank, l, ps } => {
            let specs = if bank == "default" {
                default_bank()
            } else {
                let text = std::fs::read_to_string(&bank).map_err(|e| CliError::Config(format!("{bank}: {e}")))?;
                toml::from_str::<BankFile>(&text).map_err(|e| CliError::Config(e.to_string()))?.weights
            };
            let d = Domain::new(0.0, 1.0, l).map_err(|e| CliError::Config(e.to_string()))?;
            let rows = constants_table(&specs, &ps, d).map_err(|e| CliError::Harness(e.into()))?;
            write_constants_csv(&rows, std::io::stdout()).map_err(|e| CliError::Io(e.into()))?;
            Ok(ExitCode::Ok)
        }
        Command::ListFixtures => {
            let mut code = ExitCode::Ok;
            for fx in fixtures::list(root)? {
                let files = fx.golden_files();
                if files.is_empty() {
                    code = ExitCode::Config;
                    println!("{}\tmissing", fx.name);
                } else {
                    println!("{}\t{}", fx.name, files.join(","));
                }
            }
            Ok(code)
        }
        Command::DiffFixtures { dir } => {
            let diffs = fixtures::diff_dir(root, &dir)?;
            for d in &diffs {
                println!("{d}");
            }
            println!("{} diffs", diffs.len());
            Ok(if diffs.is_empty() { ExitCode::Ok } else { ExitCode::Failure })
        }
        Command::RunFixtures { out } => run_fixtures(root, &out),
    }
}
