use clap::{Args, Parser, Subcommand};
use sawb_cli::config::RunConfig;
use sawb_cli::{exit_code, stages, EXIT_USAGE};
use sawb_core::neural::Target;
use sawb_core::spectral::DofMask;
use sawb_core::Result;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "sawb",
    version,
    about = "Sea state estimation workbench: simulate vessel responses, extract spectral \
             features, train wave-property estimators"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CampaignOpts {
    /// Plain-text key=value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Number of simulated scenarios.
    #[arg(long)]
    n: Option<usize>,
    /// Master seed for the whole run.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker count (default: SAWB_PARALLELISM or all cores).
    #[arg(long)]
    parallelism: Option<usize>,
}

impl CampaignOpts {
    fn resolve(&self) -> Result<RunConfig> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(n) = self.n {
            config.n = n;
        }
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(p) = self.parallelism {
            config.parallelism = p;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a campaign and write the dataset, manifest, and optional CSV.
    Generate {
        #[command(flatten)]
        campaign: CampaignOpts,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        /// Also write a human-readable CSV of the dataset.
        #[arg(long)]
        csv: bool,
        /// Disable sensor noise injection.
        #[arg(long)]
        no_noise: bool,
    },
    /// Train estimator cells with 5-fold cross-validation.
    Train {
        /// Dataset file written by `generate`.
        #[arg(long)]
        data: PathBuf,
        /// Output directory for models and metric tables.
        #[arg(long)]
        out: PathBuf,
        /// Single cell to train, e.g. `3dof:hs` or `heave+pitch:mu`
        /// (default: all 21 cells).
        #[arg(long)]
        cell: Option<String>,
        /// Master seed (default: the dataset manifest's).
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallelism: Option<usize>,
    },
    /// Score saved models on the held-out test split.
    Evaluate {
        #[arg(long)]
        data: PathBuf,
        /// Directory containing .sawb model files.
        #[arg(long)]
        models: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Emit residual and power-error tables plus SVG scatter plots.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        /// Residual table written by `evaluate`.
        #[arg(long)]
        residuals: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run every stage (generate, train, evaluate, analyze) in one directory.
    Reproduce {
        #[command(flatten)]
        campaign: CampaignOpts,
        #[arg(long)]
        out: PathBuf,
    },
}

fn parse_cell(s: &str) -> Result<(DofMask, Target)> {
    let (mask, target) = s.split_once(':').ok_or_else(|| {
        sawb_core::Error::Domain(format!("cell '{s}' must look like '<dofs>:<target>'"))
    })?;
    Ok((DofMask::parse(mask)?, Target::parse(target)?))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate {
            campaign,
            out,
            csv,
            no_noise,
        } => {
            let mut config = campaign.resolve()?;
            if csv {
                config.csv = true;
            }
            if no_noise {
                config.noise = false;
            }
            stages::generate(&config, &out)
        }
        Command::Train {
            data,
            out,
            cell,
            seed,
            parallelism,
        } => {
            let dataset = stages::load_dataset(&data)?;
            let seed = stages::resolve_seed(&dataset, seed)?;
            let cell = cell.as_deref().map(parse_cell).transpose()?;
            let parallelism = parallelism
                .unwrap_or_else(|| RunConfig::default().parallelism);
            stages::train(&dataset, &out, seed, parallelism, cell).map(|_| ())
        }
        Command::Evaluate {
            data,
            models,
            out,
            seed,
        } => {
            let dataset = stages::load_dataset(&data)?;
            let seed = stages::resolve_seed(&dataset, seed)?;
            stages::evaluate(&dataset, &models, &out, seed)
        }
        Command::Analyze {
            data,
            residuals,
            out,
        } => {
            let dataset = stages::load_dataset(&data)?;
            stages::analyze(&dataset, &residuals, &out)
        }
        Command::Reproduce { campaign, out } => {
            let config = campaign.resolve()?;
            stages::reproduce(&config, &out)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are not failures.
            if err.use_stderr() {
                eprint!("{err}");
                return ExitCode::from(EXIT_USAGE as u8);
            }
            print!("{err}");
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("sawb: {err}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
