use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use hybeam_cli::commands::{cmd_list, cmd_plot, cmd_run, execution_from_env, RunArgs, THREADS_ENV};
use hybeam_cli::config::{parse_snr, Overrides};
use hybeam_cli::CliError;

/// Monte-Carlo simulator for hybrid analog-digital beamforming in
/// wideband massive MIMO uplinks.
#[derive(Parser, Debug)]
#[command(name = "hybeam", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the scenario presets.
    List,
    /// Run a preset or every scenario of a config file.
    Run {
        /// Preset name (fig2..fig8) or path to a scenario file.
        scenario: String,
        /// Number of base-station antennas.
        #[arg(long = "M")]
        antennas: Option<usize>,
        /// Number of users.
        #[arg(long = "U")]
        users: Option<usize>,
        /// Channel taps.
        #[arg(long = "L")]
        taps: Option<usize>,
        /// OFDM subcarriers.
        #[arg(long = "K")]
        subcarriers: Option<usize>,
        #[arg(long)]
        realizations: Option<usize>,
        /// SNR grid in dB: `start:stop:step`, a comma list or a single value.
        #[arg(long, allow_hyphen_values = true)]
        snr: Option<String>,
        /// Master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "results")]
        outdir: PathBuf,
        /// Write every channel realization as text.
        #[arg(long)]
        dump_channels: bool,
        /// Compare the Monte-Carlo results with the closed forms.
        #[arg(long)]
        validate: bool,
    },
    /// Render one metric of a result CSV as an SVG line chart.
    Plot {
        csv: PathBuf,
        /// Metric base name (`rate`, `capacity`, `rms_mean`, ...) or full name.
        #[arg(long)]
        metric: String,
        /// Comma-separated schemes; all when omitted.
        #[arg(long, value_delimiter = ',')]
        schemes: Vec<String>,
        /// Output path; defaults to `<csv stem>_<metric>.svg`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::List => {
            print!("{}", cmd_list());
            Ok(())
        }
        Command::Run {
            scenario,
            antennas,
            users,
            taps,
            subcarriers,
            realizations,
            snr,
            seed,
            outdir,
            dump_channels,
            validate,
        } => {
            let overrides = Overrides {
                antennas,
                users,
                taps,
                subcarriers,
                realizations,
                snr_db: snr.as_deref().map(parse_snr).transpose()?,
                seed,
            };
            let threads = std::env::var(THREADS_ENV).ok();
            let args = RunArgs {
                target: scenario,
                overrides,
                outdir,
                dump_channels,
                validate,
                exec: execution_from_env(threads.as_deref())?,
            };
            let mut log = std::io::stdout().lock();
            cmd_run(&args, &mut log)?;
            Ok(())
        }
        Command::Plot {
            csv,
            metric,
            schemes,
            out,
        } => {
            let schemes: Vec<String> = schemes.into_iter().filter(|s| !s.trim().is_empty()).collect();
            let path = cmd_plot(&csv, &metric, &schemes, out.as_deref())?;
            println!("wrote {}", path.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("hybeam: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
