//! Command-line interface. Flags override values from `--config`.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use emowalk_core::tuning::FoldMode;

use crate::config::{RunConfig, TaskChoice};
use crate::error::{Error, ExitKind, Result};
use crate::pipeline::{self, Settings};

#[derive(Debug, Parser)]
#[command(
    name = "emowalk",
    version,
    about = "Personal emotion recognition from wearable gait data"
)]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads for evaluation (default: all cores).
    #[arg(long, short = 'j', global = true, value_name = "N")]
    pub jobs: Option<usize>,
    /// More log output on stderr; repeat for more.
    #[arg(long, short = 'v', global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Slice raw streams into labelled walking files.
    Walkgen {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory for walking files.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Window walking files and extract features.
    Featex {
        /// Directory of walking files.
        #[arg(long, value_name = "DIR")]
        walking: PathBuf,
        /// Output directory for feature files.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
    },
    /// Run the personal-model experiment and write a YAML results file.
    Evaluate {
        /// Directory of feature files.
        #[arg(long, value_name = "DIR")]
        features: PathBuf,
        /// Results file to write.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Random search audit on a single feature file.
    Tune {
        /// Feature file of one participant-condition.
        #[arg(long, value_name = "FILE")]
        features: PathBuf,
        /// YAML audit file to write.
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        /// Also save the forest refit with the best configuration.
        #[arg(long, value_name = "FILE")]
        model_out: Option<PathBuf>,
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
    /// Generate a synthetic cohort (encoding file and raw streams).
    Synth {
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[arg(long)]
        n_users: Option<usize>,
        /// Conditions to generate, e.g. `0,2`.
        #[arg(long, value_delimiter = ',')]
        conditions: Option<Vec<u8>>,
        /// Seconds per walk.
        #[arg(long)]
        walk_duration: Option<f64>,
        #[arg(long)]
        sample_rate: Option<f64>,
        /// 0 = emotions indistinguishable, 1 = strongly separated.
        #[arg(long)]
        separability: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Field separator of the written files.
        #[arg(long)]
        delimiter: Option<String>,
    },
    /// Summary and boxplot CSVs from a results file.
    Report {
        /// Results file written by `evaluate`.
        #[arg(long, value_name = "FILE")]
        results: PathBuf,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// walkgen, featex, evaluate and report in sequence.
    RunAll {
        #[command(flatten)]
        input: InputArgs,
        /// Output directory.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
        #[command(flatten)]
        window: WindowArgs,
        #[command(flatten)]
        protocol: ProtocolArgs,
    },
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Encoding file (one row per participant-condition).
    #[arg(long, value_name = "FILE")]
    pub encoding: Option<PathBuf>,
    /// Directory of per-participant raw files.
    #[arg(long, value_name = "DIR")]
    pub raw_dir: Option<PathBuf>,
    /// Field separator of the input files.
    #[arg(long)]
    pub delimiter: Option<String>,
    /// Skip malformed raw rows and missing raw files with a warning.
    #[arg(long)]
    pub lenient: bool,
}

#[derive(Debug, Args)]
pub struct WindowArgs {
    /// Samples per window.
    #[arg(long)]
    pub window_len: Option<usize>,
    /// Fraction of overlap between consecutive windows.
    #[arg(long)]
    pub overlap: Option<f64>,
    /// Sampling rate in Hz.
    #[arg(long)]
    pub frequency_rate: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ProtocolArgs {
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cross-validation folds.
    #[arg(long)]
    pub k: Option<usize>,
    /// Random search candidates.
    #[arg(long)]
    pub n_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub task: Option<TaskChoice>,
    #[arg(long, value_enum)]
    pub fold_mode: Option<FoldModeArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum FoldModeArg {
    Stratified,
    ContiguousBlocks,
}

impl From<FoldModeArg> for FoldMode {
    fn from(m: FoldModeArg) -> FoldMode {
        match m {
            FoldModeArg::Stratified => FoldMode::Stratified,
            FoldModeArg::ContiguousBlocks => FoldMode::ContiguousBlocks,
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl InputArgs {
    fn apply(self, c: &mut RunConfig) {
        c.paths.encoding = self.encoding.or(c.paths.encoding.take());
        c.paths.raw_dir = self.raw_dir.or(c.paths.raw_dir.take());
        set(&mut c.io.delimiter, self.delimiter);
        if self.lenient {
            c.io.strict = false;
        }
    }
}

impl WindowArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.windowing.window_len, self.window_len);
        set(&mut c.windowing.overlap, self.overlap);
        set(&mut c.windowing.frequency_rate, self.frequency_rate);
    }
}

impl ProtocolArgs {
    fn apply(self, c: &mut RunConfig) {
        set(&mut c.protocol.seed, self.seed);
        set(&mut c.protocol.k, self.k);
        set(&mut c.protocol.n_iter, self.n_iter);
        set(&mut c.protocol.task, self.task);
        set(&mut c.protocol.fold_mode, self.fold_mode.map(Into::into));
    }
}

fn need(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.ok_or_else(|| Error::usage(format!("missing {what}")))
}

fn out_dir(flag: Option<PathBuf>, c: &RunConfig) -> Result<PathBuf> {
    need(
        flag.or_else(|| c.paths.output_dir.clone()),
        "--out (or paths.output_dir)",
    )
}

pub fn execute(cli: Cli) -> Result<()> {
    let mut c = RunConfig::load_or_default(cli.config.as_deref())?;
    match cli.command {
        Command::Walkgen { input, out } => {
            input.apply(&mut c);
            let out = out_dir(out, &c)?;
            let encoding = need(c.paths.encoding.clone(), "--encoding (or paths.encoding)")?;
            let raw_dir = need(c.paths.raw_dir.clone(), "--raw-dir (or paths.raw_dir)")?;
            pipeline::walkgen(&Settings::new(c, cli.jobs)?, &encoding, &raw_dir, &out)
        }
        Command::Featex { walking, out, window } => {
            window.apply(&mut c);
            let out = out_dir(out, &c)?;
            pipeline::featex(&Settings::new(c, cli.jobs)?, &walking, &out)
        }
        Command::Evaluate {
            features,
            out,
            protocol,
        } => {
            protocol.apply(&mut c);
            let out = match out {
                Some(p) => p,
                None => out_dir(None, &c)?.join(pipeline::RESULTS_FILE),
            };
            pipeline::evaluate(&Settings::new(c, cli.jobs)?, &features, &out)
        }
        Command::Tune {
            features,
            out,
            model_out,
            protocol,
        } => {
            protocol.apply(&mut c);
            pipeline::tune(&Settings::new(c, cli.jobs)?, &features, &out, model_out.as_deref())
        }
        Command::Synth {
            out,
            n_users,
            conditions,
            walk_duration,
            sample_rate,
            separability,
            seed,
            delimiter,
        } => {
            let s = &mut c.synth;
            set(&mut s.n_users, n_users);
            set(&mut s.conditions, conditions);
            set(&mut s.walk_duration_s, walk_duration);
            set(&mut s.sample_rate_hz, sample_rate);
            set(&mut s.separability, separability);
            set(&mut s.seed, seed);
            set(&mut c.io.delimiter, delimiter);
            let out = out_dir(out, &c)?;
            pipeline::synth(&Settings::new(c, cli.jobs)?, &out)
        }
        Command::Report { results, out } => {
            let out = out_dir(out, &c)?;
            pipeline::report(&results, &out)
        }
        Command::RunAll {
            input,
            out,
            window,
            protocol,
        } => {
            input.apply(&mut c);
            window.apply(&mut c);
            protocol.apply(&mut c);
            let out = out_dir(out, &c)?;
            let encoding = need(c.paths.encoding.clone(), "--encoding (or paths.encoding)")?;
            let raw_dir = need(c.paths.raw_dir.clone(), "--raw-dir (or paths.raw_dir)")?;
            pipeline::run_all(&Settings::new(c, cli.jobs)?, &encoding, &raw_dir, &out)
        }
    }
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        2 => log::LevelFilter::Debug,
        _ => log::LevelFilter::Trace,
    };
    let _ = env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .parse_default_env()
        .try_init();
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitKind::Usage as i32 } else { 0 };
        }
    };
    init_logging(cli.verbose);
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("emowalk: {e}");
            e.exit_kind() as i32
        }
    }
}
