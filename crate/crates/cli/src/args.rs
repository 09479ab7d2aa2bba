use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "hybrid-miner", version, about = "Discover hybrid Petri nets from event logs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Directly-follows counts and log size figures.
    Stats {
        #[command(flatten)]
        log: LogArgs,
        #[arg(long, value_enum, default_value_t = StatsFormat::Json)]
        emit: StatsFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Causal graph with strong and weak relations.
    DiscoverGraph {
        #[command(flatten)]
        log: LogArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long, value_enum, default_value_t = GraphFormat::Json)]
        emit: GraphFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hybrid net; JSON goes to --out (or stdout), DOT next to it.
    DiscoverNet {
        #[command(flatten)]
        log: LogArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// DOT file; defaults to --out with a .dot extension.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long)]
        pnml: Option<PathBuf>,
        /// Every evaluated candidate with its scores.
        #[arg(long)]
        scores: Option<PathBuf>,
    },
    /// Scores one place such as "a,b->c" on the log.
    Score {
        #[command(flatten)]
        log: LogArgs,
        #[command(flatten)]
        params: ParamArgs,
        #[arg(long)]
        place: String,
    },
    /// Fitness and precision of a net, or a trend table over a parameter.
    Evaluate {
        #[command(flatten)]
        log: LogArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Net JSON; when absent the net is discovered from the log.
        #[arg(long, conflicts_with = "sweep")]
        net: Option<PathBuf>,
        /// `name=v1,v2,...` with name one of t-replay, t-rs, t-rw, t-freq, w, c, glob-floor.
        #[arg(long)]
        sweep: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Converts a net JSON file to DOT, PNML or normalised JSON.
    Export {
        #[arg(long)]
        net: PathBuf,
        #[arg(long, value_enum)]
        format: NetFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Writes a synthetic log.
    GenLog {
        #[arg(long, value_enum, default_value_t = Model::OrderHandling)]
        model: Model,
        #[arg(long, default_value_t = 12_666)]
        cases: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = LogFormat::Xes)]
        format: LogFormat,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the HTTP service.
    Serve {
        /// TOML or JSON service config.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        host: Option<String>,
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        upload_limit: Option<usize>,
    },
}

#[derive(Debug, Args)]
pub struct LogArgs {
    /// Event log path, or `-` for stdin.
    #[arg(long)]
    pub log: PathBuf,
    /// Taken from the extension or the content when omitted.
    #[arg(long, value_enum)]
    pub log_format: Option<LogFormat>,
    #[arg(long, default_value = "case")]
    pub case_column: String,
    #[arg(long, default_value = "activity")]
    pub activity_column: String,
    /// Empty to keep the file order.
    #[arg(long, default_value = "timestamp")]
    pub timestamp_column: String,
    /// Keep XES events of every lifecycle transition, not only `complete`.
    #[arg(long)]
    pub all_lifecycles: bool,
}

/// Discovery parameters; unset flags fall back to the config file, then to
/// the built-in defaults.
#[derive(Debug, Args, Default)]
pub struct ParamArgs {
    /// Service config whose `defaults` table supplies parameter values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub t_freq: Option<u64>,
    #[arg(long)]
    pub c: Option<f64>,
    #[arg(long)]
    pub w: Option<f64>,
    #[arg(long, value_enum)]
    pub rel1_numerator: Option<Numerator>,
    #[arg(long)]
    pub t_rs: Option<f64>,
    #[arg(long)]
    pub t_rw: Option<f64>,
    #[arg(long)]
    pub t_replay: Option<f64>,
    #[arg(long)]
    pub max_inputs: Option<usize>,
    #[arg(long)]
    pub max_outputs: Option<usize>,
    #[arg(long)]
    pub maximal_only: bool,
    #[arg(long)]
    pub glob_floor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LogFormat {
    Xes,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StatsFormat {
    Json,
    Tsv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum GraphFormat {
    Json,
    Dot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NetFormat {
    Json,
    Dot,
    Pnml,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Numerator {
    Literal,
    Symmetric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    OrderHandling,
}
