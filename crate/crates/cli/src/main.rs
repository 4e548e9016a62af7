mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "ospf-rqa",
    version,
    about = "Simulate OSPF LSA flooding, bin LSA counts and detect anomalies with recurrence quantification analysis",
    after_help = "Exit status: 0 success, 1 alerts raised with --fail-on-alert, 2 usage or data error."
)]
struct Cli {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the flooding simulator and write one LSA log per monitor.
    Simulate(SimulateArgs),
    /// Bin LSA events from a simulator log or a pcap capture into a count series CSV.
    Extract(ExtractArgs),
    /// Estimate delay and embedding dimension for a count series.
    Params(ParamsArgs),
    /// Compute the sliding-window RQA measures of a count series.
    Rqa(RqaArgs),
    /// Compute sliding-window RQA measures and raise alerts.
    Detect(DetectArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Builtin topology (paper16, topo20, topo35) or a topology file.
    #[arg(long)]
    topology: Option<String>,
    /// Canned scenario (paper-failure, paper-attacks, quiet) or a JSON scenario file.
    #[arg(long)]
    scenario: Option<String>,
    /// Simulated seconds; canned scenarios have their own default.
    #[arg(long)]
    duration: Option<f64>,
    /// Simulator RNG seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory [default: $OSPF_RQA_OUT or ./ospf-rqa-out].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    /// Simulator JSON-lines log or classic pcap file.
    input: PathBuf,
    /// Keep only events seen by this monitor; also labels pcap events.
    #[arg(long)]
    monitor: Option<String>,
    /// Keep only LSAs advertised by this router (name or dotted quad).
    #[arg(long)]
    origin: Option<String>,
    /// Keep only these LS types (repeatable or comma separated).
    #[arg(long = "ls-type", value_delimiter = ',')]
    ls_types: Vec<u8>,
    /// Count LS Acknowledgment headers as well.
    #[arg(long)]
    include_acks: bool,
    /// Bin width in seconds.
    #[arg(long = "bin")]
    bin_s: Option<u32>,
    /// Start of the binned range in seconds.
    #[arg(long = "t0")]
    t0_s: Option<f64>,
    /// End of the binned range in seconds (exclusive).
    #[arg(long = "t1")]
    t1_s: Option<f64>,
    /// Topology used to resolve a router name given to --origin.
    #[arg(long)]
    topology: Option<String>,
    /// Output CSV [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ParamsArgs {
    /// Count series CSV.
    series: PathBuf,
    /// Print the report as JSON.
    #[arg(long)]
    json: bool,
    /// Largest delay for the mutual information curve.
    #[arg(long)]
    tau_max: Option<usize>,
    /// Recurrence threshold checked against the phase-space diameter.
    #[arg(long)]
    epsilon: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
struct DetectorFlags {
    /// Window length in bins.
    #[arg(long = "window")]
    window_bins: Option<usize>,
    /// Window step in bins.
    #[arg(long = "step")]
    step_bins: Option<usize>,
    /// Embedding delay.
    #[arg(long)]
    tau: Option<usize>,
    /// Embedding dimension.
    #[arg(long = "dim")]
    m: Option<usize>,
    /// Recurrence threshold in z-normalized units.
    #[arg(long)]
    epsilon: Option<f64>,
    /// euclidean or maximum.
    #[arg(long)]
    norm: Option<String>,
    /// Theiler window for diagonal lines.
    #[arg(long)]
    theiler: Option<usize>,
    /// Number of prior windows in the baseline.
    #[arg(long = "baseline")]
    baseline_bins: Option<usize>,
    /// Deviation score that opens an alert.
    #[arg(long)]
    k_mad: Option<f64>,
    /// Deviation score that keeps an alert run open [default: k_mad].
    #[arg(long)]
    k_release: Option<f64>,
    /// Smallest MAD used as the deviation scale.
    #[arg(long)]
    mad_floor: Option<f64>,
    /// Measures to monitor (comma separated, e.g. rr,det,w_entr).
    #[arg(long, value_delimiter = ',')]
    measures: Vec<String>,
}

#[derive(Debug, Args)]
struct RqaArgs {
    /// Count series CSV.
    series: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Output CSV [default: standard output].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DetectArgs {
    /// Count series CSV.
    series: PathBuf,
    #[command(flatten)]
    detector: DetectorFlags,
    /// Output directory [default: $OSPF_RQA_OUT or ./ospf-rqa-out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with status 1 when any alert is raised.
    #[arg(long)]
    fail_on_alert: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
