use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::Ipv4Addr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use ospf_rqa::detector::{detect, sliding_rqa, write_alerts_jsonl, DetectorConfig, MeasureSeries};
use ospf_rqa::ingest::{
    bin_series, read_capture_events, read_lsa_log, write_lsa_log, CountSeries, EventFilter, LsaEvent,
};
use ospf_rqa::params::{estimate_params, ParamReport};
use ospf_rqa::rqa::{Measure, Norm, Series};
use ospf_rqa::sim::{
    self, canned_scenario, load_scenario, load_topology, Topology, BUILTIN_TOPOLOGIES, PAPER_ATTACKS_DURATION_S,
    PAPER_FAILURE_DURATION_S,
};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::{Cli, Command, DetectArgs, DetectorFlags, ExtractArgs, ParamsArgs, RqaArgs, SimulateArgs};

const QUIET_DURATION_S: f64 = 21600.0;
const MANIFEST: &str = "manifest.json";
const CONFIG_ECHO: &str = "config.toml";

pub fn dispatch(cli: Cli) -> Result<ExitCode> {
    let mut cfg = RunConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Simulate(a) => simulate(&mut cfg, a),
        Command::Extract(a) => extract(&mut cfg, a),
        Command::Params(a) => params(&mut cfg, a),
        Command::Rqa(a) => rqa(&mut cfg, a),
        Command::Detect(a) => detect_cmd(&mut cfg, a),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct MonitorSummary {
    log: String,
    updates: u64,
    acks: u64,
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    seed: u64,
    duration_s: f64,
    topology: String,
    scenario: String,
    monitors: BTreeMap<String, MonitorSummary>,
    originations: BTreeMap<String, u64>,
    router_ids: BTreeMap<String, Ipv4Addr>,
    warnings: Vec<String>,
    config: RunConfig,
}

fn resolve_topology(name: &str) -> Result<Topology> {
    if BUILTIN_TOPOLOGIES.contains(&name) {
        return Ok(Topology::builtin(name).expect("builtin topology"));
    }
    load_topology(name).with_context(|| format!("loading topology `{name}`"))
}

fn resolve_scenario(name: &str) -> Result<(Vec<sim::ScenarioEvent>, Option<f64>)> {
    if let Some(events) = canned_scenario(name) {
        let duration = match name {
            "paper-failure" => PAPER_FAILURE_DURATION_S,
            "paper-attacks" => PAPER_ATTACKS_DURATION_S,
            _ => QUIET_DURATION_S,
        };
        return Ok((events, Some(duration)));
    }
    let events = load_scenario(name).with_context(|| format!("loading scenario `{name}`"))?;
    Ok((events, None))
}

fn write_config_echo(cfg: &RunConfig, path: &Path) -> Result<()> {
    fs::write(path, cfg.to_toml()?).with_context(|| format!("writing {}", path.display()))
}

fn simulate(cfg: &mut RunConfig, a: SimulateArgs) -> Result<ExitCode> {
    if let Some(t) = a.topology {
        cfg.simulate.topology = t;
    }
    if let Some(s) = a.scenario {
        cfg.simulate.scenario = s;
    }
    if let Some(d) = a.duration {
        cfg.simulate.duration_s = Some(d);
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    let out = cfg.resolve_out_dir(a.out);
    let topo = resolve_topology(&cfg.simulate.topology)?;
    let (scenario, default_duration) = resolve_scenario(&cfg.simulate.scenario)?;
    let duration = cfg
        .simulate
        .duration_s
        .or(default_duration)
        .ok_or_else(|| anyhow!("--duration is required with a scenario file"))?;
    if !(duration > 0.0 && duration.is_finite()) {
        bail!("duration must be a positive number of seconds");
    }
    cfg.simulate.duration_s = Some(duration);

    let output = sim::run(&topo, &scenario, duration, cfg.seed)?;
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut monitors = BTreeMap::new();
    for (name, events) in &output.logs {
        let log = format!("{name}.jsonl");
        write_lsa_log(out.join(&log), events)?;
        let acks = events.iter().filter(|e| e.is_ack).count() as u64;
        monitors.insert(
            name.clone(),
            MonitorSummary {
                log,
                updates: events.len() as u64 - acks,
                acks,
            },
        );
    }
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    let manifest = Manifest {
        seed: cfg.seed,
        duration_s: duration,
        topology: cfg.simulate.topology.clone(),
        scenario: cfg.simulate.scenario.clone(),
        monitors,
        originations: output.originations.clone(),
        router_ids: topo.router_ids(),
        warnings: output.warnings.clone(),
        config: cfg.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(out.join(MANIFEST), text)?;
    write_config_echo(cfg, &out.join(CONFIG_ECHO))?;

    println!(
        "simulated {} s of {} / {} (seed {}) into {}",
        duration,
        cfg.simulate.topology,
        cfg.simulate.scenario,
        cfg.seed,
        out.display()
    );
    for (name, m) in &manifest.monitors {
        println!("  {name:<8} {:>8} updates {:>8} acks", m.updates, m.acks);
    }
    Ok(ExitCode::SUCCESS)
}

fn is_pcap(path: &Path) -> Result<bool> {
    let mut magic = [0u8; 4];
    let mut f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let n = f.read(&mut magic)?;
    Ok(n == 4 && matches!(u32::from_le_bytes(magic), 0xa1b2_c3d4 | 0xd4c3_b2a1))
}

/// Router ids and run length from a simulator manifest sitting next to a log.
fn sibling_manifest(input: &Path) -> Option<serde_json::Value> {
    let path = input.parent()?.join(MANIFEST);
    let text = fs::read_to_string(path).ok()?;
    serde_json::from_str(&text).ok()
}

fn resolve_origin(origin: &str, topology: Option<&str>, manifest: Option<&serde_json::Value>) -> Result<Ipv4Addr> {
    if let Ok(ip) = origin.parse::<Ipv4Addr>() {
        return Ok(ip);
    }
    if let Some(name) = topology {
        let topo = resolve_topology(name)?;
        return topo
            .router_id_of(origin)
            .ok_or_else(|| anyhow!("router `{origin}` not found in topology `{name}`"));
    }
    if let Some(id) = manifest.and_then(|m| m.get("router_ids")?.get(origin)?.as_str()) {
        return id.parse().map_err(|_| anyhow!("bad router id `{id}` in manifest"));
    }
    bail!("cannot resolve router name `{origin}`: give a dotted quad, --topology, or keep the log next to its manifest")
}

fn micros(s: f64) -> i64 {
    (s * 1e6).round() as i64
}

fn extract(cfg: &mut RunConfig, a: ExtractArgs) -> Result<ExitCode> {
    let f = &mut cfg.filter;
    if a.monitor.is_some() {
        f.monitor = a.monitor;
    }
    if a.origin.is_some() {
        f.origin = a.origin;
    }
    if !a.ls_types.is_empty() {
        f.ls_types = a.ls_types;
    }
    if a.include_acks {
        f.include_acks = true;
    }
    if let Some(b) = a.bin_s {
        f.bin_s = b;
    }
    if a.t0_s.is_some() {
        f.t0_s = a.t0_s;
    }
    if a.t1_s.is_some() {
        f.t1_s = a.t1_s;
    }
    if a.topology.is_some() {
        f.topology = a.topology;
    }
    if let Some(&bad) = f.ls_types.iter().find(|t| !(1..=5).contains(*t)) {
        bail!("--ls-type {bad} outside 1..=5");
    }

    let events: Vec<LsaEvent> = if is_pcap(&a.input)? {
        let label = f.monitor.clone().unwrap_or_else(|| {
            a.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
        });
        let file = File::open(&a.input)?;
        let capture = read_capture_events(BufReader::new(file), &label)
            .with_context(|| format!("reading capture {}", a.input.display()))?;
        if capture.truncated_frames > 0 {
            eprintln!("warning: {} frames cut by the snaplen were skipped", capture.truncated_frames);
        }
        capture.events
    } else {
        read_lsa_log(&a.input).with_context(|| format!("reading log {}", a.input.display()))?
    };

    let manifest = sibling_manifest(&a.input);
    let origin = match &f.origin {
        Some(o) => Some(resolve_origin(o, f.topology.as_deref(), manifest.as_ref())?),
        None => None,
    };
    let run_length = manifest.as_ref().and_then(|m| m.get("duration_s")?.as_f64());
    let t0 = match (f.t0_s, run_length) {
        (Some(t), _) => micros(t),
        (None, Some(_)) => 0,
        (None, None) => match events.iter().map(|e| e.timestamp_us).min() {
            Some(first) => first.div_euclid(1_000_000) * 1_000_000,
            None => bail!("input has no events; give --t0 and --t1"),
        },
    };
    let t1 = match (f.t1_s, run_length) {
        (Some(t), _) => micros(t),
        (None, Some(d)) => micros(d),
        (None, None) => match events.iter().map(|e| e.timestamp_us).max() {
            Some(last) => last + 1,
            None => bail!("input has no events; give --t1"),
        },
    };

    let filter = EventFilter {
        monitor: f.monitor.clone(),
        origin,
        ls_types: f.ls_types.iter().copied().collect::<BTreeSet<u8>>(),
        include_acks: f.include_acks,
    };
    let binned = bin_series(&events, &filter, f.bin_s, t0, t1)?;
    match &a.out {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            let mut w = BufWriter::new(file);
            binned.series.write_csv(&mut w)?;
            w.flush()?;
            let echo = path.with_extension("config.toml");
            write_config_echo(cfg, &echo)?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            binned.series.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    eprintln!(
        "filter {}: {} bins, {} events counted, {} dropped outside [t0, t1)",
        filter,
        binned.series.len(),
        binned.series.total(),
        binned.dropped
    );
    Ok(ExitCode::SUCCESS)
}

fn read_series(path: &Path) -> Result<CountSeries> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    CountSeries::read_csv(BufReader::new(file)).with_context(|| format!("reading series {}", path.display()))
}

fn print_report(r: &ParamReport) {
    println!("samples   {}", r.len);
    println!("mi        {}", join(&r.mi_curve));
    println!("tau       {}{}", r.tau, if r.tau_fallback { " (fallback)" } else { "" });
    println!("fnn       {}", join(&r.fnn));
    println!("m         {}{}", r.m, if r.m_saturated { " (saturated)" } else { "" });
    println!("diameter  {:.6}", r.diameter);
    println!(
        "epsilon   {} {} 10% of the diameter",
        r.epsilon,
        if r.epsilon_within_10pct { "within" } else { "exceeds" }
    );
    for w in &r.warnings {
        println!("warning: {w}");
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:.6}")).collect::<Vec<_>>().join(" ")
}

fn params(cfg: &mut RunConfig, a: ParamsArgs) -> Result<ExitCode> {
    if let Some(t) = a.tau_max {
        cfg.params.tau_max = t;
    }
    if let Some(e) = a.epsilon {
        cfg.params.epsilon = e;
    }
    let series = read_series(&a.series)?;
    let values = Series::from_counts(&series.counts)?;
    let report = estimate_params(&values, &cfg.params)?;
    if a.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        print_report(&report);
    }
    Ok(ExitCode::SUCCESS)
}

fn apply_detector_flags(d: &mut DetectorConfig, f: DetectorFlags) -> Result<()> {
    if let Some(v) = f.window_bins {
        d.window_bins = v;
    }
    if let Some(v) = f.step_bins {
        d.step_bins = v;
    }
    if let Some(v) = f.tau {
        d.embed.tau = v;
    }
    if let Some(v) = f.m {
        d.embed.m = v;
    }
    if let Some(v) = f.epsilon {
        d.embed.epsilon = v;
    }
    if let Some(v) = f.norm {
        d.embed.norm = match v.to_ascii_lowercase().as_str() {
            "euclidean" => Norm::Euclidean,
            "maximum" | "max" => Norm::Maximum,
            other => bail!("unknown norm `{other}` (euclidean or maximum)"),
        };
    }
    if let Some(v) = f.theiler {
        d.embed.theiler = v;
    }
    if let Some(v) = f.baseline_bins {
        d.baseline_bins = v;
    }
    if let Some(k) = f.k_mad {
        // the release level follows k_mad unless set separately
        if f.k_release.is_none() && (d.k_release == d.k_mad || d.k_release > k) {
            d.k_release = k;
        }
        d.k_mad = k;
    }
    if let Some(v) = f.k_release {
        d.k_release = v;
    }
    if let Some(v) = f.mad_floor {
        d.mad_floor = v;
    }
    if !f.measures.is_empty() {
        d.measures = f.measures.iter().map(|s| s.parse::<Measure>()).collect::<Result<_, _>>()?;
    }
    d.validate()?;
    Ok(())
}

fn measure_series(cfg: &mut RunConfig, path: &Path, flags: DetectorFlags) -> Result<MeasureSeries> {
    apply_detector_flags(&mut cfg.detector, flags)?;
    let series = read_series(path)?;
    Ok(sliding_rqa(&series, &cfg.detector)?)
}

fn rqa(cfg: &mut RunConfig, a: RqaArgs) -> Result<ExitCode> {
    let measures = measure_series(cfg, &a.series, a.detector)?;
    match &a.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
            measures.write_csv(&mut w)?;
            w.flush()?;
            write_config_echo(cfg, &path.with_extension("config.toml"))?;
        }
        None => {
            let stdout = io::stdout();
            let mut w = stdout.lock();
            measures.write_csv(&mut w)?;
            w.flush()?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn detect_cmd(cfg: &mut RunConfig, a: DetectArgs) -> Result<ExitCode> {
    let out: PathBuf = cfg.resolve_out_dir(a.out);
    let measures = measure_series(cfg, &a.series, a.detector)?;
    let alerts = detect(&measures, &cfg.detector);
    fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let mut w = BufWriter::new(File::create(out.join("measures.csv"))?);
    measures.write_csv(&mut w)?;
    w.flush()?;
    let mut w = BufWriter::new(File::create(out.join("alerts.jsonl"))?);
    write_alerts_jsonl(&alerts, &mut w)?;
    w.flush()?;
    write_config_echo(cfg, &out.join(CONFIG_ECHO))?;

    println!("{} windows, {} alerts, written to {}", measures.len(), alerts.len(), out.display());
    for alert in &alerts {
        let names: Vec<&str> = alert.triggered_measures.iter().map(|t| t.name.name()).collect();
        println!(
            "  bin {:>7}  t={:>10.0} s  severity {:>10.3e}  {}",
            alert.bin_index,
            alert.time_s,
            alert.severity,
            names.join(",")
        );
    }
    if a.fail_on_alert && !alerts.is_empty() {
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}
