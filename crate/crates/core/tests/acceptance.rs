//! One PASS/FAIL line per acceptance criterion. Exits non-zero when any
//! criterion fails.

mod common;

use std::time::Instant;

use ospf_rqa::detector::{analyze_run, DetectorConfig};
use ospf_rqa::ingest::{bin_series, EventFilter};
use ospf_rqa::params::{estimate_params, ParamSettings};
use ospf_rqa::rqa::Series;
use ospf_rqa::sim::{
    run, scenario_paper_attacks, scenario_paper_failure, Topology, PAPER_ATTACKS_DURATION_S, PAPER_FAILURE_DURATION_S,
};

use common::checks;

const BIN_S: u32 = 10;

fn criterion(n: u32, title: &str, budget_s: Option<f64>, f: impl FnOnce() -> Result<String, String>) -> bool {
    let start = Instant::now();
    let result = f();
    let secs = start.elapsed().as_secs_f64();
    let over = budget_s.filter(|&b| secs >= b);
    let (mut pass, detail) = match result {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let mut timing = format!("{secs:.2} s");
    if let Some(b) = over {
        pass = false;
        timing.push_str(&format!(", over the {b} s budget"));
    }
    println!(
        "{} criterion {n}: {title}: {detail} [{timing}]",
        if pass { "PASS" } else { "FAIL" }
    );
    pass
}

fn paper16() -> Topology {
    Topology::builtin("paper16").expect("paper16")
}

fn filter(topo: &Topology, monitor: &str, origin: &str) -> EventFilter {
    EventFilter {
        monitor: Some(monitor.into()),
        origin: Some(topo.router_id_of(origin).expect("router")),
        ..Default::default()
    }
}

fn us(s: f64) -> i64 {
    (s * 1e6) as i64
}

fn oracle_equivalence() -> Result<String, String> {
    let m = common::check_random_matrices(1, 200)?;
    let s = common::check_random_series(2, 200)?;
    Ok(format!("{m} matrices and {s} series match the brute-force oracle"))
}

/// Quiet paper16 for 6 h, rcs1 / abr1 in 10 s bins.
fn parameter_recovery() -> Result<String, String> {
    let topo = paper16();
    let duration = 21600.0;
    let out = run(&topo, &[], duration, 1).map_err(|e| e.to_string())?;
    let binned = bin_series(&out.logs["rcs1"], &filter(&topo, "rcs1", "abr1"), BIN_S, 0, us(duration))
        .map_err(|e| e.to_string())?;
    let series = Series::from_counts(&binned.series.counts).map_err(|e| e.to_string())?;
    let r = estimate_params(&series, &ParamSettings::default()).map_err(|e| e.to_string())?;
    let detail = format!(
        "tau={} m={} (want 1 and 2; fnn at m=1..3 = {:.4} {:.4} {:.4}; {} non-zero bins of {})",
        r.tau,
        r.m,
        r.fnn[0],
        r.fnn[1],
        r.fnn[2],
        binned.series.counts.iter().filter(|&&c| c > 0).count(),
        binned.series.len()
    );
    if r.tau == 1 && r.m == 2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Failure script, rcs1 / abr1, default detector. The four single
/// interface events on abr1.eth0 must each be followed by an alert within
/// 2 bins; the joint shutdown at 72000 s carries no requirement.
fn detection_latency() -> Result<String, String> {
    let topo = paper16();
    let seed = 7;
    let out = run(&topo, &scenario_failure_checked(), PAPER_FAILURE_DURATION_S, seed).map_err(|e| e.to_string())?;
    let analysis = analyze_run(
        &out.logs["rcs1"],
        &filter(&topo, "rcs1", "abr1"),
        BIN_S,
        0,
        us(PAPER_FAILURE_DURATION_S),
        &DetectorConfig::default(),
    )
    .map_err(|e| e.to_string())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for t in [14400.0, 28800.0, 43200.0, 57600.0] {
        let event_bin = (t / BIN_S as f64) as usize;
        let first = analysis.alerts.iter().find(|a| a.bin_index >= event_bin);
        match first {
            Some(a) if a.bin_index - event_bin <= 2 => parts.push(format!("{t}s: +{}", a.bin_index - event_bin)),
            Some(a) => {
                ok = false;
                parts.push(format!("{t}s: +{} bins", a.bin_index - event_bin));
            }
            None => {
                ok = false;
                parts.push(format!("{t}s: none"));
            }
        }
    }
    let detail = format!(
        "seed {seed}, latency in bins {}; {} alerts over the whole run",
        parts.join(", "),
        analysis.alerts.len()
    );
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn scenario_failure_checked() -> Vec<ospf_rqa::sim::ScenarioEvent> {
    let s = scenario_paper_failure();
    assert_eq!(s[0].time_s, 14400.0);
    s
}

/// Attack script against a matched quiet run, rcs1 / origin r9, seeds 1-3.
fn attack_detection() -> Result<String, String> {
    let topo = paper16();
    let attacks = scenario_paper_attacks();
    let cfg = DetectorConfig::default();
    let f = filter(&topo, "rcs1", "r9");
    let mut ok = true;
    let mut parts = Vec::new();
    for seed in 1..=3 {
        let attacked = run(&topo, &attacks, PAPER_ATTACKS_DURATION_S, seed).map_err(|e| e.to_string())?;
        let quiet = run(&topo, &[], PAPER_ATTACKS_DURATION_S, seed).map_err(|e| e.to_string())?;
        let end = us(PAPER_ATTACKS_DURATION_S);
        let a = analyze_run(&attacked.logs["rcs1"], &f, BIN_S, 0, end, &cfg).map_err(|e| e.to_string())?;
        let q = analyze_run(&quiet.logs["rcs1"], &f, BIN_S, 0, end, &cfg).map_err(|e| e.to_string())?;
        let mut hits = Vec::new();
        for ev in &attacks {
            let (start, stop) = ev.active_interval().ok_or("attack without interval")?;
            let hit = a
                .alerts
                .iter()
                .any(|al| (start..stop).contains(&((al.bin_index * BIN_S as usize) as f64)));
            ok &= hit;
            hits.push(if hit { "hit" } else { "miss" });
        }
        ok &= q.alerts.is_empty();
        parts.push(format!("seed {seed}: attacks {}, quiet alerts {}", hits.join("/"), q.alerts.len()));
    }
    let detail = parts.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn format_fidelity() -> Result<String, String> {
    let p = checks::pcap_fidelity()?;
    let l = checks::log_round_trip(32)?;
    Ok(format!("{p}; {l} round-trip losslessly"))
}

fn main() {
    let results = [
        criterion(1, "RQA oracle equivalence", Some(10.0), oracle_equivalence),
        criterion(2, "parameter recovery on quiet paper16", Some(30.0), parameter_recovery),
        criterion(3, "detection latency on the failure script", None, detection_latency),
        criterion(4, "attack detection with quiet control", None, attack_detection),
        criterion(5, "conservation across stub monitors", None, || checks::conservation(10)),
        criterion(6, "monotonicity and conventions", None, || checks::conventions(256)),
        criterion(7, "format fidelity", None, format_fidelity),
    ];
    let failed = results.iter().filter(|&&p| !p).count();
    println!("{} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
