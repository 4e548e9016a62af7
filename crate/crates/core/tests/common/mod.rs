#![allow(dead_code)]

pub mod frames;
pub mod oracle;

use ospf_rqa::rqa::{analyze_window, rqa_measures, EmbedParams, RecurrenceMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `cases` random symmetric reflexive matrices (N <= 30) checked against
/// the oracle. Returns the number of cases checked.
pub fn check_random_matrices(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let n = rng.gen_range(2..=30);
        let density = rng.gen_range(0.05..0.95);
        let theiler = rng.gen_range(1..=3);
        let l_min = rng.gen_range(2..=3);
        let v_min = rng.gen_range(2..=3);
        let grid = oracle::random_grid(&mut rng, n, density);
        let rm = RecurrenceMatrix::from_fn(n, |i, j| grid.cells[i][j]);
        let got = rqa_measures(&rm, l_min, v_min, theiler).to_array();
        let want = oracle::measures(&grid, l_min, v_min, theiler).as_array();
        if let Some(msg) = oracle::mismatch(got, want) {
            return Err(format!("matrix case {case} (n={n}, theiler={theiler}): {msg}"));
        }
    }
    Ok(cases)
}

/// `cases` random series (N <= 50, tau 1..3, m 1..4, random epsilon) run
/// through the window pipeline and checked against the oracle.
pub fn check_random_series(seed: u64, cases: usize) -> Result<usize, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for case in 0..cases {
        let tau = rng.gen_range(1..=3);
        let m = rng.gen_range(1..=4);
        let n = rng.gen_range((m - 1) * tau + 2..=50);
        let eps = rng.gen_range(0.05..1.5);
        // a mix of continuous, small-integer and constant series
        let x: Vec<f64> = match case % 10 {
            0..=5 => (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect(),
            6..=8 => (0..n).map(|_| rng.gen_range(0..4) as f64).collect(),
            _ => vec![rng.gen_range(0..5) as f64; n],
        };
        let params = EmbedParams {
            tau,
            m,
            epsilon: eps,
            ..Default::default()
        };
        let (got, _) = analyze_window(&x, &params).map_err(|e| e.to_string())?;
        let want = oracle::series_measures(&x, tau, m, eps).as_array();
        if let Some(msg) = oracle::mismatch(got.to_array(), want) {
            return Err(format!("series case {case} (n={n}, tau={tau}, m={m}, eps={eps}): {msg}"));
        }
    }
    Ok(cases)
}

pub mod checks {
    use std::collections::BTreeSet;
    use std::io::Cursor;
    use std::net::Ipv4Addr;

    use ospf_rqa::detector::{detect, sliding_rqa, DetectorConfig};
    use ospf_rqa::ingest::{read_capture_events, read_lsa_log_from, write_lsa_log_to, CountSeries, EventFilter, LsaEvent};
    use ospf_rqa::rqa::{analyze_window, embed, recurrence_matrix, znormalize, EmbedParams, Norm, Series};
    use ospf_rqa::sim::{random_topology, run, total_event_counts, EventKind, ScenarioEvent, Topology};
    use proptest::prelude::*;
    use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::frames::{ethernet, ipv4, ls_ack, ls_update, pcap_file, Header};

    fn header(age: u16, ls_type: u8, id: [u8; 4], adv: [u8; 4], seq: u32) -> Header {
        Header {
            age,
            ls_type,
            ls_id: Ipv4Addr::from(id),
            adv: Ipv4Addr::from(adv),
            seq,
        }
    }

    fn expected(ts: i64, monitor: &str, h: &Header, is_ack: bool) -> LsaEvent {
        LsaEvent {
            timestamp_us: ts,
            monitor: monitor.to_string(),
            ls_type: h.ls_type,
            advertising_router: h.adv,
            link_state_id: h.ls_id,
            ls_age: h.age,
            ls_seq: h.seq as i32,
            is_ack,
        }
    }

    /// Hand-assembled captures in both link types and byte orders; every
    /// LSA header field must come back unchanged.
    pub fn pcap_fidelity() -> Result<String, String> {
        let upd1 = vec![
            header(4, 1, [10, 0, 0, 1], [10, 0, 0, 1], 0x8000_0003),
            header(1, 2, [10, 0, 12, 2], [10, 0, 0, 2], 0x8000_0010),
            header(3600, 5, [192, 168, 7, 0], [10, 0, 0, 254], 0x7fff_ffff),
        ];
        let ack = vec![
            header(5, 1, [10, 0, 0, 1], [10, 0, 0, 1], 0x8000_0003),
            header(2, 2, [10, 0, 12, 2], [10, 0, 0, 2], 0x8000_0010),
        ];
        let upd2 = vec![
            header(1799, 3, [172, 16, 0, 0], [10, 0, 0, 254], 0x8000_0001),
            header(0, 4, [10, 0, 0, 9], [10, 0, 0, 254], 0xffff_fffe),
        ];
        let frames = vec![
            (1_000_000_250_000, ethernet(&ipv4(&ls_update(&upd1, 16)))),
            (1_000_000_400_001, ethernet(&ipv4(&ls_ack(&ack)))),
            (1_000_003_000_000, ethernet(&ipv4(&ls_update(&upd2, 8)))),
        ];
        let mut want = Vec::new();
        want.extend(upd1.iter().map(|h| expected(frames[0].0, "rcs1", h, false)));
        want.extend(ack.iter().map(|h| expected(frames[1].0, "rcs1", h, true)));
        want.extend(upd2.iter().map(|h| expected(frames[2].0, "rcs1", h, false)));

        let mut checked = 0;
        for big_endian in [false, true] {
            let file = pcap_file(1, big_endian, &frames);
            let got = read_capture_events(Cursor::new(file), "rcs1").map_err(|e| e.to_string())?;
            if got.events != want {
                return Err(format!("ethernet capture (big endian {big_endian}): {:?}", got.events));
            }
            checked += got.events.len();
        }
        let raw_frames = vec![(42, ipv4(&ls_update(&upd1[..1], 16)))];
        let got = read_capture_events(Cursor::new(pcap_file(101, true, &raw_frames)), "r7").map_err(|e| e.to_string())?;
        let raw_want = vec![expected(42, "r7", &upd1[0], false)];
        if got.events != raw_want {
            return Err(format!("raw IPv4 capture: {:?}", got.events));
        }
        checked += 1;
        Ok(format!("{checked} LSA headers recovered"))
    }

    pub fn arb_event() -> impl Strategy<Value = LsaEvent> {
        (
            any::<i64>(),
            "[a-z][a-z0-9_-]{0,8}",
            1u8..=5,
            any::<u32>(),
            any::<u32>(),
            0u16..=3600,
            any::<i32>(),
            any::<bool>(),
        )
            .prop_map(|(ts, monitor, ls_type, adv, id, age, seq, ack)| LsaEvent {
                timestamp_us: ts,
                monitor,
                ls_type,
                advertising_router: Ipv4Addr::from(adv),
                link_state_id: Ipv4Addr::from(id),
                ls_age: age,
                ls_seq: seq,
                is_ack: ack,
            })
    }

    fn runner(cases: u32) -> TestRunner {
        let config = Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        };
        TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
    }

    /// Write and re-read logs of exactly 1000 random events.
    pub fn log_round_trip(cases: u32) -> Result<String, String> {
        runner(cases)
            .run(&proptest::collection::vec(arb_event(), 1000), |events| {
                let mut buf = Vec::new();
                write_lsa_log_to(&mut buf, &events).unwrap();
                let back = read_lsa_log_from(&buf[..]).unwrap();
                prop_assert_eq!(back, events);
                Ok(())
            })
            .map_err(|e| e.to_string())?;
        Ok(format!("{cases} logs of 1000 events"))
    }

    /// Quiet runs and runs with a non-isolating link failure on random
    /// topologies: every stub monitor must record the same total.
    pub fn conservation(runs: u64) -> Result<String, String> {
        let (mut checked, mut with_failure, mut events) = (0, 0, 0);
        for k in 0..runs {
            let routers = 6 + (k as usize * 3) % 15;
            let file = random_topology(routers, 4, 3 + (k as usize % 3), 1000 + k);
            let topo = Topology::from_file(&file).map_err(|e| e.to_string())?;
            let mut scenario = Vec::new();
            if k % 2 == 1 {
                // a router-router link whose loss keeps everything connected
                let routers_only = |l: usize| {
                    topo.links[l]
                        .ends
                        .iter()
                        .all(|e| matches!(topo.nodes[e.node].kind, ospf_rqa::sim::NodeKind::Router))
                };
                if let Some(l) = (0..topo.links.len())
                    .find(|&l| routers_only(l) && topo.is_connected_without(&BTreeSet::from([l])))
                {
                    let end = &topo.links[l].ends[0];
                    let subject = format!("{}.{}", topo.nodes[end.node].name, end.iface);
                    scenario.push(ScenarioEvent::new(900.0, EventKind::IfaceDown, &subject));
                    scenario.push(ScenarioEvent::new(2700.0, EventKind::IfaceUp, &subject));
                }
            }
            let out = run(&topo, &scenario, 5400.0, 50 + k).map_err(|e| e.to_string())?;
            let totals = total_event_counts(&out.logs);
            let first = *totals.values().next().ok_or("no monitors")?;
            if first == 0 || totals.values().any(|&t| t != first) {
                return Err(format!("run {k} ({routers} routers, {} events): {totals:?}", scenario.len()));
            }
            checked += 1;
            with_failure += usize::from(!scenario.is_empty());
            events += first;
        }
        Ok(format!(
            "{checked} random topologies ({with_failure} with a link failure), totals equal, {events} events per monitor in sum"
        ))
    }

    fn counts(c: Vec<u64>) -> CountSeries {
        CountSeries {
            start_us: 0,
            bin_size_s: 10,
            counts: c,
            filter: EventFilter::default(),
        }
    }

    /// rr monotone in epsilon, degenerate windows, detector causality and
    /// warm-up, all on random inputs.
    pub fn conventions(cases: u32) -> Result<String, String> {
        runner(cases)
            .run(
                &(
                    proptest::collection::vec(-5.0f64..5.0, 4..60),
                    1usize..=3,
                    1usize..=4,
                    0.01f64..2.0,
                    0.01f64..2.0,
                ),
                |(x, tau, m, e1, e2)| {
                    let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
                    prop_assume!(x.len() >= (m - 1) * tau + 2);
                    let (z, _) = znormalize(&Series::new(x).unwrap());
                    let traj = embed(&z, tau, m).unwrap();
                    for norm in [Norm::Euclidean, Norm::Maximum] {
                        let a = recurrence_matrix(&traj, lo, norm).recurrence_count();
                        let b = recurrence_matrix(&traj, hi, norm).recurrence_count();
                        prop_assert!(a <= b, "rr({lo}) = {a} > rr({hi}) = {b}");
                    }
                    Ok(())
                },
            )
            .map_err(|e| format!("rr monotonicity: {e}"))?;

        let mut rng = ChaCha8Rng::seed_from_u64(66);
        for _ in 0..cases {
            let n = rng.gen_range(2..200);
            let v = rng.gen_range(-1e6..1e6);
            let params = EmbedParams {
                tau: rng.gen_range(1..=3),
                m: rng.gen_range(1..=4),
                ..Default::default()
            };
            if n < params.min_series_len() {
                continue;
            }
            let (r, degenerate) = analyze_window(&vec![v; n], &params).map_err(|e| e.to_string())?;
            if !degenerate || r.rr != 1.0 || r.det != 1.0 {
                return Err(format!("constant window n={n}: rr={} det={}", r.rr, r.det));
            }
        }

        let cfg = DetectorConfig {
            window_bins: 30,
            baseline_bins: 10,
            ..Default::default()
        };
        runner(cases)
            .run(
                &(proptest::collection::vec(0u64..6, 30..140), 0.0f64..1.0),
                |(c, cut)| {
                    let full = detect(&sliding_rqa(&counts(c.clone()), &cfg).unwrap(), &cfg);
                    for a in &full {
                        prop_assert!(a.bin_index >= cfg.window_bins + cfg.baseline_bins - 1, "warm-up");
                        prop_assert!(a.triggered_measures.iter().all(|t| t.deviation_score >= cfg.k_mad));
                    }
                    let keep = cfg.window_bins + ((c.len() - cfg.window_bins) as f64 * cut) as usize;
                    let head = detect(&sliding_rqa(&counts(c[..keep].to_vec()), &cfg).unwrap(), &cfg);
                    let past: Vec<_> = full.into_iter().filter(|a| a.bin_index < keep).collect();
                    prop_assert_eq!(head, past, "causality");
                    Ok(())
                },
            )
            .map_err(|e| format!("detector: {e}"))?;
        Ok(format!("{cases} cases per property"))
    }
}
