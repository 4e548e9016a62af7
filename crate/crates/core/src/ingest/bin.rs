use std::collections::BTreeSet;
use std::fmt;
use std::io::{BufRead, BufReader, Read, Write};
use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

use super::{IngestError, LsaEvent};

/// Which events are counted. `None` fields match everything; an empty
/// `ls_types` set matches every type.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EventFilter {
    pub monitor: Option<String>,
    pub origin: Option<Ipv4Addr>,
    pub ls_types: BTreeSet<u8>,
    /// Count acknowledged headers too. Off by default: only LS Update
    /// content is counted.
    pub include_acks: bool,
}

impl EventFilter {
    pub fn matches(&self, e: &LsaEvent) -> bool {
        (self.include_acks || !e.is_ack)
            && self.monitor.as_deref().is_none_or(|m| m == e.monitor)
            && self.origin.is_none_or(|o| o == e.advertising_router)
            && (self.ls_types.is_empty() || self.ls_types.contains(&e.ls_type))
    }
}

impl fmt::Display for EventFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let monitor = self.monitor.as_deref().unwrap_or("*");
        let origin = self.origin.map_or_else(|| "*".to_string(), |o| o.to_string());
        let types = if self.ls_types.is_empty() {
            "*".to_string()
        } else {
            self.ls_types.iter().map(u8::to_string).collect::<Vec<_>>().join("+")
        };
        write!(f, "monitor={monitor} origin={origin} ls_type={types}")?;
        if self.include_acks {
            write!(f, " acks")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountSeries {
    pub start_us: i64,
    pub bin_size_s: u32,
    pub counts: Vec<u64>,
    pub filter: EventFilter,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BinnedSeries {
    pub series: CountSeries,
    /// Matching events that fell outside `[t0, t1)`.
    pub dropped: usize,
}

/// Count matching events into half-open bins `[t0 + k*bin, t0 + (k+1)*bin)`.
/// The last bin may extend past `t1`; the number of bins is
/// `ceil((t1 - t0) / bin)`.
pub fn bin_series(
    events: &[LsaEvent],
    filter: &EventFilter,
    bin_size_s: u32,
    t0_us: i64,
    t1_us: i64,
) -> Result<BinnedSeries, IngestError> {
    if bin_size_s == 0 {
        return Err(IngestError::Series("bin size must be at least 1 s".into()));
    }
    if t0_us >= t1_us {
        return Err(IngestError::Series(format!("empty time range [{t0_us}, {t1_us})")));
    }
    let bin_us = bin_size_s as i64 * 1_000_000;
    let n_bins = ((t1_us - t0_us) + bin_us - 1) / bin_us;
    let mut counts = vec![0u64; n_bins as usize];
    let mut dropped = 0;
    for e in events.iter().filter(|e| filter.matches(e)) {
        if e.timestamp_us < t0_us || e.timestamp_us >= t1_us {
            dropped += 1;
            continue;
        }
        counts[((e.timestamp_us - t0_us) / bin_us) as usize] += 1;
    }
    Ok(BinnedSeries {
        series: CountSeries {
            start_us: t0_us,
            bin_size_s,
            counts,
            filter: filter.clone(),
        },
        dropped,
    })
}

impl CountSeries {
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Start of bin `k` in seconds.
    pub fn bin_start_s(&self, k: usize) -> f64 {
        self.start_us as f64 / 1e6 + (k as u64 * self.bin_size_s as u64) as f64
    }

    pub fn as_f64(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64).collect()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "bin_index,t_start_s,count")?;
        for (k, c) in self.counts.iter().enumerate() {
            writeln!(out, "{k},{},{c}", self.bin_start_s(k))?;
        }
        Ok(())
    }

    /// Read back a series written by [`CountSeries::write_csv`]. The filter
    /// is not stored in the CSV and comes back empty; bin size is inferred
    /// from the first two rows (10 s for a single row).
    pub fn read_csv(input: impl Read) -> Result<Self, IngestError> {
        let mut rows = Vec::new();
        for (idx, line) in BufReader::new(input).lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if idx == 0 {
                if line != "bin_index,t_start_s,count" {
                    return Err(IngestError::LogParse {
                        line: 1,
                        message: format!("unexpected header {line:?}"),
                    });
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| IngestError::LogParse { line: idx + 1, message };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(bad(format!("expected 3 fields, got {}", fields.len())));
            }
            let t: f64 = fields[1].parse().map_err(|e| bad(format!("t_start_s: {e}")))?;
            let c: u64 = fields[2].parse().map_err(|e| bad(format!("count: {e}")))?;
            rows.push((t, c));
        }
        if rows.is_empty() {
            return Err(IngestError::Series("CSV holds no bins".into()));
        }
        let bin_size_s = if rows.len() > 1 {
            let step = (rows[1].0 - rows[0].0).round();
            if step < 1.0 {
                return Err(IngestError::Series(format!("non-increasing bin starts ({step})")));
            }
            step as u32
        } else {
            10
        };
        Ok(CountSeries {
            start_us: (rows[0].0 * 1e6).round() as i64,
            bin_size_s,
            counts: rows.into_iter().map(|(_, c)| c).collect(),
            filter: EventFilter::default(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ev(ts_us: i64, origin: u8, ack: bool) -> LsaEvent {
        LsaEvent {
            timestamp_us: ts_us,
            monitor: "rcs1".into(),
            ls_type: 1,
            advertising_router: Ipv4Addr::new(10, 0, 0, origin),
            link_state_id: Ipv4Addr::new(10, 0, 0, origin),
            ls_age: 1,
            ls_seq: 1,
            is_ack: ack,
        }
    }

    #[test]
    fn two_events_in_first_bin() {
        let events = [ev(500_000, 1, false), ev(9_900_000, 1, false)];
        let b = bin_series(&events, &EventFilter::default(), 10, 0, 30_000_000).unwrap();
        assert_eq!(b.series.counts, vec![2, 0, 0]);
    }

    #[test]
    fn boundary_goes_to_next_bin() {
        let b = bin_series(&[ev(10_000_000, 1, false)], &EventFilter::default(), 10, 0, 30_000_000).unwrap();
        assert_eq!(b.series.counts, vec![0, 1, 0]);
    }

    #[test]
    fn nothing_matches() {
        let filter = EventFilter {
            origin: Some(Ipv4Addr::new(10, 0, 0, 9)),
            ..Default::default()
        };
        let b = bin_series(&[ev(1, 1, false)], &filter, 10, 0, 25_000_000).unwrap();
        assert_eq!(b.series.counts, vec![0, 0, 0]);
        assert_eq!(b.dropped, 0);
    }

    #[test]
    fn acks_and_out_of_range() {
        let events = [ev(1, 1, true), ev(-5, 1, false), ev(20_000_000, 1, false)];
        let b = bin_series(&events, &EventFilter::default(), 10, 0, 20_000_000).unwrap();
        assert_eq!(b.series.total(), 0);
        assert_eq!(b.dropped, 2);
    }

    #[test]
    fn csv_round_trip() {
        let s = CountSeries {
            start_us: 0,
            bin_size_s: 10,
            counts: vec![3, 0, 7],
            filter: EventFilter::default(),
        };
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "bin_index,t_start_s,count\n0,0,3\n1,10,0\n2,20,7\n");
        assert_eq!(CountSeries::read_csv(&buf[..]).unwrap(), s);
    }

    #[test]
    fn bad_ranges() {
        assert!(bin_series(&[], &EventFilter::default(), 0, 0, 10).is_err());
        assert!(bin_series(&[], &EventFilter::default(), 10, 5, 5).is_err());
    }

    proptest! {
        #[test]
        fn counts_conserve_events(
            ts in proptest::collection::vec(-10_000_000i64..200_000_000, 0..200),
            bin in 1u32..30,
            span in 1i64..150_000_000,
        ) {
            let events: Vec<_> = ts.iter().map(|&t| ev(t, 1, false)).collect();
            let b = bin_series(&events, &EventFilter::default(), bin, 0, span).unwrap();
            let bin_us = bin as i64 * 1_000_000;
            prop_assert_eq!(b.series.len() as i64, (span + bin_us - 1) / bin_us);
            let inside = ts.iter().filter(|&&t| (0..span).contains(&t)).count();
            prop_assert_eq!(b.series.total() as usize, inside);
            prop_assert_eq!(b.dropped, ts.len() - inside);
        }
    }
}
