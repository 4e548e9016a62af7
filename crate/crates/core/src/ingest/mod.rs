//! Turning raw observations into LSA event streams and binned count series.
//!
//! Two sources are supported: classic pcap captures (decoded down to the
//! OSPF LS Update / LS Acknowledgment headers) and the JSON-lines LSA event
//! log that the simulator writes.

mod bin;
mod event;
mod log;
mod ospf;
mod pcap;

use thiserror::Error;

pub use bin::{bin_series, BinnedSeries, CountSeries, EventFilter};
pub use event::LsaEvent;
pub use log::{read_lsa_log, read_lsa_log_from, write_lsa_log, write_lsa_log_to};
pub use ospf::{parse_ospf_packet, LinkType, OSPF_PROTOCOL};
pub use pcap::{read_capture_events, CaptureEvents, PcapReader, PcapRecord, PcapWriter};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("unsupported capture format: {0}")]
    UnsupportedFormat(String),
    #[error("capture truncated at byte offset {offset}: {what}")]
    Truncated { offset: u64, what: &'static str },
    #[error("malformed OSPF packet at frame offset {offset}: {reason}")]
    MalformedPacket { offset: usize, reason: String },
    #[error("line {line}: {message}")]
    LogParse { line: usize, message: String },
    #[error("count series: {0}")]
    Series(String),
}
