//! Anomaly detection for OSPF routing traffic.
//!
//! LSA updates observed at a monitoring point are binned into a count series;
//! recurrence quantification analysis (RQA) runs over a sliding window of
//! that series and a robust change detector flags windows whose measures
//! leave their rolling baseline. A deterministic LSA flooding simulator
//! produces labelled traffic for failures and LSA-falsification attacks.
//!
//! * [`rqa`] is the numerical engine.
//! * [`ingest`] reads pcap captures and LSA event logs and bins them.
//! * [`sim`] is the discrete-event flooding simulator.
//! * [`detector`] runs sliding-window RQA and raises alerts.
//! * [`params`] estimates embedding parameters for a count series.

pub mod detector;
pub mod ingest;
pub mod params;
pub mod rqa;
pub mod sim;
