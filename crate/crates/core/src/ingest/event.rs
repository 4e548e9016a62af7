use std::net::Ipv4Addr;

use serde::{Deserialize, Serialize};

/// One LSA header observed at a monitoring point.
///
/// `is_ack` marks headers carried in an LS Acknowledgment rather than an LS
/// Update.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LsaEvent {
    #[serde(rename = "ts_us")]
    pub timestamp_us: i64,
    pub monitor: String,
    pub ls_type: u8,
    #[serde(rename = "adv_router")]
    pub advertising_router: Ipv4Addr,
    #[serde(rename = "ls_id")]
    pub link_state_id: Ipv4Addr,
    pub ls_age: u16,
    pub ls_seq: i32,
    pub is_ack: bool,
}

pub const MAX_AGE: u16 = 3600;

impl LsaEvent {
    /// Checks the header ranges: LS type 1-5 and age at most MaxAge.
    pub fn validate(&self) -> Result<(), String> {
        if !(1..=5).contains(&self.ls_type) {
            return Err(format!("ls_type {} outside 1..=5", self.ls_type));
        }
        if self.ls_age > MAX_AGE {
            return Err(format!("ls_age {} exceeds {MAX_AGE}", self.ls_age));
        }
        Ok(())
    }
}
