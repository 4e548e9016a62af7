//! OSPFv2 LS Update / LS Acknowledgment header extraction (RFC 2328 A.3).

use std::net::Ipv4Addr;

use super::{IngestError, LsaEvent};

pub const OSPF_PROTOCOL: u8 = 89;

const ETHERTYPE_IPV4: u16 = 0x0800;
const ETHERTYPE_VLAN: u16 = 0x8100;
const OSPF_HEADER_LEN: usize = 24;
const LSA_HEADER_LEN: usize = 20;
const OSPF_LS_UPDATE: u8 = 4;
const OSPF_LS_ACK: u8 = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkType {
    Ethernet,
    RawIpv4,
}

impl LinkType {
    pub fn from_raw(raw: u32) -> Option<Self> {
        match raw {
            1 => Some(LinkType::Ethernet),
            101 => Some(LinkType::RawIpv4),
            _ => None,
        }
    }

    pub fn raw(self) -> u32 {
        match self {
            LinkType::Ethernet => 1,
            LinkType::RawIpv4 => 101,
        }
    }
}

fn be16(b: &[u8], at: usize) -> u16 {
    u16::from_be_bytes([b[at], b[at + 1]])
}

fn be32(b: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(b[at..at + 4].try_into().unwrap())
}

fn malformed(offset: usize, reason: impl Into<String>) -> IngestError {
    IngestError::MalformedPacket {
        offset,
        reason: reason.into(),
    }
}

/// Decode the LSA headers carried by one captured frame.
///
/// Frames that are not unfragmented IPv4/OSPFv2 LS Update or LS Ack packets
/// yield an empty list. Headers with LS types outside 1-5 are skipped; the
/// DoNotAge bit is stripped from the age. Offsets in errors are relative to
/// the start of the frame.
pub fn parse_ospf_packet(
    frame: &[u8],
    link_type: LinkType,
    timestamp_us: i64,
    monitor: &str,
) -> Result<Vec<LsaEvent>, IngestError> {
    let ip_start = match link_type {
        LinkType::RawIpv4 => 0,
        LinkType::Ethernet => {
            if frame.len() < 14 {
                return Ok(Vec::new());
            }
            let mut at = 12;
            let mut ethertype = be16(frame, at);
            if ethertype == ETHERTYPE_VLAN {
                if frame.len() < 18 {
                    return Ok(Vec::new());
                }
                at += 4;
                ethertype = be16(frame, at);
            }
            if ethertype != ETHERTYPE_IPV4 {
                return Ok(Vec::new());
            }
            at + 2
        }
    };

    let ip = &frame[ip_start.min(frame.len())..];
    if ip.len() < 20 || ip[0] >> 4 != 4 || ip[9] != OSPF_PROTOCOL {
        return Ok(Vec::new());
    }
    let ihl = (ip[0] & 0x0f) as usize * 4;
    let total_len = be16(ip, 2) as usize;
    let frag = be16(ip, 6);
    if frag & 0x3fff != 0 {
        // more-fragments set or non-zero offset
        return Ok(Vec::new());
    }
    if ihl < 20 || total_len < ihl {
        return Err(malformed(ip_start, format!("bad IPv4 lengths (ihl {ihl}, total {total_len})")));
    }
    if total_len > ip.len() {
        return Err(malformed(
            ip_start + 2,
            format!("IPv4 total length {total_len} exceeds the {} captured bytes", ip.len()),
        ));
    }

    let ospf_start = ip_start + ihl;
    let ospf = &frame[ospf_start..ip_start + total_len];
    if ospf.len() < OSPF_HEADER_LEN {
        return Err(malformed(ospf_start, "OSPF header shorter than 24 bytes"));
    }
    if ospf[0] != 2 {
        return Ok(Vec::new());
    }
    let kind = ospf[1];
    if kind != OSPF_LS_UPDATE && kind != OSPF_LS_ACK {
        return Ok(Vec::new());
    }
    let pkt_len = be16(ospf, 2) as usize;
    if pkt_len < OSPF_HEADER_LEN || pkt_len > ospf.len() {
        return Err(malformed(
            ospf_start + 2,
            format!("OSPF packet length {pkt_len} inconsistent with {} payload bytes", ospf.len()),
        ));
    }
    let body = &ospf[..pkt_len];

    let header_at = |at: usize, is_ack: bool| -> Option<LsaEvent> {
        let h = &body[at..at + LSA_HEADER_LEN];
        let ls_type = h[3];
        if !(1..=5).contains(&ls_type) {
            return None;
        }
        Some(LsaEvent {
            timestamp_us,
            monitor: monitor.to_string(),
            ls_type,
            advertising_router: Ipv4Addr::from(be32(h, 8)),
            link_state_id: Ipv4Addr::from(be32(h, 4)),
            ls_age: (be16(h, 0) & 0x7fff).min(super::event::MAX_AGE),
            ls_seq: be32(h, 12) as i32,
            is_ack,
        })
    };

    let mut events = Vec::new();
    if kind == OSPF_LS_UPDATE {
        if pkt_len < OSPF_HEADER_LEN + 4 {
            return Err(malformed(ospf_start + OSPF_HEADER_LEN, "LS Update without an LSA count"));
        }
        let declared = be32(body, OSPF_HEADER_LEN) as usize;
        let mut at = OSPF_HEADER_LEN + 4;
        for k in 0..declared {
            if at + LSA_HEADER_LEN > pkt_len {
                return Err(malformed(
                    ospf_start + at,
                    format!("LSA {} of {declared} declared runs past the packet end", k + 1),
                ));
            }
            let lsa_len = be16(body, at + 18) as usize;
            if lsa_len < LSA_HEADER_LEN || at + lsa_len > pkt_len {
                return Err(malformed(
                    ospf_start + at + 18,
                    format!("LSA {} of {declared} has length {lsa_len} outside the packet", k + 1),
                ));
            }
            events.extend(header_at(at, false));
            at += lsa_len;
        }
    } else {
        let payload = pkt_len - OSPF_HEADER_LEN;
        if !payload.is_multiple_of(LSA_HEADER_LEN) {
            return Err(malformed(
                ospf_start + 2,
                format!("LS Ack payload of {payload} bytes is not a whole number of headers"),
            ));
        }
        for at in (OSPF_HEADER_LEN..pkt_len).step_by(LSA_HEADER_LEN) {
            events.extend(header_at(at, true));
        }
    }
    Ok(events)
}
