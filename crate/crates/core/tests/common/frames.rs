//! OSPFv2 frames and pcap files assembled byte by byte from the RFC 2328 and
//! libpcap layouts, with no help from the crate's own writers.

use std::net::Ipv4Addr;

pub struct Header {
    pub age: u16,
    pub ls_type: u8,
    pub ls_id: Ipv4Addr,
    pub adv: Ipv4Addr,
    pub seq: u32,
}

fn lsa_header(h: &Header, length: u16) -> Vec<u8> {
    let mut b = Vec::with_capacity(20);
    b.extend_from_slice(&h.age.to_be_bytes());
    b.push(0x22); // options
    b.push(h.ls_type);
    b.extend_from_slice(&h.ls_id.octets());
    b.extend_from_slice(&h.adv.octets());
    b.extend_from_slice(&h.seq.to_be_bytes());
    b.extend_from_slice(&[0x5a, 0xa5]); // checksum
    b.extend_from_slice(&length.to_be_bytes());
    b
}

fn ospf(kind: u8, body: &[u8]) -> Vec<u8> {
    let mut p = vec![2, kind];
    p.extend_from_slice(&((24 + body.len()) as u16).to_be_bytes());
    p.extend_from_slice(&[10, 0, 0, 99]); // router id
    p.extend_from_slice(&[0, 0, 0, 0]); // area 0
    p.extend_from_slice(&[0x12, 0x34, 0, 0]); // checksum, autype
    p.extend_from_slice(&[0; 8]); // authentication
    p.extend_from_slice(body);
    p
}

/// LS Update carrying each header followed by `body_len` bytes of LSA body.
pub fn ls_update(headers: &[Header], body_len: usize) -> Vec<u8> {
    let mut body = (headers.len() as u32).to_be_bytes().to_vec();
    for h in headers {
        body.extend_from_slice(&lsa_header(h, (20 + body_len) as u16));
        body.extend(std::iter::repeat_n(0x77, body_len));
    }
    ospf(4, &body)
}

pub fn ls_ack(headers: &[Header]) -> Vec<u8> {
    let mut body = Vec::new();
    for h in headers {
        body.extend_from_slice(&lsa_header(h, 36));
    }
    ospf(5, &body)
}

pub fn ipv4(payload: &[u8]) -> Vec<u8> {
    let mut ip = vec![0x45, 0xc0];
    ip.extend_from_slice(&((20 + payload.len()) as u16).to_be_bytes());
    ip.extend_from_slice(&[0x00, 0x07, 0x00, 0x00, 0x01, 89, 0x00, 0x00]);
    ip.extend_from_slice(&[10, 0, 0, 99, 224, 0, 0, 5]);
    ip.extend_from_slice(payload);
    ip
}

pub fn ethernet(ip: &[u8]) -> Vec<u8> {
    let mut f = vec![0x01, 0x00, 0x5e, 0x00, 0x00, 0x05, 0x02, 0x00, 0x00, 0x00, 0x00, 0x63, 0x08, 0x00];
    f.extend_from_slice(ip);
    f
}

/// Classic pcap file with microsecond timestamps in the given byte order.
pub fn pcap_file(link_type: u32, big_endian: bool, frames: &[(i64, Vec<u8>)]) -> Vec<u8> {
    let w32 = |v: u32| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
    let w16 = |v: u16| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
    let mut b = Vec::new();
    b.extend_from_slice(&w32(0xa1b2_c3d4));
    b.extend_from_slice(&w16(2));
    b.extend_from_slice(&w16(4));
    b.extend_from_slice(&w32(0));
    b.extend_from_slice(&w32(0));
    b.extend_from_slice(&w32(65535));
    b.extend_from_slice(&w32(link_type));
    for (ts, frame) in frames {
        b.extend_from_slice(&w32((ts / 1_000_000) as u32));
        b.extend_from_slice(&w32((ts % 1_000_000) as u32));
        b.extend_from_slice(&w32(frame.len() as u32));
        b.extend_from_slice(&w32(frame.len() as u32));
        b.extend_from_slice(frame);
    }
    b
}
