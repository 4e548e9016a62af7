//! Classic libpcap file format (microsecond timestamps, either byte order).

use std::io::{self, Read, Write};

use super::{parse_ospf_packet, IngestError, LinkType, LsaEvent};

const MAGIC: u32 = 0xa1b2_c3d4;
const MAGIC_SWAPPED: u32 = 0xd4c3_b2a1;
const FILE_HEADER_LEN: usize = 24;
const RECORD_HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PcapRecord {
    pub timestamp_us: i64,
    pub data: Vec<u8>,
    /// Length of the frame on the wire.
    pub orig_len: u32,
    /// The capture kept fewer bytes than the frame had (snaplen cut).
    pub truncated: bool,
}

/// Streaming reader over the records of a classic pcap file.
pub struct PcapReader<R> {
    inner: R,
    swapped: bool,
    link_type: u32,
    snaplen: u32,
    offset: u64,
    done: bool,
}

impl<R: Read> PcapReader<R> {
    pub fn new(mut inner: R) -> Result<Self, IngestError> {
        let mut header = [0u8; FILE_HEADER_LEN];
        let got = read_full(&mut inner, &mut header)?;
        if got < 4 {
            return Err(IngestError::UnsupportedFormat("file too short for a pcap magic".into()));
        }
        let magic = u32::from_le_bytes(header[0..4].try_into().unwrap());
        let swapped = match magic {
            // stored little-endian
            MAGIC => false,
            MAGIC_SWAPPED => true,
            other => {
                return Err(IngestError::UnsupportedFormat(format!(
                    "bad magic {other:#010x} (only classic pcap is supported)"
                )))
            }
        };
        if got < FILE_HEADER_LEN {
            return Err(IngestError::Truncated {
                offset: got as u64,
                what: "file header",
            });
        }
        let word = |b: &[u8]| {
            let raw: [u8; 4] = b.try_into().unwrap();
            if swapped {
                u32::from_be_bytes(raw)
            } else {
                u32::from_le_bytes(raw)
            }
        };
        let snaplen = word(&header[16..20]);
        let link_type = word(&header[20..24]);
        Ok(PcapReader {
            inner,
            swapped,
            link_type,
            snaplen,
            offset: FILE_HEADER_LEN as u64,
            done: false,
        })
    }

    pub fn raw_link_type(&self) -> u32 {
        self.link_type
    }

    pub fn link_type(&self) -> Option<LinkType> {
        LinkType::from_raw(self.link_type)
    }

    pub fn snaplen(&self) -> u32 {
        self.snaplen
    }

    fn word(&self, b: &[u8]) -> u32 {
        let raw: [u8; 4] = b.try_into().unwrap();
        if self.swapped {
            u32::from_be_bytes(raw)
        } else {
            u32::from_le_bytes(raw)
        }
    }

    fn next_record(&mut self) -> Result<Option<PcapRecord>, IngestError> {
        let mut header = [0u8; RECORD_HEADER_LEN];
        let got = read_full(&mut self.inner, &mut header)?;
        if got == 0 {
            return Ok(None);
        }
        if got < RECORD_HEADER_LEN {
            return Err(IngestError::Truncated {
                offset: self.offset,
                what: "record header",
            });
        }
        let ts_sec = self.word(&header[0..4]);
        let ts_usec = self.word(&header[4..8]);
        let incl_len = self.word(&header[8..12]);
        let orig_len = self.word(&header[12..16]);
        let mut data = vec![0u8; incl_len as usize];
        let got = read_full(&mut self.inner, &mut data)?;
        if got < data.len() {
            return Err(IngestError::Truncated {
                offset: self.offset + RECORD_HEADER_LEN as u64,
                what: "record data",
            });
        }
        self.offset += (RECORD_HEADER_LEN + data.len()) as u64;
        Ok(Some(PcapRecord {
            timestamp_us: ts_sec as i64 * 1_000_000 + ts_usec as i64,
            data,
            orig_len,
            truncated: incl_len < orig_len,
        }))
    }
}

impl<R: Read> Iterator for PcapReader<R> {
    type Item = Result<PcapRecord, IngestError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_record() {
            Ok(Some(rec)) => Some(Ok(rec)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// LSA headers decoded from a whole capture.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CaptureEvents {
    pub events: Vec<LsaEvent>,
    pub frames: usize,
    /// Frames cut short by the snaplen and therefore not decoded.
    pub truncated_frames: usize,
}

/// Decode every OSPF LS Update / LS Ack frame of a capture, labelling the
/// events with `monitor`.
pub fn read_capture_events(reader: impl Read, monitor: &str) -> Result<CaptureEvents, IngestError> {
    let pcap = PcapReader::new(reader)?;
    let link_type = pcap.link_type().ok_or_else(|| {
        IngestError::UnsupportedFormat(format!("link type {} (expected 1 or 101)", pcap.raw_link_type()))
    })?;
    let mut out = CaptureEvents::default();
    for (k, rec) in pcap.enumerate() {
        let rec = rec?;
        out.frames += 1;
        if rec.truncated {
            out.truncated_frames += 1;
            continue;
        }
        let events = parse_ospf_packet(&rec.data, link_type, rec.timestamp_us, monitor).map_err(|e| match e {
            IngestError::MalformedPacket { offset, reason } => IngestError::MalformedPacket {
                offset,
                reason: format!("record {k}: {reason}"),
            },
            other => other,
        })?;
        out.events.extend(events);
    }
    Ok(out)
}

fn read_full(r: &mut impl Read, buf: &mut [u8]) -> io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match r.read(&mut buf[filled..]) {
            Ok(0) => break,
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    Ok(filled)
}

/// Writes classic pcap files; used to export simulated traffic and to build
/// fixtures.
pub struct PcapWriter<W> {
    inner: W,
    big_endian: bool,
    snaplen: u32,
}

impl<W: Write> PcapWriter<W> {
    pub fn new(inner: W, link_type: LinkType, snaplen: u32) -> io::Result<Self> {
        Self::with_byte_order(inner, link_type, snaplen, false)
    }

    pub fn with_byte_order(mut inner: W, link_type: LinkType, snaplen: u32, big_endian: bool) -> io::Result<Self> {
        let enc = |v: u32| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        let enc16 = |v: u16| if big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        inner.write_all(&enc(MAGIC))?;
        inner.write_all(&enc16(2))?;
        inner.write_all(&enc16(4))?;
        inner.write_all(&enc(0))?; // thiszone
        inner.write_all(&enc(0))?; // sigfigs
        inner.write_all(&enc(snaplen))?;
        inner.write_all(&enc(link_type.raw()))?;
        Ok(PcapWriter {
            inner,
            big_endian,
            snaplen,
        })
    }

    pub fn write_frame(&mut self, timestamp_us: i64, frame: &[u8]) -> io::Result<()> {
        let enc = |v: u32| if self.big_endian { v.to_be_bytes() } else { v.to_le_bytes() };
        let kept = frame.len().min(self.snaplen as usize);
        let ts_sec = timestamp_us.div_euclid(1_000_000) as u32;
        let ts_usec = timestamp_us.rem_euclid(1_000_000) as u32;
        self.inner.write_all(&enc(ts_sec))?;
        self.inner.write_all(&enc(ts_usec))?;
        self.inner.write_all(&enc(kept as u32))?;
        self.inner.write_all(&enc(frame.len() as u32))?;
        self.inner.write_all(&frame[..kept])
    }

    pub fn into_inner(self) -> W {
        self.inner
    }
}
