use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{IngestError, LsaEvent};

pub fn read_lsa_log(path: impl AsRef<Path>) -> Result<Vec<LsaEvent>, IngestError> {
    read_lsa_log_from(File::open(path)?)
}

/// Parse a JSON-lines event log. Blank lines are skipped; errors carry the
/// 1-based line number.
pub fn read_lsa_log_from(reader: impl Read) -> Result<Vec<LsaEvent>, IngestError> {
    let mut events = Vec::new();
    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event: LsaEvent = serde_json::from_str(&line).map_err(|e| IngestError::LogParse {
            line: idx + 1,
            message: e.to_string(),
        })?;
        event.validate().map_err(|message| IngestError::LogParse {
            line: idx + 1,
            message,
        })?;
        events.push(event);
    }
    Ok(events)
}

pub fn write_lsa_log(path: impl AsRef<Path>, events: &[LsaEvent]) -> Result<(), IngestError> {
    let mut out = BufWriter::new(File::create(path)?);
    write_lsa_log_to(&mut out, events)?;
    out.flush()?;
    Ok(())
}

pub fn write_lsa_log_to(mut out: impl Write, events: &[LsaEvent]) -> Result<(), IngestError> {
    for event in events {
        serde_json::to_writer(&mut out, event).map_err(std::io::Error::from)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}
