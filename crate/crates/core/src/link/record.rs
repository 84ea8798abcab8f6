use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One reader observation of a tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "WireRecord", into = "WireRecord")]
pub struct TagReadRecord {
    /// Seconds since the start of the trace.
    pub timestamp: f64,
    pub epc: String,
    pub channel_index: usize,
    /// Carrier frequency, Hz.
    pub frequency: f64,
    /// Reported phase in `[0, 360)`.
    pub phase_deg: f64,
    pub rssi_dbm: f64,
}

/// On-disk layout shared by the JSON Lines and CSV trace formats.
#[derive(Serialize, Deserialize)]
struct WireRecord {
    t: f64,
    epc: String,
    ch: usize,
    f_mhz: f64,
    phase_deg: f64,
    rssi_dbm: f64,
}

impl From<WireRecord> for TagReadRecord {
    fn from(w: WireRecord) -> Self {
        Self {
            timestamp: w.t,
            epc: w.epc,
            channel_index: w.ch,
            frequency: w.f_mhz * 1e6,
            phase_deg: w.phase_deg,
            rssi_dbm: w.rssi_dbm,
        }
    }
}

impl From<TagReadRecord> for WireRecord {
    fn from(r: TagReadRecord) -> Self {
        Self {
            t: r.timestamp,
            epc: r.epc,
            ch: r.channel_index,
            f_mhz: r.frequency / 1e6,
            phase_deg: r.phase_deg,
            rssi_dbm: r.rssi_dbm,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraceFormat {
    #[default]
    Jsonl,
    Csv,
}

impl TraceFormat {
    /// `.csv` files are CSV, everything else JSON Lines.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("csv") => TraceFormat::Csv,
            _ => TraceFormat::Jsonl,
        }
    }
}

pub fn write_trace<W: Write>(records: &[TagReadRecord], format: TraceFormat, mut writer: W) -> Result<()> {
    match format {
        TraceFormat::Jsonl => {
            for r in records {
                serde_json::to_writer(&mut writer, r)?;
                writer.write_all(b"\n")?;
            }
            writer.flush()?;
        }
        TraceFormat::Csv => {
            let mut w = csv::Writer::from_writer(writer);
            if records.is_empty() {
                w.write_record(["t", "epc", "ch", "f_mhz", "phase_deg", "rssi_dbm"])?;
            }
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

pub fn read_trace_jsonl<R: Read>(reader: R) -> Result<Vec<TagReadRecord>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Import {
            line: i + 1,
            reason: e.to_string(),
        })?;
        out.push(rec);
    }
    Ok(out)
}

pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<TagReadRecord>> {
    let mut r = csv::Reader::from_reader(reader);
    r.deserialize().map(|rec| rec.map_err(Error::from)).collect()
}

pub fn read_trace<R: Read>(reader: R, format: TraceFormat) -> Result<Vec<TagReadRecord>> {
    match format {
        TraceFormat::Jsonl => read_trace_jsonl(reader),
        TraceFormat::Csv => read_trace_csv(reader),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Vec<TagReadRecord> {
        vec![
            TagReadRecord {
                timestamp: 0.0125,
                epc: "ABCD".into(),
                channel_index: 3,
                frequency: 903.75e6,
                phase_deg: 148.359375,
                rssi_dbm: -55.03,
            },
            TagReadRecord {
                timestamp: 0.5,
                epc: "ABCD".into(),
                channel_index: 49,
                frequency: 926.75e6,
                phase_deg: 0.0,
                rssi_dbm: -56.0,
            },
        ]
    }

    #[test]
    fn jsonl_keys() {
        let mut buf = Vec::new();
        write_trace(&sample()[..1], TraceFormat::Jsonl, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "{\"t\":0.0125,\"epc\":\"ABCD\",\"ch\":3,\"f_mhz\":903.75,\"phase_deg\":148.359375,\"rssi_dbm\":-55.03}\n"
        );
    }

    #[test]
    fn csv_columns_match_jsonl_order() {
        let mut buf = Vec::new();
        write_trace(&sample(), TraceFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,epc,ch,f_mhz,phase_deg,rssi_dbm\n0.0125,ABCD,3,903.75,"));
        assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), sample());
    }

    #[test]
    fn jsonl_round_trip_and_bad_line() {
        let mut buf = Vec::new();
        write_trace(&sample(), TraceFormat::Jsonl, &mut buf).unwrap();
        assert_eq!(read_trace_jsonl(buf.as_slice()).unwrap(), sample());
        let bad = b"{\"t\":1}\n";
        assert!(matches!(read_trace_jsonl(&bad[..]), Err(Error::Import { line: 1, .. })));
    }

    #[test]
    fn format_from_extension() {
        assert_eq!(TraceFormat::from_path(Path::new("a.CSV")), TraceFormat::Csv);
        assert_eq!(TraceFormat::from_path(Path::new("a.jsonl")), TraceFormat::Jsonl);
    }
}
