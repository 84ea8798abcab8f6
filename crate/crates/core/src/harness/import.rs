//! Reader export import.
//!
//! Reader exports are CSV with the header
//! `timestamp,epc,channel_index,phase,rssi`. Phase is either degrees or raw
//! reader units where a full turn is 4096 counts (`v → v·360/4096`); the
//! raw scale is an assumption about the reader, not something the file
//! states. Channel frequencies come from the supplied channel plan.

use std::io::{Read, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link::{ChannelPlan, TagReadRecord};

const HEADER: [&str; 5] = ["timestamp", "epc", "channel_index", "phase", "rssi"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PhaseUnits {
    #[default]
    Deg,
    Raw4096,
}

impl PhaseUnits {
    pub fn to_degrees(self, v: f64) -> f64 {
        match self {
            PhaseUnits::Deg => v,
            PhaseUnits::Raw4096 => v * 360.0 / 4096.0,
        }
    }
}

impl FromStr for PhaseUnits {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deg" => Ok(PhaseUnits::Deg),
            "raw4096" => Ok(PhaseUnits::Raw4096),
            other => Err(Error::Import {
                line: 0,
                reason: format!("unknown phase units {other:?} (expected deg or raw4096)"),
            }),
        }
    }
}

fn field<T: FromStr>(row: &csv::StringRecord, idx: usize, line: usize) -> Result<T> {
    let raw = row.get(idx).unwrap_or("").trim();
    raw.parse().map_err(|_| Error::Import {
        line,
        reason: format!("bad {} value {raw:?}", HEADER[idx]),
    })
}

/// Parses a reader export, returning records sorted by timestamp.
pub fn import_reader_trace<R: Read>(reader: R, units: PhaseUnits, plan: &ChannelPlan) -> Result<Vec<TagReadRecord>> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header = r.headers()?.clone();
    if header.iter().map(str::trim).ne(HEADER) {
        return Err(Error::Import {
            line: 1,
            reason: format!("expected header {}", HEADER.join(",")),
        });
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line() as usize);
        if row.len() != HEADER.len() {
            return Err(Error::Import {
                line,
                reason: format!("expected {} fields, found {}", HEADER.len(), row.len()),
            });
        }
        let timestamp: f64 = field(&row, 0, line)?;
        let channel_index: usize = field(&row, 2, line)?;
        let phase: f64 = field(&row, 3, line)?;
        let rssi_dbm: f64 = field(&row, 4, line)?;
        if !timestamp.is_finite() || !phase.is_finite() || !rssi_dbm.is_finite() {
            return Err(Error::Import {
                line,
                reason: "non-finite value".into(),
            });
        }
        let frequency = plan.frequency(channel_index).ok_or_else(|| Error::Import {
            line,
            reason: format!("channel {channel_index} not in the {}-channel plan", plan.channel_count()),
        })?;
        out.push(TagReadRecord {
            timestamp,
            epc: row[1].trim().to_string(),
            channel_index,
            frequency,
            phase_deg: units.to_degrees(phase),
            rssi_dbm,
        });
    }
    out.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    Ok(out)
}

/// Writes records in reader-export layout with phase in degrees.
pub fn export_reader_trace<W: Write>(records: &[TagReadRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(HEADER)?;
    for r in records {
        w.write_record([
            r.timestamp.to_string(),
            r.epc.clone(),
            r.channel_index.to_string(),
            r.phase_deg.to_string(),
            r.rssi_dbm.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::link::default_channel_plan;

    fn import(text: &str, units: PhaseUnits) -> Result<Vec<TagReadRecord>> {
        import_reader_trace(text.as_bytes(), units, &default_channel_plan())
    }

    #[test]
    fn raw_units() {
        let recs = import(
            "timestamp,epc,channel_index,phase,rssi\n0.5,A,3,2048,-50\n0.1,A,0,0,-51\n",
            PhaseUnits::Raw4096,
        )
        .unwrap();
        assert_eq!(recs[0].timestamp, 0.1);
        assert_eq!(recs[0].phase_deg, 0.0);
        assert_eq!(recs[1].phase_deg, 180.0);
        assert_eq!(recs[1].frequency, 903.75e6);
    }

    #[test]
    fn malformed_row_reports_line() {
        let e = import("timestamp,epc,channel_index,phase,rssi\n0,A,1,10,-50\n0.1,A,x,10,-50\n", PhaseUnits::Deg);
        assert!(matches!(e, Err(Error::Import { line: 3, .. })), "{e:?}");
        let e = import("timestamp,epc,channel_index,phase,rssi\n0,A,1,10\n", PhaseUnits::Deg);
        assert!(matches!(e, Err(Error::Import { line: 2, .. })), "{e:?}");
        let e = import("timestamp,epc,channel_index,phase,rssi\n0,A,77,10,-50\n", PhaseUnits::Deg);
        assert!(matches!(e, Err(Error::Import { line: 2, .. })), "{e:?}");
    }

    #[test]
    fn bad_header() {
        assert!(matches!(import("t,epc,ch\n", PhaseUnits::Deg), Err(Error::Import { line: 1, .. })));
    }

    #[test]
    fn unknown_units() {
        assert!(matches!("radians".parse::<PhaseUnits>(), Err(Error::Import { .. })));
        assert_eq!("raw4096".parse::<PhaseUnits>().unwrap(), PhaseUnits::Raw4096);
    }

    #[test]
    fn export_import_lossless() {
        let plan = default_channel_plan();
        let recs: Vec<TagReadRecord> = (0..20)
            .map(|i| TagReadRecord {
                timestamp: i as f64 * 0.0137,
                epc: "E2".into(),
                channel_index: i % 7,
                frequency: plan.frequency(i % 7).unwrap(),
                phase_deg: (i as f64 * 17.123456789) % 360.0,
                rssi_dbm: -55.0 - i as f64 * 0.01,
            })
            .collect();
        let mut buf = Vec::new();
        export_reader_trace(&recs, &mut buf).unwrap();
        assert_eq!(import_reader_trace(buf.as_slice(), PhaseUnits::Deg, &plan).unwrap(), recs);
    }
}
