//! Converts a reader export with raw 4096-count phases into a trace and
//! shows that exporting in degrees and re-importing is lossless.

use tagforce::harness::{export_reader_trace, import_reader_trace, PhaseUnits};
use tagforce::link::{default_channel_plan, write_trace, TraceFormat};

const EXPORT: &str = "timestamp,epc,channel_index,phase,rssi
0.031,E28011606000020400001F2A,12,1024,-54.5
0.012,E28011606000020400001F2A,12,1030,-54.0
0.244,E28011606000020400001F2A,40,2048,-56.0
0.229,E28011606000020400001F2A,40,0,-55.5
";

fn main() -> tagforce::Result<()> {
    let plan = default_channel_plan();
    let records = import_reader_trace(EXPORT.as_bytes(), PhaseUnits::Raw4096, &plan)?;
    write_trace(&records, TraceFormat::Jsonl, std::io::stdout())?;

    let mut buf = Vec::new();
    export_reader_trace(&records, &mut buf)?;
    let again = import_reader_trace(buf.as_slice(), PhaseUnits::Deg, &plan)?;
    println!("round trip lossless: {}", again == records);

    let bad = "timestamp,epc,channel_index,phase,rssi\n0.1,E2,3,oops,-50\n";
    if let Err(e) = import_reader_trace(bad.as_bytes(), PhaseUnits::Deg, &plan) {
        println!("{e}");
    }
    Ok(())
}
