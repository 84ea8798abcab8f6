//! Simulates a reader trace for a 0 → 3 N step and prints what the reader
//! sees: channel coverage, read rate and the raw phase on one channel.
//!
//!     cargo run --example simulate_trace -- [seed] [out.jsonl|out.csv]

use std::collections::BTreeMap;
use std::fs::File;

use tagforce::harness::ScenarioConfig;
use tagforce::link::{write_trace, TraceFormat};

fn main() -> tagforce::Result<()> {
    let mut args = std::env::args().skip(1);
    let seed: u64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(1);
    let out = args.next();

    let scenario = ScenarioConfig::default().build()?;
    let trace = scenario.simulator.simulate(&scenario.timeline, scenario.duration, seed)?;

    let mut per_channel: BTreeMap<usize, usize> = BTreeMap::new();
    for r in &trace {
        *per_channel.entry(r.channel_index).or_default() += 1;
    }
    println!(
        "{} reads in {} s ({:.1}/s), {} channels",
        trace.len(),
        scenario.duration,
        trace.len() as f64 / scenario.duration,
        per_channel.len()
    );

    let ch = trace[0].channel_index;
    println!("channel {ch} ({} MHz), first and second visit:", trace[0].frequency / 1e6);
    for r in trace.iter().filter(|r| r.channel_index == ch).step_by(6) {
        println!("  t {:6.3} s  phase {:7.2} deg  rssi {:6.2} dBm", r.timestamp, r.phase_deg, r.rssi_dbm);
    }

    if let Some(path) = out {
        let format = TraceFormat::from_path(path.as_ref());
        write_trace(&trace, format, File::create(&path)?)?;
        println!("wrote {path}");
    }
    Ok(())
}
