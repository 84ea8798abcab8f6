//! Synthetic reader traces.
//!
//! [`simulate_trace`] turns a force timeline and the sensor/transduction
//! models into timestamped per-read records the way a hopping UHF reader
//! would report them: each channel carries its own unknown phase offset, the
//! reader occasionally latches a 180° reporting flip, and multipath and
//! receiver noise perturb every read.

mod plan;
mod reader;
mod record;
mod sim;
mod timeline;

pub use crate::angle::wrap360;
pub use plan::{default_channel_plan, ChannelPlan, HopOrder};
pub use reader::{MultipathModel, OffsetSpec, ReaderProfile, READER_PHASE_STEP_DEG};
pub use record::{read_trace, read_trace_csv, read_trace_jsonl, write_trace, TagReadRecord, TraceFormat};
pub use sim::{simulate_trace, LinkSimulator};
pub use timeline::ForceTimeline;
