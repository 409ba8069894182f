use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Where a training run sits in a larger experiment.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunLabel {
    pub stage: usize,
    pub set_id: String,
}

/// One JSON-lines metrics record per episode.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub stage: usize,
    pub scale: String,
    pub set_id: String,
    pub seed: u64,
    pub episode: usize,
    pub role_rewards: Vec<f64>,
    pub coverage: Option<f64>,
    pub critic_loss: Option<f64>,
    pub policy_objective: Option<f64>,
}

pub trait MetricsSink {
    fn record(&mut self, rec: &MetricsRecord) -> Result<()>;
    fn flush(&mut self) -> Result<()>;
}

/// Discards everything.
pub struct NullSink;

impl MetricsSink for NullSink {
    fn record(&mut self, _: &MetricsRecord) -> Result<()> {
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Writes records as JSON lines, flushing every `flush_every` records.
pub struct JsonlMetrics<W: Write> {
    out: W,
    pending: usize,
    flush_every: usize,
}

impl<W: Write> JsonlMetrics<W> {
    pub fn new(out: W) -> Self {
        Self {
            out,
            pending: 0,
            flush_every: 100,
        }
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> MetricsSink for JsonlMetrics<W> {
    fn record(&mut self, rec: &MetricsRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, rec)?;
        self.out.write_all(b"\n")?;
        self.pending += 1;
        if self.pending >= self.flush_every {
            self.flush()?;
        }
        Ok(())
    }

    fn flush(&mut self) -> Result<()> {
        self.pending = 0;
        self.out.flush()?;
        Ok(())
    }
}
