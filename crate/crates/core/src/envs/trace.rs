use std::io::Write;

use serde::{Deserialize, Serialize};

use super::world::{Event, StepResult, WorldState};
use crate::error::Result;

/// One timestep of an episode, written as a JSON line.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub t: usize,
    pub positions: Vec<[f64; 2]>,
    pub velocities: Vec<[f64; 2]>,
    pub alive: Vec<bool>,
    pub actions: Vec<[f32; 2]>,
    pub raw_rewards: Vec<f64>,
    pub events: Vec<Event>,
}

impl TraceRecord {
    /// Snapshot taken after `step` produced `result` from `actions`.
    pub fn capture(state: &WorldState, actions: &[[f32; 2]], result: &StepResult) -> Self {
        Self {
            t: state.t,
            positions: state.agents.iter().map(|a| a.pos).collect(),
            velocities: state.agents.iter().map(|a| a.vel).collect(),
            alive: state.agents.iter().map(|a| a.alive).collect(),
            actions: actions.to_vec(),
            raw_rewards: result.raw.clone(),
            events: result.events.clone(),
        }
    }
}

pub struct TraceWriter<W: Write> {
    out: W,
}

impl<W: Write> TraceWriter<W> {
    pub fn new(out: W) -> Self {
        Self { out }
    }

    pub fn write(&mut self, record: &TraceRecord) -> Result<()> {
        serde_json::to_writer(&mut self.out, record)?;
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::envs::{reset, GameConfig};

    #[test]
    fn trace_lines_parse_back() {
        let cfg = GameConfig::food_collection(2).unwrap();
        let mut s = reset(&cfg, 2).unwrap();
        let mut w = TraceWriter::new(Vec::new());
        for _ in 0..3 {
            let actions = [[0.5, 0.5]; 2];
            let r = s.step(&cfg, &actions).unwrap();
            w.write(&TraceRecord::capture(&s, &actions, &r)).unwrap();
        }
        let text = String::from_utf8(w.into_inner()).unwrap();
        let recs: Vec<TraceRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
        assert_eq!(recs.len(), 3);
        assert_eq!(recs[2].t, 3);
        assert_eq!(recs[0].positions.len(), 2);
    }
}
