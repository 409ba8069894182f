use std::fs;
use std::path::PathBuf;

use super::curriculum::StageRecord;
use super::set::AgentSet;
use crate::cli::checkpoint::{load_set, save_set, CheckpointMeta};
use crate::envs::GameConfig;
use crate::error::{Error, Result};
use crate::numerics::AdamConfig;

/// On-disk layout of a curriculum run:
/// `curriculum.json`, then per completed stage `stage_SS.json` and the
/// selected sets `stage_SS/<role>.<rank>.ckpt`, plus `metrics/`.
#[derive(Clone, Debug)]
pub struct StageStore {
    pub dir: PathBuf,
    /// Stop after persisting this stage, as if interrupted.
    pub stop_after: Option<usize>,
}

impl StageStore {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self {
            dir: dir.into(),
            stop_after: None,
        }
    }

    fn record_path(&self, stage: usize) -> PathBuf {
        self.dir.join(format!("stage_{stage:02}.json"))
    }

    fn set_path(&self, game: &GameConfig, stage: usize, role: usize, rank: usize) -> PathBuf {
        let role_name = game.kind.role_names()[role];
        self.dir.join(format!("stage_{stage:02}")).join(format!("{role_name}.{rank}.ckpt"))
    }

    pub fn metrics_path(&self, stage: usize, game_id: usize) -> PathBuf {
        self.dir.join("metrics").join(format!("stage_{stage:02}_game_{game_id:02}.jsonl"))
    }

    /// Writes the run fingerprint, or checks it against an existing one.
    pub(crate) fn open(&self, fingerprint: &serde_json::Value) -> Result<()> {
        fs::create_dir_all(self.dir.join("metrics"))?;
        let path = self.dir.join("curriculum.json");
        if path.exists() {
            let existing: serde_json::Value = serde_json::from_slice(&fs::read(&path)?)?;
            if &existing != fingerprint {
                return Err(Error::Config(format!(
                    "{} was written by a different configuration",
                    path.display()
                )));
            }
        } else {
            fs::write(&path, serde_json::to_vec_pretty(fingerprint)?)?;
        }
        Ok(())
    }

    pub(crate) fn save_stage(&self, game: &GameConfig, record: &StageRecord, selected: &[Vec<AgentSet>], seed: u64) -> Result<()> {
        fs::create_dir_all(self.dir.join(format!("stage_{:02}", record.stage)))?;
        for (role, sets) in selected.iter().enumerate() {
            for (rank, set) in sets.iter().enumerate() {
                let meta = CheckpointMeta {
                    game: game.kind.as_str().into(),
                    scale: game.scale.to_string(),
                    stage: record.stage as u32,
                    role: role as u32,
                    set_id: format!("stage{}-rank{rank}", record.stage),
                    seed,
                };
                save_set(&self.set_path(game, record.stage, role, rank), set, &meta)?;
            }
        }
        // the record goes last: its presence marks the stage as complete
        let tmp = self.record_path(record.stage).with_extension("json.tmp");
        fs::write(&tmp, serde_json::to_vec_pretty(record)?)?;
        fs::rename(&tmp, self.record_path(record.stage))?;
        Ok(())
    }

    /// Completed stage records, in order, up to the first gap.
    pub(crate) fn completed(&self) -> Result<Vec<StageRecord>> {
        let mut out = Vec::new();
        while let Ok(bytes) = fs::read(self.record_path(out.len())) {
            out.push(serde_json::from_slice(&bytes)?);
        }
        Ok(out)
    }

    pub(crate) fn load_selected(&self, game: &GameConfig, record: &StageRecord, adam: AdamConfig) -> Result<Vec<Vec<AgentSet>>> {
        (0..game.num_roles())
            .map(|role| {
                (0..record.selected[role].len())
                    .map(|rank| load_set(&self.set_path(game, record.stage, role, rank), game, role, adam))
                    .collect()
            })
            .collect()
    }
}
