use std::fs::File;
use std::io::BufWriter;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::combos::{c_max, compose_games, select_top_k};
use super::fitness::{fitness, FitnessConfig};
use super::set::{mix_and_match, AgentSet, Provenance};
use super::store::StageStore;
use crate::envs::{GameConfig, Scale};
use crate::error::{contract, Error, Result};
use crate::maddpg::{train_logged, AgentLearner, JsonlMetrics, MetricsSink, NullSink, RunLabel, TrainerConfig};
use crate::seeds::{derive_seed, rng_from};

// stream tags for derive_seed
const INIT: u64 = 0;
const TRAIN: u64 = 1;
const COMPOSE: u64 = 2;
const EVAL: u64 = 3;
const OPPONENTS: u64 = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageConfig {
    /// Population of the first stage, per role.
    pub initial: Scale,
    /// Final population; must be `initial` doubled zero or more times.
    pub target: Scale,
    pub first_episodes: usize,
    pub stage_episodes: usize,
    /// Parallel sets kept per role.
    pub k: usize,
    /// Mutant games per stage; `None` means all `C_max` combinations.
    pub c: Option<usize>,
    pub eval_episodes: usize,
    /// Opponent draws per fitness evaluation; `None` means `min(C, 3)`.
    pub opponent_samples: Option<usize>,
    /// Plain clone-and-fine-tune curriculum: one set, one game per stage.
    pub vanilla: bool,
}

impl StageConfig {
    pub fn scales(&self) -> Result<Vec<Scale>> {
        let mut out = vec![self.initial.clone()];
        while out.last().unwrap().total() < self.target.total() {
            let next = out.last().unwrap().doubled();
            out.push(next);
        }
        if out.last() != Some(&self.target) {
            return Err(Error::Config(format!(
                "target scale {} is not {} doubled",
                self.target, self.initial
            )));
        }
        Ok(out)
    }

    pub fn effective_k(&self) -> usize {
        if self.vanilla {
            1
        } else {
            self.k
        }
    }

    pub fn effective_c(&self, roles: usize) -> usize {
        let max = c_max(self.effective_k(), roles);
        if self.vanilla {
            1
        } else {
            self.c.unwrap_or(max)
        }
    }

    pub fn validate(&self, roles: usize) -> Result<()> {
        self.scales()?;
        let (k, c) = (self.effective_k(), self.effective_c(roles));
        if k == 0 {
            return Err(Error::Config("k must be >= 1".into()));
        }
        if c < k || c > c_max(k, roles) {
            return Err(Error::Config(format!(
                "c = {c} must lie in {k}..={} for k = {k}",
                c_max(k, roles)
            )));
        }
        if self.eval_episodes == 0 {
            return Err(Error::Config("eval episodes must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurriculumConfig {
    /// Game family and physics; its scale is replaced per stage.
    pub game: GameConfig,
    pub stages: StageConfig,
    pub trainer: TrainerConfig,
    pub workers: usize,
    pub seed: u64,
}

/// One completed stage.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: usize,
    pub scale: Scale,
    /// Per game, per role: the parent pair of the set it started from.
    /// Stage 0 games start from scratch and list `(j, j)`.
    pub games: Vec<Vec<(usize, usize)>>,
    /// `fitness[role][mutant]`.
    pub fitness: Vec<Vec<f64>>,
    /// Per role, surviving mutant ids, best first.
    pub selected: Vec<Vec<usize>>,
}

#[derive(Clone, Debug)]
pub struct CurriculumOutcome {
    /// Highest-fitness set per role at the last completed stage.
    pub best: Vec<AgentSet>,
    /// All surviving sets per role at the last completed stage, best first.
    pub selected: Vec<Vec<AgentSet>>,
    pub records: Vec<StageRecord>,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))
}

fn split_roles(game: &GameConfig, mut learners: Vec<AgentLearner>, provenance: &Provenance) -> Vec<AgentSet> {
    let mut out = Vec::new();
    for role in (0..game.num_roles()).rev() {
        let at = game.role_range(role).start;
        let members = learners.split_off(at);
        out.push(AgentSet::new(role, members, provenance.clone()));
    }
    out.reverse();
    out
}

/// Fine-tunes every game independently on up to `workers` threads. Game `g`
/// trains with seed `seeds[g]` and returns its sets per role.
pub fn mutate(
    game: &GameConfig,
    games: Vec<Vec<AgentSet>>,
    trainer: &TrainerConfig,
    seeds: &[u64],
    workers: usize,
    stage: usize,
    store: Option<&StageStore>,
) -> Result<Vec<Vec<AgentSet>>> {
    if seeds.len() != games.len() {
        return contract("one seed per game");
    }
    let jobs: Vec<(usize, Vec<AgentSet>)> = games.into_iter().enumerate().collect();
    pool(workers)?.install(|| {
        jobs.into_par_iter()
            .map(|(g, sets)| {
                if sets.len() != game.num_roles() || sets.iter().enumerate().any(|(r, s)| s.role != r) {
                    return contract("each game needs one set per role, in role order");
                }
                let provenance = Provenance {
                    stage,
                    parents: None,
                    mutant: Some(g),
                };
                let mut learners: Vec<AgentLearner> = sets.into_iter().flat_map(|s| s.members).collect();
                let label = RunLabel {
                    stage,
                    set_id: format!("game{g}"),
                };
                let mut sink: Box<dyn MetricsSink> = match store {
                    Some(s) => Box::new(JsonlMetrics::new(BufWriter::new(File::create(s.metrics_path(stage, g))?))),
                    None => Box::new(NullSink),
                };
                train_logged(game, &mut learners, trainer, seeds[g], &label, sink.as_mut())?;
                Ok(split_roles(game, learners, &provenance))
            })
            .collect()
    })
}

/// Fitness of every mutant set of every role; `mutants[g][r]`.
fn score_all(
    game: &GameConfig,
    mutants: &[Vec<AgentSet>],
    fit: FitnessConfig,
    seed: u64,
    stage: usize,
    workers: usize,
) -> Result<Vec<Vec<f64>>> {
    let roles = game.num_roles();
    let by_role: Vec<Vec<&AgentSet>> = (0..roles).map(|r| mutants.iter().map(|g| &g[r]).collect()).collect();
    let eval_seed = derive_seed(seed, &[stage as u64, EVAL]);
    let tasks: Vec<(usize, usize)> = (0..roles).flat_map(|r| (0..mutants.len()).map(move |g| (r, g))).collect();
    let flat: Vec<f64> = pool(workers)?.install(|| {
        tasks
            .par_iter()
            .map(|&(r, g)| {
                let mut rng = rng_from(derive_seed(seed, &[stage as u64, OPPONENTS, r as u64, g as u64]));
                fitness(game, by_role[r][g], &by_role, fit, eval_seed, &mut rng)
            })
            .collect::<Result<_>>()
    })?;
    Ok(flat.chunks(mutants.len()).map(<[f64]>::to_vec).collect())
}

fn select(
    mutants: Vec<Vec<AgentSet>>,
    fitness: &[Vec<f64>],
    k: usize,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<AgentSet>>)> {
    let roles = fitness.len();
    let ids: Vec<Vec<usize>> = fitness.iter().map(|f| select_top_k(f, k)).collect::<Result<_>>()?;
    let mut slots: Vec<Vec<Option<AgentSet>>> = vec![Vec::new(); roles];
    for game in mutants {
        for (r, set) in game.into_iter().enumerate() {
            slots[r].push(Some(set));
        }
    }
    let sets = ids
        .iter()
        .zip(&mut slots)
        .map(|(ids, slot)| ids.iter().map(|&g| slot[g].take().expect("distinct ids")).collect())
        .collect();
    Ok((ids, sets))
}

fn fresh_game(cfg: &CurriculumConfig, game: &GameConfig, j: usize) -> Vec<AgentSet> {
    let mut rng = rng_from(derive_seed(cfg.seed, &[0, INIT, j as u64]));
    let layout = game.layout();
    let learners = (0..game.num_agents())
        .map(|i| {
            AgentLearner::new(&layout, game.num_roles(), game.role_of(i), cfg.trainer.dims, cfg.trainer.adam, &mut rng)
        })
        .collect();
    split_roles(game, learners, &Provenance::default())
}

/// Runs the staged curriculum. With a `store`, every completed stage is
/// persisted and a rerun resumes after the last completed stage.
pub fn run_curriculum(cfg: &CurriculumConfig, store: Option<&StageStore>) -> Result<CurriculumOutcome> {
    let roles = cfg.game.num_roles();
    cfg.stages.validate(roles)?;
    cfg.trainer.validate()?;
    let scales = cfg.stages.scales()?;
    let (k, c) = (cfg.stages.effective_k(), cfg.stages.effective_c(roles));
    let fit = FitnessConfig {
        eval_episodes: cfg.stages.eval_episodes,
        opponent_samples: cfg.stages.opponent_samples.unwrap_or(c.min(3)),
    };

    let mut records = Vec::new();
    let mut selected: Vec<Vec<AgentSet>> = Vec::new();
    if let Some(store) = store {
        store.open(&serde_json::to_value(cfg)?)?;
        records = store.completed()?;
        records.truncate(scales.len());
        if let Some(last) = records.last() {
            let game = cfg.game.with_scale(scales[last.stage].clone())?;
            selected = store.load_selected(&game, last, cfg.trainer.adam)?;
        }
    }

    for stage in records.len()..scales.len() {
        let game = cfg.game.with_scale(scales[stage].clone())?;
        let seeds: Vec<u64>;
        let (games, parents): (Vec<Vec<AgentSet>>, Vec<Vec<(usize, usize)>>) = if stage == 0 {
            seeds = (0..k).map(|j| derive_seed(cfg.seed, &[0, TRAIN, j as u64])).collect();
            let games = (0..k).map(|j| fresh_game(cfg, &game, j)).collect();
            (games, (0..k).map(|j| vec![(j, j); roles]).collect())
        } else {
            let scaled: Vec<Vec<AgentSet>> = selected.iter().map(|s| mix_and_match(s)).collect::<Result<_>>()?;
            let per_role: Vec<usize> = scaled.iter().map(Vec::len).collect();
            let mut rng = rng_from(derive_seed(cfg.seed, &[stage as u64, COMPOSE]));
            let combos = compose_games(&per_role, c, &mut rng)?;
            seeds = (0..combos.len()).map(|g| derive_seed(cfg.seed, &[stage as u64, TRAIN, g as u64])).collect();
            let parents = combos
                .iter()
                .map(|combo| combo.iter().enumerate().map(|(r, &i)| scaled[r][i].provenance.parents.unwrap()).collect())
                .collect();
            let games = combos
                .iter()
                .map(|combo| combo.iter().enumerate().map(|(r, &i)| scaled[r][i].clone()).collect())
                .collect();
            (games, parents)
        };
        let trainer = TrainerConfig {
            episodes: if stage == 0 { cfg.stages.first_episodes } else { cfg.stages.stage_episodes },
            ..cfg.trainer.clone()
        };
        let mutants = mutate(&game, games, &trainer, &seeds, cfg.workers, stage, store)?;
        let fitness = score_all(&game, &mutants, fit, cfg.seed, stage, cfg.workers)?;
        let (ids, sets) = select(mutants, &fitness, k)?;
        let record = StageRecord {
            stage,
            scale: game.scale.clone(),
            games: parents,
            fitness,
            selected: ids,
        };
        if let Some(store) = store {
            store.save_stage(&game, &record, &sets, cfg.seed)?;
        }
        records.push(record);
        selected = sets;
        if store.and_then(|s| s.stop_after) == Some(stage) {
            break;
        }
    }
    let best = selected.iter().map(|s| s[0].clone()).collect();
    Ok(CurriculumOutcome {
        best,
        selected,
        records,
    })
}
