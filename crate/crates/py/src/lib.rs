use std::path::PathBuf;

use epc_core::cli::checkpoint::{load_set, save_set, CheckpointMeta};
use epc_core::cli::{evolve_command, role_path, ExperimentConfig};
use epc_core::envs::{self, GameKind, Observation, Scale};
use epc_core::epc::{self, AgentSet, Provenance};
use epc_core::eval::{self, RawScore};
use epc_core::maddpg::{self, AgentLearner, TrainerConfig};
use epc_core::nets::NetDims;
use epc_core::seeds::{derive_seed, rng_from};
use epc_core::Error;
use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use serde::Serialize;

fn to_py(err: Error) -> PyErr {
    match err {
        Error::Io(e) => PyIOError::new_err(e.to_string()),
        Error::NonFinite { .. } | Error::Json(_) => PyRuntimeError::new_err(err.to_string()),
        _ => PyValueError::new_err(err.to_string()),
    }
}

/// Converts any serializable value into plain Python objects.
fn json_value<'py>(py: Python<'py>, value: &impl Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// One game at one population scale.
#[pyclass(name = "GameConfig", module = "epc_py", skip_from_py_object)]
#[derive(Clone)]
struct PyGameConfig {
    inner: envs::GameConfig,
}

#[pymethods]
impl PyGameConfig {
    /// `kind` is "grassland", "adversarial-battle" or "food-collection";
    /// `scale` is "A-B" for two-role games or "N".
    #[new]
    #[pyo3(signature = (kind, scale, horizon=None))]
    fn new(kind: &str, scale: &str, horizon: Option<usize>) -> PyResult<Self> {
        let kind: GameKind = kind.parse().map_err(to_py)?;
        let scale: Scale = scale.parse().map_err(to_py)?;
        let mut inner = envs::GameConfig::new(kind, scale).map_err(to_py)?;
        if let Some(h) = horizon {
            inner.horizon = h;
            inner.validate().map_err(to_py)?;
        }
        Ok(Self { inner })
    }

    #[getter]
    fn kind(&self) -> &'static str {
        self.inner.kind.as_str()
    }

    #[getter]
    fn scale(&self) -> String {
        self.inner.scale.to_string()
    }

    #[getter]
    fn num_agents(&self) -> usize {
        self.inner.num_agents()
    }

    #[getter]
    fn num_roles(&self) -> usize {
        self.inner.num_roles()
    }

    #[getter]
    fn horizon(&self) -> usize {
        self.inner.horizon
    }

    fn role_of(&self, agent: usize) -> PyResult<usize> {
        if agent >= self.inner.num_agents() {
            return Err(PyValueError::new_err(format!("no agent {agent}")));
        }
        Ok(self.inner.role_of(agent))
    }

    fn reset(&self, seed: u64) -> PyResult<PyWorld> {
        Ok(PyWorld {
            game: self.inner.clone(),
            state: envs::reset(&self.inner, seed).map_err(to_py)?,
        })
    }

    fn __repr__(&self) -> String {
        format!("GameConfig('{}', '{}')", self.inner.kind.as_str(), self.inner.scale)
    }
}

fn observation<'py>(py: Python<'py>, obs: &Observation) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("self", obs.self_features.clone())?;
    let lists: Vec<Vec<Vec<f32>>> = obs
        .entities
        .iter()
        .map(|l| (0..l.len()).map(|i| l.get(i).to_vec()).collect())
        .collect();
    d.set_item("entities", lists)?;
    Ok(d)
}

/// A running particle world.
#[pyclass(name = "World", module = "epc_py")]
struct PyWorld {
    game: envs::GameConfig,
    state: envs::WorldState,
}

#[pymethods]
impl PyWorld {
    /// Advances one step; `actions` holds one `(ax, ay)` per agent. Returns
    /// a dict with `raw`, `shaped`, `events` and `done`.
    fn step<'py>(&mut self, py: Python<'py>, actions: Vec<(f32, f32)>) -> PyResult<Bound<'py, PyAny>> {
        let actions: Vec<[f32; 2]> = actions.into_iter().map(|(x, y)| [x, y]).collect();
        let result = self.state.step(&self.game, &actions).map_err(to_py)?;
        json_value(py, &result)
    }

    fn observe<'py>(&self, py: Python<'py>, agent: usize) -> PyResult<Bound<'py, PyDict>> {
        if agent >= self.game.num_agents() {
            return Err(PyValueError::new_err(format!("no agent {agent}")));
        }
        observation(py, &envs::observe(&self.game, &self.state, agent))
    }

    #[getter]
    fn t(&self) -> usize {
        self.state.t
    }

    #[getter]
    fn positions(&self) -> Vec<(f64, f64)> {
        self.state.agents.iter().map(|a| (a.pos[0], a.pos[1])).collect()
    }

    #[getter]
    fn alive(&self) -> Vec<bool> {
        self.state.agents.iter().map(|a| a.alive).collect()
    }

    #[getter]
    fn landmarks(&self) -> Vec<(f64, f64, bool)> {
        self.state.landmarks.iter().map(|l| (l.pos[0], l.pos[1], l.active)).collect()
    }
}

/// One agent set per role, trained together on one game.
#[pyclass(name = "Team", module = "epc_py", from_py_object)]
#[derive(Clone)]
struct PyTeam {
    game: envs::GameConfig,
    sets: Vec<AgentSet>,
}

impl PyTeam {
    fn refs(&self) -> Vec<&AgentSet> {
        self.sets.iter().collect()
    }
}

fn split_roles(game: &envs::GameConfig, mut learners: Vec<AgentLearner>) -> Vec<AgentSet> {
    let mut sets = Vec::new();
    for role in (0..game.num_roles()).rev() {
        let members = learners.split_off(game.role_range(role).start);
        sets.push(AgentSet::new(role, members, Provenance::default()));
    }
    sets.reverse();
    sets
}

#[pymethods]
impl PyTeam {
    /// Untrained team with randomly initialized networks.
    #[staticmethod]
    #[pyo3(signature = (game, seed=0, embed=64, key=32, hidden=64))]
    fn random(game: &PyGameConfig, seed: u64, embed: usize, key: usize, hidden: usize) -> Self {
        let g = &game.inner;
        let dims = NetDims { embed, key, hidden };
        let mut rng = rng_from(seed);
        let learners = (0..g.num_agents())
            .map(|i| AgentLearner::new(&g.layout(), g.num_roles(), g.role_of(i), dims, Default::default(), &mut rng))
            .collect();
        Self {
            game: g.clone(),
            sets: split_roles(g, learners),
        }
    }

    #[getter]
    fn game(&self) -> PyGameConfig {
        PyGameConfig { inner: self.game.clone() }
    }

    #[getter]
    fn sizes(&self) -> Vec<usize> {
        self.sets.iter().map(AgentSet::len).collect()
    }

    /// Noise-free action of `agent` for an observation of `world`.
    fn act(&self, world: &PyWorld, agent: usize) -> PyResult<(f32, f32)> {
        if world.game != self.game {
            return Err(PyValueError::new_err("world was built from a different game"));
        }
        if agent >= self.game.num_agents() {
            return Err(PyValueError::new_err(format!("no agent {agent}")));
        }
        let role = self.game.role_of(agent);
        let member = &self.sets[role].members[agent - self.game.role_range(role).start];
        let a = member.policy.act(&envs::observe(&self.game, &world.state, agent)).map_err(to_py)?;
        Ok((a[0], a[1]))
    }

    /// Self-cloned copy at twice the population.
    fn clone_double(&self) -> PyResult<Self> {
        let sets = self.sets.iter().map(epc::clone_double).collect::<epc_core::Result<Vec<_>>>().map_err(to_py)?;
        let game = self.game.with_scale(self.game.scale.doubled()).map_err(to_py)?;
        Ok(Self { game, sets })
    }

    /// Mean raw reward per role and per-episode statistics.
    #[pyo3(signature = (episodes, seed=0))]
    fn evaluate<'py>(&self, py: Python<'py>, episodes: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        let r = py
            .detach(|| eval::cross_play(&self.game, &self.refs(), None, episodes, seed))
            .map_err(to_py)?;
        json_value(py, &r)
    }

    /// Writes `<prefix>.<role>.ckpt` for every role.
    fn save(&self, prefix: PathBuf) -> PyResult<()> {
        for (role, set) in self.sets.iter().enumerate() {
            let meta = CheckpointMeta {
                game: self.game.kind.as_str().into(),
                scale: self.game.scale.to_string(),
                stage: 0,
                role: role as u32,
                set_id: "python".into(),
                seed: 0,
            };
            save_set(&role_path(&prefix, self.game.kind, role), set, &meta).map_err(to_py)?;
        }
        Ok(())
    }

    #[staticmethod]
    fn load(prefix: PathBuf, game: &PyGameConfig) -> PyResult<Self> {
        let g = &game.inner;
        let sets = (0..g.num_roles())
            .map(|role| load_set(&role_path(&prefix, g.kind, role), g, role, Default::default()))
            .collect::<epc_core::Result<Vec<_>>>()
            .map_err(to_py)?;
        Ok(Self { game: g.clone(), sets })
    }

    fn __repr__(&self) -> String {
        format!("Team('{}', '{}')", self.game.kind.as_str(), self.game.scale)
    }
}

/// Trains a team from scratch with MADDPG; returns the team and the
/// per-episode mean raw reward of each role.
#[pyfunction]
#[pyo3(signature = (game, episodes, seed=0, batch=1024, update_every=100, embed=64, key=32, hidden=64))]
#[allow(clippy::too_many_arguments)]
fn train(
    py: Python<'_>,
    game: &PyGameConfig,
    episodes: usize,
    seed: u64,
    batch: usize,
    update_every: usize,
    embed: usize,
    key: usize,
    hidden: usize,
) -> PyResult<(PyTeam, Vec<Vec<f64>>)> {
    let g = game.inner.clone();
    let config = TrainerConfig {
        episodes,
        batch,
        update_every,
        dims: NetDims { embed, key, hidden },
        ..TrainerConfig::default()
    };
    py.detach(move || {
        let mut rng = rng_from(derive_seed(seed, &[0]));
        let mut learners: Vec<AgentLearner> = (0..g.num_agents())
            .map(|i| AgentLearner::new(&g.layout(), g.num_roles(), g.role_of(i), config.dims, config.adam, &mut rng))
            .collect();
        let report = maddpg::train(&g, &mut learners, &config, derive_seed(seed, &[1]))?;
        let curves = (0..g.num_roles()).map(|r| report.role_series(r)).collect();
        Ok((
            PyTeam {
                sets: split_roles(&g, learners),
                game: g,
            },
            curves,
        ))
    })
    .map_err(to_py)
}

/// Runs the evolutionary curriculum from a TOML configuration, writing
/// stage records and checkpoints under `out`. Returns the stage records
/// and the best team at the final scale.
#[pyfunction]
#[pyo3(signature = (config, out, stop_after=None))]
fn evolve<'py>(
    py: Python<'py>,
    config: &str,
    out: PathBuf,
    stop_after: Option<usize>,
) -> PyResult<(Bound<'py, PyAny>, PyTeam)> {
    let mut cfg = ExperimentConfig::parse(config).map_err(to_py)?;
    cfg.out = out;
    let outcome = py.detach(|| evolve_command(&cfg, stop_after)).map_err(to_py)?;
    let last = outcome.records.last().expect("at least one stage");
    let game = cfg.game_config(&last.scale).map_err(to_py)?;
    let records = json_value(py, &outcome.records)?;
    Ok((records, PyTeam { game, sets: outcome.best }))
}

/// Full pairwise tournament between named teams on one game. Returns the
/// normalized score table as a list of dicts.
#[pyfunction]
#[pyo3(signature = (teams, episodes, seed=0))]
fn tournament<'py>(py: Python<'py>, teams: Vec<(String, PyTeam)>, episodes: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let Some((_, first)) = teams.first() else {
        return Err(PyValueError::new_err("no teams given"));
    };
    let game = first.game.clone();
    if teams.iter().any(|(_, t)| t.game != game) {
        return Err(PyValueError::new_err("all teams must share one game"));
    }
    let methods: Vec<(String, Vec<AgentSet>)> = teams.into_iter().map(|(n, t)| (n, t.sets)).collect();
    let r = py.detach(|| eval::tournament(&game, &methods, episodes, seed)).map_err(to_py)?;
    json_value(py, &r.table.entries)
}

/// Min-max normalizes `(method, game, scale, raw)` rows per column.
#[pyfunction]
fn normalize_scores<'py>(py: Python<'py>, rows: Vec<(String, String, String, f64)>) -> PyResult<Bound<'py, PyAny>> {
    let raw: Vec<RawScore> = rows
        .into_iter()
        .map(|(method, game, scale, raw)| RawScore { method, game, scale, raw })
        .collect();
    let table = eval::normalize_scores(&raw).map_err(to_py)?;
    json_value(py, &table.entries)
}

/// Number of distinct games `(K(K+1)/2)^roles`.
#[pyfunction]
fn c_max(k: usize, roles: usize) -> usize {
    epc::c_max(k, roles)
}

/// Indices of the `k` highest scores, best first.
#[pyfunction]
fn select_top_k(scores: Vec<f64>, k: usize) -> PyResult<Vec<usize>> {
    epc::select_top_k(&scores, k).map_err(to_py)
}

#[pymodule]
fn epc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGameConfig>()?;
    m.add_class::<PyWorld>()?;
    m.add_class::<PyTeam>()?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(tournament, m)?)?;
    m.add_function(wrap_pyfunction!(normalize_scores, m)?)?;
    m.add_function(wrap_pyfunction!(c_max, m)?)?;
    m.add_function(wrap_pyfunction!(select_top_k, m)?)?;
    Ok(())
}
