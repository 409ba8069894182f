//! Binary parameter checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! "EPC1" | version u32 | metadata | entry count u32 | entries...
//! metadata = game str | scale str | stage u32 | role u32 | set_id str | seed u64
//! str      = byte length u32 | UTF-8 bytes
//! entry    = name str | rank u32 | dims u32 x rank | values f32 x prod(dims)
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::envs::GameConfig;
use crate::epc::{AgentSet, Provenance};
use crate::error::{Error, Result};
use crate::maddpg::AgentLearner;
use crate::nets::{NetDims, ParamStore};
use crate::numerics::{AdamConfig, Tensor};
use crate::seeds::rng_from;

pub const MAGIC: &[u8; 4] = b"EPC1";
pub const VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub game: String,
    pub scale: String,
    pub stage: u32,
    pub role: u32,
    pub set_id: String,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub meta: CheckpointMeta,
    pub entries: Vec<(String, Tensor)>,
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    put_u32(out, s.len() as u32);
    out.extend_from_slice(s.as_bytes());
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, reason: impl Into<String>) -> Result<T> {
        Err(Error::Format {
            offset: self.pos,
            reason: reason.into(),
        })
    }

    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        if self.buf.len() - self.pos < n {
            return self.fail(format!("truncated while reading {what}"));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let n = self.u32(what)? as usize;
        let at = self.pos;
        let bytes = self.take(n, what)?;
        String::from_utf8(bytes.to_vec()).map_err(|_| Error::Format {
            offset: at,
            reason: format!("{what} is not valid UTF-8"),
        })
    }
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        put_u32(&mut out, VERSION);
        let m = &self.meta;
        put_str(&mut out, &m.game);
        put_str(&mut out, &m.scale);
        put_u32(&mut out, m.stage);
        put_u32(&mut out, m.role);
        put_str(&mut out, &m.set_id);
        out.extend_from_slice(&m.seed.to_le_bytes());
        put_u32(&mut out, self.entries.len() as u32);
        for (name, t) in &self.entries {
            put_str(&mut out, name);
            put_u32(&mut out, t.rank() as u32);
            for &d in t.shape() {
                put_u32(&mut out, d as u32);
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        let mut r = Reader { buf, pos: 0 };
        if r.take(4, "magic")? != MAGIC {
            r.pos = 0;
            return r.fail("bad magic, expected EPC1");
        }
        let version = r.u32("version")?;
        if version != VERSION {
            r.pos -= 4;
            return r.fail(format!("unsupported version {version}"));
        }
        let meta = CheckpointMeta {
            game: r.string("game")?,
            scale: r.string("scale")?,
            stage: r.u32("stage")?,
            role: r.u32("role")?,
            set_id: r.string("set id")?,
            seed: r.u64("seed")?,
        };
        let count = r.u32("entry count")? as usize;
        let mut entries = Vec::new();
        for _ in 0..count {
            let name = r.string("entry name")?;
            let rank_at = r.pos;
            let rank = r.u32("rank")? as usize;
            if rank == 0 || rank > 8 {
                r.pos = rank_at;
                return r.fail(format!("entry `{name}` has rank {rank}"));
            }
            let mut shape = Vec::with_capacity(rank);
            for _ in 0..rank {
                shape.push(r.u32("dims")? as usize);
            }
            let n = shape.iter().try_fold(1usize, |a, &d| a.checked_mul(d));
            let Some(n) = n.filter(|&n| n > 0) else {
                return r.fail(format!("entry `{name}` has invalid shape {shape:?}"));
            };
            let Some(bytes) = n.checked_mul(4) else {
                return r.fail(format!("entry `{name}` is too large"));
            };
            let raw = r.take(bytes, "values")?;
            let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
            entries.push((name, Tensor::from_parts(shape, data)));
        }
        if r.pos != buf.len() {
            return r.fail("trailing bytes after last entry");
        }
        Ok(Self { meta, entries })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, self.to_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}

const NETS: [&str; 4] = ["policy", "critic", "target_policy", "target_critic"];

fn stores(l: &AgentLearner) -> [&ParamStore; 4] {
    [&l.policy.params, &l.critic.params, &l.target_policy.params, &l.target_critic.params]
}

fn stores_mut(l: &mut AgentLearner) -> [&mut ParamStore; 4] {
    [
        &mut l.policy.params,
        &mut l.critic.params,
        &mut l.target_policy.params,
        &mut l.target_critic.params,
    ]
}

/// Entries `agent{k}.{net}.{param}` for every member and network.
pub fn set_checkpoint(set: &AgentSet, meta: &CheckpointMeta) -> Checkpoint {
    let mut entries = Vec::new();
    for (k, member) in set.members.iter().enumerate() {
        for (net, store) in NETS.iter().zip(stores(member)) {
            for (name, value) in store.names().iter().zip(store.values()) {
                entries.push((format!("agent{k}.{net}.{name}"), value.clone()));
            }
        }
    }
    Checkpoint {
        meta: meta.clone(),
        entries,
    }
}

pub fn save_set(path: &Path, set: &AgentSet, meta: &CheckpointMeta) -> Result<()> {
    set_checkpoint(set, meta).save(path)
}

fn dims_of(ckpt: &Checkpoint) -> Result<NetDims> {
    let shape = |name: &str| {
        ckpt.entries
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.shape().to_vec())
            .ok_or_else(|| Error::Config(format!("checkpoint lacks `{name}`")))
    };
    Ok(NetDims {
        embed: shape("agent0.policy.self_enc.weight")?[1],
        key: shape("agent0.critic.cross.others.w_psi")
            .or_else(|_| shape("agent0.critic.cross.teammates.w_psi"))?[0],
        hidden: shape("agent0.policy.hidden.weight")?[1],
    })
}

/// Rebuilds an agent set for `role` of `game` from a checkpoint; network
/// widths are read off the stored shapes and optimizers start fresh.
pub fn set_from_checkpoint(ckpt: &Checkpoint, game: &GameConfig, role: usize, adam: AdamConfig) -> Result<AgentSet> {
    if ckpt.meta.game != game.kind.as_str() || ckpt.meta.role as usize != role {
        return Err(Error::Config(format!(
            "checkpoint holds {} role {}, expected {} role {role}",
            ckpt.meta.game,
            ckpt.meta.role,
            game.kind.as_str()
        )));
    }
    let dims = dims_of(ckpt)?;
    let layout = game.layout();
    let mut rng = rng_from(0);
    let mut members = Vec::new();
    let mut entries = ckpt.entries.iter().peekable();
    while entries.peek().is_some() {
        let k = members.len();
        let mut learner = AgentLearner::new(&layout, game.num_roles(), role, dims, adam, &mut rng);
        for (net, store) in NETS.iter().zip(stores_mut(&mut learner)) {
            let mut names = Vec::with_capacity(store.len());
            let mut values = Vec::with_capacity(store.len());
            for expected in store.names() {
                let want = format!("agent{k}.{net}.{expected}");
                match entries.next() {
                    Some((n, v)) if *n == want => {
                        names.push(expected.clone());
                        values.push(v.clone());
                    }
                    other => {
                        return Err(Error::Config(format!(
                            "checkpoint entry mismatch: expected `{want}`, found {:?}",
                            other.map(|(n, _)| n)
                        )))
                    }
                }
            }
            store.assign(&names, values)?;
        }
        learner.reset_optimizers(adam);
        members.push(learner);
    }
    let provenance = Provenance {
        stage: ckpt.meta.stage as usize,
        ..Provenance::default()
    };
    Ok(AgentSet::new(role, members, provenance))
}

pub fn load_set(path: &Path, game: &GameConfig, role: usize, adam: AdamConfig) -> Result<AgentSet> {
    set_from_checkpoint(&Checkpoint::load(path)?, game, role, adam)
}
