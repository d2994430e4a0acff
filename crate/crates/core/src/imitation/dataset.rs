use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game_core::Player;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("metadata: {0}")]
    Json(#[from] serde_json::Error),
    #[error("inconsistent dataset: {0}")]
    Inconsistent(String),
}

/// One `(h, s, a, b)` record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub h: usize,
    pub s: usize,
    pub a: usize,
    pub b: usize,
}

/// JSON sidecar stored next to the CSV records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub seed: u64,
    pub horizon: usize,
    pub queries_p1: u64,
    pub queries_p2: u64,
}

/// Episodes of exactly `horizon` records each, in collection order.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    horizon: usize,
    records: Vec<Transition>,
    /// Expert queries charged per episode, per player.
    per_episode: [u64; 2],
    seed: u64,
}

impl TrajectoryDataset {
    pub fn from_parts(horizon: usize, records: Vec<Transition>, per_episode: [u64; 2], seed: u64) -> Self {
        debug_assert!(horizon > 0 && records.len().is_multiple_of(horizon));
        Self {
            horizon,
            records,
            per_episode,
            seed,
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn records(&self) -> &[Transition] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n_episodes(&self) -> usize {
        self.records.len() / self.horizon
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn queries(&self, player: Player) -> u64 {
        self.per_episode[player.index()] * self.n_episodes() as u64
    }

    pub fn total_queries(&self) -> u64 {
        self.queries(Player::One) + self.queries(Player::Two)
    }

    /// The first `n_episodes` episodes.
    pub fn truncated(&self, n_episodes: usize) -> Self {
        let n = n_episodes.min(self.n_episodes());
        Self {
            records: self.records[..n * self.horizon].to_vec(),
            ..self.clone()
        }
    }

    /// One-based index of the first episode with a record at `(h, s)`.
    pub fn first_visit(&self, h: usize, s: usize) -> Option<usize> {
        self.records
            .iter()
            .position(|t| t.h == h && t.s == s)
            .map(|i| i / self.horizon + 1)
    }

    pub fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            seed: self.seed,
            horizon: self.horizon,
            queries_p1: self.queries(Player::One),
            queries_p2: self.queries(Player::Two),
        }
    }

    /// Writes `<stem>.csv` with header `h,s,a,b` and `<stem>.json` metadata.
    pub fn write(&self, stem: &Path) -> Result<(), DatasetError> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(stem.with_extension("csv"))?;
        for t in &self.records {
            w.serialize(t)?;
        }
        if self.records.is_empty() {
            w.write_record(["h", "s", "a", "b"])?;
        }
        w.flush()?;
        fs::write(stem.with_extension("json"), serde_json::to_string_pretty(&self.meta())?)?;
        Ok(())
    }

    pub fn read(stem: &Path) -> Result<Self, DatasetError> {
        let meta: DatasetMeta = serde_json::from_str(&fs::read_to_string(stem.with_extension("json"))?)?;
        let mut r = csv::Reader::from_path(stem.with_extension("csv"))?;
        let records = r.deserialize().collect::<Result<Vec<Transition>, _>>()?;
        if meta.horizon == 0 || records.len() % meta.horizon != 0 {
            return Err(DatasetError::Inconsistent(
                "record count is not a multiple of the horizon".into(),
            ));
        }
        let episodes = (records.len() / meta.horizon) as u64;
        let per = |q: u64| -> Result<u64, DatasetError> {
            match (episodes, q % episodes.max(1)) {
                (0, _) => Ok(0),
                (_, 0) => Ok(q / episodes),
                _ => Err(DatasetError::Inconsistent("query counts not per-episode".into())),
            }
        };
        Ok(Self {
            horizon: meta.horizon,
            per_episode: [per(meta.queries_p1)?, per(meta.queries_p2)?],
            records,
            seed: meta.seed,
        })
    }
}
