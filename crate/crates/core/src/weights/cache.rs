use std::fs::{self, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{GaugeSlice, Propagator, WeightError, WeightEstimate};
use crate::graph_core::FeynmanGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheKey {
    pub graph: String,
    pub prop: String,
    pub gauge: String,
    pub samples: u64,
    pub seed: u64,
}

impl CacheKey {
    pub fn new(
        g: &FeynmanGraph,
        prop: Propagator,
        slice: GaugeSlice,
        samples: u64,
        seed: u64,
    ) -> Self {
        CacheKey {
            graph: g.canonical_hash(),
            prop: prop.name(),
            gauge: slice.name(),
            samples,
            seed,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct Line {
    key: CacheKey,
    estimate: WeightEstimate,
}

/// Append-only JSONL store of weight estimates. Later lines win on lookup.
#[derive(Debug)]
pub struct WeightCache {
    path: PathBuf,
    entries: Vec<(CacheKey, WeightEstimate)>,
}

impl WeightCache {
    /// Opens `<dir>/weights.jsonl`, where `dir` defaults to `$OPK_CACHE` or `.opk-cache`.
    pub fn open(dir: Option<&Path>) -> Result<Self, WeightError> {
        let dir = match dir {
            Some(d) => d.to_path_buf(),
            None => std::env::var_os("OPK_CACHE")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(".opk-cache")),
        };
        fs::create_dir_all(&dir)?;
        let path = dir.join("weights.jsonl");
        let mut entries = Vec::new();
        if path.exists() {
            for line in BufReader::new(fs::File::open(&path)?).lines() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let l: Line = serde_json::from_str(&line)?;
                entries.push((l.key, l.estimate));
            }
        }
        Ok(WeightCache { path, entries })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &CacheKey) -> Option<&WeightEstimate> {
        self.entries
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, e)| e)
    }

    pub fn insert(&mut self, key: CacheKey, estimate: WeightEstimate) -> Result<(), WeightError> {
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)?;
        writeln!(
            f,
            "{}",
            serde_json::to_string(&Line {
                key: key.clone(),
                estimate: estimate.clone()
            })?
        )?;
        self.entries.push((key, estimate));
        Ok(())
    }

    /// Looks up the estimate or computes and records it. Entries are stored
    /// for the edge-sorted graph; the reordering sign is applied on the way out.
    pub fn weight(
        &mut self,
        g: &FeynmanGraph,
        prop: Propagator,
        slice: GaugeSlice,
        opts: super::WeightOptions,
    ) -> Result<WeightEstimate, WeightError> {
        let (sorted, sign) = g.normalize()?;
        let key = CacheKey::new(&sorted, prop, slice, opts.samples, opts.seed);
        let mut e = match self.get(&key) {
            Some(e) => e.clone(),
            None => {
                let e = super::weight(&sorted, prop, slice, opts)?;
                self.insert(key, e.clone())?;
                e
            }
        };
        e.mean *= f64::from(sign);
        if sign == 0 {
            e.stderr = 0.0;
        }
        Ok(e)
    }
}
