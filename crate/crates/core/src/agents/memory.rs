use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{AgentError, BackendError, Result};

pub const EMBEDDING_DIM: usize = 256;
/// Records returned per retrieval, counted across all requested stores.
pub const RETRIEVE_K: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum StoreKind {
    /// Market information, including reflections on past actions.
    #[serde(rename = "M_I")]
    MarketInfo,
    #[serde(rename = "M_S")]
    Strategy,
    #[serde(rename = "M_R")]
    Report,
}

impl StoreKind {
    pub const ALL: [StoreKind; 3] = [StoreKind::MarketInfo, StoreKind::Strategy, StoreKind::Report];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MemoryRecord {
    /// Insertion sequence number, unique within a bank.
    pub id: u64,
    pub store: StoreKind,
    pub timestamp: NaiveDate,
    pub text: String,
    pub embedding: Vec<f64>,
    #[serde(default)]
    pub metadata: BTreeMap<String, String>,
}

/// Text to vector. Implementations must return vectors of a fixed dimension.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> std::result::Result<Vec<f64>, BackendError>;
}

/// The default embedder, see [`embed`].
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StubEmbedder;

impl Embedder for StubEmbedder {
    fn embed(&self, text: &str) -> std::result::Result<Vec<f64>, BackendError> {
        Ok(embed(text))
    }
}

fn fnv1a(bytes: impl Iterator<Item = u8>) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

/// Hashed character-trigram counts of the lowercased, space-padded text in
/// [`EMBEDDING_DIM`] buckets, L2-normalized. Empty text maps to the first basis vector.
pub fn embed(text: &str) -> Vec<f64> {
    let mut v = vec![0.0; EMBEDDING_DIM];
    let chars: Vec<char> = format!(" {} ", text.to_lowercase()).chars().collect();
    if text.is_empty() {
        v[0] = 1.0;
        return v;
    }
    let mut buf = [0u8; 12];
    for w in chars.windows(3) {
        let bytes = w.iter().flat_map(|c| {
            let n = c.encode_utf8(&mut buf).len();
            buf[..n].to_vec()
        });
        v[(fnv1a(bytes) % EMBEDDING_DIM as u64) as usize] += 1.0;
    }
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

/// Cosine similarity; zero when either vector is zero.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    dot / (na.sqrt() * nb.sqrt())
}

/// The three memory stores of one run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MemoryBank {
    records: Vec<MemoryRecord>,
    next_id: u64,
    dim: Option<usize>,
}

impl MemoryBank {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[MemoryRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, store: StoreKind) -> usize {
        self.records.iter().filter(|r| r.store == store).count()
    }

    pub fn get(&self, id: u64) -> Option<&MemoryRecord> {
        self.records.iter().find(|r| r.id == id)
    }

    /// Adds a record with a precomputed embedding. The timestamp may not be after
    /// `cursor`, and every embedding in a bank has the same dimension.
    pub fn insert_embedded(
        &mut self,
        store: StoreKind,
        timestamp: NaiveDate,
        cursor: NaiveDate,
        text: String,
        embedding: Vec<f64>,
        metadata: BTreeMap<String, String>,
    ) -> Result<&MemoryRecord> {
        if timestamp > cursor {
            return Err(AgentError::Memory(format!("record dated {timestamp} is after the cursor {cursor}")));
        }
        match self.dim {
            Some(d) if d != embedding.len() => {
                return Err(AgentError::Memory(format!(
                    "embedding dimension {} does not match {d}",
                    embedding.len()
                )))
            }
            None if embedding.is_empty() => return Err(AgentError::Memory("empty embedding".into())),
            _ => self.dim = Some(embedding.len()),
        }
        self.records.push(MemoryRecord {
            id: self.next_id,
            store,
            timestamp,
            text,
            embedding,
            metadata,
        });
        self.next_id += 1;
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn insert(
        &mut self,
        embedder: &dyn Embedder,
        store: StoreKind,
        timestamp: NaiveDate,
        cursor: NaiveDate,
        text: String,
        metadata: BTreeMap<String, String>,
    ) -> Result<&MemoryRecord> {
        let e = embedder.embed(&text)?;
        self.insert_embedded(store, timestamp, cursor, text, e, metadata)
    }

    /// The `k` records of `stores` most similar to `query`: cosine descending, then newer
    /// timestamp, then later insertion. Fewer than `k` candidates returns them all.
    pub fn retrieve(&self, query: &[f64], stores: &[StoreKind], k: usize) -> Vec<&MemoryRecord> {
        let mut scored: Vec<(f64, &MemoryRecord)> = self
            .records
            .iter()
            .filter(|r| stores.contains(&r.store))
            .map(|r| (cosine(query, &r.embedding), r))
            .collect();
        let order = |a: &(f64, &MemoryRecord), b: &(f64, &MemoryRecord)| {
            b.0.total_cmp(&a.0)
                .then(b.1.timestamp.cmp(&a.1.timestamp))
                .then(b.1.id.cmp(&a.1.id))
        };
        if k == 0 {
            return Vec::new();
        }
        if scored.len() > k {
            scored.select_nth_unstable_by(k - 1, order);
            scored.truncate(k);
        }
        scored.sort_by(order);
        scored.into_iter().map(|(_, r)| r).collect()
    }

    pub fn retrieve_text(
        &self,
        embedder: &dyn Embedder,
        query: &str,
        stores: &[StoreKind],
        k: usize,
    ) -> Result<Vec<&MemoryRecord>> {
        Ok(self.retrieve(&embedder.embed(query)?, stores, k))
    }

    /// One JSON record per line.
    pub fn save_jsonl(&self, path: &Path) -> Result<()> {
        let io = |e| AgentError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
        for r in &self.records {
            let line = serde_json::to_string(r).expect("record serializes");
            writeln!(f, "{line}").map_err(io)?;
        }
        f.flush().map_err(io)
    }

    pub fn load_jsonl(path: &Path) -> Result<MemoryBank> {
        let io = |e| AgentError::Io {
            path: path.to_path_buf(),
            source: e,
        };
        let f = std::fs::File::open(path).map_err(io)?;
        let mut bank = MemoryBank::new();
        for (i, line) in BufReader::new(f).lines().enumerate() {
            let line = line.map_err(io)?;
            if line.trim().is_empty() {
                continue;
            }
            let r: MemoryRecord = serde_json::from_str(&line)
                .map_err(|e| AgentError::Memory(format!("{}:{}: {e}", path.display(), i + 1)))?;
            if bank.dim.is_some_and(|d| d != r.embedding.len()) {
                return Err(AgentError::Memory(format!("{}:{}: embedding dimension changes", path.display(), i + 1)));
            }
            bank.dim = Some(r.embedding.len());
            bank.next_id = bank.next_id.max(r.id + 1);
            bank.records.push(r);
        }
        Ok(bank)
    }
}
