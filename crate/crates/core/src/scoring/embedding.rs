use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};
use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::types::Document;

/// Per-token vectors read from an embedding file, keyed by `(doc_id, token index)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PrecomputedEmbeddings {
    pub dim: usize,
    vectors: HashMap<(String, usize), Vec<f64>>,
}

impl PrecomputedEmbeddings {
    pub fn new(dim: usize) -> Self {
        PrecomputedEmbeddings {
            dim,
            vectors: HashMap::new(),
        }
    }

    pub fn insert(&mut self, doc_id: &str, index: usize, v: Vec<f64>) -> Result<()> {
        if v.len() != self.dim {
            return Err(Error::contract(format!(
                "vector of length {} in a table of dimension {}",
                v.len(),
                self.dim
            )));
        }
        self.vectors.insert((doc_id.to_owned(), index), v);
        Ok(())
    }

    pub fn get(&self, doc_id: &str, index: usize) -> Option<&[f64]> {
        self.vectors
            .get(&(doc_id.to_owned(), index))
            .map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn merge(&mut self, other: PrecomputedEmbeddings) -> Result<()> {
        if !other.is_empty() && other.dim != self.dim {
            return Err(Error::contract("embedding dimensions differ"));
        }
        self.vectors.extend(other.vectors);
        Ok(())
    }

    /// Reads the `D=<dim>` header followed by `doc_id index v1 .. vD` lines.
    pub fn read(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let dim = loop {
            let Some((n, line)) = lines.next() else {
                return Err(Error::parse(1, "missing D=<dim> header"));
            };
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let dim = line
                .strip_prefix("D=")
                .and_then(|d| d.trim().parse::<usize>().ok())
                .ok_or_else(|| Error::parse(n + 1, "expected D=<dim> header"))?;
            break dim;
        };
        let mut table = PrecomputedEmbeddings::new(dim);
        for (n, line) in lines {
            let line = line?;
            let mut fields = line.split_whitespace();
            let Some(doc_id) = fields.next() else {
                continue;
            };
            let index = fields
                .next()
                .and_then(|f| f.parse::<usize>().ok())
                .ok_or_else(|| Error::parse(n + 1, "expected token index"))?;
            let v = fields
                .map(|f| f.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(n + 1, e.to_string()))?;
            if v.len() != dim {
                return Err(Error::parse(
                    n + 1,
                    format!("expected {dim} values, found {}", v.len()),
                ));
            }
            table.vectors.insert((doc_id.to_owned(), index), v);
        }
        Ok(table)
    }

    /// Writes rows sorted by `(doc_id, index)`.
    pub fn write(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "D={}", self.dim)?;
        let mut keys: Vec<&(String, usize)> = self.vectors.keys().collect();
        keys.sort();
        for key in keys {
            write!(w, "{} {}", key.0, key.1)?;
            for x in &self.vectors[key] {
                write!(w, " {x}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Token representations feeding the scorers.
#[derive(Debug, Clone, PartialEq)]
pub enum Embeddings {
    /// Trainable word lookup; the last row is the unknown-word vector.
    Lookup {
        dim: usize,
        vocab: BTreeMap<String, usize>,
        table: Vec<f64>,
    },
    /// Frozen per-token vectors.
    Precomputed(Arc<PrecomputedEmbeddings>),
}

impl Embeddings {
    /// A lookup over every word in `docs`, initialized uniformly in `[-0.1, 0.1]`.
    pub fn lookup<R: Rng>(docs: &[Document], dim: usize, rng: &mut R) -> Self {
        let mut vocab = BTreeMap::new();
        for doc in docs {
            for t in &doc.tokens {
                let next = vocab.len();
                vocab.entry(t.text.clone()).or_insert(next);
            }
        }
        let rows = vocab.len() + 1;
        let table = (0..rows * dim)
            .map(|_| rng.random_range(-0.1..=0.1))
            .collect();
        Embeddings::Lookup { dim, vocab, table }
    }

    pub fn dim(&self) -> usize {
        match self {
            Embeddings::Lookup { dim, .. } => *dim,
            Embeddings::Precomputed(p) => p.dim,
        }
    }

    pub fn is_trainable(&self) -> bool {
        matches!(self, Embeddings::Lookup { .. })
    }

    /// Lookup row for token `index`, or `None` for frozen tables.
    pub fn row(&self, doc: &Document, index: usize) -> Option<usize> {
        match self {
            Embeddings::Lookup { vocab, .. } => Some(
                vocab
                    .get(&doc.tokens[index].text)
                    .copied()
                    .unwrap_or(vocab.len()),
            ),
            Embeddings::Precomputed(_) => None,
        }
    }

    /// Adds `scale * vector(index)` into `out`.
    pub fn accumulate(&self, doc: &Document, index: usize, scale: f64, out: &mut [f64]) {
        match self {
            Embeddings::Lookup { dim, table, .. } => {
                let row = self.row(doc, index).expect("lookup row");
                for (o, x) in out.iter_mut().zip(&table[row * dim..(row + 1) * dim]) {
                    *o += scale * x;
                }
            }
            Embeddings::Precomputed(p) => {
                if let Some(v) = p.get(&doc.doc_id, index) {
                    for (o, x) in out.iter_mut().zip(v) {
                        *o += scale * x;
                    }
                }
            }
        }
    }

    pub fn params(&self) -> &[f64] {
        match self {
            Embeddings::Lookup { table, .. } => table,
            Embeddings::Precomputed(_) => &[],
        }
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        match self {
            Embeddings::Lookup { table, .. } => table,
            Embeddings::Precomputed(_) => &mut [],
        }
    }
}
