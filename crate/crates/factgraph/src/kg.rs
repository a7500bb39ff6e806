//! Indexed in-memory triple store.
//!
//! Triples are ingested from a TAB-separated dump (one `head⇥relation⇥tail`
//! record per line, UTF-8, LF line endings) and indexed both ways: by head
//! entity and by tail entity. The graph is immutable after build, so it can
//! be shared freely across threads for read-only queries.

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufRead, BufReader, Read, Write};
use std::path::Path;

use thiserror::Error;

/// Magic bytes identifying a persisted index cache file.
pub const INDEX_CACHE_MAGIC: [u8; 4] = *b"FGKG";
const INDEX_CACHE_VERSION: u8 = 1;

/// One directed labeled edge of the knowledge graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
    /// 0-based position among the kept (deduplicated) records of the source.
    pub ordinal: usize,
}

impl Triple {
    /// Identity of the edge without its positional ordinal.
    pub fn key(&self) -> (&str, &str, &str) {
        (&self.head, &self.relation, &self.tail)
    }
}

#[derive(Debug, Error)]
pub enum KgError {
    #[error("line {line}: malformed triple record ({reason})")]
    MalformedLine { line: usize, reason: String },
    #[error("invalid index cache: {0}")]
    InvalidCache(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Immutable triple store with forward (by head) and reverse (by tail)
/// adjacency indexes. Index lists are kept in ascending ordinal order.
#[derive(Debug, Default)]
pub struct KnowledgeGraph {
    triples: Vec<Triple>,
    forward: HashMap<String, Vec<usize>>,
    reverse: HashMap<String, Vec<usize>>,
    entity_count: usize,
}

impl PartialEq for KnowledgeGraph {
    fn eq(&self, other: &Self) -> bool {
        // Indexes are derived from the triple sequence.
        self.triples == other.triples
    }
}

impl KnowledgeGraph {
    /// Parse a TAB-separated triple dump and build the indexed graph.
    ///
    /// Empty lines are ignored. Duplicate `(head, relation, tail)` records
    /// are dropped, keeping the first occurrence, so ordinals are dense and
    /// stable. Lines with anything other than exactly three TAB-separated
    /// fields, or with an empty head or relation, abort the load with
    /// [`KgError::MalformedLine`].
    pub fn load_triples<R: BufRead>(source: R) -> Result<Self, KgError> {
        let mut builder = Builder::default();
        for (idx, line) in source.lines().enumerate() {
            let line = line?;
            if line.is_empty() {
                continue;
            }
            let line_no = idx + 1;
            let mut fields = line.split('\t');
            let (head, relation, tail) = match (fields.next(), fields.next(), fields.next()) {
                (Some(h), Some(r), Some(t)) if fields.next().is_none() => (h, r, t),
                _ => {
                    return Err(KgError::MalformedLine {
                        line: line_no,
                        reason: format!(
                            "expected 3 TAB-separated fields, found {}",
                            line.split('\t').count()
                        ),
                    })
                }
            };
            if head.is_empty() {
                return Err(KgError::MalformedLine {
                    line: line_no,
                    reason: "empty head field".into(),
                });
            }
            if relation.is_empty() {
                return Err(KgError::MalformedLine {
                    line: line_no,
                    reason: "empty relation field".into(),
                });
            }
            builder.insert(head, relation, tail);
        }
        Ok(builder.finish())
    }

    /// Load a graph from a file that is either a TAB-separated dump or a
    /// persisted index cache (detected by its magic header).
    pub fn load_file(path: &Path) -> Result<Self, KgError> {
        let mut reader = BufReader::new(File::open(path)?);
        let magic_hit = {
            let buf = reader.fill_buf()?;
            buf.len() >= INDEX_CACHE_MAGIC.len()
                && buf[..INDEX_CACHE_MAGIC.len()] == INDEX_CACHE_MAGIC
        };
        if magic_hit {
            Self::read_cache(reader)
        } else {
            Self::load_triples(reader)
        }
    }

    /// All triples in ordinal order.
    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Number of distinct strings appearing as a head or a tail.
    pub fn entity_count(&self) -> usize {
        self.entity_count
    }

    pub fn contains_entity(&self, entity: &str) -> bool {
        self.forward.contains_key(entity) || self.reverse.contains_key(entity)
    }

    /// Triples with `entity` as head, ascending by ordinal.
    pub fn neighbors_out<'a>(&'a self, entity: &str) -> impl Iterator<Item = &'a Triple> + 'a {
        self.out_ordinals(entity).iter().map(|&o| &self.triples[o])
    }

    /// Triples with `entity` as tail, ascending by ordinal.
    pub fn neighbors_in<'a>(&'a self, entity: &str) -> impl Iterator<Item = &'a Triple> + 'a {
        self.in_ordinals(entity).iter().map(|&o| &self.triples[o])
    }

    /// All distinct entities, in no particular order.
    pub fn entities(&self) -> impl Iterator<Item = &str> {
        self.forward.keys().map(String::as_str).chain(
            self.reverse
                .keys()
                .filter(|k| !self.forward.contains_key(*k))
                .map(String::as_str),
        )
    }

    pub(crate) fn out_ordinals(&self, entity: &str) -> &[usize] {
        self.forward.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn in_ordinals(&self, entity: &str) -> &[usize] {
        self.reverse.get(entity).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Persist the graph to the internal cache format (magic header,
    /// version byte, then length-prefixed triple fields).
    pub fn write_cache<W: Write>(&self, sink: &mut W) -> io::Result<()> {
        sink.write_all(&INDEX_CACHE_MAGIC)?;
        sink.write_all(&[INDEX_CACHE_VERSION])?;
        sink.write_all(&(self.triples.len() as u64).to_le_bytes())?;
        for t in &self.triples {
            for field in [&t.head, &t.relation, &t.tail] {
                sink.write_all(&(field.len() as u32).to_le_bytes())?;
                sink.write_all(field.as_bytes())?;
            }
        }
        Ok(())
    }

    /// Read a graph persisted with [`write_cache`](Self::write_cache).
    pub fn read_cache<R: Read>(mut source: R) -> Result<Self, KgError> {
        let mut magic = [0u8; 4];
        source.read_exact(&mut magic).map_err(truncated)?;
        if magic != INDEX_CACHE_MAGIC {
            return Err(KgError::InvalidCache("bad magic header".into()));
        }
        let mut version = [0u8; 1];
        source.read_exact(&mut version).map_err(truncated)?;
        if version[0] != INDEX_CACHE_VERSION {
            return Err(KgError::InvalidCache(format!(
                "unsupported format version {}",
                version[0]
            )));
        }
        let mut count_buf = [0u8; 8];
        source.read_exact(&mut count_buf).map_err(truncated)?;
        let count = u64::from_le_bytes(count_buf) as usize;
        let mut builder = Builder::default();
        let read_field = |source: &mut R| -> Result<String, KgError> {
            let mut len_buf = [0u8; 4];
            source.read_exact(&mut len_buf).map_err(truncated)?;
            let mut buf = vec![0u8; u32::from_le_bytes(len_buf) as usize];
            source.read_exact(&mut buf).map_err(truncated)?;
            String::from_utf8(buf).map_err(|_| KgError::InvalidCache("non-UTF-8 field".into()))
        };
        for _ in 0..count {
            let head = read_field(&mut source)?;
            let relation = read_field(&mut source)?;
            let tail = read_field(&mut source)?;
            if !builder.insert(&head, &relation, &tail) {
                return Err(KgError::InvalidCache("duplicate triple".into()));
            }
        }
        if source.read(&mut [0u8; 1])? != 0 {
            return Err(KgError::InvalidCache("trailing data".into()));
        }
        Ok(builder.finish())
    }
}

fn truncated(err: io::Error) -> KgError {
    if err.kind() == io::ErrorKind::UnexpectedEof {
        KgError::InvalidCache("truncated file".into())
    } else {
        KgError::Io(err)
    }
}

#[derive(Default)]
struct Builder {
    triples: Vec<Triple>,
    forward: HashMap<String, Vec<usize>>,
    reverse: HashMap<String, Vec<usize>>,
}

impl Builder {
    /// Insert one record; returns false for a duplicate (head, relation, tail).
    fn insert(&mut self, head: &str, relation: &str, tail: &str) -> bool {
        if let Some(ordinals) = self.forward.get(head) {
            // Duplicate check scans the head's existing out-edges, trading
            // worst-case hub cost for zero extra memory during bulk loads.
            if ordinals.iter().any(|&o| {
                let t = &self.triples[o];
                t.relation == relation && t.tail == tail
            }) {
                return false;
            }
        }
        let ordinal = self.triples.len();
        self.forward
            .entry(head.to_owned())
            .or_default()
            .push(ordinal);
        self.reverse
            .entry(tail.to_owned())
            .or_default()
            .push(ordinal);
        self.triples.push(Triple {
            head: head.to_owned(),
            relation: relation.to_owned(),
            tail: tail.to_owned(),
            ordinal,
        });
        true
    }

    fn finish(self) -> KnowledgeGraph {
        let entity_count = self.forward.len()
            + self
                .reverse
                .keys()
                .filter(|k| !self.forward.contains_key(*k))
                .count();
        KnowledgeGraph {
            triples: self.triples,
            forward: self.forward,
            reverse: self.reverse,
            entity_count,
        }
    }
}
