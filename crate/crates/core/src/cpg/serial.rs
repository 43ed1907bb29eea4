//! On-disk cache format: a single JSON document with a versioned header, the
//! source files, the node table and the edge table. Indexes are rebuilt on
//! load, and saving a loaded graph reproduces the original bytes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{BuildReport, Cpg, CpgEdge, CpgNode, NodeId};
use crate::frontend::SourceFile;

pub const CACHE_FORMAT: &str = "codebadger-cpg";
pub const CACHE_VERSION: u32 = 1;
pub const DIGEST_ALGORITHM: &str = "sha256";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub format: String,
    pub version: u32,
    pub digest: String,
    pub source_hash: String,
    pub language: String,
}

impl CacheHeader {
    pub fn new(source_hash: &str, language: &str) -> Self {
        CacheHeader {
            format: CACHE_FORMAT.to_string(),
            version: CACHE_VERSION,
            digest: DIGEST_ALGORITHM.to_string(),
            source_hash: source_hash.to_string(),
            language: language.to_string(),
        }
    }
}

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("malformed cache file: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("incompatible cache file: {0}")]
    Incompatible(String),
    #[error("corrupt cache file: {0}")]
    Corrupt(String),
}

#[derive(Serialize)]
struct CacheFileRef<'a> {
    header: &'a CacheHeader,
    files: &'a [SourceFile],
    nodes: &'a [CpgNode],
    edges: &'a [CpgEdge],
    report: &'a BuildReport,
}

#[derive(Deserialize)]
struct CacheFile {
    header: CacheHeader,
    files: Vec<SourceFile>,
    nodes: Vec<CpgNode>,
    edges: Vec<CpgEdge>,
    report: BuildReport,
}

impl Cpg {
    pub fn to_cache_bytes(&self, header: &CacheHeader) -> Vec<u8> {
        serde_json::to_vec(&CacheFileRef {
            header,
            files: &self.files,
            nodes: &self.nodes,
            edges: &self.edges,
            report: &self.report,
        })
        .expect("graph serializes")
    }

    pub fn from_cache_bytes(bytes: &[u8]) -> Result<(CacheHeader, Cpg), CacheError> {
        let file: CacheFile = serde_json::from_slice(bytes)?;
        let h = &file.header;
        if h.format != CACHE_FORMAT || h.version != CACHE_VERSION || h.digest != DIGEST_ALGORITHM {
            return Err(CacheError::Incompatible(format!(
                "{} v{} ({})",
                h.format, h.version, h.digest
            )));
        }
        let n = file.nodes.len();
        for (i, node) in file.nodes.iter().enumerate() {
            if node.id != NodeId(i as u32) {
                return Err(CacheError::Corrupt(format!("node {i} has id {}", node.id)));
            }
            if node.file as usize >= file.files.len() {
                return Err(CacheError::Corrupt(format!("node {i} references missing file")));
            }
            if node.method.is_some_and(|m| m.index() >= n) {
                return Err(CacheError::Corrupt(format!("node {i} references missing method")));
            }
        }
        if let Some(e) = file.edges.iter().find(|e| e.src.index() >= n || e.dst.index() >= n) {
            return Err(CacheError::Corrupt(format!("edge {}->{} out of range", e.src, e.dst)));
        }
        let cpg = Cpg::from_parts(file.files, file.nodes, file.edges, file.report);
        Ok((file.header, cpg))
    }
}
