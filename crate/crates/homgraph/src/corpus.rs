//! Corpus directories and the bounded worker pool.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use homgraph_core::CallGraph;
use rayon::prelude::*;

use crate::wire::{parse_graph_with, Sensitivity};

pub const MANIFEST: &str = "manifest.json";
pub const WORKERS_ENV: &str = "HOMGRAPH_WORKERS";

/// Pool sized by `HOMGRAPH_WORKERS` when set to a positive integer, else by
/// the number of CPUs.
pub fn worker_pool() -> rayon::ThreadPool {
    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .expect("thread pool")
}

/// Graph documents of a corpus: every `*.json` file in `dir` except the
/// manifest, in file-name order.
pub fn list_documents(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir)? {
        let path = entry?.path();
        let is_doc = path.extension().is_some_and(|e| e == "json")
            && path.file_name().is_some_and(|n| n != MANIFEST)
            && path.is_file();
        if is_doc {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// A file as a one-graph corpus, or a directory of documents.
pub fn resolve_inputs(input: &Path) -> io::Result<Vec<PathBuf>> {
    if input.is_dir() {
        list_documents(input)
    } else {
        fs::metadata(input)?;
        Ok(vec![input.to_path_buf()])
    }
}

#[derive(Debug)]
pub struct LoadFailure {
    pub path: PathBuf,
    pub message: String,
}

pub fn load_graph(path: &Path, sensitivity: Sensitivity<'_>) -> Result<CallGraph, LoadFailure> {
    let fail = |message: String| LoadFailure {
        path: path.to_path_buf(),
        message,
    };
    let bytes = fs::read(path).map_err(|e| fail(e.to_string()))?;
    parse_graph_with(&bytes, sensitivity).map_err(|e| fail(e.to_string()))
}

/// Loads every document on the pool. Unreadable or invalid documents are
/// logged and skipped; the rest come back sorted by app id.
pub fn load_corpus(
    pool: &rayon::ThreadPool,
    paths: &[PathBuf],
    sensitivity: Sensitivity<'_>,
) -> (Vec<CallGraph>, Vec<LoadFailure>) {
    let results: Vec<Result<CallGraph, LoadFailure>> = pool.install(|| {
        paths
            .par_iter()
            .map(|p| load_graph(p, sensitivity))
            .collect()
    });
    let mut graphs = Vec::with_capacity(results.len());
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(g) => graphs.push(g),
            Err(f) => {
                log::warn!("skipping {}: {}", f.path.display(), f.message);
                failures.push(f);
            }
        }
    }
    graphs.sort_by(|a, b| a.app_id().cmp(b.app_id()));
    (graphs, failures)
}
