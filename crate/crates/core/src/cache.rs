//! On-disk cache of Bergman weight tables.
//!
//! A cache file is a JSON object with a `header` (measure, tolerances, length)
//! and a `weights` array written with 17 significant digits, so reading it
//! back gives bit-identical values. Files are published by writing a sibling
//! temporary file and renaming it over the target.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::measures::{AdmissibleMeasure, MeasureSpec};
use crate::quadrature::QuadratureConfig;

pub const CACHE_DIR_ENV: &str = "DVLAB_CACHE_DIR";

/// Cache directory: `$DVLAB_CACHE_DIR`, else `<tmp>/dvlab-cache`.
pub fn cache_dir() -> PathBuf {
    std::env::var_os(CACHE_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("dvlab-cache"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightTableHeader {
    pub measure: MeasureSpec,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    pub upper_cutoff: Option<f64>,
    pub n: usize,
}

impl WeightTableHeader {
    fn new(measure: &AdmissibleMeasure, q: &QuadratureConfig, n: usize) -> Self {
        Self {
            measure: measure.spec().clone(),
            abs_tol: q.abs_tol,
            rel_tol: q.rel_tol,
            max_subdivisions: q.max_subdivisions,
            upper_cutoff: q.upper_cutoff,
            n,
        }
    }

    fn same_key(&self, other: &Self) -> bool {
        Self { n: 0, ..self.clone() } == Self { n: 0, ..other.clone() }
    }
}

#[derive(Debug, Deserialize)]
struct WeightFile {
    header: WeightTableHeader,
    weights: Vec<f64>,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

fn cache_path(dir: &Path, header: &WeightTableHeader) -> Result<PathBuf> {
    let key = serde_json::to_string(&WeightTableHeader { n: 0, ..header.clone() })?;
    Ok(dir.join(format!(
        "weights-{}-{:016x}.json",
        header.measure.family_name(),
        fnv1a(key.as_bytes())
    )))
}

/// Serializes a table; every weight carries 17 significant digits.
pub fn render_weight_file(header: &WeightTableHeader, weights: &[f64]) -> Result<String> {
    let mut s = String::with_capacity(32 * weights.len() + 256);
    s.push_str("{\"header\":");
    s.push_str(&serde_json::to_string(header)?);
    s.push_str(",\"weights\":[");
    for (i, w) in weights.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&format!("{w:.16e}"));
    }
    s.push_str("]}\n");
    Ok(s)
}

/// Writes `contents` to `path` via a temporary file and an atomic rename.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_table(path: &Path, want: &WeightTableHeader) -> Option<Vec<f64>> {
    let text = fs::read_to_string(path).ok()?;
    let file: WeightFile = serde_json::from_str(&text).ok()?;
    if !file.header.same_key(want) || file.weights.len() != file.header.n || file.header.n < want.n {
        return None;
    }
    if file.weights.first() != Some(&1.0) || file.weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
        return None;
    }
    Some(file.weights[..want.n].to_vec())
}

/// `(w_1, ..., w_n)` computed without touching the disk.
pub fn compute_weight_table(measure: &AdmissibleMeasure, n: usize, q: &QuadratureConfig) -> Result<Vec<f64>> {
    if n == 0 {
        return Ok(vec![]);
    }
    let rule = measure.weight_rule(n as u64, q)?;
    Ok((1..=n as u64).map(|k| rule.weight(k)).collect())
}

/// `(w_1, ..., w_n)`, read from the cache in `dir` when a matching table of
/// at least `n` entries exists; otherwise computed and written back. A corrupt
/// or mismatched cache file is silently replaced.
pub fn weight_table_in(dir: &Path, measure: &AdmissibleMeasure, n: usize, q: &QuadratureConfig) -> Result<Vec<f64>> {
    let header = WeightTableHeader::new(measure, q, n);
    let path = cache_path(dir, &header)?;
    if let Some(w) = read_table(&path, &header) {
        return Ok(w);
    }
    let weights = compute_weight_table(measure, n, q)?;
    let text = render_weight_file(&header, &weights)?;
    // A failed cache write is not an error for the caller.
    let _ = atomic_write(&path, text.as_bytes());
    Ok(weights)
}

/// [`weight_table_in`] using [`cache_dir`].
pub fn weight_table(measure: &AdmissibleMeasure, n: usize, q: &QuadratureConfig) -> Result<Vec<f64>> {
    weight_table_in(&cache_dir(), measure, n, q)
}
