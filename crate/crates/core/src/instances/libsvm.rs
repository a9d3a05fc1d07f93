use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::numerics::SparseMatrixCSR;
use crate::rng;

#[derive(Clone, Debug)]
pub struct SparseDataset {
    /// Data rows, zero rows removed.
    pub x: SparseMatrixCSR,
    /// Labels in `{−1, +1}`.
    pub labels: Vec<f64>,
    /// True when the source labels were not already `±1` and were mapped.
    pub labels_remapped: bool,
    pub dropped_rows: usize,
}

impl SparseDataset {
    pub fn n_samples(&self) -> usize {
        self.x.n_rows()
    }

    pub fn n_features(&self) -> usize {
        self.x.n_cols()
    }
}

/// Published feature dimensions of the LIBSVM sets used in the benchmarks.
pub fn known_dimension(name: &str) -> Option<usize> {
    let lower = name.to_ascii_lowercase();
    [("a8a", 123), ("phishing", 68), ("w8a", 300)]
        .iter()
        .find(|(k, _)| lower.contains(k))
        .map(|(_, d)| *d)
}

/// Parses `label idx:val ...` lines with 1-based ascending indices.
pub fn parse_libsvm(text: &str, n_features: Option<usize>) -> Result<SparseDataset> {
    let mut rows: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut raw_labels = Vec::new();
    let mut max_idx = 0;
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let body = line.split('#').next().unwrap_or("");
        let mut it = body.split_whitespace();
        let Some(lab) = it.next() else { continue };
        let label: f64 = lab
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| Error::Parse { line: line_no, msg: format!("bad label `{lab}`") })?;
        let mut row = Vec::new();
        let mut last = 0;
        for tok in it {
            let (i, v) = tok
                .split_once(':')
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("expected idx:val, found `{tok}`") })?;
            let i: usize = i
                .parse()
                .map_err(|_| Error::Parse { line: line_no, msg: format!("bad index in `{tok}`") })?;
            let v: f64 = v
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::Parse { line: line_no, msg: format!("bad value in `{tok}`") })?;
            if i == 0 || i <= last {
                return Err(Error::Parse { line: line_no, msg: format!("index {i} is not 1-based ascending") });
            }
            last = i;
            max_idx = max_idx.max(i);
            if v != 0.0 {
                row.push((i - 1, v));
            }
        }
        rows.push(row);
        raw_labels.push(label);
    }
    if rows.is_empty() {
        return Err(Error::Parse { line: 1, msg: "no data rows".into() });
    }
    let dim = match n_features {
        Some(d) if d < max_idx => {
            return Err(Error::InvalidInput(format!("feature index {max_idx} exceeds dimension {d}")))
        }
        Some(d) => d,
        None => max_idx.max(1),
    };

    let mut distinct: Vec<f64> = raw_labels.clone();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let already = distinct.iter().all(|v| *v == 1.0 || *v == -1.0);
    if distinct.len() > 2 {
        return Err(Error::InvalidInput(format!("labels are not binary: {} distinct values", distinct.len())));
    }
    let hi = distinct[distinct.len() - 1];
    let labels: Vec<f64> = if already {
        raw_labels.clone()
    } else {
        let two = distinct.len() == 2;
        raw_labels
            .iter()
            .map(|v| if (two && *v == hi) || (!two && *v > 0.0) { 1.0 } else { -1.0 })
            .collect()
    };

    let keep: Vec<usize> = (0..rows.len()).filter(|&r| !rows[r].is_empty()).collect();
    let kept_rows: Vec<Vec<(usize, f64)>> = keep.iter().map(|&r| rows[r].clone()).collect();
    Ok(SparseDataset {
        x: SparseMatrixCSR::from_rows(dim, &kept_rows)?,
        labels: keep.iter().map(|&r| labels[r]).collect(),
        labels_remapped: !already,
        dropped_rows: rows.len() - keep.len(),
    })
}

pub fn write_libsvm(ds: &SparseDataset) -> String {
    let mut s = String::new();
    for r in 0..ds.x.n_rows() {
        let _ = write!(s, "{}", if ds.labels[r] > 0.0 { "+1" } else { "-1" });
        let (idx, val) = ds.x.row(r);
        for (i, v) in idx.iter().zip(val) {
            let _ = write!(s, " {}:{}", i + 1, v);
        }
        s.push('\n');
    }
    s
}

/// `n_rows × n_cols` rows with a uniform number of nonzeros in
/// `1..=max_nnz` at distinct columns and `N(0,1)` values.
pub fn synthetic_sparse(n_rows: usize, n_cols: usize, max_nnz: usize, seed: u64) -> Result<SparseMatrixCSR> {
    if n_rows == 0 || n_cols == 0 || max_nnz == 0 {
        return Err(Error::InvalidInput("synthetic data needs positive sizes".into()));
    }
    let mut r = rng::stream(seed, &[0x5ba7]);
    let rows: Vec<Vec<(usize, f64)>> = (0..n_rows)
        .map(|_| {
            let k = r.random_range(1..=max_nnz.min(n_cols));
            let mut cols = sample(&mut r, n_cols, k).into_vec();
            cols.sort_unstable();
            cols.into_iter().map(|c| (c, r.sample::<f64, _>(StandardNormal))).collect()
        })
        .collect();
    SparseMatrixCSR::from_rows(n_cols, &rows)
}
