//! Versioned plain-text instance files.
//!
//! ```text
//! radca-instance 1
//! kind signed-pair-quadratic
//! seed 7
//! param gamma 0.25
//! matrix A 4 2 8
//! 0 0 0.31
//! ...
//! end
//! ```
//! Matrix bodies are 0-based coordinate triplets.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::builders::{lcp_from_matrix, LcpInstance};
use super::orlib::QuboInstance;
use super::split::{dc_split_shift, dc_split_spectral};
use super::{build_qubo_penalty, signed_pair_rows};
use crate::error::{Error, Result};
use crate::model::{BlockKind, ConvexPart, DcProgram, MaxBlock, SmoothPiece};
use crate::numerics::{DenseSymmetricMatrix, SparseMatrixCSR};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct StoredMatrix {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl StoredMatrix {
    pub fn from_rows(name: &str, rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let entries = rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().enumerate().filter(|(_, v)| **v != 0.0).map(move |(j, v)| (i, j, *v)))
            .collect();
        Self { name: name.into(), rows: rows.len(), cols, entries }
    }

    pub fn from_csr(name: &str, m: &SparseMatrixCSR) -> Self {
        let entries = (0..m.n_rows())
            .flat_map(|i| {
                let (idx, val) = m.row(i);
                idx.iter().zip(val).map(move |(j, v)| (i, *j, *v)).collect::<Vec<_>>()
            })
            .collect();
        Self { name: name.into(), rows: m.n_rows(), cols: m.n_cols(), entries }
    }

    /// Lower triangle of a symmetric matrix.
    pub fn from_symmetric(name: &str, q: &DenseSymmetricMatrix) -> Self {
        let n = q.n();
        let mut entries = Vec::new();
        for i in 0..n {
            for j in 0..=i {
                let v = q.get(i, j);
                if v != 0.0 {
                    entries.push((i, j, v));
                }
            }
        }
        Self { name: name.into(), rows: n, cols: n, entries }
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; self.cols]; self.rows];
        for &(i, j, v) in &self.entries {
            out[i][j] = v;
        }
        out
    }

    pub fn to_csr(&self) -> Result<SparseMatrixCSR> {
        let mut rows = vec![Vec::new(); self.rows];
        for &(i, j, v) in &self.entries {
            rows[i].push((j, v));
        }
        SparseMatrixCSR::from_rows(self.cols, &rows)
    }

    pub fn to_symmetric(&self) -> Result<DenseSymmetricMatrix> {
        let mut q = DenseSymmetricMatrix::zeros(self.rows)?;
        for &(i, j, v) in &self.entries {
            q.set(i, j, v);
        }
        Ok(q)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub kind: String,
    pub seed: u64,
    pub params: BTreeMap<String, String>,
    pub matrices: Vec<StoredMatrix>,
}

impl InstanceFile {
    pub fn new(kind: &str, seed: u64) -> Self {
        Self { kind: kind.into(), seed, params: BTreeMap::new(), matrices: Vec::new() }
    }

    pub fn param(mut self, key: &str, value: impl ToString) -> Self {
        self.params.insert(key.into(), value.to_string());
        self
    }

    pub fn matrix(&self, name: &str) -> Result<&StoredMatrix> {
        self.matrices
            .iter()
            .find(|m| m.name == name)
            .ok_or_else(|| Error::InvalidInput(format!("instance has no matrix `{name}`")))
    }

    fn param_f64(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::InvalidInput(format!("instance needs numeric param `{key}`")))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "radca-instance {FORMAT_VERSION}");
        let _ = writeln!(s, "kind {}", self.kind);
        let _ = writeln!(s, "seed {}", self.seed);
        for (k, v) in &self.params {
            let _ = writeln!(s, "param {k} {v}");
        }
        for m in &self.matrices {
            let _ = writeln!(s, "matrix {} {} {} {}", m.name, m.rows, m.cols, m.entries.len());
            for (i, j, v) in &m.entries {
                let _ = writeln!(s, "{i} {j} {v}");
            }
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty());
        let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.into() };
        let (l0, head) = lines.next().ok_or_else(|| perr(1, "empty instance file"))?;
        let version = head
            .strip_prefix("radca-instance ")
            .and_then(|v| v.trim().parse::<u32>().ok())
            .ok_or_else(|| perr(l0, "missing `radca-instance <version>` header"))?;
        if version != FORMAT_VERSION {
            return Err(perr(l0, &format!("unsupported format version {version}")));
        }
        let mut out = InstanceFile::new("", 0);
        let mut saw_end = false;
        while let Some((ln, line)) = lines.next() {
            let mut tok = line.split_whitespace();
            match tok.next() {
                Some("kind") => out.kind = tok.next().ok_or_else(|| perr(ln, "kind needs a value"))?.into(),
                Some("seed") => {
                    out.seed = tok.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(ln, "bad seed"))?
                }
                Some("param") => {
                    let k = tok.next().ok_or_else(|| perr(ln, "param needs a key"))?;
                    let v = tok.next().ok_or_else(|| perr(ln, "param needs a value"))?;
                    out.params.insert(k.into(), v.into());
                }
                Some("matrix") => {
                    let name = tok.next().ok_or_else(|| perr(ln, "matrix needs a name"))?.to_string();
                    let mut dims = [0usize; 3];
                    for d in dims.iter_mut() {
                        *d = tok.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(ln, "bad matrix header"))?;
                    }
                    let mut entries = Vec::with_capacity(dims[2]);
                    for _ in 0..dims[2] {
                        let (el, e) = lines.next().ok_or_else(|| perr(ln, "truncated matrix body"))?;
                        let mut t = e.split_whitespace();
                        let i: usize = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(el, "bad row index"))?;
                        let j: usize = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(el, "bad column index"))?;
                        let v: f64 = t.next().and_then(|v| v.parse().ok()).ok_or_else(|| perr(el, "bad value"))?;
                        if i >= dims[0] || j >= dims[1] {
                            return Err(perr(el, "entry outside matrix"));
                        }
                        entries.push((i, j, v));
                    }
                    out.matrices.push(StoredMatrix { name, rows: dims[0], cols: dims[1], entries });
                }
                Some("end") => {
                    saw_end = true;
                    break;
                }
                Some(other) => return Err(perr(ln, &format!("unknown record `{other}`"))),
                None => {}
            }
        }
        if !saw_end {
            return Err(perr(text.lines().count().max(1), "missing `end`"));
        }
        Ok(out)
    }

    pub fn signed_pair(n: usize, p: usize, gamma: Option<f64>, seed: u64) -> Result<Self> {
        let rows = signed_pair_rows(n, p, seed)?;
        let mut f = match gamma {
            Some(g) => InstanceFile::new("signed-pair-quadratic", seed).param("gamma", g),
            None => InstanceFile::new("signed-pair-affine", seed),
        };
        f.matrices.push(StoredMatrix::from_rows("A", &rows[..p]));
        Ok(f)
    }

    pub fn lcp(inst: &LcpInstance, seed: u64) -> Self {
        let mut f = InstanceFile::new("lcp", seed).param("rho", inst.rho);
        f.matrices.push(StoredMatrix::from_csr("M", &inst.m));
        f
    }

    pub fn qubo(inst: &QuboInstance, split: &str) -> Self {
        let mut f = InstanceFile::new("qubo", 0).param("split", split).param("rho", 1.0).param("name", &inst.source_name);
        f.matrices.push(StoredMatrix::from_symmetric("Q", &inst.q));
        f
    }

    /// Rebuilds the program the file describes.
    pub fn to_program(&self) -> Result<DcProgram> {
        match self.kind.as_str() {
            "signed-pair-affine" | "signed-pair-quadratic" => {
                let half = self.matrix("A")?.to_rows();
                let n = self.matrix("A")?.cols;
                let gamma = if self.kind == "signed-pair-quadratic" { Some(self.param_f64("gamma")?) } else { None };
                let all = half.iter().cloned().chain(half.iter().map(|r| r.iter().map(|v| -v).collect()));
                let pieces = all
                    .map(|a| match gamma {
                        Some(g) => SmoothPiece::affine_plus_quad(a, g),
                        None => SmoothPiece::affine(a, 0.0),
                    })
                    .collect::<Result<Vec<_>>>()?;
                DcProgram::new(
                    ConvexPart::scaled_identity(n, 1.0)?,
                    vec![MaxBlock::new(BlockKind::Pieces(pieces), 1.0)?],
                    None,
                    0.0,
                )
            }
            "lcp" => Ok(lcp_from_matrix(self.matrix("M")?.to_csr()?)?.program),
            "qubo" => {
                let q = self.matrix("Q")?.to_symmetric()?;
                let rho = self.param_f64("rho")?;
                let split = match self.params.get("split").map(String::as_str) {
                    Some("spectral") => dc_split_spectral(&q)?,
                    _ => dc_split_shift(&q)?,
                };
                build_qubo_penalty(&split, rho)
            }
            other => Err(Error::InvalidInput(format!("unknown instance kind `{other}`"))),
        }
    }
}
