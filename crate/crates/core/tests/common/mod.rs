//! Random programs built from raw parameters, with a direct evaluator that
//! shares no code with the library's model.

#![allow(dead_code)]

use rand::Rng;
use radca::model::{BlockKind, ConvexPart, DcProgram, MaxBlock, SmoothPiece};
use radca::numerics::{DenseSymmetricMatrix, SparseMatrixCSR};
use radca::rng::stream;

#[derive(Clone, Debug)]
pub enum RawPiece {
    Affine(Vec<f64>, f64),
    AffineQuad(Vec<f64>, f64),
    Quad(Vec<Vec<f64>>),
}

#[derive(Clone, Debug)]
pub enum RawG {
    Scaled(f64),
    Quad(Vec<Vec<f64>>),
    Ridge { rows: Vec<Vec<f64>>, y: Vec<f64>, lambda: f64, scale: f64 },
}

#[derive(Clone, Debug)]
pub struct RawProgram {
    pub n: usize,
    pub g: RawG,
    pub linear: Vec<f64>,
    pub blocks: Vec<(f64, Vec<RawPiece>)>,
}

fn psd<R: Rng>(r: &mut R, n: usize, shift: f64) -> Vec<Vec<f64>> {
    let b: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| r.random_range(-1.0..1.0)).collect()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| (0..n).map(|k| b[i][k] * b[j][k]).sum::<f64>() + if i == j { shift } else { 0.0 }).collect())
        .collect()
}

fn vecr<R: Rng>(r: &mut R, n: usize, s: f64) -> Vec<f64> {
    (0..n).map(|_| r.random_range(-s..s)).collect()
}

pub fn random_raw(seed: u64, max_n: usize) -> RawProgram {
    let mut r = stream(seed, &[0x7e57]);
    let n = r.random_range(1..=max_n);
    let g = match r.random_range(0..3) {
        0 => RawG::Scaled(r.random_range(0.5..2.0)),
        1 => RawG::Quad(psd(&mut r, n, 0.5)),
        _ => {
            let m = r.random_range(1..=n + 2);
            RawG::Ridge {
                rows: (0..m).map(|_| vecr(&mut r, n, 1.0)).collect(),
                y: vecr(&mut r, m, 1.0),
                lambda: r.random_range(0.1..1.0),
                scale: r.random_range(0.5..2.0),
            }
        }
    };
    let linear = vecr(&mut r, n, 1.0);
    let nb = r.random_range(1..=3);
    let blocks = (0..nb)
        .map(|_| {
            let np = r.random_range(1..=5);
            let pieces = (0..np)
                .map(|_| match r.random_range(0..3) {
                    0 => RawPiece::Affine(vecr(&mut r, n, 2.0), r.random_range(-1.0..1.0)),
                    1 => RawPiece::AffineQuad(vecr(&mut r, n, 2.0), r.random_range(0.0..0.5)),
                    _ => RawPiece::Quad(psd(&mut r, n, 0.0)),
                })
                .collect();
            (r.random_range(0.2..1.5), pieces)
        })
        .collect();
    RawProgram { n, g, linear, blocks }
}

fn sym(h: &[Vec<f64>]) -> DenseSymmetricMatrix {
    DenseSymmetricMatrix::from_fn(h.len(), |i, j| h[i][j]).unwrap()
}

pub fn build(raw: &RawProgram) -> DcProgram {
    let n = raw.n;
    let g = match &raw.g {
        RawG::Scaled(c) => ConvexPart::scaled_identity(n, *c).unwrap(),
        RawG::Quad(h) => ConvexPart::general_quad(sym(h), vec![0.0; n], 0.0).unwrap(),
        RawG::Ridge { rows, y, lambda, scale } => {
            let sp: Vec<Vec<(usize, f64)>> = rows.iter().map(|r| r.iter().copied().enumerate().collect()).collect();
            ConvexPart::ridge(SparseMatrixCSR::from_rows(n, &sp).unwrap(), y.clone(), *lambda, *scale).unwrap()
        }
    }
    .with_linear(raw.linear.clone(), 0.25)
    .unwrap();
    let blocks = raw
        .blocks
        .iter()
        .map(|(w, ps)| {
            let pieces = ps
                .iter()
                .map(|p| match p {
                    RawPiece::Affine(a, b) => SmoothPiece::affine(a.clone(), *b).unwrap(),
                    RawPiece::AffineQuad(a, gm) => SmoothPiece::affine_plus_quad(a.clone(), *gm).unwrap(),
                    RawPiece::Quad(h) => SmoothPiece::quadratic(sym(h)),
                })
                .collect();
            MaxBlock::new(BlockKind::Pieces(pieces), *w).unwrap()
        })
        .collect();
    DcProgram::new(g, blocks, None, 0.0).unwrap()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

fn quad(h: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..x.len() {
        for j in 0..x.len() {
            s += x[i] * h[i][j] * x[j];
        }
    }
    s
}

pub fn raw_piece_value(p: &RawPiece, x: &[f64]) -> f64 {
    match p {
        RawPiece::Affine(a, b) => dot(a, x) + b,
        RawPiece::AffineQuad(a, gm) => dot(a, x) + 0.5 * gm * dot(x, x),
        RawPiece::Quad(h) => 0.5 * quad(h, x),
    }
}

pub fn raw_piece_gradient(p: &RawPiece, x: &[f64]) -> Vec<f64> {
    match p {
        RawPiece::Affine(a, _) => a.clone(),
        RawPiece::AffineQuad(a, gm) => a.iter().zip(x).map(|(ai, xi)| ai + gm * xi).collect(),
        RawPiece::Quad(h) => h.iter().map(|row| dot(row, x)).collect(),
    }
}

pub fn raw_g(raw: &RawProgram, x: &[f64]) -> f64 {
    let base = match &raw.g {
        RawG::Scaled(c) => 0.5 * c * dot(x, x),
        RawG::Quad(h) => 0.5 * quad(h, x),
        RawG::Ridge { rows, y, lambda, scale } => {
            let mut s = 0.0;
            for (row, yi) in rows.iter().zip(y) {
                let e = dot(row, x) - yi;
                s += e * e;
            }
            0.5 * scale * s + 0.5 * lambda * dot(x, x)
        }
    };
    base + dot(&raw.linear, x) + 0.25
}

pub fn raw_eval(raw: &RawProgram, x: &[f64]) -> f64 {
    let mut h = 0.0;
    for (w, ps) in &raw.blocks {
        let mut best = f64::NEG_INFINITY;
        for p in ps {
            let v = raw_piece_value(p, x);
            if v > best {
                best = v;
            }
        }
        h += w * best;
    }
    raw_g(raw, x) - h
}

pub fn random_point(seed: u64, n: usize, s: f64) -> Vec<f64> {
    let mut r = stream(seed, &[0x9017]);
    vecr(&mut r, n, s)
}

/// Replaces `g` by a scaled identity whose curvature exceeds that of the
/// weighted pieces, so the program is bounded below.
pub fn bounded(mut raw: RawProgram) -> RawProgram {
    let mut c = 1.0;
    for (w, ps) in &raw.blocks {
        let curv = ps
            .iter()
            .map(|p| match p {
                RawPiece::Affine(..) => 0.0,
                RawPiece::AffineQuad(_, gm) => *gm,
                RawPiece::Quad(h) => (0..h.len()).map(|i| h[i][i]).sum(),
            })
            .fold(0.0, f64::max);
        c += w * curv;
    }
    raw.g = RawG::Scaled(c);
    raw
}
