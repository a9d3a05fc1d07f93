use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DenseSymmetricMatrix;
use crate::rng;

/// How an OR-Library triplet `(i, j, v)` with `i ≠ j` enters `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OrlibConvention {
    /// `Q_ij = Q_ji = v`.
    Symmetric,
    /// `Q_ij = Q_ji = v/2`, so the pair contributes `v z_i z_j` once.
    SingleCount,
}

/// A minimization QUBO `min zᵀQz` over `{0,1}ⁿ`.
#[derive(Clone, Debug)]
pub struct QuboInstance {
    pub n: usize,
    pub q: DenseSymmetricMatrix,
    /// True when the source was a maximization problem and `Q` was negated.
    pub sense_converted: bool,
    pub source_name: String,
    pub convention: OrlibConvention,
}

impl QuboInstance {
    pub fn value(&self, z: &[u8]) -> f64 {
        let zf: Vec<f64> = z.iter().map(|b| *b as f64).collect();
        self.q.quad_form(&zf)
    }
}

struct Tokens<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    current: Vec<&'a str>,
    pos: usize,
    line: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        Self { lines: text.lines().enumerate(), current: Vec::new(), pos: 0, line: 0 }
    }

    fn next(&mut self) -> Result<(usize, &'a str)> {
        while self.pos >= self.current.len() {
            match self.lines.next() {
                Some((i, l)) => {
                    self.line = i + 1;
                    self.current = l.split_whitespace().collect();
                    self.pos = 0;
                }
                None => {
                    return Err(Error::Parse { line: self.line.max(1), msg: "unexpected end of input".into() })
                }
            }
        }
        self.pos += 1;
        Ok((self.line, self.current[self.pos - 1]))
    }

    fn count(&mut self, what: &str) -> Result<(usize, usize)> {
        let (line, t) = self.next()?;
        t.parse::<usize>()
            .map(|v| (line, v))
            .map_err(|_| Error::Parse { line, msg: format!("expected {what}, found `{t}`") })
    }

    fn value(&mut self) -> Result<f64> {
        let (line, t) = self.next()?;
        match t.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => Err(Error::Parse { line, msg: format!("expected a number, found `{t}`") }),
        }
    }
}

/// Parses OR-Library UBQP text (maximization) into minimization instances
/// using the symmetric convention.
pub fn parse_orlib_qubo(text: &str) -> Result<Vec<QuboInstance>> {
    parse_orlib_qubo_with(text, OrlibConvention::Symmetric, "orlib")
}

pub fn parse_orlib_qubo_with(text: &str, convention: OrlibConvention, name: &str) -> Result<Vec<QuboInstance>> {
    if text.trim().is_empty() {
        return Err(Error::Parse { line: 1, msg: "empty input".into() });
    }
    let mut tok = Tokens::new(text);
    let (_, count) = tok.count("instance count")?;
    let mut out = Vec::with_capacity(count);
    for inst in 0..count {
        let (line, n) = tok.count("dimension")?;
        if n == 0 {
            return Err(Error::Parse { line, msg: "dimension must be positive".into() });
        }
        let (_, nnz) = tok.count("nonzero count")?;
        let mut q = DenseSymmetricMatrix::zeros(n)?;
        for _ in 0..nnz {
            let (li, i) = tok.count("row index")?;
            let (lj, j) = tok.count("column index")?;
            let v = tok.value()?;
            for (l, idx) in [(li, i), (lj, j)] {
                if idx == 0 || idx > n {
                    return Err(Error::Parse { line: l, msg: format!("index {idx} outside 1..={n}") });
                }
            }
            let v = if i != j && convention == OrlibConvention::SingleCount { 0.5 * v } else { v };
            q.set(i - 1, j - 1, -v);
        }
        let source_name = if count == 1 { name.to_string() } else { format!("{name}.{}", inst + 1) };
        out.push(QuboInstance { n, q, sense_converted: true, source_name, convention });
    }
    Ok(out)
}

/// Writes instances back in OR-Library form (original sense, upper triangle).
pub fn write_orlib_qubo(instances: &[QuboInstance]) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{}", instances.len());
    for inst in instances {
        let sign = if inst.sense_converted { -1.0 } else { 1.0 };
        let mut trip = Vec::new();
        for i in 0..inst.n {
            for j in i..inst.n {
                let mut v = sign * inst.q.get(i, j);
                if i != j && inst.convention == OrlibConvention::SingleCount {
                    v *= 2.0;
                }
                if v != 0.0 {
                    trip.push((i + 1, j + 1, v));
                }
            }
        }
        let _ = writeln!(s, "{} {}", inst.n, trip.len());
        for (i, j, v) in trip {
            let _ = writeln!(s, "{i} {j} {v}");
        }
    }
    s
}

/// Symmetric integer entries uniform on `[−100, 100]`.
pub fn random_qubo(n: usize, seed: u64) -> Result<QuboInstance> {
    let mut r = rng::stream(seed, &[0x0b9e]);
    let q = DenseSymmetricMatrix::from_fn(n, |_, _| r.random_range(-100i32..=100) as f64)?;
    Ok(QuboInstance {
        n,
        q,
        sense_converted: false,
        source_name: format!("random-qubo-{n}-{seed}"),
        convention: OrlibConvention::Symmetric,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_instance_and_errors() {
        let inst = parse_orlib_qubo("1\n2 2\n1 1 5\n1 2 -3\n").unwrap();
        assert_eq!(inst[0].q.get(0, 0), -5.0);
        assert_eq!(inst[0].q.get(0, 1), 3.0);
        assert_eq!(inst[0].value(&[1, 1]), 1.0);
        assert!(matches!(parse_orlib_qubo(""), Err(Error::Parse { .. })));
        assert!(matches!(parse_orlib_qubo("1\n2 1\n1 3 4\n"), Err(Error::Parse { line: 3, .. })));
        assert!(matches!(parse_orlib_qubo("1\n2 2\n1 1 5\n"), Err(Error::Parse { .. })));
        assert!(matches!(parse_orlib_qubo("1\n2 1\n1 x 4\n"), Err(Error::Parse { line: 3, .. })));
    }
}
