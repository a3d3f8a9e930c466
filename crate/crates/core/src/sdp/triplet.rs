//! Sparse-triplet text format for SDP problems.
//!
//! ```text
//! sdp-triplet 1
//! dim <n>
//! constraints <m>
//! c <i> <j> <re> <im>
//! a <k> <i> <j> <re> <im>
//! b <k> <value>
//! ```
//!
//! Indices are 0-based. Only entries with `i <= j` are listed; the lower
//! triangle is implied by conjugate symmetry. Lines starting with `#` and
//! blank lines are ignored. Values use Rust's shortest round-trip formatting.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{HermitianMatrix, SdpProblem};
use crate::error::{Error, Result};

const MAGIC: &str = "sdp-triplet 1";

fn upper_entries(h: &HermitianMatrix) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
    let n = h.dim();
    (0..n)
        .flat_map(move |i| (i..n).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, h.get(i, j)))
        .filter(|(_, _, z)| *z != Complex64::new(0.0, 0.0))
}

pub fn write_triplets<W: Write>(problem: &SdpProblem, mut w: W) -> Result<()> {
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "dim {}", problem.dim())?;
    writeln!(w, "constraints {}", problem.num_constraints())?;
    for (i, j, z) in upper_entries(problem.objective()) {
        writeln!(w, "c {i} {j} {:?} {:?}", z.re, z.im)?;
    }
    for (k, (a, b)) in problem.constraints().iter().enumerate() {
        for (i, j, z) in upper_entries(a) {
            writeln!(w, "a {k} {i} {j} {:?} {:?}", z.re, z.im)?;
        }
        writeln!(w, "b {k} {b:?}")?;
    }
    Ok(())
}

fn parse<T: std::str::FromStr>(tok: Option<&str>, line: usize) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    let tok = tok.ok_or_else(|| Error::Parse(format!("line {line}: missing field")))?;
    tok.parse().map_err(|e| Error::Parse(format!("line {line}: {tok:?}: {e}")))
}

pub fn read_triplets<R: BufRead>(r: R) -> Result<SdpProblem> {
    let mut lines = r.lines().enumerate().filter_map(|(k, l)| match l {
        Ok(s) if s.trim().is_empty() || s.trim_start().starts_with('#') => None,
        other => Some((k + 1, other)),
    });
    let mut next = |what: &str| -> Result<(usize, String)> {
        let (k, l) = lines.next().ok_or_else(|| Error::Parse(format!("missing {what} line")))?;
        Ok((k, l?))
    };
    let (_, magic) = next("header")?;
    if magic.trim() != MAGIC {
        return Err(Error::Parse(format!("expected header {MAGIC:?}, got {magic:?}")));
    }
    let header = |(k, l): (usize, String), key: &str| -> Result<usize> {
        let mut t = l.split_whitespace();
        if t.next() != Some(key) {
            return Err(Error::Parse(format!("line {k}: expected {key:?}")));
        }
        parse(t.next(), k)
    };
    let n = header(next("dim")?, "dim")?;
    let m = header(next("constraints")?, "constraints")?;

    let mut c = Vec::new();
    let mut a: Vec<Vec<(usize, usize, Complex64)>> = vec![Vec::new(); m];
    let mut b: Vec<Option<f64>> = vec![None; m];
    for (k, l) in lines {
        let l = l?;
        let mut t = l.split_whitespace();
        let kind = t.next().unwrap_or_default();
        let constraint = |t: &mut std::str::SplitWhitespace, k: usize| -> Result<usize> {
            let idx: usize = parse(t.next(), k)?;
            if idx >= m {
                return Err(Error::Parse(format!("line {k}: constraint {idx} out of range")));
            }
            Ok(idx)
        };
        match kind {
            "c" => c.push((parse(t.next(), k)?, parse(t.next(), k)?, Complex64::new(parse(t.next(), k)?, parse(t.next(), k)?))),
            "a" => {
                let idx = constraint(&mut t, k)?;
                a[idx].push((parse(t.next(), k)?, parse(t.next(), k)?, Complex64::new(parse(t.next(), k)?, parse(t.next(), k)?)));
            }
            "b" => {
                let idx = constraint(&mut t, k)?;
                b[idx] = Some(parse(t.next(), k)?);
            }
            other => return Err(Error::Parse(format!("line {k}: unknown record {other:?}"))),
        }
        if t.next().is_some() {
            return Err(Error::Parse(format!("line {k}: trailing fields")));
        }
    }
    let lower = |e: &[(usize, usize, Complex64)]| -> Result<()> {
        match e.iter().find(|(i, j, _)| i > j) {
            Some((i, j, _)) => Err(Error::Parse(format!("entry ({i}, {j}) is below the diagonal"))),
            None => Ok(()),
        }
    };
    lower(&c)?;
    let objective = HermitianMatrix::from_entries(n, &c)?;
    let constraints = a
        .iter()
        .zip(b)
        .enumerate()
        .map(|(k, (entries, bk))| {
            lower(entries)?;
            let bk = bk.ok_or_else(|| Error::Parse(format!("constraint {k} has no right-hand side")))?;
            Ok((HermitianMatrix::from_entries(n, entries)?, bk))
        })
        .collect::<Result<Vec<_>>>()?;
    SdpProblem::new(objective, constraints)
}
