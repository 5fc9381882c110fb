//! Plain-text sparse triplet exchange format.
//!
//! ```text
//! sdp-triplet 1
//! meta N 3
//! meta lambda 1.5
//! dim 6
//! constraints 11
//! con 1 ge 0 A_0_1
//! ...
//! con 11 eq 1 A_w
//! 0 5 4 -0.5
//! 1 1 0 0.375
//! ```
//!
//! * `meta` lines carry free-form key/value metadata (optional).
//! * `con <id> <ge|eq> <rhs> [label]` declares constraint `id` (1-based,
//!   consecutive, in order).
//! * Every other non-blank line is `<id> <row> <col> <value>`: a nonzero of
//!   the objective (`id = 0`) or of constraint `id`, lower triangle only
//!   (`row ≥ col`), 0-based indices. The matrix entry `(row, col)` and its
//!   mirror `(col, row)` both equal `value`.
//! * Lines starting with `#` are comments.
//!
//! Values are written in shortest round-trip form, so write → read is exact.

use std::io::{BufRead, Write};

use crate::linalg::SymMatrix;
use crate::scalar::Real;

use super::{Constraint, SdpError, SdpProblem, Sense};

pub const MAGIC: &str = "sdp-triplet";
pub const VERSION: u32 = 1;

/// Metadata key/value pairs carried in `meta` lines.
pub type Meta = Vec<(String, String)>;

fn write_entries<T: Real, W: Write>(out: &mut W, id: usize, m: &SymMatrix<T>) -> std::io::Result<()> {
    for i in 0..m.order() {
        for j in 0..=i {
            let v = m.get(i, j);
            if v != T::zero() {
                writeln!(out, "{id} {i} {j} {:e}", v.to_f64_lossy())?;
            }
        }
    }
    Ok(())
}

pub fn write_triplets<T: Real, W: Write>(
    problem: &SdpProblem<T>,
    meta: &[(String, String)],
    mut out: W,
) -> Result<(), SdpError> {
    writeln!(out, "{MAGIC} {VERSION}")?;
    for (k, v) in meta {
        writeln!(out, "meta {k} {v}")?;
    }
    writeln!(out, "dim {}", problem.dim())?;
    writeln!(out, "constraints {}", problem.constraints().len())?;
    for (k, c) in problem.constraints().iter().enumerate() {
        let label = if c.label.is_empty() { String::new() } else { format!(" {}", c.label) };
        writeln!(out, "con {} {} {:e}{label}", k + 1, c.sense, c.rhs.to_f64_lossy())?;
    }
    write_entries(&mut out, 0, problem.objective())?;
    for (k, c) in problem.constraints().iter().enumerate() {
        write_entries(&mut out, k + 1, &c.matrix)?;
    }
    Ok(())
}

pub fn to_string<T: Real>(problem: &SdpProblem<T>, meta: &[(String, String)]) -> String {
    let mut buf = Vec::new();
    write_triplets(problem, meta, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

fn parse_err(line: usize, message: impl Into<String>) -> SdpError {
    SdpError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_num<N: std::str::FromStr>(line: usize, tok: Option<&str>, what: &str) -> Result<N, SdpError> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("invalid {what}: {tok:?}")))
}

pub fn read_triplets<T: Real, R: BufRead>(input: R) -> Result<(SdpProblem<T>, Meta), SdpError> {
    let mut meta = Vec::new();
    let mut dim: Option<usize> = None;
    let mut count: Option<usize> = None;
    let mut headers: Vec<(Sense, T, String)> = Vec::new();
    let mut matrices: Vec<SymMatrix<T>> = Vec::new();
    let mut seen_magic = false;

    for (idx, line) in input.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut toks = trimmed.split_whitespace();
        let head = toks.next().expect("non-empty line");
        if !seen_magic {
            if head != MAGIC {
                return Err(parse_err(lineno, format!("expected `{MAGIC}` header")));
            }
            let version: u32 = parse_num(lineno, toks.next(), "version")?;
            if version != VERSION {
                return Err(parse_err(lineno, format!("unsupported version {version}")));
            }
            seen_magic = true;
            continue;
        }
        match head {
            "meta" => {
                let key = toks.next().ok_or_else(|| parse_err(lineno, "missing meta key"))?;
                let value = toks.collect::<Vec<_>>().join(" ");
                meta.push((key.to_string(), value));
            }
            "dim" => {
                let d: usize = parse_num(lineno, toks.next(), "dim")?;
                if d == 0 {
                    return Err(parse_err(lineno, "dim must be positive"));
                }
                dim = Some(d);
            }
            "constraints" => {
                let c: usize = parse_num(lineno, toks.next(), "constraint count")?;
                let d = dim.ok_or_else(|| parse_err(lineno, "`dim` must precede `constraints`"))?;
                count = Some(c);
                matrices = (0..=c).map(|_| SymMatrix::zeros(d)).collect();
            }
            "con" => {
                let id: usize = parse_num(lineno, toks.next(), "constraint id")?;
                if id != headers.len() + 1 {
                    return Err(parse_err(lineno, format!("constraint id {id} out of order")));
                }
                let sense = match toks.next() {
                    Some("ge") => Sense::Ge,
                    Some("eq") => Sense::Eq,
                    other => return Err(parse_err(lineno, format!("invalid sense {other:?}"))),
                };
                let rhs: f64 = parse_num(lineno, toks.next(), "rhs")?;
                let label = toks.collect::<Vec<_>>().join(" ");
                headers.push((sense, T::lit(rhs), label));
            }
            _ => {
                let c = count.ok_or_else(|| parse_err(lineno, "entries before `constraints`"))?;
                let id: usize = parse_num(lineno, Some(head), "matrix id")?;
                let row: usize = parse_num(lineno, toks.next(), "row")?;
                let col: usize = parse_num(lineno, toks.next(), "column")?;
                let value: f64 = parse_num(lineno, toks.next(), "value")?;
                let d = dim.expect("dim set with constraints");
                if id > c {
                    return Err(parse_err(lineno, format!("matrix id {id} exceeds {c}")));
                }
                if row >= d || col > row {
                    return Err(parse_err(lineno, format!("entry ({row}, {col}) not in lower triangle of order {d}")));
                }
                matrices[id].set(row, col, T::lit(value));
            }
        }
    }

    if !seen_magic {
        return Err(parse_err(0, "empty input"));
    }
    let c = count.ok_or_else(|| parse_err(0, "missing `constraints` line"))?;
    if headers.len() != c {
        return Err(parse_err(0, format!("declared {c} constraints, found {}", headers.len())));
    }
    let mut mats = matrices.into_iter();
    let objective = mats.next().expect("objective slot");
    let constraints = headers
        .into_iter()
        .zip(mats)
        .map(|((sense, rhs, label), matrix)| Constraint {
            matrix,
            sense,
            rhs,
            label,
        })
        .collect();
    Ok((SdpProblem::new(objective, constraints)?, meta))
}

pub fn from_str<T: Real>(text: &str) -> Result<(SdpProblem<T>, Meta), SdpError> {
    read_triplets(text.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SdpProblem<f64> {
        let obj = SymMatrix::from_rows(&[vec![0.1, -1.0 / 3.0], vec![-1.0 / 3.0, 0.0]]);
        let mut a = SymMatrix::zeros(2);
        a.set(1, 1, 1.0);
        SdpProblem::new(
            obj,
            vec![
                Constraint::new(SymMatrix::identity(2), Sense::Ge, 0.0).labeled("trace"),
                Constraint::new(a, Sense::Eq, 1.0).labeled("A_w"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let p = sample();
        let meta = vec![("N".to_string(), "1".to_string())];
        let text = to_string(&p, &meta);
        let (q, m) = from_str::<f64>(&text).unwrap();
        assert_eq!(p, q);
        assert_eq!(m, meta);
    }

    #[test]
    fn rejects_upper_triangle_entries() {
        let text = "sdp-triplet 1\ndim 2\nconstraints 1\ncon 1 eq 1\n1 0 1 1.0\n";
        assert!(matches!(from_str::<f64>(text), Err(SdpError::Parse { line: 5, .. })));
    }

    #[test]
    fn rejects_missing_header() {
        assert!(from_str::<f64>("dim 2\n").is_err());
        assert!(from_str::<f64>("").is_err());
    }

    #[test]
    fn rejects_count_mismatch() {
        let text = "sdp-triplet 1\ndim 2\nconstraints 2\ncon 1 eq 1\n1 0 0 1\n";
        assert!(from_str::<f64>(text).is_err());
    }

    #[test]
    fn comments_and_blank_lines_ignored() {
        let text = "# hi\nsdp-triplet 1\n\ndim 1\nconstraints 1\ncon 1 eq 1 norm\n# entry\n1 0 0 1\n";
        let (p, _) = from_str::<f64>(text).unwrap();
        assert_eq!(p.constraints()[0].label, "norm");
        assert_eq!(p.constraints()[0].matrix.get(0, 0), 1.0);
    }
}
