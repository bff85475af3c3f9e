//! Plain-text file formats.
//!
//! * Matrices: Matrix Market coordinate files
//!   (`%%MatrixMarket matrix coordinate real general`, `integer` also
//!   accepted), 1-based indices, every stored value finite and positive.
//! * Targets: one number per line. Blank lines and lines starting with `#`
//!   are ignored.
//! * Graphs: an edge list whose first line is `n_left n_right`, followed by
//!   one `left right` pair of 1-based indices per line. `#` comments and
//!   blank lines are ignored.
//! * Traces: CSV with the columns `t,phase,err1,err2,kl_row,kl_col,pot_Z`.
//!
//! Parse failures are reported as [`Error::Parse`] with the 1-based line.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matching::BipartiteGraph;
use crate::matrix::SparseNonnegMatrix;
use crate::sinkhorn::IterationTrace;

const MM_BANNER: &str = "%%MatrixMarket";

/// Formats a float so that parsing the text gives back the same bits.
/// Plain decimal notation is used for moderate magnitudes, exponent
/// notation otherwise.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || !x.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

fn parse_error(source: &str, line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        source_name: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Non-blank lines that are not comments, with their 1-based line numbers.
fn content_lines<'a>(
    text: &'a str,
    comment: &'a str,
) -> impl Iterator<Item = (usize, &'a str)> + 'a {
    text.lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(move |(_, l)| !l.is_empty() && !l.starts_with(comment))
}

fn parse_index(tok: &str, bound: usize, what: &str, source: &str, line: usize) -> Result<usize> {
    let k: usize = tok
        .parse()
        .map_err(|_| parse_error(source, line, format!("invalid {what} index {tok:?}")))?;
    if k == 0 || k > bound {
        return Err(parse_error(
            source,
            line,
            format!("{what} index {k} outside 1..={bound}"),
        ));
    }
    Ok(k - 1)
}

fn parse_count(tok: Option<&str>, what: &str, source: &str, line: usize) -> Result<usize> {
    let tok = tok.ok_or_else(|| parse_error(source, line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_error(source, line, format!("invalid {what} {tok:?}")))
}

/// Parses a Matrix Market coordinate file held in memory. `source` names
/// the input in error messages.
pub fn parse_matrix_market(text: &str, source: &str) -> Result<SparseNonnegMatrix> {
    let mut lines = text.lines().enumerate().map(|(k, l)| (k + 1, l.trim()));
    let (_, banner) = lines
        .next()
        .ok_or_else(|| parse_error(source, 1, "empty file"))?;
    let words: Vec<String> = banner
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    let words: Vec<&str> = words.iter().map(String::as_str).collect();
    match words.as_slice() {
        [b, "matrix", "coordinate", "real" | "integer", "general"]
            if b.eq_ignore_ascii_case(MM_BANNER) => {}
        _ => {
            return Err(parse_error(
                source,
                1,
                format!("expected '{MM_BANNER} matrix coordinate real general', got {banner:?}"),
            ))
        }
    }

    let mut body = lines.filter(|(_, l)| !l.is_empty() && !l.starts_with('%'));
    let (size_line, size) = body
        .next()
        .ok_or_else(|| parse_error(source, 2, "missing size line"))?;
    let mut toks = size.split_whitespace();
    let n_rows = parse_count(toks.next(), "row count", source, size_line)?;
    let n_cols = parse_count(toks.next(), "column count", source, size_line)?;
    let nnz = parse_count(toks.next(), "entry count", source, size_line)?;
    if toks.next().is_some() {
        return Err(parse_error(source, size_line, "size line has extra fields"));
    }
    if n_rows == 0 || n_cols == 0 {
        return Err(parse_error(
            source,
            size_line,
            format!("empty shape {n_rows}x{n_cols}"),
        ));
    }

    let mut entries = Vec::with_capacity(nnz);
    let mut seen = HashSet::with_capacity(nnz);
    let mut last_line = size_line;
    for (line, content) in body {
        last_line = line;
        if entries.len() == nnz {
            return Err(parse_error(
                source,
                line,
                format!("more entries than the {nnz} declared"),
            ));
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(parse_error(
                source,
                line,
                format!("expected 'row col value', got {content:?}"),
            ));
        }
        let i = parse_index(toks[0], n_rows, "row", source, line)?;
        let j = parse_index(toks[1], n_cols, "column", source, line)?;
        let v: f64 = toks[2]
            .parse()
            .map_err(|_| parse_error(source, line, format!("invalid value {:?}", toks[2])))?;
        if !(v.is_finite() && v > 0.0) {
            return Err(parse_error(
                source,
                line,
                format!("value {v} at ({}, {}) must be finite and > 0", i + 1, j + 1),
            ));
        }
        if !seen.insert((i, j)) {
            return Err(parse_error(
                source,
                line,
                format!("duplicate entry ({}, {})", i + 1, j + 1),
            ));
        }
        entries.push((i, j, v));
    }
    if entries.len() != nnz {
        return Err(parse_error(
            source,
            last_line,
            format!("expected {nnz} entries, found {}", entries.len()),
        ));
    }
    SparseNonnegMatrix::new(n_rows, n_cols, entries)
}

/// Writes `m` as a Matrix Market coordinate file in its stored entry order.
pub fn write_matrix_market<W: Write>(m: &SparseNonnegMatrix, mut w: W) -> Result<()> {
    writeln!(w, "{MM_BANNER} matrix coordinate real general")?;
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), m.nnz())?;
    for (i, j, v) in m.entries() {
        writeln!(w, "{} {} {}", i + 1, j + 1, format_f64(v))?;
    }
    Ok(())
}

/// Parses a targets file: one number per line.
pub fn parse_targets(text: &str, source: &str) -> Result<Vec<f64>> {
    let values = content_lines(text, "#")
        .map(|(line, l)| {
            l.parse::<f64>()
                .map_err(|_| parse_error(source, line, format!("invalid number {l:?}")))
        })
        .collect::<Result<Vec<_>>>()?;
    if values.is_empty() {
        return Err(parse_error(source, 1, "no target values"));
    }
    Ok(values)
}

/// Parses an edge list with an `n_left n_right` header line.
pub fn parse_edge_list(text: &str, source: &str) -> Result<BipartiteGraph> {
    let mut lines = content_lines(text, "#");
    let (hline, header) = lines
        .next()
        .ok_or_else(|| parse_error(source, 1, "missing 'n_left n_right' header"))?;
    let mut toks = header.split_whitespace();
    let n_left = parse_count(toks.next(), "left vertex count", source, hline)?;
    let n_right = parse_count(toks.next(), "right vertex count", source, hline)?;
    if toks.next().is_some() {
        return Err(parse_error(source, hline, "header has extra fields"));
    }
    if n_left == 0 || n_right == 0 {
        return Err(parse_error(source, hline, "vertex counts must be positive"));
    }
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for (line, content) in lines {
        let toks: Vec<&str> = content.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(parse_error(
                source,
                line,
                format!("expected 'left right', got {content:?}"),
            ));
        }
        let u = parse_index(toks[0], n_left, "left", source, line)?;
        let v = parse_index(toks[1], n_right, "right", source, line)?;
        if !seen.insert((u, v)) {
            return Err(parse_error(
                source,
                line,
                format!("duplicate edge ({}, {})", u + 1, v + 1),
            ));
        }
        edges.push((u, v));
    }
    BipartiteGraph::new(n_left, n_right, edges)
}

/// Writes `g` in the edge-list format read by [`parse_edge_list`].
pub fn write_edge_list<W: Write>(g: &BipartiteGraph, mut w: W) -> Result<()> {
    writeln!(w, "{} {}", g.n_left(), g.n_right())?;
    for &(u, v) in g.edges() {
        writeln!(w, "{} {}", u + 1, v + 1)?;
    }
    Ok(())
}

/// Writes one CSV row per recorded half-step. `pot_Z` is empty when the run
/// had no witness.
pub fn write_trace_csv<W: Write>(trace: &IterationTrace, mut w: W) -> Result<()> {
    let mut buf = String::from("t,phase,err1,err2,kl_row,kl_col,pot_Z\n");
    for r in &trace.records {
        let pot = r.potential.map(format_f64).unwrap_or_default();
        let _ = writeln!(
            buf,
            "{},{},{},{},{},{},{}",
            r.t,
            r.phase.label(),
            format_f64(r.err1),
            format_f64(r.err2),
            format_f64(r.kl_row),
            format_f64(r.kl_col),
            pot
        );
    }
    w.write_all(buf.as_bytes())?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(path)?)
}

pub fn read_matrix_market(path: &Path) -> Result<SparseNonnegMatrix> {
    parse_matrix_market(&read(path)?, &path.display().to_string())
}

pub fn read_targets(path: &Path) -> Result<Vec<f64>> {
    parse_targets(&read(path)?, &path.display().to_string())
}

pub fn read_edge_list(path: &Path) -> Result<BipartiteGraph> {
    parse_edge_list(&read(path)?, &path.display().to_string())
}
