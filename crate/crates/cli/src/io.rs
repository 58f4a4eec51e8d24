//! CSV input and output for point, edge-list and result files.

use std::fs::File;
use std::io::{self, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use frechet::spaces::{MetricTree, PointFormat};

/// Numeric rows of a headerless CSV file, with 1-based line numbers. Lines
/// starting with `#` are skipped, as is a first line with no numeric field.
pub fn read_rows(path: &Path) -> Result<Vec<(usize, Vec<f64>)>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut rows = Vec::new();
    for (k, rec) in reader.records().enumerate() {
        let rec = rec.with_context(|| format!("{}: malformed CSV", path.display()))?;
        let line = rec.position().map_or(k + 1, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        if rows.is_empty() && k == 0 && rec.iter().all(|f| f.parse::<f64>().is_err()) {
            continue;
        }
        let row = rec
            .iter()
            .enumerate()
            .map(|(j, f)| {
                f.parse::<f64>()
                    .map_err(|_| anyhow!("{} line {line}, column {}: not a number: {f:?}", path.display(), j + 1))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push((line, row));
    }
    if rows.is_empty() {
        bail!("{}: no rows", path.display());
    }
    Ok(rows)
}

pub fn read_points<S: PointFormat>(space: &S, path: &Path) -> Result<Vec<S::Point>> {
    read_rows(path)?
        .into_iter()
        .map(|(line, row)| {
            space
                .point_from_row(&row)
                .map_err(|e| anyhow!("{} line {line}: {e}", path.display()))
        })
        .collect()
}

/// Edge list `node_a,node_b,length`.
pub fn read_tree(path: &Path) -> Result<MetricTree> {
    let mut edges = Vec::new();
    for (line, row) in read_rows(path)? {
        if row.len() != 3 {
            bail!("{} line {line}: expected node_a,node_b,length", path.display());
        }
        let node = |v: f64| -> Result<usize> {
            if v >= 0.0 && v.fract() == 0.0 {
                Ok(v as usize)
            } else {
                bail!("{} line {line}: node ids must be nonnegative integers", path.display())
            }
        };
        edges.push((node(row[0])?, node(row[1])?, row[2]));
    }
    MetricTree::new(&edges).map_err(|e| anyhow!("{}: {e}", path.display()))
}

/// Shortest decimal form that round-trips.
pub fn format_row(row: &[f64]) -> String {
    row.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")
}

/// Opens `path`, or standard output when `None`.
pub fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p).with_context(|| format!("cannot create {}", p.display()))?),
        None => Box::new(io::stdout().lock()),
    })
}

pub fn write_point<S: PointFormat>(space: &S, p: &S::Point, path: Option<&Path>) -> Result<()> {
    let mut out = output(path)?;
    writeln!(out, "{}", format_row(&space.point_to_row(p)))?;
    out.flush()?;
    Ok(())
}

/// `%.{digits}g`-style formatting.
pub fn significant(v: f64, digits: usize) -> String {
    if v == 0.0 || !v.is_finite() {
        return v.to_string();
    }
    let trim = |s: String| -> String {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    // Rounding can carry into the next decade; the scientific form handles it.
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, e) = sci.split_once('e').expect("scientific format");
    let e: i32 = e.parse().expect("exponent");
    if e < -4 || e >= digits as i32 {
        return format!("{}e{}", trim(mantissa.to_string()), e);
    }
    let decimals = (digits as i32 - 1 - e).max(0) as usize;
    trim(format!("{:.*}", decimals, v))
}
