//! File formats.
//!
//! * Points: CSV without header, one point per row, `#` comments. With
//!   `complex` set, columns pair up as `(re, im)`.
//! * Matrices: CSV without header, entries written with `{:.16e}`.
//! * Functions: JSON array of piecewise functions.
//! * Graphs: CSV edge list, two node labels per row.
//! * Specs and weights: JSON, see [`crate::kernels::SpecJson`] and
//!   [`crate::function_space::Weight`].

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::function_space::{PiecewiseFunction, Weight};
use crate::graph::Graph;
use crate::kernels::{KernelSpec, MetricSpec, Point};
use crate::linalg::SymMatrix;

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r)
}

fn records<R: Read>(r: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in csv_reader(r).records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let fields: Vec<String> = rec.iter().map(str::to_string).collect();
        if fields.iter().all(String::is_empty) {
            continue;
        }
        out.push((line, fields));
    }
    Ok(out)
}

fn numbers(line: usize, fields: &[String]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::Parse(format!("line {line}: {f:?} is not a number")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Parse(format!("line {line}: {f:?} is not finite")))
            }
        })
        .collect()
}

pub fn parse_points<R: Read>(r: R, complex: bool) -> Result<Vec<Point>> {
    let rows = records(r)?;
    if rows.is_empty() {
        return Err(Error::Parse("points file contains no points".into()));
    }
    let mut dim = None;
    let mut points = Vec::with_capacity(rows.len());
    for (line, fields) in rows {
        let vals = numbers(line, &fields)?;
        let coords: Vec<Complex64> = if complex {
            if vals.len() % 2 != 0 {
                return Err(Error::Parse(format!(
                    "line {line}: complex points need an even number of columns (re, im pairs), got {}",
                    vals.len()
                )));
            }
            vals.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
        } else {
            vals.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        };
        match dim {
            None => dim = Some(coords.len()),
            Some(d) if d != coords.len() => {
                return Err(Error::Parse(format!(
                    "line {line}: point has dimension {}, earlier points have {d}",
                    coords.len()
                )))
            }
            _ => {}
        }
        points.push(Point::new(coords).map_err(|e| Error::Parse(format!("line {line}: {e}")))?);
    }
    Ok(points)
}

pub fn read_points(path: &Path, complex: bool) -> Result<Vec<Point>> {
    parse_points(File::open(path)?, complex)
}

pub fn write_matrix<W: Write>(w: W, m: &SymMatrix) -> Result<()> {
    let mut wtr = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    for i in 0..m.n() {
        wtr.write_record(m.row(i).iter().map(|v| format!("{v:.16e}")))?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn matrix_to_csv(m: &SymMatrix) -> String {
    let mut buf = Vec::new();
    write_matrix(&mut buf, m).expect("writing to memory");
    String::from_utf8(buf).expect("ascii output")
}

pub fn parse_matrix<R: Read>(r: R) -> Result<SymMatrix> {
    let rows: Vec<Vec<f64>> = records(r)?
        .into_iter()
        .map(|(line, fields)| numbers(line, &fields))
        .collect::<Result<_>>()?;
    SymMatrix::from_rows(&rows)
}

pub fn parse_functions<R: Read>(r: R) -> Result<Vec<PiecewiseFunction>> {
    let fs: Vec<PiecewiseFunction> = serde_json::from_reader(r)?;
    if fs.is_empty() {
        return Err(Error::Parse("functions file contains no functions".into()));
    }
    Ok(fs)
}

pub fn read_functions(path: &Path) -> Result<Vec<PiecewiseFunction>> {
    parse_functions(File::open(path)?)
}

pub fn parse_edges<R: Read>(r: R) -> Result<Graph> {
    let mut edges = Vec::new();
    for (line, fields) in records(r)? {
        match fields.as_slice() {
            [a, b] if !a.is_empty() && !b.is_empty() => edges.push((a.clone(), b.clone())),
            _ => {
                return Err(Error::Parse(format!(
                    "line {line}: expected two node labels, got {:?}",
                    fields
                )))
            }
        }
    }
    if edges.is_empty() {
        return Err(Error::Parse("edge list is empty".into()));
    }
    Graph::from_edge_list(&edges)
}

pub fn read_edges(path: &Path) -> Result<Graph> {
    parse_edges(File::open(path)?)
}

pub fn read_kernel_spec(path: &Path) -> Result<KernelSpec> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

pub fn read_metric_spec(path: &Path) -> Result<MetricSpec> {
    Ok(serde_json::from_reader(File::open(path)?)?)
}

/// `gaussian`, `gaussian:<scale>`, `indicator:<lo>:<hi>`, or a path to a
/// JSON weight file.
pub fn parse_weight(spec: &str) -> Result<Weight> {
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("weight spec {spec:?}: {s:?} is not a number")))
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let w = match parts.as_slice() {
        ["gaussian"] => Weight::Gaussian { scale: 1.0 },
        ["gaussian", s] => Weight::Gaussian { scale: num(s)? },
        ["indicator", lo, hi] => Weight::Indicator { lo: num(lo)?, hi: num(hi)? },
        _ if spec.ends_with(".json") => serde_json::from_reader(File::open(spec)?)?,
        _ => {
            return Err(Error::Parse(format!(
                "unknown weight {spec:?}; expected gaussian, gaussian:<scale>, indicator:<lo>:<hi> or a .json file"
            )))
        }
    };
    w.validate()?;
    Ok(w)
}
