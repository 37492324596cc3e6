//! Sequence and label CSV formats.
//!
//! Sequences: header `sample_id,t,c0,...,c{d-1}`, one row per (sequence,
//! step), `.`-decimal UTF-8. Labels: header `sample_id,l0,...,l{L-1}`.
//! Values print in shortest round-trip form, so write-then-read is exact.

use crate::numerics::{Matrix, Tensor3};
use crate::recurrent::SequenceBatch;
use crate::{Error, Result};
use std::io::Write;
use std::path::Path;

pub fn write_sequences(path: &Path, batch: &SequenceBatch) -> Result<()> {
    let (n, t_len, d) = batch.data.shape();
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..d).map(|c| format!("c{c}")).collect();
    writeln!(out, "sample_id,t,{}", header.join(","))?;
    for i in 0..n {
        for t in 0..t_len {
            let row: Vec<String> = batch
                .data
                .step(i, t)
                .iter()
                .map(|v| format!("{v}"))
                .collect();
            writeln!(out, "{i},{t},{}", row.join(","))?;
        }
    }
    Ok(())
}

pub fn read_sequences(path: &Path) -> Result<SequenceBatch> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "sample_id" || cols[1] != "t" {
        return Err(Error::Parse(format!(
            "{}: expected header sample_id,t,c0,...",
            path.display()
        )));
    }
    let d = cols.len() - 2;

    let mut rows: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != d + 2 {
            return Err(Error::Parse(format!(
                "{} line {}: {} fields, expected {}",
                path.display(),
                lineno + 2,
                fields.len(),
                d + 2
            )));
        }
        let parse_idx = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad index {s:?}")))
        };
        let i = parse_idx(fields[0])?;
        let t = parse_idx(fields[1])?;
        let mut vals = Vec::with_capacity(d);
        for f in &fields[2..] {
            vals.push(
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {f:?}")))?,
            );
        }
        rows.push((i, t, vals));
    }
    if rows.is_empty() {
        return Err(Error::Parse(format!("{}: no data rows", path.display())));
    }
    let n = rows.iter().map(|r| r.0).max().unwrap() + 1;
    let t_len = rows.iter().map(|r| r.1).max().unwrap() + 1;
    if rows.len() != n * t_len {
        return Err(Error::Parse(format!(
            "{}: {} rows do not form a full {n}x{t_len} grid",
            path.display(),
            rows.len()
        )));
    }
    let mut data = Tensor3::zeros(n, t_len, d);
    for (i, t, vals) in rows {
        data.step_mut(i, t).copy_from_slice(&vals);
    }
    Ok(SequenceBatch::new(data))
}

pub fn write_labels(path: &Path, labels: &Matrix) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let header: Vec<String> = (0..labels.cols()).map(|c| format!("l{c}")).collect();
    writeln!(out, "sample_id,{}", header.join(","))?;
    for i in 0..labels.rows() {
        let row: Vec<String> = labels.row(i).iter().map(|v| format!("{v}")).collect();
        writeln!(out, "{i},{}", row.join(","))?;
    }
    Ok(())
}

pub fn read_labels(path: &Path) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse(format!("{}: empty file", path.display())))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 2 || cols[0] != "sample_id" {
        return Err(Error::Parse(format!(
            "{}: expected header sample_id,l0,...",
            path.display()
        )));
    }
    let l = cols.len() - 1;
    let mut rows: Vec<(usize, Vec<f64>)> = Vec::new();
    for line in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != l + 1 {
            return Err(Error::Parse(format!(
                "{}: label row has {} fields, expected {}",
                path.display(),
                fields.len(),
                l + 1
            )));
        }
        let i = fields[0]
            .parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad index {:?}", fields[0])))?;
        let vals: Result<Vec<f64>> = fields[1..]
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|_| Error::Parse(format!("bad value {f:?}")))
            })
            .collect();
        rows.push((i, vals?));
    }
    let n = rows.iter().map(|r| r.0).max().map_or(0, |m| m + 1);
    if rows.len() != n {
        return Err(Error::Parse(format!(
            "{}: {} label rows for {} sample ids",
            path.display(),
            rows.len(),
            n
        )));
    }
    let mut m = Matrix::zeros(n, l);
    for (i, vals) in rows {
        m.row_mut(i).copy_from_slice(&vals);
    }
    Ok(m)
}
