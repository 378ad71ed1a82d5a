//! Binary grid dumps (8-line ASCII header then little-endian f64 values) and CSV exchange.

use std::io::{BufRead, BufReader, Read, Write};

use super::{GridSpec, SampledFunction};
use crate::error::{Error, Result};

const MAGIC: &str = "morrey-lab grid dump v1";

pub fn write_dump(mut w: impl Write, f: &SampledFunction) -> Result<()> {
    let g = f.grid();
    let lower: Vec<String> = g.lower().iter().map(|v| v.to_string()).collect();
    writeln!(w, "{MAGIC}")?;
    writeln!(w, "dim {}", g.dim())?;
    writeln!(w, "half_width {}", g.half_width())?;
    writeln!(w, "points_per_axis {}", g.points_per_axis())?;
    writeln!(w, "periodic {}", u8::from(g.periodic()))?;
    writeln!(w, "lower {}", lower.join(" "))?;
    writeln!(w, "count {}", g.len())?;
    writeln!(w, "data f64-le")?;
    let mut bytes = Vec::with_capacity(8 * g.len());
    for v in f.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&bytes)?;
    Ok(())
}

pub fn read_dump(r: impl Read) -> Result<SampledFunction> {
    let mut r = BufReader::new(r);
    let mut lines = Vec::with_capacity(8);
    for _ in 0..8 {
        let mut line = String::new();
        if r.read_line(&mut line)? == 0 {
            return Err(Error::Format("truncated dump header".into()));
        }
        lines.push(line.trim_end().to_string());
    }
    if lines[0] != MAGIC {
        return Err(Error::Format(format!(
            "unexpected header line {:?}",
            lines[0]
        )));
    }
    let field = |i: usize, key: &str| -> Result<String> {
        lines[i]
            .strip_prefix(key)
            .and_then(|s| s.strip_prefix(' '))
            .map(str::to_string)
            .ok_or_else(|| Error::Format(format!("expected `{key}` on header line {}", i + 1)))
    };
    let dim: usize = parse(&field(1, "dim")?)?;
    let half_width: f64 = parse(&field(2, "half_width")?)?;
    let points: usize = parse(&field(3, "points_per_axis")?)?;
    let periodic = match field(4, "periodic")?.as_str() {
        "0" => false,
        "1" => true,
        other => return Err(Error::Format(format!("bad periodic flag {other:?}"))),
    };
    let lower: Vec<f64> = field(5, "lower")?
        .split_whitespace()
        .map(parse)
        .collect::<Result<_>>()?;
    let count: usize = parse(&field(6, "count")?)?;
    if field(7, "data")? != "f64-le" {
        return Err(Error::Format("only f64-le data is supported".into()));
    }
    let grid = GridSpec::new(dim, half_width, points, periodic)?.with_lower(&lower)?;
    if count != grid.len() {
        return Err(Error::Format(format!(
            "count {count} does not match grid size {}",
            grid.len()
        )));
    }
    let mut bytes = vec![0u8; 8 * count];
    r.read_exact(&mut bytes)
        .map_err(|_| Error::Format("truncated dump payload".into()))?;
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    SampledFunction::new(grid, values)
}

fn parse<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {s:?}")))
}

/// CSV with a `#` grid line, a header `x1,…,value` and one row per node.
pub fn write_csv(w: impl Write, f: &SampledFunction) -> Result<()> {
    let g = f.grid();
    let mut w = w;
    let lower: Vec<String> = g.lower().iter().map(|v| v.to_string()).collect();
    writeln!(
        w,
        "# dim={} half_width={} points_per_axis={} periodic={} lower={}",
        g.dim(),
        g.half_width(),
        g.points_per_axis(),
        g.periodic(),
        lower.join(";")
    )?;
    let mut out = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (1..=g.dim()).map(|a| format!("x{a}")).collect();
    header.push("value".into());
    out.write_record(&header).map_err(csv_err)?;
    let mut x = vec![0.0; g.dim()];
    for (k, v) in f.values().iter().enumerate() {
        g.point_into(k, &mut x);
        let mut row: Vec<String> = x.iter().map(|c| c.to_string()).collect();
        row.push(v.to_string());
        out.write_record(&row).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_csv(r: impl Read) -> Result<SampledFunction> {
    let mut r = BufReader::new(r);
    let mut first = String::new();
    r.read_line(&mut first)?;
    let spec = first
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| Error::Format("missing `#` grid line".into()))?;
    let mut dim = None;
    let mut half_width = None;
    let mut points = None;
    let mut periodic = None;
    let mut lower = None;
    for kv in spec.split_whitespace() {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad grid field {kv:?}")))?;
        match k {
            "dim" => dim = Some(parse::<usize>(v)?),
            "half_width" => half_width = Some(parse::<f64>(v)?),
            "points_per_axis" => points = Some(parse::<usize>(v)?),
            "periodic" => periodic = Some(parse::<bool>(v)?),
            "lower" => lower = Some(v.split(';').map(parse).collect::<Result<Vec<f64>>>()?),
            _ => return Err(Error::Format(format!("unknown grid field {k:?}"))),
        }
    }
    let missing = |name: &str| Error::Format(format!("grid line lacks {name}"));
    let grid = GridSpec::new(
        dim.ok_or_else(|| missing("dim"))?,
        half_width.ok_or_else(|| missing("half_width"))?,
        points.ok_or_else(|| missing("points_per_axis"))?,
        periodic.ok_or_else(|| missing("periodic"))?,
    )?;
    let grid = match lower {
        Some(l) => grid.with_lower(&l)?,
        None => grid,
    };
    let mut rows = csv::Reader::from_reader(r);
    let mut values = vec![0.0; grid.len()];
    let mut seen = vec![false; grid.len()];
    for rec in rows.records() {
        let rec = rec.map_err(csv_err)?;
        if rec.len() != grid.dim() + 1 {
            return Err(Error::Format(format!("row with {} fields", rec.len())));
        }
        let x: Vec<f64> = rec
            .iter()
            .take(grid.dim())
            .map(parse)
            .collect::<Result<_>>()?;
        let k = grid
            .node_index(&x)
            .ok_or_else(|| Error::Format(format!("row at {x:?} is not a grid node")))?;
        values[k] = parse(&rec[grid.dim()])?;
        seen[k] = true;
    }
    if let Some(k) = seen.iter().position(|s| !s) {
        return Err(Error::Format(format!("node {:?} missing", grid.point(k))));
    }
    SampledFunction::new(grid, values)
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{make_grid, sample};

    #[test]
    fn dump_roundtrip() {
        let g = make_grid(2, 1.5, 8, true).unwrap();
        let f = sample(&g, |x| (x[0] * 3.0).sin() + x[1]).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &f).unwrap();
        let header = String::from_utf8_lossy(&buf[..200]);
        assert_eq!(header.lines().take(8).count(), 8);
        assert_eq!(read_dump(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn csv_roundtrip() {
        let g = make_grid(2, 1.0, 4, false)
            .unwrap()
            .with_lower(&[0.0, -1.0])
            .unwrap();
        let f = sample(&g, |x| x[0] - 2.0 * x[1]).unwrap();
        let mut buf = Vec::new();
        write_csv(&mut buf, &f).unwrap();
        assert_eq!(read_csv(buf.as_slice()).unwrap(), f);
    }

    #[test]
    fn truncated_payload() {
        let g = make_grid(1, 1.0, 8, false).unwrap();
        let mut buf = Vec::new();
        write_dump(&mut buf, &SampledFunction::constant(&g, 1.0)).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_dump(buf.as_slice()), Err(Error::Format(_))));
    }
}
