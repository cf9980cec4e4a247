//! Field persistence.
//!
//! Binary container, all numbers little-endian:
//!
//! | bytes | content                                  |
//! |-------|------------------------------------------|
//! | 8     | magic `b"WFIELD01"`                      |
//! | 4     | `n` as `u32`                             |
//! | 8     | `R` as `f64`                             |
//! | 8     | `h` as `f64`                             |
//! | 8     | time stamp (`tau` or `t`) as `f64`       |
//! | 8     | node count as `u64`                      |
//! | 8 * N | node values as `f64`, row-major, `y_n` fastest |
//!
//! The CSV form has a header `y1,..,yn,value` and one row per node, with
//! floats written to 17 significant digits.

use std::io::{Read, Write};

use crate::field::WeightedField;
use crate::grid::HalfSpaceGrid;
use crate::{CalcError, Result};

const MAGIC: &[u8; 8] = b"WFIELD01";

pub fn write_binary<W: Write>(field: &WeightedField, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    w.write_all(&(g.dim() as u32).to_le_bytes())?;
    w.write_all(&g.radius().to_le_bytes())?;
    w.write_all(&g.spacing().to_le_bytes())?;
    w.write_all(&field.time().to_le_bytes())?;
    w.write_all(&(g.len() as u64).to_le_bytes())?;
    for v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

fn read_array<const N: usize, R: Read>(r: &mut R) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)?;
    Ok(buf)
}

pub fn read_binary<R: Read>(mut r: R) -> Result<WeightedField> {
    let magic: [u8; 8] = read_array(&mut r)?;
    if &magic != MAGIC {
        return Err(CalcError::Format("bad magic".into()));
    }
    let n = u32::from_le_bytes(read_array(&mut r)?) as usize;
    let radius = f64::from_le_bytes(read_array(&mut r)?);
    let h = f64::from_le_bytes(read_array(&mut r)?);
    let time = f64::from_le_bytes(read_array(&mut r)?);
    let len = u64::from_le_bytes(read_array(&mut r)?) as usize;
    let grid = HalfSpaceGrid::new(n, radius, h)?;
    if grid.len() != len {
        return Err(CalcError::Format(format!(
            "header node count {len} does not match grid ({})",
            grid.len()
        )));
    }
    let mut values = Vec::with_capacity(len);
    for _ in 0..len {
        values.push(f64::from_le_bytes(read_array(&mut r)?));
    }
    WeightedField::new(grid, values, time)
}

/// Format a float with 17 significant digits (round-trip exact).
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(field: &WeightedField, mut w: W) -> Result<()> {
    let g = field.grid();
    let n = g.dim();
    let header: Vec<String> = (1..=n).map(|a| format!("y{a}")).collect();
    writeln!(w, "{},value", header.join(","))?;
    for (i, v) in field.values().iter().enumerate() {
        let y = g.coord(i);
        let mut row: Vec<String> = y[..n].iter().map(|c| fmt_f64(*c)).collect();
        row.push(fmt_f64(*v));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::make_grid;

    #[test]
    fn binary_round_trip_is_exact() {
        let g = make_grid(3, 1.5, 0.5).unwrap();
        let f = WeightedField::from_fn(&g, |y| (y[0] * 1.3).sin() + y[2] / 3.0).with_time(0.7);
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn corrupted_header_is_rejected() {
        let g = make_grid(2, 1.0, 0.5).unwrap();
        let f = WeightedField::zeros(&g);
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        buf[0] = b'X';
        assert!(matches!(read_binary(buf.as_slice()), Err(CalcError::Format(_))));
    }

    #[test]
    fn csv_has_header_and_one_row_per_node() {
        let g = make_grid(2, 1.0, 0.5).unwrap();
        let f = WeightedField::from_fn(&g, |y| y[0] + y[1]);
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "y1,y2,value");
        assert_eq!(lines.len(), g.len() + 1);
        let last: Vec<f64> = lines[1].split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(last, vec![-1.0, 0.0, -1.0]);
    }
}
