//! Grid function import/export: CSV for node values (index columns plus a
//! value column, node-index order) and a JSON sidecar for the grid itself.
//! Round-trips are bit-exact: values are printed with 17 significant
//! digits after the point, enough to reconstruct every f64 exactly.

use super::{GridFunction, HGrid};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

/// Sidecar description of a grid and the Dirichlet flag of the stored
/// function.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct GridMeta {
    pub n: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub shape: Vec<usize>,
    pub dirichlet: bool,
}

impl GridMeta {
    pub fn of(u: &GridFunction) -> GridMeta {
        let g = u.grid();
        GridMeta {
            n: g.n(),
            lower: g.lower().to_vec(),
            upper: g.upper().to_vec(),
            shape: g.shape().to_vec(),
            dirichlet: u.is_dirichlet(),
        }
    }

    pub fn build_grid(&self) -> Result<Arc<HGrid>> {
        HGrid::new(self.n, self.lower.clone(), self.upper.clone(), self.shape.clone())
    }
}

fn axis_letter(axis: usize) -> Result<char> {
    // i, j, k, ... per axis; 18 letters cover n <= 8
    let c = b'i' + u8::try_from(axis).map_err(|_| {
        Error::InvalidParameter("too many axes for CSV header letters".into())
    })?;
    if c > b'z' {
        return Err(Error::InvalidParameter(
            "too many axes for CSV header letters".into(),
        ));
    }
    Ok(c as char)
}

/// Write `u` as CSV (header `i,j,k,...,value`) plus the JSON grid sidecar.
pub fn save(u: &GridFunction, csv_path: &Path, meta_path: &Path) -> Result<()> {
    let grid = u.grid();
    let axes = grid.axes();
    let mut out = String::new();
    for a in 0..axes {
        out.push(axis_letter(a)?);
        out.push(',');
    }
    out.push_str("value\n");
    for lin in 0..grid.node_count() {
        for a in 0..axes {
            out.push_str(&grid.axis_pos(lin, a).to_string());
            out.push(',');
        }
        out.push_str(&format!("{:.17e}\n", u.value(lin)));
    }
    let mut f = fs::File::create(csv_path)?;
    f.write_all(out.as_bytes())?;

    let meta = GridMeta::of(u);
    let mut f = fs::File::create(meta_path)?;
    f.write_all(serde_json::to_string_pretty(&meta).unwrap().as_bytes())?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Read a grid function back from `save` output.
pub fn load(csv_path: &Path, meta_path: &Path) -> Result<GridFunction> {
    let meta: GridMeta = serde_json::from_str(&fs::read_to_string(meta_path)?)
        .map_err(|e| Error::Parse(format!("grid sidecar: {e}")))?;
    let grid = meta.build_grid()?;
    let axes = grid.axes();

    let text = fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty CSV".into()))?;
    let mut expected_header = String::new();
    for a in 0..axes {
        expected_header.push(axis_letter(a)?);
        expected_header.push(',');
    }
    expected_header.push_str("value");
    if header.trim() != expected_header {
        return Err(Error::Parse(format!(
            "unexpected CSV header {header:?}, expected {expected_header:?}"
        )));
    }

    let mut values = vec![0.0; grid.node_count()];
    let mut count = 0usize;
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != axes + 1 {
            return Err(Error::Parse(format!(
                "row {row}: expected {} columns, got {}",
                axes + 1,
                cols.len()
            )));
        }
        let mut lin = 0usize;
        for a in 0..axes {
            let pos: usize = cols[a]
                .trim()
                .parse()
                .map_err(|e| Error::Parse(format!("row {row}, axis {a}: {e}")))?;
            if pos >= grid.shape()[a] {
                return Err(Error::Parse(format!(
                    "row {row}: index {pos} out of range on axis {a}"
                )));
            }
            lin += pos * grid.strides()[a];
        }
        let v: f64 = cols[axes]
            .trim()
            .parse()
            .map_err(|e| Error::Parse(format!("row {row}, value: {e}")))?;
        values[lin] = v;
        count += 1;
    }
    if count != grid.node_count() {
        return Err(Error::Parse(format!(
            "expected {} rows, got {count}",
            grid.node_count()
        )));
    }
    if meta.dirichlet {
        GridFunction::dirichlet(grid, values)
    } else {
        GridFunction::new(grid, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn roundtrip_is_bit_exact() {
        let dir = std::env::temp_dir().join("hpicone_io_test");
        fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("u.csv");
        let meta = dir.join("u.grid.json");

        let grid = HGrid::new(
            1,
            vec![-0.25, 0.1, -1.0],
            vec![1.75, 2.3, 1.0],
            vec![5, 4, 3],
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let values: Vec<f64> = (0..grid.node_count())
            .map(|_| rng.random_range(-1.0..1.0) * 1e3_f64.powi(rng.random_range(-2..3)))
            .collect();
        let u = GridFunction::dirichlet(grid, values).unwrap();

        save(&u, &csv, &meta).unwrap();
        let v = load(&csv, &meta).unwrap();
        assert!(v.is_dirichlet());
        assert!(u.bit_equal(&v), "reload must reproduce every bit");
        assert_eq!(*u.grid().as_ref(), *v.grid().as_ref());

        // saving the reloaded function reproduces the bytes
        let csv2 = dir.join("u2.csv");
        let meta2 = dir.join("u2.grid.json");
        save(&v, &csv2, &meta2).unwrap();
        assert_eq!(fs::read(&csv).unwrap(), fs::read(&csv2).unwrap());
        assert_eq!(fs::read(&meta).unwrap(), fs::read(&meta2).unwrap());
    }

    #[test]
    fn header_is_letters_then_value() {
        let dir = std::env::temp_dir().join("hpicone_io_header");
        fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("w.csv");
        let meta = dir.join("w.grid.json");
        let grid = HGrid::unit_box(1, 3).unwrap();
        let u = GridFunction::zeros(grid, false);
        save(&u, &csv, &meta).unwrap();
        let text = fs::read_to_string(&csv).unwrap();
        assert!(text.starts_with("i,j,k,value\n"));
    }

    #[test]
    fn malformed_rows_are_rejected() {
        let dir = std::env::temp_dir().join("hpicone_io_bad");
        fs::create_dir_all(&dir).unwrap();
        let csv = dir.join("bad.csv");
        let meta = dir.join("bad.grid.json");
        let grid = HGrid::unit_box(1, 3).unwrap();
        let u = GridFunction::zeros(grid, false);
        save(&u, &csv, &meta).unwrap();

        let good = fs::read_to_string(&csv).unwrap();
        fs::write(&csv, good.replace("i,j,k,value", "a,b,c,value")).unwrap();
        assert!(matches!(load(&csv, &meta), Err(Error::Parse(_))));
    }
}
