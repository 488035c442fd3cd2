//! CSV and heatmap writers.
//!
//! CSV: comma-delimited, one header row, LF line endings, numbers as
//! `{:.16e}` (17 significant digits, round-trips every f64), `NaN` for
//! unavailable values. `stable` is written as 1/0.
//!
//! Heatmaps are binary PPM (P6) images. Axis 1 runs left to right and axis
//! 2 bottom to top, one `CELL`×`CELL` pixel block per grid point. Values are
//! mapped linearly from the field's minimum to its maximum over the
//! available points onto a five-stop perceptual scale (dark purple, blue,
//! teal, green, yellow). Points whose value is unavailable (unstable,
//! failed, or NaN) are painted pure red, which the scale never produces.

use std::path::Path;

use thiserror::Error;

use super::sweep::{Field, Table};

pub const CELL: usize = 8;
pub const SENTINEL: [u8; 3] = [255, 0, 0];
pub const COLOR_STOPS: [[u8; 3]; 5] = [
    [68, 1, 84],
    [59, 82, 139],
    [33, 145, 140],
    [94, 201, 98],
    [253, 231, 37],
];

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Shape(String),
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), OutputError> {
    std::fs::write(path, bytes).map_err(|source| OutputError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn number(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn csv_string(table: &Table) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    // writing into a Vec cannot fail
    w.write_record(table.columns()).expect("in-memory write");
    for row in &table.rows {
        let mut fields: Vec<String> = row.axes.iter().chain(&row.values).map(|&x| number(x)).collect();
        fields.push(if row.stable { "1" } else { "0" }.into());
        fields.push(number(row.steady_residual));
        fields.push(number(row.lyapunov_residual));
        fields.push(row.status.name().into());
        w.write_record(&fields).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII fields")
}

pub fn emit_csv(table: &Table, path: &Path) -> Result<(), OutputError> {
    if table.rows.is_empty() {
        return Err(OutputError::Shape("refusing to write an empty table".into()));
    }
    write_file(path, csv_string(table).as_bytes())
}

/// Color of `t ∈ [0, 1]` on the documented scale.
pub fn colormap(t: f64) -> [u8; 3] {
    let t = t.clamp(0.0, 1.0) * (COLOR_STOPS.len() - 1) as f64;
    let i = (t.floor() as usize).min(COLOR_STOPS.len() - 2);
    let f = t - i as f64;
    let (a, b) = (COLOR_STOPS[i], COLOR_STOPS[i + 1]);
    std::array::from_fn(|k| (a[k] as f64 + f * (b[k] as f64 - a[k] as f64)).round() as u8)
}

/// Encodes `field` over a 2-D table as a P6 image.
pub fn render_heatmap(table: &Table, field: Field) -> Result<Vec<u8>, OutputError> {
    let (n1, n2) = table.shape;
    if table.axis_labels.len() != 2 || table.rows.len() != n1 * n2 {
        return Err(OutputError::Shape("heatmaps need a complete two-axis grid".into()));
    }
    let values = table
        .column(field)
        .ok_or_else(|| OutputError::Shape(format!("table has no `{}` column", field.name())))?;
    let available = |i: usize| {
        let v = values[i];
        (table.rows[i].stable && v.is_finite()).then_some(v)
    };
    let (lo, hi) = (0..values.len())
        .filter_map(available)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    let (w, h) = (n1 * CELL, n2 * CELL);
    let mut out = format!("P6\n{w} {h}\n255\n").into_bytes();
    out.reserve(w * h * 3);
    for py in 0..h {
        // top pixel row shows the largest axis-2 value
        let j = n2 - 1 - py / CELL;
        for px in 0..w {
            let i = px / CELL;
            let color = match available(i * n2 + j) {
                None => SENTINEL,
                Some(v) if hi > lo => colormap((v - lo) / (hi - lo)),
                Some(_) => colormap(0.0),
            };
            out.extend_from_slice(&color);
        }
    }
    Ok(out)
}

pub fn emit_heatmap(table: &Table, field: Field, path: &Path) -> Result<(), OutputError> {
    write_file(path, &render_heatmap(table, field)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cli::sweep::{ResultRow, Status};

    fn table(values: &[f64], stable: &[bool], shape: (usize, usize)) -> Table {
        let rows = values
            .iter()
            .zip(stable)
            .enumerate()
            .map(|(k, (&v, &s))| ResultRow {
                axes: vec![(k / shape.1) as f64, (k % shape.1) as f64],
                values: vec![v],
                stable: s,
                steady_residual: 0.0,
                lyapunov_residual: f64::NAN,
                status: if s { Status::Ok } else { Status::Unstable },
                error: None,
            })
            .collect();
        Table {
            axis_labels: vec!["x".into(), "y".into()],
            outputs: vec![Field::EMb],
            shape,
            rows,
        }
    }

    fn pixels(img: &[u8]) -> Vec<[u8; 3]> {
        // header is three newline-terminated lines
        let mut newlines = 0;
        let start = img
            .iter()
            .position(|&b| {
                newlines += (b == b'\n') as usize;
                newlines == 3
            })
            .unwrap()
            + 1;
        img[start..].chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
    }

    #[test]
    fn csv_layout() {
        let t = table(&[1.0, 2.0, 3.0, f64::NAN], &[true, true, true, false], (2, 2));
        let s = csv_string(&t);
        let lines: Vec<&str> = s.split_terminator('\n').collect();
        assert_eq!(lines.len(), 5);
        assert!(s.ends_with('\n') && !s.contains('\r'));
        assert_eq!(lines[0], "x,y,E_mb,stable,steady_residual,lyapunov_residual,status");
        assert_eq!(
            lines[1],
            "0.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0,1,0.0000000000000000e0,NaN,ok"
        );
        assert!(lines[4].ends_with(",0,0.0000000000000000e0,NaN,unstable"));
        for line in &lines {
            assert_eq!(line.split(',').count(), 7);
        }
    }

    #[test]
    fn csv_numbers_round_trip() {
        let x = 0.1 + 0.2;
        let t = table(&[x], &[true], (1, 1));
        let s = csv_string(&t);
        let field = s.lines().nth(1).unwrap().split(',').nth(2).unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn constant_field_is_uniform() {
        let t = table(&[0.5; 6], &[true; 6], (3, 2));
        let img = render_heatmap(&t, Field::EMb).unwrap();
        assert!(img.starts_with(b"P6\n24 16\n255\n"));
        let px = pixels(&img);
        assert_eq!(px.len(), 24 * 16);
        assert!(px.iter().all(|&p| p == px[0]));
        assert_ne!(px[0], SENTINEL);
    }

    #[test]
    fn single_unstable_point_is_one_sentinel_cell() {
        let mut stable = [true; 9];
        stable[4] = false;
        let t = table(&[0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9], &stable, (3, 3));
        let px = pixels(&render_heatmap(&t, Field::EMb).unwrap());
        let red = px.iter().filter(|&&p| p == SENTINEL).count();
        assert_eq!(red, CELL * CELL);
    }

    #[test]
    fn orientation() {
        // value grows with axis 2, so the top-left pixel is the brightest
        let t = table(&[0.0, 1.0], &[true, true], (1, 2));
        let px = pixels(&render_heatmap(&t, Field::EMb).unwrap());
        assert_eq!(px[0], COLOR_STOPS[4]);
        assert_eq!(*px.last().unwrap(), COLOR_STOPS[0]);
    }

    #[test]
    fn colormap_never_hits_sentinel() {
        for k in 0..=1000 {
            assert_ne!(colormap(k as f64 / 1000.0), SENTINEL);
        }
        assert_eq!(colormap(0.0), COLOR_STOPS[0]);
        assert_eq!(colormap(1.0), COLOR_STOPS[4]);
    }

    #[test]
    fn shape_errors() {
        let mut t = table(&[1.0, 2.0], &[true, true], (2, 1));
        t.axis_labels.pop();
        assert!(render_heatmap(&t, Field::EMb).is_err());
        let t = table(&[1.0, 2.0], &[true, true], (1, 2));
        assert!(render_heatmap(&t, Field::ECb).is_err());
    }
}
