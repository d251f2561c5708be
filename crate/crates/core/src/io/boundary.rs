//! Sampled Gaussian-mixture boundary as CSV `r,p0,p1,a_tangent`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::io::{fmt_num, write_file};
use crate::witness::{boundary_point, tangent_slope, R_P1_MAX};

pub const MAX_SAMPLES: usize = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRow {
    pub r: f64,
    pub p0: f64,
    pub p1: f64,
    /// Tangent slope; `None` past the `p1` maximum where no slope in `[0, 1]` touches.
    pub a_tangent: Option<f64>,
}

/// `samples` equally spaced squeezing values from `r_min` to `r_max` inclusive.
pub fn boundary_rows(r_min: f64, r_max: f64, samples: usize) -> Result<Vec<BoundaryRow>> {
    if !(r_min >= 0.0 && r_min < r_max && r_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "boundary range needs 0 <= r_min < r_max, got [{r_min}, {r_max}]"
        )));
    }
    if !(2..=MAX_SAMPLES).contains(&samples) {
        return Err(Error::InvalidInput(format!(
            "samples = {samples} outside [2, {MAX_SAMPLES}]"
        )));
    }
    let step = (r_max - r_min) / (samples - 1) as f64;
    (0..samples)
        .map(|i| {
            let r = if i == samples - 1 {
                r_max
            } else {
                r_min + i as f64 * step
            };
            let b = boundary_point(r)?;
            Ok(BoundaryRow {
                r,
                p0: b.p0,
                p1: b.p1,
                a_tangent: if r <= R_P1_MAX { tangent_slope(r).ok() } else { None },
            })
        })
        .collect()
}

pub fn boundary_csv(rows: &[BoundaryRow]) -> String {
    let mut out = String::from("r,p0,p1,a_tangent\n");
    for row in rows {
        let a = row.a_tangent.map(fmt_num).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt_num(row.r),
            fmt_num(row.p0),
            fmt_num(row.p1),
            a
        ));
    }
    out
}

/// Writes the boundary CSV to `path`.
pub fn emit_boundary(r_min: f64, r_max: f64, samples: usize, path: &Path) -> Result<Vec<BoundaryRow>> {
    let rows = boundary_rows(r_min, r_max, samples)?;
    write_file(path, boundary_csv(&rows).as_bytes())?;
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_ranges() {
        assert!(boundary_rows(0.0, 0.0, 1).is_err());
        assert!(boundary_rows(0.0, 1.0, 1).is_err());
        assert!(boundary_rows(-0.1, 1.0, 10).is_err());
        assert!(boundary_rows(1.0, 0.5, 10).is_err());
        assert!(boundary_rows(0.0, 1.0, MAX_SAMPLES + 1).is_err());
    }

    #[test]
    fn first_row_and_monotone_p0() {
        let rows = boundary_rows(0.0, 1.5, 301).unwrap();
        assert_eq!(
            (rows[0].r, rows[0].p0, rows[0].p1, rows[0].a_tangent),
            (0.0, 1.0, 0.0, Some(1.0))
        );
        assert!(rows.windows(2).all(|w| w[1].p0 < w[0].p0));
        assert_eq!(rows.last().unwrap().r, 1.5);
        assert!(rows.last().unwrap().a_tangent.is_none());
    }

    #[test]
    fn row_nearest_p1_maximum() {
        let rows = boundary_rows(0.0, 1.0, 1001).unwrap();
        let nearest = rows
            .iter()
            .min_by(|a, b| (a.r - R_P1_MAX).abs().total_cmp(&(b.r - R_P1_MAX).abs()))
            .unwrap();
        // 3√3/(4e) to 40 digits
        assert!((nearest.p1 - 0.477_889_412_376_738).abs() < 1e-6);
    }

    #[test]
    fn csv_shape() {
        let text = boundary_csv(&boundary_rows(0.0, 1.0, 3).unwrap());
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "r,p0,p1,a_tangent");
        assert_eq!(lines[1], "0,1,0,1");
        assert!(lines[3].ends_with(','));
    }
}
