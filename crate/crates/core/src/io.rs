//! CSV and JSON writers. CSV files are comma separated with a header row and
//! every number printed with 17 significant digits.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::model::PathOutput;
use crate::stats::Histogram;

/// Scientific notation with 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// Columns `t,S,I,Q`.
pub fn write_path_csv<W: Write>(mut w: W, path: &PathOutput) -> Result<()> {
    writeln!(w, "t,S,I,Q")?;
    for (k, y) in path.states.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            fmt17(path.grid.time(k)),
            fmt17(y.s),
            fmt17(y.i),
            fmt17(y.q)
        )?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `t,<name>` for a scalar series on a uniform grid.
pub fn write_series_csv<W: Write>(mut w: W, name: &str, dt: f64, values: &[f64]) -> Result<()> {
    writeln!(w, "t,{name}")?;
    for (k, v) in values.iter().enumerate() {
        writeln!(w, "{},{}", fmt17(dt * k as f64), fmt17(*v))?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `edge_lo,edge_hi,density`.
pub fn write_histogram_csv<W: Write>(mut w: W, hist: &Histogram) -> Result<()> {
    writeln!(w, "edge_lo,edge_hi,density")?;
    for (edges, d) in hist.edges.windows(2).zip(&hist.densities) {
        writeln!(w, "{},{},{}", fmt17(edges[0]), fmt17(edges[1]), fmt17(*d))?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON; key order follows field declaration order.
pub fn write_json<W: Write, T: Serialize + ?Sized>(mut w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Diagnostics, State, TimeGrid};

    #[test]
    fn path_csv_layout() {
        let path = PathOutput {
            grid: TimeGrid::new(0.5, 1.0).unwrap(),
            states: vec![State::new(0.5, 0.3, 0.1); 3],
            diagnostics: Diagnostics::default(),
        };
        let mut buf = Vec::new();
        write_path_csv(&mut buf, &path).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[0], "t,S,I,Q");
        assert_eq!(lines[2].split(',').next().unwrap(), "5.0000000000000000e-1");
        let parsed: f64 = lines[1].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(parsed, 0.3);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, -2.5e-7] {
            let s = fmt17(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }
}
