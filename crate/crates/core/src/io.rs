//! Plain-text artifacts: CSV tables and `key = value` manifests.
//!
//! Floats are written with `{:.16e}` (17 significant digits), which
//! round-trips every finite `f64` exactly. Header lines start with `#` so the
//! files load directly in gnuplot.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::degiorgi::DeGiorgiReport;
use crate::error::IoError;
use crate::field::{Grid, ScalarField};
use crate::walkers::Ensemble;

/// Exact decimal form of a float.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| IoError::io(dir, e))?;
    }
    fs::write(path, text).map_err(|e| IoError::io(path, e))
}

/// Field CSV: a metadata header, then `i,j,x,y,value` per node.
pub fn field_csv(field: &ScalarField, time: f64) -> String {
    let g = field.grid();
    let [nx, ny] = g.shape();
    let [x0, y0] = g.origin();
    let mut s = String::with_capacity(64 * (g.len() + 3));
    s.push_str("#dim,nx,ny,h,x0,y0,time\n");
    let _ = writeln!(
        s,
        "#{},{nx},{ny},{},{},{},{}",
        g.dim(),
        fmt_f64(g.h()),
        fmt_f64(x0),
        fmt_f64(y0),
        fmt_f64(time)
    );
    s.push_str("#i,j,x,y,value\n");
    for (k, v) in field.values().iter().enumerate() {
        let (i, j) = g.ij(k);
        let c = g.coords(k);
        let _ = writeln!(s, "{i},{j},{},{},{}", fmt_f64(c[0]), fmt_f64(c[1]), fmt_f64(*v));
    }
    s
}

pub fn write_field(path: &Path, field: &ScalarField, time: f64) -> Result<(), IoError> {
    write_text(path, &field_csv(field, time))
}

fn parse_num<T: std::str::FromStr>(path: &Path, line: usize, tok: &str) -> Result<T, IoError> {
    tok.trim()
        .parse()
        .map_err(|_| IoError::parse(path, line, format!("cannot parse {tok:?}")))
}

/// Parse a field CSV produced by [`field_csv`]; returns the field and its time.
pub fn parse_field(path: &Path, text: &str) -> Result<(ScalarField, f64), IoError> {
    let mut lines = text.lines().enumerate();
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| IoError::parse(path, 0, format!("missing {what}")))
    };
    next("metadata header")?;
    let (ln, meta) = next("metadata")?;
    let meta: Vec<&str> = meta.trim_start_matches('#').split(',').collect();
    if meta.len() != 7 {
        return Err(IoError::parse(path, ln + 1, "expected 7 metadata fields"));
    }
    let dim: usize = parse_num(path, ln + 1, meta[0])?;
    let nx: usize = parse_num(path, ln + 1, meta[1])?;
    let ny: usize = parse_num(path, ln + 1, meta[2])?;
    let h: f64 = parse_num(path, ln + 1, meta[3])?;
    let x0: f64 = parse_num(path, ln + 1, meta[4])?;
    let y0: f64 = parse_num(path, ln + 1, meta[5])?;
    let time: f64 = parse_num(path, ln + 1, meta[6])?;
    let grid = Grid::new(dim, [nx, ny], h, [x0, y0])
        .map_err(|e| IoError::parse(path, ln + 1, e.to_string()))?;
    next("column header")?;
    let mut values = vec![0.0; grid.len()];
    let mut seen = 0;
    for (ln, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 5 {
            return Err(IoError::parse(path, ln + 1, "expected 5 columns"));
        }
        let i: usize = parse_num(path, ln + 1, cols[0])?;
        let j: usize = parse_num(path, ln + 1, cols[1])?;
        if i >= nx || j >= ny {
            return Err(IoError::parse(path, ln + 1, "node index out of range"));
        }
        values[grid.index(i, j)] = parse_num(path, ln + 1, cols[4])?;
        seen += 1;
    }
    if seen != grid.len() {
        return Err(IoError::parse(path, 0, format!("expected {} nodes, found {seen}", grid.len())));
    }
    let field = ScalarField::from_values(grid, values).map_err(|e| IoError::parse(path, 0, e.to_string()))?;
    Ok((field, time))
}

pub fn read_field(path: &Path) -> Result<(ScalarField, f64), IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::io(path, e))?;
    parse_field(path, &text)
}

/// `id,x,y,weight,alive` per particle.
pub fn ensemble_csv(ens: &Ensemble) -> String {
    let mut s = String::with_capacity(80 * (ens.len() + 1));
    s.push_str("#id,x,y,weight,alive\n");
    for (id, ((p, w), a)) in ens.positions.iter().zip(&ens.weights).zip(&ens.alive).enumerate() {
        let y = if ens.dim > 1 { p[1] } else { 0.0 };
        let _ = writeln!(s, "{id},{},{},{},{}", fmt_f64(p[0]), fmt_f64(y), fmt_f64(*w), u8::from(*a));
    }
    s
}

/// Generic numeric table with a `#`-prefixed header.
pub fn table_csv(header: &[&str], rows: &[Vec<f64>]) -> String {
    let mut s = format!("#{}\n", header.join(","));
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        s.push_str(&cells.join(","));
        s.push('\n');
    }
    s
}

/// `name,value` rows.
pub fn constants_csv(rows: &[(String, f64)]) -> String {
    let mut s = String::from("name,value\n");
    for (name, v) in rows {
        let _ = writeln!(s, "{name},{}", fmt_f64(*v));
    }
    s
}

pub fn recursion_csv(report: &DeGiorgiReport) -> String {
    let rows: Vec<Vec<f64>> = report
        .rows
        .iter()
        .map(|r| vec![r.n as f64, r.i_n, r.bound, r.ratio])
        .collect();
    table_csv(&["n", "I_n", "bound", "ratio"], &rows)
}

pub fn support_csv(series: &[(f64, f64)]) -> String {
    let rows: Vec<Vec<f64>> = series.iter().map(|(t, r)| vec![*t, *r]).collect();
    table_csv(&["time", "support_radius"], &rows)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |x| format!("{x:.6e}"))
}

/// Human-readable certificate report.
pub fn report_text(r: &DeGiorgiReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "verdict: {}", r.verdict.as_str());
    let _ = writeln!(s, "reason: {}", r.reason);
    let _ = writeln!(s, "horizon: {}", r.horizon);
    let _ = writeln!(
        s,
        "geometry: R0 = {}, r = {}, n_max = {}",
        r.geometry.r0, r.geometry.r, r.geometry.n_max
    );
    let _ = writeln!(s, "time quadrature: {:?}", r.quadrature);
    let _ = writeln!(s, "support radius at horizon: {:.6} (2r = {})", r.support_at_horizon, 2.0 * r.geometry.r);
    let _ = writeln!(s, "I_n strictly decreasing: {}", r.strictly_decreasing);
    let _ = writeln!(s, "configured constant (C_L+M_L)/G: {}", opt(r.configured_constant));
    let _ = writeln!(s, "fitted constant: {}", opt(r.recursion_fit));
    let _ = writeln!(s, "I_0 observed: {:.6e}", r.threshold.i0);
    let _ = writeln!(s, "I_0 threshold (configured): {}", opt(r.threshold.configured));
    let _ = writeln!(s, "I_0 threshold (fitted): {}", opt(r.threshold.fitted));
    s.push_str("\n   n  I_n            bound          ratio\n");
    for row in &r.rows {
        let _ = writeln!(s, "{:4}  {:.6e}  {:.6e}  {:.6e}", row.n, row.i_n, row.bound, row.ratio);
    }
    s
}

/// Ordered `key = value` manifest.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    entries: Vec<(String, String)>,
}

impl Manifest {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| *k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key, value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Record an artifact and its data-row count.
    pub fn artifact(&mut self, name: &str, file: &Path, rows: usize) {
        self.set(format!("artifact.{name}.path"), file.display());
        self.set(format!("artifact.{name}.rows"), rows);
    }

    /// Flatten a TOML value into dotted keys under `prefix`.
    pub fn echo_toml(&mut self, prefix: &str, value: &toml::Value) {
        match value {
            toml::Value::Table(t) => {
                for (k, v) in t {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    self.echo_toml(&key, v);
                }
            }
            other => self.set(prefix, other),
        }
    }

    pub fn render(&self) -> String {
        self.entries.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn parse(path: &Path, text: &str) -> Result<Self, IoError> {
        let mut m = Self::new();
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once(" = ")
                .ok_or_else(|| IoError::parse(path, ln + 1, "expected `key = value`"))?;
            m.set(k.trim(), v.trim());
        }
        Ok(m)
    }
}

/// Number of non-header lines of a CSV text.
pub fn data_rows(text: &str) -> usize {
    text.lines()
        .filter(|l| !l.is_empty() && !l.starts_with('#') && *l != "name,value")
        .count()
}

/// Write a CSV artifact and record it in the manifest.
pub fn emit(manifest: &mut Manifest, dir: &Path, name: &str, file: &str, text: &str) -> Result<PathBuf, IoError> {
    let path = dir.join(file);
    write_text(&path, text)?;
    manifest.artifact(name, Path::new(file), data_rows(text));
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn field_round_trip_2d() {
        let grid = Grid::new(2, [4, 3], 0.3, [-0.45, 1.0 / 3.0]).unwrap();
        let f = ScalarField::from_fn(grid, |x| (x[0] * 7.1).sin() / 3.0 + x[1]);
        let text = field_csv(&f, 0.1 + 0.2);
        let (g, t) = parse_field(Path::new("mem"), &text).unwrap();
        assert_eq!(g.values(), f.values());
        assert_eq!(g.grid(), f.grid());
        assert_eq!(t, 0.1 + 0.2);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let grid = Grid::line(3, 1.0, 0.0).unwrap();
        let text = field_csv(&ScalarField::zeros(grid), 0.0).replace("0,0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0", "0,0,x,y,oops");
        match parse_field(Path::new("f.csv"), &text) {
            Err(IoError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn manifest_round_trip() {
        let mut m = Manifest::new();
        m.set("a.b", 1.5);
        m.set("c", "text with spaces");
        m.set("a.b", 2);
        let text = m.render();
        assert_eq!(text, "a.b = 2\nc = text with spaces\n");
        assert_eq!(Manifest::parse(Path::new("m"), &text).unwrap(), m);
    }

    #[test]
    fn row_counts() {
        assert_eq!(data_rows(&table_csv(&["a"], &[vec![1.0], vec![2.0]])), 2);
        assert_eq!(data_rows(&constants_csv(&[("x".into(), 1.0)])), 1);
    }

    proptest! {
        #[test]
        fn values_round_trip_exactly(vals in prop::collection::vec(prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, 3..40), t in -1e9f64..1e9) {
            let grid = Grid::line(vals.len(), 0.1, -1.0).unwrap();
            let f = ScalarField::from_values(grid, vals).unwrap();
            let (g, tt) = parse_field(Path::new("p"), &field_csv(&f, t)).unwrap();
            prop_assert_eq!(g.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>(), f.values().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
            prop_assert_eq!(tt.to_bits(), t.to_bits());
        }
    }
}
