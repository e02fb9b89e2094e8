//! CSV rows for a convergence study and the aligned console table.

use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use peterlin::study::{slope, LevelResult};

pub const HEADER: [&str; 13] = [
    "N",
    "h",
    "dt",
    "nu",
    "eps",
    "Er1",
    "Er2",
    "Er3",
    "Er4",
    "Er5",
    "Er6",
    "newton_avg_iters",
    "wall_seconds",
];

/// First line of every CSV.
pub const H_NOTE: &str =
    "# h = 1/N as reported; the element diameter h_K = sqrt(2)/N is used in the pressure stabilization and |.|_h";

pub const FAILED_MARKER: &str = "# FAILED";

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub n: usize,
    pub h: f64,
    pub dt: f64,
    pub nu: f64,
    pub eps: f64,
    pub errors: [f64; 6],
    pub newton_avg_iters: f64,
    pub wall_seconds: f64,
}

impl Row {
    pub fn new(level: &LevelResult, nu: f64, eps: f64) -> Self {
        Self {
            n: level.n,
            h: level.h,
            dt: level.dt,
            nu,
            eps,
            errors: level.errors.to_array(),
            newton_avg_iters: level.newton_avg_iters,
            wall_seconds: level.wall_seconds,
        }
    }

    fn fields(&self) -> Vec<String> {
        let mut f = vec![self.n.to_string()];
        f.extend([self.h, self.dt, self.nu, self.eps].map(fmt17));
        f.extend(self.errors.map(fmt17));
        f.extend([self.newton_avg_iters, self.wall_seconds].map(fmt17));
        f
    }
}

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV writer that flushes after every row so a failed study leaves the
/// completed levels on disk.
pub struct CsvSink {
    file: BufWriter<File>,
}

impl CsvSink {
    pub fn create(path: &Path) -> Result<Self> {
        let file = BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
        let mut sink = Self { file };
        sink.line(&format!("{H_NOTE}\n{}", HEADER.join(",")))?;
        Ok(sink)
    }

    // Every field is numeric, so no quoting is ever needed.
    fn line(&mut self, text: &str) -> Result<()> {
        writeln!(self.file, "{text}")?;
        self.file.flush()?;
        Ok(())
    }

    pub fn push(&mut self, row: &Row) -> Result<()> {
        self.line(&row.fields().join(","))
    }

    pub fn fail(&mut self, n: usize, reason: &str) -> Result<()> {
        self.line(&format!("{FAILED_MARKER} N={n}: {}", reason.replace('\n', " ")))
    }
}

/// Reads a CSV written by [`CsvSink`]. Comment lines, including a failure
/// marker, are skipped.
pub fn read_rows(path: &Path) -> Result<Vec<Row>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(file);
    let name = path.display();
    let header = reader.headers().map_err(|e| at_line(&name, &e))?.clone();
    if header.is_empty() {
        bail!("{name}: empty CSV");
    }
    if header.iter().ne(HEADER) {
        let line = header.position().map_or(1, |p| p.line());
        bail!("{name}: line {line}: expected header {}", HEADER.join(","));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| at_line(&name, &e))?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            record[i]
                .trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("{name}: line {line}: column {} is not a number: {:?}", HEADER[i], &record[i]))
        };
        let n = record[0]
            .trim()
            .parse::<usize>()
            .map_err(|_| anyhow!("{name}: line {line}: column N is not a positive integer: {:?}", &record[0]))?;
        rows.push(Row {
            n,
            h: num(1)?,
            dt: num(2)?,
            nu: num(3)?,
            eps: num(4)?,
            errors: [num(5)?, num(6)?, num(7)?, num(8)?, num(9)?, num(10)?],
            newton_avg_iters: num(11)?,
            wall_seconds: num(12)?,
        });
    }
    if rows.is_empty() {
        bail!("{name}: no data rows");
    }
    Ok(rows)
}

fn at_line(name: &impl std::fmt::Display, e: &csv::Error) -> anyhow::Error {
    match e.position() {
        Some(p) => anyhow!("{name}: line {}: {e}", p.line()),
        None => anyhow!("{name}: {e}"),
    }
}

/// Slopes of the six errors between each pair of consecutive rows.
pub fn row_slopes(rows: &[Row]) -> Vec<[f64; 6]> {
    rows.windows(2)
        .map(|w| std::array::from_fn(|i| slope(w[0].errors[i], w[1].errors[i], w[0].n, w[1].n)))
        .collect()
}

/// Errors per level with the slope to the previous level underneath, in the
/// layout of the reference tables.
pub fn table(rows: &[Row]) -> String {
    let mut s = String::new();
    let _ = write!(s, "{:>6} {:>10}", "N", "h");
    for k in 1..=6 {
        let _ = write!(s, " {:>10}", format!("Er{k}"));
    }
    let _ = writeln!(s, " {:>7} {:>9}", "newton", "wall[s]");
    let slopes = row_slopes(rows);
    for (i, r) in rows.iter().enumerate() {
        let _ = write!(s, "{:>6} {:>10}", r.n, format!("1/{}", r.n));
        for e in r.errors {
            let _ = write!(s, " {e:>10.3e}");
        }
        let _ = writeln!(s, " {:>7.2} {:>9.1}", r.newton_avg_iters, r.wall_seconds);
        if i > 0 {
            let _ = write!(s, "{:>17}", "slope");
            for v in slopes[i - 1] {
                let _ = write!(s, " {v:>10.2}");
            }
            let _ = writeln!(s);
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, scale: f64) -> Row {
        Row {
            n,
            h: 1.0 / n as f64,
            dt: 0.5 / n as f64,
            nu: 0.1,
            eps: 0.1,
            errors: [1.0, 2.0, 3.0, 4.0, 5.0, 6.0].map(|e| e * scale / n as f64),
            newton_avg_iters: 2.0,
            wall_seconds: 0.1,
        }
    }

    #[test]
    fn round_trip_keeps_every_bit() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let mut sink = CsvSink::create(&path).unwrap();
        let rows = vec![row(8, 0.1f64.sqrt()), row(16, std::f64::consts::PI)];
        for r in &rows {
            sink.push(r).unwrap();
        }
        sink.fail(32, "solver\nfailed").unwrap();
        drop(sink);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(H_NOTE));
        assert_eq!(text.lines().nth(1).unwrap(), HEADER.join(","));
        assert!(text.lines().last().unwrap().starts_with("# FAILED N=32: solver failed"));
        assert_eq!(read_rows(&path).unwrap(), rows);
    }

    #[test]
    fn seventeen_digits() {
        let s = fmt17(0.1);
        assert_eq!(s, "1.0000000000000001e-1");
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn slopes_of_first_order_data() {
        let rows = [row(32, 1.0), row(64, 1.0), row(128, 1.0)];
        for s in row_slopes(&rows) {
            assert!(s.iter().all(|v| (v - 1.0).abs() < 1e-12));
        }
        let t = table(&rows);
        assert_eq!(t.lines().filter(|l| l.trim_start().starts_with("slope")).count(), 2);
    }

    #[test]
    fn malformed_lines_are_named() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        let good = row(8, 1.0).fields().join(",");
        std::fs::write(&path, format!("{H_NOTE}\n{}\n{good}\n8,x,1,1,1,1,1,1,1,1,1,1,1\n", HEADER.join(","))).unwrap();
        let e = read_rows(&path).unwrap_err().to_string();
        assert!(e.contains("line 4") && e.contains("column h"), "{e}");

        std::fs::write(&path, format!("{}\n{good}\n1,2,3\n", HEADER.join(","))).unwrap();
        let e = read_rows(&path).unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");

        std::fs::write(&path, "").unwrap();
        assert!(read_rows(&path).unwrap_err().to_string().contains("empty"));
        std::fs::write(&path, format!("{H_NOTE}\n{}\n", HEADER.join(","))).unwrap();
        assert!(read_rows(&path).unwrap_err().to_string().contains("no data rows"));
    }
}
