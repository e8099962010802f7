use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forest::{fmt_num, EstimateReport};

/// Column order of every results file.
pub const RESULT_COLUMNS: [&str; 11] = [
    "estimator",
    "n",
    "d",
    "mu",
    "pi",
    "seed",
    "h_y",
    "h_y_given_x",
    "mi",
    "mi_normalized",
    "wall_time_ms",
];

/// One line of a results file. `mu` and `pi` are empty for CSV input and
/// `wall_time_ms` is empty when timing is switched off.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub estimator: String,
    pub n: usize,
    pub d: usize,
    pub mu: Option<f64>,
    pub pi: Option<f64>,
    pub seed: u64,
    pub h_y: f64,
    pub h_y_given_x: f64,
    pub mi: f64,
    pub mi_normalized: f64,
    pub wall_time_ms: Option<f64>,
}

impl ResultRow {
    pub fn from_report(
        report: &EstimateReport,
        mu: Option<f64>,
        pi: Option<f64>,
        wall_time_ms: Option<f64>,
    ) -> Self {
        Self {
            estimator: report.estimator.clone(),
            n: report.n,
            d: report.d,
            mu,
            pi,
            seed: report.seed,
            h_y: report.h_y,
            h_y_given_x: report.h_y_given_x,
            mi: report.mi,
            mi_normalized: report.mi_normalized,
            wall_time_ms,
        }
    }

    fn fields(&self) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
        [
            self.estimator.clone(),
            self.n.to_string(),
            self.d.to_string(),
            opt(self.mu),
            opt(self.pi),
            self.seed.to_string(),
            fmt_num(self.h_y),
            fmt_num(self.h_y_given_x),
            fmt_num(self.mi),
            fmt_num(self.mi_normalized),
            opt(self.wall_time_ms),
        ]
    }

    fn parse(record: &csv::StringRecord, line: usize) -> Result<Self> {
        let bad = |col: &str, v: &str| {
            Error::Data(format!("line {line}: bad value '{v}' in column '{col}'"))
        };
        let get = |i: usize| record.get(i).unwrap_or("");
        let float = |i: usize| -> Result<f64> {
            get(i).parse().map_err(|_| bad(RESULT_COLUMNS[i], get(i)))
        };
        let opt = |i: usize| -> Result<Option<f64>> {
            if get(i).is_empty() {
                Ok(None)
            } else {
                float(i).map(Some)
            }
        };
        let int = |i: usize| -> Result<u64> {
            get(i).parse().map_err(|_| bad(RESULT_COLUMNS[i], get(i)))
        };
        Ok(Self {
            estimator: get(0).to_string(),
            n: int(1)? as usize,
            d: int(2)? as usize,
            mu: opt(3)?,
            pi: opt(4)?,
            seed: int(5)?,
            h_y: float(6)?,
            h_y_given_x: float(7)?,
            mi: float(8)?,
            mi_normalized: float(9)?,
            wall_time_ms: opt(10)?,
        })
    }
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let io_err = |e: csv::Error| Error::Data(e.to_string());
    w.write_record(RESULT_COLUMNS).map_err(io_err)?;
    for row in rows {
        w.write_record(row.fields()).map_err(io_err)?;
    }
    w.flush().map_err(|e| Error::Data(e.to_string()))
}

/// Writes `rows` as a results CSV.
pub fn save_results(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results(rows, std::io::BufWriter::new(file))
}

/// Writes reports as a results CSV with empty `mu`, `pi` and timing columns.
pub fn save_report(reports: &[EstimateReport], path: impl AsRef<Path>) -> Result<()> {
    let rows: Vec<ResultRow> = reports
        .iter()
        .map(|r| ResultRow::from_report(r, None, None, None))
        .collect();
    save_results(&rows, path)
}

pub fn load_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::Reader::from_reader(file);
    let header = reader.headers().map_err(|e| Error::Data(e.to_string()))?;
    if header.iter().ne(RESULT_COLUMNS) {
        return Err(Error::Data(format!(
            "{}: header does not match the results columns",
            path.display()
        )));
    }
    reader
        .records()
        .enumerate()
        .map(|(i, rec)| {
            let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
            ResultRow::parse(&rec, i + 2)
        })
        .collect()
}
