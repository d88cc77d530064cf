//! CSV emission and parsing.

use std::fs;
use std::path::Path;

use ncsc_core::metrics::LowerBoundReport;

use crate::error::{HarnessError, HarnessResult};
use crate::spec_file::instance_id;

pub const RESULT_COLUMNS: [&str; 11] = [
    "suite",
    "instance_id",
    "solver",
    "seed",
    "kappa",
    "n",
    "epsilon",
    "oracle_calls",
    "grad_phi_norm",
    "moreau_norm",
    "wall_ms",
];

pub const LOWER_BOUND_COLUMNS: [&str; 9] = [
    "instance_id",
    "algorithm",
    "seed",
    "floor",
    "calls_to_activation",
    "calls_to_epsilon",
    "total_calls",
    "min_grad_phi",
    "branch",
];

#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub suite: String,
    pub instance_id: String,
    pub solver: String,
    pub seed: u64,
    pub kappa: f64,
    pub n: usize,
    pub epsilon: f64,
    pub oracle_calls: u64,
    pub grad_phi_norm: f64,
    pub moreau_norm: f64,
    pub wall_ms: f64,
}

fn real(v: f64) -> String {
    format!("{v:e}")
}

impl ResultRow {
    fn record(&self) -> [String; 11] {
        [
            self.suite.clone(),
            self.instance_id.clone(),
            self.solver.clone(),
            self.seed.to_string(),
            real(self.kappa),
            self.n.to_string(),
            real(self.epsilon),
            self.oracle_calls.to_string(),
            real(self.grad_phi_norm),
            real(self.moreau_norm),
            real(self.wall_ms),
        ]
    }

    fn from_record(r: &csv::StringRecord) -> Result<Self, String> {
        if r.len() != RESULT_COLUMNS.len() {
            return Err(format!("expected {} fields, got {}", RESULT_COLUMNS.len(), r.len()));
        }
        fn num<T: std::str::FromStr>(r: &csv::StringRecord, i: usize) -> Result<T, String> {
            r[i].parse()
                .map_err(|_| format!("column {} has unparsable value `{}`", RESULT_COLUMNS[i], &r[i]))
        }
        Ok(Self {
            suite: r[0].to_string(),
            instance_id: r[1].to_string(),
            solver: r[2].to_string(),
            seed: num(r, 3)?,
            kappa: num(r, 4)?,
            n: num(r, 5)?,
            epsilon: num(r, 6)?,
            oracle_calls: num(r, 7)?,
            grad_phi_norm: num(r, 8)?,
            moreau_norm: num(r, 9)?,
            wall_ms: num(r, 10)?,
        })
    }
}

fn writer(path: &Path) -> HarnessResult<csv::Writer<fs::File>> {
    if let Some(dir) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    csv::Writer::from_path(path).map_err(|e| HarnessError::Csv {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_all<I, R>(path: &Path, header: &[&str], records: I) -> HarnessResult<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let wrap = |e: csv::Error| HarnessError::Csv {
        path: path.to_path_buf(),
        source: e,
    };
    let mut w = writer(path)?;
    w.write_record(header).map_err(wrap)?;
    for r in records {
        w.write_record(r).map_err(wrap)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn write_results(path: &Path, rows: &[ResultRow]) -> HarnessResult<()> {
    write_all(path, &RESULT_COLUMNS, rows.iter().map(ResultRow::record))
}

pub fn read_results(path: &Path) -> HarnessResult<Vec<ResultRow>> {
    let mut rd = csv::Reader::from_path(path).map_err(|e| HarnessError::Csv {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut rows = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(|e| HarnessError::Csv {
            path: path.to_path_buf(),
            source: e,
        })?;
        rows.push(
            ResultRow::from_record(&rec)
                .map_err(|m| HarnessError::Config(format!("{} row {}: {m}", path.display(), i + 1)))?,
        );
    }
    Ok(rows)
}

pub fn write_lower_bound(path: &Path, reports: &[LowerBoundReport]) -> HarnessResult<()> {
    let opt = |v: Option<u64>| v.map_or_else(String::new, |c| c.to_string());
    let records = reports.iter().flat_map(|rep| {
        let id = instance_id(&rep.spec);
        rep.rows.iter().map(move |r| {
            vec![
                id.clone(),
                r.algorithm.name(),
                r.seed.to_string(),
                real(rep.floor),
                opt(r.calls_to_activation),
                opt(r.calls_to_epsilon),
                r.total_calls.to_string(),
                real(r.min_grad_phi),
                rep.branch().to_string(),
            ]
        })
    });
    write_all(path, &LOWER_BOUND_COLUMNS, records)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_is_lossless() {
        for v in [0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, f64::MAX] {
            assert_eq!(real(v).parse::<f64>().unwrap(), v);
        }
        assert!(real(f64::NAN).parse::<f64>().unwrap().is_nan());
    }
}
