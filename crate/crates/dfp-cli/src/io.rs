//! Table loading (CSV/JSON long format) and atomic result writing.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use dfp::{DfpTable, Fiducial, FIDUCIALS};

#[derive(Debug, Deserialize)]
struct Record {
    fiducial: String,
    outcome: String,
    probability: f64,
}

fn table_from_records(records: Vec<Record>, norm_tol: f64) -> Result<DfpTable> {
    let mut outcomes: Vec<String> = Vec::new();
    for r in &records {
        if !outcomes.contains(&r.outcome) {
            outcomes.push(r.outcome.clone());
        }
    }
    let m = outcomes.len();
    let mut rows = vec![vec![f64::NAN; m]; 6];
    for r in &records {
        let f = Fiducial::parse(&r.fiducial)
            .ok_or_else(|| anyhow!("unknown fiducial label {:?}", r.fiducial))?;
        let j = outcomes
            .iter()
            .position(|o| o == &r.outcome)
            .expect("outcome registered");
        if !rows[f.index()][j].is_nan() {
            bail!(
                "duplicate entry for fiducial {} outcome {:?}",
                f.label(),
                r.outcome
            );
        }
        rows[f.index()][j] = r.probability;
    }
    for f in FIDUCIALS {
        for (j, v) in rows[f.index()].iter().enumerate() {
            if v.is_nan() {
                bail!(
                    "missing entry for fiducial {} outcome {:?}",
                    f.label(),
                    outcomes[j]
                );
            }
        }
    }
    DfpTable::new(outcomes, rows, norm_tol).map_err(|e| anyhow!(e))
}

/// Load a DFP table from a `fiducial,outcome,probability` CSV or the JSON
/// equivalent (selected by file extension).
pub fn load_table(path: &Path, norm_tol: f64) -> Result<DfpTable> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let data = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let records: Vec<Record> = if is_json {
        serde_json::from_str(&data).with_context(|| format!("parsing {}", path.display()))?
    } else {
        let mut reader = csv::Reader::from_reader(data.as_bytes());
        reader
            .deserialize()
            .collect::<Result<Vec<Record>, _>>()
            .with_context(|| format!("parsing {}", path.display()))?
    };
    if records.is_empty() {
        bail!("{} holds no records", path.display());
    }
    table_from_records(records, norm_tol)
}

/// Result file under construction: config header comments plus CSV body.
pub struct ResultFile {
    header: String,
    body: String,
}

impl ResultFile {
    pub fn new(command: &str) -> Self {
        Self {
            header: format!("# dfp {command}\n"),
            body: String::new(),
        }
    }

    pub fn config(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.header, "# {key} = {value}");
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        let _ = writeln!(self.body, "{}", names.join(","));
        self
    }

    pub fn row(&mut self, values: &[String]) -> &mut Self {
        let _ = writeln!(self.body, "{}", values.join(","));
        self
    }

    /// Write through a temp file and rename into place.
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut tmp = path.as_os_str().to_owned();
        tmp.push(".tmp");
        let tmp = Path::new(&tmp);
        fs::write(tmp, format!("{}{}", self.header, self.body))
            .with_context(|| format!("writing {}", tmp.display()))?;
        fs::rename(tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
        Ok(())
    }
}

/// Display formatting for one numeric cell (shortest round-trip form).
pub fn cell(v: f64) -> String {
    format!("{v}")
}
