//! Grouped mean ± sd tables from CSV data.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{describe, StatsError};

/// String-valued CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: Vec<String>) -> Self {
        Self {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn from_reader<R: Read>(r: R) -> Result<Self, StatsError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
        let headers = rdr.headers()?.iter().map(str::to_owned).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_owned).collect()))
            .collect::<Result<_, _>>()?;
        Ok(Self { headers, rows })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self, StatsError> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn column(&self, name: &str) -> Result<usize, StatsError> {
        self.headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| StatsError::UnknownColumn(name.to_owned()))
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }
}

/// What to summarize. `differences` adds a per-row `a-b` column, used for
/// paired error comparisons.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SummarySpec {
    pub group_by: Vec<String>,
    pub values: Vec<String>,
    #[serde(default)]
    pub differences: Vec<(String, String)>,
    /// Rows whose value here is truthy (`1`, `true`, `yes`, `y`, `x`) are skipped.
    #[serde(default)]
    pub exclude_column: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSummary {
    pub column: String,
    pub n: usize,
    /// Rows with an empty or `n/a` value.
    pub n_missing: usize,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub key: Vec<String>,
    pub rows: usize,
    pub columns: Vec<ColumnSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub group_by: Vec<String>,
    pub columns: Vec<String>,
    /// Sorted by key.
    pub groups: Vec<GroupSummary>,
    pub excluded: usize,
}

fn is_missing(v: &str) -> bool {
    matches!(v.to_ascii_lowercase().as_str(), "" | "na" | "n/a" | "nan" | "none")
}

fn is_truthy(v: &str) -> bool {
    matches!(v.to_ascii_lowercase().as_str(), "1" | "true" | "yes" | "y" | "x")
}

fn parse(table: &Table, row: usize, col: usize) -> Result<Option<f64>, StatsError> {
    let raw = table.rows[row].get(col).map(String::as_str).unwrap_or("");
    if is_missing(raw) {
        return Ok(None);
    }
    raw.parse::<f64>().map(Some).map_err(|_| StatsError::BadValue {
        row: row + 1,
        column: table.headers[col].clone(),
        value: raw.to_owned(),
    })
}

/// Row count, then per column (values, missing count).
type GroupAcc = (usize, Vec<(Vec<f64>, usize)>);

pub fn summarize(table: &Table, spec: &SummarySpec) -> Result<Summary, StatsError> {
    let keys = spec
        .group_by
        .iter()
        .map(|k| table.column(k))
        .collect::<Result<Vec<_>, _>>()?;
    let values = spec
        .values
        .iter()
        .map(|k| table.column(k))
        .collect::<Result<Vec<_>, _>>()?;
    let diffs = spec
        .differences
        .iter()
        .map(|(a, b)| Ok((table.column(a)?, table.column(b)?)))
        .collect::<Result<Vec<_>, StatsError>>()?;
    let exclude = spec.exclude_column.as_deref().map(|c| table.column(c)).transpose()?;

    let mut columns: Vec<String> = spec.values.clone();
    columns.extend(spec.differences.iter().map(|(a, b)| format!("{a}-{b}")));

    let mut groups: BTreeMap<Vec<String>, GroupAcc> = BTreeMap::new();
    let mut excluded = 0;
    for row in 0..table.rows.len() {
        let cells = &table.rows[row];
        if exclude.is_some_and(|c| cells.get(c).is_some_and(|v| is_truthy(v))) {
            excluded += 1;
            continue;
        }
        let key: Vec<String> = keys
            .iter()
            .map(|&k| cells.get(k).cloned().unwrap_or_default())
            .collect();
        let entry = groups
            .entry(key)
            .or_insert_with(|| (0, vec![(Vec::new(), 0); columns.len()]));
        entry.0 += 1;
        let mut observed = Vec::with_capacity(columns.len());
        for &c in &values {
            observed.push(parse(table, row, c)?);
        }
        for &(a, b) in &diffs {
            let pair = (parse(table, row, a)?, parse(table, row, b)?);
            observed.push(match pair {
                (Some(a), Some(b)) => Some(a - b),
                _ => None,
            });
        }
        for (slot, v) in entry.1.iter_mut().zip(observed) {
            match v {
                Some(v) => slot.0.push(v),
                None => slot.1 += 1,
            }
        }
    }
    if groups.is_empty() {
        return Err(StatsError::Empty);
    }
    let groups = groups
        .into_iter()
        .map(|(key, (rows, cols))| GroupSummary {
            key,
            rows,
            columns: cols
                .into_iter()
                .zip(&columns)
                .map(|((vals, n_missing), name)| {
                    let (mean, sd) = describe(&vals);
                    ColumnSummary {
                        column: name.clone(),
                        n: vals.len(),
                        n_missing,
                        mean,
                        sd,
                    }
                })
                .collect(),
        })
        .collect();
    Ok(Summary {
        group_by: spec.group_by.clone(),
        columns,
        groups,
        excluded,
    })
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

impl Summary {
    /// Columns: the group keys, `rows`, then `<col>_n`, `<col>_na`,
    /// `<col>_mean`, `<col>_sd` for each summarized column.
    pub fn csv_headers(&self) -> Vec<String> {
        let mut h = self.group_by.clone();
        h.push("rows".into());
        for c in &self.columns {
            for suffix in ["n", "na", "mean", "sd"] {
                h.push(format!("{c}_{suffix}"));
            }
        }
        h
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), StatsError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(self.csv_headers())?;
        for g in &self.groups {
            let mut rec = g.key.clone();
            rec.push(g.rows.to_string());
            for c in &g.columns {
                rec.push(c.n.to_string());
                rec.push(c.n_missing.to_string());
                rec.push(fmt_num(c.mean));
                rec.push(fmt_num(c.sd));
            }
            out.write_record(rec)?;
        }
        out.flush()?;
        Ok(())
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            let key = if g.key.is_empty() {
                "all".to_owned()
            } else {
                g.key.join(" / ")
            };
            writeln!(f, "{key} (rows {})", g.rows)?;
            for c in &g.columns {
                write!(f, "  {:<20} {:>10.4} ± {:<10.4} n={}", c.column, c.mean, c.sd, c.n)?;
                if c.n_missing > 0 {
                    write!(f, " n/a={}", c.n_missing)?;
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}
