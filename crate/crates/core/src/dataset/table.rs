use std::collections::HashSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::{NaiveDate, NaiveDateTime};

use crate::error::{Error, Result};

/// Kind of a table column as declared by the schema.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Datetime,
    Numeric,
    Categorical,
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ColumnKind::Datetime => "datetime",
            ColumnKind::Numeric => "numeric",
            ColumnKind::Categorical => "categorical",
        })
    }
}

impl FromStr for ColumnKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "datetime" => Ok(ColumnKind::Datetime),
            "numeric" => Ok(ColumnKind::Numeric),
            "categorical" => Ok(ColumnKind::Categorical),
            other => Err(Error::Config(format!("unknown column kind `{other}`"))),
        }
    }
}

/// Column-kind declarations. Columns not mentioned are numeric.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schema {
    declared: Vec<(String, ColumnKind)>,
}

impl Schema {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: impl Into<String>, kind: ColumnKind) -> Self {
        self.declare(name, kind);
        self
    }

    pub fn declare(&mut self, name: impl Into<String>, kind: ColumnKind) {
        let name = name.into();
        match self.declared.iter_mut().find(|(n, _)| *n == name) {
            Some(entry) => entry.1 = kind,
            None => self.declared.push((name, kind)),
        }
    }

    /// Parses `<name>:<kind>`, the value half of a `column = ...` config line.
    pub fn declare_spec(&mut self, spec: &str) -> Result<()> {
        let (name, kind) = spec
            .rsplit_once(':')
            .ok_or_else(|| Error::Config(format!("column spec `{spec}` is not <name>:<kind>")))?;
        let name = name.trim();
        if name.is_empty() {
            return Err(Error::Config(format!("column spec `{spec}` has an empty name")));
        }
        self.declare(name, kind.parse()?);
        Ok(())
    }

    pub fn kind_of(&self, name: &str) -> ColumnKind {
        self.declared
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, k)| *k)
            .unwrap_or(ColumnKind::Numeric)
    }

    pub fn declared(&self) -> &[(String, ColumnKind)] {
        &self.declared
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    /// Values with a parallel missing mask; masked cells hold NaN.
    Numeric { values: Vec<f64>, missing: Vec<bool> },
    Categorical(Vec<String>),
}

impl ColumnData {
    pub fn numeric(values: Vec<f64>) -> Self {
        let missing = values.iter().map(|v| v.is_nan()).collect();
        ColumnData::Numeric { values, missing }
    }

    pub fn numeric_with_missing(values: Vec<Option<f64>>) -> Self {
        let missing: Vec<bool> = values.iter().map(Option::is_none).collect();
        let values = values.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect();
        ColumnData::Numeric { values, missing }
    }

    pub fn categorical<S: Into<String>>(values: impl IntoIterator<Item = S>) -> Self {
        ColumnData::Categorical(values.into_iter().map(Into::into).collect())
    }

    pub fn len(&self) -> usize {
        match self {
            ColumnData::Numeric { values, .. } => values.len(),
            ColumnData::Categorical(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> ColumnKind {
        match self {
            ColumnData::Numeric { .. } => ColumnKind::Numeric,
            ColumnData::Categorical(_) => ColumnKind::Categorical,
        }
    }

    fn take_rows(&self, order: &[usize]) -> ColumnData {
        match self {
            ColumnData::Numeric { values, missing } => ColumnData::Numeric {
                values: order.iter().map(|&i| values[i]).collect(),
                missing: order.iter().map(|&i| missing[i]).collect(),
            },
            ColumnData::Categorical(v) => {
                ColumnData::Categorical(order.iter().map(|&i| v[i].clone()).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub data: ColumnData,
}

impl Column {
    pub fn new(name: impl Into<String>, data: ColumnData) -> Self {
        Self {
            name: name.into(),
            data,
        }
    }
}

/// A typed columnar time-series table ordered by timestamp.
///
/// The datetime column is held separately from the value columns; its
/// position in the source header is kept so the table can be written
/// back in the original column order.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeTable {
    datetime_name: String,
    datetime_position: usize,
    timestamps: Vec<NaiveDateTime>,
    columns: Vec<Column>,
}

impl TimeTable {
    /// Builds a table, validating lengths, names and timestamp order.
    pub fn new(
        datetime_name: impl Into<String>,
        timestamps: Vec<NaiveDateTime>,
        columns: Vec<Column>,
    ) -> Result<Self> {
        let datetime_name = datetime_name.into();
        if timestamps.is_empty() {
            return Err(Error::NoRows);
        }
        let mut seen = HashSet::new();
        seen.insert(datetime_name.as_str());
        for c in &columns {
            if !seen.insert(c.name.as_str()) {
                return Err(Error::DuplicateColumn(c.name.clone()));
            }
            if c.data.len() != timestamps.len() {
                return Err(Error::ShapeMismatch(format!(
                    "column `{}` has {} rows, expected {}",
                    c.name,
                    c.data.len(),
                    timestamps.len()
                )));
            }
        }
        if timestamps.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidParameter(
                "timestamps must be nondecreasing".into(),
            ));
        }
        Ok(Self {
            datetime_name,
            datetime_position: 0,
            timestamps,
            columns,
        })
    }

    pub fn len(&self) -> usize {
        self.timestamps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.timestamps.is_empty()
    }

    pub fn datetime_name(&self) -> &str {
        &self.datetime_name
    }

    pub fn timestamps(&self) -> &[NaiveDateTime] {
        &self.timestamps
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Option<&Column> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn numeric(&self, name: &str) -> Option<&[f64]> {
        match &self.column(name)?.data {
            ColumnData::Numeric { values, .. } => Some(values),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn missing_mask(&self, name: &str) -> Option<&[bool]> {
        match &self.column(name)?.data {
            ColumnData::Numeric { missing, .. } => Some(missing),
            ColumnData::Categorical(_) => None,
        }
    }

    pub fn categorical(&self, name: &str) -> Option<&[String]> {
        match &self.column(name)?.data {
            ColumnData::Categorical(v) => Some(v),
            ColumnData::Numeric { .. } => None,
        }
    }

    pub fn numeric_names(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.data.kind() == ColumnKind::Numeric)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn categorical_names(&self) -> Vec<&str> {
        self.columns
            .iter()
            .filter(|c| c.data.kind() == ColumnKind::Categorical)
            .map(|c| c.name.as_str())
            .collect()
    }

    pub fn has_missing(&self) -> bool {
        self.columns.iter().any(|c| match &c.data {
            ColumnData::Numeric { missing, .. } => missing.iter().any(|&m| m),
            ColumnData::Categorical(_) => false,
        })
    }

    /// Contiguous row slice `[start, end)`.
    pub fn slice_rows(&self, start: usize, end: usize) -> TimeTable {
        let order: Vec<usize> = (start..end).collect();
        self.take_rows(&order)
    }

    pub(crate) fn take_rows(&self, order: &[usize]) -> TimeTable {
        TimeTable {
            datetime_name: self.datetime_name.clone(),
            datetime_position: self.datetime_position,
            timestamps: order.iter().map(|&i| self.timestamps[i]).collect(),
            columns: self
                .columns
                .iter()
                .map(|c| Column::new(c.name.clone(), c.data.take_rows(order)))
                .collect(),
        }
    }

    pub(crate) fn with_columns(&self, columns: Vec<Column>) -> TimeTable {
        TimeTable {
            datetime_name: self.datetime_name.clone(),
            datetime_position: self.datetime_position,
            timestamps: self.timestamps.clone(),
            columns,
        }
    }

    pub(crate) fn from_parts(
        template: &TimeTable,
        timestamps: Vec<NaiveDateTime>,
        columns: Vec<Column>,
    ) -> TimeTable {
        TimeTable {
            datetime_name: template.datetime_name.clone(),
            datetime_position: template.datetime_position,
            timestamps,
            columns,
        }
    }

    /// Appends the rows of `other`, which must have the same columns.
    pub fn concat(&self, other: &TimeTable) -> Result<TimeTable> {
        let same = self.columns.len() == other.columns.len()
            && self
                .columns
                .iter()
                .zip(&other.columns)
                .all(|(a, b)| a.name == b.name && a.data.kind() == b.data.kind());
        if !same || self.datetime_name != other.datetime_name {
            return Err(Error::ShapeMismatch(
                "cannot concatenate tables with different columns".into(),
            ));
        }
        let mut timestamps = self.timestamps.clone();
        timestamps.extend_from_slice(&other.timestamps);
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                let data = match (&a.data, &b.data) {
                    (
                        ColumnData::Numeric { values, missing },
                        ColumnData::Numeric {
                            values: v2,
                            missing: m2,
                        },
                    ) => ColumnData::Numeric {
                        values: values.iter().chain(v2).copied().collect(),
                        missing: missing.iter().chain(m2).copied().collect(),
                    },
                    (ColumnData::Categorical(x), ColumnData::Categorical(y)) => {
                        ColumnData::Categorical(x.iter().chain(y).cloned().collect())
                    }
                    _ => unreachable!("kinds checked above"),
                };
                Column::new(a.name.clone(), data)
            })
            .collect();
        TimeTable::new(self.datetime_name.clone(), timestamps, columns).map(|mut t| {
            t.datetime_position = self.datetime_position;
            t
        })
    }

    /// Writes the table as CSV in its original column order. Missing
    /// numeric cells are written empty; floats use the shortest
    /// representation that round-trips.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let pos = self.datetime_position.min(header.len());
        header.insert(pos, &self.datetime_name);
        w.write_record(&header)?;
        for row in 0..self.len() {
            let mut record: Vec<String> = self
                .columns
                .iter()
                .map(|c| match &c.data {
                    ColumnData::Numeric { values, missing } => {
                        if missing[row] {
                            String::new()
                        } else {
                            format!("{}", values[row])
                        }
                    }
                    ColumnData::Categorical(v) => v[row].clone(),
                })
                .collect();
            record.insert(pos, format_timestamp(&self.timestamps[row]));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// The schema that reproduces this table's column kinds.
    pub fn schema(&self) -> Schema {
        let mut s = Schema::new().with(self.datetime_name.clone(), ColumnKind::Datetime);
        for c in &self.columns {
            s.declare(c.name.clone(), c.data.kind());
        }
        s
    }
}

pub fn format_timestamp(ts: &NaiveDateTime) -> String {
    ts.format("%Y-%m-%d %H:%M:%S").to_string()
}

/// Parses `YYYY-MM-DD`, `YYYY-MM-DD HH:MM:SS` (space or `T` separated)
/// and `YYYY-MM-DD HH:MM`.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    for fmt in [
        "%Y-%m-%d %H:%M:%S",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%dT%H:%M",
    ] {
        if let Ok(ts) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(ts);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Reads a comma-separated file with a header row.
///
/// Numeric cells that fail to parse (including empty cells) are marked
/// missing. Rows are stably sorted by timestamp, so duplicate timestamps
/// keep their file order.
pub fn load_table(path: &Path, schema: &Schema) -> Result<TimeTable> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();

    let mut seen = HashSet::new();
    for name in &header {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    for (name, _) in schema.declared() {
        if !seen.contains(name.as_str()) {
            return Err(Error::UnknownColumn(name.clone()));
        }
    }

    let kinds: Vec<ColumnKind> = header.iter().map(|h| schema.kind_of(h)).collect();
    let mut dt_pos: Option<usize> = None;
    for (i, k) in kinds.iter().enumerate() {
        if *k == ColumnKind::Datetime {
            if let Some(prev) = dt_pos {
                return Err(Error::MultipleDatetimeColumns(
                    header[prev].clone(),
                    header[i].clone(),
                ));
            }
            dt_pos = Some(i);
        }
    }
    let dt_pos = dt_pos.ok_or(Error::NoDatetimeColumn)?;

    let mut timestamps = Vec::new();
    let mut numeric: Vec<Vec<Option<f64>>> = vec![Vec::new(); header.len()];
    let mut categorical: Vec<Vec<String>> = vec![Vec::new(); header.len()];
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        for (i, kind) in kinds.iter().enumerate() {
            let cell = record.get(i).unwrap_or("");
            match kind {
                ColumnKind::Datetime => {
                    let ts = parse_timestamp(cell).ok_or_else(|| Error::BadTimestamp {
                        row: row + 1,
                        value: cell.to_owned(),
                    })?;
                    timestamps.push(ts);
                }
                ColumnKind::Numeric => {
                    numeric[i].push(cell.parse::<f64>().ok().filter(|v| v.is_finite()))
                }
                ColumnKind::Categorical => categorical[i].push(cell.to_owned()),
            }
        }
    }
    if timestamps.is_empty() {
        return Err(Error::NoRows);
    }

    let mut columns = Vec::new();
    for (i, kind) in kinds.iter().enumerate() {
        let data = match kind {
            ColumnKind::Datetime => continue,
            ColumnKind::Numeric => ColumnData::numeric_with_missing(std::mem::take(&mut numeric[i])),
            ColumnKind::Categorical => ColumnData::Categorical(std::mem::take(&mut categorical[i])),
        };
        columns.push(Column::new(header[i].clone(), data));
    }

    let mut order: Vec<usize> = (0..timestamps.len()).collect();
    order.sort_by_key(|&i| timestamps[i]);
    let unsorted = TimeTable {
        datetime_name: header[dt_pos].clone(),
        datetime_position: dt_pos,
        timestamps,
        columns,
    };
    Ok(unsorted.take_rows(&order))
}

/// Forward fill, then backward fill for any leading gap.
pub fn impute_missing(t: &TimeTable) -> Result<TimeTable> {
    let mut columns = Vec::with_capacity(t.columns.len());
    for c in &t.columns {
        let data = match &c.data {
            ColumnData::Numeric { values, missing } => {
                let first = missing
                    .iter()
                    .position(|&m| !m)
                    .ok_or_else(|| Error::AllMissing(c.name.clone()))?;
                let mut out = values.clone();
                let mut last = values[first];
                for (i, v) in out.iter_mut().enumerate() {
                    if missing[i] {
                        *v = last;
                    } else {
                        last = *v;
                    }
                }
                ColumnData::Numeric {
                    values: out,
                    missing: vec![false; values.len()],
                }
            }
            other => other.clone(),
        };
        columns.push(Column::new(c.name.clone(), data));
    }
    Ok(t.with_columns(columns))
}
