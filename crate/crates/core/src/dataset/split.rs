use chrono::NaiveDateTime;

use crate::dataset::table::{Column, ColumnData, TimeTable};
use crate::error::{Error, Result};

/// Chronological train/validation/test fractions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_frac: f64,
    pub val_frac: f64,
    pub test_frac: f64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_frac: 0.7,
            val_frac: 0.1,
            test_frac: 0.2,
        }
    }
}

impl SplitSpec {
    pub fn new(train_frac: f64, val_frac: f64, test_frac: f64) -> Result<Self> {
        let s = Self {
            train_frac,
            val_frac,
            test_frac,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let fracs = [self.train_frac, self.val_frac, self.test_frac];
        if fracs.iter().any(|f| !(*f > 0.0)) {
            return Err(Error::InvalidParameter(
                "split fractions must all be positive".into(),
            ));
        }
        if (fracs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(
                "split fractions must sum to 1".into(),
            ));
        }
        Ok(())
    }

    /// Row counts `(train, val, test)` for a table of `n` rows.
    pub fn sizes(&self, n: usize) -> Result<(usize, usize, usize)> {
        self.validate()?;
        // the epsilon absorbs representation error such as 0.7 * 10 = 6.999...
        let train = (self.train_frac * n as f64 + 1e-9).floor() as usize;
        let val = (self.val_frac * n as f64 + 1e-9).floor() as usize;
        let test = n.saturating_sub(train + val);
        if train == 0 || val == 0 || test == 0 {
            return Err(Error::TooShort {
                len: n,
                required: 10,
            });
        }
        Ok((train, val, test))
    }
}

/// Contiguous chronological split into `(train, val, test)`.
pub fn temporal_split(t: &TimeTable, spec: &SplitSpec) -> Result<(TimeTable, TimeTable, TimeTable)> {
    let (train, val, _) = spec.sizes(t.len())?;
    Ok((
        t.slice_rows(0, train),
        t.slice_rows(train, train + val),
        t.slice_rows(train + val, t.len()),
    ))
}

/// One cell of an aggregated row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Numeric(f64),
    Categorical(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AggregatedRow {
    pub timestamp: NaiveDateTime,
    pub cells: Vec<(String, Cell)>,
}

/// Collapses a window of rows: mean for numeric columns (over observed
/// cells), mode for categorical columns with first-seen tie-breaking.
/// The row is stamped with the window's first timestamp.
pub fn aggregate_window(window: &TimeTable) -> Result<AggregatedRow> {
    if window.is_empty() {
        return Err(Error::InvalidParameter("cannot aggregate an empty window".into()));
    }
    let cells = window
        .columns()
        .iter()
        .map(|c| {
            let cell = match &c.data {
                ColumnData::Numeric { values, missing } => {
                    let (sum, n) = values
                        .iter()
                        .zip(missing)
                        .filter(|(_, &m)| !m)
                        .fold((0.0, 0usize), |(s, n), (v, _)| (s + v, n + 1));
                    Cell::Numeric(if n == 0 { f64::NAN } else { sum / n as f64 })
                }
                ColumnData::Categorical(values) => Cell::Categorical(mode_first_seen(values)),
            };
            (c.name.clone(), cell)
        })
        .collect();
    Ok(AggregatedRow {
        timestamp: window.timestamps()[0],
        cells,
    })
}

fn mode_first_seen(values: &[String]) -> String {
    let mut counts: Vec<(&str, usize)> = Vec::new();
    for v in values {
        match counts.iter_mut().find(|(k, _)| *k == v) {
            Some(entry) => entry.1 += 1,
            None => counts.push((v, 1)),
        }
    }
    // max_by_key returns the last maximum; scan manually to keep the first.
    let mut best = counts[0];
    for &(k, n) in &counts[1..] {
        if n > best.1 {
            best = (k, n);
        }
    }
    best.0.to_owned()
}

/// Aggregates consecutive non-overlapping blocks of `width` rows; a short
/// trailing block is aggregated as-is.
pub fn aggregate_blocks(t: &TimeTable, width: usize) -> Result<TimeTable> {
    if width == 0 {
        return Err(Error::InvalidParameter("aggregation width must be positive".into()));
    }
    if width == 1 {
        return Ok(t.clone());
    }
    let rows: Vec<AggregatedRow> = (0..t.len())
        .step_by(width)
        .map(|start| aggregate_window(&t.slice_rows(start, (start + width).min(t.len()))))
        .collect::<Result<_>>()?;
    let timestamps = rows.iter().map(|r| r.timestamp).collect();
    let columns = t
        .columns()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let data = match c.data {
                ColumnData::Numeric { .. } => ColumnData::numeric(
                    rows.iter()
                        .map(|r| match &r.cells[i].1 {
                            Cell::Numeric(v) => *v,
                            Cell::Categorical(_) => unreachable!(),
                        })
                        .collect(),
                ),
                ColumnData::Categorical(_) => ColumnData::Categorical(
                    rows.iter()
                        .map(|r| match &r.cells[i].1 {
                            Cell::Categorical(s) => s.clone(),
                            Cell::Numeric(_) => unreachable!(),
                        })
                        .collect(),
                ),
            };
            Column::new(c.name.clone(), data)
        })
        .collect();
    Ok(TimeTable::from_parts(t, timestamps, columns))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn table(n: usize) -> TimeTable {
        let base = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let ts = (0..n).map(|i| base + chrono::Duration::hours(i as i64)).collect();
        TimeTable::new(
            "date",
            ts,
            vec![Column::new("x", ColumnData::numeric((0..n).map(|i| i as f64).collect()))],
        )
        .unwrap()
    }

    #[test]
    fn split_sizes() {
        let spec = SplitSpec::default();
        assert_eq!(spec.sizes(10).unwrap(), (7, 1, 2));
        assert_eq!(spec.sizes(100).unwrap(), (70, 10, 20));
        assert!(spec.sizes(5).is_err());
    }

    #[test]
    fn split_is_chronological_and_disjoint() {
        let t = table(37);
        let (a, b, c) = temporal_split(&t, &SplitSpec::default()).unwrap();
        assert_eq!(a.len() + b.len() + c.len(), 37);
        assert!(a.timestamps().last() < b.timestamps().first());
        assert!(b.timestamps().last() < c.timestamps().first());
        assert_eq!(c.timestamps(), &t.timestamps()[37 - c.len()..]);
    }

    #[test]
    fn bad_fractions_rejected() {
        assert!(SplitSpec::new(0.5, 0.1, 0.2).is_err());
        assert!(SplitSpec::new(0.9, 0.0, 0.1).is_err());
        assert!(SplitSpec::new(0.6, 0.2, 0.2).is_ok());
    }

    fn mixed(values: Vec<f64>, cats: Vec<&str>) -> TimeTable {
        let base = NaiveDate::from_ymd_opt(2020, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let ts = (0..values.len()).map(|i| base + chrono::Duration::hours(i as i64)).collect();
        TimeTable::new(
            "date",
            ts,
            vec![
                Column::new("x", ColumnData::numeric(values)),
                Column::new("c", ColumnData::categorical(cats)),
            ],
        )
        .unwrap()
    }

    #[test]
    fn aggregate_examples() {
        let row = aggregate_window(&mixed(vec![1.0, 2.0, 3.0], vec!["a", "a", "b"])).unwrap();
        assert_eq!(row.cells[0].1, Cell::Numeric(2.0));
        assert_eq!(row.cells[1].1, Cell::Categorical("a".into()));

        let row = aggregate_window(&mixed(vec![1.0, 2.0], vec!["a", "b"])).unwrap();
        assert_eq!(row.cells[1].1, Cell::Categorical("a".into()));

        let row = aggregate_window(&mixed(vec![1.0, 2.0, 3.0], vec!["b", "a", "a"])).unwrap();
        assert_eq!(row.cells[1].1, Cell::Categorical("a".into()));
    }

    #[test]
    fn aggregate_empty_window_errors() {
        let t = mixed(vec![1.0], vec!["a"]);
        assert!(aggregate_window(&t.slice_rows(0, 0)).is_err());
    }

    #[test]
    fn aggregate_blocks_downsamples() {
        let t = mixed(vec![1.0, 3.0, 5.0, 7.0, 9.0], vec!["a", "b", "b", "b", "c"]);
        let a = aggregate_blocks(&t, 2).unwrap();
        assert_eq!(a.len(), 3);
        assert_eq!(a.numeric("x").unwrap(), &[2.0, 6.0, 9.0]);
        assert_eq!(a.categorical("c").unwrap(), &["a", "b", "c"]);
        assert_eq!(a.timestamps()[1], t.timestamps()[2]);
    }
}
