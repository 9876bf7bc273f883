use std::fmt;
use std::str::FromStr;

use crate::dataset::table::{Column, ColumnData, TimeTable};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScaleMode {
    /// `(v - min) / (max - min)`
    #[default]
    MinMax,
    /// `(v - mean) / std`, population standard deviation.
    ZScore,
}

impl fmt::Display for ScaleMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScaleMode::MinMax => "minmax",
            ScaleMode::ZScore => "zscore",
        })
    }
}

impl FromStr for ScaleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "minmax" | "min-max" => Ok(ScaleMode::MinMax),
            "zscore" | "z-score" => Ok(ScaleMode::ZScore),
            other => Err(Error::Config(format!("unknown normalization `{other}`"))),
        }
    }
}

/// Per-column scaling statistics.
///
/// For min-max, `(lo, hi)` is `(min, max)`; for z-score it is `(mean, std)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnScale {
    pub name: String,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalizationParams {
    pub mode: ScaleMode,
    pub columns: Vec<ColumnScale>,
}

impl NormalizationParams {
    /// Fits statistics on every numeric column of `t`, which must be complete.
    pub fn fit(t: &TimeTable, mode: ScaleMode) -> Result<Self> {
        let mut columns = Vec::new();
        for c in t.columns() {
            let ColumnData::Numeric { values, missing } = &c.data else {
                continue;
            };
            if missing.iter().any(|&m| m) {
                return Err(Error::InvalidParameter(format!(
                    "column `{}` must be imputed before normalization",
                    c.name
                )));
            }
            let (lo, hi) = match mode {
                ScaleMode::MinMax => values
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                        (lo.min(v), hi.max(v))
                    }),
                ScaleMode::ZScore => {
                    let n = values.len() as f64;
                    let mean = values.iter().sum::<f64>() / n;
                    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
                    (mean, var.sqrt())
                }
            };
            columns.push(ColumnScale {
                name: c.name.clone(),
                lo,
                hi,
            });
        }
        Ok(Self { mode, columns })
    }

    pub fn get(&self, name: &str) -> Option<&ColumnScale> {
        self.columns.iter().find(|c| c.name == name)
    }

    /// Multiplier that maps a normalized difference back to raw units.
    /// Zero for a constant column.
    pub fn span(&self, name: &str) -> Option<f64> {
        let c = self.get(name)?;
        Some(match self.mode {
            ScaleMode::MinMax => c.hi - c.lo,
            ScaleMode::ZScore => c.hi,
        })
    }

    pub fn forward_value(&self, c: &ColumnScale, v: f64) -> f64 {
        match self.mode {
            // constant column: all zeros
            ScaleMode::MinMax if c.hi == c.lo => 0.0,
            ScaleMode::MinMax => (v - c.lo) / (c.hi - c.lo),
            ScaleMode::ZScore if c.hi == 0.0 => 0.0,
            ScaleMode::ZScore => (v - c.lo) / c.hi,
        }
    }

    pub fn inverse_value(&self, c: &ColumnScale, v: f64) -> f64 {
        match self.mode {
            ScaleMode::MinMax => v * (c.hi - c.lo) + c.lo,
            ScaleMode::ZScore => v * c.hi + c.lo,
        }
    }

    /// Normalizes every numeric column that has fitted statistics.
    pub fn apply(&self, t: &TimeTable) -> Result<TimeTable> {
        self.map(t, |p, c, v| p.forward_value(c, v))
    }

    pub fn invert(&self, t: &TimeTable) -> Result<TimeTable> {
        self.map(t, |p, c, v| p.inverse_value(c, v))
    }

    fn map(
        &self,
        t: &TimeTable,
        f: impl Fn(&Self, &ColumnScale, f64) -> f64,
    ) -> Result<TimeTable> {
        let mut columns = Vec::with_capacity(t.columns().len());
        for c in t.columns() {
            let data = match &c.data {
                ColumnData::Numeric { values, missing } => {
                    let scale = self
                        .get(&c.name)
                        .ok_or_else(|| Error::UnknownColumn(c.name.clone()))?;
                    ColumnData::Numeric {
                        values: values.iter().map(|&v| f(self, scale, v)).collect(),
                        missing: missing.clone(),
                    }
                }
                other => other.clone(),
            };
            columns.push(Column::new(c.name.clone(), data));
        }
        Ok(t.with_columns(columns))
    }

    /// Plain-text form: a `mode = ...` line, then `name,lo,hi` per column.
    pub fn to_text(&self) -> String {
        let mut s = format!("mode = {}\n", self.mode);
        for c in &self.columns {
            s.push_str(&format!("{},{},{}\n", c.name, c.lo, c.hi));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let mode = lines
            .next()
            .and_then(|l| l.split_once('='))
            .ok_or_else(|| Error::Config("normalization file lacks a mode line".into()))?
            .1
            .parse()?;
        let mut columns = Vec::new();
        for line in lines {
            let mut parts = line.rsplitn(3, ',');
            let (hi, lo, name) = (parts.next(), parts.next(), parts.next());
            let (Some(hi), Some(lo), Some(name)) = (hi, lo, name) else {
                return Err(Error::Config(format!("bad normalization line `{line}`")));
            };
            let parse = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::Config(format!("bad number in `{line}`")))
            };
            columns.push(ColumnScale {
                name: name.to_owned(),
                lo: parse(lo)?,
                hi: parse(hi)?,
            });
        }
        Ok(Self { mode, columns })
    }
}

/// Min-max normalizes `t` with statistics fitted on `t` itself.
pub fn normalize(t: &TimeTable) -> Result<(TimeTable, NormalizationParams)> {
    normalize_with(t, ScaleMode::MinMax)
}

pub fn normalize_with(t: &TimeTable, mode: ScaleMode) -> Result<(TimeTable, NormalizationParams)> {
    let params = NormalizationParams::fit(t, mode)?;
    Ok((params.apply(t)?, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn table(values: Vec<f64>) -> TimeTable {
        let base = NaiveDate::from_ymd_opt(2021, 3, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let ts = (0..values.len())
            .map(|i| base + chrono::Duration::days(i as i64))
            .collect();
        TimeTable::new("date", ts, vec![Column::new("x", ColumnData::numeric(values))]).unwrap()
    }

    #[test]
    fn minmax_example() {
        let (t, p) = normalize(&table(vec![0.0, 5.0, 10.0])).unwrap();
        assert_eq!(t.numeric("x").unwrap(), &[0.0, 0.5, 1.0]);
        assert_eq!((p.columns[0].lo, p.columns[0].hi), (0.0, 10.0));
    }

    #[test]
    fn constant_column_maps_to_zero() {
        let (t, p) = normalize(&table(vec![4.0, 4.0, 4.0])).unwrap();
        assert_eq!(t.numeric("x").unwrap(), &[0.0, 0.0, 0.0]);
        assert_eq!((p.columns[0].lo, p.columns[0].hi), (4.0, 4.0));
        let back = p.invert(&t).unwrap();
        assert_eq!(back.numeric("x").unwrap(), &[4.0, 4.0, 4.0]);
    }

    #[test]
    fn zscore_constant_column() {
        let (t, p) = normalize_with(&table(vec![2.0, 2.0]), ScaleMode::ZScore).unwrap();
        assert_eq!(t.numeric("x").unwrap(), &[0.0, 0.0]);
        assert_eq!(p.invert(&t).unwrap().numeric("x").unwrap(), &[2.0, 2.0]);
    }

    #[test]
    fn text_round_trip() {
        let (_, p) = normalize(&table(vec![0.1, -3.7, 12.25])).unwrap();
        assert_eq!(NormalizationParams::from_text(&p.to_text()).unwrap(), p);
    }

    #[test]
    fn train_only_fit_can_exceed_unit_range_elsewhere() {
        let train = table(vec![0.0, 1.0, 2.0]);
        let p = NormalizationParams::fit(&train, ScaleMode::MinMax).unwrap();
        let test = p.apply(&table(vec![4.0])).unwrap();
        assert_eq!(test.numeric("x").unwrap(), &[2.0]);
    }

    proptest! {
        #[test]
        fn round_trip(values in proptest::collection::vec(-1e6f64..1e6, 1..60), z in any::<bool>()) {
            let mode = if z { ScaleMode::ZScore } else { ScaleMode::MinMax };
            let t = table(values.clone());
            let (n, p) = normalize_with(&t, mode).unwrap();
            let back = p.invert(&n).unwrap();
            let scale = values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in back.numeric("x").unwrap().iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-12 * scale);
            }
            if mode == ScaleMode::MinMax {
                for v in n.numeric("x").unwrap() {
                    prop_assert!((0.0..=1.0).contains(v));
                }
            }
        }
    }
}
