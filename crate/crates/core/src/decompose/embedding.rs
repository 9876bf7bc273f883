use std::fmt;
use std::str::FromStr;

use ndarray::{s, Array2, ArrayView2};

use crate::dataset::TimeTable;
use crate::decompose::categorical::CategoricalEncoder;
use crate::decompose::temporal::{extract_temporal, TEMPORAL_WIDTH};
use crate::decompose::trend::{check_kernel, decompose_unchecked};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelRole {
    Trend,
    Seasonal,
    Categorical,
    Temporal,
}

impl fmt::Display for ChannelRole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChannelRole::Trend => "trend",
            ChannelRole::Seasonal => "seasonal",
            ChannelRole::Categorical => "cat",
            ChannelRole::Temporal => "temporal",
        })
    }
}

impl FromStr for ChannelRole {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trend" => Ok(ChannelRole::Trend),
            "seasonal" => Ok(ChannelRole::Seasonal),
            "cat" => Ok(ChannelRole::Categorical),
            "temporal" => Ok(ChannelRole::Temporal),
            other => Err(Error::BadModelFile(format!("unknown channel role `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Channel {
    pub source: String,
    pub role: ChannelRole,
}

/// Names the source column and role of every embedding slot.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelMap {
    pub channels: Vec<Channel>,
}

impl ChannelMap {
    pub fn new(
        numeric: &[String],
        encoders: &[CategoricalEncoder],
        datetime_name: &str,
    ) -> Self {
        let mut channels = Vec::new();
        for role in [ChannelRole::Trend, ChannelRole::Seasonal] {
            channels.extend(numeric.iter().map(|n| Channel {
                source: n.clone(),
                role,
            }));
        }
        for e in encoders {
            channels.extend((0..e.width()).map(|_| Channel {
                source: e.column.clone(),
                role: ChannelRole::Categorical,
            }));
        }
        channels.extend((0..TEMPORAL_WIDTH).map(|_| Channel {
            source: datetime_name.to_owned(),
            role: ChannelRole::Temporal,
        }));
        Self { channels }
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn count(&self, role: ChannelRole) -> usize {
        self.channels.iter().filter(|c| c.role == role).count()
    }

    /// One `<index>:<source-column>:<role>` line per channel.
    pub fn to_text(&self) -> String {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{i}:{}:{}\n", c.source, c.role))
            .collect()
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut channels = Vec::new();
        for (expected, line) in text.lines().filter(|l| !l.is_empty()).enumerate() {
            let bad = || Error::BadModelFile(format!("bad channel line `{line}`"));
            let (index, rest) = line.split_once(':').ok_or_else(bad)?;
            let (source, role) = rest.rsplit_once(':').ok_or_else(bad)?;
            if index.parse::<usize>().ok() != Some(expected) {
                return Err(bad());
            }
            channels.push(Channel {
                source: source.to_owned(),
                role: role.parse()?,
            });
        }
        Ok(Self { channels })
    }
}

/// Per-timestep embedded vectors, `N x d`, with their channel map.
#[derive(Debug, Clone, PartialEq)]
pub struct DecomposedEmbedding {
    pub values: Array2<f64>,
    pub channels: ChannelMap,
}

impl DecomposedEmbedding {
    pub fn width(&self) -> usize {
        self.values.ncols()
    }
}

/// Embedding width for `n_numeric` numeric channels and `cat_width`
/// encoded categorical slots.
pub fn embedding_width(n_numeric: usize, cat_width: usize) -> usize {
    2 * n_numeric + cat_width + TEMPORAL_WIDTH
}

/// Decomposes the numeric block over the given rows and concatenates
/// `[trend | seasonal | categorical | temporal]` per row.
pub fn embed_rows(
    numeric: ArrayView2<'_, f64>,
    categorical: ArrayView2<'_, f64>,
    temporal: ArrayView2<'_, f64>,
    kernel: usize,
) -> Array2<f64> {
    let (n, f) = numeric.dim();
    let c = categorical.ncols();
    let mut out = Array2::zeros((n, embedding_width(f, c)));
    let (trend, seasonal) = decompose_unchecked(numeric, kernel);
    out.slice_mut(s![.., ..f]).assign(&trend);
    out.slice_mut(s![.., f..2 * f]).assign(&seasonal);
    out.slice_mut(s![.., 2 * f..2 * f + c]).assign(&categorical);
    out.slice_mut(s![.., 2 * f + c..]).assign(&temporal);
    out
}

/// Embeds a whole (imputed, normalized) table, fitting categorical
/// encoders on the table itself.
pub fn build_embedding(t: &TimeTable, kernel: usize) -> Result<DecomposedEmbedding> {
    let encoders = t
        .categorical_names()
        .into_iter()
        .map(|name| CategoricalEncoder::fit(name, t.categorical(name).unwrap_or(&[])))
        .collect::<Result<Vec<_>>>()?;
    build_embedding_with(t, &encoders, kernel)
}

/// Embeds a table with encoders fitted elsewhere (normally on the
/// training split).
pub fn build_embedding_with(
    t: &TimeTable,
    encoders: &[CategoricalEncoder],
    kernel: usize,
) -> Result<DecomposedEmbedding> {
    check_kernel(kernel)?;
    if t.has_missing() {
        return Err(Error::InvalidParameter(
            "table must be imputed before embedding".into(),
        ));
    }
    let numeric_names: Vec<String> = t.numeric_names().into_iter().map(String::from).collect();
    let n = t.len();
    let mut numeric = Array2::zeros((n, numeric_names.len()));
    for (j, name) in numeric_names.iter().enumerate() {
        let col = t.numeric(name).expect("listed as numeric");
        numeric.column_mut(j).assign(&ndarray::aview1(col));
    }
    let cat_width: usize = encoders.iter().map(CategoricalEncoder::width).sum();
    let mut categorical = Array2::zeros((n, cat_width));
    let mut offset = 0;
    for e in encoders {
        let values = t
            .categorical(&e.column)
            .ok_or_else(|| Error::UnknownColumn(e.column.clone()))?;
        let enc = e.encode(values);
        categorical
            .slice_mut(s![.., offset..offset + e.width()])
            .assign(&enc.encoded);
        offset += e.width();
    }
    let temporal = extract_temporal(t.timestamps()).values;
    let values = embed_rows(numeric.view(), categorical.view(), temporal.view(), kernel);
    let channels = ChannelMap::new(&numeric_names, encoders, t.datetime_name());
    debug_assert_eq!(channels.len(), values.ncols());
    Ok(DecomposedEmbedding { values, channels })
}
