use std::fmt;

use ndarray::Array2;

use crate::error::{Error, Result};

/// Vocabularies up to this size are one-hot encoded, larger ones ordinal.
pub const ONE_HOT_LIMIT: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingMode {
    OneHot,
    Ordinal,
}

impl fmt::Display for EncodingMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EncodingMode::OneHot => "one_hot",
            EncodingMode::Ordinal => "ordinal",
        })
    }
}

/// Encoder for one categorical column, fitted on the training split.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoricalEncoder {
    pub column: String,
    /// Distinct training values in order of first appearance.
    pub vocabulary: Vec<String>,
    pub mode: EncodingMode,
}

impl CategoricalEncoder {
    pub fn fit(column: impl Into<String>, train_values: &[String]) -> Result<Self> {
        let mut vocabulary: Vec<String> = Vec::new();
        for v in train_values {
            if !vocabulary.contains(v) {
                vocabulary.push(v.clone());
            }
        }
        Self::from_vocabulary(column, vocabulary)
    }

    pub fn from_vocabulary(column: impl Into<String>, vocabulary: Vec<String>) -> Result<Self> {
        let column = column.into();
        if vocabulary.is_empty() {
            return Err(Error::InvalidParameter(format!(
                "categorical column `{column}` has an empty vocabulary"
            )));
        }
        let mode = if vocabulary.len() <= ONE_HOT_LIMIT {
            EncodingMode::OneHot
        } else {
            EncodingMode::Ordinal
        };
        Ok(Self {
            column,
            vocabulary,
            mode,
        })
    }

    pub fn width(&self) -> usize {
        match self.mode {
            EncodingMode::OneHot => self.vocabulary.len(),
            EncodingMode::Ordinal => 1,
        }
    }

    /// Writes the encoding of `value` into `out` (length `width()`).
    ///
    /// Unseen values give an all-zero one-hot row, or ordinal 1.0 (the
    /// slot past the last index, clipped into range).
    pub fn encode_into(&self, value: &str, out: &mut [f64]) {
        let index = self.vocabulary.iter().position(|v| v == value);
        match self.mode {
            EncodingMode::OneHot => {
                out.fill(0.0);
                if let Some(i) = index {
                    out[i] = 1.0;
                }
            }
            EncodingMode::Ordinal => {
                let denom = (self.vocabulary.len() - 1) as f64;
                out[0] = match index {
                    Some(i) => i as f64 / denom,
                    None => (1.0 + 1.0 / denom).min(1.0),
                };
            }
        }
    }

    pub fn encode(&self, values: &[String]) -> CategoricalEncoding {
        let mut encoded = Array2::zeros((values.len(), self.width()));
        for (v, mut row) in values.iter().zip(encoded.rows_mut()) {
            self.encode_into(v, row.as_slice_mut().expect("standard layout"));
        }
        CategoricalEncoding {
            encoder: self.clone(),
            encoded,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CategoricalEncoding {
    pub encoder: CategoricalEncoder,
    /// One row per input value.
    pub encoded: Array2<f64>,
}

/// Encodes `col` against a vocabulary taken from the training split.
pub fn encode_categoricals(col: &[String], vocabulary: &[String]) -> Result<CategoricalEncoding> {
    let encoder = CategoricalEncoder::from_vocabulary("", vocabulary.to_vec())?;
    Ok(encoder.encode(col))
}
