//! Binary model file: magic `HCAST1`, then little-endian fields.

use std::path::Path;

use ndarray::{Array1, Array2};

use crate::dataset::{ColumnScale, NormalizationParams, ScaleMode};
use crate::decompose::{CategoricalEncoder, ChannelMap};
use crate::error::{Error, Result};
use crate::frame::InputLayout;
use crate::models::{LinearWeights, ModelVariant, VariantKind};

pub const MAGIC: &[u8; 6] = b"HCAST1";

/// A trained forecaster with everything needed to run it on raw data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelContainer {
    pub model: ModelVariant,
    pub normalization: NormalizationParams,
    pub numeric_names: Vec<String>,
    pub datetime_name: String,
    pub encoders: Vec<CategoricalEncoder>,
    pub channels: ChannelMap,
    /// Median sampling interval of the training data.
    pub interval_seconds: i64,
}

#[derive(Default)]
struct Writer(Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }
    fn u64(&mut self, v: usize) {
        self.0.extend_from_slice(&(v as u64).to_le_bytes());
    }
    fn i64(&mut self, v: i64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }
    fn f64s<'a>(&mut self, vs: impl IntoIterator<Item = &'a f64>) {
        for v in vs {
            self.0.extend_from_slice(&v.to_le_bytes());
        }
    }
    fn str(&mut self, s: &str) {
        self.u64(s.len());
        self.0.extend_from_slice(s.as_bytes());
    }
    fn strs(&mut self, ss: &[String]) {
        self.u64(ss.len());
        for s in ss {
            self.str(s);
        }
    }
    fn matrix(&mut self, m: &Array2<f64>) {
        self.u64(m.nrows());
        self.u64(m.ncols());
        self.f64s(m.iter());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

fn bad(msg: impl Into<String>) -> Error {
    Error::BadModelFile(msg.into())
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Result<&[u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or_else(|| bad("truncated"))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes"));
        usize::try_from(v).map_err(|_| bad("size out of range"))
    }
    fn i64(&mut self) -> Result<i64> {
        Ok(i64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        if n > self.buf.len() / 8 {
            return Err(bad("truncated"));
        }
        (0..n).map(|_| self.f64()).collect()
    }
    fn str(&mut self) -> Result<String> {
        let n = self.u64()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| bad("invalid utf-8 string"))
    }
    fn strs(&mut self) -> Result<Vec<String>> {
        let n = self.u64()?;
        if n > self.buf.len() {
            return Err(bad("truncated"));
        }
        (0..n).map(|_| self.str()).collect()
    }
    fn matrix(&mut self) -> Result<Array2<f64>> {
        let r = self.u64()?;
        let c = self.u64()?;
        let n = r.checked_mul(c).ok_or_else(|| bad("matrix too large"))?;
        Array2::from_shape_vec((r, c), self.f64s(n)?).map_err(|_| bad("matrix shape"))
    }
}

impl ModelContainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let m = &self.model;
        let mut w = Writer::default();
        w.0.extend_from_slice(MAGIC);
        w.u8(m.kind.code());
        w.u64(m.lookback);
        w.u64(m.horizon);
        w.u64(m.kernel);
        w.u64(m.layout.n_numeric);
        w.u64(m.layout.cat_width);
        w.u64(m.layout.targets.len());
        for &t in &m.layout.targets {
            w.u64(t);
        }
        w.u64(m.layers.len());
        for l in &m.layers {
            w.matrix(&l.weight);
            match &l.bias {
                Some(b) => {
                    w.u8(1);
                    w.f64s(b.iter());
                }
                None => w.u8(0),
            }
        }
        match &m.noise {
            Some(n) => {
                w.u8(1);
                w.matrix(n);
            }
            None => w.u8(0),
        }
        w.u8(match self.normalization.mode {
            ScaleMode::MinMax => 0,
            ScaleMode::ZScore => 1,
        });
        w.u64(self.normalization.columns.len());
        for c in &self.normalization.columns {
            w.str(&c.name);
            w.f64s([c.lo, c.hi].iter());
        }
        w.strs(&self.numeric_names);
        w.str(&self.datetime_name);
        w.u64(self.encoders.len());
        for e in &self.encoders {
            w.str(&e.column);
            w.strs(&e.vocabulary);
        }
        w.str(&self.channels.to_text());
        w.i64(self.interval_seconds);
        w.0
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self> {
        if buf.len() < MAGIC.len() || &buf[..MAGIC.len()] != MAGIC {
            return Err(bad("missing HCAST1 header"));
        }
        let mut r = Reader {
            buf,
            pos: MAGIC.len(),
        };
        let kind = VariantKind::from_code(r.u8()?).ok_or_else(|| bad("unknown variant code"))?;
        let lookback = r.u64()?;
        let horizon = r.u64()?;
        let kernel = r.u64()?;
        let n_numeric = r.u64()?;
        let cat_width = r.u64()?;
        let n_targets = r.u64()?;
        let targets = (0..n_targets).map(|_| r.u64()).collect::<Result<Vec<_>>>()?;
        let n_layers = r.u64()?;
        let mut layers = Vec::new();
        for _ in 0..n_layers.min(2) {
            let weight = r.matrix()?;
            let bias = match r.u8()? {
                0 => None,
                _ => Some(Array1::from(r.f64s(weight.nrows())?)),
            };
            layers.push(LinearWeights::new(weight, bias)?);
        }
        if layers.len() != n_layers {
            return Err(bad("too many weight layers"));
        }
        let noise = match r.u8()? {
            0 => None,
            _ => Some(r.matrix()?),
        };
        let layout = InputLayout {
            n_numeric,
            cat_width,
            targets,
        };
        let mut model = ModelVariant::from_weights(kind, lookback, horizon, kernel, layout, layers)
            .map_err(|e| bad(e.to_string()))?;
        if let Some(n) = &noise {
            if n.nrows() != model.layers[0].out_dim() {
                return Err(bad("noise weights do not match the output size"));
            }
        }
        model.noise = noise;

        let mode = match r.u8()? {
            0 => ScaleMode::MinMax,
            1 => ScaleMode::ZScore,
            _ => return Err(bad("unknown normalization mode")),
        };
        let n_cols = r.u64()?;
        let mut columns = Vec::new();
        for _ in 0..n_cols.min(buf.len()) {
            let name = r.str()?;
            let lo = r.f64()?;
            let hi = r.f64()?;
            columns.push(ColumnScale { name, lo, hi });
        }
        let numeric_names = r.strs()?;
        let datetime_name = r.str()?;
        let n_enc = r.u64()?;
        let mut encoders = Vec::new();
        for _ in 0..n_enc.min(buf.len()) {
            let column = r.str()?;
            let vocab = r.strs()?;
            encoders.push(CategoricalEncoder::from_vocabulary(column, vocab).map_err(|e| bad(e.to_string()))?);
        }
        let channels = ChannelMap::from_text(&r.str()?)?;
        let interval_seconds = r.i64()?;
        if r.pos != buf.len() {
            return Err(bad("trailing bytes"));
        }
        if numeric_names.len() != n_numeric
            || encoders.iter().map(CategoricalEncoder::width).sum::<usize>() != cat_width
            || channels != ChannelMap::new(&numeric_names, &encoders, &datetime_name)
        {
            return Err(bad("column metadata does not match the model layout"));
        }
        Ok(Self {
            model,
            normalization: NormalizationParams { mode, columns },
            numeric_names,
            datetime_name,
            encoders,
            channels,
            interval_seconds,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        let buf = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&buf)
    }
}
