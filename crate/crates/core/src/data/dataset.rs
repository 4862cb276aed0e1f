use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use ndarray::{Array2, ArrayView2, Axis};

use super::corpus::LabeledCorpus;
use super::text::preprocess;
use super::wordvec::{embed_document, WordVectorTable};
use crate::error::{Error, Result};

/// Magic bytes opening an embedding cache file.
pub const CACHE_MAGIC: &[u8; 4] = b"EMB1";

/// Per-feature min/max statistics mapping columns onto `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(features: ArrayView2<'_, f64>) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::Empty("cannot fit a scaler on zero rows".into()));
        }
        let mut mins = Vec::with_capacity(features.ncols());
        let mut maxs = Vec::with_capacity(features.ncols());
        for (j, col) in features.axis_iter(Axis(1)).enumerate() {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &v in col {
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!("non-finite value in column {j}")));
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
            mins.push(lo);
            maxs.push(hi);
        }
        Ok(MinMaxScaler { mins, maxs })
    }

    pub fn dim(&self) -> usize {
        self.mins.len()
    }

    /// Maps each column by `(x - min) / (max - min)`, clamped into `[0, 1]`.
    /// Constant columns map to 0.5.
    pub fn transform(&self, features: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_dim(features.ncols())?;
        let mut out = features.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.mins[j], self.maxs[j]);
            let range = hi - lo;
            col.mapv_inplace(|v| {
                if range > 0.0 {
                    ((v - lo) / range).clamp(0.0, 1.0)
                } else {
                    0.5
                }
            });
        }
        Ok(out)
    }

    /// Inverse of [`MinMaxScaler::transform`] for unclamped values. Constant
    /// columns map back to their single value.
    pub fn inverse_transform(&self, scaled: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        self.check_dim(scaled.ncols())?;
        let mut out = scaled.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (lo, hi) = (self.mins[j], self.maxs[j]);
            let range = hi - lo;
            col.mapv_inplace(|s| if range > 0.0 { lo + s * range } else { lo });
        }
        Ok(out)
    }

    fn check_dim(&self, d: usize) -> Result<()> {
        if d != self.dim() {
            return Err(Error::Dimension(format!(
                "scaler has {} features, data has {d}",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Row-major sentence embeddings with one class label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset {
    features: Array2<f64>,
    labels: Vec<usize>,
    scaler: Option<MinMaxScaler>,
}

impl EmbeddedDataset {
    pub fn new(features: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        if features.nrows() != labels.len() {
            return Err(Error::Dimension(format!(
                "{} feature rows but {} labels",
                features.nrows(),
                labels.len()
            )));
        }
        if let Some(((i, j), _)) = features.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite feature at ({i}, {j})")));
        }
        Ok(EmbeddedDataset {
            features,
            labels,
            scaler: None,
        })
    }

    /// Attaches a scaler to data that has already been transformed by it.
    pub fn with_scaler(mut self, scaler: MinMaxScaler) -> Result<Self> {
        scaler.check_dim(self.dim())?;
        if self.features.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidArgument(
                "scaled dataset has values outside [0, 1]".into(),
            ));
        }
        self.scaler = Some(scaler);
        Ok(self)
    }

    pub fn features(&self) -> ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn scaler(&self) -> Option<&MinMaxScaler> {
        self.scaler.as_ref()
    }

    pub fn is_scaled(&self) -> bool {
        self.scaler.is_some()
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    /// Number of distinct labels present.
    pub fn num_classes(&self) -> usize {
        let mut seen: Vec<usize> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Rows at `indices`, in that order. The scaler is carried over.
    pub fn select(&self, indices: &[usize]) -> Self {
        EmbeddedDataset {
            features: self.features.select(Axis(0), indices),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            scaler: self.scaler.clone(),
        }
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<usize>, Option<MinMaxScaler>) {
        (self.features, self.labels, self.scaler)
    }
}

/// Fits a min-max scaler on `dataset` and returns the scaled copy.
pub fn minmax_scale(dataset: &EmbeddedDataset) -> Result<EmbeddedDataset> {
    let scaler = MinMaxScaler::fit(dataset.features())?;
    let features = scaler.transform(dataset.features())?;
    EmbeddedDataset::new(features, dataset.labels.clone())?.with_scaler(scaler)
}

/// Embedded corpus together with the rows that had no in-vocabulary token.
#[derive(Debug, Clone)]
pub struct EmbeddingOutcome {
    pub dataset: EmbeddedDataset,
    pub fallback_rows: Vec<usize>,
}

/// Preprocesses and embeds every document in order. Features are rounded to
/// single precision so they survive the cache format unchanged.
pub fn embed_corpus(corpus: &LabeledCorpus, table: &WordVectorTable) -> Result<EmbeddingOutcome> {
    let d = table.dim();
    let mut features = Array2::<f64>::zeros((corpus.len(), d));
    let mut fallback_rows = Vec::new();
    for (i, doc) in corpus.documents.iter().enumerate() {
        let tokens = preprocess(doc);
        let emb = embed_document(&tokens, table);
        if emb.is_fallback() {
            fallback_rows.push(i);
        }
        for (dst, v) in features.row_mut(i).iter_mut().zip(emb.vector) {
            *dst = f64::from(v as f32);
        }
    }
    Ok(EmbeddingOutcome {
        dataset: EmbeddedDataset::new(features, corpus.labels.clone())?,
        fallback_rows,
    })
}

/// [`embed_corpus`] followed by [`write_cache`].
pub fn build_embedding_cache(
    corpus: &LabeledCorpus,
    table: &WordVectorTable,
    out: impl AsRef<Path>,
) -> Result<EmbeddingOutcome> {
    let outcome = embed_corpus(corpus, table)?;
    write_cache(&outcome.dataset, out)?;
    Ok(outcome)
}

pub fn write_cache(dataset: &EmbeddedDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let tmp = path.with_extension("tmp");
    let file = File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    let mut w = BufWriter::new(file);
    write_cache_to(dataset, &mut w).map_err(|e| Error::io(&tmp, e))?;
    w.flush().map_err(|e| Error::io(&tmp, e))?;
    drop(w);
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

/// Serializes `dataset` in the `EMB1` layout (all integers and floats
/// little-endian, features as f32).
pub fn write_cache_to(dataset: &EmbeddedDataset, w: &mut impl Write) -> std::io::Result<()> {
    let to_u32 = |v: usize| u32::try_from(v).map_err(|_| std::io::Error::other(format!("{v} does not fit in u32")));
    w.write_all(CACHE_MAGIC)?;
    w.write_all(&to_u32(dataset.len())?.to_le_bytes())?;
    w.write_all(&to_u32(dataset.dim())?.to_le_bytes())?;
    w.write_all(&[u8::from(dataset.is_scaled())])?;
    for &v in dataset.features.iter() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    for &l in &dataset.labels {
        w.write_all(&to_u32(l)?.to_le_bytes())?;
    }
    if let Some(s) = &dataset.scaler {
        for &v in s.mins.iter().chain(&s.maxs) {
            w.write_all(&(v as f32).to_le_bytes())?;
        }
    }
    Ok(())
}

pub fn read_cache(path: impl AsRef<Path>) -> Result<EmbeddedDataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_cache_from(BufReader::new(file))
}

pub fn read_cache_from(mut r: impl Read) -> Result<EmbeddedDataset> {
    let bad = |message: String| Error::Format {
        what: "embedding cache",
        message,
    };
    let mut buf4 = [0u8; 4];
    let mut read4 = |r: &mut dyn Read, what: &str| -> Result<[u8; 4]> {
        r.read_exact(&mut buf4)
            .map_err(|e| bad(format!("truncated while reading {what}: {e}")))?;
        Ok(buf4)
    };
    if &read4(&mut r, "magic")? != CACHE_MAGIC {
        return Err(bad("missing EMB1 magic".into()));
    }
    let n = u32::from_le_bytes(read4(&mut r, "row count")?) as usize;
    let d = u32::from_le_bytes(read4(&mut r, "dimension")?) as usize;
    let mut flag = [0u8; 1];
    r.read_exact(&mut flag)
        .map_err(|e| bad(format!("truncated while reading scaled flag: {e}")))?;
    let scaled = match flag[0] {
        0 => false,
        1 => true,
        other => return Err(bad(format!("scaled flag must be 0 or 1, found {other}"))),
    };
    let mut features = Vec::with_capacity(n * d);
    for _ in 0..n * d {
        features.push(f64::from(f32::from_le_bytes(read4(&mut r, "features")?)));
    }
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        labels.push(u32::from_le_bytes(read4(&mut r, "labels")?) as usize);
    }
    let features = Array2::from_shape_vec((n, d), features).expect("length is n * d");
    let mut dataset = EmbeddedDataset::new(features, labels)?;
    if scaled {
        let mut vals = Vec::with_capacity(2 * d);
        for _ in 0..2 * d {
            vals.push(f64::from(f32::from_le_bytes(read4(&mut r, "scaler")?)));
        }
        let maxs = vals.split_off(d);
        dataset = dataset.with_scaler(MinMaxScaler { mins: vals, maxs })?;
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest).map_err(|e| bad(e.to_string()))? != 0 {
        return Err(bad("trailing bytes after payload".into()));
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn column(values: &[f64]) -> Array2<f64> {
        Array2::from_shape_vec((values.len(), 1), values.to_vec()).unwrap()
    }

    #[test]
    fn affine_column() {
        let ds = EmbeddedDataset::new(column(&[0.0, 5.0, 10.0]), vec![0, 1, 0]).unwrap();
        let s = minmax_scale(&ds).unwrap();
        assert_eq!(s.features().column(0).to_vec(), vec![0.0, 0.5, 1.0]);
        assert!(s.is_scaled());
    }

    #[test]
    fn constant_column_maps_to_half() {
        let ds = EmbeddedDataset::new(column(&[3.0, 3.0, 3.0]), vec![0, 0, 0]).unwrap();
        let s = minmax_scale(&ds).unwrap();
        assert_eq!(s.features().column(0).to_vec(), vec![0.5, 0.5, 0.5]);
    }

    #[test]
    fn new_data_is_clamped() {
        let scaler = MinMaxScaler {
            mins: vec![0.0],
            maxs: vec![10.0],
        };
        let out = scaler.transform(column(&[12.0, -1.0]).view()).unwrap();
        assert_eq!(out.column(0).to_vec(), vec![1.0, 0.0]);
    }

    #[test]
    fn scaler_dimension_mismatch() {
        let scaler = MinMaxScaler {
            mins: vec![0.0, 0.0],
            maxs: vec![1.0, 1.0],
        };
        assert!(matches!(
            scaler.transform(column(&[1.0]).view()),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn rejects_non_finite_and_mismatched_rows() {
        assert!(EmbeddedDataset::new(column(&[f64::NAN]), vec![0]).is_err());
        assert!(EmbeddedDataset::new(column(&[1.0, 2.0]), vec![0]).is_err());
    }

    #[test]
    fn embeds_corpus_in_order() {
        let table = WordVectorTable::from_pairs([("apple", vec![1.0, 0.0]), ("banana", vec![0.0, 1.0])]).unwrap();
        let corpus = LabeledCorpus::new(
            vec!["Banana!".into(), "apple banana".into(), "the and of".into()],
            vec![1, 0, 1],
            vec!["a".into(), "b".into()],
        )
        .unwrap();
        let out = embed_corpus(&corpus, &table).unwrap();
        assert_eq!(out.dataset.features(), array![[0.0, 1.0], [0.5, 0.5], [0.0, 0.0]]);
        assert_eq!(out.fallback_rows, vec![2]);
    }

    #[test]
    fn cache_rejects_garbage() {
        assert!(read_cache_from(&b"EMB2\0\0\0\0"[..]).is_err());
        let mut bytes = Vec::new();
        let ds = EmbeddedDataset::new(array![[1.0, 2.0]], vec![3]).unwrap();
        write_cache_to(&ds, &mut bytes).unwrap();
        assert_eq!(bytes.len(), 4 + 4 + 4 + 1 + 8 + 4);
        assert!(read_cache_from(&bytes[..bytes.len() - 1]).is_err());
        bytes.push(0);
        assert!(read_cache_from(&bytes[..]).is_err());
    }

    proptest! {
        #[test]
        fn scale_then_inverse(values in proptest::collection::vec(-1e3f64..1e3, 2..40)) {
            let ds = EmbeddedDataset::new(column(&values), vec![0; values.len()]).unwrap();
            let scaled = minmax_scale(&ds).unwrap();
            let back = scaled.scaler().unwrap().inverse_transform(scaled.features()).unwrap();
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assume!(hi > lo);
            for (a, b) in values.iter().zip(back.column(0)) {
                prop_assert!((a - b).abs() <= 1e-9 * a.abs().max(hi - lo));
            }
        }

        #[test]
        fn cache_round_trip_is_bit_exact(
            rows in 0usize..6,
            d in 1usize..5,
            seed in proptest::collection::vec(any::<f32>().prop_filter("finite", |v| v.is_finite()), 30),
            scaled in any::<bool>(),
        ) {
            let feats: Vec<f64> = (0..rows * d).map(|i| f64::from(seed[i % seed.len()])).collect();
            let labels: Vec<usize> = (0..rows).map(|i| i % 3).collect();
            let mut ds = EmbeddedDataset::new(Array2::from_shape_vec((rows, d), feats).unwrap(), labels).unwrap();
            if scaled && rows > 0 {
                ds = minmax_scale(&ds).unwrap();
                // scaled values are f64; quantize once so the comparison is meaningful
                let mut bytes = Vec::new();
                write_cache_to(&ds, &mut bytes).unwrap();
                ds = read_cache_from(&bytes[..]).unwrap();
            }
            let mut bytes = Vec::new();
            write_cache_to(&ds, &mut bytes).unwrap();
            let back = read_cache_from(&bytes[..]).unwrap();
            let same_bits = back.features().iter().zip(ds.features().iter()).all(|(a, b)| a.to_bits() == b.to_bits());
            prop_assert!(same_bits);
            prop_assert_eq!(back.labels(), ds.labels());
            prop_assert_eq!(back.scaler(), ds.scaler());
        }
    }
}
