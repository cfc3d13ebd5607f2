use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock};

use flate2::read::GzDecoder;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::Tensor;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error("no dataset found in {0} (expected images-idx3-ubyte[.gz] + labels-idx1-ubyte[.gz], or mnist.csv)")]
    NotFound(PathBuf),
    #[error("dataset has {have} examples, {need} requested")]
    TooSmall { have: usize, need: usize },
}

/// Labelled examples with features already normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub features: usize,
    pub classes: usize,
    pub inputs: Vec<f32>,
    pub labels: Vec<u8>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn example(&self, i: usize) -> &[f32] {
        &self.inputs[i * self.features..(i + 1) * self.features]
    }

    /// Examples `range` as a new dataset.
    pub fn slice(&self, range: std::ops::Range<usize>) -> Dataset {
        Dataset {
            features: self.features,
            classes: self.classes,
            inputs: self.inputs[range.start * self.features..range.end * self.features].to_vec(),
            labels: self.labels[range].to_vec(),
        }
    }
}

// MNIST pixel statistics
const MNIST_MEAN: f32 = 0.1307;
const MNIST_STD: f32 = 0.3081;

fn open(path: &Path) -> Result<Box<dyn Read>, DataError> {
    let io_err = |source| DataError::Io { path: path.to_path_buf(), source };
    let mut reader = BufReader::new(File::open(path).map_err(io_err)?);
    let gz = reader.fill_buf().map_err(io_err)?.starts_with(&[0x1f, 0x8b]);
    Ok(if gz { Box::new(GzDecoder::new(reader)) } else { Box::new(reader) })
}

fn read_all(path: &Path) -> Result<Vec<u8>, DataError> {
    let mut bytes = Vec::new();
    open(path)?.read_to_end(&mut bytes).map_err(|source| DataError::Io { path: path.to_path_buf(), source })?;
    Ok(bytes)
}

fn be_u32(bytes: &[u8], at: usize) -> u32 {
    u32::from_be_bytes(bytes[at..at + 4].try_into().unwrap())
}

/// Parse an IDX file (optionally gzipped) with the given magic, returning
/// its dimensions and payload.
pub fn read_idx(path: &Path, magic: u32) -> Result<(Vec<usize>, Vec<u8>), DataError> {
    let bytes = read_all(path)?;
    let bad = |message: String| DataError::Format { path: path.to_path_buf(), message };
    if bytes.len() < 4 {
        return Err(bad("truncated header".into()));
    }
    let found = be_u32(&bytes, 0);
    if found != magic {
        return Err(bad(format!("magic {found:#010x}, expected {magic:#010x}")));
    }
    let rank = (magic & 0xff) as usize;
    let header = 4 + 4 * rank;
    if bytes.len() < header {
        return Err(bad("truncated header".into()));
    }
    let dims: Vec<usize> = (0..rank).map(|i| be_u32(&bytes, 4 + 4 * i) as usize).collect();
    let count: usize = dims.iter().product();
    if bytes.len() - header != count {
        return Err(bad(format!("{} payload bytes for dimensions {dims:?}", bytes.len() - header)));
    }
    Ok((dims, bytes[header..].to_vec()))
}

fn normalize(pixels: &[u8]) -> Vec<f32> {
    pixels.iter().map(|&p| (p as f32 / 255.0 - MNIST_MEAN) / MNIST_STD).collect()
}

/// Load an IDX image/label pair.
pub fn load_idx(images: &Path, labels: &Path) -> Result<Dataset, DataError> {
    let (idims, pixels) = read_idx(images, 0x0000_0803)?;
    let (ldims, labels_raw) = read_idx(labels, 0x0000_0801)?;
    if idims[0] != ldims[0] {
        return Err(DataError::Format {
            path: labels.to_path_buf(),
            message: format!("{} labels for {} images", ldims[0], idims[0]),
        });
    }
    if let Some(&l) = labels_raw.iter().find(|&&l| l > 9) {
        return Err(DataError::Format { path: labels.to_path_buf(), message: format!("label {l} out of range") });
    }
    Ok(Dataset { features: idims[1] * idims[2], classes: 10, inputs: normalize(&pixels), labels: labels_raw })
}

/// Load `label,pixel,pixel,...` rows; a first line that does not parse
/// as numbers is taken as a header.
pub fn load_csv(path: &Path) -> Result<Dataset, DataError> {
    let text = read_all(path)?;
    let text = String::from_utf8_lossy(&text);
    let bad = |line: usize, message: String| DataError::Format { path: path.to_path_buf(), message: format!("line {line}: {message}") };
    let mut features = None;
    let mut pixels = Vec::new();
    let mut labels = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Result<Vec<u32>, _> = line.split(',').map(|f| f.trim().parse::<u32>()).collect();
        let Ok(fields) = fields else {
            if n == 0 {
                continue;
            }
            return Err(bad(n + 1, "non-numeric field".into()));
        };
        let (&label, row) = fields.split_first().ok_or_else(|| bad(n + 1, "empty row".into()))?;
        if label > 9 || row.iter().any(|&p| p > 255) {
            return Err(bad(n + 1, "value out of range".into()));
        }
        if *features.get_or_insert(row.len()) != row.len() {
            return Err(bad(n + 1, format!("{} pixels, expected {}", row.len(), features.unwrap())));
        }
        labels.push(label as u8);
        pixels.extend(row.iter().map(|&p| p as u8));
    }
    let features = features.ok_or_else(|| bad(1, "no rows".into()))?;
    Ok(Dataset { features, classes: 10, inputs: normalize(&pixels), labels })
}

/// Find and load MNIST-format data in `dir`.
pub fn load_dir(dir: &Path) -> Result<Dataset, DataError> {
    let find = |stems: &[&str]| {
        stems.iter().flat_map(|s| [dir.join(s), dir.join(format!("{s}.gz"))]).find(|p| p.is_file())
    };
    if let (Some(images), Some(labels)) = (
        find(&["images-idx3-ubyte", "train-images-idx3-ubyte", "train-images.idx3-ubyte"]),
        find(&["labels-idx1-ubyte", "train-labels-idx1-ubyte", "train-labels.idx1-ubyte"]),
    ) {
        return load_idx(&images, &labels);
    }
    match find(&["mnist.csv", "mnist_train.csv"]) {
        Some(csv) => load_csv(&csv),
        None => Err(DataError::NotFound(dir.to_path_buf())),
    }
}

/// Two Gaussian classes in `features` dimensions, means at ±0.5 on every
/// coordinate, unit variance.
pub fn gaussian_blobs(n: usize, features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::with_capacity(n * features);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let label = rng.gen_range(0..2u8);
        let mean = if label == 0 { -0.5 } else { 0.5 };
        for _ in 0..features {
            // Box-Muller
            let (u1, u2): (f32, f32) = (rng.gen_range(f32::EPSILON..1.0), rng.gen());
            inputs.push(mean + (-2.0 * u1.ln()).sqrt() * (std::f32::consts::TAU * u2).cos());
        }
        labels.push(label);
    }
    Dataset { features, classes: 2, inputs, labels }
}

/// One batch: inputs `[batch, features]`, one-hot labels `[batch, classes]`
/// and the number of real (unpadded) rows.
#[derive(Clone, Debug)]
pub struct Batch {
    pub x: Tensor,
    pub y: Tensor,
    pub labels: Vec<u8>,
    pub rows: usize,
}

/// A dataset partition served in fixed-size batches. Every batch handed out
/// is counted, so tests can prove a split was never touched.
#[derive(Debug)]
pub struct Split {
    name: String,
    data: Dataset,
    batch: usize,
    reads: AtomicU64,
    batches: OnceLock<Vec<Arc<Batch>>>,
}

impl Split {
    pub fn new(name: impl Into<String>, data: Dataset, batch: usize) -> Self {
        assert!(batch > 0);
        Split { name: name.into(), data, batch, reads: AtomicU64::new(0), batches: OnceLock::new() }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn batch_size(&self) -> usize {
        self.batch
    }

    /// Batches with no padding.
    pub fn full_batches(&self) -> usize {
        self.data.len() / self.batch
    }

    /// Batches covering every example, the last one padded with zeros.
    pub fn eval_batches(&self) -> usize {
        self.data.len().div_ceil(self.batch)
    }

    pub fn reads(&self) -> u64 {
        self.reads.load(Ordering::Relaxed)
    }

    pub fn batch(&self, i: usize) -> Arc<Batch> {
        self.reads.fetch_add(1, Ordering::Relaxed);
        let all = self.batches.get_or_init(|| (0..self.eval_batches()).map(|b| Arc::new(self.build(b))).collect());
        all[i].clone()
    }

    fn build(&self, b: usize) -> Batch {
        let (f, c) = (self.data.features, self.data.classes);
        let start = b * self.batch;
        let rows = self.batch.min(self.data.len() - start);
        let mut x = vec![0f32; self.batch * f];
        let mut y = vec![0f32; self.batch * c];
        x[..rows * f].copy_from_slice(&self.data.inputs[start * f..(start + rows) * f]);
        let labels = self.data.labels[start..start + rows].to_vec();
        for (r, &l) in labels.iter().enumerate() {
            y[r * c + l as usize] = 1.0;
        }
        Batch {
            x: Tensor::floats([self.batch, f], x).unwrap(),
            y: Tensor::floats([self.batch, c], y).unwrap(),
            labels,
            rows,
        }
    }
}
