//! Dataset loading (Digits CSV, MNIST IDX) and stratified splitting.

use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const NUM_CLASSES: usize = 10;
pub const DIGITS_FEATURES: usize = 64;
pub const IDX_IMAGES_MAGIC: u32 = 0x0000_0803;
pub const IDX_LABELS_MAGIC: u32 = 0x0000_0801;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: label {label} outside 0..=9")]
    Label { line: usize, label: i64 },
    #[error("feature value {value} outside [0, 1]")]
    FeatureRange { value: f64 },
    #[error("{file}: magic {found:#010x}, expected {expected:#010x}")]
    BadMagic {
        file: &'static str,
        expected: u32,
        found: u32,
    },
    #[error("{file}: truncated, expected {expected} bytes, found {found}")]
    Truncated {
        file: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{images} images but {labels} labels")]
    CountMismatch { images: usize, labels: usize },
    #[error("split ratio {0} must lie strictly between 0 and 1")]
    InvalidRatio(f64),
    #[error("class {class} has {count} sample(s); stratified splitting needs at least 2")]
    Stratification { class: u8, count: usize },
    #[error("dataset is empty")]
    Empty,
    #[error("{0}")]
    Shape(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Split {
    Full,
    Train,
    Validation,
}

/// Row-major feature matrix with integer class labels.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    num_features: usize,
    features: Vec<f64>,
    labels: Vec<u8>,
    split: Split,
}

impl Dataset {
    pub fn new(
        num_features: usize,
        features: Vec<f64>,
        labels: Vec<u8>,
        split: Split,
    ) -> Result<Self, DataError> {
        if num_features == 0 || features.len() != num_features * labels.len() {
            return Err(DataError::Shape(format!(
                "{} feature values for {} samples of width {num_features}",
                features.len(),
                labels.len()
            )));
        }
        if let Some(&value) = features.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(DataError::FeatureRange { value });
        }
        if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= NUM_CLASSES) {
            return Err(DataError::Label {
                line: i + 1,
                label: l as i64,
            });
        }
        Ok(Self {
            num_features,
            features,
            labels,
            split,
        })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn num_features(&self) -> usize {
        self.num_features
    }

    pub fn split(&self) -> Split {
        self.split
    }

    pub fn sample(&self, i: usize) -> &[f64] {
        &self.features[i * self.num_features..(i + 1) * self.num_features]
    }

    pub fn label(&self, i: usize) -> u8 {
        self.labels[i]
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn class_counts(&self) -> [usize; NUM_CLASSES] {
        let mut counts = [0; NUM_CLASSES];
        for &l in &self.labels {
            counts[l as usize] += 1;
        }
        counts
    }

    /// Samples at `indices`, in that order.
    pub fn subset(&self, indices: &[usize], split: Split) -> Dataset {
        let mut features = Vec::with_capacity(indices.len() * self.num_features);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            features.extend_from_slice(self.sample(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            num_features: self.num_features,
            features,
            labels,
            split,
        }
    }

    fn indices_by_class(&self) -> Vec<Vec<usize>> {
        let mut by_class = vec![Vec::new(); NUM_CLASSES];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l as usize].push(i);
        }
        by_class
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, DataError> {
    fs::read(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Digits CSV: 64 pixel counts in `0..=16` then the label, one sample per line.
pub fn load_digits(path: impl AsRef<Path>) -> Result<Dataset, DataError> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|source| DataError::Io {
        path: path.to_owned(),
        source,
    })?;
    parse_digits(BufReader::new(file))
}

pub fn parse_digits(reader: impl BufRead) -> Result<Dataset, DataError> {
    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| DataError::Parse {
            line: line_no,
            msg: e.to_string(),
        })?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != DIGITS_FEATURES + 1 {
            return Err(DataError::Parse {
                line: line_no,
                msg: format!("expected {} columns, found {}", DIGITS_FEATURES + 1, fields.len()),
            });
        }
        let parse = |s: &str| -> Result<i64, DataError> {
            s.parse().map_err(|_| DataError::Parse {
                line: line_no,
                msg: format!("`{s}` is not an integer"),
            })
        };
        for f in &fields[..DIGITS_FEATURES] {
            let v = parse(f)?;
            if !(0..=16).contains(&v) {
                return Err(DataError::Parse {
                    line: line_no,
                    msg: format!("pixel value {v} outside 0..=16"),
                });
            }
            features.push(v as f64 / 16.0);
        }
        let label = parse(fields[DIGITS_FEATURES])?;
        if !(0..NUM_CLASSES as i64).contains(&label) {
            return Err(DataError::Label {
                line: line_no,
                label,
            });
        }
        labels.push(label as u8);
    }
    if labels.is_empty() {
        return Err(DataError::Empty);
    }
    Dataset::new(DIGITS_FEATURES, features, labels, Split::Full)
}

fn be_u32(bytes: &[u8], at: usize, file: &'static str) -> Result<u32, DataError> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or(DataError::Truncated {
            file,
            expected: at + 4,
            found: bytes.len(),
        })
}

/// IDX image file: returns `(rows, cols, pixels)` with pixels row-major per image.
pub fn parse_idx_images(bytes: &[u8]) -> Result<(usize, usize, Vec<u8>), DataError> {
    const FILE: &str = "images";
    let magic = be_u32(bytes, 0, FILE)?;
    if magic != IDX_IMAGES_MAGIC {
        return Err(DataError::BadMagic {
            file: FILE,
            expected: IDX_IMAGES_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, FILE)? as usize;
    let rows = be_u32(bytes, 8, FILE)? as usize;
    let cols = be_u32(bytes, 12, FILE)? as usize;
    let expected = 16 + count * rows * cols;
    if bytes.len() < expected {
        return Err(DataError::Truncated {
            file: FILE,
            expected,
            found: bytes.len(),
        });
    }
    Ok((rows, cols, bytes[16..expected].to_vec()))
}

pub fn parse_idx_labels(bytes: &[u8]) -> Result<Vec<u8>, DataError> {
    const FILE: &str = "labels";
    let magic = be_u32(bytes, 0, FILE)?;
    if magic != IDX_LABELS_MAGIC {
        return Err(DataError::BadMagic {
            file: FILE,
            expected: IDX_LABELS_MAGIC,
            found: magic,
        });
    }
    let count = be_u32(bytes, 4, FILE)? as usize;
    let expected = 8 + count;
    if bytes.len() < expected {
        return Err(DataError::Truncated {
            file: FILE,
            expected,
            found: bytes.len(),
        });
    }
    Ok(bytes[8..expected].to_vec())
}

pub fn mnist_from_bytes(images: &[u8], labels: &[u8]) -> Result<Dataset, DataError> {
    let (rows, cols, pixels) = parse_idx_images(images)?;
    let labels = parse_idx_labels(labels)?;
    let width = rows * cols;
    let count = if width == 0 { 0 } else { pixels.len() / width };
    if count != labels.len() {
        return Err(DataError::CountMismatch {
            images: count,
            labels: labels.len(),
        });
    }
    if count == 0 {
        return Err(DataError::Empty);
    }
    if let Some((i, &l)) = labels.iter().enumerate().find(|(_, &l)| l as usize >= NUM_CLASSES) {
        return Err(DataError::Label {
            line: i + 1,
            label: l as i64,
        });
    }
    let features = pixels.iter().map(|&p| p as f64 / 255.0).collect();
    Dataset::new(width, features, labels, Split::Full)
}

pub fn load_mnist(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<Dataset, DataError> {
    let images = read_file(images_path.as_ref())?;
    let labels = read_file(labels_path.as_ref())?;
    mnist_from_bytes(&images, &labels)
}

/// Stratified, seeded split into `(train, validation)`.
pub fn split(dataset: &Dataset, ratio: f64, seed: u64) -> Result<(Dataset, Dataset), DataError> {
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(DataError::InvalidRatio(ratio));
    }
    if dataset.is_empty() {
        return Err(DataError::Empty);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut train = Vec::new();
    let mut validation = Vec::new();
    for (class, mut members) in dataset.indices_by_class().into_iter().enumerate() {
        if members.is_empty() {
            continue;
        }
        if members.len() < 2 {
            return Err(DataError::Stratification {
                class: class as u8,
                count: members.len(),
            });
        }
        members.shuffle(&mut rng);
        let n_train = ((members.len() as f64 * ratio).round() as usize).clamp(1, members.len() - 1);
        train.extend_from_slice(&members[..n_train]);
        validation.extend_from_slice(&members[n_train..]);
    }
    train.sort_unstable();
    validation.sort_unstable();
    Ok((
        dataset.subset(&train, Split::Train),
        dataset.subset(&validation, Split::Validation),
    ))
}

/// Stratified, seeded subsample of `total` samples; class proportions are kept
/// by largest-remainder rounding.
pub fn subsample(dataset: &Dataset, total: usize, seed: u64) -> Dataset {
    if total >= dataset.len() {
        return dataset.clone();
    }
    let by_class = dataset.indices_by_class();
    let n = dataset.len() as f64;
    let exact: Vec<f64> = by_class
        .iter()
        .map(|m| total as f64 * m.len() as f64 / n)
        .collect();
    let mut quota: Vec<usize> = exact.iter().map(|q| q.floor() as usize).collect();
    let mut remaining = total - quota.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..NUM_CLASSES).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for c in order {
        if remaining == 0 {
            break;
        }
        if quota[c] < by_class[c].len() {
            quota[c] += 1;
            remaining -= 1;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = Vec::with_capacity(total);
    for (mut members, q) in by_class.into_iter().zip(quota) {
        members.shuffle(&mut rng);
        keep.extend_from_slice(&members[..q.min(members.len())]);
    }
    keep.sort_unstable();
    dataset.subset(&keep, dataset.split())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Cursor;

    fn row(value: u8, label: u8) -> String {
        let mut s = vec![value.to_string(); DIGITS_FEATURES].join(",");
        s.push_str(&format!(",{label}\n"));
        s
    }

    fn balanced(per_class: usize) -> Dataset {
        let mut labels = Vec::new();
        let mut features = Vec::new();
        for c in 0..NUM_CLASSES {
            for i in 0..per_class {
                labels.push(c as u8);
                features.push((c * per_class + i) as f64 / (NUM_CLASSES * per_class) as f64);
            }
        }
        Dataset::new(1, features, labels, Split::Full).unwrap()
    }

    #[test]
    fn digits_normalization_bounds() {
        let text = row(0, 0) + &row(16, 7);
        let ds = parse_digits(Cursor::new(text)).unwrap();
        assert_eq!(ds.len(), 2);
        assert!(ds.sample(0).iter().all(|&v| v == 0.0));
        assert!(ds.sample(1).iter().all(|&v| v == 1.0));
        assert_eq!(ds.labels(), &[0, 7]);
    }

    #[test]
    fn digits_errors_name_the_line() {
        let text = row(1, 1) + "1,2,3\n";
        assert!(matches!(
            parse_digits(Cursor::new(text)),
            Err(DataError::Parse { line: 2, .. })
        ));
        let text = row(1, 1) + &row(1, 12);
        assert!(matches!(
            parse_digits(Cursor::new(text)),
            Err(DataError::Label { line: 2, label: 12 })
        ));
        let text = row(17, 1);
        assert!(matches!(
            parse_digits(Cursor::new(text)),
            Err(DataError::Parse { line: 1, .. })
        ));
        let mut bad = row(1, 1);
        bad.replace_range(0..1, "x");
        assert!(matches!(parse_digits(Cursor::new(bad)), Err(DataError::Parse { .. })));
    }

    fn idx_images(count: u32, rows: u32, cols: u32, fill: u8) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(&IDX_IMAGES_MAGIC.to_be_bytes());
        b.extend_from_slice(&count.to_be_bytes());
        b.extend_from_slice(&rows.to_be_bytes());
        b.extend_from_slice(&cols.to_be_bytes());
        b.extend(std::iter::repeat(fill).take((count * rows * cols) as usize));
        b
    }

    fn idx_labels(labels: &[u8]) -> Vec<u8> {
        let mut b = Vec::new();
        b.extend_from_slice(&IDX_LABELS_MAGIC.to_be_bytes());
        b.extend_from_slice(&(labels.len() as u32).to_be_bytes());
        b.extend_from_slice(labels);
        b
    }

    #[test]
    fn single_white_image() {
        let ds = mnist_from_bytes(&idx_images(1, 28, 28, 255), &idx_labels(&[3])).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.num_features(), 784);
        assert!(ds.sample(0).iter().all(|&v| v == 1.0));
    }

    #[test]
    fn idx_dimensions_are_big_endian() {
        let bytes = idx_images(1, 28, 28, 0);
        assert_eq!(&bytes[8..12], &[0x00, 0x00, 0x00, 0x1C]);
        let (rows, cols, _) = parse_idx_images(&bytes).unwrap();
        assert_eq!((rows, cols), (28, 28));
    }

    #[test]
    fn idx_error_variants() {
        let mut wrong = idx_images(1, 2, 2, 0);
        wrong[3] = 0x01;
        assert!(matches!(parse_idx_images(&wrong), Err(DataError::BadMagic { .. })));
        let mut short = idx_images(2, 2, 2, 0);
        short.truncate(20);
        assert!(matches!(parse_idx_images(&short), Err(DataError::Truncated { .. })));
        assert!(matches!(parse_idx_labels(&[0, 0]), Err(DataError::Truncated { .. })));
        assert!(matches!(
            mnist_from_bytes(&idx_images(2, 2, 2, 0), &idx_labels(&[1])),
            Err(DataError::CountMismatch { images: 2, labels: 1 })
        ));
    }

    #[test]
    fn balanced_split_is_stratified() {
        let ds = balanced(10);
        let (train, val) = split(&ds, 0.8, 7).unwrap();
        assert_eq!((train.len(), val.len()), (80, 20));
        assert_eq!(train.class_counts(), [8; NUM_CLASSES]);
        assert_eq!(val.class_counts(), [2; NUM_CLASSES]);
        assert_eq!(train.split(), Split::Train);
        assert_eq!(val.split(), Split::Validation);
        assert_eq!(split(&ds, 0.8, 7).unwrap(), (train, val));
    }

    #[test]
    fn split_preconditions() {
        let ds = balanced(3);
        assert!(matches!(split(&ds, 0.0, 0), Err(DataError::InvalidRatio(_))));
        assert!(matches!(split(&ds, 1.0, 0), Err(DataError::InvalidRatio(_))));
        let lonely = Dataset::new(1, vec![0.0, 0.5, 1.0], vec![0, 0, 4], Split::Full).unwrap();
        assert!(matches!(
            split(&lonely, 0.5, 0),
            Err(DataError::Stratification { class: 4, count: 1 })
        ));
    }

    #[test]
    fn subsample_keeps_proportions() {
        let ds = balanced(20);
        let sub = subsample(&ds, 50, 3);
        assert_eq!(sub.len(), 50);
        assert_eq!(sub.class_counts(), [5; NUM_CLASSES]);
        assert_eq!(subsample(&ds, 50, 3), sub);
        assert_eq!(subsample(&ds, 1000, 3), ds);
    }
}
