use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::path::PathBuf;

use qcut_core::data::{load_digits, load_mnist, mnist_from_bytes, split, subsample, Dataset, DIGITS_FEATURES};

fn digits_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/digits.csv")
}

/// Class histogram of the bundled file, counted with `cut -d, -f65 | sort | uniq -c`.
const DIGITS_COUNTS: [usize; 10] = [178, 182, 177, 183, 181, 182, 181, 179, 174, 180];

#[test]
fn digits_file_shape_and_histogram() {
    let ds = load_digits(digits_path()).unwrap();
    assert_eq!(ds.len(), 1797);
    assert_eq!(ds.num_features(), DIGITS_FEATURES);
    assert_eq!(ds.class_counts(), DIGITS_COUNTS);
    for i in 0..ds.len() {
        assert!(ds.sample(i).iter().all(|v| (0.0..=1.0).contains(v)));
    }
    let max = (0..ds.len())
        .flat_map(|i| ds.sample(i).iter().copied())
        .fold(0.0, f64::max);
    assert_eq!(max, 1.0);
}

fn sample_hash(ds: &Dataset, i: usize) -> u64 {
    let mut h = DefaultHasher::new();
    for v in ds.sample(i) {
        v.to_bits().hash(&mut h);
    }
    ds.label(i).hash(&mut h);
    h.finish()
}

fn sorted_hashes(ds: &Dataset) -> Vec<u64> {
    let mut v: Vec<u64> = (0..ds.len()).map(|i| sample_hash(ds, i)).collect();
    v.sort_unstable();
    v
}

#[test]
fn digits_split_is_a_stratified_partition() {
    let ds = load_digits(digits_path()).unwrap();
    let (train, val) = split(&ds, 0.8, 7).unwrap();
    assert_eq!(train.len() + val.len(), ds.len());

    let mut union = sorted_hashes(&train);
    union.extend(sorted_hashes(&val));
    union.sort_unstable();
    assert_eq!(union, sorted_hashes(&ds));

    for (class, &total) in DIGITS_COUNTS.iter().enumerate() {
        let t = train.class_counts()[class];
        assert_eq!(t, (0.8 * total as f64).round() as usize);
        assert_eq!(t + val.class_counts()[class], total);
    }
    let (t2, v2) = split(&ds, 0.8, 7).unwrap();
    assert_eq!((t2, v2), (train, val));
}

#[test]
fn subsample_keeps_class_balance() {
    let ds = load_digits(digits_path()).unwrap();
    let small = subsample(&ds, 200, 3);
    assert_eq!(small.len(), 200);
    assert!(small.class_counts().iter().all(|&c| (19..=21).contains(&c)));
}

fn idx_images(count: u32, rows: u32, cols: u32, pixel: impl Fn(usize) -> u8) -> Vec<u8> {
    let mut v = Vec::new();
    for word in [0x0000_0803u32, count, rows, cols] {
        v.extend_from_slice(&word.to_be_bytes());
    }
    v.extend((0..(count * rows * cols) as usize).map(pixel));
    v
}

fn idx_labels(labels: &[u8]) -> Vec<u8> {
    let mut v = Vec::new();
    v.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    v.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    v.extend_from_slice(labels);
    v
}

/// Minimal independent reader: label histogram straight from the raw bytes.
fn reference_histogram(label_bytes: &[u8]) -> [usize; 10] {
    let n = u32::from_be_bytes(label_bytes[4..8].try_into().unwrap()) as usize;
    let mut h = [0; 10];
    for &b in &label_bytes[8..8 + n] {
        h[b as usize] += 1;
    }
    h
}

#[test]
fn synthetic_idx_matches_reference_reader() {
    let labels: Vec<u8> = (0..60).map(|i| (i * 7 % 10) as u8).collect();
    let images = idx_images(60, 28, 28, |i| (i % 256) as u8);
    let ds = mnist_from_bytes(&images, &idx_labels(&labels)).unwrap();
    assert_eq!(ds.len(), 60);
    assert_eq!(ds.num_features(), 784);
    assert_eq!(ds.class_counts(), reference_histogram(&idx_labels(&labels)));
    assert_eq!(ds.sample(0)[255], 1.0);
    assert_eq!(ds.sample(1)[0], (784 % 256) as f64 / 255.0);
}

/// Runs against the standard test files when `QCUT_MNIST_DIR` points at them.
#[test]
fn standard_mnist_test_file() {
    let Ok(dir) = std::env::var("QCUT_MNIST_DIR") else {
        eprintln!("QCUT_MNIST_DIR unset; standard MNIST check skipped");
        return;
    };
    let dir = PathBuf::from(dir);
    let images = dir.join("t10k-images-idx3-ubyte");
    let labels = dir.join("t10k-labels-idx1-ubyte");
    let ds = load_mnist(&images, &labels).unwrap();
    assert_eq!(ds.len(), 10_000);
    let raw = std::fs::read(&labels).unwrap();
    assert_eq!(ds.class_counts(), reference_histogram(&raw));
}
