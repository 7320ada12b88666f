//! IDX image/label ingestion (the MNIST container format): big-endian
//! headers, magic 0x00000803 for images and 0x00000801 for labels.
//! Gzipped files are decompressed transparently by extension.

use crate::error::{Error, Result};
use crate::network::Dataset;
use flate2::read::GzDecoder;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Read;
use std::path::Path;

const IMAGES_MAGIC: u32 = 0x0000_0803;
const LABELS_MAGIC: u32 = 0x0000_0801;

/// Flattened images in `[0, 1]` with their byte labels.
#[derive(Debug, Clone)]
pub struct LabeledImages {
    /// N x (rows * cols).
    pub x: Array2<f64>,
    pub labels: Vec<u8>,
    pub rows: usize,
    pub cols: usize,
}

fn read_all(path: &Path) -> Result<Vec<u8>> {
    let raw = std::fs::read(path).map_err(|e| Error::Idx {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut out = Vec::new();
        GzDecoder::new(&raw[..]).read_to_end(&mut out).map_err(|e| Error::Idx {
            path: path.display().to_string(),
            reason: format!("gzip: {e}"),
        })?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn be_u32(bytes: &[u8], at: usize, path: &Path) -> Result<u32> {
    bytes
        .get(at..at + 4)
        .map(|b| u32::from_be_bytes(b.try_into().unwrap()))
        .ok_or_else(|| Error::Idx {
            path: path.display().to_string(),
            reason: "truncated header".into(),
        })
}

/// Parse an images/labels pair into flattened unit-interval pixels.
pub fn load_idx(images: &Path, labels: &Path) -> Result<LabeledImages> {
    let img = read_all(images)?;
    let magic = be_u32(&img, 0, images)?;
    if magic != IMAGES_MAGIC {
        return Err(Error::Idx {
            path: images.display().to_string(),
            reason: format!("bad magic {magic:#010x}, expected {IMAGES_MAGIC:#010x}"),
        });
    }
    let n = be_u32(&img, 4, images)? as usize;
    let rows = be_u32(&img, 8, images)? as usize;
    let cols = be_u32(&img, 12, images)? as usize;
    let pixels = &img[16..];
    if pixels.len() != n * rows * cols {
        return Err(Error::Idx {
            path: images.display().to_string(),
            reason: format!("expected {} pixels, found {}", n * rows * cols, pixels.len()),
        });
    }

    let lab = read_all(labels)?;
    let lmagic = be_u32(&lab, 0, labels)?;
    if lmagic != LABELS_MAGIC {
        return Err(Error::Idx {
            path: labels.display().to_string(),
            reason: format!("bad magic {lmagic:#010x}, expected {LABELS_MAGIC:#010x}"),
        });
    }
    let ln = be_u32(&lab, 4, labels)? as usize;
    if ln != n {
        return Err(Error::Idx {
            path: labels.display().to_string(),
            reason: format!("{ln} labels for {n} images"),
        });
    }
    let label_bytes = &lab[8..];
    if label_bytes.len() != n {
        return Err(Error::Idx {
            path: labels.display().to_string(),
            reason: "truncated label block".into(),
        });
    }

    let d = rows * cols;
    let mut x = Array2::<f64>::zeros((n, d));
    for i in 0..n {
        for j in 0..d {
            x[(i, j)] = pixels[i * d + j] as f64 / 255.0;
        }
    }
    Ok(LabeledImages { x, labels: label_bytes.to_vec(), rows, cols })
}

impl LabeledImages {
    pub fn n(&self) -> usize {
        self.labels.len()
    }

    /// Deterministic seeded subset without replacement.
    pub fn subset(&self, count: usize, seed: u64) -> Result<LabeledImages> {
        if count > self.n() {
            return Err(Error::Dataset(format!(
                "subset of {count} from {} samples",
                self.n()
            )));
        }
        let mut idx: Vec<usize> = (0..self.n()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        idx.shuffle(&mut rng);
        idx.truncate(count);
        let d = self.x.ncols();
        let mut x = Array2::<f64>::zeros((count, d));
        let mut labels = Vec::with_capacity(count);
        for (row, &i) in idx.iter().enumerate() {
            x.row_mut(row).assign(&self.x.row(i));
            labels.push(self.labels[i]);
        }
        Ok(LabeledImages { x, labels, rows: self.rows, cols: self.cols })
    }

    /// One-hot targets over `classes`.
    pub fn dataset(&self, classes: usize) -> Result<Dataset> {
        let mut y = Array2::<f64>::zeros((self.n(), classes));
        for (i, &l) in self.labels.iter().enumerate() {
            if (l as usize) >= classes {
                return Err(Error::Dataset(format!("label {l} outside 0..{classes}")));
            }
            y[(i, l as usize)] = 1.0;
        }
        Dataset::new(self.x.clone(), y)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_idx_pair(dir: &Path, n: usize, rows: usize, cols: usize) -> (std::path::PathBuf, std::path::PathBuf) {
        let img_path = dir.join("img.idx");
        let lab_path = dir.join("lab.idx");
        let mut img = Vec::new();
        img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
        img.extend_from_slice(&(n as u32).to_be_bytes());
        img.extend_from_slice(&(rows as u32).to_be_bytes());
        img.extend_from_slice(&(cols as u32).to_be_bytes());
        for i in 0..n * rows * cols {
            img.push((i % 251) as u8);
        }
        std::fs::File::create(&img_path).unwrap().write_all(&img).unwrap();
        let mut lab = Vec::new();
        lab.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
        lab.extend_from_slice(&(n as u32).to_be_bytes());
        for i in 0..n {
            lab.push((i % 10) as u8);
        }
        std::fs::File::create(&lab_path).unwrap().write_all(&lab).unwrap();
        (img_path, lab_path)
    }

    #[test]
    fn parse_and_one_hot() {
        let dir = std::env::temp_dir().join("rspl-idx-test");
        std::fs::create_dir_all(&dir).unwrap();
        let (ip, lp) = write_idx_pair(&dir, 12, 4, 5);
        let data = load_idx(&ip, &lp).unwrap();
        assert_eq!(data.n(), 12);
        assert_eq!((data.rows, data.cols), (4, 5));
        assert!(data.x.iter().all(|&v| (0.0..=1.0).contains(&v)));
        assert!(data.labels.iter().all(|&l| l < 10));
        let ds = data.dataset(10).unwrap();
        assert_eq!(ds.y.ncols(), 10);
        for (i, &l) in data.labels.iter().enumerate() {
            assert_eq!(ds.y[(i, l as usize)], 1.0);
            assert_eq!(ds.y.row(i).sum(), 1.0);
        }
    }

    #[test]
    fn subset_is_deterministic() {
        let dir = std::env::temp_dir().join("rspl-idx-test2");
        std::fs::create_dir_all(&dir).unwrap();
        let (ip, lp) = write_idx_pair(&dir, 40, 2, 2);
        let data = load_idx(&ip, &lp).unwrap();
        let a = data.subset(7, 99).unwrap();
        let b = data.subset(7, 99).unwrap();
        assert_eq!(a.labels, b.labels);
        assert_eq!(a.x, b.x);
        let c = data.subset(7, 100).unwrap();
        assert_ne!(a.labels, c.labels);
        assert!(data.subset(41, 0).is_err());
    }

    #[test]
    fn rejects_bad_magic_and_mismatch() {
        let dir = std::env::temp_dir().join("rspl-idx-test3");
        std::fs::create_dir_all(&dir).unwrap();
        let (ip, lp) = write_idx_pair(&dir, 5, 2, 2);
        // Corrupt the image magic.
        let mut img = std::fs::read(&ip).unwrap();
        img[3] = 0x99;
        let bad = dir.join("bad.idx");
        std::fs::write(&bad, &img).unwrap();
        assert!(load_idx(&bad, &lp).is_err());
        // Truncate the pixel block.
        let img = std::fs::read(&ip).unwrap();
        let trunc = dir.join("trunc.idx");
        std::fs::write(&trunc, &img[..img.len() - 3]).unwrap();
        assert!(load_idx(&trunc, &lp).is_err());
        // Swap files: label magic fails on the image path.
        assert!(load_idx(&lp, &ip).is_err());
    }
}
