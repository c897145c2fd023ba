//! MNIST ingestion from IDX containers, plus dataset provenance tracking.
//!
//! IDX files are big-endian: magic 0x00000803 for images (dims N, rows,
//! cols, unsigned bytes) and 0x00000801 for labels. Pixel bytes are scaled
//! to [0,1] by division by 255. Files ending in `.gz` are decompressed
//! transparently.

use crate::error::{CoreError, Result};
use crate::occlusion::OcclusionSpec;
use crate::tensor::Tensor;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs::File;
use std::io::Read;
use std::path::{Path, PathBuf};

pub const IMAGES_MAGIC: u32 = 0x0000_0803;
pub const LABELS_MAGIC: u32 = 0x0000_0801;

/// Environment variable naming the directory holding the four IDX files.
pub const DATA_DIR_ENV: &str = "MNIST_DATA_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl std::fmt::Display for Split {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Split::Train => write!(f, "train"),
            Split::Test => write!(f, "test"),
        }
    }
}

/// Where the pixel values came from; the training guard keys off this.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Clean,
    Occluded(OcclusionSpec),
}

#[derive(Debug, Clone)]
pub struct Dataset {
    /// Shape [N, 1, H, W], values in [0, 1].
    pub images: Tensor,
    pub labels: Vec<u8>,
    pub split: Split,
    pub provenance: Provenance,
    /// SHA-256 over the raw source bytes; derived datasets append a tag.
    pub content_hash: String,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn height(&self) -> usize {
        self.images.dim(2)
    }

    pub fn width(&self) -> usize {
        self.images.dim(3)
    }

    /// Pixels of image `i` as a flat row-major slice.
    pub fn image(&self, i: usize) -> &[f32] {
        let px = self.height() * self.width();
        &self.images.data()[i * px..(i + 1) * px]
    }

    /// A new dataset holding only images `[0, n)`; keeps provenance, tags the
    /// hash so subsets are distinguishable.
    pub fn take(&self, n: usize) -> Dataset {
        let n = n.min(self.len());
        let px = self.height() * self.width();
        Dataset {
            images: Tensor::from_vec(
                &[n, 1, self.height(), self.width()],
                self.images.data()[..n * px].to_vec(),
            )
            .expect("prefix slice"),
            labels: self.labels[..n].to_vec(),
            split: self.split,
            provenance: self.provenance,
            content_hash: format!("{}+take{}", self.content_hash, n),
        }
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>> {
    let mut raw = Vec::new();
    File::open(path)
        .and_then(|mut f| f.read_to_end(&mut raw))
        .map_err(|e| CoreError::io(path.display().to_string(), e))?;
    if path.extension().is_some_and(|e| e == "gz") {
        let mut out = Vec::new();
        flate2::read::GzDecoder::new(raw.as_slice())
            .read_to_end(&mut out)
            .map_err(|e| CoreError::io(path.display().to_string(), e))?;
        Ok(out)
    } else {
        Ok(raw)
    }
}

fn read_u32_be(bytes: &[u8], offset: usize, what: &str) -> Result<u32> {
    bytes
        .get(offset..offset + 4)
        .map(|b| u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
        .ok_or_else(|| CoreError::Truncated(format!("{what} header")))
}

/// Load an image/label IDX pair into a [`Dataset`].
///
/// The two files are cross-checked: item counts must agree, payload sizes
/// must match the declared dimensions, and labels must be digits.
pub fn load_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    split: Split,
) -> Result<Dataset> {
    let images_path = images_path.as_ref();
    let labels_path = labels_path.as_ref();
    let img_bytes = read_file(images_path)?;
    let lbl_bytes = read_file(labels_path)?;

    let img_magic = read_u32_be(&img_bytes, 0, "image")?;
    if img_magic != IMAGES_MAGIC {
        return Err(CoreError::BadIdxMagic {
            expected: IMAGES_MAGIC,
            found: img_magic,
        });
    }
    let lbl_magic = read_u32_be(&lbl_bytes, 0, "label")?;
    if lbl_magic != LABELS_MAGIC {
        return Err(CoreError::BadIdxMagic {
            expected: LABELS_MAGIC,
            found: lbl_magic,
        });
    }

    let n_images = read_u32_be(&img_bytes, 4, "image")? as usize;
    let rows = read_u32_be(&img_bytes, 8, "image")? as usize;
    let cols = read_u32_be(&img_bytes, 12, "image")? as usize;
    let n_labels = read_u32_be(&lbl_bytes, 4, "label")? as usize;
    if n_images != n_labels {
        return Err(CoreError::IdxCountMismatch {
            images: n_images,
            labels: n_labels,
        });
    }

    let payload = n_images
        .checked_mul(rows)
        .and_then(|v| v.checked_mul(cols))
        .ok_or_else(|| CoreError::Truncated("image payload size overflow".into()))?;
    let pixels = img_bytes
        .get(16..16 + payload)
        .ok_or_else(|| CoreError::Truncated(format!("{}", images_path.display())))?;
    let labels = lbl_bytes
        .get(8..8 + n_labels)
        .ok_or_else(|| CoreError::Truncated(format!("{}", labels_path.display())))?;
    if let Some(&bad) = labels.iter().find(|&&l| l >= 10) {
        return Err(CoreError::LabelOutOfRange {
            label: bad as usize,
            classes: 10,
        });
    }

    let mut hasher = Sha256::new();
    hasher.update(pixels);
    hasher.update(labels);
    let content_hash = hex_digest(hasher);

    let data: Vec<f32> = pixels.iter().map(|&b| f32::from(b) / 255.0).collect();
    Ok(Dataset {
        images: Tensor::from_vec(&[n_images, 1, rows, cols], data)?,
        labels: labels.to_vec(),
        split,
        provenance: Provenance::Clean,
        content_hash,
    })
}

fn hex_digest(hasher: Sha256) -> String {
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Write a dataset back out as an IDX pair (pixels rounded to bytes).
pub fn export_idx(
    dataset: &Dataset,
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
) -> Result<()> {
    let (h, w) = (dataset.height(), dataset.width());
    let mut img = Vec::with_capacity(16 + dataset.len() * h * w);
    img.extend_from_slice(&IMAGES_MAGIC.to_be_bytes());
    img.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    img.extend_from_slice(&(h as u32).to_be_bytes());
    img.extend_from_slice(&(w as u32).to_be_bytes());
    for &v in dataset.images.iter() {
        img.push((v * 255.0).round().clamp(0.0, 255.0) as u8);
    }
    let mut lbl = Vec::with_capacity(8 + dataset.len());
    lbl.extend_from_slice(&LABELS_MAGIC.to_be_bytes());
    lbl.extend_from_slice(&(dataset.len() as u32).to_be_bytes());
    lbl.extend_from_slice(&dataset.labels);
    std::fs::write(&images_path, img)
        .map_err(|e| CoreError::io(images_path.as_ref().display().to_string(), e))?;
    std::fs::write(&labels_path, lbl)
        .map_err(|e| CoreError::io(labels_path.as_ref().display().to_string(), e))?;
    Ok(())
}

/// Resolve the MNIST directory: `MNIST_DATA_DIR` if set, else `./data`.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("data"))
}

fn find_idx_file(dir: &Path, stem: &str) -> Result<PathBuf> {
    for candidate in [stem.to_string(), format!("{stem}.gz")] {
        let p = dir.join(&candidate);
        if p.is_file() {
            return Ok(p);
        }
    }
    Err(CoreError::io(
        dir.join(stem).display().to_string(),
        std::io::Error::new(std::io::ErrorKind::NotFound, "IDX file not found"),
    ))
}

/// Load the standard four-file MNIST layout from `dir`.
pub fn load_mnist(dir: impl AsRef<Path>) -> Result<(Dataset, Dataset)> {
    let dir = dir.as_ref();
    let train = load_idx(
        find_idx_file(dir, "train-images-idx3-ubyte")?,
        find_idx_file(dir, "train-labels-idx1-ubyte")?,
        Split::Train,
    )?;
    let test = load_idx(
        find_idx_file(dir, "t10k-images-idx3-ubyte")?,
        find_idx_file(dir, "t10k-labels-idx1-ubyte")?,
        Split::Test,
    )?;
    Ok((train, test))
}
