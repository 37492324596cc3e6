//! IDX-format digit images: loading, serialization into sequence batches,
//! and a deterministic synthetic digit renderer for environments without
//! the real files.

use crate::numerics::{Matrix, Rng, Tensor3};
use crate::recurrent::SequenceBatch;
use crate::{Error, Result};
use std::io::Read;
use std::path::Path;

const IMAGE_MAGIC: u32 = 0x0000_0803;
const LABEL_MAGIC: u32 = 0x0000_0801;

/// Loaded digit images scaled to [-1, 1] plus their labels.
#[derive(Debug, Clone)]
pub struct MnistData {
    /// `N x rows x cols`.
    pub images: Tensor3,
    pub labels: Vec<u8>,
}

fn read_be_u32(bytes: &[u8], off: &mut usize, what: &str) -> Result<u32> {
    let end = *off + 4;
    if end > bytes.len() {
        return Err(Error::TruncatedFile(what.into()));
    }
    let v = u32::from_be_bytes(bytes[*off..end].try_into().unwrap());
    *off = end;
    Ok(v)
}

/// Reads an IDX image/label file pair. Pixel bytes map to [-1, 1] via
/// `x / 127.5 - 1`.
pub fn load_mnist(image_file: &Path, label_file: &Path) -> Result<MnistData> {
    let mut bytes = Vec::new();
    std::fs::File::open(image_file)?.read_to_end(&mut bytes)?;
    let mut off = 0;
    let magic = read_be_u32(&bytes, &mut off, "image magic")?;
    if magic != IMAGE_MAGIC {
        return Err(Error::BadMagic {
            got: magic,
            expected: IMAGE_MAGIC,
        });
    }
    let n = read_be_u32(&bytes, &mut off, "image count")? as usize;
    let rows = read_be_u32(&bytes, &mut off, "rows")? as usize;
    let cols = read_be_u32(&bytes, &mut off, "cols")? as usize;
    if bytes.len() - off < n * rows * cols {
        return Err(Error::TruncatedFile(format!(
            "need {} pixel bytes, found {}",
            n * rows * cols,
            bytes.len() - off
        )));
    }
    let mut images = Tensor3::zeros(n, rows, cols);
    for (dst, &b) in images.data_mut().iter_mut().zip(&bytes[off..]) {
        *dst = b as f64 / 127.5 - 1.0;
    }

    let mut lbytes = Vec::new();
    std::fs::File::open(label_file)?.read_to_end(&mut lbytes)?;
    let mut loff = 0;
    let lmagic = read_be_u32(&lbytes, &mut loff, "label magic")?;
    if lmagic != LABEL_MAGIC {
        return Err(Error::BadMagic {
            got: lmagic,
            expected: LABEL_MAGIC,
        });
    }
    let ln = read_be_u32(&lbytes, &mut loff, "label count")? as usize;
    if lbytes.len() - loff < ln {
        return Err(Error::TruncatedFile("label bytes".into()));
    }
    if ln != n {
        return Err(Error::ShapeMismatch(format!(
            "{n} images but {ln} labels"
        )));
    }
    Ok(MnistData {
        images,
        labels: lbytes[loff..loff + ln].to_vec(),
    })
}

pub fn write_idx_images(path: &Path, pixels: &[u8], n: usize, rows: usize, cols: usize) -> Result<()> {
    assert_eq!(pixels.len(), n * rows * cols);
    let mut buf = Vec::with_capacity(16 + pixels.len());
    buf.extend_from_slice(&IMAGE_MAGIC.to_be_bytes());
    for dim in [n, rows, cols] {
        buf.extend_from_slice(&(dim as u32).to_be_bytes());
    }
    buf.extend_from_slice(pixels);
    std::fs::write(path, buf)?;
    Ok(())
}

pub fn write_idx_labels(path: &Path, labels: &[u8]) -> Result<()> {
    let mut buf = Vec::with_capacity(8 + labels.len());
    buf.extend_from_slice(&LABEL_MAGIC.to_be_bytes());
    buf.extend_from_slice(&(labels.len() as u32).to_be_bytes());
    buf.extend_from_slice(labels);
    std::fs::write(path, buf)?;
    Ok(())
}

/// How to turn images into sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SerializeMode {
    /// Rows as time steps: T = 28, d = 28, all digits, one-hot labels.
    Full28,
    /// 2x2 mean-pool to 14x14, keep digits {0, 1, 2}; the one-hot class
    /// becomes both condition and label.
    Down14x3,
}

fn one_hot(labels: &[u8], classes: usize) -> Matrix {
    let mut m = Matrix::zeros(labels.len(), classes);
    for (i, &l) in labels.iter().enumerate() {
        m.set(i, l as usize, 1.0);
    }
    m
}

/// Treats each image as a sequence of row vectors.
pub fn serialize_mnist(data: &MnistData, mode: SerializeMode) -> Result<SequenceBatch> {
    let (n, rows, cols) = data.images.shape();
    if rows != 28 || cols != 28 {
        return Err(Error::ShapeMismatch(format!(
            "serialization expects 28x28 images, got {rows}x{cols}"
        )));
    }
    match mode {
        SerializeMode::Full28 => {
            let batch = SequenceBatch::new(data.images.clone());
            batch.with_labels(one_hot(&data.labels, 10))
        }
        SerializeMode::Down14x3 => {
            let keep: Vec<usize> = (0..n).filter(|&i| data.labels[i] <= 2).collect();
            let mut pooled = Tensor3::zeros(keep.len(), 14, 14);
            for (k, &i) in keep.iter().enumerate() {
                for r in 0..14 {
                    for c in 0..14 {
                        let mut acc = 0.0;
                        for dr in 0..2 {
                            for dc in 0..2 {
                                acc += data.images.get(i, 2 * r + dr, 2 * c + dc);
                            }
                        }
                        pooled.set(k, r, c, acc / 4.0);
                    }
                }
            }
            let labels: Vec<u8> = keep.iter().map(|&i| data.labels[i]).collect();
            let hot = one_hot(&labels, 3);
            SequenceBatch::new(pooled)
                .with_conditions(hot.clone())?
                .with_labels(hot)
        }
    }
}

// ---------------------------------------------------------------------
// Synthetic digit rendering
// ---------------------------------------------------------------------

const SIDE: usize = 28;

struct Canvas {
    alpha: [f64; SIDE * SIDE],
}

impl Canvas {
    fn new() -> Self {
        Canvas {
            alpha: [0.0; SIDE * SIDE],
        }
    }

    /// Stamps a disc of the stroke radius at a skeleton point given in
    /// y-up coordinates.
    fn stamp(&mut self, x: f64, y_up: f64, radius: f64) {
        let y = (SIDE - 1) as f64 - y_up;
        let lo_c = ((x - radius - 1.0).floor().max(0.0)) as usize;
        let hi_c = ((x + radius + 1.0).ceil().min((SIDE - 1) as f64)) as usize;
        let lo_r = ((y - radius - 1.0).floor().max(0.0)) as usize;
        let hi_r = ((y + radius + 1.0).ceil().min((SIDE - 1) as f64)) as usize;
        for r in lo_r..=hi_r {
            for c in lo_c..=hi_c {
                let d = ((c as f64 - x).powi(2) + (r as f64 - y).powi(2)).sqrt();
                let a = (radius + 0.5 - d).clamp(0.0, 1.0);
                let cell = &mut self.alpha[r * SIDE + c];
                if a > *cell {
                    *cell = a;
                }
            }
        }
    }

    fn stroke(&mut self, points: &[(f64, f64)], radius: f64) {
        for &(x, y) in points {
            self.stamp(x, y, radius);
        }
    }

    fn to_bytes(&self, intensity: f64) -> Vec<u8> {
        self.alpha
            .iter()
            .map(|a| (a * intensity * 255.0).round().clamp(0.0, 255.0) as u8)
            .collect()
    }
}

fn arc_points(cx: f64, cy: f64, rx: f64, ry: f64, from_deg: f64, to_deg: f64) -> Vec<(f64, f64)> {
    let steps = 90;
    (0..=steps)
        .map(|k| {
            let a = (from_deg + (to_deg - from_deg) * k as f64 / steps as f64).to_radians();
            (cx + rx * a.cos(), cy + ry * a.sin())
        })
        .collect()
}

fn line_points(ax: f64, ay: f64, bx: f64, by: f64) -> Vec<(f64, f64)> {
    let len = ((bx - ax).powi(2) + (by - ay).powi(2)).sqrt();
    let steps = (len * 4.0).ceil().max(2.0) as usize;
    (0..=steps)
        .map(|k| {
            let f = k as f64 / steps as f64;
            (ax + f * (bx - ax), ay + f * (by - ay))
        })
        .collect()
}

/// Renders one digit glyph (class 0, 1 or 2) with randomized geometry.
fn render_digit(class: u8, rng: &mut Rng) -> Vec<u8> {
    let mut canvas = Canvas::new();
    let radius = rng.uniform_in(1.1, 1.7);
    match class {
        0 => {
            let cx = rng.uniform_in(12.5, 15.5);
            let cy = rng.uniform_in(12.5, 15.5);
            let rx = rng.uniform_in(5.0, 7.5);
            let ry = rng.uniform_in(7.5, 9.8);
            canvas.stroke(&arc_points(cx, cy, rx, ry, 0.0, 360.0), radius);
        }
        1 => {
            let cx = rng.uniform_in(12.0, 16.0);
            let half = rng.uniform_in(8.0, 10.0);
            let cy = rng.uniform_in(13.0, 15.0);
            let slant = rng.uniform_in(-0.12, 0.12);
            let top = (cx + slant * half, cy + half);
            let bottom = (cx - slant * half, cy - half);
            canvas.stroke(&line_points(bottom.0, bottom.1, top.0, top.1), radius);
            if rng.bernoulli(0.7) {
                // Flag at the top.
                canvas.stroke(
                    &line_points(top.0, top.1, top.0 - 3.5, top.1 - 2.5),
                    radius * 0.9,
                );
            }
            if rng.bernoulli(0.5) {
                // Base serif.
                canvas.stroke(
                    &line_points(bottom.0 - 3.0, bottom.1, bottom.0 + 3.0, bottom.1),
                    radius * 0.9,
                );
            }
        }
        2 => {
            let cx = rng.uniform_in(13.0, 15.0);
            let cy_u = rng.uniform_in(17.0, 19.0);
            let r = rng.uniform_in(4.2, 5.3);
            let arc = arc_points(cx, cy_u, r, r, 165.0, -25.0);
            canvas.stroke(&arc, radius);
            let start = *arc.last().unwrap();
            let base_y = rng.uniform_in(5.5, 7.0);
            let left = (cx - r - rng.uniform_in(0.0, 1.0), base_y);
            canvas.stroke(&line_points(start.0, start.1, left.0, left.1), radius);
            let right = (cx + r + rng.uniform_in(0.0, 1.5), base_y + rng.uniform_in(-0.5, 0.8));
            canvas.stroke(&line_points(left.0, left.1, right.0, right.1), radius);
        }
        _ => unreachable!("renderer supports classes 0-2"),
    }
    canvas.to_bytes(rng.uniform_in(0.75, 1.0))
}

/// `n` synthetic digit images (classes cycled 0, 1, 2) as raw IDX-style
/// pixel bytes plus labels.
pub fn synthesize_digits(n: usize, rng: &mut Rng) -> (Vec<u8>, Vec<u8>) {
    let mut pixels = Vec::with_capacity(n * SIDE * SIDE);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let class = (i % 3) as u8;
        pixels.extend_from_slice(&render_digit(class, rng));
        labels.push(class);
    }
    (pixels, labels)
}

/// Writes a synthetic digit dataset as a standard IDX image/label file
/// pair and returns the two paths.
pub fn synthesize_digit_files(
    dir: &Path,
    n: usize,
    rng: &mut Rng,
) -> Result<(std::path::PathBuf, std::path::PathBuf)> {
    std::fs::create_dir_all(dir)?;
    let (pixels, labels) = synthesize_digits(n, rng);
    let image_path = dir.join("digits-images.idx");
    let label_path = dir.join("digits-labels.idx");
    write_idx_images(&image_path, &pixels, n, SIDE, SIDE)?;
    write_idx_labels(&label_path, &labels)?;
    Ok((image_path, label_path))
}
