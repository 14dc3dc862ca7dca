//! Image patch sampling (i.i.d. or by a random walk of the patch corner) and
//! reconstruction by averaging coded patches on overlaps.

use ndarray::{Array2, ArrayView2};
use rand::Rng;

use crate::error::{Error, Result};
use crate::omf::sparse_code::{CodingParams, SparseCoder};

/// Grayscale image with pixels in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    pixels: Array2<f64>,
}

impl ImageGrid {
    pub fn new(pixels: Array2<f64>) -> Result<Self> {
        if pixels.is_empty() {
            return Err(Error::InvalidParameter("empty image".into()));
        }
        if pixels.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidParameter("pixel values must lie in [0, 1]".into()));
        }
        Ok(ImageGrid { pixels })
    }

    pub fn constant(height: usize, width: usize, value: f64) -> Result<Self> {
        Self::new(Array2::from_elem((height, width), value))
    }

    pub fn pixels(&self) -> ArrayView2<'_, f64> {
        self.pixels.view()
    }

    pub fn height(&self) -> usize {
        self.pixels.nrows()
    }

    pub fn width(&self) -> usize {
        self.pixels.ncols()
    }

    /// Pixel with periodic wrap.
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.pixels[[row % self.height(), col % self.width()]]
    }

    /// Row-major flattening of the `k×k` patch with top-left corner
    /// `(row, col)`, wrapping at the borders.
    pub fn patch(&self, row: usize, col: usize, k: usize) -> Vec<f64> {
        let mut out = Vec::with_capacity(k * k);
        for a in 0..k {
            for b in 0..k {
                out.push(self.at(row + a, col + b));
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatchMode {
    Iid,
    Walk,
}

/// Top-left corner of a patch performing a simple symmetric random walk on
/// the image torus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchWalker {
    pub row: usize,
    pub col: usize,
    rows: usize,
    cols: usize,
}

impl PatchWalker {
    pub fn new(row: usize, col: usize, rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0);
        PatchWalker {
            row: row % rows,
            col: col % cols,
            rows,
            cols,
        }
    }

    pub fn for_image(image: &ImageGrid) -> Self {
        PatchWalker::new(0, 0, image.height(), image.width())
    }

    /// One step up, down, left or right with equal probability.
    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        match rng.gen_range(0..4) {
            0 => self.row = (self.row + self.rows - 1) % self.rows,
            1 => self.row = (self.row + 1) % self.rows,
            2 => self.col = (self.col + self.cols - 1) % self.cols,
            _ => self.col = (self.col + 1) % self.cols,
        }
    }

    pub fn position(&self) -> (usize, usize) {
        (self.row, self.col)
    }
}

#[derive(Debug, Clone)]
pub struct PatchBatch {
    /// `k²×count`, one flattened patch per column.
    pub data: Array2<f64>,
    /// Top-left corner of each column's patch.
    pub corners: Vec<(usize, usize)>,
}

/// Draws `count` patches. In walk mode the walker moves one step before each
/// patch and is left at the last corner.
pub fn image_patch_minibatch<R: Rng + ?Sized>(
    image: &ImageGrid,
    k: usize,
    count: usize,
    mode: PatchMode,
    walker: &mut PatchWalker,
    rng: &mut R,
) -> Result<PatchBatch> {
    if k == 0 || k > image.height().min(image.width()) {
        return Err(Error::InvalidParameter(format!(
            "patch size {k} does not fit a {}x{} image",
            image.height(),
            image.width()
        )));
    }
    let mut data = Array2::zeros((k * k, count));
    let mut corners = Vec::with_capacity(count);
    for j in 0..count {
        let corner = match mode {
            PatchMode::Iid => (rng.gen_range(0..image.height()), rng.gen_range(0..image.width())),
            PatchMode::Walk => {
                walker.step(rng);
                walker.position()
            }
        };
        for (i, v) in image.patch(corner.0, corner.1, k).into_iter().enumerate() {
            data[[i, j]] = v;
        }
        corners.push(corner);
    }
    Ok(PatchBatch { data, corners })
}

/// Codes every `k×k` patch whose corner lies on the stride grid (plus the
/// last row/column of corners so borders are covered) against `w` and
/// averages the approximations where patches overlap. No wrap-around.
pub fn reconstruct_grid(
    image: &ImageGrid,
    w: ArrayView2<f64>,
    k: usize,
    stride: usize,
    coding: CodingParams,
) -> Result<ImageGrid> {
    let (h, wd) = (image.height(), image.width());
    if k == 0 || k > h.min(wd) || stride == 0 {
        return Err(Error::InvalidParameter("bad patch size or stride".into()));
    }
    if w.nrows() != k * k {
        return Err(Error::Dimension(format!(
            "dictionary has {} rows, patches have {}",
            w.nrows(),
            k * k
        )));
    }
    let coder = SparseCoder::new(w, coding)?;
    let corners = |len: usize| {
        let mut v: Vec<usize> = (0..=len - k).step_by(stride).collect();
        if *v.last().unwrap() != len - k {
            v.push(len - k);
        }
        v
    };
    let rows = corners(h);
    let cols = corners(wd);

    let mut batch = Array2::zeros((k * k, rows.len() * cols.len()));
    let mut placed = Vec::with_capacity(rows.len() * cols.len());
    for &r in &rows {
        for &c in &cols {
            let j = placed.len();
            for (i, v) in image.patch(r, c, k).into_iter().enumerate() {
                batch[[i, j]] = v;
            }
            placed.push((r, c));
        }
    }
    let code = coder.code(batch.view())?;
    let approx = w.dot(&code.h);

    let mut sum = Array2::<f64>::zeros((h, wd));
    let mut count = Array2::<u32>::zeros((h, wd));
    for (j, &(r, c)) in placed.iter().enumerate() {
        for a in 0..k {
            for b in 0..k {
                sum[[r + a, c + b]] += approx[[a * k + b, j]];
                count[[r + a, c + b]] += 1;
            }
        }
    }
    let out = Array2::from_shape_fn((h, wd), |(i, j)| {
        (sum[[i, j]] / count[[i, j]].max(1) as f64).clamp(0.0, 1.0)
    });
    ImageGrid::new(out)
}

/// Peak signal-to-noise ratio in dB for images in `[0, 1]`.
pub fn psnr(a: &ImageGrid, b: &ImageGrid) -> f64 {
    let mse = (&a.pixels - &b.pixels).iter().map(|v| v * v).sum::<f64>() / a.pixels.len() as f64;
    if mse == 0.0 {
        f64::INFINITY
    } else {
        -10.0 * mse.log10()
    }
}
