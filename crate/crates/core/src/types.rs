//! Shared data types: images, sinograms, linograms and the RMSE metric.
//!
//! Coordinate conventions used throughout the crate:
//!
//! * An [`Image`] is an `N×N` grid over the square domain `[0, N]²` with the
//!   origin in the lower-left corner. Pixel `(x, y)` (column `x`, row `y`)
//!   samples the continuous field at the pixel center `(x + 0.5, y + 0.5)`.
//! * A [`Sinogram`] stores one projection per angle; angles are uniform on
//!   `[0, π)` starting at zero, detector bins have unit spacing and bin index
//!   `R/2` corresponds to a ray through the image center.
//! * A [`Linogram`] stores four `N×N` blocks of projections indexed by
//!   intercept and shift, one block per [`LineClass`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Square scalar field on the domain `[0, N]²`, row-major, origin lower-left.
#[derive(Debug, Clone, PartialEq)]
pub struct Image<T: Scalar = f64> {
    size: usize,
    data: Vec<T>,
}

impl<T: Scalar> Image<T> {
    /// Wrap row-major data of length `size²`. All values must be finite.
    pub fn new(size: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != size * size {
            return Err(Error::dims(
                format!("{size}x{size} = {} values", size * size),
                format!("{} values", data.len()),
            ));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "non-finite image value at flat index {pos}"
            )));
        }
        Ok(Self { size, data })
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            data: vec![T::zero(); size * size],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<T> {
        self.data
    }

    /// Value at column `x`, row `y` (row 0 is the bottom of the domain).
    #[inline]
    pub fn get(&self, x: usize, y: usize) -> T {
        self.data[y * self.size + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: T) {
        self.data[y * self.size + x] = value;
    }

    pub fn total(&self) -> T {
        self.data.iter().copied().sum()
    }

    /// Flat index of the largest value (first occurrence), as `(x, y)`.
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.data.iter().enumerate() {
            if *v > self.data[best] {
                best = i;
            }
        }
        (best % self.size, best / self.size)
    }
}

/// Stack of projections over angles uniform on `[0, π)`, bin spacing 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Sinogram<T: Scalar = f64> {
    num_angles: usize,
    num_bins: usize,
    data: Vec<T>,
}

impl<T: Scalar> Sinogram<T> {
    pub fn new(num_angles: usize, num_bins: usize, data: Vec<T>) -> Result<Self> {
        if num_angles == 0 || num_bins == 0 {
            return Err(Error::InvalidParameter(
                "sinogram dimensions must be positive".into(),
            ));
        }
        if data.len() != num_angles * num_bins {
            return Err(Error::dims(
                format!("{num_angles}x{num_bins} = {} values", num_angles * num_bins),
                format!("{} values", data.len()),
            ));
        }
        Ok(Self {
            num_angles,
            num_bins,
            data,
        })
    }

    pub fn zeros(num_angles: usize, num_bins: usize) -> Self {
        Self {
            num_angles,
            num_bins,
            data: vec![T::zero(); num_angles * num_bins],
        }
    }

    pub fn num_angles(&self) -> usize {
        self.num_angles
    }

    pub fn num_bins(&self) -> usize {
        self.num_bins
    }

    /// Angle of projection row `i`: `i·π/P`.
    pub fn angle(&self, i: usize) -> T {
        cast::<T>(i as f64 * PI / self.num_angles as f64)
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.num_bins..(i + 1) * self.num_bins]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [T] {
        &mut self.data[i * self.num_bins..(i + 1) * self.num_bins]
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [T] {
        &mut self.data
    }
}

/// Line orientation half of a [`LineClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    MostlyVertical,
    MostlyHorizontal,
}

/// Shift sign half of a [`LineClass`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    Positive,
    Negative,
}

/// One of the four line families covering `[0, π)`.
///
/// Mostly vertical lines run between the horizontal image boundaries and are
/// parameterized by a bottom intercept `s` and a horizontal shift `t`;
/// mostly horizontal lines run between the vertical boundaries with a left
/// intercept and a vertical shift. The normal angle ranges are
/// `VerticalNeg ↔ [0, π/4]`, `HorizontalNeg ↔ [π/4, π/2]`,
/// `HorizontalPos ↔ [π/2, 3π/4]` and `VerticalPos ↔ [3π/4, π]`, with the
/// shared boundary angles present in both adjacent classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LineClass {
    VerticalPos,
    VerticalNeg,
    HorizontalPos,
    HorizontalNeg,
}

impl LineClass {
    pub const ALL: [LineClass; 4] = [
        LineClass::VerticalPos,
        LineClass::VerticalNeg,
        LineClass::HorizontalPos,
        LineClass::HorizontalNeg,
    ];

    pub fn orientation(self) -> Orientation {
        match self {
            LineClass::VerticalPos | LineClass::VerticalNeg => Orientation::MostlyVertical,
            LineClass::HorizontalPos | LineClass::HorizontalNeg => Orientation::MostlyHorizontal,
        }
    }

    pub fn shift_sign(self) -> ShiftSign {
        match self {
            LineClass::VerticalPos | LineClass::HorizontalPos => ShiftSign::Positive,
            LineClass::VerticalNeg | LineClass::HorizontalNeg => ShiftSign::Negative,
        }
    }

    /// Closed normal-angle range `[lo, hi]` covered by this class, radians.
    pub fn theta_range(self) -> (f64, f64) {
        match self {
            LineClass::VerticalNeg => (0.0, PI / 4.0),
            LineClass::HorizontalNeg => (PI / 4.0, PI / 2.0),
            LineClass::HorizontalPos => (PI / 2.0, 3.0 * PI / 4.0),
            LineClass::VerticalPos => (3.0 * PI / 4.0, PI),
        }
    }

    /// Block index inside a [`Linogram`].
    pub fn index(self) -> usize {
        match self {
            LineClass::VerticalPos => 0,
            LineClass::VerticalNeg => 1,
            LineClass::HorizontalPos => 2,
            LineClass::HorizontalNeg => 3,
        }
    }
}

/// Four `N×N` blocks of projections in intercept/shift coordinates.
///
/// `block(class)[t_index * N + s_index]` is the projection of the line with
/// intercept index `s_index` and shift index `t_index`; the shift index maps
/// to the continuous shift `±N·t_index/(N−1)`. Intercepts wrap modulo `N`,
/// so an entry aggregates the two complementary partial lines that share its
/// wrapped intercept; with a fixed shift the `N` entries of a row partition
/// the pixel grid and therefore sum to the image total.
#[derive(Debug, Clone, PartialEq)]
pub struct Linogram<T: Scalar = f64> {
    size: usize,
    blocks: [Vec<T>; 4],
}

impl<T: Scalar> Linogram<T> {
    pub fn new(size: usize, blocks: [Vec<T>; 4]) -> Result<Self> {
        for (i, b) in blocks.iter().enumerate() {
            if b.len() != size * size {
                return Err(Error::dims(
                    format!("{size}x{size} block"),
                    format!("block {i} with {} values", b.len()),
                ));
            }
        }
        Ok(Self { size, blocks })
    }

    pub fn zeros(size: usize) -> Self {
        Self {
            size,
            blocks: std::array::from_fn(|_| vec![T::zero(); size * size]),
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn block(&self, class: LineClass) -> &[T] {
        &self.blocks[class.index()]
    }

    pub fn block_mut(&mut self, class: LineClass) -> &mut [T] {
        &mut self.blocks[class.index()]
    }

    #[inline]
    pub fn get(&self, class: LineClass, t_index: usize, s_index: usize) -> T {
        self.blocks[class.index()][t_index * self.size + s_index]
    }

    pub fn row(&self, class: LineClass, t_index: usize) -> &[T] {
        &self.blocks[class.index()][t_index * self.size..(t_index + 1) * self.size]
    }
}

/// Root-mean-square difference between two same-sized images.
pub fn rmse<T: Scalar>(a: &Image<T>, b: &Image<T>) -> Result<T> {
    if a.size() != b.size() {
        return Err(Error::dims(
            format!("{0}x{0}", a.size()),
            format!("{0}x{0}", b.size()),
        ));
    }
    let sum: T = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| (x - y) * (x - y))
        .sum();
    Ok((sum / cast::<T>((a.size() * a.size()) as f64)).sqrt())
}
