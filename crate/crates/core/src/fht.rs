//! Fast Hough transform over dyadic line patterns: forward projection of an
//! image into a four-block linogram and back projection of a linogram into
//! an image, both in Θ(N²·log N) additions.
//!
//! A dyadic pattern of shift `t` on a strip of `h = 2^k` rows picks one
//! pixel per row, approximating the segment from `(s, 0)` to `(s+t, h−1)`.
//! Patterns are built by joining two half-height patterns of shift `⌊t/2⌋`,
//! the upper one translated by `⌈t/2⌉`, so neighbouring shifts share their
//! halves and each doubling level costs one addition per output entry.
//! Intercepts wrap modulo `N`: a wrapped entry is the sum of the two
//! complementary partial lines, which keeps every row of the transform an
//! exact partition of the pixel grid.
//!
//! Back projection reuses the same accumulation: a pixel's fan of lines
//! through one block forms a dyadic pattern in the block's (shift,
//! intercept) plane, with the drift direction flipped for the positive-shift
//! classes (realized by mirroring the intercept axis on the way in and out)
//! and a transpose attached to the mostly-horizontal classes. Block rows are
//! pre-weighted by the angular quadrature weight times the arclength factor,
//! the only multiplications on this path.

use rayon::prelude::*;

use crate::counters;
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::types::{Image, LineClass, Linogram};

/// Execution plan for a power-of-two transform size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FhtPlan {
    size: usize,
    levels: u32,
}

impl FhtPlan {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 || !size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "transform size must be a power of two, got {size}"
            )));
        }
        Ok(Self {
            size,
            levels: size.trailing_zeros(),
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Number of doubling levels, `log₂ N`.
    pub fn levels(&self) -> u32 {
        self.levels
    }
}

/// Dyadic approximation of the segment from `(s, 0)` to `(s+t, h−1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DyadicPattern {
    height: usize,
    shift: usize,
}

impl DyadicPattern {
    pub fn new(height: usize, shift: usize) -> Result<Self> {
        if height == 0 || !height.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "pattern height must be a power of two, got {height}"
            )));
        }
        if shift >= height {
            return Err(Error::InvalidParameter(format!(
                "shift {shift} out of range for height {height}"
            )));
        }
        Ok(Self { height, shift })
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    /// Horizontal offset of the pattern pixel in each row, length `height`.
    /// Offset 0 in row 0 and `shift` in the last row.
    pub fn offsets(&self) -> Vec<usize> {
        fn build(height: usize, shift: usize) -> Vec<usize> {
            if height == 1 {
                return vec![0];
            }
            let half = build(height / 2, shift / 2);
            let jump = shift - shift / 2;
            half.iter()
                .copied()
                .chain(half.iter().map(|&d| d + jump))
                .collect()
        }
        build(self.height, self.shift)
    }
}

/// One full accumulation pass over a `rows × width` buffer (`rows` a power
/// of two, intercepts cyclic in `width`): turns row `y` data into pattern
/// sums, with the strip of height `h` starting at row `b` holding shift `t`
/// at row `b + t`. After `log₂ rows` levels row `t` is the full-height
/// transform.
fn fht_pass_rect<T: Scalar>(mut data: Vec<T>, rows: usize, width: usize) -> Vec<T> {
    let levels = rows.trailing_zeros();
    let mut scratch = vec![T::zero(); rows * width];
    for level in 0..levels {
        let h = 1usize << level;
        let span = 2 * h * width;
        scratch
            .par_chunks_mut(span)
            .zip(data.par_chunks(span))
            .for_each(|(out, input)| {
                let (bot, top) = input.split_at(h * width);
                for t2 in 0..2 * h {
                    let t = t2 >> 1;
                    let jump = (t2 + 1) >> 1;
                    let bot_row = &bot[t * width..(t + 1) * width];
                    let top_row = &top[t * width..(t + 1) * width];
                    let out_row = &mut out[t2 * width..(t2 + 1) * width];
                    let split = width - jump;
                    for s in 0..split {
                        out_row[s] = bot_row[s] + top_row[s + jump];
                    }
                    for s in split..width {
                        out_row[s] = bot_row[s] + top_row[s + jump - width];
                    }
                }
            });
        std::mem::swap(&mut data, &mut scratch);
    }
    counters::count_additions((rows * width) as u64 * levels as u64);
    data
}

fn fht_pass<T: Scalar>(data: Vec<T>, n: usize) -> Vec<T> {
    fht_pass_rect(data, n, n)
}

fn mirror_cols<T: Scalar>(data: &mut [T], n: usize) {
    for row in data.chunks_mut(n) {
        row.reverse();
    }
}

fn transposed<T: Scalar>(data: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    const TILE: usize = 32;
    for by in (0..n).step_by(TILE) {
        for bx in (0..n).step_by(TILE) {
            for y in by..(by + TILE).min(n) {
                for x in bx..(bx + TILE).min(n) {
                    out[x * n + y] = data[y * n + x];
                }
            }
        }
    }
    out
}

/// Forward transform: dyadic-pattern sums of the image for all four line
/// classes. Requires a power-of-two image size.
///
/// Block layout: `VerticalPos[t][s] = Σ_y img[y][(s + Δ_t(y)) mod N]`, the
/// negative class mirrors the drift, and the horizontal classes apply the
/// same transforms to the transposed image.
pub fn fht_forward<T: Scalar>(img: &Image<T>) -> Result<Linogram<T>> {
    let n = img.size();
    FhtPlan::new(n)?;

    let straight = img.data().to_vec();
    let mut mirrored = straight.clone();
    mirror_cols(&mut mirrored, n);
    let swapped = transposed(img.data(), n);
    let mut swapped_mirrored = swapped.clone();
    mirror_cols(&mut swapped_mirrored, n);

    let ((vpos, vneg), (hpos, hneg)) = rayon::join(
        || {
            rayon::join(
                || fht_pass(straight, n),
                || {
                    let mut b = fht_pass(mirrored, n);
                    mirror_cols(&mut b, n);
                    b
                },
            )
        },
        || {
            rayon::join(
                || fht_pass(swapped, n),
                || {
                    let mut b = fht_pass(swapped_mirrored, n);
                    mirror_cols(&mut b, n);
                    b
                },
            )
        },
    );
    Linogram::new(n, [vpos, vneg, hpos, hneg])
}

/// Per-row back-projection weights: trapezoidal angular steps of
/// `θ(t) = atan(t/(N−1))` over the class's quarter turn (the two boundary
/// rows, shared with the neighbouring classes, get half steps) multiplied by
/// the arclength factor `k(t) = sec θ(t)` that restores projection amplitude.
fn back_projection_weights<T: Scalar>(n: usize) -> Vec<T> {
    let thetas: Vec<f64> = (0..n)
        .map(|t| (t as f64 / (n - 1) as f64).atan())
        .collect();
    (0..n)
        .map(|t| {
            let dtheta = if t == 0 {
                (thetas[1] - thetas[0]) / 2.0
            } else if t == n - 1 {
                (thetas[n - 1] - thetas[n - 2]) / 2.0
            } else {
                (thetas[t + 1] - thetas[t - 1]) / 2.0
            };
            let slope = t as f64 / (n - 1) as f64;
            let arclength = (1.0 + slope * slope).sqrt();
            cast::<T>(dtheta * arclength)
        })
        .collect()
}

fn weighted_block<T: Scalar>(block: &[T], weights: &[T], n: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n * n];
    out.par_chunks_mut(n)
        .zip(block.par_chunks(n))
        .enumerate()
        .for_each(|(t, (dst, src))| {
            let w = weights[t];
            for (d, s) in dst.iter_mut().zip(src) {
                *d = *s * w;
            }
        });
    counters::count_multiplications((n * n) as u64);
    out
}

/// Back projection of a linogram in Θ(N²·log N) additions and Θ(N²)
/// multiplications, commensurate with
/// [`back_project_direct`](crate::radon::back_project_direct).
pub fn fht_back_project<T: Scalar>(lin: &Linogram<T>) -> Result<Image<T>> {
    let n = lin.size();
    FhtPlan::new(n)?;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "back projection needs at least a 2x2 linogram".into(),
        ));
    }

    let weights = back_projection_weights::<T>(n);
    let prepare = |class: LineClass, mirror: bool| {
        let mut g = weighted_block(lin.block(class), &weights, n);
        if mirror {
            mirror_cols(&mut g, n);
        }
        fht_pass(g, n)
    };

    let ((b_vneg, b_vpos), (b_hneg, b_hpos)) = rayon::join(
        || {
            rayon::join(
                || prepare(LineClass::VerticalNeg, false),
                || prepare(LineClass::VerticalPos, true),
            )
        },
        || {
            rayon::join(
                || prepare(LineClass::HorizontalNeg, false),
                || prepare(LineClass::HorizontalPos, true),
            )
        },
    );

    let mut data = vec![T::zero(); n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(y, row)| {
        let vneg_row = &b_vneg[y * n..(y + 1) * n];
        let vpos_row = &b_vpos[y * n..(y + 1) * n];
        for (x, out) in row.iter_mut().enumerate() {
            *out = vneg_row[x]
                + vpos_row[n - 1 - x]
                + b_hneg[x * n + y]
                + b_hpos[x * n + (n - 1 - y)];
        }
    });
    Image::new(n, data)
}

/// Back projection of a wrap-free wide linogram. Same accumulation and the
/// same per-row weights as [`fht_back_project`] on buffers twice as wide;
/// every access stays in range, so no line is folded onto another. This is
/// the route [`crate::pipeline::reconstruct`] uses.
pub fn fht_back_project_wide<T: Scalar>(lin: &crate::linogram::WideLinogram<T>) -> Result<Image<T>> {
    let n = lin.size();
    FhtPlan::new(n)?;
    if n < 2 {
        return Err(Error::InvalidParameter(
            "back projection needs at least a 2x2 linogram".into(),
        ));
    }
    let width = lin.width();

    let weights = back_projection_weights::<T>(n);
    let weighted = |class: LineClass| {
        let block = lin.block(class);
        let mut out = vec![T::zero(); n * width];
        out.par_chunks_mut(width)
            .zip(block.par_chunks(width))
            .enumerate()
            .for_each(|(t, (dst, src))| {
                let w = weights[t];
                for (d, s) in dst.iter_mut().zip(src) {
                    *d = *s * w;
                }
            });
        counters::count_multiplications((n * width) as u64);
        out
    };
    let prepare = |class: LineClass, mirror: bool| {
        let mut g = weighted(class);
        if mirror {
            mirror_cols(&mut g, width);
        }
        fht_pass_rect(g, n, width)
    };

    let ((b_vneg, b_vpos), (b_hneg, b_hpos)) = rayon::join(
        || {
            rayon::join(
                || prepare(LineClass::VerticalNeg, false),
                || prepare(LineClass::VerticalPos, true),
            )
        },
        || {
            rayon::join(
                || prepare(LineClass::HorizontalNeg, false),
                || prepare(LineClass::HorizontalPos, true),
            )
        },
    );

    // Positive classes store intercept j−N and were mirrored over 2N
    // columns, so pixel x reads column 2N−1−(x+N) = N−1−x; negative classes
    // store intercept j and read column x directly.
    let mut data = vec![T::zero(); n * n];
    data.par_chunks_mut(n).enumerate().for_each(|(y, row)| {
        let vneg_row = &b_vneg[y * width..y * width + width];
        let vpos_row = &b_vpos[y * width..y * width + width];
        for (x, out) in row.iter_mut().enumerate() {
            *out = vneg_row[x]
                + vpos_row[n - 1 - x]
                + b_hneg[x * width + y]
                + b_hpos[x * width + (n - 1 - y)];
        }
    });
    Image::new(n, data)
}
