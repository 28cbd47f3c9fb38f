//! Shepp-Logan head phantom rasterization.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};
use crate::types::Image;

/// Additive ellipse in normalized `[-1, 1]²` coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipse {
    /// Center.
    pub x0: f64,
    pub y0: f64,
    /// Semi-axis along the ellipse x direction before rotation.
    pub a: f64,
    /// Semi-axis along the ellipse y direction before rotation.
    pub b: f64,
    /// Counterclockwise rotation, radians.
    pub phi: f64,
    /// Additive intensity.
    pub rho: f64,
}

impl Ellipse {
    /// Whether the normalized point `(u, v)` lies inside the ellipse.
    pub fn contains(&self, u: f64, v: f64) -> bool {
        let (du, dv) = (u - self.x0, v - self.y0);
        let (sin, cos) = self.phi.sin_cos();
        let eu = du * cos + dv * sin;
        let ev = -du * sin + dv * cos;
        (eu / self.a).powi(2) + (ev / self.b).powi(2) <= 1.0
    }
}

/// The standard ten-ellipse Shepp-Logan parameter set (head intensity 2.0).
///
/// Columns: center, semi-axes, rotation, additive intensity. Pixel values of
/// the rasterized phantom lie in `[0, 2]`, with the bright outer shell at 2
/// and the interior around 1.0–1.04.
pub fn shepp_logan_ellipses() -> [Ellipse; 10] {
    let deg = std::f64::consts::PI / 180.0;
    let e = |x0: f64, y0: f64, a: f64, b: f64, phi_deg: f64, rho: f64| Ellipse {
        x0,
        y0,
        a,
        b,
        phi: phi_deg * deg,
        rho,
    };
    [
        e(0.0, 0.0, 0.69, 0.92, 0.0, 2.0),
        e(0.0, -0.0184, 0.6624, 0.874, 0.0, -0.98),
        e(0.22, 0.0, 0.11, 0.31, -18.0, -0.02),
        e(-0.22, 0.0, 0.16, 0.41, 18.0, -0.02),
        e(0.0, 0.35, 0.21, 0.25, 0.0, 0.01),
        e(0.0, 0.1, 0.046, 0.046, 0.0, 0.01),
        e(0.0, -0.1, 0.046, 0.046, 0.0, 0.01),
        e(-0.08, -0.605, 0.046, 0.023, 0.0, 0.01),
        e(0.0, -0.605, 0.023, 0.023, 0.0, 0.01),
        e(0.06, -0.605, 0.023, 0.046, 0.0, 0.01),
    ]
}

/// Rasterize a set of additive ellipses by point-sampling pixel centers.
pub fn rasterize_ellipses<T: Scalar>(ellipses: &[Ellipse], size: usize) -> Result<Image<T>> {
    if size < 2 {
        return Err(Error::InvalidParameter(format!(
            "phantom size must be at least 2, got {size}"
        )));
    }
    let n = size as f64;
    let mut data = vec![T::zero(); size * size];
    data.par_chunks_mut(size).enumerate().for_each(|(y, row)| {
        let v = (y as f64 + 0.5) * 2.0 / n - 1.0;
        for (x, out) in row.iter_mut().enumerate() {
            let u = (x as f64 + 0.5) * 2.0 / n - 1.0;
            let mut acc = 0.0;
            for e in ellipses {
                if e.contains(u, v) {
                    acc += e.rho;
                }
            }
            *out = cast::<T>(acc);
        }
    });
    Image::new(size, data)
}

/// The Shepp-Logan phantom on an `N×N` grid. Requires `N ≥ 2`.
pub fn generate_shepp_logan<T: Scalar>(size: usize) -> Result<Image<T>> {
    rasterize_ellipses(&shepp_logan_ellipses(), size)
}
