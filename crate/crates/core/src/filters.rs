//! Discrete ramp kernel, FIR convolution and the symmetric recursive filter.
//!
//! The band-limited ramp has the exact discrete impulse response
//! `h(0) = 1/4`, `h(n) = 0` for even `n` and `h(n) = -1/(nπ)²` for odd `n`.
//! A short recursive filter applied once left-to-right and once
//! right-to-left reproduces the symmetric response of a long FIR kernel at
//! a fraction of the cost; coefficients come from [`crate::fit::fit_iir`].

use std::f64::consts::PI;

use crate::counters;
use crate::error::{Error, Result};
use crate::scalar::{cast, Scalar};

/// Symmetric FIR kernel `h(-L0) … h(L0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FirKernel<T: Scalar = f64> {
    half_len: usize,
    taps: Vec<T>,
}

impl<T: Scalar> FirKernel<T> {
    /// Wrap a symmetric tap vector of odd length `2·L0 + 1`.
    pub fn new(taps: Vec<T>) -> Result<Self> {
        if taps.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "FIR kernel length must be odd, got {}",
                taps.len()
            )));
        }
        let half_len = taps.len() / 2;
        for k in 0..=half_len {
            if taps[half_len + k] != taps[half_len - k] {
                return Err(Error::InvalidParameter(format!(
                    "FIR kernel taps must be symmetric (mismatch at lag {k})"
                )));
            }
        }
        Ok(Self { half_len, taps })
    }

    pub fn half_len(&self) -> usize {
        self.half_len
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Tap at signed lag `n`, `|n| ≤ L0`.
    #[inline]
    pub fn tap(&self, n: isize) -> T {
        self.taps[(n + self.half_len as isize) as usize]
    }

    pub fn taps(&self) -> &[T] {
        &self.taps
    }
}

/// Exact discrete ramp kernel with half-length `L0`.
pub fn ramp_kernel<T: Scalar>(half_len: usize) -> FirKernel<T> {
    let mut taps = vec![T::zero(); 2 * half_len + 1];
    taps[half_len] = cast::<T>(0.25);
    for n in (1..=half_len).step_by(2) {
        let v = cast::<T>(-1.0 / (n as f64 * PI).powi(2));
        taps[half_len + n] = v;
        taps[half_len - n] = v;
    }
    FirKernel {
        half_len,
        taps,
    }
}

/// Convolve one projection row with a symmetric kernel, zero-padded
/// boundaries, output length equal to input length.
pub fn fir_filter_row<T: Scalar>(row: &[T], kernel: &FirKernel<T>) -> Vec<T> {
    let len = row.len();
    let l0 = kernel.half_len() as isize;
    let mut out = vec![T::zero(); len];
    let mut mults = 0u64;
    for (i, o) in out.iter_mut().enumerate() {
        let i = i as isize;
        let lo = (i - l0).max(0);
        let hi = (i + l0).min(len as isize - 1);
        let mut acc = T::zero();
        for j in lo..=hi {
            acc += row[j as usize] * kernel.tap(i - j);
        }
        *o = acc;
        mults += (hi - lo + 1) as u64;
    }
    counters::count_multiplications(mults);
    out
}

/// Causal half `h⁺` of a symmetric kernel: `h(0)/2` at lag 0, then
/// `h(1) … h(L0)`. The mirrored anticausal half sums back to `h` exactly.
pub fn causal_target<T: Scalar>(kernel: &FirKernel<T>) -> Vec<T> {
    let l0 = kernel.half_len();
    let mut half = Vec::with_capacity(l0 + 1);
    half.push(kernel.tap(0) / cast::<T>(2.0));
    for n in 1..=l0 {
        half.push(kernel.tap(n as isize));
    }
    half
}

/// Feedforward/feedback coefficients shared by the causal and anticausal
/// passes of the symmetric recursive filter.
///
/// The difference equation is
/// `y(n) = Σ_{k<M} b_k·x(n−k) − Σ_{1≤k≤Q} a_k·y(n−k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IirFilterPair<T: Scalar = f64> {
    b: Vec<T>,
    a: Vec<T>,
}

impl<T: Scalar> IirFilterPair<T> {
    /// `b` holds `b_0 … b_{M−1}`, `a` holds `a_1 … a_Q`.
    pub fn new(b: Vec<T>, a: Vec<T>) -> Result<Self> {
        if b.is_empty() {
            return Err(Error::InvalidParameter(
                "feedforward order must be at least 1".into(),
            ));
        }
        if b.iter().chain(a.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(
                "filter coefficients must be finite".into(),
            ));
        }
        Ok(Self { b, a })
    }

    /// Feedforward order `M`.
    pub fn feedforward_order(&self) -> usize {
        self.b.len()
    }

    /// Feedback order `Q`.
    pub fn feedback_order(&self) -> usize {
        self.a.len()
    }

    pub fn feedforward(&self) -> &[T] {
        &self.b
    }

    pub fn feedback(&self) -> &[T] {
        &self.a
    }

    /// Largest root magnitude of the feedback polynomial
    /// `z^Q + a_1·z^{Q−1} + … + a_Q`; strictly below 1 for a stable filter.
    pub fn spectral_radius(&self) -> f64 {
        crate::fit::feedback_spectral_radius(&self.a)
    }

    pub fn is_stable(&self) -> bool {
        self.spectral_radius() < 1.0
    }
}

/// Response of the recursive filter to a unit impulse, lags `0 … n_max`.
pub fn iir_impulse_response<T: Scalar>(filter: &IirFilterPair<T>, n_max: usize) -> Vec<T> {
    let mut out = vec![T::zero(); n_max + 1];
    let b = filter.feedforward();
    let a = filter.feedback();
    for n in 0..=n_max {
        let mut v = if n < b.len() { b[n] } else { T::zero() };
        for (k, &ak) in a.iter().enumerate() {
            let lag = k + 1;
            if lag <= n {
                v -= ak * out[n - lag];
            }
        }
        out[n] = v;
    }
    out
}

fn directional_pass<T: Scalar>(row: &[T], filter: &IirFilterPair<T>, out: &mut [T]) {
    let b = filter.feedforward();
    let a = filter.feedback();
    for n in 0..row.len() {
        let mut v = T::zero();
        for (k, &bk) in b.iter().enumerate() {
            if k <= n {
                v += bk * row[n - k];
            }
        }
        for (k, &ak) in a.iter().enumerate() {
            let lag = k + 1;
            if lag <= n {
                v -= ak * out[n - lag];
            }
        }
        out[n] = v;
    }
}

/// Symmetric recursive filtering of one projection row: a causal pass plus
/// an anticausal pass, both from zero initial state with zero-padded input.
pub fn apply_iir_symmetric<T: Scalar>(row: &[T], filter: &IirFilterPair<T>) -> Vec<T> {
    let len = row.len();
    let mut forward = vec![T::zero(); len];
    directional_pass(row, filter, &mut forward);

    let reversed: Vec<T> = row.iter().rev().copied().collect();
    let mut backward = vec![T::zero(); len];
    directional_pass(&reversed, filter, &mut backward);

    for (n, f) in forward.iter_mut().enumerate() {
        *f += backward[len - 1 - n];
    }
    counters::count_multiplications(
        2 * (len as u64) * (filter.feedforward_order() + filter.feedback_order()) as u64,
    );
    forward
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn ramp_kernel_l0_zero() {
        let k: FirKernel = ramp_kernel(0);
        assert_eq!(k.taps(), &[0.25]);
    }

    #[test]
    fn ramp_kernel_l0_two() {
        let k: FirKernel = ramp_kernel(2);
        let odd = -1.0 / PI.powi(2);
        assert_eq!(k.taps(), &[0.0, odd, 0.25, odd, 0.0]);
        assert_relative_eq!(odd, -0.101_321, max_relative = 1e-5);
    }

    #[test]
    fn ramp_kernel_symmetry_and_tail_sum() {
        let k: FirKernel = ramp_kernel(513);
        for n in 0..=513isize {
            assert_eq!(k.tap(n), k.tap(-n));
        }
        // DC gain tends to zero; the finite residual is the series tail.
        let sum: f64 = k.taps().iter().sum();
        assert!(sum.abs() < 2.0 / (PI * PI * 513.0), "residual {sum}");
    }

    #[test]
    fn fir_impulse_reproduces_taps() {
        let k: FirKernel = ramp_kernel(3);
        let mut row = vec![0.0; 11];
        row[5] = 1.0;
        let out = fir_filter_row(&row, &k);
        for (i, &v) in out.iter().enumerate() {
            let lag = i as isize - 5;
            let expected = if lag.unsigned_abs() <= 3 { k.tap(lag) } else { 0.0 };
            assert_eq!(v, expected);
        }
    }

    #[test]
    fn fir_constant_row_interior_equals_tap_sum() {
        let k: FirKernel = ramp_kernel(64);
        let row = vec![1.0; 512];
        let out = fir_filter_row(&row, &k);
        let tap_sum: f64 = k.taps().iter().sum();
        for i in 64..512 - 64 {
            assert!((out[i] - tap_sum).abs() < 1e-12);
        }
    }

    #[test]
    fn fir_matches_naive_double_loop() {
        let k: FirKernel = ramp_kernel(9);
        let row: Vec<f64> = (0..41).map(|i| ((i * 37 % 17) as f64 - 8.0) * 0.37).collect();
        let out = fir_filter_row(&row, &k);
        for i in 0..row.len() as isize {
            let mut acc = 0.0;
            for j in 0..row.len() as isize {
                let lag = i - j;
                if lag.abs() <= 9 {
                    acc += row[j as usize] * k.tap(lag);
                }
            }
            assert!((out[i as usize] - acc).abs() < 1e-12);
        }
    }

    #[test]
    fn causal_split_is_exact() {
        let k: FirKernel = ramp_kernel(0);
        assert_eq!(causal_target(&k), vec![0.125]);

        let k: FirKernel = ramp_kernel(2);
        let half = causal_target(&k);
        assert_eq!(half, vec![0.125, -1.0 / PI.powi(2), 0.0]);

        // h⁺ plus its mirror reproduces the kernel at every lag: the two
        // halves each carry h(0)/2 at lag 0 and one side of the tail.
        let k: FirKernel = ramp_kernel(17);
        let half = causal_target(&k);
        assert_eq!(half[0] + half[0], k.tap(0));
        for n in 1..=17usize {
            assert_eq!(half[n], k.tap(n as isize));
            assert_eq!(half[n], k.tap(-(n as isize)));
        }
    }

    #[test]
    fn impulse_response_pure_gain() {
        let f = IirFilterPair::new(vec![0.7], vec![]).unwrap();
        assert_eq!(iir_impulse_response(&f, 4), vec![0.7, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn impulse_response_geometric_decay() {
        let f = IirFilterPair::new(vec![1.0], vec![-0.5]).unwrap();
        let ir = iir_impulse_response(&f, 6);
        for (n, &v) in ir.iter().enumerate() {
            assert_relative_eq!(v, 0.5f64.powi(n as i32), max_relative = 1e-14);
        }
        assert!(f.is_stable());
    }

    #[test]
    fn symmetric_application_is_symmetric() {
        let f = IirFilterPair::new(vec![0.3, -0.1], vec![-0.4, 0.05]).unwrap();
        let mut row = vec![0.0f64; 65];
        row[32] = 1.0;
        let out = apply_iir_symmetric(&row, &f);
        for k in 0..=32 {
            assert!((out[32 + k] - out[32 - k]).abs() < 1e-12);
        }
        // Center tap doubles the causal lag-0 response.
        let ir = iir_impulse_response(&f, 0);
        assert_relative_eq!(out[32], 2.0 * ir[0], max_relative = 1e-14);
    }

    #[test]
    fn symmetric_application_matches_truncated_fir() {
        let f = IirFilterPair::new(vec![0.2, 0.04], vec![-0.6]).unwrap();
        let len = 96;
        let ir = iir_impulse_response(&f, len);
        // Build the equivalent symmetric kernel from the impulse response.
        let mut taps = vec![0.0; 2 * len + 1];
        taps[len] = 2.0 * ir[0];
        for k in 1..=len {
            taps[len + k] = ir[k];
            taps[len - k] = ir[k];
        }
        let kernel = FirKernel::new(taps).unwrap();
        let row: Vec<f64> = (0..len).map(|i| ((i * 31 % 23) as f64 - 11.0) * 0.21).collect();
        let fir = fir_filter_row(&row, &kernel);
        let iir = apply_iir_symmetric(&row, &f);
        for (a, b) in fir.iter().zip(&iir) {
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn filtering_is_linear() {
        let f = IirFilterPair::new(vec![0.3, -0.1], vec![-0.5]).unwrap();
        let x: Vec<f64> = (0..40).map(|i| (i as f64 * 0.7).sin()).collect();
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * 0.3).cos()).collect();
        let combined: Vec<f64> = x.iter().zip(&y).map(|(a, b)| 2.0 * a - 3.0 * b).collect();
        let fx = apply_iir_symmetric(&x, &f);
        let fy = apply_iir_symmetric(&y, &f);
        let fc = apply_iir_symmetric(&combined, &f);
        for i in 0..40 {
            assert!((fc[i] - (2.0 * fx[i] - 3.0 * fy[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn kernel_constructor_rejects_bad_input() {
        assert!(FirKernel::new(vec![1.0, 2.0]).is_err());
        assert!(FirKernel::new(vec![1.0, 2.0, 3.0]).is_err());
        assert!(FirKernel::new(vec![2.0, 1.0, 2.0]).is_ok());
    }
}
