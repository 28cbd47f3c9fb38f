//! End-to-end reconstruction pipelines, experiment sweeps and benchmarks.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fht::{fht_back_project, fht_back_project_wide};
use crate::filters::{
    apply_iir_symmetric, causal_target, ramp_kernel, FirKernel, IirFilterPair,
};
use crate::fit::{fit_iir, FitOptions};
use crate::linogram::{sinogram_to_linogram, sinogram_to_wide_linogram};
use crate::phantom::generate_shepp_logan;
use crate::radon::{back_project_direct, filter_sinogram_fir, forward_radon, RadonGeometry};
use crate::scalar::Scalar;
use crate::types::{rmse, Image, Sinogram};

/// Projection-filtering stage of a reconstruction.
#[derive(Debug, Clone)]
pub enum FilterMode<T: Scalar = f64> {
    /// Ramp FIR of half-length `L0`; `None` covers the whole detector.
    Fir { half_len: Option<usize> },
    /// Symmetric recursive filter with precomputed coefficients.
    Iir { filter: IirFilterPair<T> },
    /// Fit coefficients of the given orders to the causal ramp half-kernel
    /// before filtering; `horizon` defaults to the image size.
    IirFit {
        m: usize,
        q: usize,
        horizon: Option<usize>,
        options: FitOptions<T>,
    },
}

/// Back-projection stage of a reconstruction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackprojMode {
    /// Θ(N³) interpolating back projection.
    Direct,
    /// Θ(N²·log N) fast Hough back projection over a linogram.
    Fht,
}

impl BackprojMode {
    pub fn label(self) -> &'static str {
        match self {
            BackprojMode::Direct => "direct",
            BackprojMode::Fht => "fht",
        }
    }
}

/// Full configuration of [`reconstruct`].
#[derive(Debug, Clone)]
pub struct ReconstructionConfig<T: Scalar = f64> {
    pub size: usize,
    pub num_angles: usize,
    pub filter: FilterMode<T>,
    pub backprojection: BackprojMode,
}

impl<T: Scalar> ReconstructionConfig<T> {
    fn validate(&self, sino: &Sinogram<T>) -> Result<()> {
        if self.num_angles != sino.num_angles() {
            return Err(Error::Config(format!(
                "config expects {} angles, sinogram has {}",
                self.num_angles,
                sino.num_angles()
            )));
        }
        if self.size == 0 {
            return Err(Error::Config("image size must be positive".into()));
        }
        if self.backprojection == BackprojMode::Fht && !self.size.is_power_of_two() {
            return Err(Error::Config(format!(
                "fast Hough back projection needs a power-of-two size, got {}",
                self.size
            )));
        }
        if sino.num_bins() < RadonGeometry::min_bins(self.size) {
            return Err(Error::Config(format!(
                "{} detector bins cannot cover a {} pixel image",
                sino.num_bins(),
                self.size
            )));
        }
        if let FilterMode::IirFit { m, .. } = &self.filter {
            if *m == 0 {
                return Err(Error::Config("feedforward order must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Filter every projection row with a fitted or supplied recursive filter.
pub fn filter_sinogram_iir<T: Scalar>(
    sino: &Sinogram<T>,
    filter: &IirFilterPair<T>,
) -> Sinogram<T> {
    let mut out = sino.clone();
    let bins = sino.num_bins();
    out.data_mut()
        .par_chunks_mut(bins)
        .enumerate()
        .for_each(|(i, row)| {
            let filtered = apply_iir_symmetric(sino.row(i), filter);
            row.copy_from_slice(&filtered);
        });
    out
}

/// Fit recursive ramp coefficients for an image size: the target is the
/// causal half of the exact ramp kernel over the given horizon.
pub fn fit_ramp_iir<T: Scalar>(
    m: usize,
    q: usize,
    horizon: usize,
    options: &FitOptions<T>,
) -> Result<(IirFilterPair<T>, crate::fit::FitReport<T>)> {
    let target = causal_target(&ramp_kernel::<T>(horizon));
    fit_iir(&target, m, q, options)
}

fn resolve_fir_kernel<T: Scalar>(half_len: Option<usize>, sino: &Sinogram<T>) -> FirKernel<T> {
    ramp_kernel(half_len.unwrap_or(sino.num_bins().saturating_sub(1)))
}

/// Reconstruct an image from a sinogram.
///
/// Rows are filtered in `(r, θ)` space first; the fast route then converts
/// the filtered sinogram to a linogram in Θ(N²) and back-projects with the
/// fast Hough transform, for Θ(N²) multiplications and Θ(N²·log N)
/// additions overall.
pub fn reconstruct<T: Scalar>(
    sino: &Sinogram<T>,
    cfg: &ReconstructionConfig<T>,
) -> Result<Image<T>> {
    cfg.validate(sino)?;
    let filtered = match &cfg.filter {
        FilterMode::Fir { half_len } => {
            filter_sinogram_fir(sino, &resolve_fir_kernel(*half_len, sino))
        }
        FilterMode::Iir { filter } => filter_sinogram_iir(sino, filter),
        FilterMode::IirFit {
            m,
            q,
            horizon,
            options,
        } => {
            let horizon = horizon.unwrap_or(cfg.size);
            let (filter, _) = fit_ramp_iir(*m, *q, horizon, options)?;
            filter_sinogram_iir(sino, &filter)
        }
    };
    match cfg.backprojection {
        BackprojMode::Direct => back_project_direct(&filtered, cfg.size),
        BackprojMode::Fht => {
            let lin = sinogram_to_wide_linogram(&filtered, cfg.size)?;
            fht_back_project_wide(&lin)
        }
    }
}

/// One row of an order sweep. A failed fit is recorded, not fatal.
#[derive(Debug, Clone)]
pub struct OrderSweepRow<T: Scalar = f64> {
    pub order: usize,
    pub fit_mse: Option<T>,
    pub rmse: Option<T>,
    pub error: Option<String>,
}

/// Result of [`run_order_sweep`]: per-order reconstruction quality against
/// the FIR reference of the same pipeline.
#[derive(Debug, Clone)]
pub struct OrderSweep<T: Scalar = f64> {
    pub fir_rmse: T,
    pub rows: Vec<OrderSweepRow<T>>,
}

/// Reconstruction quality versus recursive-filter order at fixed size.
///
/// Uses direct back projection throughout. Each fit is seeded with the
/// previous order's coefficients padded with zeros, which makes the fit
/// error non-increasing in the order by construction.
pub fn run_order_sweep<T: Scalar>(
    size: usize,
    num_angles: usize,
    orders: &[usize],
    options: &FitOptions<T>,
) -> Result<OrderSweep<T>> {
    if orders.is_empty() {
        return Err(Error::InvalidParameter("no orders requested".into()));
    }
    let phantom = generate_shepp_logan::<T>(size)?;
    let geom = RadonGeometry::for_image(size, num_angles);
    let sino = forward_radon(&phantom, &geom)?;

    let horizon = size;
    let kernel = ramp_kernel::<T>(horizon);
    let fir_image = back_project_direct(&filter_sinogram_fir(&sino, &kernel), size)?;
    let fir_rmse = rmse(&fir_image, &phantom)?;

    let target = causal_target(&kernel);
    let mut rows = Vec::with_capacity(orders.len());
    let mut previous: Option<IirFilterPair<T>> = None;
    for &order in orders {
        let opts = FitOptions {
            initial: previous.clone().filter(|p| {
                p.feedforward_order() <= order && p.feedback_order() <= order
            }),
            ..options.clone()
        };
        match fit_iir(&target, order, order, &opts) {
            Ok((filter, report)) => {
                let recon =
                    back_project_direct(&filter_sinogram_iir(&sino, &filter), size)?;
                rows.push(OrderSweepRow {
                    order,
                    fit_mse: Some(report.mse),
                    rmse: Some(rmse(&recon, &phantom)?),
                    error: None,
                });
                previous = Some(filter);
            }
            Err(e) => rows.push(OrderSweepRow {
                order,
                fit_mse: None,
                rmse: None,
                error: Some(e.to_string()),
            }),
        }
    }
    Ok(OrderSweep { fir_rmse, rows })
}

/// One row of a size sweep or benchmark run.
#[derive(Debug, Clone)]
pub struct BenchRecord<T: Scalar = f64> {
    pub size: usize,
    pub mode: BackprojMode,
    /// Wall time of the back-projection stage, seconds.
    pub seconds: f64,
    pub additions: u64,
    pub multiplications: u64,
    pub rmse: Option<T>,
}

/// FIR-filtered reconstruction quality and timing across image sizes for
/// the requested back-projection modes.
pub fn run_size_sweep<T: Scalar>(
    sizes: &[usize],
    modes: &[BackprojMode],
    fir_half_len: Option<usize>,
) -> Result<Vec<BenchRecord<T>>> {
    let mut records = Vec::new();
    for &size in sizes {
        let phantom = generate_shepp_logan::<T>(size)?;
        let geom = RadonGeometry::for_image(size, size);
        let sino = forward_radon(&phantom, &geom)?;
        let filtered = filter_sinogram_fir(&sino, &resolve_fir_kernel(fir_half_len, &sino));
        for &mode in modes {
            crate::counters::reset();
            let start = Instant::now();
            let image = match mode {
                BackprojMode::Direct => back_project_direct(&filtered, size)?,
                BackprojMode::Fht => {
                    let lin = sinogram_to_wide_linogram(&filtered, size)?;
                    fht_back_project_wide(&lin)?
                }
            };
            let seconds = start.elapsed().as_secs_f64();
            records.push(BenchRecord {
                size,
                mode,
                seconds,
                additions: crate::counters::additions(),
                multiplications: crate::counters::multiplications(),
                rmse: Some(rmse(&image, &phantom)?),
            });
        }
    }
    Ok(records)
}

/// Median wall time of `op` over `reps` runs after one warm-up call.
pub fn median_seconds<F: FnMut()>(reps: usize, mut op: F) -> f64 {
    op();
    let mut times: Vec<f64> = (0..reps.max(1))
        .map(|_| {
            let start = Instant::now();
            op();
            start.elapsed().as_secs_f64()
        })
        .collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times[times.len() / 2]
}

/// Timing comparison of the two back-projection operators on ramp-filtered
/// phantom data. Timings cover only the back-projection stage; the fast
/// route times [`fht_back_project`] on a prebuilt linogram, whose
/// accumulation is exactly `N²·log₂N` additions per block.
pub fn bench_back_projection<T: Scalar>(
    sizes: &[usize],
    modes: &[BackprojMode],
    reps: usize,
) -> Result<Vec<BenchRecord<T>>> {
    let mut records = Vec::new();
    for &size in sizes {
        let phantom = generate_shepp_logan::<T>(size)?;
        let geom = RadonGeometry::for_image(size, size);
        let sino = forward_radon(&phantom, &geom)?;
        let filtered = filter_sinogram_fir(&sino, &resolve_fir_kernel(None, &sino));
        for &mode in modes {
            let seconds = match mode {
                BackprojMode::Direct => median_seconds(reps, || {
                    back_project_direct(&filtered, size).unwrap();
                }),
                BackprojMode::Fht => {
                    let lin = sinogram_to_linogram(&filtered, size)?;
                    median_seconds(reps, || {
                        fht_back_project(&lin).unwrap();
                    })
                }
            };
            crate::counters::reset();
            let image = match mode {
                BackprojMode::Direct => back_project_direct(&filtered, size)?,
                BackprojMode::Fht => {
                    let lin = sinogram_to_linogram(&filtered, size)?;
                    fht_back_project(&lin)?
                }
            };
            records.push(BenchRecord {
                size,
                mode,
                seconds,
                additions: crate::counters::additions(),
                multiplications: crate::counters::multiplications(),
                rmse: Some(rmse(&image, &phantom)?),
            });
        }
    }
    Ok(records)
}

/// Run `f` on a private thread pool with the given level of parallelism.
/// `None` keeps the global pool. Used for clean single-threaded timing.
pub fn with_threads<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    match threads {
        None => f(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .expect("thread pool")
            .install(f),
    }
}
