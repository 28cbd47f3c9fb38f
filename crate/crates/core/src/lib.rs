//! Tomographic reconstruction by filtered back projection, with a fast
//! route that replaces both expensive stages of the classical algorithm:
//! ramp filtering runs as a short causal/anticausal recursive filter fitted
//! to the exact ramp impulse response, and back projection runs as a fast
//! Hough transform over a four-block linogram. The fast pipeline needs
//! Θ(N²·log N) additions and Θ(N²) multiplications, against Θ(N³) for the
//! direct route, which is kept as the trusted reference.
//!
//! The crate is generic over the scalar type through [`Scalar`]; the
//! pipelines and the CLI work in `f64`, which all type aliases default to.
//! `f32` aliases are exported alongside for memory-bound uses.

pub mod counters;
mod error;
pub mod fht;
pub mod filters;
pub mod fit;
pub mod io;
pub mod linogram;
pub mod phantom;
pub mod pipeline;
pub mod radon;
mod scalar;
pub mod types;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub use fht::{fht_back_project, fht_back_project_wide, fht_forward, DyadicPattern, FhtPlan};
pub use filters::{
    apply_iir_symmetric, causal_target, fir_filter_row, iir_impulse_response, ramp_kernel,
};
pub use fit::fit_iir;
pub use linogram::{
    scaling_factor, sinogram_to_linogram, sinogram_to_wide_linogram, st_to_rtheta,
};
pub use phantom::{generate_shepp_logan, shepp_logan_ellipses, Ellipse};
pub use pipeline::{reconstruct, run_order_sweep, run_size_sweep, BackprojMode};
pub use radon::{back_project_direct, fbp_reference, forward_radon, RadonGeometry};
pub use types::{rmse, LineClass, Orientation, ShiftSign};

pub use filters::{FirKernel, IirFilterPair};
pub use fit::{FitOptions, FitReport};
pub use linogram::{StLine, WideLinogram};
pub use pipeline::{BenchRecord, FilterMode, OrderSweep, OrderSweepRow, ReconstructionConfig};
pub use types::{Image, Linogram, Sinogram};

/// `f32` variants of the default-`f64` container aliases.
pub type ImageF32 = types::Image<f32>;
pub type SinogramF32 = types::Sinogram<f32>;
pub type LinogramF32 = types::Linogram<f32>;
pub type FirKernelF32 = filters::FirKernel<f32>;
pub type IirFilterPairF32 = filters::IirFilterPair<f32>;
