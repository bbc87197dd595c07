//! Streaming reconstruction stabilization and evaluation kernels.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function over in-memory values; file formats and the command-line front
//! end live in the `steadystream` crate.
//!
//! * [`geometry`]: quaternions, poses and trajectories.
//! * [`fft`] and [`scoring`]: spectrum-based image quality and the
//!   pose-adaptive update weight.
//! * [`memory`]: a fast-weight associative memory driven by that weight.
//! * [`losses`]: trajectory-consistent training objectives with analytic
//!   translation gradients.
//! * [`stabilize`]: causal One Euro translation filtering plus Slerp
//!   rotation smoothing.
//! * [`refine`]: edge-preserving bilateral depth refinement.
//! * [`metrics`]: ATE/RPE, depth and point-cloud reconstruction metrics.

#![no_std]
#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod error;
pub mod fft;
pub mod geometry;
pub mod linalg;
pub mod losses;
pub(crate) mod math;
pub mod memory;
pub mod metrics;
pub mod nn;
pub mod refine;
pub mod scoring;
pub mod stabilize;

pub use error::{Error, Result};
pub use geometry::{Pose, Quaternion, Trajectory, Vec3};
