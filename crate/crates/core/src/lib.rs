//! Direct inversion of finite symmetric filters.
//!
//! A symmetric PSF of odd length factors into elementary length-3 filters
//! `[1, p, 1]` through its palindromic characteristic polynomial. Each
//! factor is invertible exactly when `|p| > 2`, with a closed-form inverse
//! that decays geometrically; factors with `|p| < 2` admit a bounded
//! pseudo-inverse and a two-dimensional kernel, and `|p| = 2` is the
//! defective critical case. This crate builds those decompositions and uses
//! them to deconvolve 1D signals and separable 2D images directly, with a
//! Richardson-Lucy baseline for comparison.
//!
//! ```
//! use invfir::charpoly::{decompose, Filter};
//!
//! let f = Filter::new(vec![1.0, 4.3, 6.6, 4.3, 1.0]).unwrap();
//! let d = decompose(&f).unwrap();
//! let mut ps: Vec<f64> = d.factors.iter().map(|x| x.center.re).collect();
//! ps.sort_by(f64::total_cmp);
//! assert!((ps[0] - 2.0).abs() < 1e-9 && (ps[1] - 2.3).abs() < 1e-9);
//! ```
//!
//! The `parallel` feature (on by default) runs image row passes and the
//! Richardson-Lucy updates on rayon; the sequential fallback produces
//! bit-identical results.

pub mod charpoly;
pub mod deconv1d;
pub mod elementary;
pub mod error;
pub mod io;
mod par;
pub mod rl;
pub mod separable2d;
pub mod signal;

pub use charpoly::{decompose, Decomposition, Filter};
pub use deconv1d::{deconvolve, DeconvOptions, DeconvReport};
pub use error::{Error, Result};
pub use rl::{compare_methods, richardson_lucy};
pub use separable2d::{deconvolve2d, separate, Kernel2D};
pub use signal::{convolve, BoundaryPolicy, Image, Sequence};
