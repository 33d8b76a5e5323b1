//! Richardson-Lucy iterative deconvolution, the comparison baseline for the
//! direct method.
//!
//! The forward model is same-size convolution with reflected boundaries.
//! The correction pass applies the exact transpose of that operator
//! (correlation on the extended grid, folded back through the reflection
//! map) normalized by the sensitivity image `A^T 1`, the standard boundary
//! correction. Uniform images and the unit PSF are exact fixed points; on
//! a finite window those fixed points and exact per-iteration flux
//! conservation cannot both hold, and flux conservation is exact only for
//! content that stays clear of the frame.

use std::time::Instant;

use serde::Serialize;

use crate::deconv1d::DeconvOptions;
use crate::error::{Error, Result};
use crate::par::{self, Mode};
use crate::separable2d::{convolve2d_mode, deconvolve2d, Kernel2D};
use crate::signal::{BoundaryPolicy, Image};

/// Iteration controls for Richardson-Lucy.
#[derive(Debug, Clone)]
pub struct RlOptions {
    pub iterations: usize,
    /// Floor applied to the predicted image before the ratio division.
    pub guard_eps: f64,
    /// Clamp the estimate at zero after each iteration.
    pub clamp_nonnegative: bool,
}

impl Default for RlOptions {
    fn default() -> Self {
        Self {
            iterations: 50,
            guard_eps: 1e-12,
            clamp_nonnegative: true,
        }
    }
}

/// Transpose of the reflect-boundary forward convolution.
///
/// Correlates `r` with the kernel on the extended index grid (treating `r`
/// as zero outside its window, the transpose of cropping) and folds
/// out-of-window indices back through the reflection map (the transpose of
/// extending). Correlation with the forward kernel is convolution with its
/// mirror, so this is the `psf*` pass of the update.
fn adjoint_convolve2d(r: &Image, k: &Kernel2D, mode: Mode) -> Image {
    let (h, w) = (r.height(), r.width());
    let (hh, hw) = (k.half_height(), k.half_width());
    let (eh, ew) = (h + 2 * hh, w + 2 * hw);

    // w(a, b) = sum_{i,j} k(i,j) * r(a + di, b + dj), gathered per row.
    let ext_rows: Vec<Vec<f64>> = par::map_indexed(mode, eh, |ar| {
        let a = ar as i64 - hh as i64;
        (0..ew)
            .map(|bc| {
                let b = bc as i64 - hw as i64;
                let mut acc = 0.0;
                for i in 0..k.height() {
                    let rr = a + i as i64 - hh as i64;
                    if rr < 0 || rr >= h as i64 {
                        continue;
                    }
                    for j in 0..k.width() {
                        let cc = b + j as i64 - hw as i64;
                        if cc < 0 || cc >= w as i64 {
                            continue;
                        }
                        acc += k.get(i, j) * r.get(rr as usize, cc as usize);
                    }
                }
                acc
            })
            .collect()
    });

    let reflect = |idx: i64, n: usize| -> usize {
        if idx < 0 {
            (-idx) as usize
        } else if idx >= n as i64 {
            2 * n - 2 - idx as usize
        } else {
            idx as usize
        }
    };

    // Fold columns, then rows.
    let mut col_folded = vec![vec![0.0f64; w]; eh];
    for (ar, row) in ext_rows.iter().enumerate() {
        for (bc, &v) in row.iter().enumerate() {
            let b = bc as i64 - hw as i64;
            col_folded[ar][reflect(b, w)] += v;
        }
    }
    let mut out = vec![vec![0.0f64; w]; h];
    for (ar, row) in col_folded.iter().enumerate() {
        let a = ar as i64 - hh as i64;
        let target = reflect(a, h);
        for (c, &v) in row.iter().enumerate() {
            out[target][c] += v;
        }
    }
    Image::from_rows(&out).expect("rectangular")
}

fn validate_nonnegative(img: &Image, what: &str) -> Result<()> {
    if img.pixels().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeInput(format!("{what} has negative samples")));
    }
    Ok(())
}

fn rl_impl(y: &Image, psf: &Kernel2D, opts: &RlOptions, mode: Mode) -> Result<Image> {
    if opts.iterations < 1 || !(opts.guard_eps > 0.0) {
        return Err(Error::Parse(
            "RL needs at least one iteration and a positive guard".into(),
        ));
    }
    validate_nonnegative(y, "observed image")?;
    if psf.data().iter().any(|&v| v < 0.0) {
        return Err(Error::NegativeInput("psf has negative samples".into()));
    }
    let sum = psf.sum();
    if !(sum > 0.0) {
        return Err(Error::ZeroFilter);
    }
    if psf.half_height() >= y.height() || psf.half_width() >= y.width() {
        return Err(Error::ShapeMismatch(
            "psf half-extent exceeds image dimensions".into(),
        ));
    }
    let psf_norm = psf.scaled(1.0 / sum);
    let ones = Image::constant(y.width(), y.height(), 1.0)?;
    let sensitivity = adjoint_convolve2d(&ones, &psf_norm, mode);
    let mut x = y.clone();
    for _ in 0..opts.iterations {
        let pred = convolve2d_mode(&x, &psf_norm, BoundaryPolicy::Reflect, mode);
        // Elementwise steps are memory-bound; only the convolutions pay for
        // parallel dispatch.
        let ratio = Image::new(
            y.width(),
            y.height(),
            y.pixels()
                .iter()
                .zip(pred.pixels())
                .map(|(&obs, &p)| obs / p.max(opts.guard_eps))
                .collect(),
        )?;
        let corr = adjoint_convolve2d(&ratio, &psf_norm, mode);
        let next: Vec<f64> = x
            .pixels()
            .iter()
            .zip(corr.pixels())
            .zip(sensitivity.pixels())
            .map(|((&xv, &cv), &sv)| {
                let v = xv * cv / sv.max(opts.guard_eps);
                if opts.clamp_nonnegative {
                    v.max(0.0)
                } else {
                    v
                }
            })
            .collect();
        x = Image::new(y.width(), y.height(), next)?;
    }
    Ok(x)
}

/// Richardson-Lucy deconvolution starting from the observed image, with the
/// multiplicative update `x <- x * (psf* (+) (y / (psf (*) x)))` and the
/// boundary sensitivity correction.
pub fn richardson_lucy(y: &Image, psf: &Kernel2D, opts: &RlOptions) -> Result<Image> {
    rl_impl(y, psf, opts, Mode::Auto)
}

/// Sequential reference path of [`richardson_lucy`]; bit-identical results.
pub fn richardson_lucy_seq(y: &Image, psf: &Kernel2D, opts: &RlOptions) -> Result<Image> {
    rl_impl(y, psf, opts, Mode::Seq)
}

/// Options for a direct-vs-RL comparison run.
#[derive(Debug, Clone, Default)]
pub struct CompareOptions {
    pub deconv: DeconvOptions,
    pub rl: RlOptions,
    /// Margin excluded from the RMS region on every side; defaults to twice
    /// the kernel half-extent plus two.
    pub interior_margin: Option<usize>,
}

/// RMS figures for one blurred scene, measured on the common valid interior
/// of both methods. Runtimes are filled by [`compare_methods`] and omitted
/// from serialization when absent, so reports can stay byte-deterministic.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ComparisonRecord {
    pub rms_blurred: f64,
    pub rms_direct: f64,
    pub rms_rl: f64,
    pub interior_margin: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_direct_ms: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runtime_rl_ms: Option<f64>,
}

fn region_rms(truth: &Image, img: &Image, offset: (usize, usize), margin: usize) -> Result<f64> {
    let (off_r, off_c) = offset;
    if img.height() <= 2 * margin || img.width() <= 2 * margin {
        return Err(Error::ShapeMismatch("comparison region is empty".into()));
    }
    let mut sum = 0.0;
    let mut n = 0usize;
    for r in margin..img.height() - margin {
        for c in margin..img.width() - margin {
            let d = img.get(r, c) - truth.get(r + off_r, c + off_c);
            sum += d * d;
            n += 1;
        }
    }
    Ok((sum / n as f64).sqrt())
}

/// Run the direct method and Richardson-Lucy on the same observation and
/// report RMS errors against the ground truth.
pub fn compare_methods(
    truth: &Image,
    y: &Image,
    psf: &Kernel2D,
    opts: &CompareOptions,
) -> Result<ComparisonRecord> {
    if truth.width() != y.width() || truth.height() != y.height() {
        return Err(Error::ShapeMismatch(format!(
            "truth {}x{} vs observed {}x{}",
            truth.width(),
            truth.height(),
            y.width(),
            y.height()
        )));
    }
    let margin = opts
        .interior_margin
        .unwrap_or(2 * psf.half_height().max(psf.half_width()) + 2);

    let t0 = Instant::now();
    let (direct, _report) = deconvolve2d(y, psf, &opts.deconv)?;
    let runtime_direct_ms = t0.elapsed().as_secs_f64() * 1e3;

    let t1 = Instant::now();
    let rl = richardson_lucy(y, psf, &opts.rl)?;
    let runtime_rl_ms = t1.elapsed().as_secs_f64() * 1e3;

    // The direct output may be smaller (trims); it sits centered in the
    // observed frame.
    let off_r = (y.height() - direct.height()) / 2;
    let off_c = (y.width() - direct.width()) / 2;

    let rms_direct = region_rms(truth, &direct, (off_r, off_c), margin)?;
    // Measure the others on the same region for a like-for-like comparison.
    let crop = |img: &Image| -> Result<Image> {
        let rows: Vec<Vec<f64>> = (off_r..off_r + direct.height())
            .map(|r| img.row(r)[off_c..off_c + direct.width()].to_vec())
            .collect();
        Image::from_rows(&rows)
    };
    let rms_blurred = region_rms(truth, &crop(y)?, (off_r, off_c), margin)?;
    let rms_rl = region_rms(truth, &crop(&rl)?, (off_r, off_c), margin)?;

    Ok(ComparisonRecord {
        rms_blurred,
        rms_direct,
        rms_rl,
        interior_margin: margin,
        runtime_direct_ms: Some(runtime_direct_ms),
        runtime_rl_ms: Some(runtime_rl_ms),
    })
}
