//! Separable 2D kernels: rank-1 factorization into two symmetric 1D
//! filters and row/column application of the 1D deconvolution pipeline.
//!
//! Row passes are independent and run in parallel under the `parallel`
//! feature; per-row arithmetic is identical either way, so parallel and
//! sequential results match bit for bit.

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::charpoly::Filter;
use crate::deconv1d::{DeconvOptions, DeconvPlan, DeconvReport};
use crate::error::{Error, Result};
use crate::par::{self, Mode};
use crate::signal::{extend_tiled, BoundaryPolicy, Image, Sequence};

/// Default relative residual above which a kernel is rejected as
/// non-separable.
pub const SEPARABILITY_TOL: f64 = 1e-8;

/// A centered 2D convolution kernel of odd width and height, symmetric
/// under point reflection `(s, t) -> (-s, -t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    width: usize,
    height: usize,
    data: Vec<f64>,
}

#[derive(Deserialize)]
struct KernelFile {
    matrix: Vec<Vec<f64>>,
}

impl Kernel2D {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if height == 0 || width == 0 {
            return Err(Error::ShapeMismatch("empty kernel".into()));
        }
        if height % 2 == 0 || width % 2 == 0 {
            return Err(Error::EvenLength(height * width));
        }
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeMismatch("ragged kernel rows".into()));
        }
        let mut data = rows.concat();
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        let scale = data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::ZeroFilter);
        }
        let n = data.len();
        for i in 0..n / 2 {
            if (data[i] - data[n - 1 - i]).abs() > 1e-12 * scale {
                return Err(Error::AsymmetricFilter {
                    k: i,
                    left: data[i],
                    right: data[n - 1 - i],
                });
            }
        }
        for i in 0..n / 2 {
            let avg = 0.5 * (data[i] + data[n - 1 - i]);
            data[i] = avg;
            data[n - 1 - i] = avg;
        }
        Ok(Self {
            width,
            height,
            data,
        })
    }

    /// Outer product of a column-direction and a row-direction filter.
    pub fn from_outer(cs: &Filter, ct: &Filter) -> Self {
        let height = cs.coeffs().len();
        let width = ct.coeffs().len();
        let mut data = Vec::with_capacity(width * height);
        for &a in cs.coeffs() {
            for &b in ct.coeffs() {
                data.push(a * b);
            }
        }
        Self {
            width,
            height,
            data,
        }
    }

    /// Outer product of two centered inverse sequences (both must be
    /// symmetric, which holds for every inverse this crate constructs).
    pub fn from_outer_sequences(col: &Sequence, row: &Sequence) -> Result<Self> {
        let mut rows = Vec::with_capacity(col.len());
        for &a in col.values() {
            rows.push(row.values().iter().map(|&b| a * b).collect());
        }
        Self::new(rows)
    }

    pub fn unitary() -> Self {
        Self {
            width: 1,
            height: 1,
            data: vec![1.0],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn half_width(&self) -> usize {
        self.width / 2
    }

    pub fn half_height(&self) -> usize {
        self.height / 2
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Kernel2D {
        Kernel2D {
            width: self.width,
            height: self.height,
            data: self.data.iter().map(|v| v * factor).collect(),
        }
    }

    /// Mirror in both axes. Equal to the kernel itself for the symmetric
    /// kernels this crate validates, but implemented generally.
    pub fn mirrored(&self) -> Kernel2D {
        let mut data = self.data.clone();
        data.reverse();
        Kernel2D {
            width: self.width,
            height: self.height,
            data,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: KernelFile =
            serde_json::from_str(text).map_err(|e| Error::Parse(format!("kernel JSON: {e}")))?;
        Self::new(file.matrix)
    }
}

/// The two 1D filters of a separable kernel and the relative residual of
/// the rank-1 fit.
#[derive(Debug, Clone)]
pub struct SeparableFactors {
    /// Column-direction (vertical) filter.
    pub cs: Filter,
    /// Row-direction (horizontal) filter.
    pub ct: Filter,
    pub residual: f64,
}

/// Split a kernel into its best rank-1 outer product via the dominant
/// singular triple.
///
/// The gain splits so both factors carry leading coefficients of equal
/// magnitude, with positive centers when the kernel allows it. Kernels
/// whose relative residual exceeds `tol` are rejected.
pub fn separate(k: &Kernel2D, tol: f64) -> Result<SeparableFactors> {
    let m = DMatrix::from_row_slice(k.height, k.width, &k.data);
    let frob = m.norm();
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let (best, sigma) = svd
        .singular_values
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bs), (i, &s)| {
            if s > bs {
                (i, s)
            } else {
                (bi, bs)
            }
        });
    if sigma == 0.0 {
        return Err(Error::ZeroFilter);
    }
    let mut col: Vec<f64> = u.column(best).iter().copied().collect();
    let mut row: Vec<f64> = v_t.row(best).iter().copied().collect();

    // Symmetrize away floating noise before filter validation.
    for half in [&mut col, &mut row] {
        let n = half.len();
        for i in 0..n / 2 {
            let avg = 0.5 * (half[i] + half[n - 1 - i]);
            half[i] = avg;
            half[n - 1 - i] = avg;
        }
    }

    // Residual of the rank-1 reconstruction, relative to the kernel norm.
    let mut err2 = 0.0;
    for (r, &a) in col.iter().enumerate() {
        for (c, &b) in row.iter().enumerate() {
            let d = k.get(r, c) - sigma * a * b;
            err2 += d * d;
        }
    }
    let residual = err2.sqrt() / frob;
    if !(residual <= tol) {
        return Err(Error::NotSeparable { residual });
    }

    // Split sigma so the (stripped) leading coefficients match in magnitude.
    let edge = |v: &[f64]| -> f64 {
        v.iter()
            .rev()
            .copied()
            .find(|x| *x != 0.0)
            .unwrap_or(0.0)
            .abs()
    };
    let (eu, ev) = (edge(&col), edge(&row));
    if eu == 0.0 || ev == 0.0 {
        return Err(Error::ZeroFilter);
    }
    let a = (sigma * ev / eu).sqrt();
    let b = sigma / a;
    let mut cs_vals: Vec<f64> = col.iter().map(|x| x * a).collect();
    let mut ct_vals: Vec<f64> = row.iter().map(|x| x * b).collect();
    let mid_s = cs_vals[cs_vals.len() / 2];
    let mid_t = ct_vals[ct_vals.len() / 2];
    if mid_s < 0.0 && mid_t < 0.0 {
        for v in cs_vals.iter_mut().chain(ct_vals.iter_mut()) {
            *v = -*v;
        }
    }
    Ok(SeparableFactors {
        cs: Filter::new(cs_vals)?,
        ct: Filter::new(ct_vals)?,
        residual,
    })
}

fn convolve_rows_with(
    img: &Image,
    kernel_row: &[f64],
    half: usize,
    boundary: BoundaryPolicy,
    mode: Mode,
) -> Image {
    let rows: Vec<Vec<f64>> = par::map_indexed(mode, img.height(), |r| {
        let row = Sequence::from_values(img.row(r).to_vec()).expect("image row is valid");
        let ext = extend_tiled(&row, boundary, half);
        let n = img.width();
        (0..n)
            .map(|c| {
                let base = c; // ext index of position c - half
                kernel_row
                    .iter()
                    .enumerate()
                    .map(|(j, &k)| k * ext.values()[base + kernel_row.len() - 1 - j])
                    .sum()
            })
            .collect()
    });
    Image::from_rows(&rows).expect("rows stay rectangular")
}

/// Same-size 2D convolution under a boundary policy (direct evaluation,
/// kernel centered).
pub fn convolve2d(img: &Image, k: &Kernel2D, boundary: BoundaryPolicy) -> Image {
    convolve2d_mode(img, k, boundary, Mode::Auto)
}

pub(crate) fn convolve2d_mode(
    img: &Image,
    k: &Kernel2D,
    boundary: BoundaryPolicy,
    mode: Mode,
) -> Image {
    let (hh, hw) = (k.half_height(), k.half_width());
    let (h, w) = (img.height(), img.width());
    let ext_w = w + 2 * hw;
    // Extend each row, then each column of the row-extended grid.
    let row_ext: Vec<Vec<f64>> = (0..h)
        .map(|r| {
            let row = Sequence::from_values(img.row(r).to_vec()).expect("valid row");
            extend_tiled(&row, boundary, hw).values().to_vec()
        })
        .collect();
    let col_index = |r: i64| -> usize {
        match boundary {
            BoundaryPolicy::Zero => usize::MAX, // handled by caller
            BoundaryPolicy::Periodic => r.rem_euclid(h as i64) as usize,
            BoundaryPolicy::Reflect => {
                if h == 1 {
                    0
                } else {
                    let period = 2 * h as i64 - 2;
                    let m = r.rem_euclid(period);
                    (if m < h as i64 { m } else { period - m }) as usize
                }
            }
        }
    };
    let at = |r: i64, ec: usize| -> f64 {
        if (0..h as i64).contains(&r) {
            row_ext[r as usize][ec]
        } else if matches!(boundary, BoundaryPolicy::Zero) {
            0.0
        } else {
            row_ext[col_index(r)][ec]
        }
    };
    let rows: Vec<Vec<f64>> = par::map_indexed(mode, h, |r| {
        (0..w)
            .map(|c| {
                let mut acc = 0.0;
                for i in 0..k.height() {
                    let dr = i as i64 - hh as i64;
                    for j in 0..k.width() {
                        let dj = j as i64 - hw as i64;
                        let ec = (c + hw) as i64 - dj;
                        debug_assert!((0..ext_w as i64).contains(&ec));
                        acc += k.get(i, j) * at(r as i64 - dr, ec as usize);
                    }
                }
                acc
            })
            .collect()
    });
    Image::from_rows(&rows).expect("rectangular output")
}

/// Same-size separable blur: rows with `ct`, then columns with `cs`.
pub fn blur_separable(
    img: &Image,
    cs: &Filter,
    ct: &Filter,
    boundary: BoundaryPolicy,
) -> Image {
    let mid = convolve_rows_with(img, ct.coeffs(), ct.order(), boundary, Mode::Auto);
    let t = mid.transposed();
    let out = convolve_rows_with(&t, cs.coeffs(), cs.order(), boundary, Mode::Auto);
    out.transposed()
}

fn deconvolve_rows(img: &Image, plan: &DeconvPlan, mode: Mode) -> Result<Image> {
    let rows = par::try_map_indexed(mode, img.height(), |r| {
        let row = Sequence::from_values(img.row(r).to_vec())?;
        Ok::<Vec<f64>, Error>(plan.apply(&row)?.values().to_vec())
    })?;
    Image::from_rows(&rows)
}

/// Merge the per-axis reports of a 2D run: factor lists concatenate, counts
/// and losses add, gains multiply, Nyquist accounting comes from the row
/// axis.
fn merge_reports(rows: DeconvReport, cols: DeconvReport) -> DeconvReport {
    let mut merged = rows;
    merged.gain *= cols.gain;
    merged.factors.extend(cols.factors);
    merged.invertible_count += cols.invertible_count;
    merged.noninvertible_count += cols.noninvertible_count;
    merged.length_loss += cols.length_loss;
    merged.trimmed_per_side = merged.trimmed_per_side.max(cols.trimmed_per_side);
    merged.degenerate |= cols.degenerate;
    merged.partially_restored |= cols.partially_restored;
    merged.inverse_support = merged.inverse_support.max(cols.inverse_support);
    merged
}

/// Deconvolve an image under a separable kernel: the 1D pipeline runs along
/// every row with the row factor, then along every column with the column
/// factor. Output shrinks by the per-axis trims of non-invertible factors.
pub fn deconvolve2d(
    img: &Image,
    k: &Kernel2D,
    opts: &DeconvOptions,
) -> Result<(Image, DeconvReport)> {
    deconvolve2d_mode(img, k, opts, Mode::Auto)
}

/// Sequential reference path of [`deconvolve2d`]; results are bit-identical.
pub fn deconvolve2d_seq(
    img: &Image,
    k: &Kernel2D,
    opts: &DeconvOptions,
) -> Result<(Image, DeconvReport)> {
    deconvolve2d_mode(img, k, opts, Mode::Seq)
}

fn deconvolve2d_mode(
    img: &Image,
    k: &Kernel2D,
    opts: &DeconvOptions,
    mode: Mode,
) -> Result<(Image, DeconvReport)> {
    let factors = separate(k, SEPARABILITY_TOL)?;
    let row_plan = DeconvPlan::new(&factors.ct, img.width(), opts)?;
    let mid = deconvolve_rows(img, &row_plan, mode)?;
    let col_plan = DeconvPlan::new(&factors.cs, mid.height(), opts)?;
    let out = deconvolve_rows(&mid.transposed(), &col_plan, mode)?.transposed();
    let report = merge_reports(row_plan.report().clone(), col_plan.report().clone());
    Ok((out, report))
}
