//! Per-factor analysis of elementary filters `[1, p, 1]`: closed-form
//! inverses for `|p| > 2`, bounded pseudo-inverses for `|p| < 2`, kernel
//! bases for the non-invertible classes, and the transfer matrix that
//! governs all of them.
//!
//! The inverse sequence solves `z(t-1) + p z(t) + z(t+1) = I(t)` with the
//! symmetry `z(-t) = z(t)`. Writing the state `(z(n), z(n-1))`, the step is
//! a 2x2 matrix with determinant 1 whose eigenvalues solve
//! `u^2 + p u + 1 = 0`; everything below falls out of where those
//! eigenvalues sit relative to the unit circle.

use num_complex::Complex64;

use crate::charpoly::{classify, FactorClass, CLASSIFY_EPS};
use crate::error::{Error, Result};
use crate::signal::Sequence;

/// Hard cap on inverse support so a parameter microscopically above the
/// critical band cannot allocate unbounded memory.
const MAX_HALF_SUPPORT: usize = 1 << 25;

/// The 2x2 state-update matrix of the inverse recursion, acting on row
/// vectors from the right: `(z(n+1), z(n)) = (z(n), z(n-1)) * B`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    pub matrix: [[f64; 2]; 2],
    /// Eigenvalues ordered by modulus, `|u1| <= |u2|`; `u1 u2 = 1`.
    pub eigenvalues: [Complex64; 2],
    /// Left eigenvectors `(u_i, 1)`, one per eigenvalue.
    pub eigen_rows: [[Complex64; 2]; 2],
}

/// Eigenvalues of `u^2 + p u + 1` for real `p`, ordered by modulus.
fn unit_product_roots(p: f64) -> [Complex64; 2] {
    let disc = p * p - 4.0;
    if disc > 0.0 {
        let s = disc.sqrt();
        // Small root via the reciprocal form to avoid cancellation.
        let u1 = -p.signum() * 2.0 / (p.abs() + s);
        let u2 = -p.signum() * (p.abs() + s) / 2.0;
        [Complex64::new(u1, 0.0), Complex64::new(u2, 0.0)]
    } else if disc == 0.0 {
        let u = -p / 2.0;
        [Complex64::new(u, 0.0), Complex64::new(u, 0.0)]
    } else {
        let re = -p / 2.0;
        let im = 0.5 * (-disc).sqrt();
        [Complex64::new(re, -im), Complex64::new(re, im)]
    }
}

pub fn transfer_matrix(p: f64) -> TransferMatrix {
    let eigenvalues = unit_product_roots(p);
    let one = Complex64::new(1.0, 0.0);
    TransferMatrix {
        matrix: [[-p, 1.0], [-1.0, 0.0]],
        eigenvalues,
        eigen_rows: [[eigenvalues[0], one], [eigenvalues[1], one]],
    }
}

/// A finite symmetric solution of `[1, p, 1] * z = I`.
///
/// For the exact inverse (`pseudo = false`) the tail decays geometrically
/// and `truncation_bound` bounds the total absolute weight dropped by the
/// truncation. For a pseudo-inverse (`pseudo = true`) nothing decays;
/// `truncation_bound` then holds the amplitude bound `1 / (2 sin phi)`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseFilter {
    pub z: Sequence,
    pub truncation_bound: f64,
    pub pseudo: bool,
}

impl InverseFilter {
    /// Largest stored position `t`; the support is `|t| <= half_support()`.
    pub fn half_support(&self) -> usize {
        self.z.origin()
    }
}

fn mirror_to_sequence(half: &[f64]) -> Sequence {
    let mut values: Vec<f64> = half.iter().rev().copied().collect();
    values.extend_from_slice(&half[1..]);
    Sequence::new(values, half.len() - 1).expect("symmetric assembly is valid")
}

/// Closed-form inverse of `[1, p, 1]` for `|p| > 2`.
///
/// `z(0) = 1 / (2 u1 + p)` with `|u1| < 1`, and `z(t) = z(0) u1^|t|`.
/// The support is truncated at the first `t` with `|z(t)| < eps_trunc`.
pub fn invert_elementary(p: f64, eps_trunc: f64) -> Result<InverseFilter> {
    if !(p.abs() > 2.0) {
        return Err(Error::NotInvertible(vec![p]));
    }
    let s = (p * p - 4.0).sqrt();
    let u1 = -p.signum() * 2.0 / (p.abs() + s);
    let z0 = p.signum() / s; // equals 1 / (2 u1 + p)
    let mut half = vec![z0];
    let mut z = z0;
    loop {
        z *= u1;
        if z.abs() < eps_trunc || half.len() >= MAX_HALF_SUPPORT {
            break;
        }
        half.push(z);
    }
    let tail = 2.0 * z.abs() / (1.0 - u1.abs());
    Ok(InverseFilter {
        z: mirror_to_sequence(&half),
        truncation_bound: tail,
        pseudo: false,
    })
}

/// Joint inverse of a conjugate pair of complex elementary factors.
///
/// Each member is inverted by the same closed form with the complex root of
/// modulus below one; the two inverses convolve to a real symmetric filter
/// for the pair's real length-5 product. Imaginary residue above `1e-10`
/// relative is an error.
pub fn invert_conjugate_pair(center: Complex64, eps_trunc: f64) -> Result<InverseFilter> {
    let disc = (center * center - Complex64::new(4.0, 0.0)).sqrt();
    let r1 = (-center + disc) / 2.0;
    let r2 = (-center - disc) / 2.0;
    let u1 = if r1.norm() <= r2.norm() { r1 } else { r2 };
    if !(u1.norm() < 1.0 - CLASSIFY_EPS) {
        return Err(Error::NotInvertible(vec![center.re]));
    }
    let z0 = 1.0 / (2.0 * u1 + center);
    let mut half = vec![z0];
    let mut z = z0;
    loop {
        z *= u1;
        if z.norm() < eps_trunc || half.len() >= MAX_HALF_SUPPORT {
            break;
        }
        half.push(z);
    }
    // Pair inverse: convolve z with its conjugate mirror.
    let n = half.len();
    let full: Vec<Complex64> = half
        .iter()
        .rev()
        .chain(half[1..].iter())
        .copied()
        .collect();
    let m = full.len();
    let mut prod = vec![Complex64::new(0.0, 0.0); 2 * m - 1];
    for (i, a) in full.iter().enumerate() {
        for (j, b) in full.iter().enumerate() {
            prod[i + j] += a * b.conj();
        }
    }
    let scale = prod.iter().fold(1e-300f64, |mx, c| mx.max(c.re.abs()));
    let max_im = prod.iter().fold(0.0f64, |mx, c| mx.max(c.im.abs()));
    if max_im > 1e-10 * scale {
        return Err(Error::UnpairedComplexFactor(0));
    }
    let values: Vec<f64> = prod.iter().map(|c| c.re).collect();
    let l1: f64 = half.iter().map(|c| c.norm()).sum();
    let tail = 4.0 * z.norm() / (1.0 - u1.norm()) * l1;
    Ok(InverseFilter {
        z: Sequence::new(values, 2 * (n - 1)).expect("valid pair inverse"),
        truncation_bound: tail,
        pseudo: false,
    })
}

/// Bounded two-sided pseudo-inverse for `|p| < 2`, truncated to
/// `|t| <= half_length`.
///
/// Starts from `z(0) = 0`, `z(1) = 1/2` and runs the defining recursion
/// `z(t+1) = -p z(t) - z(t-1)`, which realizes the closed form
/// `z(t) = sin(phi |t|) / (2 sin phi)` with `cos phi = -p/2` and keeps the
/// special values for `p = -1, 0, 1` exact in floating point.
pub fn pseudo_inverse(p: f64, half_length: usize) -> Result<InverseFilter> {
    if p.abs() >= 2.0 - CLASSIFY_EPS {
        return Err(Error::UseKernelPath(p));
    }
    let half_length = half_length.max(1);
    let mut half = Vec::with_capacity(half_length + 1);
    half.push(0.0);
    half.push(0.5);
    for _ in 1..half_length {
        let t = half.len() - 1;
        let next = -p * half[t] - half[t - 1];
        half.push(next);
    }
    let bound = 1.0 / (4.0 - p * p).sqrt(); // 1 / (2 sin phi)
    Ok(InverseFilter {
        z: mirror_to_sequence(&half),
        truncation_bound: bound,
        pseudo: true,
    })
}

/// Two sequences spanning the kernel of a non-invertible elementary factor
/// over a window of `length` samples (positions `0 .. length-1`).
#[derive(Debug, Clone, PartialEq)]
pub struct KernelBasis {
    pub k1: Sequence,
    pub k2: Sequence,
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        self.k1.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Kernel basis of `[1, p, 1]` for `|p| <= 2`.
///
/// For `|p| < 2` the basis is `cos(phi n), sin(phi n)` with
/// `cos phi = -p/2`; for `p = 2` it is `(-1)^n, n (-1)^n`; for `p = -2`
/// it is `1, n`. The span is shift-invariant, so indexing the window from
/// zero loses nothing.
pub fn kernel_basis(p: f64, length: usize) -> Result<KernelBasis> {
    if length < 3 {
        return Err(Error::SignalTooShort(format!(
            "kernel window must have at least 3 samples, got {length}"
        )));
    }
    let class = classify(p);
    let (k1, k2): (Vec<f64>, Vec<f64>) = match class {
        FactorClass::Invertible => return Err(Error::TrivialKernel(p)),
        FactorClass::CriticalPlus => (
            (0..length).map(|n| if n % 2 == 0 { 1.0 } else { -1.0 }).collect(),
            (0..length)
                .map(|n| {
                    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                    sign * n as f64
                })
                .collect(),
        ),
        FactorClass::CriticalMinus => (
            vec![1.0; length],
            (0..length).map(|n| n as f64).collect(),
        ),
        FactorClass::Oscillatory => {
            let phi = (-p / 2.0).acos();
            (
                (0..length).map(|n| (phi * n as f64).cos()).collect(),
                (0..length).map(|n| (phi * n as f64).sin()).collect(),
            )
        }
    };
    Ok(KernelBasis {
        k1: Sequence::from_values(k1)?,
        k2: Sequence::from_values(k2)?,
    })
}
