//! Core sequence and image types shared by every other module: direct
//! convolution, boundary extension, and RMS error.
//!
//! A [`Sequence`] is a finite window of a conceptually bi-infinite signal.
//! The `origin` field records which sample sits at position `t = 0`, so
//! asymmetric intermediates such as `[1, 1]` compose correctly under
//! convolution (origins add).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Extension rule applied when an operation needs samples beyond the ends
/// of a finite sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryPolicy {
    /// Mirror without repeating the edge sample: `[1,2,3]` -> `2 | 1 2 3 | 2`.
    #[default]
    Reflect,
    /// Pad with zeros.
    Zero,
    /// Wrap around.
    Periodic,
}

impl BoundaryPolicy {
    fn name(self) -> &'static str {
        match self {
            BoundaryPolicy::Reflect => "reflect",
            BoundaryPolicy::Zero => "zero",
            BoundaryPolicy::Periodic => "periodic",
        }
    }
}

/// A finite real-valued signal window with an origin marker.
#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    values: Vec<f64>,
    origin: usize,
}

impl Sequence {
    pub fn new(values: Vec<f64>, origin: usize) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySequence);
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        if origin >= values.len() {
            return Err(Error::OriginOutOfRange {
                origin,
                len: values.len(),
            });
        }
        Ok(Self { values, origin })
    }

    /// Sequence starting at position 0 (origin at the first sample).
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0)
    }

    /// The unit impulse: `I(0) = 1`, zero elsewhere.
    pub fn unitary() -> Self {
        Self {
            values: vec![1.0],
            origin: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn origin(&self) -> usize {
        self.origin
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Position of the first sample (may be negative).
    pub fn start_position(&self) -> i64 {
        -(self.origin as i64)
    }

    /// Position of the last sample.
    pub fn end_position(&self) -> i64 {
        self.start_position() + self.len() as i64 - 1
    }

    /// Value at absolute position `t`, zero outside the window.
    pub fn get(&self, t: i64) -> f64 {
        let idx = t + self.origin as i64;
        if idx < 0 || idx >= self.len() as i64 {
            0.0
        } else {
            self.values[idx as usize]
        }
    }

    pub fn scaled(&self, factor: f64) -> Sequence {
        Sequence {
            values: self.values.iter().map(|v| v * factor).collect(),
            origin: self.origin,
        }
    }

    /// Drop `per_side` samples from each end. The origin tracks the removed
    /// front samples and clamps at 0 if position 0 itself is trimmed away.
    pub fn trimmed(&self, per_side: usize) -> Result<Sequence> {
        if self.len() <= 2 * per_side {
            return Err(Error::SignalTooShort(format!(
                "cannot trim {per_side} per side from length {}",
                self.len()
            )));
        }
        let values = self.values[per_side..self.len() - per_side].to_vec();
        let origin = self.origin.saturating_sub(per_side);
        Ok(Sequence { values, origin })
    }

    /// Extract `len` samples starting at absolute position `start`.
    /// Positions outside the window read as zero.
    pub fn crop(&self, start: i64, len: usize, origin: usize) -> Result<Sequence> {
        let values = (0..len as i64).map(|j| self.get(start + j)).collect();
        Sequence::new(values, origin)
    }

    /// RMS difference against a sequence of the same shape.
    pub fn rms(&self, other: &Sequence) -> Result<f64> {
        if self.len() != other.len() || self.origin != other.origin {
            return Err(Error::ShapeMismatch(format!(
                "sequence {}@{} vs {}@{}",
                self.len(),
                self.origin,
                other.len(),
                other.origin
            )));
        }
        rms(&self.values, &other.values)
    }
}

/// Full linear convolution. Output length is `len(a) + len(b) - 1` and the
/// origins add, so position arithmetic is preserved.
pub fn convolve(a: &Sequence, b: &Sequence) -> Sequence {
    let (la, lb) = (a.len(), b.len());
    let mut out = vec![0.0; la + lb - 1];
    for (i, &ai) in a.values.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.values.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    Sequence {
        values: out,
        origin: a.origin + b.origin,
    }
}

/// Grow a sequence by `pad` samples on each side under the given policy.
///
/// Reflect and Periodic need at least `pad + 1` samples of real data; larger
/// pads are an error. Zero padding has no such limit.
pub fn extend(x: &Sequence, policy: BoundaryPolicy, pad: usize) -> Result<Sequence> {
    if pad > 0
        && !matches!(policy, BoundaryPolicy::Zero)
        && pad > x.len() - 1
    {
        return Err(Error::InsufficientData {
            policy: policy.name(),
            pad,
            len: x.len(),
        });
    }
    Ok(extend_tiled(x, policy, pad))
}

/// Extension without the one-period limit: Reflect continues as the mirror
/// tiling of period `2n - 2` and Periodic as the period-`n` tiling, which is
/// the exact continuation of a signal carrying that symmetry.
pub(crate) fn extend_tiled(x: &Sequence, policy: BoundaryPolicy, pad: usize) -> Sequence {
    let n = x.len() as i64;
    let at = |j: i64| -> f64 {
        if (0..n).contains(&j) {
            return x.values[j as usize];
        }
        match policy {
            BoundaryPolicy::Zero => 0.0,
            BoundaryPolicy::Periodic => x.values[j.rem_euclid(n) as usize],
            BoundaryPolicy::Reflect => {
                if n == 1 {
                    return x.values[0];
                }
                let period = 2 * n - 2;
                let m = j.rem_euclid(period);
                let idx = if m < n { m } else { period - m };
                x.values[idx as usize]
            }
        }
    };
    let values = (-(pad as i64)..n + pad as i64).map(at).collect();
    Sequence {
        values,
        origin: x.origin + pad,
    }
}

/// RMS difference of two equally long slices.
pub fn rms(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::ShapeMismatch(format!(
            "lengths {} vs {}",
            a.len(),
            b.len()
        )));
    }
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| {
            let d = x - y;
            d * d
        })
        .sum();
    Ok((sum / a.len() as f64).sqrt())
}

/// RMS over the overlap of two sequences after origin alignment, excluding
/// `margin` samples at each end of the overlap.
pub fn interior_rms(a: &Sequence, b: &Sequence, margin: usize) -> Option<f64> {
    let start = a.start_position().max(b.start_position()) + margin as i64;
    let end = a.end_position().min(b.end_position()) - margin as i64;
    if end < start {
        return None;
    }
    let n = (end - start + 1) as usize;
    let sum: f64 = (start..=end)
        .map(|t| {
            let d = a.get(t) - b.get(t);
            d * d
        })
        .sum();
    Some((sum / n as f64).sqrt())
}

/// A dense grayscale image, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    width: usize,
    height: usize,
    pixels: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, pixels: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::ShapeMismatch("zero image dimension".into()));
        }
        if pixels.len() != width * height {
            return Err(Error::ShapeMismatch(format!(
                "{}x{} image needs {} pixels, got {}",
                width,
                height,
                width * height,
                pixels.len()
            )));
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteSample);
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn constant(width: usize, height: usize, value: f64) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.pixels[row * self.width + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.pixels[row * self.width + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.pixels[row * self.width..(row + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.pixels.chunks_exact(self.width)
    }

    /// Rebuild an image from equally long rows.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let height = rows.len();
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.iter().any(|r| r.len() != width) {
            return Err(Error::ShapeMismatch("ragged rows".into()));
        }
        Self::new(width, height, rows.concat())
    }

    pub fn transposed(&self) -> Image {
        let mut pixels = vec![0.0; self.pixels.len()];
        for r in 0..self.height {
            for c in 0..self.width {
                pixels[c * self.height + r] = self.get(r, c);
            }
        }
        Image {
            width: self.height,
            height: self.width,
            pixels,
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Image {
        Image {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn sum(&self) -> f64 {
        self.pixels.iter().sum()
    }

    pub fn rms(&self, other: &Image) -> Result<f64> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::ShapeMismatch(format!(
                "image {}x{} vs {}x{}",
                self.width, self.height, other.width, other.height
            )));
        }
        rms(&self.pixels, &other.pixels)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(values: &[f64]) -> Sequence {
        Sequence::from_values(values.to_vec()).unwrap()
    }

    #[test]
    fn convolve_with_unitary_is_identity() {
        let x = seq(&[3.0, -1.0, 2.5, 0.25]);
        let out = convolve(&Sequence::unitary(), &x);
        assert_eq!(out.values(), x.values());
        assert_eq!(out.origin(), x.origin());
    }

    #[test]
    fn convolve_two_boxcars() {
        let out = convolve(&seq(&[1.0, 1.0]), &seq(&[1.0, 1.0]));
        assert_eq!(out.values(), &[1.0, 2.0, 1.0]);
    }

    #[test]
    fn convolve_elementary_product() {
        let a = Sequence::new(vec![1.0, 2.0, 1.0], 1).unwrap();
        let b = Sequence::new(vec![1.0, 2.3, 1.0], 1).unwrap();
        let out = convolve(&a, &b);
        let expected = [1.0, 4.3, 6.6, 4.3, 1.0];
        for (got, want) in out.values().iter().zip(expected) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        assert_eq!(out.origin(), 2);
    }

    #[test]
    fn extend_reflect() {
        let out = extend(&seq(&[1.0, 2.0, 3.0]), BoundaryPolicy::Reflect, 1).unwrap();
        assert_eq!(out.values(), &[2.0, 1.0, 2.0, 3.0, 2.0]);
        assert_eq!(out.origin(), 1);
    }

    #[test]
    fn extend_zero() {
        let out = extend(&seq(&[1.0, 2.0, 3.0]), BoundaryPolicy::Zero, 2).unwrap();
        assert_eq!(out.values(), &[0.0, 0.0, 1.0, 2.0, 3.0, 0.0, 0.0]);
    }

    #[test]
    fn extend_periodic() {
        let out = extend(&seq(&[1.0, 2.0, 3.0]), BoundaryPolicy::Periodic, 1).unwrap();
        assert_eq!(out.values(), &[3.0, 1.0, 2.0, 3.0, 1.0]);
    }

    #[test]
    fn extend_rejects_oversized_mirror_pad() {
        let err = extend(&seq(&[1.0, 2.0, 3.0]), BoundaryPolicy::Reflect, 3).unwrap_err();
        assert!(matches!(err, Error::InsufficientData { .. }));
    }

    #[test]
    fn tiled_reflect_continues_past_one_period() {
        let x = seq(&[1.0, 2.0, 3.0]);
        let out = extend_tiled(&x, BoundaryPolicy::Reflect, 5);
        // mirror tiling of period 4: ... 2 1 2 3 | 2 | 1 2 3 | 2 | 1 2 3 ...
        assert_eq!(
            out.values(),
            &[2.0, 1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0, 1.0, 2.0, 3.0, 2.0]
        );
    }

    #[test]
    fn rms_examples() {
        let x = seq(&[1.0, -2.0, 0.5]);
        assert_eq!(x.rms(&x).unwrap(), 0.0);
        assert_eq!(rms(&[0.0, 0.0], &[1.0, 1.0]).unwrap(), 1.0);
        let got = rms(&[0.0, 3.0, 4.0], &[0.0, 0.0, 0.0]).unwrap();
        assert!((got - 2.886751345948129).abs() < 1e-12);
    }

    #[test]
    fn rms_shape_mismatch() {
        assert!(rms(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn origin_must_be_in_range() {
        assert!(Sequence::new(vec![1.0, 2.0], 2).is_err());
        assert!(Sequence::new(vec![], 0).is_err());
    }

    #[test]
    fn image_round_and_transpose() {
        let img = Image::new(3, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        assert_eq!(img.get(1, 2), 6.0);
        let t = img.transposed();
        assert_eq!(t.width(), 2);
        assert_eq!(t.get(2, 1), 6.0);
        assert_eq!(t.transposed(), img);
    }
}
