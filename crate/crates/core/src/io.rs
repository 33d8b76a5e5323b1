//! Test-asset generation (checkerboards, seeded noise, sampled Gaussians)
//! and bit-exact file I/O: PGM images, CSV signals, JSON filters and
//! kernels.
//!
//! Every writer is byte-deterministic for identical inputs. CSV carries 17
//! significant digits, which round-trips f64 exactly; JSON uses serde's
//! shortest-round-trip float formatting, which is also lossless and stable.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charpoly::{FactorSummary, Filter};
use crate::elementary::InverseFilter;
use crate::error::{Error, Result};
use crate::signal::{Image, Sequence};

/// Alternating 0/1 tiles, `tile x tile` pixels each, with pixel (0, 0)
/// black.
pub fn checkerboard(width: usize, height: usize, tile: usize) -> Result<Image> {
    if width == 0 || height == 0 || tile == 0 {
        return Err(Error::ShapeMismatch(
            "checkerboard needs positive dimensions and tile".into(),
        ));
    }
    let mut pixels = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let on = (r / tile + c / tile) % 2 == 1;
            pixels.push(if on { 1.0 } else { 0.0 });
        }
    }
    Image::new(width, height, pixels)
}

/// Embed an image in a constant frame of `pad` pixels on every side.
pub fn pad_image(img: &Image, pad: usize, value: f64) -> Image {
    let (w, h) = (img.width() + 2 * pad, img.height() + 2 * pad);
    let mut out = Image::constant(w, h, value).expect("positive dimensions");
    for r in 0..img.height() {
        for c in 0..img.width() {
            out.set(r + pad, c + pad, img.get(r, c));
        }
    }
    out
}

/// Symmetric filter sampled from `exp(-k^2 / (2 sigma^2))` for
/// `|k| <= order`, unnormalized.
pub fn gaussian_filter(order: usize, sigma: f64) -> Result<Filter> {
    if !(sigma > 0.0) {
        return Err(Error::Parse(format!("sigma must be positive, got {sigma}")));
    }
    let inv = 1.0 / (2.0 * sigma * sigma);
    let n = order as i64;
    Filter::new(
        (-n..=n)
            .map(|k| (-((k * k) as f64) * inv).exp())
            .collect(),
    )
}

/// Zero-mean Gaussian noise parameters with a fixed seed.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub sigma: f64,
    pub seed: u64,
}

/// Add seeded Gaussian noise, reproducible bit for bit.
///
/// Samples come from the Box-Muller transform driven by ChaCha8 seeded with
/// `spec.seed`; pixels are visited in row-major order, two uniforms per
/// pixel, so the output is a pure function of (image, spec).
pub fn add_gaussian_noise(img: &Image, spec: &NoiseSpec) -> Image {
    if spec.sigma == 0.0 {
        return img.clone();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let pixels = img
        .pixels()
        .iter()
        .map(|&v| {
            let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
            let u2: f64 = rng.gen();
            let z = (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos();
            v + spec.sigma * z
        })
        .collect();
    Image::new(img.width(), img.height(), pixels).expect("shape unchanged")
}

// ---------------------------------------------------------------------------
// PGM

fn quantize(v: f64, maxval: u16) -> u16 {
    let clamped = v.clamp(0.0, 1.0);
    // Round half away from zero; inputs are nonnegative after the clamp.
    (clamped * maxval as f64 + 0.5).floor() as u16
}

/// Write a binary (P5) PGM, mapping [0, 1] linearly onto [0, maxval].
/// Out-of-range samples clamp.
pub fn write_pgm(path: &Path, img: &Image) -> Result<()> {
    write_pgm_with(path, img, 255, true)
}

pub fn write_pgm_with(path: &Path, img: &Image, maxval: u16, binary: bool) -> Result<()> {
    if maxval == 0 {
        return Err(Error::Parse("maxval must be positive".into()));
    }
    let mut w = BufWriter::new(fs::File::create(path)?);
    let magic = if binary { "P5" } else { "P2" };
    write!(w, "{magic}\n{} {}\n{}\n", img.width(), img.height(), maxval)?;
    if binary {
        if maxval > 255 {
            for &v in img.pixels() {
                w.write_all(&quantize(v, maxval).to_be_bytes())?;
            }
        } else {
            for &v in img.pixels() {
                w.write_all(&[quantize(v, maxval) as u8])?;
            }
        }
    } else {
        for row in img.rows() {
            let line: Vec<String> = row.iter().map(|&v| quantize(v, maxval).to_string()).collect();
            writeln!(w, "{}", line.join(" "))?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Read a P2 or P5 PGM with `maxval <= 65535` into floats in [0, 1].
pub fn read_pgm(path: &Path) -> Result<Image> {
    let bytes = fs::read(path)?;
    if bytes.len() < 2 {
        return Err(Error::Parse("PGM too short".into()));
    }
    let magic = &bytes[..2];
    let binary = match magic {
        b"P5" => true,
        b"P2" => false,
        _ => return Err(Error::Parse("not a P2/P5 PGM".into())),
    };

    // Header tokens may be separated by whitespace and '#' comments.
    let mut pos = 2usize;
    let mut tokens: Vec<u64> = Vec::new();
    while tokens.len() < 3 {
        while pos < bytes.len() && (bytes[pos].is_ascii_whitespace() || bytes[pos] == b'#') {
            if bytes[pos] == b'#' {
                while pos < bytes.len() && bytes[pos] != b'\n' {
                    pos += 1;
                }
            } else {
                pos += 1;
            }
        }
        let start = pos;
        while pos < bytes.len() && bytes[pos].is_ascii_digit() {
            pos += 1;
        }
        if start == pos {
            return Err(Error::Parse("malformed PGM header".into()));
        }
        let text = std::str::from_utf8(&bytes[start..pos])
            .map_err(|_| Error::Parse("malformed PGM header".into()))?;
        tokens.push(
            text.parse::<u64>()
                .map_err(|_| Error::Parse("malformed PGM header".into()))?,
        );
    }
    let (width, height, maxval) = (tokens[0] as usize, tokens[1] as usize, tokens[2]);
    if width == 0 || height == 0 {
        return Err(Error::Parse("zero PGM dimension".into()));
    }
    if maxval == 0 || maxval > 65535 {
        return Err(Error::Parse(format!("unsupported maxval {maxval}")));
    }
    let scale = 1.0 / maxval as f64;
    let count = width * height;
    let pixels: Vec<f64> = if binary {
        pos += 1; // single whitespace after maxval
        let wide = maxval > 255;
        let needed = count * if wide { 2 } else { 1 };
        if bytes.len() < pos + needed {
            return Err(Error::Parse("truncated PGM payload".into()));
        }
        if wide {
            bytes[pos..pos + needed]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as f64 * scale)
                .collect()
        } else {
            bytes[pos..pos + needed]
                .iter()
                .map(|&b| b as f64 * scale)
                .collect()
        }
    } else {
        let text = std::str::from_utf8(&bytes[pos..])
            .map_err(|_| Error::Parse("malformed P2 payload".into()))?;
        let values: Vec<f64> = text
            .split_whitespace()
            .map(|tok| {
                tok.parse::<u64>()
                    .map(|v| v as f64 * scale)
                    .map_err(|_| Error::Parse(format!("bad P2 sample {tok:?}")))
            })
            .collect::<Result<_>>()?;
        if values.len() < count {
            return Err(Error::Parse("truncated PGM payload".into()));
        }
        values[..count].to_vec()
    };
    Image::new(width, height, pixels)
}

// ---------------------------------------------------------------------------
// CSV signals

/// Read a signal stored one real per line.
pub fn read_signal_csv(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path)?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        values.push(line.parse::<f64>().map_err(|_| {
            Error::Parse(format!("line {}: not a number: {line:?}", lineno + 1))
        })?);
    }
    if values.is_empty() {
        return Err(Error::Parse("empty signal file".into()));
    }
    Ok(values)
}

/// Write a signal one real per line with 17 significant digits.
pub fn write_signal_csv(path: &Path, seq: &Sequence) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for v in seq.values() {
        writeln!(w, "{v:.16e}")?;
    }
    w.flush()?;
    Ok(())
}

// ---------------------------------------------------------------------------
// JSON filters and inverses

#[derive(Serialize, Deserialize)]
struct FilterFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    coefficients: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    half: Option<Vec<f64>>,
}

/// Load a filter from `{"coefficients": [...]}` or `{"half": [...]}`.
pub fn read_filter_json(path: &Path) -> Result<Filter> {
    let text = fs::read_to_string(path)?;
    parse_filter_json(&text)
}

pub fn parse_filter_json(text: &str) -> Result<Filter> {
    let file: FilterFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("filter JSON: {e}")))?;
    match (file.coefficients, file.half) {
        (Some(c), None) => Filter::new(c),
        (None, Some(h)) => Filter::from_half(&h),
        _ => Err(Error::Parse(
            "filter JSON needs exactly one of \"coefficients\" or \"half\"".into(),
        )),
    }
}

pub fn write_filter_json(path: &Path, f: &Filter) -> Result<()> {
    let file = FilterFile {
        coefficients: Some(f.coeffs().to_vec()),
        half: None,
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct InverseMetadata<'a> {
    pseudo: bool,
    truncation_bound: f64,
    p: &'a [FactorSummary],
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct InverseFile<'a> {
    coefficients: &'a [f64],
    metadata: InverseMetadata<'a>,
}

/// Export an inverse filter in the plain filter format plus a metadata
/// block with the factor parameters it inverts.
pub fn write_inverse_json(
    path: &Path,
    inv: &InverseFilter,
    factors: &[FactorSummary],
) -> Result<()> {
    let file = InverseFile {
        coefficients: inv.z.values(),
        metadata: InverseMetadata {
            pseudo: inv.pseudo,
            truncation_bound: inv.truncation_bound,
            p: factors,
        },
    };
    fs::write(path, serde_json::to_string_pretty(&file)? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::tempdir;

    #[test]
    fn checkerboard_examples() {
        let img = checkerboard(2, 2, 1).unwrap();
        assert_eq!(img.pixels(), &[0.0, 1.0, 1.0, 0.0]);

        let img = checkerboard(4, 2, 2).unwrap();
        assert_eq!(img.pixels(), &[0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, 1.0]);

        let img = checkerboard(64, 64, 8).unwrap();
        assert_eq!(img.sum(), 2048.0);

        assert!(checkerboard(0, 4, 1).is_err());
    }

    #[test]
    fn noise_determinism_and_zero_sigma() {
        let img = checkerboard(16, 16, 4).unwrap();
        let spec = NoiseSpec {
            sigma: 0.0,
            seed: 99,
        };
        assert_eq!(add_gaussian_noise(&img, &spec), img);

        let spec = NoiseSpec {
            sigma: 0.1,
            seed: 1234,
        };
        let a = add_gaussian_noise(&img, &spec);
        let b = add_gaussian_noise(&img, &spec);
        assert_eq!(a.pixels(), b.pixels());
        assert_ne!(a.pixels(), img.pixels());
    }

    #[test]
    fn noise_sample_deviation_is_calibrated() {
        let img = Image::constant(256, 256, 0.0).unwrap();
        let spec = NoiseSpec {
            sigma: 0.1,
            seed: 7,
        };
        let noisy = add_gaussian_noise(&img, &spec);
        let n = noisy.pixels().len() as f64;
        let mean: f64 = noisy.pixels().iter().sum::<f64>() / n;
        let var: f64 = noisy.pixels().iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        let sd = var.sqrt();
        assert!((0.095..=0.105).contains(&sd), "sample sd {sd}");
    }

    #[test]
    fn pgm_round_trip_binary_and_ascii() {
        let dir = tempdir().unwrap();
        // Quantized image: every value an exact multiple of 1/255.
        let img = Image::new(
            3,
            2,
            vec![0.0, 128.0 / 255.0, 1.0, 17.0 / 255.0, 254.0 / 255.0, 64.0 / 255.0],
        )
        .unwrap();
        for binary in [true, false] {
            let path = dir.path().join(if binary { "b.pgm" } else { "a.pgm" });
            write_pgm_with(&path, &img, 255, binary).unwrap();
            let back = read_pgm(&path).unwrap();
            assert_eq!(back, img);
        }
    }

    #[test]
    fn pgm_sixteen_bit_round_trip() {
        let dir = tempdir().unwrap();
        let img = Image::new(2, 2, vec![0.0, 1.0, 30000.0 / 65535.0, 12.0 / 65535.0]).unwrap();
        let path = dir.path().join("wide.pgm");
        write_pgm_with(&path, &img, 65535, true).unwrap();
        assert_eq!(read_pgm(&path).unwrap(), img);
    }

    #[test]
    fn pgm_single_pixel_value() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("one.pgm");
        fs::write(&path, "P2\n1 1\n255\n128\n").unwrap();
        let img = read_pgm(&path).unwrap();
        assert!((img.get(0, 0) - 0.5019607843137255).abs() < 1e-12);
    }

    #[test]
    fn pgm_rejects_malformed_input() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("bad.pgm");
        fs::write(&path, "P2\n1 1\n0\n5\n").unwrap();
        assert!(read_pgm(&path).is_err()); // maxval 0

        fs::write(&path, "P5\n4 4\n255\nxy").unwrap();
        assert!(read_pgm(&path).is_err()); // truncated payload

        fs::write(&path, "P3\n1 1\n255\n1\n").unwrap();
        assert!(read_pgm(&path).is_err()); // wrong magic
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempdir().unwrap();
        let path = dir.path().join("sig.csv");
        let seq = Sequence::from_values(vec![1.0, -0.125, std::f64::consts::PI, 1e-300]).unwrap();
        write_signal_csv(&path, &seq).unwrap();
        let back = read_signal_csv(&path).unwrap();
        assert_eq!(back, seq.values());
    }

    #[test]
    fn filter_json_forms() {
        let f = parse_filter_json(r#"{"coefficients": [1, 2.3, 1]}"#).unwrap();
        assert_eq!(f.coeffs(), &[1.0, 2.3, 1.0]);
        let f = parse_filter_json(r#"{"half": [6.6, 4.3, 1]}"#).unwrap();
        assert_eq!(f.coeffs(), &[1.0, 4.3, 6.6, 4.3, 1.0]);
        assert!(parse_filter_json(r#"{"coefficients": [1, 2, 1], "half": [1]}"#).is_err());
        assert!(parse_filter_json(r#"{"coefficients": [1, 2, 1.5]}"#).is_err());
    }

    #[test]
    fn gaussian_filter_samples() {
        let f = gaussian_filter(2, std::f64::consts::FRAC_1_SQRT_2).unwrap();
        // sigma = 1/sqrt(2) samples exp(-k^2).
        for (k, c) in (-2i64..=2).zip(f.coeffs()) {
            assert!((c - (-(k * k) as f64).exp()).abs() < 1e-15);
        }
    }
}
