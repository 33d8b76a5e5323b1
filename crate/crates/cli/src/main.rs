//! `invfir` command line: analyze symmetric filters, build their inverses,
//! deconvolve signals and images, run the Richardson-Lucy baseline, and
//! reproduce the checkerboard experiments.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure, 4 filter not
//! invertible where invertibility is required.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use invfir::charpoly::decompose;
use invfir::deconv1d::{build_inverse, deconvolve, DeconvOptions};
use invfir::error::Error;
use invfir::io::{
    read_filter_json, read_pgm, read_signal_csv, write_inverse_json, write_pgm, write_signal_csv,
};
use invfir::rl::{richardson_lucy, RlOptions};
use invfir::separable2d::{deconvolve2d, Kernel2D};
use invfir::signal::{BoundaryPolicy, Sequence};

mod demo;
use demo::{DemoKind, DemoParams};

#[derive(Parser)]
#[command(name = "invfir", version, about = "Direct inversion of finite symmetric filters")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Default, ValueEnum)]
enum BoundaryArg {
    #[default]
    Reflect,
    Zero,
    Periodic,
}

impl From<BoundaryArg> for BoundaryPolicy {
    fn from(b: BoundaryArg) -> Self {
        match b {
            BoundaryArg::Reflect => BoundaryPolicy::Reflect,
            BoundaryArg::Zero => BoundaryPolicy::Zero,
            BoundaryArg::Periodic => BoundaryPolicy::Periodic,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decompose a filter and report per-factor invertibility.
    Analyze {
        /// Filter JSON ({"coefficients": [...]} or {"half": [...]}).
        filter: PathBuf,
        /// Emit the report as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Build the exact inverse of a fully invertible filter.
    Invert {
        filter: PathBuf,
        /// Output path for the inverse filter JSON.
        #[arg(long)]
        out: PathBuf,
        /// Truncation threshold for the inverse tail.
        #[arg(long, default_value_t = 1e-12)]
        eps_trunc: f64,
        #[arg(long)]
        json: bool,
    },
    /// Deconvolve a 1D signal (CSV, one sample per line).
    Deconv {
        #[arg(long)]
        signal: PathBuf,
        #[arg(long)]
        filter: PathBuf,
        /// Output CSV path for the restored signal.
        #[arg(long)]
        out: PathBuf,
        /// Optional JSON report path.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        boundary: BoundaryArg,
        #[arg(long, default_value_t = 1e-12)]
        eps_trunc: f64,
        /// Index of the sample at position zero.
        #[arg(long, default_value_t = 0)]
        origin: usize,
        /// Samples trimmed per side per non-invertible factor.
        #[arg(long, default_value_t = 1)]
        trim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Deconvolve a PGM image under a separable 2D kernel.
    Deconv2d {
        #[arg(long)]
        image: PathBuf,
        /// Kernel JSON ({"matrix": [[...], ...]}).
        #[arg(long, conflicts_with_all = ["row_filter", "col_filter"])]
        kernel: Option<PathBuf>,
        /// Row-direction 1D filter JSON (with --col-filter).
        #[arg(long, requires = "col_filter")]
        row_filter: Option<PathBuf>,
        /// Column-direction 1D filter JSON (with --row-filter).
        #[arg(long, requires = "row_filter")]
        col_filter: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t)]
        boundary: BoundaryArg,
        #[arg(long, default_value_t = 1e-12)]
        eps_trunc: f64,
        #[arg(long, default_value_t = 1)]
        trim: usize,
        #[arg(long)]
        json: bool,
    },
    /// Richardson-Lucy deconvolution of a PGM image.
    Rl {
        #[arg(long)]
        image: PathBuf,
        /// PSF kernel JSON ({"matrix": [[...], ...]}).
        #[arg(long)]
        psf: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 50)]
        iterations: usize,
    },
    /// Run a built-in checkerboard experiment.
    Demo {
        #[arg(value_enum)]
        kind: DemoKind,
        #[arg(long)]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 64)]
        size: usize,
        #[arg(long, default_value_t = 8)]
        tile: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 0.05)]
        noise_sigma: f64,
        #[arg(long, default_value_t = 50)]
        iterations: usize,
    },
}

fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::NotInvertible(_) | Error::UseKernelPath(_) => 4,
        Error::RootFinding { .. }
        | Error::ResidualTooLarge(_)
        | Error::UnpairedComplexFactor(_)
        | Error::DegenerateKernelBasis
        | Error::TrivialKernel(_) => 3,
        _ => 2,
    }
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AnalyzeRecord {
    gain: f64,
    order: usize,
    residual: f64,
    factors: Vec<invfir::charpoly::FactorSummary>,
    invertible_count: usize,
    noninvertible_count: usize,
    length_loss: usize,
}

fn cmd_analyze(filter: &Path, json: bool) -> Result<(), Error> {
    let f = read_filter_json(filter)?;
    let d = decompose(&f)?;
    let record = AnalyzeRecord {
        gain: d.gain,
        order: f.order(),
        residual: d.residual,
        factors: d.summaries(),
        invertible_count: d.invertible_count(),
        noninvertible_count: d.noninvertible_count(),
        length_loss: 2 * d.noninvertible_count(),
    };
    if json {
        println!("{}", serde_json::to_string_pretty(&record)?);
    } else {
        println!("filter: order {}, gain {}", record.order, record.gain);
        if record.factors.is_empty() {
            println!("factors: none (pure gain)");
        } else {
            println!("factors:");
            for s in &record.factors {
                if s.p_imag == 0.0 {
                    println!("  p = {:<22} {}", format!("{:.12}", s.p), s.class);
                } else {
                    println!(
                        "  p = {:.12} {} {:.12}i  (conjugate pair member)  {}",
                        s.p,
                        if s.p_imag >= 0.0 { "+" } else { "-" },
                        s.p_imag.abs(),
                        s.class
                    );
                }
            }
        }
        println!(
            "resolution: {} invertible, {} non-invertible; a signal loses {} samples \
             and its Nyquist interval widens from 1/(2N) to 1/(2(N - {}))",
            record.invertible_count,
            record.noninvertible_count,
            record.length_loss,
            record.noninvertible_count
        );
        println!("reconvolution residual: {:.3e}", record.residual);
    }
    Ok(())
}

fn cmd_invert(filter: &Path, out: &Path, eps_trunc: f64, json: bool) -> Result<(), Error> {
    let f = read_filter_json(filter)?;
    let d = decompose(&f)?;
    let inv = build_inverse(&d, eps_trunc)?;
    write_inverse_json(out, &inv, &d.summaries())?;
    if json {
        println!(
            "{}",
            serde_json::json!({
                "halfSupport": inv.half_support(),
                "z0": inv.z.get(0),
                "truncationBound": inv.truncation_bound,
                "out": out,
            })
        );
    } else {
        println!(
            "inverse written to {} (half support {}, z(0) = {:.7}, tail bound {:.3e})",
            out.display(),
            inv.half_support(),
            inv.z.get(0),
            inv.truncation_bound
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_deconv(
    signal: &Path,
    filter: &Path,
    out: &Path,
    report: Option<&Path>,
    boundary: BoundaryArg,
    eps_trunc: f64,
    origin: usize,
    trim: usize,
    json: bool,
) -> Result<(), Error> {
    let values = read_signal_csv(signal)?;
    let y = Sequence::new(values, origin)?;
    let f = read_filter_json(filter)?;
    let opts = DeconvOptions {
        eps_trunc,
        boundary: boundary.into(),
        trim_per_noninvertible: trim,
    };
    let (restored, rep) = deconvolve(&y, &f, &opts)?;
    write_signal_csv(out, &restored)?;
    if let Some(path) = report {
        std::fs::write(path, serde_json::to_string_pretty(&rep)? + "\n")?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
    } else {
        println!(
            "restored {} samples (trimmed {} per side) -> {}",
            restored.len(),
            rep.trimmed_per_side,
            out.display()
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_deconv2d(
    image: &Path,
    kernel: Option<&Path>,
    row_filter: Option<&Path>,
    col_filter: Option<&Path>,
    out: &Path,
    report: Option<&Path>,
    boundary: BoundaryArg,
    eps_trunc: f64,
    trim: usize,
    json: bool,
) -> Result<(), Error> {
    let img = read_pgm(image)?;
    let k = match (kernel, row_filter, col_filter) {
        (Some(path), None, None) => {
            Kernel2D::from_json(&std::fs::read_to_string(path)?)?
        }
        (None, Some(rf), Some(cf)) => {
            let ct = read_filter_json(rf)?;
            let cs = read_filter_json(cf)?;
            Kernel2D::from_outer(&cs, &ct)
        }
        _ => {
            return Err(Error::Parse(
                "provide either --kernel or both --row-filter and --col-filter".into(),
            ))
        }
    };
    let opts = DeconvOptions {
        eps_trunc,
        boundary: boundary.into(),
        trim_per_noninvertible: trim,
    };
    let (restored, rep) = deconvolve2d(&img, &k, &opts)?;
    write_pgm(out, &restored)?;
    if let Some(path) = report {
        std::fs::write(path, serde_json::to_string_pretty(&rep)? + "\n")?;
    }
    if json {
        println!("{}", serde_json::to_string_pretty(&rep)?);
    } else {
        println!(
            "restored {}x{} image -> {}",
            restored.width(),
            restored.height(),
            out.display()
        );
    }
    Ok(())
}

fn cmd_rl(image: &Path, psf: &Path, out: &Path, iterations: usize) -> Result<(), Error> {
    let img = read_pgm(image)?;
    let k = Kernel2D::from_json(&std::fs::read_to_string(psf)?)?;
    let opts = RlOptions {
        iterations,
        ..Default::default()
    };
    let restored = richardson_lucy(&img, &k, &opts)?;
    write_pgm(out, &restored)?;
    println!(
        "Richardson-Lucy ({} iterations) -> {}",
        iterations,
        out.display()
    );
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match &cli.command {
        Command::Analyze { filter, json } => cmd_analyze(filter, *json),
        Command::Invert {
            filter,
            out,
            eps_trunc,
            json,
        } => cmd_invert(filter, out, *eps_trunc, *json),
        Command::Deconv {
            signal,
            filter,
            out,
            report,
            boundary,
            eps_trunc,
            origin,
            trim,
            json,
        } => cmd_deconv(
            signal,
            filter,
            out,
            report.as_deref(),
            *boundary,
            *eps_trunc,
            *origin,
            *trim,
            *json,
        ),
        Command::Deconv2d {
            image,
            kernel,
            row_filter,
            col_filter,
            out,
            report,
            boundary,
            eps_trunc,
            trim,
            json,
        } => cmd_deconv2d(
            image,
            kernel.as_deref(),
            row_filter.as_deref(),
            col_filter.as_deref(),
            out,
            report.as_deref(),
            *boundary,
            *eps_trunc,
            *trim,
            *json,
        ),
        Command::Rl {
            image,
            psf,
            out,
            iterations,
        } => cmd_rl(image, psf, out, *iterations),
        Command::Demo {
            kind,
            out_dir,
            size,
            tile,
            seed,
            noise_sigma,
            iterations,
        } => {
            let params = DemoParams {
                kind: *kind,
                size: *size,
                tile: *tile,
                seed: *seed,
                noise_sigma: *noise_sigma,
                iterations: *iterations,
            };
            let record = demo::run_demo(&params, out_dir)?;
            println!(
                "rms blurred {:.6}, direct {:.6}, rl {:.6} -> {}",
                record.rms_blurred,
                record.rms_direct,
                record.rms_rl,
                out_dir.display()
            );
            if let (Some(d), Some(r)) = (record.runtime_direct_ms, record.runtime_rl_ms) {
                eprintln!("timing: direct {d:.1} ms, rl {r:.1} ms");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
