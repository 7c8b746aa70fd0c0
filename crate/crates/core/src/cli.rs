//! Command-line front end shared by the `cbp` binary and the tests.
//!
//! Exit codes: 0 success, 1 usage error, 2 coprimality failure, 3 I/O or
//! format error, 4 pipeline failure or residual over bound, 5 unpaired
//! streams.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde_json::json;

use crate::bench::{run_bench, BenchConfig, BENCH_TAU};
use crate::decoder::{decode_frame, default_search, DecodedFrame, DecoderConfig, DEFAULT_TAU};
use crate::encoder::{
    degrade_bits, encode_frame, frame_seed, generate_coprime_pair, pair_id_for, quantize_frame,
    validate_kernel_width, DEFAULT_MAX_RETRIES,
};
use crate::error::Error;
use crate::frame::{BitDepth, Frame};
use crate::metrics::psnr;
use crate::stream_io::{pair_streams, read_stream, write_stream, Role, StreamManifest};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_COPRIMALITY: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_PIPELINE: i32 = 4;
pub const EXIT_PAIR_MISMATCH: i32 = 5;

pub const DEFAULT_MAX_RESIDUAL: f64 = 1e-4;

#[derive(Parser, Debug)]
#[command(name = "cbp", version, about = "Coprime blurred pair video codec")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Blur a latent stream into a public and a private stream.
    Encode(EncodeArgs),
    /// Reconstruct the latent stream from a public/private pair.
    Decode(DecodeArgs),
    /// Drop least significant bits from a quantized stream.
    Degrade(DegradeArgs),
    /// Per-frame PSNR between two streams.
    Psnr(PsnrArgs),
    /// Per-stage decode timings on synthetic frames, written as CSV.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub out_public: PathBuf,
    #[arg(long)]
    pub out_private: PathBuf,
    #[arg(long)]
    pub kernel_width: usize,
    #[arg(long)]
    pub seed: u64,
    /// float32, u16 or u8.
    #[arg(long, default_value = "float32")]
    pub bit_depth: BitDepth,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub public: PathBuf,
    #[arg(long)]
    pub private: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = DEFAULT_TAU)]
    pub tau: f64,
    /// Relative regularizer; derived from the stream depth when omitted.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Use the manifests' kernel width instead of estimating it.
    #[arg(long)]
    pub trust_hint: bool,
    /// Comma-separated odd widths tried by the estimator.
    #[arg(long, value_delimiter = ',')]
    pub search: Option<Vec<usize>>,
    #[arg(long, default_value_t = DEFAULT_MAX_RESIDUAL)]
    pub max_residual: f64,
    /// Frames decoded concurrently; defaults to the number of cores.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DegradeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub drop: u32,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct PsnrArgs {
    #[arg(long)]
    pub a: PathBuf,
    #[arg(long)]
    pub b: PathBuf,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 640)]
    pub width: usize,
    #[arg(long, default_value_t = 480)]
    pub height: usize,
    #[arg(long, value_delimiter = ',', default_value = "9,17,23")]
    pub kernel_widths: Vec<usize>,
    #[arg(long, default_value_t = 1)]
    pub reps: usize,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = BENCH_TAU)]
    pub tau: f64,
}

/// A failure carrying its exit code and message.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn from_error(context: &str, e: &Error) -> Self {
        let message = if context.is_empty() {
            e.to_string()
        } else {
            format!("{context}: {e}")
        };
        Self {
            code: exit_code(e),
            message,
        }
    }
}

/// Exit code for a library error.
pub fn exit_code(e: &Error) -> i32 {
    match e.root() {
        Error::CoprimalityFailure { .. } => EXIT_COPRIMALITY,
        Error::Io { .. }
        | Error::CorruptManifest { .. }
        | Error::MissingFrame(_)
        | Error::FormatViolation { .. } => EXIT_IO,
        Error::PairMismatch(_) => EXIT_PAIR_MISMATCH,
        Error::InvalidKernelWidth(_)
        | Error::InvalidArgument(_)
        | Error::NotQuantized
        | Error::DimMismatch(_) => EXIT_USAGE,
        _ => EXIT_PIPELINE,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), Failure> {
    match command {
        Command::Encode(a) => encode(&a, out),
        Command::Decode(a) => decode(&a, out),
        Command::Degrade(a) => degrade(&a, out),
        Command::Psnr(a) => psnr_cmd(&a, out),
        Command::Bench(a) => bench(&a, out),
    }
}

fn read(dir: &Path) -> Result<(Vec<Frame>, StreamManifest), Failure> {
    read_stream(dir).map_err(|e| Failure::from_error(&format!("reading {}", dir.display()), &e))
}

fn write(frames: &[Frame], manifest: &StreamManifest, dir: &Path) -> Result<(), Failure> {
    write_stream(frames, manifest, dir)
        .map_err(|e| Failure::from_error(&format!("writing {}", dir.display()), &e))
}

fn encode(a: &EncodeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    validate_kernel_width(a.kernel_width).map_err(|e| Failure::usage(e.to_string()))?;
    let (latent, _) = read(&a.input)?;
    let t = a.kernel_width;
    let encoded = latent
        .par_iter()
        .enumerate()
        .map(|(i, frame)| {
            let ctx = format!("frame {i}");
            let kernels =
                generate_coprime_pair(t, frame_seed(a.seed, i as u64), DEFAULT_MAX_RETRIES)
                    .map_err(|e| Failure::from_error(&ctx, &e))?;
            let pair = encode_frame(frame, &kernels).map_err(|e| Failure::from_error(&ctx, &e))?;
            let (public, private) = match a.bit_depth {
                BitDepth::Float32 => (pair.public, pair.private),
                depth => (
                    quantize_frame(&pair.public, depth)
                        .map_err(|e| Failure::from_error(&ctx, &e))?,
                    quantize_frame(&pair.private, depth)
                        .map_err(|e| Failure::from_error(&ctx, &e))?,
                ),
            };
            Ok((public, private, kernels.coprimality_margin))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let pair_id = pair_id_for(a.seed, t);
    let mut publics = Vec::with_capacity(encoded.len());
    let mut privates = Vec::with_capacity(encoded.len());
    for (i, (p, q, margin)) in encoded.into_iter().enumerate() {
        let _ = writeln!(out, "frame {i}: coprimality margin {margin:.3e}");
        publics.push(p);
        privates.push(q);
    }
    for (frames, role, dir) in [
        (&publics, Role::Public, &a.out_public),
        (&privates, Role::Private, &a.out_private),
    ] {
        let mut manifest = StreamManifest::describe(frames, role, pair_id.clone());
        manifest.kernel_width_hint = Some(t);
        manifest.seed = Some(a.seed);
        write(frames, &manifest, dir)?;
    }
    Ok(())
}

fn sidecar(d: &DecodedFrame) -> String {
    let value = json!({
        "width_used": d.width_used,
        "validation_residual": d.validation_residual,
        "stage_timings": d.stage_timings,
    });
    let mut s = serde_json::to_string_pretty(&value).expect("sidecar serializes");
    s.push('\n');
    s
}

fn decode(a: &DecodeArgs, out: &mut dyn Write) -> Result<(), Failure> {
    if a.workers == Some(0) {
        return Err(Failure::usage("--workers must be at least 1"));
    }
    let pairs = pair_streams(&a.public, &a.private).map_err(|e| Failure::from_error("", &e))?;
    let cfg = DecoderConfig {
        search: a.search.clone().unwrap_or_else(default_search),
        tau: a.tau,
        epsilon: a.epsilon,
        trust_hint: a.trust_hint,
        ..DecoderConfig::default()
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.workers.unwrap_or(0))
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let decoded = pool.install(|| {
        pairs
            .par_iter()
            .enumerate()
            .map(|(i, pair)| {
                decode_frame(pair, &cfg).map_err(|e| {
                    let stage = e.stage().map_or("decode".to_string(), |s| s.to_string());
                    Failure::from_error(&format!("frame {i}, stage {stage}"), &e)
                })
            })
            .collect::<Result<Vec<_>, Failure>>()
    })?;

    let latent: Vec<Frame> = decoded.iter().map(|d| d.latent.clone()).collect();
    let pair_id = pairs[0].pair_id.clone();
    write(
        &latent,
        &StreamManifest::describe(&latent, Role::Latent, pair_id),
        &a.out,
    )?;
    let mut worst: Option<(usize, f64)> = None;
    for (i, d) in decoded.iter().enumerate() {
        let path = a.out.join(format!("frame_{i:06}.json"));
        std::fs::write(&path, sidecar(d))
            .map_err(|e| Failure::from_error("", &Error::Io { path, source: e }))?;
        let _ = writeln!(
            out,
            "frame {i}: width {} residual {:.3e} total {:.2} ms",
            d.width_used, d.validation_residual, d.stage_timings.total
        );
        if !(d.validation_residual <= a.max_residual)
            && worst.is_none_or(|(_, r)| d.validation_residual > r)
        {
            worst = Some((i, d.validation_residual));
        }
    }
    match worst {
        Some((i, r)) => Err(Failure {
            code: EXIT_PIPELINE,
            message: format!(
                "frame {i}, stage validation: residual {r:.3e} exceeds bound {:.3e}",
                a.max_residual
            ),
        }),
        None => Ok(()),
    }
}

fn degrade(a: &DegradeArgs, _out: &mut dyn Write) -> Result<(), Failure> {
    let (frames, manifest) = read(&a.input)?;
    let degraded = frames
        .iter()
        .map(|f| degrade_bits(f, a.drop).map_err(|e| Failure::usage(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    write(&degraded, &manifest, &a.out)
}

fn psnr_cmd(a: &PsnrArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let (fa, _) = read(&a.a)?;
    let (fb, _) = read(&a.b)?;
    if fa.len() != fb.len() {
        return Err(Failure::usage(format!(
            "streams hold {} and {} frames",
            fa.len(),
            fb.len()
        )));
    }
    let mut total = 0.0;
    for (i, (x, y)) in fa.iter().zip(&fb).enumerate() {
        let db = psnr(x, y).map_err(|e| Failure::from_error(&format!("frame {i}"), &e))?;
        total += db;
        let _ = writeln!(out, "frame {i}: {db:.3} dB");
    }
    let _ = writeln!(out, "mean: {:.3} dB", total / fa.len() as f64);
    Ok(())
}

fn bench(a: &BenchArgs, out: &mut dyn Write) -> Result<(), Failure> {
    for &t in &a.kernel_widths {
        validate_kernel_width(t).map_err(|e| Failure::usage(e.to_string()))?;
    }
    let report = run_bench(&BenchConfig {
        width: a.width,
        height: a.height,
        kernel_widths: a.kernel_widths.clone(),
        repetitions: a.reps,
        seed: a.seed,
        tau: a.tau,
    })
    .map_err(|e| Failure::from_error("bench", &e))?;
    report
        .save_csv(&a.out)
        .map_err(|e| Failure::from_error("", &e))?;
    let _ = report.write_csv(out);
    Ok(())
}
