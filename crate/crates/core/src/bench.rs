//! Per-stage timing harness over synthetic random latents.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::decoder::{decode_frame, default_search, DecoderConfig, StageTimings};
use crate::encoder::{encode_frame, frame_seed, generate_coprime_pair, DEFAULT_MAX_RETRIES};
use crate::error::{Error, Result};
use crate::frame::Frame;
use crate::plane::ImagePlane;

pub const CSV_HEADER: [&str; 6] = [
    "kernel_width",
    "polynomial_evaluation_ms",
    "kernel_degree_estimation_ms",
    "kernel_estimation_1d_ms",
    "kernel_estimation_2d_fft_ms",
    "total_ms",
];

#[derive(Clone, Debug)]
pub struct BenchConfig {
    pub width: usize,
    pub height: usize,
    pub kernel_widths: Vec<usize>,
    pub repetitions: usize,
    pub seed: u64,
    /// Singularity threshold for degree estimation.
    pub tau: f64,
}

/// Bench default for `tau`. Large frames with wide kernels have regular
/// Bézout blocks with ratios near 1e-6, while singular ones sit near 1e-15.
pub const BENCH_TAU: f64 = 1e-9;

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            kernel_widths: vec![9, 17, 23],
            repetitions: 1,
            seed: 0,
            tau: BENCH_TAU,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BenchRow {
    pub kernel_width: usize,
    pub timings: StageTimings,
}

#[derive(Clone, Debug)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub width: usize,
    pub height: usize,
    pub repetitions: usize,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let t = &row.timings;
            w.write_record([
                row.kernel_width.to_string(),
                format!("{:.4}", t.polynomial_evaluation),
                format!("{:.4}", t.kernel_degree_estimation),
                format!("{:.4}", t.kernel_estimation_1d),
                format!("{:.4}", t.kernel_estimation_2d_fft),
                format!("{:.4}", t.total),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(file).map_err(|e| match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::io(path, io),
            other => Error::io(path, std::io::Error::other(format!("{other:?}"))),
        })
    }
}

/// Uniform random latent plane in `[0, 1)`.
pub fn random_latent(height: usize, width: usize, seed: u64) -> ImagePlane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ImagePlane::from_fn(height, width, |_, _| rng.random())
}

/// Encodes and decodes `repetitions` random latents per kernel width, single
/// threaded, and averages the stage timings of the decodes.
///
/// The width search set is the production set widened to cover the requested
/// widths, so degree estimation runs as it would in deployment.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    if cfg.repetitions == 0 {
        return Err(Error::InvalidArgument(
            "repetitions must be at least 1".into(),
        ));
    }
    let mut search = default_search();
    search.extend(&cfg.kernel_widths);
    search.sort_unstable();
    search.dedup();
    let decoder = DecoderConfig {
        search,
        tau: cfg.tau,
        parallel_slices: false,
        ..DecoderConfig::default()
    };
    let mut rows = Vec::with_capacity(cfg.kernel_widths.len());
    for &t in &cfg.kernel_widths {
        let mut samples = Vec::with_capacity(cfg.repetitions);
        // Repetition 0 is an untimed warm-up, so rows report the steady
        // per-frame cost of a running stream rather than first-touch costs.
        for rep in 0..=cfg.repetitions as u64 {
            let seed = frame_seed(cfg.seed ^ t as u64, rep);
            let latent = Frame::gray(random_latent(cfg.height, cfg.width, seed), rep);
            let kernels = generate_coprime_pair(t, seed, DEFAULT_MAX_RETRIES)?;
            let pair = encode_frame(&latent, &kernels)?;
            let timings = decode_frame(&pair, &decoder)?.stage_timings;
            if rep > 0 {
                samples.push(timings);
            }
        }
        rows.push(BenchRow {
            kernel_width: t,
            timings: StageTimings::mean(&samples),
        });
    }
    Ok(BenchReport {
        rows,
        width: cfg.width,
        height: cfg.height,
        repetitions: cfg.repetitions,
    })
}
