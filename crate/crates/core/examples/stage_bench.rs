//! Per-stage decode timings for a few kernel widths.
//!
//! `cargo run --release --example stage_bench -- [width height reps]`

use coprime_blur::bench::{run_bench, BenchConfig};

fn main() -> coprime_blur::Result<()> {
    let args: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let cfg = BenchConfig {
        width: args.first().copied().unwrap_or(640),
        height: args.get(1).copied().unwrap_or(480),
        repetitions: args.get(2).copied().unwrap_or(1),
        ..BenchConfig::default()
    };
    let report = run_bench(&cfg)?;
    report.write_csv(std::io::stdout()).expect("stdout");
    for row in &report.rows {
        println!(
            "t={:>2}: largest stage {}",
            row.kernel_width,
            row.timings.largest_stage()
        );
    }
    Ok(())
}
