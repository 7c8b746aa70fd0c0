use crate::error::{Error, Result};
use crate::frame::Frame;

/// Peak signal-to-noise ratio in dB with peak 1.0, pooled over all channels.
///
/// Identical frames give `f64::INFINITY`.
pub fn psnr(a: &Frame, b: &Frame) -> Result<f64> {
    if a.dims() != b.dims() || a.channels() != b.channels() {
        return Err(Error::DimMismatch(format!(
            "{:?}x{} vs {:?}x{}",
            a.dims(),
            a.channels(),
            b.dims(),
            b.channels()
        )));
    }
    let (mut sum, mut n) = (0.0, 0usize);
    for (p, q) in a.planes().iter().zip(b.planes()) {
        for (x, y) in p.samples().iter().zip(q.samples()) {
            sum += (x - y) * (x - y);
        }
        n += p.samples().len();
    }
    let mse = sum / n as f64;
    Ok(if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * mse.recip().log10()
    })
}
