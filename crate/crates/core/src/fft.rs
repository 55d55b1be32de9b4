//! FFT plumbing: 3-D transforms on flattened cubes and the DST-I used by
//! the radial representation.
//!
//! Conventions (fixed across the crate):
//! - `forward` maps physical samples to Fourier coefficients and includes the
//!   1/N^3 normalization, so `u(x_j) = sum_k c_k exp(i xi_k . x_j)` holds exactly.
//! - `inverse` maps coefficients back to physical samples (no extra factor).

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Planned 3-D FFT on an `n^3` cube stored in row-major order
/// (`idx = (ix*n + iy)*n + iz`, z fastest).
pub struct Fft3 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Fft3 {
            n,
            fwd: planner.plan_fft_forward(n),
            inv: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Physical samples -> coefficients (normalized by 1/n^3).
    pub fn forward(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.transform(data, true);
        let scale = 1.0 / (self.n as f64).powi(3);
        for c in data.iter_mut() {
            *c *= scale;
        }
    }

    /// Coefficients -> physical samples.
    pub fn inverse(&self, data: &mut [Complex64]) {
        assert_eq!(data.len(), self.len());
        self.transform(data, false);
    }

    fn transform(&self, data: &mut [Complex64], forward: bool) {
        let n = self.n;
        let fft = if forward { &self.fwd } else { &self.inv };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        let mut buf = vec![Complex64::default(); data.len()];

        // z-axis: n^2 contiguous lines in one batched call
        fft.process_with_scratch(data, &mut scratch);
        // y-axis: swap (y, z) within each x-slab, batch, swap back
        for ix in 0..n {
            let slab = &mut data[ix * n * n..(ix + 1) * n * n];
            transpose_square(slab, &mut buf[..n * n], n);
            fft.process_with_scratch(slab, &mut scratch);
            transpose_square(slab, &mut buf[..n * n], n);
        }
        // x-axis: full (x, z) swap, batch, swap back
        transpose_outer(data, &mut buf, n);
        fft.process_with_scratch(data, &mut scratch);
        transpose_outer(data, &mut buf, n);
    }
}

/// Tiled in-place square transpose through a scratch buffer.
fn transpose_square(data: &mut [Complex64], buf: &mut [Complex64], n: usize) {
    const TILE: usize = 16;
    for bi in (0..n).step_by(TILE) {
        for bj in (0..n).step_by(TILE) {
            for i in bi..(bi + TILE).min(n) {
                for j in bj..(bj + TILE).min(n) {
                    buf[j * n + i] = data[i * n + j];
                }
            }
        }
    }
    data.copy_from_slice(&buf[..data.len()]);
}

/// Swap the outer and inner axes of an `n^3` cube: `(i, j, k) -> (k, j, i)`.
fn transpose_outer(data: &mut [Complex64], buf: &mut [Complex64], n: usize) {
    const TILE: usize = 8;
    let n2 = n * n;
    for bi in (0..n).step_by(TILE) {
        for bk in (0..n).step_by(TILE) {
            for j in 0..n {
                for i in bi..(bi + TILE).min(n) {
                    for k in bk..(bk + TILE).min(n) {
                        buf[k * n2 + j * n + i] = data[i * n2 + j * n + k];
                    }
                }
            }
        }
    }
    data.copy_from_slice(buf);
}

/// Planned DST-I of length `m - 1` (interior nodes of an m-panel grid),
/// realized through a complex FFT of the odd extension of length `2m`.
///
/// Unnormalized pair: `S_k = sum_{j=1}^{m-1} w_j sin(pi j k / m)` and
/// `w_j = (2/m) sum_k S_k sin(pi j k / m)`.
pub struct Dst1 {
    m: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl Dst1 {
    /// `m` is the panel count; the transform acts on `m - 1` interior values.
    pub fn new(m: usize) -> Self {
        assert!(m >= 2);
        let mut planner = FftPlanner::new();
        Dst1 {
            m,
            fft: planner.plan_fft_forward(2 * m),
        }
    }

    pub fn modes(&self) -> usize {
        self.m - 1
    }

    /// In-place unnormalized DST-I of `vals` (length `m - 1`).
    pub fn process(&self, vals: &mut [Complex64]) {
        let m = self.m;
        assert_eq!(vals.len(), m - 1);
        let mut buf = vec![Complex64::default(); 2 * m];
        buf[0] = Complex64::default();
        buf[m] = Complex64::default();
        for j in 1..m {
            buf[j] = vals[j - 1];
            buf[2 * m - j] = -vals[j - 1];
        }
        let mut scratch = vec![Complex64::default(); self.fft.get_inplace_scratch_len()];
        self.fft.process_with_scratch(&mut buf, &mut scratch);
        // Y_k = -2i S_k for the odd extension, hence S_k = (i/2) Y_k.
        let half_i = Complex64::new(0.0, 0.5);
        for k in 1..m {
            vals[k - 1] = half_i * buf[k];
        }
    }

    /// Inverse of [`Dst1::process`]: applies the transform and the 2/m factor.
    pub fn process_inverse(&self, vals: &mut [Complex64]) {
        self.process(vals);
        let scale = 2.0 / self.m as f64;
        for v in vals.iter_mut() {
            *v *= scale;
        }
    }
}
