//! Periodic Fourier grids for the 3-D pseudospectral representation.
//!
//! The physical domain is the cube of side `2*pi*box_scale` with periodic
//! boundary; the frequency lattice is `Z^3 / box_scale`. The 2/3 rule keeps
//! exactly the modes whose per-axis index magnitude is below `n/3`.

use std::sync::Arc;

use crate::error::{LabError, Result};
use crate::fft::Fft3;

pub struct FourierGrid {
    n: usize,
    box_scale: f64,
    /// per-axis frequency for index i in FFT order
    freqs: Vec<f64>,
    /// per-axis dealias keep-flag in FFT order
    keep: Vec<bool>,
    fft: Fft3,
}

impl std::fmt::Debug for FourierGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FourierGrid")
            .field("n", &self.n)
            .field("box_scale", &self.box_scale)
            .finish()
    }
}

impl FourierGrid {
    /// `n` points per axis (even, >= 8), box scale `box_scale` > 0.
    pub fn new(n: usize, box_scale: f64) -> Result<Arc<Self>> {
        if n % 2 != 0 || n < 8 {
            return Err(LabError::Grid(format!(
                "n must be even and >= 8, got {n}"
            )));
        }
        if !(box_scale > 0.0) || !box_scale.is_finite() {
            return Err(LabError::Grid(format!(
                "box_scale must be positive and finite, got {box_scale}"
            )));
        }
        let signed = |i: usize| -> i64 {
            if i < n / 2 {
                i as i64
            } else {
                i as i64 - n as i64
            }
        };
        let freqs = (0..n).map(|i| signed(i) as f64 / box_scale).collect();
        // 2/3 rule: keep |index| < n/3
        let keep = (0..n).map(|i| 3 * signed(i).unsigned_abs() < n as u64).collect();
        Ok(Arc::new(FourierGrid {
            n,
            box_scale,
            freqs,
            keep,
            fft: Fft3::new(n),
        }))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn box_scale(&self) -> f64 {
        self.box_scale
    }

    /// Side length of the physical box, `2*pi*box_scale`.
    pub fn box_side(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.box_scale
    }

    /// Volume of the physical box (the Plancherel cell volume).
    pub fn volume(&self) -> f64 {
        self.box_side().powi(3)
    }

    pub fn num_modes(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Signed integer index along one axis for storage index `i`.
    pub fn signed_index(&self, i: usize) -> i64 {
        if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        }
    }

    /// Frequency component along one axis for storage index `i`.
    pub fn freq(&self, i: usize) -> f64 {
        self.freqs[i]
    }

    /// Frequency spacing per axis, `1/box_scale`.
    pub fn freq_spacing(&self) -> f64 {
        1.0 / self.box_scale
    }

    /// Largest |xi| on the lattice (corner mode).
    pub fn nyquist_radius(&self) -> f64 {
        (3.0f64).sqrt() * (self.n as f64 / 2.0) / self.box_scale
    }

    pub fn dealias_keep(&self, i: usize) -> bool {
        self.keep[i]
    }

    /// Physical grid coordinate along one axis.
    pub fn coord(&self, i: usize) -> f64 {
        self.box_side() * i as f64 / self.n as f64
    }

    /// Physical coordinate folded into [-side/2, side/2) (symmetric representative).
    pub fn coord_centered(&self, i: usize) -> f64 {
        let side = self.box_side();
        let x = self.coord(i);
        if x >= side / 2.0 {
            x - side
        } else {
            x
        }
    }

    pub(crate) fn fft(&self) -> &Fft3 {
        &self.fft
    }

    /// Visit every mode: `f(linear_index, [xi_x, xi_y, xi_z])`.
    pub fn for_each_mode(&self, mut f: impl FnMut(usize, [f64; 3])) {
        let n = self.n;
        let mut idx = 0;
        for ix in 0..n {
            let fx = self.freqs[ix];
            for iy in 0..n {
                let fy = self.freqs[iy];
                for iz in 0..n {
                    f(idx, [fx, fy, self.freqs[iz]]);
                    idx += 1;
                }
            }
        }
    }

    /// True if the mode passes the 2/3-rule mask on every axis.
    pub fn mode_kept(&self, lin: usize) -> bool {
        let n = self.n;
        let iz = lin % n;
        let iy = (lin / n) % n;
        let ix = lin / (n * n);
        self.keep[ix] && self.keep[iy] && self.keep[iz]
    }
}
