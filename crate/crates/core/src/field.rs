//! Complex fields on a periodic 3-D grid, stored by Fourier coefficients.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::grid::FourierGrid;
use crate::symbols::{bracket_m, japanese_bracket, yukawa_multiplier};

/// A complex scalar field `u` on a [`FourierGrid`], stored as the coefficients
/// `c_k` of `u(x) = sum_k c_k exp(i xi_k . x)`.
#[derive(Clone)]
pub struct SpectralField {
    grid: Arc<FourierGrid>,
    coeffs: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("l2", &self.l2_norm())
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: Arc<FourierGrid>) -> Self {
        let coeffs = vec![Complex64::default(); grid.num_modes()];
        SpectralField { grid, coeffs }
    }

    pub fn from_coeffs(grid: Arc<FourierGrid>, coeffs: Vec<Complex64>) -> Self {
        assert_eq!(coeffs.len(), grid.num_modes());
        SpectralField { grid, coeffs }
    }

    /// Build from physical samples on the grid (row-major, z fastest).
    pub fn from_physical(grid: Arc<FourierGrid>, mut samples: Vec<Complex64>) -> Self {
        assert_eq!(samples.len(), grid.num_modes());
        grid.fft().forward(&mut samples);
        SpectralField {
            grid,
            coeffs: samples,
        }
    }

    /// A single plane-wave mode `amplitude * exp(i (k/L) . x)`.
    pub fn single_mode(grid: Arc<FourierGrid>, mode: [i64; 3], amplitude: Complex64) -> Self {
        let n = grid.n() as i64;
        let wrap = |k: i64| -> usize { k.rem_euclid(n) as usize };
        let lin = (wrap(mode[0]) * grid.n() + wrap(mode[1])) * grid.n() + wrap(mode[2]);
        let mut f = Self::zeros(grid);
        f.coeffs[lin] = amplitude;
        f
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Physical samples of the field on the grid.
    pub fn physical(&self) -> Vec<Complex64> {
        let mut data = self.coeffs.clone();
        self.grid.fft().inverse(&mut data);
        data
    }

    /// Physical samples on the 2x zero-padded refinement of the grid.
    pub fn physical_refined(&self) -> Vec<Complex64> {
        let n = self.grid.n();
        let n2 = 2 * n;
        let fine = crate::fft::Fft3::new(n2);
        let mut data = vec![Complex64::default(); n2 * n2 * n2];
        let half = n / 2;
        for ix in 0..n {
            let jx = if ix < half { ix } else { ix + n };
            for iy in 0..n {
                let jy = if iy < half { iy } else { iy + n };
                for iz in 0..n {
                    let jz = if iz < half { iz } else { iz + n };
                    data[(jx * n2 + jy) * n2 + jz] = self.coeffs[(ix * n + iy) * n + iz];
                }
            }
        }
        fine.inverse(&mut data);
        data
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs
            .iter()
            .all(|c| c.re.is_finite() && c.im.is_finite())
    }

    // ---- algebra ----------------------------------------------------------

    pub fn scale(&mut self, c: Complex64) {
        for v in &mut self.coeffs {
            *v *= c;
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += c * b;
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        SpectralField {
            grid: self.grid.clone(),
            coeffs,
        }
    }

    /// L2 inner product `<u, v> = integral u * conj(v) dx`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        let sum: Complex64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a * b.conj())
            .sum();
        sum * self.grid.volume()
    }

    // ---- norms -------------------------------------------------------------

    /// L2 norm by Plancherel.
    pub fn l2_norm(&self) -> f64 {
        let s: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (s * self.grid.volume()).sqrt()
    }

    /// Inhomogeneous Sobolev norm with weight `(1+|xi|^2)^(s/2)`; `s = 0`
    /// reproduces the L2 norm.
    pub fn sobolev_norm(&self, s: f64) -> f64 {
        let mut acc = 0.0;
        self.grid.for_each_mode(|lin, xi| {
            let w = japanese_bracket(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]);
            acc += w.powf(2.0 * s) * self.coeffs[lin].norm_sqr();
        });
        (acc * self.grid.volume()).sqrt()
    }

    /// L2 norm of the physical samples by grid quadrature (cross-check path).
    pub fn l2_norm_quadrature(&self) -> f64 {
        let phys = self.physical();
        let h = self.grid.box_side() / self.grid.n() as f64;
        let s: f64 = phys.iter().map(|c| c.norm_sqr()).sum();
        (s * h * h * h).sqrt()
    }

    /// Spatial L^q norm by grid quadrature (q finite).
    pub fn lq_norm(&self, q: f64) -> f64 {
        let phys = self.physical();
        let h = self.grid.box_side() / self.grid.n() as f64;
        // |c|^q via integer powers of |c|^2 for the common even exponents
        let s: f64 = if q == 2.0 {
            phys.iter().map(|c| c.norm_sqr()).sum()
        } else if q == 4.0 {
            phys.iter().map(|c| c.norm_sqr().powi(2)).sum()
        } else if q == 6.0 {
            phys.iter().map(|c| c.norm_sqr().powi(3)).sum()
        } else {
            phys.iter().map(|c| c.norm().powf(q)).sum()
        };
        (s * h * h * h).powf(1.0 / q)
    }

    /// Max of |u| over grid points; `refine` evaluates on the 2x zero-padded grid.
    pub fn linf_norm(&self, refine: bool) -> f64 {
        let phys = if refine {
            self.physical_refined()
        } else {
            self.physical()
        };
        phys.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    // ---- multipliers -------------------------------------------------------

    /// Pointwise Fourier multiplier. Errors if the symbol is non-finite at any
    /// mode retained by the dealias mask.
    pub fn apply_symbol(&self, symbol: impl Fn([f64; 3]) -> Complex64) -> Result<Self> {
        let mut out = self.clone();
        let mut bad: Option<f64> = None;
        self.grid.for_each_mode(|lin, xi| {
            let v = symbol(xi);
            if !(v.re.is_finite() && v.im.is_finite()) && self.grid.mode_kept(lin) {
                let r = (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt();
                bad.get_or_insert(r);
            }
            out.coeffs[lin] *= v;
        });
        match bad {
            Some(ximag) => Err(LabError::NonFiniteSymbol { ximag }),
            None => Ok(out),
        }
    }

    /// Infallible radial multiplier for symbols known to be finite; the
    /// argument is the frequency magnitude |xi|.
    pub(crate) fn apply_real_symbol(&self, symbol: impl Fn(f64) -> f64) -> Self {
        let mut out = self.clone();
        self.grid.for_each_mode(|lin, xi| {
            out.coeffs[lin] *=
                symbol((xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt());
        });
        out
    }

    /// Free propagation: multiplies each mode by `exp(-i t sqrt(m^2+|xi|^2))`.
    /// Negative `t` gives the inverse group element.
    pub fn evolve_free(&self, t: f64, m: f64) -> Self {
        assert!(m >= 0.0, "mass must be nonnegative");
        let mut out = self.clone();
        self.grid.for_each_mode(|lin, xi| {
            let w = bracket_m(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], m);
            let phase = Complex64::from_polar(1.0, -t * w);
            out.coeffs[lin] *= phase;
        });
        out
    }

    /// `sqrt(m^2 - Laplacian) u` via the diagonal symbol.
    pub fn bracket_apply(&self, m: f64) -> Self {
        self.apply_real_symbol(|ximag| bracket_m(ximag * ximag, m))
    }

    /// Zero out the modes discarded by the 2/3 rule.
    pub fn dealias(&mut self) {
        for lin in 0..self.coeffs.len() {
            if !self.grid.mode_kept(lin) {
                self.coeffs[lin] = Complex64::default();
            }
        }
    }

    /// Convolution with the Yukawa/Coulomb potential: multiplier
    /// `4 pi / (|xi|^2 + mu0^2)` (zero mode gauged to 0 when `mu0 = 0`).
    pub fn yukawa_convolve(&self, mu0: f64) -> Result<Self> {
        if mu0 < 0.0 {
            return Err(LabError::parameter("mu0", "must be nonnegative"));
        }
        Ok(self.apply_real_symbol(|ximag| yukawa_multiplier(ximag * ximag, mu0)))
    }

    /// The Hartree nonlinearity `(V * |u|^2) u` with the 2/3 rule applied to
    /// both products.
    pub fn nonlinearity(&self, mu0: f64) -> Self {
        let phys = self.physical();
        let density: Vec<Complex64> = phys
            .iter()
            .map(|c| Complex64::new(c.norm_sqr(), 0.0))
            .collect();
        let mut dens_field = SpectralField::from_physical(self.grid.clone(), density);
        dens_field.dealias();
        let potential = dens_field
            .apply_real_symbol(|ximag| yukawa_multiplier(ximag * ximag, mu0))
            .physical();
        let product: Vec<Complex64> = potential
            .iter()
            .zip(&phys)
            .map(|(v, u)| Complex64::new(v.re, 0.0) * u)
            .collect();
        let mut out = SpectralField::from_physical(self.grid.clone(), product);
        out.dealias();
        out
    }

    /// Mass and energy of the boson star flow:
    /// `M = integral |u|^2 dx`,
    /// `E = 1/2 integral conj(u) sqrt(m^2-Lap) u dx - coupling/4 integral (V*|u|^2)|u|^2 dx`.
    ///
    /// The sign of the quartic term is the one conserved by
    /// `-i du/dt + sqrt(m^2-Lap) u = coupling (V*|u|^2) u`.
    pub fn conserved(&self, m: f64, mu0: f64, coupling: f64) -> (f64, f64) {
        let mut mass = 0.0;
        let mut kinetic = 0.0;
        self.grid.for_each_mode(|lin, xi| {
            let p = self.coeffs[lin].norm_sqr();
            mass += p;
            kinetic += bracket_m(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], m) * p;
        });
        let vol = self.grid.volume();
        mass *= vol;
        kinetic *= 0.5 * vol;

        let phys = self.physical();
        let density: Vec<Complex64> = phys
            .iter()
            .map(|c| Complex64::new(c.norm_sqr(), 0.0))
            .collect();
        let dens_field = SpectralField::from_physical(self.grid.clone(), density.clone());
        let potential = dens_field
            .apply_real_symbol(|ximag| yukawa_multiplier(ximag * ximag, mu0))
            .physical();
        let h = self.grid.box_side() / self.grid.n() as f64;
        let quartic: f64 = potential
            .iter()
            .zip(&density)
            .map(|(v, d)| v.re * d.re)
            .sum::<f64>()
            * h
            * h
            * h;
        (mass, kinetic - 0.25 * coupling * quartic)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Arc<FourierGrid> {
        FourierGrid::new(16, 1.0).unwrap()
    }

    fn random_field(grid: &Arc<FourierGrid>, seed: u64) -> SpectralField {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coeffs = (0..grid.num_modes())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        SpectralField::from_coeffs(grid.clone(), coeffs)
    }

    #[test]
    fn plancherel_matches_quadrature() {
        let f = random_field(&grid(), 1);
        let a = f.l2_norm();
        let b = f.l2_norm_quadrature();
        assert!((a - b).abs() <= 1e-12 * a, "{a} vs {b}");
    }

    #[test]
    fn sobolev_zero_is_l2() {
        let f = random_field(&grid(), 2);
        assert!((f.sobolev_norm(0.0) - f.l2_norm()).abs() <= 1e-12 * f.l2_norm());
    }

    #[test]
    fn sobolev_single_modes() {
        let g = grid();
        let vol_sqrt = g.volume().sqrt();
        let amp = 0.7;
        let f = SpectralField::single_mode(g.clone(), [0, 0, 0], Complex64::new(amp, 0.0));
        for s in [-1.0, 0.5, 2.0] {
            assert!((f.sobolev_norm(s) - amp * vol_sqrt).abs() < 1e-12);
        }
        // |xi| = sqrt(3): weight (1+3)^(1/2) = 2 at s = 1
        let f = SpectralField::single_mode(g, [1, 1, 1], Complex64::new(amp, 0.0));
        assert!((f.sobolev_norm(1.0) - 2.0 * amp * vol_sqrt).abs() < 1e-12);
    }

    #[test]
    fn apply_symbol_commutes_and_identity() {
        let f = random_field(&grid(), 3);
        let id = f.apply_symbol(|_| Complex64::new(1.0, 0.0)).unwrap();
        assert!(id.sub(&f).l2_norm() < 1e-14);

        let s1 = |xi: [f64; 3]| Complex64::new((xi[0] + 0.3 * xi[1]).cos(), xi[2].sin());
        let s2 = |xi: [f64; 3]| Complex64::new(1.0 / (1.0 + xi[1] * xi[1]), 0.1 * xi[0]);
        let a = f.apply_symbol(s1).unwrap().apply_symbol(s2).unwrap();
        let b = f.apply_symbol(s2).unwrap().apply_symbol(s1).unwrap();
        assert!(a.sub(&b).l2_norm() <= 1e-14 * a.l2_norm().max(1.0));
    }

    #[test]
    fn apply_symbol_rejects_non_finite_on_kept_mode() {
        let f = random_field(&grid(), 4);
        let res = f.apply_symbol(|xi| {
            let r2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
            Complex64::new(1.0 / r2, 0.0) // infinite at xi = 0
        });
        assert!(matches!(res, Err(LabError::NonFiniteSymbol { .. })));
    }

    #[test]
    fn bracket_zero_mass_kills_zero_mode() {
        let g = grid();
        let f = SpectralField::single_mode(g, [0, 0, 0], Complex64::new(1.0, 0.0));
        let out = f.bracket_apply(0.0);
        assert!(out.l2_norm() < 1e-15);
    }

    #[test]
    fn yukawa_constant_field() {
        // constant c: output is 4*pi*c/mu0^2 (zero mode multiplier)
        let g = grid();
        let c = Complex64::new(0.4, -0.2);
        let f = SpectralField::single_mode(g, [0, 0, 0], c);
        let out = f.yukawa_convolve(1.0).unwrap();
        let want = 4.0 * std::f64::consts::PI * c;
        assert!((out.coeffs()[0] - want).norm() < 1e-12);
    }

    #[test]
    fn yukawa_plane_wave_mode() {
        let g = grid();
        let f = SpectralField::single_mode(g.clone(), [1, 2, 0], Complex64::new(1.0, 0.0));
        let out = f.yukawa_convolve(2.0).unwrap();
        let k_sq = 5.0;
        let want = 4.0 * std::f64::consts::PI / (k_sq + 4.0);
        let lin = (g.n() + 2) * g.n(); // mode [1, 2, 0]
        assert!((out.coeffs()[lin].re - want).abs() < 1e-12);
    }

    #[test]
    fn yukawa_norm_monotone_in_mu0() {
        let f = random_field(&grid(), 5);
        let mut last = f64::INFINITY;
        for mu0 in [0.5, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let n = f.yukawa_convolve(mu0).unwrap().l2_norm();
            assert!(n < last, "not monotone at mu0 = {mu0}");
            last = n;
        }
        assert!(f.yukawa_convolve(-1.0).is_err());
    }

    #[test]
    fn nonlinearity_gauge_covariant() {
        let mut f = random_field(&grid(), 6);
        f.dealias();
        f.scale(Complex64::new(0.1, 0.0));
        let theta = std::f64::consts::PI / 3.0;
        let phase = Complex64::from_polar(1.0, theta);
        let a = f.nonlinearity(1.0).scaled(phase);
        let b = f.scaled(phase).nonlinearity(1.0);
        let denom = a.l2_norm().max(1e-300);
        assert!(a.sub(&b).l2_norm() <= 1e-14 * denom.max(1.0));
    }

    #[test]
    fn nonlinearity_constant_closed_form() {
        // u = c constant, mu0 = 1: (V*|c|^2) c = 4 pi |c|^2 c
        let g = grid();
        let c = Complex64::new(0.3, 0.1);
        let f = SpectralField::single_mode(g, [0, 0, 0], c);
        let out = f.nonlinearity(1.0);
        let want = 4.0 * std::f64::consts::PI * c.norm_sqr() * c;
        assert!((out.coeffs()[0] - want).norm() < 1e-12);
        let zero = SpectralField::zeros(f.grid().clone()).nonlinearity(1.0);
        assert!(zero.l2_norm() == 0.0);
    }

    #[test]
    fn conserved_plane_wave_closed_form() {
        let g = grid();
        let amp = 0.2;
        let mode = [2i64, 0, 1];
        let m = 1.5;
        let coupling = 1.0;
        let f = SpectralField::single_mode(g.clone(), mode, Complex64::new(amp, 0.0));
        let (mass, energy) = f.conserved(m, 1.0, coupling);
        let vol = g.volume();
        let k_sq = 5.0;
        let want_mass = amp * amp * vol;
        let quartic = 4.0 * std::f64::consts::PI * amp.powi(4) * vol;
        let want_energy =
            0.5 * bracket_m(k_sq, m) * amp * amp * vol - 0.25 * coupling * quartic;
        assert!((mass - want_mass).abs() < 1e-10 * want_mass);
        assert!((energy - want_energy).abs() < 1e-10 * want_energy.abs());
    }

    #[test]
    fn linf_refinement_bounds_grid_max() {
        let f = random_field(&grid(), 9);
        let coarse = f.linf_norm(false);
        let fine = f.linf_norm(true);
        assert!(fine >= coarse - 1e-12);
    }
}
