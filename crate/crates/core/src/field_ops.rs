//! A common surface over the 3-D and radial field representations, plus
//! space-time mixed norms of sampled evolutions.

use num_complex::Complex64;

use crate::bands::{lp_project, lp_project_radial, DyadicBand};
use crate::error::{LabError, Result};
use crate::field::SpectralField;
use crate::radial::RadialField;

/// Field operations every solver / diagnostic path needs. Implemented by
/// [`SpectralField`] (periodic 3-D grid) and [`RadialField`] (radial grid).
pub trait LabField: Clone + Send + Sync {
    fn l2_norm(&self) -> f64;
    fn sobolev_norm(&self, s: f64) -> f64;
    fn lq_norm(&self, q: f64) -> f64;
    fn linf_norm(&self, refine: bool) -> f64;
    fn evolve_free(&self, t: f64, m: f64) -> Self;
    fn nonlinearity(&self, mu0: f64) -> Self;
    fn conserved(&self, m: f64, mu0: f64, coupling: f64) -> (f64, f64);
    fn bracket_apply(&self, m: f64) -> Self;
    fn scaled(&self, c: Complex64) -> Self;
    fn add_scaled(&mut self, other: &Self, c: Complex64);
    fn sub(&self, other: &Self) -> Self;
    fn zeros_like(&self) -> Self;
    fn dealias(&mut self);
    fn is_finite(&self) -> bool;
    fn lp_project(&self, band: &DyadicBand) -> Self;
    /// Largest frequency magnitude representable on the field's grid.
    fn nyquist_radius(&self) -> f64;
}

impl LabField for SpectralField {
    fn l2_norm(&self) -> f64 {
        SpectralField::l2_norm(self)
    }
    fn sobolev_norm(&self, s: f64) -> f64 {
        SpectralField::sobolev_norm(self, s)
    }
    fn lq_norm(&self, q: f64) -> f64 {
        SpectralField::lq_norm(self, q)
    }
    fn linf_norm(&self, refine: bool) -> f64 {
        SpectralField::linf_norm(self, refine)
    }
    fn evolve_free(&self, t: f64, m: f64) -> Self {
        SpectralField::evolve_free(self, t, m)
    }
    fn nonlinearity(&self, mu0: f64) -> Self {
        SpectralField::nonlinearity(self, mu0)
    }
    fn conserved(&self, m: f64, mu0: f64, coupling: f64) -> (f64, f64) {
        SpectralField::conserved(self, m, mu0, coupling)
    }
    fn bracket_apply(&self, m: f64) -> Self {
        SpectralField::bracket_apply(self, m)
    }
    fn scaled(&self, c: Complex64) -> Self {
        SpectralField::scaled(self, c)
    }
    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        SpectralField::add_scaled(self, other, c)
    }
    fn sub(&self, other: &Self) -> Self {
        SpectralField::sub(self, other)
    }
    fn zeros_like(&self) -> Self {
        SpectralField::zeros(self.grid().clone())
    }
    fn dealias(&mut self) {
        SpectralField::dealias(self)
    }
    fn is_finite(&self) -> bool {
        SpectralField::is_finite(self)
    }
    fn lp_project(&self, band: &DyadicBand) -> Self {
        lp_project(self, band)
    }
    fn nyquist_radius(&self) -> f64 {
        self.grid().nyquist_radius()
    }
}

impl LabField for RadialField {
    fn l2_norm(&self) -> f64 {
        RadialField::l2_norm(self)
    }
    fn sobolev_norm(&self, s: f64) -> f64 {
        RadialField::sobolev_norm(self, s)
    }
    fn lq_norm(&self, q: f64) -> f64 {
        RadialField::lq_norm(self, q)
    }
    fn linf_norm(&self, refine: bool) -> f64 {
        RadialField::linf_norm(self, refine)
    }
    fn evolve_free(&self, t: f64, m: f64) -> Self {
        RadialField::evolve_free(self, t, m)
    }
    fn nonlinearity(&self, mu0: f64) -> Self {
        RadialField::nonlinearity(self, mu0)
    }
    fn conserved(&self, m: f64, mu0: f64, coupling: f64) -> (f64, f64) {
        RadialField::conserved(self, m, mu0, coupling)
    }
    fn bracket_apply(&self, m: f64) -> Self {
        RadialField::bracket_apply(self, m)
    }
    fn scaled(&self, c: Complex64) -> Self {
        RadialField::scaled(self, c)
    }
    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        RadialField::add_scaled(self, other, c)
    }
    fn sub(&self, other: &Self) -> Self {
        RadialField::sub(self, other)
    }
    fn zeros_like(&self) -> Self {
        RadialField::zeros(self.grid().clone())
    }
    fn dealias(&mut self) {
        RadialField::dealias(self)
    }
    fn is_finite(&self) -> bool {
        RadialField::is_finite(self)
    }
    fn lp_project(&self, band: &DyadicBand) -> Self {
        lp_project_radial(self, band)
    }
    fn nyquist_radius(&self) -> f64 {
        self.grid().nyquist_rho()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceExp {
    L2,
    L6,
    LInf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimeExp {
    L2,
    L6,
    LInf,
}

/// Mixed space-time norm `L^p_t L^q_x` of uniformly spaced samples: spatial
/// norms by grid quadrature (grid max for q = infinity), temporal norm by the
/// trapezoid rule over the window.
pub fn mixed_norm<F: LabField>(
    samples: &[F],
    dt: f64,
    p: TimeExp,
    q: SpaceExp,
    refine: bool,
) -> Result<f64> {
    if samples.len() < 2 {
        return Err(LabError::TooFewSamples {
            need: 2,
            got: samples.len(),
        });
    }
    let spatial: Vec<f64> = samples
        .iter()
        .map(|f| match q {
            SpaceExp::L2 => f.l2_norm(),
            SpaceExp::L6 => f.lq_norm(6.0),
            SpaceExp::LInf => f.linf_norm(refine),
        })
        .collect();
    Ok(temporal_norm(&spatial, dt, p))
}

fn temporal_norm(values: &[f64], dt: f64, p: TimeExp) -> f64 {
    let power = match p {
        TimeExp::L2 => 2.0,
        TimeExp::L6 => 6.0,
        TimeExp::LInf => {
            return values.iter().cloned().fold(0.0, f64::max);
        }
    };
    let mut acc = 0.0;
    for (i, v) in values.iter().enumerate() {
        let w = if i == 0 || i == values.len() - 1 {
            0.5
        } else {
            1.0
        };
        acc += w * v.powf(power);
    }
    (acc * dt).powf(1.0 / power)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::FourierGrid;

    #[test]
    fn zero_trajectory_and_constant_field() {
        let g = FourierGrid::new(8, 1.0).unwrap();
        let zero = SpectralField::zeros(g.clone());
        let samples = vec![zero.clone(), zero.clone(), zero];
        assert_eq!(
            mixed_norm(&samples, 0.1, TimeExp::L2, SpaceExp::L2, false).unwrap(),
            0.0
        );

        // constant-in-time field over window T: L2_t L2_x = ||c|| sqrt(T)
        let c = SpectralField::single_mode(g, [1, 0, 0], Complex64::new(0.3, 0.4));
        let dt = 0.25f64;
        let samples: Vec<_> = (0..9).map(|_| c.clone()).collect();
        let t_total = dt * 8.0;
        let want = c.l2_norm() * t_total.sqrt();
        let got = mixed_norm(&samples, dt, TimeExp::L2, SpaceExp::L2, false).unwrap();
        assert!((got - want).abs() < 1e-12 * want);
    }

    #[test]
    fn free_plane_wave_l2t_linf() {
        // |exp(i theta)| == 1, so L2_t L^inf_x = amplitude * sqrt(T)
        let g = FourierGrid::new(8, 1.0).unwrap();
        let amp = 0.7;
        let f = SpectralField::single_mode(g, [2, 1, 0], Complex64::new(amp, 0.0));
        let dt = 0.125f64;
        let samples: Vec<_> = (0..17).map(|j| f.evolve_free(dt * j as f64, 1.0)).collect();
        let t_total = dt * 16.0;
        let want = amp * t_total.sqrt();
        let got = mixed_norm(&samples, dt, TimeExp::L2, SpaceExp::LInf, false).unwrap();
        assert!((got - want).abs() < 1e-12 * want, "{got} vs {want}");
    }

    #[test]
    fn too_few_samples_rejected() {
        let g = FourierGrid::new(8, 1.0).unwrap();
        let one = vec![SpectralField::zeros(g)];
        assert!(mixed_norm(&one, 0.1, TimeExp::L2, SpaceExp::L2, false).is_err());
    }
}
