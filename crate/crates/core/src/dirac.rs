//! The Dirac-Hartree system: spinor fields, the `P_+/P_-` frequency-wise
//! projections, and evolution of the coupled half-wave pair
//!
//! `(-i d_t + <D>_m) psi_+ = P_+(D) [lambda (V*|psi|^2) psi]`
//! `(-i d_t - <D>_m) psi_- = P_-(D) [lambda (V*|psi|^2) psi]`
//!
//! with `psi = psi_+ + psi_-`. The pair type implements [`LabField`], so the
//! scalar exponential integrators drive this system unchanged: its free flow
//! applies `exp(-+ i t <xi>_m)` to the two halves and its "nonlinearity" is
//! the projected Hartree term of the reconstructed spinor.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bands::DyadicBand;
use crate::error::{LabError, Result};
use crate::field::SpectralField;
use crate::field_ops::LabField;
use crate::grid::FourierGrid;
use crate::propagator::InitialDataSpec;
use crate::symbols::{bracket_m, yukawa_multiplier};

pub type Mat4 = [[Complex64; 4]; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// The Dirac matrices in the standard representation: `alpha^i` carries the
/// Pauli matrix `sigma_i` on the off-diagonal blocks, `beta = diag(1,1,-1,-1)`.
pub struct DiracMatrices;

impl DiracMatrices {
    pub fn alpha(i: usize) -> Mat4 {
        let s = Self::pauli(i);
        let mut m = [[ZERO; 4]; 4];
        for r in 0..2 {
            for c in 0..2 {
                m[r][c + 2] = s[r][c];
                m[r + 2][c] = s[r][c];
            }
        }
        m
    }

    pub fn beta() -> Mat4 {
        let mut m = [[ZERO; 4]; 4];
        m[0][0] = ONE;
        m[1][1] = ONE;
        m[2][2] = -ONE;
        m[3][3] = -ONE;
        m
    }

    fn pauli(i: usize) -> [[Complex64; 2]; 2] {
        match i {
            0 => [[ZERO, ONE], [ONE, ZERO]],
            1 => [[ZERO, -I], [I, ZERO]],
            2 => [[ONE, ZERO], [ZERO, -ONE]],
            _ => panic!("pauli index out of range"),
        }
    }
}

pub fn mat_identity() -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        row[r] = ONE;
    }
    m
}

pub fn mat_mul(a: &Mat4, b: &Mat4) -> Mat4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += a[r][k] * b[k][c];
            }
            out[r][c] = acc;
        }
    }
    out
}

pub fn mat_add_scaled(a: &Mat4, b: &Mat4, s: Complex64) -> Mat4 {
    let mut out = *a;
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] += s * b[r][c];
        }
    }
    out
}

pub fn mat_vec(a: &Mat4, v: &[Complex64; 4]) -> [Complex64; 4] {
    let mut out = [ZERO; 4];
    for r in 0..4 {
        let mut acc = ZERO;
        for k in 0..4 {
            acc += a[r][k] * v[k];
        }
        out[r] = acc;
    }
    out
}

pub fn mat_frobenius(a: &Mat4) -> f64 {
    a.iter()
        .flatten()
        .map(|c| c.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `xi . alpha + m beta`, the Hermitian symbol whose square is `<xi>_m^2 I`.
pub fn dirac_symbol(xi: [f64; 3], m: f64) -> Mat4 {
    let mut h = [[ZERO; 4]; 4];
    for (i, &x) in xi.iter().enumerate() {
        h = mat_add_scaled(&h, &DiracMatrices::alpha(i), Complex64::new(x, 0.0));
    }
    mat_add_scaled(&h, &DiracMatrices::beta(), Complex64::new(m, 0.0))
}

/// The half-wave projections `P_+-(xi) = (I +- [xi.alpha + m beta]/<xi>_m)/2`.
/// The degenerate mode `xi = 0, m = 0` returns `(I/2, I/2)`, preserving
/// completeness and orthogonal ranks.
pub fn dirac_projections(xi: [f64; 3], m: f64) -> (Mat4, Mat4) {
    let w = bracket_m(xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2], m);
    let id = mat_identity();
    if w == 0.0 {
        let mut half = id;
        for row in half.iter_mut() {
            for v in row.iter_mut() {
                *v *= 0.5;
            }
        }
        return (half, half);
    }
    let h = dirac_symbol(xi, m);
    let plus = {
        let mut p = mat_add_scaled(&id, &h, Complex64::new(1.0 / w, 0.0));
        for row in p.iter_mut() {
            for v in row.iter_mut() {
                *v *= 0.5;
            }
        }
        p
    };
    let minus = {
        let mut p = mat_add_scaled(&id, &h, Complex64::new(-1.0 / w, 0.0));
        for row in p.iter_mut() {
            for v in row.iter_mut() {
                *v *= 0.5;
            }
        }
        p
    };
    (plus, minus)
}

/// A four-component spinor field on a shared 3-D grid.
#[derive(Clone)]
pub struct SpinorField {
    components: [SpectralField; 4],
}

impl std::fmt::Debug for SpinorField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpinorField")
            .field("l2", &self.l2_norm())
            .finish()
    }
}

impl SpinorField {
    pub fn new(components: [SpectralField; 4]) -> Self {
        let g = components[0].grid().clone();
        for c in &components[1..] {
            assert!(Arc::ptr_eq(c.grid(), &g), "spinor components share a grid");
        }
        SpinorField { components }
    }

    pub fn zeros(grid: Arc<FourierGrid>) -> Self {
        SpinorField {
            components: std::array::from_fn(|_| SpectralField::zeros(grid.clone())),
        }
    }

    /// Scalar field placed into the spinor through four complex weights.
    pub fn from_scalar(field: &SpectralField, weights: [Complex64; 4]) -> Self {
        SpinorField {
            components: std::array::from_fn(|c| field.scaled(weights[c])),
        }
    }

    pub fn grid(&self) -> &Arc<FourierGrid> {
        self.components[0].grid()
    }

    pub fn components(&self) -> &[SpectralField; 4] {
        &self.components
    }

    pub fn component(&self, c: usize) -> &SpectralField {
        &self.components[c]
    }

    pub fn l2_norm(&self) -> f64 {
        self.components
            .iter()
            .map(|f| f.l2_norm().powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn sobolev_norm(&self, s: f64) -> f64 {
        self.components
            .iter()
            .map(|f| f.sobolev_norm(s).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        SpinorField {
            components: std::array::from_fn(|k| self.components[k].scaled(c)),
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: Complex64) {
        for (a, b) in self.components.iter_mut().zip(&other.components) {
            a.add_scaled(b, c);
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        SpinorField {
            components: std::array::from_fn(|k| self.components[k].sub(&other.components[k])),
        }
    }

    pub fn dealias(&mut self) {
        for c in &mut self.components {
            c.dealias();
        }
    }

    /// Pointwise squared Euclidean norm over the components, as physical
    /// samples (a real scalar field).
    pub fn density_physical(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid().num_modes()];
        for c in &self.components {
            for (d, v) in out.iter_mut().zip(c.physical()) {
                *d += v.norm_sqr();
            }
        }
        out
    }

    /// `lambda (V * |psi|^2) psi`, dealiased (`lambda` supplied by the caller).
    pub fn hartree_term(&self, mu0: f64) -> Self {
        let density: Vec<Complex64> = self
            .density_physical()
            .into_iter()
            .map(|d| Complex64::new(d, 0.0))
            .collect();
        let mut dens_field = SpectralField::from_physical(self.grid().clone(), density);
        dens_field.dealias();
        let potential: Vec<f64> = dens_field
            .apply_real_symbol(|ximag| yukawa_multiplier(ximag * ximag, mu0))
            .physical()
            .into_iter()
            .map(|v| v.re)
            .collect();
        let components = std::array::from_fn(|k| {
            let phys = self.components[k].physical();
            let prod: Vec<Complex64> = potential.iter().zip(phys).map(|(v, u)| v * u).collect();
            let mut f = SpectralField::from_physical(self.grid().clone(), prod);
            f.dealias();
            f
        });
        SpinorField { components }
    }

    /// Apply a matrix-valued Fourier symbol mode-by-mode.
    pub fn apply_matrix_symbol(&self, symbol: impl Fn([f64; 3]) -> Mat4) -> Self {
        let grid = self.grid().clone();
        let mut out = self.clone();
        grid.for_each_mode(|lin, xi| {
            let m = symbol(xi);
            let v = [
                self.components[0].coeffs()[lin],
                self.components[1].coeffs()[lin],
                self.components[2].coeffs()[lin],
                self.components[3].coeffs()[lin],
            ];
            let w = mat_vec(&m, &v);
            for c in 0..4 {
                out.components[c].coeffs_mut()[lin] = w[c];
            }
        });
        out
    }

    /// Diagonal scalar Fourier multiplier on every component.
    pub fn apply_scalar_symbol(&self, symbol: impl Fn(f64) -> Complex64 + Copy) -> Self {
        let grid = self.grid().clone();
        let mut out = self.clone();
        grid.for_each_mode(|lin, xi| {
            let w = symbol((xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt());
            for c in 0..4 {
                out.components[c].coeffs_mut()[lin] = self.components[c].coeffs()[lin] * w;
            }
        });
        out
    }
}

/// Split a spinor into its half-wave parts `psi_+- = P_+-(D) psi`.
pub fn split_spinor(psi: &SpinorField, m: f64) -> (SpinorField, SpinorField) {
    let plus = psi.apply_matrix_symbol(|xi| dirac_projections(xi, m).0);
    let minus = psi.apply_matrix_symbol(|xi| dirac_projections(xi, m).1);
    (plus, minus)
}

/// Which projections the pair dynamics uses. `ForcedIdentity` collapses the
/// system onto the scalar equation per component (`P_+ = I`, `P_- = 0`) and
/// exists as a cross-validation hook against the scalar solver.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProjectionMode {
    Physical,
    ForcedIdentity,
}

/// The state `(psi_+, psi_-)` of the coupled half-wave system, tied to the
/// mass that defines its splitting.
#[derive(Clone)]
pub struct DiracPair {
    pub plus: SpinorField,
    pub minus: SpinorField,
    mass: f64,
    projection: ProjectionMode,
}

impl std::fmt::Debug for DiracPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiracPair")
            .field("plus_l2", &self.plus.l2_norm())
            .field("minus_l2", &self.minus.l2_norm())
            .finish()
    }
}

impl DiracPair {
    /// Split `psi` with the projections at mass `m`.
    pub fn from_spinor(psi: &SpinorField, m: f64) -> Self {
        let (plus, minus) = split_spinor(psi, m);
        DiracPair {
            plus,
            minus,
            mass: m,
            projection: ProjectionMode::Physical,
        }
    }

    /// Cross-validation constructor: identity projections, so the pair
    /// dynamics equals the scalar flow on each occupied component.
    pub fn scalar_test_mode(psi: &SpinorField, m: f64) -> Self {
        DiracPair {
            plus: psi.clone(),
            minus: SpinorField::zeros(psi.grid().clone()),
            mass: m,
            projection: ProjectionMode::ForcedIdentity,
        }
    }

    /// Reconstructed spinor `psi = psi_+ + psi_-`.
    pub fn reconstruct(&self) -> SpinorField {
        let mut psi = self.plus.clone();
        psi.add_scaled(&self.minus, ONE);
        psi
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }
}

impl LabField for DiracPair {
    fn l2_norm(&self) -> f64 {
        (self.plus.l2_norm().powi(2) + self.minus.l2_norm().powi(2)).sqrt()
    }
    fn sobolev_norm(&self, s: f64) -> f64 {
        (self.plus.sobolev_norm(s).powi(2) + self.minus.sobolev_norm(s).powi(2)).sqrt()
    }
    fn lq_norm(&self, q: f64) -> f64 {
        // pointwise Euclidean magnitude of the reconstructed spinor
        let psi = self.reconstruct();
        let dens = psi.density_physical();
        let g = psi.grid();
        let h = g.box_side() / g.n() as f64;
        let s: f64 = dens.iter().map(|d| d.powf(q / 2.0)).sum();
        (s * h * h * h).powf(1.0 / q)
    }
    fn linf_norm(&self, _refine: bool) -> f64 {
        let psi = self.reconstruct();
        psi.density_physical()
            .into_iter()
            .fold(0.0_f64, f64::max)
            .sqrt()
    }
    fn evolve_free(&self, t: f64, m: f64) -> Self {
        let plus = self
            .plus
            .apply_scalar_symbol(|r| Complex64::from_polar(1.0, -t * bracket_m(r * r, m)));
        let minus = self
            .minus
            .apply_scalar_symbol(|r| Complex64::from_polar(1.0, t * bracket_m(r * r, m)));
        DiracPair {
            plus,
            minus,
            mass: self.mass,
            projection: self.projection,
        }
    }
    /// Projected Hartree forcing of the reconstructed spinor.
    fn nonlinearity(&self, mu0: f64) -> Self {
        let psi = self.reconstruct();
        let forcing = psi.hartree_term(mu0);
        let m = self.mass;
        let (plus, minus) = match self.projection {
            ProjectionMode::Physical => (
                forcing.apply_matrix_symbol(|xi| dirac_projections(xi, m).0),
                forcing.apply_matrix_symbol(|xi| dirac_projections(xi, m).1),
            ),
            ProjectionMode::ForcedIdentity => {
                (forcing.clone(), SpinorField::zeros(forcing.grid().clone()))
            }
        };
        DiracPair {
            plus,
            minus,
            mass: self.mass,
            projection: self.projection,
        }
    }
    fn conserved(&self, m: f64, mu0: f64, coupling: f64) -> (f64, f64) {
        let psi = self.reconstruct();
        let mass: f64 = psi.l2_norm().powi(2);
        // kinetic term <psi, (alpha.D + m beta) psi> / 2
        let h_psi = psi.apply_matrix_symbol(|xi| dirac_symbol(xi, m));
        let vol = psi.grid().volume();
        let mut kinetic = 0.0;
        for c in 0..4 {
            let acc: Complex64 = psi.components[c]
                .coeffs()
                .iter()
                .zip(h_psi.components[c].coeffs())
                .map(|(a, b)| b * a.conj())
                .sum();
            kinetic += (acc * vol).re;
        }
        kinetic *= 0.5;
        // quartic term: integral (V * |psi|^2) |psi|^2 dx
        let dens: Vec<Complex64> = psi
            .density_physical()
            .into_iter()
            .map(|d| Complex64::new(d, 0.0))
            .collect();
        let dens_field = SpectralField::from_physical(psi.grid().clone(), dens.clone());
        let potential = dens_field
            .apply_real_symbol(|r| yukawa_multiplier(r * r, mu0))
            .physical();
        let g = psi.grid();
        let h = g.box_side() / g.n() as f64;
        let quartic: f64 = potential
            .iter()
            .zip(&dens)
            .map(|(v, d)| v.re * d.re)
            .sum::<f64>()
            * h
            * h
            * h;
        (mass, kinetic - 0.25 * coupling * quartic)
    }
    fn bracket_apply(&self, m: f64) -> Self {
        DiracPair {
            plus: self
                .plus
                .apply_scalar_symbol(|r| Complex64::new(bracket_m(r * r, m), 0.0)),
            minus: self
                .minus
                .apply_scalar_symbol(|r| Complex64::new(bracket_m(r * r, m), 0.0)),
            mass: self.mass,
            projection: self.projection,
        }
    }
    fn scaled(&self, c: Complex64) -> Self {
        DiracPair {
            plus: self.plus.scaled(c),
            minus: self.minus.scaled(c),
            mass: self.mass,
            projection: self.projection,
        }
    }
    fn add_scaled(&mut self, other: &Self, c: Complex64) {
        self.plus.add_scaled(&other.plus, c);
        self.minus.add_scaled(&other.minus, c);
    }
    fn sub(&self, other: &Self) -> Self {
        DiracPair {
            plus: self.plus.sub(&other.plus),
            minus: self.minus.sub(&other.minus),
            mass: self.mass,
            projection: self.projection,
        }
    }
    fn zeros_like(&self) -> Self {
        DiracPair {
            plus: SpinorField::zeros(self.plus.grid().clone()),
            minus: SpinorField::zeros(self.plus.grid().clone()),
            mass: self.mass,
            projection: self.projection,
        }
    }
    fn dealias(&mut self) {
        self.plus.dealias();
        self.minus.dealias();
    }
    fn is_finite(&self) -> bool {
        self.plus
            .components()
            .iter()
            .chain(self.minus.components())
            .all(|f| f.is_finite())
    }
    fn lp_project(&self, band: &DyadicBand) -> Self {
        let w = |r: f64| Complex64::new(band.weight(r), 0.0);
        DiracPair {
            plus: self.plus.apply_scalar_symbol(w),
            minus: self.minus.apply_scalar_symbol(w),
            mass: self.mass,
            projection: self.projection,
        }
    }
    fn nyquist_radius(&self) -> f64 {
        self.plus.grid().nyquist_radius()
    }
}

/// One exponential-integrator step of the coupled half-wave system.
pub fn step_dirac(
    state: &DiracPair,
    dt: f64,
    t: f64,
    config: &crate::solver::SimulationConfig,
) -> Result<DiracPair> {
    if (config.mass - state.mass()).abs() > 0.0 {
        return Err(LabError::parameter(
            "mass",
            "config mass must match the mass defining the pair splitting",
        ));
    }
    crate::solver::step(state, dt, t, config)
}

/// Discrete residual of the original first-order Dirac equation
/// `-i d_t psi + (alpha.D + m beta) psi - lambda (V*|psi|^2) psi` on the
/// reconstructed spinors of a sampled pair trajectory.
pub fn dirac_residual(
    traj: &crate::solver::Trajectory<DiracPair>,
    m: f64,
    mu0: f64,
    lambda: f64,
) -> Result<f64> {
    if traj.fields.len() < 3 {
        return Err(LabError::TooFewSamples {
            need: 3,
            got: traj.fields.len(),
        });
    }
    let dt = traj.sample_dt();
    let spinors: Vec<SpinorField> = traj.fields.iter().map(|p| p.reconstruct()).collect();
    let mut acc = 0.0;
    for j in 1..spinors.len() - 1 {
        let mut defect = spinors[j + 1].sub(&spinors[j - 1]);
        defect = defect.scaled(Complex64::new(0.0, -1.0 / (2.0 * dt)));
        defect.add_scaled(&spinors[j].apply_matrix_symbol(|xi| dirac_symbol(xi, m)), ONE);
        defect.add_scaled(
            &spinors[j].hartree_term(mu0),
            Complex64::new(-lambda, 0.0),
        );
        let r = defect.l2_norm();
        acc += r * r * dt;
    }
    Ok(acc.sqrt())
}

/// Build a spinor initial state: the scalar datum is placed into the four
/// components through the given weights and split at mass `m`.
pub fn realize_dirac_initial(
    spec: &InitialDataSpec,
    grid: &Arc<FourierGrid>,
    weights: [Complex64; 4],
    m: f64,
) -> Result<DiracPair> {
    let scalar = spec.realize_spectral(grid)?;
    let mut psi = SpinorField::from_scalar(&scalar, weights);
    psi.dealias();
    Ok(DiracPair::from_spinor(&psi, m))
}
