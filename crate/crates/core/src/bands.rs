//! Dyadic frequency decomposition: smooth Littlewood-Paley cutoffs, sharp
//! annuli, and cube projections.
//!
//! The base cutoff `beta_1` is even, equals 1 on [-1, 1], vanishes outside
//! (-2, 2), and ramps with the smoothstep polynomial `x^2 (3 - 2x)` applied
//! to `x = 2 - |s|`. For dyadic `lambda > 1`,
//! `beta_lambda(s) = beta_1(s/lambda) - beta_1(2s/lambda)`, supported on
//! `lambda/2 < |s| < 2 lambda`, so partial sums telescope:
//! `beta_1(s) + sum_{1 < lambda <= L} beta_lambda(s) = beta_1(s/L)`.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::field::SpectralField;
use crate::radial::RadialField;

/// The base smooth cutoff.
pub fn beta1(s: f64) -> f64 {
    let a = s.abs();
    if a <= 1.0 {
        1.0
    } else if a >= 2.0 {
        0.0
    } else {
        let x = 2.0 - a;
        x * x * (3.0 - 2.0 * x)
    }
}

/// Smooth dyadic cutoff at scale `lambda` (a power of two, >= 1).
pub fn beta_lambda(lambda: f64, s: f64) -> f64 {
    if lambda <= 1.0 {
        beta1(s)
    } else {
        beta1(s / lambda) - beta1(2.0 * s / lambda)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandKind {
    /// `beta_lambda(|xi|)` weights.
    Smooth,
    /// indicator of `lambda/2 < |xi| <= lambda` (`|xi| <= 1` for lambda = 1),
    /// so the sharp bands partition the lattice exactly.
    Sharp,
}

/// One dyadic frequency band `|xi| ~ lambda`.
#[derive(Clone, Copy, Debug)]
pub struct DyadicBand {
    lambda: f64,
    kind: BandKind,
}

impl DyadicBand {
    pub fn new(lambda: f64, kind: BandKind) -> Result<Self> {
        if !(lambda >= 1.0) || lambda.log2().fract() != 0.0 {
            return Err(LabError::parameter(
                "lambda",
                format!("must be a dyadic scale 2^k, k >= 0, got {lambda}"),
            ));
        }
        Ok(DyadicBand { lambda, kind })
    }

    pub fn smooth(lambda: f64) -> Result<Self> {
        Self::new(lambda, BandKind::Smooth)
    }

    pub fn sharp(lambda: f64) -> Result<Self> {
        Self::new(lambda, BandKind::Sharp)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn kind(&self) -> BandKind {
        self.kind
    }

    /// Multiplier weight at frequency magnitude `s`.
    pub fn weight(&self, s: f64) -> f64 {
        match self.kind {
            BandKind::Smooth => beta_lambda(self.lambda, s),
            BandKind::Sharp => {
                let a = s.abs();
                let inside = if self.lambda <= 1.0 {
                    a <= 1.0
                } else {
                    a > self.lambda / 2.0 && a <= self.lambda
                };
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// The dyadic scales `1, 2, 4, ...` up to the first one >= `radius`.
pub fn dyadic_ladder(radius: f64) -> Vec<f64> {
    let mut out = vec![1.0];
    let mut lambda = 1.0;
    while lambda < radius {
        lambda *= 2.0;
        out.push(lambda);
    }
    out
}

/// Littlewood-Paley projection of a 3-D field.
pub fn lp_project(u: &SpectralField, band: &DyadicBand) -> SpectralField {
    u.apply_real_symbol(|s| band.weight(s))
}

/// Littlewood-Paley projection of a radial field (acts on the sine modes).
pub fn lp_project_radial(u: &RadialField, band: &DyadicBand) -> RadialField {
    u.apply_real_symbol(|s| band.weight(s))
}

/// Index of the cube `C_z = mu z + [0, mu)^3` containing `xi`.
pub fn cube_of(xi: [f64; 3], mu: f64) -> [i64; 3] {
    [
        (xi[0] / mu).floor() as i64,
        (xi[1] / mu).floor() as i64,
        (xi[2] / mu).floor() as i64,
    ]
}

/// Retain exactly the lattice modes with `xi` in the cube `C_z = mu z + [0, mu)^3`.
pub fn cube_project(u: &SpectralField, mu: f64, z: [i64; 3]) -> SpectralField {
    assert!(mu >= 1.0, "cube side must be >= 1");
    let mut out = u.clone();
    let grid = u.grid().clone();
    grid.for_each_mode(|lin, xi| {
        if cube_of(xi, mu) != z {
            out.coeffs_mut()[lin] = Complex64::default();
        }
    });
    out
}

/// All cube indices holding at least one nonzero mode of `u`.
pub fn occupied_cubes(u: &SpectralField, mu: f64) -> Vec<[i64; 3]> {
    let mut seen = std::collections::BTreeSet::new();
    u.grid().clone().for_each_mode(|lin, xi| {
        if u.coeffs()[lin].norm_sqr() > 0.0 {
            seen.insert(cube_of(xi, mu));
        }
    });
    seen.into_iter().collect()
}

/// Squared-coefficient mass per occupied cube, in one pass.
pub fn cube_energies(
    u: &SpectralField,
    mu: f64,
) -> std::collections::BTreeMap<[i64; 3], f64> {
    let mut map = std::collections::BTreeMap::new();
    u.grid().clone().for_each_mode(|lin, xi| {
        let p = u.coeffs()[lin].norm_sqr();
        if p > 0.0 {
            *map.entry(cube_of(xi, mu)).or_insert(0.0) += p;
        }
    });
    map
}

/// The nonzero modes of each occupied cube: `(xi, coefficient)` lists.
pub fn cube_mode_lists(
    u: &SpectralField,
    mu: f64,
) -> std::collections::BTreeMap<[i64; 3], Vec<([f64; 3], Complex64)>> {
    let mut map: std::collections::BTreeMap<[i64; 3], Vec<([f64; 3], Complex64)>> =
        std::collections::BTreeMap::new();
    u.grid().clone().for_each_mode(|lin, xi| {
        let c = u.coeffs()[lin];
        if c.norm_sqr() > 0.0 {
            map.entry(cube_of(xi, mu)).or_default().push((xi, c));
        }
    });
    map
}
