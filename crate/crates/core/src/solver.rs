//! Nonlinear evolution of `-i du/dt + sqrt(m^2-Lap) u = coupling (V*|u|^2) u`
//! by interaction-picture exponential integrators and by Picard iteration on
//! the Duhamel integral, with conserved-quantity, residual, and scattering
//! diagnostics.
//!
//! In integrated form `du/dt = -i <D>_m u + i coupling N(u)`, so
//! `u(t) = S_m(t) f + i coupling int_0^t S_m(t-t') N(u)(t') dt'` with
//! `S_m(t) = exp(-i t <D>_m)`. The stiff part is diagonal in mode space and
//! is applied exactly; the only approximation is the Duhamel quadrature.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};
use crate::field_ops::LabField;
use crate::grid::FourierGrid;
use crate::propagator::InitialDataSpec;
use crate::radial::RadialGrid;
use crate::variation::SampledPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Integrator {
    ExpMidpoint,
    ExpRk4,
    Picard,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GridSpec {
    /// periodic 3-D grid: `n` points per axis, box side `2 pi box_scale`
    Spectral { n: usize, box_scale: f64 },
    /// radial grid: `n_r` panels on `[0, r_max]`
    Radial { n_r: usize, r_max: f64 },
}

fn default_coupling() -> f64 {
    1.0
}
fn default_stride() -> usize {
    1
}
fn default_small_data() -> f64 {
    1e-2
}

/// Full description of one evolution experiment.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    /// mass parameter in the dispersion `sqrt(m^2 + |xi|^2)`
    pub mass: f64,
    /// Yukawa screening parameter (0 = Coulomb)
    pub mu0: f64,
    /// Sobolev regularity used by diagnostics
    pub s: f64,
    pub grid: GridSpec,
    pub initial: InitialDataSpec,
    pub dt: f64,
    pub t_end: f64,
    pub integrator: Integrator,
    /// scale (and sign) of the nonlinearity; 0 turns the flow free
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    /// keep every `sample_stride`-th step in the trajectory
    #[serde(default = "default_stride")]
    pub sample_stride: usize,
    /// evaluate sup norms on a 2x zero-padded grid
    #[serde(default)]
    pub linf_refine: bool,
    /// admissible H^s size of initial data for the Picard path
    #[serde(default = "default_small_data")]
    pub small_data_threshold: f64,
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mass >= 0.0) {
            return Err(LabError::parameter("mass", "must be nonnegative"));
        }
        if !(self.mu0 >= 0.0) {
            return Err(LabError::parameter("mu0", "must be nonnegative"));
        }
        if !(self.dt > 0.0) {
            return Err(LabError::parameter("dt", "must be positive"));
        }
        if !(self.t_end >= self.dt) {
            return Err(LabError::parameter("t_end", "must be at least dt"));
        }
        if self.sample_stride == 0 {
            return Err(LabError::parameter("sample_stride", "must be >= 1"));
        }
        let steps = self.t_end / self.dt;
        if (steps - steps.round()).abs() > 1e-9 * steps.max(1.0) {
            return Err(LabError::parameter("t_end", "must be an integer multiple of dt"));
        }
        match self.grid {
            GridSpec::Spectral { n, box_scale } => {
                FourierGrid::new(n, box_scale)?;
            }
            GridSpec::Radial { n_r, r_max } => {
                RadialGrid::new(n_r, r_max)?;
            }
        }
        self.initial.validate()
    }

    pub fn num_steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Per-sample diagnostics.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub hs_norm: f64,
    pub linf_norm: f64,
    /// H^s distance of the backward-twisted profile from the previous sample
    pub profile_gap: f64,
}

/// Time-ordered field samples plus per-sample diagnostics.
#[derive(Clone, Debug)]
pub struct Trajectory<F> {
    pub config: SimulationConfig,
    pub times: Vec<f64>,
    pub fields: Vec<F>,
    pub records: Vec<DiagnosticsRecord>,
}

impl<F: LabField> Trajectory<F> {
    pub fn sample_dt(&self) -> f64 {
        self.config.dt * self.config.sample_stride as f64
    }

    pub fn path(&self) -> Result<SampledPath<F>> {
        SampledPath::new(self.times.clone(), self.fields.clone())
    }

    pub fn final_field(&self) -> &F {
        self.fields.last().expect("trajectory has samples")
    }
}

struct Stepper {
    m: f64,
    mu0: f64,
    coupling: f64,
}

impl Stepper {
    /// `i coupling N(u)`
    fn forcing<F: LabField>(&self, u: &F) -> F {
        u.nonlinearity(self.mu0)
            .scaled(Complex64::new(0.0, self.coupling))
    }

    /// Symmetric exponential midpoint: `u1 = S(h) u0 + h S(h/2) G(mid)` with
    /// `mid = (S(h/2) u0 + S(-h/2) u1)/2` resolved by a fixed small number of
    /// fixed-point sweeps. Exact for coupling = 0.
    fn exp_midpoint<F: LabField>(&self, u0: &F, h: f64) -> F {
        let half_fwd = u0.evolve_free(0.5 * h, self.m);
        let mut u1 = half_fwd.evolve_free(0.5 * h, self.m);
        if self.coupling == 0.0 {
            return u1;
        }
        for _ in 0..4 {
            let mut mid = half_fwd.clone();
            mid.add_scaled(&u1.evolve_free(-0.5 * h, self.m), Complex64::new(1.0, 0.0));
            mid = mid.scaled(Complex64::new(0.5, 0.0));
            let forcing = self.forcing(&mid).evolve_free(0.5 * h, self.m);
            u1 = u0.evolve_free(h, self.m);
            u1.add_scaled(&forcing, Complex64::new(h, 0.0));
        }
        u1
    }

    /// Interaction-picture classical RK4 (Lawson): order 4, exact for
    /// coupling = 0.
    fn exp_rk4<F: LabField>(&self, u0: &F, h: f64) -> F {
        if self.coupling == 0.0 {
            return u0.evolve_free(h, self.m);
        }
        let g1 = self.forcing(u0);

        let mut stage = u0.clone();
        stage.add_scaled(&g1, Complex64::new(0.5 * h, 0.0));
        let g2 = self
            .forcing(&stage.evolve_free(0.5 * h, self.m))
            .evolve_free(-0.5 * h, self.m);

        let mut stage = u0.clone();
        stage.add_scaled(&g2, Complex64::new(0.5 * h, 0.0));
        let g3 = self
            .forcing(&stage.evolve_free(0.5 * h, self.m))
            .evolve_free(-0.5 * h, self.m);

        let mut stage = u0.clone();
        stage.add_scaled(&g3, Complex64::new(h, 0.0));
        let g4 = self
            .forcing(&stage.evolve_free(h, self.m))
            .evolve_free(-h, self.m);

        let mut w = u0.clone();
        w.add_scaled(&g1, Complex64::new(h / 6.0, 0.0));
        w.add_scaled(&g2, Complex64::new(h / 3.0, 0.0));
        w.add_scaled(&g3, Complex64::new(h / 3.0, 0.0));
        w.add_scaled(&g4, Complex64::new(h / 6.0, 0.0));
        w.evolve_free(h, self.m)
    }
}

/// One integrator step. Blow-up guard: errors if the L2 norm grows by more
/// than 10% in the step (the flow conserves mass; growth is numerical).
pub fn step<F: LabField>(
    state: &F,
    dt: f64,
    t: f64,
    config: &SimulationConfig,
) -> Result<F> {
    let stepper = Stepper {
        m: config.mass,
        mu0: config.mu0,
        coupling: config.coupling,
    };
    let next = match config.integrator {
        Integrator::ExpMidpoint | Integrator::Picard => stepper.exp_midpoint(state, dt),
        Integrator::ExpRk4 => stepper.exp_rk4(state, dt),
    };
    let before = state.l2_norm();
    let after = next.l2_norm();
    if after > 1.1 * before && before > 0.0 {
        return Err(LabError::BlowUp {
            t,
            growth: after / before,
        });
    }
    Ok(next)
}

fn diagnostics<F: LabField>(
    u: &F,
    t: f64,
    config: &SimulationConfig,
    prev_profile: Option<&F>,
) -> (DiagnosticsRecord, F) {
    let (mass, energy) = u.conserved(config.mass, config.mu0, config.coupling);
    let profile = u.evolve_free(-t, config.mass);
    let gap = prev_profile
        .map(|p| profile.sub(p).sobolev_norm(config.s))
        .unwrap_or(0.0);
    (
        DiagnosticsRecord {
            t,
            mass,
            energy,
            hs_norm: u.sobolev_norm(config.s),
            linf_norm: u.linf_norm(config.linf_refine),
            profile_gap: gap,
        },
        profile,
    )
}

/// Evolve from 0 to `t_end`, sampling every `sample_stride` steps.
/// Deterministic given the config (including data seeds).
pub fn run<F, R>(config: &SimulationConfig, realize: R) -> Result<Trajectory<F>>
where
    F: LabField,
    R: FnOnce(&SimulationConfig) -> Result<F>,
{
    config.validate()?;
    let mut u = realize(config)?;
    u.dealias();
    if config.integrator == Integrator::Picard {
        let outcome = picard_iterate_from(config, u, 8)?;
        return Ok(outcome.iterates.into_iter().last().expect("iterates"));
    }

    let n_steps = config.num_steps();
    let mut times = Vec::new();
    let mut fields = Vec::new();
    let mut records = Vec::new();

    let (rec, mut prev_profile) = diagnostics(&u, 0.0, config, None);
    times.push(0.0);
    fields.push(u.clone());
    records.push(rec);

    for k in 0..n_steps {
        let t = k as f64 * config.dt;
        u = step(&u, config.dt, t, config)?;
        let t_next = (k + 1) as f64 * config.dt;
        if (k + 1) % config.sample_stride == 0 || k + 1 == n_steps {
            let (rec, profile) = diagnostics(&u, t_next, config, Some(&prev_profile));
            times.push(t_next);
            fields.push(u.clone());
            records.push(rec);
            prev_profile = profile;
        }
    }
    Ok(Trajectory {
        config: config.clone(),
        times,
        fields,
        records,
    })
}

/// Run on the radial grid named by the config.
pub fn run_radial(config: &SimulationConfig) -> Result<Trajectory<crate::radial::RadialField>> {
    match config.grid {
        GridSpec::Radial { n_r, r_max } => run(config, |c| {
            let grid = RadialGrid::new(n_r, r_max)?;
            c.initial.realize_radial(&grid)
        }),
        _ => Err(LabError::parameter("grid", "config does not name a radial grid")),
    }
}

/// Run on the periodic 3-D grid named by the config.
pub fn run_spectral(config: &SimulationConfig) -> Result<Trajectory<crate::field::SpectralField>> {
    match config.grid {
        GridSpec::Spectral { n, box_scale } => run(config, |c| {
            let grid = FourierGrid::new(n, box_scale)?;
            c.initial.realize_spectral(&grid)
        }),
        _ => Err(LabError::parameter("grid", "config does not name a 3-D grid")),
    }
}

/// Picard iteration history.
#[derive(Debug)]
pub struct PicardOutcome<F> {
    /// iterate trajectories `u^1, u^2, ...` (the free wave `u^0` is implicit)
    pub iterates: Vec<Trajectory<F>>,
    /// `d_k = sup_t || u^{k+1}(t) - u^k(t) ||_{H^s}`
    pub increments: Vec<f64>,
    /// `d_{k+1} / d_k`
    pub ratios: Vec<f64>,
    /// set when an increment grew twice in a row
    pub diverged: bool,
}

/// Picard iteration for the Duhamel fixed point
/// `u(t) = S_m(t) f + i coupling int_0^t S_m(t-t') N(u)(t') dt'`,
/// with the time integral by the trapezoid rule on the sample grid.
pub fn picard_iterate<F, R>(
    config: &SimulationConfig,
    realize: R,
    n_iters: usize,
) -> Result<PicardOutcome<F>>
where
    F: LabField,
    R: FnOnce(&SimulationConfig) -> Result<F>,
{
    config.validate()?;
    let mut f = realize(config)?;
    f.dealias();
    picard_iterate_from(config, f, n_iters)
}

fn picard_iterate_from<F: LabField>(
    config: &SimulationConfig,
    f: F,
    n_iters: usize,
) -> Result<PicardOutcome<F>> {
    let hs = f.sobolev_norm(config.s);
    if hs > config.small_data_threshold * (1.0 + 1e-9) {
        return Err(LabError::parameter(
            "initial",
            format!(
                "Picard needs small data: H^s norm {hs:.3e} exceeds threshold {:.3e}",
                config.small_data_threshold
            ),
        ));
    }
    let dt_s = config.dt * config.sample_stride as f64;
    let n_samples = (config.t_end / dt_s).round() as usize + 1;
    let times: Vec<f64> = (0..n_samples).map(|j| j as f64 * dt_s).collect();

    // u^0(t) = S(t) f
    let mut current: Vec<F> = times.iter().map(|t| f.evolve_free(*t, config.mass)).collect();
    let free: Vec<F> = current.clone();

    let mut iterates = Vec::new();
    let mut increments = Vec::new();
    let mut diverged = false;

    for _ in 0..n_iters {
        let forcing: Vec<F> = current
            .iter()
            .map(|u| {
                u.nonlinearity(config.mu0)
                    .scaled(Complex64::new(0.0, config.coupling))
            })
            .collect();
        // cumulative trapezoid of S(t - t') forcing(t')
        let mut next = Vec::with_capacity(n_samples);
        let mut integral = free[0].zeros_like();
        next.push(free[0].clone());
        for j in 1..n_samples {
            integral.add_scaled(&forcing[j - 1], Complex64::new(0.5 * dt_s, 0.0));
            integral = integral.evolve_free(dt_s, config.mass);
            integral.add_scaled(&forcing[j], Complex64::new(0.5 * dt_s, 0.0));
            let mut u = free[j].clone();
            u.add_scaled(&integral, Complex64::new(1.0, 0.0));
            next.push(u);
        }
        let d = current
            .iter()
            .zip(&next)
            .map(|(a, b)| b.sub(a).sobolev_norm(config.s))
            .fold(0.0, f64::max);
        if increments.len() >= 2 {
            let len = increments.len();
            if d > increments[len - 1] && increments[len - 1] > increments[len - 2] {
                diverged = true;
            }
        }
        increments.push(d);
        current = next;

        let records: Vec<DiagnosticsRecord> = {
            let mut recs = Vec::with_capacity(n_samples);
            let mut prev_profile: Option<F> = None;
            for (t, u) in times.iter().zip(&current) {
                let (rec, profile) = diagnostics(u, *t, config, prev_profile.as_ref());
                recs.push(rec);
                prev_profile = Some(profile);
            }
            recs
        };
        iterates.push(Trajectory {
            config: config.clone(),
            times: times.clone(),
            fields: current.clone(),
            records,
        });
    }
    let ratios = increments
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { 0.0 })
        .collect();
    Ok(PicardOutcome {
        iterates,
        increments,
        ratios,
        diverged,
    })
}

/// Discrete PDE defect of a sampled trajectory:
/// `|| -i d_t u + <D>_m u - coupling (V*|u|^2) u ||_{L2}` with centered time
/// differences, accumulated as `sqrt( sum_j r_j^2 dt )` over interior samples.
pub fn residual<F: LabField>(traj: &Trajectory<F>) -> Result<f64> {
    residual_with(traj, traj.config.mass, traj.config.mu0, traj.config.coupling)
}

/// Residual against explicitly supplied parameters (used by the rescaling
/// checks, where `mu0` transforms under the symmetry).
pub fn residual_with<F: LabField>(
    traj: &Trajectory<F>,
    m: f64,
    mu0: f64,
    coupling: f64,
) -> Result<f64> {
    if traj.fields.len() < 3 {
        return Err(LabError::TooFewSamples {
            need: 3,
            got: traj.fields.len(),
        });
    }
    let dt = traj.sample_dt();
    let mut acc = 0.0;
    for j in 1..traj.fields.len() - 1 {
        let mut defect = traj.fields[j + 1].sub(&traj.fields[j - 1]);
        // -i * centered difference
        defect = defect.scaled(Complex64::new(0.0, -1.0 / (2.0 * dt)));
        defect.add_scaled(&traj.fields[j].bracket_apply(m), Complex64::new(1.0, 0.0));
        defect.add_scaled(
            &traj.fields[j].nonlinearity(mu0),
            Complex64::new(-coupling, 0.0),
        );
        let r = defect.l2_norm();
        acc += r * r * dt;
    }
    Ok(acc.sqrt())
}

/// Backward-twisted profiles `phi(t) = S_m(-t) u(t)`, their consecutive H^s
/// gaps, and the dyadic gap series `G_k = ||phi(2 T_k) - phi(T_k)||_{H^s}`
/// for the requested base times (nearest samples are used).
#[derive(Clone, Debug, Serialize)]
pub struct ScatteringReport {
    pub times: Vec<f64>,
    pub gaps: Vec<f64>,
    pub dyadic_times: Vec<f64>,
    pub dyadic_gaps: Vec<f64>,
}

pub fn scattering_profile<F: LabField>(
    traj: &Trajectory<F>,
    m: f64,
    s: f64,
    dyadic_bases: &[f64],
) -> ScatteringReport {
    let profiles: Vec<F> = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(t, u)| u.evolve_free(-t, m))
        .collect();
    let gaps = profiles
        .windows(2)
        .map(|w| w[1].sub(&w[0]).sobolev_norm(s))
        .collect();
    let nearest = |t: f64| -> usize {
        traj.times
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                (**a - t).abs().partial_cmp(&(**b - t).abs()).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap()
    };
    let mut dyadic_times = Vec::new();
    let mut dyadic_gaps = Vec::new();
    for &base in dyadic_bases {
        let i = nearest(base);
        let j = nearest(2.0 * base);
        if i != j {
            dyadic_times.push(traj.times[i]);
            dyadic_gaps.push(profiles[j].sub(&profiles[i]).sobolev_norm(s));
        }
    }
    ScatteringReport {
        times: traj.times.clone(),
        gaps,
        dyadic_times,
        dyadic_gaps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::RadialField;

    fn radial_config(coupling: f64) -> SimulationConfig {
        SimulationConfig {
            mass: 1.0,
            mu0: 1.0,
            s: 1.0,
            grid: GridSpec::Radial { n_r: 128, r_max: 16.0 },
            initial: InitialDataSpec::radial_gaussian(0.2, 1.0),
            dt: 0.05,
            t_end: 1.0,
            integrator: Integrator::ExpMidpoint,
            coupling,
            sample_stride: 4,
            linf_refine: false,
            small_data_threshold: 1e-2,
        }
    }

    #[test]
    fn free_coupling_reduces_to_propagator() {
        let cfg = radial_config(0.0);
        let traj = run_radial(&cfg).unwrap();
        let grid = traj.fields[0].grid().clone();
        let f0 = cfg.initial.realize_radial(&grid).unwrap();
        for (t, u) in traj.times.iter().zip(&traj.fields) {
            let want = f0.evolve_free(*t, cfg.mass);
            let err = u.sub(&want).l2_norm();
            assert!(err < 1e-13 * f0.l2_norm().max(1.0), "t = {t}: {err}");
        }
        // diagnostics constant for free flow
        let m0 = traj.records[0].mass;
        let e0 = traj.records[0].energy;
        for rec in &traj.records {
            assert!((rec.mass - m0).abs() < 1e-12 * m0);
            assert!((rec.energy - e0).abs() < 1e-12 * e0.abs());
            assert!(rec.profile_gap < 1e-12);
        }
    }

    #[test]
    fn reject_bad_configs() {
        let mut cfg = radial_config(1.0);
        cfg.mass = -1.0;
        assert!(matches!(
            cfg.validate(),
            Err(LabError::Parameter { key, .. }) if key == "mass"
        ));
        let mut cfg = radial_config(1.0);
        cfg.dt = 2.0; // > t_end
        assert!(cfg.validate().is_err());
        let mut cfg = radial_config(1.0);
        cfg.t_end = 1.03; // not a multiple of dt
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn midpoint_is_second_order() {
        // one-step defect against a fine rk4 reference shrinks ~8x per halving
        let cfg = radial_config(1.0);
        let grid = RadialGrid::new(128, 16.0).unwrap();
        let u0 = InitialDataSpec::radial_gaussian(0.5, 1.0)
            .realize_radial(&grid)
            .map(|mut f| {
                f.dealias();
                f
            })
            .unwrap();
        let reference = |h: f64| -> RadialField {
            let mut cfg_ref = cfg.clone();
            cfg_ref.integrator = Integrator::ExpRk4;
            let mut u = u0.clone();
            for k in 0..16 {
                u = step(&u, h / 16.0, k as f64 * h / 16.0, &cfg_ref).unwrap();
            }
            u
        };
        let h = 0.2;
        let e_h = step(&u0, h, 0.0, &cfg).unwrap().sub(&reference(h)).l2_norm();
        let mut cfg2 = cfg.clone();
        cfg2.dt = h / 2.0;
        let e_h2 = step(&u0, h / 2.0, 0.0, &cfg2)
            .unwrap()
            .sub(&reference(h / 2.0))
            .l2_norm();
        let ratio = e_h / e_h2;
        assert!(
            (5.5..12.0).contains(&ratio),
            "midpoint local order ratio {ratio} (e_h {e_h:.3e}, e_h2 {e_h2:.3e})"
        );
    }

    #[test]
    fn rk4_is_fourth_order() {
        let mut cfg = radial_config(1.0);
        cfg.integrator = Integrator::ExpRk4;
        let grid = RadialGrid::new(128, 16.0).unwrap();
        let u0 = InitialDataSpec::radial_gaussian(0.5, 1.0)
            .realize_radial(&grid)
            .map(|mut f| {
                f.dealias();
                f
            })
            .unwrap();
        let reference = |h: f64| -> RadialField {
            let mut u = u0.clone();
            for k in 0..32 {
                u = step(&u, h / 32.0, k as f64 * h / 32.0, &cfg).unwrap();
            }
            u
        };
        let h = 0.4;
        let e_h = step(&u0, h, 0.0, &cfg).unwrap().sub(&reference(h)).l2_norm();
        let e_h2 = step(&u0, h / 2.0, 0.0, &cfg)
            .unwrap()
            .sub(&reference(h / 2.0))
            .l2_norm();
        let ratio = e_h / e_h2;
        assert!(
            (20.0..50.0).contains(&ratio),
            "rk4 local order ratio {ratio} (e_h {e_h:.3e}, e_h2 {e_h2:.3e})"
        );
    }

    #[test]
    fn single_step_mass_drift_tiny() {
        let cfg = radial_config(1.0);
        let grid = RadialGrid::new(256, 16.0).unwrap();
        let mut u0 = InitialDataSpec::radial_gaussian(0.1, 1.0)
            .realize_radial(&grid)
            .unwrap();
        u0.dealias();
        let u1 = step(&u0, 0.01, 0.0, &cfg).unwrap();
        let drift = (u1.l2_norm() - u0.l2_norm()).abs() / u0.l2_norm();
        assert!(drift <= 1e-10, "one-step mass drift {drift}");
    }

    #[test]
    fn gauge_invariance_of_run() {
        let cfg = radial_config(1.0);
        let traj_a = run_radial(&cfg).unwrap();
        let grid = traj_a.fields[0].grid().clone();
        let theta = Complex64::from_polar(1.0, 0.9);
        let mut f = cfg.initial.realize_radial(&grid).unwrap();
        f.dealias();
        f = f.scaled(theta);
        let cfg_b = cfg.clone();
        let traj_b = run(&cfg_b, |_| Ok(f)).unwrap();
        for (a, b) in traj_a.fields.iter().zip(&traj_b.fields) {
            let err = a.scaled(theta).sub(b).l2_norm();
            assert!(err < 1e-12, "gauge defect {err}");
        }
    }

    #[test]
    fn time_reversal_round_trip() {
        let cfg = radial_config(1.0);
        let grid = RadialGrid::new(128, 16.0).unwrap();
        let mut u0 = InitialDataSpec::radial_gaussian(0.2, 1.0)
            .realize_radial(&grid)
            .unwrap();
        u0.dealias();
        let fwd = step(&u0, 0.05, 0.0, &cfg).unwrap();
        let back = step(&fwd, -0.05, 0.05, &cfg).unwrap();
        let err = back.sub(&u0).l2_norm() / u0.l2_norm();
        assert!(err < 1e-10, "reversal defect {err}");
    }

    #[test]
    fn quartic_energy_scales_sixteen_fold() {
        let grid = RadialGrid::new(128, 16.0).unwrap();
        let f = InitialDataSpec::radial_gaussian(0.1, 1.0)
            .realize_radial(&grid)
            .unwrap();
        let quartic = |f: &RadialField| -> f64 {
            let (_, e_free) = f.conserved(1.0, 1.0, 0.0);
            let (_, e_full) = f.conserved(1.0, 1.0, 1.0);
            4.0 * (e_free - e_full)
        };
        let q1 = quartic(&f);
        let q2 = quartic(&f.scaled(Complex64::new(2.0, 0.0)));
        assert!((q2 / q1 - 16.0).abs() < 1e-9, "ratio {}", q2 / q1);
    }

    #[test]
    fn picard_zero_data_stays_zero() {
        let mut cfg = radial_config(1.0);
        cfg.initial = InitialDataSpec::radial_gaussian(0.0, 1.0);
        let grid = RadialGrid::new(64, 16.0).unwrap();
        let out = picard_iterate(&cfg, |c| c.initial.realize_radial(&grid), 3).unwrap();
        for it in &out.iterates {
            for f in &it.fields {
                assert_eq!(f.l2_norm(), 0.0);
            }
        }
        assert!(out.increments.iter().all(|d| *d == 0.0));
    }

    #[test]
    fn picard_contracts_and_matches_stepper() {
        let mut cfg = radial_config(1.0);
        cfg.t_end = 2.0;
        cfg.dt = 0.05;
        cfg.sample_stride = 1;
        // scale initial data to H^s norm 1e-2
        let grid = RadialGrid::new(128, 16.0).unwrap();
        let mut f = InitialDataSpec::radial_gaussian(1.0, 1.0)
            .realize_radial(&grid)
            .unwrap();
        f.dealias();
        let hs = f.sobolev_norm(cfg.s);
        f = f.scaled(Complex64::new(1e-2 / hs, 0.0));

        let out = picard_iterate(&cfg, |_| Ok(f.clone()), 4).unwrap();
        assert!(!out.diverged);
        assert!(out.increments[0] > 0.0);
        // geometric contraction while above the fp floor
        for w in out.increments.windows(2) {
            if w[1] > 1e-15 {
                assert!(w[1] < 0.5 * w[0], "no contraction: {:?}", out.increments);
            }
        }
        // fixed point tracks the midpoint run
        let traj = run(&cfg, |_| Ok(f.clone())).unwrap();
        let last = out.iterates.last().unwrap();
        let sup_err = last
            .fields
            .iter()
            .zip(&traj.fields)
            .map(|(a, b)| a.sub(b).sobolev_norm(cfg.s))
            .fold(0.0, f64::max);
        assert!(sup_err < 1e-4, "picard vs stepper sup-H^s {sup_err}");
    }

    #[test]
    fn picard_rejects_large_data() {
        let mut cfg = radial_config(1.0);
        cfg.initial = InitialDataSpec::radial_gaussian(1.0, 1.0); // H^s >> 1e-2
        let grid = RadialGrid::new(64, 16.0).unwrap();
        let res = picard_iterate(&cfg, |c| c.initial.realize_radial(&grid), 2);
        assert!(res.is_err());
    }

    #[test]
    fn residual_orders_and_negative_control() {
        // free trajectory: residual is pure centered-difference error O(dt^2)
        let mut cfg = radial_config(0.0);
        cfg.sample_stride = 1;
        let r_coarse = residual(&run_radial(&cfg).unwrap()).unwrap();
        cfg.dt = 0.025;
        let r_fine = residual(&run_radial(&cfg).unwrap()).unwrap();
        let ratio = r_coarse / r_fine;
        assert!(
            (3.0..5.5).contains(&ratio),
            "residual order ratio {ratio} ({r_coarse:.3e} / {r_fine:.3e})"
        );

        // random non-solution sequence: residual O(1) against field scale
        let grid = RadialGrid::new(128, 16.0).unwrap();
        let fields: Vec<RadialField> = (0..5)
            .map(|k| {
                InitialDataSpec::annulus_random(1.0, 4.0, k, true)
                    .realize_radial(&grid)
                    .unwrap()
            })
            .collect();
        let traj = Trajectory {
            config: radial_config(1.0),
            times: (0..5).map(|j| j as f64 * 0.05).collect(),
            fields,
            records: Vec::new(),
        };
        let r = residual(&traj).unwrap();
        assert!(r > 1.0, "negative control residual {r}");
    }

    #[test]
    fn free_flow_has_frozen_profile() {
        let cfg = radial_config(0.0);
        let traj = run_radial(&cfg).unwrap();
        let rep = scattering_profile(&traj, cfg.mass, cfg.s, &[0.25]);
        for g in &rep.gaps {
            assert!(*g <= 1e-12, "free profile gap {g}");
        }
        assert_eq!(rep.dyadic_times.len(), 1);
        assert!(rep.dyadic_gaps[0] <= 1e-12);
    }

    #[test]
    fn blow_up_guard_trips_on_instability() {
        // a huge nonlinearity with a big step destabilizes the explicit
        // midpoint iteration enough to trip the 10% guard
        let mut cfg = radial_config(4000.0);
        cfg.dt = 0.5;
        cfg.t_end = 10.0;
        cfg.initial = InitialDataSpec::radial_gaussian(2.0, 1.0);
        let res = run_radial(&cfg);
        match res {
            Err(LabError::BlowUp { .. }) => {}
            other => panic!("expected blow-up guard, got {other:?}"),
        }
    }
}
