//! Interactive browser operations over the core laboratory: evolve the
//! radial boson star equation, contrast Yukawa vs Coulomb scattering, and
//! trace the reduced kernel integral. Each export takes plain numbers and
//! returns a JSON string the page renders onto canvases.

use num_complex::Complex64;
use serde::Serialize;
use wasm_bindgen::prelude::*;

use bslab_core::kernel::{reduce_i, RadialProfile};
use bslab_core::propagator::InitialDataSpec;
use bslab_core::radial::RadialGrid;
use bslab_core::solver::{
    run_radial, scattering_profile, GridSpec, Integrator, SimulationConfig,
};

fn err_to_js(e: bslab_core::LabError) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn radial_config(
    mass: f64,
    mu0: f64,
    coupling: f64,
    amplitude: f64,
    width: f64,
    dt: f64,
    t_end: f64,
    n_r: usize,
    r_max: f64,
    stride: usize,
) -> SimulationConfig {
    SimulationConfig {
        mass,
        mu0,
        s: 0.5,
        grid: GridSpec::Radial { n_r, r_max },
        initial: InitialDataSpec::radial_gaussian(amplitude, width),
        dt,
        t_end,
        integrator: Integrator::ExpMidpoint,
        coupling,
        sample_stride: stride,
        linf_refine: false,
        small_data_threshold: 1e9,
    }
}

#[derive(Serialize)]
struct EvolutionFrame {
    t: f64,
    profile: Vec<f64>,
}

#[derive(Serialize)]
struct EvolutionResult {
    radii: Vec<f64>,
    frames: Vec<EvolutionFrame>,
    times: Vec<f64>,
    mass_drift: Vec<f64>,
    energy_drift: Vec<f64>,
    linf: Vec<f64>,
}

/// Evolve a radial gaussian and return |u(r, t)| snapshots plus
/// conserved-quantity drift series.
#[wasm_bindgen]
pub fn evolve_radial(
    mass: f64,
    mu0: f64,
    coupling: f64,
    amplitude: f64,
    width: f64,
    t_end: f64,
) -> Result<String, JsValue> {
    let n_r = 384;
    let r_max = (t_end + 12.0).max(24.0);
    let dt = 0.02;
    let t_end = (t_end.max(1.0) / dt).round() * dt;
    let n_frames = 60usize;
    let stride = ((t_end / dt) as usize / n_frames).max(1);
    let cfg = radial_config(
        mass, mu0, coupling, amplitude, width, dt, t_end, n_r, r_max, stride,
    );
    let traj = run_radial(&cfg).map_err(err_to_js)?;

    // downsample radii for the plot
    let grid = traj.fields[0].grid().clone();
    let keep_r = 256.min(grid.num_modes());
    let step_r = grid.num_modes() / keep_r;
    let radii: Vec<f64> = (0..keep_r).map(|j| grid.radius(j * step_r)).collect();
    let frames: Vec<EvolutionFrame> = traj
        .times
        .iter()
        .zip(&traj.fields)
        .map(|(t, f)| {
            let u = f.u_values();
            EvolutionFrame {
                t: *t,
                profile: (0..keep_r).map(|j| u[j * step_r].norm()).collect(),
            }
        })
        .collect();
    let m0 = traj.records[0].mass;
    let e0 = traj.records[0].energy;
    let result = EvolutionResult {
        radii,
        frames,
        times: traj.times.clone(),
        mass_drift: traj
            .records
            .iter()
            .map(|r| ((r.mass - m0) / m0).abs().max(1e-18))
            .collect(),
        energy_drift: traj
            .records
            .iter()
            .map(|r| ((r.energy - e0) / e0).abs().max(1e-18))
            .collect(),
        linf: traj.records.iter().map(|r| r.linf_norm).collect(),
    };
    Ok(serde_json::to_string(&result).expect("serializes"))
}

#[derive(Serialize)]
struct ScatteringResult {
    bases: Vec<f64>,
    yukawa_gaps: Vec<f64>,
    coulomb_gaps: Vec<f64>,
    ratios: Vec<f64>,
}

/// Dyadic profile-gap series `G_k = |phi(2 T_k) - phi(T_k)|_{H^s}` for a
/// Yukawa run against its Coulomb twin: scattering makes the Yukawa series
/// fall while the ratio climbs.
#[wasm_bindgen]
pub fn scattering_contrast(
    mass: f64,
    mu0: f64,
    amplitude: f64,
    t_max: f64,
) -> Result<String, JsValue> {
    let t_max = t_max.clamp(8.0, 48.0);
    let mut bases = Vec::new();
    let mut b = t_max / 8.0;
    while 2.0 * b <= t_max {
        bases.push(b);
        b *= 2.0;
    }
    let dt = 0.04;
    let t_end = (t_max / dt).round() * dt;
    let run_gaps = |mu: f64| -> Result<Vec<f64>, JsValue> {
        let cfg = radial_config(
            mass,
            mu,
            1.0,
            amplitude,
            1.0,
            dt,
            t_end,
            1024,
            t_max + 20.0,
            (0.5 / dt) as usize,
        );
        let traj = run_radial(&cfg).map_err(err_to_js)?;
        Ok(scattering_profile(&traj, mass, 0.75, &bases).dyadic_gaps)
    };
    let yukawa = run_gaps(mu0.max(0.05))?;
    let coulomb = run_gaps(0.0)?;
    let ratios = coulomb
        .iter()
        .zip(&yukawa)
        .map(|(c, y)| c / y.max(1e-300))
        .collect();
    Ok(serde_json::to_string(&ScatteringResult {
        bases,
        yukawa_gaps: yukawa,
        coulomb_gaps: coulomb,
        ratios,
    })
    .expect("serializes"))
}

#[derive(Serialize)]
struct KernelCurve {
    taus: Vec<f64>,
    values: Vec<f64>,
    degenerate_from: f64,
}

/// The reduced delta-constrained kernel integral as a curve in tau, for
/// gaussian profiles. Values inside the collinear-degenerate fringe
/// |tau| >= 0.95 |xi| are reported as-is but flagged by `degenerate_from`.
#[wasm_bindgen]
pub fn kernel_curve(
    ximag: f64,
    m: f64,
    phi_center: f64,
    phi_width: f64,
    psi_center: f64,
    psi_width: f64,
) -> Result<String, JsValue> {
    if !(ximag > 0.0) {
        return Err(JsValue::from_str("|xi| must be positive"));
    }
    let phi = RadialProfile::GaussianBump {
        center: phi_center.max(0.0),
        width: phi_width.max(0.05),
    };
    let psi = RadialProfile::GaussianBump {
        center: psi_center.max(0.0),
        width: psi_width.max(0.05),
    };
    let n = 161;
    let tau_max = ximag * 1.2 + 0.5;
    let taus: Vec<f64> = (0..n)
        .map(|i| -tau_max + 2.0 * tau_max * i as f64 / (n - 1) as f64)
        .collect();
    let mut values = Vec::with_capacity(n);
    for &tau in &taus {
        values.push(reduce_i(&phi, &psi, tau, ximag, m).map_err(err_to_js)?);
    }
    Ok(serde_json::to_string(&KernelCurve {
        taus,
        values,
        degenerate_from: 0.95 * ximag,
    })
    .expect("serializes"))
}

/// Quick self-check used by the page footer: unitarity of the propagator.
#[wasm_bindgen]
pub fn self_check() -> Result<String, JsValue> {
    let grid = RadialGrid::new(64, 8.0).map_err(err_to_js)?;
    let f = InitialDataSpec::radial_gaussian(1.0, 1.0)
        .realize_radial(&grid)
        .map_err(err_to_js)?;
    let drift: f64 = (f.evolve_free(1.0, 1.0).l2_norm() - f.l2_norm()).abs() / f.l2_norm();
    let phase = f.scaled(Complex64::from_polar(1.0, 0.7));
    let gauge = (phase.nonlinearity(1.0).l2_norm() - f.nonlinearity(1.0).l2_norm()).abs();
    Ok(format!(
        "{{\"unitarity_drift\":{drift:e},\"gauge_defect\":{gauge:e}}}"
    ))
}
