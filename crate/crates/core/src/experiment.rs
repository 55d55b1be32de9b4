//! Configuration-driven experiment runner: parses a strict TOML experiment
//! file, dispatches to the solver / estimate / kernel / variation harnesses,
//! and renders machine-readable reports.
//!
//! Outputs are deterministic for a fixed config and seed: reports are
//! serialized from ordered structs, sweeps merge tuples in declaration
//! order, and wall-clock data stays out of `result.json` (the manifest
//! carries it).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::realize_dirac_initial;
use crate::error::{LabError, Result};
use crate::estimates::{run_sweep, EstimateReport, RatioRow, SweepSpec};
use crate::field_ops::LabField;
use crate::grid::FourierGrid;
use crate::kernel::{oracle_i, reduce_i, RadialProfile};
use crate::propagator::InitialDataSpec;
use crate::radial::{RadialField, RadialGrid};
use crate::solver::{
    picard_iterate, run, run_radial, run_spectral, scattering_profile, DiagnosticsRecord,
    GridSpec, SimulationConfig, Trajectory,
};
use crate::variation::{
    adapted_vp_norm, vp_norm_values, vp_norm_values_bruteforce, SampledPath,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Simulate,
    SimulateDirac,
    Picard,
    EstimateSweep,
    KernelCheck,
    VnormCheck,
    ScatteringCompare,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 7] = [
        ExperimentKind::Simulate,
        ExperimentKind::SimulateDirac,
        ExperimentKind::Picard,
        ExperimentKind::EstimateSweep,
        ExperimentKind::KernelCheck,
        ExperimentKind::VnormCheck,
        ExperimentKind::ScatteringCompare,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExperimentKind::Simulate => "simulate",
            ExperimentKind::SimulateDirac => "simulate-dirac",
            ExperimentKind::Picard => "picard",
            ExperimentKind::EstimateSweep => "estimate-sweep",
            ExperimentKind::KernelCheck => "kernel-check",
            ExperimentKind::VnormCheck => "vnorm-check",
            ExperimentKind::ScatteringCompare => "scattering-compare",
        }
    }

    pub fn parse(name: &str) -> Option<Self> {
        Self::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// Spinor run: a scalar datum loaded into the four components.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiracExperiment {
    pub base: SimulationConfig,
    /// complex weights (re, im) for the four spinor components
    pub weights: [[f64; 2]; 4],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PicardExperiment {
    pub base: SimulationConfig,
    pub n_iters: usize,
    /// initial data is rescaled to this H^s size before iterating
    pub delta: f64,
    /// also run the stepping integrator and report the sup-H^s distance
    #[serde(default)]
    pub compare_stepper: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelCheckSpec {
    pub phi: RadialProfile,
    pub psi: RadialProfile,
    pub taus: Vec<f64>,
    pub ximags: Vec<f64>,
    pub masses: Vec<f64>,
    pub eps_delta: f64,
    pub oracle_n: usize,
    /// relative agreement demanded on compared tuples
    pub tolerance: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VnormCheckSpec {
    pub n_paths: usize,
    /// samples per path (at most 13 so the brute force stays exact)
    pub max_points: usize,
    pub ps: Vec<f64>,
    pub seed: u64,
    /// radial grid carrying the path values
    pub n_r: usize,
    pub r_max: f64,
    /// free-wave adapted-variation check: mass and window
    pub free_wave_mass: f64,
    pub free_wave_t_end: f64,
    pub free_wave_samples: usize,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatteringCompareSpec {
    /// the Yukawa run; the contrast run reuses it with `coulomb_mu0`
    pub base: SimulationConfig,
    pub coulomb_mu0: f64,
    pub dyadic_bases: Vec<f64>,
}

/// One experiment file: kind plus the matching payload. Unknown keys are
/// rejected wholesale; the payload must match the declared kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct ExperimentFile {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate_dirac: Option<DiracExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub picard: Option<PicardExperiment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimate_sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_check: Option<KernelCheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vnorm_check: Option<VnormCheckSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scattering_compare: Option<ScatteringCompareSpec>,
}

impl ExperimentFile {
    pub fn from_toml(text: &str) -> Result<Self> {
        let file: ExperimentFile =
            toml::from_str(text).map_err(|e| LabError::Config(format!("config parse: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        let present: Vec<&str> = [
            ("simulate", self.simulate.is_some()),
            ("simulate-dirac", self.simulate_dirac.is_some()),
            ("picard", self.picard.is_some()),
            ("estimate-sweep", self.estimate_sweep.is_some()),
            ("kernel-check", self.kernel_check.is_some()),
            ("vnorm-check", self.vnorm_check.is_some()),
            ("scattering-compare", self.scattering_compare.is_some()),
        ]
        .iter()
        .filter(|(_, p)| *p)
        .map(|(n, _)| *n)
        .collect();
        if present.len() != 1 || present[0] != self.kind.name() {
            return Err(LabError::Config(format!(
                "experiment kind `{}` needs exactly its own payload table, found: [{}]",
                self.kind.name(),
                present.join(", ")
            )));
        }
        Ok(())
    }

    /// Apply a seed override to every seeded knob.
    pub fn override_seed(&mut self, seed: u64) {
        self.seed = Some(seed);
        if let Some(s) = &mut self.simulate {
            if s.initial.seed.is_some() {
                s.initial.seed = Some(seed);
            }
        }
        if let Some(d) = &mut self.simulate_dirac {
            if d.base.initial.seed.is_some() {
                d.base.initial.seed = Some(seed);
            }
        }
        if let Some(p) = &mut self.picard {
            if p.base.initial.seed.is_some() {
                p.base.initial.seed = Some(seed);
            }
        }
        if let Some(e) = &mut self.estimate_sweep {
            e.base_seed = seed;
        }
        if let Some(v) = &mut self.vnorm_check {
            v.seed = seed;
        }
    }
}

// ---- reports -----------------------------------------------------------------

#[derive(Clone, Debug, Serialize)]
pub struct SimulateReport {
    pub final_time: f64,
    pub mass_initial: f64,
    pub mass_drift_rel: f64,
    pub energy_initial: f64,
    pub energy_drift_rel: f64,
    pub final_hs_norm: f64,
    pub diagnostics: Vec<DiagnosticsRecord>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PicardReport {
    pub increments: Vec<f64>,
    pub ratios: Vec<f64>,
    pub diverged: bool,
    pub final_hs_norm: f64,
    /// sup-H^s distance from the exp-rk4 run over the window, when requested
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stepper_sup_distance: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelRow {
    pub tau: f64,
    pub ximag: f64,
    pub m: f64,
    pub reduced: f64,
    pub oracle: f64,
    pub rel_err: f64,
    /// compared | vanishing | degenerate
    pub status: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelReport {
    pub rows: Vec<KernelRow>,
    pub compared: usize,
    pub max_rel_err: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct VnormReport {
    pub paths_checked: usize,
    pub dp_equals_bruteforce: bool,
    pub max_abs_discrepancy: f64,
    pub embedding_monotone: bool,
    pub free_wave_adapted_v2: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScatteringCompareReport {
    pub dyadic_times: Vec<f64>,
    pub yukawa_gaps: Vec<f64>,
    pub coulomb_gaps: Vec<f64>,
    pub gap_ratios: Vec<f64>,
    pub yukawa_strictly_decreasing: bool,
    pub ratio_strictly_increasing: bool,
}

/// Everything an experiment produces; the caller decides where files go.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "report_kind", rename_all = "kebab-case")]
pub enum Report {
    Simulate(SimulateReport),
    SimulateDirac(SimulateReport),
    Picard(PicardReport),
    EstimateSweep(EstimateReport),
    KernelCheck(KernelReport),
    VnormCheck(VnormReport),
    ScatteringCompare(ScatteringCompareReport),
}

#[derive(Clone, Debug)]
pub struct ExperimentOutput {
    /// full report, serialized into `result.json` by the caller
    pub report: Report,
    /// `diagnostics.csv` body, when the experiment produces a trajectory
    pub diagnostics_csv: Option<String>,
    /// extra CSV artifact: (file name, body)
    pub aux_csv: Option<(String, String)>,
}

impl ExperimentOutput {
    pub fn result_json(&self, config: &ExperimentFile) -> String {
        #[derive(Serialize)]
        struct ResultDoc<'a> {
            kind: &'a str,
            config: &'a ExperimentFile,
            report: &'a Report,
        }
        serde_json::to_string_pretty(&ResultDoc {
            kind: config.kind.name(),
            config,
            report: &self.report,
        })
        .expect("reports serialize")
        + "\n"
    }
}

fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from("t,mass,energy,hs_norm,linf_norm,profile_gap\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.t, r.mass, r.energy, r.hs_norm, r.linf_norm, r.profile_gap
        ));
    }
    out
}

fn estimates_csv(report: &EstimateReport) -> String {
    let mut out = String::from("estimate,params,ratio,fit_slope,fit_resid,verdict\n");
    let fit_for = |row: &RatioRow| {
        report.fits.iter().find(|f| {
            row.params
                .iter()
                .filter(|(n, _)| n != "seed" && n != "high_tau_fraction")
                .all(|(n, v)| {
                    f.group.ends_with(n) || f.group.contains(&format!("{n}={v};"))
                })
        })
    };
    for row in &report.rows {
        let params: String = row
            .params
            .iter()
            .map(|(n, v)| format!("{n}={v}"))
            .collect::<Vec<_>>()
            .join(";");
        if row.skipped {
            out.push_str(&format!("{},{params},,,,skipped\n", report.estimate.name()));
            continue;
        }
        let (slope, resid, verdict) = match fit_for(row) {
            Some(f) => (
                format!("{}", f.fit.slope),
                format!("{}", f.fit.residual),
                format!("{:?}", f.verdict).to_lowercase(),
            ),
            None => (String::new(), String::new(), String::new()),
        };
        out.push_str(&format!(
            "{},{params},{},{slope},{resid},{verdict}\n",
            report.estimate.name(),
            row.ratio
        ));
    }
    out
}

fn simulate_report<F: LabField>(traj: &Trajectory<F>) -> SimulateReport {
    let first = &traj.records[0];
    let mass_drift = traj
        .records
        .iter()
        .map(|r| (r.mass - first.mass).abs())
        .fold(0.0, f64::max)
        / first.mass.max(1e-300);
    let energy_drift = traj
        .records
        .iter()
        .map(|r| (r.energy - first.energy).abs())
        .fold(0.0, f64::max)
        / first.energy.abs().max(1e-300);
    SimulateReport {
        final_time: *traj.times.last().unwrap(),
        mass_initial: first.mass,
        mass_drift_rel: mass_drift,
        energy_initial: first.energy,
        energy_drift_rel: energy_drift,
        final_hs_norm: traj.records.last().unwrap().hs_norm,
        diagnostics: traj.records.clone(),
    }
}

/// Near-boundary kernel tuples where the collinear degeneracy breaks the
/// 1-D reduction (see the module docs): flagged, not compared.
pub fn kernel_tuple_degenerate(tau: f64, ximag: f64) -> bool {
    tau.abs() >= 0.95 * ximag
}

/// Execute an experiment. Pure given (config, seeds); all file handling is
/// the caller's.
pub fn execute(file: &ExperimentFile) -> Result<ExperimentOutput> {
    file.validate()?;
    match file.kind {
        ExperimentKind::Simulate => {
            let cfg = file.simulate.as_ref().expect("validated");
            cfg.validate()?;
            let (report, csv) = match cfg.grid {
                GridSpec::Radial { .. } => {
                    let traj = run_radial(cfg)?;
                    (simulate_report(&traj), diagnostics_csv(&traj.records))
                }
                GridSpec::Spectral { .. } => {
                    let traj = run_spectral(cfg)?;
                    (simulate_report(&traj), diagnostics_csv(&traj.records))
                }
            };
            Ok(ExperimentOutput {
                report: Report::Simulate(report),
                diagnostics_csv: Some(csv),
                aux_csv: None,
            })
        }
        ExperimentKind::SimulateDirac => {
            let spec = file.simulate_dirac.as_ref().expect("validated");
            spec.base.validate()?;
            let GridSpec::Spectral { n, box_scale } = spec.base.grid else {
                return Err(LabError::parameter(
                    "grid",
                    "the spinor system runs on a 3-D grid",
                ));
            };
            let grid = FourierGrid::new(n, box_scale)?;
            let weights: [Complex64; 4] =
                std::array::from_fn(|c| Complex64::new(spec.weights[c][0], spec.weights[c][1]));
            let pair = realize_dirac_initial(&spec.base.initial, &grid, weights, spec.base.mass)?;
            let traj = run(&spec.base, |_| Ok(pair))?;
            Ok(ExperimentOutput {
                report: Report::SimulateDirac(simulate_report(&traj)),
                diagnostics_csv: Some(diagnostics_csv(&traj.records)),
                aux_csv: None,
            })
        }
        ExperimentKind::Picard => {
            let spec = file.picard.as_ref().expect("validated");
            spec.base.validate()?;
            let GridSpec::Radial { n_r, r_max } = spec.base.grid else {
                return Err(LabError::parameter(
                    "grid",
                    "the Picard harness runs on the radial grid",
                ));
            };
            let grid = RadialGrid::new(n_r, r_max)?;
            let mut f = spec.base.initial.realize_radial(&grid)?;
            f.dealias();
            let hs = f.sobolev_norm(spec.base.s);
            if hs > 0.0 {
                f = f.scaled(Complex64::new(spec.delta / hs, 0.0));
            }
            let mut cfg = spec.base.clone();
            cfg.small_data_threshold = spec.delta;
            let data = f.clone();
            let out = picard_iterate(&cfg, move |_| Ok(data), spec.n_iters)?;
            if out.diverged {
                return Err(LabError::PicardDiverged {
                    iterate: out.increments.len(),
                });
            }
            let last = out.iterates.last().expect("iterates");
            let stepper_sup_distance = if spec.compare_stepper {
                let mut cfg_rk = cfg.clone();
                cfg_rk.integrator = crate::solver::Integrator::ExpRk4;
                let data = f.clone();
                let traj = run(&cfg_rk, move |_| Ok(data))?;
                Some(
                    last.fields
                        .iter()
                        .zip(&traj.fields)
                        .map(|(a, b)| a.sub(b).sobolev_norm(cfg.s))
                        .fold(0.0, f64::max),
                )
            } else {
                None
            };
            let report = PicardReport {
                increments: out.increments.clone(),
                ratios: out.ratios.clone(),
                diverged: out.diverged,
                final_hs_norm: last.records.last().unwrap().hs_norm,
                stepper_sup_distance,
            };
            Ok(ExperimentOutput {
                report: Report::Picard(report),
                diagnostics_csv: Some(diagnostics_csv(&last.records)),
                aux_csv: None,
            })
        }
        ExperimentKind::EstimateSweep => {
            let spec = file.estimate_sweep.as_ref().expect("validated");
            let report = run_sweep(spec)?;
            let csv = estimates_csv(&report);
            Ok(ExperimentOutput {
                report: Report::EstimateSweep(report),
                diagnostics_csv: None,
                aux_csv: Some(("estimates.csv".into(), csv)),
            })
        }
        ExperimentKind::KernelCheck => {
            let spec = file.kernel_check.as_ref().expect("validated");
            let mut rows = Vec::new();
            let mut max_rel = 0.0_f64;
            let mut compared = 0;
            for &m in &spec.masses {
                for &tau in &spec.taus {
                    for &ximag in &spec.ximags {
                        let reduced = reduce_i(&spec.phi, &spec.psi, tau, ximag, m)?;
                        if kernel_tuple_degenerate(tau, ximag) {
                            rows.push(KernelRow {
                                tau,
                                ximag,
                                m,
                                reduced,
                                oracle: f64::NAN,
                                rel_err: f64::NAN,
                                status: "degenerate".into(),
                            });
                            continue;
                        }
                        let oracle = oracle_i(
                            &spec.phi,
                            &spec.psi,
                            tau,
                            ximag,
                            m,
                            spec.eps_delta,
                            spec.oracle_n,
                            2,
                        )?;
                        if reduced.abs() < 1e-4 && oracle.value.abs() < 1e-4 {
                            rows.push(KernelRow {
                                tau,
                                ximag,
                                m,
                                reduced,
                                oracle: oracle.value,
                                rel_err: 0.0,
                                status: "vanishing".into(),
                            });
                            continue;
                        }
                        let rel =
                            (oracle.value - reduced).abs() / reduced.abs().max(1e-300);
                        max_rel = max_rel.max(rel);
                        compared += 1;
                        rows.push(KernelRow {
                            tau,
                            ximag,
                            m,
                            reduced,
                            oracle: oracle.value,
                            rel_err: rel,
                            status: "compared".into(),
                        });
                    }
                }
            }
            let passed = max_rel <= spec.tolerance && compared > 0;
            let mut csv = String::from("tau,ximag,m,reduced,oracle,rel_err\n");
            for r in &rows {
                csv.push_str(&format!(
                    "{},{},{},{},{},{}\n",
                    r.tau, r.ximag, r.m, r.reduced, r.oracle, r.rel_err
                ));
            }
            Ok(ExperimentOutput {
                report: Report::KernelCheck(KernelReport {
                    rows,
                    compared,
                    max_rel_err: max_rel,
                    tolerance: spec.tolerance,
                    passed,
                }),
                diagnostics_csv: None,
                aux_csv: Some(("kernel.csv".into(), csv)),
            })
        }
        ExperimentKind::VnormCheck => {
            let spec = file.vnorm_check.as_ref().expect("validated");
            if spec.max_points > 13 {
                return Err(LabError::parameter(
                    "max_points",
                    "brute force stays exact only up to 13 samples",
                ));
            }
            let grid = RadialGrid::new(spec.n_r, spec.r_max)?;
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(spec.seed);
            let mut max_disc = 0.0_f64;
            let mut equal = true;
            let mut monotone = true;
            for _ in 0..spec.n_paths {
                let k = 3 + (rng.random::<u64>() as usize) % (spec.max_points - 2);
                let vals: Vec<RadialField> = (0..k)
                    .map(|_| {
                        let modes = (0..grid.num_modes())
                            .map(|_| {
                                Complex64::new(
                                    rng.random::<f64>() - 0.5,
                                    rng.random::<f64>() - 0.5,
                                )
                            })
                            .collect();
                        RadialField::from_modes(grid.clone(), modes)
                    })
                    .collect();
                let dist = |a: &RadialField, b: &RadialField| a.sub(b).l2_norm();
                let mut previous: Option<f64> = None;
                for &p in &spec.ps {
                    let dp = vp_norm_values(&vals, p, dist)?;
                    let bf = vp_norm_values_bruteforce(&vals, p, dist)?;
                    if dp != bf {
                        equal = false;
                    }
                    max_disc = max_disc.max((dp - bf).abs());
                    if let Some(prev) = previous {
                        // ps are checked in increasing order: V^q <= V^p
                        if dp > prev * (1.0 + 1e-12) {
                            monotone = false;
                        }
                    }
                    previous = Some(dp);
                }
            }
            // adapted variation of a free wave
            let f = InitialDataSpec::radial_gaussian(1.0, 1.0).realize_radial(&grid)?;
            let times: Vec<f64> = (0..spec.free_wave_samples)
                .map(|j| j as f64 * spec.free_wave_t_end / (spec.free_wave_samples - 1) as f64)
                .collect();
            let values: Vec<RadialField> = times
                .iter()
                .map(|t| f.evolve_free(*t, spec.free_wave_mass))
                .collect();
            let path = SampledPath::new(times, values)?;
            let adapted = adapted_vp_norm(&path, spec.free_wave_mass, 2.0)?;
            Ok(ExperimentOutput {
                report: Report::VnormCheck(VnormReport {
                    paths_checked: spec.n_paths,
                    dp_equals_bruteforce: equal,
                    max_abs_discrepancy: max_disc,
                    embedding_monotone: monotone,
                    free_wave_adapted_v2: adapted,
                }),
                diagnostics_csv: None,
                aux_csv: None,
            })
        }
        ExperimentKind::ScatteringCompare => {
            let spec = file.scattering_compare.as_ref().expect("validated");
            spec.base.validate()?;
            let yukawa = run_radial(&spec.base)?;
            let mut coulomb_cfg = spec.base.clone();
            coulomb_cfg.mu0 = spec.coulomb_mu0;
            let coulomb = run_radial(&coulomb_cfg)?;
            let y_rep =
                scattering_profile(&yukawa, spec.base.mass, spec.base.s, &spec.dyadic_bases);
            let c_rep =
                scattering_profile(&coulomb, spec.base.mass, spec.base.s, &spec.dyadic_bases);
            let ratios: Vec<f64> = c_rep
                .dyadic_gaps
                .iter()
                .zip(&y_rep.dyadic_gaps)
                .map(|(c, y)| c / y)
                .collect();
            let decreasing = y_rep
                .dyadic_gaps
                .windows(2)
                .all(|w| w[1] < w[0]);
            let increasing = ratios.windows(2).all(|w| w[1] > w[0]);
            Ok(ExperimentOutput {
                report: Report::ScatteringCompare(ScatteringCompareReport {
                    dyadic_times: y_rep.dyadic_times.clone(),
                    yukawa_gaps: y_rep.dyadic_gaps,
                    coulomb_gaps: c_rep.dyadic_gaps,
                    gap_ratios: ratios,
                    yukawa_strictly_decreasing: decreasing,
                    ratio_strictly_increasing: increasing,
                }),
                diagnostics_csv: Some(diagnostics_csv(&yukawa.records)),
                aux_csv: None,
            })
        }
    }
}

/// Human-oriented schema text for `describe`.
pub fn describe(kind: ExperimentKind) -> String {
    let common = "\
top-level keys:
  kind            one of: simulate | simulate-dirac | picard | estimate-sweep |
                  kernel-check | vnorm-check | scattering-compare
  seed            optional; overrides every seeded knob (CLI --seed wins)
";
    let body = match kind {
        ExperimentKind::Simulate => "\
[simulate]
  mass            dispersion mass m >= 0 in sqrt(m^2 + |xi|^2)
  mu0             Yukawa screening (0 = Coulomb); multiplier 4pi/(|xi|^2+mu0^2)
  s               Sobolev regularity used by diagnostics
  dt, t_end       step and window (t_end must be a multiple of dt)
  integrator      exp-midpoint | exp-rk4 | picard
  coupling        nonlinearity scale/sign (default 1; 0 = free flow)
  sample_stride   keep every n-th step (default 1)
  linf_refine     sup norms on the 2x zero-padded grid (default false)
  [simulate.grid] kind = \"radial\" (n_r, r_max) or \"spectral\" (n, box_scale)
  [simulate.initial]
    shape         gaussian | plane-wave | annulus-random | radial-gaussian
    amplitude     datum size; plus shape knobs: width / center / modulation /
                  mode / lambda / seed / radial
outputs: result.json (drift summary + diagnostics), diagnostics.csv
",
        ExperimentKind::SimulateDirac => "\
[simulate-dirac]
  weights         four [re, im] pairs loading the scalar datum into the spinor
  [simulate-dirac.base]   same table as [simulate]; grid must be spectral;
                  coupling is the (real) Hartree coupling of the spinor system
outputs: result.json, diagnostics.csv (mass = total spinor L2 mass)
",
        ExperimentKind::Picard => "\
[picard]
  n_iters         number of fixed-point sweeps
  delta           H^s size the datum is rescaled to (small-data threshold)
  compare_stepper also run exp-rk4 and report the sup-H^s distance
  [picard.base]   same table as [simulate]; grid must be radial
outputs: result.json (increments d_k, ratios d_{k+1}/d_k), diagnostics.csv
",
        ExperimentKind::EstimateSweep => "\
[estimate-sweep]
  estimate        radial-strichartz | l2l6-strichartz | localized-strichartz |
                  cube-square-sum | bilinear | trilinear
  lambdas         dyadic band scales (bilinear: both factors; trilinear
                  general: the growing pair)
  mus             cube / output-band scales (localized, cube-square-sum,
                  bilinear)
  masses          dispersion masses to sweep
  mu0             potential parameter (trilinear)
  window          { t_end, dt } sampling window (l2l6 scales it with lambda,
                  capped at t = 32)
  ensemble_count  seeds per tuple (max over seeds is reported)
  base_seed       sweep seed
  epsilon         slack exponent for localized/trilinear bounds
  radial_grid     [n_r, r_max] for radial estimates
  spectral_grid   [n, box_scale] for 3-D estimates
  trilinear_radial  true = equal-band radial sweep, false = general sweep
outputs: result.json (rows, exponent fits, verdicts), estimates.csv
",
        ExperimentKind::KernelCheck => "\
[kernel-check]
  phi, psi        radial profiles: { kind = \"indicator\", lo, hi } |
                  { kind = \"gaussian-bump\", center, width } |
                  { kind = \"tabulated\", rs, vals }
  taus, ximags, masses   the comparison grid
  eps_delta       delta smoothing width for the oracle (Richardson over
                  eps, eps/2)
  oracle_n        oracle grid points per axis
  tolerance       relative agreement required on compared tuples
tuples with |tau| >= 0.95 |xi| are flagged degenerate (collinear boundary of
the constraint) and reported without comparison
outputs: result.json, kernel.csv (tau,ximag,m,reduced,oracle,rel_err)
",
        ExperimentKind::VnormCheck => "\
[vnorm-check]
  n_paths         random paths to check (DP against brute force)
  max_points      samples per path (<= 13)
  ps              variation exponents, increasing (embedding check)
  seed            path RNG seed
  n_r, r_max      radial grid carrying the path values
  free_wave_mass, free_wave_t_end, free_wave_samples
                  adapted-variation check of a free wave (expected ~ 0)
outputs: result.json
",
        ExperimentKind::ScatteringCompare => "\
[scattering-compare]
  coulomb_mu0     screening for the contrast run (typically 0)
  dyadic_bases    base times T_k; gaps G_k = |phi(2 T_k) - phi(T_k)|_{H^s}
  [scattering-compare.base]  same table as [simulate], radial grid; mu0 is
                  the Yukawa run's screening
outputs: result.json (both gap series + ratios), diagnostics.csv (Yukawa run)
",
    };
    format!("{common}\n{body}")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_simulate_toml() -> &'static str {
        r#"
kind = "simulate"

[simulate]
mass = 1.0
mu0 = 1.0
s = 0.5
dt = 0.05
t_end = 0.2
integrator = "exp-midpoint"
coupling = 0.0

[simulate.grid]
kind = "radial"
n_r = 64
r_max = 8.0

[simulate.initial]
shape = "radial-gaussian"
amplitude = 0.1
width = 1.0
radial = true
"#
    }

    #[test]
    fn parse_validate_and_run_minimal() {
        let file = ExperimentFile::from_toml(minimal_simulate_toml()).unwrap();
        let out = execute(&file).unwrap();
        match &out.report {
            Report::Simulate(rep) => {
                assert!(rep.mass_drift_rel < 1e-12);
                assert!(rep.energy_drift_rel < 1e-12);
            }
            other => panic!("wrong report {other:?}"),
        }
        let csv = out.diagnostics_csv.unwrap();
        assert!(csv.starts_with("t,mass,energy,hs_norm,linf_norm,profile_gap\n"));
        assert_eq!(csv.lines().count(), 1 + 5);
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = minimal_simulate_toml().replace("mass = 1.0", "mass = 1.0\nbogus = 3");
        let err = ExperimentFile::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn kind_payload_mismatch_rejected() {
        let text = minimal_simulate_toml().replace("kind = \"simulate\"", "kind = \"picard\"");
        assert!(ExperimentFile::from_toml(&text).is_err());
    }

    #[test]
    fn negative_mass_rejected_with_key() {
        let text = minimal_simulate_toml().replace("mass = 1.0", "mass = -1.0");
        let file = ExperimentFile::from_toml(&text).unwrap();
        let err = execute(&file).unwrap_err();
        assert!(err.to_string().contains("mass"), "{err}");
    }

    #[test]
    fn result_json_is_deterministic() {
        let file = ExperimentFile::from_toml(minimal_simulate_toml()).unwrap();
        let a = execute(&file).unwrap().result_json(&file);
        let b = execute(&file).unwrap().result_json(&file);
        assert_eq!(a, b);
    }

    #[test]
    fn describe_names_every_kind() {
        for kind in ExperimentKind::ALL {
            let text = describe(kind);
            assert!(text.contains(kind.name()), "{kind:?}");
        }
        assert!(describe(ExperimentKind::EstimateSweep).contains("radial-strichartz"));
        assert!(describe(ExperimentKind::Simulate).contains("integrator"));
    }
}
