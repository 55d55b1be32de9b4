//! Discrete p-variation norms, propagator-adapted variation, and the
//! dyadically weighted proxy norm used to monitor solutions.
//!
//! The discrete V^p norm of a sampled path is the exact maximum over all
//! subsequences of the sample times of `(sum ||v(t_k) - v(t_{k-1})||^p)^(1/p)`,
//! computed by dynamic programming in O(K^2) pairwise differences. A
//! brute-force enumeration over subsequences serves as the oracle for small K.

use crate::bands::{dyadic_ladder, DyadicBand};
use crate::error::{LabError, Result};
use crate::field_ops::LabField;

/// Time-stamped samples of a normed path. `K >= 1` (at least two samples),
/// strictly increasing times.
#[derive(Clone, Debug)]
pub struct SampledPath<F> {
    times: Vec<f64>,
    values: Vec<F>,
}

impl<F> SampledPath<F> {
    pub fn new(times: Vec<f64>, values: Vec<F>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(LabError::Config(format!(
                "times ({}) and values ({}) must align",
                times.len(),
                values.len()
            )));
        }
        if times.len() < 2 {
            return Err(LabError::TooFewSamples {
                need: 2,
                got: times.len(),
            });
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(LabError::Config(
                "sample times must be strictly increasing".into(),
            ));
        }
        Ok(SampledPath { times, values })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[F] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Exact discrete V^p over arbitrary values with a supplied distance.
///
/// `best(j) = max_{i<j} best(i) + dist(v_i, v_j)^p`; the answer is
/// `max_j best(j)^(1/p)`.
pub fn vp_norm_values<T>(values: &[T], p: f64, dist: impl Fn(&T, &T) -> f64) -> Result<f64> {
    if p < 1.0 {
        return Err(LabError::parameter("p", "variation exponent must be >= 1"));
    }
    if values.len() < 2 {
        return Err(LabError::TooFewSamples {
            need: 2,
            got: values.len(),
        });
    }
    let k = values.len();
    let mut best = vec![0.0_f64; k];
    let mut answer = 0.0_f64;
    for j in 1..k {
        let mut b = 0.0_f64;
        for i in 0..j {
            let cand = best[i] + dist(&values[i], &values[j]).powf(p);
            if cand > b {
                b = cand;
            }
        }
        best[j] = b;
        if b > answer {
            answer = b;
        }
    }
    Ok(answer.powf(1.0 / p))
}

/// Brute-force oracle: enumerates every subsequence with at least two points.
/// Guarded to paths of at most 17 samples (K <= 16 increments).
pub fn vp_norm_values_bruteforce<T>(
    values: &[T],
    p: f64,
    dist: impl Fn(&T, &T) -> f64,
) -> Result<f64> {
    if p < 1.0 {
        return Err(LabError::parameter("p", "variation exponent must be >= 1"));
    }
    let k = values.len();
    if k < 2 {
        return Err(LabError::TooFewSamples { need: 2, got: k });
    }
    if k > 17 {
        return Err(LabError::parameter(
            "path",
            format!("brute force is guarded to <= 17 samples, got {k}"),
        ));
    }
    let mut answer = 0.0_f64;
    for mask in 0u32..(1 << k) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut sum = 0.0;
        let mut prev: Option<usize> = None;
        for (idx, _) in values.iter().enumerate() {
            if mask & (1 << idx) != 0 {
                if let Some(pv) = prev {
                    sum += dist(&values[pv], &values[idx]).powf(p);
                }
                prev = Some(idx);
            }
        }
        if sum > answer {
            answer = sum;
        }
    }
    Ok(answer.powf(1.0 / p))
}

/// V^p of a field path in the L2 distance.
pub fn vp_norm<F: LabField>(path: &SampledPath<F>, p: f64) -> Result<f64> {
    vp_norm_values(path.values(), p, |a, b| a.sub(b).l2_norm())
}

pub fn vp_norm_bruteforce<F: LabField>(path: &SampledPath<F>, p: f64) -> Result<f64> {
    vp_norm_values_bruteforce(path.values(), p, |a, b| a.sub(b).l2_norm())
}

/// Adapted variation: twists each sample back by the free group,
/// `t -> S_m(-t) u(t)`, then takes V^p. Free waves give 0.
pub fn adapted_vp_norm<F: LabField>(path: &SampledPath<F>, m: f64, p: f64) -> Result<f64> {
    let twisted: Vec<F> = path
        .times()
        .iter()
        .zip(path.values())
        .map(|(t, v)| v.evolve_free(-t, m))
        .collect();
    vp_norm_values(&twisted, p, |a, b| a.sub(b).l2_norm())
}

/// Dyadically weighted proxy norm of a sampled evolution:
/// `( sum_mu mu^(2s) [ adapted-V^2 of P_mu path + ||P_mu u(0)||_L2 ]^2 )^(1/2)`
/// over the dyadic bands below the grid Nyquist radius.
///
/// The adapted-V^2 term is a computable stand-in for the atomic-space norms
/// this quantity would carry in the continuum; reports must label it "proxy".
pub fn xs_proxy_norm<F: LabField>(path: &SampledPath<F>, m: f64, s: f64) -> Result<f64> {
    let ladder = dyadic_ladder(path.values()[0].nyquist_radius());
    let mut acc = 0.0;
    for mu in ladder {
        let band = DyadicBand::smooth(mu)?;
        let projected: Vec<F> = path.values().iter().map(|v| v.lp_project(&band)).collect();
        let proj_path = SampledPath::new(path.times().to_vec(), projected)?;
        let var = adapted_vp_norm(&proj_path, m, 2.0)?;
        let init = proj_path.values()[0].l2_norm();
        acc += mu.powf(2.0 * s) * (var + init) * (var + init);
    }
    Ok(acc.sqrt())
}
