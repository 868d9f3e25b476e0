use serde::{Deserialize, Serialize};

use super::{sub_seed, BoxedEvent, EventFn, Joint, Model};
use crate::error::{invalid, Result};
use crate::events::{crossing_in, one_arm, Direction, EventKind, EventSpec};
use crate::geom::{Point, Window};
use crate::mc::{run_joint, Estimate, TrialPlan};
use crate::tiling::Color;

/// One-arm probabilities `π̂₁(s0, t)` and the fitted decay exponent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmFit {
    pub s0: f64,
    pub t: Vec<f64>,
    pub estimates: Vec<Estimate>,
    /// Least-squares slope of `log π̂₁` against `log(s0/t)`; `None` when
    /// fewer than two estimates are positive.
    pub eta: Option<f64>,
    /// Values of `t` left out of the fit because `π̂₁ = 0`.
    pub dropped: Vec<f64>,
    /// For consecutive `t`, the paired decrease `π̂₁(t_i) − π̂₁(t_{i+1})`
    /// and its standard error.
    pub decreases: Vec<(f64, f64)>,
}

impl ArmFit {
    /// Every consecutive decrease exceeds `k` standard errors.
    pub fn strictly_decreasing(&self, k: f64) -> bool {
        self.decreases.iter().all(|&(d, se)| d > k * se)
    }
}

/// Least-squares slope of `y` on `x`; `None` for fewer than two points or
/// a constant `x`.
fn slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// `π̂₁(s0, t)` for every `t` on shared configurations of `B_{t_max}`, and
/// the exponent `η̂` of `π₁(s0, t) ≈ (s0/t)^η`.
pub fn arm_decay_fit(s0: f64, t_list: &[f64], model: Model, plan: &TrialPlan, seed: u64) -> Result<ArmFit> {
    model.validate()?;
    if !(s0.is_finite() && s0 >= 1.0) {
        return Err(invalid(format!("arm fit needs s0 >= 1, got {s0}")));
    }
    if t_list.is_empty() || t_list.len() > 64 {
        return Err(invalid("arm fit needs between 1 and 64 values of t"));
    }
    if t_list[0] <= s0 || t_list.windows(2).any(|w| w[0] >= w[1]) || !t_list.iter().all(|t| t.is_finite()) {
        return Err(invalid("t values must be finite, increasing and greater than s0"));
    }
    let arms: Vec<BoxedEvent> = t_list
        .iter()
        .map(|&t| Box::new(move |tl: &_| one_arm(tl, s0, t)) as Box<_>)
        .collect();
    let refs: Vec<EventFn> = arms.iter().map(|b| b.as_ref() as EventFn).collect();
    let t_max = *t_list.last().expect("non-empty");
    let window = Window::square(Point::new(0.0, 0.0), t_max)?;
    let run = run_joint(window, model.p, model.intensity, plan, seed, &refs)?;

    let masks: Vec<u64> = (0..t_list.len()).map(|j| 1 << j).collect();
    let joint = Joint::new(&run.values, &masks);
    let mut estimates = Vec::new();
    for (j, &t) in t_list.iter().enumerate() {
        let spec = EventSpec::new(EventKind::OneArm { s: s0, t }, model.p, model.intensity)?;
        estimates.push(joint.estimate(j, spec, plan.z, seed, run.aborted)?);
    }
    let decreases = (1..t_list.len())
        .map(|j| {
            let mut g = vec![0.0; t_list.len()];
            g[j - 1] = 1.0;
            g[j] = -1.0;
            (joint.mean(j - 1) - joint.mean(j), joint.variance(&g).sqrt())
        })
        .collect();
    let (mut xs, mut ys, mut dropped) = (Vec::new(), Vec::new(), Vec::new());
    for (e, &t) in estimates.iter().zip(t_list) {
        if e.p_hat > 0.0 {
            xs.push((s0 / t).ln());
            ys.push(e.p_hat.ln());
        } else {
            dropped.push(t);
        }
    }
    Ok(ArmFit {
        s0,
        t: t_list.to_vec(),
        estimates,
        eta: slope(&xs, &ys),
        dropped,
        decreases,
    })
}

/// Crossing estimates `f̂_s(ρ)` over a grid of aspect ratios and scales.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FsTable {
    pub rho: Vec<f64>,
    pub s: Vec<f64>,
    /// Row-major by scale: `estimates[i * rho.len() + j]` is `f̂_{s_i}(ρ_j)`.
    pub estimates: Vec<Estimate>,
}

impl FsTable {
    pub fn get(&self, rho_index: usize, s_index: usize) -> &Estimate {
        &self.estimates[s_index * self.rho.len() + rho_index]
    }
}

/// `f̂_s(ρ)` for every pair. At each scale all aspect ratios share the
/// configurations of `[0, ρ_max·s] × [0, s]`; distinct scales use
/// independent seeds.
pub fn fs_table(rho_list: &[f64], s_list: &[f64], model: Model, plan: &TrialPlan, seed: u64) -> Result<FsTable> {
    model.validate()?;
    if rho_list.is_empty() || s_list.is_empty() || rho_list.len() > 64 {
        return Err(invalid("fs table needs 1 to 64 aspect ratios and at least one scale"));
    }
    if rho_list.iter().chain(s_list).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(invalid("aspect ratios and scales must be positive"));
    }
    let rho_max = rho_list.iter().cloned().fold(0.0, f64::max);
    let mut estimates = Vec::new();
    for &s in s_list {
        let rects: Vec<Window> = rho_list
            .iter()
            .map(|&r| Window::from_bounds(0.0, 0.0, r * s, s))
            .collect::<Result<_>>()?;
        let events: Vec<BoxedEvent> = rects
            .iter()
            .map(|&w| Box::new(move |t: &_| crossing_in(t, &w, Color::Black, Direction::Horizontal)) as Box<_>)
            .collect();
        let refs: Vec<EventFn> = events.iter().map(|b| b.as_ref() as EventFn).collect();
        let window = Window::from_bounds(0.0, 0.0, rho_max * s, s)?;
        let s_seed = sub_seed(seed, &format!("fs/{s}"));
        let run = run_joint(window, model.p, model.intensity, plan, s_seed, &refs)?;
        let masks: Vec<u64> = (0..rho_list.len()).map(|j| 1 << j).collect();
        let joint = Joint::new(&run.values, &masks);
        for (j, &rho) in rho_list.iter().enumerate() {
            let kind = EventKind::Crossing {
                rho,
                s,
                color: Color::Black,
                direction: Direction::Horizontal,
            };
            let spec = EventSpec::new(kind, model.p, model.intensity)?;
            estimates.push(joint.estimate(j, spec, plan.z, s_seed, run.aborted)?);
        }
    }
    Ok(FsTable {
        rho: rho_list.to_vec(),
        s: s_list.to_vec(),
        estimates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_line() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        assert!((slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn arm_fit_extremes() {
        let plan = TrialPlan::fixed(12);
        let full = arm_decay_fit(1.0, &[2.0, 4.0], Model::new(1.0, 1.0).unwrap(), &plan, 3).unwrap();
        assert_eq!(full.eta, Some(0.0));
        let empty = arm_decay_fit(1.0, &[2.0, 4.0], Model::new(0.0, 1.0).unwrap(), &plan, 3).unwrap();
        assert_eq!(empty.eta, None);
        assert_eq!(empty.dropped, vec![2.0, 4.0]);
    }

    #[test]
    fn fs_table_monotone_in_rho() {
        let t = fs_table(&[1.0, 2.0], &[4.0], Model::critical(), &TrialPlan::fixed(64), 9).unwrap();
        assert!(t.get(0, 0).k >= t.get(1, 0).k);
    }
}
