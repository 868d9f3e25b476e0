use serde::{Deserialize, Serialize};

use super::{sub_seed, Model};
use crate::error::{invalid, Result};
use crate::events::{EventKind, EventSpec, HProfile};
use crate::geom::{Point, Window};
use crate::mc::{run_map_from, run_trials, Estimate, TrialPlan, CHECK_EVERY};
use crate::tiling::Color;

/// `φ_s(α) = P[H_s(0, α)] − P[H_s(α, s/2)]` at one `α`, estimated on
/// shared configurations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiPoint {
    pub alpha: f64,
    /// `P̂[H_s(0, α)]`.
    pub low: f64,
    /// `P̂[H_s(α, s/2)]`.
    pub high: f64,
    pub phi: f64,
    /// Standard error of `phi` from the paired differences.
    pub std_error: f64,
    pub ci: (f64, f64),
    pub n: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiCurve {
    pub s: f64,
    pub model: Model,
    pub grid: Vec<f64>,
    pub points: Vec<PhiPoint>,
    /// Both H probabilities at every grid point come from the same
    /// configurations.
    pub shared_samples: bool,
    pub master_seed: u64,
    pub aborted: u64,
}

/// Profiles of trials `0..n`, grown on demand.
struct Profiles {
    s: f64,
    model: Model,
    plan: TrialPlan,
    seed: u64,
    items: Vec<HProfile>,
    attempted: u64,
    aborted: u64,
}

impl Profiles {
    fn new(s: f64, model: Model, plan: &TrialPlan, seed: u64) -> Self {
        Profiles {
            s,
            model,
            plan: *plan,
            seed,
            items: Vec::new(),
            attempted: 0,
            aborted: 0,
        }
    }

    fn grow_to(&mut self, n: u64) -> Result<()> {
        if n <= self.attempted {
            return Ok(());
        }
        let window = Window::square(Point::new(0.0, 0.0), self.s / 2.0)?;
        let plan = TrialPlan { n_max: n, ..self.plan };
        let s = self.s;
        let got = run_map_from(
            window,
            self.model.p,
            self.model.intensity,
            &plan,
            self.seed,
            self.attempted,
            self.aborted,
            |t| HProfile::new(t, s),
        )?;
        self.items.extend(got.values);
        self.aborted += got.aborted;
        self.attempted = n;
        Ok(())
    }

    fn at(&self, alpha: f64) -> Result<PhiPoint> {
        let h = self.s / 2.0;
        let (mut low, mut high, mut sum2) = (0u64, 0u64, 0u64);
        for pr in &self.items {
            let a = pr.holds(0.0, alpha)?;
            let b = pr.holds(alpha, h)?;
            low += a as u64;
            high += b as u64;
            sum2 += (a != b) as u64;
        }
        let n = self.items.len() as u64;
        let nf = n as f64;
        let phi = (low as f64 - high as f64) / nf;
        let var = (sum2 as f64 / nf - phi * phi).max(0.0) / nf;
        let se = var.sqrt();
        let z = self.plan.z;
        Ok(PhiPoint {
            alpha,
            low: low as f64 / nf,
            high: high as f64 / nf,
            phi,
            std_error: se,
            ci: (phi - z * se, phi + z * se),
            n,
        })
    }
}

fn check_scale(s: f64) -> Result<()> {
    if !(s.is_finite() && s > 0.0) {
        return Err(invalid(format!("s must be positive, got {s}")));
    }
    Ok(())
}

/// `φ̂_s` on `grid` from `plan.n_max` shared configurations.
pub fn phi_curve(s: f64, grid: &[f64], model: Model, plan: &TrialPlan, seed: u64) -> Result<PhiCurve> {
    check_scale(s)?;
    model.validate()?;
    if grid.is_empty() {
        return Err(invalid("phi grid is empty"));
    }
    if grid.iter().any(|&a| !(0.0..=s / 2.0).contains(&a)) {
        return Err(invalid(format!("phi grid must lie in [0, s/2] = [0, {}]", s / 2.0)));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("phi grid must be strictly increasing"));
    }
    let mut pr = Profiles::new(s, model, plan, seed);
    pr.grow_to(plan.n_max)?;
    let points = grid.iter().map(|&a| pr.at(a)).collect::<Result<Vec<_>>>()?;
    Ok(PhiCurve {
        s,
        model,
        grid: grid.to_vec(),
        points,
        shared_samples: true,
        master_seed: seed,
        aborted: pr.aborted,
    })
}

/// Bisection estimate of `α_s = min(φ_s⁻¹(c0/4), s/4)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaHat {
    pub s: f64,
    pub c0: f64,
    pub value: f64,
    pub bracket: (f64, f64),
    /// `φ̂_s(s/4) < c0/4`, so `value = s/4`.
    pub clipped: bool,
    /// The interval at some evaluation point still contained `c0/4` after
    /// `plan.n_max` trials; `bracket` is where the search stopped.
    pub inconclusive: bool,
    /// Configurations used at the end of the search.
    pub n: u64,
    pub aborted: u64,
    /// Every evaluation, in order.
    pub steps: Vec<PhiPoint>,
}

/// Trials used before the first doubling.
const ALPHA_START_TRIALS: u64 = 4 * CHECK_EVERY;

/// Locate `α̂_s` by bisection on `[0, s/4]` until the bracket is at most
/// `s/128` wide.
///
/// A midpoint is classified only when the interval of `φ̂` there excludes
/// `c0/4`; otherwise the number of configurations doubles, up to
/// `plan.n_max`. The lower end keeps `φ̂ < c0/4` and the upper end
/// `φ̂ ≥ c0/4`.
pub fn alpha_hat(s: f64, c0: f64, model: Model, plan: &TrialPlan, seed: u64) -> Result<AlphaHat> {
    check_scale(s)?;
    model.validate()?;
    plan.validate()?;
    if !(c0 > 0.0 && c0 <= 1.0) {
        return Err(invalid(format!("c0 must lie in (0, 1], got {c0}")));
    }
    let target = c0 / 4.0;
    let mut pr = Profiles::new(s, model, plan, seed);
    let mut n = plan.n_max.min(ALPHA_START_TRIALS);
    pr.grow_to(n)?;
    let mut steps = Vec::new();
    let mut inconclusive = false;

    // Some(true): φ ≥ target; Some(false): φ < target.
    let classify = |alpha: f64, pr: &mut Profiles, n: &mut u64, steps: &mut Vec<PhiPoint>| -> Result<Option<bool>> {
        loop {
            let pt = pr.at(alpha)?;
            steps.push(pt);
            if pt.ci.0 > target || (pt.std_error == 0.0 && pt.phi >= target) {
                return Ok(Some(true));
            }
            if pt.ci.1 < target {
                return Ok(Some(false));
            }
            if *n >= plan.n_max {
                return Ok(None);
            }
            *n = (*n * 2).min(plan.n_max);
            pr.grow_to(*n)?;
        }
    };

    let top = s / 4.0;
    let (mut lo, mut hi) = (0.0, top);
    match classify(top, &mut pr, &mut n, &mut steps)? {
        Some(false) => {
            return Ok(AlphaHat {
                s,
                c0,
                value: top,
                bracket: (top, top),
                clipped: true,
                inconclusive: false,
                n: pr.items.len() as u64,
                aborted: pr.aborted,
                steps,
            })
        }
        Some(true) => {}
        None => inconclusive = true,
    }
    let top_ambiguous = inconclusive;
    if !inconclusive {
        while hi - lo > s / 128.0 {
            let mid = 0.5 * (lo + hi);
            match classify(mid, &mut pr, &mut n, &mut steps)? {
                Some(true) => hi = mid,
                Some(false) => lo = mid,
                None => {
                    inconclusive = true;
                    break;
                }
            }
        }
    }
    let value = if top_ambiguous { top } else { 0.5 * (lo + hi) };
    Ok(AlphaHat {
        s,
        c0,
        value,
        bracket: (lo, hi),
        clipped: false,
        inconclusive,
        n: pr.items.len() as u64,
        aborted: pr.aborted,
        steps,
    })
}

/// The good-scale condition `α_s ≤ 2·α_{2s/3}`.
pub fn is_good_scale(alpha_s: f64, alpha_two_thirds: f64) -> bool {
    alpha_s <= 2.0 * alpha_two_thirds
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub s: f64,
    pub alpha: AlphaHat,
    /// `α̂` at scale `2s/3`.
    pub alpha_two_thirds: AlphaHat,
    pub good: bool,
    /// `P̂[A_s]`, a black circuit in `A_{s,2s}`.
    pub circuit: Estimate,
    /// `P̂[X_s(α̂_s/2)]`, an empirical stand-in for a lower bound on X
    /// events below `α_s`.
    pub x_event: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub c0: f64,
    pub model: Model,
    pub rows: Vec<ScanRow>,
}

impl ScanReport {
    pub fn scales(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.s).collect()
    }

    /// Good-scale flags recomputed from the stored `α̂` values.
    pub fn flags(&self) -> Vec<bool> {
        self.rows
            .iter()
            .map(|r| is_good_scale(r.alpha.value, r.alpha_two_thirds.value))
            .collect()
    }
}

/// `α̂_s`, `α̂_{2s/3}`, the good-scale flag and `P̂[A_s]` at every scale.
///
/// Each quantity uses its own configurations.
pub fn good_scale_scan(scales: &[f64], c0: f64, model: Model, plan: &TrialPlan, seed: u64) -> Result<ScanReport> {
    model.validate()?;
    if scales.is_empty() {
        return Err(invalid("no scales to scan"));
    }
    if scales.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid("scales must be strictly increasing"));
    }
    let mut rows = Vec::with_capacity(scales.len());
    for &s in scales {
        check_scale(s)?;
        let s23 = 2.0 * s / 3.0;
        let alpha = alpha_hat(s, c0, model, plan, sub_seed(seed, &format!("alpha/{s}")))?;
        let alpha_two_thirds = alpha_hat(s23, c0, model, plan, sub_seed(seed, &format!("alpha/{s23}")))?;
        let circuit_spec = EventSpec::new(
            EventKind::Circuit {
                a: s,
                b: 2.0 * s,
                color: Color::Black,
            },
            model.p,
            model.intensity,
        )?;
        let circuit = run_trials(&circuit_spec, plan, sub_seed(seed, &format!("circuit/{s}")))?;
        let x_spec = EventSpec::new(
            EventKind::X {
                s,
                alpha: alpha.value / 2.0,
            },
            model.p,
            model.intensity,
        )?;
        let x_event = run_trials(&x_spec, plan, sub_seed(seed, &format!("x/{s}")))?;
        rows.push(ScanRow {
            s,
            good: is_good_scale(alpha.value, alpha_two_thirds.value),
            alpha,
            alpha_two_thirds,
            circuit,
            x_event,
        });
    }
    Ok(ScanReport { c0, model, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_vanishes_at_extreme_p() {
        for p in [0.0, 1.0] {
            let c = phi_curve(8.0, &[0.0, 1.0, 4.0], Model::new(p, 1.0).unwrap(), &TrialPlan::fixed(30), 1).unwrap();
            assert!(c.points.iter().all(|pt| pt.phi == 0.0 && pt.std_error == 0.0));
        }
    }

    #[test]
    fn phi_grid_errors() {
        let m = Model::critical();
        let plan = TrialPlan::fixed(4);
        assert!(phi_curve(8.0, &[], m, &plan, 1).is_err());
        assert!(phi_curve(8.0, &[5.0], m, &plan, 1).is_err());
        assert!(phi_curve(8.0, &[1.0, 1.0], m, &plan, 1).is_err());
    }

    #[test]
    fn alpha_clips_at_extreme_p() {
        for p in [0.0, 1.0] {
            let a = alpha_hat(8.0, 0.5, Model::new(p, 1.0).unwrap(), &TrialPlan::fixed(30), 2).unwrap();
            assert!(a.clipped && !a.inconclusive);
            assert_eq!(a.value, 2.0);
        }
    }

    #[test]
    fn good_scale_arithmetic() {
        // Clipped values at s and 2s/3: s/4 <= 2·s/6.
        assert!(is_good_scale(16.0 / 4.0, (32.0 / 3.0) / 4.0));
        assert!(!is_good_scale(3.0, 1.0));
    }
}
