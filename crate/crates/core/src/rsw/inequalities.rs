use serde::{Deserialize, Serialize};

use super::{sub_seed, BoxedEvent, EventFn, Joint, Model};
use crate::error::{invalid, Result};
use crate::events::{circuit, circuit_around, crossing_in, Direction, EventKind, EventSpec, HProfile};
use crate::geom::{Point, Window};
use crate::mc::{run_joint, run_map, Estimate, TrialPlan};
use crate::tiling::Color;

/// Slack, in combined standard errors, allowed on every inequality.
const SLACK_SIGMAS: f64 = 3.0;

/// `lhs ≥ rhs` checked as `lhs ≥ rhs − 3σ`, with `σ` the standard error of
/// `lhs − rhs`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InequalityCheck {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub sigma: f64,
    pub holds: bool,
}

impl InequalityCheck {
    fn new(name: &str, lhs: f64, rhs: f64, sigma: f64) -> Self {
        InequalityCheck {
            name: name.into(),
            lhs,
            rhs,
            sigma,
            holds: lhs >= rhs - SLACK_SIGMAS * sigma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub s: f64,
    pub model: Model,
    /// `f̂_s(1..=4)`, `P̂[A_s]`, and the crossing of `B_{s/2}` with its two
    /// half-side landing events.
    pub estimates: Vec<Estimate>,
    pub checks: Vec<InequalityCheck>,
}

impl CorollaryReport {
    pub fn all_hold(&self) -> bool {
        self.checks.iter().all(|c| c.holds)
    }
}

fn spec(event: EventKind, model: Model) -> Result<EventSpec> {
    EventSpec::new(event, model.p, model.intensity)
}

/// The FKG consequences at scale `s`:
///
/// * `f_s(2) ≥ P[A_s]`
/// * `f_s(3) ≥ f_s(2)²·f_s(1)`
/// * `P[A_s] ≥ f_s(4)⁴`
/// * `max(P[E₁], P[E₂]) ≥ 1 − (1 − P[E₁ ∪ E₂])^{1/2}`, where `E₁ ∪ E₂` is
///   the left-right crossing of `B_{s/2}` and `E_i` asks for it to land on
///   the lower or upper half of the right side.
///
/// The crossings `f_s(1..=4)` share configurations of `[0, 4s] × [0, s]`;
/// the circuit and the landing events share configurations of `B_{2s}`,
/// drawn from an independent seed. Each run uses `plan.n_max` trials.
pub fn corollary_suite(s: f64, model: Model, plan: &TrialPlan, seed: u64) -> Result<CorollaryReport> {
    if !(s.is_finite() && s >= 1.0) {
        return Err(invalid(format!("corollary suite needs s >= 1, got {s}")));
    }
    model.validate()?;
    let rects: Vec<Window> = (1..=4)
        .map(|r| Window::from_bounds(0.0, 0.0, r as f64 * s, s))
        .collect::<Result<_>>()?;
    let cross: Vec<BoxedEvent> = rects
        .iter()
        .map(|&w| Box::new(move |t: &_| crossing_in(t, &w, Color::Black, Direction::Horizontal)) as Box<_>)
        .collect();
    let cross_refs: Vec<EventFn> = cross.iter().map(|b| b.as_ref() as EventFn).collect();
    let seed_f = sub_seed(seed, "corollary/crossings");
    let run_f = run_joint(rects[3], model.p, model.intensity, plan, seed_f, &cross_refs)?;

    let h = s / 2.0;
    let seed_a = sub_seed(seed, "corollary/circuit");
    let run_a = run_map(
        Window::square(Point::new(0.0, 0.0), 2.0 * s)?,
        model.p,
        model.intensity,
        plan,
        seed_a,
        |t| {
            let pr = HProfile::new(t, s)?;
            let bits = circuit(t, s, 2.0 * s, Color::Black)? as u64
                | (pr.holds(-h, h)? as u64) << 1
                | (pr.holds(-h, 0.0)? as u64) << 2
                | (pr.holds(0.0, h)? as u64) << 3;
            Ok(bits)
        },
    )?;

    let jf = Joint::new(&run_f.values, &[1, 2, 4, 8]);
    let ja = Joint::new(&run_a.values, &[1, 2, 4, 8]);
    let f = |r: usize| jf.mean(r - 1);
    let z = plan.z;
    let mut estimates = Vec::new();
    for r in 1..=4 {
        let kind = EventKind::Crossing {
            rho: r as f64,
            s,
            color: Color::Black,
            direction: Direction::Horizontal,
        };
        estimates.push(jf.estimate(r - 1, spec(kind, model)?, z, seed_f, run_f.aborted)?);
    }
    let a_kind = EventKind::Circuit {
        a: s,
        b: 2.0 * s,
        color: Color::Black,
    };
    estimates.push(ja.estimate(0, spec(a_kind, model)?, z, seed_a, run_a.aborted)?);
    for (i, (lo, hi)) in [(-h, h), (-h, 0.0), (0.0, h)].into_iter().enumerate() {
        let kind = EventKind::H { s, alpha: lo, beta: hi };
        estimates.push(ja.estimate(i + 1, spec(kind, model)?, z, seed_a, run_a.aborted)?);
    }

    let pa = ja.mean(0);
    let mut checks = Vec::new();
    checks.push(InequalityCheck::new(
        "f(2) >= P[A]",
        f(2),
        pa,
        (jf.variance(&[0.0, 1.0, 0.0, 0.0]) + ja.variance(&[1.0, 0.0, 0.0, 0.0])).sqrt(),
    ));
    checks.push(InequalityCheck::new(
        "f(3) >= f(2)^2 f(1)",
        f(3),
        f(2) * f(2) * f(1),
        jf.variance(&[-f(2) * f(2), -2.0 * f(2) * f(1), 1.0, 0.0]).sqrt(),
    ));
    checks.push(InequalityCheck::new(
        "P[A] >= f(4)^4",
        pa,
        f(4).powi(4),
        (ja.variance(&[1.0, 0.0, 0.0, 0.0]) + jf.variance(&[0.0, 0.0, 0.0, -4.0 * f(4).powi(3)])).sqrt(),
    ));
    let (pe, pe1, pe2) = (ja.mean(1), ja.mean(2), ja.mean(3));
    let (best, best_i) = if pe1 >= pe2 { (pe1, 2) } else { (pe2, 3) };
    let slope = if pe < 1.0 { 0.5 / (1.0 - pe).sqrt() } else { 0.0 };
    let mut grad = [0.0; 4];
    grad[best_i] = 1.0;
    grad[1] = -slope;
    checks.push(InequalityCheck::new(
        "max P[E_i] >= 1 - (1 - P[E])^(1/2)",
        best,
        1.0 - (1.0 - pe).sqrt(),
        ja.variance(&grad).sqrt(),
    ));
    Ok(CorollaryReport {
        s,
        model,
        estimates,
        checks,
    })
}

/// `P̂(A ∩ B) − P̂(A)·P̂(B)` for one pair, on shared configurations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependencePair {
    pub event_b: String,
    pub p_a: f64,
    pub p_b: f64,
    pub p_ab: f64,
    pub gap: f64,
    /// Standard error of `gap`.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DependenceReport {
    /// What the event family is.
    pub family: String,
    pub pairs: Vec<DependencePair>,
    /// `max |gap|` over the pairs.
    pub probe: f64,
    pub n: u64,
    pub aborted: u64,
}

/// Dependence between `a` and each of `bs`, all estimated on the same
/// `plan.n_max` configurations of `window`.
pub fn dependence_probe(
    window: Window,
    model: Model,
    plan: &TrialPlan,
    seed: u64,
    family: &str,
    a: EventFn,
    bs: &[(&str, EventFn)],
) -> Result<DependenceReport> {
    model.validate()?;
    if bs.is_empty() || bs.len() > 63 {
        return Err(invalid("dependence probe needs between 1 and 63 B events"));
    }
    let mut events = vec![a];
    events.extend(bs.iter().map(|&(_, e)| e));
    let run = run_joint(window, model.p, model.intensity, plan, seed, &events)?;
    let mut pairs = Vec::new();
    for (j, (name, _)) in bs.iter().enumerate() {
        let b = 1u64 << (j + 1);
        let jt = Joint::new(&run.values, &[1, b, 1 | b]);
        let (pa, pb, pab) = (jt.mean(0), jt.mean(1), jt.mean(2));
        let sigma = jt.variance(&[-pb, -pa, 1.0]).sqrt();
        pairs.push(DependencePair {
            event_b: name.to_string(),
            p_a: pa,
            p_b: pb,
            p_ab: pab,
            gap: pab - pa * pb,
            sigma,
        });
    }
    let probe = pairs.iter().map(|p| p.gap.abs()).fold(0.0, f64::max);
    Ok(DependenceReport {
        family: family.into(),
        pairs,
        probe,
        n: run.values.len() as u64,
        aborted: run.aborted,
    })
}

/// Finite stand-in for the supremum over annulus and far-field events.
///
/// `A` is a black circuit in `A_{2s,4s}`. The `B` events live outside
/// `A_{s,5s}`: a black left-right crossing of `B_{s/2}`, and a black
/// circuit in `(6s, 0) + A_{s/4,s/2}`.
pub fn quasi_independence_probe(s: f64, model: Model, plan: &TrialPlan, seed: u64) -> Result<DependenceReport> {
    if !(s.is_finite() && s >= 2.0) {
        return Err(invalid(format!("quasi-independence probe needs s >= 2, got {s}")));
    }
    let window = Window::from_bounds(-4.0 * s, -4.0 * s, 6.5 * s, 4.0 * s)?;
    let inner = Window::square(Point::new(0.0, 0.0), s / 2.0)?;
    let a = move |t: &_| circuit(t, 2.0 * s, 4.0 * s, Color::Black);
    let b1 = move |t: &_| crossing_in(t, &inner, Color::Black, Direction::Horizontal);
    let b2 = move |t: &_| circuit_around(t, Point::new(6.0 * s, 0.0), s / 4.0, s / 2.0, Color::Black);
    dependence_probe(
        window,
        model,
        plan,
        seed,
        "A: black circuit in A_{2s,4s}; inner_crossing: black left-right crossing of B_{s/2}; \
         far_circuit: black circuit in (6s,0)+A_{s/4,s/2}",
        &a,
        &[("inner_crossing", &b1), ("far_circuit", &b2)],
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corollary_equalities_at_p_one() {
        let r = corollary_suite(2.0, Model::new(1.0, 1.0).unwrap(), &TrialPlan::fixed(20), 5).unwrap();
        assert!(r.all_hold());
        for c in &r.checks {
            assert_eq!((c.lhs, c.rhs, c.sigma), (1.0, 1.0, 0.0), "{}", c.name);
        }
    }

    #[test]
    fn probe_is_zero_when_deterministic() {
        let r = quasi_independence_probe(2.0, Model::new(1.0, 1.0).unwrap(), &TrialPlan::fixed(10), 1).unwrap();
        assert_eq!(r.probe, 0.0);
        assert_eq!(r.pairs.len(), 2);
    }
}
