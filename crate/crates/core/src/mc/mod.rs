//! Reproducible Monte Carlo estimation.
//!
//! Trial `i` draws its sites from `derive_stream(seed, i, Positions)` (plus
//! `Shell(k)` streams when padding grows) and its colors from
//! `derive_stream(seed, i, Colors)`. Trials run in batches whose boundaries
//! are multiples of [`CHECK_EVERY`] in absolute trial index; results are
//! merged in index order and the stopping rule is only consulted at those
//! boundaries, so the outcome for a given seed does not depend on the
//! number of threads.

mod checkpoint;

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::events::EventSpec;
use crate::geom::{Certification, Geometry, PaddingPolicy, Window};
use crate::tiling::{color_sites, ColoredTiling};

pub use crate::stream::{derive_stream, sub_seed, Purpose, RandomStream, StreamId};
pub use checkpoint::{resume, run_checkpointed, TrialRecord};

/// Trials between two evaluations of the stopping rule.
pub const CHECK_EVERY: u64 = 256;

/// More aborted trials than this, at a rate above [`ABORT_RATE_LIMIT`],
/// stop the run with [`Error::AbortStorm`].
pub const ABORT_COUNT_LIMIT: u64 = 16;
pub const ABORT_RATE_LIMIT: f64 = 0.01;

/// How many trials to run and when to stop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialPlan {
    /// Upper bound on attempted trials, aborted ones included.
    pub n_max: u64,
    /// Stop once the confidence interval half-width is at most this.
    pub ci_target: f64,
    /// Normal quantile of the confidence level.
    pub z: f64,
    /// Worker threads; `None` uses all logical cores.
    pub threads: Option<usize>,
    #[serde(default)]
    pub padding: PaddingPolicy,
}

impl TrialPlan {
    /// Exactly `n` trials (the stopping rule never fires), 95% intervals.
    pub fn fixed(n: u64) -> Self {
        TrialPlan {
            n_max: n,
            ci_target: f64::MIN_POSITIVE,
            z: 1.96,
            threads: None,
            padding: PaddingPolicy::default(),
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(invalid("n_max must be at least 1"));
        }
        if self.ci_target.is_nan() || self.ci_target <= 0.0 {
            return Err(invalid(format!("ci_target must be positive, got {}", self.ci_target)));
        }
        if !(self.z.is_finite() && self.z > 0.0) {
            return Err(invalid(format!("z must be positive, got {}", self.z)));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads must be at least 1"));
        }
        if !(self.padding.pad_factor.is_finite() && self.padding.pad_factor >= 0.0) {
            return Err(invalid("pad_factor must be non-negative"));
        }
        Ok(())
    }

    fn pool(&self) -> Result<rayon::ThreadPool> {
        let mut b = rayon::ThreadPoolBuilder::new();
        if let Some(t) = self.threads {
            b = b.num_threads(t);
        }
        b.build().map_err(|e| invalid(format!("thread pool: {e}")))
    }
}

impl Default for TrialPlan {
    fn default() -> Self {
        TrialPlan {
            n_max: 10_000,
            ci_target: 0.005,
            z: 1.96,
            threads: None,
            padding: PaddingPolicy::default(),
        }
    }
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(invalid("Wilson interval needs n >= 1"));
    }
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    let nf = n as f64;
    let ph = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (ph + z2 / (2.0 * nf)) / denom;
    let half = z * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    Ok((lo.min(ph), hi.max(ph)))
}

/// Result of estimating one event probability.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub spec: EventSpec,
    /// Completed trials (aborted ones excluded).
    pub n: u64,
    pub k: u64,
    pub p_hat: f64,
    pub ci: (f64, f64),
    pub z: f64,
    pub master_seed: u64,
    pub aborted: u64,
}

impl Estimate {
    /// Counts to estimate. With `n = 0` the point estimate is NaN and the
    /// interval is `[0, 1]`.
    pub fn from_counts(spec: EventSpec, k: u64, n: u64, z: f64, master_seed: u64, aborted: u64) -> Result<Self> {
        let (p_hat, ci) = if n == 0 {
            (f64::NAN, (0.0, 1.0))
        } else {
            (k as f64 / n as f64, wilson_interval(k, n, z)?)
        };
        Ok(Estimate {
            spec,
            n,
            k,
            p_hat,
            ci,
            z,
            master_seed,
            aborted,
        })
    }

    pub fn halfwidth(&self) -> f64 {
        0.5 * (self.ci.1 - self.ci.0)
    }

    /// Binomial standard error `sqrt(p(1-p)/n)`.
    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            return f64::INFINITY;
        }
        (self.p_hat * (1.0 - self.p_hat) / self.n as f64).sqrt()
    }

    /// Aborted trials as a fraction of attempted trials.
    pub fn abort_rate(&self) -> f64 {
        let att = self.n + self.aborted;
        if att == 0 {
            0.0
        } else {
            self.aborted as f64 / att as f64
        }
    }
}

/// Sample trial `index`: Poisson sites around `window` padded until
/// certified, colored with probability `p`.
pub fn sample_tiling(
    window: Window,
    p: f64,
    intensity: f64,
    master_seed: u64,
    index: u64,
    policy: &PaddingPolicy,
) -> Result<ColoredTiling> {
    let g = Geometry::sample_certified(window, intensity, master_seed, index, policy)?;
    color_sites(Arc::new(g), p, &mut derive_stream(master_seed, index, Purpose::Colors))
}

/// Streams a completed trial consumed.
pub fn trial_streams(tiling: &ColoredTiling, master_seed: u64, index: u64) -> Vec<StreamId> {
    let shells = match tiling.geometry().certification() {
        Certification::Window(c) => c.shells,
        _ => 0,
    };
    let id = |purpose| StreamId {
        master_seed,
        trial_index: index,
        purpose,
    };
    let mut out = vec![id(Purpose::Positions)];
    out.extend((0..shells).map(|k| id(Purpose::Shell(k))));
    out.push(id(Purpose::Colors));
    out
}

/// Outcome of one attempted trial: `None` if the certificate aborted.
pub(crate) type Attempt<T> = Option<T>;

/// Run `trial(i)` for `i = start, start + 1, ...` up to `plan.n_max` in
/// index-aligned batches. After every batch `on_batch` receives the batch's
/// first index and its attempts in order; it returns `true` to stop, and is
/// only allowed to stop at multiples of [`CHECK_EVERY`] (the runner passes
/// `at_check`). `prior_aborted` counts aborts among the trials before
/// `start`.
pub(crate) fn run_batches<T, F, B>(
    plan: &TrialPlan,
    start: u64,
    prior_aborted: u64,
    trial: F,
    mut on_batch: B,
) -> Result<()>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync,
    B: FnMut(u64, Vec<Attempt<T>>, bool) -> Result<bool>,
{
    plan.validate()?;
    let pool = plan.pool()?;
    let mut next = start;
    let mut aborted = prior_aborted;
    while next < plan.n_max {
        let end = ((next / CHECK_EVERY + 1) * CHECK_EVERY).min(plan.n_max);
        let results: Vec<Result<Attempt<T>>> = pool.install(|| {
            (next..end)
                .into_par_iter()
                .map(|i| match trial(i) {
                    Ok(v) => Ok(Some(v)),
                    Err(Error::CertificateAbort { .. }) => Ok(None),
                    Err(e) => Err(e),
                })
                .collect()
        });
        let batch = results.into_iter().collect::<Result<Vec<_>>>()?;
        aborted += batch.iter().filter(|a| a.is_none()).count() as u64;
        if aborted > ABORT_COUNT_LIMIT && aborted as f64 > ABORT_RATE_LIMIT * end as f64 {
            return Err(Error::AbortStorm {
                aborted,
                attempted: end,
            });
        }
        let at_check = end.is_multiple_of(CHECK_EVERY);
        let stop = on_batch(next, batch, at_check)?;
        next = end;
        if stop && at_check {
            break;
        }
    }
    Ok(())
}

/// Estimate `P[spec]`.
pub fn run_trials(spec: &EventSpec, plan: &TrialPlan, master_seed: u64) -> Result<Estimate> {
    spec.validate()?;
    let window = spec.window()?;
    let (mut k, mut n, mut aborted) = (0u64, 0u64, 0u64);
    run_batches(
        plan,
        0,
        0,
        |i| {
            let t = sample_tiling(window, spec.p, spec.intensity, master_seed, i, &plan.padding)?;
            spec.evaluate(&t)
        },
        |_, batch, at_check| {
            for a in batch {
                match a {
                    Some(hit) => {
                        n += 1;
                        k += hit as u64;
                    }
                    None => aborted += 1,
                }
            }
            Ok(at_check && reached_target(k, n, plan))
        },
    )?;
    Estimate::from_counts(*spec, k, n, plan.z, master_seed, aborted)
}

pub(crate) fn reached_target(k: u64, n: u64, plan: &TrialPlan) -> bool {
    match wilson_interval(k, n, plan.z) {
        Ok((lo, hi)) => 0.5 * (hi - lo) <= plan.ci_target,
        Err(_) => false,
    }
}

/// Values of `f` on the tilings of `plan.n_max` trials, in trial order,
/// with aborted trials dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialValues<T> {
    pub values: Vec<T>,
    pub aborted: u64,
}

/// Evaluate `f` on every trial tiling for `window` (no early stopping).
/// All quantities computed by one `f` call share a configuration.
pub fn run_map<T, F>(
    window: Window,
    p: f64,
    intensity: f64,
    plan: &TrialPlan,
    master_seed: u64,
    f: F,
) -> Result<TrialValues<T>>
where
    T: Send,
    F: Fn(&ColoredTiling) -> Result<T> + Sync,
{
    run_map_from(window, p, intensity, plan, master_seed, 0, 0, f)
}

/// [`run_map`] over trials `start..plan.n_max` only; `prior_aborted`
/// counts aborts among the earlier trials.
#[allow(clippy::too_many_arguments)]
pub(crate) fn run_map_from<T, F>(
    window: Window,
    p: f64,
    intensity: f64,
    plan: &TrialPlan,
    master_seed: u64,
    start: u64,
    prior_aborted: u64,
    f: F,
) -> Result<TrialValues<T>>
where
    T: Send,
    F: Fn(&ColoredTiling) -> Result<T> + Sync,
{
    let mut values = Vec::new();
    let mut aborted = 0;
    run_batches(
        plan,
        start,
        prior_aborted,
        |i| {
            let t = sample_tiling(window, p, intensity, master_seed, i, &plan.padding)?;
            f(&t)
        },
        |_, batch, _| {
            for a in batch {
                match a {
                    Some(v) => values.push(v),
                    None => aborted += 1,
                }
            }
            Ok(false)
        },
    )?;
    Ok(TrialValues { values, aborted })
}

/// A boolean event evaluated on a tiling.
pub type EventFn<'a> = &'a (dyn Fn(&ColoredTiling) -> Result<bool> + Sync);

/// Evaluate up to 64 events on shared configurations; bit `j` of each value
/// is the outcome of `events[j]`.
pub fn run_joint(
    window: Window,
    p: f64,
    intensity: f64,
    plan: &TrialPlan,
    master_seed: u64,
    events: &[EventFn],
) -> Result<TrialValues<u64>> {
    if events.len() > 64 {
        return Err(invalid("at most 64 joint events"));
    }
    run_map(window, p, intensity, plan, master_seed, |t| {
        let mut bits = 0u64;
        for (j, e) in events.iter().enumerate() {
            if e(t)? {
                bits |= 1 << j;
            }
        }
        Ok(bits)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::events::{Direction, EventKind};
    use crate::tiling::Color;

    fn crossing(p: f64, s: f64) -> EventSpec {
        EventSpec::new(
            EventKind::Crossing {
                rho: 1.0,
                s,
                color: Color::Black,
                direction: Direction::Horizontal,
            },
            p,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn wilson_boundaries() {
        let (lo, hi) = wilson_interval(0, 10, 1.96).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 1.0);
        let (lo, hi) = wilson_interval(10, 10, 1.96).unwrap();
        assert_eq!(hi, 1.0);
        assert!(lo > 0.0);
        assert!(wilson_interval(0, 0, 1.96).is_err());
        assert!(wilson_interval(3, 2, 1.96).is_err());
    }

    #[test]
    fn extreme_p() {
        let plan = TrialPlan::fixed(40);
        let e1 = run_trials(&crossing(1.0, 4.0), &plan, 3).unwrap();
        assert_eq!((e1.k, e1.n, e1.p_hat), (40, 40, 1.0));
        let e0 = run_trials(&crossing(0.0, 4.0), &plan, 3).unwrap();
        assert_eq!((e0.k, e0.p_hat), (0, 0.0));
    }

    #[test]
    fn stops_at_check_boundaries() {
        let plan = TrialPlan {
            n_max: 5000,
            ci_target: 0.2,
            ..TrialPlan::fixed(1)
        };
        let e = run_trials(&crossing(1.0, 2.0), &plan, 1).unwrap();
        assert_eq!(e.n, 256);
    }

    #[test]
    fn abort_storm_surfaces() {
        let plan = TrialPlan {
            padding: PaddingPolicy {
                pad_factor: 0.0,
                max_shells: 0,
            },
            ..TrialPlan::fixed(100)
        };
        match run_trials(&crossing(0.5, 2.0), &plan, 1) {
            Err(Error::AbortStorm { aborted, attempted }) => assert!(aborted > 16 && attempted <= 100),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn joint_bits_are_in_trial_order() {
        let w = Window::from_bounds(0.0, 0.0, 3.0, 3.0).unwrap();
        let always = |_: &ColoredTiling| Ok(true);
        let first_black = |t: &ColoredTiling| Ok(t.colors().first().copied().unwrap_or(false));
        let r = run_joint(w, 0.5, 1.0, &TrialPlan::fixed(300).with_threads(2), 9, &[&always, &first_black]).unwrap();
        assert_eq!(r.values.len(), 300);
        assert!(r.values.iter().all(|b| b & 1 == 1));
        let r1 = run_joint(w, 0.5, 1.0, &TrialPlan::fixed(300).with_threads(1), 9, &[&always, &first_black]).unwrap();
        assert_eq!(r, r1);
    }
}
