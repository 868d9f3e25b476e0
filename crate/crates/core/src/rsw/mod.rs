//! Derived quantities of the RSW argument estimated by Monte Carlo.
//!
//! Every routine here is a deterministic function of its inputs and master
//! seed. Quantities compared against each other are either computed on
//! shared configurations, with covariances taken into account, or on
//! independent configurations drawn from distinct [`sub_seed`]s.

mod inequalities;
mod phi;
mod scaling;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::events::EventSpec;
use crate::mc::Estimate;
use crate::tiling::ColoredTiling;

pub use crate::mc::sub_seed;
pub use inequalities::{
    corollary_suite, dependence_probe, quasi_independence_probe, CorollaryReport, DependencePair, DependenceReport,
    InequalityCheck,
};
pub use phi::{alpha_hat, good_scale_scan, is_good_scale, phi_curve, AlphaHat, PhiCurve, PhiPoint, ScanReport, ScanRow};
pub use scaling::{arm_decay_fit, fs_table, ArmFit, FsTable};

pub use crate::mc::EventFn;

type BoxedEvent = Box<dyn Fn(&ColoredTiling) -> Result<bool> + Sync>;

/// Color probability and site intensity.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Model {
    pub p: f64,
    pub intensity: f64,
}

impl Model {
    pub fn new(p: f64, intensity: f64) -> Result<Self> {
        let m = Model { p, intensity };
        m.validate()?;
        Ok(m)
    }

    /// `p = 1/2` at unit intensity.
    pub fn critical() -> Self {
        Model { p: 0.5, intensity: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(invalid(format!("p must lie in [0, 1], got {}", self.p)));
        }
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(invalid(format!("intensity must be positive, got {}", self.intensity)));
        }
        Ok(())
    }
}

/// Sample means of several indicators over shared configurations and
/// their covariance.
///
/// Indicator `j` of a sample `v` is `v & masks[j] == masks[j]`.
pub(crate) struct Joint {
    n: usize,
    means: Vec<f64>,
    /// `E[X_i X_j]`.
    second: Vec<Vec<f64>>,
}

impl Joint {
    pub(crate) fn new(values: &[u64], masks: &[u64]) -> Self {
        let n = values.len();
        let m = masks.len();
        let mut counts = vec![vec![0u64; m]; m];
        for &v in values {
            for i in 0..m {
                if v & masks[i] != masks[i] {
                    continue;
                }
                for j in i..m {
                    if v & masks[j] == masks[j] {
                        counts[i][j] += 1;
                    }
                }
            }
        }
        let nf = n as f64;
        let mut second = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in i..m {
                second[i][j] = counts[i][j] as f64 / nf;
                second[j][i] = second[i][j];
            }
        }
        let means = (0..m).map(|i| second[i][i]).collect();
        Joint { n, means, second }
    }

    pub(crate) fn mean(&self, i: usize) -> f64 {
        self.means[i]
    }

    /// Variance of `Σ grad[i]·mean(i)` to first order.
    pub(crate) fn variance(&self, grad: &[f64]) -> f64 {
        let mut v = 0.0;
        for (i, &gi) in grad.iter().enumerate() {
            if gi == 0.0 {
                continue;
            }
            for (j, &gj) in grad.iter().enumerate() {
                if gj == 0.0 {
                    continue;
                }
                v += gi * gj * (self.second[i][j] - self.means[i] * self.means[j]);
            }
        }
        (v / self.n as f64).max(0.0)
    }

    /// The estimate of indicator `i` as a plain binomial count.
    pub(crate) fn estimate(&self, i: usize, spec: EventSpec, z: f64, seed: u64, aborted: u64) -> Result<Estimate> {
        let k = (self.means[i] * self.n as f64).round() as u64;
        Estimate::from_counts(spec, k, self.n as u64, z, seed, aborted)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn joint_moments() {
        // bits: 0b01, 0b11, 0b10, 0b00
        let j = Joint::new(&[1, 3, 2, 0], &[1, 2, 3]);
        assert_eq!(j.n, 4);
        assert_eq!((j.mean(0), j.mean(1), j.mean(2)), (0.5, 0.5, 0.25));
        // Independent fair bits: Var(X0 - X1) = (1/4 + 1/4) / 4.
        assert!((j.variance(&[1.0, -1.0, 0.0]) - 0.125).abs() < 1e-12);
        // X0 - X2 = X0·(1 - X1), a Bernoulli(1/4).
        assert!((j.variance(&[1.0, 0.0, -1.0]) - 0.1875 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn model_validation() {
        assert!(Model::new(1.2, 1.0).is_err());
        assert!(Model::new(0.5, 0.0).is_err());
        assert_eq!(Model::new(0.5, 1.0).unwrap(), Model::critical());
    }
}
