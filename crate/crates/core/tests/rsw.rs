use voronoi_rsw::mc::TrialPlan;
use voronoi_rsw::rsw::{alpha_hat, good_scale_scan, is_good_scale, phi_curve, Model};

#[test]
fn phi_at_zero_is_not_positive() {
    let s = 16.0;
    let c = phi_curve(s, &[0.0], Model::critical(), &TrialPlan::fixed(2000), 3).unwrap();
    let pt = &c.points[0];
    assert!(pt.phi <= 3.0 * pt.std_error, "{pt:?}");
}

/// On shared configurations `H(0, α)` only gains and `H(α, s/2)` only loses
/// as `α` grows, so the estimated curve is monotone sample by sample.
#[test]
fn phi_curve_is_monotone() {
    let s = 8.0;
    let grid: Vec<f64> = (0..=16).map(|i| i as f64 * s / 32.0).collect();
    let c = phi_curve(s, &grid, Model::critical(), &TrialPlan::fixed(2000), 9).unwrap();
    assert!(c.shared_samples);
    for w in c.points.windows(2) {
        assert!(w[1].phi >= w[0].phi, "{:?} then {:?}", w[0], w[1]);
        assert!(w[1].low >= w[0].low && w[1].high <= w[0].high);
    }
}

#[test]
fn alpha_hat_is_deterministic_per_seed() {
    let plan = TrialPlan::fixed(2048);
    let a = alpha_hat(8.0, 0.2, Model::critical(), &plan, 17).unwrap();
    let b = alpha_hat(8.0, 0.2, Model::critical(), &plan, 17).unwrap();
    assert_eq!(a, b);
}

/// Independent seeds agree to within two bracket widths of `s/64`.
#[test]
fn alpha_hat_is_reproducible_across_seeds() {
    let s = 8.0;
    let values: Vec<f64> = (0..4)
        .map(|seed| {
            alpha_hat(s, 0.2, Model::critical(), &TrialPlan::fixed(8192), 100 + seed)
                .unwrap()
                .value
        })
        .collect();
    let (lo, hi) = values.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    assert!(hi - lo <= s / 32.0, "{values:?}");
    assert!(values.iter().all(|&v| v > 0.0 && v <= s / 4.0), "{values:?}");
}

#[test]
fn alpha_hat_clips_when_phi_stays_small() {
    // At p = 1 every H event holds, so φ ≡ 0 < c0/4.
    let a = alpha_hat(4.0, 0.5, Model::new(1.0, 1.0).unwrap(), &TrialPlan::fixed(256), 1).unwrap();
    assert!(a.clipped);
    assert_eq!(a.value, 1.0);
}

#[test]
fn scan_flags_follow_stored_alphas() {
    let r = good_scale_scan(&[3.0, 6.0], 0.2, Model::critical(), &TrialPlan::fixed(512), 4).unwrap();
    assert_eq!(r.scales(), vec![3.0, 6.0]);
    let stored: Vec<bool> = r.rows.iter().map(|row| row.good).collect();
    assert_eq!(stored, r.flags());
    for row in &r.rows {
        assert_eq!(row.good, is_good_scale(row.alpha.value, row.alpha_two_thirds.value));
        assert_eq!(row.alpha_two_thirds.s, 2.0 * row.s / 3.0);
    }
}
