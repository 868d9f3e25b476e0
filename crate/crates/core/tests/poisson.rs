use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};
use voronoi_rsw::geom::{extend_sample, sample_poisson, Window};
use voronoi_rsw::mc::{derive_stream, Purpose};

fn count_in(sites: &[voronoi_rsw::geom::Point], w: &Window) -> usize {
    sites.iter().filter(|p| w.contains_point(**p)).count()
}

/// Pearson statistic of `observed` against `expected` probabilities.
fn chi_square(observed: &[u64], expected: &[f64], total: u64) -> f64 {
    observed
        .iter()
        .zip(expected)
        .map(|(&o, &p)| {
            let e = p * total as f64;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[test]
fn mean_count_on_ten_by_ten() {
    let w = Window::from_bounds(0.0, 0.0, 10.0, 10.0).unwrap();
    let reps = 1000;
    let total: usize = (0..reps)
        .map(|i| sample_poisson(w, 1.0, &mut derive_stream(20240, i, Purpose::Positions)).unwrap().len())
        .sum();
    let mean = total as f64 / reps as f64;
    assert!((99.0..=101.0).contains(&mean), "mean {mean}");
}

#[test]
fn count_law_chi_square() {
    // vol = 4, bins k = 0..=11 and a tail k >= 12.
    let w = Window::from_bounds(0.0, 0.0, 2.0, 2.0).unwrap();
    let reps = 100_000u64;
    let mut observed = [0u64; 13];
    for i in 0..reps {
        let k = sample_poisson(w, 1.0, &mut derive_stream(77, i, Purpose::Positions)).unwrap().len();
        observed[k.min(12)] += 1;
    }
    let law = Poisson::new(4.0).unwrap();
    let mut expected: Vec<f64> = (0..12).map(|k| law.pmf(k)).collect();
    expected.push(1.0 - expected.iter().sum::<f64>());
    let stat = chi_square(&observed, &expected, reps);
    let p_value = 1.0 - ChiSquared::new(12.0).unwrap().cdf(stat);
    assert!(p_value > 0.001, "chi-square {stat}, p-value {p_value}");
}

#[test]
fn zero_area_extension_is_a_no_op() {
    let a = Window::from_bounds(0.0, 0.0, 3.0, 3.0).unwrap();
    let s = sample_poisson(a, 1.0, &mut derive_stream(1, 0, Purpose::Positions)).unwrap();
    let line = Window::from_bounds(3.0, 0.0, 3.0, 3.0).unwrap();
    let e = extend_sample(&s, line, &mut derive_stream(1, 0, Purpose::Shell(0))).unwrap();
    assert_eq!(e.sites(), s.sites());
}

#[test]
fn overlapping_extension_is_rejected() {
    let a = Window::from_bounds(0.0, 0.0, 3.0, 3.0).unwrap();
    let s = sample_poisson(a, 1.0, &mut derive_stream(1, 0, Purpose::Positions)).unwrap();
    let b = Window::from_bounds(2.0, 0.0, 5.0, 3.0).unwrap();
    assert!(extend_sample(&s, b, &mut derive_stream(1, 0, Purpose::Shell(0))).is_err());
}

/// Sampling `A` then extending by a disjoint `B` has the law of a direct
/// sample of `A ∪ B`: site counts in a rectangle straddling both agree by
/// a two-sample chi-square test of homogeneity.
#[test]
fn progressive_extension_preserves_the_law() {
    let a = Window::from_bounds(0.0, 0.0, 2.0, 2.0).unwrap();
    let b = Window::from_bounds(2.0, 0.0, 4.0, 2.0).unwrap();
    let ab = Window::from_bounds(0.0, 0.0, 4.0, 2.0).unwrap();
    let probe = Window::from_bounds(1.0, 0.5, 3.0, 1.5).unwrap();
    let reps = 10_000u64;
    let bins = 7;
    let (mut extended, mut direct) = (vec![0u64; bins], vec![0u64; bins]);
    for i in 0..reps {
        let s = sample_poisson(a, 1.0, &mut derive_stream(5, i, Purpose::Positions)).unwrap();
        let e = extend_sample(&s, b, &mut derive_stream(5, i, Purpose::Shell(0))).unwrap();
        extended[count_in(e.sites(), &probe).min(bins - 1)] += 1;
        let d = sample_poisson(ab, 1.0, &mut derive_stream(6, i, Purpose::Positions)).unwrap();
        direct[count_in(d.sites(), &probe).min(bins - 1)] += 1;
    }
    let mut stat = 0.0;
    let mut used = 0;
    for j in 0..bins {
        let pooled = (extended[j] + direct[j]) as f64 / (2 * reps) as f64;
        if pooled == 0.0 {
            continue;
        }
        used += 1;
        let e = pooled * reps as f64;
        stat += (extended[j] as f64 - e).powi(2) / e + (direct[j] as f64 - e).powi(2) / e;
    }
    let p_value = 1.0 - ChiSquared::new((used - 1) as f64).unwrap().cdf(stat);
    assert!(p_value > 0.001, "homogeneity chi-square {stat}, p-value {p_value}");
}
