use proptest::prelude::*;
use voronoi_rsw::events::{circuit, crossing_in, h_event, one_arm, x_event, Direction, HProfile};
use voronoi_rsw::geom::{PaddingPolicy, Point, Region, Window};
use voronoi_rsw::mc::sample_tiling;
use voronoi_rsw::tiling::{clipped_graph_with_targets, connected, Color, ColoredTiling};

fn sq(r: f64) -> Window {
    Window::square(Point::new(0.0, 0.0), r).unwrap()
}

/// A sample covering `B_s` at intensity 1.
fn tiling(s: f64, p: f64, seed: u64) -> ColoredTiling {
    sample_tiling(sq(s), p, 1.0, seed, 0, &PaddingPolicy::default()).unwrap()
}

/// Every increasing event decided on `B_s`.
fn increasing(t: &ColoredTiling, s: f64) -> [bool; 5] {
    [
        crossing_in(t, &sq(s), Color::Black, Direction::Horizontal).unwrap(),
        h_event(t, s, 0.0, s / 4.0).unwrap(),
        x_event(t, s, s / 8.0).unwrap(),
        one_arm(t, 1.0, s).unwrap(),
        circuit(t, s / 2.0, s, Color::Black).unwrap(),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn raising_p_never_destroys_an_increasing_event(
        seed in any::<u64>(),
        s in 2.0f64..6.0,
        p1 in 0.05f64..0.95,
        dp in 0.0f64..0.5,
    ) {
        let p2 = (p1 + dp).min(1.0);
        let t = tiling(s, p1, seed);
        let lo = increasing(&t, s);
        let hi = increasing(&t.recolor(p2).unwrap(), s);
        for (k, (a, b)) in lo.iter().zip(&hi).enumerate() {
            prop_assert!(!a || *b, "event {} holds at p={} but not at p={}", k, p1, p2);
        }
    }

    #[test]
    fn h_profile_agrees_with_h_event(
        seed in any::<u64>(),
        s in 2.0f64..8.0,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let t = tiling(s, 0.5, seed);
        let (alpha, beta) = (a.min(b) * s / 2.0, a.max(b) * s / 2.0);
        let profile = HProfile::new(&t, s).unwrap();
        prop_assert_eq!(profile.holds(alpha, beta).unwrap(), h_event(&t, s, alpha, beta).unwrap());
    }

    #[test]
    fn h_zero_alpha_is_monotone_in_alpha(
        seed in any::<u64>(),
        s in 2.0f64..8.0,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
    ) {
        let t = tiling(s, 0.5, seed);
        let (a1, a2) = (a.min(b) * s / 2.0, a.max(b) * s / 2.0);
        prop_assert!(!h_event(&t, s, 0.0, a1).unwrap() || h_event(&t, s, 0.0, a2).unwrap());
    }

    #[test]
    fn enlarging_the_region_keeps_connections(
        seed in any::<u64>(),
        s in 2.0f64..6.0,
        grow in 0.0f64..1.0,
        color in prop::bool::ANY,
    ) {
        let outer_half = s * (1.0 + grow);
        let t = tiling(outer_half, 0.5, seed);
        let color = if color { Color::Black } else { Color::White };
        let inner = sq(s);
        let [left, right, ..] = Region::sides(&inner);
        let targets = [vec![left], vec![right]];
        let small = clipped_graph_with_targets(&t, &Region::rect(inner).unwrap(), color, &targets).unwrap();
        let large = clipped_graph_with_targets(&t, &Region::rect(sq(outer_half)).unwrap(), color, &targets).unwrap();
        prop_assert!(!connected(&small, 1, 2) || connected(&large, 1, 2));
    }

    #[test]
    fn exactly_one_crossing_direction(
        seed in any::<u64>(),
        width in 1.0f64..8.0,
        height in 1.0f64..8.0,
        p in 0.0f64..=1.0,
    ) {
        let rect = Window::from_bounds(0.0, 0.0, width, height).unwrap();
        let t = sample_tiling(rect, p, 1.0, seed, 0, &PaddingPolicy::default()).unwrap();
        let black = crossing_in(&t, &rect, Color::Black, Direction::Horizontal).unwrap();
        let white = crossing_in(&t, &rect, Color::White, Direction::Vertical).unwrap();
        prop_assert!(black != white, "black {} white {}", black, white);
    }

    #[test]
    fn swapping_colors_swaps_events(seed in any::<u64>(), s in 2.0f64..6.0) {
        let t = tiling(s, 0.5, seed);
        let u = t.swapped();
        for d in [Direction::Horizontal, Direction::Vertical] {
            prop_assert_eq!(
                crossing_in(&t, &sq(s), Color::Black, d).unwrap(),
                crossing_in(&u, &sq(s), Color::White, d).unwrap()
            );
        }
        prop_assert_eq!(
            circuit(&t, s / 2.0, s, Color::White).unwrap(),
            circuit(&u, s / 2.0, s, Color::Black).unwrap()
        );
    }
}
