use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use voronoi_rsw::events::{circuit, crossing_in, h_event, Direction};
use voronoi_rsw::geom::{max_nearest_distance, Geometry, PaddingPolicy, Point, Region, Window};
use voronoi_rsw::tiling::{Color, ColoredTiling};

fn linear_nearest(sites: &[Point], q: Point) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (i, p) in sites.iter().enumerate() {
        let d = p.dist(q);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

#[test]
fn nearest_site_matches_linear_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let sites: Vec<Point> = (0..500)
        .map(|_| Point::new(rng.random::<f64>() * 20.0, rng.random::<f64>() * 20.0))
        .collect();
    let g = Geometry::fixture(sites.clone()).unwrap();
    for _ in 0..1000 {
        let q = Point::new(rng.random::<f64>() * 24.0 - 2.0, rng.random::<f64>() * 24.0 - 2.0);
        assert_eq!(g.nearest_site(q).unwrap(), linear_nearest(&sites, q), "query {q:?}");
    }
}

#[test]
fn ties_go_to_the_lowest_index() {
    let sites: Vec<Point> = (0..5)
        .flat_map(|i| (0..5).map(move |j| Point::new(i as f64, j as f64)))
        .collect();
    let g = Geometry::fixture(sites.clone()).unwrap();
    for i in 0..4 {
        for j in 0..4 {
            let q = Point::new(i as f64 + 0.5, j as f64 + 0.5);
            assert_eq!(g.nearest_site(q).unwrap().0, linear_nearest(&sites, q).0);
        }
    }
}

#[test]
fn max_nearest_distance_against_dense_grid() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let h = 0.02;
    for _ in 0..5 {
        let sites: Vec<Point> = (0..150)
            .map(|_| Point::new(rng.random::<f64>() * 12.0 - 6.0, rng.random::<f64>() * 12.0 - 6.0))
            .collect();
        let g = Geometry::fixture(sites.clone()).unwrap();
        let w = Window::from_bounds(-3.0, -2.0, 3.0, 2.5).unwrap();
        let exact = max_nearest_distance(&g, &Region::rect(w).unwrap()).unwrap();
        let (nx, ny) = ((w.width() / h).round() as usize, (w.height() / h).round() as usize);
        let mut grid_max: f64 = 0.0;
        for i in 0..=nx {
            for j in 0..=ny {
                let q = Point::new(
                    w.lo().x + w.width() * i as f64 / nx as f64,
                    w.lo().y + w.height() * j as f64 / ny as f64,
                );
                grid_max = grid_max.max(linear_nearest(&sites, q).1);
            }
        }
        assert!(exact >= grid_max - 1e-12, "exact {exact} below grid {grid_max}");
        assert!(exact <= grid_max + 2.0 * h, "exact {exact} far above grid {grid_max}");
    }
}

/// Sites added anywhere outside the sampled region leave every event of a
/// certified window unchanged.
#[test]
fn certified_decisions_ignore_outside_sites() {
    let s = 4.0;
    let window = Window::square(Point::new(0.0, 0.0), s).unwrap();
    let policy = PaddingPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for index in 0..60 {
        let g = Geometry::sample_certified(window, 1.0, 99, index, &policy).unwrap();
        let extent = g.sample().rectangular_extent().unwrap();
        let n = g.sites().len();
        let black: Vec<bool> = (0..n).map(|_| rng.random()).collect();
        let base = ColoredTiling::with_colors(g.clone(), black.clone()).unwrap();

        let mut sites = g.sites().to_vec();
        let mut extra_black = black.clone();
        let outer = extent.expand(5.0);
        while sites.len() < n + 80 {
            let q = Point::new(
                outer.lo().x + rng.random::<f64>() * outer.width(),
                outer.lo().y + rng.random::<f64>() * outer.height(),
            );
            if !extent.contains_point(q) {
                sites.push(q);
                extra_black.push(rng.random());
            }
        }
        let injected = ColoredTiling::with_colors(Geometry::fixture(sites).unwrap(), extra_black).unwrap();

        let decide = |t: &ColoredTiling| {
            (
                crossing_in(t, &window, Color::Black, Direction::Horizontal).unwrap(),
                crossing_in(t, &window, Color::White, Direction::Vertical).unwrap(),
                circuit(t, s / 2.0, s, Color::Black).unwrap(),
                h_event(t, s, 0.0, s / 2.0).unwrap(),
            )
        };
        assert_eq!(decide(&base), decide(&injected), "trial {index}");
    }
}
