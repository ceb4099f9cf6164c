use std::sync::Arc;

use conetime::convex::{
    biconjugate, envelope_from_boundary, fenchel_gap, legendre_transform, subdifferential, BoundaryData,
};
use conetime::{GridDomain, GridFunction, Shape, Vec2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn disk(radius: f64, n: usize) -> Arc<GridDomain> {
    Arc::new(GridDomain::new(Shape::Disk { radius }, n).unwrap())
}

fn window(half: f64, n: usize) -> Arc<GridDomain> {
    Arc::new(GridDomain::window(-half, half, -half, half, n).unwrap())
}

fn minkowski_gauge(y: &Vec2) -> f64 {
    -(1.0 - y.norm_squared()).max(0.0).sqrt()
}

#[test]
fn half_square_on_large_disk_is_self_dual() {
    let f = GridFunction::from_fn(disk(3.0, 61), |y| 0.5 * y.norm_squared()).unwrap();
    let w = window(1.0, 41);
    let g = legendre_transform(&f, w.clone());
    let h = f.spacing();
    let err = w
        .nodes()
        .iter()
        .zip(g.values())
        .map(|(x, v)| (v - 0.5 * x.norm_squared()).abs())
        .fold(0.0, f64::max);
    assert!(err <= h, "error {err}, h {h}");
    assert!(g.convexity_certified());
}

#[test]
fn conjugate_of_minkowski_gauge_is_the_hyperboloid() {
    let f = GridFunction::from_fn(disk(1.0, 81), minkowski_gauge).unwrap();
    let w = window(1.5, 31);
    let g = legendre_transform(&f, w.clone());
    let h = f.spacing();
    for (x, v) in w.nodes().iter().zip(g.values()) {
        let exact = (1.0 + x.norm_squared()).sqrt();
        // the discrete sup only sees grid nodes, so it can only undershoot
        assert!(*v <= exact + 1e-12, "{x:?}");
        assert!(exact - v <= 2.0 * h, "{x:?}: {v} vs {exact}");
    }
}

#[test]
fn conjugate_of_affine_function_is_a_shifted_norm() {
    let x0 = Vec2::new(1.0, 0.0);
    let f = GridFunction::from_fn(disk(1.0, 65), |y| y.dot(&x0)).unwrap();
    let w = window(2.0, 33);
    let g = legendre_transform(&f, w.clone());
    // dense sampling of the closed disk as the oracle
    let mut samples: Vec<Vec2> = (0..4000)
        .map(|i| {
            let t = i as f64 / 4000.0 * std::f64::consts::TAU;
            Vec2::new(t.cos(), t.sin())
        })
        .collect();
    for i in 0..40 {
        for j in 0..40 {
            let p = Vec2::new(-1.0 + 2.0 * i as f64 / 39.0, -1.0 + 2.0 * j as f64 / 39.0);
            if p.norm() <= 1.0 {
                samples.push(p);
            }
        }
    }
    let h = f.spacing();
    for (x, v) in w.nodes().iter().zip(g.values()) {
        let brute = samples.iter().map(|y| y.dot(&(x - x0))).fold(f64::NEG_INFINITY, f64::max);
        assert!((v - brute).abs() <= h * (x - x0).norm().max(1e-3), "{x:?}: {v} vs {brute}");
        assert!((v - (x - x0).norm()).abs() <= h * (x - x0).norm().max(1e-3));
    }
}

#[test]
fn biconjugate_fixes_convex_functions() {
    let f = GridFunction::from_fn(disk(1.0, 41), |y| y.x.exp() + 0.5 * y.y * y.y).unwrap();
    let fss = biconjugate(&f, None);
    let tol = 2.0 * f.lipschitz() * f.spacing();
    for (a, b) in f.values().iter().zip(fss.values()) {
        assert!((a - b).abs() <= tol);
        assert!(*b <= a + 1e-12);
    }
}

#[test]
fn biconjugate_of_reverse_cone_is_minus_one() {
    let f = GridFunction::from_fn(disk(1.0, 41), |y| -y.norm()).unwrap();
    let fss = biconjugate(&f, None);
    let tol = 2.0 * f.lipschitz() * f.spacing();
    for v in fss.values() {
        assert!((v + 1.0).abs() <= tol, "{v}");
    }
}

/// Lower convex hull of points sorted by abscissa, evaluated at the same abscissae.
fn hull_1d(xs: &[f64], ys: &[f64]) -> Vec<f64> {
    let mut hull: Vec<usize> = Vec::new();
    for i in 0..xs.len() {
        while hull.len() >= 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            let cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a]);
            if cross <= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    xs.iter()
        .map(|&x| {
            let seg = hull.windows(2).find(|w| xs[w[0]] <= x && x <= xs[w[1]]).unwrap();
            let (a, b) = (seg[0], seg[1]);
            ys[a] + (ys[b] - ys[a]) * (x - xs[a]) / (xs[b] - xs[a])
        })
        .collect()
}

#[test]
fn biconjugate_of_trough_matches_slice_hulls() {
    let f = GridFunction::from_fn(disk(1.0, 41), |y| y.x.abs().max(0.5)).unwrap();
    let fss = biconjugate(&f, None);
    let d = f.domain();
    let tol = 2.0 * f.lipschitz() * f.spacing();
    // the function depends on y1 only, so its hull along each horizontal slice
    // is the hull of the whole function there
    let (nx, ny) = d.lattice_dims();
    for j in 0..ny as isize {
        let row: Vec<usize> = (0..nx as isize).filter_map(|i| d.node_at(i, j)).collect();
        if row.len() < 2 {
            continue;
        }
        let xs: Vec<f64> = row.iter().map(|&k| d.node(k).x).collect();
        let ys: Vec<f64> = row.iter().map(|&k| f.value(k)).collect();
        for (k, hv) in row.iter().zip(hull_1d(&xs, &ys)) {
            assert!((fss.value(*k) - hv).abs() <= tol, "{:?}", d.node(*k));
        }
    }
}

#[test]
fn subdifferentials() {
    let d = disk(1.0, 41);
    let h = d.spacing();
    let w = window(1.5, 61);
    let hw = w.spacing();

    let q = GridFunction::from_fn(d.clone(), |y| 0.5 * y.norm_squared()).unwrap();
    let sub = subdifferential(&q, &Vec2::new(0.3, 0.0), &w, 0.25 * h * h).unwrap();
    assert!(!sub.is_empty());
    assert!(sub.iter().all(|y| (y - Vec2::new(0.3, 0.0)).norm() <= hw));

    let x0 = Vec2::new(0.4, -0.2);
    let a = GridFunction::from_fn(d.clone(), |y| y.dot(&x0) - 0.1).unwrap();
    let sub = subdifferential(&a, &Vec2::new(-0.25, 0.3), &w, 1e-12).unwrap();
    assert_eq!(sub.len(), 1);
    assert!((sub[0] - x0).norm() < 1e-12);

    let abs = GridFunction::from_fn(d, |y| y.x.abs()).unwrap();
    let sub = subdifferential(&abs, &Vec2::new(0.0, 0.2), &w, 0.25 * h * h).unwrap();
    assert!(sub.iter().all(|y| y.y.abs() < 1e-12 && y.x.abs() <= 1.0 + 1e-12));
    // every lattice point of the segment [-1, 1] x {0} is found
    let expected = w.nodes().iter().filter(|y| y.y.abs() < 1e-12 && y.x.abs() <= 1.0 + 1e-12).count();
    assert_eq!(sub.len(), expected);
}

#[test]
fn fenchel_gap_values() {
    let d = disk(1.0, 65);
    let q = GridFunction::from_fn(d.clone(), |y| 0.5 * y.norm_squared()).unwrap();
    let h = d.spacing();
    // x + (1, 0) leaves the disk for x = (0.5, 0), so stay where the maximiser is interior
    let x = Vec2::new(-0.6, 0.1);
    assert!(fenchel_gap(&q, &x, &x).unwrap().abs() <= h * h);
    let gap = fenchel_gap(&q, &x, &(x + Vec2::new(1.0, 0.0))).unwrap();
    assert!((gap - 0.5).abs() <= h * h, "{gap}");

    let w = GridFunction::from_fn(d, minkowski_gauge).unwrap();
    let gap = fenchel_gap(&w, &Vec2::zeros(), &Vec2::zeros()).unwrap();
    assert!(gap.abs() < 1e-12, "{gap}");
}

#[test]
fn envelope_examples() {
    let d = disk(1.0, 33);
    let c = BoundaryData::sample(&d, |_| 0.7);
    let s = envelope_from_boundary(d.clone(), &c).unwrap();
    assert!(s.values().iter().all(|v| (v - 0.7).abs() < 1e-10));

    let x0 = Vec2::new(-0.3, 0.5);
    let a = BoundaryData::sample(&d, |b| b.dot(&x0) - 0.4);
    let s = envelope_from_boundary(d.clone(), &a).unwrap();
    for (y, v) in d.nodes().iter().zip(s.values()) {
        assert!((v - (y.dot(&x0) - 0.4)).abs() < 1e-10);
    }
}

/// `sup` over random affine minorants of the boundary data, evaluated at `at`:
/// for a slope `p` the best offset is `min_b g(b) - p.b`.
fn random_minorant_sup(g: &BoundaryData, at: &Vec2, rng: &mut ChaCha8Rng) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for scale in [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8] {
        for _ in 0..2000 {
            let p = Vec2::new(rng.gen_range(-scale..scale), rng.gen_range(-scale..scale));
            let c = g.points.iter().zip(&g.values).map(|(b, v)| v - p.dot(b)).fold(f64::INFINITY, f64::min);
            best = best.max(c + p.dot(at));
        }
    }
    best
}

#[test]
fn envelope_of_abs_on_circle_matches_random_minorants() {
    let d = disk(1.0, 33);
    let g = BoundaryData::sample(&d, |b| b.x.abs());
    let s = envelope_from_boundary(d.clone(), &g).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let origin = Vec2::zeros();
    let lp = s.value(d.nearest_node(&origin));
    let oracle = random_minorant_sup(&g, &origin, &mut rng);
    assert!((lp - oracle).abs() <= 1e-6, "lp {lp}, oracle {oracle}");
    assert!(lp.abs() <= 1e-9);
}

#[test]
fn envelope_stays_below_boundary_data() {
    let d = disk(1.0, 33);
    let g = BoundaryData::sample(&d, |b| (2.0 * b.x).sin() + b.y * b.y);
    let s = envelope_from_boundary(d.clone(), &g).unwrap();
    let bv = s.boundary_values().unwrap();
    for (v, gv) in bv.iter().zip(&g.values) {
        assert!(*v <= gv + 1e-9);
    }
    assert!(s.convexity_certified());
}
