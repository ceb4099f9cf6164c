use std::sync::Arc;

use conetime::sphere::{gauge_report, solve_affine_sphere, GaugeFunction, SolverOptions};
use conetime::{GridDomain, GridFunction, Shape, Vec2};

fn solve(shape: Shape, n: usize) -> (Arc<GridDomain>, conetime::sphere::SphereSolution) {
    let d = Arc::new(GridDomain::new(shape, n).unwrap());
    let sol = solve_affine_sphere(d.clone(), &SolverOptions::default()).unwrap();
    (d, sol)
}

fn at(d: &GridDomain, f: &GridFunction, p: Vec2) -> f64 {
    let k = d.nearest_node(&p);
    assert!((d.node(k) - p).norm() < 1e-12, "{p:?} is not a node");
    f.value(k)
}

#[test]
fn unit_disk_gives_the_minkowski_gauge() {
    let (d, sol) = solve(Shape::unit_disk(), 101);
    assert!((at(&d, &sol.omega, Vec2::zeros()) + 1.0).abs() <= 5e-3);
    assert!((at(&d, &sol.omega, Vec2::new(0.5, 0.0)) + 0.75_f64.sqrt()).abs() <= 5e-3);
    let gauge = GaugeFunction::new(sol.omega.clone(), 1e-9).unwrap();
    assert!(gauge.report().passed());
    assert!(sol.omega.values().iter().all(|v| *v < 0.0));
}

#[test]
fn round_ellipse_is_the_disk() {
    let (_, disk) = solve(Shape::unit_disk(), 49);
    let (_, ellipse) = solve(Shape::Ellipse { a: 1.0, b: 1.0 }, 49);
    for (a, b) in disk.omega.values().iter().zip(ellipse.omega.values()) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn ellipse_solution_is_a_scaled_hyperboloid_gauge() {
    let (a, b) = (1.3, 0.7);
    let (d, sol) = solve(Shape::Ellipse { a, b }, 57);
    let c = (a * b).powf(1.0 / 3.0);
    for (y, v) in d.nodes().iter().zip(sol.omega.values()) {
        let exact = -c * (1.0 - (y.x / a).powi(2) - (y.y / b).powi(2)).sqrt();
        assert!((v - exact).abs() <= 5e-3, "{y:?}");
    }
}

#[test]
fn disk_solution_is_radial() {
    let (d, sol) = solve(Shape::unit_disk(), 65);
    let tol = 2.0 * SolverOptions::default().tol;
    for k in 0..d.len() {
        let p = d.node(k);
        // the lattice is symmetric under swapping and negating coordinates
        for q in [Vec2::new(p.y, p.x), Vec2::new(-p.x, p.y), Vec2::new(p.x, -p.y)] {
            let j = d.nearest_node(&q);
            assert!((sol.omega.value(j) - sol.omega.value(k)).abs() <= tol.max(1e-12));
        }
    }
}

#[test]
fn square_section_converges_with_decreasing_residual() {
    let (_, sol) = solve(Shape::rectangle(-1.0, 1.0, -1.0, 1.0), 41);
    assert!(sol.residual <= SolverOptions::default().tol);
    let first = sol.history.first().unwrap().residual;
    let last = sol.history.last().unwrap().residual;
    assert!(last < first);
    assert!(GaugeFunction::new(sol.omega, 1e-9).is_ok());
}

#[test]
fn gauge_checks() {
    let d = Arc::new(GridDomain::new(Shape::unit_disk(), 41).unwrap());
    assert!(GaugeFunction::minkowski(d.clone()).unwrap().report().passed());

    let bowl = GridFunction::from_fn(d.clone(), |y| y.norm_squared() - 1.0).unwrap();
    let r = gauge_report(&bowl, 1e-9);
    assert!(!r.gs3);
    assert!(!r.passed());

    let flat = GridFunction::from_fn(d, |_| -1.0).unwrap();
    let r = gauge_report(&flat, 1e-9);
    assert!(!r.gs1 && !r.gs2);
}

#[test]
fn radial_profiles() {
    let g = GaugeFunction::minkowski(Arc::new(GridDomain::new(Shape::unit_disk(), 101).unwrap())).unwrap();
    assert!((g.radial_profile(&Vec2::zeros()).unwrap() + 1.0).abs() < 1e-12);
    assert!((g.radial_profile(&Vec2::new(0.6, 0.0)).unwrap() + 0.8).abs() < 1e-4);

    // at the origin the profile is -1 / w*(0) for any section
    let (_, sol) = solve(Shape::Polygon { vertices: vec![[1.0, 0.0], [-0.5, 0.9], [-0.6, -0.8]] }, 49);
    let g = GaugeFunction::new(sol.omega, 1e-9).unwrap();
    let m = g.conjugate(&Vec2::zeros());
    assert!((g.radial_profile(&Vec2::zeros()).unwrap() + 1.0 / m).abs() < 1e-12);
}

#[test]
fn radial_profile_solves_the_polar_equation() {
    // w(x) = -sqrt(1 - |x|^2) satisfies det Hess w = (-w)^{-4}
    let (_, sol) = solve(Shape::unit_disk(), 101);
    let g = GaugeFunction::new(sol.omega, 1e-9).unwrap();
    let step = 0.1;
    for x in [Vec2::new(0.0, 0.0), Vec2::new(0.2, -0.1), Vec2::new(-0.3, 0.25)] {
        let w = |dx: f64, dy: f64| g.radial_profile(&(x + Vec2::new(dx, dy))).unwrap();
        let c = w(0.0, 0.0);
        let wxx = (w(step, 0.0) - 2.0 * c + w(-step, 0.0)) / (step * step);
        let wyy = (w(0.0, step) - 2.0 * c + w(0.0, -step)) / (step * step);
        let wxy = (w(step, step) - w(step, -step) - w(-step, step) + w(-step, -step)) / (4.0 * step * step);
        let det = wxx * wyy - wxy * wxy;
        let rhs = (-c).powi(-4);
        assert!((det - rhs).abs() <= 5e-2 * rhs, "{x:?}: det {det}, rhs {rhs}");
    }
}
