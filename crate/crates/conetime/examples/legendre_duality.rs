//! Discrete Legendre transforms: the conjugate of the Minkowski gauge is the
//! hyperboloid, biconjugation convexifies, and Fenchel's inequality holds up to
//! grid error.

use std::sync::Arc;

use conetime::convex::{biconjugate, fenchel_gap, fenchel_tolerance, legendre_transform};
use conetime::{GridDomain, GridFunction, Shape, Vec2};

fn main() -> conetime::Result<()> {
    let disk = Arc::new(GridDomain::new(Shape::unit_disk(), 81)?);
    let gauge = GridFunction::from_fn(disk.clone(), |y| -(1.0 - y.norm_squared()).max(0.0).sqrt())?;

    let window = Arc::new(GridDomain::window(-2.0, 2.0, -2.0, 2.0, 41)?);
    let star = legendre_transform(&gauge, window.clone());
    let err = window
        .nodes()
        .iter()
        .zip(star.values())
        .map(|(x, v)| (v - (1.0 + x.norm_squared()).sqrt()).abs())
        .fold(0.0, f64::max);
    println!("conjugate of the gauge vs sqrt(1+|x|^2): max error {err:.2e} (h = {:.3})", disk.spacing());

    // a non-convex function and its convex hull
    let wavy = GridFunction::from_fn(disk.clone(), |y| y.norm_squared() + 0.2 * (6.0 * y.x).sin())?;
    let hull = biconjugate(&wavy, None);
    let lowered = wavy.values().iter().zip(hull.values()).filter(|(f, g)| *f - *g > 1e-6).count();
    println!("biconjugate: {lowered} of {} nodes lowered, certified convex: {}", disk.len(), hull.convexity_certified());

    let eps = fenchel_tolerance(&gauge, 2.0);
    for (x, y) in [(Vec2::new(0.3, 0.1), Vec2::new(-1.0, 0.5)), (Vec2::new(0.6, 0.0), Vec2::new(0.75, 0.0))] {
        let gap = fenchel_gap(&gauge, &x, &y)?;
        println!("gap at x = ({:.2}, {:.2}), y = ({:.2}, {:.2}): {gap:.3e} (tolerance {eps:.2e})", x.x, x.y, y.x, y.y);
    }
    Ok(())
}
