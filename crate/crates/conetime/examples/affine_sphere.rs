//! Solve for the affine sphere gauge on the polar of a cone section and inspect it.
//!
//! `cargo run --release --example affine_sphere -- polygon:1,0;0,1;-1,0.2;-0.3,-1`

use std::sync::Arc;

use conetime::pipeline::parse_shape;
use conetime::sphere::{solve_affine_sphere, GaugeFunction, SolverOptions};
use conetime::{GridDomain, Vec2};

fn main() -> conetime::Result<()> {
    let shape = std::env::args().nth(1).unwrap_or_else(|| "ellipse:1.4,0.8".into());
    let section = parse_shape(&shape)?;
    let dual = Arc::new(GridDomain::new(section.polar(), 81)?);
    let sol = solve_affine_sphere(dual.clone(), &SolverOptions::default())?;
    println!("section {shape}: {} nodes, {} iterations, residual {:.2e}", dual.len(), sol.history.len(), sol.residual);
    for rec in &sol.history {
        println!("  iter {:>2}  residual {:.3e}  step {:.3e}", rec.iter, rec.residual, rec.step);
    }

    let gauge = GaugeFunction::new(sol.omega, 1e-9)?;
    let r = gauge.report();
    println!(
        "gauge checks: negative {} GS1 {} (min eig {:.3e}) GS2 {} GS3 {} (blow-up exponent {:.2})",
        r.negative, r.gs1, r.min_hessian_eig, r.gs2, r.gs3, r.blowup_exponent
    );
    for x in [Vec2::zeros(), Vec2::new(0.3, 0.0), Vec2::new(0.0, -0.4)] {
        println!("radial profile at ({:.1}, {:.1}): {:.6}", x.x, x.y, gauge.radial_profile(&x)?);
    }
    Ok(())
}
