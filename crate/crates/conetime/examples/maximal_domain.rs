//! Maximal invariant domains of a bent genus-two group: orbit, boundary function,
//! the two envelopes, and the equivariance of the future one.

use std::sync::Arc;

use conetime::cone::{ConeSpec, Vec3};
use conetime::deform::{
    bend_translation, equivariance_residual, estimate_boundary_function, genus_two, maximal_domain, orbit_points,
};

fn main() -> conetime::Result<()> {
    let s: f64 = std::env::args().nth(1).map(|a| a.parse().expect("bending parameter")).unwrap_or(0.2);
    let cone = ConeSpec::minkowski(49)?;
    let g = genus_two();
    let rep = Arc::new(g.rep.clone());
    let cocycle = bend_translation(rep.clone(), &g.splitting, s)?;

    for l in [3, 4, 5] {
        let orbit = orbit_points(&cocycle, &Vec3::new(0.0, 0.0, 1.0), l, 200_000)?;
        let est = estimate_boundary_function(&orbit, cone.dual())?;
        let md = maximal_domain(cone.dual().clone(), &est.g)?;
        let h = cone.dual().spacing();
        let worst = rep
            .alphabet()
            .iter()
            .map(|letter| equivariance_residual(&md.s_minus, &cocycle.letter(*letter), 2.0 * h).map(|r| r.0))
            .collect::<conetime::Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        println!(
            "L = {l}: {} orbit points, change since L-1 {:.3e}, gap s+ - s- in [{:.3e}, {:.3e}], equivariance {:.3e}",
            orbit.points.len(),
            est.cauchy_gap.unwrap_or(f64::NAN),
            md.min_gap(),
            md.max_gap(),
            worst
        );
    }
    Ok(())
}
