//! Cosmological time of the future of three points in Minkowski space: time, normal
//! projection, projecting normal and gradient at a few sample points.

use conetime::cone::{support_from_points, ConeSpec, Vec3};
use conetime::cosmology::{causal_distance, Cosmology};
use conetime::sphere::GaugeFunction;

fn main() -> conetime::Result<()> {
    let cone = ConeSpec::minkowski(101)?;
    let sources = [Vec3::new(0.5, 0.0, 0.0), Vec3::new(-0.5, 0.0, 0.0), Vec3::new(0.0, 0.6, 0.2)];
    let s = support_from_points(cone.dual().clone(), &sources)?;
    let gauge = GaugeFunction::minkowski(cone.dual().clone())?;
    let cosmo = Cosmology::new(s, gauge.clone())?;

    for x in [Vec3::new(0.0, 0.0, 1.0), Vec3::new(0.4, 0.1, 1.5), Vec3::new(-0.2, 0.5, 2.5)] {
        let c = cosmo.chart(&x)?;
        let p = c.projection();
        let g = cosmo.gradient_from_chart(&c);
        // the time equals the Lorentzian distance back to the projection
        let rho = causal_distance(&gauge, &p, &x)?;
        println!("X = ({:.2}, {:.2}, {:.2})", x.x, x.y, x.z);
        println!("  T = {:.6}  distance to P = {rho:.6}", c.time);
        println!("  P = ({:.4}, {:.4}, {:.4})  y = ({:.4}, {:.4})", p.x, p.y, p.z, c.normal[0], c.normal[1]);
        println!("  grad T = ({:.4}, {:.4}, {:.4})", g.x, g.y, g.z);
        println!(
            "  reconstruction residual {:.2e} (tolerance {:.2e})",
            cosmo.reconstruction_residual(&c)?,
            cosmo.reconstruction_tolerance(c.time)
        );
    }
    Ok(())
}
