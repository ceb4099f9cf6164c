//! Polars, causal types of hyperplanes, Gauss maps and Cauchy developments for a
//! pentagonal cone.

use conetime::cone::{
    cauchy_development_halfspaces, classify_hyperplane, gauss_map, inverse_gauss, polar_domain, support_from_points,
    ConeSpec, GaussTolerances, Vec3,
};
use conetime::convex::BoundaryData;
use conetime::{Shape, Vec2};

fn main() -> conetime::Result<()> {
    let pentagon = Shape::Polygon { vertices: vec![[1.0, 0.0], [0.3, 0.95], [-0.8, 0.6], [-0.8, -0.6], [0.3, -0.95]] };
    let cone = ConeSpec::new(pentagon, 49)?;
    println!("section {:?}", cone.section().shape());
    println!("dual    {:?}", cone.dual().shape());
    let back = polar_domain(cone.dual())?;
    let drift = cone.section().boundary().iter().map(|b| back.shape().boundary_distance(b)).fold(0.0, f64::max);
    println!("polar of the dual is the section again, up to {drift:.1e}");

    for y in [Vec3::new(0.0, 0.0, -1.0), Vec3::new(1.0, 0.0, -1.0), Vec3::new(2.0, 0.0, -1.0), Vec3::new(0.0, 1.0, 0.0)] {
        println!("hyperplane with normal {:?}: {:?}", y.as_slice(), classify_hyperplane(&cone, &y)?);
    }

    // the future of two points; the edge between them is a ridge of the boundary
    let pts = [Vec3::new(0.3, 0.0, 0.0), Vec3::new(-0.3, 0.0, 0.0)];
    let s = support_from_points(cone.dual().clone(), &pts)?;
    // the ridge normals form the line y1 = 0, which the dual lattice misses, so the
    // equality slack has to be of the size of the slope times h
    let tol = GaussTolerances { equality: 0.3 * s.spacing(), ..GaussTolerances::for_spacing(s.spacing()) };
    for p in [pts[0], (pts[0] + pts[1]) / 2.0] {
        let normals = gauss_map(&s, &p, tol)?;
        println!("({:.2}, {:.2}, {:.2}) has {} supporting normals", p.x, p.y, p.z, normals.len());
    }
    let q = inverse_gauss(&s, &Vec2::new(0.2, 0.1))?;
    println!("boundary point with normal (0.2, 0.1, -1): ({:.3}, {:.3}, {:.3})", q.x, q.y, q.z);

    let g = BoundaryData::sample(cone.dual(), |_| 0.0);
    let dev = cauchy_development_halfspaces(&g);
    for p in [Vec3::new(0.0, 0.0, 1.0), Vec3::new(2.0, 0.0, 1.0)] {
        println!("({}, {}, {}) in the Cauchy development of g = 0: {}", p.x, p.y, p.z, dev.contains(&p));
    }
    Ok(())
}
