//! The limit set of a coboundary deformation in dual projective space, and its
//! invariance under the group.

use std::sync::Arc;

use conetime::cone::Vec3;
use conetime::convex::BoundaryData;
use conetime::deform::bending::dual_projective_action;
use conetime::deform::{genus_two, limit_set_samples, projective_embed, Cocycle};
use conetime::{GridDomain, Shape};
use nalgebra::Vector4;

fn main() -> conetime::Result<()> {
    let dual = GridDomain::new(Shape::unit_disk(), 33)?;
    let rep = Arc::new(genus_two().rep);
    let v = Vec3::new(0.2, -0.1, 0.5);
    let cocycle = Cocycle::coboundary(rep.clone(), &v);
    let g = BoundaryData::sample(&dual, |b| v.dot(&Vec3::new(b.x, b.y, -1.0)));
    let limit = limit_set_samples(&g);
    println!("{} limit set samples, first {:?}", limit.points.len(), limit.points[0]);

    for word in ["a", "cD", "abAB"] {
        let m = cocycle.word_map(&rep.parse_word(word)?);
        println!("projective embedding of {word}:{:.4}", projective_embed(&m.linear, &m.translation));
        let act = dual_projective_action(&m.linear, &m.translation)?;
        // each image (y : -1 : -g) should again satisfy g(y) = V.(y, -1) with |y| = 1
        let worst = limit
            .points
            .iter()
            .map(|p| {
                let z = act * Vector4::from(*p);
                let z = z / -z[2];
                let on_circle = (z.fixed_rows::<2>(0).norm() - 1.0).abs();
                let on_graph = (-z[3] - v.dot(&Vec3::new(z[0], z[1], -1.0))).abs();
                on_circle.max(on_graph)
            })
            .fold(0.0, f64::max);
        println!("{word} maps the limit set to itself up to {worst:.2e}");
    }
    Ok(())
}
