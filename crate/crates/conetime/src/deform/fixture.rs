//! A genus-two surface group in `SO(2,1)`, from the side pairings of the regular
//! hyperbolic octagon with interior angles `pi/4`.

use nalgebra::{Matrix3, SymmetricEigen};

use crate::cone::Vec3;

use super::bending::Splitting;
use super::group::{GroupRep, Mat3};

/// Minkowski form `diag(1, 1, -1)`.
pub fn minkowski_form() -> Mat3 {
    Mat3::from_diagonal(&Vec3::new(1.0, 1.0, -1.0))
}

fn boost(t: f64) -> Mat3 {
    let (c, s) = (t.cosh(), t.sinh());
    Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c)
}

fn rot(t: f64) -> Mat3 {
    let (c, s) = (t.cos(), t.sin());
    Mat3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// The group, and the splitting along the curve `lambda = B a b A` separating
/// `<a, b>` from `<c, d>`.
pub struct GenusTwo {
    pub rep: GroupRep,
    pub splitting: Splitting,
}

pub const RELATOR: &str = "abADcdCB";

pub fn genus_two() -> GenusTwo {
    // distance from the centre to a side midpoint
    let rm = (1.0 + 2f64.sqrt()).acosh();
    let theta = |k: usize| k as f64 * std::f64::consts::FRAC_PI_4;
    // half-turn about the midpoint of side i, then rotate side j onto side i
    let half = |t: f64| rot(t) * boost(rm) * rot(std::f64::consts::PI) * boost(-rm) * rot(-t);
    let pair = |i: usize, j: usize| half(theta(i)) * rot(theta(i) - theta(j));
    let gens = vec![pair(0, 2), pair(1, 3), pair(4, 6), pair(5, 7)];
    let labels = ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect();
    let rep = GroupRep::new(labels, gens, &[RELATOR]).expect("octagon relator holds");
    let lambda = rep.parse_word("BabA").expect("labels exist");
    let x = unit_fixed_vector(&rep.word_matrix(&lambda));
    let splitting = Splitting {
        gens_a: vec![0, 1],
        gens_b: vec![2, 3],
        lambda: vec![lambda],
        x,
        complement: Some(minkowski_form() * x),
    };
    GenusTwo { rep, splitting }
}

/// Spacelike unit (Minkowski) fixed vector of a hyperbolic element of `SO(2,1)`,
/// signed so that its largest entry in absolute value is negative.
fn unit_fixed_vector(m: &Mat3) -> Vec3 {
    // kernel of (m - I) via the smallest eigenvector of (m - I)^T (m - I)
    let a = m - Mat3::identity();
    let eig = SymmetricEigen::new(Matrix3::from(a.transpose() * a));
    let k = eig.eigenvalues.imin();
    let mut x: Vec3 = eig.eigenvectors.column(k).into_owned();
    let q = (x.transpose() * minkowski_form() * x)[0];
    x /= q.sqrt();
    let big = x.iamax();
    if x[big] > 0.0 {
        x = -x;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::ConeSpec;

    #[test]
    fn octagon_group() {
        let g = genus_two();
        let j = minkowski_form();
        for m in g.rep.generators() {
            assert!((m.determinant() - 1.0).abs() < 1e-12);
            assert!((m.transpose() * j * m - j).abs().max() < 1e-9);
            assert!((m.trace() - (5.0 + 4.0 * std::f64::consts::SQRT_2)).abs() < 1e-9);
        }
        let cone = ConeSpec::minkowski(33).unwrap();
        assert!(g.rep.preserves_cone(&cone, 64, 1e-9));
        let lam = g.rep.word_matrix(&g.splitting.lambda[0]);
        let other = g.rep.word_matrix(&g.rep.parse_word("cDCd").unwrap());
        assert!((lam - other).abs().max() < 1e-9);
        let x = g.splitting.x;
        assert!((lam * x - x).norm() < 1e-9);
        assert!((x - Vec3::new(-0.38268343236508984, -0.9238795325112867, 0.0)).norm() < 1e-9, "{x:?}");
    }
}
