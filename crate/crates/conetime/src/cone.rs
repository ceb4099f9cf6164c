//! Proper convex cones `C = {t (x, 1) : x in Omega, t > 0}`, their duals, and
//! convex domains described by support functions on the dual section.

use std::sync::Arc;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::convex::{legendre_transform, BoundaryData};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Shape, Vec2};

pub type Vec3 = Vector3<f64>;

/// Splits `(x, lambda)` into its spatial part and last coordinate.
pub fn split(p: &Vec3) -> (Vec2, f64) {
    (Vec2::new(p.x, p.y), p.z)
}

/// `(y, -1)`: the covector whose pairing with `(x, lambda)` is `x.y - lambda`.
pub fn dual_lift(y: &Vec2) -> Vec3 {
    Vec3::new(y.x, y.y, -1.0)
}

/// A cone given by its section `Omega`, with the dual section `Omega*` gridded at the
/// same resolution.
#[derive(Clone, Debug)]
pub struct ConeSpec {
    section: Arc<GridDomain>,
    dual: Arc<GridDomain>,
}

impl ConeSpec {
    pub fn new(section: Shape, resolution: usize) -> Result<Self> {
        let section = GridDomain::new(section, resolution)?;
        let dual = section.polar()?;
        // the polar of the polar must give back the section
        let back = dual.shape().polar();
        let probes: Vec<Vec2> = match section.shape() {
            Shape::Polygon { vertices } => vertices.iter().map(|v| Vec2::from(*v)).collect(),
            Shape::Disk { radius } => vec![Vec2::new(*radius, 0.0), Vec2::new(0.0, -radius)],
            Shape::Ellipse { a, b } => vec![Vec2::new(*a, 0.0), Vec2::new(0.0, *b), Vec2::new(-a, 0.0)],
        };
        for p in probes {
            if (back.gauge(&p) - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidShape("polar is not an involution on this shape".into()));
            }
        }
        Ok(ConeSpec { section: Arc::new(section), dual: Arc::new(dual) })
    }

    /// The future light cone: `Omega = Omega* =` unit disk.
    pub fn minkowski(resolution: usize) -> Result<Self> {
        Self::new(Shape::unit_disk(), resolution)
    }

    pub fn section(&self) -> &Arc<GridDomain> {
        &self.section
    }
    pub fn dual(&self) -> &Arc<GridDomain> {
        &self.dual
    }

    /// `V` lies in the open cone.
    pub fn contains(&self, v: &Vec3) -> bool {
        let (x, t) = split(v);
        t > 0.0 && self.section.contains(&(x / t))
    }

    /// `V` lies in the closed cone (up to `tol` in the section gauge).
    pub fn contains_closed(&self, v: &Vec3, tol: f64) -> bool {
        let (x, t) = split(v);
        if t <= 0.0 {
            return x.norm() <= tol && t.abs() <= tol;
        }
        self.section.shape().gauge(&(x / t)) <= 1.0 + tol
    }
}

/// Samples the support function `s(y) = max_X X.(y, -1)` of a finite point set
/// (the domain `conv(points) + C`) on the dual section, boundary samples included.
pub fn support_from_points(dual: Arc<GridDomain>, points: &[Vec3]) -> Result<GridFunction> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty point set".into()));
    }
    let eval = |y: &Vec2| {
        let c = dual_lift(y);
        points.iter().map(|p| p.dot(&c)).fold(f64::NEG_INFINITY, f64::max)
    };
    GridFunction::from_fn(dual, eval)
}

/// Support function of the translated cone `X0 + C`: the affine map `y -> X0.(y, -1)`.
pub fn support_of_translate(dual: Arc<GridDomain>, apex: &Vec3) -> Result<GridFunction> {
    support_from_points(dual, std::slice::from_ref(apex))
}

/// Boundary graph `s*` of the domain on a window of the section plane.
pub fn domain_from_support(s: &GridFunction, window: Arc<GridDomain>) -> GridFunction {
    legendre_transform(s, window)
}

/// `X` lies in the closed domain with support function `s`: `lambda >= s*(x)`.
pub fn support_contains(s: &GridFunction, p: &Vec3, tol: f64) -> bool {
    let (x, lambda) = split(p);
    lambda + tol >= s.conjugate_at(&x).value
}

/// Boundary point with normal `(y, -1)`: `(grad s(y), grad s(y).y - s(y))`.
pub fn inverse_gauss(s: &GridFunction, y: &Vec2) -> Result<Vec3> {
    if !s.domain().contains(y) {
        return Err(Error::OutsideDomain(y.x, y.y));
    }
    if s.has_kink_near(y) {
        return Err(Error::NonSmooth(y.x, y.y));
    }
    let g = s.gradient(y)?;
    let v = s.eval(y)?;
    Ok(Vec3::new(g.x, g.y, g.dot(y) - v))
}

/// Tolerances for [`gauss_map`].
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct GaussTolerances {
    /// How far `X` may sit from the boundary graph.
    pub on_boundary: f64,
    /// Fenchel-equality slack for a dual node to count as a normal.
    pub equality: f64,
}

impl GaussTolerances {
    /// `h`-scaled defaults for a support function on a lattice of spacing `h`.
    pub fn for_spacing(h: f64) -> Self {
        GaussTolerances { on_boundary: 4.0 * h, equality: 0.25 * h * h }
    }
}

/// Normals `y` (dual nodes) of the supporting hyperplanes at a boundary point `X`:
/// the nodes where `s(y) + s*(x) = x.y`.
pub fn gauss_map(s: &GridFunction, p: &Vec3, tol: GaussTolerances) -> Result<Vec<Vec2>> {
    let (x, lambda) = split(p);
    let star = s.conjugate_at(&x).value;
    if (lambda - star).abs() > tol.on_boundary {
        return Err(Error::NotOnBoundary(format!("lambda = {lambda}, boundary height {star}")));
    }
    let d = s.domain();
    Ok(d.nodes()
        .iter()
        .zip(s.values())
        .filter(|(y, v)| *v + star - x.dot(y) <= tol.equality)
        .map(|(y, _)| *y)
        .collect())
}

/// A boundary point is spacelike when one of its normals sits more than `h` inside
/// the dual section.
pub fn is_spacelike_boundary_point(s: &GridFunction, p: &Vec3, tol: GaussTolerances) -> Result<bool> {
    let d = s.domain();
    let h = d.spacing();
    Ok(gauss_map(s, p, tol)?.iter().any(|y| d.boundary_distance(y) > h))
}

/// Nodewise sum of two support functions (the Minkowski sum of the domains).
pub fn minkowski_sum_support(a: &GridFunction, b: &GridFunction) -> Result<GridFunction> {
    if !a.same_domain(b) {
        return Err(Error::DomainMismatch);
    }
    let values = a.values().iter().zip(b.values()).map(|(u, v)| u + v).collect();
    let boundary = match (a.boundary_values(), b.boundary_values()) {
        (Some(u), Some(v)) => Some(u.iter().zip(v).map(|(p, q)| p + q).collect()),
        _ => None,
    };
    GridFunction::new(a.domain().clone(), values, boundary)
}

/// Open half-space `{X : X.(y, -1) < offset}` bounded by a null hyperplane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub y: [f64; 2],
    pub offset: f64,
}

impl HalfSpace {
    pub fn normal(&self) -> Vec3 {
        Vec3::new(self.y[0], self.y[1], -1.0)
    }
}

/// Intersection of open half-spaces; empty list means the whole space.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HalfSpaceDomain {
    pub halfspaces: Vec<HalfSpace>,
}

impl HalfSpaceDomain {
    pub fn contains(&self, p: &Vec3) -> bool {
        self.halfspaces.iter().all(|h| h.normal().dot(p) < h.offset)
    }

    /// Smallest slack `offset - X.normal` (positive inside).
    pub fn margin(&self, p: &Vec3) -> f64 {
        self.halfspaces
            .iter()
            .map(|h| h.offset - h.normal().dot(p))
            .fold(f64::INFINITY, f64::min)
    }
}

/// `D_g = {X : X.(y, -1) < g(y) for every boundary sample y}`.
pub fn cauchy_development_halfspaces(g: &BoundaryData) -> HalfSpaceDomain {
    let halfspaces = g
        .points
        .iter()
        .zip(&g.values)
        .map(|(y, v)| HalfSpace { y: [y.x, y.y], offset: *v })
        .collect();
    HalfSpaceDomain { halfspaces }
}

/// Causal type of a hyperplane with normal covector `Y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CausalClass {
    Spacelike,
    Null,
    Other,
}

/// Spacelike when `Y ~ (y, -1)` with `y` in the open dual section, null when `y` is
/// within `h` of its boundary. The sign of `Y` does not matter.
pub fn classify_hyperplane(cone: &ConeSpec, normal: &Vec3) -> Result<CausalClass> {
    if normal.norm() == 0.0 || !normal.iter().all(|c| c.is_finite()) {
        return Err(Error::InvalidInput("zero normal".into()));
    }
    if normal.z == 0.0 {
        return Ok(CausalClass::Other);
    }
    let y = Vec2::new(normal.x, normal.y) / -normal.z;
    let dual = cone.dual();
    let inside = dual.contains(&y);
    let near = dual.boundary_distance(&y) <= dual.spacing();
    Ok(if near {
        CausalClass::Null
    } else if inside {
        CausalClass::Spacelike
    } else {
        CausalClass::Other
    })
}

/// Grid over the polar shape at the same resolution.
pub fn polar_domain(d: &GridDomain) -> Result<GridDomain> {
    d.polar()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn translated_cone_is_recovered() {
        let cone = ConeSpec::minkowski(41).unwrap();
        let apex = Vec3::new(0.2, -0.1, 0.5);
        let s = support_of_translate(cone.dual().clone(), &apex).unwrap();
        assert!(s.convexity_certified());
        // every normal of the apex lies in the dual section
        let tol = GaussTolerances::for_spacing(s.spacing());
        let normals = gauss_map(&s, &apex, tol).unwrap();
        assert_eq!(normals.len(), cone.dual().len());
        // inverse Gauss returns the apex from any normal
        for y in [Vec2::new(0.0, 0.0), Vec2::new(0.3, -0.4)] {
            let p = inverse_gauss(&s, &y).unwrap();
            assert!((p - apex).norm() < 1e-12);
        }
        assert!(support_contains(&s, &(apex + Vec3::new(0.0, 0.0, 0.1)), 0.0));
        assert!(!support_contains(&s, &(apex - Vec3::new(0.0, 0.0, 0.1)), 0.0));
    }

    #[test]
    fn hyperboloid_apex_has_a_single_normal() {
        let cone = ConeSpec::minkowski(41).unwrap();
        let d = cone.dual().clone();
        let s = GridFunction::from_fn(d, |y| -(1.0 - y.norm_squared()).max(0.0).sqrt()).unwrap();
        let tol = GaussTolerances::for_spacing(s.spacing());
        let normals = gauss_map(&s, &Vec3::new(0.0, 0.0, 1.0), tol).unwrap();
        assert_eq!(normals.len(), 1);
        assert!(normals[0].norm() < 1e-14);
        assert!(is_spacelike_boundary_point(&s, &Vec3::new(0.0, 0.0, 1.0), tol).unwrap());
        assert!(gauss_map(&s, &Vec3::new(0.0, 0.0, 3.0), tol).is_err());
    }

    #[test]
    fn hyperplane_classes() {
        let cone = ConeSpec::minkowski(41).unwrap();
        let c = |v: [f64; 3]| classify_hyperplane(&cone, &Vec3::from(v)).unwrap();
        assert_eq!(c([0.0, 0.0, -1.0]), CausalClass::Spacelike);
        assert_eq!(c([1.0, 0.0, -1.0]), CausalClass::Null);
        assert_eq!(c([2.0, 0.0, -1.0]), CausalClass::Other);
        assert_eq!(c([1.0, 0.0, 0.0]), CausalClass::Other);
        assert_eq!(c([0.0, 0.0, 1.0]), CausalClass::Spacelike);
        assert!(classify_hyperplane(&cone, &Vec3::zeros()).is_err());
    }

    #[test]
    fn empty_boundary_data_gives_whole_space() {
        let d = cauchy_development_halfspaces(&BoundaryData::default());
        assert!(d.contains(&Vec3::new(1e6, -3.0, -1e6)));
    }

    #[test]
    fn kinked_support_has_no_inverse_gauss() {
        let cone = ConeSpec::minkowski(41).unwrap();
        let pts = [Vec3::new(0.5, 0.0, 1.0), Vec3::new(-0.5, 0.0, 1.0)];
        let s = support_from_points(cone.dual().clone(), &pts).unwrap();
        assert!(matches!(inverse_gauss(&s, &Vec2::new(0.0, 0.1)), Err(Error::NonSmooth(..))));
        let p = inverse_gauss(&s, &Vec2::new(0.5, 0.1)).unwrap();
        assert!((p - pts[0]).norm() < 1e-12);
    }

    #[test]
    fn mismatched_domains_are_rejected() {
        let a = ConeSpec::minkowski(33).unwrap();
        let b = ConeSpec::minkowski(41).unwrap();
        let f = GridFunction::from_fn(a.dual().clone(), |_| 0.0).unwrap();
        let g = GridFunction::from_fn(b.dual().clone(), |_| 0.0).unwrap();
        assert!(matches!(minkowski_sum_support(&f, &g), Err(Error::DomainMismatch)));
    }
}
