//! Cosmological time of a C-convex domain, its normal decomposition, level sets, and
//! the Finsler length of causal curves.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{split, Vec3};
use crate::error::{Error, Result};
use crate::function::{GridFunction, SupSample};
use crate::grid::{GridDomain, Vec2};
use crate::sphere::GaugeFunction;

/// Default ceiling on the cosmological time searched for.
pub const DEFAULT_TIME_CAP: f64 = 1e4;

/// `X = P + T * sigma(y)`: time, normal projection and projecting normal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CosmoChart {
    pub time: f64,
    pub projection: [f64; 3],
    pub normal: [f64; 2],
    /// The normal sits within `2h` of the dual boundary, where the gauge gradient
    /// is poorly resolved.
    pub low_confidence: bool,
}

impl CosmoChart {
    pub fn projection(&self) -> Vec3 {
        Vec3::from(self.projection)
    }
    pub fn normal(&self) -> Vec2 {
        Vec2::new(self.normal[0], self.normal[1])
    }
}

/// Point of the affine sphere with normal `(y, -1)`: `(grad w, grad w . y - w)`.
pub fn sphere_point(omega: &GaugeFunction, y: &Vec2) -> Result<Vec3> {
    let w = omega.omega();
    let g = w.gradient(y)?;
    let v = w.eval(y)?;
    Ok(Vec3::new(g.x, g.y, g.dot(y) - v))
}

/// A C-convex domain (support function `s`) together with the gauge that defines its
/// cosmological time. Both live on the same dual grid.
#[derive(Clone, Debug)]
pub struct Cosmology {
    s: GridFunction,
    omega: GaugeFunction,
    time_cap: f64,
}

impl Cosmology {
    pub fn new(s: GridFunction, omega: GaugeFunction) -> Result<Self> {
        if !s.same_domain(omega.omega()) {
            return Err(Error::DomainMismatch);
        }
        if !s.convexity_certified() {
            return Err(Error::InvalidInput("support function is not convex".into()));
        }
        Ok(Cosmology { s, omega, time_cap: DEFAULT_TIME_CAP })
    }

    pub fn with_time_cap(mut self, cap: f64) -> Self {
        self.time_cap = cap;
        self
    }

    pub fn support(&self) -> &GridFunction {
        &self.s
    }
    pub fn gauge(&self) -> &GaugeFunction {
        &self.omega
    }
    pub fn spacing(&self) -> f64 {
        self.s.spacing()
    }

    fn level_sup(&self, x: &Vec2, t: f64) -> SupSample {
        let w = self.omega.omega().values();
        self.s.refined_sup(x, |k| t * w[k], false)
    }

    /// `(s + t w)*(x)`, a max over the interior dual nodes (where `w < 0`, so the
    /// value is strictly increasing in `t`).
    pub fn level_value(&self, x: &Vec2, t: f64) -> f64 {
        self.level_sup(x, t).value
    }

    /// `X` lies strictly inside the domain.
    pub fn contains(&self, p: &Vec3) -> bool {
        let (x, lambda) = split(p);
        lambda > self.level_value(&x, 0.0)
    }

    fn slope_at(&self, sup: &SupSample) -> f64 {
        // d/dt (s + t w)*(x) = -w(argmax)
        match sup.node {
            Some(k) if sup.argmax == self.s.domain().node(k) => -self.omega.omega().value(k),
            _ => -self.omega.value(&sup.argmax),
        }
    }

    /// Cosmological time alone: the root of `t -> (s + t w)*(x) - lambda`.
    pub fn time(&self, p: &Vec3) -> Result<f64> {
        let (x, lambda) = split(p);
        let g = |t: f64| {
            let sup = self.level_sup(&x, t);
            (sup.value - lambda, self.slope_at(&sup))
        };
        if g(0.0).0 >= 0.0 {
            return Err(Error::Causality(format!("({}, {}, {}) is not inside the domain", p.x, p.y, p.z)));
        }
        let mut hi = 1.0;
        let mut top = g(hi);
        while top.0 <= 0.0 {
            hi *= 2.0;
            if hi > self.time_cap {
                return Err(Error::NoBracket(format!("cosmological time exceeds the cap {}", self.time_cap)));
            }
            top = g(hi);
        }
        // convex increasing in t: Newton from above, bisection as a guard
        let mut lo = 0.0;
        let (mut t, mut cur) = (hi, top);
        for _ in 0..200 {
            if cur.0 > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            if cur.0 == 0.0 || hi - lo <= 1e-14 * hi {
                break;
            }
            let newton = t - cur.0 / cur.1;
            if cur.1 > 0.0 && (newton - t).abs() <= 1e-15 * t.max(1.0) {
                t = newton;
                break;
            }
            t = if cur.1 > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            cur = g(t);
        }
        Ok(t)
    }

    /// Time, normal projection and projecting normal of an interior point.
    pub fn chart(&self, p: &Vec3) -> Result<CosmoChart> {
        let time = self.time(p)?;
        let (x, _) = split(p);
        let y = self.level_sup(&x, time).argmax;
        let proj = p - time * sphere_point(&self.omega, &y)?;
        let d = self.s.domain();
        Ok(CosmoChart {
            time,
            projection: proj.into(),
            normal: [y.x, y.y],
            low_confidence: d.boundary_distance(&y) < 2.0 * d.spacing(),
        })
    }

    /// Gradient `(y, -1) / w(y)` of the cosmological time.
    pub fn gradient(&self, p: &Vec3) -> Result<Vec3> {
        let c = self.chart(p)?;
        Ok(self.gradient_from_chart(&c))
    }

    pub fn gradient_from_chart(&self, c: &CosmoChart) -> Vec3 {
        let y = c.normal();
        let w = self.omega.value(&y);
        Vec3::new(y.x, y.y, -1.0) / w
    }

    /// How far the chart is from a true decomposition: `P` must lie on the boundary
    /// graph, on the supporting plane with normal `(y, -1)`.
    pub fn reconstruction_residual(&self, c: &CosmoChart) -> Result<f64> {
        let p = c.projection();
        let (px, plambda) = split(&p);
        let on_graph = (plambda - self.s.conjugate_at(&px).value).abs();
        let y = c.normal();
        let on_plane = (self.s.eval(&y)? - p.dot(&Vec3::new(y.x, y.y, -1.0))).abs();
        Ok(on_graph.max(on_plane))
    }

    /// Tolerance `5 h (1 + T)` for [`reconstruction_residual`](Self::reconstruction_residual).
    pub fn reconstruction_tolerance(&self, time: f64) -> f64 {
        5.0 * self.spacing() * (1.0 + time)
    }

    /// The level set `T = t` as the graph of `(s + t w)*` over `window`.
    pub fn level_set(&self, t: f64, window: Arc<GridDomain>) -> Result<GridFunction> {
        if !(t > 0.0) {
            return Err(Error::InvalidInput(format!("level set time must be positive, got {t}")));
        }
        let values: Vec<f64> = window.nodes().par_iter().map(|x| self.level_value(x, t)).collect();
        let boundary: Vec<f64> = window.boundary().par_iter().map(|x| self.level_value(x, t)).collect();
        GridFunction::new(window, values, Some(boundary))
    }
}

/// Gauge slack allowed when deciding that a vector is null rather than spacelike.
pub const NULL_TOLERANCE: f64 = 1e-9;

/// `F(v, nu) = -nu w(v / nu)`, the Finsler norm of a future causal vector.
pub fn finsler_norm(omega: &GaugeFunction, v: &Vec3) -> Result<f64> {
    let (dx, nu) = split(v);
    let scale = v.norm();
    if scale == 0.0 {
        return Ok(0.0);
    }
    if nu <= 0.0 {
        return Err(Error::Causality(format!("({}, {}, {}) is not future directed", v.x, v.y, v.z)));
    }
    let x = dx / nu;
    let gauge = omega.domain().shape().polar().gauge(&x);
    if gauge > 1.0 + NULL_TOLERANCE {
        return Err(Error::Causality(format!("({}, {}, {}) is spacelike", v.x, v.y, v.z)));
    }
    if gauge >= 1.0 - 1e-12 {
        return Ok(0.0);
    }
    match omega.radial_profile(&x) {
        Ok(w) => Ok(-nu * w),
        // the profile vanishes at the boundary; past 2^50 it is zero to double precision
        Err(Error::NoBracket(_)) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// `rho(X0, X1) = F(X1 - X0)`.
pub fn causal_distance(omega: &GaugeFunction, from: &Vec3, to: &Vec3) -> Result<f64> {
    finsler_norm(omega, &(to - from))
}

/// A piecewise-straight curve.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CausalCurve {
    pub vertices: Vec<[f64; 3]>,
}

impl CausalCurve {
    pub fn new(vertices: &[Vec3]) -> Self {
        CausalCurve { vertices: vertices.iter().map(|v| (*v).into()).collect() }
    }
}

/// Sum of `F` over the segments; fails on the first non-causal segment.
pub fn curve_length(omega: &GaugeFunction, curve: &CausalCurve) -> Result<f64> {
    let mut total = 0.0;
    for (i, w) in curve.vertices.windows(2).enumerate() {
        let d = Vec3::from(w[1]) - Vec3::from(w[0]);
        total += finsler_norm(omega, &d).map_err(|e| match e {
            Error::Causality(m) => Error::Causality(format!("segment {i}: {m}")),
            e => e,
        })?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cone::{support_of_translate, ConeSpec};

    fn minkowski(n: usize) -> (ConeSpec, GaugeFunction) {
        let cone = ConeSpec::minkowski(n).unwrap();
        let g = GaugeFunction::minkowski(cone.dual().clone()).unwrap();
        (cone, g)
    }

    fn lorentz(v: &Vec3) -> f64 {
        (v.z * v.z - v.x * v.x - v.y * v.y).sqrt()
    }

    #[test]
    fn cone_chart_on_axis() {
        let (cone, g) = minkowski(101);
        let s = GridFunction::from_fn(cone.dual().clone(), |_| 0.0).unwrap();
        let c = Cosmology::new(s, g).unwrap();
        let chart = c.chart(&Vec3::new(0.0, 0.0, 2.0)).unwrap();
        assert!((chart.time - 2.0).abs() < 1e-9);
        assert!(chart.projection().norm() < 1e-6);
        assert!(chart.normal().norm() < 1e-9);
        let grad = c.gradient_from_chart(&chart);
        assert!((grad - Vec3::new(0.0, 0.0, 1.0)).norm() < 1e-6);
    }

    #[test]
    fn cone_chart_off_axis() {
        let (cone, g) = minkowski(101);
        let s = GridFunction::from_fn(cone.dual().clone(), |_| 0.0).unwrap();
        let c = Cosmology::new(s, g).unwrap();
        let p = Vec3::new(0.5, 0.0, 1.25);
        let chart = c.chart(&p).unwrap();
        assert!((chart.time - lorentz(&p)).abs() < 1e-4, "{}", chart.time);
        let grad = c.gradient_from_chart(&chart);
        assert!((grad - Vec3::new(-0.4364357804719847, 0.0, 1.0910894511799618)).norm() < 1e-3, "{grad:?}");
        assert!(c.reconstruction_residual(&chart).unwrap() <= c.reconstruction_tolerance(chart.time));
        assert!(c.chart(&Vec3::new(2.0, 0.0, 1.0)).is_err());
    }

    #[test]
    fn translated_cone_time_is_lorentzian_distance() {
        let (cone, g) = minkowski(101);
        let apex = Vec3::new(0.3, -0.2, 0.5);
        let s = support_of_translate(cone.dual().clone(), &apex).unwrap();
        let c = Cosmology::new(s, g).unwrap();
        for p in [Vec3::new(0.3, -0.2, 1.5), Vec3::new(0.8, 0.1, 2.0), Vec3::new(-0.4, 0.3, 2.5)] {
            let chart = c.chart(&p).unwrap();
            assert!((chart.time - lorentz(&(p - apex))).abs() < 1e-3, "{p:?}: {}", chart.time);
            assert!((chart.projection() - apex).norm() < c.reconstruction_tolerance(chart.time));
        }
    }

    #[test]
    fn level_sets_of_the_cone() {
        let (cone, g) = minkowski(101);
        let s = GridFunction::from_fn(cone.dual().clone(), |_| 0.0).unwrap();
        let c = Cosmology::new(s, g).unwrap();
        let window = Arc::new(GridDomain::window(-1.0, 1.0, -1.0, 1.0, 21).unwrap());
        let one = c.level_set(1.0, window.clone()).unwrap();
        let two = c.level_set(2.0, window.clone()).unwrap();
        for ((x, a), b) in window.nodes().iter().zip(one.values()).zip(two.values()) {
            assert!((a - (1.0 + x.norm_squared()).sqrt()).abs() < 1e-3);
            assert!((b - (4.0 + x.norm_squared()).sqrt()).abs() < 1e-3);
            assert!(b > a);
        }
        assert!(c.level_set(0.0, window).is_err());
    }

    #[test]
    fn finsler_norm_of_minkowski() {
        let (_, g) = minkowski(101);
        let f = |v: [f64; 3]| finsler_norm(&g, &Vec3::from(v));
        assert!((f([0.0, 0.0, 1.0]).unwrap() - 1.0).abs() < 1e-9);
        assert!((f([3.0, 0.0, 5.0]).unwrap() - 4.0).abs() < 1e-3);
        assert_eq!(f([1.0, 0.0, 1.0]).unwrap(), 0.0);
        assert!(f([2.0, 0.0, 1.0]).is_err());
        assert!(f([0.0, 0.0, -1.0]).is_err());
    }

    #[test]
    fn curve_lengths() {
        let (_, g) = minkowski(101);
        let a = Vec3::new(0.0, 0.0, 0.0);
        let b = Vec3::new(0.3, 0.1, 2.0);
        let rho = causal_distance(&g, &a, &b).unwrap();
        let pieces: Vec<Vec3> = (0..=5).map(|i| a + (b - a) * (i as f64 / 5.0)).collect();
        let refined = curve_length(&g, &CausalCurve::new(&pieces)).unwrap();
        assert!((refined - rho).abs() < 1e-9 * rho.max(1.0) + 1e-6);
        let broken = curve_length(&g, &CausalCurve::new(&[a, Vec3::new(0.8, 0.0, 1.0), b])).unwrap();
        assert!(broken <= rho);
        let bad = CausalCurve::new(&[a, Vec3::new(0.0, 0.0, 1.0), Vec3::new(3.0, 0.0, 1.5)]);
        assert!(matches!(curve_length(&g, &bad), Err(Error::Causality(m)) if m.starts_with("segment 1")));
    }
}
