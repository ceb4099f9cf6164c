//! Discrete Legendre–Fenchel machinery on grid functions.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Vec2};
use crate::lp::EnvelopeLp;

/// Finite samples of a function on a closed convex curve, in counter-clockwise order.
///
/// Samples where the function is `+inf` are simply left out, so an empty set
/// stands for the function that is identically `+inf`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundaryData {
    pub points: Vec<Vec2>,
    pub values: Vec<f64>,
}

impl BoundaryData {
    pub fn new(points: Vec<Vec2>, values: Vec<f64>) -> Result<Self> {
        if points.len() != values.len() {
            return Err(Error::InvalidInput("boundary points and values differ in length".into()));
        }
        let (points, values) = points.into_iter().zip(values).filter(|(_, v)| v.is_finite()).unzip();
        Ok(BoundaryData { points, values })
    }

    /// Samples `g` at the boundary samples of `domain`.
    pub fn sample(domain: &GridDomain, g: impl Fn(&Vec2) -> f64) -> Self {
        let points = domain.boundary().to_vec();
        let values = points.iter().map(g).collect();
        BoundaryData::new(points, values).expect("lengths agree")
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }
    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn negated(&self) -> Self {
        BoundaryData { points: self.points.clone(), values: self.values.iter().map(|v| -v).collect() }
    }
}

/// `f*(x) = sup_y x.y - f(y)` at every node and boundary sample of `window`.
///
/// Exhaustive maximum over the nodes of `f` (and its boundary samples when present),
/// so the result is exactly a maximum of affine functions.
pub fn legendre_transform(f: &GridFunction, window: Arc<GridDomain>) -> GridFunction {
    let values: Vec<f64> = window.nodes().par_iter().map(|x| f.conjugate_at(x).value).collect();
    let boundary: Vec<f64> = window.boundary().par_iter().map(|x| f.conjugate_at(x).value).collect();
    GridFunction::new(window, values, Some(boundary)).expect("conjugate of finite data is finite")
}

/// Square dual window large enough to hold the slopes of `f`.
pub fn default_dual_window(f: &GridFunction) -> Arc<GridDomain> {
    let half = f.lipschitz() + 2.0 * f.spacing();
    let half = half.max(4.0 * f.spacing());
    Arc::new(
        GridDomain::window(-half, half, -half, half, f.domain().resolution())
            .expect("symmetric window contains the origin"),
    )
}

/// `f**` on the nodes of `f`, going through `window` (default: [`default_dual_window`]).
pub fn biconjugate(f: &GridFunction, window: Option<Arc<GridDomain>>) -> GridFunction {
    let window = window.unwrap_or_else(|| default_dual_window(f));
    let star = legendre_transform(f, window);
    let values: Vec<f64> = f.domain().nodes().par_iter().map(|y| star.conjugate_at(y).value).collect();
    let boundary = f
        .boundary_values()
        .map(|_| f.domain().boundary().par_iter().map(|y| star.conjugate_at(y).value).collect());
    GridFunction::new(f.domain().clone(), values, boundary).expect("finite")
}

/// Tolerance `4 Lip h` for Fenchel-type comparisons, where `Lip` bounds the slope of
/// `y -> x.y - f(y)` for `|x| <= dual_radius`.
pub fn fenchel_tolerance(f: &GridFunction, dual_radius: f64) -> f64 {
    4.0 * (f.lipschitz() + dual_radius) * f.spacing()
}

/// `f(x) + f*(y) - x.y`; nonnegative up to grid error.
pub fn fenchel_gap(f: &GridFunction, x: &Vec2, y: &Vec2) -> Result<f64> {
    let fx = f.eval(x)?;
    Ok(fx + f.conjugate_at(y).value - x.dot(y))
}

/// Dual nodes of `window` at which Fenchel's equality holds at `x` within `tol`.
pub fn subdifferential(f: &GridFunction, x: &Vec2, window: &Arc<GridDomain>, tol: f64) -> Result<Vec<Vec2>> {
    let fx = f.eval(x)?;
    let hits: Vec<Vec2> = window
        .nodes()
        .par_iter()
        .filter(|y| fx + f.conjugate_at(y).value - x.dot(y) <= tol)
        .copied()
        .collect();
    Ok(hits)
}

/// Largest convex function on `domain` lying below `g` on the boundary:
/// `sup { a(y) : a affine, a <= g at every boundary sample }`, one linear
/// program per node.
pub fn envelope_from_boundary(domain: Arc<GridDomain>, g: &BoundaryData) -> Result<GridFunction> {
    if g.len() < 3 {
        return Err(Error::InsufficientBoundary { got: g.len(), need: 3 });
    }
    let lp = EnvelopeLp::new(&g.points, &g.values)?;
    let (nx, _) = domain.lattice_dims();
    // one lattice column per task so each task warm-starts along its column
    let mut columns: Vec<Vec<usize>> = vec![Vec::new(); nx];
    for k in 0..domain.len() {
        columns[domain.lattice_index(k).0].push(k);
    }
    let solved: Vec<Vec<(usize, f64)>> = columns
        .par_iter()
        .map(|col| {
            let mut warm = None;
            col.iter()
                .map(|&k| {
                    let s = lp.solve(&domain.node(k), warm)?;
                    warm = Some(s.basis);
                    Ok((k, s.value))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut values = vec![0.0; domain.len()];
    for (k, v) in solved.into_iter().flatten() {
        values[k] = v;
    }
    let mut warm = None;
    let mut boundary = Vec::with_capacity(domain.boundary().len());
    for b in domain.boundary() {
        let s = lp.solve(b, warm)?;
        warm = Some(s.basis);
        boundary.push(s.value);
    }
    GridFunction::new(domain, values, Some(boundary))
}

/// `-envelope(-g)`: the smallest concave function above `g` on the boundary.
pub fn concave_envelope_from_boundary(domain: Arc<GridDomain>, g: &BoundaryData) -> Result<GridFunction> {
    let low = envelope_from_boundary(domain.clone(), &g.negated())?;
    let values = low.values().iter().map(|v| -v).collect();
    let boundary = low.boundary_values().map(|b| b.iter().map(|v| -v).collect());
    GridFunction::new(domain, values, boundary)
}
