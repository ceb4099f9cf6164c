//! Scalar functions sampled on a [`GridDomain`].

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{GridDomain, Vec2};

/// Finite values at the interior nodes of a domain, with optional values at its
/// boundary samples.
///
/// A function that is `+inf` somewhere is represented by restricting the node set;
/// stored values are always finite.
#[derive(Clone, Debug)]
pub struct GridFunction {
    domain: Arc<GridDomain>,
    values: Vec<f64>,
    boundary_values: Option<Vec<f64>>,
    convexity_certified: bool,
}

/// Result of a pointwise conjugate query `sup_y x.y - f(y)`.
#[derive(Clone, Copy, Debug)]
pub struct SupSample {
    pub value: f64,
    /// Maximiser: a node, a boundary sample, or a refined off-lattice point.
    pub argmax: Vec2,
    /// Index of the best interior node when the maximiser is not a boundary sample.
    pub node: Option<usize>,
}

/// Round-off allowance in ulps of the largest value; linear-programming outputs carry
/// about 1e-13 of noise on affine data.
const ROUNDING_FLOOR: f64 = 4096.0;

const CONVEXITY_DIRS: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

impl GridFunction {
    pub fn new(domain: Arc<GridDomain>, values: Vec<f64>, boundary_values: Option<Vec<f64>>) -> Result<Self> {
        if values.len() != domain.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} nodes",
                values.len(),
                domain.len()
            )));
        }
        if let Some(b) = &boundary_values {
            if b.len() != domain.boundary().len() {
                return Err(Error::InvalidInput("boundary value count mismatch".into()));
            }
            if b.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidInput("non-finite boundary value".into()));
            }
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            let p = domain.node(k);
            return Err(Error::InvalidInput(format!("non-finite value at ({}, {})", p.x, p.y)));
        }
        let mut f = GridFunction { domain, values, boundary_values, convexity_certified: false };
        f.convexity_certified = f.check_convexity();
        Ok(f)
    }

    /// Samples `f` at the nodes and at the boundary samples.
    pub fn from_fn(domain: Arc<GridDomain>, f: impl Fn(&Vec2) -> f64) -> Result<Self> {
        let values = domain.nodes().iter().map(&f).collect();
        let boundary = domain.boundary().iter().map(&f).collect();
        Self::new(domain, values, Some(boundary))
    }

    /// Samples `f` at the nodes only.
    pub fn from_fn_interior(domain: Arc<GridDomain>, f: impl Fn(&Vec2) -> f64) -> Result<Self> {
        let values = domain.nodes().iter().map(f).collect();
        Self::new(domain, values, None)
    }

    pub fn domain(&self) -> &Arc<GridDomain> {
        &self.domain
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn value(&self, k: usize) -> f64 {
        self.values[k]
    }
    pub fn boundary_values(&self) -> Option<&[f64]> {
        self.boundary_values.as_deref()
    }
    pub fn convexity_certified(&self) -> bool {
        self.convexity_certified
    }
    pub fn spacing(&self) -> f64 {
        self.domain.spacing()
    }

    pub fn same_domain(&self, other: &GridFunction) -> bool {
        Arc::ptr_eq(&self.domain, &other.domain) || *self.domain == *other.domain
    }

    /// Tolerance for discrete midpoint convexity: `10 h^2` times the largest
    /// second difference quotient, plus a rounding floor.
    pub fn convexity_tolerance(&self) -> f64 {
        let h = self.spacing();
        let mut max_d2 = 0.0_f64;
        for k in 0..self.values.len() {
            for &(di, dj) in &CONVEXITY_DIRS {
                if let Some(d2) = self.second_difference(k, di, dj) {
                    max_d2 = max_d2.max(d2.abs() / (h * h * (di * di + dj * dj) as f64));
                }
            }
        }
        let scale = self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        10.0 * h * h * max_d2 * h * h + ROUNDING_FLOOR * f64::EPSILON * scale.max(1.0)
    }

    /// `f(x+v) + f(x-v) - 2 f(x)` along a lattice direction, when both neighbours exist.
    pub fn second_difference(&self, k: usize, di: isize, dj: isize) -> Option<f64> {
        let p = self.domain.neighbor(k, di, dj)?;
        let m = self.domain.neighbor(k, -di, -dj)?;
        Some(self.values[p] + self.values[m] - 2.0 * self.values[k])
    }

    fn check_convexity(&self) -> bool {
        let tol = self.convexity_tolerance();
        (0..self.values.len()).all(|k| {
            CONVEXITY_DIRS
                .iter()
                .all(|&(di, dj)| self.second_difference(k, di, dj).is_none_or(|d| d >= -tol))
        })
    }

    /// Largest difference quotient between lattice neighbours.
    pub fn lipschitz(&self) -> f64 {
        let h = self.spacing();
        let mut lip = 0.0_f64;
        for k in 0..self.values.len() {
            for &(di, dj) in &CONVEXITY_DIRS {
                if let Some(p) = self.domain.neighbor(k, di, dj) {
                    let len = h * ((di * di + dj * dj) as f64).sqrt();
                    lip = lip.max((self.values[p] - self.values[k]).abs() / len);
                }
            }
        }
        lip
    }

    /// Value at an arbitrary point of the domain: bilinear inside full lattice
    /// cells, otherwise a least-squares plane through the available corners.
    pub fn eval(&self, p: &Vec2) -> Result<f64> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain(p.x, p.y));
        }
        let (i, j, fu, fv) = self.domain.locate(p);
        let corners = [(0, 0), (1, 0), (0, 1), (1, 1)];
        let ks: Vec<Option<usize>> =
            corners.iter().map(|&(a, b)| self.domain.node_at(i + a, j + b)).collect();
        if ks.iter().all(Option::is_some) {
            let v: Vec<f64> = ks.iter().map(|k| self.values[k.unwrap()]).collect();
            return Ok(v[0] * (1.0 - fu) * (1.0 - fv)
                + v[1] * fu * (1.0 - fv)
                + v[2] * (1.0 - fu) * fv
                + v[3] * fu * fv);
        }
        Ok(self.eval_near_boundary(p))
    }

    fn eval_near_boundary(&self, p: &Vec2) -> f64 {
        let k = self.domain.nearest_node(p);
        let Some(g) = self.gradient_at_node(k) else {
            return self.values[k];
        };
        self.values[k] + g.dot(&(p - self.domain.node(k)))
    }

    /// Finite-difference gradient at a node (central where possible, one-sided otherwise).
    pub fn gradient_at_node(&self, k: usize) -> Option<Vec2> {
        let h = self.spacing();
        let d = |di: isize, dj: isize| -> Option<f64> {
            let p = self.domain.neighbor(k, di, dj);
            let m = self.domain.neighbor(k, -di, -dj);
            match (p, m) {
                (Some(p), Some(m)) => Some((self.values[p] - self.values[m]) / (2.0 * h)),
                (Some(p), None) => Some((self.values[p] - self.values[k]) / h),
                (None, Some(m)) => Some((self.values[k] - self.values[m]) / h),
                (None, None) => None,
            }
        };
        Some(Vec2::new(d(1, 0)?, d(0, 1)?))
    }

    /// Gradient at an arbitrary point: bilinear blend of node gradients.
    pub fn gradient(&self, p: &Vec2) -> Result<Vec2> {
        if !self.domain.contains(p) {
            return Err(Error::OutsideDomain(p.x, p.y));
        }
        let (i, j, fu, fv) = self.domain.locate(p);
        let corners = [(0, 0, (1.0 - fu) * (1.0 - fv)), (1, 0, fu * (1.0 - fv)), (0, 1, (1.0 - fu) * fv), (1, 1, fu * fv)];
        let mut acc = Vec2::zeros();
        let mut wsum = 0.0;
        for (a, b, w) in corners {
            if let Some(k) = self.domain.node_at(i + a, j + b) {
                if let Some(g) = self.gradient_at_node(k) {
                    acc += g * w;
                    wsum += w;
                }
            }
        }
        if wsum < 0.999 {
            let k = self.domain.nearest_node(p);
            return self.gradient_at_node(k).ok_or(Error::OutsideDomain(p.x, p.y));
        }
        Ok(acc / wsum)
    }

    /// Detects a kink at the node nearest `p`: a slope jump that stands out against the
    /// second differences two lattice steps away.
    pub fn has_kink_near(&self, p: &Vec2) -> bool {
        let k = self.domain.nearest_node(p);
        let h = self.spacing();
        let scale = self.lipschitz().max(1e-12);
        for &(di, dj) in &CONVEXITY_DIRS[..2] {
            let Some(here) = self.second_difference(k, di, dj) else { continue };
            let mut far = 0.0_f64;
            let mut seen = 0;
            for s in [-2isize, 2] {
                if let Some(q) = self.domain.neighbor(k, s * di, s * dj) {
                    if let Some(d) = self.second_difference(q, di, dj) {
                        far = far.max(d.abs());
                        seen += 1;
                    }
                }
            }
            // also consider the immediate neighbours: a kink between nodes splits its jump
            let mut near = here.abs();
            for s in [-1isize, 1] {
                if let Some(q) = self.domain.neighbor(k, s * di, s * dj) {
                    if let Some(d) = self.second_difference(q, di, dj) {
                        near = near.max(d.abs());
                    }
                }
            }
            if seen > 0 && near > 4.0 * far + 1e-3 * scale * h {
                return true;
            }
        }
        false
    }

    /// Discrete conjugate `sup_y x.y - f(y)` over the nodes and boundary samples.
    /// Ties go to the lowest node index.
    pub fn conjugate_at(&self, x: &Vec2) -> SupSample {
        self.shifted_sup(x, |_| 0.0, true)
    }

    /// `sup_y x.y - f(y) - extra(k)` over the interior nodes, and over the boundary
    /// samples (where `extra = 0`) when `with_boundary` is set.
    pub(crate) fn shifted_sup(&self, x: &Vec2, extra: impl Fn(usize) -> f64, with_boundary: bool) -> SupSample {
        let nodes = self.domain.nodes();
        let mut best = f64::NEG_INFINITY;
        let mut arg = 0;
        for (k, y) in nodes.iter().enumerate() {
            let v = x.dot(y) - self.values[k] - extra(k);
            if v > best {
                best = v;
                arg = k;
            }
        }
        let mut out = SupSample { value: best, argmax: nodes[arg], node: Some(arg) };
        if let (true, Some(bv)) = (with_boundary, &self.boundary_values) {
            for (b, v) in self.domain.boundary().iter().zip(bv) {
                let val = x.dot(b) - v;
                if val > out.value {
                    out = SupSample { value: val, argmax: *b, node: None };
                }
            }
        }
        out
    }

    /// Like [`shifted_sup`](Self::shifted_sup), then polishes the maximiser with a local
    /// quadratic model on a 3x3 lattice patch. The patch is re-centred on the node
    /// nearest the fitted peak (a few times at most) until the peak falls in its
    /// central cell.
    pub(crate) fn refined_sup(&self, x: &Vec2, extra: impl Fn(usize) -> f64, with_boundary: bool) -> SupSample {
        let coarse = self.shifted_sup(x, &extra, with_boundary);
        let Some(mut k) = coarse.node else { return coarse };
        let h = self.spacing();
        let phi = |q: usize| x.dot(&self.domain.node(q)) - self.values[q] - extra(q);
        let mut visited = Vec::with_capacity(4);
        for _ in 0..4 {
            visited.push(k);
            let mut patch = [[0.0; 3]; 3];
            for (a, row) in patch.iter_mut().enumerate() {
                for (b, cell) in row.iter_mut().enumerate() {
                    match self.domain.neighbor(k, a as isize - 1, b as isize - 1) {
                        Some(q) => *cell = phi(q),
                        None => return coarse,
                    }
                }
            }
            let Some((delta, gain)) = quadratic_peak(&patch, h) else { return coarse };
            let (si, sj) = ((delta.x / h).round() as isize, (delta.y / h).round() as isize);
            let next = self.domain.neighbor(k, si.clamp(-1, 1), sj.clamp(-1, 1));
            // a peak on a cell edge can bounce between two centres; either fit will do
            let cycling = next.is_some_and(|q| visited.contains(&q)) && delta.amax() <= h;
            if (si == 0 && sj == 0) || cycling {
                let value = patch[1][1] + gain;
                if value < coarse.value {
                    return coarse;
                }
                return SupSample { value, argmax: self.domain.node(k) + delta, node: Some(k) };
            }
            match next {
                Some(q) => k = q,
                None => return coarse,
            }
        }
        coarse
    }
}

/// Peak of the quadratic fitted to a 3x3 patch of samples. Returns the offset from the
/// centre and the gain over the centre value, or `None` when the model is not concave.
pub(crate) fn quadratic_peak(p: &[[f64; 3]; 3], h: f64) -> Option<(Vec2, f64)> {
    let c = p[1][1];
    let gx = (p[2][1] - p[0][1]) / (2.0 * h);
    let gy = (p[1][2] - p[1][0]) / (2.0 * h);
    let hxx = (p[2][1] - 2.0 * c + p[0][1]) / (h * h);
    let hyy = (p[1][2] - 2.0 * c + p[1][0]) / (h * h);
    let hxy = (p[2][2] - p[2][0] - p[0][2] + p[0][0]) / (4.0 * h * h);
    let det = hxx * hyy - hxy * hxy;
    if !(hxx < 0.0 && det > 0.0) {
        return None;
    }
    let dx = -(hyy * gx - hxy * gy) / det;
    let dy = -(-hxy * gx + hxx * gy) / det;
    let gain = 0.5 * (gx * dx + gy * dy);
    Some((Vec2::new(dx, dy), gain))
}
