//! The envelope linear program in the plane.
//!
//! For boundary samples `b_i` with values `g_i` and a query point `y`, solve
//!
//! ```text
//! min sum_i lam_i g_i   s.t.  sum_i lam_i = 1,  sum_i lam_i b_i = y,  lam >= 0
//! ```
//!
//! whose dual is `max a(y)` over affine `a` with `a(b_i) <= g_i`. The optimal dual
//! vector is the supporting affine function itself.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::grid::Vec2;

const EPS: f64 = 1e-12;

/// Optimal affine minorant `a0 + a1 y1 + a2 y2` and its value at the query.
#[derive(Clone, Copy, Debug)]
pub struct LpSolution {
    pub value: f64,
    #[cfg_attr(not(test), allow(dead_code))]
    pub affine: [f64; 3],
    pub basis: [usize; 3],
}

pub struct EnvelopeLp {
    cols: Vec<Vector3<f64>>,
    cost: Vec<f64>,
    /// Edge normals `n` of the sample polygon with `n.b = 1` on each edge.
    hull_normals: Vec<Vec2>,
}

impl EnvelopeLp {
    /// `points` must be in convex position, ordered counter-clockwise around the origin.
    pub fn new(points: &[Vec2], values: &[f64]) -> Result<Self> {
        if points.len() < 3 {
            return Err(Error::InsufficientBoundary { got: points.len(), need: 3 });
        }
        let cols = points.iter().map(|b| Vector3::new(1.0, b.x, b.y)).collect();
        let m = points.len();
        let hull_normals = (0..m)
            .filter_map(|i| {
                let p = points[i];
                let q = points[(i + 1) % m];
                let e = q - p;
                let n = Vec2::new(e.y, -e.x);
                let c = n.dot(&p);
                (c > EPS).then(|| n / c)
            })
            .collect();
        Ok(EnvelopeLp { cols, cost: values.to_vec(), hull_normals })
    }

    /// Pulls `y` onto the sample polygon when it lies just outside it.
    fn clamp(&self, y: &Vec2) -> Vec2 {
        let gauge = self.hull_normals.iter().map(|n| n.dot(y)).fold(0.0, f64::max);
        if gauge < 1.0 - 1e-13 {
            *y
        } else {
            y * ((1.0 - 1e-13) / gauge)
        }
    }

    fn basis_matrix(&self, basis: &[usize; 3]) -> Matrix3<f64> {
        Matrix3::from_columns(&[self.cols[basis[0]], self.cols[basis[1]], self.cols[basis[2]]])
    }

    /// A triangle of samples containing `y`, from the fan around sample 0.
    fn fan_basis(&self, y: &Vec2) -> Option<[usize; 3]> {
        let rhs = Vector3::new(1.0, y.x, y.y);
        let m = self.cols.len();
        for k in 1..m - 1 {
            let basis = [0, k, k + 1];
            let Some(inv) = self.basis_matrix(&basis).try_inverse() else { continue };
            let x = inv * rhs;
            if x.iter().all(|&v| v >= -EPS) {
                return Some(basis);
            }
        }
        None
    }

    /// Solves at `y`, warm starting from a previous optimal basis when given.
    pub fn solve(&self, y: &Vec2, warm: Option<[usize; 3]>) -> Result<LpSolution> {
        let y = self.clamp(y);
        let rhs = Vector3::new(1.0, y.x, y.y);
        if let Some(basis) = warm {
            if let Some(sol) = self.dual_simplex(basis, &rhs)? {
                return Ok(sol);
            }
        }
        let basis = self
            .fan_basis(&y)
            .ok_or_else(|| Error::Degenerate(format!("no sample triangle contains ({}, {})", y.x, y.y)))?;
        self.primal_simplex(basis, &rhs)
    }

    fn finish(&self, basis: [usize; 3], inv: &Matrix3<f64>, rhs: &Vector3<f64>) -> LpSolution {
        let cb = Vector3::new(self.cost[basis[0]], self.cost[basis[1]], self.cost[basis[2]]);
        let pi = inv.transpose() * cb;
        LpSolution { value: pi.dot(rhs), affine: [pi[0], pi[1], pi[2]], basis }
    }

    fn primal_simplex(&self, mut basis: [usize; 3], rhs: &Vector3<f64>) -> Result<LpSolution> {
        let n = self.cols.len();
        for iter in 0..50 * n {
            let inv = self
                .basis_matrix(&basis)
                .try_inverse()
                .ok_or_else(|| Error::Singular("envelope basis".into()))?;
            let cb = Vector3::new(self.cost[basis[0]], self.cost[basis[1]], self.cost[basis[2]]);
            let pi = inv.transpose() * cb;
            let scale = 1.0 + cb.amax();
            let bland = iter > 4 * n;
            let mut enter = None;
            let mut best = -EPS * scale;
            for j in 0..n {
                if basis.contains(&j) {
                    continue;
                }
                let r = self.cost[j] - pi.dot(&self.cols[j]);
                if r < best {
                    enter = Some(j);
                    if bland {
                        break;
                    }
                    best = r;
                }
            }
            let Some(j) = enter else { return Ok(self.finish(basis, &inv, rhs)) };
            let x = inv * rhs;
            let d = inv * self.cols[j];
            let mut leave = None;
            let mut theta = f64::INFINITY;
            for i in 0..3 {
                if d[i] > EPS {
                    let t = x[i].max(0.0) / d[i];
                    if t < theta - EPS || (t <= theta + EPS && leave.is_none_or(|l: usize| basis[i] < basis[l])) {
                        theta = t;
                        leave = Some(i);
                    }
                }
            }
            let Some(i) = leave else {
                return Err(Error::Degenerate("unbounded envelope program".into()));
            };
            basis[i] = j;
        }
        Err(Error::NotConverged { iterations: 50 * n, residual: f64::NAN })
    }

    /// Returns `Ok(None)` when the warm basis cannot be repaired (primal infeasible).
    fn dual_simplex(&self, mut basis: [usize; 3], rhs: &Vector3<f64>) -> Result<Option<LpSolution>> {
        let n = self.cols.len();
        for _ in 0..4 * n {
            let Some(inv) = self.basis_matrix(&basis).try_inverse() else { return Ok(None) };
            let x = inv * rhs;
            let (r, xr) = (0..3).map(|i| (i, x[i])).min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            if xr >= -EPS {
                return Ok(Some(self.finish(basis, &inv, rhs)));
            }
            let cb = Vector3::new(self.cost[basis[0]], self.cost[basis[1]], self.cost[basis[2]]);
            let pi = inv.transpose() * cb;
            let row = inv.row(r).transpose();
            let mut enter = None;
            let mut ratio = f64::INFINITY;
            for j in 0..n {
                if basis.contains(&j) {
                    continue;
                }
                let alpha = row.dot(&self.cols[j]);
                if alpha < -EPS {
                    let red = (self.cost[j] - pi.dot(&self.cols[j])).max(0.0);
                    let t = red / -alpha;
                    if t < ratio {
                        ratio = t;
                        enter = Some(j);
                    }
                }
            }
            let Some(j) = enter else { return Ok(None) };
            basis[r] = j;
        }
        Ok(None)
    }
}
