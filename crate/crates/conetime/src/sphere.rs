//! Hyperbolic affine spheres: the convex solution of
//! `det D^2 w = (-w)^{-4}` on a planar convex domain with `w = 0` on the boundary.
//!
//! The solver works with `u = w^2`, which stays bounded in the first derivatives up
//! to the boundary (it is an exact quadratic on disks and ellipses). In terms of `u`
//! the equation reads
//!
//! ```text
//! grad(u)^T adj(D^2 u) grad(u) - 2 u det(D^2 u) + 8 = 0,
//! ```
//!
//! discretised with three-point stencils along the axes and diagonals, using the
//! exact boundary crossing (where `u = 0`) when a neighbour falls outside. Newton
//! steps are damped until the residual decreases and `w = -sqrt(u)` stays convex
//! wherever it already was.

use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::banded::BandMatrix;
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Shape, Vec2};

/// Smallest lattice size the solver accepts.
pub const MIN_RESOLUTION: usize = 33;

const DIRS: [(isize, isize); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Stop once the scaled residual `max |F| / 8` drops below this.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { tol: 1e-10, max_iter: 60 }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub residual: f64,
    pub step: f64,
}

#[derive(Clone, Debug)]
pub struct SphereSolution {
    pub omega: GridFunction,
    pub history: Vec<IterationRecord>,
    pub residual: f64,
    /// Relative residual of `w` under the monotone nine-point operator, on nodes at
    /// least `2h` from the boundary. Diagnostic only.
    pub monotone_residual: f64,
    pub seconds: f64,
}

/// Three-point stencil along one direction: neighbour index (or `None` for the
/// boundary crossing, where the unknown vanishes) and distance.
#[derive(Clone, Copy, Debug)]
struct Arm {
    plus: Option<usize>,
    hp: f64,
    minus: Option<usize>,
    hm: f64,
}

impl Arm {
    fn second(&self) -> [f64; 3] {
        let (hp, hm) = (self.hp, self.hm);
        [2.0 / (hp * (hp + hm)), 2.0 / (hm * (hp + hm)), -2.0 / (hp * hm)]
    }
    fn first(&self) -> [f64; 3] {
        let (hp, hm) = (self.hp, self.hm);
        [hm / (hp * (hp + hm)), -hp / (hm * (hp + hm)), (hp - hm) / (hp * hm)]
    }
    /// Applies weights `[plus, minus, centre]` to `u`.
    fn apply(&self, w: [f64; 3], u: &[f64], k: usize) -> f64 {
        let up = self.plus.map_or(0.0, |i| u[i]);
        let um = self.minus.map_or(0.0, |i| u[i]);
        w[0] * up + w[1] * um + w[2] * u[k]
    }
}

/// Stencils for every node of a domain.
pub(crate) struct Stencils {
    arms: Vec<[Arm; 4]>,
}

impl Stencils {
    pub(crate) fn new(domain: &GridDomain) -> Self {
        let h = domain.spacing();
        let shape = domain.shape();
        let arms = (0..domain.len())
            .map(|k| {
                let p = domain.node(k);
                DIRS.map(|(di, dj)| {
                    let len = h * ((di * di + dj * dj) as f64).sqrt();
                    let unit = Vec2::new(di as f64, dj as f64).normalize();
                    let side = |s: isize| match domain.neighbor(k, s * di, s * dj) {
                        Some(q) => (Some(q), len),
                        None => (None, shape.exit_distance(&p, &(unit * s as f64)).clamp(1e-6 * len, len)),
                    };
                    let (plus, hp) = side(1);
                    let (minus, hm) = side(-1);
                    Arm { plus, hp, minus, hm }
                })
            })
            .collect();
        Stencils { arms }
    }

    /// Discrete first and second derivatives `(ux, uy, uxx, uyy, uxy)` at node `k`.
    pub(crate) fn derivatives(&self, u: &[f64], k: usize) -> [f64; 5] {
        let a = &self.arms[k];
        let ux = a[0].apply(a[0].first(), u, k);
        let uy = a[1].apply(a[1].first(), u, k);
        let uxx = a[0].apply(a[0].second(), u, k);
        let uyy = a[1].apply(a[1].second(), u, k);
        let udd = a[2].apply(a[2].second(), u, k);
        let uaa = a[3].apply(a[3].second(), u, k);
        [ux, uy, uxx, uyy, 0.5 * (udd - uaa)]
    }

    fn residual(&self, u: &[f64], k: usize) -> f64 {
        let [ux, uy, uxx, uyy, uxy] = self.derivatives(u, k);
        uyy * ux * ux - 2.0 * uxy * ux * uy + uxx * uy * uy - 2.0 * u[k] * (uxx * uyy - uxy * uxy) + 8.0
    }

    /// `w = -sqrt(u)` is strictly convex at `k` iff `grad u grad u^T - 2 u D^2 u` is positive definite.
    fn convex_at(&self, u: &[f64], k: usize) -> bool {
        let [ux, uy, uxx, uyy, uxy] = self.derivatives(u, k);
        let a = ux * ux - 2.0 * u[k] * uxx;
        let c = uy * uy - 2.0 * u[k] * uyy;
        let b = ux * uy - 2.0 * u[k] * uxy;
        a > 0.0 && c > 0.0 && a * c - b * b > 0.0
    }

    fn jacobian(&self, u: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut trip = Vec::with_capacity(u.len() * 9);
        for k in 0..u.len() {
            let a = &self.arms[k];
            let [ux, uy, uxx, uyy, uxy] = self.derivatives(u, k);
            let uk = u[k];
            let mut push = |arm: &Arm, w: [f64; 3], scale: f64| {
                if let Some(i) = arm.plus {
                    trip.push((k, i, scale * w[0]));
                }
                if let Some(i) = arm.minus {
                    trip.push((k, i, scale * w[1]));
                }
                trip.push((k, k, scale * w[2]));
            };
            push(&a[0], a[0].first(), 2.0 * (uyy * ux - uxy * uy));
            push(&a[1], a[1].first(), 2.0 * (uxx * uy - uxy * ux));
            push(&a[0], a[0].second(), uy * uy - 2.0 * uk * uyy);
            push(&a[1], a[1].second(), ux * ux - 2.0 * uk * uxx);
            let fxy = -2.0 * ux * uy + 4.0 * uk * uxy;
            push(&a[2], a[2].second(), 0.5 * fxy);
            push(&a[3], a[3].second(), -0.5 * fxy);
            trip.push((k, k, -2.0 * (uxx * uyy - uxy * uxy)));
        }
        trip
    }

    fn max_residual(&self, u: &[f64]) -> f64 {
        (0..u.len()).map(|k| self.residual(u, k).abs()).fold(0.0, f64::max) / 8.0
    }
}

/// Starting guess: a concave profile vanishing on the boundary and growing like the
/// distance to it. Polygons use a power-mean soft minimum of the edge distances so
/// the guess is strictly concave.
fn initial_profile(shape: &Shape, p: &Vec2) -> f64 {
    match shape {
        Shape::Polygon { vertices } => {
            let m = vertices.len();
            let pmean = 4.0;
            let s: f64 = (0..m)
                .map(|i| {
                    let a = Vec2::from(vertices[i]);
                    let b = Vec2::from(vertices[(i + 1) % m]);
                    let e = b - a;
                    let n = Vec2::new(e.y, -e.x).normalize();
                    let d = n.dot(&(a - p)).max(1e-300);
                    d.powf(-pmean)
                })
                .sum::<f64>()
                / m as f64;
            s.powf(-1.0 / pmean)
        }
        _ => shape.boundary_distance(p),
    }
}

/// Solves for the affine sphere gauge on `domain`.
pub fn solve_affine_sphere(domain: Arc<GridDomain>, opts: &SolverOptions) -> Result<SphereSolution> {
    if domain.resolution() < MIN_RESOLUTION {
        return Err(Error::InvalidInput(format!(
            "solver needs resolution >= {MIN_RESOLUTION}, got {}",
            domain.resolution()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let start = Instant::now();
    let st = Stencils::new(&domain);
    let n = domain.len();
    let profile: Vec<f64> = domain.nodes().iter().map(|p| initial_profile(domain.shape(), p)).collect();
    // calibrate the scale of the initial guess against the residual
    let mut u = Vec::new();
    let mut r = f64::INFINITY;
    for c in [0.25, 0.5, 1.0, 2.0, 4.0, 8.0] {
        let cand: Vec<f64> = profile.iter().map(|v| c * v).collect();
        let rc = st.max_residual(&cand);
        if rc < r {
            r = rc;
            u = cand;
        }
    }
    // nodes where the guess is already convex must stay so; the rest may join later
    let mut convex: Vec<bool> = (0..n).map(|k| st.convex_at(&u, k)).collect();
    let mut history = vec![IterationRecord { iter: 0, residual: r, step: 0.0 }];
    let mut iter = 0;
    while r > opts.tol {
        iter += 1;
        if iter > opts.max_iter {
            return Err(Error::NotConverged { iterations: opts.max_iter, residual: r });
        }
        let mut jac = BandMatrix::from_triplets(n, &st.jacobian(&u));
        let mut du: Vec<f64> = (0..n).map(|k| -st.residual(&u, k)).collect();
        jac.solve(&mut du)?;
        let mut alpha = 1.0;
        loop {
            let cand: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
            let reason = if cand.iter().any(|v| *v <= 0.0) {
                Error::NegativityLost(iter)
            } else {
                let now: Vec<bool> = (0..n).map(|k| st.convex_at(&cand, k)).collect();
                if convex.iter().zip(&now).any(|(was, is)| *was && !is) {
                    Error::ConvexityLost(iter)
                } else {
                    let rc = st.max_residual(&cand);
                    if rc < (1.0 - 1e-4 * alpha) * r {
                        u = cand;
                        r = rc;
                        convex = now;
                        break;
                    }
                    Error::NotConverged { iterations: iter, residual: r }
                }
            };
            alpha *= 0.5;
            if alpha < 1e-8 {
                return Err(reason);
            }
        }
        history.push(IterationRecord { iter, residual: r, step: alpha });
    }
    if convex.iter().any(|c| !c) {
        return Err(Error::ConvexityLost(iter));
    }
    let values: Vec<f64> = u.iter().map(|v| -v.sqrt()).collect();
    let zeros = vec![0.0; domain.boundary().len()];
    let omega = GridFunction::new(domain.clone(), values, Some(zeros))?;
    let monotone_residual = monotone_residual(&omega, &st);
    Ok(SphereSolution { omega, history, residual: r, monotone_residual, seconds: start.elapsed().as_secs_f64() })
}

/// Relative residual of `det D^2 w = (-w)^{-4}` under the monotone nine-point
/// operator `min over {axes, diagonals} of D_aa^+ D_bb^+`, on nodes `>= 2h` inside.
fn monotone_residual(omega: &GridFunction, st: &Stencils) -> f64 {
    let d = omega.domain();
    let h = d.spacing();
    let w = omega.values();
    let mut worst = 0.0_f64;
    for k in 0..d.len() {
        if d.boundary_distance(&d.node(k)) < 2.0 * h {
            continue;
        }
        let a = &st.arms[k];
        let dd: Vec<f64> = (0..4).map(|m| a[m].apply(a[m].second(), w, k).max(0.0)).collect();
        let det = (dd[0] * dd[1]).min(dd[2] * dd[3]);
        let rhs = (-w[k]).powi(-4);
        worst = worst.max((det - rhs).abs() / rhs);
    }
    worst
}

/// Outcome of the three gauge checks.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct GaugeReport {
    /// Every interior value is negative.
    pub negative: bool,
    /// Smallest Hessian eigenvalue over nodes at least [`hessian_band`] inside.
    pub min_hessian_eig: f64,
    /// Smallest directional second difference quotient over nodes inside the band,
    /// where the nine-point Hessian of a convex function with square-root blow-up can
    /// lose definiteness.
    pub min_directional: f64,
    /// Largest boundary value magnitude (GS2 wants it below the tolerance).
    pub boundary_max_abs: f64,
    /// Fitted exponent `a` in `max |grad| ~ dist^{-a}` over bands near the boundary
    /// (GS3 wants clear blow-up).
    pub blowup_exponent: f64,
    pub gs1: bool,
    pub gs2: bool,
    pub gs3: bool,
}

impl GaugeReport {
    pub fn passed(&self) -> bool {
        self.negative && self.gs1 && self.gs2 && self.gs3
    }
}

/// Lower bound on the boundary blow-up exponent accepted by GS3.
pub const MIN_BLOWUP_EXPONENT: f64 = 0.25;

/// Width of the boundary band excluded from the Hessian eigenvalue check:
/// `max(2, (R/h)^{1/3}) h` with `R` the half-width of the domain. The truncation error of
/// the mixed difference against the small tangential curvature of a square-root
/// profile decays only like `h^2 / dist^3`.
pub fn hessian_band(d: &GridDomain) -> f64 {
    let [x0, x1, y0, y1] = d.shape().bounding_box();
    let r = 0.5 * (x1 - x0).max(y1 - y0);
    let h = d.spacing();
    (r / h).cbrt().max(2.0) * h
}

/// Runs the gauge checks (GS1 convexity, GS2 zero boundary values, GS3 gradient
/// blow-up). Near-boundary stencils use the boundary value `0`.
pub fn gauge_report(omega: &GridFunction, eps_bd: f64) -> GaugeReport {
    let d = omega.domain();
    let h = d.spacing();
    let st = Stencils::new(d);
    let w = omega.values();
    let negative = w.iter().all(|v| *v < 0.0);
    let band = hessian_band(d);
    let mut min_eig = f64::INFINITY;
    let mut min_dir = f64::INFINITY;
    let bands = 6;
    let mut band_max = vec![0.0_f64; bands];
    for k in 0..d.len() {
        let [wx, wy, wxx, wyy, wxy] = st.derivatives(w, k);
        let arms = &st.arms[k];
        let dist = d.boundary_distance(&d.node(k));
        if dist >= band {
            let tr = wxx + wyy;
            let disc = ((wxx - wyy).powi(2) + 4.0 * wxy * wxy).sqrt();
            min_eig = min_eig.min(0.5 * (tr - disc));
        } else {
            for a in arms {
                min_dir = min_dir.min(a.apply(a.second(), w, k));
            }
        }
        let b = (dist / h).ceil() as usize;
        if (1..=bands).contains(&b) {
            band_max[b - 1] = band_max[b - 1].max(wx.hypot(wy));
        }
    }
    let boundary_max_abs = omega
        .boundary_values()
        .map_or(f64::INFINITY, |b| b.iter().fold(0.0, |m, v| m.max(v.abs())));
    // least-squares slope of log(max grad) against log(band distance)
    let pts: Vec<(f64, f64)> = band_max
        .iter()
        .enumerate()
        .filter(|(_, g)| **g > 0.0)
        .map(|(i, g)| (((i as f64 + 0.5) * h).ln(), g.ln()))
        .collect();
    let blowup_exponent = if pts.len() >= 2 {
        let m = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0, a.1 + p.1));
        let (mx, my) = (sx / m, sy / m);
        let (num, den) = pts
            .iter()
            .fold((0.0, 0.0), |a, p| (a.0 + (p.0 - mx) * (p.1 - my), a.1 + (p.0 - mx).powi(2)));
        -num / den
    } else {
        0.0
    };
    GaugeReport {
        negative,
        min_hessian_eig: min_eig,
        min_directional: min_dir,
        boundary_max_abs,
        blowup_exponent,
        gs1: min_eig > 0.0 && min_dir > 0.0,
        gs2: boundary_max_abs <= eps_bd,
        gs3: blowup_exponent >= MIN_BLOWUP_EXPONENT,
    }
}

/// A grid function that passed the gauge checks, with its report.
#[derive(Clone, Debug)]
pub struct GaugeFunction {
    omega: GridFunction,
    report: GaugeReport,
}

impl GaugeFunction {
    /// Validates `omega` against GS1–GS3; `eps_bd` bounds the boundary values.
    pub fn new(omega: GridFunction, eps_bd: f64) -> Result<Self> {
        let report = gauge_report(&omega, eps_bd);
        if !report.passed() {
            return Err(Error::GaugeRejected(format!(
                "negative={} GS1 min eig {:.3e} / {:.3e} GS2 max |boundary| {:.3e} GS3 exponent {:.3}",
                report.negative, report.min_hessian_eig, report.min_directional, report.boundary_max_abs, report.blowup_exponent
            )));
        }
        Ok(GaugeFunction { omega, report })
    }

    /// The Minkowski gauge `-sqrt(1 - |y|^2)` sampled on a unit-disk domain.
    pub fn minkowski(domain: Arc<GridDomain>) -> Result<Self> {
        if *domain.shape() != Shape::unit_disk() {
            return Err(Error::InvalidShape("Minkowski gauge needs the unit disk".into()));
        }
        let values = domain.nodes().iter().map(|y| -(1.0 - y.norm_squared()).max(0.0).sqrt()).collect();
        let zeros = vec![0.0; domain.boundary().len()];
        let omega = GridFunction::new(domain, values, Some(zeros))?;
        Self::new(omega, 1e-12)
    }

    pub fn omega(&self) -> &GridFunction {
        &self.omega
    }
    pub fn report(&self) -> &GaugeReport {
        &self.report
    }
    pub fn domain(&self) -> &Arc<GridDomain> {
        self.omega.domain()
    }

    /// Value at a point of the closed domain (`0` on and outside the boundary).
    pub fn value(&self, y: &Vec2) -> f64 {
        if !self.domain().contains(y) {
            return 0.0;
        }
        self.omega.eval(y).unwrap_or(0.0)
    }

    /// `w*(x) = sup_y x.y - w(y)` with local refinement of the maximiser.
    pub fn conjugate(&self, x: &Vec2) -> f64 {
        self.omega.refined_sup(x, |_| 0.0, true).value
    }

    /// Radial profile `w(x) = -1/t` of the polar function, where `t = w*(t x)`;
    /// `x` must lie in the polar domain.
    ///
    /// `t -> w*(t x) - t` is convex and decreasing through its root, so Newton steps
    /// from the left are safe; bisection guards them anyway.
    pub fn radial_profile(&self, x: &Vec2) -> Result<f64> {
        let phi = |t: f64| {
            let s = self.omega.refined_sup(&(x * t), |_| 0.0, true);
            (s.value - t, x.dot(&s.argmax) - 1.0)
        };
        let mut hi = 1.0;
        let mut k = 0;
        while phi(hi).0 > 0.0 {
            hi *= 2.0;
            k += 1;
            if k > 50 {
                return Err(Error::NoBracket(format!("x = ({}, {}) too close to the polar boundary", x.x, x.y)));
            }
        }
        let mut lo = 0.0;
        let mut t = 0.0;
        for _ in 0..200 {
            let (v, dv) = phi(t);
            if v > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            if hi - lo <= 1e-14 * hi || v == 0.0 {
                break;
            }
            let newton = t - v / dv;
            if dv < 0.0 && (newton - t).abs() <= 1e-15 * t.max(1.0) {
                t = newton;
                break;
            }
            t = if dv < 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        }
        Ok(-1.0 / t.max(lo))
    }
}
