//! Invariant domains of `Gamma_tau`: the affine action on support functions and the
//! two maximal domains bounded by the boundary function.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cone::{cauchy_development_halfspaces, dual_lift, HalfSpaceDomain, Vec3};
use crate::convex::{concave_envelope_from_boundary, envelope_from_boundary, BoundaryData};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Vec2};
use crate::sphere::GaugeFunction;

use super::cocycle::AffineMap;
use super::group::Mat3;

/// `g^T (y, -1) = mu (y'', -1)`; `None` when `mu <= 0` (the map does not preserve the
/// cone).
pub fn dual_chart_action(linear: &Mat3, y: &Vec2) -> Option<(f64, Vec2)> {
    let z = linear.transpose() * dual_lift(y);
    let mu = -z.z;
    (mu > 0.0).then(|| (mu, Vec2::new(z.x, z.y) / mu))
}

/// Support function of `g K + tau` from that of `K`:
/// `y -> mu s(y'') + tau . (y, -1)`, with `s(y'')` interpolated.
pub fn act_on_support(s: &GridFunction, map: &AffineMap) -> Result<GridFunction> {
    let d = s.domain();
    let values = d
        .nodes()
        .par_iter()
        .map(|y| {
            let (mu, y2) = dual_chart_action(&map.linear, y).ok_or_else(|| {
                Error::Causality(format!("map sends the dual direction ({}, {}) out of the cone", y.x, y.y))
            })?;
            Ok(mu * s.eval(&y2)? + map.translation.dot(&dual_lift(y)))
        })
        .collect::<Result<Vec<f64>>>()?;
    GridFunction::new(d.clone(), values, None)
}

/// `max |s - map . s|` over nodes whose preimage `y''` stays at least `margin` inside
/// the dual domain, together with the number of nodes used.
pub fn equivariance_residual(s: &GridFunction, map: &AffineMap, margin: f64) -> Result<(f64, usize)> {
    let d = s.domain();
    let r = d
        .nodes()
        .par_iter()
        .zip(s.values().par_iter())
        .map(|(y, v)| {
            let Some((mu, y2)) = dual_chart_action(&map.linear, y) else {
                return Err(Error::Causality("map does not preserve the cone".into()));
            };
            if d.boundary_distance(&y2) < margin || !d.contains(&y2) {
                return Ok(None);
            }
            Ok(Some((v - mu * s.eval(&y2)? - map.translation.dot(&dual_lift(y))).abs()))
        })
        .collect::<Result<Vec<Option<f64>>>>()?;
    let used: Vec<f64> = r.into_iter().flatten().collect();
    Ok((used.iter().copied().fold(0.0, f64::max), used.len()))
}

/// `max |mu - w(y) / w(y'')| / mu` over the masked nodes; zero for automorphisms of
/// the cone when `w` is their invariant gauge.
pub fn homogeneity_defect(omega: &GaugeFunction, linear: &Mat3, margin: f64) -> f64 {
    let d = omega.domain();
    d.nodes()
        .iter()
        .zip(omega.omega().values())
        .filter_map(|(y, w)| {
            let (mu, y2) = dual_chart_action(linear, y)?;
            if d.boundary_distance(&y2) < margin || !d.contains(&y2) {
                return None;
            }
            Some((mu - w / omega.value(&y2)).abs() / mu)
        })
        .fold(0.0, f64::max)
}

/// The two maximal invariant domains with the given boundary function: the future one
/// (support `s_minus`, convex) and the past one (`s_plus`, concave), plus the null
/// half-spaces cutting out the future one.
#[derive(Clone, Debug)]
pub struct MaximalDomain {
    pub s_minus: GridFunction,
    pub s_plus: GridFunction,
    pub halfspaces: HalfSpaceDomain,
}

impl MaximalDomain {
    /// `max(s_plus - s_minus)` over the nodes; zero exactly for affine traces.
    pub fn max_gap(&self) -> f64 {
        self.s_plus.values().iter().zip(self.s_minus.values()).map(|(p, m)| p - m).fold(f64::NEG_INFINITY, f64::max)
    }
    /// `min(s_plus - s_minus)`; nonnegative when the domains are disjoint.
    pub fn min_gap(&self) -> f64 {
        self.s_plus.values().iter().zip(self.s_minus.values()).map(|(p, m)| p - m).fold(f64::INFINITY, f64::min)
    }
}

pub fn maximal_domain(dual: Arc<GridDomain>, g: &BoundaryData) -> Result<MaximalDomain> {
    Ok(MaximalDomain {
        s_minus: envelope_from_boundary(dual.clone(), g)?,
        s_plus: concave_envelope_from_boundary(dual, g)?,
        halfspaces: cauchy_development_halfspaces(g),
    })
}

/// `max |s1 - s2| / |w|` over nodes at least `margin` inside: the constant `M` in
/// `|s1 - s2| <= M |w|`.
pub fn gauge_ratio(s1: &GridFunction, s2: &GridFunction, omega: &GaugeFunction, margin: f64) -> Result<f64> {
    if !s1.same_domain(s2) || !s1.same_domain(omega.omega()) {
        return Err(Error::DomainMismatch);
    }
    let d = s1.domain();
    Ok((0..d.len())
        .filter(|&k| d.boundary_distance(&d.node(k)) >= margin)
        .map(|k| (s1.value(k) - s2.value(k)).abs() / omega.omega().value(k).abs())
        .fold(0.0, f64::max))
}

/// Points `X` with `X . (y, -1) = s(y)` for the affine trace of `v`, used as a
/// reference in tests and reports.
pub fn affine_trace(v: &Vec3, y: &Vec2) -> f64 {
    v.dot(&dual_lift(y))
}
