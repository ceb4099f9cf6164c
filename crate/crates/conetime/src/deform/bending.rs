//! Deformations of an amalgamated product `Gamma' *_Lambda Gamma''`: bulging the
//! linear part, bending by translations along the common fixed vector, and the
//! projective picture of the resulting affine group.

use std::sync::Arc;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::cone::Vec3;
use crate::convex::BoundaryData;
use crate::error::{Error, Result};

use super::cocycle::Cocycle;
use super::group::{GroupRep, Mat3, Word};

/// Tolerance for `lambda X = X` on the amalgamating subgroup.
pub const FIXED_VECTOR_TOLERANCE: f64 = 1e-6;

/// Partition of the generators across a separating curve.
#[derive(Clone, Debug, PartialEq)]
pub struct Splitting {
    /// Generators of `Gamma'` (left alone).
    pub gens_a: Vec<usize>,
    /// Generators of `Gamma''` (deformed).
    pub gens_b: Vec<usize>,
    /// Words generating the amalgamating subgroup `Lambda`.
    pub lambda: Vec<Word>,
    /// Common fixed vector of `Lambda`.
    pub x: Vec3,
    /// Covector `l` with `H = ker l` a `Lambda`-invariant complement of `X`; the
    /// Euclidean dual of `X` when absent.
    pub complement: Option<Vec3>,
}

impl Splitting {
    pub fn validate(&self, rep: &GroupRep) -> Result<()> {
        let n = rep.len();
        let mut seen = vec![false; n];
        for &g in self.gens_a.iter().chain(&self.gens_b) {
            if g >= n || seen[g] {
                return Err(Error::InvalidInput(format!("generator index {g} repeated or out of range")));
            }
            seen[g] = true;
        }
        for w in &self.lambda {
            let defect = (rep.word_matrix(w) * self.x - self.x).norm();
            if defect > FIXED_VECTOR_TOLERANCE * (1.0 + self.x.norm()) {
                return Err(Error::InvalidInput(format!(
                    "X is not fixed by {} (defect {defect:.3e})",
                    rep.format_word(w)
                )));
            }
        }
        if self.covector().dot(&self.x).abs() < 1e-12 {
            return Err(Error::InvalidInput("complement contains X".into()));
        }
        Ok(())
    }

    fn covector(&self) -> Vec3 {
        self.complement.unwrap_or(self.x)
    }

    /// `A_s`: `e^s` on `H`, `e^{-2s}` on `X`.
    pub fn bulge_matrix(&self, s: f64) -> Mat3 {
        let l = self.covector();
        let proj = self.x * l.transpose() / l.dot(&self.x);
        (Mat3::identity() - proj) * s.exp() + proj * (-2.0 * s).exp()
    }
}

/// `Gamma_s = Gamma' *_Lambda (A_s Gamma'' A_s^-1)`.
pub fn bulge(rep: &GroupRep, split: &Splitting, s: f64) -> Result<GroupRep> {
    split.validate(rep)?;
    let a = split.bulge_matrix(s);
    let a_inv = a.try_inverse().ok_or_else(|| Error::Singular("bulge matrix".into()))?;
    let mut gens = rep.generators().to_vec();
    for &g in &split.gens_b {
        gens[g] = a * gens[g] * a_inv;
    }
    rep.with_generators(gens)
}

/// `tau = 0` on `Gamma'` and `tau(g) = s (X - g X)` on `Gamma''`.
pub fn bend_translation(rep: Arc<GroupRep>, split: &Splitting, s: f64) -> Result<Cocycle> {
    split.validate(&rep)?;
    let mut tau = vec![Vec3::zeros(); rep.len()];
    for &g in &split.gens_b {
        tau[g] = (split.x - rep.generators()[g] * split.x) * s;
    }
    Cocycle::new(rep, tau)
}

/// `[[g, tau], [0, 1]]`.
pub fn projective_embed(linear: &Mat3, translation: &Vec3) -> Matrix4<f64> {
    let mut m = Matrix4::identity();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(linear);
    m.fixed_view_mut::<3, 1>(0, 3).copy_from(translation);
    m
}

/// Unit representative with its first nonzero entry positive.
pub fn normalize_projective(v: &Vector4<f64>) -> Vector4<f64> {
    let u = v / v.norm();
    match u.iter().find(|c| c.abs() > 1e-15) {
        Some(c) if *c < 0.0 => -u,
        _ => u,
    }
}

/// Points `(y : -1 : -g(y))` of the limit set in dual projective space.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitSet {
    pub points: Vec<[f64; 4]>,
}

pub fn limit_set_samples(g: &BoundaryData) -> LimitSet {
    let points = g
        .points
        .iter()
        .zip(&g.values)
        .map(|(y, v)| normalize_projective(&Vector4::new(y.x, y.y, -1.0, -v)).into())
        .collect();
    LimitSet { points }
}

/// Action of an affine map on dual projective space: the inverse transpose of its
/// projective embedding.
pub fn dual_projective_action(linear: &Mat3, translation: &Vec3) -> Result<Matrix4<f64>> {
    projective_embed(linear, translation)
        .try_inverse()
        .map(|m| m.transpose())
        .ok_or_else(|| Error::Singular("affine map is not invertible".into()))
}
