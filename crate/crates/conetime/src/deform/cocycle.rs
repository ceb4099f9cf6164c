//! Translation parts `tau` of affine deformations, with `tau(ab) = tau(a) + a tau(b)`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::cone::Vec3;
use crate::error::{Error, Result};

use super::group::{GroupRep, Letter, Mat3, RELATOR_TOLERANCE};

/// An affine map `X -> linear X + translation`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Mat3,
    pub translation: Vec3,
}

impl AffineMap {
    pub fn identity() -> Self {
        AffineMap { linear: Mat3::identity(), translation: Vec3::zeros() }
    }
    pub fn apply(&self, x: &Vec3) -> Vec3 {
        self.linear * x + self.translation
    }
    /// `self o other`.
    pub fn compose(&self, other: &AffineMap) -> AffineMap {
        AffineMap { linear: self.linear * other.linear, translation: self.translation + self.linear * other.translation }
    }
}

/// A cocycle given by its values on the generators.
#[derive(Clone, Debug, PartialEq)]
pub struct Cocycle {
    rep: Arc<GroupRep>,
    tau: Vec<Vec3>,
    inverse_tau: Vec<Vec3>,
}

impl Cocycle {
    /// Validates relator consistency: each relator must extend to `0` within `1e-6`
    /// (relative to the size of `tau`).
    pub fn new(rep: Arc<GroupRep>, tau: Vec<Vec3>) -> Result<Self> {
        if tau.len() != rep.len() {
            return Err(Error::InvalidInput(format!("need {} translation vectors, got {}", rep.len(), tau.len())));
        }
        if !tau.iter().all(|t| t.iter().all(|v| v.is_finite())) {
            return Err(Error::InvalidInput("non-finite translation".into()));
        }
        let inverse_tau = tau
            .iter()
            .enumerate()
            .map(|(g, t)| -(rep.letter_matrix(Letter::new(g, true)) * t))
            .collect();
        let c = Cocycle { rep, tau, inverse_tau };
        let defect = c.relator_defect();
        if defect > RELATOR_TOLERANCE * (1.0 + c.scale()) {
            return Err(Error::InvalidInput(format!("cocycle is off on a relator by {defect:.3e}")));
        }
        Ok(c)
    }

    pub fn zero(rep: Arc<GroupRep>) -> Self {
        let n = rep.len();
        Self::new(rep, vec![Vec3::zeros(); n]).expect("zero is a cocycle")
    }

    /// `tau(g) = (I - g) V`.
    pub fn coboundary(rep: Arc<GroupRep>, v: &Vec3) -> Self {
        let tau = rep.generators().iter().map(|g| v - g * v).collect();
        Self::new(rep, tau).expect("coboundaries satisfy every relator")
    }

    /// Reads `{label: [t1, t2, t3]}`.
    pub fn from_map(rep: Arc<GroupRep>, map: &BTreeMap<String, [f64; 3]>) -> Result<Self> {
        let mut tau = vec![Vec3::zeros(); rep.len()];
        for (label, t) in map {
            tau[rep.index_of(label)?] = Vec3::from(*t);
        }
        Self::new(rep, tau)
    }

    pub fn to_map(&self) -> BTreeMap<String, [f64; 3]> {
        self.rep.labels().iter().cloned().zip(self.tau.iter().map(|t| (*t).into())).collect()
    }

    pub fn rep(&self) -> &Arc<GroupRep> {
        &self.rep
    }
    pub fn values(&self) -> &[Vec3] {
        &self.tau
    }

    fn scale(&self) -> f64 {
        self.tau.iter().map(|t| t.norm()).fold(0.0, f64::max)
    }

    pub fn letter(&self, l: Letter) -> AffineMap {
        AffineMap {
            linear: *self.rep.letter_matrix(l),
            translation: if l.inverse { self.inverse_tau[l.generator] } else { self.tau[l.generator] },
        }
    }

    /// The affine map of a word.
    pub fn word_map(&self, w: &[Letter]) -> AffineMap {
        w.iter().fold(AffineMap::identity(), |m, l| m.compose(&self.letter(*l)))
    }

    /// `tau` of a word.
    pub fn extend(&self, w: &[Letter]) -> Vec3 {
        self.word_map(w).translation
    }

    /// Largest `|tau(r)|` over the relators.
    pub fn relator_defect(&self) -> f64 {
        self.rep.relators().iter().map(|r| self.extend(r).norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Cocycle) -> Result<Cocycle> {
        if self.rep != other.rep {
            return Err(Error::InvalidInput("cocycles over different groups".into()));
        }
        Self::new(self.rep.clone(), self.tau.iter().zip(&other.tau).map(|(a, b)| a + b).collect())
    }

    pub fn scale_by(&self, k: f64) -> Result<Cocycle> {
        Self::new(self.rep.clone(), self.tau.iter().map(|a| a * k).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep() -> Arc<GroupRep> {
        let (c, s) = (0.4f64.cosh(), 0.4f64.sinh());
        let boost = Mat3::new(c, 0.0, s, 0.0, 1.0, 0.0, s, 0.0, c);
        let rot = nalgebra::Rotation3::from_axis_angle(&Vec3::z_axis(), 0.3).into_inner();
        Arc::new(GroupRep::new(vec!["a".into(), "b".into()], vec![boost, rot], &[]).unwrap())
    }

    #[test]
    fn empty_and_cancelling_words() {
        let r = rep();
        let c = Cocycle::new(r.clone(), vec![Vec3::new(1.0, 2.0, 3.0), Vec3::new(0.0, -1.0, 0.5)]).unwrap();
        assert_eq!(c.extend(&[]), Vec3::zeros());
        let w = r.parse_word("aA").unwrap();
        assert!(c.extend(&w).norm() < 1e-14);
    }

    #[test]
    fn coboundary_values() {
        let r = rep();
        let v = Vec3::new(0.0, 0.0, 1.0);
        let c = Cocycle::coboundary(r.clone(), &v);
        let w = r.parse_word("abAbb").unwrap();
        let g = r.word_matrix(&w);
        assert!((c.extend(&w) - (v - g * v)).norm() < 1e-12);
        assert!(Cocycle::coboundary(r, &Vec3::zeros()).values().iter().all(|t| t.norm() == 0.0));
    }

    #[test]
    fn relator_inconsistency_is_rejected() {
        let id = Mat3::identity();
        let r = Arc::new(GroupRep::new(vec!["a".into()], vec![id], &["a"]).unwrap());
        assert!(Cocycle::new(r.clone(), vec![Vec3::new(1.0, 0.0, 0.0)]).is_err());
        assert!(Cocycle::new(r, vec![Vec3::zeros()]).is_ok());
    }
}
