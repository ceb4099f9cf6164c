//! Orbits of a point under the affine group `Gamma_tau`, and the boundary traces of
//! their support functions.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone::{dual_lift, Vec3};
use crate::convex::BoundaryData;
use crate::error::{Error, Result};
use crate::grid::GridDomain;

use super::cocycle::Cocycle;
use super::group::Letter;

/// Default cap on the number of enumerated group elements.
pub const DEFAULT_ORBIT_CAP: usize = 50_000;

/// Relative tolerance under which two orbit points count as one.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

/// Distinct orbit points in breadth-first word order.
#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub points: Vec<Vec3>,
    /// `level_ends[l]` = number of points coming from words of length `<= l`.
    pub level_ends: Vec<usize>,
    /// Number of reduced words enumerated.
    pub words: usize,
}

impl Orbit {
    pub fn max_length(&self) -> usize {
        self.level_ends.len() - 1
    }
    /// Points from words of length at most `l`.
    pub fn up_to(&self, l: usize) -> &[Vec3] {
        &self.points[..self.level_ends[l.min(self.max_length())]]
    }
}

/// Buckets points by `log2` magnitude and quantised coordinates, so lookups stay
/// relative to the size of the point.
struct Dedup {
    cells: HashMap<(i32, [i64; 3]), Vec<usize>>,
}

impl Dedup {
    fn bucket(p: &Vec3) -> i32 {
        (1.0 + p.norm()).log2().floor() as i32
    }

    fn key(p: &Vec3, bucket: i32) -> [i64; 3] {
        let cell = DEDUP_TOLERANCE * 2f64.powi(bucket + 2);
        [(p.x / cell).floor() as i64, (p.y / cell).floor() as i64, (p.z / cell).floor() as i64]
    }

    fn find(&self, p: &Vec3, points: &[Vec3]) -> bool {
        let b0 = Self::bucket(p);
        let tol = DEDUP_TOLERANCE * (1.0 + p.norm());
        for b in b0 - 1..=b0 + 1 {
            let k = Self::key(p, b);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(ids) = self.cells.get(&(b, [k[0] + dx, k[1] + dy, k[2] + dz])) {
                            if ids.iter().any(|&i| (points[i] - p).norm() <= tol) {
                                return true;
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, p: &Vec3, id: usize) {
        let b = Self::bucket(p);
        self.cells.entry((b, Self::key(p, b))).or_default().push(id);
    }
}

/// `{g_w X0 + tau_w : w reduced, |w| <= max_len}`, deduplicated. Fails with
/// [`Error::OrbitCap`] once more than `cap` words would be enumerated.
pub fn orbit_points(c: &Cocycle, x0: &Vec3, max_len: usize, cap: usize) -> Result<Orbit> {
    let alphabet = c.rep().alphabet();
    let maps: Vec<_> = alphabet.iter().map(|l| c.letter(*l)).collect();
    let mut points = vec![*x0];
    let mut dedup = Dedup { cells: HashMap::new() };
    dedup.insert(x0, 0);
    let mut level_ends = vec![1];
    // frontier entries: first letter of the word (none for the empty word) and its point
    let mut frontier: Vec<(Option<Letter>, Vec3)> = vec![(None, *x0)];
    let mut words = 1usize;
    for _ in 0..max_len {
        let grow = frontier.len() * alphabet.len();
        if words + grow > cap {
            return Err(Error::OrbitCap(cap));
        }
        // prepending a letter: point(l w) = l . point(w)
        let next: Vec<(Option<Letter>, Vec3)> = frontier
            .par_iter()
            .flat_map_iter(|(first, p)| {
                alphabet
                    .iter()
                    .zip(&maps)
                    .filter(move |(l, _)| Some(l.inv()) != *first)
                    .map(move |(l, m)| (Some(*l), m.apply(p)))
            })
            .collect();
        words += next.len();
        for (_, p) in &next {
            if !dedup.find(p, &points) {
                dedup.insert(p, points.len());
                points.push(*p);
            }
        }
        level_ends.push(points.len());
        frontier = next;
    }
    Ok(Orbit { points, level_ends, words })
}

/// Boundary trace of the support function of `conv(points) + C`.
pub fn support_trace(points: &[Vec3], dual: &GridDomain) -> Result<BoundaryData> {
    if points.is_empty() {
        return Err(Error::InvalidInput("empty orbit".into()));
    }
    let values: Vec<f64> = dual
        .boundary()
        .par_iter()
        .map(|b| {
            let c = dual_lift(b);
            points.iter().map(|p| p.dot(&c)).fold(f64::NEG_INFINITY, f64::max)
        })
        .collect();
    BoundaryData::new(dual.boundary().to_vec(), values)
}

/// Estimate of the boundary function from an orbit, with the sup-norm change between
/// word lengths `L - 1` and `L` as a convergence indicator.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryEstimate {
    pub g: BoundaryData,
    pub cauchy_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BoundaryEstimateReport {
    pub samples: usize,
    pub orbit_points: usize,
    pub word_length: usize,
    pub cauchy_gap: Option<f64>,
}

pub fn estimate_boundary_function(orbit: &Orbit, dual: &GridDomain) -> Result<BoundaryEstimate> {
    let g = support_trace(&orbit.points, dual)?;
    let l = orbit.max_length();
    let cauchy_gap = if l == 0 {
        None
    } else {
        let prev = support_trace(orbit.up_to(l - 1), dual)?;
        Some(g.values.iter().zip(&prev.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    };
    Ok(BoundaryEstimate { g, cauchy_gap })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deform::fixture::genus_two;
    use std::sync::Arc;

    #[test]
    fn trivial_orbits() {
        let rep = Arc::new(genus_two().rep);
        let zero = Cocycle::zero(rep.clone());
        let o = orbit_points(&zero, &Vec3::zeros(), 3, DEFAULT_ORBIT_CAP).unwrap();
        assert_eq!(o.points.len(), 1);
        assert_eq!(o.words, 1 + 8 + 56 + 392);
        let x0 = Vec3::new(0.1, 0.2, 1.0);
        assert_eq!(orbit_points(&zero, &x0, 0, DEFAULT_ORBIT_CAP).unwrap().points, vec![x0]);
        let v = Vec3::new(0.3, -0.1, 0.7);
        let cob = Cocycle::coboundary(rep, &v);
        let o = orbit_points(&cob, &v, 4, DEFAULT_ORBIT_CAP).unwrap();
        assert_eq!(o.points.len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let rep = Arc::new(genus_two().rep);
        let zero = Cocycle::zero(rep);
        assert!(matches!(orbit_points(&zero, &Vec3::z(), 4, 1000), Err(Error::OrbitCap(1000))));
    }

    #[test]
    fn relator_duplicates_are_merged() {
        let rep = Arc::new(genus_two().rep);
        let zero = Cocycle::zero(rep);
        let o = orbit_points(&zero, &Vec3::z(), 4, DEFAULT_ORBIT_CAP).unwrap();
        // words of length 4 that are halves of the relator collide
        assert!(o.points.len() < o.words);
        assert_eq!(*o.level_ends.last().unwrap(), o.points.len());
    }
}
