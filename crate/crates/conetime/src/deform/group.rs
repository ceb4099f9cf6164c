//! Finitely generated linear groups acting on `R^3`, and words in their generators.

use std::collections::BTreeMap;

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::cone::{ConeSpec, Vec3};
use crate::error::{Error, Result};

pub type Mat3 = Matrix3<f64>;

/// Tolerance on `det = 1` for generators.
pub const DET_TOLERANCE: f64 = 1e-9;
/// Tolerance on relators evaluating to the identity.
pub const RELATOR_TOLERANCE: f64 = 1e-6;

/// A generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Self {
        Letter { generator, inverse }
    }
    pub fn inv(self) -> Self {
        Letter { generator: self.generator, inverse: !self.inverse }
    }
}

pub type Word = Vec<Letter>;

/// Inverse word.
pub fn invert_word(w: &[Letter]) -> Word {
    w.iter().rev().map(|l| l.inv()).collect()
}

/// Free reduction: cancels adjacent `x x^-1` pairs.
pub fn reduce_word(w: &[Letter]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// Labelled generators in `SL(3, R)` with optional relators.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupRep {
    labels: Vec<String>,
    generators: Vec<Mat3>,
    inverses: Vec<Mat3>,
    relators: Vec<Word>,
}

/// JSON layout: `{dim, generators: {label: row-major matrix}, relators: [words]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupFile {
    pub dim: usize,
    pub generators: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub relators: Vec<String>,
}

impl GroupRep {
    /// Validates determinants and relators (`relators` are parsed with [`parse_word`](Self::parse_word)).
    pub fn new(labels: Vec<String>, generators: Vec<Mat3>, relators: &[&str]) -> Result<Self> {
        if labels.len() != generators.len() || labels.is_empty() {
            return Err(Error::InvalidInput("need one label per generator".into()));
        }
        for (i, l) in labels.iter().enumerate() {
            if l.is_empty() || l.chars().any(char::is_whitespace) || l.ends_with("^-1") {
                return Err(Error::InvalidInput(format!("bad generator label {l:?}")));
            }
            if labels[..i].contains(l) {
                return Err(Error::InvalidInput(format!("duplicate label {l}")));
            }
        }
        let mut inverses = Vec::with_capacity(generators.len());
        for (l, g) in labels.iter().zip(&generators) {
            if !g.iter().all(|v| v.is_finite()) || (g.determinant() - 1.0).abs() > DET_TOLERANCE {
                return Err(Error::InvalidInput(format!("generator {l} has det {} != 1", g.determinant())));
            }
            inverses.push(g.try_inverse().ok_or_else(|| Error::Singular(format!("generator {l}")))?);
        }
        let mut rep = GroupRep { labels, generators, inverses, relators: Vec::new() };
        let parsed = relators.iter().map(|r| rep.parse_word(r)).collect::<Result<Vec<_>>>()?;
        rep.relators = parsed;
        for (r, w) in relators.iter().zip(&rep.relators) {
            let defect = (rep.word_matrix(w) - Mat3::identity()).abs().max();
            if defect > RELATOR_TOLERANCE {
                return Err(Error::InvalidInput(format!("relator {r} is off the identity by {defect:.3e}")));
            }
        }
        Ok(rep)
    }

    pub fn from_file(f: &GroupFile) -> Result<Self> {
        if f.dim != 3 {
            return Err(Error::InvalidInput(format!("only dim = 3 is supported, got {}", f.dim)));
        }
        let mut labels = Vec::new();
        let mut gens = Vec::new();
        for (l, m) in &f.generators {
            if m.len() != 9 {
                return Err(Error::InvalidInput(format!("generator {l} needs 9 entries")));
            }
            labels.push(l.clone());
            gens.push(Mat3::from_row_slice(m));
        }
        let rel: Vec<&str> = f.relators.iter().map(String::as_str).collect();
        Self::new(labels, gens, &rel)
    }

    pub fn to_file(&self) -> GroupFile {
        let generators = self
            .labels
            .iter()
            .zip(&self.generators)
            .map(|(l, g)| (l.clone(), g.transpose().iter().copied().collect()))
            .collect();
        let relators = self.relators.iter().map(|w| self.format_word(w)).collect();
        GroupFile { dim: 3, generators, relators }
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }
    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
    pub fn labels(&self) -> &[String] {
        &self.labels
    }
    pub fn generators(&self) -> &[Mat3] {
        &self.generators
    }
    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownGenerator(label.to_string()))
    }

    /// All generators followed by all inverses.
    pub fn alphabet(&self) -> Vec<Letter> {
        (0..self.len())
            .map(|g| Letter::new(g, false))
            .chain((0..self.len()).map(|g| Letter::new(g, true)))
            .collect()
    }

    pub fn letter_matrix(&self, l: Letter) -> &Mat3 {
        if l.inverse {
            &self.inverses[l.generator]
        } else {
            &self.generators[l.generator]
        }
    }

    pub fn word_matrix(&self, w: &[Letter]) -> Mat3 {
        w.iter().fold(Mat3::identity(), |m, l| m * self.letter_matrix(*l))
    }

    /// Parses `"a b c^-1"`. Without spaces, and when every label is a single
    /// character, each character is a letter; an upper-case letter whose lower case is
    /// a label (and is not itself a label) denotes the inverse.
    pub fn parse_word(&self, s: &str) -> Result<Word> {
        let single = self.labels.iter().all(|l| l.chars().count() == 1);
        let tokens: Vec<String> = if s.contains(char::is_whitespace) || !single {
            s.split_whitespace().map(str::to_string).collect()
        } else {
            let mut out: Vec<String> = Vec::new();
            let mut rest = s;
            while let Some(c) = rest.chars().next() {
                rest = &rest[c.len_utf8()..];
                if let Some(r) = rest.strip_prefix("^-1") {
                    out.push(format!("{c}^-1"));
                    rest = r;
                } else {
                    out.push(c.to_string());
                }
            }
            out
        };
        tokens.iter().map(|t| self.parse_letter(t)).collect()
    }

    fn parse_letter(&self, t: &str) -> Result<Letter> {
        if let Some(base) = t.strip_suffix("^-1") {
            return Ok(Letter::new(self.index_of(base)?, true));
        }
        if let Ok(g) = self.index_of(t) {
            return Ok(Letter::new(g, false));
        }
        let lower = t.to_lowercase();
        if lower != t {
            if let Ok(g) = self.index_of(&lower) {
                return Ok(Letter::new(g, true));
            }
        }
        Err(Error::UnknownGenerator(t.to_string()))
    }

    pub fn format_word(&self, w: &[Letter]) -> String {
        w.iter()
            .map(|l| if l.inverse { format!("{}^-1", self.labels[l.generator]) } else { self.labels[l.generator].clone() })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Checks that every generator and inverse maps sampled rays of the closed cone
    /// into the cone, within `tol` in the section gauge.
    pub fn preserves_cone(&self, cone: &ConeSpec, samples: usize, tol: f64) -> bool {
        let rays: Vec<Vec3> = cone
            .section()
            .shape()
            .boundary_samples(samples)
            .into_iter()
            .map(|x| Vec3::new(x.x, x.y, 1.0))
            .chain(std::iter::once(Vec3::new(0.0, 0.0, 1.0)))
            .collect();
        self.alphabet().into_iter().all(|l| {
            let m = self.letter_matrix(l);
            rays.iter().all(|r| cone.contains_closed(&(m * r), tol))
        })
    }

    /// Same labels and relators, new generator matrices.
    pub fn with_generators(&self, generators: Vec<Mat3>) -> Result<Self> {
        let rel: Vec<String> = self.relators.iter().map(|w| self.format_word(w)).collect();
        let rel: Vec<&str> = rel.iter().map(String::as_str).collect();
        Self::new(self.labels.clone(), generators, &rel)
    }
}
