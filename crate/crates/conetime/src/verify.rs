//! Named invariant suites run by `conetime verify <suite>`. Every check compares a
//! measured value against a bound; a suite passes when all of its checks do.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cone::{support_of_translate, ConeSpec, Vec3};
use crate::convex::{fenchel_gap, fenchel_tolerance};
use crate::cosmology::Cosmology;
use crate::deform::domain::affine_trace;
use crate::deform::{bend_translation, genus_two, Letter, Word};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Shape, Vec2};
use crate::pipeline::{CocycleSource, Deformation, PipelineConfig};
use crate::sphere::{solve_affine_sphere, GaugeFunction};

pub const SUITES: [&str; 6] = ["fenchel", "sphere", "cosmology", "cocycle", "coboundary", "equivariance"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Measured value; the check passes when it is at most `bound`.
    pub value: f64,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: &str, value: f64, bound: f64) -> Self {
        Check { name: name.to_string(), value, bound, passed: value <= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, checks: Vec<Check>) -> Self {
        SuiteReport { suite: suite.to_string(), seed, passed: checks.iter().all(|c| c.passed), checks }
    }
}

/// Runs a suite. The grid resolution, seed, word length and cocycle come from `cfg`
/// where the suite uses them.
pub fn run_suite(name: &str, cfg: &PipelineConfig) -> Result<SuiteReport> {
    cfg.validate()?;
    let checks = match name {
        "fenchel" => fenchel(cfg.resolution, 2000, cfg.seed)?,
        "sphere" => sphere(cfg)?,
        "cosmology" => cosmology(cfg.resolution, 200, cfg.seed)?,
        "cocycle" => cocycle(500, cfg.seed)?,
        "coboundary" => coboundary(cfg)?,
        "equivariance" => equivariance(cfg)?,
        _ => return Err(Error::InvalidInput(format!("unknown suite '{name}'; expected one of {}", SUITES.join(", ")))),
    };
    Ok(SuiteReport::new(name, cfg.seed, checks))
}

/// Convex test functions with their gradients.
pub fn test_functions() -> Vec<(&'static str, fn(&Vec2) -> f64, fn(&Vec2) -> Vec2)> {
    vec![
        ("half_square", |y| 0.5 * y.norm_squared(), |y| *y),
        ("anisotropic", |y| 2.0 * y.x * y.x + 0.25 * y.y * y.y + 0.3 * y.x, |y| Vec2::new(4.0 * y.x + 0.3, 0.5 * y.y)),
        ("hyperbolic", |y| (1.0 + y.norm_squared()).sqrt(), |y| y / (1.0 + y.norm_squared()).sqrt()),
        ("exponential", |y| y.x.exp() + y.y * y.y, |y| Vec2::new(y.x.exp(), 2.0 * y.y)),
        ("norm", |y| y.norm(), |y| if y.norm() > 0.0 { y / y.norm() } else { Vec2::zeros() }),
    ]
}

fn random_in_disk(rng: &mut ChaCha8Rng, r: f64) -> Vec2 {
    loop {
        let p = Vec2::new(rng.gen_range(-r..r), rng.gen_range(-r..r));
        if p.norm() < r {
            return p;
        }
    }
}

/// Fenchel inequality on random pairs and equality at gradient pairs, for each test
/// function on the unit disk.
pub fn fenchel(resolution: usize, pairs: usize, seed: u64) -> Result<Vec<Check>> {
    let d = Arc::new(GridDomain::new(Shape::unit_disk(), resolution)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let radius = 2.0;
    let mut checks = Vec::new();
    for (name, f, grad) in test_functions() {
        let g = GridFunction::from_fn(d.clone(), f)?;
        let eps = fenchel_tolerance(&g, radius);
        let mut worst_gap = f64::INFINITY;
        let mut worst_eq = 0.0_f64;
        for _ in 0..pairs {
            let x = random_in_disk(&mut rng, 0.95);
            let y = random_in_disk(&mut rng, radius);
            worst_gap = worst_gap.min(fenchel_gap(&g, &x, &y)?);
            let x = random_in_disk(&mut rng, 0.9);
            worst_eq = worst_eq.max(fenchel_gap(&g, &x, &grad(&x))?.abs());
        }
        checks.push(Check::at_most(&format!("{name}: negative gap"), -worst_gap, eps));
        checks.push(Check::at_most(&format!("{name}: gap at gradient pairs"), worst_eq, eps));
    }
    Ok(checks)
}

/// Solved gauge against the Minkowski gauge on nodes at least `2h` inside.
fn sphere(cfg: &PipelineConfig) -> Result<Vec<Check>> {
    let d = Arc::new(GridDomain::new(Shape::unit_disk(), cfg.resolution)?);
    let sol = solve_affine_sphere(d.clone(), &cfg.solver)?;
    let h = d.spacing();
    let err = (0..d.len())
        .filter(|&k| d.boundary_distance(&d.node(k)) >= 2.0 * h)
        .map(|k| (sol.omega.value(k) + (1.0 - d.node(k).norm_squared()).sqrt()).abs())
        .fold(0.0, f64::max);
    let gauge = GaugeFunction::new(sol.omega, 1e-9);
    Ok(vec![
        Check::at_most("max error against -sqrt(1-|y|^2)", err, 5e-3),
        Check::at_most("solver residual", sol.residual, cfg.solver.tol),
        Check { name: "gauge checks".into(), value: 0.0, bound: 0.0, passed: gauge.is_ok() },
    ])
}

/// Cosmological time of a translated Minkowski cone against `sqrt(dl^2 - |dx|^2)`.
fn cosmology(resolution: usize, points: usize, seed: u64) -> Result<Vec<Check>> {
    let cone = ConeSpec::minkowski(resolution)?;
    let x0 = Vec3::new(0.2, -0.1, 0.5);
    let s = support_of_translate(cone.dual().clone(), &x0)?;
    let cosmo = Cosmology::new(s, GaugeFunction::minkowski(cone.dual().clone())?)?;
    let h = cone.dual().spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut err, mut rec) = (0.0_f64, 0.0_f64);
    for _ in 0..points {
        let v = random_in_disk(&mut rng, 0.9);
        let t = rng.gen_range(0.2..3.0);
        let dir = Vec3::new(v.x, v.y, 1.0) / (1.0 - v.norm_squared()).sqrt();
        let c = cosmo.chart(&(x0 + t * dir))?;
        err = err.max((c.time - t).abs());
        rec = rec.max(cosmo.reconstruction_residual(&c)? / cosmo.reconstruction_tolerance(c.time));
    }
    Ok(vec![
        Check::at_most("time error", err, 2.5 * h * h),
        Check::at_most("reconstruction residual / tolerance", rec, 1.0),
    ])
}

fn random_word(rng: &mut ChaCha8Rng, alphabet: &[Letter], max_len: usize) -> Word {
    let len = rng.gen_range(1..=max_len);
    let mut w: Word = Vec::with_capacity(len);
    while w.len() < len {
        let l = alphabet[rng.gen_range(0..alphabet.len())];
        if w.last() != Some(&l.inv()) {
            w.push(l);
        }
    }
    w
}

/// Cocycle rule `tau(ab) = tau(a) + a tau(b)` for the bending cocycle of the fixture,
/// and vanishing on the separating curve.
pub fn cocycle(pairs: usize, seed: u64) -> Result<Vec<Check>> {
    let g = genus_two();
    let rep = Arc::new(g.rep.clone());
    let c = bend_translation(rep.clone(), &g.splitting, 0.3)?;
    let alphabet = rep.alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..pairs {
        let a = random_word(&mut rng, &alphabet, 8);
        let b = random_word(&mut rng, &alphabet, 8);
        let ab: Word = a.iter().chain(&b).copied().collect();
        let lhs = c.extend(&ab);
        let rhs = c.extend(&a) + rep.word_matrix(&a) * c.extend(&b);
        worst = worst.max((lhs - rhs).norm() / (1.0 + lhs.norm().max(rhs.norm())));
    }
    let lambda = g.splitting.lambda.iter().map(|w| c.extend(w).norm()).fold(0.0, f64::max);
    Ok(vec![
        Check::at_most("cocycle rule, relative", worst, 1e-9),
        Check::at_most("tau on the separating curve", lambda, 1e-9),
        Check::at_most("relator defect", c.relator_defect(), 1e-9),
    ])
}

/// Coboundary pipelines recover `V + C`: `s_minus` is the affine trace of `V`.
fn coboundary(cfg: &PipelineConfig) -> Result<Vec<Check>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    for i in 0..3 {
        let v = Vec3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(0.5..1.5));
        let run = Deformation::run(&PipelineConfig {
            cocycle: CocycleSource::Coboundary(v),
            base_point: None,
            ..cfg.clone()
        })?;
        let md = run.maximal_domain()?;
        let d = md.s_minus.domain();
        let err = (0..d.len()).map(|k| (md.s_minus.value(k) - affine_trace(&v, &d.node(k))).abs()).fold(0.0, f64::max);
        checks.push(Check::at_most(&format!("V{i}: s_minus against the affine trace"), err, 1e-3));
        checks.push(Check::at_most(&format!("V{i}: s_plus - s_minus"), md.max_gap(), 1e-6));
    }
    Ok(checks)
}

/// Invariance of `s_minus` under the generators for the configured cocycle (bending
/// by 0.2 when the configuration asks for none).
fn equivariance(cfg: &PipelineConfig) -> Result<Vec<Check>> {
    let cocycle = match cfg.cocycle {
        CocycleSource::Zero => CocycleSource::Bending { s: 0.2 },
        ref c => c.clone(),
    };
    let run = Deformation::run(&PipelineConfig { cocycle, ..cfg.clone() })?;
    let md = run.maximal_domain()?;
    let h = run.cone.dual().spacing();
    Ok(vec![
        Check::at_most("equivariance residual", run.equivariance(&md.s_minus, 2.0 * h)?, 5e-2),
        Check::at_most("s_minus - s_plus", -md.min_gap(), 1e-9),
    ])
}

