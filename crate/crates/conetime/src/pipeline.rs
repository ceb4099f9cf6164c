//! End-to-end runs behind the command-line subcommands. Each run writes its artifacts
//! and a [`Manifest`] listing them with content hashes.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::cone::{ConeSpec, Vec3};
use crate::convex::legendre_transform;
use crate::cosmology::{Cosmology, DEFAULT_TIME_CAP};
use crate::deform::{
    bend_translation, bulge, estimate_boundary_function, genus_two, limit_set_samples, maximal_domain,
    orbit_points, BoundaryEstimate, Cocycle, GroupRep, MaximalDomain, Orbit, Splitting,
};
use crate::deform::domain::equivariance_residual;
use crate::deform::group::GroupFile;
use crate::deform::orbit::{BoundaryEstimateReport, DEFAULT_ORBIT_CAP};
use crate::error::{Error, Result};
use crate::function::GridFunction;
use crate::grid::{GridDomain, Shape};
use crate::io::{self, Manifest};
use crate::sphere::{solve_affine_sphere, GaugeFunction, SolverOptions, MIN_RESOLUTION};
use crate::verify::{run_suite, SuiteReport};

/// Relative output paths are resolved against this directory when it is set.
pub const OUTPUT_ROOT_ENV: &str = "CONETIME_OUTPUT_ROOT";

/// Longest word length a configuration may ask for.
pub const MAX_WORD_LENGTH: usize = 10;

/// Boundary tolerance used when reading a gauge from disk.
pub const GAUGE_BOUNDARY_TOLERANCE: f64 = 1e-9;

pub fn resolve_output(p: &Path) -> PathBuf {
    match std::env::var_os(OUTPUT_ROOT_ENV) {
        Some(root) if p.is_relative() => PathBuf::from(root).join(p),
        _ => p.to_path_buf(),
    }
}

/// Parses `disk`, `disk:r`, `ellipse:a,b`, `rect:x0,x1,y0,y1` or
/// `polygon:x,y;x,y;...` (counter-clockwise).
pub fn parse_shape(s: &str) -> Result<Shape> {
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let nums = |t: &str| -> Result<Vec<f64>> { parse_list(t) };
    let shape = match kind {
        "disk" if args.is_empty() => Shape::unit_disk(),
        "disk" => match nums(args)?[..] {
            [r] => Shape::Disk { radius: r },
            _ => return Err(Error::InvalidShape(format!("disk takes one radius: {s}"))),
        },
        "ellipse" => match nums(args)?[..] {
            [a, b] => Shape::Ellipse { a, b },
            _ => return Err(Error::InvalidShape(format!("ellipse takes two axes: {s}"))),
        },
        "rect" => match nums(args)?[..] {
            [x0, x1, y0, y1] => Shape::rectangle(x0, x1, y0, y1),
            _ => return Err(Error::InvalidShape(format!("rect takes x0,x1,y0,y1: {s}"))),
        },
        "polygon" => {
            let vertices = args
                .split(';')
                .map(|v| match nums(v)?[..] {
                    [x, y] => Ok([x, y]),
                    _ => Err(Error::InvalidShape(format!("bad polygon vertex '{v}'"))),
                })
                .collect::<Result<Vec<_>>>()?;
            Shape::Polygon { vertices }
        }
        _ => return Err(Error::InvalidShape(format!("unknown shape '{s}'"))),
    };
    shape.validated()
}

/// Comma-separated floats.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|e| Error::InvalidInput(format!("'{t}': {e}"))))
        .collect()
}

pub fn parse_vec3(s: &str) -> Result<Vec3> {
    match parse_list(s)?[..] {
        [a, b, c] => Ok(Vec3::new(a, b, c)),
        _ => Err(Error::InvalidInput(format!("expected three components: '{s}'"))),
    }
}

/// Where the translation parts come from.
#[derive(Clone, Debug, PartialEq)]
pub enum CocycleSource {
    Zero,
    Coboundary(Vec3),
    /// Bending along the built-in genus-two splitting.
    Bending { s: f64 },
    /// JSON `{label: [v1, v2, v3]}`.
    File(PathBuf),
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    /// Section of the cone; the dual grid lives on its polar.
    pub shape: Shape,
    pub resolution: usize,
    pub solver: SolverOptions,
    /// Group JSON; the built-in genus-two fixture when absent.
    pub group: Option<PathBuf>,
    pub cocycle: CocycleSource,
    pub word_length: usize,
    pub orbit_cap: usize,
    /// Orbit base point; defaults to `V` for coboundaries, the origin for the zero
    /// cocycle and `(0, 0, 1)` otherwise.
    pub base_point: Option<Vec3>,
    pub output: PathBuf,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            shape: Shape::unit_disk(),
            resolution: 65,
            solver: SolverOptions::default(),
            group: None,
            cocycle: CocycleSource::Zero,
            word_length: 4,
            orbit_cap: DEFAULT_ORBIT_CAP,
            base_point: None,
            output: PathBuf::from("out"),
            seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.resolution < MIN_RESOLUTION {
            return Err(Error::InvalidInput(format!("resolution: need >= {MIN_RESOLUTION}, got {}", self.resolution)));
        }
        if self.word_length > MAX_WORD_LENGTH {
            return Err(Error::InvalidInput(format!("word_length: at most {MAX_WORD_LENGTH}, got {}", self.word_length)));
        }
        if !(self.solver.tol > 0.0) {
            return Err(Error::InvalidInput(format!("solver.tol: must be positive, got {}", self.solver.tol)));
        }
        if self.solver.max_iter == 0 {
            return Err(Error::InvalidInput("solver.max_iter: must be positive".into()));
        }
        if self.orbit_cap == 0 {
            return Err(Error::InvalidInput("orbit_cap: must be positive".into()));
        }
        self.shape.clone().validated()?;
        Ok(())
    }

    pub fn base_point(&self) -> Vec3 {
        match (&self.base_point, &self.cocycle) {
            (Some(p), _) => *p,
            (None, CocycleSource::Coboundary(v)) => *v,
            (None, CocycleSource::Zero) => Vec3::zeros(),
            _ => Vec3::z(),
        }
    }

    pub fn cone(&self) -> Result<ConeSpec> {
        ConeSpec::new(self.shape.clone(), self.resolution)
    }

    fn record(&self, m: &mut Manifest) {
        m.input("shape", serde_json::to_string(&self.shape).unwrap_or_default())
            .input("resolution", self.resolution)
            .input("seed", self.seed);
    }

    fn record_deform(&self, m: &mut Manifest) {
        self.record(m);
        let group = self.group.as_ref().map_or("genus_two".to_string(), |p| p.display().to_string());
        let cocycle = match &self.cocycle {
            CocycleSource::Zero => "zero".to_string(),
            CocycleSource::Coboundary(v) => format!("coboundary {},{},{}", v.x, v.y, v.z),
            CocycleSource::Bending { s } => format!("bending s={s}"),
            CocycleSource::File(p) => format!("file {}", p.display()),
        };
        let x0 = self.base_point();
        m.input("group", group)
            .input("cocycle", cocycle)
            .input("word_length", self.word_length)
            .input("orbit_cap", self.orbit_cap)
            .input("base_point", format!("{},{},{}", x0.x, x0.y, x0.z));
    }

    /// The group and, for bending, its splitting.
    pub fn group_rep(&self) -> Result<(Arc<GroupRep>, Option<Splitting>)> {
        match &self.group {
            Some(p) => {
                let f: GroupFile = io::read_json(p)?;
                Ok((Arc::new(GroupRep::from_file(&f)?), None))
            }
            None => {
                let g = genus_two();
                Ok((Arc::new(g.rep), Some(g.splitting)))
            }
        }
    }

    pub fn build_cocycle(&self) -> Result<Cocycle> {
        let (rep, split) = self.group_rep()?;
        match &self.cocycle {
            CocycleSource::Zero => Ok(Cocycle::zero(rep)),
            CocycleSource::Coboundary(v) => Ok(Cocycle::coboundary(rep, v)),
            CocycleSource::Bending { s } => {
                let split = split.ok_or_else(|| {
                    Error::InvalidInput("cocycle: bending needs the built-in fixture's splitting".into())
                })?;
                bend_translation(rep, &split, *s)
            }
            CocycleSource::File(p) => Cocycle::from_map(rep, &io::read_json(p)?),
        }
    }
}

/// Files written by a run, and its manifest.
#[derive(Clone, Debug)]
pub struct RunOutput {
    pub manifest: Manifest,
    pub manifest_path: PathBuf,
}

impl RunOutput {
    pub fn outputs(&self) -> Vec<PathBuf> {
        self.manifest.outputs.iter().map(|o| PathBuf::from(&o.path)).collect()
    }
}

fn finish(mut m: Manifest, files: &[PathBuf], manifest_path: PathBuf) -> Result<RunOutput> {
    m.outputs(files)?;
    m.write(&manifest_path)?;
    Ok(RunOutput { manifest: m, manifest_path })
}

/// `omega.csv` -> `omega.manifest.json`.
fn manifest_beside(file: &Path) -> PathBuf {
    file.with_extension("manifest.json")
}

#[derive(Serialize)]
struct LogLine {
    iter: usize,
    residual: f64,
    step: f64,
}

/// Solves for the gauge on the polar of the configured section and writes it to
/// `cfg.output`, with a JSON-lines convergence log beside it.
pub fn sphere_solve(cfg: &PipelineConfig) -> Result<RunOutput> {
    cfg.validate()?;
    let out = resolve_output(&cfg.output);
    let cone = cfg.cone()?;
    let sol = solve_affine_sphere(cone.dual().clone(), &cfg.solver)?;
    let gauge = GaugeFunction::new(sol.omega.clone(), GAUGE_BOUNDARY_TOLERANCE)?;
    let mut files = io::write_grid(&out, gauge.omega())?;
    let log = out.with_extension("log.jsonl");
    let mut f = fs::File::create(&log)?;
    for r in &sol.history {
        serde_json::to_writer(&mut f, &LogLine { iter: r.iter, residual: r.residual, step: r.step })?;
        f.write_all(b"\n")?;
    }
    files.push(log);
    let report = out.with_extension("report.json");
    io::write_json(&report, gauge.report())?;
    files.push(report);
    let mut m = Manifest::new("sphere solve");
    cfg.record(&mut m);
    m.input("max_iter", cfg.solver.max_iter)
        .tolerance("solver_tol", cfg.solver.tol)
        .tolerance("boundary", GAUGE_BOUNDARY_TOLERANCE)
        .timing("solve_seconds", sol.seconds);
    finish(m, &files, manifest_beside(&out))
}

/// Legendre transform of a grid CSV onto the window `[x0,x1] x [y0,y1]`.
pub fn lf_transform(input: &Path, window: [f64; 4], resolution: usize, output: &Path) -> Result<RunOutput> {
    let start = Instant::now();
    let f = io::read_grid(input)?;
    let w = Arc::new(GridDomain::window(window[0], window[1], window[2], window[3], resolution)?);
    let g = legendre_transform(&f, w);
    let out = resolve_output(output);
    let files = io::write_grid(&out, &g)?;
    let mut m = Manifest::new("lf transform");
    m.input("input", input.display())
        .input("window", format!("{},{},{},{}", window[0], window[1], window[2], window[3]))
        .input("resolution", resolution)
        .timing("seconds", start.elapsed().as_secs_f64());
    finish(m, &files, manifest_beside(&out))
}

/// `minkowski` for the exact Minkowski gauge on the support's grid, otherwise a
/// grid CSV path.
pub fn load_gauge(spec: &str, support: &GridFunction) -> Result<GaugeFunction> {
    if spec == "minkowski" {
        return GaugeFunction::minkowski(support.domain().clone());
    }
    GaugeFunction::new(io::read_grid(Path::new(spec))?, GAUGE_BOUNDARY_TOLERANCE)
}

fn load_cosmology(support: &Path, omega: &str, time_cap: f64) -> Result<Cosmology> {
    let s = io::read_grid(support)?;
    let w = load_gauge(omega, &s)?;
    Ok(Cosmology::new(s, w)?.with_time_cap(time_cap))
}

/// Cosmological time, retraction and normal at each point of `points`.
/// Rows: `x1,x2,lambda,T,P1,P2,P3,y1,y2,confidence` with confidence `1` or `0`.
pub fn cosmo_field(support: &Path, omega: &str, points: &Path, time_cap: f64, output: &Path) -> Result<RunOutput> {
    let start = Instant::now();
    let cosmo = load_cosmology(support, omega, time_cap)?;
    let pts = io::read_points(points)?;
    let mut rows = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let c = cosmo.chart(p).map_err(|e| prefix_row(i, e))?;
        let q = c.projection();
        let y = c.normal();
        let conf = if c.low_confidence { 0.0 } else { 1.0 };
        rows.push(vec![p.x, p.y, p.z, c.time, q.x, q.y, q.z, y.x, y.y, conf]);
    }
    let out = resolve_output(output);
    io::write_rows(&out, &["x1", "x2", "lambda", "T", "P1", "P2", "P3", "y1", "y2", "confidence"], rows)?;
    let mut m = Manifest::new("cosmo field");
    m.input("support", support.display())
        .input("omega", omega)
        .input("points", points.display())
        .tolerance("time_cap", time_cap)
        .timing("seconds", start.elapsed().as_secs_f64());
    finish(m, std::slice::from_ref(&out), manifest_beside(&out))
}

fn prefix_row(i: usize, e: Error) -> Error {
    match e {
        Error::Causality(s) => Error::Causality(format!("point {}: {s}", i + 1)),
        Error::NoBracket(s) => Error::NoBracket(format!("point {}: {s}", i + 1)),
        other => other,
    }
}

/// Level sets `{T = t}` as graphs `lambda = (s + t w)*(x)` over the window, one grid
/// CSV per level in `output/`.
pub fn cosmo_foliate(
    support: &Path,
    omega: &str,
    levels: &[f64],
    window: [f64; 4],
    resolution: usize,
    output: &Path,
) -> Result<RunOutput> {
    let start = Instant::now();
    if levels.is_empty() {
        return Err(Error::InvalidInput("levels: need at least one t".into()));
    }
    let cosmo = load_cosmology(support, omega, DEFAULT_TIME_CAP)?;
    let w = Arc::new(GridDomain::window(window[0], window[1], window[2], window[3], resolution)?);
    let dir = resolve_output(output);
    let mut files = Vec::new();
    for t in levels {
        let level = cosmo.level_set(*t, w.clone())?;
        files.extend(io::write_grid(&dir.join(format!("level_t{t}.csv")), &level)?);
    }
    let mut m = Manifest::new("cosmo foliate");
    m.input("support", support.display())
        .input("omega", omega)
        .input("levels", levels.iter().map(f64::to_string).collect::<Vec<_>>().join(","))
        .input("window", format!("{},{},{},{}", window[0], window[1], window[2], window[3]))
        .input("resolution", resolution)
        .timing("seconds", start.elapsed().as_secs_f64());
    finish(m, &files, dir.join("manifest.json"))
}

/// Orbit, boundary estimate and maximal domains of a deformation.
#[derive(Clone, Debug)]
pub struct Deformation {
    pub cone: ConeSpec,
    pub cocycle: Cocycle,
    pub orbit: Orbit,
    pub estimate: BoundaryEstimate,
}

impl Deformation {
    pub fn run(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let cone = cfg.cone()?;
        let cocycle = cfg.build_cocycle()?;
        let orbit = orbit_points(&cocycle, &cfg.base_point(), cfg.word_length, cfg.orbit_cap)?;
        let estimate = estimate_boundary_function(&orbit, cone.dual())?;
        Ok(Deformation { cone, cocycle, orbit, estimate })
    }

    pub fn maximal_domain(&self) -> Result<MaximalDomain> {
        maximal_domain(self.cone.dual().clone(), &self.estimate.g)
    }

    /// Worst equivariance residual of `s` over the generators and their inverses,
    /// on nodes at least `margin` inside.
    pub fn equivariance(&self, s: &GridFunction, margin: f64) -> Result<f64> {
        let mut worst = 0.0_f64;
        for l in self.cocycle.rep().alphabet() {
            worst = worst.max(equivariance_residual(s, &self.cocycle.letter(l), margin)?.0);
        }
        Ok(worst)
    }
}

/// Which artifacts a `deform` run writes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DeformStage {
    /// `orbit.csv`.
    Orbit,
    /// Adds `g.csv` and `gtau.json`.
    Gtau,
    /// Adds `s_minus.csv`, `s_plus.csv`, `halfspaces.json`, `limit_set.csv`, `domain.json`.
    Domain,
}

#[derive(Serialize, Deserialize)]
struct DomainReport {
    min_gap: f64,
    max_gap: f64,
    equivariance_residual: f64,
    equivariance_margin: f64,
}

pub fn deform(cfg: &PipelineConfig, stage: DeformStage) -> Result<RunOutput> {
    let start = Instant::now();
    let run = Deformation::run(cfg)?;
    let dir = resolve_output(&cfg.output);
    let mut files = Vec::new();
    let mut m = Manifest::new(match stage {
        DeformStage::Orbit => "deform orbit",
        DeformStage::Gtau => "deform gtau",
        DeformStage::Domain => "deform domain",
    });
    cfg.record_deform(&mut m);
    write_deform(&run, stage, &dir, &mut files, &mut m)?;
    m.timing("seconds", start.elapsed().as_secs_f64());
    finish(m, &files, dir.join("manifest.json"))
}

fn write_deform(run: &Deformation, stage: DeformStage, dir: &Path, files: &mut Vec<PathBuf>, m: &mut Manifest) -> Result<()> {
    let o = &run.orbit;
    let mut rows = Vec::with_capacity(o.points.len());
    for l in 0..=o.max_length() {
        let lo = if l == 0 { 0 } else { o.level_ends[l - 1] };
        rows.extend(o.points[lo..o.level_ends[l]].iter().map(|p| vec![p.x, p.y, p.z, l as f64]));
    }
    let path = dir.join("orbit.csv");
    io::write_rows(&path, &["X1", "X2", "X3", "length"], rows)?;
    files.push(path);
    if stage == DeformStage::Orbit {
        return Ok(());
    }
    let path = dir.join("g.csv");
    io::write_boundary(&path, &run.estimate.g)?;
    files.push(path);
    let report = BoundaryEstimateReport {
        samples: run.estimate.g.len(),
        orbit_points: o.points.len(),
        word_length: o.max_length(),
        cauchy_gap: run.estimate.cauchy_gap,
    };
    let path = dir.join("gtau.json");
    io::write_json(&path, &report)?;
    files.push(path);
    if stage == DeformStage::Gtau {
        return Ok(());
    }
    let md = run.maximal_domain()?;
    files.extend(io::write_grid(&dir.join("s_minus.csv"), &md.s_minus)?);
    files.extend(io::write_grid(&dir.join("s_plus.csv"), &md.s_plus)?);
    let path = dir.join("halfspaces.json");
    io::write_json(&path, &md.halfspaces.halfspaces)?;
    files.push(path);
    let path = dir.join("limit_set.csv");
    let ls = limit_set_samples(&run.estimate.g);
    io::write_rows(&path, &["z1", "z2", "z3", "z4"], ls.points.iter().map(|p| p.to_vec()))?;
    files.push(path);
    let margin = 2.0 * run.cone.dual().spacing();
    let report = DomainReport {
        min_gap: md.min_gap(),
        max_gap: md.max_gap(),
        equivariance_residual: run.equivariance(&md.s_minus, margin)?,
        equivariance_margin: margin,
    };
    let path = dir.join("domain.json");
    io::write_json(&path, &report)?;
    files.push(path);
    m.tolerance("equivariance_margin", margin);
    Ok(())
}

/// Bending of the built-in fixture by `s`: writes the cocycle, the bulged group and
/// the maximal domains of the bent cocycle.
pub fn bend(cfg: &PipelineConfig, s: f64) -> Result<RunOutput> {
    let start = Instant::now();
    if cfg.group.is_some() {
        return Err(Error::InvalidInput("group: bending uses the built-in fixture".into()));
    }
    let cfg = PipelineConfig { cocycle: CocycleSource::Bending { s }, ..cfg.clone() };
    let run = Deformation::run(&cfg)?;
    let dir = resolve_output(&cfg.output);
    let mut files = Vec::new();
    let mut m = Manifest::new("bend");
    cfg.record_deform(&mut m);
    let path = dir.join("cocycle.json");
    io::write_json(&path, &run.cocycle.to_map())?;
    files.push(path);
    let g = genus_two();
    let path = dir.join("bulged_group.json");
    io::write_json(&path, &bulge(&g.rep, &g.splitting, s)?.to_file())?;
    files.push(path);
    write_deform(&run, DeformStage::Domain, &dir, &mut files, &mut m)?;
    m.timing("seconds", start.elapsed().as_secs_f64());
    finish(m, &files, dir.join("manifest.json"))
}

/// Runs an invariant suite and writes `report.json` to `cfg.output`. A failing suite
/// still writes its report; callers decide how to exit.
pub fn verify(cfg: &PipelineConfig, suite: &str) -> Result<(RunOutput, SuiteReport)> {
    let start = Instant::now();
    let report = run_suite(suite, cfg)?;
    let dir = resolve_output(&cfg.output);
    let path = dir.join("report.json");
    io::write_json(&path, &report)?;
    let mut m = Manifest::new(&format!("verify {suite}"));
    cfg.record(&mut m);
    for c in &report.checks {
        m.tolerance(&c.name, c.bound);
    }
    m.timing("seconds", start.elapsed().as_secs_f64());
    Ok((finish(m, &[path], dir.join("manifest.json"))?, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_parse() {
        assert_eq!(parse_shape("disk").unwrap(), Shape::unit_disk());
        assert_eq!(parse_shape("ellipse:1,0.5").unwrap(), Shape::Ellipse { a: 1.0, b: 0.5 });
        assert!(matches!(parse_shape("rect:-1,1,-1,1").unwrap(), Shape::Polygon { .. }));
        assert!(parse_shape("polygon:1,0;0,1;-1,-1").is_ok());
        assert!(parse_shape("disk:-1").is_err());
        assert!(parse_shape("star").is_err());
    }

    #[test]
    fn config_validation_names_the_field() {
        let cfg = PipelineConfig { resolution: 9, ..Default::default() };
        assert!(cfg.validate().unwrap_err().to_string().contains("resolution"));
        let cfg = PipelineConfig { word_length: 99, ..Default::default() };
        assert!(cfg.validate().unwrap_err().to_string().contains("word_length"));
        let v = Vec3::new(0.1, 0.0, 1.0);
        let cfg = PipelineConfig { cocycle: CocycleSource::Coboundary(v), ..Default::default() };
        assert_eq!(cfg.base_point(), v);
        assert_eq!(PipelineConfig::default().base_point(), Vec3::zeros());
    }
}
