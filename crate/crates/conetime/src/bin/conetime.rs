use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use conetime::cosmology::DEFAULT_TIME_CAP;
use conetime::deform::orbit::DEFAULT_ORBIT_CAP;
use conetime::pipeline::{self, parse_list, parse_shape, parse_vec3, CocycleSource, DeformStage, PipelineConfig, RunOutput};
use conetime::sphere::SolverOptions;
use conetime::{Error, Result};

/// Convex cones, affine spheres, cosmological time and affine deformations on grids.
///
/// Relative output paths are resolved against $CONETIME_OUTPUT_ROOT when it is set.
/// Exit codes: 0 ok, 1 invalid input, 2 numerical failure, 3 verification failure.
#[derive(Parser)]
#[command(name = "conetime", version)]
struct Cli {
    /// Seed for every random sample drawn by the run.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Affine sphere gauge.
    #[command(subcommand)]
    Sphere(SphereCmd),
    /// Legendre transforms of grid functions.
    #[command(subcommand)]
    Lf(LfCmd),
    /// Cosmological time of a convex domain.
    #[command(subcommand)]
    Cosmo(CosmoCmd),
    /// Orbits, boundary functions and maximal domains of affine deformations.
    #[command(subcommand)]
    Deform(DeformCmd),
    /// Bend the built-in genus-two fixture and compute its maximal domains.
    Bend {
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[command(flatten)]
        common: DeformArgs,
    },
    /// Run a named invariant suite: fenchel, sphere, cosmology, cocycle, coboundary, equivariance.
    Verify {
        suite: String,
        #[command(flatten)]
        cocycle: CocycleArgs,
        #[command(flatten)]
        common: DeformArgs,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
}

#[derive(Subcommand)]
enum SphereCmd {
    /// Solve for the gauge on the polar of the cone section.
    Solve {
        /// Cone section: disk, disk:r, ellipse:a,b, rect:x0,x1,y0,y1 or polygon:x,y;x,y;...
        #[arg(long, default_value = "disk")]
        shape: String,
        #[arg(long, default_value_t = 101)]
        n: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, default_value_t = 60)]
        max_iter: usize,
        #[arg(long, default_value = "omega.csv")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum LfCmd {
    /// `f*(x) = max_y x.y - f(y)` on a rectangular window.
    Transform {
        #[arg(long)]
        input: PathBuf,
        /// x0,x1,y0,y1
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 65)]
        n: usize,
        #[arg(long, default_value = "conjugate.csv")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum CosmoCmd {
    /// Time, retraction and normal at each point of a CSV.
    Field {
        #[command(flatten)]
        src: CosmoSource,
        /// Rows x1,x2,lambda.
        #[arg(long)]
        points: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TIME_CAP)]
        time_cap: f64,
        #[arg(long, default_value = "chart.csv")]
        out: PathBuf,
    },
    /// Level sets of the cosmological time as graphs over a window.
    Foliate {
        #[command(flatten)]
        src: CosmoSource,
        /// Comma-separated levels.
        #[arg(long, default_value = "0.5,1,2")]
        t: String,
        /// x0,x1,y0,y1
        #[arg(long, default_value = "-2,2,-2,2", allow_hyphen_values = true)]
        window: String,
        #[arg(long, default_value_t = 65)]
        n: usize,
        #[arg(long, default_value = "mesh")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CosmoSource {
    /// Support function grid CSV.
    #[arg(long)]
    support: PathBuf,
    /// Gauge grid CSV, or `minkowski` for the exact Minkowski gauge.
    #[arg(long, default_value = "minkowski")]
    omega: String,
}

#[derive(Subcommand)]
enum DeformCmd {
    /// Orbit of the base point under the affine group.
    Orbit(DeformFull),
    /// Boundary function estimated from the orbit.
    Gtau(DeformFull),
    /// Maximal invariant domains.
    Domain(DeformFull),
}

#[derive(Args)]
struct DeformFull {
    #[command(flatten)]
    cocycle: CocycleArgs,
    #[command(flatten)]
    common: DeformArgs,
}

#[derive(Args)]
struct CocycleArgs {
    /// zero, coboundary, bending or file.
    #[arg(long, default_value = "zero")]
    cocycle: String,
    /// Coboundary vector.
    #[arg(long = "V", allow_hyphen_values = true)]
    v: Option<String>,
    /// Bending parameter.
    #[arg(long = "s", default_value_t = 0.2, allow_hyphen_values = true)]
    bend_s: f64,
    /// Cocycle JSON {label: [t1,t2,t3]}.
    #[arg(long)]
    cocycle_file: Option<PathBuf>,
}

#[derive(Args)]
struct DeformArgs {
    /// Cone section (see `sphere solve`).
    #[arg(long, default_value = "disk")]
    shape: String,
    #[arg(long, default_value_t = 65)]
    n: usize,
    /// Group JSON {dim, generators, relators}; the genus-two fixture when absent.
    #[arg(long)]
    group: Option<PathBuf>,
    /// Orbit base point.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<String>,
    /// Word length.
    #[arg(long = "L", default_value_t = 4)]
    l: usize,
    #[arg(long, default_value_t = DEFAULT_ORBIT_CAP)]
    cap: usize,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

impl DeformArgs {
    fn config(&self, cocycle: CocycleSource, seed: u64) -> Result<PipelineConfig> {
        Ok(PipelineConfig {
            shape: parse_shape(&self.shape)?,
            resolution: self.n,
            group: self.group.clone(),
            cocycle,
            word_length: self.l,
            orbit_cap: self.cap,
            base_point: self.x0.as_deref().map(parse_vec3).transpose()?,
            output: self.out.clone(),
            seed,
            ..Default::default()
        })
    }
}

impl CocycleArgs {
    fn source(&self) -> Result<CocycleSource> {
        match self.cocycle.as_str() {
            "zero" => Ok(CocycleSource::Zero),
            "coboundary" => {
                let v = self.v.as_deref().ok_or_else(|| Error::InvalidInput("--V is required for coboundary".into()))?;
                Ok(CocycleSource::Coboundary(parse_vec3(v)?))
            }
            "bending" => Ok(CocycleSource::Bending { s: self.bend_s }),
            "file" => {
                let p = self.cocycle_file.clone();
                Ok(CocycleSource::File(p.ok_or_else(|| Error::InvalidInput("--cocycle-file is required".into()))?))
            }
            other => Err(Error::InvalidInput(format!("unknown cocycle '{other}'"))),
        }
    }
}

fn window(s: &str) -> Result<[f64; 4]> {
    parse_list(s)?.try_into().map_err(|_| Error::InvalidInput(format!("window needs x0,x1,y0,y1: '{s}'")))
}

fn report(out: &RunOutput) {
    for o in &out.manifest.outputs {
        println!("{}  {}", o.sha256, o.path);
    }
    println!("manifest: {}", out.manifest_path.display());
}

fn run(cli: Cli) -> Result<i32> {
    let seed = cli.seed;
    let out = match cli.command {
        Command::Sphere(SphereCmd::Solve { shape, n, tol, max_iter, out }) => {
            let cfg = PipelineConfig {
                shape: parse_shape(&shape)?,
                resolution: n,
                solver: SolverOptions { tol, max_iter },
                output: out,
                seed,
                ..Default::default()
            };
            pipeline::sphere_solve(&cfg)?
        }
        Command::Lf(LfCmd::Transform { input, window: w, n, out }) => pipeline::lf_transform(&input, window(&w)?, n, &out)?,
        Command::Cosmo(CosmoCmd::Field { src, points, time_cap, out }) => {
            pipeline::cosmo_field(&src.support, &src.omega, &points, time_cap, &out)?
        }
        Command::Cosmo(CosmoCmd::Foliate { src, t, window: w, n, out }) => {
            pipeline::cosmo_foliate(&src.support, &src.omega, &parse_list(&t)?, window(&w)?, n, &out)?
        }
        Command::Deform(cmd) => {
            let (stage, args) = match cmd {
                DeformCmd::Orbit(a) => (DeformStage::Orbit, a),
                DeformCmd::Gtau(a) => (DeformStage::Gtau, a),
                DeformCmd::Domain(a) => (DeformStage::Domain, a),
            };
            pipeline::deform(&args.common.config(args.cocycle.source()?, seed)?, stage)?
        }
        Command::Bend { s, common } => pipeline::bend(&common.config(CocycleSource::Zero, seed)?, s)?,
        Command::Verify { suite, cocycle, common, tol } => {
            let mut cfg = common.config(cocycle.source()?, seed)?;
            cfg.solver.tol = tol;
            let (out, rep) = pipeline::verify(&cfg, &suite)?;
            for c in &rep.checks {
                let tag = if c.passed { "ok  " } else { "FAIL" };
                println!("{tag} {}: {:.3e} (bound {:.3e})", c.name, c.value, c.bound);
            }
            report(&out);
            return Ok(if rep.passed { 0 } else { 3 });
        }
    };
    report(&out);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
