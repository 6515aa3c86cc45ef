use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pnstencil_cli::config::read_pairs;
use pnstencil_cli::{compare_profiles, run, CliError, Profile, RunConfig, EXIT_NOT_CONVERGED};
use pnstencil_core::problems::{
    mc_fluence_oracle, Grid, POINTSOURCE_ALBEDO, POINTSOURCE_EXTENT, POINTSOURCE_SIGMA_T,
};
use pnstencil_core::pn::Dim;

#[derive(Parser)]
#[command(name = "pnstencil", version, about = "P_N radiative transfer on staggered voxel grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a problem and write field, profile, log and dumps.
    Run(RunArgs),
    /// Compare a fluence profile against a reference curve.
    Compare(CompareArgs),
    /// Monte Carlo reference profile for the point-source medium.
    Mc(McArgs),
}

/// Every value is kept as text and validated together with the config file.
#[derive(Args)]
struct RunArgs {
    /// Flat key = value file; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// checkerboard, pointsource or heterogeneous.
    #[arg(long)]
    problem: Option<String>,
    /// Problem description file (homogeneous box).
    #[arg(long)]
    spec: Option<String>,
    /// pn or cda.
    #[arg(long)]
    equations: Option<String>,
    #[arg(long)]
    order: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long)]
    res: Option<String>,
    /// dirichlet or neumann.
    #[arg(long)]
    bc: Option<String>,
    /// Lower bound applied to sigma_t.
    #[arg(long)]
    floor: Option<String>,
    /// Relative tolerance on both the normal and the primal residual.
    #[arg(long)]
    tol: Option<String>,
    #[arg(long)]
    max_iter: Option<String>,
    /// Jacobi scaling of the normal equations.
    #[arg(long)]
    jacobi: bool,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Print the equation dump and stop before solving.
    #[arg(long)]
    dump_equations: bool,
    /// Print the stencil dump and stop before solving.
    #[arg(long)]
    dump_stencil: bool,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, CliError> {
        let mut pairs = match &self.config {
            Some(p) => read_pairs(p)?,
            None => Vec::new(),
        };
        let text = [
            ("problem", &self.problem),
            ("spec", &self.spec),
            ("equations", &self.equations),
            ("order", &self.order),
            ("dim", &self.dim),
            ("res", &self.res),
            ("bc", &self.bc),
            ("floor", &self.floor),
            ("tol", &self.tol),
            ("max_iter", &self.max_iter),
            ("out", &self.out),
            ("seed", &self.seed),
        ];
        for (k, v) in text {
            if let Some(v) = v {
                pairs.push((k.to_string(), v.clone()));
            }
        }
        for (k, set) in [
            ("jacobi", self.jacobi),
            ("dump_equations", self.dump_equations),
            ("dump_stencil", self.dump_stencil),
        ] {
            if set {
                pairs.push((k.to_string(), "true".into()));
            }
        }
        RunConfig::from_pairs(&pairs)
    }
}

#[derive(Args)]
struct CompareArgs {
    /// Reference CSV (r,value[,stderr]).
    #[arg(long)]
    reference: PathBuf,
    /// Profile CSV to compare; without it the run described by the run
    /// flags is executed first.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Near-field exclusion: points with r below this are ignored.
    #[arg(long, default_value_t = 0.0)]
    exclude: f64,
    /// Points with r above this are ignored.
    #[arg(long, default_value_t = f64::INFINITY)]
    max_r: f64,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Args)]
struct McArgs {
    #[arg(long, default_value_t = 48)]
    res: usize,
    #[arg(long, default_value_t = POINTSOURCE_EXTENT)]
    extent: f64,
    #[arg(long, default_value_t = POINTSOURCE_SIGMA_T)]
    sigma_t: f64,
    #[arg(long, default_value_t = POINTSOURCE_ALBEDO)]
    albedo: f64,
    #[arg(long, default_value_t = 1_000_000)]
    paths: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(args) => {
            let summary = run(&args.config()?)?;
            if let Some(rep) = &summary.report {
                println!(
                    "{} after {} iterations, primal residual {:e}, normal residual {:e}",
                    if rep.converged { "converged" } else { "NOT converged" },
                    rep.iterations,
                    rep.primal_residual,
                    rep.normal_residual
                );
                println!("artifacts in {}", summary.out.display());
            }
            Ok(if summary.converged() { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::Compare(args) => {
            if args.exclude.is_nan() || args.exclude < 0.0 || args.max_r.is_nan() || args.max_r < args.exclude {
                return Err(CliError::Config("need 0 <= exclude <= max_r".into()));
            }
            let reference = Profile::read(&args.reference)?;
            let (profile, converged) = match &args.profile {
                Some(p) => (Profile::read(p)?, true),
                None => {
                    let summary = run(&args.run.config()?)?;
                    let ok = summary.converged();
                    (summary.profile, ok)
                }
            };
            let m = compare_profiles(&profile, &reference, args.exclude, args.max_r)?;
            println!("{m}");
            Ok(if converged { 0 } else { EXIT_NOT_CONVERGED })
        }
        Command::Mc(args) => {
            let sigma_ok = args.sigma_t > 0.0 && args.sigma_t.is_finite();
            if !sigma_ok || !(0.0..1.0).contains(&args.albedo) || args.paths == 0 || args.res < 2 {
                return Err(CliError::Config(
                    "need sigma_t > 0, 0 <= albedo < 1, paths > 0 and res >= 2".into(),
                ));
            }
            // radii of the line profile from the center voxel of the grid
            let g = Grid::new(Dim::Three, args.res, args.extent);
            let r: Vec<f64> = (0..args.res - args.res / 2).map(|k| k as f64 * g.h).collect();
            let est = mc_fluence_oracle(args.sigma_t, args.albedo, &r, args.paths, args.seed);
            let p = Profile {
                r: est.r,
                value: est.fluence,
                stderr: est.stderr,
            };
            p.write(&args.out)?;
            println!(
                "absorbed {:.6} +- {:.1e} over {} paths",
                est.absorbed, est.absorbed_stderr, est.paths
            );
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
