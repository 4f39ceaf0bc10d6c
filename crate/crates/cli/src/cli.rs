//! Argument definitions and subcommand implementations.

use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use spbench_core::cluster::{Cluster, Thomson};
use spbench_core::game::{NashGame, NashSystem};
use spbench_core::lattice::{Boundary, Disorder, Phi4, XyModel};
use spbench_core::puzzle::{Encoding, Puzzle, PuzzleSystem};
use spbench_core::solvers::{multistart, Method, SolverConfig, StartPlan};
use spbench_core::{Model, Problem, ProblemInstance};

use crate::files::{InstanceFile, ResultFile, Stats};
use crate::report::Report;
use crate::{exit, threads_from_env};

#[derive(Debug, Parser)]
#[command(name = "spbench", version, about = "Stationary-point benchmark instances, campaigns and reports")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an instance file for one benchmark family.
    Generate {
        #[command(subcommand)]
        family: FamilyArgs,
    },
    /// Run a multistart campaign on an instance.
    Solve(SolveArgs),
    /// Summarize a result file.
    Report(ReportArgs),
    /// Recheck every stored solution against its instance.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long)]
    pub out: PathBuf,
    /// Required whenever the instance involves random draws.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub label: Option<String>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum BoundaryArg {
    Periodic,
    AntiPeriodic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EncodingArg {
    Exp,
    Linear,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Preset {
    MatchingPennies,
    PrisonersDilemma,
}

#[derive(Debug, Subcommand)]
pub enum FamilyArgs {
    /// φ⁴ model on an N×N periodic lattice.
    Phi4 {
        #[arg(long = "N")]
        n: usize,
        #[arg(long = "J", default_value_t = 0.0, allow_negative_numbers = true)]
        j: f64,
        #[arg(long, default_value_t = Phi4::DEFAULT_LAMBDA)]
        lambda: f64,
        #[arg(long, default_value_t = Phi4::DEFAULT_MU2, allow_negative_numbers = true)]
        mu2: f64,
        #[command(flatten)]
        common: Common,
    },
    /// XY model on an L^d lattice.
    Xy {
        #[arg(long)]
        d: usize,
        #[arg(long = "L")]
        l: usize,
        /// `constant:J`, `uniform-signed` or `uniform:a,b`.
        #[arg(long, default_value = "constant:1")]
        disorder: String,
        #[arg(long, value_enum, default_value = "periodic")]
        bc: BoundaryArg,
        /// Keep site 0 free (leaves the global rotation zero mode in).
        #[arg(long)]
        no_gauge_fix: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Thomson problem: N unit charges on the sphere.
    Thomson {
        #[arg(long = "N")]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Lennard-Jones cluster.
    Lj {
        #[arg(long)]
        atoms: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Morse cluster.
    Morse {
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 6.0)]
        rho: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Nash equilibrium system of a finite game.
    Nash {
        /// Game file: {players, strategy_counts, payoffs}.
        #[arg(long, conflicts_with_all = ["preset", "random"])]
        game: Option<PathBuf>,
        #[arg(long, value_enum, conflicts_with = "random")]
        preset: Option<Preset>,
        /// Random payoffs in [-1, 1] for a shape such as `2x2` or `2x3x2`.
        #[arg(long)]
        random: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Edge-matching puzzle cut from a grid.
    Puzzle {
        /// `RxC`, e.g. `2x2`.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value_t = 3)]
        colors: u32,
        #[arg(long, value_enum, default_value = "exp")]
        encoding: EncodingArg,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// newton, gradsq or newton-homotopy.
    #[arg(long, default_value = "newton")]
    pub method: String,
    /// A count of random starts, `gridK` for a K-point tensor grid from the
    /// family's default axis, or `grid:v1,v2,...` for explicit axis values.
    #[arg(long)]
    pub starts: String,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Residual norm for accepting a root.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub dedup_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Worker threads; overrides SPBENCH_THREADS.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Record wall time in the result (the file then differs between runs).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    pub result: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub instance: PathBuf,
    pub result: PathBuf,
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    match cli.command {
        Command::Generate { family } => generate(family, out),
        Command::Solve(a) => solve(a, out),
        Command::Report(a) => report(a, out),
        Command::Verify(a) => verify(a, out, err),
    }
}

fn parse_disorder(s: &str) -> anyhow::Result<Disorder> {
    if s == "uniform-signed" {
        return Ok(Disorder::UniformSigned);
    }
    if let Some(v) = s.strip_prefix("constant:") {
        return Ok(Disorder::Constant(v.parse().context("constant coupling")?));
    }
    if let Some(v) = s.strip_prefix("uniform:") {
        let (a, b) = v.split_once(',').context("uniform disorder needs `uniform:a,b`")?;
        return Ok(Disorder::Uniform(a.trim().parse()?, b.trim().parse()?));
    }
    bail!("unknown disorder {s:?} (expected constant:J, uniform-signed or uniform:a,b)")
}

fn parse_shape(s: &str) -> anyhow::Result<Vec<usize>> {
    let dims: Vec<usize> = s
        .split('x')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("bad shape {s:?}"))?;
    if dims.is_empty() || dims.contains(&0) {
        bail!("bad shape {s:?}");
    }
    Ok(dims)
}

fn need_seed(seed: Option<u64>, what: &str) -> anyhow::Result<u64> {
    seed.with_context(|| format!("--seed is required for {what}"))
}

pub fn build_instance(family: &FamilyArgs) -> anyhow::Result<(ProblemInstance, Common)> {
    let (model, common): (Model, &Common) = match family {
        FamilyArgs::Phi4 { n, j, lambda, mu2, common } => (Phi4::new(*n, *lambda, *mu2, *j)?.into(), common),
        FamilyArgs::Xy { d, l, disorder, bc, no_gauge_fix, common } => {
            let disorder = parse_disorder(disorder)?;
            let seed = match disorder {
                Disorder::Constant(_) => common.seed.unwrap_or(0),
                _ => need_seed(common.seed, "random disorder")?,
            };
            let bc = match bc {
                BoundaryArg::Periodic => Boundary::Periodic,
                BoundaryArg::AntiPeriodic => Boundary::AntiPeriodic,
            };
            (XyModel::new(*d, *l, bc, disorder, seed, !no_gauge_fix)?.into(), common)
        }
        FamilyArgs::Thomson { n, common } => (Thomson::new(*n)?.into(), common),
        FamilyArgs::Lj { atoms, common } => (Cluster::lennard_jones(*atoms)?.into(), common),
        FamilyArgs::Morse { atoms, rho, common } => (Cluster::morse(*atoms, *rho)?.into(), common),
        FamilyArgs::Nash { game, preset, random, common } => {
            let g = match (game, preset, random) {
                (Some(path), _, _) => {
                    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
                    serde_json::from_slice::<NashGame>(&bytes).with_context(|| format!("parsing {}", path.display()))?
                }
                (_, Some(Preset::MatchingPennies), _) => NashGame::matching_pennies(),
                (_, Some(Preset::PrisonersDilemma), _) => NashGame::prisoners_dilemma(),
                (_, _, Some(shape)) => NashGame::random(parse_shape(shape)?, need_seed(common.seed, "random payoffs")?)?,
                _ => bail!("nash needs one of --game, --preset or --random"),
            };
            (NashSystem::new(g).into(), common)
        }
        FamilyArgs::Puzzle { grid, colors, encoding, common } => {
            let shape = parse_shape(grid)?;
            let [rows, cols] = shape[..] else {
                bail!("--grid takes RxC, got {grid:?}");
            };
            let (p, _) = Puzzle::grid(rows, cols, *colors, need_seed(common.seed, "puzzle generation")?)?;
            let enc = match encoding {
                EncodingArg::Exp => Encoding::default(),
                EncodingArg::Linear => Encoding::Linear,
            };
            (PuzzleSystem::new(p, enc)?.into(), common)
        }
    };
    let mut inst = ProblemInstance::new(model);
    if let Some(l) = &common.label {
        inst.label = l.clone();
    }
    Ok((inst, common.clone()))
}

fn generate(family: FamilyArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let (inst, common) = build_instance(&family)?;
    InstanceFile::from_instance(&inst)?.save(&common.out)?;
    writeln!(out, "label={}", inst.label)?;
    writeln!(out, "n={}", inst.dim())?;
    if let Model::Phi4(p) = &inst.model {
        writeln!(out, "bezout={}", p.bezout())?;
    }
    Ok(exit::OK)
}

/// Interprets `--starts`.
pub fn parse_starts(s: &str, inst: &ProblemInstance) -> anyhow::Result<StartPlan> {
    if let Some(values) = s.strip_prefix("grid:") {
        let axis = values
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<Result<Vec<_>, _>>()
            .context("grid values")?;
        if axis.is_empty() {
            bail!("empty grid");
        }
        return Ok(StartPlan::Grid { axis });
    }
    if let Some(k) = s.strip_prefix("grid") {
        let k: usize = k.parse().with_context(|| format!("bad grid size in {s:?}"))?;
        if k == 0 {
            bail!("grid size must be positive");
        }
        return Ok(StartPlan::Grid { axis: inst.grid_axis(k) });
    }
    let count: usize = s.parse().with_context(|| format!("--starts must be a count, gridK or grid:v1,..., got {s:?}"))?;
    if count == 0 {
        bail!("--starts must be at least 1");
    }
    Ok(StartPlan::Random { count })
}

/// Campaign configuration from solve flags, with method defaults elsewhere.
pub fn solver_config(a: &SolveArgs, inst: &ProblemInstance) -> anyhow::Result<SolverConfig> {
    let method = Method::from_name(&a.method).with_context(|| format!("unknown method {:?}", a.method))?;
    let starts = parse_starts(&a.starts, inst)?;
    let seed = match starts {
        StartPlan::Random { .. } => need_seed(a.seed, "random starts")?,
        StartPlan::Grid { .. } => a.seed.unwrap_or(0),
    };
    let mut cfg = SolverConfig::new(method).with_starts(starts).with_seed(seed);
    if let Some(t) = a.tol {
        cfg.accept_tol = t;
    }
    if let Some(t) = a.dedup_tol {
        cfg.dedup_tol = t;
    }
    if let Some(m) = a.max_iters {
        cfg.max_iters = m;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs a campaign and assembles its result record.
pub fn run_campaign(inst: &ProblemInstance, cfg: SolverConfig, threads: usize, timing: bool) -> anyhow::Result<ResultFile> {
    let t0 = Instant::now();
    let campaign = multistart(inst, &cfg, threads)?;
    let stats = Stats {
        counts: campaign.stats,
        wall_time: timing.then(|| t0.elapsed().as_secs_f64()),
    };
    Ok(ResultFile::new(inst, cfg, campaign.solutions, stats))
}

fn solve(a: SolveArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let inst = InstanceFile::load(&a.instance)?;
    let cfg = solver_config(&a, &inst)?;
    let threads = a.threads.unwrap_or_else(threads_from_env).max(1);
    let result = run_campaign(&inst, cfg, threads, a.timing)?;
    result.save(&a.out)?;
    let s = &result.campaign_stats.counts;
    writeln!(
        out,
        "solutions={} starts={} converged={} diverged={} spurious={} eval_errors={} singular_steps={} max_iters={}",
        result.solutions.len(),
        s.starts,
        s.converged,
        s.diverged,
        s.spurious,
        s.eval_errors,
        s.singular_steps,
        s.max_iters
    )?;
    if let Some(best) = result.solutions.points.first() {
        writeln!(out, "energy_min={:.16e}", best.energy)?;
    }
    Ok(if result.solutions.is_empty() { exit::NO_SOLUTIONS } else { exit::OK })
}

fn report(a: ReportArgs, out: &mut dyn Write) -> anyhow::Result<i32> {
    let r = ResultFile::load(&a.result)?;
    let rep = Report::new(&r);
    match a.format {
        Format::Csv => out.write_all(rep.to_csv().as_bytes())?,
        Format::Json => out.write_all(rep.to_json()?.as_bytes())?,
    }
    Ok(exit::OK)
}

fn verify(a: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> anyhow::Result<i32> {
    let inst = InstanceFile::load(&a.instance)?;
    let r = ResultFile::load(&a.result)?;
    let problems = crate::verify::check(&inst, &r);
    if problems.is_empty() {
        writeln!(out, "ok: {} solution(s) verified", r.solutions.len())?;
        Ok(exit::OK)
    } else {
        for p in &problems {
            writeln!(err, "{p}")?;
        }
        writeln!(err, "verification failed: {} problem(s)", problems.len())?;
        Ok(exit::VERIFY_FAILED)
    }
}
