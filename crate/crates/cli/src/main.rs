use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use lincyc_core::containers::{
    build_containers, iterate_containers, reference_tau, CodegreeCheck, ContainerParams, IncidenceSystem, IterateConfig,
};
use lincyc_core::experiments::{
    log_grid, regime_sweep, supersaturation_report, sweep_summary, theoretical_curve, ReportConstants, SweepConfig,
};
use lincyc_core::io::{load_hypergraph, write_container_family, write_cycle_family, write_hypergraph};
use lincyc_core::supersat::{CapPolicy, ShadowScope};
use lincyc_core::turan::{estimate_random_ex, solve, EstimateMode, RandomExConfig, SolverOptions};
use lincyc_core::{build_balanced_family, enumerate_cycles, sample, BitSet, Error, SupersatConfig};

#[derive(Parser)]
#[command(name = "lincyc", version, about = "Linear cycles in uniform hypergraphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one coupled sample of G(n, p) in r-uniform form.
    Sample(SampleArgs),
    /// Compute or bound the largest cycle-free subgraph of a hypergraph file.
    Ex(ExArgs),
    /// Per-trial ex values on coupled random samples, as CSV.
    ExRandom(ExRandomArgs),
    /// Build containers for the cycle-copy system of a host, or iterate from the complete host.
    Containers(ContainersCmd),
    /// Run the balanced supersaturation pipeline and print its certificate.
    Supersaturate(SupersatArgs),
    /// Compare pipeline measurements with their theoretical reference quantities.
    SupersatReport(ReportArgs),
    /// Sweep densities from a TOML config; CSV rows plus a JSON summary.
    Sweep(SweepArgs),
    /// Tabulate the theoretical growth curve.
    Curve(CurveArgs),
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// exact, lower, greedy or star.
    #[arg(long, default_value = "exact")]
    mode: EstimateMode,
    #[arg(long)]
    exact_cap: Option<usize>,
    /// Write the witness subgraph here.
    #[arg(long)]
    witness: Option<PathBuf>,
}

#[derive(Args)]
struct ExRandomArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "lower")]
    mode: EstimateMode,
    #[arg(long)]
    exact_cap: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_conflicts_with_subcommands = true)]
struct ContainersCmd {
    #[command(subcommand)]
    iterate: Option<ContainersSub>,
    #[command(flatten)]
    single: ContainersArgs,
}

#[derive(Subcommand)]
enum ContainersSub {
    /// Refine {K_n^(r)} until every container is small.
    Iterate(IterateArgs),
}

#[derive(Args)]
struct ContainersArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    /// A number in (0, 1), or `auto` for the density-based choice.
    #[arg(long, default_value = "auto")]
    tau: String,
    /// Constant in the automatic tau.
    #[arg(long, default_value_t = 1.0)]
    tau_constant: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    /// Build even when the codegree condition fails.
    #[arg(long)]
    report_only: bool,
    /// Coverage samples when the ground set is too large for exhaustive checking.
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct IterateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long)]
    k_target: f64,
    #[arg(long, default_value_t = 0.1)]
    eps: f64,
    #[arg(long)]
    shrink: f64,
    /// Refuse steps whose codegree condition fails.
    #[arg(long)]
    enforce: bool,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write a container whose step failed.
    #[arg(long)]
    dump_failed: Option<PathBuf>,
}

#[derive(Args)]
struct SupersatArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, default_value_t = 6.0)]
    lambda: f64,
    /// `auto`, `auto:Q`, `none`, or comma-separated caps for j = 1..2ell-1.
    #[arg(long, default_value = "auto")]
    caps: String,
    /// `first`, `all`, or a 1-based part pair such as `2,3`.
    #[arg(long, default_value = "first")]
    scope: String,
    /// Write the lifted family here.
    #[arg(long)]
    family_out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    pipeline: SupersatArgs,
    #[arg(long, default_value_t = 1.0)]
    plog: f64,
    #[arg(long)]
    alpha: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `csv` in the config.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides `json` in the config.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct CurveArgs {
    #[arg(long)]
    r: usize,
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long)]
    n: f64,
    #[arg(long, default_value_t = 1e-6)]
    p_min: f64,
    #[arg(long, default_value_t = 1.0)]
    p_max: f64,
    #[arg(long, default_value_t = 50)]
    points: usize,
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p).with_context(|| format!("creating {}", p.display()))?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load(path: &Path) -> Result<lincyc_core::Hypergraph> {
    load_hypergraph(path).with_context(|| format!("reading {}", path.display()))
}

fn parse_caps(s: &str, ell: usize) -> Result<CapPolicy> {
    Ok(match s {
        "auto" => CapPolicy::Auto { q: 1.0 },
        "none" => CapPolicy::Unbounded,
        _ if s.starts_with("auto:") => CapPolicy::Auto { q: s[5..].parse().context("cap constant")? },
        _ => {
            let caps: Vec<u64> = s.split(',').map(|c| c.trim().parse()).collect::<Result<_, _>>().context("caps")?;
            if caps.len() != 2 * ell - 1 {
                bail!("expected {} caps, got {}", 2 * ell - 1, caps.len());
            }
            CapPolicy::Explicit(caps)
        }
    })
}

fn parse_scope(s: &str) -> Result<ShadowScope> {
    Ok(match s {
        "first" => ShadowScope::FirstPart,
        "all" => ShadowScope::AllPairs,
        _ => {
            let (a, b) = s.split_once(',').context("scope must be first, all, or i,j")?;
            let (a, b): (usize, usize) = (a.trim().parse()?, b.trim().parse()?);
            if a == 0 || b == 0 {
                bail!("part indexes are 1-based");
            }
            ShadowScope::Fixed(a - 1, b - 1)
        }
    })
}

fn supersat_config(a: &SupersatArgs) -> Result<SupersatConfig> {
    let mut cfg = SupersatConfig::new(a.ell, a.lambda);
    cfg.caps = parse_caps(&a.caps, a.ell)?;
    cfg.scope = parse_scope(&a.scope)?;
    Ok(cfg)
}

fn solver_options(exact_cap: Option<usize>) -> SolverOptions {
    let mut o = SolverOptions::default();
    if let Some(c) = exact_cap {
        o.exact_cap = c;
    }
    o
}

fn run_sample(a: SampleArgs) -> Result<()> {
    let g = sample(a.n, a.r, a.p, a.seed)?;
    let mut w = output(a.out.as_deref())?;
    write_hypergraph(&mut w, &g)?;
    w.flush()?;
    Ok(())
}

fn run_ex(a: ExArgs) -> Result<()> {
    let g = load(&a.input)?;
    let start = Instant::now();
    let res = solve(&g, a.ell, a.mode, &solver_options(a.exact_cap))?;
    let mut out = io::stdout().lock();
    writeln!(out, "edges={}", g.edge_count())?;
    writeln!(out, "value={}", res.value)?;
    writeln!(out, "mode={:?}", res.mode)?;
    writeln!(out, "method={}", res.method.as_str())?;
    writeln!(out, "copies={}", res.copies.map_or("unknown".into(), |c| c.to_string()))?;
    if let Some(h) = res.hitting_set {
        writeln!(out, "hitting_set={h}")?;
    }
    writeln!(out, "fell_back={}", res.fell_back)?;
    if let Some(note) = &res.note {
        writeln!(out, "note={note}")?;
    }
    writeln!(out, "millis={:.3}", start.elapsed().as_secs_f64() * 1e3)?;
    if let Some(path) = &a.witness {
        let mut w = output(Some(path))?;
        write_hypergraph(&mut w, &res.witness_graph(&g))?;
        w.flush()?;
    }
    Ok(())
}

fn run_ex_random(a: ExRandomArgs) -> Result<()> {
    let cfg = RandomExConfig { n: a.n, r: a.r, ell: a.ell, p: a.p, seed: a.seed, trials: a.trials, mode: a.mode };
    let stats = estimate_random_ex(&cfg, &solver_options(a.exact_cap))?;
    let mut w = csv::Writer::from_writer(output(a.out.as_deref())?);
    w.write_record(["trial", "seed", "edges", "copies", "value", "method", "millis"])?;
    let opt = |v: Option<usize>| v.map_or(String::new(), |x| x.to_string());
    for t in &stats.trials {
        if let Some(e) = &t.error {
            log::warn!("trial {}: {e}", t.trial);
        }
        w.write_record([
            t.trial.to_string(),
            t.seed.to_string(),
            t.edges.to_string(),
            opt(t.copies),
            opt(t.value),
            t.method.map_or("", |m| m.as_str()).to_string(),
            format!("{:.3}", t.millis),
        ])?;
    }
    w.flush()?;
    log::info!("mean={} std_dev={} failures={}", stats.mean, stats.std_dev, stats.failures);
    Ok(())
}

fn run_containers(a: ContainersArgs) -> Result<()> {
    let Some(input) = &a.input else {
        bail!("--in is required unless running `containers iterate`");
    };
    let g = load(input)?;
    let family = enumerate_cycles(&g, 2 * a.ell)?;
    let s = IncidenceSystem::from_family(&family);
    let (n, r) = (g.vertex_count(), g.uniformity());
    let tau = if a.tau == "auto" {
        let k = g.edge_count() as f64 / (n as f64).powi(r as i32 - 1);
        let (tau, clamped) = reference_tau(n, r, a.ell, k, a.tau_constant)?;
        if clamped {
            log::warn!("automatic tau clamped to {tau}");
        }
        tau
    } else {
        a.tau.parse().context("tau must be a number or `auto`")?
    };
    let mut params = ContainerParams::new(tau, a.eps);
    if a.report_only {
        params.check = CodegreeCheck::ReportOnly;
    }
    let mut fam = build_containers(&s, &params)?;
    let report = fam.certify(&s, a.samples, a.seed).clone();
    let mut out = io::stdout().lock();
    writeln!(out, "copies={}", family.len())?;
    writeln!(out, "tau={tau}")?;
    writeln!(out, "eps={}", a.eps)?;
    writeln!(out, "delta={}", fam.delta.map_or("undefined".into(), |d| d.to_string()))?;
    writeln!(out, "containers={}", fam.len())?;
    writeln!(out, "max_container={}", fam.max_container_size())?;
    writeln!(out, "ln_containers={:.6}", (fam.len() as f64).ln())?;
    writeln!(out, "ln_size_budget={:.6}", fam.ln_size_budget)?;
    writeln!(out, "shrinkage_ok={}", fam.verify_shrinkage(&s))?;
    writeln!(out, "coverage={:?} checked={} violations={}", report.mode, report.checked, report.violations)?;
    if let Some(path) = &a.out {
        let mut w = output(Some(path))?;
        write_container_family(&mut w, n, r, &fam.containers)?;
        w.flush()?;
    }
    if !report.passed() {
        bail!("{} independent sets are not covered", report.violations);
    }
    Ok(())
}

fn run_iterate(a: IterateArgs) -> Result<()> {
    let mut cfg = IterateConfig::new(a.n, a.r, a.ell, a.k_target, a.eps, a.shrink);
    if a.enforce {
        cfg.check = CodegreeCheck::Enforce;
    }
    let fam = match iterate_containers(&cfg) {
        Ok(f) => f,
        Err(Error::StepFailed { edges, container, source }) => {
            let set = BitSet::from_indices(lincyc_core::util::binomial(a.n as u64, a.r as u64) as usize, container.iter().map(|&i| i as usize));
            match &a.dump_failed {
                Some(p) => {
                    let mut w = output(Some(p))?;
                    write_container_family(&mut w, a.n, a.r, &[set])?;
                    w.flush()?;
                    log::error!("failing container written to {}", p.display());
                }
                None => {
                    let mut buf = Vec::new();
                    write_container_family(&mut buf, a.n, a.r, &[set])?;
                    eprint!("{}", String::from_utf8_lossy(&buf));
                }
            }
            return Err(Error::StepFailed { edges, container, source }.into());
        }
        Err(e) => return Err(e.into()),
    };
    let mut out = io::stdout().lock();
    writeln!(out, "k_start={:.6}", fam.k_start)?;
    writeln!(out, "k_target={}", fam.k_target)?;
    writeln!(out, "leaf_limit={:.3}", fam.leaf_limit)?;
    writeln!(out, "steps={}", fam.steps())?;
    writeln!(out, "predicted_steps={}", fam.predicted_steps)?;
    for (i, l) in fam.levels.iter().enumerate() {
        writeln!(
            out,
            "level {i}: K={:.6} refined={} kept={} children={} max_delta={:.6}",
            l.k_level, l.refined, l.kept, l.children, l.max_delta
        )?;
    }
    writeln!(out, "leaves={}", fam.leaves.len())?;
    writeln!(out, "max_leaf={}", fam.max_leaf_size())?;
    if let Some(path) = &a.out {
        let mut w = output(Some(path))?;
        write_container_family(&mut w, a.n, a.r, &fam.leaves)?;
        w.flush()?;
    }
    Ok(())
}

fn run_supersaturate(a: SupersatArgs) -> Result<()> {
    let g = load(&a.input)?;
    let bf = build_balanced_family(&g, &supersat_config(&a)?)?;
    let mut out = io::stdout().lock();
    write!(out, "{}", bf.certificate.to_text())?;
    writeln!(out, "audit={}", bf.audit())?;
    if let Some(path) = &a.family_out {
        let mut w = output(Some(path))?;
        write_cycle_family(&mut w, &bf.family)?;
        w.flush()?;
    }
    Ok(())
}

fn run_report(a: ReportArgs) -> Result<()> {
    let g = load(&a.pipeline.input)?;
    let consts = ReportConstants { plog: a.plog, alpha: a.alpha };
    let rep = supersaturation_report(&g, &supersat_config(&a.pipeline)?, &consts)?;
    print!("{}", rep.to_text());
    Ok(())
}

fn run_sweep(a: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = SweepConfig::from_toml(&text)?;
    if a.csv.is_some() {
        cfg.csv = a.csv;
    }
    if a.json.is_some() {
        cfg.json = a.json;
    }
    let mut csv_out = output(cfg.csv.as_deref())?;
    let outcome = regime_sweep(&cfg, Some(&mut *csv_out))?;
    csv_out.flush()?;
    let summary = serde_json::to_string_pretty(&sweep_summary(&outcome))?;
    match &cfg.json {
        Some(p) => std::fs::write(p, summary + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => eprintln!("{summary}"),
    }
    Ok(())
}

fn run_curve(a: CurveArgs) -> Result<()> {
    let grid = log_grid(a.p_min, a.p_max, a.points)?;
    let (curve, points) = theoretical_curve(a.r, a.ell, a.n, &grid)?;
    let mut out = io::stdout().lock();
    writeln!(out, "# r={} ell={} n={} p0={:e} p1={:e}", a.r, a.ell, a.n, curve.p0, curve.p1)?;
    if let Some((lo, hi)) = curve.middle {
        writeln!(out, "# middle={lo:e}..{hi:e}")?;
    }
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "value", "regime"])?;
    for pt in points {
        w.write_record([pt.p.to_string(), pt.value.to_string(), pt.regime.as_str().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(e) if e.is_resource() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Sample(a) => run_sample(a),
        Command::Ex(a) => run_ex(a),
        Command::ExRandom(a) => run_ex_random(a),
        Command::Containers(ContainersCmd { iterate: Some(ContainersSub::Iterate(a)), .. }) => run_iterate(a),
        Command::Containers(c) => run_containers(c.single),
        Command::Supersaturate(a) => run_supersaturate(a),
        Command::SupersatReport(a) => run_report(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Curve(a) => run_curve(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
