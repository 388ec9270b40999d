use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::error::ErrorKind;
use clap::{Args, CommandFactory, Parser, Subcommand, ValueEnum};

use pfd_core::bench::{instance_name, instance_spec, run_bench, BenchConfig};
use pfd_core::generator::{generate, Topology, TopologyKind};
use pfd_core::model::{parse_problem, serialize_problem, ContinuousDomain};
use pfd_core::oracle::{centralized_gcpso, grid_search, GridSpec};
use pfd_core::runtime::{InitialPositions, Simulator};
use pfd_core::swarm::SwarmParams;

/// Overrides the default output directory (the current directory).
const OUT_DIR_ENV: &str = "PFD_OUT_DIR";

#[derive(Parser)]
#[command(name = "pfd", version, about = "Particle-swarm solver for functional DCOPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write random problem instances as JSON.
    Generate(GenerateCmd),
    /// Solve one problem file and write its anytime trace.
    Solve(SolveCmd),
    /// Generate and solve batches, writing per-instance and aggregate CSV.
    Bench(BenchCmd),
}

#[derive(Args, Clone)]
struct GenArgs {
    /// er (Erdős–Rényi), sf (scale-free) or tree
    #[arg(long, value_parser = parse_topology)]
    topology: TopologyKind,
    /// Edge probability (er only).
    #[arg(long)]
    p: Option<f64>,
    /// Edges per new node (sf only).
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = -5.0, allow_negative_numbers = true)]
    coeff_lo: f64,
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    coeff_hi: f64,
    #[arg(long, default_value_t = -50.0, allow_negative_numbers = true)]
    domain_lo: f64,
    #[arg(long, default_value_t = 50.0, allow_negative_numbers = true)]
    domain_hi: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn parse_topology(s: &str) -> Result<TopologyKind, String> {
    s.parse()
}

impl GenArgs {
    fn topology(&self) -> Topology {
        match self.topology {
            TopologyKind::Er => {
                if self.m.is_some() {
                    usage_error("--m applies only to --topology sf");
                }
                Topology::ErdosRenyi { p: self.p.unwrap_or(0.2) }
            }
            TopologyKind::Sf => {
                if self.p.is_some() {
                    usage_error("--p applies only to --topology er");
                }
                Topology::ScaleFree { m: self.m.unwrap_or(2) }
            }
            TopologyKind::Tree => {
                if self.p.is_some() || self.m.is_some() {
                    usage_error("--p and --m do not apply to --topology tree");
                }
                Topology::RandomTree
            }
        }
    }

    fn domain(&self) -> Result<ContinuousDomain> {
        Ok(ContinuousDomain::new(self.domain_lo, self.domain_hi)?)
    }

    fn echo(&self, s: &mut String) {
        let _ = write!(s, " --topology {}", self.topology().tag());
        match self.topology() {
            Topology::ErdosRenyi { p } => {
                let _ = write!(s, " --p {p}");
            }
            Topology::ScaleFree { m } => {
                let _ = write!(s, " --m {m}");
            }
            Topology::RandomTree => {}
        }
        let _ = write!(
            s,
            " --coeff-lo {} --coeff-hi {} --domain-lo {} --domain-hi {} --seed {}",
            self.coeff_lo, self.coeff_hi, self.domain_lo, self.domain_hi, self.seed
        );
    }
}

#[derive(Args, Clone)]
struct SwarmArgs {
    /// Particle count K.
    #[arg(long, default_value_t = 2000)]
    particles: usize,
    #[arg(long, default_value_t = 0.9)]
    w: f64,
    #[arg(long, default_value_t = 0.9)]
    c1: f64,
    #[arg(long, default_value_t = 0.1)]
    c2: f64,
    #[arg(long, default_value_t = 15)]
    max_sc: u32,
    #[arg(long, default_value_t = 5)]
    max_fc: u32,
    /// Limit |v| to the domain width.
    #[arg(long)]
    clamp_velocity: bool,
    #[arg(long, default_value_t = 500)]
    iters: u64,
}

impl SwarmArgs {
    fn params(&self, seed: u64) -> SwarmParams {
        SwarmParams {
            particles: self.particles,
            w: self.w,
            c1: self.c1,
            c2: self.c2,
            max_sc: self.max_sc,
            max_fc: self.max_fc,
            clamp_velocity: self.clamp_velocity,
            seed,
        }
    }

    fn echo(&self, s: &mut String) {
        let _ = write!(
            s,
            " --particles {} --w {} --c1 {} --c2 {} --max-sc {} --max-fc {} --iters {}",
            self.particles, self.w, self.c1, self.c2, self.max_sc, self.max_fc, self.iters
        );
        if self.clamp_velocity {
            s.push_str(" --clamp-velocity");
        }
    }
}

#[derive(Args)]
struct GenerateCmd {
    #[command(flatten)]
    gen: GenArgs,
    #[arg(long)]
    agents: usize,
    #[arg(long, default_value_t = 1)]
    count: usize,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Oracle {
    /// The message-passing solver.
    Distributed,
    /// Centralized reference with identical random streams.
    Centralized,
    /// Exhaustive grid search.
    Grid,
}

#[derive(Args)]
struct SolveCmd {
    problem: PathBuf,
    #[command(flatten)]
    swarm: SwarmArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// JSON list of {"id": ..., "positions": [...]} starting positions.
    #[arg(long)]
    force_init: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Oracle::Distributed)]
    oracle: Oracle,
    #[arg(long, default_value_t = 11)]
    grid_points: usize,
    /// Trace CSV path; defaults to <out-dir>/<problem stem>.trace.csv.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
    /// Print a line per simulation round to stderr.
    #[arg(long, short)]
    verbose: bool,
}

#[derive(Args)]
struct BenchCmd {
    #[command(flatten)]
    gen: GenArgs,
    /// Comma-separated agent counts.
    #[arg(long, value_delimiter = ',', required = true)]
    agents: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    instances: usize,
    #[command(flatten)]
    swarm: SwarmArgs,
    /// Solver seed of instance 0; instance k uses seed + k.
    #[arg(long, default_value_t = 0)]
    solver_seed: u64,
    /// Output CSV; defaults to <out-dir>/bench.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trace_dir: Option<PathBuf>,
    #[arg(long, env = OUT_DIR_ENV, default_value = ".")]
    out_dir: PathBuf,
}

fn usage_error(msg: &str) -> ! {
    Cli::command().error(ErrorKind::ArgumentConflict, msg).exit()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_generate(cmd: GenerateCmd) -> Result<()> {
    if cmd.count == 0 {
        usage_error("--count must be at least 1");
    }
    let topology = cmd.gen.topology();
    let mut header = format!("# pfd generate --agents {} --count {}", cmd.agents, cmd.count);
    cmd.gen.echo(&mut header);
    println!("{header}");
    let domain = cmd.gen.domain()?;
    for k in 0..cmd.count {
        let spec = instance_spec(topology, cmd.agents, (cmd.gen.coeff_lo, cmd.gen.coeff_hi), domain, cmd.gen.seed, k);
        let problem = generate(&spec)?;
        let path = cmd.out_dir.join(format!("{}.json", instance_name(&topology, cmd.agents, cmd.gen.seed, k)));
        write_file(&path, &serialize_problem(&problem))?;
        println!("{} agents={} constraints={}", path.display(), problem.len(), problem.constraints().len());
    }
    Ok(())
}

fn cmd_solve(cmd: SolveCmd) -> Result<()> {
    let text = std::fs::read_to_string(&cmd.problem).with_context(|| format!("reading {}", cmd.problem.display()))?;
    let problem = parse_problem(&text).with_context(|| format!("parsing {}", cmd.problem.display()))?;
    let params = cmd.swarm.params(cmd.seed);
    let init = match &cmd.force_init {
        Some(path) => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            Some(InitialPositions::parse(&text, &problem)?)
        }
        None => None,
    };

    let mut header = format!("# pfd solve {}", cmd.problem.display());
    cmd.swarm.echo(&mut header);
    let _ = write!(header, " --seed {}", cmd.seed);
    if let Some(p) = &cmd.force_init {
        let _ = write!(header, " --force-init {}", p.display());
    }
    let _ = write!(header, " --oracle {}", cmd.oracle.to_possible_value().unwrap().get_name());
    if cmd.oracle == Oracle::Grid {
        let _ = write!(header, " --grid-points {}", cmd.grid_points);
    }
    println!("{header}");

    let trace_path = cmd.trace.clone().unwrap_or_else(|| {
        let stem = cmd.problem.file_stem().map_or("problem".into(), |s| s.to_string_lossy().into_owned());
        cmd.out_dir.join(format!("{stem}.trace.csv"))
    });
    match cmd.oracle {
        Oracle::Distributed => {
            let mut sim = match &init {
                Some(init) => Simulator::with_initial_positions(&problem, &params, cmd.swarm.iters, init)?,
                None => Simulator::new(&problem, &params, cmd.swarm.iters)?,
            };
            if cmd.verbose {
                sim.run_observed(|r| eprintln!("{r}"))?;
            } else {
                sim.run_to_quiescence()?;
            }
            let out = sim.outcome();
            write_file(&trace_path, &out.trace.to_csv())?;
            let root = &sim.machines()[sim.tree().root()];
            println!(
                "final_gbest={} iterations={} rounds={} envelopes={} scalars={} rho={} s_c={} f_c={} trace={}",
                out.final_gbest,
                cmd.swarm.iters,
                out.rounds,
                out.envelopes,
                out.scalars,
                root.swarm().rho,
                root.swarm().s_c,
                root.swarm().f_c,
                trace_path.display()
            );
        }
        Oracle::Centralized => {
            let trace = centralized_gcpso(&problem, &params, cmd.swarm.iters, init.as_ref())?;
            write_file(&trace_path, &trace.to_csv())?;
            println!(
                "final_gbest={} iterations={} trace={}",
                trace.final_gbest().unwrap_or(f64::INFINITY),
                cmd.swarm.iters,
                trace_path.display()
            );
        }
        Oracle::Grid => {
            let (assignment, cost) = grid_search(&problem, GridSpec::new(cmd.grid_points))?;
            let values: Vec<String> = problem
                .agents()
                .iter()
                .map(|a| format!("{}={}", a.id, assignment.get(&a.id).unwrap_or(f64::NAN)))
                .collect();
            println!("final_gbest={cost} grid_points={} assignment={}", cmd.grid_points, values.join(","));
        }
    }
    Ok(())
}

fn cmd_bench(cmd: BenchCmd) -> Result<()> {
    if cmd.instances == 0 {
        usage_error("--instances must be at least 1");
    }
    if cmd.agents.contains(&0) {
        usage_error("agent counts must be positive");
    }
    let out = cmd.out.clone().unwrap_or_else(|| cmd.out_dir.join("bench.csv"));
    let summary_path = out.with_file_name(format!(
        "{}_summary.csv",
        out.file_stem().map_or("bench".into(), |s| s.to_string_lossy().into_owned())
    ));
    if let Some(dir) = &cmd.trace_dir {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    let cfg = BenchConfig {
        topology: cmd.gen.topology(),
        agent_counts: cmd.agents.clone(),
        instances: cmd.instances,
        coeff_range: (cmd.gen.coeff_lo, cmd.gen.coeff_hi),
        domain: cmd.gen.domain()?,
        seed: cmd.gen.seed,
        params: cmd.swarm.params(cmd.solver_seed),
        iterations: cmd.swarm.iters,
        trace_dir: cmd.trace_dir.clone(),
    };
    let agents: Vec<String> = cmd.agents.iter().map(usize::to_string).collect();
    let mut header = format!("# pfd bench --agents {} --instances {}", agents.join(","), cmd.instances);
    cmd.gen.echo(&mut header);
    cmd.swarm.echo(&mut header);
    let _ = write!(header, " --solver-seed {} --out {}", cmd.solver_seed, out.display());
    if let Some(d) = &cmd.trace_dir {
        let _ = write!(header, " --trace-dir {}", d.display());
    }
    println!("{header}");

    let report = run_bench(&cfg);
    for r in &report.rows {
        if let Err(e) = &r.final_cost {
            eprintln!("instance {} (n={}, seed={}) failed: {e}", r.instance, r.n, r.seed);
        }
    }
    write_file(&out, &report.to_csv())?;
    write_file(&summary_path, &report.summary_csv())?;
    for s in &report.summaries {
        println!(
            "n={} mean_cost={} sd_cost={} failures={} mean_wall_ms={:.1}",
            s.n, s.mean_cost, s.sd_cost, s.failures, s.mean_wall_ms
        );
    }
    println!("wrote {} and {}", out.display(), summary_path.display());
    if report.summaries.iter().all(|s| s.failures == s.instances) {
        bail!("every instance failed");
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(c) => cmd_generate(c),
        Command::Solve(c) => cmd_solve(c),
        Command::Bench(c) => cmd_bench(c),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
