use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use pdp_core::harness::{
    self, convergence_study, emit_snapshots, error_vs_oracle, mc_cross_check, parse_list, scenario_oracle, Config,
    HarnessError,
};
use pdp_core::model::{validate_model, Scenario};
use pdp_core::montecarlo::sup_distance;
use pdp_core::solver::{solve, Mesh, QuadratureRule, SolveOptions};

/// Upwind solver for Liouville–Master equations of piecewise-deterministic
/// processes with memory.
#[derive(Parser)]
#[command(name = "pdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Built-in scenario: poisson-rc4, mcfadden or gamma.
    #[arg(long, global = true)]
    scenario: Option<String>,
    /// Comma-separated spatial steps.
    #[arg(long, global = true)]
    dx: Option<String>,
    /// Number of Monte Carlo paths.
    #[arg(long, global = true)]
    paths: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory for snapshots.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve and write density snapshots.
    Run,
    /// Error against the stationary solution for several step sizes.
    Converge,
    /// Compare the solver with simulated sample paths.
    Mc,
    /// Check the model definition.
    Validate,
}

/// Horizon of the equilibrium comparisons unless configured.
const EQUILIBRIUM_T: f64 = 20.0;

fn load_config(common: &Common) -> Result<Config, HarnessError> {
    let mut c = match &common.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(s) = &common.scenario {
        c.scenario = s.parse()?;
    }
    if let Some(dx) = &common.dx {
        c.dx = parse_list(dx)?;
    }
    if let Some(p) = common.paths {
        c.mc_paths = p;
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(o) = &common.out {
        c.out_dir = o.clone();
    }
    Ok(c)
}

fn default_dx(c: &Config, study: bool) -> Vec<f64> {
    if !c.dx.is_empty() {
        return c.dx.clone();
    }
    match (c.scenario, study) {
        (Scenario::McFaddenFilter, true) => vec![0.1, 0.04, 0.008],
        (Scenario::GammaFilter, true) => vec![0.1, 0.05, 0.025],
        (Scenario::PoissonRc4, true) => vec![0.4, 0.2, 0.1],
        (Scenario::PoissonRc4, false) => vec![0.1],
        (_, false) => vec![0.01],
    }
}

fn run(c: &Config) -> Result<(), HarnessError> {
    let model = c.model()?;
    let dx = default_dx(c, false)[0];
    let mesh = Mesh::build(&model, dx, c.safety)?;
    let sol = solve(&model, mesh, QuadratureRule::Rectangle, SolveOptions::default())?;
    let m = &sol.marginals;
    println!("dx = {}, dy = {:.6e}, nodes = {}, steps = {}", mesh.dx, mesh.dy, mesh.nk + 1, mesh.n);
    println!(
        "mass drift: right {:.3e}, left {:.3e}; invariant violations: {}; {:.2} s",
        m.max_drift_right(),
        m.max_drift_left(),
        sol.diagnostics.invariants.violations(),
        sol.diagnostics.runtime_secs
    );
    if let (false, Some(oracle)) = (c.is_custom(), scenario_oracle(c.scenario)) {
        let err = error_vs_oracle(m, oracle, m.last_level(), c.restrict);
        println!("sup error against the stationary CDF at t = {}: {:.6e}", m.time(m.last_level()), err.sup_norm);
    }
    let files = emit_snapshots(m, &c.snapshot_times(), &c.out_dir)?;
    println!("wrote {} snapshots to {}", files.len(), c.out_dir.display());
    Ok(())
}

fn converge(c: &Config) -> Result<(), HarnessError> {
    if c.is_custom() {
        return Err(HarnessError::Config("convergence studies need a scenario with a known stationary CDF".into()));
    }
    let oracle = scenario_oracle(c.scenario)
        .ok_or_else(|| HarnessError::Config(format!("no stationary CDF known for {}", c.scenario)))?;
    let mut c = c.clone();
    c.t_end = Some(c.t_end.unwrap_or(EQUILIBRIUM_T));
    let restrict = c.restrict.unwrap_or((-0.9, 0.9));
    let report = convergence_study(&c.model()?, &default_dx(&c, true), c.safety, oracle, Some(restrict))?;
    print!("{}", report.table());
    println!("fitted slope {:.4}, restricted slope {:.4}", report.slope, report.slope_restricted);
    Ok(())
}

fn monte_carlo(c: &Config) -> Result<(), HarnessError> {
    let mut c = c.clone();
    c.t_end = Some(c.t_end.unwrap_or(EQUILIBRIUM_T));
    let model = c.model()?;
    let dx = default_dx(&c, false)[0];
    let mesh = Mesh::build(&model, dx, c.safety)?;
    let sol = solve(&model, mesh, QuadratureRule::Rectangle, SolveOptions::default())?;
    let cmp = mc_cross_check(&model, &sol.marginals, c.mc_paths, c.seed)?;
    println!("paths = {}, seed = {}, t = {}", c.mc_paths, c.seed, cmp.time);
    println!("sup distance empirical vs numerical: {:.6e}", cmp.distance);
    println!("DKW half-width at 99%: {:.6e}", cmp.empirical.dkw_band(0.01));
    if let (false, Some(oracle)) = (c.is_custom(), scenario_oracle(c.scenario)) {
        let exact: Vec<f64> = cmp.empirical.nodes.iter().map(|&x| oracle(x)).collect();
        println!("sup distance empirical vs stationary: {:.6e}", sup_distance(&cmp.empirical.values, &exact));
    }
    Ok(())
}

fn validate(c: &Config) -> Result<(), HarnessError> {
    let model = c.model()?;
    let report = validate_model(&model)?;
    println!("states: {}", report.num_states);
    for (s, l) in report.lipschitz_estimates.iter().enumerate() {
        println!("state {s}: Lipschitz estimate {l:.6}");
    }
    for w in &report.confinement_warnings {
        println!("warning: {w}");
    }
    let hazards = model.hazards()?;
    for (s, h) in hazards.iter().enumerate() {
        println!("state {s}: hazard in [{:.6}, {:.6}], lambda(0) = {:.6}", h.lambda_inf, h.lambda_sup, h.lambda_at_zero);
    }
    println!("ok");
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = load_config(&cli.common).and_then(|c| match cli.command {
        Command::Run => run(&c),
        Command::Converge => converge(&c),
        Command::Mc => monte_carlo(&c),
        Command::Validate => validate(&c),
    });
    match result {
        Ok(()) => ExitCode::from(harness::EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
