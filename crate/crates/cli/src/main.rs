//! `coalnet` command-line runner.
//!
//! Exit codes: 0 ok, 2 validation, 3 I/O, 4 infeasible, 5 solver error.

mod output;

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use coalnet::demand::DemandPreset;
use coalnet::optimizer::{emit_interchange, Backend, OptimizerError, Status};
use coalnet::scenarios::{
    apply_scenario, calibrate, load_actuals, preset, preset_names, prepare_year, run_scenarios, run_sweep, Bundle,
    Mutation, RunOptions, ScenarioError, ScenarioSpec, SweepGrid, SweepSector,
};
use coalnet::Year;
use output::{Manifest, RunDir};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "coalnet", version, about = "Coal supply network model runner")]
struct Cli {
    /// Input bundle directory.
    #[arg(long, global = true, default_value = ".")]
    bundle: PathBuf,
    /// Root of all run outputs; nothing is written elsewhere.
    #[arg(long, global = true, default_value = "results")]
    out: PathBuf,
    /// `embedded` or `external:<cmd>` with `{input}` and `{output}`
    /// placeholders. Defaults to $COALNET_SOLVER, then `embedded`.
    #[arg(long, global = true)]
    solver: Option<String>,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the bundle; exit 0 iff clean.
    Validate,
    /// Solve one scenario (baseline by default) for the given years.
    Solve(SolveArgs),
    /// Demand-growth sweep for one sector.
    Sweep(SweepArgs),
    #[command(subcommand)]
    Scenario(ScenarioCommand),
    /// Solve historical years and compare with reported imports.
    Calibrate(CalibrateArgs),
    /// Write the LP without solving.
    EmitLp(EmitArgs),
}

#[derive(Subcommand, Debug)]
enum ScenarioCommand {
    /// Run a bundled scenario or a scenario TOML file.
    Run(ScenarioRunArgs),
    /// List bundled scenarios.
    List,
}

#[derive(Args, Debug, Clone)]
struct RunFlags {
    /// Years to solve, comma separated.
    #[arg(long, value_delimiter = ',')]
    year: Vec<Year>,
    /// National demand trajectory, applied before the scenario's own changes.
    #[arg(long)]
    preset: Option<PresetArg>,
    /// Skip the base-year depletion screen.
    #[arg(long)]
    no_depletion: bool,
    /// Lift mine capacities to their ten-year running maximum.
    #[arg(long)]
    relax: bool,
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Bundled scenario name or path to a scenario TOML file.
    #[arg(long, default_value = "baseline")]
    scenario: String,
    #[command(flatten)]
    run: RunFlags,
    /// `only` writes the LP and skips the solve; `also` writes it next to
    /// the results.
    #[arg(long)]
    emit_lp: Option<EmitMode>,
}

#[derive(Args, Debug)]
struct ScenarioRunArgs {
    name: String,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args, Debug)]
struct EmitArgs {
    #[arg(long, default_value = "baseline")]
    scenario: String,
    #[command(flatten)]
    run: RunFlags,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, value_enum)]
    sector: SectorArg,
    /// Consumption growth rates as fractions, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-0.02,-0.01,0,0.01,0.02")]
    cagr: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "2025,2030")]
    year: Vec<Year>,
    /// Never apply the running-maximum relaxation to thermal runs.
    #[arg(long)]
    no_relax_rule: bool,
    #[arg(long)]
    no_depletion: bool,
}

#[derive(Args, Debug)]
struct CalibrateArgs {
    /// `year,origin,imports_Mt` table; defaults to `actuals.csv` in the bundle.
    #[arg(long)]
    actuals: Option<PathBuf>,
    /// Defaults to every configured year up to the base year.
    #[arg(long, value_delimiter = ',')]
    year: Vec<Year>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EmitMode {
    Only,
    Also,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum PresetArg {
    Sps,
    Sds,
}

impl From<PresetArg> for DemandPreset {
    fn from(p: PresetArg) -> Self {
        match p {
            PresetArg::Sps => DemandPreset::Sps,
            PresetArg::Sds => DemandPreset::Sds,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SectorArg {
    Thermal,
    Coking,
}

/// A run that stopped early, with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    const VALIDATION: u8 = 2;
    const IO: u8 = 3;
    const INFEASIBLE: u8 = 4;
    const SOLVER: u8 = 5;

    fn new(code: u8, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = if e.is_io() {
            Failure::IO
        } else if matches!(e, ScenarioError::Optimizer(OptimizerError::Solver(_))) {
            Failure::SOLVER
        } else {
            Failure::VALIDATION
        };
        Failure::new(code, e.to_string())
    }
}

impl From<coalnet::io::IoError> for Failure {
    fn from(e: coalnet::io::IoError) -> Self {
        let code = if e.is_io() { Failure::IO } else { Failure::VALIDATION };
        Failure::new(code, e.to_string())
    }
}

fn status_code(s: Status) -> u8 {
    match s {
        Status::Optimal => 0,
        Status::Infeasible => Failure::INFEASIBLE,
        Status::Unbounded | Status::SolverError => Failure::SOLVER,
    }
}

struct Ctx {
    bundle_dir: PathBuf,
    out: PathBuf,
    backend: Backend,
    bundle: Bundle,
    digest: String,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<u8, Failure> {
    if let Command::Scenario(ScenarioCommand::List) = cli.command {
        for name in preset_names() {
            println!("{name}");
        }
        return Ok(0);
    }
    let backend = match &cli.solver {
        Some(s) => s.parse(),
        None => Backend::from_env(),
    }
    .map_err(|e| Failure::new(Failure::VALIDATION, e.to_string()))?;
    let ctx = load(&cli.bundle, &cli.out, backend)?;
    match cli.command {
        Command::Validate => {
            println!("{}: clean", ctx.bundle_dir.display());
            Ok(0)
        }
        Command::Solve(a) => match a.emit_lp {
            Some(EmitMode::Only) => emit_only(&ctx, &a.scenario, &a.run),
            mode => solve_years(&ctx, &a.scenario, &a.run, "solve", mode == Some(EmitMode::Also)),
        },
        Command::Scenario(ScenarioCommand::Run(a)) => solve_years(&ctx, &a.name, &a.run, "scenario run", false),
        Command::Scenario(ScenarioCommand::List) => unreachable!(),
        Command::EmitLp(a) => emit_only(&ctx, &a.scenario, &a.run),
        Command::Sweep(a) => sweep(&ctx, &a),
        Command::Calibrate(a) => calibration(&ctx, &a),
    }
}

/// Loads and validates the bundle. Every command but `scenario list` goes
/// through here.
fn load(dir: &Path, out: &Path, backend: Backend) -> Result<Ctx, Failure> {
    let (bundle, warnings) = Bundle::load(dir)?;
    for w in &warnings {
        log::warn!("{w}");
    }
    let violations = bundle.validate();
    if !violations.is_empty() {
        for v in &violations {
            eprintln!("{v}");
        }
        return Err(Failure::new(
            Failure::VALIDATION,
            format!("{}: {} validation failure(s)", dir.display(), violations.len()),
        ));
    }
    let digest = bundle.digest();
    Ok(Ctx {
        bundle_dir: dir.to_path_buf(),
        out: out.to_path_buf(),
        backend,
        bundle,
        digest,
    })
}

/// Bundled scenario by name, or a TOML file when `name` is a path to one.
fn resolve_spec(name: &str, preset_arg: Option<PresetArg>) -> Result<ScenarioSpec, Failure> {
    let path = Path::new(name);
    let mut spec = if path.extension().is_some_and(|x| x == "toml") {
        let text = std::fs::read_to_string(path).map_err(|e| Failure::new(Failure::IO, format!("{name}: {e}")))?;
        ScenarioSpec::from_toml(&text)?
    } else {
        preset(name)?
    };
    if let Some(p) = preset_arg {
        spec.mutations.insert(0, Mutation::DemandPreset { preset: p.into() });
    }
    Ok(spec)
}

fn years_or_base(ctx: &Ctx, years: &[Year]) -> Vec<Year> {
    if years.is_empty() {
        vec![ctx.bundle.base_year()]
    } else {
        years.to_vec()
    }
}

fn options(ctx: &Ctx, flags: &RunFlags) -> RunOptions {
    RunOptions {
        backend: ctx.backend.clone(),
        depletion: !flags.no_depletion,
        relax: flags.relax,
    }
}

fn solve_years(ctx: &Ctx, name: &str, flags: &RunFlags, command: &str, emit_lp: bool) -> Result<u8, Failure> {
    let spec = resolve_spec(name, flags.preset)?;
    let years = years_or_base(ctx, &flags.year);
    let opts = options(ctx, flags);
    let t0 = Instant::now();
    let results = run_scenarios(&ctx.bundle, std::slice::from_ref(&spec), &years, &opts);
    let wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    let mut code = 0;
    for (year, res) in years.iter().zip(results) {
        let out = res?;
        let r = &out.result;
        let dir = RunDir::create(&ctx.out, &format!("{}-{year}", spec.name))?;
        let mut files = vec!["manifest.json"];
        if out.solution.is_optimal() {
            dir.write("flows.csv", &coalnet::report::flows_csv(&out.prepared.problem, &out.solution))?;
            dir.write("imports_by_origin.csv", &coalnet::report::imports_csv(&r.scenario, *year, &r.supply))?;
            dir.write(
                "report.csv",
                &coalnet::report::origin_table(&r.scenario, *year, &r.supply).to_csv(),
            )?;
            files.extend(["flows.csv", "imports_by_origin.csv", "report.csv"]);
        }
        if emit_lp {
            dir.write("model.lp", &emit_interchange(&out.prepared.problem))?;
            files.push("model.lp");
        }
        let mut m = Manifest::new(ctx, command, &dir, &spec, &[*year], &opts);
        m.status = r.status.to_string();
        m.objective = r.objective;
        m.timings.prepare_ms = out.timings.prepare_ms;
        m.timings.solve_ms = out.timings.solve_ms;
        m.timings.wall_ms = wall_ms;
        m.message = r.diagnostics.message.clone();
        m.depleted = r.diagnostics.depleted.iter().map(|d| d.mine_id.clone()).collect();
        m.warnings = r.diagnostics.warnings.clone();
        m.balance_clean = Some(r.diagnostics.balance_clean);
        m.files = files;
        dir.write_manifest(&m)?;
        match r.objective {
            Some(obj) => println!(
                "{} {year} {} objective={} imports_Mt={:.3} -> {}",
                r.scenario,
                r.status,
                coalnet::report::format_value(obj),
                r.imports(None),
                dir.path().display()
            ),
            None => println!("{} {year} {} -> {}", r.scenario, r.status, dir.path().display()),
        }
        if let Some(msg) = &r.diagnostics.message {
            eprintln!("{} {year}: {msg}", r.scenario);
        }
        code = code.max(status_code(r.status));
    }
    Ok(code)
}

fn emit_only(ctx: &Ctx, name: &str, flags: &RunFlags) -> Result<u8, Failure> {
    let spec = resolve_spec(name, flags.preset)?;
    let bundle = apply_scenario(&ctx.bundle, &spec)?;
    let opts = options(ctx, flags);
    for year in years_or_base(ctx, &flags.year) {
        let t0 = Instant::now();
        let prepared = prepare_year(&bundle, year)?;
        let dir = RunDir::create(&ctx.out, &format!("{}-{year}", spec.name))?;
        dir.write("model.lp", &emit_interchange(&prepared.problem))?;
        let mut m = Manifest::new(ctx, "emit-lp", &dir, &spec, &[year], &opts);
        m.status = "not_solved".into();
        m.timings.prepare_ms = t0.elapsed().as_secs_f64() * 1e3;
        m.warnings = prepared.warnings;
        m.files = vec!["manifest.json", "model.lp"];
        dir.write_manifest(&m)?;
        println!(
            "{} {year}: {} variables, {} rows -> {}",
            spec.name,
            prepared.problem.vars.len(),
            prepared.problem.rows.len(),
            dir.path().join("model.lp").display()
        );
    }
    Ok(0)
}

fn sweep(ctx: &Ctx, a: &SweepArgs) -> Result<u8, Failure> {
    let sector = match a.sector {
        SectorArg::Thermal => SweepSector::Thermal,
        SectorArg::Coking => SweepSector::Coking,
    };
    if a.cagr.is_empty() || a.year.is_empty() {
        return Err(Failure::new(Failure::VALIDATION, "empty sweep grid"));
    }
    let mut grid = SweepGrid::new(sector, a.cagr.clone());
    grid.years = a.year.clone();
    if a.no_relax_rule {
        grid.relax = None;
    }
    let opts = RunOptions {
        backend: ctx.backend.clone(),
        depletion: !a.no_depletion,
        relax: false,
    };
    let t0 = Instant::now();
    let set = run_sweep(&grid, &ctx.bundle, &opts)?;
    let sector_name = match sector {
        SweepSector::Thermal => "thermal",
        SweepSector::Coking => "coking",
    };
    let dir = RunDir::create(&ctx.out, &format!("sweep-{sector_name}"))?;
    dir.write("sweep.csv", &output::sweep_table(&set).to_csv())?;
    dir.write("cagr.csv", &output::cagr_csv(&set))?;
    let spec = ScenarioSpec {
        name: format!("sweep_{sector_name}"),
        description: String::new(),
        mutations: Vec::new(),
    };
    let mut m = Manifest::new(ctx, "sweep", &dir, &spec, &grid.years, &opts);
    m.sweep = Some(grid.clone());
    let code = set.runs.iter().map(|r| status_code(r.result.status)).max().unwrap_or(0);
    let failed = set.runs.iter().filter(|r| r.result.status != Status::Optimal).count();
    m.status = if failed == 0 { "optimal".into() } else { format!("{failed} run(s) not optimal") };
    m.timings.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    m.files = vec!["manifest.json", "sweep.csv", "cagr.csv"];
    dir.write_manifest(&m)?;
    for r in &set.runs {
        println!(
            "{sector_name} cagr={:+.4} {} {} import_cagr={}",
            r.cagr,
            r.result.year,
            r.result.status,
            r.total_import_cagr.map(|g| format!("{g:+.4}")).unwrap_or_else(|| "n/a".into())
        );
    }
    Ok(code)
}

fn calibration(ctx: &Ctx, a: &CalibrateArgs) -> Result<u8, Failure> {
    let path = a.actuals.clone().unwrap_or_else(|| ctx.bundle_dir.join("actuals.csv"));
    let actuals = load_actuals(&path)?;
    let base = ctx.bundle.base_year();
    let years: Vec<Year> = if a.year.is_empty() {
        ctx.bundle.settings.years.iter().copied().filter(|y| *y <= base).collect()
    } else {
        a.year.clone()
    };
    let opts = RunOptions {
        backend: ctx.backend.clone(),
        depletion: false,
        relax: false,
    };
    let t0 = Instant::now();
    let report = calibrate(&ctx.bundle, &years, &actuals, &opts)?;
    let dir = RunDir::create(&ctx.out, "calibration")?;
    dir.write("calibration.csv", &report.to_csv())?;
    dir.write("report.csv", &report.to_table().to_csv())?;
    let mut m = Manifest::new(ctx, "calibrate", &dir, &ScenarioSpec::baseline(), &years, &opts);
    m.status = if report.failed.is_empty() { "optimal".into() } else { format!("{} year(s) failed", report.failed.len()) };
    m.timings.wall_ms = t0.elapsed().as_secs_f64() * 1e3;
    m.files = vec!["manifest.json", "calibration.csv", "report.csv"];
    dir.write_manifest(&m)?;
    for (y, why) in &report.failed {
        eprintln!("calibration {y}: {why}");
    }
    println!("calibration: {} rows -> {}", report.rows.len(), dir.path().display());
    Ok(if report.failed.is_empty() { 0 } else { Failure::INFEASIBLE })
}
