//! The `mchap` command line: `generate`, `solve` and `compare`.

use crate::format::{read_instance, write_instance, write_solution, write_trace};
use crate::report::{bounds_summary, bounds_table, runs_table, summary_table, BoundRow, RunRow};
use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use mchap_core::instance::{generate, GeneratorParams, MarRule};
use mchap_core::lamt2::{lp_bound, solve_lamt2, Formulation};
use mchap_core::oracle::brute_force_opt;
use mchap_core::{solve_bp, Budget, Clock, Instance, Method, Solution, SolveStats, Status};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

/// Extension of instance files written by `generate` and read by `compare`.
pub const INSTANCE_EXT: &str = "inst";

#[derive(Debug, Parser)]
#[command(name = "mchap", version, about = "Exact solvers for MAR-constrained spectrum hole assignment")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write seeded random instances.
    Generate(GenerateArgs),
    /// Solve one instance.
    Solve(SolveArgs),
    /// Run several methods over a directory of instances.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Number of holes.
    #[arg(long)]
    pub m: usize,
    /// Number of users.
    #[arg(long)]
    pub n: usize,
    /// Fraction of the band that is available.
    #[arg(long)]
    pub q: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// `prop LO HI` (multiples of the demand), `fixed V` or `window LO HI` (MHz).
    #[arg(long, num_args = 2..=3, value_names = ["RULE", "VALUE"], default_values = ["prop", "2", "3"])]
    pub delta_rule: Vec<String>,
    /// Demand range in MHz.
    #[arg(long, num_args = 2, value_names = ["LO", "HI"], default_values = ["10", "25"])]
    pub demand: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub units_per_mhz: u32,
    /// Number of instances; seeds run from `--seed` upwards.
    #[arg(long, default_value_t = 1)]
    pub count: u64,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    #[value(name = "bp-sep1")]
    BpSep1,
    #[value(name = "bp-sep2")]
    BpSep2,
    #[value(name = "lam-t2")]
    LamT2,
    #[value(name = "brute")]
    Brute,
}

impl MethodArg {
    pub fn name(self) -> &'static str {
        match self {
            MethodArg::BpSep1 => "bp-sep1",
            MethodArg::BpSep2 => "bp-sep2",
            MethodArg::LamT2 => "lam-t2",
            MethodArg::Brute => "brute",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "bp-sep2")]
    pub method: MethodArg,
    /// Seconds.
    #[arg(long, env = "MCHAP_TIME_LIMIT", default_value_t = 600.0)]
    pub time_limit: f64,
    /// Write the solution here.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Write the search log here (standard error if no file is given).
    #[arg(long, num_args = 0..=1, value_name = "FILE")]
    pub trace: Option<Option<PathBuf>>,
    /// Aligned table instead of CSV.
    #[arg(long)]
    pub pretty: bool,
    /// Add an elapsed-seconds column.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Directory of `.inst` files.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "bp-sep1,bp-sep2,lam-t2")]
    pub methods: Vec<MethodArg>,
    /// Seconds per run.
    #[arg(long, env = "MCHAP_TIME_LIMIT", default_value_t = 600.0)]
    pub time_limit: f64,
    /// Instances solved in parallel.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Report root LP bounds and gaps of both models instead of full runs.
    #[arg(long)]
    pub bounds_only: bool,
    /// Also write the one-row summary (means and time-limit counts) here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    /// Aligned table instead of CSV.
    #[arg(long)]
    pub pretty: bool,
    /// Add an elapsed-seconds column.
    #[arg(long)]
    pub timing: bool,
}

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    /// A solve stopped at its time limit.
    TimeLimit,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::TimeLimit => 3,
        }
    }
}

/// Wall-clock seconds since construction.
pub struct InstantClock(Instant);

impl InstantClock {
    pub fn start() -> Self {
        Self(Instant::now())
    }
}

impl Clock for InstantClock {
    fn elapsed_secs(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<Outcome> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a, stdout),
        Command::Solve(a) => cmd_solve(&a, stdout),
        Command::Compare(a) => cmd_compare(&a, stdout),
    }
}

fn mar_rule(args: &[String]) -> Result<MarRule> {
    let num = |s: &String| s.parse::<f64>().with_context(|| format!("`{s}` is not a number"));
    Ok(match (args[0].as_str(), &args[1..]) {
        ("prop", [lo, hi]) => MarRule::Proportional { lo: num(lo)?, hi: num(hi)? },
        ("fixed", [v]) => MarRule::Fixed(num(v)?),
        ("window", [lo, hi]) => MarRule::Window { lo: num(lo)?, hi: num(hi)? },
        _ => bail!("--delta-rule takes `prop LO HI`, `fixed V` or `window LO HI`"),
    })
}

pub fn instance_file_name(m: usize, n: usize, q: f64, seed: u64) -> String {
    format!("m{m}_n{n}_q{q}_s{seed}.{INSTANCE_EXT}")
}

pub fn cmd_generate(a: &GenerateArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    let rule = mar_rule(&a.delta_rule)?;
    if !(a.demand[0] > 0.0 && a.demand[0] <= a.demand[1]) {
        bail!("--demand needs 0 < LO <= HI");
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    for k in 0..a.count {
        let seed = a.seed.checked_add(k).context("seed overflow")?;
        let mut params = GeneratorParams::tv_band(a.m, a.n, a.q, seed).with_mar_rule(rule);
        params.units_per_mhz = a.units_per_mhz;
        let band_mhz = (470.0, 862.0);
        let scale = a.units_per_mhz as f64;
        params.band = ((band_mhz.0 * scale) as i64, (band_mhz.1 * scale) as i64);
        params.demand_mhz = (a.demand[0], a.demand[1]);
        let inst = generate(&params).context("generating instance")?;
        let path = a.out.join(instance_file_name(a.m, a.n, a.q, seed));
        std::fs::write(&path, write_instance(&inst)).with_context(|| format!("writing {}", path.display()))?;
        writeln!(stdout, "{}", path.display())?;
    }
    Ok(Outcome::Done)
}

pub fn load_instance(path: &Path) -> Result<Instance> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_instance(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Runs one method under a wall-clock limit.
pub fn solve_with(instance: &Instance, method: MethodArg, time_limit: f64) -> Result<Solution> {
    let clock = InstantClock::start();
    let budget = Budget::new(&clock, Some(time_limit));
    let sol = match method {
        MethodArg::BpSep1 => solve_bp(instance, Method::Sep1, &budget)?,
        MethodArg::BpSep2 => solve_bp(instance, Method::Sep2, &budget)?,
        MethodArg::LamT2 => solve_lamt2(instance, &budget)?,
        MethodArg::Brute => {
            let exact = brute_force_opt(instance)?;
            let stats = SolveStats { elapsed: clock.elapsed_secs(), ..SolveStats::default() };
            Solution::new(instance, exact.assignment, Status::ProvenOptimal, stats)
        }
    };
    sol.validate(instance).context("solver returned an invalid assignment")?;
    Ok(sol)
}

fn instance_id(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

pub fn cmd_solve(a: &SolveArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    check_time_limit(a.time_limit)?;
    let inst = load_instance(&a.instance)?;
    let sol = solve_with(&inst, a.method, a.time_limit)?;
    if let Some(path) = &a.out {
        std::fs::write(path, write_solution(a.method.name(), &sol)).with_context(|| format!("writing {}", path.display()))?;
    }
    match &a.trace {
        Some(Some(path)) => std::fs::write(path, write_trace(&sol.trace)).with_context(|| format!("writing {}", path.display()))?,
        Some(None) => eprint!("{}", write_trace(&sol.trace)),
        None => {}
    }
    let row = RunRow::new(&instance_id(&a.instance), a.method.name(), &sol);
    write!(stdout, "{}", runs_table(&[row], a.timing).render(a.pretty))?;
    Ok(if sol.status == Status::FeasibleTimeLimit { Outcome::TimeLimit } else { Outcome::Done })
}

fn check_time_limit(t: f64) -> Result<()> {
    if !(t >= 0.0) {
        bail!("time limit must be a non-negative number of seconds");
    }
    Ok(())
}

/// Instance files of a directory in name order.
pub fn instance_files(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).with_context(|| format!("reading directory {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == INSTANCE_EXT) {
            files.push(path);
        }
    }
    files.sort();
    if files.is_empty() {
        bail!("no .{INSTANCE_EXT} files in {}", dir.display());
    }
    Ok(files)
}

/// `f` over `items` on up to `jobs` threads, results in input order.
fn parallel_map<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(item) = items.get(k) else { break };
                let r = f(item);
                out.lock().expect("no worker panicked while holding the lock")[k] = Some(r);
            });
        }
    });
    out.into_inner().expect("workers joined").into_iter().map(|r| r.expect("every item processed")).collect()
}

pub fn cmd_compare(a: &CompareArgs, stdout: &mut dyn Write) -> Result<Outcome> {
    check_time_limit(a.time_limit)?;
    if a.methods.is_empty() {
        bail!("--methods is empty");
    }
    let files = instance_files(&a.dir)?;
    let instances = files
        .iter()
        .map(|p| Ok((instance_id(p), load_instance(p)?)))
        .collect::<Result<Vec<(String, Instance)>>>()?;
    if a.bounds_only {
        let rows = parallel_map(&instances, a.jobs, |(id, inst)| -> Result<BoundRow> {
            let best = solve_with(inst, MethodArg::BpSep2, a.time_limit)?;
            Ok(BoundRow {
                instance: id.clone(),
                objective: best.objective,
                status: best.status.to_string(),
                bilp: lp_bound(inst, Formulation::Bilp)?,
                lamt2: lp_bound(inst, Formulation::LamT2)?,
            })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
        write!(stdout, "{}", bounds_table(&rows).render(a.pretty))?;
        if let Some(path) = &a.summary {
            std::fs::write(path, bounds_summary(&rows).render(a.pretty))?;
        }
        return Ok(Outcome::Done);
    }
    let runs = parallel_map(&instances, a.jobs, |(id, inst)| -> Result<Vec<RunRow>> {
        a.methods
            .iter()
            .map(|&m| {
                let sol = solve_with(inst, m, a.time_limit).with_context(|| format!("{} on {id}", m.name()))?;
                Ok(RunRow::new(id, m.name(), &sol))
            })
            .collect()
    });
    let mut rows = Vec::new();
    for r in runs {
        rows.extend(r?);
    }
    write!(stdout, "{}", runs_table(&rows, a.timing).render(a.pretty))?;
    if let Some(path) = &a.summary {
        let names: Vec<&str> = a.methods.iter().map(|m| m.name()).collect();
        std::fs::write(path, summary_table(&rows, &names, a.timing).render(a.pretty))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(Outcome::Done)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_delta_rules() {
        let s = |v: &[&str]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>();
        assert_eq!(mar_rule(&s(&["prop", "2", "3"])).unwrap(), MarRule::Proportional { lo: 2.0, hi: 3.0 });
        assert_eq!(mar_rule(&s(&["fixed", "45"])).unwrap(), MarRule::Fixed(45.0));
        assert_eq!(mar_rule(&s(&["window", "30", "60"])).unwrap(), MarRule::Window { lo: 30.0, hi: 60.0 });
        assert!(mar_rule(&s(&["fixed", "4", "5"])).is_err());
        assert!(mar_rule(&s(&["prop", "x", "3"])).is_err());
    }

    #[test]
    fn parallel_map_keeps_order() {
        let v: Vec<u64> = (0..50).collect();
        assert_eq!(parallel_map(&v, 4, |x| x * x), v.iter().map(|x| x * x).collect::<Vec<_>>());
        assert!(parallel_map(&[] as &[u64], 3, |x| *x).is_empty());
    }

    #[test]
    fn cli_shape() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
