use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use conformant::generators::Family;
use conformant::names::plan_step_to_name;
use conformant::pddl::{emit_classical, load};
use conformant::pipeline::{self, PipelineError, PipelineOptions, Scheme};
use conformant::planner::Budget;
use conformant::report::RunReport;
use conformant::ConformantProblem;

#[derive(Parser)]
#[command(
    name = "conformant",
    version,
    about = "Conformant planning by translation into classical planning"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Translate a conformant problem and emit classical PDDL.
    Translate {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Translate, plan, strip inference steps, and validate.
    Solve {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Check a plan file (one action per line) against every initial state.
    Validate {
        domain: PathBuf,
        problem: PathBuf,
        plan: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Report the conformant width and per-literal witnesses.
    Width {
        domain: PathBuf,
        problem: PathBuf,
        #[command(flatten)]
        flags: Flags,
    },
    /// Generate a benchmark instance: safe N, bomb X Y, ring N,
    /// square-center N, corners-square N, sortnet N, disjtoy N, sgripper N.
    Gen {
        family: String,
        params: Vec<usize>,
        /// Directory for `<instance>-domain.pddl` and `<instance>.pddl`;
        /// both are printed to stdout when omitted.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Generate and solve instances named like `safe-10` or `bomb-20-20`.
    Bench {
        instances: Vec<String>,
        /// Number of instances solved in parallel.
        #[arg(long, env = "CONFORMANT_JOBS", default_value_t = 1)]
        jobs: usize,
        #[command(flatten)]
        flags: Flags,
    },
}

#[derive(Args, Clone)]
struct Flags {
    /// k0, ki:N, kmodels or ks0. The default ladder is ki:1 then kmodels.
    #[arg(long, env = "CONFORMANT_SCHEME")]
    scheme: Option<Scheme>,
    /// Apply the translation optimizations (default).
    #[arg(long, overrides_with = "no_opt")]
    opt: bool,
    #[arg(long, env = "CONFORMANT_NO_OPT")]
    no_opt: bool,
    /// Comma-separated caps: states=N (initial states), models=N, pi=N
    /// (prime implicate clauses), validation=N.
    #[arg(long, env = "CONFORMANT_CAPS")]
    caps: Option<String>,
    /// Comma-separated search limits: nodes=N, seconds=S.
    #[arg(long, env = "CONFORMANT_BUDGET")]
    budget: Option<String>,
    /// Use the strengthened mutex clause.
    #[arg(long, env = "CONFORMANT_STRENGTHENED_MUTEX")]
    strengthened_mutex: bool,
    /// Maximum number of copies per nondeterministic action.
    #[arg(long, env = "CONFORMANT_NONDET_COPIES")]
    nondet_copies: Option<usize>,
    /// Upper bound for the width search.
    #[arg(long, env = "CONFORMANT_WIDTH_BOUND")]
    width_bound: Option<usize>,
    /// Write the classical PDDL of the translation into this directory.
    #[arg(long, env = "CONFORMANT_EXPORT_PDDL")]
    export_pddl: Option<PathBuf>,
    /// Write the machine-readable JSON report here.
    #[arg(long, env = "CONFORMANT_REPORT")]
    report: Option<PathBuf>,
    /// Record wall-clock times in reports (makes them non-reproducible).
    #[arg(long, env = "CONFORMANT_TIMINGS")]
    timings: bool,
}

impl Flags {
    fn options(&self) -> Result<PipelineOptions> {
        let mut o = PipelineOptions {
            scheme: self.scheme,
            optimize: !self.no_opt || self.opt,
            strengthened_mutex: self.strengthened_mutex,
            width_bound: self.width_bound,
            timings: self.timings,
            ..Default::default()
        };
        if let Some(n) = self.nondet_copies {
            o.max_copies = n;
        }
        for (k, v) in key_values(self.caps.as_deref())? {
            let n: usize = v.parse().with_context(|| format!("cap {k}"))?;
            match k.as_str() {
                "states" | "initial-states" => o.state_cap = n,
                "models" => o.model_cap = n,
                "pi" => o.pi_cap = n,
                "validation" => o.validation_cap = n,
                other => bail!("unknown cap {other}"),
            }
        }
        let mut budget = Budget::default();
        for (k, v) in key_values(self.budget.as_deref())? {
            match k.as_str() {
                "nodes" => budget.max_nodes = v.parse().context("budget nodes")?,
                "seconds" => {
                    budget.max_time = Some(Duration::from_secs_f64(
                        v.parse().context("budget seconds")?,
                    ))
                }
                other => bail!("unknown budget key {other}"),
            }
        }
        o.budget = budget;
        Ok(o)
    }
}

fn key_values(s: Option<&str>) -> Result<Vec<(String, String)>> {
    let Some(s) = s else { return Ok(Vec::new()) };
    s.split(',')
        .filter(|x| !x.trim().is_empty())
        .map(|kv| match kv.split_once('=') {
            Some((k, v)) => Ok((k.trim().to_string(), v.trim().to_string())),
            None => bail!("expected key=value, got {kv}"),
        })
        .collect()
}

fn read_problem(domain: &Path, problem: &Path) -> Result<ConformantProblem> {
    let d = fs::read_to_string(domain).with_context(|| format!("reading {}", domain.display()))?;
    let p =
        fs::read_to_string(problem).with_context(|| format!("reading {}", problem.display()))?;
    load(&d, &p).context("parsing and grounding")
}

fn write_report(flags: &Flags, report: &RunReport) -> Result<()> {
    if let Some(path) = &flags.report {
        fs::write(path, report.to_json()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn export(dir: &Path, name: &str, k: &conformant::ClassicalProblem) -> Result<()> {
    fs::create_dir_all(dir)?;
    let (d, p) = emit_classical(k);
    fs::write(dir.join(format!("{name}-domain.pddl")), d)?;
    fs::write(dir.join(format!("{name}.pddl")), p)?;
    Ok(())
}

fn read_plan(path: &Path) -> Result<Vec<String>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(plan_step_to_name)
        .collect())
}

fn run() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Translate {
            domain,
            problem,
            flags,
        } => {
            let p = read_problem(&domain, &problem)?;
            let opts = flags.options()?;
            let scheme = opts.scheme.unwrap_or(Scheme::Ki(1));
            let (t, report) = pipeline::translate(&p, scheme, &opts)?;
            match &flags.export_pddl {
                Some(dir) => export(dir, &sanitize_name(&p.name), &t.classical)?,
                None => {
                    let (d, pr) = emit_classical(&t.classical);
                    println!("{d}\n{pr}");
                }
            }
            eprint!("{}", report.to_text());
            write_report(&flags, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve {
            domain,
            problem,
            flags,
        } => {
            let p = read_problem(&domain, &problem)?;
            let opts = flags.options()?;
            if let Some(dir) = &flags.export_pddl {
                let scheme = opts.scheme.unwrap_or(Scheme::Ki(1));
                let (t, _) = pipeline::translate(&p, scheme, &opts)?;
                export(dir, &sanitize_name(&p.name), &t.classical)?;
            }
            match pipeline::solve(&p, &opts) {
                Ok(res) => {
                    print!("{}", res.report.to_text());
                    write_report(&flags, &res.report)?;
                    Ok(ExitCode::SUCCESS)
                }
                Err(
                    PipelineError::NoPlanFound { report }
                    | PipelineError::BudgetExhausted { report },
                ) => {
                    print!("{}", report.to_text());
                    println!("no plan found");
                    write_report(&flags, &report)?;
                    Ok(ExitCode::from(2))
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Validate {
            domain,
            problem,
            plan,
            flags,
        } => {
            let p = read_problem(&domain, &problem)?;
            let steps = read_plan(&plan)?;
            let report = pipeline::validate(&p, &steps, &flags.options()?)?;
            print!("{}", report.to_text());
            write_report(&flags, &report)?;
            let ok = report.validation.as_ref().is_some_and(|v| v.conformant);
            Ok(if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Command::Width {
            domain,
            problem,
            flags,
        } => {
            let p = read_problem(&domain, &problem)?;
            let report = pipeline::width(&p, &flags.options()?)?;
            print!("{}", report.to_text());
            write_report(&flags, &report)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Gen {
            family,
            params,
            out_dir,
        } => {
            let f = Family::parse(&family, &params)?;
            let (d, p) = f.generate();
            match out_dir {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    let name = f.instance_name();
                    fs::write(dir.join(format!("{name}-domain.pddl")), d)?;
                    fs::write(dir.join(format!("{name}.pddl")), p)?;
                }
                None => println!("{d}\n{p}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Bench {
            instances,
            jobs,
            flags,
        } => bench(&instances, jobs.max(1), &flags),
    }
}

fn sanitize_name(name: &str) -> String {
    if name.is_empty() {
        "translated".into()
    } else {
        conformant::names::sanitize(name)
    }
}

const DEFAULT_BENCH: &[&str] = &[
    "safe-10",
    "safe-30",
    "bomb-5-5",
    "ring-3",
    "square-center-4",
    "corners-square-4",
    "sortnet-3",
    "disjtoy-4",
    "sgripper-2",
];

/// `bomb-20-20` becomes `bomb` with `[20, 20]`.
fn parse_instance(s: &str) -> Result<Family> {
    let parts: Vec<&str> = s.split('-').collect();
    let split = parts
        .iter()
        .position(|p| p.parse::<usize>().is_ok())
        .with_context(|| format!("instance {s} has no size"))?;
    let params = parts[split..]
        .iter()
        .map(|p| p.parse::<usize>())
        .collect::<Result<Vec<_>, _>>()
        .with_context(|| format!("instance {s}"))?;
    Ok(Family::parse(&parts[..split].join("-"), &params)?)
}

fn bench_one(name: &str, opts: &PipelineOptions) -> String {
    let started = Instant::now();
    let family = match parse_instance(name) {
        Ok(f) => f,
        Err(e) => return format!("{name}\terror: {e:#}"),
    };
    let (d, p) = family.generate();
    let problem = match load(&d, &p) {
        Ok(p) => p,
        Err(e) => return format!("{name}\terror: {e}"),
    };
    let ms = || started.elapsed().as_millis();
    match pipeline::solve(&problem, opts) {
        Ok(res) => {
            let width = res
                .report
                .width
                .as_ref()
                .map_or("-".into(), |w| w.width.to_string());
            let stage = res
                .report
                .stages
                .last()
                .map_or("-".into(), |s| s.scheme.clone());
            format!(
                "{name}\twidth {width}\tstage {stage}\tlength {}\tconformant\t{} ms",
                res.stripped.len(),
                ms()
            )
        }
        Err(PipelineError::NoPlanFound { .. }) => format!("{name}\tno plan\t{} ms", ms()),
        Err(PipelineError::BudgetExhausted { .. }) => {
            format!("{name}\tbudget exhausted\t{} ms", ms())
        }
        Err(e) => format!("{name}\terror: {e}"),
    }
}

fn bench(instances: &[String], jobs: usize, flags: &Flags) -> Result<ExitCode> {
    let opts = flags.options()?;
    let list: Vec<String> = if instances.is_empty() {
        DEFAULT_BENCH.iter().map(|s| s.to_string()).collect()
    } else {
        instances.to_vec()
    };
    let mut lines = vec![String::new(); list.len()];
    for (chunk_names, chunk_out) in list.chunks(jobs).zip(lines.chunks_mut(jobs)) {
        std::thread::scope(|s| {
            for (name, out) in chunk_names.iter().zip(chunk_out.iter_mut()) {
                let opts = &opts;
                s.spawn(move || *out = bench_one(name, opts));
            }
        });
    }
    for l in lines {
        println!("{l}");
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
