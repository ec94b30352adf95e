//! `twoval` command line: run policies, compute optima, compare, sweep the
//! ratio curves, verify the property suite and generate instances.
//!
//! Exit codes: 0 success, 1 domain error (bad instance, guard exceeded,
//! failed property), 2 usage error.

use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgGroup, Parser, Subcommand};

use twoval_core::analysis::{self, Ratio};
use twoval_core::model::{self, GenParams, Instance, Schedule};
use twoval_core::offline;
use twoval_core::scheduling::{self, PolicyKind};
use twoval_core::verify::{self, SuiteConfig};
use twoval_core::Slot;

/// Seed used by randomized commands when `--seed` is not given.
pub const DEFAULT_SEED: u64 = 0xD1CE;

fn parse_seed(s: &str) -> Result<u64, String> {
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|e| format!("invalid seed '{s}': {e}"))
}

#[derive(Debug, Parser)]
#[command(name = "twoval", version, about = "Two-valued bounded-delay buffer management experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one policy and print the slot-by-slot schedule.
    Run {
        #[arg(long)]
        instance: PathBuf,
        /// greedy | pedf | edf | detswitch | barely | rmix
        #[arg(long)]
        policy: PolicyKind,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        /// Heavy weight for detswitch/barely; defaults to the instance's alpha.
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Compute an optimal offline schedule.
    Opt {
        #[arg(long)]
        instance: PathBuf,
        /// Use the exhaustive oracle instead of the matching solver.
        #[arg(long)]
        brute: bool,
    },
    /// Profits, ratios and profile counts of every policy on one instance.
    Compare {
        #[arg(long)]
        instance: PathBuf,
        /// Defaults to the instance's alpha.
        #[arg(long)]
        alpha: Option<f64>,
        /// Monte Carlo trials for Rmix.
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
    },
    /// Write the closed-form ratio curves as CSV.
    Sweep {
        #[arg(long)]
        alpha_min: f64,
        #[arg(long)]
        alpha_max: f64,
        #[arg(long)]
        step: f64,
        #[arg(long)]
        out: PathBuf,
        /// Add measured worst ratios on the two lower-bound instances.
        #[arg(long)]
        measured: bool,
    },
    /// Run the property suite over a seeded random corpus.
    Verify {
        /// Single alpha; defaults to 1.2, 2, 1+sqrt(2) and 4.
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 10_000)]
        instances: usize,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        #[arg(long, default_value_t = 2_000)]
        oracle_instances: usize,
        #[arg(long, default_value_t = 20_000)]
        barely_trials: u64,
        /// Also search all tiny instances for the worst Barely-Random ratio.
        #[arg(long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 2, requires = "exhaustive")]
        horizon: Slot,
        #[arg(long, default_value_t = 3, requires = "exhaustive")]
        jobs: usize,
    },
    /// Write a lower-bound instance or a seeded random instance.
    #[command(group(ArgGroup::new("kind").required(true).args(["sigma", "random"])))]
    Gen {
        /// 1 or 2: the lower-bound instance to write.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        sigma: Option<u8>,
        #[arg(long)]
        random: bool,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 10, requires = "random")]
        horizon: Slot,
        #[arg(long, default_value_t = 8, requires = "random")]
        jobs: u32,
        #[arg(long, default_value_t = 0.5, requires = "random")]
        heavy_prob: f64,
        #[arg(long, default_value_t = 3, requires = "random")]
        max_span: Slot,
        #[arg(long, default_value_t = DEFAULT_SEED, value_parser = parse_seed)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Domain failure carried to exit code 1.
#[derive(Debug)]
struct Failure(String);

impl<E: std::error::Error> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command, writing
/// to `out` and `err`. Returns the process exit code.
pub fn execute<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = out.write_all(text.as_bytes());
                    0
                }
                _ => {
                    let _ = err.write_all(text.as_bytes());
                    2
                }
            };
        }
    };
    let mut buf = String::new();
    let result = dispatch(cli.command, &mut buf);
    let _ = out.write_all(buf.as_bytes());
    match result {
        Ok(()) => 0,
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn dispatch(command: Command, out: &mut String) -> CmdResult {
    match command {
        Command::Run {
            instance,
            policy,
            seed,
            alpha,
        } => cmd_run(&instance, policy, seed, alpha, out),
        Command::Opt { instance, brute } => cmd_opt(&instance, brute, out),
        Command::Compare {
            instance,
            alpha,
            trials,
            seed,
        } => cmd_compare(&instance, alpha, trials, seed, out),
        Command::Sweep {
            alpha_min,
            alpha_max,
            step,
            out: path,
            measured,
        } => cmd_sweep(alpha_min, alpha_max, step, &path, measured, out),
        Command::Verify {
            alpha,
            instances,
            seed,
            oracle_instances,
            barely_trials,
            exhaustive,
            horizon,
            jobs,
        } => {
            let mut cfg = SuiteConfig {
                instances,
                oracle_instances,
                barely_trials,
                seed,
                exhaustive: exhaustive.then_some((horizon, jobs)),
                ..SuiteConfig::default()
            };
            if let Some(a) = alpha {
                cfg.alphas = vec![model::check_alpha(a)?];
            }
            cmd_verify(&cfg, out)
        }
        Command::Gen {
            sigma,
            random: _,
            alpha,
            horizon,
            jobs,
            heavy_prob,
            max_span,
            seed,
            out: path,
        } => {
            let inst = match sigma {
                Some(which) => {
                    let (s1, s2) = model::sigma_instances(alpha)?;
                    if which == 1 {
                        s1
                    } else {
                        s2
                    }
                }
                None => model::random_instance(&GenParams {
                    horizon,
                    job_count: jobs,
                    heavy_probability: heavy_prob,
                    max_span,
                    seed,
                    alpha,
                })?,
            };
            let text = inst.to_json() + "\n";
            match path {
                Some(p) => {
                    fs::write(&p, text).map_err(|e| Failure(format!("{}: {e}", p.display())))?;
                    let _ = writeln!(out, "wrote {} jobs to {}", inst.len(), p.display());
                }
                None => out.push_str(&text),
            }
            Ok(())
        }
    }
}

fn load(path: &Path) -> Result<Instance, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let inst = Instance::from_json(&text)?;
    inst.validate()?;
    Ok(inst)
}

fn resolve_alpha(inst: &Instance, alpha: Option<f64>) -> Result<f64, Failure> {
    let a = alpha
        .or(inst.alpha)
        .ok_or_else(|| Failure("alpha is required (--alpha or an alpha field in the instance)".into()))?;
    Ok(model::check_alpha(a)?)
}

fn write_schedule(inst: &Instance, sched: &Schedule, out: &mut String) {
    for t in 0..inst.horizon() {
        match sched.job_at(t).and_then(|id| inst.job(id)) {
            Some(j) => {
                let _ = writeln!(
                    out,
                    "slot {t}: job {} (r={} d={} w={})",
                    j.id, j.release, j.deadline, j.weight
                );
            }
            None => {
                let _ = writeln!(out, "slot {t}: idle");
            }
        }
    }
}

fn cmd_run(
    path: &Path,
    kind: PolicyKind,
    seed: u64,
    alpha: Option<f64>,
    out: &mut String,
) -> CmdResult {
    let inst = load(path)?;
    let alpha = match kind {
        PolicyKind::DetSwitch | PolicyKind::BarelyRandom => resolve_alpha(&inst, alpha)?,
        _ => alpha.or(inst.alpha).unwrap_or(f64::NAN),
    };
    let policy = kind.with(alpha, seed);
    let sched = scheduling::run_policy(&inst, &policy)?;
    let _ = write!(out, "policy: {kind}");
    match kind {
        PolicyKind::DetSwitch => {
            let _ = write!(out, " (runs {})", scheduling::det_switch_choice(alpha));
        }
        PolicyKind::BarelyRandom => {
            let branch = scheduling::barely_random_branch(alpha, seed)?;
            let _ = write!(out, " (seed {seed}, branch {branch})");
        }
        PolicyKind::Rmix => {
            let _ = write!(out, " (seed {seed})");
        }
        _ => {}
    }
    out.push('\n');
    write_schedule(&inst, &sched, out);
    let _ = writeln!(out, "jobs: {}", sched.len());
    let _ = writeln!(out, "profit: {}", sched.profit());
    Ok(())
}

fn cmd_opt(path: &Path, brute: bool, out: &mut String) -> CmdResult {
    let inst = load(path)?;
    let opt = if brute {
        offline::brute_force_optimal(&inst)?
    } else {
        offline::optimal_schedule(&inst)?
    };
    let method = match opt.method {
        offline::OptMethod::MatroidGreedy => "matroid_greedy",
        offline::OptMethod::BruteForce => "brute_force",
    };
    let _ = writeln!(out, "method: {method}");
    write_schedule(&inst, &opt.schedule, out);
    let _ = writeln!(out, "value: {}", opt.value);
    Ok(())
}

fn cmd_compare(
    path: &Path,
    alpha: Option<f64>,
    trials: u64,
    seed: u64,
    out: &mut String,
) -> CmdResult {
    let mut inst = load(path)?;
    let alpha = resolve_alpha(&inst, alpha)?;
    if !inst.weights_within(alpha) {
        return Err(Failure(format!("instance is not two-valued for alpha={alpha}")));
    }
    inst.alpha = Some(alpha);
    let opt = offline::optimal_schedule(&inst)?.value;

    let _ = writeln!(out, "alpha: {alpha}");
    let _ = writeln!(out, "opt: {opt}");
    let _ = writeln!(out, "{:<10} {:<24} {:<24} note", "policy", "profit", "ratio");
    for kind in PolicyKind::ALL {
        let policy = kind.with(alpha, seed);
        let (profit, note) = match kind {
            PolicyKind::BarelyRandom => (
                scheduling::barely_random_expected_profit(&inst, alpha)?,
                format!("exact expectation, p={}", analysis::mix_p(alpha)?),
            ),
            PolicyKind::Rmix => {
                let est = analysis::monte_carlo_profit(&inst, &policy, trials, seed)?;
                (est.mean, format!("monte carlo, {trials} trials, se={}", est.std_error))
            }
            PolicyKind::DetSwitch => (
                scheduling::run_policy(&inst, &policy)?.profit(),
                format!("runs {}", scheduling::det_switch_choice(alpha)),
            ),
            _ => (scheduling::run_policy(&inst, &policy)?.profit(), String::new()),
        };
        let ratio = Ratio::of(opt, profit);
        let _ = writeln!(out, "{:<10} {:<24} {:<24} {note}", kind.name(), profit, ratio.to_string());
    }

    let c = analysis::profile_counts(&inst)?;
    let _ = writeln!(
        out,
        "profile: d={} h*={} h={} l={} l'={}",
        c.d, c.h_star, c.h, c.l, c.l_prime
    );
    let verdict = |ok: bool| if ok { "holds" } else { "VIOLATED" };
    let _ = writeln!(out, "d + h* <= h: {}", verdict(c.claim_holds()));
    let _ = writeln!(out, "d + h* + h + l == h + l': {}", verdict(c.slot_balance_holds()));
    let _ = writeln!(out, "R(alpha): {}", analysis::ratio_r(alpha)?);
    let _ = writeln!(out, "deterministic bound: {}", analysis::det_ratio_bound(alpha)?);
    Ok(())
}

fn cmd_sweep(
    min: f64,
    max: f64,
    step: f64,
    path: &Path,
    measured: bool,
    out: &mut String,
) -> CmdResult {
    let rows = if measured {
        analysis::sweep_curves_measured(min, max, step)?
    } else {
        analysis::sweep_curves(min, max, step)?
    };
    fs::write(path, analysis::curves_to_csv(&rows))
        .map_err(|e| Failure(format!("{}: {e}", path.display())))?;
    let _ = writeln!(out, "wrote {} rows to {}", rows.len(), path.display());
    Ok(())
}

fn cmd_verify(cfg: &SuiteConfig, out: &mut String) -> CmdResult {
    let alphas: Vec<String> = cfg.alphas.iter().map(|a| a.to_string()).collect();
    let _ = writeln!(
        out,
        "corpus: {} instances per alpha in [{}], seed {}",
        cfg.instances,
        alphas.join(", "),
        cfg.seed
    );
    let reports = verify::run_suite(cfg);
    for r in &reports {
        let _ = writeln!(out, "{r}");
    }
    let passed = reports.iter().filter(|r| r.passed()).count();
    let _ = writeln!(out, "summary: {passed}/{} properties passed", reports.len());
    if passed == reports.len() {
        Ok(())
    } else {
        Err(Failure(format!("{} properties failed", reports.len() - passed)))
    }
}
