//! `ncpdt`: generate, solve, decide and verify sparse syndrome-decoding
//! instances, and run the self-test suites.
//!
//! Exit codes: 0 success or Yes, 1 No or invalid certificate, 2 input error,
//! 3 no solution from the exact solver, 4 reduction failure.

use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use ncpdt::instance::{brute_force_nearest, parse_instance, random_planted};
use ncpdt::reduction::{self, Answer, ReductionConfig, SearchFailure};
use ncpdt::rng::seeded_rng;
use ncpdt::selftest::{self, Fault, Level};
use ncpdt::{Alpha, BitVector, LearnerKind, SyndromeInstance};

const EXIT_OK: u8 = 0;
const EXIT_NO: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_NONE: u8 = 3;
const EXIT_FAIL: u8 = 4;

#[derive(Parser, Debug)]
#[command(name = "ncpdt", version, about = "Sparse syndrome decoding through decision-tree learning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LearnerArg {
    Exhaustive,
    Greedy,
}

impl From<LearnerArg> for LearnerKind {
    fn from(l: LearnerArg) -> Self {
        match l {
            LearnerArg::Exhaustive => LearnerKind::Exhaustive,
            LearnerArg::Greedy => LearnerKind::Greedy,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Fast,
    Full,
}

#[derive(clap::Args, Debug)]
struct ReduceArgs {
    /// Gadget block length.
    #[arg(long, default_value_t = 2)]
    ell: usize,
    #[arg(long, value_enum, default_value = "exhaustive")]
    learner: LearnerArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Examples drawn for the learner.
    #[arg(long, default_value_t = 2000)]
    samples: usize,
    /// Learner time budget in seconds.
    #[arg(long, default_value_t = 60)]
    time_budget: u64,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a planted instance and its solution to `<out>.planted`.
    Gen {
        n: usize,
        m: usize,
        k: usize,
        seed: u64,
        out: PathBuf,
        /// Approximation factor recorded in the instance.
        #[arg(long, default_value_t = 3)]
        alpha: u64,
    },
    /// Minimum-sparsity solution by brute force, or NONE.
    SolveExact { instance: PathBuf, k_max: usize },
    /// Sparse solution through the learning reduction, or FAIL.
    SolveReduce {
        instance: PathBuf,
        #[command(flatten)]
        reduce: ReduceArgs,
        /// `c` in the pruning depth `c·⌈log₂ s⌉`.
        #[arg(long, default_value_t = 3)]
        prune_c: usize,
        #[arg(long, default_value_t = 0.999)]
        confidence: f64,
        /// Learner depth budget; defaults to `ell·k`.
        #[arg(long)]
        depth: Option<usize>,
        /// Write the learned tree here in prefix form.
        #[arg(long)]
        dump_hypothesis: Option<PathBuf>,
    },
    /// YES (exit 0) if a `k`-sparse solution exists, NO (exit 1) if no
    /// `αk`-sparse one does.
    Decide {
        instance: PathBuf,
        #[command(flatten)]
        reduce: ReduceArgs,
        #[arg(long, default_value_t = 0.999)]
        confidence: f64,
    },
    /// Check `Hx = t` and `sparsity(x) ≤ k_max`.
    Verify {
        instance: PathBuf,
        solution: PathBuf,
        k_max: usize,
    },
    /// Run the property suites.
    Selftest {
        #[arg(long, value_enum, default_value = "fast")]
        level: LevelArg,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

/// Key=value lines written to stderr after every invocation.
#[derive(Default)]
struct RunReport {
    fields: Vec<(&'static str, String)>,
}

impl RunReport {
    fn set(&mut self, key: &'static str, value: impl Display) {
        let value = value.to_string();
        match self.fields.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.fields.push((key, value)),
        }
    }

    fn instance(&mut self, inst: &SyndromeInstance) {
        self.set("n", inst.n());
        self.set("m", inst.m());
        self.set("k", inst.k());
        self.set("alpha", inst.alpha());
    }

    fn emit(&self) {
        for (k, v) in &self.fields {
            eprintln!("{k}={v}");
        }
    }
}

/// An error attributable to the input: unreadable or malformed files, bad
/// parameters.
struct InputError(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for InputError {
    fn from(e: E) -> Self {
        InputError(e.into())
    }
}

fn read_instance(path: &Path) -> Result<SyndromeInstance, InputError> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = parse_instance(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(inst.into_syndrome())
}

/// Accepts the one-row matrix text format or a bare 0/1 string.
fn read_vector(path: &Path) -> Result<BitVector, InputError> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed = BitVector::parse_text(&text).or_else(|e| {
        let trimmed = text.trim();
        if !trimmed.is_empty() && trimmed.bytes().all(|b| b == b'0' || b == b'1') {
            BitVector::parse_bits(trimmed)
        } else {
            Err(e)
        }
    });
    Ok(parsed.with_context(|| format!("parsing {}", path.display()))?)
}

fn reduction_config(args: &ReduceArgs, confidence: f64) -> ReductionConfig {
    ReductionConfig {
        ell: args.ell,
        confidence,
        sample_budget: args.samples,
        time_budget: Duration::from_secs(args.time_budget),
        ..ReductionConfig::default()
    }
}

fn run(cli: Cli, report: &mut RunReport) -> Result<u8, InputError> {
    match cli.command {
        Command::Gen {
            n,
            m,
            k,
            seed,
            out,
            alpha,
        } => {
            report.set("seed", seed);
            if alpha == 0 {
                bail_input("alpha must be at least 1")?;
            }
            let (inst, x) = random_planted(n, m, k, seed)?;
            let inst = inst.with_alpha(Alpha::from_integer(alpha))?;
            report.instance(&inst);
            let sidecar = sidecar_path(&out);
            std::fs::write(&out, inst.to_text()).with_context(|| format!("writing {}", out.display()))?;
            std::fs::write(&sidecar, x.to_text()).with_context(|| format!("writing {}", sidecar.display()))?;
            report.set("outcome", "written");
            report.set("sparsity", x.weight());
            Ok(EXIT_OK)
        }
        Command::SolveExact { instance, k_max } => {
            let inst = read_instance(&instance)?;
            report.instance(&inst);
            match brute_force_nearest(&inst, k_max)? {
                Some(x) => {
                    println!("{x}");
                    report.set("outcome", "solution");
                    report.set("sparsity", x.weight());
                    Ok(EXIT_OK)
                }
                None => {
                    println!("NONE");
                    report.set("outcome", "none");
                    Ok(EXIT_NONE)
                }
            }
        }
        Command::SolveReduce {
            instance,
            reduce,
            prune_c,
            confidence,
            depth,
            dump_hypothesis,
        } => {
            let inst = read_instance(&instance)?;
            report.instance(&inst);
            report.set("ell", reduce.ell);
            report.set("seed", reduce.seed);
            report.set("learner", LearnerKind::from(reduce.learner));
            let cfg = ReductionConfig {
                prune_constant: prune_c,
                learner_depth: depth,
                ..reduction_config(&reduce, confidence)
            };
            cfg.validate()?;
            let learner = LearnerKind::from(reduce.learner).learner();
            let mut rng = seeded_rng(reduce.seed);
            match reduction::search(&inst, &cfg, learner.as_ref(), &mut rng) {
                Ok(out) => {
                    if let Some(path) = &dump_hypothesis {
                        std::fs::write(path, out.hypothesis.to_prefix() + "\n")
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    println!("{}", out.solution);
                    report.set("outcome", "solution");
                    report.set("sparsity", out.solution.weight());
                    report.set("sparsity_bound", out.sparsity_bound);
                    report.set("hypothesis_size", out.hypothesis.size());
                    report.set("candidates_tried", out.candidates_tried);
                    Ok(EXIT_OK)
                }
                Err(failure) => {
                    if let (Some(path), SearchFailure::NoCandidateVerified { hypothesis, .. }) =
                        (&dump_hypothesis, &failure)
                    {
                        std::fs::write(path, hypothesis.to_prefix() + "\n")
                            .with_context(|| format!("writing {}", path.display()))?;
                    }
                    println!("FAIL");
                    report.set("outcome", "failure");
                    report.set("reason", failure);
                    Ok(EXIT_FAIL)
                }
            }
        }
        Command::Decide {
            instance,
            reduce,
            confidence,
        } => {
            let inst = read_instance(&instance)?;
            report.instance(&inst);
            report.set("ell", reduce.ell);
            report.set("seed", reduce.seed);
            report.set("learner", LearnerKind::from(reduce.learner));
            let cfg = reduction_config(&reduce, confidence);
            cfg.validate()?;
            let learner = LearnerKind::from(reduce.learner).learner();
            let out = reduction::decide(&inst, &cfg, learner.as_ref(), &mut seeded_rng(reduce.seed))?;
            report.set("reason", format!("{:?}", out.reason));
            report.set("size_cap", out.thresholds.size_cap);
            report.set("accept_distance", out.thresholds.accept_distance());
            if let Some(d) = out.estimated_distance {
                report.set("estimated_distance", d);
            }
            if let Some(h) = &out.hypothesis {
                report.set("hypothesis_size", h.size());
            }
            Ok(match out.answer {
                Answer::Yes => {
                    println!("YES");
                    report.set("outcome", "yes");
                    EXIT_OK
                }
                Answer::No => {
                    println!("NO");
                    report.set("outcome", "no");
                    EXIT_NO
                }
            })
        }
        Command::Verify {
            instance,
            solution,
            k_max,
        } => {
            let inst = read_instance(&instance)?;
            report.instance(&inst);
            let x = read_vector(&solution)?;
            let ok = reduction::verify_certificate(&inst, &x, k_max)?;
            report.set("sparsity", x.weight());
            report.set("outcome", if ok { "valid" } else { "invalid" });
            println!("{}", if ok { "VALID" } else { "INVALID" });
            Ok(if ok { EXIT_OK } else { EXIT_NO })
        }
        Command::Selftest { level, inject_fault } => {
            let level = match level {
                LevelArg::Fast => Level::Fast,
                LevelArg::Full => Level::Full,
            };
            let fault = if inject_fault { Fault::Amplification } else { Fault::None };
            let reports = selftest::run_all(level, fault);
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            report.set("outcome", if failed == 0 { "pass".to_string() } else { format!("{failed} failed") });
            Ok(if failed == 0 { EXIT_OK } else { EXIT_NO })
        }
    }
}

fn bail_input(msg: &str) -> anyhow::Result<()> {
    bail!("{msg}")
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".planted");
    PathBuf::from(s)
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let mut report = RunReport::default();
    report.set("command", args.join(" "));
    let start = Instant::now();
    let code = match run(cli, &mut report) {
        Ok(code) => code,
        Err(InputError(e)) => {
            eprintln!("error: {e:#}");
            report.set("outcome", "input-error");
            EXIT_INPUT
        }
    };
    report.set("wall_ms", start.elapsed().as_millis());
    report.emit();
    ExitCode::from(code)
}
