use std::alloc::{GlobalAlloc, Layout, System};
use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Parser, Subcommand, ValueEnum};

use streamcsp::assignment::Assignment;
use streamcsp::estimators::{Backend, EstimatorConfig, StreamingEstimator};
use streamcsp::formula::{self, ClauseReader, Normalized, ParseError};
use streamcsp::gapgen::{self, Case, DbhpParams, Reduction};
use streamcsp::lemmas::{self, Status};
use streamcsp::oracle::{self, DEFAULT_N_LIMIT};
use streamcsp::rounding::{self, Sampler};

/// Heap counter so `--report-memory` can show what a run really held.
struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser)]
#[command(name = "streamcsp", version, about = "Streaming estimators for Boolean Max-CSPs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the optimum in one pass over the clause stream.
    Estimate {
        /// Instance file, or `-` for standard input.
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
        backend: BackendArg,
        #[arg(long, default_value_t = 0.1)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Independent sketch groups (median amplification).
        #[arg(long, default_value_t = 1)]
        t: u64,
        #[arg(long, default_value_t = streamcsp::bias::MAX_K)]
        k_max: u32,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Also print the estimator state size and peak heap usage.
        #[arg(long)]
        report_memory: bool,
    },
    /// Exact optimum by exhaustive search.
    Oracle {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
        n_limit: u32,
    },
    /// Sample a rounded assignment and report its value.
    Round {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
    },
    /// Write a YES or NO hard instance.
    Gen {
        #[arg(long, value_enum)]
        reduction: ReductionArg,
        #[arg(long, value_enum)]
        case: CaseArg,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        t: u64,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check every applicable bound on an instance against the oracle.
    Verify {
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_N_LIMIT)]
        n_limit: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Exact,
    Sketch,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Tabular,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReductionArg {
    Eand,
    Or,
    #[value(name = "xor2or")]
    XorToOr,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    Yes,
    No,
}

enum Failure {
    Parse(String),
    Config(String),
    Verify(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Parse(_) => 1,
            Failure::Config(_) => 2,
            Failure::Verify(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(s) | Failure::Config(s) | Failure::Verify(s) => s,
        }
    }
}

impl From<ParseError> for Failure {
    fn from(e: ParseError) -> Self {
        match e {
            ParseError::Io(e) => Failure::Config(format!("read error: {e}")),
            e => Failure::Parse(format!("parse error: {e}")),
        }
    }
}

type Run = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let outcome = match cli.command {
        Command::Estimate {
            input,
            backend,
            eps,
            seed,
            t,
            k_max,
            format,
            report_memory,
        } => {
            let backend = match backend {
                BackendArg::Exact => Backend::Exact,
                BackendArg::Sketch => Backend::Sketch { t, seed },
            };
            let cfg = EstimatorConfig {
                epsilon: eps,
                backend,
                k_max,
            };
            cmd_estimate(&input, cfg, format, report_memory)
        }
        Command::Oracle { input, n_limit } => cmd_oracle(&input, n_limit),
        Command::Round { input, seed } => cmd_round(&input, seed),
        Command::Gen {
            reduction,
            case,
            n,
            beta,
            t,
            seed,
            output,
        } => {
            let params = DbhpParams {
                n,
                beta,
                t,
                epsilon: 0.1,
                seed,
            };
            let reduction = match reduction {
                ReductionArg::Eand => Reduction::Eand,
                ReductionArg::Or => Reduction::Or,
                ReductionArg::XorToOr => Reduction::XorToOr,
            };
            let case = match case {
                CaseArg::Yes => Case::Yes,
                CaseArg::No => Case::No,
            };
            cmd_gen(&params, case, reduction, output.as_deref())
        }
        Command::Verify { input, n_limit } => cmd_verify(&input, n_limit),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("streamcsp: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn open(path: &Path) -> Result<Box<dyn BufRead>, Failure> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(io::stdin().lock()));
    }
    File::open(path)
        .map(|f| Box::new(BufReader::new(f)) as Box<dyn BufRead>)
        .map_err(|e| Failure::Config(format!("cannot open {}: {e}", path.display())))
}

fn load(path: &Path) -> Result<formula::ParsedFile, Failure> {
    Ok(formula::parse_with_comments(open(path)?)?)
}

fn write_err(e: io::Error) -> Failure {
    Failure::Config(format!("write error: {e}"))
}

fn cmd_estimate(input: &Path, cfg: EstimatorConfig, format: Format, report_memory: bool) -> Run {
    let mut est = StreamingEstimator::new(cfg).map_err(|e| Failure::Config(e.to_string()))?;
    let reader = ClauseReader::new(open(input)?)?;
    for item in reader {
        match item? {
            Normalized::Clause(c) => est.push(&c).map_err(|e| Failure::Config(e.to_string()))?,
            Normalized::Tautology => est.add_tautology(),
            // never satisfiable, contributes nothing
            Normalized::Contradiction => {}
        }
    }
    let e = est.finish().map_err(|e| Failure::Config(e.to_string()))?;
    if !e.proven_regime() {
        eprintln!("note: eps={} lies outside the range covered by the approximation guarantees", cfg.epsilon);
    }
    let mut line = match format {
        Format::Text => e.to_string(),
        Format::Tabular => {
            println!("v\talpha\teps\tbranch\tub\tbias\tdelta");
            format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                e.v, e.alpha, e.epsilon, e.branch, e.certified_ub, e.digest.bias, e.digest.delta
            )
        }
    };
    if report_memory {
        let peak = PEAK.load(Ordering::Relaxed);
        let state = est.memory_bytes();
        line = match format {
            Format::Text => format!("{line} state_bytes={state} peak_heap_bytes={peak}"),
            Format::Tabular => format!("{line}\nstate_bytes\tpeak_heap_bytes\n{state}\t{peak}"),
        };
    }
    println!("{line}");
    Ok(())
}

fn cmd_oracle(input: &Path, n_limit: u32) -> Run {
    let f = load(input)?.formula;
    let r = oracle::exact_val(&f, n_limit).map_err(|e| Failure::Config(e.to_string()))?;
    println!("val={} argmax={}", r.val, r.argmax);
    Ok(())
}

fn cmd_round(input: &Path, seed: u64) -> Run {
    let f = load(input)?.formula;
    let (plan, _) = rounding::plan_for(&f)
        .ok_or_else(|| Failure::Config("no rounding scheme for this mix of clause types".into()))?;
    let sigma = Sampler::new(&plan, f.n() as usize, seed).sample();
    let value = oracle::val_of(&f, &sigma).map_err(|e| Failure::Config(e.to_string()))?;
    println!("assignment={sigma} value={value} gamma={}", plan.gamma());
    Ok(())
}

fn cmd_gen(params: &DbhpParams, case: Case, reduction: Reduction, output: Option<&Path>) -> Run {
    let inst = gapgen::generate(params, case, reduction).map_err(|e| Failure::Config(e.to_string()))?;
    let mut out: Box<dyn Write> = match output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Config(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    writeln!(out, "c case {}", case.name()).map_err(write_err)?;
    writeln!(out, "c reduction {}", reduction.name()).map_err(write_err)?;
    writeln!(out, "c planted {}", inst.planted).map_err(write_err)?;
    writeln!(
        out,
        "c params n={} beta={} t={} seed={} m_dbhp={}",
        params.n, params.beta, params.t, params.seed, inst.m_dbhp
    )
    .map_err(write_err)?;
    formula::write_mcsp(&inst.formula, &mut out).map_err(write_err)?;
    out.flush().map_err(write_err)
}

/// What the generator recorded about a planted instance.
struct Sidecar {
    case: String,
    reduction: String,
    planted: Assignment,
    m_dbhp: u64,
}

fn sidecar(comments: &[String]) -> Option<Sidecar> {
    let mut case = None;
    let mut reduction = None;
    let mut planted = None;
    let mut m_dbhp = None;
    for c in comments {
        let mut words = c.split_whitespace();
        match words.next() {
            Some("case") => case = words.next().map(str::to_string),
            Some("reduction") => reduction = words.next().map(str::to_string),
            Some("planted") => planted = words.next().and_then(|s| s.parse().ok()),
            Some("params") => {
                m_dbhp = words.find_map(|w| w.strip_prefix("m_dbhp=")).and_then(|s| s.parse().ok());
            }
            _ => {}
        }
    }
    Some(Sidecar {
        case: case?,
        reduction: reduction?,
        planted: planted?,
        m_dbhp: m_dbhp?,
    })
}

/// Value the planted partition must reach, by construction.
fn planted_target(s: &Sidecar, m: u64) -> Option<u64> {
    let k = s.m_dbhp;
    match (s.case.as_str(), s.reduction.as_str()) {
        ("YES", "or") | ("YES", "xor2or") => Some(m),
        ("YES", "eand") | ("NO", "or") => m.checked_sub(k),
        ("NO", "eand") => m.checked_sub(2 * k),
        ("NO", "xor2or") => Some(m / 2),
        _ => None,
    }
}

fn cmd_verify(input: &Path, n_limit: u32) -> Run {
    let parsed = load(input)?;
    let f = &parsed.formula;
    let mut checks = lemmas::check_formula(f, n_limit);
    if let Some(s) = sidecar(&parsed.comments) {
        let name = "planted value";
        let check = match (planted_target(&s, f.m() as u64 + f.tautology_count() + f.contradiction_count()), oracle::val_of(f, &s.planted)) {
            (Some(target), Ok(got)) => lemmas::Check {
                name,
                status: if got == target { Status::Pass } else { Status::Fail },
                detail: format!("{} {}: value {got}, expected {target}", s.case, s.reduction),
            },
            _ => lemmas::Check {
                name,
                status: Status::Fail,
                detail: "generator comments do not match the instance".into(),
            },
        };
        checks.push(check);
    }
    let mut failed = 0;
    for c in &checks {
        println!("{c}");
        failed += usize::from(c.status == Status::Fail);
    }
    let passed = checks.iter().filter(|c| c.status == Status::Pass).count();
    let skipped = checks.len() - passed - failed;
    println!("summary pass={passed} fail={failed} skip={skipped}");
    if failed > 0 {
        return Err(Failure::Verify(format!("{failed} check(s) failed")));
    }
    Ok(())
}
