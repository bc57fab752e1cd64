//! `maxip` command line: instance generation and I/O, solvers, reductions,
//! protocol experiments, oracle verification sweeps and benchmarks.

pub mod io;
pub mod report;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use maxip_core::arith::log_star;
use maxip_core::crtreduce::build_reduction;
use maxip_core::generate::{
    gen_all_ones, gen_integer, gen_planted_orthogonal, gen_random_instance, rng,
};
use maxip_core::geomreduce::Mode;
use maxip_core::orgap::parse_ratio;
use maxip_core::protosim::ma::{MaConfig, MaProtocol};
use maxip_core::protosim::rs::rs_prime_protocol;
use maxip_core::registry::{
    AnyInstance, Recovered, ReduceConfig, ReducedInstance, Registry, SolveConfig, Value,
};
use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::json;

use crate::report::{emit_report, Format, RunReport};

/// Exit codes.
pub const EXIT_OK: i32 = 0;
pub const EXIT_MISMATCH: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

/// Environment variable setting the worker thread count.
pub const THREADS_ENV: &str = "MAXIP_THREADS";

#[derive(Parser, Debug)]
#[command(
    name = "maxip",
    version,
    about = "Max-IP approximation, OV reductions and protocol experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Leave wall-clock timing out of the report.
    #[arg(long, global = true)]
    pub no_timing: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Furthest,
    Closest,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Furthest => Mode::Furthest,
            ModeArg::Closest => Mode::Closest,
        }
    }
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate an instance file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random instance with one planted orthogonal pair.
        #[arg(long, conflicts_with_all = ["all_ones", "integer"])]
        planted: bool,
        /// Every entry one (no orthogonal pair).
        #[arg(long, conflicts_with = "integer")]
        all_ones: bool,
        /// Uniform integers in `[lo, hi]`.
        #[arg(long)]
        integer: bool,
        #[arg(long, default_value_t = -3, allow_hyphen_values = true)]
        lo: i64,
        #[arg(long, default_value_t = 3, allow_hyphen_values = true)]
        hi: i64,
        /// Instance path; stdout when absent.
        #[arg(short, long)]
        out: Option<PathBuf>,
    },
    /// Solve Max-IP with a registered solver.
    Solve {
        /// exact, mult or add.
        solver: String,
        #[arg(short, long)]
        input: PathBuf,
        /// Approximation parameter.
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        /// Power-sum degree for mult.
        #[arg(long)]
        r: Option<u32>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Compare the answer with the exact oracle.
        #[arg(long)]
        check: bool,
    },
    /// Apply a registered reduction.
    Reduce {
        /// ov2zov, zov2zmaxip, zmaxip2geom, ov2gap or ov2pm1.
        reduction: String,
        #[arg(short, long)]
        input: PathBuf,
        #[arg(long, default_value_t = 2)]
        ell: usize,
        /// Gap ratio as `p/q` or a decimal.
        #[arg(long, default_value = "1/3")]
        eps: String,
        #[arg(long, default_value_t = 1)]
        reps: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Furthest)]
        mode: ModeArg,
        /// Directory for the emitted instances.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Solve the emitted instances exactly and compare with the source.
        #[arg(long)]
        verify: bool,
    },
    /// Protocol experiments.
    Proto {
        #[command(subcommand)]
        action: ProtoCmd,
    },
    /// Sweep a pipeline against the exact oracles.
    Verify {
        #[arg(long, value_enum)]
        pipeline: verify::Pipeline,
        #[arg(long, default_value_t = 16)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        d: usize,
        #[arg(long, default_value_t = 3)]
        ell: usize,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long, default_value_t = 2.0)]
        t: f64,
        #[arg(long)]
        r: Option<u32>,
        #[arg(long, default_value = "1/3")]
        eps: String,
    },
    /// Time solvers on random instances.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "exact,mult,add")]
        solvers: Vec<String>,
        #[arg(long, value_delimiter = ',', default_value = "64,128,256")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 32)]
        d: usize,
        #[arg(long, default_value_t = 4.0)]
        t: f64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Parameter presets.
    Preset {
        #[command(subcommand)]
        preset: PresetCmd,
    },
}

#[derive(Subcommand, Debug)]
pub enum ProtoCmd {
    /// Sample transcripts of the multi-prime protocol (or the single-field
    /// base protocol with --q).
    Run {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t_blocks: Option<usize>,
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Merlin claims this inner product instead of the true one.
        #[arg(long)]
        claim: Option<u64>,
        /// Make the inputs disjoint.
        #[arg(long)]
        disjoint: bool,
        #[arg(long)]
        strict_primes: bool,
    },
    /// Cost table over a list of input lengths.
    Cost {
        #[arg(long, value_delimiter = ',')]
        n: Vec<usize>,
        #[arg(long = "T")]
        t_blocks: Option<usize>,
    },
    /// Exact and sampled soundness against the canonical cheating Merlin.
    Soundness {
        #[arg(long)]
        n: usize,
        #[arg(long = "T")]
        t_blocks: Option<usize>,
        /// Prime for the base protocol; defaults to the smallest prime
        /// above `4 ceil(n/T) - 4`.
        #[arg(long)]
        q: Option<u64>,
        #[arg(long, default_value_t = 2000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Subcommand, Debug)]
pub enum PresetCmd {
    /// Instance counts for `l = 7^{log* d}` (capped at `d`).
    Hopcroft {
        #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
        d: Vec<usize>,
    },
}

/// Sets the global thread pool from `MAXIP_THREADS`, if present.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_ENV} must be a number"))?;
        // A pool may already exist (tests, repeated calls); keep it.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// exit code: 0 success, 1 verification mismatch, 2 invalid input.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e:#}");
        return EXIT_INVALID;
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INVALID
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    let start = Instant::now();
    let report = match &cli.command {
        Command::Gen {
            n,
            d,
            density,
            seed,
            planted,
            all_ones,
            integer,
            lo,
            hi,
            out,
        } => {
            let inst = if *planted {
                AnyInstance::Boolean(gen_planted_orthogonal(*n, *d, *seed)?)
            } else if *all_ones {
                AnyInstance::Boolean(gen_all_ones(*n, *d)?)
            } else if *integer {
                AnyInstance::Integer(gen_integer(*n, *d, *lo, *hi, *seed)?)
            } else {
                AnyInstance::Boolean(gen_random_instance(*n, *d, *density, *seed)?)
            };
            match out {
                Some(p) => io::write_instance(&inst, p)?,
                None => print!("{}", io::instance_to_json(&inst)),
            }
            return Ok(EXIT_OK);
        }
        Command::Solve {
            solver,
            input,
            t,
            r,
            seed,
            check,
        } => solve(solver, input, *t, *r, *seed, *check)?,
        Command::Reduce {
            reduction,
            input,
            ell,
            eps,
            reps,
            mode,
            out_dir,
            verify,
        } => {
            let cfg = ReduceConfig {
                ell: *ell,
                eps: parse_ratio(eps)?,
                reps: *reps,
                mode: (*mode).into(),
            };
            reduce(reduction, input, &cfg, out_dir.as_ref(), *verify)?
        }
        Command::Proto { action } => proto(action)?,
        Command::Verify {
            pipeline,
            n,
            d,
            ell,
            trials,
            seed,
            mode,
            t,
            r,
            eps,
        } => {
            let p = verify::Params {
                n: *n,
                d: *d,
                ell: *ell,
                trials: *trials,
                seed: *seed,
                modes: match mode {
                    Some(m) => vec![(*m).into()],
                    None => vec![Mode::Furthest, Mode::Closest],
                },
                t: *t,
                r: *r,
                eps: parse_ratio(eps)?,
            };
            verify::run(*pipeline, &p)?
        }
        Command::Bench {
            solvers,
            n,
            d,
            t,
            trials,
            seed,
        } => bench(solvers, n, *d, *t, *trials, *seed)?,
        Command::Preset {
            preset: PresetCmd::Hopcroft { d },
        } => hopcroft(d)?,
    };
    let mut report = report;
    report.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    let text = emit_report(&report, cli.format, !cli.no_timing)?;
    match &cli.report {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display()))?,
        None => print!("{text}"),
    }
    Ok(if report.all_verdicts_pass() {
        EXIT_OK
    } else {
        EXIT_MISMATCH
    })
}

fn value_json(v: &Value) -> serde_json::Value {
    match v {
        Value::Exact(q) => json!(if q.is_integer() {
            q.numer().to_string()
        } else {
            q.to_string()
        }),
        Value::Approx(f) => json!(f),
    }
}

fn solve(
    name: &str,
    input: &Path,
    t: f64,
    r: Option<u32>,
    seed: u64,
    check: bool,
) -> Result<RunReport> {
    let reg = Registry::default();
    let solver = reg.solver(name)?;
    let inst = io::read_instance(input)?;
    let cfg = SolveConfig { t, r, seed };
    let out = solver.solve(&inst, &cfg)?;
    let mut rep = RunReport::new("solve");
    rep.param("solver", name)
        .param("input", input.display().to_string())
        .param("t", t);
    if let Some(r) = r {
        rep.param("r", r);
    }
    rep.seed = Some(seed);
    rep.out("kind", inst.kind())
        .out("n", inst.n())
        .out("d", inst.dim())
        .out("value", value_json(&out.value));
    if let Some(w) = out.witness {
        rep.out("witness", json!([w.index_a, w.index_b]));
    }
    for (k, v) in &out.details {
        rep.out(k, v.clone());
    }
    if name == "exact" {
        rep.out("orthogonal", inst.has_orthogonal_pair()?);
        if let AnyInstance::Boolean(b) = &inst {
            if let (true, Some(w)) = maxip_core::oracle::orthogonal_decide(b)? {
                rep.out("orthogonal_witness", json!([w.index_a, w.index_b]));
            }
        }
    }
    if check {
        let (Value::Exact(opt), _) = inst.exact()? else {
            unreachable!("oracle is exact")
        };
        let opt = opt.to_f64().unwrap_or(f64::NAN);
        let v = match &out.value {
            Value::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Value::Approx(f) => *f,
        };
        let ok = match name {
            "mult" => opt <= v && v <= t * opt,
            "add" => (v - opt).abs() <= t,
            _ => v == opt,
        };
        rep.out("oracle_value", opt).verdict("guarantee", ok);
    }
    Ok(rep)
}

fn reduce(
    name: &str,
    input: &Path,
    cfg: &ReduceConfig,
    out_dir: Option<&PathBuf>,
    verify: bool,
) -> Result<RunReport> {
    let reg = Registry::default();
    let red = reg.reduction(name)?;
    let inst = io::read_instance(input)?;
    let reduced = red.reduce(&inst, cfg)?;
    let mut rep = RunReport::new("reduce");
    rep.param("reduction", name)
        .param("input", input.display().to_string())
        .param("ell", cfg.ell)
        .param("eps", cfg.eps.to_string())
        .param("reps", cfg.reps)
        .param("mode", format!("{:?}", cfg.mode).to_lowercase());
    rep.out("instances", reduced.instances.len());
    for (k, v) in &reduced.meta {
        rep.out(k, v.clone());
    }
    if let Some(dir) = out_dir {
        fs::create_dir_all(dir)?;
        for (i, r) in reduced.instances.iter().enumerate() {
            let path = dir.join(format!("{name}_{i:05}.json"));
            let text = match r {
                ReducedInstance::Vector(v) => io::instance_to_json(v),
                ReducedInstance::Geometry(g) => io::geometry_to_json(g),
                ReducedInstance::Pm1(g) => match g.explicit() {
                    Ok(e) => io::instance_to_json(&AnyInstance::Integer(e)),
                    Err(e) => {
                        log::info!("writing the ±1 instance implicitly: {e}");
                        io::pm1_implicit_to_json(g)
                    }
                },
            };
            fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))?;
        }
        rep.out("out_dir", dir.display().to_string());
    }
    if verify {
        let got = red.recover(&reduced)?;
        let want = red.source_answer(&inst)?;
        let show = |r: &Recovered| match r {
            Recovered::Orthogonal(b) => json!({ "orthogonal": b }),
            Recovered::MaxIp(v) => json!({ "max_ip": v.to_string() }),
        };
        rep.out("recovered", show(&got))
            .out("source", show(&want))
            .verdict("agrees_with_source", got == want);
    }
    Ok(rep)
}

fn random_bits(n: usize, seed: u64) -> Vec<bool> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_bool(0.5)).collect()
}

fn ip(x: &[bool], y: &[bool]) -> u64 {
    x.iter().zip(y).filter(|(a, b)| **a && **b).count() as u64
}

fn cost_json(c: &maxip_core::protosim::CostReport) -> serde_json::Value {
    json!({
        "advice_bits": c.advice_bits,
        "coin_bits": c.coin_bits,
        "message_bits": c.message_bits,
        "rounds": c.rounds,
    })
}

fn proto(action: &ProtoCmd) -> Result<RunReport> {
    match action {
        ProtoCmd::Run {
            n,
            t_blocks,
            q,
            trials,
            seed,
            claim,
            disjoint,
            strict_primes,
        } => {
            let x = random_bits(*n, *seed);
            let y: Vec<bool> = if *disjoint {
                x.iter().map(|b| !b).collect()
            } else {
                random_bits(*n, seed.wrapping_add(1))
            };
            let truth = ip(&x, &y);
            let mut rep = RunReport::new("proto run");
            rep.param("n", *n)
                .param("trials", *trials)
                .param("disjoint", *disjoint);
            rep.seed = Some(*seed);
            rep.out("true_ip", truth);
            let accepted = match q {
                Some(q) => {
                    let t = t_blocks.unwrap_or_else(|| maxip_core::protosim::ma::default_t(*n));
                    let p = rs_prime_protocol(*n, t, *q)?;
                    let honest = p.honest_advice(&x, &y)?;
                    let advice = match claim {
                        Some(z) => p.cheat_advice(&x, &y, z % q)?,
                        None => honest,
                    };
                    rep.param("q", *q).param("T", t);
                    rep.out("claimed", p.claim(&advice))
                        .out("cost", cost_json(&p.cost()));
                    (0..*trials)
                        .filter(|s| {
                            p.run(&x, &y, &advice, seed.wrapping_add(2).wrapping_add(*s))
                                .accepted
                        })
                        .count() as u64
                }
                None => {
                    let cfg = MaConfig {
                        allow_extended: !strict_primes,
                        t_blocks: *t_blocks,
                    };
                    let p = MaProtocol::new(*n, cfg)?;
                    let advice = match claim {
                        Some(z) => p.cheating_advice(&x, &y, *z)?,
                        None => p.honest_advice(&x, &y)?,
                    };
                    rep.param("T", p.t_blocks());
                    rep.out("claimed", advice.z)
                        .out("rho", p.rho())
                        .out("primes", p.primes().len())
                        .out("extended_primes", p.extended())
                        .out("cost", cost_json(&p.cost()));
                    (0..*trials)
                        .filter(|s| {
                            p.run(&x, &y, &advice, seed.wrapping_add(2).wrapping_add(*s))
                                .accepted
                        })
                        .count() as u64
                }
            };
            rep.out("accepted", accepted)
                .out("accept_rate", accepted as f64 / (*trials).max(1) as f64);
            if claim.is_none() {
                rep.verdict("completeness", accepted == *trials);
            }
            Ok(rep)
        }
        ProtoCmd::Cost { n, t_blocks } => {
            let mut rep = RunReport::new("proto cost");
            rep.param("n", json!(n));
            rep.table(&[
                "n",
                "T",
                "rho",
                "primes",
                "extended",
                "advice_bits",
                "coin_bits",
                "message_bits",
                "rounds",
            ]);
            for &n in n {
                let p = MaProtocol::new(
                    n,
                    MaConfig {
                        allow_extended: true,
                        t_blocks: *t_blocks,
                    },
                )?;
                let c = p.cost();
                rep.row(vec![
                    n.to_string(),
                    p.t_blocks().to_string(),
                    p.rho().to_string(),
                    p.primes().len().to_string(),
                    p.extended().to_string(),
                    c.advice_bits.to_string(),
                    c.coin_bits.to_string(),
                    c.message_bits.to_string(),
                    c.rounds.to_string(),
                ]);
            }
            Ok(rep)
        }
        ProtoCmd::Soundness {
            n,
            t_blocks,
            q,
            trials,
            seed,
        } => verify::soundness_report(*n, *t_blocks, *q, *trials, *seed),
    }
}

fn bench(
    solvers: &[String],
    ns: &[usize],
    d: usize,
    t: f64,
    trials: usize,
    seed: u64,
) -> Result<RunReport> {
    let reg = Registry::default();
    let mut rep = RunReport::new("bench");
    rep.param("d", d)
        .param("t", t)
        .param("trials", trials)
        .param("solvers", json!(solvers));
    rep.seed = Some(seed);
    rep.table(&["solver", "n", "d", "trial", "value", "ms"]);
    for name in solvers {
        let solver = reg.solver(name)?;
        for &n in ns {
            for trial in 0..trials {
                let inst = AnyInstance::Boolean(gen_random_instance(
                    n,
                    d,
                    0.5,
                    seed.wrapping_add(trial as u64),
                )?);
                let start = Instant::now();
                let out = solver.solve(&inst, &SolveConfig { t, r: None, seed })?;
                let ms = start.elapsed().as_secs_f64() * 1e3;
                rep.row(vec![
                    name.clone(),
                    n.to_string(),
                    d.to_string(),
                    trial.to_string(),
                    out.value.to_string(),
                    format!("{ms:.3}"),
                ]);
            }
        }
    }
    Ok(rep)
}

fn hopcroft(ds: &[usize]) -> Result<RunReport> {
    let mut rep = RunReport::new("preset hopcroft");
    rep.param("d", json!(ds));
    rep.table(&[
        "d",
        "ell_formula",
        "ell",
        "b",
        "coordinate_modulus",
        "coordinate_bits",
        "v_bound",
        "instances",
    ]);
    for &d in ds {
        if d == 0 {
            bail!("d must be positive");
        }
        let formula = 7u64.saturating_pow(log_star(d as f64));
        let ell = (formula as usize).min(d);
        let red = build_reduction(d.div_ceil(ell), ell)?;
        let count = match red.build_v_set() {
            Ok(v) => v.len().to_string(),
            Err(e) => format!("over budget ({e})"),
        };
        rep.row(vec![
            d.to_string(),
            formula.to_string(),
            ell.to_string(),
            red.b().to_string(),
            red.l().to_string(),
            red.l().bits().to_string(),
            red.v_bound().to_string(),
            count,
        ]);
    }
    Ok(rep)
}
