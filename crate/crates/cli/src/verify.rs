//! Randomized sweeps that check each pipeline against the exact oracles.

use anyhow::{ensure, Result};
use clap::ValueEnum;
use maxip_core::additive::approx_additive;
use maxip_core::arith::is_prime;
use maxip_core::crtreduce::{build_reduction, check_equivalence, maxip_via_crt_queries};
use maxip_core::generate::{gen_planted_orthogonal, gen_random_instance};
use maxip_core::geomreduce::{ov_to_geometry_pipeline, Mode};
use maxip_core::oracle::{max_ip_exact, orthogonal_decide};
use maxip_core::orgap::ov_to_pm1_gap;
use maxip_core::polysolve::approx_mult;
use maxip_core::protosim::gap::ov_to_maxip_gap;
use maxip_core::protosim::ma::{default_t, MaConfig, MaProtocol};
use maxip_core::protosim::rs::rs_prime_protocol;
use maxip_core::protosim::upp::upp_reduction_decide;
use maxip_core::BooleanInstance;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::Rng;
use serde_json::json;

use crate::report::RunReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Pipeline {
    Geometry,
    Crt,
    Mult,
    Additive,
    Upp,
    Pm1,
    Gap,
}

#[derive(Clone, Debug)]
pub struct Params {
    pub n: usize,
    pub d: usize,
    pub ell: usize,
    pub trials: usize,
    pub seed: u64,
    pub modes: Vec<Mode>,
    pub t: f64,
    pub r: Option<u32>,
    pub eps: BigRational,
}

/// Even trials are random (density 1/2), odd trials have a planted
/// orthogonal pair.
fn trial_instance(p: &Params, i: usize) -> Result<BooleanInstance> {
    let seed = p.seed.wrapping_add(i as u64);
    Ok(if i.is_multiple_of(2) {
        gen_random_instance(p.n, p.d, 0.5, seed)?
    } else {
        gen_planted_orthogonal(p.n, p.d, seed)?
    })
}

fn has_orth(inst: &BooleanInstance) -> Result<bool> {
    Ok(orthogonal_decide(inst)?.0)
}

pub fn run(pipeline: Pipeline, p: &Params) -> Result<RunReport> {
    ensure!(p.n > 0 && p.d > 0, "n and d must be positive");
    let mut rep = RunReport::new("verify");
    rep.param("pipeline", format!("{pipeline:?}").to_lowercase())
        .param("n", p.n)
        .param("d", p.d)
        .param("trials", p.trials);
    rep.seed = Some(p.seed);
    match pipeline {
        Pipeline::Geometry => {
            rep.param("ell", p.ell);
            for &mode in &p.modes {
                let name = format!("{mode:?}").to_lowercase();
                let (mut mismatches, mut identity_failures, mut checked) = (0, 0, 0);
                for i in 0..p.trials {
                    let inst = trial_instance(p, i)?;
                    let out = ov_to_geometry_pipeline(&inst, p.ell, mode)?;
                    mismatches += usize::from(out.decision != has_orth(&inst)?);
                    identity_failures += usize::from(!out.cross_identity_ok);
                    checked += out.instances_checked;
                }
                rep.out(&format!("{name}.mismatches"), mismatches)
                    .out(&format!("{name}.identity_failures"), identity_failures)
                    .out(&format!("{name}.instances_checked"), checked)
                    .verdict(&format!("{name}.decisions"), mismatches == 0)
                    .verdict(&format!("{name}.identity"), identity_failures == 0);
            }
        }
        Pipeline::Crt => {
            rep.param("ell", p.ell);
            ensure!(p.ell >= 1 && p.ell <= p.d, "ell must be in [1, d]");
            let red = build_reduction(p.d.div_ceil(p.ell), p.ell)?;
            let eq = check_equivalence(&red, 1 << 26)?;
            rep.out("pairs", eq.pairs)
                .out("membership_failures", eq.membership_failures)
                .out("decode_failures", eq.decode_failures)
                .out("bound_failures", eq.bound_failures)
                .out("max_coordinate", eq.max_coordinate.to_string())
                .verdict("equivalence", eq.ok());
            let solver = |z: &maxip_core::IntegerInstance| Ok(max_ip_exact(z)?.0);
            let mut wrong = 0;
            for i in 0..p.trials {
                let inst = trial_instance(p, i)?;
                let got = maxip_via_crt_queries(&inst, p.ell, &solver)?;
                wrong += usize::from(got != max_ip_exact(&inst)?.0);
            }
            rep.out("maxip_mismatches", wrong)
                .verdict("maxip_queries", wrong == 0);
        }
        Pipeline::Mult => {
            rep.param("t", p.t);
            let mut out_of_bracket = 0;
            let mut worst: f64 = 1.0;
            for i in 0..p.trials {
                let inst = trial_instance(p, i)?;
                let opt = max_ip_exact(&inst)?.0 as f64;
                let v = approx_mult(&inst, p.t, p.r)?.value;
                let ok = opt <= v + 1e-9 * opt.max(1.0) && v <= p.t * opt + 1e-9 * opt.max(1.0);
                out_of_bracket += usize::from(!ok);
                if opt > 0.0 {
                    worst = worst.max(v / opt);
                }
            }
            rep.out("out_of_bracket", out_of_bracket)
                .out("worst_ratio", worst)
                .verdict("bracket", out_of_bracket == 0);
        }
        Pipeline::Additive => {
            rep.param("t", p.t);
            let mut failures = 0;
            let mut sampled = 0;
            for i in 0..p.trials {
                let inst = trial_instance(p, i)?;
                let opt = max_ip_exact(&inst)?.0 as f64;
                let res = approx_additive(&inst, p.t, p.seed.wrapping_add(1_000_003 * i as u64))?;
                failures += usize::from((res.value - opt).abs() > p.t);
                sampled += usize::from(matches!(
                    res.route,
                    maxip_core::additive::Route::Sampled { .. }
                ));
            }
            let rate = failures as f64 / p.trials.max(1) as f64;
            rep.out("failures", failures)
                .out("failure_rate", rate)
                .out("sampled_trials", sampled)
                .out("allowed_rate", 1.0 / p.n as f64)
                .verdict("failure_rate", rate <= 1.0 / p.n as f64);
        }
        Pipeline::Upp => {
            rep.param("ell", p.ell);
            let mut wrong = 0;
            for i in 0..p.trials {
                let inst = trial_instance(p, i)?;
                wrong += usize::from(upp_reduction_decide(&inst, p.ell)? != has_orth(&inst)?);
            }
            rep.out("mismatches", wrong)
                .verdict("decisions", wrong == 0);
        }
        Pipeline::Pm1 => {
            rep.param("eps", p.eps.to_string());
            let (mut yes_fail, mut no_fail) = (0, 0);
            let mut d1 = String::new();
            for i in 0..p.trials {
                let inst = trial_instance(p, i)?;
                let g = ov_to_pm1_gap(&inst, &p.eps)?;
                d1 = g.d1.to_string();
                let opt = BigRational::from_integer(g.max_ip());
                if has_orth(&inst)? {
                    yes_fail += usize::from(opt < g.threshold);
                } else {
                    no_fail += usize::from(opt > g.no_bound);
                }
            }
            rep.out("dimension", d1)
                .out("yes_failures", yes_fail)
                .out("no_failures", no_fail)
                .verdict("gap", yes_fail == 0 && no_fail == 0);
        }
        Pipeline::Gap => {
            let eps = p.eps.to_f64().unwrap_or(f64::NAN);
            rep.param("eps", p.eps.to_string());
            let (mut yes_fail, mut no_fail) = (0, 0);
            let mut family = 0;
            for i in 0..p.trials {
                let inst = trial_instance(p, i)?;
                let g = ov_to_maxip_gap(&inst, eps, 1)?;
                family = g.instances.len();
                let opt = g
                    .instances
                    .iter()
                    .map(|f| max_ip_exact(f).map(|r| r.0))
                    .collect::<maxip_core::Result<Vec<_>>>()?;
                let opt = opt.into_iter().max().unwrap_or(0);
                if has_orth(&inst)? {
                    yes_fail += usize::from(opt != g.threshold);
                } else {
                    let bound = BigRational::from_integer(g.threshold.into()) * &g.soundness;
                    no_fail += usize::from(BigRational::from_integer(opt.into()) > bound);
                }
            }
            rep.out("family_size", family)
                .out("yes_failures", yes_fail)
                .out("no_failures", no_fail)
                .verdict("gap", yes_fail == 0 && no_fail == 0);
        }
    }
    Ok(rep)
}

fn next_prime_above(v: u64) -> u64 {
    (v + 1..)
        .find(|&p| is_prime(p))
        .expect("primes are unbounded")
}

/// Canonical cheating Merlin on a random input: exact acceptance against
/// the bound, plus a sampled rate, for the base protocol and the
/// multi-prime wrapper.
pub fn soundness_report(
    n: usize,
    t: Option<usize>,
    q: Option<u64>,
    trials: u64,
    seed: u64,
) -> Result<RunReport> {
    ensure!(n > 0, "n must be positive");
    let t = t.unwrap_or_else(|| default_t(n));
    let m = n.div_ceil(t) as u64;
    let q = q.unwrap_or_else(|| next_prime_above((4 * m).saturating_sub(4).max(2 * m)));
    let mut r = maxip_core::generate::rng(seed);
    let x: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
    let y: Vec<bool> = (0..n).map(|_| r.gen_bool(0.5)).collect();
    let truth = x.iter().zip(&y).filter(|(a, b)| **a && **b).count() as u64;

    let mut rep = RunReport::new("proto soundness");
    rep.param("n", n)
        .param("T", t)
        .param("q", q)
        .param("trials", trials);
    rep.seed = Some(seed);
    rep.out("true_ip", truth);

    let base = rs_prime_protocol(n, t, q)?;
    let cheat = base.cheat_advice(&x, &y, (truth + 1) % q)?;
    let exact = base.accept_count(&x, &y, &cheat);
    let bound = base.max_agreement();
    let sampled = (0..trials)
        .filter(|s| base.run(&x, &y, &cheat, seed.wrapping_add(1 + s)).accepted)
        .count();
    rep.out("base.accepting_alphas", exact)
        .out("base.bound_alphas", bound)
        .out("base.exact_probability", format!("{exact}/{q}"))
        .out("base.sampled_rate", sampled as f64 / trials.max(1) as f64)
        .verdict("base.within_bound", exact <= bound);

    let ma = MaProtocol::new(
        n,
        MaConfig {
            allow_extended: true,
            t_blocks: Some(t),
        },
    )?;
    let advice = ma.cheating_advice(&x, &y, truth + 1)?;
    let p = ma.acceptance_probability(&x, &y, &advice);
    let sampled = (0..trials)
        .filter(|s| ma.run(&x, &y, &advice, seed.wrapping_add(1 + s)).accepted)
        .count();
    let half = BigRational::new(BigInt::from(1), BigInt::from(2));
    rep.out("wrapper.exact_probability", p.to_string())
        .out(
            "wrapper.exact_probability_f64",
            p.to_f64().unwrap_or(f64::NAN),
        )
        .out(
            "wrapper.sampled_rate",
            sampled as f64 / trials.max(1) as f64,
        )
        .out("wrapper.primes", ma.primes().len())
        .out("wrapper.extended_primes", ma.extended())
        .out(
            "wrapper.cost",
            json!({
                "advice_bits": ma.cost().advice_bits,
                "coin_bits": ma.cost().coin_bits,
                "message_bits": ma.cost().message_bits,
            }),
        )
        .verdict("wrapper.at_most_half", p <= half);
    Ok(rep)
}
