//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion
//! and exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use maxip_core::additive::{approx_additive, chernoff_bound, Route, SamplePlan};
use maxip_core::crtreduce::{build_reduction, check_equivalence, ov_to_zov};
use maxip_core::generate::{gen_all_ones, gen_planted_orthogonal, gen_random_instance, rng};
use maxip_core::geomreduce::{
    geometry_extreme_pair, ov_to_geometry_pipeline, zmaxip_to_geometry, zov_to_zmaxip_tensor, Mode,
};
use maxip_core::oracle::{max_ip_exact, orthogonal_decide};
use maxip_core::orgap::{
    build_or_approx_poly, compile_standard_coeffs, find_gadget, fourier_transform, implicit_dot,
    ov_to_pm1_gap, pm1_encode,
};
use maxip_core::polysolve::{approx_mult, batch_power_sums, block_size};
use maxip_core::protosim::gap::ov_to_maxip_gap;
use maxip_core::protosim::ma::{MaConfig, MaProtocol};
use maxip_core::protosim::rs::rs_prime_protocol;
use maxip_core::protosim::upp::{np_upp_family, upp_reduction_decide};
use maxip_core::{ArgPair, BooleanInstance, Instance, IntegerInstance, VectorSet};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Pow, Zero};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn rat(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

fn all_inputs(d: usize) -> Vec<Vec<bool>> {
    (0u32..1 << d)
        .map(|c| (0..d).map(|i| c >> i & 1 == 1).collect())
        .collect()
}

fn random_bits(n: usize, seed: u64) -> Vec<bool> {
    let mut r = rng(seed);
    (0..n).map(|_| r.gen_bool(0.5)).collect()
}

fn ip(a: &[bool], b: &[bool]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| **x && **y).count() as u64
}

fn has_orth(inst: &BooleanInstance) -> bool {
    orthogonal_decide(inst).unwrap().0
}

/// The first `count` random instances (from `seed` upward) without an
/// orthogonal pair.
fn negatives(n: usize, d: usize, density: f64, count: usize, seed: u64) -> Vec<BooleanInstance> {
    (seed..)
        .map(|s| gen_random_instance(n, d, density, s).unwrap())
        .filter(|i| !has_orth(i))
        .take(count)
        .collect()
}

fn crt_equivalence() -> Outcome {
    let mut notes = Vec::new();
    for (b, ell) in [(2, 3), (1, 4), (4, 2), (3, 4)] {
        let red = build_reduction(b, ell).map_err(e2s)?;
        let rep = check_equivalence(&red, 1 << 26).map_err(e2s)?;
        check(rep.ok(), || format!("(b={b}, l={ell}): {rep:?}"))?;
        notes.push(format!("({b},{ell}) {} pairs", rep.pairs));
    }
    Ok(format!("{}, zero failures", notes.join(", ")))
}

fn mult_bracket() -> Outcome {
    let mut rg = rng(2);
    let mut worst: f64 = 1.0;
    for i in 0..1000u64 {
        let n = rg.gen_range(1..=64);
        let d = rg.gen_range(1..=32);
        let t = if i % 2 == 0 { 2.0 } else { 4.0 };
        let r = [2, 3, 4][(i % 3) as usize];
        let inst = gen_random_instance(n, d, rg.gen_range(0.1..0.9), i).map_err(e2s)?;
        let opt = max_ip_exact(&inst).map_err(e2s)?.0 as f64;
        let v = approx_mult(&inst, t, Some(r)).map_err(e2s)?.value;
        let tol = 1e-9 * opt.max(1.0);
        check(opt <= v + tol && v <= t * opt + tol, || {
            format!("instance {i} (n={n}, d={d}, t={t}, r={r}): OPT={opt}, value={v}")
        })?;
        if opt > 0.0 {
            worst = worst.max(v / opt);
        }
        if i % 50 == 0 {
            let b = block_size(t, r).map_err(e2s)?;
            let sums = batch_power_sums(inst.a().rows(), inst.b().rows(), r, b).map_err(e2s)?;
            for (bi, ca) in inst.a().rows().chunks(b).enumerate() {
                for (bj, cb) in inst.b().rows().chunks(b).enumerate() {
                    let direct: BigUint = ca
                        .iter()
                        .flat_map(|x| cb.iter().map(move |y| BigUint::from(ip(x, y)).pow(r)))
                        .sum();
                    check(sums[bi][bj] == direct, || {
                        format!("block ({bi},{bj}) of instance {i}")
                    })?;
                }
            }
        }
    }
    Ok(format!(
        "1000/1000 in bracket, worst value/OPT = {worst:.3}; block power sums match double loop"
    ))
}

fn additive_guarantee() -> Outcome {
    let (n, d) = (128, 200);
    let t = d as f64 / 4.0;
    let mut failures = 0;
    let mut routes = std::collections::BTreeSet::new();
    for s in 0..500u64 {
        let inst = if s % 2 == 0 {
            gen_random_instance(n, d, 0.5, s).map_err(e2s)?
        } else {
            gen_planted_orthogonal(n, d, s).map_err(e2s)?
        };
        let opt = max_ip_exact(&inst).map_err(e2s)?.0 as f64;
        let res = approx_additive(&inst, t, 10_000 + s).map_err(e2s)?;
        failures += usize::from((res.value - opt).abs() > t);
        routes.insert(match res.route {
            Route::Sampled { d1 } => format!("sampled d1={d1}"),
            Route::Exact => "exact (d1 >= d)".to_string(),
            Route::Trivial => "trivial".to_string(),
        });
    }
    let rate = failures as f64 / 500.0;
    check(rate <= 2.0 / n as f64, || {
        format!("failure rate {rate} > 2/n")
    })?;

    // Per-pair concentration at a forced sample size below d.
    let (d1, eps1) = (64, t / d as f64 / 2.0);
    let bound = chernoff_bound(d1, eps1);
    let mut rg = rng(33);
    let pairs = 10_000u64;
    let mut exceed = 0;
    for s in 0..pairs {
        let density = rg.gen_range(0.1..0.9);
        let a: Vec<bool> = (0..d).map(|_| rg.gen_bool(density)).collect();
        let b: Vec<bool> = (0..d).map(|_| rg.gen_bool(density)).collect();
        let plan = SamplePlan::draw(d, d1, eps1, 77_000 + s).map_err(e2s)?;
        exceed += usize::from(plan.relative_error(&a, &b) > eps1);
    }
    let empirical = exceed as f64 / pairs as f64;
    check(empirical <= 2.0 * bound, || {
        format!("Chernoff: empirical {empirical} > 2 x bound {bound}")
    })?;
    Ok(format!(
        "{failures}/500 failures (route: {}); Chernoff d1={d1}, eps1={eps1}: empirical {empirical:.4} <= 2 x {bound:.4}",
        routes.into_iter().collect::<Vec<_>>().join(", ")
    ))
}

fn geometry_pipeline() -> Outcome {
    let mut checked = 0;
    for s in 0..400u64 {
        let n = 2 + (s as usize * 7) % 31;
        let inst = if s < 200 {
            gen_random_instance(n, 6, 0.5, s).map_err(e2s)?
        } else {
            gen_planted_orthogonal(n, 6, s).map_err(e2s)?
        };
        let truth = has_orth(&inst);
        for mode in [Mode::Furthest, Mode::Closest] {
            let out = ov_to_geometry_pipeline(&inst, 3, mode)
                .map_err(|e| format!("seed {s} {mode:?}: {e}"))?;
            check(out.decision == truth, || {
                format!("seed {s} {mode:?}: decision {} vs {truth}", out.decision)
            })?;
            check(out.cross_identity_ok, || {
                format!("seed {s} {mode:?}: cross distance identity")
            })?;
            checked += out.instances_checked;
        }
    }
    Ok(format!(
        "400 instances x 2 modes agree with the oracle; {checked} geometry instances, extreme pairs cross, distances 2W +- 2x.y"
    ))
}

fn tensor_identity() -> Outcome {
    let grid: Vec<Vec<BigInt>> = (-2..=2i64)
        .flat_map(|a| (-2..=2i64).map(move |b| vec![BigInt::from(a), BigInt::from(b)]))
        .collect();
    let inst: IntegerInstance = Instance::new(
        VectorSet::new(2, grid.clone()).map_err(e2s)?,
        VectorSet::new(2, grid.clone()).map_err(e2s)?,
    )
    .map_err(e2s)?;
    let tensor = zov_to_zmaxip_tensor(&inst).map_err(e2s)?;
    let mut pairs = 0;
    for i in 0..grid.len() {
        for j in 0..grid.len() {
            let ip = inst.dot(ArgPair::new(i, j));
            check(tensor.dot(ArgPair::new(i, j)) == -(&ip * &ip), || {
                format!("{:?} . {:?}", grid[i], grid[j])
            })?;
            pairs += 1;
        }
    }
    // The geometry step reads the same optimum back.
    for mode in [Mode::Furthest, Mode::Closest] {
        let g = zmaxip_to_geometry(&tensor, mode).map_err(e2s)?;
        let opt = geometry_extreme_pair(&g).map_err(e2s)?.opt;
        check(opt.is_zero(), || {
            format!("{mode:?}: geometry optimum {opt}")
        })?;
    }
    Ok(format!("{pairs} pairs over [-2,2]^2, zero exceptions"))
}

fn ma_protocol() -> Outcome {
    let n = 64;
    let t = maxip_core::protosim::ma::default_t(n);
    let m = n.div_ceil(t) as u64;
    let mut notes = Vec::new();
    for (k, q) in [13u64, 17, 101, 257].into_iter().enumerate() {
        let p = rs_prime_protocol(n, t, q).map_err(e2s)?;
        for s in 0..5u64 {
            let (x, y) = (
                random_bits(n, 100 * k as u64 + 2 * s),
                random_bits(n, 100 * k as u64 + 2 * s + 1),
            );
            let honest = p.honest_advice(&x, &y).map_err(e2s)?;
            check(p.accept_count(&x, &y, &honest) == q, || {
                format!("completeness q={q}")
            })?;
            let truth = p.claim(&honest);
            for delta in 1..4 {
                let cheat = p.cheat_advice(&x, &y, (truth + delta) % q).map_err(e2s)?;
                let acc = p.accept_count(&x, &y, &cheat);
                check(acc <= 2 * m - 2, || {
                    format!("q={q}: cheat accepted on {acc} > {} alphas", 2 * m - 2)
                })?;
            }
        }
        notes.push(q.to_string());
    }

    let ma = MaProtocol::new(n, MaConfig::default()).map_err(e2s)?;
    let (x, y) = (random_bits(n, 900), random_bits(n, 901));
    let ip = x.iter().zip(&y).filter(|(a, b)| **a && **b).count() as u64;
    let honest = ma.honest_advice(&x, &y).map_err(e2s)?;
    check(ma.acceptance_probability(&x, &y, &honest).is_one(), || {
        "wrapper completeness".into()
    })?;
    let cheat = ma.cheating_advice(&x, &y, ip + 1).map_err(e2s)?;
    let accepted = (0..2000u64)
        .filter(|&s| ma.run(&x, &y, &cheat, 5000 + s).accepted)
        .count();
    let reject = 1.0 - accepted as f64 / 2000.0;
    check(reject >= 0.40, || {
        format!("wrapper rejection rate {reject} < 0.40")
    })?;
    let mut worst = BigRational::zero();
    for z in (0..=n as u64).filter(|&z| z != ip) {
        worst = worst.max(ma.bad_prime_fraction(ip, z));
    }
    check(worst <= rat(1, 10), || {
        format!("bad-prime fraction {worst} > 1/10")
    })?;
    Ok(format!(
        "T={t}: completeness 1 and cheats within (2m-2)/q = {}/q for q in {{{}}}; wrapper ({} primes{}) rejects {reject:.3} of 2000; worst bad-prime fraction {worst}",
        2 * m - 2,
        notes.join(","),
        ma.primes().len(),
        if ma.extended() { ", extended range" } else { "" }
    ))
}

fn gap_reduction() -> Outcome {
    let (n, d) = (4, 4);
    let mut yes = Vec::new();
    for s in 0..50u64 {
        yes.push(gen_planted_orthogonal(n, d, s).map_err(e2s)?);
    }
    let no = negatives(n, d, 0.8, 50, 1000);
    check(no.len() == 50, || "not enough negative instances".into())?;
    let mut advice_bits = 0;
    let mut semantics_checked = 0;
    for (k, inst) in yes.iter().chain(&no).enumerate() {
        let fam = ov_to_maxip_gap(inst, 0.5, 1).map_err(e2s)?;
        advice_bits = fam.protocol.cost().advice_bits;
        let opts = fam
            .instances
            .iter()
            .map(|g| max_ip_exact(g).map(|r| r.0))
            .collect::<Result<Vec<_>, _>>()
            .map_err(e2s)?;
        let opt = *opts.iter().max().unwrap();
        if k < 50 {
            check(opt == fam.threshold, || {
                format!("planted {k}: OPT {opt} != {}", fam.threshold)
            })?;
        } else {
            let bound = BigRational::from_integer(fam.threshold.into()) * &fam.soundness;
            check(BigRational::from_integer(opt.into()) <= bound, || {
                format!("negative {k}: OPT {opt} > {bound}")
            })?;
        }
        // Dot products count accepting random strings.
        if k % 10 == 0 {
            for code in (0..fam.instances.len() as u64).step_by(37) {
                let s = fam.protocol.decode_advice(code);
                for (i, x) in inst.a().rows().iter().enumerate() {
                    for (j, y) in inst.b().rows().iter().enumerate() {
                        let dot = fam.instances[code as usize].dot(ArgPair::new(i, j));
                        check(dot == fam.protocol.accept_count(x, y, s.as_ref()), || {
                            format!("instance {k}, advice {code}, pair ({i},{j})")
                        })?;
                        semantics_checked += 1;
                    }
                }
            }
        }
    }
    check(advice_bits <= 10, || {
        format!("advice {advice_bits} bits > 10")
    })?;
    Ok(format!(
        "d={d}, {advice_bits} advice bits: 50 planted reach 2^coin, 50 negatives within soundness; {semantics_checked} dots equal accept counts"
    ))
}

fn upp_family() -> Outcome {
    for (d, ell) in [(2, 2), (4, 2)] {
        let fam = np_upp_family(d, ell).map_err(e2s)?;
        let inputs = all_inputs(d);
        let alices: Vec<Vec<BigInt>> = inputs
            .iter()
            .map(|x| fam.alice(0, x))
            .collect::<Result<_, _>>()
            .map_err(e2s)?;
        for (yc, y) in inputs.iter().enumerate() {
            let bobs: Vec<Vec<BigInt>> = (0..fam.m())
                .map(|i| fam.bob(i, y))
                .collect::<Result<_, _>>()
                .map_err(e2s)?;
            for (xc, u) in alices.iter().enumerate() {
                let signs: Vec<bool> = bobs
                    .iter()
                    .map(|v| u.iter().zip(v).map(|(a, b)| a * b).sum::<BigInt>() >= BigInt::zero())
                    .collect();
                if xc & yc == 0 {
                    check(signs.iter().any(|s| *s), || {
                        format!("(d={d}): orthogonal ({xc},{yc}) has no index")
                    })?;
                } else {
                    check(signs.iter().all(|s| !*s), || {
                        format!("(d={d}): ({xc},{yc}) accepted")
                    })?;
                }
            }
        }
    }
    for s in 0..100u64 {
        let inst = gen_random_instance(6, 4, 0.6, s).map_err(e2s)?;
        check(
            upp_reduction_decide(&inst, 2).map_err(e2s)? == has_orth(&inst),
            || format!("instance {s}"),
        )?;
    }
    Ok("sign conditions exhaustive at (2,2) and (4,2); 100/100 decisions agree".into())
}

fn or_polynomial() -> Outcome {
    let eps = rat(1, 8);
    let p = build_or_approx_poly(16, &eps).map_err(e2s)?;
    check(p.values.len() == 17 && p.max_error() <= eps, || {
        format!("max weight error {}", p.max_error())
    })?;
    for d in 1..=10 {
        let p = build_or_approx_poly(d, &eps).map_err(e2s)?;
        let c = fourier_transform(&p);
        let s = if d <= 6 {
            Some(compile_standard_coeffs(&c, &eps).map_err(e2s)?)
        } else {
            None
        };
        for z in all_inputs(d) {
            let w = z.iter().filter(|b| **b).count();
            check(c.eval_explicit(&z) == p.values[w], || {
                format!("Fourier reconstruction d={d}")
            })?;
            if let Some(s) = &s {
                let f = s.eval_fourier_explicit(&z);
                check(
                    f == s.eval_standard_explicit(&z) && f == s.eval_weight(w),
                    || format!("basis change d={d}"),
                )?;
            }
        }
    }
    let g = find_gadget(8).ok_or("no gadget")?;
    check(g.violations().is_empty(), || {
        format!("gadget violations {:?}", g.violations())
    })?;
    let e2 = rat(1, 9);
    let s2 = compile_standard_coeffs(
        &fourier_transform(&build_or_approx_poly(2, &e2).map_err(e2s)?),
        &e2,
    )
    .map_err(e2s)?;
    for x in all_inputs(2) {
        let ex = pm1_encode(&x, &s2, &g, true).map_err(e2s)?;
        for y in all_inputs(2) {
            let ey = pm1_encode(&y, &s2, &g, false).map_err(e2s)?;
            let dot: i64 = ex
                .iter()
                .zip(&ey)
                .map(|(a, b)| (*a as i64) * (*b as i64))
                .sum();
            check(BigInt::from(dot) == implicit_dot(&x, &y, &s2, &g), || {
                format!("explicit/implicit {x:?} {y:?}")
            })?;
        }
    }
    let (n, d) = (6, 16);
    let no = negatives(n, d, 0.7, 20, 500);
    for (k, inst) in (0..20u64)
        .map(|s| gen_planted_orthogonal(n, d, s).unwrap())
        .chain(no)
        .enumerate()
    {
        let gap = ov_to_pm1_gap(&inst, &eps).map_err(e2s)?;
        check(gap.no_bound <= &gap.threshold * &eps, || {
            "no-bound above T eps".into()
        })?;
        let opt = BigRational::from_integer(gap.max_ip());
        if k < 20 {
            check(opt >= gap.threshold, || format!("planted {k}: OPT below T"))?;
        } else {
            check(opt <= gap.no_bound, || {
                format!("negative {k}: OPT above T eps")
            })?;
        }
    }
    Ok(format!(
        "d=16 degree {} max error {} <= 1/8; reconstruction d<=10, basis change d<=6; gadget g={} exact on 9 pairs; d=2 dots agree; 20+20 gap instances",
        p.degree,
        p.max_error(),
        g.g
    ))
}

fn instance_count() -> Outcome {
    let inst = gen_random_instance(3, 6, 0.5, 1).map_err(e2s)?;
    let fam = ov_to_zov(&inst, 3).map_err(e2s)?;
    check(fam.instances.len() == 100, || {
        format!("{} instances", fam.instances.len())
    })?;
    let ones = gen_all_ones(2, 6).map_err(e2s)?;
    check(
        ov_to_zov(&ones, 3).map_err(e2s)?.instances.len() == 100,
        || "count depends on input".into(),
    )?;
    Ok("ov_to_zov(d=6, l=3) emits 100 instances".into())
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("CRT reduction equivalence", crt_equivalence),
        ("multiplicative bracket", mult_bracket),
        ("additive guarantee", additive_guarantee),
        ("geometry pipeline", geometry_pipeline),
        ("tensor identity", tensor_identity),
        ("MA protocol", ma_protocol),
        ("gap reduction", gap_reduction),
        ("NP.UPP family", upp_family),
        ("OR-polynomial pipeline", or_polynomial),
        ("instance-count bookkeeping", instance_count),
    ];
    let total = Instant::now();
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("[PASS] {:>2} {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("[FAIL] {:>2} {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed in {:.1}s",
        criteria.len() - failed,
        total.elapsed().as_secs_f64()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
