//! Deterministic t-multiplicative Max-IP via the power-of-sum polynomial
//! `(x.y)^r`, block sums of its monomial embedding and a naive matrix
//! product over block pairs.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{binomial, binomial_prefix, binomial_u64, iroot, isqrt};
use crate::error::{invalid, Error, Result};
use crate::instance::{BooleanInstance, RealInstance};

/// Default cap on the number of monomials `sum_{1 <= s <= r} C(d, s)`.
pub const DEFAULT_MONOMIAL_BUDGET: u64 = 1 << 22;

/// `c_s` for `1 <= s <= min(r, d)`: the number of surjections `[r] -> [s]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSumCoefficients {
    pub d: usize,
    pub r: u32,
    pub c_by_size: Vec<BigUint>,
}

impl PowerSumCoefficients {
    /// `c_s`, zero outside `1..=min(r, d)`.
    pub fn c(&self, s: usize) -> BigUint {
        if s == 0 || s > self.c_by_size.len() {
            BigUint::zero()
        } else {
            self.c_by_size[s - 1].clone()
        }
    }

    /// Number of monomials `S` with `1 <= |S| <= r`.
    pub fn term_count(&self) -> BigUint {
        binomial_prefix(self.d as u64, self.r as u64) - 1u32
    }
}

pub fn compute_power_coeffs(d: usize, r: u32) -> PowerSumCoefficients {
    let top = (r as usize).min(d);
    let c_by_size = (1..=top as u64)
        .map(|s| {
            let mut acc = BigInt::zero();
            for j in 0..=s {
                let term = BigInt::from(binomial(s, j)) * BigInt::from(s - j).pow(r);
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc.to_biguint().expect("surjection counts are positive")
        })
        .collect();
    PowerSumCoefficients { d, r, c_by_size }
}

/// Colex rank of a sorted subset among all subsets of size `1..=r`, sizes
/// ordered ascending.
struct SubsetRanker {
    offsets: Vec<u64>,
}

impl SubsetRanker {
    fn new(d: usize, r: usize) -> Self {
        let mut offsets = vec![0u64; r + 2];
        for s in 1..=r {
            offsets[s + 1] = offsets[s] + binomial_u64(d as u64, s as u64);
        }
        Self { offsets }
    }

    fn rank(&self, subset: &[u32]) -> u64 {
        let within: u64 = subset
            .iter()
            .enumerate()
            .map(|(i, &e)| binomial_u64(e as u64, i as u64 + 1))
            .sum();
        self.offsets[subset.len()] + within
    }
}

/// Calls `f` on every non-empty subset of `support` of size at most `r`.
fn for_each_subset(support: &[u32], r: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(
        support: &[u32],
        start: usize,
        r: usize,
        cur: &mut Vec<u32>,
        f: &mut impl FnMut(&[u32]),
    ) {
        for i in start..support.len() {
            cur.push(support[i]);
            f(cur);
            if cur.len() < r {
                rec(support, i + 1, r, cur, f);
            }
            cur.pop();
        }
    }
    rec(support, 0, r, &mut Vec::with_capacity(r), f);
}

/// Sparse block sum: `(rank, |S|, #{x in block : S within supp x})`, sorted by rank.
type SparseBlock = Vec<(u64, u8, u64)>;

fn block_sum(rows: &[Vec<bool>], r: usize, ranker: &SubsetRanker) -> SparseBlock {
    let mut acc: BTreeMap<u64, (u8, u64)> = BTreeMap::new();
    for row in rows {
        let support: Vec<u32> = row
            .iter()
            .enumerate()
            .filter(|(_, b)| **b)
            .map(|(i, _)| i as u32)
            .collect();
        for_each_subset(&support, r, &mut |s| {
            acc.entry(ranker.rank(s)).or_insert((s.len() as u8, 0)).1 += 1;
        });
    }
    acc.into_iter().map(|(k, (s, c))| (k, s, c)).collect()
}

/// `phi_X(X) . phi_Y(Y)` with weights `c_|S|` on the X side.
fn sparse_product_u128(x: &SparseBlock, y: &SparseBlock, c: &[u128]) -> u128 {
    let (mut i, mut j, mut acc) = (0, 0, 0u128);
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += c[x[i].1 as usize] * x[i].2 as u128 * y[j].2 as u128;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn sparse_product_big(x: &SparseBlock, y: &SparseBlock, c: &[BigUint]) -> BigUint {
    let (mut i, mut j, mut acc) = (0, 0, BigUint::zero());
    while i < x.len() && j < y.len() {
        match x[i].0.cmp(&y[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += &c[x[i].1 as usize] * (x[i].2 as u128 * y[j].2 as u128);
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

fn check_budget(d: usize, r: u32, budget: u64) -> Result<()> {
    let m = binomial_prefix(d as u64, r as u64) - 1u32;
    if m > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what: "monomial count",
            required: m.to_string(),
            limit: budget.to_string(),
        });
    }
    Ok(())
}

/// `P_r(A_i, B_j) = sum_{x in A_i, y in B_j} (x.y)^r` over consecutive
/// blocks of at most `b` rows, through the monomial embedding.
pub fn batch_power_sums(
    a: &[Vec<bool>],
    b_rows: &[Vec<bool>],
    r: u32,
    b: usize,
) -> Result<Vec<Vec<BigUint>>> {
    if b == 0 || r == 0 {
        return Err(invalid("block size and r must be at least 1"));
    }
    let d = a.first().or(b_rows.first()).map_or(0, Vec::len);
    check_budget(d, r, DEFAULT_MONOMIAL_BUDGET)?;
    Ok(batch_inner(a, b_rows, d, r, b, b))
}

fn batch_inner(
    a: &[Vec<bool>],
    b_rows: &[Vec<bool>],
    d: usize,
    r: u32,
    block_a: usize,
    block_b: usize,
) -> Vec<Vec<BigUint>> {
    let rr = (r as usize).min(d);
    let ranker = SubsetRanker::new(d, rr);
    let coeffs = compute_power_coeffs(d, r);
    let mut c_big = vec![BigUint::zero()];
    c_big.extend(coeffs.c_by_size.iter().cloned());
    let blocks_a: Vec<SparseBlock> = a
        .par_chunks(block_a)
        .map(|c| block_sum(c, rr, &ranker))
        .collect();
    let blocks_b: Vec<SparseBlock> = b_rows
        .par_chunks(block_b)
        .map(|c| block_sum(c, rr, &ranker))
        .collect();
    // Each entry is at most block_a block_b d^r.
    let bound =
        BigUint::from(block_a as u64 * block_b as u64) * BigUint::from(d.max(1) as u64).pow(r);
    let fits = bound.bits() < 120;
    let c_small: Vec<u128> = if fits {
        c_big.iter().map(|c| c.to_u128().expect("fits")).collect()
    } else {
        Vec::new()
    };
    blocks_a
        .par_iter()
        .map(|x| {
            blocks_b
                .iter()
                .map(|y| {
                    if fits {
                        BigUint::from(sparse_product_u128(x, y, &c_small))
                    } else {
                        sparse_product_big(x, y, &c_big)
                    }
                })
                .collect()
        })
        .collect()
}

/// `b = floor(t^(r/2)) = isqrt(floor(t^r))`, computed exactly from `t`.
pub fn block_size(t: f64, r: u32) -> Result<usize> {
    let tr = BigRational::from_float(t)
        .ok_or_else(|| invalid("t must be finite"))?
        .pow(r as i32);
    let floor = tr.floor().to_integer().to_biguint().expect("t > 0");
    isqrt(&floor)
        .to_usize()
        .map(|b| b.max(1))
        .ok_or_else(|| invalid("block size overflows"))
}

/// Degree from `r = k log n / log c` with `c = d / log n`,
/// `eps = min(log t / log c, 1)` and `k = 0.31 / (1 + 0.155 eps)`; lowered
/// until the monomial count fits the budget.
pub fn default_r(n: usize, d: usize, t: f64, budget: u64) -> u32 {
    let log_n = (n.max(2) as f64).log2();
    let c = d as f64 / log_n;
    let mut r = if c > 2.0 {
        let eps = (t.log2() / c.log2()).min(1.0);
        let k = 0.31 / (1.0 + 0.155 * eps);
        ((k * log_n / c.log2()).ceil() as u32).max(1)
    } else {
        2
    };
    while r > 1 && binomial_prefix(d as u64, r as u64) - 1u32 > BigUint::from(budget) {
        log::warn!("lowering r from {r}: monomial budget {budget} exceeded");
        r -= 1;
    }
    r
}

/// Largest `v` with `k <= v`, `v^r <= p` exactly, close to `p^(1/r)`.
fn root_value(p: &BigUint, r: u32) -> f64 {
    let k = iroot(p, r);
    let kf = k.to_f64().unwrap_or(f64::MAX);
    if k.pow(r) == *p {
        return kf;
    }
    let target = BigRational::from_integer(BigInt::from(p.clone()));
    let mut v = p.to_f64().unwrap_or(f64::MAX).powf(1.0 / r as f64).max(kf);
    while v > kf {
        match BigRational::from_float(v) {
            Some(q) if q.pow(r as i32) <= target => break,
            _ => v = f64::from_bits(v.to_bits() - 1),
        }
    }
    v.max(kf)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultResult {
    pub value: f64,
    /// The largest block power sum; `value` is its r-th root.
    pub power_sum: BigUint,
    pub r: u32,
    pub b: usize,
}

fn check_t(t: f64) -> Result<()> {
    if !t.is_finite() || t <= 1.0 {
        return Err(invalid(format!(
            "t must be a finite number above 1, got {t}"
        )));
    }
    Ok(())
}

fn resolve_r(n: usize, d: usize, t: f64, r: Option<u32>) -> Result<u32> {
    match r {
        Some(0) => Err(invalid("r must be at least 1")),
        Some(r) => Ok(r),
        None => Ok(default_r(n, d, t, DEFAULT_MONOMIAL_BUDGET)),
    }
}

/// Value `v` with `OPT <= v <= t * OPT`, deterministically.
pub fn approx_mult(inst: &BooleanInstance, t: f64, r: Option<u32>) -> Result<MultResult> {
    check_t(t)?;
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let r = resolve_r(inst.n(), inst.dim(), t, r)?;
    let b = block_size(t, r)?;
    let sums = batch_power_sums(inst.a().rows(), inst.b().rows(), r, b)?;
    let power_sum = sums.into_iter().flatten().max().expect("non-empty");
    Ok(MultResult {
        value: root_value(&power_sum, r),
        power_sum,
        r,
        b,
    })
}

/// Per-row values with `OPT(x, B) <= v_x <= t * OPT(x, B)`; only `B` is
/// blocked.
pub fn all_pair_approx_mult(inst: &BooleanInstance, t: f64, r: Option<u32>) -> Result<Vec<f64>> {
    check_t(t)?;
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let r = resolve_r(inst.n(), inst.dim(), t, r)?;
    let b = block_size(t, r)?;
    check_budget(inst.dim(), r, DEFAULT_MONOMIAL_BUDGET)?;
    let sums = batch_inner(inst.a().rows(), inst.b().rows(), inst.dim(), r, 1, b);
    // With singleton A-blocks each row carries a sum over b pairs only, so
    // the ratio is b^(1/r) <= t.
    Ok(sums
        .iter()
        .map(|row| root_value(row.iter().max().expect("non-empty"), r))
        .collect())
}

/// Degree-`r` multisets of `[d]` with multinomial coefficients.
fn multisets(d: usize, r: u32) -> Vec<(Vec<u32>, BigUint)> {
    fn rec(d: usize, left: u32, start: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if start == d {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let limit = if start + 1 == d { left } else { 0 };
        for e in (limit..=left).rev() {
            cur.push(e);
            rec(d, left - e, start + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, r, 0, &mut Vec::with_capacity(d), &mut out);
    let fact = |k: u32| (1..=k as u64).fold(BigUint::one(), |a, i| a * i);
    out.into_iter()
        .map(|alpha| {
            let denom: BigUint = alpha.iter().map(|&e| fact(e)).product();
            let coeff = fact(r) / denom;
            (alpha, coeff)
        })
        .collect()
}

fn monomial(x: &[BigRational], alpha: &[u32]) -> BigRational {
    x.iter()
        .zip(alpha)
        .filter(|(_, e)| **e > 0)
        .fold(BigRational::one(), |acc, (v, &e)| acc * v.pow(e as i32))
}

/// `(sum z_i)^r` through its multinomial expansion, for checking the
/// non-negative real embedding.
pub fn multinomial_expansion(z: &[BigRational], r: u32) -> BigRational {
    multisets(z.len(), r)
        .iter()
        .fold(BigRational::zero(), |acc, (alpha, c)| {
            acc + BigRational::from_integer(BigInt::from(c.clone())) * monomial(z, alpha)
        })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RealMultResult {
    /// `power_sum^(1/r)` in floating point.
    pub value: f64,
    /// Satisfies `OPT^r <= power_sum <= b^2 OPT^r <= t^r OPT^r` exactly.
    pub power_sum: BigRational,
    pub r: u32,
    pub b: usize,
}

/// Non-negative real mode: degree-exactly-`r` monomials with multinomial
/// coefficients, since multilinearization fails off the cube.
pub fn approx_mult_real(inst: &RealInstance, t: f64, r: Option<u32>) -> Result<RealMultResult> {
    check_t(t)?;
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let d = inst.dim();
    let r = resolve_r(inst.n(), d, t, r)?;
    let count = binomial(d as u64 + r as u64 - 1, r as u64);
    if count > BigUint::from(DEFAULT_MONOMIAL_BUDGET) {
        return Err(Error::BudgetExceeded {
            what: "multiset monomial count",
            required: count.to_string(),
            limit: DEFAULT_MONOMIAL_BUDGET.to_string(),
        });
    }
    let b = block_size(t, r)?;
    let terms = multisets(d, r);
    let embed = |rows: &[Vec<BigRational>], weighted: bool| -> Vec<BigRational> {
        terms
            .iter()
            .map(|(alpha, c)| {
                let s = rows
                    .iter()
                    .fold(BigRational::zero(), |acc, x| acc + monomial(x, alpha));
                if weighted {
                    s * BigRational::from_integer(BigInt::from(c.clone()))
                } else {
                    s
                }
            })
            .collect()
    };
    let ea: Vec<_> = inst
        .a()
        .rows()
        .par_chunks(b)
        .map(|c| embed(c, true))
        .collect();
    let eb: Vec<_> = inst
        .b()
        .rows()
        .par_chunks(b)
        .map(|c| embed(c, false))
        .collect();
    let power_sum = ea
        .par_iter()
        .map(|x| {
            eb.iter()
                .map(|y| {
                    x.iter()
                        .zip(y)
                        .fold(BigRational::zero(), |acc, (p, q)| acc + p * q)
                })
                .max()
                .expect("non-empty")
        })
        .max()
        .expect("non-empty");
    let value = power_sum.to_f64().unwrap_or(f64::MAX).powf(1.0 / r as f64);
    Ok(RealMultResult {
        value,
        power_sum,
        r,
        b,
    })
}
