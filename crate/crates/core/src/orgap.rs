//! OV to {-1,1} gap Max-IP through a low-degree polynomial approximating
//! the indicator of `x.y = 0`. The polynomial is built from a shifted
//! Chebyshev polynomial in the Hamming weight, moved to the Fourier basis,
//! discretized, rewritten over monomials `z_T` and finally encoded as ±1
//! vectors with a gadget that realizes `a * b` for `a, b` in {-1,0,1}.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::binomial;
use crate::error::{invalid, Error, Result};
use crate::instance::{ArgPair, BooleanInstance, Instance, IntegerInstance, VectorSet};

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn big(n: &BigUint) -> BigInt {
    BigInt::from(n.clone())
}

/// A polynomial in `z` that depends only on `|z|`, stored by weight.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetricPoly {
    pub d: usize,
    pub degree: usize,
    /// `values[w] = P(z)` for `|z| = w`.
    pub values: Vec<BigRational>,
}

impl SymmetricPoly {
    /// `max_w |P(w) - [w = 0]|`.
    pub fn max_error(&self) -> BigRational {
        self.values
            .iter()
            .enumerate()
            .map(|(w, v)| {
                if w == 0 {
                    (BigRational::one() - v).abs()
                } else {
                    v.abs()
                }
            })
            .max()
            .unwrap_or_else(BigRational::zero)
    }
}

/// `ceil(3 sqrt(d ln(1/eps)))`.
pub fn degree_budget(d: usize, eps: &BigRational) -> usize {
    let e = eps.to_f64().unwrap_or(0.5);
    (3.0 * (d as f64 * (1.0 / e).ln()).sqrt()).ceil() as usize
}

fn chebyshev(deg: usize, s: &BigRational) -> BigRational {
    let (mut prev, mut cur) = (BigRational::one(), s.clone());
    if deg == 0 {
        return prev;
    }
    for _ in 1..deg {
        let next = BigRational::from_integer(2.into()) * s * &cur - &prev;
        prev = std::mem::replace(&mut cur, next);
    }
    cur
}

/// `prod_{k=1}^{d} (1 - w/k)`: exact, degree `d`.
fn exact_poly(d: usize) -> SymmetricPoly {
    let values = (0..=d)
        .map(|w| {
            if w == 0 {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
        .collect();
    SymmetricPoly {
        d,
        degree: d,
        values,
    }
}

/// Symmetric `P` with `P(0) >= 1 - eps`, `0 <= P(w) <= eps` for `w >= 1`.
/// With `s(w) = (d + 1 - 2w) / (d - 1)` and `eta = 1 / T_D(s(0))`,
/// `P(w) = (T_D(s(w)) eta + eta) / (1 + eta)`, with the smallest `D` that
/// meets `eps`.
pub fn build_or_approx_poly(d: usize, eps: &BigRational) -> Result<SymmetricPoly> {
    if d == 0 {
        return Err(invalid("d must be at least 1"));
    }
    if !eps.is_positive() || *eps >= rat(1, 2) {
        return Err(invalid(format!("eps must be in (0, 1/2), got {eps}")));
    }
    let budget = degree_budget(d, eps);
    if d == 1 {
        return Ok(exact_poly(1));
    }
    let s = |w: usize| rat(d as i64 + 1 - 2 * w as i64, d as i64 - 1);
    for deg in 1..d {
        let eta = chebyshev(deg, &s(0)).recip();
        let values: Vec<BigRational> = (0..=d)
            .map(|w| (chebyshev(deg, &s(w)) * &eta + &eta) / (BigRational::one() + &eta))
            .collect();
        let p = SymmetricPoly {
            d,
            degree: deg,
            values,
        };
        if p.max_error() <= *eps {
            return check_budget(p, budget);
        }
    }
    check_budget(exact_poly(d), budget)
}

fn check_budget(p: SymmetricPoly, budget: usize) -> Result<SymmetricPoly> {
    if p.degree > budget {
        return Err(Error::BudgetExceeded {
            what: "polynomial degree",
            required: p.degree.to_string(),
            limit: budget.to_string(),
        });
    }
    Ok(p)
}

/// `K_s(w) = sum_j (-1)^j C(w, j) C(d - w, s - j)`: the sum of `chi_S(x)`
/// over `|S| = s` for any fixed `x` of weight `w`, and also the sum over
/// `|x| = s` for any fixed `S` of size `w`.
pub fn krawtchouk(d: usize, s: usize, w: usize) -> BigInt {
    (0..=s.min(w))
        .map(|j| {
            let term =
                big(&binomial(w as u64, j as u64)) * big(&binomial((d - w) as u64, (s - j) as u64));
            if j % 2 == 0 {
                term
            } else {
                -term
            }
        })
        .sum()
}

/// Fourier coefficients `c_s` for `|S| = s`, `0 <= s <= D`.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierCoeffs {
    pub d: usize,
    pub c: Vec<BigRational>,
}

impl FourierCoeffs {
    pub fn degree(&self) -> usize {
        self.c.len().saturating_sub(1)
    }

    /// `sum_S c_|S| chi_S(z)` by explicit subset enumeration.
    pub fn eval_explicit(&self, z: &[bool]) -> BigRational {
        subsets_up_to(self.d, self.degree())
            .map(|set| {
                let flips = set.iter().filter(|&&i| z[i]).count();
                let c = &self.c[set.len()];
                if flips % 2 == 0 {
                    c.clone()
                } else {
                    -c.clone()
                }
            })
            .sum()
    }
}

/// `c_s = 2^-d sum_w P(w) K_w(s)`.
pub fn fourier_transform(p: &SymmetricPoly) -> FourierCoeffs {
    let d = p.d;
    let denom = BigRational::from_integer(BigInt::one() << d);
    let c = (0..=p.degree)
        .map(|s| {
            let sum: BigRational = p
                .values
                .iter()
                .enumerate()
                .map(|(w, v)| v * BigRational::from_integer(krawtchouk(d, w, s)))
                .sum();
            sum / &denom
        })
        .collect();
    FourierCoeffs { d, c }
}

/// Subsets of `[d]` of size at most `k`, as sorted index lists.
fn subsets_up_to(d: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    (0u64..1 << d)
        .filter(move |m| m.count_ones() as usize <= k)
        .map(move |m| (0..d).filter(|i| m >> i & 1 == 1).collect())
}

#[derive(Clone, Debug, PartialEq)]
pub struct StandardCoeffs {
    pub d: usize,
    pub degree: usize,
    /// `M = sum_{k <= D} C(d, k)`.
    pub m: BigUint,
    /// `2M / eps`.
    pub scale: BigRational,
    pub c_hat: Vec<BigInt>,
    pub c_tilde: Vec<BigInt>,
    /// `M^2 2^D 2 / eps`.
    pub bound: BigRational,
}

impl StandardCoeffs {
    /// Integer block width `ceil(B)`.
    pub fn block_width(&self) -> BigInt {
        self.bound.ceil().to_integer()
    }

    /// `P^(z) = sum_{|T| <= D} c~_|T| C(|z|, |T|)` in closed form.
    pub fn eval_weight(&self, w: usize) -> BigInt {
        self.c_tilde
            .iter()
            .enumerate()
            .map(|(t, c)| c * big(&binomial(w as u64, t as u64)))
            .sum()
    }

    /// `sum_{|T| <= D} c~_|T| z_T` by subset enumeration.
    pub fn eval_standard_explicit(&self, z: &[bool]) -> BigInt {
        subsets_up_to(self.d, self.degree)
            .filter(|set| set.iter().all(|&i| z[i]))
            .map(|set| self.c_tilde[set.len()].clone())
            .sum()
    }

    /// `sum_S c^_|S| chi_S(z)` by subset enumeration.
    pub fn eval_fourier_explicit(&self, z: &[bool]) -> BigInt {
        subsets_up_to(self.d, self.degree)
            .map(|set| {
                let c = self.c_hat[set.len()].clone();
                if set.iter().filter(|&&i| z[i]).count() % 2 == 0 {
                    c
                } else {
                    -c
                }
            })
            .sum()
    }
}

pub fn compile_standard_coeffs(c: &FourierCoeffs, eps: &BigRational) -> Result<StandardCoeffs> {
    if !eps.is_positive() {
        return Err(invalid("eps must be positive"));
    }
    let (d, deg) = (c.d, c.degree());
    let m: BigUint = (0..=deg).map(|k| binomial(d as u64, k as u64)).sum();
    let mq = BigRational::from_integer(big(&m));
    let scale = BigRational::from_integer(2.into()) * &mq / eps;
    let c_hat: Vec<BigInt> =
        c.c.iter()
            .map(|v| (v * &scale).floor().to_integer())
            .collect();
    let c_tilde = (0..=deg)
        .map(|t| {
            let inner: BigInt = (t..=deg)
                .map(|s| big(&binomial((d - t) as u64, (s - t) as u64)) * &c_hat[s])
                .sum();
            BigInt::from(-2).pow(t as u32) * inner
        })
        .collect();
    let bound = &mq
        * &mq
        * BigRational::from_integer(BigInt::one() << deg)
        * BigRational::from_integer(2.into())
        / eps;
    Ok(StandardCoeffs {
        d,
        degree: deg,
        m,
        scale,
        c_hat,
        c_tilde,
        bound,
    })
}

/// ±1 gadget of even width `g`: `x[a] . y[b] = lambda a b` for all
/// `a, b` in {-1, 0, 1}; index `a + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Gadget {
    pub g: usize,
    pub lambda: i64,
    pub x: [Vec<i8>; 3],
    pub y: [Vec<i8>; 3],
}

impl Gadget {
    pub fn dot(&self, a: i8, b: i8) -> i64 {
        self.x[(a + 1) as usize]
            .iter()
            .zip(&self.y[(b + 1) as usize])
            .map(|(u, v)| (*u as i64) * (*v as i64))
            .sum()
    }

    /// Pairs `(a, b)` where the identity fails.
    pub fn violations(&self) -> Vec<(i8, i8)> {
        let mut out = Vec::new();
        for a in -1..=1i8 {
            for b in -1..=1i8 {
                if self.dot(a, b) != self.lambda * (a as i64) * (b as i64) {
                    out.push((a, b));
                }
            }
        }
        out
    }
}

/// The width-2 gadget `0 -> (-1, 1)` on Alice's side and `(1, -1)` on
/// Bob's, with `±1 -> ±(1, 1)`. It gives `-2` at `(0, 0)`.
pub fn naive_gadget() -> Gadget {
    Gadget {
        g: 2,
        lambda: 2,
        x: [vec![-1, -1], vec![-1, 1], vec![1, 1]],
        y: [vec![-1, -1], vec![1, -1], vec![1, 1]],
    }
}

fn sign_vec(g: usize, bits: u32) -> Vec<i8> {
    (0..g)
        .map(|i| if bits >> i & 1 == 1 { -1 } else { 1 })
        .collect()
}

/// Exhaustive search for the narrowest valid gadget over even widths at
/// most `max_g`. Flipping a coordinate on both sides preserves every dot
/// product, so Alice's image of `1` is fixed to all ones.
pub fn find_gadget(max_g: usize) -> Option<Gadget> {
    (2..=max_g).step_by(2).find_map(|g| {
        let all = 1u32 << g;
        let ones = sign_vec(g, 0);
        let dot = |u: &[i8], v: &[i8]| {
            u.iter()
                .zip(v)
                .map(|(a, b)| (*a as i64) * (*b as i64))
                .sum::<i64>()
        };
        for y1 in 0..all {
            let y1 = sign_vec(g, y1);
            let lambda = dot(&ones, &y1);
            if lambda <= 0 {
                continue;
            }
            for xm in 0..all {
                let xm = sign_vec(g, xm);
                if dot(&xm, &y1) != -lambda {
                    continue;
                }
                for x0 in 0..all {
                    let x0 = sign_vec(g, x0);
                    if dot(&x0, &y1) != 0 {
                        continue;
                    }
                    for ym in 0..all {
                        let ym = sign_vec(g, ym);
                        if dot(&ones, &ym) != -lambda
                            || dot(&xm, &ym) != lambda
                            || dot(&x0, &ym) != 0
                        {
                            continue;
                        }
                        for y0 in 0..all {
                            let y0 = sign_vec(g, y0);
                            if [&ones, &xm, &x0].iter().all(|u| dot(u, &y0) == 0) {
                                return Some(Gadget {
                                    g,
                                    lambda,
                                    x: [xm.clone(), x0.clone(), ones.clone()],
                                    y: [ym.clone(), y0, y1.clone()],
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    })
}

/// Widest explicit encoding the reduction will materialize.
pub const MAX_EXPLICIT_D: usize = 2;

/// Three-valued encoding: one block of `ceil(B)` slots per `T` with
/// `|T| <= D`; Alice writes `sgn(c~_|T|) x_T` into the first `|c~_|T||`
/// slots and Bob writes `y_T`, so the block contributes `c~_|T| z_T`.
/// The empty set's block is always on.
pub fn ternary_encode(v: &[bool], coeffs: &StandardCoeffs, alice: bool) -> Result<Vec<i8>> {
    let width = coeffs
        .block_width()
        .to_usize()
        .ok_or_else(|| invalid("block width does not fit in memory"))?;
    let mut out = Vec::new();
    for set in subsets_up_to(coeffs.d, coeffs.degree) {
        let on = set.iter().all(|&i| v[i]);
        let c = &coeffs.c_tilde[set.len()];
        let len = c
            .abs()
            .to_usize()
            .expect("coefficient bounded by block width");
        debug_assert!(len <= width);
        let val: i8 = match (on, alice) {
            (false, _) => 0,
            (true, false) => 1,
            (true, true) => {
                if c.is_negative() {
                    -1
                } else {
                    1
                }
            }
        };
        out.extend(std::iter::repeat_n(val, len));
        out.extend(std::iter::repeat_n(0, width - len));
    }
    Ok(out)
}

/// ±1 encoding of length `g * ceil(B) * M`.
pub fn pm1_encode(
    v: &[bool],
    coeffs: &StandardCoeffs,
    gadget: &Gadget,
    alice: bool,
) -> Result<Vec<i8>> {
    if coeffs.d > MAX_EXPLICIT_D {
        return Err(Error::BudgetExceeded {
            what: "explicit ±1 encoding dimension (use implicit_dot)",
            required: format!("d = {}", coeffs.d),
            limit: format!("d <= {MAX_EXPLICIT_D}"),
        });
    }
    let table = if alice { &gadget.x } else { &gadget.y };
    Ok(ternary_encode(v, coeffs, alice)?
        .into_iter()
        .flat_map(|a| table[(a + 1) as usize].iter().copied())
        .collect())
}

/// `lambda P^(x ⊙ y)` without materializing either vector.
pub fn implicit_dot(x: &[bool], y: &[bool], coeffs: &StandardCoeffs, gadget: &Gadget) -> BigInt {
    let w = x.iter().zip(y).filter(|(a, b)| **a && **b).count();
    coeffs.eval_weight(w) * gadget.lambda
}

/// Internal accuracy for a requested ratio `eps`.
pub fn inner_eps(eps: &BigRational) -> BigRational {
    if *eps <= rat(1, 2) {
        eps / BigRational::from_integer(3.into())
    } else {
        eps / (BigRational::from_integer(2.into()) + eps * BigRational::from_integer(2.into()))
    }
}

#[derive(Clone, Debug)]
pub struct Pm1GapInstance {
    pub source: BooleanInstance,
    pub eps: BigRational,
    pub inner_eps: BigRational,
    pub coeffs: StandardCoeffs,
    pub gadget: Gadget,
    /// `g * ceil(B) * M`.
    pub d1: BigInt,
    /// `lambda (2M / eps') (1 - 2 eps')`.
    pub threshold: BigRational,
    /// `lambda (2M / eps') 2 eps'`; at most `threshold * eps`.
    pub no_bound: BigRational,
}

impl Pm1GapInstance {
    pub fn dot(&self, pair: ArgPair) -> BigInt {
        implicit_dot(
            self.source.a().row(pair.index_a),
            self.source.b().row(pair.index_b),
            &self.coeffs,
            &self.gadget,
        )
    }

    /// Optimum over all pairs from the implicit evaluator.
    pub fn max_ip(&self) -> BigInt {
        let nb = self.source.b().len();
        (0..self.source.a().len() * nb)
            .into_par_iter()
            .map(|k| self.dot(ArgPair::new(k / nb, k % nb)))
            .max()
            .expect("instance is non-empty")
    }

    /// Materialized ±1 instance, for small `d` only.
    pub fn explicit(&self) -> Result<IntegerInstance> {
        let side = |rows: &[Vec<bool>], alice: bool| -> Result<VectorSet<BigInt>> {
            let rows = rows
                .iter()
                .map(|r| {
                    pm1_encode(r, &self.coeffs, &self.gadget, alice)
                        .map(|v| v.into_iter().map(BigInt::from).collect())
                })
                .collect::<Result<Vec<_>>>()?;
            let dim = self
                .d1
                .to_usize()
                .ok_or_else(|| invalid("dimension too large"))?;
            VectorSet::new(dim, rows)
        };
        Instance::new(
            side(self.source.a().rows(), true)?,
            side(self.source.b().rows(), false)?,
        )
    }
}

pub fn ov_to_pm1_gap(inst: &BooleanInstance, eps: &BigRational) -> Result<Pm1GapInstance> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if !eps.is_positive() || *eps >= BigRational::one() {
        return Err(invalid(format!("eps must be in (0, 1), got {eps}")));
    }
    let e = inner_eps(eps);
    let poly = build_or_approx_poly(inst.dim(), &e)?;
    let coeffs = compile_standard_coeffs(&fourier_transform(&poly), &e)?;
    let gadget = find_gadget(8).ok_or_else(|| invalid("no gadget of width <= 8"))?;
    let lam = BigRational::from_integer(gadget.lambda.into());
    let base = &lam * &coeffs.scale;
    let two = BigRational::from_integer(2.into());
    let threshold = &base * (BigRational::one() - &two * &e);
    let no_bound = &base * &two * &e;
    let d1 = BigInt::from(gadget.g) * coeffs.block_width() * big(&coeffs.m);
    Ok(Pm1GapInstance {
        source: inst.clone(),
        eps: eps.clone(),
        inner_eps: e,
        coeffs,
        gadget,
        d1,
        threshold,
        no_bound,
    })
}

/// Parses `p/q`, an integer or a finite decimal, exactly.
pub fn parse_ratio(s: &str) -> Result<BigRational> {
    let bad = || invalid(format!("cannot parse {s:?} as a ratio"));
    match s.split_once('/') {
        Some((n, d)) => {
            let (n, d): (BigInt, BigInt) = (
                n.trim().parse().map_err(|_| bad())?,
                d.trim().parse().map_err(|_| bad())?,
            );
            if d.is_zero() {
                return Err(bad());
            }
            Ok(BigRational::new(n, d))
        }
        None => {
            if let Ok(n) = s.trim().parse::<BigInt>() {
                return Ok(BigRational::from_integer(n));
            }
            let (int, frac) = s.trim().split_once('.').ok_or_else(bad)?;
            if !frac.chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            let den = BigInt::from(10).pow(frac.len() as u32);
            let num: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
            let g = num.gcd(&den);
            Ok(BigRational::new(num / &g, den / g))
        }
    }
}
