//! Recursive Chinese-remainder reduction `psi_{b,l}` from `b*l` bits to `l`
//! integers, its certificate sets, the inner-product decoder and the
//! OV -> Z-OV instance family.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{big_pow, crr, log_star, rem_u64, smallest_primes_in};
use crate::error::{invalid, Error, Result};
use crate::geomreduce::zov_to_zmaxip_tensor;
use crate::instance::{BooleanInstance, Instance, IntegerInstance, VectorSet};

/// Default cap on explicitly enumerated values or tables.
pub const DEFAULT_ENUM_BUDGET: u64 = 1 << 22;

#[derive(Clone, Debug, PartialEq)]
pub enum Variant {
    /// `b < l`: one CRR over the `b` bits of each group.
    Base { primes: Vec<u64> },
    /// CRR over the inner images of the micro-blocks.
    Recursive {
        b_micro: usize,
        primes: Vec<u64>,
        inner: Box<CrtReduction>,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrtReduction {
    ell: usize,
    b: usize,
    variant: Variant,
    l: BigUint,
}

/// `l^(6^(log* b) * b)`, the coordinate bound of the construction.
pub fn coordinate_bound(b: usize, ell: usize) -> BigUint {
    big_pow(ell as u64, 6u64.pow(log_star(b as f64)) * b as u64)
}

/// Whether `l^(6^(log* m) * m) <= b`, without materializing huge powers.
fn micro_fits(m: usize, ell: usize, b: usize) -> bool {
    let Some(exp) = 6u64
        .checked_pow(log_star(m as f64))
        .and_then(|e| e.checked_mul(m as u64))
    else {
        return false;
    };
    let mut acc: u64 = 1;
    for _ in 0..exp {
        acc = match acc.checked_mul(ell as u64) {
            Some(v) if v <= b as u64 => v,
            _ => return false,
        };
    }
    true
}

/// Largest `m >= 1` with `l^(6^(log* m) * m) <= b`. Requires `b >= l`.
pub fn micro_block_len(b: usize, ell: usize) -> usize {
    let mut m = 1;
    while micro_fits(m + 1, ell, b) {
        m += 1;
    }
    m
}

pub fn build_reduction(b: usize, ell: usize) -> Result<CrtReduction> {
    if b == 0 {
        return Err(invalid("b must be at least 1"));
    }
    if ell < 2 {
        return Err(invalid("ell must be at least 2"));
    }
    if b < ell {
        let primes = smallest_primes_in(ell as u64 + 1, (ell * ell) as u64, b)?;
        let l = primes.iter().map(|&p| BigUint::from(p)).product();
        return Ok(CrtReduction {
            ell,
            b,
            variant: Variant::Base { primes },
            l,
        });
    }
    let b_micro = micro_block_len(b, ell);
    let inner = build_reduction(b_micro, ell)?;
    let k = b.div_ceil(b_micro);
    let base = (b as u64)
        .saturating_mul(b as u64)
        .saturating_mul(ell as u64);
    // Residues must never wrap: every inner dot product stays below each prime.
    let no_wrap = inner.l.to_u64().map(|l| {
        (ell as u64)
            .saturating_mul(l.saturating_mul(l))
            .saturating_add(1)
    });
    let lo = base.max(no_wrap.unwrap_or(u64::MAX));
    let primes = smallest_primes_in(lo, base.saturating_mul(base), k)?;
    let l = primes.iter().map(|&p| BigUint::from(p)).product();
    Ok(CrtReduction {
        ell,
        b,
        variant: Variant::Recursive {
            b_micro,
            primes,
            inner: Box::new(inner),
        },
        l,
    })
}

impl CrtReduction {
    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn b(&self) -> usize {
        self.b
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    /// Product of the top-level primes; every coordinate is below it.
    pub fn l(&self) -> &BigUint {
        &self.l
    }

    pub fn primes(&self) -> &[u64] {
        match &self.variant {
            Variant::Base { primes } | Variant::Recursive { primes, .. } => primes,
        }
    }

    /// Input length `b * l`.
    pub fn input_len(&self) -> usize {
        self.b * self.ell
    }

    /// Exclusive upper bound on realizable dot products, `l * (L-1)^2 + 1`.
    pub fn v_bound(&self) -> BigUint {
        let top = &self.l - 1u32;
        &top * &top * self.ell + 1u32
    }

    /// The range bound `l^(6^(log* b) * 2b + 1)` of the original statement.
    pub fn loose_v_bound(&self) -> BigUint {
        big_pow(
            self.ell as u64,
            6u64.pow(log_star(self.b as f64)) * 2 * self.b as u64 + 1,
        )
    }

    pub fn apply(&self, x: &[bool]) -> Result<Vec<BigUint>> {
        if x.len() > self.input_len() {
            return Err(Error::DimensionMismatch {
                expected: self.input_len(),
                got: x.len(),
            });
        }
        let bit = |pos: usize| x.get(pos).copied().unwrap_or(false);
        match &self.variant {
            Variant::Base { primes } => Ok((0..self.ell)
                .map(|i| {
                    let residues: Vec<BigUint> = (0..self.b)
                        .map(|j| BigUint::from(bit(i * self.b + j) as u8))
                        .collect();
                    crr(&residues, primes)
                })
                .collect()),
            Variant::Recursive {
                b_micro,
                primes,
                inner,
            } => {
                // images[j] = psi_inner(x^[j]), where x^[j] concatenates the
                // j-th micro-block of every group; positions past b are zero.
                let images = (0..primes.len())
                    .map(|j| {
                        let micro: Vec<bool> = (0..self.ell)
                            .flat_map(|i| (0..*b_micro).map(move |t| (i, j * b_micro + t)))
                            .map(|(i, off)| off < self.b && bit(i * self.b + off))
                            .collect();
                        inner.apply(&micro)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((0..self.ell)
                    .map(|i| {
                        let residues: Vec<BigUint> =
                            images.iter().map(|img| img[i].clone()).collect();
                        crr(&residues, primes)
                    })
                    .collect())
            }
        }
    }

    fn member_below(&self, v: &BigUint, loose: bool) -> bool {
        let bound = if loose {
            self.loose_v_bound()
        } else {
            self.v_bound()
        };
        if *v >= bound {
            return false;
        }
        match &self.variant {
            Variant::Base { primes } => primes.iter().all(|&q| rem_u64(v, q) == 0),
            Variant::Recursive { primes, inner, .. } => primes
                .iter()
                .all(|&p| inner.member_below(&BigUint::from(rem_u64(v, p)), loose)),
        }
    }

    /// Membership in `V` under the tight realizable bound.
    pub fn v_membership(&self, v: &BigUint) -> bool {
        self.member_below(v, false)
    }

    /// Membership under the loose original range bound.
    pub fn v_membership_loose(&self, v: &BigUint) -> bool {
        self.member_below(v, true)
    }

    /// Reads `x.y` back from `v = psi(x).psi(y)`.
    pub fn decode_ip(&self, v: &BigUint) -> u64 {
        match &self.variant {
            Variant::Base { primes } => primes.iter().map(|&q| rem_u64(v, q)).sum(),
            Variant::Recursive { primes, inner, .. } => primes
                .iter()
                .map(|&p| inner.decode_ip(&BigUint::from(rem_u64(v, p))))
                .sum(),
        }
    }

    pub fn build_v_set(&self) -> Result<VSet> {
        self.build_v_set_with_budget(DEFAULT_ENUM_BUDGET)
    }

    pub fn build_v_set_with_budget(&self, budget: u64) -> Result<VSet> {
        let bound = self.v_bound();
        let too_big = |required: BigUint| Error::BudgetExceeded {
            what: "explicit V enumeration; use v_membership instead",
            required: required.to_string(),
            limit: budget.to_string(),
        };
        let members = match &self.variant {
            Variant::Base { primes } => {
                let q: BigUint = primes.iter().map(|&p| BigUint::from(p)).product();
                let count = (&bound - 1u32) / &q + 1u32;
                if count > BigUint::from(budget) {
                    return Err(too_big(count));
                }
                let count = count.to_u64().expect("within budget");
                (0..count).map(|i| &q * i).collect()
            }
            Variant::Recursive { primes, inner, .. } => {
                let inner_v = inner.build_v_set_with_budget(budget)?;
                let tuples = big_pow(inner_v.members.len() as u64, primes.len() as u64);
                let lifts = (&bound - 1u32) / &self.l + 1u32;
                let required = &tuples * &lifts;
                if required > BigUint::from(budget) {
                    return Err(too_big(required));
                }
                let mut out = Vec::new();
                let mut idx = vec![0usize; primes.len()];
                loop {
                    let residues: Vec<BigUint> =
                        idx.iter().map(|&i| inner_v.members[i].clone()).collect();
                    let mut t = crr(&residues, primes);
                    while t < bound {
                        out.push(t.clone());
                        t += &self.l;
                    }
                    if !advance(&mut idx, inner_v.members.len()) {
                        break;
                    }
                }
                out.sort();
                out
            }
        };
        Ok(VSet { bound, members })
    }

    /// Values in range grouped by decoded inner product, `V^0 .. V^{b*l}`.
    pub fn level_sets(&self, budget: u64) -> Result<Vec<Vec<BigUint>>> {
        let bound = self.v_bound();
        if bound > BigUint::from(budget) {
            return Err(Error::BudgetExceeded {
                what: "level-set enumeration",
                required: bound.to_string(),
                limit: budget.to_string(),
            });
        }
        let mut levels = vec![Vec::new(); self.input_len() + 1];
        let mut v = BigUint::zero();
        while v < bound {
            let k = self.decode_ip(&v) as usize;
            if k < levels.len() {
                levels[k].push(v.clone());
            }
            v += 1u32;
        }
        Ok(levels)
    }
}

/// Odometer step over `idx[i] in 0..radix`; false after the last tuple.
fn advance(idx: &mut [usize], radix: usize) -> bool {
    for slot in idx.iter_mut() {
        *slot += 1;
        if *slot < radix {
            return true;
        }
        *slot = 0;
    }
    false
}

/// Explicit certificate set: sorted members below `bound`.
#[derive(Clone, Debug, PartialEq)]
pub struct VSet {
    pub bound: BigUint,
    pub members: Vec<BigUint>,
}

impl VSet {
    pub fn contains(&self, v: &BigUint) -> bool {
        self.members.binary_search(v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

pub fn dot_u(a: &[BigUint], b: &[BigUint]) -> BigUint {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn to_signed(v: &[BigUint]) -> Vec<BigInt> {
    v.iter().map(|x| BigInt::from(x.clone())).collect()
}

/// One Z-OV instance per certificate value `t`.
#[derive(Clone, Debug)]
pub struct ZovFamily {
    pub reduction: CrtReduction,
    pub targets: Vec<BigUint>,
    pub instances: Vec<IntegerInstance>,
}

/// Row-wise images under `psi`.
pub type Images = Vec<Vec<BigUint>>;

/// Images of both sides under `psi`.
pub fn apply_instance(red: &CrtReduction, inst: &BooleanInstance) -> Result<(Images, Images)> {
    let side = |rows: &[Vec<bool>]| {
        rows.iter()
            .map(|r| red.apply(r))
            .collect::<Result<Vec<_>>>()
    };
    Ok((side(inst.a().rows())?, side(inst.b().rows())?))
}

/// The Z-OV instance for target `t`: `[psi(u), 1]` against `[psi(v), -t]`.
pub fn zov_instance(
    red: &CrtReduction,
    images_a: &[Vec<BigUint>],
    images_b: &[Vec<BigUint>],
    t: &BigUint,
) -> Result<IntegerInstance> {
    let dim = red.ell() + 1;
    let a = images_a
        .iter()
        .map(|u| {
            let mut row = to_signed(u);
            row.push(BigInt::one());
            row
        })
        .collect();
    let b = images_b
        .iter()
        .map(|v| {
            let mut row = to_signed(v);
            row.push(-BigInt::from(t.clone()));
            row
        })
        .collect();
    Instance::new(VectorSet::new(dim, a)?, VectorSet::new(dim, b)?)
}

pub fn ov_to_zov(inst: &BooleanInstance, ell: usize) -> Result<ZovFamily> {
    let d = inst.dim();
    if ell == 0 || ell > d {
        return Err(invalid(format!("ell must be in [1, d = {d}]")));
    }
    let red = build_reduction(d.div_ceil(ell), ell)?;
    let (ia, ib) = apply_instance(&red, inst)?;
    let v = red.build_v_set()?;
    let instances = v
        .members
        .iter()
        .map(|t| zov_instance(&red, &ia, &ib, t))
        .collect::<Result<Vec<_>>>()?;
    Ok(ZovFamily {
        reduction: red,
        targets: v.members,
        instances,
    })
}

/// Exact Boolean Max-IP by descending through the level sets, asking a
/// Z-Max-IP solver whether each tensor-squared Z-OV instance has optimum 0.
pub fn maxip_via_crt_queries(
    inst: &BooleanInstance,
    ell: usize,
    zmaxip_solver: &dyn Fn(&IntegerInstance) -> Result<BigInt>,
) -> Result<u64> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let d = inst.dim();
    if ell == 0 || ell > d {
        return Err(invalid(format!("ell must be in [1, d = {d}]")));
    }
    let red = build_reduction(d.div_ceil(ell), ell)?;
    let (ia, ib) = apply_instance(&red, inst)?;
    let levels = red.level_sets(DEFAULT_ENUM_BUDGET)?;
    for k in (0..=d.min(levels.len() - 1)).rev() {
        for t in &levels[k] {
            let zov = zov_instance(&red, &ia, &ib, t)?;
            if zmaxip_solver(&zov_to_zmaxip_tensor(&zov)?)?.is_zero() {
                return Ok(k as u64);
            }
        }
    }
    Err(invalid("no level set matched; reduction is inconsistent"))
}

/// A candidate reduction table indexed by the input bits read as an
/// integer, bit `i` of the index being coordinate `i`.
pub fn validate_candidate_reduction(table: &[Vec<BigInt>]) -> Option<Vec<BigInt>> {
    let mut d0 = BTreeSet::new();
    let mut d1 = BTreeSet::new();
    for (x, fx) in table.iter().enumerate() {
        for (y, fy) in table.iter().enumerate() {
            let v: BigInt = fx.iter().zip(fy).map(|(a, b)| a * b).sum();
            if x & y == 0 {
                d0.insert(v);
            } else {
                d1.insert(v);
            }
        }
    }
    if d0.is_disjoint(&d1) {
        Some(d0.into_iter().collect())
    } else {
        None
    }
}

/// Table of `red.apply` over all `2^{b*l}` inputs, for the validity check.
pub fn reduction_table(red: &CrtReduction) -> Result<Vec<Vec<BigInt>>> {
    let len = red.input_len();
    if len >= 20 {
        return Err(invalid("table domain too large"));
    }
    (0..1usize << len)
        .map(|x| {
            let bits: Vec<bool> = (0..len).map(|i| x >> i & 1 == 1).collect();
            Ok(to_signed(&red.apply(&bits)?))
        })
        .collect()
}

/// A reduction table with its certificate set.
pub type SearchHit = (Vec<Vec<BigInt>>, Vec<BigInt>);

/// Lexicographic search over all tables `{0,1}^{b*l} -> {0..L-1}^l` for
/// the first one admitting a certificate set.
pub fn brute_force_search_reduction(
    b: usize,
    ell: usize,
    l: u64,
    budget: u64,
) -> Result<Option<SearchHit>> {
    let domain = 1usize
        .checked_shl((b * ell) as u32)
        .filter(|_| b * ell < 20)
        .ok_or_else(|| invalid("domain too large"))?;
    let cells = domain * ell;
    let required = big_pow(l, cells as u64);
    if required > BigUint::from(budget) {
        return Err(Error::BudgetExceeded {
            what: "reduction table search",
            required: required.to_string(),
            limit: budget.to_string(),
        });
    }
    if l == 0 {
        return Ok(None);
    }
    // Most significant cell first, so the odometer runs in lexicographic order.
    let mut idx = vec![0usize; cells];
    loop {
        let table: Vec<Vec<BigInt>> = (0..domain)
            .map(|x| {
                (0..ell)
                    .map(|i| BigInt::from(idx[cells - 1 - (x * ell + i)]))
                    .collect()
            })
            .collect();
        if let Some(v) = validate_candidate_reduction(&table) {
            return Ok(Some((table, v)));
        }
        if !advance(&mut idx, l as usize) {
            return Ok(None);
        }
    }
}

/// Outcome of an exhaustive check of `psi` over all input pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub pairs: u64,
    /// Pairs where `x.y = 0` and `psi(x).psi(y) in V` disagree.
    pub membership_failures: u64,
    /// Pairs where `decode_ip` misreads `x.y`.
    pub decode_failures: u64,
    /// Inputs with a coordinate at or above `coordinate_bound(b, l)`.
    pub bound_failures: u64,
    pub max_coordinate: BigUint,
}

impl EquivalenceReport {
    pub fn ok(&self) -> bool {
        self.membership_failures == 0 && self.decode_failures == 0 && self.bound_failures == 0
    }
}

/// Checks membership, decoding and the coordinate bound on every pair of
/// inputs in `{0,1}^{b l}`, refusing more than `budget` pairs.
pub fn check_equivalence(red: &CrtReduction, budget: u64) -> Result<EquivalenceReport> {
    use rayon::prelude::*;
    let len = red.input_len();
    if len >= 32 || 1u64 << (2 * len) > budget {
        return Err(Error::BudgetExceeded {
            what: "exhaustive pair enumeration",
            required: format!("2^{}", 2 * len),
            limit: budget.to_string(),
        });
    }
    let bound = coordinate_bound(red.b(), red.ell());
    let images = (0..1u64 << len)
        .map(|x| red.apply(&(0..len).map(|i| x >> i & 1 == 1).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let max_coordinate = images.iter().flatten().max().cloned().unwrap_or_default();
    let bound_failures = images
        .iter()
        .filter(|img| img.iter().any(|c| *c >= bound))
        .count() as u64;
    let (membership_failures, decode_failures) = images
        .par_iter()
        .enumerate()
        .map(|(x, fx)| {
            images
                .iter()
                .enumerate()
                .fold((0u64, 0u64), |(m, d), (y, fy)| {
                    let ip = (x & y).count_ones() as u64;
                    let v = dot_u(fx, fy);
                    (
                        m + (red.v_membership(&v) != (ip == 0)) as u64,
                        d + (red.decode_ip(&v) != ip) as u64,
                    )
                })
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    Ok(EquivalenceReport {
        pairs: 1 << (2 * len),
        membership_failures,
        decode_failures,
        bound_failures,
        max_coordinate,
    })
}
