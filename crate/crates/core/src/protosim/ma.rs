//! Multi-prime MA protocol for disjointness and inner product. Merlin sends
//! a presumed value `z` and one Reed-Solomon advice polynomial per prime;
//! Alice checks every package against `z`, then a uniform prime is chosen
//! and the base protocol runs over a field of that characteristic.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use rayon::prelude::*;

use super::field::{Field, Poly};
use super::rs::RsProtocol;
use super::CostReport;
use crate::arith::{ceil_log2, is_prime, smallest_primes_in};
use crate::error::{invalid, Error, Result};
use crate::generate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MaConfig {
    /// Take the `10 rho` smallest primes above `rho` when `[rho+1, rho^2]`
    /// is too short; otherwise such `n` is an error.
    pub allow_extended: bool,
    /// Block count override; the default balances advice and message.
    pub t_blocks: Option<usize>,
}

impl Default for MaConfig {
    fn default() -> Self {
        Self {
            allow_extended: true,
            t_blocks: None,
        }
    }
}

/// Smallest `rho >= 1` with `rho^rho >= n`.
pub fn rho(n: usize) -> u64 {
    let mut r = 1u64;
    while r.checked_pow(r as u32).is_some_and(|v| v < n as u64) {
        r += 1;
    }
    r
}

/// `ceil(sqrt(n log n / log log n))`, base-2 ceiling logs, within `[1, n]`.
pub fn default_t(n: usize) -> usize {
    let l = ceil_log2(n as u64).max(1) as f64;
    let ll = ceil_log2(l as u64).max(1) as f64;
    ((n as f64 * l / ll).sqrt().ceil() as usize).clamp(1, n.max(1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaAdvice {
    pub z: u64,
    pub packages: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaOutcome {
    pub accepted: bool,
    /// All packages agreed with `z` modulo their primes.
    pub consistent: bool,
    pub prime: u64,
    pub alpha: u64,
}

#[derive(Clone, Debug)]
pub struct MaProtocol {
    n: usize,
    rho: u64,
    primes: Vec<u64>,
    extended: bool,
    bases: Vec<RsProtocol>,
}

impl MaProtocol {
    pub fn new(n: usize, cfg: MaConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let rho = rho(n);
        let count = 10 * rho as usize;
        let (primes, extended) = match smallest_primes_in(rho + 1, rho * rho, count) {
            Ok(p) => (p, false),
            Err(_) if cfg.allow_extended => (primes_above(rho, count), true),
            Err(e) => return Err(e),
        };
        let t = cfg.t_blocks.unwrap_or_else(|| default_t(n));
        if t == 0 || t > n {
            return Err(invalid("need 1 <= T <= n"));
        }
        let m = n.div_ceil(t) as u64;
        // (2m - 2) / Q < 1/2 needs Q >= 4m - 3.
        let bases = primes
            .iter()
            .map(|&p| RsProtocol::new(n, t, Field::at_least(p, (4 * m).saturating_sub(3).max(2))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            n,
            rho,
            primes,
            extended,
            bases,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rho(&self) -> u64 {
        self.rho
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    pub fn extended(&self) -> bool {
        self.extended
    }

    pub fn t_blocks(&self) -> usize {
        self.bases[0].t_blocks()
    }

    pub fn bases(&self) -> &[RsProtocol] {
        &self.bases
    }

    fn ip(x: &[bool], y: &[bool]) -> u64 {
        x.iter().zip(y).filter(|(a, b)| **a && **b).count() as u64
    }

    pub fn honest_advice(&self, x: &[bool], y: &[bool]) -> Result<MaAdvice> {
        let packages = self
            .bases
            .iter()
            .map(|b| b.honest_advice(x, y))
            .collect::<Result<Vec<_>>>()?;
        Ok(MaAdvice {
            z: Self::ip(x, y),
            packages,
        })
    }

    /// Claims `z`: honest packages on primes where `z` happens to be right,
    /// the canonical cheat everywhere else.
    pub fn cheating_advice(&self, x: &[bool], y: &[bool], z: u64) -> Result<MaAdvice> {
        let packages = self
            .bases
            .iter()
            .map(|b| b.cheat_advice(x, y, b.field().from_int(z)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MaAdvice { z, packages })
    }

    fn consistent(&self, advice: &MaAdvice) -> bool {
        advice.packages.len() == self.bases.len()
            && self
                .bases
                .iter()
                .zip(&advice.packages)
                .all(|(b, s)| b.claim(s) == b.field().from_int(advice.z))
    }

    pub fn run_with(
        &self,
        x: &[bool],
        y: &[bool],
        advice: &MaAdvice,
        index: usize,
        alpha: u64,
    ) -> MaOutcome {
        let consistent = self.consistent(advice);
        let base = &self.bases[index];
        let accepted = consistent
            && base
                .run_with_alpha(x, y, &advice.packages[index], alpha)
                .accepted;
        MaOutcome {
            accepted,
            consistent,
            prime: self.primes[index],
            alpha,
        }
    }

    pub fn run(&self, x: &[bool], y: &[bool], advice: &MaAdvice, seed: u64) -> MaOutcome {
        let mut r = rng(seed);
        let index = r.gen_range(0..self.bases.len());
        let alpha = r.gen_range(0..self.bases[index].field().order());
        self.run_with(x, y, advice, index, alpha)
    }

    /// Exact acceptance probability over both coins.
    pub fn acceptance_probability(&self, x: &[bool], y: &[bool], advice: &MaAdvice) -> BigRational {
        if !self.consistent(advice) {
            return BigRational::from_integer(0.into());
        }
        let per_prime: Vec<BigRational> = self
            .bases
            .par_iter()
            .zip(&advice.packages)
            .map(|(b, s)| {
                BigRational::new(
                    BigInt::from(b.accept_count(x, y, s)),
                    BigInt::from(b.field().order()),
                )
            })
            .collect();
        let total: BigRational = per_prime.into_iter().sum();
        total / BigRational::from_integer(BigInt::from(self.bases.len()))
    }

    /// Fraction of primes dividing `|x.y - z|` (for `x.y != z`).
    pub fn bad_prime_fraction(&self, ip: u64, z: u64) -> BigRational {
        let diff = ip.abs_diff(z);
        let bad = self
            .primes
            .iter()
            .filter(|&&p| diff.is_multiple_of(p))
            .count();
        BigRational::new(BigInt::from(bad), BigInt::from(self.primes.len()))
    }

    pub fn cost(&self) -> CostReport {
        let el_max = self
            .bases
            .iter()
            .map(|b| b.field().element_bits())
            .max()
            .unwrap_or(0);
        let q_max = self
            .bases
            .iter()
            .map(|b| b.field().order())
            .max()
            .unwrap_or(1);
        CostReport {
            advice_bits: crate::arith::bits_for(self.n as u64) as u64
                + self
                    .bases
                    .iter()
                    .map(|b| b.advice_len() as u64 * b.field().element_bits())
                    .sum::<u64>(),
            coin_bits: ceil_log2(self.primes.len() as u64) as u64 + ceil_log2(q_max) as u64,
            message_bits: self.t_blocks() as u64 * el_max,
            rounds: 1,
        }
    }
}

fn primes_above(lo: u64, count: usize) -> Vec<u64> {
    (lo + 1..).filter(|&p| is_prime(p)).take(count).collect()
}

/// Runs the wrapper once. Without advice Merlin is honest.
pub fn ma_disj_improved(
    x: &[bool],
    y: &[bool],
    advice: Option<&MaAdvice>,
    seed: u64,
    cfg: MaConfig,
) -> Result<(MaOutcome, CostReport, bool)> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    let proto = MaProtocol::new(x.len(), cfg)?;
    let honest;
    let advice = match advice {
        Some(a) => a,
        None => {
            honest = proto.honest_advice(x, y)?;
            &honest
        }
    };
    Ok((
        proto.run(x, y, advice, seed),
        proto.cost(),
        proto.extended(),
    ))
}

pub fn protocol_cost(n: usize, cfg: MaConfig) -> Result<CostReport> {
    Ok(MaProtocol::new(n, cfg)?.cost())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::rng;
    use rand::Rng;

    fn random_bits(n: usize, seed: u64) -> Vec<bool> {
        let mut r = rng(seed);
        (0..n).map(|_| r.gen_bool(0.5)).collect()
    }

    #[test]
    fn parameters() {
        assert_eq!(rho(1), 1);
        assert_eq!(rho(4), 2);
        assert_eq!(rho(27), 3);
        assert_eq!(rho(64), 4);
        assert_eq!(rho(1024), 5);
        assert_eq!(default_t(1024), 51);
        assert_eq!(default_t(64), 12);
        let p = MaProtocol::new(64, MaConfig::default()).unwrap();
        assert!(p.extended());
        assert_eq!(p.primes().len(), 40);
        assert_eq!(p.primes()[0], 5);
        assert!(p.bases().iter().all(|b| b.field().order() >= 21));
        let strict = MaConfig {
            allow_extended: false,
            ..Default::default()
        };
        assert!(MaProtocol::new(64, strict).is_err());
    }

    #[test]
    fn honest_merlin_always_wins() {
        let p = MaProtocol::new(64, MaConfig::default()).unwrap();
        let x = random_bits(64, 1);
        let y: Vec<bool> = x.iter().map(|b| !b).collect();
        let adv = p.honest_advice(&x, &y).unwrap();
        assert_eq!(adv.z, 0);
        assert_eq!(
            p.acceptance_probability(&x, &y, &adv),
            BigRational::from_integer(1.into())
        );
        assert!((0..200).all(|s| p.run(&x, &y, &adv, s).accepted));
    }

    #[test]
    fn cheating_merlin_is_caught() {
        let p = MaProtocol::new(64, MaConfig::default()).unwrap();
        let (x, y) = (random_bits(64, 2), random_bits(64, 3));
        let ip = MaProtocol::ip(&x, &y);
        assert!(ip > 0);
        let adv = p.cheating_advice(&x, &y, 0).unwrap();
        assert!(p.bad_prime_fraction(ip, 0) <= BigRational::new(1.into(), 10.into()));
        let acc = p.acceptance_probability(&x, &y, &adv);
        assert!(acc <= BigRational::new(55.into(), 100.into()), "{acc}");
        // Inconsistent packages are rejected outright.
        let mut bad = p.honest_advice(&x, &y).unwrap();
        bad.z = 0;
        assert!(!p.run(&x, &y, &bad, 0).consistent);
    }

    #[test]
    fn costs_grow_with_n() {
        let c = |n| protocol_cost(n, MaConfig::default()).unwrap();
        let (a, b) = (c(256), c(1024));
        assert!(b.advice_bits > a.advice_bits);
        assert!(b.message_bits > a.message_bits);
        assert!(b.message_bits < 4 * a.message_bits);
        let one = protocol_cost(
            16,
            MaConfig {
                t_blocks: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let p = MaProtocol::new(
            16,
            MaConfig {
                t_blocks: Some(1),
                ..Default::default()
            },
        )
        .unwrap();
        let el = p
            .bases()
            .iter()
            .map(|b| b.field().element_bits())
            .max()
            .unwrap();
        assert_eq!(one.message_bits, el);
        assert_eq!(one.rounds, 1);
    }
}
