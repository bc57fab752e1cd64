//! Reed-Solomon MA protocol for the inner product modulo the field
//! characteristic. Inputs are cut into `T` blocks of `m = ceil(n/T)` bits;
//! each block is interpolated on the points `e_0 .. e_{m-1}` and Merlin
//! sends `s = sum_i px_i * py_i`, whose values at the points sum to `x.y`.

use rand::Rng;

use super::field::{Field, Poly};
use super::CostReport;
use crate::arith::ceil_log2;
use crate::error::{invalid, Result};
use crate::generate::rng;

#[derive(Clone, Debug)]
pub struct RsProtocol {
    n: usize,
    t_blocks: usize,
    m: usize,
    field: Field,
    basis: Vec<Poly>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RsOutcome {
    pub accepted: bool,
    /// `sum_j s(e_j)` for the advice used.
    pub claimed: u64,
    pub alpha: u64,
}

impl RsProtocol {
    pub fn new(n: usize, t_blocks: usize, field: Field) -> Result<Self> {
        if n == 0 || t_blocks == 0 || t_blocks > n {
            return Err(invalid("need 1 <= T <= n"));
        }
        let m = n.div_ceil(t_blocks);
        if field.order() < m as u64 {
            return Err(invalid("field smaller than the block length"));
        }
        let points: Vec<u64> = (0..m as u64).collect();
        let basis = field.lagrange_basis(&points);
        Ok(Self {
            n,
            t_blocks,
            m,
            field,
            basis,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t_blocks(&self) -> usize {
        self.t_blocks
    }

    pub fn block_len(&self) -> usize {
        self.m
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    /// Advice polynomials have at most this many coefficients.
    pub fn advice_len(&self) -> usize {
        2 * self.m - 1
    }

    /// Largest acceptance probability numerator of wrong advice, `2m - 2`.
    pub fn max_agreement(&self) -> u64 {
        2 * self.m as u64 - 2
    }

    fn block(&self, v: &[bool], i: usize) -> impl Iterator<Item = bool> + '_ {
        let v = v.to_vec();
        (0..self.m).map(move |j| v.get(i * self.m + j).copied().unwrap_or(false))
    }

    fn block_poly(&self, v: &[bool], i: usize) -> Poly {
        let f = &self.field;
        self.block(v, i)
            .zip(&self.basis)
            .filter(|(b, _)| *b)
            .fold(vec![0; self.m], |acc, (_, l)| f.poly_add(&acc, l))
    }

    /// Values `l_j(alpha)` of the Lagrange basis.
    fn basis_at(&self, alpha: u64) -> Vec<u64> {
        self.basis
            .iter()
            .map(|l| self.field.eval(l, alpha))
            .collect()
    }

    fn block_values(&self, v: &[bool], alpha: u64) -> Vec<u64> {
        let at = self.basis_at(alpha);
        (0..self.t_blocks)
            .map(|i| {
                self.block(v, i)
                    .zip(&at)
                    .filter(|(b, _)| *b)
                    .fold(0, |acc, (_, &l)| self.field.add(acc, l))
            })
            .collect()
    }

    fn check_input(&self, v: &[bool]) -> Result<()> {
        if v.len() != self.n {
            return Err(invalid(format!(
                "input length {} differs from n = {}",
                v.len(),
                self.n
            )));
        }
        Ok(())
    }

    pub fn honest_advice(&self, x: &[bool], y: &[bool]) -> Result<Poly> {
        self.check_input(x)?;
        self.check_input(y)?;
        let f = &self.field;
        let mut s = vec![0; self.advice_len()];
        for i in 0..self.t_blocks {
            let prod = f.poly_mul(&self.block_poly(x, i), &self.block_poly(y, i));
            s = f.poly_add(&s, &prod);
        }
        s.truncate(self.advice_len());
        Ok(s)
    }

    /// `sum_{j < m} s(e_j)`.
    pub fn claim(&self, advice: &[u64]) -> u64 {
        (0..self.m as u64).fold(0, |acc, e| self.field.add(acc, self.field.eval(advice, e)))
    }

    fn well_formed(&self, advice: &[u64]) -> bool {
        advice.len() <= self.advice_len() && advice.iter().all(|&c| c < self.field.order())
    }

    /// Bob's message: `py_i(alpha)` for every block.
    pub fn bob_message(&self, y: &[bool], alpha: u64) -> Vec<u64> {
        self.block_values(y, alpha)
    }

    pub fn alice_accepts(&self, x: &[bool], advice: &[u64], alpha: u64, msg: &[u64]) -> bool {
        if !self.well_formed(advice) || msg.len() != self.t_blocks {
            return false;
        }
        let f = &self.field;
        let lhs = self
            .block_values(x, alpha)
            .iter()
            .zip(msg)
            .fold(0, |acc, (&a, &b)| f.add(acc, f.mul(a, b)));
        lhs == f.eval(advice, alpha)
    }

    pub fn run_with_alpha(&self, x: &[bool], y: &[bool], advice: &[u64], alpha: u64) -> RsOutcome {
        let msg = self.bob_message(y, alpha);
        RsOutcome {
            accepted: self.alice_accepts(x, advice, alpha, &msg),
            claimed: self.claim(advice),
            alpha,
        }
    }

    pub fn run(&self, x: &[bool], y: &[bool], advice: &[u64], seed: u64) -> RsOutcome {
        let alpha = rng(seed).gen_range(0..self.field.order());
        self.run_with_alpha(x, y, advice, alpha)
    }

    /// Number of `alpha` values on which Alice accepts.
    pub fn accept_count(&self, x: &[bool], y: &[bool], advice: &[u64]) -> u64 {
        let at: Vec<Vec<u64>> = (0..self.field.order()).map(|a| self.basis_at(a)).collect();
        let f = &self.field;
        let block_vals = |v: &[bool], a: &[u64]| -> Vec<u64> {
            (0..self.t_blocks)
                .map(|i| {
                    self.block(v, i)
                        .zip(a)
                        .filter(|(b, _)| *b)
                        .fold(0, |acc, (_, &l)| f.add(acc, l))
                })
                .collect()
        };
        if !self.well_formed(advice) {
            return 0;
        }
        (0..f.order())
            .filter(|&alpha| {
                let a = &at[alpha as usize];
                let lhs = block_vals(x, a)
                    .iter()
                    .zip(block_vals(y, a))
                    .fold(0, |acc, (&u, v)| f.add(acc, f.mul(u, v)));
                lhs == f.eval(advice, alpha)
            })
            .count() as u64
    }

    /// Honest polynomial plus `g` with `g(e_0)` shifting the claim to
    /// `target` and `g` vanishing on `e_1 .. e_{2m-2}`, so the cheat
    /// survives exactly `2m - 2` of the `alpha` values.
    pub fn cheat_advice(&self, x: &[bool], y: &[bool], target: u64) -> Result<Poly> {
        let f = &self.field;
        let honest = self.honest_advice(x, y)?;
        let delta = f.sub(target, self.claim(&honest));
        if delta == 0 {
            return Ok(honest);
        }
        let roots: Vec<u64> = (1..=self.max_agreement()).collect();
        if f.order() <= self.max_agreement() {
            return Err(invalid("field too small for the canonical cheat"));
        }
        let g = f.poly_from_roots(&roots);
        let c = f.mul(delta, f.inv(f.eval(&g, 0)));
        let mut s = f.poly_add(&honest, &f.poly_scale(&g, c));
        s.resize(self.advice_len(), 0);
        Ok(s)
    }

    pub fn cost(&self) -> CostReport {
        let el = self.field.element_bits();
        CostReport {
            advice_bits: self.advice_len() as u64 * el,
            coin_bits: ceil_log2(self.field.order()) as u64,
            message_bits: self.t_blocks as u64 * el,
            rounds: 1,
        }
    }
}

/// Standalone protocol over the prime field `F_q`, `q > 2 ceil(n/T)`.
pub fn rs_ip_mod_protocol(
    x: &[bool],
    y: &[bool],
    q: u64,
    t_blocks: usize,
    advice: Option<&[u64]>,
    seed: u64,
) -> Result<(RsOutcome, CostReport)> {
    let proto = rs_prime_protocol(x.len(), t_blocks, q)?;
    let honest;
    let advice = match advice {
        Some(a) => a,
        None => {
            honest = proto.honest_advice(x, y)?;
            &honest
        }
    };
    proto.check_input(x)?;
    proto.check_input(y)?;
    Ok((proto.run(x, y, advice, seed), proto.cost()))
}

pub fn rs_prime_protocol(n: usize, t_blocks: usize, q: u64) -> Result<RsProtocol> {
    let field = Field::prime(q)?;
    if t_blocks == 0 || n == 0 {
        return Err(invalid("need n >= 1 and T >= 1"));
    }
    let m = n.div_ceil(t_blocks) as u64;
    if q <= 2 * m {
        return Err(invalid(format!(
            "q = {q} must exceed 2 ceil(n/T) = {}",
            2 * m
        )));
    }
    RsProtocol::new(n, t_blocks, field)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::bits;

    #[test]
    fn hand_example() {
        let (x, y) = (bits(&[1, 0, 1, 1]), bits(&[1, 1, 0, 1]));
        let p = rs_prime_protocol(4, 2, 17).unwrap();
        let s = p.honest_advice(&x, &y).unwrap();
        assert_eq!(s, vec![1, 0, 0]);
        assert_eq!(p.claim(&s), 2);
        assert_eq!(p.accept_count(&x, &y, &s), 17);
        // s'(alpha) = alpha claims 0 + 1 = 1 and agrees with s only at alpha = 1.
        assert_eq!(p.claim(&[0, 1]), 1);
        assert_eq!(p.accept_count(&x, &y, &[0, 1]), 1);
        let (out, cost) = rs_ip_mod_protocol(&x, &y, 17, 2, None, 3).unwrap();
        assert!(out.accepted);
        assert_eq!(out.claimed, 2);
        assert_eq!(
            cost,
            CostReport {
                advice_bits: 15,
                coin_bits: 5,
                message_bits: 10,
                rounds: 1
            }
        );
    }

    #[test]
    fn zero_inputs() {
        let z = vec![false; 8];
        let p = rs_prime_protocol(8, 2, 11).unwrap();
        let s = p.honest_advice(&z, &z).unwrap();
        assert_eq!(p.claim(&s), 0);
        assert_eq!(p.accept_count(&z, &z, &s), 11);
    }

    #[test]
    fn parameter_checks() {
        assert!(rs_prime_protocol(4, 2, 15).is_err());
        assert!(rs_prime_protocol(4, 2, 3).is_err());
        assert!(rs_prime_protocol(4, 0, 17).is_err());
    }

    #[test]
    fn single_block_costs() {
        let p = rs_prime_protocol(4, 1, 11).unwrap();
        let c = p.cost();
        assert_eq!(c.message_bits, p.field().element_bits());
        assert_eq!(c.advice_bits, 7 * 4);
    }

    #[test]
    fn canonical_cheat_hits_the_bound_exactly() {
        let (x, y) = (bits(&[1, 1, 0, 1, 1, 0]), bits(&[1, 0, 0, 1, 1, 1]));
        let p = rs_prime_protocol(6, 2, 13).unwrap();
        for target in 0..13 {
            let s = p.cheat_advice(&x, &y, target).unwrap();
            assert_eq!(p.claim(&s), target);
            let want = if target == 3 { 13 } else { p.max_agreement() };
            assert_eq!(p.accept_count(&x, &y, &s), want, "target {target}");
        }
    }

    #[test]
    fn exhaustive_advice_never_beats_the_bound() {
        let (x, y) = (bits(&[1, 0, 1, 1]), bits(&[1, 1, 0, 1]));
        let p = rs_prime_protocol(4, 2, 5).unwrap();
        let mut best = 0;
        for code in 0..125u64 {
            let s = vec![code % 5, code / 5 % 5, code / 25];
            if p.claim(&s) != 2 {
                best = best.max(p.accept_count(&x, &y, &s));
            }
        }
        assert_eq!(best, p.max_agreement());
    }

    #[test]
    fn extension_field_keeps_inner_product_mod_p() {
        let (x, y) = (bits(&[1, 1, 1, 1, 1, 0]), bits(&[1, 1, 1, 1, 0, 1]));
        let f = Field::extension(3, 2).unwrap();
        let p = RsProtocol::new(6, 2, f).unwrap();
        let s = p.honest_advice(&x, &y).unwrap();
        assert_eq!(p.claim(&s), 4 % 3);
        assert_eq!(p.accept_count(&x, &y, &s), 9);
        let cheat = p.cheat_advice(&x, &y, 0).unwrap();
        assert_eq!(p.accept_count(&x, &y, &cheat), 4);
    }
}
