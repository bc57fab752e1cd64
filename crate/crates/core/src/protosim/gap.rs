//! OV to gap Max-IP by advice enumeration. A toy MA protocol for
//! disjointness on `d` bits is turned into one Boolean Max-IP instance per
//! advice string: coordinates are indexed by (coins, message), Alice's
//! vector marks accepting transcripts and Bob's marks the message he would
//! send, so each dot product counts the accepting coin strings.

use num_bigint::BigInt;
use num_rational::BigRational;
use rayon::prelude::*;

use super::field::{Field, Poly};
use super::rs::RsProtocol;
use super::CostReport;
use crate::arith::{ceil_log2, is_prime};
use crate::error::{invalid, Error, Result};
use crate::instance::{BooleanInstance, Instance, VectorSet};

pub const MAX_ADVICE_BITS: u32 = 12;
pub const MAX_GAP_DIM: u64 = 1 << 16;

/// Reed-Solomon disjointness protocol with coins restricted to a
/// power-of-two subset `S` of `F_q` and `reps` independent repetitions.
#[derive(Clone, Debug)]
pub struct ToyDisjProtocol {
    base: RsProtocol,
    q: u64,
    /// `|S| = 2^r0`.
    r0: u32,
    reps: u32,
}

impl ToyDisjProtocol {
    pub fn new(d: usize, reps: u32) -> Result<Self> {
        if d == 0 || reps == 0 {
            return Err(invalid("need d >= 1 and reps >= 1"));
        }
        let t = (d as f64).sqrt().ceil() as usize;
        let m = d.div_ceil(t) as u64;
        let r0 = ceil_log2((2 * (2 * m - 2)).max(1));
        let q = (((d as u64) + 1).max(1 << r0)..)
            .find(|&p| is_prime(p))
            .expect("primes are unbounded");
        let base = RsProtocol::new(d, t, Field::prime(q)?)?;
        Ok(Self { base, q, r0, reps })
    }

    pub fn base(&self) -> &RsProtocol {
        &self.base
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    fn q_bits(&self) -> u32 {
        ceil_log2(self.q)
    }

    fn rep_msg_bits(&self) -> u32 {
        self.base.t_blocks() as u32 * self.q_bits()
    }

    pub fn cost(&self) -> CostReport {
        CostReport {
            advice_bits: (self.base.advice_len() as u32 * self.q_bits()) as u64,
            coin_bits: (self.reps * self.r0) as u64,
            message_bits: (self.reps * self.rep_msg_bits()) as u64,
            rounds: 1,
        }
    }

    /// Largest number of accepting coin strings when `x.y != 0`.
    pub fn no_bound(&self) -> u64 {
        self.base.max_agreement().pow(self.reps)
    }

    pub fn soundness(&self) -> BigRational {
        BigRational::new(
            BigInt::from(self.no_bound()),
            BigInt::from(1u64 << self.cost().coin_bits),
        )
    }

    /// Advice polynomial for an advice string, or `None` if it is not a
    /// valid encoding of a polynomial claiming `x.y = 0`.
    pub fn decode_advice(&self, code: u64) -> Option<Poly> {
        let qb = self.q_bits();
        let s: Poly = (0..self.base.advice_len())
            .map(|i| (code >> (i as u32 * qb)) & ((1 << qb) - 1))
            .collect();
        (s.iter().all(|&c| c < self.q) && self.base.claim(&s) == 0).then_some(s)
    }

    pub fn encode_advice(&self, s: &[u64]) -> u64 {
        let qb = self.q_bits();
        s.iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| acc | c << (i as u32 * qb))
    }

    fn encode_message(&self, vals: &[u64]) -> u64 {
        let qb = self.q_bits();
        vals.iter()
            .enumerate()
            .fold(0, |acc, (i, &c)| acc | c << (i as u32 * qb))
    }

    fn decode_message(&self, code: u64) -> Option<Vec<u64>> {
        let qb = self.q_bits();
        let vals: Vec<u64> = (0..self.base.t_blocks())
            .map(|i| (code >> (i as u32 * qb)) & ((1 << qb) - 1))
            .collect();
        vals.iter().all(|&v| v < self.q).then_some(vals)
    }

    fn alphas(&self, w: u64) -> impl Iterator<Item = u64> + '_ {
        (0..self.reps).map(move |k| (w >> (k * self.r0)) & ((1 << self.r0) - 1))
    }

    /// Direct simulation: number of coin strings on which Alice accepts.
    pub fn accept_count(&self, x: &[bool], y: &[bool], advice: Option<&Poly>) -> u64 {
        let Some(s) = advice else { return 0 };
        let per_alpha: Vec<bool> = (0..1u64 << self.r0)
            .map(|a| {
                self.base
                    .alice_accepts(x, s, a, &self.base.bob_message(y, a))
            })
            .collect();
        (0..1u64 << self.cost().coin_bits)
            .filter(|&w| self.alphas(w).all(|a| per_alpha[a as usize]))
            .count() as u64
    }

    pub fn gap_dim(&self) -> u64 {
        let c = self.cost();
        1 << (c.coin_bits + c.message_bits)
    }

    /// Acceptance indicator over (coins, message).
    pub fn alice_vector(&self, x: &[bool], advice: Option<&Poly>) -> Vec<bool> {
        let dim = self.gap_dim() as usize;
        let Some(s) = advice else {
            return vec![false; dim];
        };
        let rep_msgs = 1u64 << self.rep_msg_bits();
        // table[alpha][msg] for a single repetition.
        let table: Vec<Vec<bool>> = (0..1u64 << self.r0)
            .map(|a| {
                (0..rep_msgs)
                    .map(|mc| {
                        self.decode_message(mc)
                            .is_some_and(|msg| self.base.alice_accepts(x, s, a, &msg))
                    })
                    .collect()
            })
            .collect();
        let msg_bits = self.cost().message_bits;
        let rb = self.rep_msg_bits();
        (0..dim as u64)
            .map(|idx| {
                let (w, mc) = (idx >> msg_bits, idx & ((1 << msg_bits) - 1));
                self.alphas(w).enumerate().all(|(k, a)| {
                    table[a as usize][((mc >> (k as u32 * rb)) & (rep_msgs - 1)) as usize]
                })
            })
            .collect()
    }

    /// Indicator of Bob's message for every coin string.
    pub fn bob_vector(&self, y: &[bool]) -> Vec<bool> {
        let msg_bits = self.cost().message_bits;
        let rb = self.rep_msg_bits();
        let per_alpha: Vec<u64> = (0..1u64 << self.r0)
            .map(|a| self.encode_message(&self.base.bob_message(y, a)))
            .collect();
        let mut v = vec![false; self.gap_dim() as usize];
        for w in 0..1u64 << self.cost().coin_bits {
            let mc = self.alphas(w).enumerate().fold(0, |acc, (k, a)| {
                acc | per_alpha[a as usize] << (k as u32 * rb)
            });
            v[((w << msg_bits) | mc) as usize] = true;
        }
        v
    }
}

#[derive(Clone, Debug)]
pub struct GapFamily {
    pub protocol: ToyDisjProtocol,
    /// One instance per advice string, indexed by its encoding.
    pub instances: Vec<BooleanInstance>,
    /// `2^coin_bits`: reached exactly on an orthogonal pair.
    pub threshold: u64,
    /// No-instance optimum is at most `threshold * soundness`.
    pub soundness: BigRational,
}

impl GapFamily {
    /// Ratio `tau = 1 / soundness` (`None` when soundness is 0).
    pub fn ratio(&self) -> Option<BigRational> {
        (self.soundness != BigRational::from_integer(0.into())).then(|| self.soundness.recip())
    }
}

pub fn ov_to_maxip_gap(inst: &BooleanInstance, eps: f64, reps: u32) -> Result<GapFamily> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let protocol = ToyDisjProtocol::new(inst.dim(), reps)?;
    let cost = protocol.cost();
    if cost.advice_bits > MAX_ADVICE_BITS as u64 {
        return Err(Error::BudgetExceeded {
            what: "advice bits",
            required: cost.advice_bits.to_string(),
            limit: MAX_ADVICE_BITS.to_string(),
        });
    }
    if cost.coin_bits + cost.message_bits > 16 || protocol.gap_dim() > MAX_GAP_DIM {
        return Err(Error::BudgetExceeded {
            what: "gap dimension",
            required: format!("2^{}", cost.coin_bits + cost.message_bits),
            limit: MAX_GAP_DIM.to_string(),
        });
    }
    let soundness = protocol.soundness();
    let eps_q = BigRational::from_float(eps).ok_or_else(|| invalid("eps must be finite"))?;
    if soundness > eps_q {
        return Err(invalid(format!(
            "soundness {soundness} exceeds eps = {eps}; raise reps"
        )));
    }
    let bobs = VectorSet::new(
        protocol.gap_dim() as usize,
        inst.b()
            .rows()
            .iter()
            .map(|y| protocol.bob_vector(y))
            .collect(),
    )?;
    let instances = (0..1u64 << cost.advice_bits)
        .into_par_iter()
        .map(|code| {
            let s = protocol.decode_advice(code);
            let alices = VectorSet::new(
                protocol.gap_dim() as usize,
                inst.a()
                    .rows()
                    .iter()
                    .map(|x| protocol.alice_vector(x, s.as_ref()))
                    .collect(),
            )?;
            Instance::new(alices, bobs.clone())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GapFamily {
        threshold: 1 << cost.coin_bits,
        soundness,
        protocol,
        instances,
    })
}
