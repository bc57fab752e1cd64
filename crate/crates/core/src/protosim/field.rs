//! Small finite fields `GF(p^k)` with elements encoded as integers in
//! `[0, p^k)` (base-`p` digits are polynomial coefficients), plus dense
//! polynomial helpers over them.

use crate::arith::{ceil_log2, is_prime};
use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    p: u64,
    k: u32,
    /// Monic irreducible modulus, low degree first; length `k + 1`.
    modulus: Vec<u64>,
    order: u64,
}

pub type Poly = Vec<u64>;

impl Field {
    pub fn prime(p: u64) -> Result<Self> {
        Self::extension(p, 1)
    }

    pub fn extension(p: u64, k: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(invalid(format!("{p} is not prime")));
        }
        if k == 0 {
            return Err(invalid("extension degree must be at least 1"));
        }
        let order = p
            .checked_pow(k)
            .filter(|q| *q < 1 << 40)
            .ok_or_else(|| invalid("field too large"))?;
        let modulus = if k == 1 {
            vec![0, 1]
        } else {
            find_irreducible(p, k)
        };
        Ok(Self {
            p,
            k,
            modulus,
            order,
        })
    }

    /// `GF(p^k)` with the smallest `k` giving at least `min_order` elements.
    pub fn at_least(p: u64, min_order: u64) -> Result<Self> {
        let mut k = 1;
        while p.pow(k) < min_order {
            k += 1;
        }
        Self::extension(p, k)
    }

    pub fn characteristic(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> u32 {
        self.k
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    /// Bits to encode one element as `k` base-`p` digits.
    pub fn element_bits(&self) -> u64 {
        self.k as u64 * ceil_log2(self.p).max(1) as u64
    }

    fn digits(&self, a: u64) -> Vec<u64> {
        let mut out = vec![0; self.k as usize];
        let mut a = a;
        for d in out.iter_mut() {
            *d = a % self.p;
            a /= self.p;
        }
        out
    }

    fn pack(&self, digits: &[u64]) -> u64 {
        digits.iter().rev().fold(0, |acc, &d| acc * self.p + d)
    }

    /// Image of an integer in the prime subfield.
    pub fn from_int(&self, v: u64) -> u64 {
        v % self.p
    }

    pub fn add(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return (a + b) % self.p;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        self.pack(
            &x.iter()
                .zip(&y)
                .map(|(u, v)| (u + v) % self.p)
                .collect::<Vec<_>>(),
        )
    }

    pub fn neg(&self, a: u64) -> u64 {
        if self.k == 1 {
            return (self.p - a % self.p) % self.p;
        }
        let x = self.digits(a);
        self.pack(&x.iter().map(|u| (self.p - u) % self.p).collect::<Vec<_>>())
    }

    pub fn sub(&self, a: u64, b: u64) -> u64 {
        self.add(a, self.neg(b))
    }

    pub fn mul(&self, a: u64, b: u64) -> u64 {
        if self.k == 1 {
            return ((a as u128 * b as u128) % self.p as u128) as u64;
        }
        let (x, y) = (self.digits(a), self.digits(b));
        let mut prod = vec![0u64; 2 * self.k as usize - 1];
        for (i, u) in x.iter().enumerate() {
            for (j, v) in y.iter().enumerate() {
                prod[i + j] = (prod[i + j] + u * v) % self.p;
            }
        }
        let k = self.k as usize;
        for top in (k..prod.len()).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            for (i, m) in self.modulus.iter().enumerate() {
                let idx = top - k + i;
                prod[idx] = (prod[idx] + self.p * self.p - c * m % self.p) % self.p;
            }
        }
        self.pack(&prod[..k])
    }

    pub fn pow(&self, a: u64, mut e: u64) -> u64 {
        let (mut acc, mut base) = (1, a);
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    pub fn inv(&self, a: u64) -> u64 {
        assert!(a != 0, "inverse of zero");
        self.pow(a, self.order - 2)
    }

    pub fn eval(&self, poly: &[u64], x: u64) -> u64 {
        poly.iter()
            .rev()
            .fold(0, |acc, &c| self.add(self.mul(acc, x), c))
    }

    pub fn poly_add(&self, a: &[u64], b: &[u64]) -> Poly {
        (0..a.len().max(b.len()))
            .map(|i| self.add(*a.get(i).unwrap_or(&0), *b.get(i).unwrap_or(&0)))
            .collect()
    }

    pub fn poly_mul(&self, a: &[u64], b: &[u64]) -> Poly {
        if a.is_empty() || b.is_empty() {
            return Vec::new();
        }
        let mut out = vec![0; a.len() + b.len() - 1];
        for (i, &u) in a.iter().enumerate() {
            if u == 0 {
                continue;
            }
            for (j, &v) in b.iter().enumerate() {
                out[i + j] = self.add(out[i + j], self.mul(u, v));
            }
        }
        out
    }

    pub fn poly_scale(&self, a: &[u64], c: u64) -> Poly {
        a.iter().map(|&u| self.mul(u, c)).collect()
    }

    /// `prod (X - r)` over the given roots.
    pub fn poly_from_roots(&self, roots: &[u64]) -> Poly {
        roots
            .iter()
            .fold(vec![1], |acc, &r| self.poly_mul(&acc, &[self.neg(r), 1]))
    }

    /// Lagrange basis over `points`: `basis[j](points[i]) = [i == j]`.
    pub fn lagrange_basis(&self, points: &[u64]) -> Vec<Poly> {
        (0..points.len())
            .map(|j| {
                let others: Vec<u64> = points
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != j)
                    .map(|(_, &e)| e)
                    .collect();
                let num = self.poly_from_roots(&others);
                let denom = others
                    .iter()
                    .fold(1, |acc, &e| self.mul(acc, self.sub(points[j], e)));
                self.poly_scale(&num, self.inv(denom))
            })
            .collect()
    }
}

/// Irreducibility by trial division over all monic divisors of degree at
/// most `k / 2`; fields here are small.
fn find_irreducible(p: u64, k: u32) -> Vec<u64> {
    let k = k as usize;
    let monic = |deg: usize, index: u64| -> Vec<u64> {
        let mut c = Vec::with_capacity(deg + 1);
        let mut i = index;
        for _ in 0..deg {
            c.push(i % p);
            i /= p;
        }
        c.push(1);
        c
    };
    let divides = |f: &[u64], g: &[u64]| -> bool {
        let mut r = f.to_vec();
        let dg = g.len() - 1;
        while r.len() > dg {
            let c = *r.last().expect("non-empty");
            let shift = r.len() - 1 - dg;
            for (i, gi) in g.iter().enumerate() {
                r[shift + i] = (r[shift + i] + p * p - c * gi % p) % p;
            }
            r.pop();
        }
        r.iter().all(|&c| c == 0)
    };
    (0..p.pow(k as u32))
        .map(|i| monic(k, i))
        .find(|f| {
            (1..=k / 2).all(|deg| (0..p.pow(deg as u32)).all(|i| !divides(f, &monic(deg, i))))
        })
        .expect("irreducible polynomials exist in every degree")
}
