//! Seeded instance generators. Every generator is a pure function of its
//! arguments.

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::instance::{BooleanInstance, BooleanVectorSet, Instance, IntegerInstance, VectorSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn check_density(density: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&density) {
        return Err(invalid(format!("density {density} outside [0, 1]")));
    }
    Ok(())
}

fn random_rows(rng: &mut ChaCha8Rng, n: usize, d: usize, density: f64) -> Vec<Vec<bool>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.gen_bool(density)).collect())
        .collect()
}

/// `n` rows of `d` bits, each independently one with probability `density`.
pub fn gen_random(n: usize, d: usize, density: f64, seed: u64) -> Result<BooleanVectorSet> {
    check_density(density)?;
    VectorSet::new(d, random_rows(&mut rng(seed), n, d, density))
}

/// Both sides drawn from one seeded stream.
pub fn gen_random_instance(n: usize, d: usize, density: f64, seed: u64) -> Result<BooleanInstance> {
    check_density(density)?;
    let mut r = rng(seed);
    let a = random_rows(&mut r, n, d, density);
    let b = random_rows(&mut r, n, d, density);
    Instance::new(VectorSet::new(d, a)?, VectorSet::new(d, b)?)
}

/// A density-1/2 instance with an orthogonal pair planted at a
/// seed-determined position: the chosen `b` row is cleared wherever the
/// chosen `a` row is set.
pub fn gen_planted_orthogonal(n: usize, d: usize, seed: u64) -> Result<BooleanInstance> {
    if n == 0 || d == 0 {
        return Err(invalid("planted instance needs n >= 1 and d >= 1"));
    }
    let mut r = rng(seed);
    let a = random_rows(&mut r, n, d, 0.5);
    let mut b = random_rows(&mut r, n, d, 0.5);
    let i = r.gen_range(0..n);
    let j = r.gen_range(0..n);
    for k in 0..d {
        if a[i][k] {
            b[j][k] = false;
        }
    }
    Instance::new(VectorSet::new(d, a)?, VectorSet::new(d, b)?)
}

/// All-ones sides: every pair has dot product `d`, so no orthogonal pair.
pub fn gen_all_ones(n: usize, d: usize) -> Result<BooleanInstance> {
    let rows = vec![vec![true; d]; n];
    Instance::new(VectorSet::new(d, rows.clone())?, VectorSet::new(d, rows)?)
}

/// Integer entries uniform in `[lo, hi]`.
pub fn gen_integer(n: usize, d: usize, lo: i64, hi: i64, seed: u64) -> Result<IntegerInstance> {
    if lo > hi {
        return Err(invalid("empty integer range"));
    }
    let mut r = rng(seed);
    let mut side = || -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|_| (0..d).map(|_| BigInt::from(r.gen_range(lo..=hi))).collect())
            .collect()
    };
    let a = side();
    let b = side();
    Instance::new(VectorSet::new(d, a)?, VectorSet::new(d, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::orthogonal_decide;

    #[test]
    fn density_extremes() {
        let zeros = gen_random(2, 3, 0.0, 7).unwrap();
        assert!(zeros.rows().iter().flatten().all(|b| !b));
        let ones = gen_random(2, 3, 1.0, 7).unwrap();
        assert!(ones.rows().iter().flatten().all(|b| *b));
    }

    #[test]
    fn deterministic_in_seed() {
        assert_eq!(
            gen_random(8, 6, 0.5, 1).unwrap(),
            gen_random(8, 6, 0.5, 1).unwrap()
        );
        assert_ne!(
            gen_random(8, 6, 0.5, 1).unwrap(),
            gen_random(8, 6, 0.5, 2).unwrap()
        );
        assert_eq!(
            gen_planted_orthogonal(16, 8, 3).unwrap(),
            gen_planted_orthogonal(16, 8, 3).unwrap()
        );
    }

    #[test]
    fn bad_density_rejected() {
        assert!(gen_random(1, 1, 1.5, 0).is_err());
        assert!(gen_random(1, 1, f64::NAN, 0).is_err());
    }

    #[test]
    fn planted_pair_is_found() {
        let single = gen_planted_orthogonal(1, 2, 0).unwrap();
        assert_eq!(bool_dot(&single), 0);
        for seed in 0..50 {
            let inst = gen_planted_orthogonal(16, 8, seed).unwrap();
            assert!(orthogonal_decide(&inst).unwrap().0, "seed {seed}");
        }
    }

    fn bool_dot(inst: &BooleanInstance) -> u64 {
        inst.dot(crate::instance::ArgPair::new(0, 0))
    }
}
