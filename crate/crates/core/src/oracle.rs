//! Exhaustive O(n^2 d) oracles. Every faster construction in the crate is
//! checked against these.

use num_traits::Zero;

use crate::error::{invalid, Error, Result};
use crate::instance::{ArgPair, Instance, Scalar};

/// `max_{a, b} a.b` with the lexicographically smallest maximizing pair.
pub fn max_ip_exact<T: Scalar>(inst: &Instance<T>) -> Result<(T::Dot, ArgPair)> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let mut best: Option<(T::Dot, ArgPair)> = None;
    for (i, a) in inst.a().rows().iter().enumerate() {
        for (j, b) in inst.b().rows().iter().enumerate() {
            let v = T::dot(a, b);
            if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                best = Some((v, ArgPair::new(i, j)));
            }
        }
    }
    Ok(best.expect("non-empty"))
}

/// Per-row optimum `max_b a.b` for every `a` in `A`.
pub fn all_pair_max_ip<T: Scalar>(inst: &Instance<T>) -> Result<Vec<T::Dot>> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    Ok(inst
        .a()
        .rows()
        .iter()
        .map(|a| {
            inst.b()
                .rows()
                .iter()
                .map(|b| T::dot(a, b))
                .max()
                .expect("non-empty")
        })
        .collect())
}

/// Whether some cross pair has dot product exactly zero, with the first
/// such pair in lexicographic order.
pub fn orthogonal_decide<T: Scalar>(inst: &Instance<T>) -> Result<(bool, Option<ArgPair>)> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    for (i, a) in inst.a().rows().iter().enumerate() {
        for (j, b) in inst.b().rows().iter().enumerate() {
            if T::dot(a, b).is_zero() {
                return Ok((true, Some(ArgPair::new(i, j))));
            }
        }
    }
    Ok((false, None))
}

/// `(sum x^k)^(1/k)`, which lies in `[max, max * m^(1/k)]` for `m` values.
pub fn power_sum_estimate(values: &[f64], k: u32) -> Result<f64> {
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    if values.is_empty() {
        return Err(invalid("values must be non-empty"));
    }
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(invalid("values must be finite and non-negative"));
    }
    let max = values.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return Ok(0.0);
    }
    // Normalizing by the max keeps the inner sum in [1, m].
    let m = values.len() as f64;
    let inner: f64 = values.iter().map(|v| (v / max).powi(k as i32)).sum();
    let inner = inner.clamp(1.0, m);
    Ok(max * inner.powf(1.0 / k as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::gen_random_instance;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    #[test]
    fn max_ip_small_cases() {
        let inst = Instance::from_bits(&[&[1, 1, 0]], &[&[1, 0, 1]]).unwrap();
        assert_eq!(max_ip_exact(&inst).unwrap(), (1, ArgPair::new(0, 0)));
        let inst = Instance::from_bits(&[&[0, 0]], &[&[0, 0]]).unwrap();
        assert_eq!(max_ip_exact(&inst).unwrap(), (0, ArgPair::new(0, 0)));
    }

    #[test]
    fn ties_break_lexicographically() {
        let inst = Instance::from_bits(&[&[1, 0], &[1, 1]], &[&[0, 1], &[1, 0]]).unwrap();
        // (0,1), (1,0), (1,1) all reach 1.
        assert_eq!(max_ip_exact(&inst).unwrap(), (1, ArgPair::new(0, 1)));
    }

    #[test]
    fn max_ip_matches_double_loop() {
        let inst = gen_random_instance(8, 6, 0.5, 1).unwrap();
        let mut best = 0;
        for a in inst.a().rows() {
            for b in inst.b().rows() {
                let v = a.iter().zip(b).filter(|(x, y)| **x && **y).count() as u64;
                best = best.max(v);
            }
        }
        assert_eq!(max_ip_exact(&inst).unwrap().0, best);
    }

    #[test]
    fn integer_max_ip() {
        let inst =
            Instance::<BigInt>::from_i64(&[&[1, -2], &[3, 0]], &[&[-1, -1], &[2, 5]]).unwrap();
        // dots: (1,-2)·(-1,-1)=1, (1,-2)·(2,5)=-8, (3,0)·(-1,-1)=-3, (3,0)·(2,5)=6
        assert_eq!(
            max_ip_exact(&inst).unwrap(),
            (BigInt::from(6), ArgPair::new(1, 1))
        );
    }

    #[test]
    fn orthogonal_small_cases() {
        let inst = Instance::from_bits(&[&[1, 0]], &[&[0, 1]]).unwrap();
        assert_eq!(
            orthogonal_decide(&inst).unwrap(),
            (true, Some(ArgPair::new(0, 0)))
        );
        let inst = Instance::from_bits(&[&[1, 1]], &[&[1, 1]]).unwrap();
        assert_eq!(orthogonal_decide(&inst).unwrap(), (false, None));
    }

    #[test]
    fn empty_sides_error() {
        let a = crate::instance::VectorSet::<bool>::new(2, vec![]).unwrap();
        let b = crate::instance::VectorSet::from_bits(&[&[1, 0]]).unwrap();
        let inst = Instance::new(a, b).unwrap();
        assert_eq!(max_ip_exact(&inst).unwrap_err(), Error::EmptyInstance);
        assert_eq!(orthogonal_decide(&inst).unwrap_err(), Error::EmptyInstance);
    }

    #[test]
    fn power_sum_examples() {
        assert_eq!(power_sum_estimate(&[3.0], 5).unwrap(), 3.0);
        assert_eq!(power_sum_estimate(&[2.0; 4], 2).unwrap(), 4.0);
        assert_eq!(power_sum_estimate(&[0.0, 0.0], 3).unwrap(), 0.0);
        assert!(power_sum_estimate(&[1.0], 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn power_sum_bracket(values in prop::collection::vec(0.0f64..1e6, 1..40), k in 1u32..12) {
            let est = power_sum_estimate(&values, k).unwrap();
            let max = values.iter().cloned().fold(0.0, f64::max);
            let upper = max * (values.len() as f64).powf(1.0 / k as f64);
            prop_assert!(est >= max && est <= upper, "{est} not in [{max}, {upper}]");
        }

        #[test]
        fn exhaustive_oracles_agree(seed in 0u64..5000, n in 1usize..12, d in 1usize..8) {
            let inst = gen_random_instance(n, d, 0.4, seed).unwrap();
            let (best, arg) = max_ip_exact(&inst).unwrap();
            let mut any_zero = false;
            for a in inst.a().rows() {
                for b in inst.b().rows() {
                    let v = bool::dot(a, b);
                    prop_assert!(best >= v);
                    any_zero |= v == 0;
                }
            }
            prop_assert_eq!(inst.dot(arg), best);
            prop_assert_eq!(orthogonal_decide(&inst).unwrap().0, any_zero);
        }
    }
}
