//! NP·UPP sign families built from the CRT reduction, and a one-message
//! private-coin protocol whose acceptance probability is `1/2` shifted by
//! the sign of an inner product.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::crtreduce::{build_reduction, CrtReduction};
use crate::error::{invalid, Error, Result};
use crate::generate::rng;
use crate::instance::BooleanInstance;

/// Index `i` pairs Alice's `[psi(x), 1]^{⊗2}` with Bob's
/// `-[psi(y), -t_i]^{⊗2}`, so the dot is `-(psi(x).psi(y) - t_i)^2`.
#[derive(Clone, Debug)]
pub struct NpUppFamily {
    pub d: usize,
    pub reduction: CrtReduction,
    pub targets: Vec<BigUint>,
}

fn tensor_square(w: &[BigInt], sign: &BigInt) -> Vec<BigInt> {
    w.iter()
        .flat_map(|a| w.iter().map(move |b| sign * a * b))
        .collect()
}

impl NpUppFamily {
    pub fn m(&self) -> usize {
        self.targets.len()
    }

    /// Vector length `(l + 1)^2`.
    pub fn dim(&self) -> usize {
        (self.reduction.ell() + 1).pow(2)
    }

    fn image(&self, x: &[bool]) -> Result<Vec<BigInt>> {
        if x.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: x.len(),
            });
        }
        Ok(self
            .reduction
            .apply(x)?
            .into_iter()
            .map(BigInt::from)
            .collect())
    }

    pub fn alice(&self, _i: usize, x: &[bool]) -> Result<Vec<BigInt>> {
        let mut u = self.image(x)?;
        u.push(BigInt::one());
        Ok(tensor_square(&u, &BigInt::one()))
    }

    pub fn bob(&self, i: usize, y: &[bool]) -> Result<Vec<BigInt>> {
        let mut w = self.image(y)?;
        w.push(-BigInt::from(self.targets[i].clone()));
        Ok(tensor_square(&w, &-BigInt::one()))
    }
}

pub fn np_upp_family(d: usize, ell: usize) -> Result<NpUppFamily> {
    if d == 0 || ell == 0 || ell > d {
        return Err(invalid(format!(
            "need 1 <= ell <= d, got d = {d}, ell = {ell}"
        )));
    }
    let reduction = build_reduction(d.div_ceil(ell), ell)?;
    let targets = reduction.build_v_set()?.members;
    Ok(NpUppFamily {
        d,
        reduction,
        targets,
    })
}

fn dot(u: &[BigRational], v: &[BigRational]) -> BigRational {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn norms(u: &[BigRational], v: &[BigRational]) -> Result<(BigRational, BigRational)> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let u_inf = u
        .iter()
        .map(|a| a.abs())
        .max()
        .unwrap_or_else(BigRational::zero);
    let v_one: BigRational = v.iter().map(|b| b.abs()).sum();
    if u_inf.is_zero() || v_one.is_zero() {
        return Err(invalid("zero vector in the UPP simulation"));
    }
    Ok((u_inf, v_one))
}

/// Acceptance probability `1/2 + u.v / (2 |v|_1 |u|_inf)`.
pub fn upp_simulate(u: &[BigRational], v: &[BigRational]) -> Result<BigRational> {
    let (u_inf, v_one) = norms(u, v)?;
    let half = BigRational::new(1.into(), 2.into());
    Ok(&half + dot(u, v) / (BigRational::from_integer(2.into()) * v_one * u_inf))
}

/// One transcript: Bob sends `(j, sgn v_j)` with `j ~ |v_j| / |v|_1`;
/// Alice accepts with probability `1/2 + sgn * u_j / (2 |u|_inf)`.
pub fn upp_sample(u: &[BigRational], v: &[BigRational], seed: u64) -> Result<bool> {
    let (u_inf, v_one) = norms(u, v)?;
    let mut r = rng(seed);
    let to_f = |q: &BigRational| {
        use num_traits::ToPrimitive;
        q.to_f64().unwrap_or(0.0)
    };
    let mut pick = r.gen::<f64>() * to_f(&v_one);
    let mut j = v.len() - 1;
    for (k, b) in v.iter().enumerate() {
        let w = to_f(&b.abs());
        if w > 0.0 && pick < w {
            j = k;
            break;
        }
        pick -= w;
    }
    while v[j].is_zero() {
        j -= 1;
    }
    let sgn = if v[j].is_negative() { -1.0 } else { 1.0 };
    let p = 0.5 + sgn * to_f(&u[j]) / (2.0 * to_f(&u_inf));
    Ok(r.gen::<f64>() < p)
}

pub fn to_rational(v: &[BigInt]) -> Vec<BigRational> {
    v.iter().cloned().map(BigRational::from_integer).collect()
}

/// `upp_simulate` on integer vectors as an unreduced fraction
/// `(num, den)`, `den > 0`.
pub fn upp_probability(u: &[BigInt], v: &[BigInt]) -> Result<(BigInt, BigInt)> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    let u_inf = u.iter().map(|a| a.abs()).max().unwrap_or_else(BigInt::zero);
    let v_one: BigInt = v.iter().map(|b| b.abs()).sum();
    if u_inf.is_zero() || v_one.is_zero() {
        return Err(invalid("zero vector in the UPP simulation"));
    }
    let ip: BigInt = u.iter().zip(v).map(|(a, b)| a * b).sum();
    let scale = v_one * u_inf;
    Ok((&scale + ip, scale * 2))
}

/// Checked machine-word version of [`upp_probability`].
fn upp_probability_i128(u: &[i128], v: &[i128]) -> Option<(i128, i128)> {
    let u_inf = u
        .iter()
        .map(|a| a.checked_abs())
        .try_fold(0i128, |m, a| Some(m.max(a?)))?;
    let v_one = v
        .iter()
        .try_fold(0i128, |s, b| s.checked_add(b.checked_abs()?))?;
    let ip = u
        .iter()
        .zip(v)
        .try_fold(0i128, |s, (a, b)| s.checked_add(a.checked_mul(*b)?))?;
    let scale = v_one.checked_mul(u_inf)?;
    Some((scale.checked_add(ip)?, scale.checked_mul(2)?))
}

fn small(v: &[BigInt]) -> Option<Vec<i128>> {
    use num_traits::ToPrimitive;
    v.iter().map(|a| a.to_i128()).collect()
}

/// Yes iff some family index gives some pair acceptance probability at
/// least 1/2. A zero Bob vector has no message to send and counts as 1/2.
pub fn upp_reduction_decide(inst: &BooleanInstance, ell: usize) -> Result<bool> {
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let fam = np_upp_family(inst.dim(), ell)?;
    let alices = inst
        .a()
        .rows()
        .iter()
        .map(|x| fam.alice(0, x))
        .collect::<Result<Vec<_>>>()?;
    let alices_small: Option<Vec<Vec<i128>>> = alices.iter().map(|u| small(u)).collect();
    let accepts = |u: &[BigInt], us: Option<&Vec<i128>>, v: &[BigInt], vs: Option<&Vec<i128>>| {
        if let (Some(us), Some(vs)) = (us, vs) {
            if let Some((num, den)) = upp_probability_i128(us, vs) {
                return Ok(num
                    .checked_mul(2)
                    .map_or_else(|| num >= den - num, |n2| n2 >= den));
            }
        }
        let (num, den) = upp_probability(u, v)?;
        Ok::<bool, Error>(num * 2 >= den)
    };
    let hit = (0..fam.m()).into_par_iter().find_map_any(|i| {
        let scan = || -> Result<bool> {
            for y in inst.b().rows() {
                let v = fam.bob(i, y)?;
                if v.iter().all(Zero::is_zero) {
                    return Ok(true);
                }
                let vs = small(&v);
                for (k, u) in alices.iter().enumerate() {
                    let us = alices_small.as_ref().map(|a| &a[k]);
                    if accepts(u, us, &v, vs.as_ref())? {
                        return Ok(true);
                    }
                }
            }
            Ok(false)
        };
        match scan() {
            Ok(false) => None,
            other => Some(other),
        }
    });
    hit.unwrap_or(Ok(false))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_all_ones, gen_planted_orthogonal, gen_random_instance};
    use crate::instance::bits;
    use crate::oracle::orthogonal_decide;
    use proptest::prelude::*;

    fn q(v: &[i64]) -> Vec<BigRational> {
        v.iter()
            .map(|&a| BigRational::from_integer(a.into()))
            .collect()
    }

    fn dot_int(a: &[BigInt], b: &[BigInt]) -> BigInt {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn simulate_examples() {
        let r = |a, b| BigRational::new(BigInt::from(a), BigInt::from(b));
        assert_eq!(upp_simulate(&q(&[1, 0]), &q(&[1, 0])).unwrap(), r(1, 1));
        assert_eq!(upp_simulate(&q(&[1, 0]), &q(&[0, 1])).unwrap(), r(1, 2));
        assert_eq!(upp_simulate(&q(&[0, 1]), &q(&[1, -1])).unwrap(), r(1, 4));
        assert!(upp_simulate(&q(&[0, 0]), &q(&[1, 0])).is_err());
        assert!(upp_simulate(&q(&[1, 0]), &q(&[0, 0])).is_err());
    }

    #[test]
    fn integer_form_agrees() {
        let (u, v) = ([3i64, -1, 2], [1i64, 2, -1]);
        let (num, den) = upp_probability(&u.map(BigInt::from), &v.map(BigInt::from)).unwrap();
        assert_eq!(
            BigRational::new(num, den),
            upp_simulate(&q(&u), &q(&v)).unwrap()
        );
    }

    #[test]
    fn sampled_rate_matches_probability() {
        let (u, v) = (q(&[3, -1, 2]), q(&[1, 2, -1]));
        let p = upp_simulate(&u, &v).unwrap();
        let hits = (0..20000)
            .filter(|&s| upp_sample(&u, &v, s).unwrap())
            .count() as f64
            / 20000.0;
        use num_traits::ToPrimitive;
        assert!((hits - p.to_f64().unwrap()).abs() < 0.02, "{hits} vs {p}");
    }

    #[test]
    fn small_family() {
        let fam = np_upp_family(2, 2).unwrap();
        assert_eq!(fam.targets, vec![0u32.into(), 3u32.into(), 6u32.into()]);
        assert_eq!(fam.dim(), 9);
        let (x, y0, y1) = (bits(&[1, 0]), bits(&[0, 1]), bits(&[1, 0]));
        assert_eq!(
            dot_int(&fam.alice(0, &x).unwrap(), &fam.bob(0, &y0).unwrap()),
            0.into()
        );
        let dots: Vec<BigInt> = (0..3)
            .map(|i| dot_int(&fam.alice(i, &x).unwrap(), &fam.bob(i, &y1).unwrap()))
            .collect();
        assert_eq!(dots, vec![(-1).into(), (-4).into(), (-25).into()]);
    }

    #[test]
    fn sign_conditions_exhaustive() {
        for (d, ell) in [(2, 2), (4, 2)] {
            let fam = np_upp_family(d, ell).unwrap();
            let inputs: Vec<Vec<bool>> = (0..1u32 << d)
                .map(|c| (0..d).map(|i| c >> i & 1 == 1).collect())
                .collect();
            let alices: Vec<Vec<i128>> = inputs
                .iter()
                .map(|x| small(&fam.alice(0, x).unwrap()).unwrap())
                .collect();
            let bobs: Vec<Vec<Vec<i128>>> = inputs
                .iter()
                .map(|y| {
                    (0..fam.m())
                        .map(|i| small(&fam.bob(i, y).unwrap()).unwrap())
                        .collect()
                })
                .collect();
            let dot = |u: &[i128], v: &[i128]| u.iter().zip(v).map(|(a, b)| a * b).sum::<i128>();
            for (xc, u) in alices.iter().enumerate() {
                for (yc, vs) in bobs.iter().enumerate() {
                    if xc & yc == 0 {
                        assert!(vs.iter().any(|v| dot(u, v) >= 0));
                    } else {
                        assert!(vs.iter().all(|v| dot(u, v) < 0));
                    }
                }
            }
        }
    }

    #[test]
    fn decide_matches_oracle() {
        assert!(upp_reduction_decide(&gen_planted_orthogonal(8, 4, 1).unwrap(), 2).unwrap());
        assert!(!upp_reduction_decide(&gen_all_ones(4, 4).unwrap(), 2).unwrap());
        for s in 0..30 {
            let inst = gen_random_instance(6, 4, 0.6, s).unwrap();
            assert_eq!(
                upp_reduction_decide(&inst, 2).unwrap(),
                orthogonal_decide(&inst).unwrap().0
            );
        }
    }

    proptest! {
        #[test]
        fn threshold_tracks_sign(u in prop::collection::vec(-9i64..10, 4), v in prop::collection::vec(-9i64..10, 4)) {
            prop_assume!(u.iter().any(|&a| a != 0) && v.iter().any(|&a| a != 0));
            let (u, v) = (q(&u), q(&v));
            let p = upp_simulate(&u, &v).unwrap();
            let half = BigRational::new(1.into(), 2.into());
            let ip = dot(&u, &v);
            prop_assert_eq!(p.cmp(&half), ip.cmp(&BigRational::zero()));
        }
    }
}
