//! Tensor-squaring Z-OV -> Z-Max-IP, and Z-Max-IP -> l2 furthest pair /
//! bichromatic l2 closest pair with formal square roots.

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::Zero;
use rayon::prelude::*;

use crate::arith::{ceil_log2, isqrt};
use crate::crtreduce::ov_to_zov;
use crate::error::{Error, Result};
use crate::instance::{ArgPair, BooleanInstance, Instance, IntegerInstance, Scalar, VectorSet};

/// `x -> x (x) x`, `y -> -(y (x) y)`, so every pair dots to `-(x.y)^2`.
pub fn zov_to_zmaxip_tensor(inst: &IntegerInstance) -> Result<IntegerInstance> {
    let d = inst.dim();
    let square = |rows: &[Vec<BigInt>], negate: bool| -> Vec<Vec<BigInt>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .flat_map(|xi| {
                        r.iter()
                            .map(move |xj| if negate { -(xi * xj) } else { xi * xj })
                    })
                    .collect()
            })
            .collect()
    };
    Instance::new(
        VectorSet::new(d * d, square(inst.a().rows(), false))?,
        VectorSet::new(d * d, square(inst.b().rows(), true))?,
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Furthest,
    Closest,
}

/// `(head, sqrt(tail_a), sqrt(tail_b))` with the radicals kept formal.
#[derive(Clone, Debug, PartialEq)]
pub struct SqrtExtPoint {
    pub head: Vec<BigInt>,
    pub tail_a: BigUint,
    pub tail_b: BigUint,
}

impl SqrtExtPoint {
    pub fn norm2(&self) -> BigUint {
        let h: BigInt = self.head.iter().map(|v| v * v).sum();
        h.magnitude() + &self.tail_a + &self.tail_b
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GeometryInstance {
    pub a: Vec<SqrtExtPoint>,
    pub b: Vec<SqrtExtPoint>,
    pub w: BigUint,
    pub k: u32,
    pub mode: Mode,
}

/// Exact squared distance between points in opposite classes. The radical
/// coordinates sit in different slots, so each meets only a zero.
pub fn cross_dist2(p: &SqrtExtPoint, q: &SqrtExtPoint) -> BigUint {
    let head: BigInt = p
        .head
        .iter()
        .zip(&q.head)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    head.magnitude() + &p.tail_a + &q.tail_a + &p.tail_b + &q.tail_b
}

/// An upper bound on the squared distance between two points of one class,
/// using `(sqrt a - sqrt b)^2 <= a + b - 2 floor(sqrt(ab))`.
pub fn within_class_upper_bound(p: &SqrtExtPoint, q: &SqrtExtPoint) -> BigUint {
    let head: BigInt = p
        .head
        .iter()
        .zip(&q.head)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let slot = |a: &BigUint, b: &BigUint| a + b - 2u32 * isqrt(&(a * b));
    head.magnitude() + slot(&p.tail_a, &q.tail_a) + slot(&p.tail_b, &q.tail_b)
}

/// Cheap bound `|a - b| >= (sqrt a - sqrt b)^2`, tried before the root.
fn within_class_quick_bound(p: &SqrtExtPoint, q: &SqrtExtPoint) -> BigUint {
    let head: BigInt = p
        .head
        .iter()
        .zip(&q.head)
        .map(|(x, y)| (x - y) * (x - y))
        .sum();
    let gap = |a: &BigUint, b: &BigUint| if a > b { a - b } else { b - a };
    head.magnitude() + gap(&p.tail_a, &q.tail_a) + gap(&p.tail_b, &q.tail_b)
}

/// Smallest `k >= 1` with all entries below `2^(k lg n)` and
/// `2^(3k lg n) >= 8d`; `lg n` is `ceil(log2 n)`, at least 1.
pub fn geometry_k(inst: &IntegerInstance) -> (u32, u32) {
    let lg = ceil_log2(inst.n() as u64).max(1);
    let bits = inst.max_abs_entry().bits() as u32;
    let mut k = bits.div_ceil(lg).max(1);
    while 3 * k * lg < 3 + ceil_log2(inst.dim().max(1) as u64) {
        k += 1;
    }
    (k, lg)
}

pub fn zmaxip_to_geometry(inst: &IntegerInstance, mode: Mode) -> Result<GeometryInstance> {
    let (k, lg) = geometry_k(inst);
    let w = BigUint::from(1u32) << (5 * k * lg);
    let tail = |row: &[BigInt]| -> BigUint {
        let n2 = BigInt::dot(row, row);
        let r = BigInt::from(w.clone()) - n2;
        assert!(r.sign() != Sign::Minus, "radicand negative: W too small");
        r.into_parts().1
    };
    let a = inst
        .a()
        .rows()
        .iter()
        .map(|x| SqrtExtPoint {
            head: x.clone(),
            tail_a: tail(x),
            tail_b: BigUint::zero(),
        })
        .collect();
    let b = inst
        .b()
        .rows()
        .iter()
        .map(|y| SqrtExtPoint {
            head: match mode {
                Mode::Furthest => y.iter().map(|v| -v).collect(),
                Mode::Closest => y.clone(),
            },
            tail_a: BigUint::zero(),
            tail_b: tail(y),
        })
        .collect();
    Ok(GeometryInstance { a, b, w, k, mode })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExtremePair {
    pub pair: ArgPair,
    pub dist2: BigUint,
    /// Max-IP of the source instance read back from the distance.
    pub opt: BigInt,
}

/// Brute-force furthest pair or bichromatic closest pair. In furthest mode
/// every within-class pair is shown to be strictly nearer than the chosen
/// cross pair, with exact integer bounds.
pub fn geometry_extreme_pair(geom: &GeometryInstance) -> Result<ExtremePair> {
    if geom.a.is_empty() || geom.b.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let mut best: Option<(BigUint, ArgPair)> = None;
    for (i, p) in geom.a.iter().enumerate() {
        for (j, q) in geom.b.iter().enumerate() {
            let d = cross_dist2(p, q);
            let better = match (&best, geom.mode) {
                (None, _) => true,
                (Some((bd, _)), Mode::Furthest) => d > *bd,
                (Some((bd, _)), Mode::Closest) => d < *bd,
            };
            if better {
                best = Some((d, ArgPair::new(i, j)));
            }
        }
    }
    let (dist2, pair) = best.expect("non-empty");
    if geom.mode == Mode::Furthest {
        for side in [&geom.a, &geom.b] {
            for (i, p) in side.iter().enumerate() {
                for q in &side[i + 1..] {
                    if within_class_quick_bound(p, q) < dist2 {
                        continue;
                    }
                    if within_class_upper_bound(p, q) >= dist2 {
                        return Err(Error::Ambiguous(format!(
                            "within-class distance may reach the cross optimum {dist2}"
                        )));
                    }
                }
            }
        }
    }
    let two_w = BigInt::from(&geom.w * 2u32);
    let d = BigInt::from(dist2.clone());
    let opt = match geom.mode {
        Mode::Furthest => (d - two_w) / 2,
        Mode::Closest => (two_w - d) / 2,
    };
    Ok(ExtremePair { pair, dist2, opt })
}

/// Whether every cross distance equals `2W + 2 x.y` (furthest) or
/// `2W - 2 x.y` (closest) against the source instance.
pub fn cross_identity_holds(geom: &GeometryInstance, source: &IntegerInstance) -> bool {
    let two_w = BigInt::from(&geom.w * 2u32);
    geom.a.iter().zip(source.a().rows()).all(|(p, x)| {
        geom.b.iter().zip(source.b().rows()).all(|(q, y)| {
            let ip = BigInt::dot(x, y) * 2;
            let want = match geom.mode {
                Mode::Furthest => &two_w + ip,
                Mode::Closest => &two_w - ip,
            };
            BigInt::from(cross_dist2(p, q)) == want
        })
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineOutcome {
    pub decision: bool,
    /// Chained instances examined (all of them; no early exit).
    pub instances_checked: usize,
    pub cross_identity_ok: bool,
}

/// OV -> Z-OV family -> tensor -> geometry, with the identity check on every
/// chained instance that is examined.
pub fn ov_to_geometry_pipeline(
    inst: &BooleanInstance,
    ell: usize,
    mode: Mode,
) -> Result<PipelineOutcome> {
    let fam = ov_to_zov(inst, ell)?;
    let results: Vec<Result<(bool, bool)>> = fam
        .instances
        .par_iter()
        .map(|zov| {
            let z = zov_to_zmaxip_tensor(zov)?;
            let geom = zmaxip_to_geometry(&z, mode)?;
            let ok = cross_identity_holds(&geom, &z);
            Ok((geometry_extreme_pair(&geom)?.opt.is_zero(), ok))
        })
        .collect();
    let mut outcome = PipelineOutcome {
        decision: false,
        instances_checked: 0,
        cross_identity_ok: true,
    };
    for r in results {
        let (zero, ok) = r?;
        outcome.instances_checked += 1;
        outcome.cross_identity_ok &= ok;
        outcome.decision |= zero;
    }
    Ok(outcome)
}

pub fn ov_to_geometry_decide(inst: &BooleanInstance, ell: usize, mode: Mode) -> Result<bool> {
    Ok(ov_to_geometry_pipeline(inst, ell, mode)?.decision)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{gen_all_ones, gen_integer, gen_planted_orthogonal, gen_random_instance};
    use crate::oracle::{max_ip_exact, orthogonal_decide};
    use proptest::prelude::*;

    fn int(a: &[&[i64]], b: &[&[i64]]) -> IntegerInstance {
        Instance::from_i64(a, b).unwrap()
    }

    #[test]
    fn tensor_by_hand() {
        let t = zov_to_zmaxip_tensor(&int(&[&[1, 2]], &[&[2, -1]])).unwrap();
        assert_eq!(t.dot(ArgPair::new(0, 0)), BigInt::zero());
        let t = zov_to_zmaxip_tensor(&int(&[&[1, 1]], &[&[1, 1]])).unwrap();
        assert_eq!(t.a().row(0), &[1, 1, 1, 1].map(BigInt::from));
        assert_eq!(t.b().row(0), &[-1, -1, -1, -1].map(BigInt::from));
        assert_eq!(t.dot(ArgPair::new(0, 0)), BigInt::from(-4));
    }

    #[test]
    fn tensor_identity_exhaustive_grid() {
        let grid: Vec<Vec<BigInt>> = (-2..=2)
            .flat_map(|a| (-2..=2).map(move |b| vec![BigInt::from(a), BigInt::from(b)]))
            .collect();
        let inst = Instance::new(
            VectorSet::new(2, grid.clone()).unwrap(),
            VectorSet::new(2, grid).unwrap(),
        )
        .unwrap();
        let t = zov_to_zmaxip_tensor(&inst).unwrap();
        for i in 0..25 {
            for j in 0..25 {
                let ip = inst.dot(ArgPair::new(i, j));
                assert_eq!(t.dot(ArgPair::new(i, j)), -(&ip * &ip));
            }
        }
    }

    #[test]
    fn two_point_geometry() {
        let src = int(&[&[1]], &[&[2]]);
        let g = zmaxip_to_geometry(&src, Mode::Furthest).unwrap();
        assert_eq!((g.k, g.w.clone()), (2, BigUint::from(1024u32)));
        assert_eq!(cross_dist2(&g.a[0], &g.b[0]), BigUint::from(2052u32));
        let e = geometry_extreme_pair(&g).unwrap();
        assert_eq!(e.opt, BigInt::from(2));
        let g = zmaxip_to_geometry(&src, Mode::Closest).unwrap();
        assert_eq!(cross_dist2(&g.a[0], &g.b[0]), BigUint::from(2044u32));
        assert_eq!(geometry_extreme_pair(&g).unwrap().opt, BigInt::from(2));
    }

    #[test]
    fn zero_source_gives_two_w() {
        let src = int(&[&[0, 0], &[0, 0]], &[&[0, 0]]);
        for mode in [Mode::Furthest, Mode::Closest] {
            let g = zmaxip_to_geometry(&src, mode).unwrap();
            let e = geometry_extreme_pair(&g).unwrap();
            assert_eq!(e.dist2, &g.w * 2u32);
            assert_eq!(e.opt, BigInt::zero());
        }
    }

    #[test]
    fn within_class_bound_is_an_upper_bound() {
        // (sqrt 10 - sqrt 3)^2 ~ 1.954; floor(sqrt 30) = 5 gives 13 - 10 = 3.
        let p = SqrtExtPoint {
            head: vec![],
            tail_a: 10u32.into(),
            tail_b: BigUint::zero(),
        };
        let q = SqrtExtPoint {
            head: vec![],
            tail_a: 3u32.into(),
            tail_b: BigUint::zero(),
        };
        assert_eq!(within_class_upper_bound(&p, &q), BigUint::from(3u32));
        assert_eq!(within_class_quick_bound(&p, &q), BigUint::from(7u32));
    }

    #[test]
    fn random_integer_instances_both_modes() {
        for seed in 0..20 {
            let src = gen_integer(8, 3, -3, 3, seed).unwrap();
            let want = max_ip_exact(&src).unwrap().0;
            for mode in [Mode::Furthest, Mode::Closest] {
                let g = zmaxip_to_geometry(&src, mode).unwrap();
                assert!(cross_identity_holds(&g, &src));
                assert_eq!(
                    geometry_extreme_pair(&g).unwrap().opt,
                    want,
                    "seed {seed} {mode:?}"
                );
            }
        }
    }

    #[test]
    fn pipeline_small_cases() {
        let planted = gen_planted_orthogonal(8, 6, 4).unwrap();
        assert!(ov_to_geometry_decide(&planted, 3, Mode::Furthest).unwrap());
        let ones = gen_all_ones(4, 6).unwrap();
        assert!(!ov_to_geometry_decide(&ones, 3, Mode::Closest).unwrap());
        let out = ov_to_geometry_pipeline(&ones, 3, Mode::Furthest).unwrap();
        assert_eq!(out.instances_checked, 100);
        assert!(out.cross_identity_ok);
    }

    #[test]
    fn pipeline_random_sweep() {
        for seed in 0..30 {
            let inst = gen_random_instance(1 + (seed as usize % 8), 6, 0.6, seed).unwrap();
            let want = orthogonal_decide(&inst).unwrap().0;
            assert_eq!(
                ov_to_geometry_decide(&inst, 3, Mode::Furthest).unwrap(),
                want
            );
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn decoded_opt_matches_oracle(seed in any::<u64>(), n in 1usize..6, d in 1usize..5, r in 1i64..50) {
            let src = gen_integer(n, d, -r, r, seed).unwrap();
            let want = max_ip_exact(&src).unwrap().0;
            for mode in [Mode::Furthest, Mode::Closest] {
                let g = zmaxip_to_geometry(&src, mode).unwrap();
                prop_assert!(cross_identity_holds(&g, &src));
                prop_assert_eq!(&geometry_extreme_pair(&g).unwrap().opt, &want);
            }
        }
    }
}
