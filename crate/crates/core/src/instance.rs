//! Vector sets and two-sided instances over bits, big integers and
//! non-negative rationals.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Element type of a vector set.
pub trait Scalar: Clone + fmt::Debug + PartialEq {
    type Dot: Clone + Ord + fmt::Debug + Zero;

    fn dot(a: &[Self], b: &[Self]) -> Self::Dot;

    fn admissible(&self) -> bool {
        true
    }
}

impl Scalar for bool {
    type Dot = u64;

    fn dot(a: &[bool], b: &[bool]) -> u64 {
        a.iter().zip(b).filter(|(x, y)| **x && **y).count() as u64
    }
}

impl Scalar for BigInt {
    type Dot = BigInt;

    fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }
}

impl Scalar for BigRational {
    type Dot = BigRational;

    fn dot(a: &[BigRational], b: &[BigRational]) -> BigRational {
        a.iter()
            .zip(b)
            .fold(BigRational::zero(), |acc, (x, y)| acc + x * y)
    }

    /// Real instances are restricted to non-negative entries.
    fn admissible(&self) -> bool {
        !self.is_negative()
    }
}

/// `n` row vectors of a common dimension `d`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorSet<T> {
    dim: usize,
    rows: Vec<Vec<T>>,
}

pub type BooleanVectorSet = VectorSet<bool>;
pub type IntegerVectorSet = VectorSet<BigInt>;
pub type RealVectorSet = VectorSet<BigRational>;

impl<T: Scalar> VectorSet<T> {
    pub fn new(dim: usize, rows: Vec<Vec<T>>) -> Result<Self> {
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: row.len(),
                });
            }
            if let Some(bad) = row.iter().find(|v| !v.admissible()) {
                return Err(Error::InvalidParameter(format!(
                    "entry {bad:?} not admissible for this element type"
                )));
            }
        }
        Ok(Self { dim, rows })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.rows[i]
    }

    pub fn into_rows(self) -> Vec<Vec<T>> {
        self.rows
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&[T]) -> Vec<U>) -> Result<VectorSet<U>> {
        let rows: Vec<Vec<U>> = self.rows.iter().map(|r| f(r)).collect();
        let dim = rows.first().map_or(0, Vec::len);
        VectorSet::new(dim, rows)
    }
}

impl VectorSet<bool> {
    /// Builds a Boolean set from 0/1 rows; any nonzero entry is a one.
    pub fn from_bits(rows: &[&[u8]]) -> Result<Self> {
        let dim = rows.first().map_or(0, |r| r.len());
        Self::new(dim, rows.iter().map(|r| bits(r)).collect())
    }

    pub fn to_integer(&self) -> IntegerVectorSet {
        VectorSet {
            dim: self.dim,
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|&b| BigInt::from(b as u8)).collect())
                .collect(),
        }
    }
}

pub fn bits(v: &[u8]) -> Vec<bool> {
    v.iter().map(|&b| b != 0).collect()
}

/// Index pair `(index_a, index_b)` into the two sides.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArgPair {
    pub index_a: usize,
    pub index_b: usize,
}

impl ArgPair {
    pub fn new(index_a: usize, index_b: usize) -> Self {
        Self { index_a, index_b }
    }
}

/// Two sides `A` and `B` sharing a dimension.
#[derive(Clone, Debug, PartialEq)]
pub struct Instance<T> {
    a: VectorSet<T>,
    b: VectorSet<T>,
}

pub type BooleanInstance = Instance<bool>;
pub type IntegerInstance = Instance<BigInt>;
pub type RealInstance = Instance<BigRational>;

impl<T: Scalar> Instance<T> {
    pub fn new(a: VectorSet<T>, b: VectorSet<T>) -> Result<Self> {
        if a.dim() != b.dim() {
            return Err(Error::DimensionMismatch {
                expected: a.dim(),
                got: b.dim(),
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &VectorSet<T> {
        &self.a
    }

    pub fn b(&self) -> &VectorSet<T> {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `max(|A|, |B|)`, used wherever a single `n` enters a formula.
    pub fn n(&self) -> usize {
        self.a.len().max(self.b.len())
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty() || self.b.is_empty()
    }

    pub fn dot(&self, pair: ArgPair) -> T::Dot {
        T::dot(self.a.row(pair.index_a), self.b.row(pair.index_b))
    }
}

impl Instance<bool> {
    pub fn from_bits(a: &[&[u8]], b: &[&[u8]]) -> Result<Self> {
        Self::new(VectorSet::from_bits(a)?, VectorSet::from_bits(b)?)
    }

    pub fn to_integer(&self) -> IntegerInstance {
        Instance {
            a: self.a.to_integer(),
            b: self.b.to_integer(),
        }
    }
}

impl Instance<BigInt> {
    pub fn from_i64(a: &[&[i64]], b: &[&[i64]]) -> Result<Self> {
        let conv = |rows: &[&[i64]]| {
            let dim = rows.first().map_or(0, |r| r.len());
            VectorSet::new(
                dim,
                rows.iter()
                    .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
                    .collect(),
            )
        };
        Self::new(conv(a)?, conv(b)?)
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.a
            .rows()
            .iter()
            .chain(self.b.rows())
            .flatten()
            .map(|v| v.abs())
            .max()
            .unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_rows() {
        let err = VectorSet::new(2, vec![vec![true, false], vec![true]]).unwrap_err();
        assert_eq!(
            err,
            Error::DimensionMismatch {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn rejects_negative_reals() {
        let neg = BigRational::from_integer((-1).into());
        assert!(VectorSet::new(1, vec![vec![neg]]).is_err());
    }

    #[test]
    fn sides_must_share_dimension() {
        let a = VectorSet::from_bits(&[&[1, 0]]).unwrap();
        let b = VectorSet::from_bits(&[&[1, 0, 1]]).unwrap();
        assert!(Instance::new(a, b).is_err());
    }

    #[test]
    fn unequal_side_sizes_allowed() {
        let inst = Instance::from_bits(&[&[1, 0]], &[&[1, 1], &[0, 1], &[1, 0]]).unwrap();
        assert_eq!(inst.n(), 3);
        assert_eq!(inst.dot(ArgPair::new(0, 0)), 1);
    }
}
