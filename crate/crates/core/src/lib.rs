//! Max-IP approximation algorithms, Chinese-remainder dimensionality
//! reductions for orthogonal vectors, the reduction chain to integer Max-IP
//! and l2 extreme-pair problems, Merlin-Arthur protocol simulation and the
//! approximate-OR reduction to {-1,1} gap instances.
//!
//! Every construction is paired with an exhaustive oracle in [`oracle`].

pub mod additive;
pub mod arith;
pub mod crtreduce;
pub mod error;
pub mod generate;
pub mod geomreduce;
pub mod instance;
pub mod oracle;
pub mod orgap;
pub mod polysolve;
pub mod protosim;
pub mod registry;

pub use error::{Error, Result};
pub use instance::{
    ArgPair, BooleanInstance, BooleanVectorSet, Instance, IntegerInstance, IntegerVectorSet,
    RealInstance, RealVectorSet, Scalar, VectorSet,
};
