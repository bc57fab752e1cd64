//! Name-indexed registries of Max-IP solvers and instance reductions, so
//! front ends can select a strategy at run time.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use crate::additive::{approx_additive, Route};
use crate::crtreduce::ov_to_zov;
use crate::error::{invalid, Error, Result};
use crate::geomreduce::{
    cross_identity_holds, geometry_extreme_pair, zmaxip_to_geometry, zov_to_zmaxip_tensor,
    GeometryInstance, Mode,
};
use crate::instance::{ArgPair, BooleanInstance, IntegerInstance, RealInstance};
use crate::oracle::{max_ip_exact, orthogonal_decide};
use crate::orgap::{ov_to_pm1_gap, Pm1GapInstance};
use crate::polysolve::{approx_mult, approx_mult_real};
use crate::protosim::gap::ov_to_maxip_gap;

#[derive(Clone, Debug, PartialEq)]
pub enum AnyInstance {
    Boolean(BooleanInstance),
    Integer(IntegerInstance),
    Real(RealInstance),
}

impl AnyInstance {
    pub fn kind(&self) -> &'static str {
        match self {
            AnyInstance::Boolean(_) => "boolean",
            AnyInstance::Integer(_) => "integer",
            AnyInstance::Real(_) => "real",
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            AnyInstance::Boolean(i) => i.dim(),
            AnyInstance::Integer(i) => i.dim(),
            AnyInstance::Real(i) => i.dim(),
        }
    }

    pub fn n(&self) -> usize {
        match self {
            AnyInstance::Boolean(i) => i.n(),
            AnyInstance::Integer(i) => i.n(),
            AnyInstance::Real(i) => i.n(),
        }
    }

    pub fn as_boolean(&self) -> Result<&BooleanInstance> {
        match self {
            AnyInstance::Boolean(i) => Ok(i),
            other => Err(invalid(format!(
                "expected a boolean instance, got {}",
                other.kind()
            ))),
        }
    }

    pub fn as_integer(&self) -> Result<IntegerInstance> {
        match self {
            AnyInstance::Boolean(i) => Ok(i.to_integer()),
            AnyInstance::Integer(i) => Ok(i.clone()),
            other => Err(invalid(format!(
                "expected an integer instance, got {}",
                other.kind()
            ))),
        }
    }

    /// Exact optimum and a lexicographically first witness.
    pub fn exact(&self) -> Result<(Value, ArgPair)> {
        Ok(match self {
            AnyInstance::Boolean(i) => {
                let (v, p) = max_ip_exact(i)?;
                (Value::Exact(BigRational::from_integer(v.into())), p)
            }
            AnyInstance::Integer(i) => {
                let (v, p) = max_ip_exact(i)?;
                (Value::Exact(BigRational::from_integer(v)), p)
            }
            AnyInstance::Real(i) => {
                let (v, p) = max_ip_exact(i)?;
                (Value::Exact(v), p)
            }
        })
    }

    /// Whether some cross pair has dot product zero.
    pub fn has_orthogonal_pair(&self) -> Result<bool> {
        Ok(match self {
            AnyInstance::Boolean(i) => orthogonal_decide(i)?.0,
            AnyInstance::Integer(i) => orthogonal_decide(i)?.0,
            AnyInstance::Real(i) => orthogonal_decide(i)?.0,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(BigRational),
    Approx(f64),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(v) => write!(f, "{v}"),
            Value::Approx(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveConfig {
    pub t: f64,
    pub r: Option<u32>,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            t: 2.0,
            r: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOutput {
    pub value: Value,
    pub witness: Option<ArgPair>,
    /// Solver-specific parameters actually used, in a stable order.
    pub details: Vec<(String, String)>,
}

pub trait MaxIpSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn solve(&self, inst: &AnyInstance, cfg: &SolveConfig) -> Result<SolveOutput>;
}

struct ExactSolver;
struct MultSolver;
struct AddSolver;

impl MaxIpSolver for ExactSolver {
    fn name(&self) -> &'static str {
        "exact"
    }

    fn description(&self) -> &'static str {
        "brute-force optimum over all pairs"
    }

    fn solve(&self, inst: &AnyInstance, _cfg: &SolveConfig) -> Result<SolveOutput> {
        let (value, pair) = inst.exact()?;
        Ok(SolveOutput {
            value,
            witness: Some(pair),
            details: Vec::new(),
        })
    }
}

impl MaxIpSolver for MultSolver {
    fn name(&self) -> &'static str {
        "mult"
    }

    fn description(&self) -> &'static str {
        "deterministic t-multiplicative approximation via batched power sums"
    }

    fn solve(&self, inst: &AnyInstance, cfg: &SolveConfig) -> Result<SolveOutput> {
        let detail = |r: u32, b: usize, ps: String| {
            vec![
                ("r".into(), r.to_string()),
                ("block".into(), b.to_string()),
                ("power_sum".into(), ps),
            ]
        };
        match inst {
            AnyInstance::Boolean(i) => {
                let res = approx_mult(i, cfg.t, cfg.r)?;
                Ok(SolveOutput {
                    value: Value::Approx(res.value),
                    witness: None,
                    details: detail(res.r, res.b, res.power_sum.to_string()),
                })
            }
            AnyInstance::Real(i) => {
                let res = approx_mult_real(i, cfg.t, cfg.r)?;
                Ok(SolveOutput {
                    value: Value::Approx(res.value),
                    witness: None,
                    details: detail(res.r, res.b, res.power_sum.to_string()),
                })
            }
            AnyInstance::Integer(i) => {
                let rows =
                    |s: &crate::instance::IntegerVectorSet| -> Result<Vec<Vec<BigRational>>> {
                        s.rows()
                            .iter()
                            .map(|r| {
                                r.iter()
                                    .map(|v| {
                                        if v.is_negative() {
                                            Err(invalid("mult needs non-negative entries"))
                                        } else {
                                            Ok(BigRational::from_integer(v.clone()))
                                        }
                                    })
                                    .collect()
                            })
                            .collect()
                    };
                let real = RealInstance::new(
                    crate::instance::VectorSet::new(i.dim(), rows(i.a())?)?,
                    crate::instance::VectorSet::new(i.dim(), rows(i.b())?)?,
                )?;
                self.solve(&AnyInstance::Real(real), cfg)
            }
        }
    }
}

impl MaxIpSolver for AddSolver {
    fn name(&self) -> &'static str {
        "add"
    }

    fn description(&self) -> &'static str {
        "randomized t-additive approximation by coordinate sampling"
    }

    fn solve(&self, inst: &AnyInstance, cfg: &SolveConfig) -> Result<SolveOutput> {
        let res = approx_additive(inst.as_boolean()?, cfg.t, cfg.seed)?;
        let route = match res.route {
            Route::Trivial => "trivial".to_string(),
            Route::Exact => "exact".to_string(),
            Route::Sampled { d1 } => format!("sampled(d1={d1})"),
        };
        Ok(SolveOutput {
            value: Value::Approx(res.value),
            witness: None,
            details: vec![("route".into(), route)],
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReduceConfig {
    pub ell: usize,
    pub eps: BigRational,
    pub reps: u32,
    pub mode: Mode,
}

impl Default for ReduceConfig {
    fn default() -> Self {
        Self {
            ell: 2,
            eps: BigRational::new(1.into(), 3.into()),
            reps: 1,
            mode: Mode::Furthest,
        }
    }
}

#[derive(Clone, Debug)]
pub enum ReducedInstance {
    Vector(AnyInstance),
    Geometry(GeometryInstance),
    /// Implicit {-1,1} instance with a pairwise dot evaluator.
    Pm1(Box<Pm1GapInstance>),
}

#[derive(Clone, Debug)]
pub struct Reduced {
    pub instances: Vec<ReducedInstance>,
    /// Parameters of the emitted family, in a stable order.
    pub meta: Vec<(String, String)>,
    /// Yes-threshold for gap reductions.
    pub threshold: Option<BigRational>,
}

/// Answer read back from the emitted instances.
#[derive(Clone, Debug, PartialEq)]
pub enum Recovered {
    /// Whether the source has an orthogonal pair.
    Orthogonal(bool),
    /// The source's Max-IP value.
    MaxIp(BigInt),
}

pub trait Reduction: Send + Sync {
    fn name(&self) -> &'static str;
    fn description(&self) -> &'static str;
    fn reduce(&self, inst: &AnyInstance, cfg: &ReduceConfig) -> Result<Reduced>;
    /// Solves the emitted instances with exact oracles and maps the
    /// answers back to the source problem.
    fn recover(&self, reduced: &Reduced) -> Result<Recovered>;

    /// The source oracle's answer to the question `recover` answers.
    fn source_answer(&self, inst: &AnyInstance) -> Result<Recovered> {
        Ok(Recovered::Orthogonal(inst.has_orthogonal_pair()?))
    }
}

fn vector(r: &ReducedInstance) -> Result<&AnyInstance> {
    match r {
        ReducedInstance::Vector(v) => Ok(v),
        _ => Err(invalid("expected a vector instance")),
    }
}

struct Ov2Zov;
struct Zov2Zmaxip;
struct Zmaxip2Geom;
struct Ov2Gap;
struct Ov2Pm1;

impl Reduction for Ov2Zov {
    fn name(&self) -> &'static str {
        "ov2zov"
    }

    fn description(&self) -> &'static str {
        "OV to a family of integer OV instances in dimension ell + 1"
    }

    fn reduce(&self, inst: &AnyInstance, cfg: &ReduceConfig) -> Result<Reduced> {
        let fam = ov_to_zov(inst.as_boolean()?, cfg.ell)?;
        Ok(Reduced {
            meta: vec![
                ("ell".into(), cfg.ell.to_string()),
                ("count".into(), fam.instances.len().to_string()),
                ("coordinate_modulus".into(), fam.reduction.l().to_string()),
            ],
            instances: fam
                .instances
                .into_iter()
                .map(|i| ReducedInstance::Vector(AnyInstance::Integer(i)))
                .collect(),
            threshold: None,
        })
    }

    fn recover(&self, reduced: &Reduced) -> Result<Recovered> {
        for r in &reduced.instances {
            if vector(r)?.has_orthogonal_pair()? {
                return Ok(Recovered::Orthogonal(true));
            }
        }
        Ok(Recovered::Orthogonal(false))
    }
}

impl Reduction for Zov2Zmaxip {
    fn name(&self) -> &'static str {
        "zov2zmaxip"
    }

    fn description(&self) -> &'static str {
        "integer OV to integer Max-IP by tensor squaring; optimum 0 iff orthogonal"
    }

    fn reduce(&self, inst: &AnyInstance, _cfg: &ReduceConfig) -> Result<Reduced> {
        let out = zov_to_zmaxip_tensor(&inst.as_integer()?)?;
        Ok(Reduced {
            meta: vec![("dim".into(), out.dim().to_string())],
            instances: vec![ReducedInstance::Vector(AnyInstance::Integer(out))],
            threshold: None,
        })
    }

    fn recover(&self, reduced: &Reduced) -> Result<Recovered> {
        let [r] = reduced.instances.as_slice() else {
            return Err(invalid("expected one instance"));
        };
        let (v, _) = vector(r)?.exact()?;
        Ok(Recovered::Orthogonal(
            matches!(v, Value::Exact(q) if q.is_zero()),
        ))
    }
}

impl Reduction for Zmaxip2Geom {
    fn name(&self) -> &'static str {
        "zmaxip2geom"
    }

    fn description(&self) -> &'static str {
        "integer Max-IP to bichromatic furthest or closest pair"
    }

    fn reduce(&self, inst: &AnyInstance, cfg: &ReduceConfig) -> Result<Reduced> {
        let src = inst.as_integer()?;
        let geom = zmaxip_to_geometry(&src, cfg.mode)?;
        let ok = cross_identity_holds(&geom, &src);
        Ok(Reduced {
            meta: vec![
                ("mode".into(), format!("{:?}", cfg.mode).to_lowercase()),
                ("k".into(), geom.k.to_string()),
                ("w".into(), geom.w.to_string()),
                ("cross_identity".into(), ok.to_string()),
            ],
            instances: vec![ReducedInstance::Geometry(geom)],
            threshold: None,
        })
    }

    fn recover(&self, reduced: &Reduced) -> Result<Recovered> {
        match reduced.instances.as_slice() {
            [ReducedInstance::Geometry(g)] => Ok(Recovered::MaxIp(geometry_extreme_pair(g)?.opt)),
            _ => Err(invalid("expected one geometry instance")),
        }
    }

    fn source_answer(&self, inst: &AnyInstance) -> Result<Recovered> {
        Ok(Recovered::MaxIp(max_ip_exact(&inst.as_integer()?)?.0))
    }
}

impl Reduction for Ov2Gap {
    fn name(&self) -> &'static str {
        "ov2gap"
    }

    fn description(&self) -> &'static str {
        "OV to Boolean gap Max-IP by enumerating a toy MA protocol's advice"
    }

    fn reduce(&self, inst: &AnyInstance, cfg: &ReduceConfig) -> Result<Reduced> {
        use num_traits::ToPrimitive;
        let eps = cfg
            .eps
            .to_f64()
            .ok_or_else(|| invalid("eps out of range"))?;
        let fam = ov_to_maxip_gap(inst.as_boolean()?, eps, cfg.reps)?;
        let cost = fam.protocol.cost();
        Ok(Reduced {
            meta: vec![
                ("count".into(), fam.instances.len().to_string()),
                ("threshold".into(), fam.threshold.to_string()),
                ("soundness".into(), fam.soundness.to_string()),
                ("advice_bits".into(), cost.advice_bits.to_string()),
                ("coin_bits".into(), cost.coin_bits.to_string()),
                ("message_bits".into(), cost.message_bits.to_string()),
                ("dim".into(), fam.protocol.gap_dim().to_string()),
            ],
            threshold: Some(BigRational::from_integer(fam.threshold.into())),
            instances: fam
                .instances
                .into_iter()
                .map(|i| ReducedInstance::Vector(AnyInstance::Boolean(i)))
                .collect(),
        })
    }

    fn recover(&self, reduced: &Reduced) -> Result<Recovered> {
        let t = reduced
            .threshold
            .clone()
            .ok_or_else(|| invalid("missing threshold"))?;
        for r in &reduced.instances {
            if let (Value::Exact(v), _) = vector(r)?.exact()? {
                if v >= t {
                    return Ok(Recovered::Orthogonal(true));
                }
            }
        }
        Ok(Recovered::Orthogonal(false))
    }
}

impl Reduction for Ov2Pm1 {
    fn name(&self) -> &'static str {
        "ov2pm1"
    }

    fn description(&self) -> &'static str {
        "OV to {-1,1} gap Max-IP through an approximating polynomial for OR"
    }

    fn reduce(&self, inst: &AnyInstance, cfg: &ReduceConfig) -> Result<Reduced> {
        let gap = ov_to_pm1_gap(inst.as_boolean()?, &cfg.eps)?;
        Ok(Reduced {
            meta: vec![
                ("eps".into(), gap.eps.to_string()),
                ("inner_eps".into(), gap.inner_eps.to_string()),
                ("degree".into(), gap.coeffs.degree.to_string()),
                ("d1".into(), gap.d1.to_string()),
                ("gadget_width".into(), gap.gadget.g.to_string()),
                ("threshold".into(), gap.threshold.to_string()),
                ("no_bound".into(), gap.no_bound.to_string()),
            ],
            threshold: Some(gap.threshold.clone()),
            instances: vec![ReducedInstance::Pm1(Box::new(gap))],
        })
    }

    fn recover(&self, reduced: &Reduced) -> Result<Recovered> {
        match reduced.instances.as_slice() {
            [ReducedInstance::Pm1(g)] => Ok(Recovered::Orthogonal(
                BigRational::from_integer(g.max_ip()) >= g.threshold,
            )),
            _ => Err(invalid("expected one {-1,1} gap instance")),
        }
    }
}

pub struct Registry {
    solvers: BTreeMap<&'static str, Box<dyn MaxIpSolver>>,
    reductions: BTreeMap<&'static str, Box<dyn Reduction>>,
}

impl Default for Registry {
    fn default() -> Self {
        let mut r = Self {
            solvers: BTreeMap::new(),
            reductions: BTreeMap::new(),
        };
        r.register_solver(Box::new(ExactSolver));
        r.register_solver(Box::new(MultSolver));
        r.register_solver(Box::new(AddSolver));
        r.register_reduction(Box::new(Ov2Zov));
        r.register_reduction(Box::new(Zov2Zmaxip));
        r.register_reduction(Box::new(Zmaxip2Geom));
        r.register_reduction(Box::new(Ov2Gap));
        r.register_reduction(Box::new(Ov2Pm1));
        r
    }
}

impl Registry {
    pub fn register_solver(&mut self, s: Box<dyn MaxIpSolver>) {
        self.solvers.insert(s.name(), s);
    }

    pub fn register_reduction(&mut self, r: Box<dyn Reduction>) {
        self.reductions.insert(r.name(), r);
    }

    pub fn solver(&self, name: &str) -> Result<&dyn MaxIpSolver> {
        self.solvers
            .get(name)
            .map(|s| s.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "solver",
                name: name.to_string(),
            })
    }

    pub fn reduction(&self, name: &str) -> Result<&dyn Reduction> {
        self.reductions
            .get(name)
            .map(|r| r.as_ref())
            .ok_or_else(|| Error::Unknown {
                kind: "reduction",
                name: name.to_string(),
            })
    }

    pub fn solver_names(&self) -> Vec<&'static str> {
        self.solvers.keys().copied().collect()
    }

    pub fn reduction_names(&self) -> Vec<&'static str> {
        self.reductions.keys().copied().collect()
    }
}
