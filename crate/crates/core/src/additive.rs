//! Randomized t-additive Max-IP by coordinate sampling. The sampled
//! instance is solved exactly and the optimum rescaled by `d / d1`.

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::generate::rng;
use crate::instance::{BooleanInstance, Instance, VectorSet};
use crate::oracle::{all_pair_max_ip, max_ip_exact};

/// Constant in `d1 = ceil(c1 * eps1^-2 * ln n)`.
pub const C1: f64 = 2.0;

#[derive(Clone, Debug, PartialEq)]
pub struct SamplePlan {
    pub d1: usize,
    /// Drawn uniformly from `[d]`, with replacement.
    pub indices: Vec<usize>,
    pub epsilon1: f64,
}

/// `ceil(c1 * eps1^-2 * ln n)`, at least 1.
pub fn sample_dim(n: usize, epsilon1: f64) -> usize {
    let ln_n = (n.max(1) as f64).ln();
    ((C1 * ln_n / (epsilon1 * epsilon1)).ceil() as usize).max(1)
}

impl SamplePlan {
    pub fn draw(d: usize, d1: usize, epsilon1: f64, seed: u64) -> Result<Self> {
        if d == 0 {
            return Err(invalid("cannot sample from dimension 0"));
        }
        let mut r = rng(seed);
        let indices = (0..d1).map(|_| r.gen_range(0..d)).collect();
        Ok(Self {
            d1,
            indices,
            epsilon1,
        })
    }

    pub fn restrict(&self, inst: &BooleanInstance) -> Result<BooleanInstance> {
        let side = |s: &VectorSet<bool>| {
            VectorSet::new(
                self.d1,
                s.rows()
                    .iter()
                    .map(|r| self.indices.iter().map(|&i| r[i]).collect())
                    .collect(),
            )
        };
        Instance::new(side(inst.a())?, side(inst.b())?)
    }

    /// `|a~.b~ / d1 - a.b / d|` for one pair.
    pub fn relative_error(&self, a: &[bool], b: &[bool]) -> f64 {
        let sampled = self.indices.iter().filter(|&&i| a[i] && b[i]).count() as f64;
        let full = a.iter().zip(b).filter(|(x, y)| **x && **y).count() as f64;
        (sampled / self.d1 as f64 - full / a.len() as f64).abs()
    }
}

/// Per-pair failure bound `2 exp(-2 d1 eps1^2)`.
pub fn chernoff_bound(d1: usize, epsilon1: f64) -> f64 {
    2.0 * (-2.0 * d1 as f64 * epsilon1 * epsilon1).exp()
}

#[derive(Clone, Debug, PartialEq)]
pub enum Route {
    /// `t >= d`: any value in `[0, d]` is within budget.
    Trivial,
    /// `t = 0` or `d1 >= d`: solved exactly.
    Exact,
    Sampled {
        d1: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdditiveResult {
    pub value: f64,
    pub route: Route,
}

fn plan_route(inst: &BooleanInstance, t: f64) -> Result<(Route, f64)> {
    if !t.is_finite() || t < 0.0 {
        return Err(invalid(format!(
            "t must be finite and non-negative, got {t}"
        )));
    }
    if inst.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let d = inst.dim();
    if t >= d as f64 {
        return Ok((Route::Trivial, 0.0));
    }
    if t == 0.0 {
        return Ok((Route::Exact, 0.0));
    }
    let eps1 = t / d as f64 / 2.0;
    let d1 = sample_dim(inst.n(), eps1);
    if d1 >= d {
        Ok((Route::Exact, eps1))
    } else {
        Ok((Route::Sampled { d1 }, eps1))
    }
}

fn max_popcount(s: &VectorSet<bool>) -> usize {
    s.rows()
        .iter()
        .map(|r| r.iter().filter(|b| **b).count())
        .max()
        .unwrap_or(0)
}

/// `|v - OPT| <= t` with probability at least `1 - 1/n` over the seed.
pub fn approx_additive(inst: &BooleanInstance, t: f64, seed: u64) -> Result<AdditiveResult> {
    let (route, eps1) = plan_route(inst, t)?;
    let value = match route {
        Route::Trivial => max_popcount(inst.a()).min(max_popcount(inst.b())) as f64,
        Route::Exact => max_ip_exact(inst)?.0 as f64,
        Route::Sampled { d1 } => {
            let plan = SamplePlan::draw(inst.dim(), d1, eps1, seed)?;
            sampled_value(inst, &plan)?
        }
    };
    Ok(AdditiveResult { value, route })
}

/// `OPT(sampled) * d / d1` for a given plan.
pub fn sampled_value(inst: &BooleanInstance, plan: &SamplePlan) -> Result<f64> {
    let opt = max_ip_exact(&plan.restrict(inst)?)?.0;
    Ok(opt as f64 * inst.dim() as f64 / plan.d1 as f64)
}

/// Per-row additive values from a single shared plan.
pub fn all_pair_additive(inst: &BooleanInstance, t: f64, seed: u64) -> Result<Vec<f64>> {
    let (route, eps1) = plan_route(inst, t)?;
    match route {
        Route::Trivial => {
            let cap = max_popcount(inst.b());
            Ok(inst
                .a()
                .rows()
                .iter()
                .map(|r| r.iter().filter(|b| **b).count().min(cap) as f64)
                .collect())
        }
        Route::Exact => Ok(all_pair_max_ip(inst)?
            .into_iter()
            .map(|v| v as f64)
            .collect()),
        Route::Sampled { d1 } => {
            let plan = SamplePlan::draw(inst.dim(), d1, eps1, seed)?;
            let scale = inst.dim() as f64 / d1 as f64;
            Ok(all_pair_max_ip(&plan.restrict(inst)?)?
                .into_iter()
                .map(|v| v as f64 * scale)
                .collect())
        }
    }
}
