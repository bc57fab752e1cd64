//! Instance files: JSON with a type tag, per-side counts and rows. Integers
//! are decimal strings and rationals `"p/q"` strings, so no precision is
//! lost.

use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use maxip_core::geomreduce::{GeometryInstance, SqrtExtPoint};
use maxip_core::orgap::{parse_ratio, Pm1GapInstance};
use maxip_core::registry::AnyInstance;
use maxip_core::{Instance, VectorSet};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub n_a: usize,
    pub n_b: usize,
    pub d: usize,
    pub a: Vec<Vec<Value>>,
    pub b: Vec<Vec<Value>>,
}

fn rational_string(v: &BigRational) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

impl InstanceFile {
    pub fn from_instance(inst: &AnyInstance) -> Self {
        fn rows<T: maxip_core::Scalar>(
            s: &VectorSet<T>,
            f: impl Fn(&T) -> Value,
        ) -> Vec<Vec<Value>> {
            s.rows()
                .iter()
                .map(|r| r.iter().map(&f).collect())
                .collect()
        }
        let (a, b) = match inst {
            AnyInstance::Boolean(i) => {
                let f = |v: &bool| Value::from(*v as u8);
                (rows(i.a(), f), rows(i.b(), f))
            }
            AnyInstance::Integer(i) => {
                let f = |v: &BigInt| Value::from(v.to_string());
                (rows(i.a(), f), rows(i.b(), f))
            }
            AnyInstance::Real(i) => {
                let f = |v: &BigRational| Value::from(rational_string(v));
                (rows(i.a(), f), rows(i.b(), f))
            }
        };
        Self {
            kind: inst.kind().to_string(),
            n_a: a.len(),
            n_b: b.len(),
            d: inst.dim(),
            a,
            b,
        }
    }

    pub fn to_instance(&self) -> Result<AnyInstance> {
        ensure!(
            self.a.len() == self.n_a,
            "n_a = {} but A has {} rows",
            self.n_a,
            self.a.len()
        );
        ensure!(
            self.b.len() == self.n_b,
            "n_b = {} but B has {} rows",
            self.n_b,
            self.b.len()
        );
        fn side<T: maxip_core::Scalar>(
            rows: &[Vec<Value>],
            d: usize,
            f: impl Fn(&Value) -> Result<T>,
        ) -> Result<VectorSet<T>> {
            let rows = rows
                .iter()
                .map(|r| r.iter().map(&f).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            Ok(VectorSet::new(d, rows)?)
        }
        match self.kind.as_str() {
            "boolean" => {
                let f = |v: &Value| -> Result<bool> {
                    match v {
                        Value::Bool(b) => Ok(*b),
                        Value::Number(n) if n.as_u64() == Some(0) => Ok(false),
                        Value::Number(n) if n.as_u64() == Some(1) => Ok(true),
                        other => bail!("boolean entry must be 0 or 1, got {other}"),
                    }
                };
                Ok(AnyInstance::Boolean(Instance::new(
                    side(&self.a, self.d, f)?,
                    side(&self.b, self.d, f)?,
                )?))
            }
            "integer" => {
                let f = |v: &Value| -> Result<BigInt> {
                    match v {
                        Value::String(s) => s
                            .trim()
                            .parse()
                            .with_context(|| format!("bad integer {s:?}")),
                        Value::Number(n) if n.is_i64() || n.is_u64() => {
                            Ok(n.to_string().parse()?)
                        }
                        other => bail!("integer entry must be a decimal string, got {other}"),
                    }
                };
                Ok(AnyInstance::Integer(Instance::new(
                    side(&self.a, self.d, f)?,
                    side(&self.b, self.d, f)?,
                )?))
            }
            "real" => {
                let f = |v: &Value| -> Result<BigRational> {
                    match v {
                        Value::String(s) => Ok(parse_ratio(s)?),
                        Value::Number(n) if n.is_i64() || n.is_u64() => {
                            Ok(parse_ratio(&n.to_string())?)
                        }
                        other => bail!("real entry must be a p/q string, got {other}"),
                    }
                };
                Ok(AnyInstance::Real(Instance::new(
                    side(&self.a, self.d, f)?,
                    side(&self.b, self.d, f)?,
                )?))
            }
            other => bail!("unknown instance type {other:?}"),
        }
    }
}

pub fn instance_to_json(inst: &AnyInstance) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(inst)).expect("serializable") + "\n"
}

pub fn instance_from_json(text: &str) -> Result<AnyInstance> {
    let file: InstanceFile = serde_json::from_str(text).context("malformed instance file")?;
    file.to_instance()
}

pub fn read_instance(path: &Path) -> Result<AnyInstance> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    instance_from_json(&text).with_context(|| format!("in {}", path.display()))
}

pub fn write_instance(inst: &AnyInstance, path: &Path) -> Result<()> {
    fs::write(path, instance_to_json(inst))
        .with_context(|| format!("cannot write {}", path.display()))
}

fn point_json(p: &SqrtExtPoint) -> Value {
    serde_json::json!({
        "head": p.head.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "tail_a": p.tail_a.to_string(),
        "tail_b": p.tail_b.to_string(),
    })
}

/// Points as `head` coordinates plus the two radicands of the tail slots.
pub fn geometry_to_json(g: &GeometryInstance) -> String {
    let v = serde_json::json!({
        "type": "geometry",
        "mode": format!("{:?}", g.mode).to_lowercase(),
        "w": g.w.to_string(),
        "k": g.k,
        "a": g.a.iter().map(point_json).collect::<Vec<_>>(),
        "b": g.b.iter().map(point_json).collect::<Vec<_>>(),
    });
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

/// A ±1 instance too wide to materialize: its parameters and the source
/// instance, from which every coordinate is determined.
pub fn pm1_implicit_to_json(g: &Pm1GapInstance) -> String {
    let v = serde_json::json!({
        "type": "pm1-implicit",
        "d": g.d1.to_string(),
        "eps": g.eps.to_string(),
        "inner_eps": g.inner_eps.to_string(),
        "degree": g.coeffs.degree,
        "gadget_width": g.gadget.g,
        "threshold": g.threshold.to_string(),
        "no_bound": g.no_bound.to_string(),
        "source": InstanceFile::from_instance(&AnyInstance::Boolean(g.source.clone())),
    });
    serde_json::to_string_pretty(&v).expect("serializable") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use maxip_core::generate::{gen_integer, gen_random_instance};
    use num_traits::One;

    #[test]
    fn round_trips() {
        let b = AnyInstance::Boolean(gen_random_instance(3, 5, 0.5, 1).unwrap());
        assert_eq!(instance_from_json(&instance_to_json(&b)).unwrap(), b);
        let i = AnyInstance::Integer(gen_integer(2, 3, -5, 5, 2).unwrap());
        assert_eq!(instance_from_json(&instance_to_json(&i)).unwrap(), i);
        let huge: BigInt = (BigInt::one() << 200) - 7;
        let big = AnyInstance::Integer(
            Instance::new(
                VectorSet::new(1, vec![vec![huge.clone()]]).unwrap(),
                VectorSet::new(1, vec![vec![-huge]]).unwrap(),
            )
            .unwrap(),
        );
        assert_eq!(instance_from_json(&instance_to_json(&big)).unwrap(), big);
        let r = AnyInstance::Real(
            Instance::new(
                VectorSet::new(
                    2,
                    vec![vec![
                        BigRational::new(1.into(), 3.into()),
                        BigRational::one(),
                    ]],
                )
                .unwrap(),
                VectorSet::new(
                    2,
                    vec![vec![
                        BigRational::new(5.into(), 2.into()),
                        BigRational::one(),
                    ]],
                )
                .unwrap(),
            )
            .unwrap(),
        );
        assert_eq!(instance_from_json(&instance_to_json(&r)).unwrap(), r);
    }

    #[test]
    fn rejects_mismatches() {
        let bad = r#"{"type":"boolean","n_a":1,"n_b":1,"d":2,"a":[["1/2","1"]],"b":[[0,1]]}"#;
        assert!(instance_from_json(bad).is_err());
        let bad = r#"{"type":"boolean","n_a":2,"n_b":1,"d":2,"a":[[1,0]],"b":[[0,1]]}"#;
        assert!(instance_from_json(bad).is_err());
        let bad = r#"{"type":"integer","n_a":1,"n_b":1,"d":2,"a":[["1/2","1"]],"b":[["0","1"]]}"#;
        assert!(instance_from_json(bad).is_err());
        let bad = r#"{"type":"real","n_a":1,"n_b":1,"d":1,"a":[["-1/2"]],"b":[["1"]]}"#;
        assert!(instance_from_json(bad).is_err());
        assert!(instance_from_json("{").is_err());
        let ok = r#"{"type":"boolean","n_a":1,"n_b":1,"d":2,"a":[[true,0]],"b":[[0,1]]}"#;
        assert!(instance_from_json(ok).is_ok());
    }
}
