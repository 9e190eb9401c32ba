//! JSON formats shared with the command line.
//!
//! Every number is a string: `p/q` rational literals or decimals. An input
//! containing any `p/q` literal selects exact mode.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::oscillation::{BlockDecomposition, ZeroMeanBlock};
use crate::rearrange::StepProfile;
use crate::scalar::{format_rational, parse_rational, Mode, Scalar};
use crate::space::{AtomSet, DiscreteSpace, SimpleFunction};
use crate::{Error, Result};

/// A probability space with named functions, held as exact rationals so it
/// can be instantiated in any mode.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub weights: Vec<BigRational>,
    pub functions: BTreeMap<String, Vec<BigRational>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    space: SpaceDoc,
    functions: BTreeMap<String, Vec<String>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceDoc {
    weights: Vec<String>,
}

impl Instance {
    pub fn new(weights: Vec<BigRational>) -> Self {
        Instance { weights, functions: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, values: Vec<BigRational>) -> Self {
        self.functions.insert(name.to_string(), values);
        self
    }

    /// Adds (or replaces) every function of `other`, keeping these weights.
    pub fn with_all(mut self, other: &Instance) -> Self {
        for (name, values) in &other.functions {
            self.functions.insert(name.clone(), values.clone());
        }
        self
    }

    /// Parses the instance format and reports the mode its literals select.
    pub fn from_json(text: &str) -> Result<(Instance, Mode)> {
        let doc: InstanceDoc = serde_json::from_str(text).map_err(|e| Error::Malformed(format!("instance: {e}")))?;
        let mut exact = false;
        let mut parse_all = |v: &[String]| -> Result<Vec<BigRational>> {
            v.iter()
                .map(|s| {
                    exact |= s.contains('/');
                    parse_rational(s)
                })
                .collect()
        };
        let weights = parse_all(&doc.space.weights)?;
        let mut functions = BTreeMap::new();
        for (name, values) in &doc.functions {
            functions.insert(name.clone(), parse_all(values)?);
        }
        let mode = if exact { Mode::Exact } else { Mode::Float };
        Ok((Instance { weights, functions }, mode))
    }

    pub fn to_value(&self) -> Value {
        let strings = |v: &[BigRational]| v.iter().map(format_rational).collect::<Vec<_>>();
        let functions: serde_json::Map<String, Value> =
            self.functions.iter().map(|(k, v)| (k.clone(), json!(strings(v)))).collect();
        json!({ "space": { "weights": strings(&self.weights) }, "functions": functions })
    }

    pub fn to_json(&self) -> String {
        self.to_value().to_string()
    }

    pub fn space<T: Scalar>(&self) -> Result<Arc<DiscreteSpace<T>>> {
        Ok(Arc::new(DiscreteSpace::from_rationals(&self.weights)?))
    }

    pub fn function<T: Scalar>(&self, space: &Arc<DiscreteSpace<T>>, name: &str) -> Result<SimpleFunction<T>> {
        let values = self
            .functions
            .get(name)
            .ok_or_else(|| Error::Malformed(format!("instance has no function `{name}`")))?;
        SimpleFunction::from_rationals(Arc::clone(space), values)
    }
}

fn literal<T: Scalar>(s: &str) -> Result<T> {
    Ok(T::from_rational(&parse_rational(s)?))
}

pub fn profile_to_value<T: Scalar>(p: &StepProfile<T>) -> Value {
    let segments: Vec<[String; 2]> =
        p.segments().iter().map(|s| [s.value.to_literal(), s.length.to_literal()]).collect();
    json!({ "segments": segments })
}

pub fn profile_from_value<T: Scalar>(v: &Value) -> Result<StepProfile<T>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Doc {
        segments: Vec<[String; 2]>,
    }
    let doc: Doc = serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(format!("profile: {e}")))?;
    let pairs = doc
        .segments
        .iter()
        .map(|[value, length]| Ok((literal(value)?, literal(length)?)))
        .collect::<Result<Vec<_>>>()?;
    StepProfile::new(pairs)
}

pub fn blocks_to_value<T: Scalar>(d: &BlockDecomposition<T>) -> Value {
    let blocks: Vec<Value> = d
        .blocks()
        .iter()
        .map(|b| {
            json!({
                "a": b.a.to_literal(),
                "A": b.a_set.iter().collect::<Vec<_>>(),
                "b": b.b.to_literal(),
                "B": b.b_set.iter().collect::<Vec<_>>(),
            })
        })
        .collect();
    json!({ "blocks": blocks })
}

pub fn blocks_from_value<T: Scalar>(v: &Value, space: &Arc<DiscreteSpace<T>>) -> Result<BlockDecomposition<T>> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct BlockDoc {
        a: String,
        #[serde(rename = "A")]
        a_set: Vec<usize>,
        b: String,
        #[serde(rename = "B")]
        b_set: Vec<usize>,
    }
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct Doc {
        blocks: Vec<BlockDoc>,
    }
    let doc: Doc = serde_json::from_value(v.clone()).map_err(|e| Error::Malformed(format!("blocks: {e}")))?;
    let blocks = doc
        .blocks
        .iter()
        .map(|b| {
            Ok(ZeroMeanBlock {
                a: literal(&b.a)?,
                a_set: b.a_set.iter().copied().collect::<AtomSet>(),
                b: literal(&b.b)?,
                b_set: b.b_set.iter().copied().collect::<AtomSet>(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    BlockDecomposition::new(Arc::clone(space), blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oscillation::zero_mean_decompose;
    use crate::rearrange::decreasing_rearrangement;

    const FIXTURE: &str =
        r#"{"space":{"weights":["0.2","0.3","0.5"]},"functions":{"f":["3","-1","2"]}}"#;

    #[test]
    fn instance_mode_follows_literals() {
        let (inst, mode) = Instance::from_json(FIXTURE).unwrap();
        assert_eq!(mode, Mode::Float);
        assert_eq!(inst.weights[0], parse_rational("1/5").unwrap());
        let (_, mode) =
            Instance::from_json(r#"{"space":{"weights":["1/2","1/2"]},"functions":{"f":["1","-1"]}}"#).unwrap();
        assert_eq!(mode, Mode::Exact);
        assert!(Instance::from_json(r#"{"space":{"weights":["x"]},"functions":{}}"#).is_err());
        assert!(Instance::from_json(r#"{"space":{"weights":[]},"functions":{},"extra":1}"#).is_err());
    }

    #[test]
    fn instance_round_trip() {
        let (inst, _) = Instance::from_json(FIXTURE).unwrap();
        let (again, mode) = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(again, inst);
        assert_eq!(mode, Mode::Exact);
    }

    #[test]
    fn profile_json_in_both_modes() {
        let (inst, _) = Instance::from_json(FIXTURE).unwrap();
        let s = inst.space::<f64>().unwrap();
        let p = decreasing_rearrangement(&inst.function(&s, "f").unwrap());
        let v = profile_to_value(&p);
        assert_eq!(v.to_string(), r#"{"segments":[["3","0.2"],["2","0.5"],["1","0.3"]]}"#);
        assert_eq!(profile_from_value::<f64>(&v).unwrap(), p);

        let sq = inst.space::<BigRational>().unwrap();
        let pq = decreasing_rearrangement(&inst.function(&sq, "f").unwrap());
        let v = profile_to_value(&pq);
        assert_eq!(v.to_string(), r#"{"segments":[["3","1/5"],["2","1/2"],["1","3/10"]]}"#);
        assert_eq!(profile_from_value::<BigRational>(&v).unwrap(), pq);
    }

    #[test]
    fn blocks_json_round_trip() {
        let (inst, _) =
            Instance::from_json(r#"{"space":{"weights":["1/4","1/4","1/4","1/4"]},"functions":{"g":["3","1","-2","-2"]}}"#)
                .unwrap();
        let s = inst.space::<BigRational>().unwrap();
        let d = zero_mean_decompose(&inst.function(&s, "g").unwrap()).unwrap();
        let v = blocks_to_value(&d);
        assert_eq!(
            v.to_string(),
            r#"{"blocks":[{"a":"1","A":[0,1],"b":"1","B":[2,3]},{"a":"2","A":[0],"b":"1","B":[2,3]}]}"#
        );
        assert_eq!(blocks_from_value(&v, &s).unwrap(), d);
        assert!(blocks_from_value(&serde_json::json!({"blocks":[{"a":"1","A":[9],"b":"1","B":[0]}]}), &s).is_err());
    }
}
