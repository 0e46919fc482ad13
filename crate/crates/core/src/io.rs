//! Instance JSON format.
//!
//! ```json
//! { "bidders": [ { "id": "a", "support": [[1.0, 0.5], [2.0, 0.5]], "cost": 0.3 } ],
//!   "capacity": 2 }
//! ```
//!
//! `cost` and `capacity` are optional. A file is a cost instance iff every
//! bidder has a cost; capacity and costs may not both be present.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::{Bidder, Constraint, Instance, ValueDistribution};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub bidders: Vec<BidderRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidderRecord {
    pub id: String,
    pub support: Vec<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost: Option<f64>,
}

impl InstanceFile {
    pub fn into_instance<T: Scalar>(self) -> Result<Instance<T>> {
        let bidders = self
            .bidders
            .into_iter()
            .map(|b| {
                let dist = ValueDistribution::new(b.support.iter().map(|&(v, p)| (T::lit(v), T::lit(p)))).map_err(
                    |e| match e {
                        crate::Error::InvalidDistribution(msg) => {
                            crate::Error::InvalidDistribution(format!("bidder {:?}: {msg}", b.id))
                        }
                        other => other,
                    },
                )?;
                Ok(Bidder { id: b.id, dist, cost: b.cost.map(T::lit) })
            })
            .collect::<Result<Vec<_>>>()?;
        Instance::new(bidders, self.capacity)
    }

    pub fn from_instance<T: Scalar>(instance: &Instance<T>) -> Self {
        let bidders = instance
            .bidders()
            .iter()
            .map(|b| BidderRecord {
                id: b.id.clone(),
                support: b.dist.atoms().map(|(v, p)| (v.as_f64(), p.as_f64())).collect(),
                cost: b.cost.map(Scalar::as_f64),
            })
            .collect();
        let capacity = match instance.constraint() {
            Constraint::Capacity(m) => Some(m),
            _ => None,
        };
        Self { bidders, capacity }
    }
}

/// Parses an instance; syntax errors carry line and column.
pub fn parse_instance<T: Scalar>(json: &str) -> Result<Instance<T>> {
    let file: InstanceFile = serde_json::from_str(json)?;
    file.into_instance()
}

pub fn instance_to_json<T: Scalar>(instance: &Instance<T>) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_instance(instance)).expect("instance serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_capacity_instance() {
        let inst: Instance<f64> = parse_instance(
            r#"{"bidders":[{"id":"a","support":[[1,0.5],[2,0.5]]},{"id":"b","support":[[3,1]]}],"capacity":1}"#,
        )
        .unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.capacity().unwrap(), 1);
        assert_eq!(inst.dist(0).support(), &[1.0, 2.0]);
    }

    #[test]
    fn parses_cost_instance() {
        let inst: Instance<f64> = parse_instance(r#"{"bidders":[{"id":"a","support":[[1,1]],"cost":0.25}]}"#).unwrap();
        assert_eq!(inst.costs().unwrap(), vec![0.25]);
    }

    #[test]
    fn reports_location_of_syntax_errors() {
        let err = parse_instance::<f64>("{\n  \"bidders\": [ {\"id\": 3} ]\n}").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rejects_unknown_fields_and_mixed_constraints() {
        assert!(parse_instance::<f64>(r#"{"bidders":[],"capacty":1}"#).is_err());
        let mixed = r#"{"bidders":[{"id":"a","support":[[1,1]],"cost":1}],"capacity":1}"#;
        assert!(parse_instance::<f64>(mixed).is_err());
    }

    #[test]
    fn round_trip() {
        let src = r#"{"bidders":[{"id":"x","support":[[0.1,0.3],[0.7,0.7]],"cost":0.05}]}"#;
        let inst: Instance<f64> = parse_instance(src).unwrap();
        let again: Instance<f64> = parse_instance(&instance_to_json(&inst)).unwrap();
        assert_eq!(inst, again);
    }
}
