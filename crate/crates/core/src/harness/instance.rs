//! JSON instance files.
//!
//! Common fields: `k`, `n`, `elements` (`[{"name", "weight"}]`, element ids
//! follow list order), optional `declared_monotone`, and a `kind` selecting
//! the payload:
//!
//! * `coverage`: `universe_weights: [f64]`, `covers: [[[item]]]` indexed
//!   `[element][position - 1]`.
//! * `separable`: `positions: [{"universe_weights", "covers"}]`, one entry per
//!   position, `covers` indexed by element.
//! * `tabular`: `entries: [{"positions": [u8; n], "value"}]`, one entry per
//!   k-set, keyed by its position vector (`0` = unassigned).

use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kset::{ElementId, KSetSpace, WeightTable};
use crate::oracle::{
    CoverageOracle, PositionCoverage, SeparableOracle, TabularOracle, UtilityOracle, TABLE_BUDGET,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementSpec {
    pub name: String,
    pub weight: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PositionSpec {
    pub universe_weights: Vec<f64>,
    pub covers: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub positions: Vec<u8>,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Coverage {
        universe_weights: Vec<f64>,
        covers: Vec<Vec<Vec<usize>>>,
    },
    Separable {
        positions: Vec<PositionSpec>,
    },
    Tabular {
        entries: Vec<TableEntry>,
    },
}

impl Payload {
    pub fn kind(&self) -> &'static str {
        match self {
            Payload::Coverage { .. } => "coverage",
            Payload::Separable { .. } => "separable",
            Payload::Tabular { .. } => "tabular",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub k: usize,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub declared_monotone: Option<bool>,
    pub elements: Vec<ElementSpec>,
    #[serde(flatten)]
    pub payload: Payload,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<InstanceFile> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("instance files always serialize");
        s.push('\n');
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    /// Validates the file and builds its oracle.
    pub fn build(&self) -> Result<Instance> {
        if self.k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        if self.elements.len() != self.n {
            return Err(Error::validation(format!(
                "n = {} but {} elements are listed",
                self.n,
                self.elements.len()
            )));
        }
        let mut names = HashSet::new();
        for (idx, e) in self.elements.iter().enumerate() {
            if !names.insert(e.name.as_str()) {
                return Err(Error::validation(format!(
                    "element #{idx} reuses the name {:?}",
                    e.name
                )));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::validation(format!(
                    "element #{idx} ({:?}) has weight {}; weights must be strictly positive",
                    e.name, e.weight
                )));
            }
        }
        let weights = WeightTable::new(self.elements.iter().map(|e| e.weight).collect())?;
        let oracle: Box<dyn UtilityOracle + Send> = match &self.payload {
            Payload::Coverage {
                universe_weights,
                covers,
            } => {
                if covers.len() != self.n {
                    return Err(Error::validation(format!(
                        "coverage payload lists {} elements, expected {}",
                        covers.len(),
                        self.n
                    )));
                }
                Box::new(CoverageOracle::new(
                    self.k,
                    universe_weights.clone(),
                    covers.clone(),
                )?)
            }
            Payload::Separable { positions } => {
                if positions.len() != self.k {
                    return Err(Error::validation(format!(
                        "separable payload has {} positions, expected k = {}",
                        positions.len(),
                        self.k
                    )));
                }
                let parts = positions
                    .iter()
                    .enumerate()
                    .map(|(i, p)| {
                        if p.covers.len() != self.n {
                            return Err(Error::validation(format!(
                                "position {} lists {} elements, expected {}",
                                i + 1,
                                p.covers.len(),
                                self.n
                            )));
                        }
                        PositionCoverage::new(p.universe_weights.clone(), p.covers.clone())
                    })
                    .collect::<Result<Vec<_>>>()?;
                Box::new(SeparableOracle::new(parts)?)
            }
            Payload::Tabular { entries } => Box::new(self.table(entries)?),
        };
        Ok(Instance {
            kind: self.payload.kind(),
            names: self.elements.iter().map(|e| e.name.clone()).collect(),
            weights,
            oracle,
            declared_monotone: self.declared_monotone,
        })
    }

    fn table(&self, entries: &[TableEntry]) -> Result<TabularOracle> {
        let space = KSetSpace::new(self.n, self.k, TABLE_BUDGET)?;
        let mut values = vec![None; space.count()];
        for (idx, entry) in entries.iter().enumerate() {
            if entry.positions.len() != self.n
                || entry.positions.iter().any(|&p| p as usize > self.k)
            {
                return Err(Error::validation(format!(
                    "table entry #{idx} has position vector {:?}, expected {} values in 0..={}",
                    entry.positions, self.n, self.k
                )));
            }
            let slot = &mut values[space.encode(&entry.positions)];
            if slot.is_some() {
                return Err(Error::validation(format!(
                    "table entry #{idx} repeats position vector {:?}",
                    entry.positions
                )));
            }
            *slot = Some(entry.value);
        }
        if values[0].is_none() {
            return Err(Error::validation("table has no entry for the empty k-set"));
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(idx, v)| {
                v.ok_or_else(|| {
                    Error::validation(format!(
                        "table has no entry for position vector {:?}",
                        space.decode(idx)
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        TabularOracle::new(self.n, self.k, values)
    }
}

/// A validated instance: element names, weights, and the utility oracle.
pub struct Instance {
    pub kind: &'static str,
    pub names: Vec<String>,
    pub weights: WeightTable,
    pub oracle: Box<dyn UtilityOracle + Send>,
    pub declared_monotone: Option<bool>,
}

impl Instance {
    pub fn ground_size(&self) -> usize {
        self.names.len()
    }

    pub fn arity(&self) -> usize {
        self.oracle.arity()
    }

    pub fn name(&self, x: ElementId) -> &str {
        &self.names[x.index()]
    }

    pub fn lookup(&self) -> HashMap<&str, ElementId> {
        self.names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), ElementId::from(i)))
            .collect()
    }
}

impl std::fmt::Debug for Instance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Instance")
            .field("kind", &self.kind)
            .field("n", &self.ground_size())
            .field("k", &self.arity())
            .finish()
    }
}

/// Reads, parses, and validates an instance file.
pub fn parse_instance(path: impl AsRef<Path>) -> Result<Instance> {
    let text = fs::read_to_string(path)?;
    InstanceFile::from_json(&text)?.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kset::{KSet, Position};
    use crate::oracle::eval;

    const I0: &str = r#"{
        "kind": "coverage",
        "k": 2,
        "n": 2,
        "declared_monotone": true,
        "elements": [{"name": "a", "weight": 1.0}, {"name": "b", "weight": 2.0}],
        "universe_weights": [1.0, 1.0, 1.0],
        "covers": [[[0, 1], [0]], [[2], [1, 2]]]
    }"#;

    #[test]
    fn parses_coverage_i0() {
        let inst = InstanceFile::from_json(I0).unwrap().build().unwrap();
        assert_eq!(inst.kind, "coverage");
        assert_eq!(inst.declared_monotone, Some(true));
        let a1 = KSet::from_pairs(2, [(ElementId(0), Position::FIRST)]).unwrap();
        assert_eq!(eval(&inst.oracle, &a1).unwrap(), 2.0);
        assert_eq!(inst.weights.as_slice(), [1.0, 2.0]);
        assert_eq!(inst.lookup()["b"], ElementId(1));
    }

    #[test]
    fn zero_weight_is_a_validation_error() {
        let text = I0.replace("\"weight\": 2.0", "\"weight\": 0");
        let err = InstanceFile::from_json(&text).unwrap().build().unwrap_err();
        assert!(
            matches!(err, Error::Validation(ref m) if m.contains("#1")),
            "{err}"
        );
    }

    #[test]
    fn duplicate_names_are_rejected() {
        let text = I0.replace("\"name\": \"b\"", "\"name\": \"a\"");
        assert!(matches!(
            InstanceFile::from_json(&text).unwrap().build().unwrap_err(),
            Error::Validation(_)
        ));
    }

    #[test]
    fn syntax_errors_carry_location() {
        let err = InstanceFile::from_json("{\n  \"k\": 2,\n  oops\n}").unwrap_err();
        match err {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    fn tabular(entries: &str) -> String {
        format!(
            r#"{{"kind": "tabular", "k": 1, "n": 1,
                "elements": [{{"name": "x", "weight": 1.0}}],
                "entries": {entries}}}"#
        )
    }

    #[test]
    fn tabular_validation() {
        let ok = tabular(r#"[{"positions": [0], "value": 0.0}, {"positions": [1], "value": 2.0}]"#);
        let inst = InstanceFile::from_json(&ok).unwrap().build().unwrap();
        assert_eq!(inst.kind, "tabular");

        let missing_zero = tabular(r#"[{"positions": [1], "value": 2.0}]"#);
        assert!(matches!(
            InstanceFile::from_json(&missing_zero)
                .unwrap()
                .build()
                .unwrap_err(),
            Error::Validation(_)
        ));
        let nonzero =
            tabular(r#"[{"positions": [0], "value": 1.0}, {"positions": [1], "value": 2.0}]"#);
        assert!(matches!(
            InstanceFile::from_json(&nonzero)
                .unwrap()
                .build()
                .unwrap_err(),
            Error::Validation(_)
        ));
        let incomplete = tabular(r#"[{"positions": [0], "value": 0.0}]"#);
        assert!(InstanceFile::from_json(&incomplete)
            .unwrap()
            .build()
            .is_err());
        let dup = tabular(
            r#"[{"positions": [0], "value": 0.0}, {"positions": [0], "value": 0.0}, {"positions": [1], "value": 2.0}]"#,
        );
        assert!(InstanceFile::from_json(&dup).unwrap().build().is_err());
    }

    #[test]
    fn separable_round_trip() {
        let file = InstanceFile {
            k: 2,
            n: 1,
            declared_monotone: Some(true),
            elements: vec![ElementSpec {
                name: "x".into(),
                weight: 1.5,
            }],
            payload: Payload::Separable {
                positions: vec![
                    PositionSpec {
                        universe_weights: vec![1.0],
                        covers: vec![vec![0]],
                    },
                    PositionSpec {
                        universe_weights: vec![2.0, 2.0],
                        covers: vec![vec![0, 1]],
                    },
                ],
            },
        };
        let back = InstanceFile::from_json(&file.to_json()).unwrap();
        assert_eq!(back, file);
        let inst = back.build().unwrap();
        let s = KSet::from_pairs(2, [(ElementId(0), Position::new(2).unwrap())]).unwrap();
        assert_eq!(eval(&inst.oracle, &s).unwrap(), 4.0);
    }
}
