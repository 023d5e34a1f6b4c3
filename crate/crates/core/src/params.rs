//! Named model parameters.
//!
//! Most parameters are scalars. Time-dependent rates (the South-Korea model's
//! `b(t)`, `mu(t)`, `k(t)`, `s(t)`, `r(t)`) are piecewise-linear tables that
//! hold their end values outside the tabulated range.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-linear function of time given by `(t, value)` knots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TableRepr", into = "TableRepr")]
pub struct Table {
    knots: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableRepr {
    table: Vec<(f64, f64)>,
}

impl TryFrom<TableRepr> for Table {
    type Error = Error;

    fn try_from(r: TableRepr) -> Result<Self> {
        Table::new(r.table)
    }
}

impl From<Table> for TableRepr {
    fn from(t: Table) -> Self {
        TableRepr { table: t.knots }
    }
}

impl Table {
    pub fn new(knots: Vec<(f64, f64)>) -> Result<Self> {
        if knots.is_empty() {
            return Err(Error::Argument("table needs at least one knot".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(Error::Argument("table knots must be finite".into()));
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::Argument(
                "table times must be strictly increasing".into(),
            ));
        }
        Ok(Self { knots })
    }

    pub fn knots(&self) -> &[(f64, f64)] {
        &self.knots
    }

    pub fn eval(&self, t: f64) -> f64 {
        let k = &self.knots;
        if t <= k[0].0 {
            return k[0].1;
        }
        let last = k[k.len() - 1];
        if t >= last.0 {
            return last.1;
        }
        let j = k.partition_point(|&(tk, _)| tk <= t);
        let (t0, v0) = k[j - 1];
        let (t1, v1) = k[j];
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    pub fn min(&self) -> f64 {
        self.knots.iter().map(|k| k.1).fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.knots
            .iter()
            .map(|k| k.1)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Constant(f64),
    Table(Table),
}

impl ParamValue {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            ParamValue::Constant(v) => *v,
            ParamValue::Table(tab) => tab.eval(t),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            ParamValue::Constant(v) => Some(*v),
            ParamValue::Table(_) => None,
        }
    }

    /// Smallest and largest value the parameter takes.
    pub fn range(&self) -> (f64, f64) {
        match self {
            ParamValue::Constant(v) => (*v, *v),
            ParamValue::Table(tab) => (tab.min(), tab.max()),
        }
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Constant(v)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParameterSet {
    values: BTreeMap<String, ParamValue>,
}

impl ParameterSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, f64)>) -> Self {
        let mut p = Self::new();
        for (k, v) in pairs {
            p.set(k, v);
        }
        p
    }

    pub fn set(&mut self, name: &str, value: impl Into<ParamValue>) -> &mut Self {
        self.values.insert(name.to_string(), value.into());
        self
    }

    pub fn with(mut self, name: &str, value: impl Into<ParamValue>) -> Self {
        self.set(name, value);
        self
    }

    pub fn remove(&mut self, name: &str) -> Option<ParamValue> {
        self.values.remove(name)
    }

    pub fn get(&self, name: &str) -> Option<&ParamValue> {
        self.values.get(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.values.contains_key(name)
    }

    /// Scalar value of `name`; fails if absent or time-dependent.
    pub fn constant(&self, name: &str) -> Result<f64> {
        match self.values.get(name) {
            Some(ParamValue::Constant(v)) => Ok(*v),
            Some(ParamValue::Table(_)) => Err(Error::Argument(format!(
                "parameter `{name}` must be a constant"
            ))),
            None => Err(Error::Argument(format!("missing parameter `{name}`"))),
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &ParamValue)> {
        self.values.iter().map(|(k, v)| (k.as_str(), v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_interpolates_and_clamps() {
        let t = Table::new(vec![(0.0, 1.0), (2.0, 3.0), (4.0, 3.0)]).unwrap();
        assert_eq!(t.eval(-1.0), 1.0);
        assert_eq!(t.eval(0.0), 1.0);
        assert_eq!(t.eval(1.0), 2.0);
        assert_eq!(t.eval(2.0), 3.0);
        assert_eq!(t.eval(10.0), 3.0);
    }

    #[test]
    fn table_rejects_unsorted() {
        assert!(Table::new(vec![(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(Table::new(vec![]).is_err());
    }

    #[test]
    fn json_forms() {
        let p: ParameterSet =
            serde_json::from_str(r#"{"mu": 0.02, "k": {"table": [[0, 0.1], [10, 0.3]]}}"#).unwrap();
        assert_eq!(p.constant("mu").unwrap(), 0.02);
        assert!((p.get("k").unwrap().eval(5.0) - 0.2).abs() < 1e-15);
        assert!(p.constant("k").is_err());
        let back = serde_json::to_string(&p).unwrap();
        let again: ParameterSet = serde_json::from_str(&back).unwrap();
        assert_eq!(p, again);
    }
}
