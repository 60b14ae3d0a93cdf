use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConstructionParams, FactoredInt};
use crate::error::{Error, Result};
use crate::sum::KahanSum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SetKind {
    GalDivisors,
    NearHalf,
    Discretized,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Element {
    pub factors: FactoredInt,
    pub weight: f64,
}

/// A finite weighted set `{(n, f(n))}`: the support and coefficients of a
/// resonator. Elements are kept sorted by size.
#[derive(Debug, Clone)]
pub struct ResonatorSet {
    elements: Vec<Element>,
    index: HashMap<FactoredInt, usize>,
    kind: SetKind,
    params: ConstructionParams,
}

#[derive(Serialize, Deserialize)]
struct SetDocument {
    kind: SetKind,
    params: ConstructionParams,
    elements: Vec<Element>,
}

impl ResonatorSet {
    /// Validates weights (finite, strictly positive) and uniqueness.
    pub fn new(
        mut elements: Vec<Element>,
        kind: SetKind,
        params: ConstructionParams,
    ) -> Result<Self> {
        if let Some(e) = elements.iter().find(|e| !(e.weight.is_finite() && e.weight > 0.0)) {
            return Err(Error::param(format!(
                "weight of {} must be finite and positive, got {}",
                e.factors, e.weight
            )));
        }
        elements.sort_by(|a, b| a.factors.cmp(&b.factors));
        let mut index = HashMap::with_capacity(elements.len());
        for (i, e) in elements.iter().enumerate() {
            if index.insert(e.factors.clone(), i).is_some() {
                return Err(Error::param(format!("duplicate element {}", e.factors)));
            }
        }
        Ok(Self {
            elements,
            index,
            kind,
            params,
        })
    }

    /// Uniform weight 1 on the given elements.
    pub fn unit_weights(
        elements: impl IntoIterator<Item = FactoredInt>,
        kind: SetKind,
        params: ConstructionParams,
    ) -> Result<Self> {
        let elements = elements
            .into_iter()
            .map(|factors| Element { factors, weight: 1.0 })
            .collect();
        Self::new(elements, kind, params)
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn kind(&self) -> SetKind {
        self.kind
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FactoredInt, f64)> {
        self.elements.iter().map(|e| (&e.factors, e.weight))
    }

    pub fn weight(&self, n: &FactoredInt) -> Option<f64> {
        self.index.get(n).map(|&i| self.elements[i].weight)
    }

    pub fn contains(&self, n: &FactoredInt) -> bool {
        self.index.contains_key(n)
    }

    /// `sum f(n)^2`.
    pub fn weight_sq_sum(&self) -> f64 {
        self.elements
            .iter()
            .map(|e| e.weight * e.weight)
            .collect::<KahanSum>()
            .value()
    }

    /// `sum f(n)`.
    pub fn weight_sum(&self) -> f64 {
        self.elements.iter().map(|e| e.weight).collect::<KahanSum>().value()
    }

    pub fn max_log_value(&self) -> f64 {
        self.elements.last().map_or(0.0, |e| e.factors.log_value())
    }

    pub fn min_log_value(&self) -> f64 {
        self.elements.first().map_or(0.0, |e| e.factors.log_value())
    }

    /// Every divisor of every member is a member.
    pub fn is_divisor_closed(&self) -> bool {
        self.elements.iter().all(|e| {
            e.factors
                .maximal_proper_divisors()
                .iter()
                .all(|d| self.contains(d))
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = SetDocument {
            kind: self.kind,
            params: self.params.clone(),
            elements: self.elements.clone(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let doc: SetDocument = serde_json::from_str(s)?;
        Self::new(doc.elements, doc.kind, doc.params)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn params() -> ConstructionParams {
        ConstructionParams::near_half(1e6, 0.6)
    }

    #[test]
    fn rejects_nonpositive_weights() {
        let els = vec![Element { factors: FactoredInt::one(), weight: 0.0 }];
        assert!(ResonatorSet::new(els, SetKind::NearHalf, params()).is_err());
    }

    #[test]
    fn rejects_duplicates() {
        let els = vec![
            Element { factors: FactoredInt::prime(3), weight: 1.0 },
            Element { factors: FactoredInt::prime(3), weight: 2.0 },
        ];
        assert!(ResonatorSet::new(els, SetKind::NearHalf, params()).is_err());
    }

    #[test]
    fn divisor_closure() {
        let s = ResonatorSet::unit_weights(
            [1u64, 2, 3, 6].map(|n| FactoredInt::from_u64(n).unwrap()),
            SetKind::GalDivisors,
            params(),
        )
        .unwrap();
        assert!(s.is_divisor_closed());
        let s = ResonatorSet::unit_weights(
            [1u64, 6].map(|n| FactoredInt::from_u64(n).unwrap()),
            SetKind::GalDivisors,
            params(),
        )
        .unwrap();
        assert!(!s.is_divisor_closed());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_lossless(
            raw in proptest::collection::btree_map(1u64..100_000, 1e-300f64..1e300, 1..40)
        ) {
            let els: Vec<Element> = raw
                .iter()
                .map(|(&n, &w)| Element { factors: FactoredInt::from_u64(n).unwrap(), weight: w })
                .collect();
            let s = ResonatorSet::new(els, SetKind::Discretized, params()).unwrap();
            let back = ResonatorSet::from_json(&s.to_json().unwrap()).unwrap();
            prop_assert_eq!(back.len(), s.len());
            prop_assert_eq!(back.params(), s.params());
            for (a, b) in s.elements().iter().zip(back.elements()) {
                prop_assert_eq!(&a.factors, &b.factors);
                prop_assert!(((a.weight - b.weight) / a.weight).abs() <= 1e-15);
            }
        }
    }
}
