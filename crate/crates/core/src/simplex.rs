//! Simplex projection of entropy vectors and the leading-component marker.
//!
//! `H = (h_1, ..., h_N)` is normalized by its l1 norm and the last coordinate
//! dropped, which places it in the standard simplex with vertex `V_N` at the
//! origin and `V_i` at the `i`-th unit vector. The influence area of `V_d`
//! (bounded by hyperplanes through the centroid and `N - 2` other vertices)
//! is exactly where the `d`-th barycentric coordinate is the largest, so the
//! leading component is an argmax with lowest-index tie-break.

use serde::{Deserialize, Serialize};

use crate::entropy::{norm_l1, EntropyVector};
use crate::{Error, Execution, Result};

/// Slack allowed on the simplex boundary when checking membership.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

/// A point of the `(N-1)`-dimensional standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexPoint {
    coords: Vec<f64>,
}

impl SimplexPoint {
    /// Wraps raw coordinates. Fails when the point lies outside the simplex.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let p = SimplexPoint { coords };
        if !p.is_inside() {
            return Err(Error::InvalidSeries(format!("{:?} is not a simplex point", p.coords)));
        }
        Ok(p)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Number of components `N`.
    pub fn dimension(&self) -> usize {
        self.coords.len() + 1
    }

    /// All `N` barycentric coordinates; the last one is `1 - sum(coords)`.
    pub fn barycentric(&self) -> Vec<f64> {
        let mut b = self.coords.clone();
        b.push(1.0 - self.coords.iter().sum::<f64>());
        b
    }

    pub fn is_inside(&self) -> bool {
        self.coords.iter().all(|&c| c >= -MEMBERSHIP_SLACK)
            && self.coords.iter().sum::<f64>() <= 1.0 + MEMBERSHIP_SLACK
    }
}

/// Leading component (1-based) and the barycentric coordinates behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceVerdict {
    pub leading: usize,
    pub barycentric: Vec<f64>,
}

fn normalized(values: &[f64]) -> Result<Vec<f64>> {
    let l1 = norm_l1(values);
    if !(l1 > 0.0) {
        return Err(Error::NullEntropyVector);
    }
    Ok(values.iter().map(|h| h / l1).collect())
}

pub fn project(v: &EntropyVector) -> Result<SimplexPoint> {
    project_values(v.values())
}

pub(crate) fn project_values(values: &[f64]) -> Result<SimplexPoint> {
    let mut coords = normalized(values)?;
    coords.pop();
    Ok(SimplexPoint { coords })
}

/// Index of the largest value, 1-based, lowest index on ties.
pub fn leading_component(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best + 1
}

pub fn influence(v: &EntropyVector) -> Result<InfluenceVerdict> {
    influence_values(v.values())
}

pub(crate) fn influence_values(values: &[f64]) -> Result<InfluenceVerdict> {
    let barycentric = normalized(values)?;
    Ok(InfluenceVerdict { leading: leading_component(&barycentric), barycentric })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEntry {
    pub entity_id: String,
    pub point: SimplexPoint,
    pub verdict: InfluenceVerdict,
}

/// Projects and classifies every vector of a collection, preserving order.
pub fn influence_map(collection: &[EntropyVector], exec: Execution) -> Result<Vec<InfluenceEntry>> {
    let Some(first) = collection.first() else {
        return Ok(Vec::new());
    };
    let n = first.dimension();
    if let Some(v) = collection.iter().find(|v| v.dimension() != n) {
        return Err(Error::DimensionMismatch { expected: n, found: v.dimension() }.in_entity(v.entity_id()));
    }
    exec.map(collection, |v| {
        Ok(InfluenceEntry {
            entity_id: v.entity_id().to_owned(),
            point: project(v).map_err(|e| e.in_entity(v.entity_id()))?,
            verdict: influence(v).map_err(|e| e.in_entity(v.entity_id()))?,
        })
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hv(values: &[f64]) -> EntropyVector {
        EntropyVector::new("e", values.to_vec()).unwrap()
    }

    #[test]
    fn projection_examples() {
        let g = project(&hv(&[1.0, 1.0, 1.0])).unwrap();
        assert_eq!(g.coords(), &[1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(project(&hv(&[1.0, 0.0, 0.0])).unwrap().coords(), &[1.0, 0.0]);
        assert_eq!(project(&hv(&[0.0, 0.0, 1.0])).unwrap().coords(), &[0.0, 0.0]);
        assert_eq!(project(&hv(&[0.0, 0.0, 0.0])), Err(Error::NullEntropyVector));
    }

    #[test]
    fn influence_examples() {
        assert_eq!(influence(&hv(&[0.9, 0.1, 0.2])).unwrap().leading, 1);
        assert_eq!(influence(&hv(&[0.5, 0.5, 0.5])).unwrap().leading, 1);
        assert_eq!(influence(&hv(&[0.1, 0.5, 0.5])).unwrap().leading, 2);
        assert_eq!(influence(&hv(&[0.1, 0.2, 0.3, 0.4])).unwrap().leading, 4);
        assert!(influence(&hv(&[0.0, 0.0])).is_err());
    }

    #[test]
    fn influence_map_cases() {
        assert!(influence_map(&[], Execution::Sequential).unwrap().is_empty());
        let v = hv(&[0.2, 0.7, 0.1]);
        let single = influence_map(std::slice::from_ref(&v), Execution::Parallel).unwrap();
        assert_eq!(single.len(), 1);
        assert_eq!(single[0].point, project(&v).unwrap());
        assert_eq!(single[0].verdict, influence(&v).unwrap());
        let mixed = [hv(&[0.1, 0.2]), hv(&[0.1, 0.2, 0.3])];
        assert!(matches!(
            influence_map(&mixed, Execution::Sequential),
            Err(Error::Entity { .. })
        ));
    }

    proptest! {
        #[test]
        fn projection_lies_in_simplex(values in prop::collection::vec(0.0f64..=1.0, 2..8)) {
            prop_assume!(values.iter().sum::<f64>() > 0.0);
            let v = hv(&values);
            let p = project(&v).unwrap();
            prop_assert!(p.is_inside());
            prop_assert_eq!(p.dimension(), values.len());
            let l1: f64 = values.iter().sum();
            let verdict = influence(&v).unwrap();
            for (b, h) in verdict.barycentric.iter().zip(&values) {
                prop_assert_eq!(*b, h / l1);
            }
        }

        #[test]
        fn influence_is_scale_invariant(values in prop::collection::vec(0.01f64..=1.0, 2..8), c in 0.01f64..1.0) {
            let scaled: Vec<f64> = values.iter().map(|h| h * c).collect();
            prop_assert_eq!(influence(&hv(&values)).unwrap().leading, influence(&hv(&scaled)).unwrap().leading);
        }
    }
}
