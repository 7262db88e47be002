//! Core series types, differencing, sparsity and symbolization.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Default null-density threshold for [`sparsity`].
pub const DEFAULT_SPARSITY_DELTA: f64 = 0.25;

/// One component of a multi-dimensional series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    label: String,
    values: Vec<f64>,
}

impl Series {
    /// Builds a series, rejecting empty input and non-finite values.
    pub fn new(label: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        let label = label.into();
        if values.is_empty() {
            return Err(Error::InvalidSeries(format!("component `{label}` is empty")));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!(
                "component `{label}` has a non-finite value at index {i}"
            )));
        }
        Ok(Series { label, values })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `N >= 2` aligned components describing one entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiSeries {
    entity_id: String,
    components: Vec<Series>,
}

impl MultiSeries {
    pub fn new(entity_id: impl Into<String>, components: Vec<Series>) -> Result<Self> {
        let entity_id = entity_id.into();
        if components.len() < 2 {
            return Err(Error::InvalidSeries(format!(
                "entity `{entity_id}` has {} component(s), at least 2 are required",
                components.len()
            )));
        }
        let t = components[0].len();
        if let Some(c) = components.iter().find(|c| c.len() != t) {
            return Err(Error::InvalidSeries(format!(
                "entity `{entity_id}`: component `{}` has length {} but `{}` has length {t}",
                c.label(),
                c.len(),
                components[0].label()
            )));
        }
        Ok(MultiSeries { entity_id, components })
    }

    pub fn entity_id(&self) -> &str {
        &self.entity_id
    }

    pub fn components(&self) -> &[Series] {
        &self.components
    }

    /// Number of components `N`.
    pub fn dimension(&self) -> usize {
        self.components.len()
    }

    /// Common length `t` of the components.
    pub fn len(&self) -> usize {
        self.components[0].len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn labels(&self) -> Vec<String> {
        self.components.iter().map(|c| c.label.clone()).collect()
    }

    /// Sum of every raw measurement across components and time.
    pub fn grand_total(&self) -> f64 {
        self.components.iter().flat_map(|c| c.values.iter()).sum()
    }

    /// Time slice `[start, end)` of every component, keeping the entity id.
    pub fn slice(&self, start: usize, end: usize) -> Result<MultiSeries> {
        if start >= end || end > self.len() {
            return Err(Error::InvalidSeries(format!(
                "slice {start}..{end} out of range for length {}",
                self.len()
            )));
        }
        let components = self
            .components
            .iter()
            .map(|c| Series { label: c.label.clone(), values: c.values[start..end].to_vec() })
            .collect();
        Ok(MultiSeries { entity_id: self.entity_id.clone(), components })
    }

    /// Same components under a different entity id.
    pub fn with_entity_id(&self, entity_id: impl Into<String>) -> MultiSeries {
        MultiSeries { entity_id: entity_id.into(), components: self.components.clone() }
    }

    /// Returns a copy with every value mapped through `f`.
    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Result<MultiSeries> {
        let components = self
            .components
            .iter()
            .map(|c| Series::new(c.label.clone(), c.values.iter().map(|&v| f(v)).collect()))
            .collect::<Result<Vec<_>>>()?;
        MultiSeries::new(self.entity_id.clone(), components)
    }
}

/// Alphabet `{1, ..., L}` with `2 <= L <= 255`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Alphabet(u8);

impl Alphabet {
    pub fn new(size: usize) -> Result<Self> {
        if !(2..=255).contains(&size) {
            return Err(Error::InvalidConfig(format!(
                "alphabet size must be in [2, 255], got {size}"
            )));
        }
        Ok(Alphabet(size as u8))
    }

    pub fn size(self) -> usize {
        self.0 as usize
    }

    /// Bits needed to write one symbol, `ceil(log2 L)`.
    pub fn symbol_bits(self) -> u32 {
        ceil_log2(self.size() as u64)
    }
}

impl TryFrom<usize> for Alphabet {
    type Error = Error;

    fn try_from(size: usize) -> Result<Self> {
        Alphabet::new(size)
    }
}

impl From<Alphabet> for usize {
    fn from(a: Alphabet) -> usize {
        a.size()
    }
}

/// `ceil(log2 n)` for `n >= 1`, with `ceil(log2 1) = 0`.
pub(crate) fn ceil_log2(n: u64) -> u32 {
    debug_assert!(n >= 1);
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Symbolic translation of a series over a fixed alphabet. Symbols are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SymbolicSeries {
    symbols: Vec<u8>,
    alphabet: Alphabet,
}

impl SymbolicSeries {
    pub fn new(symbols: Vec<u8>, alphabet: Alphabet) -> Result<Self> {
        let l = alphabet.size();
        if let Some(i) = symbols.iter().position(|&s| s == 0 || s as usize > l) {
            return Err(Error::InvalidSeries(format!(
                "symbol {} at index {i} outside [1, {l}]",
                symbols[i]
            )));
        }
        Ok(SymbolicSeries { symbols, alphabet })
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Contiguous sub-sequence `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> SymbolicSeries {
        SymbolicSeries { symbols: self.symbols[start..start + len].to_vec(), alphabet: self.alphabet }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityProfile {
    pub null_count: usize,
    pub length: usize,
    pub threshold_delta: f64,
    pub is_sparse: bool,
}

/// First differences `d_j = y_{j+1} - y_j`.
pub fn difference(series: &Series) -> Result<Series> {
    if series.len() < 2 {
        return Err(Error::CannotDifference(series.len()));
    }
    let values = difference_values(&series.values);
    Ok(Series { label: series.label.clone(), values })
}

pub(crate) fn difference_values(values: &[f64]) -> Vec<f64> {
    values.windows(2).map(|w| w[1] - w[0]).collect()
}

/// Counts exact zeros; the series is sparse when `zeros >= length * delta`.
pub fn sparsity(series: &Series, delta: f64) -> Result<SparsityProfile> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(Error::InvalidConfig(format!("sparsity delta must be in [0, 1], got {delta}")));
    }
    let null_count = series.values.iter().filter(|&&v| v == 0.0).count();
    let length = series.len();
    Ok(SparsityProfile {
        null_count,
        length,
        threshold_delta: delta,
        is_sparse: null_count as f64 >= length as f64 * delta,
    })
}

/// Uniform partition of `[min, max]` into `L` bins, right-open except the last.
/// A constant series maps entirely to symbol 1.
pub fn symbolize(series: &Series, alphabet: Alphabet) -> SymbolicSeries {
    symbolize_values(&series.values, alphabet)
}

pub(crate) fn symbolize_values(values: &[f64], alphabet: Alphabet) -> SymbolicSeries {
    let (min, max) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let l = alphabet.size();
    let range = max - min;
    let symbols = if !(range > 0.0) {
        vec![1u8; values.len()]
    } else {
        values
            .iter()
            .map(|&v| {
                // Position in [0, L]; only the maximum reaches L.
                let pos = (v - min) / range * l as f64;
                let bin = (pos.floor() as usize).min(l - 1);
                (bin + 1) as u8
            })
            .collect()
    };
    SymbolicSeries { symbols, alphabet }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(values: &[f64]) -> Series {
        Series::new("x", values.to_vec()).unwrap()
    }

    #[test]
    fn difference_examples() {
        assert_eq!(difference(&series(&[1.0, 3.0, 2.0])).unwrap().values(), &[2.0, -1.0]);
        assert_eq!(difference(&series(&[5.0; 4])).unwrap().values(), &[0.0, 0.0, 0.0]);
        assert_eq!(
            difference(&series(&[0.0, 1.0, 0.0, 2.0, 0.0])).unwrap().values(),
            &[1.0, -1.0, 2.0, -2.0]
        );
        assert_eq!(difference(&series(&[4.0])), Err(Error::CannotDifference(1)));
    }

    #[test]
    fn sparsity_examples() {
        let s = series(&[0.0, 1.0, 2.0, 0.0, 3.0, 4.0, 5.0, 6.0]);
        let p = sparsity(&s, 0.25).unwrap();
        assert_eq!(p.null_count, 2);
        assert!(p.is_sparse);

        assert!(!sparsity(&series(&[1.0, 2.0, 3.0]), 0.25).unwrap().is_sparse);
        assert!(sparsity(&series(&[1.0, 2.0, 3.0]), 0.0).unwrap().is_sparse);
        assert!(matches!(sparsity(&s, 1.5), Err(Error::InvalidConfig(_))));
        assert!(matches!(sparsity(&s, -0.1), Err(Error::InvalidConfig(_))));
    }

    #[test]
    fn symbolize_examples() {
        let l4 = Alphabet::new(4).unwrap();
        assert_eq!(symbolize(&series(&[0.0, 1.0, 2.0, 3.0]), l4).symbols(), &[1, 2, 3, 4]);
        for l in 2..10 {
            let a = Alphabet::new(l).unwrap();
            assert_eq!(symbolize(&series(&[7.0, 7.0, 7.0]), a).symbols(), &[1, 1, 1]);
        }
        let x = [0.3, -1.2, 5.5, 2.0, 2.0, 0.0];
        let doubled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        assert_eq!(symbolize(&series(&x), l4), symbolize(&series(&doubled), l4));
    }

    #[test]
    fn rejects_invalid_input() {
        assert!(Series::new("x", vec![]).is_err());
        assert!(Series::new("x", vec![1.0, f64::NAN]).is_err());
        assert!(Series::new("x", vec![f64::INFINITY]).is_err());
        assert!(Alphabet::new(1).is_err());
        assert!(Alphabet::new(256).is_err());
        let a = series(&[1.0, 2.0]);
        let b = series(&[1.0, 2.0, 3.0]);
        assert!(MultiSeries::new("e", vec![a.clone()]).is_err());
        assert!(MultiSeries::new("e", vec![a, b]).is_err());
        assert!(SymbolicSeries::new(vec![0, 1], Alphabet::new(2).unwrap()).is_err());
        assert!(SymbolicSeries::new(vec![3], Alphabet::new(2).unwrap()).is_err());
    }

    #[test]
    fn ceil_log2_values() {
        let expected = [(1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (8, 3), (9, 4), (1024, 10), (1025, 11)];
        for (n, bits) in expected {
            assert_eq!(ceil_log2(n), bits, "n = {n}");
        }
    }

    proptest! {
        #[test]
        fn symbols_in_range_and_extremes_hit(
            values in prop::collection::vec(-1e6f64..1e6, 1..200),
            l in 2usize..12,
        ) {
            let a = Alphabet::new(l).unwrap();
            let s = series(&values);
            let sym = symbolize(&s, a);
            prop_assert_eq!(sym.len(), values.len());
            prop_assert!(sym.symbols().iter().all(|&x| x >= 1 && x as usize <= l));
            let (imin, imax) = values.iter().enumerate().fold((0, 0), |(lo, hi), (i, &v)| {
                (if v < values[lo] { i } else { lo }, if v > values[hi] { i } else { hi })
            });
            if values[imin] < values[imax] {
                prop_assert_eq!(sym.symbols()[imin], 1);
                prop_assert_eq!(sym.symbols()[imax] as usize, l);
            }
        }

        #[test]
        fn difference_then_cumsum_reconstructs(values in prop::collection::vec(-1_000_000i64..1_000_000, 2..100)) {
            // Integer-valued measurements keep every partial sum exact in f64.
            let ys: Vec<f64> = values.iter().map(|&v| v as f64).collect();
            let d = difference(&series(&ys)).unwrap();
            let mut acc = ys[0];
            let mut rebuilt = vec![acc];
            for &di in d.values() {
                acc += di;
                rebuilt.push(acc);
            }
            prop_assert_eq!(rebuilt, ys);
        }

        #[test]
        fn sparsity_matches_definition(
            values in prop::collection::vec(prop_oneof![Just(0.0), -5.0f64..5.0], 1..100),
            delta in 0.0f64..=1.0,
        ) {
            let p = sparsity(&series(&values), delta).unwrap();
            let zeros = values.iter().filter(|&&v| v == 0.0).count();
            prop_assert_eq!(p.null_count, zeros);
            prop_assert_eq!(p.is_sparse, zeros as f64 >= values.len() as f64 * delta);
        }
    }
}
