//! Rank-frequency word statistics and the diversification marker.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::model::{difference_values, symbolize_values, Alphabet, MultiSeries, SymbolicSeries};
use crate::{Error, Result};

pub const DEFAULT_WORD_LENGTH: usize = 12;
pub const DEFAULT_RARE_THRESHOLD: f64 = 0.01;

/// When two words of length `p` count as the same class.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equivalence {
    /// Literal symbol sequence.
    Exact,
    /// Symbol-count vector `(n_1, ..., n_L)`, order ignored.
    #[default]
    Composition,
}

impl Equivalence {
    pub fn as_str(self) -> &'static str {
        match self {
            Equivalence::Exact => "exact",
            Equivalence::Composition => "composition",
        }
    }
}

impl std::str::FromStr for Equivalence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Equivalence::Exact),
            "composition" => Ok(Equivalence::Composition),
            _ => Err(Error::InvalidConfig(format!("unknown equivalence `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordClass {
    /// Exact mode: the symbols. Composition mode: the count vector.
    pub class_id: Vec<u32>,
    pub count: usize,
    pub frequency: f64,
}

/// Word classes sorted by decreasing frequency; rank `r` is the 1-based position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordCensus {
    pub classes: Vec<WordClass>,
    pub word_length: usize,
    pub equivalence: Equivalence,
    pub total_words: usize,
    pub alphabet_size: usize,
}

impl WordCensus {
    /// Size of the class space: `L^p` or `C(p + L - 1, L - 1)`, saturating.
    pub fn possible_classes(&self) -> u128 {
        match self.equivalence {
            Equivalence::Exact => (self.alphabet_size as u128)
                .checked_pow(self.word_length as u32)
                .unwrap_or(u128::MAX),
            Equivalence::Composition => composition_class_count(self.alphabet_size, self.word_length),
        }
    }

    /// Printable class identifier: letters for exact words (when `L <= 26`),
    /// a parenthesized count tuple for compositions.
    pub fn class_label(&self, class: &WordClass) -> String {
        match self.equivalence {
            Equivalence::Exact if self.alphabet_size <= 26 => {
                class.class_id.iter().map(|&s| (b'a' + (s - 1) as u8) as char).collect()
            }
            Equivalence::Exact => join(&class.class_id, "-"),
            Equivalence::Composition => format!("({})", join(&class.class_id, ",")),
        }
    }
}

fn join(ids: &[u32], sep: &str) -> String {
    ids.iter().map(u32::to_string).collect::<Vec<_>>().join(sep)
}

/// Number of weak compositions of `p` into `l` parts, `C(p + l - 1, l - 1)`.
pub fn composition_class_count(l: usize, p: usize) -> u128 {
    let n = (p + l - 1) as u128;
    let k = (l - 1).min(p) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step.
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

pub fn word_census(s: &SymbolicSeries, p: usize, equivalence: Equivalence) -> Result<WordCensus> {
    census_of(s.symbols(), s.alphabet(), p, equivalence)
}

fn census_of(symbols: &[u8], alphabet: Alphabet, p: usize, equivalence: Equivalence) -> Result<WordCensus> {
    let t = symbols.len();
    if p == 0 {
        return Err(Error::InvalidConfig("word length must be at least 1".into()));
    }
    if p >= t {
        return Err(Error::WordTooLong { word: p, length: t });
    }
    let l = alphabet.size();
    let mut counts: HashMap<Vec<u32>, usize> = HashMap::new();
    match equivalence {
        Equivalence::Exact => {
            for w in symbols.windows(p) {
                *counts.entry(w.iter().map(|&s| s as u32).collect()).or_default() += 1;
            }
        }
        Equivalence::Composition => {
            let mut comp = vec![0u32; l];
            for &s in &symbols[..p] {
                comp[s as usize - 1] += 1;
            }
            *counts.entry(comp.clone()).or_default() += 1;
            for i in p..t {
                comp[symbols[i - p] as usize - 1] -= 1;
                comp[symbols[i] as usize - 1] += 1;
                *counts.entry(comp.clone()).or_default() += 1;
            }
        }
    }
    let total_words = t - p + 1;
    let mut classes: Vec<WordClass> = counts
        .into_iter()
        .map(|(class_id, count)| WordClass { class_id, count, frequency: count as f64 / total_words as f64 })
        .collect();
    classes.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.class_id.cmp(&b.class_id)));
    Ok(WordCensus { classes, word_length: p, equivalence, total_words, alphabet_size: l })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZipfFit {
    /// Slope of `ln f(r)` against `ln r`.
    pub rho: f64,
    pub points_used: usize,
    pub rare_threshold: f64,
    /// Fewer than two non-rare classes; `rho` is reported as 0.
    pub degenerate: bool,
}

/// Least-squares Zipf slope over the classes with frequency `>= rare_threshold`.
pub fn zipf_coefficient(census: &WordCensus, rare_threshold: f64) -> Result<ZipfFit> {
    if !(0.0..=1.0).contains(&rare_threshold) {
        return Err(Error::InvalidConfig(format!("rare threshold must be in [0, 1], got {rare_threshold}")));
    }
    if census.classes.is_empty() {
        return Err(Error::InvalidSeries("empty word census".into()));
    }
    let freqs: Vec<f64> =
        census.classes.iter().map(|c| c.frequency).take_while(|&f| f >= rare_threshold).collect();
    Ok(fit_ranked(&freqs, rare_threshold))
}

/// OLS slope of `ln f` on `ln r` for a non-increasing frequency list.
pub(crate) fn fit_ranked(freqs: &[f64], rare_threshold: f64) -> ZipfFit {
    let n = freqs.len();
    if n < 2 {
        return ZipfFit { rho: 0.0, points_used: n, rare_threshold, degenerate: true };
    }
    // Responses are taken relative to the top frequency so that a flat
    // distribution gives an exactly zero numerator.
    let y0 = freqs[0].ln();
    let xs: Vec<f64> = (1..=n).map(|r| (r as f64).ln()).collect();
    let ys: Vec<f64> = freqs.iter().map(|f| f.ln() - y0).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    ZipfFit { rho: sxy / sxx, points_used: n, rare_threshold, degenerate: false }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiversificationCategory {
    /// `0.8 < D <= 1`.
    HighlyDiversified,
    /// `0 < D <= 0.8`.
    Rich,
    /// `D <= 0`.
    TotallyUnbalanced,
    /// `D > 1`, only reachable when some slope is positive.
    Intermediate,
}

impl DiversificationCategory {
    pub fn of(value: f64) -> Self {
        if value > 1.0 {
            DiversificationCategory::Intermediate
        } else if value > 0.8 {
            DiversificationCategory::HighlyDiversified
        } else if value > 0.0 {
            DiversificationCategory::Rich
        } else {
            DiversificationCategory::TotallyUnbalanced
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DiversificationCategory::HighlyDiversified => "highly_diversified",
            DiversificationCategory::Rich => "rich",
            DiversificationCategory::TotallyUnbalanced => "totally_unbalanced",
            DiversificationCategory::Intermediate => "intermediate",
        }
    }
}

impl fmt::Display for DiversificationCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diversification {
    pub value: f64,
    pub per_component_rho: Vec<f64>,
    pub category: DiversificationCategory,
    /// 1-based components whose Zipf fit was degenerate.
    pub degenerate_components: Vec<usize>,
    /// Number of distinct word classes observed per component.
    pub observed_classes: Vec<usize>,
    /// Size of the class space for the configured `L`, `p` and equivalence.
    pub possible_classes: u128,
}

/// `1 + mean(rho)` and its category.
pub fn diversification_value(rhos: &[f64]) -> (f64, DiversificationCategory) {
    let value = 1.0 + rhos.iter().sum::<f64>() / rhos.len() as f64;
    (value, DiversificationCategory::of(value))
}

/// Word census of one raw component, after optional differencing and symbolization.
pub fn component_census(
    values: &[f64],
    alphabet: Alphabet,
    differencing: bool,
    p: usize,
    equivalence: Equivalence,
) -> Result<WordCensus> {
    let input = if differencing {
        if values.len() < 2 {
            return Err(Error::CannotDifference(values.len()));
        }
        difference_values(values)
    } else {
        values.to_vec()
    };
    census_of(symbolize_values(&input, alphabet).symbols(), alphabet, p, equivalence)
}

pub fn diversification(
    multi: &MultiSeries,
    alphabet: Alphabet,
    differencing: bool,
    p: usize,
    equivalence: Equivalence,
    rare_threshold: f64,
) -> Result<Diversification> {
    let mut per_component_rho = Vec::with_capacity(multi.dimension());
    let mut degenerate_components = Vec::new();
    let mut observed_classes = Vec::with_capacity(multi.dimension());
    let mut possible_classes = 0;
    for (j, c) in multi.components().iter().enumerate() {
        let census = component_census(c.values(), alphabet, differencing, p, equivalence)
            .map_err(|e| e.in_component(c.label()))?;
        let fit = zipf_coefficient(&census, rare_threshold).map_err(|e| e.in_component(c.label()))?;
        if fit.degenerate {
            degenerate_components.push(j + 1);
        }
        per_component_rho.push(fit.rho);
        observed_classes.push(census.classes.len());
        possible_classes = census.possible_classes();
    }
    let (value, category) = diversification_value(&per_component_rho);
    Ok(Diversification { value, per_component_rho, category, degenerate_components, observed_classes, possible_classes })
}
