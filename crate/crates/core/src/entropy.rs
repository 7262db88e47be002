//! Compression-based entropy of symbolic sequences.
//!
//! The compressor is a dictionary-incremental (LZ78-style) parse: every new
//! phrase is the longest previously parsed phrase extended by one symbol. A
//! phrase is written as `(prefix index, extension symbol)`; the `k`-th phrase
//! costs `ceil(log2 k)` bits for the index plus `ceil(log2 L)` bits for the
//! symbol. A trailing phrase that merely repeats an existing one pays the same
//! cost. Entropy is the total bit cost divided by `t * log2 L`, clamped to 1.

use serde::{Deserialize, Serialize};

use crate::model::{ceil_log2, difference_values, symbolize_values, Alphabet, MultiSeries, SymbolicSeries};
use crate::{Error, Result};

/// Identifier of the parsing rule and cost model; echoed in every report.
/// Entropies are comparable only between runs that share this rule.
pub const PARSING_RULE: &str = "lz78-incremental/index-ceil-log2-k+symbol-ceil-log2-L";

/// One parsed phrase: an earlier phrase (`0` = empty) extended by a symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Phrase {
    pub prefix: usize,
    pub symbol: u8,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParseResult {
    phrases: Vec<Phrase>,
    partial_tail: bool,
    bit_cost: u64,
    alphabet: Alphabet,
}

impl ParseResult {
    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    pub fn phrase_count(&self) -> usize {
        self.phrases.len()
    }

    /// Information content `I(σ)` in bits.
    pub fn bit_cost(&self) -> u64 {
        self.bit_cost
    }

    /// Whether the last phrase repeats an earlier one instead of adding a new one.
    pub fn partial_tail(&self) -> bool {
        self.partial_tail
    }

    /// Reconstructs the parsed sequence.
    pub fn decode(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let mut buf = Vec::new();
        for phrase in &self.phrases {
            buf.clear();
            buf.push(phrase.symbol);
            let mut p = phrase.prefix;
            while p != 0 {
                let prev = self.phrases[p - 1];
                buf.push(prev.symbol);
                p = prev.prefix;
            }
            out.extend(buf.iter().rev());
        }
        out
    }
}

/// Total cost of `phrase_count` phrases over `alphabet`.
pub fn bit_cost(phrase_count: usize, alphabet: Alphabet) -> u64 {
    let symbol = alphabet.symbol_bits() as u64;
    (1..=phrase_count as u64).map(|k| ceil_log2(k) as u64 + symbol).sum()
}

pub fn lz_parse(sequence: &SymbolicSeries) -> Result<ParseResult> {
    parse_symbols(sequence.symbols(), sequence.alphabet())
}

fn parse_symbols(symbols: &[u8], alphabet: Alphabet) -> Result<ParseResult> {
    if symbols.is_empty() {
        return Err(Error::EmptySequence);
    }
    let l = alphabet.size();
    // Trie over phrases: children[node * l + (symbol - 1)] = child node, 0 = absent.
    // Node 0 is the empty phrase; node k is the k-th phrase.
    let mut children: Vec<u32> = vec![0; l];
    let mut phrases: Vec<Phrase> = Vec::new();
    let mut node = 0usize;
    for &s in symbols {
        let slot = node * l + (s as usize - 1);
        let child = children[slot];
        if child != 0 {
            node = child as usize;
        } else {
            phrases.push(Phrase { prefix: node, symbol: s });
            children[slot] = phrases.len() as u32;
            children.resize(children.len() + l, 0);
            node = 0;
        }
    }
    let partial_tail = node != 0;
    if partial_tail {
        phrases.push(phrases[node - 1]);
    }
    let bit_cost = bit_cost(phrases.len(), alphabet);
    Ok(ParseResult { phrases, partial_tail, bit_cost, alphabet })
}

/// Entropy together with the quantities it was derived from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyEstimate {
    /// `min(1, raw)`.
    pub h: f64,
    /// Unclamped `bit_cost / (t * log2 L)`.
    pub raw: f64,
    pub phrase_count: usize,
    pub bit_cost: u64,
}

pub fn entropy_estimate(sequence: &SymbolicSeries) -> Result<EntropyEstimate> {
    estimate_symbols(sequence.symbols(), sequence.alphabet())
}

pub(crate) fn estimate_symbols(symbols: &[u8], alphabet: Alphabet) -> Result<EntropyEstimate> {
    let parse = parse_symbols(symbols, alphabet)?;
    let raw = parse.bit_cost as f64 / (symbols.len() as f64 * (alphabet.size() as f64).log2());
    Ok(EntropyEstimate { h: raw.min(1.0), raw, phrase_count: parse.phrase_count(), bit_cost: parse.bit_cost })
}

/// Normalized compression ratio `h(σ)` in `[0, 1]`.
pub fn entropy(sequence: &SymbolicSeries) -> Result<f64> {
    entropy_estimate(sequence).map(|e| e.h)
}

/// Per-component entropies `H(X)` of one entity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyVector {
    entity_id: String,
    values: Vec<f64>,
    raw_values: Vec<f64>,
}

impl EntropyVector {
    /// Builds a vector from already-clamped values; every entry must lie in `[0, 1]`.
    pub fn new(entity_id: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidSeries(format!("entropy value {v} outside [0, 1]")));
        }
        Ok(EntropyVector { entity_id: entity_id.into(), raw_values: values.clone(), values })
    }

    pub fn entity_id(&self) -> &str {
        &self.entity_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Unclamped compression ratios, one per component.
    pub fn raw_values(&self) -> &[f64] {
        &self.raw_values
    }

    pub fn dimension(&self) -> usize {
        self.values.len()
    }

    pub fn norm_euclidean(&self) -> f64 {
        norm_euclidean(&self.values)
    }

    pub fn norm_l1(&self) -> f64 {
        norm_l1(&self.values)
    }
}

pub fn norm_euclidean(values: &[f64]) -> f64 {
    values.iter().map(|h| h * h).sum::<f64>().sqrt()
}

pub fn norm_l1(values: &[f64]) -> f64 {
    values.iter().sum()
}

/// Entropy of one raw component: optional differencing, symbolization, parse.
pub(crate) fn component_entropy(values: &[f64], alphabet: Alphabet, differencing: bool) -> Result<EntropyEstimate> {
    if differencing {
        if values.len() < 2 {
            return Err(Error::CannotDifference(values.len()));
        }
        let d = difference_values(values);
        estimate_symbols(symbolize_values(&d, alphabet).symbols(), alphabet)
    } else {
        estimate_symbols(symbolize_values(values, alphabet).symbols(), alphabet)
    }
}

pub fn entropy_vector(multi: &MultiSeries, alphabet: Alphabet, differencing: bool) -> Result<EntropyVector> {
    let mut values = Vec::with_capacity(multi.dimension());
    let mut raw_values = Vec::with_capacity(multi.dimension());
    for c in multi.components() {
        let e = component_entropy(c.values(), alphabet, differencing).map_err(|e| e.in_component(c.label()))?;
        values.push(e.h);
        raw_values.push(e.raw);
    }
    Ok(EntropyVector { entity_id: multi.entity_id().to_owned(), values, raw_values })
}
