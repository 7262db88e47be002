//! Per-entity marker reports and collection summaries.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::entropy::{entropy_vector, EntropyVector, PARSING_RULE};
use crate::model::{sparsity, Alphabet, MultiSeries, SparsityProfile, DEFAULT_SPARSITY_DELTA};
use crate::simplex::{influence, leading_component, project};
use crate::walk::{
    attribute, fit_trend, moving_matrix, walk, AttributionStatus, AttributionVerdict, SymbolizationMode, WindowScheme,
};
use crate::zipf::{diversification, Diversification, DiversificationCategory, Equivalence, DEFAULT_RARE_THRESHOLD, DEFAULT_WORD_LENGTH};
use crate::{Error, Execution, Result};

/// Version of the report and summary layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Everything that determines a marker report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub alphabet_size: usize,
    pub differencing: bool,
    pub window: WindowScheme,
    pub word_length: usize,
    pub equivalence: Equivalence,
    pub rare_threshold: f64,
    pub sparsity_delta: f64,
    pub symbolization_mode: SymbolizationMode,
    /// Trailing measurements excluded from the walk and used, together with
    /// the preceding ones, to form the attributed window. 0 disables it.
    pub holdout_tail: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            alphabet_size: 4,
            differencing: true,
            window: WindowScheme::Overlapping { length: 350, step: 52 },
            word_length: DEFAULT_WORD_LENGTH,
            equivalence: Equivalence::Composition,
            rare_threshold: DEFAULT_RARE_THRESHOLD,
            sparsity_delta: DEFAULT_SPARSITY_DELTA,
            symbolization_mode: SymbolizationMode::GlobalRange,
            holdout_tail: 0,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        self.alphabet()?;
        self.window.validate()?;
        if self.word_length == 0 {
            return Err(Error::InvalidConfig("word_length must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.rare_threshold) {
            return Err(Error::InvalidConfig(format!("rare_threshold must be in [0, 1], got {}", self.rare_threshold)));
        }
        if !(0.0..=1.0).contains(&self.sparsity_delta) {
            return Err(Error::InvalidConfig(format!("sparsity_delta must be in [0, 1], got {}", self.sparsity_delta)));
        }
        Ok(())
    }

    pub fn alphabet(&self) -> Result<Alphabet> {
        Alphabet::new(self.alphabet_size)
    }

    /// Raw length a holdout window must have: the window length, plus one
    /// measurement consumed by differencing.
    pub fn holdout_raw_length(&self) -> usize {
        self.window.length() + usize::from(self.differencing)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendSummary {
    pub leading_last: usize,
    pub direction: Vec<f64>,
    pub line_point: Vec<f64>,
    pub mean_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub entropy_vector: Vec<f64>,
    pub point: Vec<f64>,
    pub verdict: AttributionVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkerReport {
    pub schema_version: u32,
    pub parsing_rule: String,
    pub entity_id: String,
    pub component_labels: Vec<String>,
    /// Leading component (1-based) of the complete series.
    pub leading: usize,
    pub entropy_vector: Vec<f64>,
    pub entropy_raw: Vec<f64>,
    pub simplex_point: Vec<f64>,
    pub norm_euclidean: f64,
    pub norm_l1: f64,
    /// Rows are components, columns windows.
    pub moving_matrix: Vec<Vec<f64>>,
    pub walk: Vec<Vec<f64>>,
    /// `None` when the walk admits no trend; `trend_error` then says why.
    pub trend: Option<TrendSummary>,
    pub trend_error: Option<String>,
    pub diversification: Diversification,
    pub grand_total: f64,
    pub sparsity: Vec<SparsityProfile>,
    pub attribution: Option<AttributionRecord>,
    pub config_echo: AnalysisConfig,
}

/// Splits off the walk span and the holdout window implied by `holdout_tail`.
fn implied_holdout(multi: &MultiSeries, config: &AnalysisConfig) -> Result<(MultiSeries, MultiSeries)> {
    let t = multi.len();
    let tail = config.holdout_tail;
    let q = config.holdout_raw_length();
    if tail >= t || q > t {
        return Err(Error::InvalidConfig(format!(
            "holdout_tail {tail} with a {q}-measurement holdout window does not fit a series of length {t}"
        )));
    }
    Ok((multi.slice(0, t - tail)?, multi.slice(t - q, t)?))
}

/// Runs the full pipeline for one entity.
///
/// Leading component, entropy norms, diversification, grand total and
/// sparsity use the complete series. The walk uses the complete series too,
/// unless `holdout_tail > 0` and no explicit `holdout` is given: then the walk
/// stops `holdout_tail` measurements early and the attributed window is the
/// last window-length stretch of the complete series.
pub fn analyze_entity(multi: &MultiSeries, holdout: Option<&MultiSeries>, config: &AnalysisConfig) -> Result<MarkerReport> {
    analyze_inner(multi, holdout, config).map_err(|e| match e {
        e @ Error::Entity { .. } => e,
        other => other.in_entity(multi.entity_id()),
    })
}

fn analyze_inner(multi: &MultiSeries, holdout: Option<&MultiSeries>, config: &AnalysisConfig) -> Result<MarkerReport> {
    config.validate()?;
    let alphabet = config.alphabet()?;

    let sparsity = multi
        .components()
        .iter()
        .map(|c| sparsity(c, config.sparsity_delta))
        .collect::<Result<Vec<_>>>()?;

    let h = entropy_vector(multi, alphabet, config.differencing)?;
    let point = project(&h)?;
    let verdict = influence(&h)?;

    let (walk_span, holdout) = match holdout {
        Some(q) => (multi.clone(), Some(q.clone())),
        None if config.holdout_tail > 0 => {
            let (span, q) = implied_holdout(multi, config)?;
            (span, Some(q))
        }
        None => (multi.clone(), None),
    };

    let mm = moving_matrix(&walk_span, alphabet, config.differencing, &config.window, config.symbolization_mode)?;
    let w = walk(&mm)?;
    // A walk that never moves (e.g. every window saturates at h = 1) or
    // spreads isotropically has no trend. That is a finding, not a failure.
    let (trend, trend_error) = match fit_trend(&w, &mm) {
        Ok(t) => (Some(t), None),
        Err(e @ (Error::StationaryWalk | Error::AmbiguousTrend)) => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };

    let attribution = holdout
        .filter(|_| trend.is_some())
        .map(|q| -> Result<AttributionRecord> {
            if q.dimension() != multi.dimension() {
                return Err(Error::DimensionMismatch { expected: multi.dimension(), found: q.dimension() });
            }
            let expected = config.holdout_raw_length();
            if q.len() != expected {
                return Err(Error::HoldoutLength { expected, found: q.len() });
            }
            let hq = entropy_vector(&q, alphabet, config.differencing)?;
            let pq = project(&hq)?;
            let verdict = attribute(&pq, trend.as_ref().expect("filtered above"), &hq)?;
            Ok(AttributionRecord { entropy_vector: hq.values().to_vec(), point: pq.coords().to_vec(), verdict })
        })
        .transpose()?;

    let diversification = diversification(
        multi,
        alphabet,
        config.differencing,
        config.word_length,
        config.equivalence,
        config.rare_threshold,
    )?;

    Ok(MarkerReport {
        schema_version: SCHEMA_VERSION,
        parsing_rule: PARSING_RULE.to_owned(),
        entity_id: multi.entity_id().to_owned(),
        component_labels: multi.labels(),
        leading: verdict.leading,
        entropy_vector: h.values().to_vec(),
        entropy_raw: h.raw_values().to_vec(),
        simplex_point: point.coords().to_vec(),
        norm_euclidean: h.norm_euclidean(),
        norm_l1: h.norm_l1(),
        moving_matrix: mm.rows().to_vec(),
        walk: w.points().iter().map(|p| p.coords().to_vec()).collect(),
        trend: trend.map(|t| TrendSummary {
            leading_last: t.leading_last,
            direction: t.direction,
            line_point: t.line_point,
            mean_distance: t.mean_distance,
        }),
        trend_error,
        diversification,
        grand_total: multi.grand_total(),
        sparsity,
        attribution,
        config_echo: config.clone(),
    })
}

/// Recomputes every derived field of `report` and lists the mismatches.
pub fn check_report(
    report: &MarkerReport,
    multi: &MultiSeries,
    holdout: Option<&MultiSeries>,
    config: &AnalysisConfig,
) -> Vec<String> {
    let mut problems = Vec::new();
    let mut expect = |ok: bool, what: &str| {
        if !ok {
            problems.push(format!("{}: {what}", report.entity_id));
        }
    };

    expect(&report.config_echo == config, "config echo differs from the analysis config");
    expect(report.leading == leading_component(&report.entropy_vector), "leading is not the entropy argmax");
    let l1: f64 = report.entropy_vector.iter().sum();
    expect(report.norm_l1 == l1, "l1 norm mismatch");
    expect(
        report.norm_euclidean == report.entropy_vector.iter().map(|h| h * h).sum::<f64>().sqrt(),
        "euclidean norm mismatch",
    );
    let n = report.entropy_vector.len();
    let projected: Vec<f64> = report.entropy_vector[..n - 1].iter().map(|h| h / l1).collect();
    expect(report.simplex_point == projected, "simplex point is not H / |H|_1");

    let d = &report.diversification;
    let mean = d.per_component_rho.iter().sum::<f64>() / d.per_component_rho.len() as f64;
    expect(d.value == 1.0 + mean, "diversification is not 1 + mean(rho)");
    expect(d.category == DiversificationCategory::of(d.value), "diversification category mismatch");

    let total: f64 = multi.components().iter().flat_map(|c| c.values().iter()).sum();
    expect(report.grand_total == total, "grand total mismatch");
    for (p, c) in report.sparsity.iter().zip(multi.components()) {
        let zeros = c.values().iter().filter(|&&v| v == 0.0).count();
        expect(p.null_count == zeros && p.length == c.len(), "sparsity counts mismatch");
        expect(p.is_sparse == (zeros as f64 >= c.len() as f64 * p.threshold_delta), "sparsity flag mismatch");
    }

    let k = report.walk.len();
    expect(report.moving_matrix.iter().all(|r| r.len() == k), "moving matrix and walk disagree on k");
    for (i, p) in report.walk.iter().enumerate() {
        let col: Vec<f64> = report.moving_matrix.iter().map(|r| r[i]).collect();
        let s: f64 = col.iter().sum();
        let expected: Vec<f64> = col[..n - 1].iter().map(|h| h / s).collect();
        expect(p == &expected, "walk point is not the projected window column");
    }
    expect(report.trend.is_some() != report.trend_error.is_some(), "exactly one of trend and trend_error expected");
    if let Some(trend) = &report.trend {
        if let Some(last) = report.moving_matrix.first().map(|r| r.len() - 1) {
            let col: Vec<f64> = report.moving_matrix.iter().map(|r| r[last]).collect();
            expect(trend.leading_last == leading_component(&col), "trend leading_last mismatch");
        }
        let norm: f64 = trend.direction.iter().map(|x| x * x).sum::<f64>().sqrt();
        expect((norm - 1.0).abs() < 1e-12, "trend direction is not a unit vector");
    } else {
        expect(report.attribution.is_none(), "attribution without a trend");
    }

    if let Some(a) = &report.attribution {
        let v = &a.verdict;
        expect((v.status == AttributionStatus::Within) == (v.distance <= v.threshold), "attribution status mismatch");
    }

    match analyze_entity(multi, holdout, config) {
        Ok(fresh) => expect(&fresh == report, "report differs from a fresh recomputation"),
        Err(e) => expect(false, &format!("recomputation failed: {e}")),
    }
    problems
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityFailure {
    pub entity_id: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyVsTotal {
    pub entity_id: String,
    pub grand_total: f64,
    pub grand_total_normalized: f64,
    pub norm_euclidean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollectionSummary {
    pub schema_version: u32,
    pub reports: Vec<MarkerReport>,
    pub failures: Vec<EntityFailure>,
    pub attributed_count: usize,
    /// Entities whose walk admits no trend, hence no attribution.
    pub trendless_count: usize,
    /// `None` when no entity was attributed.
    pub within_walk_fraction: Option<f64>,
    pub changed_leading_count: usize,
    pub diversification_category_histogram: BTreeMap<DiversificationCategory, usize>,
    pub entropy_vs_total: Vec<EntropyVsTotal>,
    pub config_echo: AnalysisConfig,
}

/// Analyzes every entity, quarantining per-entity failures.
///
/// Explicit `holdouts` are matched to entities by id; entities without one
/// fall back to `config.holdout_tail`. Grand totals are min-max normalized
/// across the successfully analyzed entities (all zero when they coincide).
pub fn analyze_collection(
    entities: &[MultiSeries],
    holdouts: Option<&[MultiSeries]>,
    config: &AnalysisConfig,
    exec: Execution,
) -> Result<CollectionSummary> {
    config.validate()?;
    let by_id: HashMap<&str, &MultiSeries> =
        holdouts.unwrap_or_default().iter().map(|q| (q.entity_id(), q)).collect();

    let outcomes = exec.map(entities, |m| analyze_entity(m, by_id.get(m.entity_id()).copied(), config));

    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for (m, outcome) in entities.iter().zip(outcomes) {
        match outcome {
            Ok(r) => reports.push(r),
            Err(e) => failures.push(EntityFailure { entity_id: m.entity_id().to_owned(), message: e.to_string() }),
        }
    }
    Ok(summarize(reports, failures, config))
}

fn summarize(reports: Vec<MarkerReport>, failures: Vec<EntityFailure>, config: &AnalysisConfig) -> CollectionSummary {
    let verdicts: Vec<AttributionStatus> =
        reports.iter().filter_map(|r| r.attribution.as_ref().map(|a| a.verdict.status)).collect();
    let within = verdicts.iter().filter(|&&s| s == AttributionStatus::Within).count();
    let changed_leading_count =
        verdicts.iter().filter(|&&s| s == AttributionStatus::OutsideChangedLeading).count();
    let within_walk_fraction = (!verdicts.is_empty()).then(|| within as f64 / verdicts.len() as f64);

    let mut histogram = BTreeMap::new();
    for r in &reports {
        *histogram.entry(r.diversification.category).or_insert(0) += 1;
    }

    let (lo, hi) = reports
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.grand_total), hi.max(r.grand_total)));
    let entropy_vs_total = reports
        .iter()
        .map(|r| EntropyVsTotal {
            entity_id: r.entity_id.clone(),
            grand_total: r.grand_total,
            grand_total_normalized: if hi > lo { (r.grand_total - lo) / (hi - lo) } else { 0.0 },
            norm_euclidean: r.norm_euclidean,
        })
        .collect();

    CollectionSummary {
        schema_version: SCHEMA_VERSION,
        attributed_count: verdicts.len(),
        trendless_count: reports.iter().filter(|r| r.trend.is_none()).count(),
        within_walk_fraction,
        changed_leading_count,
        diversification_category_histogram: histogram,
        entropy_vs_total,
        reports,
        failures,
        config_echo: config.clone(),
    }
}

/// Entropy vector of a report as the library type, for further simplex work.
pub fn report_entropy_vector(report: &MarkerReport) -> Result<EntropyVector> {
    EntropyVector::new(report.entity_id.clone(), report.entropy_vector.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Series;
    use crate::synth::{generate, CorpusSpec, Generator};

    fn small_config() -> AnalysisConfig {
        AnalysisConfig { window: WindowScheme::Overlapping { length: 120, step: 30 }, ..AnalysisConfig::default() }
    }

    fn corpus(entities: usize, t: usize, gens: Vec<Generator>, seed: u64) -> Vec<MultiSeries> {
        generate(&CorpusSpec { entity_count: entities, component_count: gens.len(), length: t, generators: gens, seed })
            .unwrap()
    }

    fn moving() -> Vec<Generator> {
        vec![Generator::Markov { bias: 0.95 }, Generator::BurstySparse { zero_density: 0.6 }, Generator::Markov { bias: 0.9 }]
    }

    #[test]
    fn uniform_entity_report_is_self_consistent() {
        let m = &corpus(1, 300, vec![Generator::IidUniform; 3], 5)[0];
        let cfg = AnalysisConfig { holdout_tail: 30, ..small_config() };
        let r = analyze_entity(m, None, &cfg).unwrap();
        assert!((1..=3).contains(&r.leading));
        assert_eq!(r.walk.len(), 5);
        // Every window saturates, so the walk sits on the centroid.
        assert!(r.walk.iter().all(|p| p == &r.walk[0]));
        assert_eq!(r.trend, None);
        assert_eq!(r.trend_error.as_deref(), Some(Error::StationaryWalk.to_string().as_str()));
        assert_eq!(r.attribution, None);
        assert!(check_report(&r, m, None, &cfg).is_empty());
    }

    #[test]
    fn structured_entity_has_a_trend() {
        let m = &corpus(1, 300, moving(), 5)[0];
        let cfg = small_config();
        let r = analyze_entity(m, None, &cfg).unwrap();
        assert_eq!(r.walk.len(), 6);
        assert!(r.trend.is_some(), "{:?}", r.trend_error);
        assert!(check_report(&r, m, None, &cfg).is_empty());
    }

    #[test]
    fn variable_component_leads() {
        let m = &corpus(1, 300, vec![Generator::Constant { level: 4.0 }, Generator::IidUniform, Generator::Constant { level: 1.0 }], 9)[0];
        let r = analyze_entity(m, None, &small_config()).unwrap();
        assert_eq!(r.leading, 2);
    }

    #[test]
    fn doubling_changes_only_grand_total() {
        let cfg = small_config();
        let m = &corpus(1, 300, vec![Generator::Markov { bias: 0.7 }, Generator::IidUniform, Generator::BurstySparse { zero_density: 0.3 }], 3)[0];
        let doubled = m.map_values(|v| 2.0 * v).unwrap();
        let a = analyze_entity(m, None, &cfg).unwrap();
        let mut b = analyze_entity(&doubled, None, &cfg).unwrap();
        assert_eq!(b.grand_total, 2.0 * a.grand_total);
        b.grand_total = a.grand_total;
        assert_eq!(a, b);
    }

    #[test]
    fn holdout_tail_attributes_each_entity() {
        let cfg = AnalysisConfig { holdout_tail: 30, ..small_config() };
        let ents = corpus(4, 300, moving(), 21);
        let s = analyze_collection(&ents, None, &cfg, Execution::Parallel).unwrap();
        assert_eq!(s.reports.len(), 4);
        assert_eq!(s.attributed_count, 4);
        assert!(s.within_walk_fraction.is_some());
        for (r, m) in s.reports.iter().zip(&ents) {
            assert!(r.attribution.is_some());
            assert!(check_report(r, m, None, &cfg).is_empty());
        }
    }

    #[test]
    fn identical_entities_share_verdicts() {
        let cfg = AnalysisConfig { holdout_tail: 30, ..small_config() };
        let base = &corpus(1, 300, moving(), 2)[0];
        let ents: Vec<MultiSeries> = (0..5).map(|i| base.with_entity_id(format!("copy{i}"))).collect();
        let s = analyze_collection(&ents, None, &cfg, Execution::Sequential).unwrap();
        let f = s.within_walk_fraction.unwrap();
        assert!(f == 0.0 || f == 1.0);
        assert!(s.entropy_vs_total.iter().all(|e| e.grand_total_normalized == 0.0));
    }

    #[test]
    fn explicit_holdout_and_length_check() {
        let cfg = small_config();
        let m = &corpus(1, 300, moving(), 8)[0];
        let q = m.slice(300 - cfg.holdout_raw_length(), 300).unwrap();
        let s = analyze_collection(std::slice::from_ref(m), Some(std::slice::from_ref(&q)), &cfg, Execution::Sequential)
            .unwrap();
        assert_eq!(s.attributed_count, 1);

        let short = m.slice(0, 50).unwrap();
        let err = analyze_entity(m, Some(&short), &cfg).unwrap_err();
        assert!(err.to_string().contains("length 50"), "{err}");
        assert!(err.to_string().contains("length 121"), "{err}");
    }

    #[test]
    fn failures_are_quarantined() {
        let cfg = small_config();
        let mut ents = corpus(3, 300, vec![Generator::IidUniform; 3], 4);
        let short = MultiSeries::new(
            "short",
            vec![Series::new("a", vec![1.0, 2.0, 3.0]).unwrap(), Series::new("b", vec![3.0, 1.0, 2.0]).unwrap()],
        )
        .unwrap();
        ents.insert(1, short);
        let s = analyze_collection(&ents, None, &cfg, Execution::Parallel).unwrap();
        assert_eq!(s.reports.len(), 3);
        assert_eq!(s.failures.len(), 1);
        assert_eq!(s.failures[0].entity_id, "short");
        assert_eq!(s.diversification_category_histogram.values().sum::<usize>(), 3);
        let norm: Vec<f64> = s.entropy_vs_total.iter().map(|e| e.grand_total_normalized).collect();
        assert!(norm.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(norm.contains(&0.0) && norm.contains(&1.0));
    }

    #[test]
    fn sequential_and_parallel_agree() {
        let cfg = AnalysisConfig { holdout_tail: 30, ..small_config() };
        let ents = corpus(12, 300, vec![Generator::BurstySparse { zero_density: 0.5 }, Generator::Markov { bias: 0.6 }, Generator::Markov { bias: 0.95 }], 77);
        let a = analyze_collection(&ents, None, &cfg, Execution::Sequential).unwrap();
        let b = analyze_collection(&ents, None, &cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        let mut rev = ents.clone();
        rev.reverse();
        let mut c = analyze_collection(&rev, None, &cfg, Execution::Parallel).unwrap();
        c.reports.reverse();
        assert_eq!(a.reports, c.reports);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = AnalysisConfig { rare_threshold: 2.0, ..AnalysisConfig::default() };
        assert!(matches!(analyze_collection(&[], None, &cfg, Execution::Sequential), Err(Error::InvalidConfig(_))));
    }
}
