//! Mobile-window entropy analysis: the entropy walk and its trend.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::entropy::{component_entropy, estimate_symbols, EntropyVector};
use crate::model::{difference_values, symbolize_values, Alphabet, MultiSeries, SymbolicSeries};
use crate::simplex::{influence, influence_values, project_values, SimplexPoint};
use crate::{Error, Result};

/// Floor of the within-walk threshold. A colinear walk has a mean distance
/// of zero up to rounding, which would otherwise leave no room at all.
pub const COLINEAR_TOLERANCE: f64 = 1e-9;

/// Relative gap below which the two leading principal variances count as equal.
const ISOTROPY_TOLERANCE: f64 = 1e-10;

/// Orientation products smaller than this are treated as zero.
const ORIENTATION_EPSILON: f64 = 1e-15;

/// How the `k` equal-length windows are laid over a series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowScheme {
    Overlapping { length: usize, step: usize },
    NonOverlapping { length: usize },
    /// Starts drawn once from `seed`; every series of the same length gets the
    /// same offsets, sorted chronologically.
    RandomStarts { length: usize, count: usize, seed: u64 },
}

impl WindowScheme {
    pub fn length(&self) -> usize {
        match *self {
            WindowScheme::Overlapping { length, .. }
            | WindowScheme::NonOverlapping { length }
            | WindowScheme::RandomStarts { length, .. } => length,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.length() == 0 {
            return Err(Error::InvalidConfig("window length must be at least 1".into()));
        }
        match *self {
            WindowScheme::Overlapping { step: 0, .. } => {
                Err(Error::InvalidConfig("window step must be at least 1".into()))
            }
            WindowScheme::RandomStarts { count: 0, .. } => {
                Err(Error::InvalidConfig("random window count must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Window start offsets for a series of length `t`.
    pub fn offsets(&self, t: usize) -> Result<Vec<usize>> {
        self.validate()?;
        let w = self.length();
        if w > t {
            return Err(Error::WindowTooLong { window: w, length: t });
        }
        Ok(match *self {
            WindowScheme::Overlapping { step, .. } => (0..=t - w).step_by(step).collect(),
            WindowScheme::NonOverlapping { length } => (0..=t - w).step_by(length).collect(),
            WindowScheme::RandomStarts { count, seed, .. } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut starts: Vec<usize> = (0..count).map(|_| rng.gen_range(0..=t - w)).collect();
                starts.sort_unstable();
                starts
            }
        })
    }

    /// Number of windows `k` for a series of length `t`.
    pub fn window_count(&self, t: usize) -> Result<usize> {
        Ok(match *self {
            WindowScheme::Overlapping { length, step } => {
                self.validate()?;
                if length > t {
                    return Err(Error::WindowTooLong { window: length, length: t });
                }
                (t - length) / step + 1
            }
            _ => self.offsets(t)?.len(),
        })
    }
}

pub fn make_windows(series: &SymbolicSeries, scheme: &WindowScheme) -> Result<Vec<SymbolicSeries>> {
    let w = scheme.length();
    Ok(scheme.offsets(series.len())?.into_iter().map(|start| series.window(start, w)).collect())
}

/// Where the symbol partition of a window comes from.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymbolizationMode {
    /// Symbolize the whole (differenced) series once, then cut windows.
    #[default]
    GlobalRange,
    /// Cut windows from the numeric series and symbolize each on its own range.
    PerWindow,
}

/// `N x k` matrix of per-window entropies; row `j` is component `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MovingMatrix {
    rows: Vec<Vec<f64>>,
}

impl MovingMatrix {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let k = rows.first().map_or(0, Vec::len);
        if rows.is_empty() || k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidSeries("moving matrix must be a non-empty N x k table".into()));
        }
        if rows.iter().flatten().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::InvalidSeries("moving matrix entries must lie in [0, 1]".into()));
        }
        Ok(MovingMatrix { rows })
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    pub fn window_count(&self) -> usize {
        self.rows[0].len()
    }

    /// Entropy vector of window `i`.
    pub fn column(&self, i: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[i]).collect()
    }
}

pub fn moving_matrix(
    multi: &MultiSeries,
    alphabet: Alphabet,
    differencing: bool,
    scheme: &WindowScheme,
    mode: SymbolizationMode,
) -> Result<MovingMatrix> {
    let mut rows = Vec::with_capacity(multi.dimension());
    for c in multi.components() {
        let row = component_row(c.values(), alphabet, differencing, scheme, mode)
            .map_err(|e| e.in_component(c.label()))?;
        rows.push(row);
    }
    Ok(MovingMatrix { rows })
}

fn component_row(
    values: &[f64],
    alphabet: Alphabet,
    differencing: bool,
    scheme: &WindowScheme,
    mode: SymbolizationMode,
) -> Result<Vec<f64>> {
    let series = if differencing {
        if values.len() < 2 {
            return Err(Error::CannotDifference(values.len()));
        }
        difference_values(values)
    } else {
        values.to_vec()
    };
    let w = scheme.length();
    let offsets = scheme.offsets(series.len())?;
    match mode {
        SymbolizationMode::GlobalRange => {
            let symbols = symbolize_values(&series, alphabet);
            offsets
                .into_iter()
                .map(|s| estimate_symbols(&symbols.symbols()[s..s + w], alphabet).map(|e| e.h))
                .collect()
        }
        SymbolizationMode::PerWindow => offsets
            .into_iter()
            .map(|s| component_entropy(&series[s..s + w], alphabet, false).map(|e| e.h))
            .collect(),
    }
}

/// Chronological sequence of simplex points, one per window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyWalk {
    points: Vec<SimplexPoint>,
}

impl EntropyWalk {
    pub fn new(points: Vec<SimplexPoint>) -> Result<Self> {
        let Some(first) = points.first() else {
            return Err(Error::InvalidSeries("empty entropy walk".into()));
        };
        let n = first.dimension();
        if let Some(p) = points.iter().find(|p| p.dimension() != n) {
            return Err(Error::DimensionMismatch { expected: n, found: p.dimension() });
        }
        Ok(EntropyWalk { points })
    }

    pub fn points(&self) -> &[SimplexPoint] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub fn walk(mm: &MovingMatrix) -> Result<EntropyWalk> {
    let points = (0..mm.window_count())
        .map(|i| {
            project_values(&mm.column(i)).map_err(|e| match e {
                Error::NullEntropyVector => Error::DegenerateWindow { index: i },
                other => other,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyWalk { points })
}

/// Trend `(A, alpha)` of a walk plus the fitted line it came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trend {
    /// Leading component (1-based) of the last window.
    pub leading_last: usize,
    /// Unit direction of the fitted line, oriented along chronology.
    pub direction: Vec<f64>,
    /// Centroid of the walk; the fitted line passes through it.
    pub line_point: Vec<f64>,
    /// Mean orthogonal distance of the walk points to the line.
    pub mean_distance: f64,
}

impl Trend {
    /// Orthogonal distance of `p` to the fitted line.
    pub fn distance_to_line(&self, p: &[f64]) -> f64 {
        point_line_distance(p, &self.line_point, &self.direction)
    }
}

fn point_line_distance(p: &[f64], origin: &[f64], direction: &[f64]) -> f64 {
    let rel: Vec<f64> = p.iter().zip(origin).map(|(a, b)| a - b).collect();
    let along: f64 = rel.iter().zip(direction).map(|(r, d)| r * d).sum();
    rel.iter().zip(direction).map(|(r, d)| (r - along * d).powi(2)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Total-least-squares line through `points`: centroid and principal direction.
pub fn fit_line(points: &[Vec<f64>]) -> Result<(Vec<f64>, Vec<f64>)> {
    let k = points.len();
    if k < 2 {
        return Err(Error::StationaryWalk);
    }
    let d = points[0].len();
    if points.iter().all(|p| p == &points[0]) {
        return Err(Error::StationaryWalk);
    }
    let centroid: Vec<f64> = (0..d).map(|i| points.iter().map(|p| p[i]).sum::<f64>() / k as f64).collect();
    let centered = DMatrix::from_fn(k, d, |r, c| points[r][c] - centroid[c]);
    let scatter = centered.transpose() * &centered;
    let eig = SymmetricEigen::new(scatter);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]];
    if !(top > 0.0) {
        return Err(Error::StationaryWalk);
    }
    if d > 1 && top - eig.eigenvalues[order[1]] <= ISOTROPY_TOLERANCE * top {
        return Err(Error::AmbiguousTrend);
    }
    let v = eig.eigenvectors.column(order[0]);
    let norm = v.norm();
    Ok((centroid, v.iter().map(|x| x / norm).collect()))
}

pub fn fit_trend(walk: &EntropyWalk, mm: &MovingMatrix) -> Result<Trend> {
    if walk.len() != mm.window_count() {
        return Err(Error::InvalidSeries(format!(
            "walk has {} points but the moving matrix has {} windows",
            walk.len(),
            mm.window_count()
        )));
    }
    let points: Vec<Vec<f64>> = walk.points().iter().map(|p| p.coords().to_vec()).collect();
    let (centroid, mut direction) = fit_line(&points)?;

    let first = &points[0];
    let last = &points[points.len() - 1];
    let span: Vec<f64> = last.iter().zip(first).map(|(a, b)| a - b).collect();
    let mut orientation = dot(&direction, &span);
    if orientation.abs() <= ORIENTATION_EPSILON {
        let from_centroid: Vec<f64> = last.iter().zip(&centroid).map(|(a, b)| a - b).collect();
        orientation = dot(&direction, &from_centroid);
        if orientation.abs() <= ORIENTATION_EPSILON {
            return Err(Error::AmbiguousTrend);
        }
    }
    if orientation < 0.0 {
        direction.iter_mut().for_each(|x| *x = -*x);
    }

    let mean_distance =
        points.iter().map(|p| point_line_distance(p, &centroid, &direction)).sum::<f64>() / points.len() as f64;
    let leading_last = influence_values(&mm.column(mm.window_count() - 1))?.leading;
    Ok(Trend { leading_last, direction, line_point: centroid, mean_distance })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttributionStatus {
    Within,
    /// Outside the walk, same leading component: the change is still mild.
    OutsideSameLeading,
    /// Outside the walk and the leading component moved: an abrupt change.
    OutsideChangedLeading,
}

impl AttributionStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            AttributionStatus::Within => "within",
            AttributionStatus::OutsideSameLeading => "outside_same_leading",
            AttributionStatus::OutsideChangedLeading => "outside_changed_leading",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionVerdict {
    pub status: AttributionStatus,
    pub distance: f64,
    pub threshold: f64,
    /// Leading component (1-based) of the attributed window.
    pub leading: usize,
}

/// Decides whether `q` continues the walk summarized by `trend`.
pub fn attribute(q: &SimplexPoint, trend: &Trend, q_entropy: &EntropyVector) -> Result<AttributionVerdict> {
    if q.coords().len() != trend.direction.len() {
        return Err(Error::DimensionMismatch { expected: trend.direction.len() + 1, found: q.dimension() });
    }
    let distance = trend.distance_to_line(q.coords());
    let threshold = trend.mean_distance.max(COLINEAR_TOLERANCE);
    let leading = influence(q_entropy)?.leading;
    let status = if distance <= threshold {
        AttributionStatus::Within
    } else if leading == trend.leading_last {
        AttributionStatus::OutsideSameLeading
    } else {
        AttributionStatus::OutsideChangedLeading
    };
    Ok(AttributionVerdict { status, distance, threshold, leading })
}
