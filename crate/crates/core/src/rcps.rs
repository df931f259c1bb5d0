//! Fixed-sequence-testing calibration over an ordered parameter grid.
//!
//! The grid is walked in the caller's order. At each point a level-`delta`
//! upper confidence bound of the risk is computed; the walk continues while
//! the bound is strictly below `alpha` and stops at the first point where it
//! is not. The last passing point is returned, or an abstention when the
//! first point already fails. Family-wise error is controlled at `delta` for
//! any risk curve, monotone or not, because the first point with risk above
//! `alpha` is passed with probability at most `delta`.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundedSample, ErrorLevel, UcbMethod, UcbSpec};
use crate::error::{Error, Result};
use crate::ppi::SemiSupervisedInfo;

/// One grid point: a label and, for scalar parameters, its value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
}

/// Grid points in testing order `q_1 .. q_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    points: Vec<GridPoint>,
}

impl ParameterGrid {
    pub fn new(points: Vec<GridPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Shape("parameter grid is empty".into()));
        }
        let mut seen = HashSet::new();
        for p in &points {
            if !seen.insert(p.label.as_str()) {
                return Err(Error::Shape(format!("duplicate grid label `{}`", p.label)));
            }
        }
        Ok(Self { points })
    }

    /// Grid from labels only. Labels that parse as numbers keep that value.
    pub fn from_labels<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self::new(
            labels
                .into_iter()
                .map(|l| {
                    let label = l.into();
                    let value = label.trim().parse::<f64>().ok();
                    GridPoint { label, value }
                })
                .collect(),
        )
    }

    /// Grid `q_1 .. q_M` with labels `q_1`, `q_2`, ...
    pub fn indexed(len: usize) -> Result<Self> {
        Self::new(
            (1..=len)
                .map(|i| GridPoint {
                    label: format!("q_{i}"),
                    value: None,
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GridPoint] {
        &self.points
    }

    pub fn label(&self, index: usize) -> Option<&str> {
        self.points.get(index).map(|p| p.label.as_str())
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.points.iter().map(|p| p.label.as_str())
    }
}

/// Per-sample losses in `[0, 1]`, one column per grid point.
///
/// Stored column-major since every consumer reads whole columns.
#[derive(Debug, Clone, PartialEq)]
pub struct LossTable {
    grid: ParameterGrid,
    sample_ids: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl LossTable {
    pub fn new(
        grid: ParameterGrid,
        sample_ids: Vec<String>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if columns.len() != grid.len() {
            return Err(Error::Shape(format!(
                "{} loss columns for a grid of {} points",
                columns.len(),
                grid.len()
            )));
        }
        let n = sample_ids.len();
        if n == 0 {
            return Err(Error::EmptySample);
        }
        for (column, values) in columns.iter().enumerate() {
            if values.len() != n {
                return Err(Error::Shape(format!(
                    "column {column} has {} rows, expected {n}",
                    values.len()
                )));
            }
            if let Some((row, &value)) = values
                .iter()
                .enumerate()
                .find(|(_, v)| !(0.0..=1.0).contains(*v))
            {
                return Err(Error::OutOfSupport {
                    index: row,
                    value,
                    lo: 0.0,
                    hi: 1.0,
                });
            }
        }
        Ok(Self {
            grid,
            sample_ids,
            columns,
        })
    }

    /// Table with ids `0 .. n-1`.
    pub fn from_columns(grid: ParameterGrid, columns: Vec<Vec<f64>>) -> Result<Self> {
        let n = columns.first().map_or(0, Vec::len);
        let ids = (0..n).map(|i| i.to_string()).collect();
        Self::new(grid, ids, columns)
    }

    pub fn grid(&self) -> &ParameterGrid {
        &self.grid
    }

    pub fn n_samples(&self) -> usize {
        self.sample_ids.len()
    }

    pub fn n_columns(&self) -> usize {
        self.columns.len()
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn column(&self, index: usize) -> Result<&[f64]> {
        self.columns
            .get(index)
            .map(Vec::as_slice)
            .ok_or(Error::IndexOutOfRange {
                index,
                len: self.columns.len(),
            })
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    /// Rows reordered (or subset) by position.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let ids = rows.iter().map(|&r| self.sample_ids[r].clone()).collect();
        let columns = self
            .columns
            .iter()
            .map(|c| rows.iter().map(|&r| c[r]).collect())
            .collect();
        Self::new(self.grid.clone(), ids, columns)
    }

    /// Number of ones in a column whose entries are all 0 or 1.
    pub fn binary_count(&self, index: usize) -> Result<u64> {
        let column = self.column(index)?;
        let sample = BoundedSample::unit(column.to_vec())?;
        sample.binary_count().ok_or_else(|| {
            let (row, &value) = column
                .iter()
                .enumerate()
                .find(|(_, v)| {
                    v.abs() > crate::bounds::BINARY_TOLERANCE
                        && (*v - 1.0).abs() > crate::bounds::BINARY_TOLERANCE
                })
                .expect("non-binary entry exists");
            Error::NonBinary {
                row,
                column: index,
                value,
            }
        })
    }

    pub fn is_binary(&self) -> bool {
        (0..self.n_columns()).all(|c| self.binary_count(c).is_ok())
    }
}

/// Target risk level `alpha` and error level `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskSpec {
    alpha: f64,
    delta: ErrorLevel,
}

impl RiskSpec {
    /// `alpha = 1` is accepted as the degenerate level every risk satisfies.
    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            delta: ErrorLevel::new(delta)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn delta(&self) -> ErrorLevel {
        self.delta
    }
}

/// Result of a calibration run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationOutcome {
    /// Label of the selected grid point; `None` means abstain.
    pub selected: Option<String>,
    pub selected_index: Option<usize>,
    /// Number of grid points that passed before the first failure.
    pub stop_index: usize,
    /// Bounds of every visited point, including the failing one.
    pub ucb_trace: Vec<f64>,
    pub method: String,
    pub alpha: f64,
    pub delta: f64,
    pub asymptotic: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub unsafe_guarantee: bool,
    #[serde(flatten, default, skip_serializing_if = "Option::is_none")]
    pub semi_supervised: Option<SemiSupervisedInfo>,
}

impl CalibrationOutcome {
    pub fn is_abstain(&self) -> bool {
        self.selected.is_none()
    }
}

/// Stop index and visited bounds of a fixed-sequence walk.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedSequenceWalk {
    pub stop_index: usize,
    pub ucb_trace: Vec<f64>,
}

impl FixedSequenceWalk {
    pub fn selected(&self) -> Option<usize> {
        self.stop_index.checked_sub(1)
    }
}

/// Walks `0 .. len`, evaluating bounds lazily, and stops at the first bound
/// that is not strictly below `alpha`.
pub fn fixed_sequence<F>(len: usize, alpha: f64, mut ucb_at: F) -> Result<FixedSequenceWalk>
where
    F: FnMut(usize) -> Result<f64>,
{
    let mut ucb_trace = Vec::new();
    let mut stop_index = 0;
    for index in 0..len {
        let ucb = ucb_at(index)?;
        ucb_trace.push(ucb);
        if ucb < alpha {
            stop_index = index + 1;
        } else {
            break;
        }
    }
    Ok(FixedSequenceWalk {
        stop_index,
        ucb_trace,
    })
}

pub(crate) fn outcome_from_walk(
    grid: &ParameterGrid,
    walk: FixedSequenceWalk,
    method: impl Into<String>,
    alpha: f64,
    delta: f64,
    asymptotic: bool,
) -> CalibrationOutcome {
    let selected_index = walk.selected();
    CalibrationOutcome {
        selected: selected_index
            .and_then(|i| grid.label(i))
            .map(str::to_owned),
        selected_index,
        stop_index: walk.stop_index,
        ucb_trace: walk.ucb_trace,
        method: method.into(),
        alpha,
        delta,
        asymptotic,
        unsafe_guarantee: false,
        semi_supervised: None,
    }
}

/// Column mean.
pub fn empirical_risk(table: &LossTable, grid_index: usize) -> Result<f64> {
    let column = table.column(grid_index)?;
    Ok(column.iter().sum::<f64>() / column.len() as f64)
}

/// Fixed-sequence calibration on labeled losses with the given bound.
pub fn fixed_sequence_calibrate(
    table: &LossTable,
    spec: RiskSpec,
    ucb: UcbSpec,
) -> Result<CalibrationOutcome> {
    let walk = fixed_sequence(table.n_columns(), spec.alpha(), |m| {
        let sample = BoundedSample::unit(table.column(m)?.to_vec())?;
        ucb.evaluate(&sample).map_err(|e| match e {
            Error::NonBinary { row, value, .. } => Error::NonBinary {
                row,
                column: m,
                value,
            },
            other => other,
        })
    })?;
    Ok(outcome_from_walk(
        table.grid(),
        walk,
        ucb.method.as_str(),
        spec.alpha(),
        spec.delta().value(),
        ucb.method.is_asymptotic(),
    ))
}

/// Labeled-only baseline: Clopper-Pearson for binary losses, the betting
/// bound otherwise.
pub fn labeled_rcps(table: &LossTable, spec: RiskSpec) -> Result<CalibrationOutcome> {
    let method = if table.is_binary() {
        UcbMethod::ClopperPearson
    } else {
        UcbMethod::Wsr
    };
    fixed_sequence_calibrate(table, spec, UcbSpec::new(method, spec.delta()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binary_table(counts: &[usize], n: usize) -> LossTable {
        let columns = counts
            .iter()
            .map(|&k| (0..n).map(|i| if i < k { 1.0 } else { 0.0 }).collect())
            .collect();
        LossTable::from_columns(ParameterGrid::indexed(counts.len()).unwrap(), columns).unwrap()
    }

    #[test]
    fn empirical_risk_examples() {
        let grid = ParameterGrid::indexed(3).unwrap();
        let table = LossTable::from_columns(
            grid,
            vec![
                vec![1.0, 0.0, 1.0, 0.0],
                vec![0.0; 4],
                vec![0.2, 0.4, 0.9, 0.5],
            ],
        )
        .unwrap();
        assert_eq!(empirical_risk(&table, 0).unwrap(), 0.5);
        assert_eq!(empirical_risk(&table, 1).unwrap(), 0.0);
        let three = LossTable::from_columns(
            ParameterGrid::indexed(1).unwrap(),
            vec![vec![0.2, 0.4, 0.9]],
        )
        .unwrap();
        assert!((empirical_risk(&three, 0).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(
            empirical_risk(&table, 3),
            Err(Error::IndexOutOfRange { index: 3, len: 3 })
        ));
    }

    #[test]
    fn walk_stops_at_first_failure() {
        let ucbs = [0.10, 0.12, 0.20, 0.05];
        let mut visited = Vec::new();
        let walk = fixed_sequence(4, 0.15, |m| {
            visited.push(m);
            Ok(ucbs[m])
        })
        .unwrap();
        assert_eq!(walk.stop_index, 2);
        assert_eq!(walk.selected(), Some(1));
        assert_eq!(walk.ucb_trace, vec![0.10, 0.12, 0.20]);
        assert_eq!(visited, vec![0, 1, 2]);
    }

    #[test]
    fn immediate_failure_abstains() {
        let walk = fixed_sequence(3, 0.15, |_| Ok(0.16)).unwrap();
        assert_eq!(walk.stop_index, 0);
        assert_eq!(walk.selected(), None);
    }

    #[test]
    fn tie_at_alpha_stops() {
        let walk = fixed_sequence(2, 0.15, |_| Ok(0.15)).unwrap();
        assert_eq!(walk.stop_index, 0);
    }

    #[test]
    fn tiny_clopper_pearson_end_to_end() {
        let table = binary_table(&[0, 1, 9], 10);
        let spec = RiskSpec::new(0.5, 0.1).unwrap();
        let out = fixed_sequence_calibrate(
            &table,
            spec,
            UcbSpec::new(UcbMethod::ClopperPearson, spec.delta()),
        )
        .unwrap();
        // scipy.stats.beta.ppf(0.9, k + 1, n - k)
        let expected = [
            0.205_671_765_275_718_5,
            0.336_847_723_306_724_74,
            0.989_519_258_206_214_4,
        ];
        for (got, want) in out.ucb_trace.iter().zip(expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
        assert_eq!(out.stop_index, 2);
        assert_eq!(out.selected.as_deref(), Some("q_2"));
        assert!(!out.asymptotic);
    }

    #[test]
    fn labeled_rcps_picks_bound_by_loss_type() {
        let table = binary_table(&[0, 1], 40);
        let spec = RiskSpec::new(0.2, 0.1).unwrap();
        assert_eq!(
            labeled_rcps(&table, spec).unwrap().method,
            "clopper_pearson"
        );
        let cont =
            LossTable::from_columns(ParameterGrid::indexed(1).unwrap(), vec![vec![0.05; 40]])
                .unwrap();
        assert_eq!(labeled_rcps(&cont, spec).unwrap().method, "wsr");
    }

    #[test]
    fn table_validation() {
        let grid = ParameterGrid::indexed(2).unwrap();
        assert!(LossTable::from_columns(grid.clone(), vec![vec![0.0]]).is_err());
        assert!(LossTable::from_columns(grid.clone(), vec![vec![0.0], vec![1.2]]).is_err());
        assert!(LossTable::from_columns(grid, vec![vec![0.0, 1.0], vec![1.0]]).is_err());
        assert!(ParameterGrid::from_labels(["a", "a"]).is_err());
        assert!(ParameterGrid::new(vec![]).is_err());
    }

    #[test]
    fn non_binary_reports_column() {
        let table = LossTable::from_columns(
            ParameterGrid::indexed(2).unwrap(),
            vec![vec![0.0, 0.0], vec![0.0, 0.5]],
        )
        .unwrap();
        let spec = RiskSpec::new(0.9, 0.1).unwrap();
        let err = fixed_sequence_calibrate(
            &table,
            spec,
            UcbSpec::new(UcbMethod::ClopperPearson, spec.delta()),
        )
        .unwrap_err();
        assert!(matches!(
            err,
            Error::NonBinary {
                row: 1,
                column: 1,
                ..
            }
        ));
    }
}
