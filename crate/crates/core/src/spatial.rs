//! Spatially weighted (ego-centric neighborhood) populations.
//!
//! Smoothing replaces each unit's counts with a proximity-weighted sum of
//! nearby counts while keeping the unit's own population as its averaging
//! weight, so region totals are conserved. The smoothed table also pins
//! the pre-smoothing overall composition as its divergence reference.
//! Neighborhoods overlap, so smoothed subunits are not mutually exclusive
//! and the aggregate identities that hold for plain tables need not hold
//! here.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::pop::UnitTable;

/// Sparse nonnegative N×N proximity weights, row order matching the unit
/// order of the table the matrix was built for.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightMatrix {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl WeightMatrix {
    pub fn new(n: usize, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        for row in &rows {
            for &(col, w) in row {
                if col >= n {
                    return Err(Error::InvalidInput(format!(
                        "weight column {col} out of range for {n} units"
                    )));
                }
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidInput(format!(
                        "weights must be finite and nonnegative, got {w}"
                    )));
                }
            }
        }
        Ok(Self { n, rows })
    }

    /// Self-weights only; smoothing with this matrix is the identity.
    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
        }
    }

    /// Builds a matrix from `(row_unit_id, col_unit_id, weight)` triplets
    /// resolved against the table's unit order.
    pub fn from_triplets<I>(table: &UnitTable, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String, f64)>,
    {
        let index: std::collections::HashMap<&str, usize> = table
            .units()
            .iter()
            .enumerate()
            .map(|(i, u)| (u.unit_id(), i))
            .collect();
        let mut rows = vec![Vec::new(); table.len()];
        for (row_id, col_id, weight) in triplets {
            let row = *index
                .get(row_id.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("unknown unit id {row_id}")))?;
            let col = *index
                .get(col_id.as_str())
                .ok_or_else(|| Error::InvalidInput(format!("unknown unit id {col_id}")))?;
            if !weight.is_finite() || weight < 0.0 {
                return Err(Error::InvalidInput(format!(
                    "weights must be finite and nonnegative, got {weight}"
                )));
            }
            rows[row].push((col, weight));
        }
        Self::new(table.len(), rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    /// Number of stored entries.
    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }
}

/// Uniform kernel: weight 1 for every unit within Euclidean distance `r`
/// of the row unit (self included), 0 beyond. Requires coordinates on
/// every unit.
pub fn uniform_kernel(table: &UnitTable, radius: f64) -> Result<WeightMatrix> {
    if !radius.is_finite() || radius < 0.0 {
        return Err(Error::InvalidInput(format!(
            "radius must be finite and nonnegative, got {radius}"
        )));
    }
    let coords = table
        .units()
        .iter()
        .map(|u| {
            u.coords().ok_or_else(|| Error::MissingCoordinates {
                unit_id: u.unit_id().to_string(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let r2 = radius * radius;
    let rows = exec::map_indices(table.len(), |i| {
        let (xi, yi) = coords[i];
        coords
            .iter()
            .enumerate()
            .filter(|(_, (x, y))| {
                let dx = x - xi;
                let dy = y - yi;
                dx * dx + dy * dy <= r2
            })
            .map(|(k, _)| (k, 1.0))
            .collect::<Vec<_>>()
    });
    WeightMatrix::new(table.len(), rows)
}

/// Replaces each unit's counts with the weighted sum of its neighbors'
/// counts. The unit keeps its original population as averaging weight and
/// the table pins the original overall composition as reference, so
/// overall indexes compare smoothed neighborhoods against the unsmoothed
/// region.
pub fn spatially_weighted_table(table: &UnitTable, weights: &WeightMatrix) -> Result<UnitTable> {
    if weights.dim() != table.len() {
        return Err(Error::DimensionMismatch {
            expected: table.len(),
            actual: weights.dim(),
        });
    }
    let reference = table.reference_distribution()?;
    let m = table.groups().len();
    let units = table.units();

    let smoothed = exec::map_indices(table.len(), |i| {
        let mut counts = vec![0.0; m];
        for &(k, w) in weights.row(i) {
            for (acc, &c) in counts.iter_mut().zip(units[k].counts()) {
                *acc += w * c;
            }
        }
        counts
    });

    let mut out = Vec::with_capacity(table.len());
    for (unit, counts) in units.iter().zip(smoothed) {
        let original_weight = unit.weight();
        if original_weight > 0.0 && counts.iter().sum::<f64>() <= 0.0 {
            return Err(Error::EmptyNeighborhood {
                unit_id: unit.unit_id().to_string(),
            });
        }
        out.push(
            unit.clone()
                .with_counts(counts)
                .with_weight_override(original_weight),
        );
    }
    Ok(UnitTable::new(table.groups().clone(), out)?.with_reference(reference))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indexes::{divergence_overall, info_theory_overall};
    use crate::pop::{GroupSet, LogBase, UnitRecord};
    use approx::assert_abs_diff_eq;

    fn line_table(rows: &[(&str, f64, &[f64])]) -> UnitTable {
        let m = rows[0].2.len();
        let groups = GroupSet::new((0..m).map(|i| format!("g{i}"))).unwrap();
        let units = rows
            .iter()
            .map(|(id, x, counts)| {
                UnitRecord::new(*id, counts.to_vec())
                    .unwrap()
                    .with_coords(*x, 0.0)
            })
            .collect();
        UnitTable::new(groups, units).unwrap()
    }

    #[test]
    fn zero_radius_is_self_only() {
        let t = line_table(&[("a", 0.0, &[1.0, 0.0]), ("b", 1.0, &[0.0, 1.0])]);
        let w = uniform_kernel(&t, 0.0).unwrap();
        assert_eq!(w.row(0), &[(0, 1.0)]);
        assert_eq!(w.row(1), &[(1, 1.0)]);
    }

    #[test]
    fn saturating_radius_is_all_ones() {
        let t = line_table(&[
            ("a", 0.0, &[1.0, 0.0]),
            ("b", 1.0, &[0.0, 1.0]),
            ("c", 2.0, &[1.0, 1.0]),
        ]);
        let w = uniform_kernel(&t, 10.0).unwrap();
        for i in 0..3 {
            assert_eq!(w.row(i).len(), 3);
        }
    }

    #[test]
    fn collinear_points_radius_one() {
        let t = line_table(&[
            ("a", 0.0, &[1.0, 0.0]),
            ("b", 1.0, &[0.0, 1.0]),
            ("c", 2.0, &[1.0, 1.0]),
        ]);
        let w = uniform_kernel(&t, 1.0).unwrap();
        let neighbors: Vec<Vec<usize>> = (0..3)
            .map(|i| w.row(i).iter().map(|&(k, _)| k).collect())
            .collect();
        assert_eq!(neighbors[0], vec![0, 1]);
        assert_eq!(neighbors[1], vec![0, 1, 2]);
        assert_eq!(neighbors[2], vec![1, 2]);
    }

    #[test]
    fn kernel_requires_coordinates() {
        let groups = GroupSet::new(["g0"]).unwrap();
        let units = vec![UnitRecord::new("a", vec![1.0]).unwrap()];
        let t = UnitTable::new(groups, units).unwrap();
        assert!(matches!(
            uniform_kernel(&t, 1.0),
            Err(Error::MissingCoordinates { unit_id }) if unit_id == "a"
        ));
    }

    #[test]
    fn identity_weights_leave_table_unchanged() {
        let t = line_table(&[("a", 0.0, &[3.0, 1.0]), ("b", 1.0, &[2.0, 5.0])]);
        let smoothed = spatially_weighted_table(&t, &WeightMatrix::identity(2)).unwrap();
        for (orig, new) in t.units().iter().zip(smoothed.units()) {
            assert_eq!(orig.counts(), new.counts());
            assert_eq!(orig.weight(), new.weight());
        }
    }

    #[test]
    fn full_smoothing_erases_divergence() {
        let t = line_table(&[("a", 0.0, &[100.0, 0.0]), ("b", 1.0, &[0.0, 100.0])]);
        let aspatial = divergence_overall(&t, LogBase::Base2).unwrap();
        assert_abs_diff_eq!(aspatial.value, 1.0, epsilon = 1e-12);

        let w = uniform_kernel(&t, 2.0).unwrap();
        let smoothed = spatially_weighted_table(&t, &w).unwrap();
        let spatial = divergence_overall(&smoothed, LogBase::Base2).unwrap();
        assert_abs_diff_eq!(spatial.value, 0.0, epsilon = 1e-12);
        assert!(spatial.value < aspatial.value);
    }

    #[test]
    fn smoothed_proportions_are_valid_distributions() {
        let t = line_table(&[
            ("a", 0.0, &[90.0, 0.0]),
            ("b", 1.0, &[0.0, 10.0]),
            ("c", 2.0, &[90.0, 0.0]),
        ]);
        let w = uniform_kernel(&t, 1.0).unwrap();
        let smoothed = spatially_weighted_table(&t, &w).unwrap();
        for unit in smoothed.units() {
            let p = unit.proportions().unwrap();
            let sum: f64 = p.proportions().iter().sum();
            assert_abs_diff_eq!(sum, 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn overlapping_neighborhoods_can_turn_info_theory_negative() {
        // Overlap makes every neighborhood more diverse than the skewed
        // region, so average local entropy exceeds overall entropy.
        let t = line_table(&[
            ("a", 0.0, &[90.0, 0.0]),
            ("b", 1.0, &[0.0, 10.0]),
            ("c", 2.0, &[90.0, 0.0]),
        ]);
        let w = uniform_kernel(&t, 1.0).unwrap();
        let smoothed = spatially_weighted_table(&t, &w).unwrap();
        let h = info_theory_overall(&smoothed, LogBase::Base2).unwrap();
        assert!(h.value < 0.0, "expected hyper-integration, got H = {}", h.value);
        let d = divergence_overall(&smoothed, LogBase::Base2).unwrap();
        assert!(d.value >= 0.0);
    }

    #[test]
    fn smoothing_conserves_total_weight() {
        let t = line_table(&[
            ("a", 0.0, &[90.0, 0.0]),
            ("b", 1.0, &[0.0, 10.0]),
            ("c", 2.0, &[90.0, 0.0]),
        ]);
        let w = uniform_kernel(&t, 1.0).unwrap();
        let smoothed = spatially_weighted_table(&t, &w).unwrap();
        assert_abs_diff_eq!(smoothed.total_weight(), t.total_weight(), epsilon = 1e-12);
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let t = line_table(&[("a", 0.0, &[1.0, 0.0]), ("b", 1.0, &[0.0, 1.0])]);
        assert!(matches!(
            spatially_weighted_table(&t, &WeightMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn empty_neighborhood_for_populated_unit_rejected() {
        let t = line_table(&[("a", 0.0, &[5.0, 0.0]), ("z", 1.0, &[0.0, 0.0])]);
        // Row for "a" points only at the empty unit.
        let w = WeightMatrix::new(2, vec![vec![(1, 1.0)], vec![(1, 1.0)]]).unwrap();
        assert!(matches!(
            spatially_weighted_table(&t, &w),
            Err(Error::EmptyNeighborhood { unit_id }) if unit_id == "a"
        ));
    }

    #[test]
    fn triplets_resolve_unit_ids() {
        let t = line_table(&[("a", 0.0, &[1.0, 0.0]), ("b", 1.0, &[0.0, 1.0])]);
        let w = WeightMatrix::from_triplets(
            &t,
            vec![
                ("a".to_string(), "a".to_string(), 1.0),
                ("a".to_string(), "b".to_string(), 0.5),
                ("b".to_string(), "b".to_string(), 1.0),
            ],
        )
        .unwrap();
        assert_eq!(w.row(0), &[(0, 1.0), (1, 0.5)]);
        assert_eq!(w.row(1), &[(1, 1.0)]);
        assert!(WeightMatrix::from_triplets(
            &t,
            vec![("a".to_string(), "nope".to_string(), 1.0)]
        )
        .is_err());
    }
}
