//! Data model for grouped population data: group sets, distributions,
//! unit tables, and district hierarchies.
//!
//! All types are immutable after construction and safe to share across
//! threads. Counts are nonnegative reals rather than integers so that
//! smoothed (proximity-weighted) populations reuse the same types.

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for accepting a user-supplied probability vector: sums within
/// this distance of 1 are renormalized, anything further is rejected.
pub const PROPORTION_SUM_TOLERANCE: f64 = 1e-9;

/// Log base used by the entropy-family indexes.
///
/// The base defines the units of the result: bits for base 2, nats for the
/// natural log. `NumGroups` uses the number of groups as the base, which
/// rescales results to a common maximum across group counts; it resolves at
/// evaluation time and requires at least two groups.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Base2,
    Natural,
    NumGroups,
}

impl LogBase {
    /// Divisor that converts a natural-log quantity into this base, given
    /// `m` groups.
    pub(crate) fn ln_divisor(self, m: usize) -> Result<f64> {
        match self {
            LogBase::Base2 => Ok(std::f64::consts::LN_2),
            LogBase::Natural => Ok(1.0),
            LogBase::NumGroups => {
                if m < 2 {
                    Err(Error::DegenerateBase(m))
                } else {
                    Ok((m as f64).ln())
                }
            }
        }
    }
}

/// An ordered set of distinct group labels. Order is fixed at construction
/// and preserved through every operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSet {
    names: Vec<String>,
}

impl GroupSet {
    pub fn new<I, S>(names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(Error::InvalidInput("group set must be nonempty".into()));
        }
        for (i, name) in names.iter().enumerate() {
            if names[..i].contains(name) {
                return Err(Error::InvalidInput(format!("duplicate group label {name}")));
            }
        }
        Ok(Self { names })
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.names.iter().position(|n| n == label)
    }
}

/// A probability vector over the groups of a [`GroupSet`].
///
/// Entries are nonnegative and sum to 1. Construction renormalizes inputs
/// whose sum is within [`PROPORTION_SUM_TOLERANCE`] of 1 and rejects
/// anything further off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupDistribution {
    proportions: Vec<f64>,
}

impl GroupDistribution {
    pub fn new(raw: Vec<f64>) -> Result<Self> {
        let sum = validate_nonnegative(&raw)?;
        if (sum - 1.0).abs() > PROPORTION_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "proportions sum to {sum}, expected 1"
            )));
        }
        Ok(Self {
            proportions: raw.iter().map(|p| p / sum).collect(),
        })
    }

    /// Normalizes an arbitrary nonnegative count vector with positive sum.
    pub fn from_counts(counts: &[f64]) -> Result<Self> {
        let sum = validate_nonnegative(counts)?;
        if sum <= 0.0 {
            return Err(Error::InvalidDistribution(
                "counts sum to zero, no distribution".into(),
            ));
        }
        Ok(Self {
            proportions: counts.iter().map(|c| c / sum).collect(),
        })
    }

    pub fn proportions(&self) -> &[f64] {
        &self.proportions
    }

    pub fn len(&self) -> usize {
        self.proportions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.proportions.is_empty()
    }
}

fn validate_nonnegative(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::InvalidDistribution("empty proportion vector".into()));
    }
    let mut sum = 0.0;
    for &v in values {
        if !v.is_finite() || v < 0.0 {
            return Err(Error::InvalidDistribution(format!(
                "proportions must be finite and nonnegative, got {v}"
            )));
        }
        sum += v;
    }
    Ok(sum)
}

/// One spatial unit: an id, per-group population counts, and optionally a
/// district label and planar coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    unit_id: String,
    counts: Vec<f64>,
    district_id: Option<String>,
    coords: Option<(f64, f64)>,
    /// Averaging weight when it differs from the count total. Smoothed
    /// tables keep the unit's original population here so that T is
    /// conserved while the counts describe the neighborhood.
    weight_override: Option<f64>,
}

impl UnitRecord {
    pub fn new(unit_id: impl Into<String>, counts: Vec<f64>) -> Result<Self> {
        let unit_id = unit_id.into();
        for &c in &counts {
            if !c.is_finite() {
                return Err(Error::InvalidTable(format!(
                    "unit {unit_id} has a non-finite count"
                )));
            }
            if c < 0.0 {
                return Err(Error::NegativeCount { unit_id });
            }
        }
        Ok(Self {
            unit_id,
            counts,
            district_id: None,
            coords: None,
            weight_override: None,
        })
    }

    pub fn with_district(mut self, district_id: impl Into<String>) -> Self {
        self.district_id = Some(district_id.into());
        self
    }

    pub fn with_coords(mut self, x: f64, y: f64) -> Self {
        self.coords = Some((x, y));
        self
    }

    pub(crate) fn with_weight_override(mut self, weight: f64) -> Self {
        self.weight_override = Some(weight);
        self
    }

    pub(crate) fn with_counts(mut self, counts: Vec<f64>) -> Self {
        self.counts = counts;
        self
    }

    pub fn unit_id(&self) -> &str {
        &self.unit_id
    }

    pub fn counts(&self) -> &[f64] {
        &self.counts
    }

    pub fn district_id(&self) -> Option<&str> {
        self.district_id.as_deref()
    }

    pub fn coords(&self) -> Option<(f64, f64)> {
        self.coords
    }

    /// Count total of this record (the population described by `counts`).
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Averaging weight in region-level reductions; equals [`total`] unless
    /// the table was smoothed, in which case it is the original population.
    ///
    /// [`total`]: UnitRecord::total
    pub fn weight(&self) -> f64 {
        self.weight_override.unwrap_or_else(|| self.total())
    }

    /// True when the unit carries weight and has a defined composition.
    /// Everything else is excluded from weighted averages and reported as
    /// null in local index vectors.
    pub fn contributes(&self) -> bool {
        self.weight() > 0.0 && self.total() > 0.0
    }

    /// The unit's group proportions, `counts / total`.
    pub fn proportions(&self) -> Result<GroupDistribution> {
        if self.total() <= 0.0 {
            return Err(Error::ZeroPopulation {
                unit_id: self.unit_id.clone(),
            });
        }
        GroupDistribution::from_counts(&self.counts)
    }
}

/// Per-unit population counts by group for one region.
///
/// Invariants: count vectors match the group set length, unit ids are
/// unique, and the region population is positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitTable {
    groups: GroupSet,
    units: Vec<UnitRecord>,
    /// Reference composition for divergence-style comparisons. `None`
    /// means "this table's own overall distribution". Smoothed tables
    /// carry the pre-smoothing overall here.
    reference: Option<GroupDistribution>,
}

impl UnitTable {
    pub fn new(groups: GroupSet, units: Vec<UnitRecord>) -> Result<Self> {
        let m = groups.len();
        let mut seen = std::collections::HashSet::new();
        let mut total = 0.0;
        for unit in &units {
            if unit.counts.len() != m {
                return Err(Error::InvalidTable(format!(
                    "unit {} has {} counts, expected {m}",
                    unit.unit_id,
                    unit.counts.len()
                )));
            }
            if !seen.insert(unit.unit_id.as_str()) {
                return Err(Error::InvalidTable(format!(
                    "duplicate unit id {}",
                    unit.unit_id
                )));
            }
            total += unit.total();
        }
        if total <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        Ok(Self {
            groups,
            units,
            reference: None,
        })
    }

    pub(crate) fn with_reference(mut self, reference: GroupDistribution) -> Self {
        self.reference = Some(reference);
        self
    }

    pub fn groups(&self) -> &GroupSet {
        &self.groups
    }

    pub fn units(&self) -> &[UnitRecord] {
        &self.units
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    /// Pinned reference composition, if any.
    pub fn reference(&self) -> Option<&GroupDistribution> {
        self.reference.as_ref()
    }

    /// Total averaging weight T over contributing units.
    pub fn total_weight(&self) -> f64 {
        self.units
            .iter()
            .filter(|u| u.contributes())
            .map(|u| u.weight())
            .sum()
    }

    /// The region's overall composition: the weight-averaged mean of unit
    /// proportions, which for plain tables equals column sums over T.
    pub fn overall_distribution(&self) -> Result<GroupDistribution> {
        let mut acc = vec![0.0; self.groups.len()];
        let mut total = 0.0;
        for unit in self.units.iter().filter(|u| u.contributes()) {
            let w = unit.weight();
            let t = unit.total();
            for (a, &c) in acc.iter_mut().zip(&unit.counts) {
                *a += w * (c / t);
            }
            total += w;
        }
        if total <= 0.0 {
            return Err(Error::EmptyRegion);
        }
        GroupDistribution::from_counts(&acc)
    }

    /// Composition used as the divergence reference: the pinned one when
    /// present, otherwise the table's own overall distribution.
    pub fn reference_distribution(&self) -> Result<GroupDistribution> {
        match &self.reference {
            Some(r) => Ok(r.clone()),
            None => self.overall_distribution(),
        }
    }

    /// Builds a hierarchy from the units' district labels. Returns
    /// `Ok(None)` when no unit carries a label and an error when only some
    /// do.
    pub fn district_hierarchy(&self) -> Result<Option<Hierarchy>> {
        let labelled = self.units.iter().filter(|u| u.district_id.is_some()).count();
        if labelled == 0 {
            return Ok(None);
        }
        if labelled < self.units.len() {
            let missing = self
                .units
                .iter()
                .find(|u| u.district_id.is_none())
                .expect("some unit lacks a district");
            return Err(Error::UnassignedUnit {
                unit_id: missing.unit_id.clone(),
            });
        }
        let assignment = self
            .units
            .iter()
            .map(|u| (u.unit_id.clone(), u.district_id.clone().unwrap()));
        Hierarchy::new(assignment).map(Some)
    }
}

/// A partition of units into districts: every unit maps to exactly one
/// district.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    assignment: IndexMap<String, String>,
}

impl Hierarchy {
    pub fn new<I>(assignment: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let mut map = IndexMap::new();
        for (unit_id, district_id) in assignment {
            if map.insert(unit_id.clone(), district_id).is_some() {
                return Err(Error::InvalidInput(format!(
                    "unit {unit_id} assigned to more than one district"
                )));
            }
        }
        if map.is_empty() {
            return Err(Error::InvalidInput("hierarchy covers no units".into()));
        }
        Ok(Self { assignment: map })
    }

    /// Every unit in its own district.
    pub fn singletons(table: &UnitTable) -> Self {
        Self {
            assignment: table
                .units()
                .iter()
                .map(|u| (u.unit_id().to_string(), u.unit_id().to_string()))
                .collect(),
        }
    }

    /// All units in one district.
    pub fn single(table: &UnitTable, district_id: impl Into<String>) -> Self {
        let district_id = district_id.into();
        Self {
            assignment: table
                .units()
                .iter()
                .map(|u| (u.unit_id().to_string(), district_id.clone()))
                .collect(),
        }
    }

    pub fn district_of(&self, unit_id: &str) -> Option<&str> {
        self.assignment.get(unit_id).map(String::as_str)
    }

    pub fn assignment(&self) -> &IndexMap<String, String> {
        &self.assignment
    }
}

/// Aggregates units into one record per district, counts summed, district
/// order following first appearance in the table.
pub fn aggregate_by_district(table: &UnitTable, hierarchy: &Hierarchy) -> Result<UnitTable> {
    let m = table.groups().len();
    let mut districts: IndexMap<&str, (Vec<f64>, f64, bool)> = IndexMap::new();
    for unit in table.units() {
        let district = hierarchy
            .district_of(unit.unit_id())
            .ok_or_else(|| Error::UnassignedUnit {
                unit_id: unit.unit_id().to_string(),
            })?;
        let entry = districts
            .entry(district)
            .or_insert_with(|| (vec![0.0; m], 0.0, false));
        for (a, &c) in entry.0.iter_mut().zip(unit.counts()) {
            *a += c;
        }
        entry.1 += unit.weight();
        entry.2 |= unit.weight_override.is_some();
    }
    let units = districts
        .into_iter()
        .map(|(district, (counts, weight, overridden))| {
            let record = UnitRecord::new(district, counts)?;
            Ok(if overridden {
                record.with_weight_override(weight)
            } else {
                record
            })
        })
        .collect::<Result<Vec<_>>>()?;
    UnitTable::new(table.groups().clone(), units)
}
