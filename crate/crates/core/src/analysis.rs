//! Comparative analyses: functional-form sweeps of the local indexes,
//! per-region and cross-region correlations, and equivalence diagnostics
//! between the divergence and information theory indexes.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec;
use crate::indexes::{
    dissimilarity_local, dissimilarity_multigroup, divergence_local, divergence_overall,
    entropy, info_theory_local, info_theory_overall, mean_local_entropy, LocalIndexVector,
};
use crate::pop::{GroupDistribution, LogBase, UnitTable};

/// One sampled point of a two-group sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepSample {
    /// Proportion of group 1 in the hypothetical local area.
    pub local_p1: f64,
    pub divergence: f64,
    pub info_theory: f64,
}

/// Local index values across the full range of local compositions for a
/// fixed two-group overall composition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepCurve {
    pub overall: GroupDistribution,
    pub base: LogBase,
    pub samples: Vec<SweepSample>,
}

/// Evaluates the local divergence and information theory indexes at
/// `steps` evenly spaced local proportions of group 1, endpoints
/// included. The divergence curve is convex with its unique zero at the
/// overall proportion; the info-theory curve crosses zero wherever local
/// diversity matches overall diversity.
pub fn sweep_local_indexes(
    overall: &GroupDistribution,
    steps: usize,
    base: LogBase,
) -> Result<SweepCurve> {
    if overall.len() != 2 {
        return Err(Error::InvalidInput(format!(
            "sweep requires exactly 2 groups, got {}",
            overall.len()
        )));
    }
    if steps < 3 {
        return Err(Error::InvalidInput(format!(
            "sweep requires at least 3 steps, got {steps}"
        )));
    }
    let divisor = base.ln_divisor(2)?;
    let q1 = overall.proportions()[0];
    let q2 = overall.proportions()[1];
    let region_entropy = ent2_nats(q1) / divisor;
    if region_entropy <= 0.0 {
        return Err(Error::DegenerateRegion);
    }

    let samples = (0..steps)
        .map(|k| {
            let p1 = k as f64 / (steps - 1) as f64;
            let p2 = 1.0 - p1;
            // Clamped at 0 like every divergence in this crate.
            let divergence = ((kl_term(p1, q1) + kl_term(p2, q2)) / divisor).max(0.0);
            let info_theory = 1.0 - ent2_nats(p1) / divisor / region_entropy;
            SweepSample {
                local_p1: p1,
                divergence,
                info_theory,
            }
        })
        .collect();
    Ok(SweepCurve {
        overall: overall.clone(),
        base,
        samples,
    })
}

fn ent2_nats(p1: f64) -> f64 {
    let term = |p: f64| if p > 0.0 { -p * p.ln() } else { 0.0 };
    term(p1) + term(1.0 - p1)
}

fn kl_term(p: f64, q: f64) -> f64 {
    if p > 0.0 {
        p * (p / q).ln()
    } else {
        0.0
    }
}

/// Which pair of local/overall series to correlate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexPair {
    /// Divergence against the information theory index.
    DivergenceInfoTheory,
    /// Divergence against the local dissimilarity deviation series.
    DivergenceDissimilarity,
}

/// Correlation outcome for one region. `pearson_r`/`spearman_r` are
/// `None` when the region was skipped, with the reason recorded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCorrelation {
    pub region_id: String,
    /// Number of pairwise-complete units that entered the correlation.
    pub n_units: usize,
    pub pearson_r: Option<f64>,
    pub spearman_r: Option<f64>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationReport {
    pub pair: IndexPair,
    pub base: LogBase,
    pub per_region: Vec<RegionCorrelation>,
    /// Mean of the defined per-region Pearson correlations.
    pub mean_local_pearson: Option<f64>,
    /// Pearson correlation of the two overall indexes across regions.
    pub cross_region_pearson: Option<f64>,
    pub cross_region_spearman: Option<f64>,
    pub cross_region_skipped: Option<String>,
}

/// Correlates local index values within each region and overall index
/// values across regions. Regions where a correlation is undefined (too
/// few populated units, zero variance, degenerate entropy) are flagged
/// and excluded rather than failing the run.
pub fn correlate_regions(
    regions: &[(String, UnitTable)],
    pair: IndexPair,
    base: LogBase,
) -> Result<CorrelationReport> {
    let results = exec::map(regions, |(region_id, table): &(String, UnitTable)| {
        (
            region_id.clone(),
            region_series(table, pair, base),
            region_overalls(table, pair, base),
        )
    });

    let mut per_region = Vec::with_capacity(results.len());
    let mut overall_x = Vec::new();
    let mut overall_y = Vec::new();
    for (region_id, series, overalls) in results {
        per_region.push(correlate_one(region_id, series));
        if let Ok((x, y)) = overalls {
            overall_x.push(x);
            overall_y.push(y);
        }
    }

    let defined: Vec<f64> = per_region.iter().filter_map(|r| r.pearson_r).collect();
    let mean_local_pearson = if defined.is_empty() {
        None
    } else {
        Some(defined.iter().sum::<f64>() / defined.len() as f64)
    };

    let (cross_p, cross_s, cross_skip) = if overall_x.len() < 2 {
        (None, None, Some("fewer than 2 regions with defined overall values".to_string()))
    } else {
        match pearson(&overall_x, &overall_y) {
            Some(r) => (Some(r), spearman(&overall_x, &overall_y), None),
            None => (None, None, Some("zero variance in overall values".to_string())),
        }
    };

    Ok(CorrelationReport {
        pair,
        base,
        per_region,
        mean_local_pearson,
        cross_region_pearson: cross_p,
        cross_region_spearman: cross_s,
        cross_region_skipped: cross_skip,
    })
}

type Series = std::result::Result<(Vec<f64>, Vec<f64>), String>;

fn region_series(table: &UnitTable, pair: IndexPair, base: LogBase) -> Series {
    let x = divergence_local(table, base).map_err(|e| e.to_string())?;
    let y: LocalIndexVector = match pair {
        IndexPair::DivergenceInfoTheory => {
            info_theory_local(table, base).map_err(|e| e.to_string())?
        }
        IndexPair::DivergenceDissimilarity => {
            dissimilarity_local(table).map_err(|e| e.to_string())?
        }
    };
    // Pairwise-complete: units null in either series are dropped.
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for ((_, xv), (_, yv)) in x.iter().zip(y.iter()) {
        if let (Some(a), Some(b)) = (xv, yv) {
            xs.push(a);
            ys.push(b);
        }
    }
    Ok((xs, ys))
}

fn region_overalls(
    table: &UnitTable,
    pair: IndexPair,
    base: LogBase,
) -> std::result::Result<(f64, f64), String> {
    let x = divergence_overall(table, base).map_err(|e| e.to_string())?;
    let y = match pair {
        IndexPair::DivergenceInfoTheory => {
            info_theory_overall(table, base).map_err(|e| e.to_string())?
        }
        IndexPair::DivergenceDissimilarity => {
            dissimilarity_multigroup(table).map_err(|e| e.to_string())?
        }
    };
    Ok((x.value, y.value))
}

fn correlate_one(region_id: String, series: Series) -> RegionCorrelation {
    match series {
        Err(reason) => RegionCorrelation {
            region_id,
            n_units: 0,
            pearson_r: None,
            spearman_r: None,
            skipped: Some(reason),
        },
        Ok((xs, ys)) => {
            let n_units = xs.len();
            if n_units < 3 {
                return RegionCorrelation {
                    region_id,
                    n_units,
                    pearson_r: None,
                    spearman_r: None,
                    skipped: Some(format!("only {n_units} populated units, need 3")),
                };
            }
            match pearson(&xs, &ys) {
                Some(r) => RegionCorrelation {
                    region_id,
                    n_units,
                    pearson_r: Some(r),
                    spearman_r: spearman(&xs, &ys),
                    skipped: None,
                },
                None => RegionCorrelation {
                    region_id,
                    n_units,
                    pearson_r: None,
                    spearman_r: None,
                    skipped: Some("zero variance in local values".to_string()),
                },
            }
        }
    }
}

/// Pearson correlation coefficient; `None` for fewer than 2 points or
/// zero variance in either series.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let dx = x - mx;
        let dy = y - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 {
        return None;
    }
    // Clamp the tail of floating-point error so results stay in [-1, 1].
    Some((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = ranks(xs);
    let ry = ranks(ys);
    pearson(&rx, &ry)
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// The quantities relating the divergence index to the information theory
/// index, and whether the conditions for their equivalence hold on this
/// table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceDiagnostics {
    pub base: LogBase,
    /// Entropy of the reference composition, E.
    pub overall_entropy: f64,
    /// Weight-averaged local entropy, Ē_i.
    pub mean_local_entropy: f64,
    /// H; `None` when E = 0.
    pub info_theory: Option<f64>,
    /// D.
    pub divergence: f64,
    /// True when E > 0 and Ē_i ≤ E, the regime where H = D/E.
    pub conditions_hold: bool,
    /// |H − D/E|; `None` when E = 0.
    pub residual_ratio: Option<f64>,
    /// |D − H·E|; `None` when E = 0.
    pub residual_product: Option<f64>,
    /// |D − (E − Ē_i)|.
    pub residual_entropy_gap: f64,
}

/// Computes E, Ē_i, H, D and the residuals of the identities connecting
/// them. Always succeeds on a valid table; H is reported as null for a
/// single-group region.
pub fn equivalence_diagnostics(table: &UnitTable, base: LogBase) -> Result<EquivalenceDiagnostics> {
    let reference = table.reference_distribution()?;
    let e = entropy(&reference, base)?.value;
    let mean_local = mean_local_entropy(table, base)?.value;
    let d = divergence_overall(table, base)?.value;
    let h = if e > 0.0 {
        Some(info_theory_overall(table, base)?.value)
    } else {
        None
    };
    Ok(EquivalenceDiagnostics {
        base,
        overall_entropy: e,
        mean_local_entropy: mean_local,
        info_theory: h,
        divergence: d,
        conditions_hold: e > 0.0 && mean_local <= e,
        residual_ratio: h.map(|h| (h - d / e).abs()),
        residual_product: h.map(|h| (d - h * e).abs()),
        residual_entropy_gap: (d - (e - mean_local)).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pop::{GroupSet, UnitRecord};
    use approx::assert_abs_diff_eq;

    fn dist(p: &[f64]) -> GroupDistribution {
        GroupDistribution::new(p.to_vec()).unwrap()
    }

    fn table(rows: &[(&str, &[f64])]) -> UnitTable {
        let m = rows[0].1.len();
        let groups = GroupSet::new((0..m).map(|i| format!("g{i}"))).unwrap();
        let units = rows
            .iter()
            .map(|(id, counts)| UnitRecord::new(*id, counts.to_vec()).unwrap())
            .collect();
        UnitTable::new(groups, units).unwrap()
    }

    #[test]
    fn sweep_even_city_is_symmetric() {
        let curve = sweep_local_indexes(&dist(&[0.5, 0.5]), 11, LogBase::Base2).unwrap();
        let first = curve.samples.first().unwrap();
        let last = curve.samples.last().unwrap();
        assert_abs_diff_eq!(first.divergence, last.divergence, epsilon = 1e-12);
        assert_abs_diff_eq!(first.divergence, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(first.info_theory, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn sweep_zeros_sit_at_matching_compositions() {
        let curve = sweep_local_indexes(&dist(&[0.75, 0.25]), 101, LogBase::Base2).unwrap();
        let at = |p: f64| {
            curve
                .samples
                .iter()
                .find(|s| (s.local_p1 - p).abs() < 1e-9)
                .unwrap()
        };
        assert_abs_diff_eq!(at(0.75).divergence, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at(0.25).info_theory, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(at(0.75).info_theory, 0.0, epsilon = 1e-12);
        assert!(at(0.25).divergence > 0.0);
    }

    #[test]
    fn sweep_minority_extreme_ranks_cities() {
        let d_at_zero = |overall: &[f64]| {
            sweep_local_indexes(&dist(overall), 11, LogBase::Base2)
                .unwrap()
                .samples[0]
                .divergence
        };
        let a = d_at_zero(&[0.5, 0.5]);
        let b = d_at_zero(&[0.75, 0.25]);
        let c = d_at_zero(&[0.9, 0.1]);
        assert!(a < b && b < c);
        assert_abs_diff_eq!(c, std::f64::consts::LOG2_10, epsilon = 1e-12);
    }

    #[test]
    fn sweep_rejects_degenerate_and_bad_input() {
        assert!(matches!(
            sweep_local_indexes(&dist(&[1.0, 0.0]), 11, LogBase::Base2),
            Err(Error::DegenerateRegion)
        ));
        assert!(sweep_local_indexes(&dist(&[0.5, 0.5]), 2, LogBase::Base2).is_err());
        assert!(sweep_local_indexes(&dist(&[0.5, 0.3, 0.2]), 11, LogBase::Base2).is_err());
    }

    #[test]
    fn pearson_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y = [2.0, 4.0, 6.0, 8.0];
        assert_abs_diff_eq!(pearson(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
        let y_neg: Vec<f64> = y.iter().map(|v| -v).collect();
        assert_abs_diff_eq!(pearson(&x, &y_neg).unwrap(), -1.0, epsilon = 1e-12);
        assert_eq!(pearson(&x, &[1.0, 1.0, 1.0, 1.0]), None);
        assert_eq!(pearson(&[1.0], &[1.0]), None);
    }

    #[test]
    fn pearson_symmetric_and_affine_invariant() {
        let x = [0.3, 1.7, 0.9, 2.4, 1.1];
        let y = [1.0, 0.2, 0.5, 0.9, 1.4];
        let r1 = pearson(&x, &y).unwrap();
        let r2 = pearson(&y, &x).unwrap();
        assert_abs_diff_eq!(r1, r2, epsilon = 1e-12);
        let scaled: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
        assert_abs_diff_eq!(pearson(&scaled, &y).unwrap(), r1, epsilon = 1e-12);
    }

    #[test]
    fn spearman_handles_ties() {
        let x = [1.0, 2.0, 2.0, 3.0];
        let y = [10.0, 20.0, 20.0, 30.0];
        assert_abs_diff_eq!(spearman(&x, &y).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn constant_region_is_flagged_not_fatal() {
        // Every unit matches the overall composition: both local series
        // are constant zero.
        let constant = table(&[("a", &[30.0, 10.0]), ("b", &[60.0, 20.0]), ("c", &[3.0, 1.0])]);
        let varied = table(&[("a", &[30.0, 10.0]), ("b", &[5.0, 45.0]), ("c", &[20.0, 20.0])]);
        let report = correlate_regions(
            &[
                ("flat".to_string(), constant),
                ("varied".to_string(), varied),
            ],
            IndexPair::DivergenceInfoTheory,
            LogBase::Base2,
        )
        .unwrap();
        assert!(report.per_region[0].skipped.is_some());
        assert!(report.per_region[0].pearson_r.is_none());
        assert!(report.per_region[1].pearson_r.is_some());
    }

    #[test]
    fn identical_regions_flag_cross_correlation() {
        let t = table(&[("a", &[30.0, 10.0]), ("b", &[5.0, 45.0]), ("c", &[20.0, 20.0])]);
        let report = correlate_regions(
            &[("r1".to_string(), t.clone()), ("r2".to_string(), t)],
            IndexPair::DivergenceInfoTheory,
            LogBase::Base2,
        )
        .unwrap();
        assert!(report.cross_region_pearson.is_none());
        assert!(report.cross_region_skipped.is_some());
    }

    #[test]
    fn correlations_invariant_to_log_base() {
        let regions = vec![
            (
                "r1".to_string(),
                table(&[("a", &[30.0, 10.0]), ("b", &[5.0, 45.0]), ("c", &[20.0, 20.0])]),
            ),
            (
                "r2".to_string(),
                table(&[("a", &[80.0, 10.0]), ("b", &[15.0, 45.0]), ("c", &[2.0, 20.0])]),
            ),
        ];
        let r2 = correlate_regions(&regions, IndexPair::DivergenceInfoTheory, LogBase::Base2)
            .unwrap();
        let rn = correlate_regions(&regions, IndexPair::DivergenceInfoTheory, LogBase::Natural)
            .unwrap();
        for (a, b) in r2.per_region.iter().zip(&rn.per_region) {
            assert_abs_diff_eq!(a.pearson_r.unwrap(), b.pearson_r.unwrap(), epsilon = 1e-9);
        }
    }

    #[test]
    fn diagnostics_identities_on_plain_table() {
        let t = table(&[("a", &[30.0, 10.0]), ("b", &[5.0, 45.0]), ("c", &[20.0, 20.0])]);
        let diag = equivalence_diagnostics(&t, LogBase::Base2).unwrap();
        assert!(diag.conditions_hold);
        assert!(diag.residual_ratio.unwrap() < 1e-12);
        assert!(diag.residual_product.unwrap() < 1e-12);
        assert!(diag.residual_entropy_gap < 1e-12);
    }

    #[test]
    fn diagnostics_single_group_region() {
        let t = table(&[("a", &[10.0, 0.0]), ("b", &[25.0, 0.0])]);
        let diag = equivalence_diagnostics(&t, LogBase::Base2).unwrap();
        assert_eq!(diag.info_theory, None);
        assert!(!diag.conditions_hold);
        assert_eq!(diag.divergence, 0.0);
    }
}
