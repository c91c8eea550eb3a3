//! Report generation: runs the requested computation and writes
//! deterministic JSON and CSV files.
//!
//! JSON numbers are rounded to 12 significant digits; region CSV
//! serialization (see `io`) keeps full precision so tables round-trip
//! exactly. Presentation rounding to 2 decimals happens only in
//! `--pretty` output.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use segdiv::analysis::{
    correlate_regions, equivalence_diagnostics, sweep_local_indexes, CorrelationReport,
    IndexPair, SweepCurve,
};
use segdiv::decomp::{
    decompose_divergence, decompose_entropy_supergroups, decompose_info_theory,
    DecompositionReport,
};
use segdiv::indexes::{
    dissimilarity_local, dissimilarity_multigroup, divergence_local, divergence_overall,
    entropy, entropy_local, info_theory_local, info_theory_overall, mean_local_entropy,
    LocalIndexVector,
};
use segdiv::{GroupDistribution, Hierarchy, LogBase, UnitTable};

use crate::errors::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub json: bool,
}

#[derive(Debug, Clone)]
pub struct OutputOptions {
    pub out_dir: PathBuf,
    pub formats: Formats,
    pub pretty: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum IndexSelection {
    Divergence,
    #[value(name = "info-theory")]
    InfoTheory,
    Entropy,
    Dissimilarity,
    All,
}

/// Rounds to 12 significant digits; report values are not meaningful past
/// that and shorter decimals keep the files stable and readable.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    let magnitude = x.abs().log10().floor() as i32;
    let factor = 10f64.powi(11 - magnitude);
    (x * factor).round() / factor
}

fn num(x: f64) -> Value {
    json!(round_sig(x))
}

fn opt_num(x: Option<f64>) -> Value {
    match x {
        Some(v) => num(v),
        None => Value::Null,
    }
}

fn csv_cell(x: f64) -> String {
    round_sig(x).to_string()
}

fn opt_csv_cell(x: Option<f64>) -> String {
    x.map(csv_cell).unwrap_or_default()
}

fn base_name(base: LogBase) -> &'static str {
    match base {
        LogBase::Base2 => "base2",
        LogBase::Natural => "natural",
        LogBase::NumGroups => "num_groups",
    }
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable report");
    text.push('\n');
    write_bytes(path, text.as_bytes())
}

fn distribution_object(groups: &[String], p: &GroupDistribution) -> Value {
    let mut map = Map::new();
    for (name, &value) in groups.iter().zip(p.proportions()) {
        map.insert(name.clone(), num(value));
    }
    Value::Object(map)
}

struct LocalColumn {
    name: &'static str,
    values: LocalIndexVector,
    overall: Option<f64>,
    extra: Vec<(&'static str, f64)>,
}

/// `compute`: overall and per-unit values for the selected indexes, plus
/// the equivalence diagnostics.
pub fn run_compute(
    table: &UnitTable,
    selection: IndexSelection,
    base: LogBase,
    input: &Path,
    spatial: Option<Value>,
    opts: &OutputOptions,
) -> Result<String> {
    let wants = |s: IndexSelection| selection == s || selection == IndexSelection::All;
    let mut columns: Vec<LocalColumn> = Vec::new();

    if wants(IndexSelection::Divergence) {
        columns.push(LocalColumn {
            name: "divergence",
            values: divergence_local(table, base)?,
            overall: Some(divergence_overall(table, base)?.value),
            extra: Vec::new(),
        });
    }
    if wants(IndexSelection::InfoTheory) {
        columns.push(LocalColumn {
            name: "info_theory",
            values: info_theory_local(table, base)?,
            overall: Some(info_theory_overall(table, base)?.value),
            extra: Vec::new(),
        });
    }
    if wants(IndexSelection::Entropy) {
        let reference = table.reference_distribution()?;
        columns.push(LocalColumn {
            name: "entropy",
            values: entropy_local(table, base)?,
            overall: Some(entropy(&reference, base)?.value),
            extra: vec![("mean_local", mean_local_entropy(table, base)?.value)],
        });
    }
    if wants(IndexSelection::Dissimilarity) {
        columns.push(LocalColumn {
            name: "dissimilarity",
            values: dissimilarity_local(table)?,
            overall: Some(dissimilarity_multigroup(table)?.value),
            extra: Vec::new(),
        });
    }

    let diagnostics = equivalence_diagnostics(table, base)?;
    let overall = table.overall_distribution()?;
    let groups = table.groups().names().to_vec();

    let mut indexes = Map::new();
    for column in &columns {
        let mut entry = Map::new();
        entry.insert("overall".into(), opt_num(column.overall));
        for (name, value) in &column.extra {
            entry.insert((*name).into(), num(*value));
        }
        indexes.insert(column.name.into(), Value::Object(entry));
    }

    let per_unit: Vec<Value> = table
        .units()
        .iter()
        .map(|unit| {
            let mut row = Map::new();
            row.insert("unit_id".into(), json!(unit.unit_id()));
            row.insert("population".into(), num(unit.weight()));
            for column in &columns {
                row.insert(
                    column.name.into(),
                    opt_num(column.values.get(unit.unit_id()).flatten()),
                );
            }
            Value::Object(row)
        })
        .collect();

    let report = json!({
        "command": "compute",
        "input": input.display().to_string(),
        "base": base_name(base),
        "groups": groups,
        "n_units": table.len(),
        "total_population": num(table.total_weight()),
        "spatial": spatial.unwrap_or(Value::Null),
        "overall_distribution": distribution_object(&groups, &overall),
        "indexes": Value::Object(indexes),
        "per_unit": per_unit,
        "diagnostics": {
            "overall_entropy": num(diagnostics.overall_entropy),
            "mean_local_entropy": num(diagnostics.mean_local_entropy),
            "info_theory": opt_num(diagnostics.info_theory),
            "divergence": num(diagnostics.divergence),
            "equivalence_conditions_hold": diagnostics.conditions_hold,
            "residual_ratio": opt_num(diagnostics.residual_ratio),
            "residual_product": opt_num(diagnostics.residual_product),
            "residual_entropy_gap": num(diagnostics.residual_entropy_gap),
        },
    });

    if opts.formats.json {
        write_json(&opts.out_dir.join("compute.json"), &report)?;
    }
    if opts.formats.csv {
        let mut text = String::from("unit_id,population");
        for column in &columns {
            write!(text, ",{}", column.name).unwrap();
        }
        text.push('\n');
        for unit in table.units() {
            write!(text, "{},{}", unit.unit_id(), csv_cell(unit.weight())).unwrap();
            for column in &columns {
                write!(
                    text,
                    ",{}",
                    opt_csv_cell(column.values.get(unit.unit_id()).flatten())
                )
                .unwrap();
            }
            text.push('\n');
        }
        write_bytes(&opts.out_dir.join("compute_units.csv"), text.as_bytes())?;
    }
    if opts.pretty {
        println!("index values ({} units, base {}):", table.len(), base_name(base));
        for column in &columns {
            match column.overall {
                Some(v) => println!("  {:<14} {:>8.2}", column.name, v),
                None => println!("  {:<14} {:>8}", column.name, "n/a"),
            }
        }
    }

    let mut summary = String::new();
    for column in &columns {
        if let Some(v) = column.overall {
            write!(summary, "{}={} ", column.name, csv_cell(v)).unwrap();
        }
    }
    Ok(summary.trim_end().to_string())
}

fn decomposition_json(report: &DecompositionReport, command: &str, input: &Path) -> Value {
    let per_district: Vec<Value> = report
        .per_district
        .iter()
        .map(|c| {
            json!({
                "district_id": c.district_id,
                "population_share": num(c.population_share),
                "raw_between": num(c.raw_between),
                "weighted_between": num(c.weighted_between),
                "between_share": num(c.weighted_between / report.total),
                "raw_within": num(c.raw_within),
                "weighted_within": num(c.weighted_within),
                "within_share": num(c.weighted_within / report.total),
            })
        })
        .collect();
    json!({
        "command": command,
        "input": input.display().to_string(),
        "index": report.index_kind,
        "base": base_name(report.base),
        "total": num(report.total),
        "between": num(report.between),
        "within_total": num(report.within_total),
        "between_share": num(report.between_share()),
        "within_share": num(report.within_share()),
        "per_district": per_district,
        "dropped": report.dropped,
    })
}

fn decomposition_csv(report: &DecompositionReport) -> String {
    let mut text = String::from(
        "district_id,population_share,raw_between,weighted_between,between_share,raw_within,weighted_within,within_share\n",
    );
    for c in &report.per_district {
        writeln!(
            text,
            "{},{},{},{},{},{},{},{}",
            c.district_id,
            csv_cell(c.population_share),
            csv_cell(c.raw_between),
            csv_cell(c.weighted_between),
            csv_cell(c.weighted_between / report.total),
            csv_cell(c.raw_within),
            csv_cell(c.weighted_within),
            csv_cell(c.weighted_within / report.total),
        )
        .unwrap();
    }
    text
}

fn pretty_decomposition(report: &DecompositionReport) {
    println!("decomposition of {:?} (share of overall score):", report.index_kind);
    println!("  {:<24} {:>6.2}", "Overall", 1.0);
    println!("  {:<24} {:>6.2}", "Between", report.between_share());
    for c in &report.per_district {
        println!(
            "    {:<22} {:>6.2}",
            c.district_id,
            c.weighted_between / report.total
        );
    }
    println!("  {:<24} {:>6.2}", "Within", report.within_share());
    for c in &report.per_district {
        println!(
            "    {:<22} {:>6.2}",
            c.district_id,
            c.weighted_within / report.total
        );
    }
}

/// `decompose`: within/between decomposition over the region's hierarchy
/// (divergence or info-theory), or over supergroups (entropy).
pub fn run_decompose(
    table: &UnitTable,
    hierarchy: Option<&Hierarchy>,
    selection: IndexSelection,
    supergroups: Option<&str>,
    base: LogBase,
    input: &Path,
    opts: &OutputOptions,
) -> Result<String> {
    let report = match selection {
        IndexSelection::Divergence | IndexSelection::InfoTheory => {
            let hierarchy = hierarchy.ok_or_else(|| {
                CliError::Config(
                    "decompose needs a district column in the input file".to_string(),
                )
            })?;
            if selection == IndexSelection::Divergence {
                decompose_divergence(table, hierarchy, base)?
            } else {
                decompose_info_theory(table, hierarchy, base)?
            }
        }
        IndexSelection::Entropy => {
            let spec = supergroups.ok_or_else(|| {
                CliError::Config(
                    "decompose --index entropy needs --supergroups \"A=g1+g2,B=g3\"".to_string(),
                )
            })?;
            let selectors = crate::config::parse_group_spec(spec)?;
            let mut grouping = indexmap::IndexMap::new();
            for selector in &selectors {
                for source in &selector.sources {
                    grouping.insert(source.clone(), selector.label.clone());
                }
            }
            let overall = table.overall_distribution()?;
            decompose_entropy_supergroups(&overall, table.groups(), &grouping, base)?
        }
        other => {
            return Err(CliError::Config(format!(
                "decompose supports divergence, info-theory, or entropy, not {other:?}"
            )))
        }
    };

    if opts.formats.json {
        write_json(
            &opts.out_dir.join("decompose.json"),
            &decomposition_json(&report, "decompose", input),
        )?;
    }
    if opts.formats.csv {
        write_bytes(
            &opts.out_dir.join("decompose_districts.csv"),
            decomposition_csv(&report).as_bytes(),
        )?;
    }
    if opts.pretty {
        pretty_decomposition(&report);
    }
    Ok(format!(
        "total={} between={} within={}",
        csv_cell(report.total),
        csv_cell(report.between),
        csv_cell(report.within_total)
    ))
}

fn sweep_csv(curve: &SweepCurve) -> String {
    let mut text = String::from("local_p1,divergence,info_theory\n");
    for s in &curve.samples {
        writeln!(
            text,
            "{},{},{}",
            csv_cell(s.local_p1),
            csv_cell(s.divergence),
            csv_cell(s.info_theory)
        )
        .unwrap();
    }
    text
}

/// `sweep`: local index curves for a hypothetical two-group city.
pub fn run_sweep(
    overall: &GroupDistribution,
    steps: usize,
    base: LogBase,
    opts: &OutputOptions,
) -> Result<String> {
    let curve = sweep_local_indexes(overall, steps, base)?;
    if opts.formats.json {
        let samples: Vec<Value> = curve
            .samples
            .iter()
            .map(|s| {
                json!({
                    "local_p1": num(s.local_p1),
                    "divergence": num(s.divergence),
                    "info_theory": num(s.info_theory),
                })
            })
            .collect();
        let report = json!({
            "command": "sweep",
            "base": base_name(base),
            "overall": curve.overall.proportions().iter().map(|&p| num(p)).collect::<Vec<_>>(),
            "steps": steps,
            "samples": samples,
        });
        write_json(&opts.out_dir.join("sweep.json"), &report)?;
    }
    if opts.formats.csv {
        write_bytes(&opts.out_dir.join("sweep.csv"), sweep_csv(&curve).as_bytes())?;
    }
    if opts.pretty {
        println!("local index sweep at overall p1 = {:.2}:", curve.overall.proportions()[0]);
        for s in curve.samples.iter().step_by((steps / 10).max(1)) {
            println!(
                "  p1 {:>5.2}  divergence {:>7.2}  info_theory {:>7.2}",
                s.local_p1, s.divergence, s.info_theory
            );
        }
    }
    let max_d = curve
        .samples
        .iter()
        .map(|s| s.divergence)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(format!("samples={} max_divergence={}", curve.samples.len(), csv_cell(max_d)))
}

fn correlation_json(report: &CorrelationReport, inputs: &[PathBuf]) -> Value {
    let per_region: Vec<Value> = report
        .per_region
        .iter()
        .map(|r| {
            json!({
                "region_id": r.region_id,
                "n_units": r.n_units,
                "pearson_r": opt_num(r.pearson_r),
                "spearman_r": opt_num(r.spearman_r),
                "skipped": r.skipped,
            })
        })
        .collect();
    json!({
        "command": "correlate",
        "inputs": inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
        "pair": report.pair,
        "base": base_name(report.base),
        "per_region": per_region,
        "mean_local_pearson": opt_num(report.mean_local_pearson),
        "cross_region_pearson": opt_num(report.cross_region_pearson),
        "cross_region_spearman": opt_num(report.cross_region_spearman),
        "cross_region_skipped": report.cross_region_skipped,
    })
}

/// `correlate`: local and overall correlations across a set of regions.
pub fn run_correlate(
    regions: &[(String, UnitTable)],
    inputs: &[PathBuf],
    pair: IndexPair,
    base: LogBase,
    opts: &OutputOptions,
) -> Result<String> {
    let report = correlate_regions(regions, pair, base)?;
    if opts.formats.json {
        write_json(
            &opts.out_dir.join("correlate.json"),
            &correlation_json(&report, inputs),
        )?;
    }
    if opts.formats.csv {
        let mut text = String::from("region_id,n_units,pearson_r,spearman_r,skipped\n");
        for r in &report.per_region {
            writeln!(
                text,
                "{},{},{},{},{}",
                r.region_id,
                r.n_units,
                opt_csv_cell(r.pearson_r),
                opt_csv_cell(r.spearman_r),
                r.skipped.as_deref().unwrap_or(""),
            )
            .unwrap();
        }
        write_bytes(&opts.out_dir.join("correlate_regions.csv"), text.as_bytes())?;
    }
    if opts.pretty {
        println!("per-region correlation of local values:");
        for r in &report.per_region {
            match r.pearson_r {
                Some(v) => println!("  {:<20} r = {:>6.2}  (n = {})", r.region_id, v, r.n_units),
                None => println!(
                    "  {:<20} skipped: {}",
                    r.region_id,
                    r.skipped.as_deref().unwrap_or("")
                ),
            }
        }
        if let Some(mean) = report.mean_local_pearson {
            println!("mean local r = {mean:.2}");
        }
        if let Some(cross) = report.cross_region_pearson {
            println!("cross-region r = {cross:.2}");
        }
    }
    Ok(format!(
        "regions={} mean_local_r={} cross_region_r={}",
        report.per_region.len(),
        opt_csv_cell(report.mean_local_pearson),
        opt_csv_cell(report.cross_region_pearson)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_significant_digits() {
        assert_eq!(round_sig(0.1234567890123456), 0.123456789012);
        assert_eq!(round_sig(123456789012345.6), 123456789012000.0);
        assert_eq!(round_sig(-0.000123456789012345), -0.000123456789012);
        assert_eq!(round_sig(0.0), 0.0);
        assert_eq!(round_sig(1.0), 1.0);
    }
}
