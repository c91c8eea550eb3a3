//! Run configuration: log-base selection and the group subset/merge
//! specification.

use segdiv::{GroupSet, LogBase, UnitRecord, UnitTable};

use crate::errors::{CliError, Result};

/// Parses the `--base` flag: `2`, `e`, or `M` (number of groups).
pub fn parse_base(s: &str) -> std::result::Result<LogBase, String> {
    match s {
        "2" => Ok(LogBase::Base2),
        "e" => Ok(LogBase::Natural),
        "M" | "m" => Ok(LogBase::NumGroups),
        other => Err(format!("unknown base {other:?}, expected 2, e, or M")),
    }
}

/// One output group: either a column taken as-is or a named merge of
/// several columns, written `new=old1+old2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupSelector {
    pub label: String,
    pub sources: Vec<String>,
}

/// Parses a `--groups` spec: comma-separated entries, each either a column
/// name or `new=old1+old2`. The selected and merged columns become the
/// analysis groups, in spec order.
pub fn parse_group_spec(spec: &str) -> Result<Vec<GroupSelector>> {
    let mut selectors = Vec::new();
    for entry in spec.split(',') {
        let entry = entry.trim();
        if entry.is_empty() {
            return Err(CliError::Config(format!("empty entry in group spec {spec:?}")));
        }
        let selector = match entry.split_once('=') {
            None => GroupSelector {
                label: entry.to_string(),
                sources: vec![entry.to_string()],
            },
            Some((label, sources)) => {
                let label = label.trim();
                if label.is_empty() {
                    return Err(CliError::Config(format!("empty merge label in {entry:?}")));
                }
                let sources: Vec<String> = sources
                    .split('+')
                    .map(|s| s.trim().to_string())
                    .collect();
                if sources.iter().any(String::is_empty) {
                    return Err(CliError::Config(format!("empty merge source in {entry:?}")));
                }
                GroupSelector {
                    label: label.to_string(),
                    sources,
                }
            }
        };
        selectors.push(selector);
    }
    // Output labels must be unique and the source columns disjoint.
    for (i, s) in selectors.iter().enumerate() {
        if selectors[..i].iter().any(|t| t.label == s.label) {
            return Err(CliError::Config(format!("duplicate output group {}", s.label)));
        }
    }
    let mut used = std::collections::HashSet::new();
    for s in &selectors {
        for source in &s.sources {
            if !used.insert(source.clone()) {
                return Err(CliError::Config(format!(
                    "column {source} referenced more than once in group spec"
                )));
            }
        }
    }
    Ok(selectors)
}

/// Applies a group selection/merge to a table, keeping districts and
/// coordinates.
pub fn apply_group_spec(table: &UnitTable, selectors: &[GroupSelector]) -> Result<UnitTable> {
    let mut source_indexes = Vec::with_capacity(selectors.len());
    for s in selectors {
        let mut indexes = Vec::with_capacity(s.sources.len());
        for source in &s.sources {
            let index = table.groups().index_of(source).ok_or_else(|| {
                CliError::Config(format!("group spec names unknown column {source}"))
            })?;
            indexes.push(index);
        }
        source_indexes.push(indexes);
    }
    let groups = GroupSet::new(selectors.iter().map(|s| s.label.clone()))
        .map_err(CliError::Domain)?;
    let units = table
        .units()
        .iter()
        .map(|unit| {
            let counts: Vec<f64> = source_indexes
                .iter()
                .map(|indexes| indexes.iter().map(|&i| unit.counts()[i]).sum())
                .collect();
            let mut rebuilt = UnitRecord::new(unit.unit_id(), counts)?;
            if let Some(d) = unit.district_id() {
                rebuilt = rebuilt.with_district(d);
            }
            if let Some((x, y)) = unit.coords() {
                rebuilt = rebuilt.with_coords(x, y);
            }
            Ok(rebuilt)
        })
        .collect::<segdiv::Result<Vec<_>>>()
        .map_err(CliError::Domain)?;
    UnitTable::new(groups, units).map_err(CliError::Domain)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_spec_round_trip() {
        let spec = parse_group_spec("white,black,api=asian+pacific").unwrap();
        assert_eq!(spec.len(), 3);
        assert_eq!(spec[2].label, "api");
        assert_eq!(spec[2].sources, vec!["asian", "pacific"]);
    }

    #[test]
    fn group_spec_rejects_overlap() {
        assert!(parse_group_spec("white,all=white+black").is_err());
        assert!(parse_group_spec("white,white").is_err());
        assert!(parse_group_spec("a=,b").is_err());
    }

    #[test]
    fn apply_merges_columns() {
        let groups = GroupSet::new(["w", "b", "h", "a"]).unwrap();
        let units = vec![
            UnitRecord::new("u1", vec![10.0, 20.0, 5.0, 3.0]).unwrap(),
            UnitRecord::new("u2", vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
        ];
        let table = UnitTable::new(groups, units).unwrap();
        let spec = parse_group_spec("w,other=h+a").unwrap();
        let merged = apply_group_spec(&table, &spec).unwrap();
        assert_eq!(merged.groups().names(), &["w".to_string(), "other".to_string()]);
        assert_eq!(merged.units()[0].counts(), &[10.0, 8.0]);
        assert_eq!(merged.units()[1].counts(), &[1.0, 7.0]);

        assert!(apply_group_spec(&table, &parse_group_spec("nope").unwrap()).is_err());
    }
}
