//! Region CSV ingestion and serialization.
//!
//! Schema: a header row `unit_id[,district_id][,x,y],<group columns...>`.
//! The district column name is configurable; `x` and `y` must appear
//! together. Every remaining column is a group, in header order. Counts
//! are nonnegative numbers; the district cell may be blank only when the
//! whole column is blank.

use std::path::{Path, PathBuf};

use segdiv::{GroupSet, Hierarchy, UnitRecord, UnitTable};

use crate::errors::{CliError, Result};

/// A parsed region file: the unit table plus the hierarchy of its
/// district column, when present.
#[derive(Debug, Clone)]
pub struct RegionFile {
    pub path: PathBuf,
    pub table: UnitTable,
    pub hierarchy: Option<Hierarchy>,
}

struct Layout {
    district: Option<usize>,
    x: Option<usize>,
    y: Option<usize>,
    groups: Vec<(usize, String)>,
}

fn parse_header(path: &Path, headers: &csv::StringRecord, district_col: &str) -> Result<Layout> {
    let parse_err = |message: String| CliError::Parse {
        path: path.to_path_buf(),
        line: 1,
        message,
    };
    let mut fields = headers.iter().map(str::trim);
    match fields.next() {
        Some("unit_id") => {}
        other => {
            return Err(parse_err(format!(
                "first column must be unit_id, got {:?}",
                other.unwrap_or("")
            )))
        }
    }
    let mut layout = Layout {
        district: None,
        x: None,
        y: None,
        groups: Vec::new(),
    };
    for (i, name) in headers.iter().map(str::trim).enumerate().skip(1) {
        if name == district_col {
            if layout.district.is_some() {
                return Err(parse_err(format!("duplicate column {name}")));
            }
            layout.district = Some(i);
        } else if name == "x" {
            layout.x = Some(i);
        } else if name == "y" {
            layout.y = Some(i);
        } else {
            layout.groups.push((i, name.to_string()));
        }
    }
    if layout.x.is_some() != layout.y.is_some() {
        return Err(parse_err("columns x and y must appear together".into()));
    }
    if layout.groups.is_empty() {
        return Err(parse_err("no group columns found".into()));
    }
    Ok(layout)
}

/// Parses a region CSV into a table and optional hierarchy.
pub fn parse_region_csv(path: &Path, district_col: &str) -> Result<RegionFile> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| match e.kind() {
            csv::ErrorKind::Io(_) => CliError::Io {
                path: path.to_path_buf(),
                source: std::io::Error::other(e.to_string()),
            },
            _ => CliError::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: e.to_string(),
            },
        })?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Parse {
            path: path.to_path_buf(),
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let layout = parse_header(path, &headers, district_col)?;

    let mut units: Vec<UnitRecord> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (row_index, record) in reader.records().enumerate() {
        let line = row_index as u64 + 2; // header is line 1
        let parse_err = |message: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            message,
        };
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        if record.len() != headers.len() {
            return Err(parse_err(format!(
                "expected {} fields, got {}",
                headers.len(),
                record.len()
            )));
        }
        let unit_id = record.get(0).unwrap_or("").to_string();
        if unit_id.is_empty() {
            return Err(parse_err("empty unit_id".into()));
        }
        if !seen.insert(unit_id.clone()) {
            return Err(parse_err(format!("duplicate unit_id {unit_id}")));
        }
        let mut counts = Vec::with_capacity(layout.groups.len());
        for (col, name) in &layout.groups {
            let raw = record.get(*col).unwrap_or("");
            let value: f64 = raw
                .parse()
                .map_err(|_| parse_err(format!("column {name}: invalid count {raw:?}")))?;
            if !value.is_finite() {
                return Err(parse_err(format!("column {name}: non-finite count")));
            }
            if value < 0.0 {
                return Err(parse_err(format!("column {name}: negative count {value}")));
            }
            counts.push(value);
        }
        let mut unit = UnitRecord::new(unit_id, counts).map_err(|e| parse_err(e.to_string()))?;
        if let Some(col) = layout.district {
            let district = record.get(col).unwrap_or("");
            if !district.is_empty() {
                unit = unit.with_district(district);
            }
        }
        if let (Some(xc), Some(yc)) = (layout.x, layout.y) {
            let x: f64 = record
                .get(xc)
                .unwrap_or("")
                .parse()
                .map_err(|_| parse_err("invalid x coordinate".into()))?;
            let y: f64 = record
                .get(yc)
                .unwrap_or("")
                .parse()
                .map_err(|_| parse_err("invalid y coordinate".into()))?;
            unit = unit.with_coords(x, y);
        }
        units.push(unit);
    }

    // Blank district column means no hierarchy; a partially blank one is a
    // data error, reported with the first offending line.
    let labelled = units.iter().filter(|u| u.district_id().is_some()).count();
    if labelled > 0 && labelled < units.len() {
        let first_blank = units.iter().position(|u| u.district_id().is_none()).unwrap();
        return Err(CliError::Parse {
            path: path.to_path_buf(),
            line: first_blank as u64 + 2,
            message: format!(
                "unit {} has no district while other units do",
                units[first_blank].unit_id()
            ),
        });
    }

    let domain = |e: segdiv::Error| CliError::Domain(e).with_input(path);
    let groups = GroupSet::new(layout.groups.iter().map(|(_, name)| name.clone()))
        .map_err(domain)?;
    let table = UnitTable::new(groups, units).map_err(domain)?;
    let hierarchy = table.district_hierarchy().map_err(domain)?;
    Ok(RegionFile {
        path: path.to_path_buf(),
        table,
        hierarchy,
    })
}

/// Writes a table back to the same CSV schema it was parsed from, full
/// float precision, so parse → write → parse is the identity.
pub fn write_region_csv(path: &Path, table: &UnitTable) -> Result<()> {
    let mut writer = csv::Writer::from_path(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    })?;
    let io_err = |e: csv::Error| CliError::Io {
        path: path.to_path_buf(),
        source: std::io::Error::other(e.to_string()),
    };

    let has_district = table.units().iter().any(|u| u.district_id().is_some());
    let has_coords = table.units().iter().any(|u| u.coords().is_some());
    let mut header = vec!["unit_id".to_string()];
    if has_district {
        header.push("district_id".to_string());
    }
    if has_coords {
        header.push("x".to_string());
        header.push("y".to_string());
    }
    header.extend(table.groups().names().iter().cloned());
    writer.write_record(&header).map_err(io_err)?;

    for unit in table.units() {
        let mut row = vec![unit.unit_id().to_string()];
        if has_district {
            row.push(unit.district_id().unwrap_or("").to_string());
        }
        if has_coords {
            let (x, y) = unit.coords().unwrap_or((0.0, 0.0));
            row.push(x.to_string());
            row.push(y.to_string());
        }
        row.extend(unit.counts().iter().map(|c| c.to_string()));
        writer.write_record(&row).map_err(io_err)?;
    }
    writer.flush().map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    Ok(())
}

/// Parses a sparse weight-matrix CSV of `(row_unit_id, col_unit_id,
/// weight)` triplets, header optional.
pub fn parse_weight_triplets(path: &Path) -> Result<Vec<(String, String, f64)>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let mut triplets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i as u64 + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(CliError::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected 3 fields, got {}", fields.len()),
            });
        }
        // Skip a header row.
        if i == 0 && fields[2].parse::<f64>().is_err() {
            continue;
        }
        let weight: f64 = fields[2].parse().map_err(|_| CliError::Parse {
            path: path.to_path_buf(),
            line: line_no,
            message: format!("invalid weight {:?}", fields[2]),
        })?;
        triplets.push((fields[0].to_string(), fields[1].to_string(), weight));
    }
    Ok(triplets)
}
