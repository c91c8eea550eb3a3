//! `segdiv` — compute segregation, diversity, and inequality indexes from
//! region CSV files.
//!
//! Exit codes: 0 success, 2 input/parse error, 3 domain error (support
//! violation, degenerate region, …). Failures print a machine-readable
//! JSON object on stderr.

use segdiv_cli::{config, errors, io, report};

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use segdiv::analysis::IndexPair;
use segdiv::spatial::{spatially_weighted_table, uniform_kernel, WeightMatrix};
use segdiv::{GroupDistribution, LogBase, UnitTable};

use config::{apply_group_spec, parse_base, parse_group_spec};
use errors::{CliError, Result};
use io::{parse_region_csv, parse_weight_triplets, RegionFile};
use report::{Formats, IndexSelection, OutputOptions};

#[derive(Parser)]
#[command(
    name = "segdiv",
    about = "Diversity, inequality, and segregation indexes over grouped population data",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Log base: 2 (bits), e (nats), or M (number of groups).
    #[arg(long, default_value = "2", value_parser = parse_base)]
    base: LogBase,

    /// Group subset/merge spec, e.g. "white,black" or "white,api=asian+pacific".
    #[arg(long)]
    groups: Option<String>,

    /// Column holding the district label.
    #[arg(long, default_value = "district_id")]
    district_col: String,

    /// Output directory for report files.
    #[arg(long, default_value = ".")]
    out: PathBuf,

    /// Restrict output to one format (default writes both).
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,

    /// Print a rounded human-readable table to stdout.
    #[arg(long)]
    pretty: bool,
}

impl CommonArgs {
    fn output_options(&self) -> OutputOptions {
        let formats = match self.format.as_deref() {
            Some("csv") => Formats { csv: true, json: false },
            Some("json") => Formats { csv: false, json: true },
            _ => Formats { csv: true, json: true },
        };
        OutputOptions {
            out_dir: self.out.clone(),
            formats,
            pretty: self.pretty,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Compute overall and per-unit index values for one region.
    Compute {
        /// Region CSV: unit_id[,district_id][,x,y],<group columns...>
        input: PathBuf,

        #[arg(long, value_enum, default_value_t = IndexSelection::All)]
        index: IndexSelection,

        /// Smooth counts over neighbors within this Euclidean radius.
        #[arg(long)]
        radius: Option<f64>,

        /// Smooth counts with a sparse weight CSV (row_id,col_id,weight).
        #[arg(long)]
        weights: Option<PathBuf>,

        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decompose an index into within/between district components.
    Decompose {
        input: PathBuf,

        #[arg(long, value_enum, default_value_t = IndexSelection::Divergence)]
        index: IndexSelection,

        /// Supergroup spec for --index entropy, e.g. "A=g1+g2,B=g3".
        #[arg(long)]
        supergroups: Option<String>,

        #[command(flatten)]
        common: CommonArgs,
    },
    /// Evaluate the local index curves for a hypothetical two-group city.
    Sweep {
        /// Overall composition, e.g. "0.75,0.25".
        #[arg(long)]
        overall: String,

        #[arg(long, default_value_t = 101)]
        steps: usize,

        #[command(flatten)]
        common: CommonArgs,
    },
    /// Correlate local and overall index values across several regions.
    Correlate {
        /// Region CSV files; the file stem names each region.
        inputs: Vec<PathBuf>,

        /// Index pair: divergence vs info-theory (dh) or vs the local
        /// dissimilarity series (ddi).
        #[arg(long, default_value = "dh", value_parser = ["dh", "ddi"])]
        pair: String,

        #[command(flatten)]
        common: CommonArgs,
    },
}

fn load_region(path: &std::path::Path, common: &CommonArgs) -> Result<RegionFile> {
    let mut region = parse_region_csv(path, &common.district_col)?;
    if let Some(spec) = &common.groups {
        let selectors = parse_group_spec(spec)?;
        region.table = apply_group_spec(&region.table, &selectors)?;
        region.hierarchy = region.table.district_hierarchy().map_err(CliError::Domain)?;
    }
    Ok(region)
}

fn prepare_spatial(
    table: &UnitTable,
    radius: Option<f64>,
    weights: Option<&std::path::Path>,
) -> Result<(UnitTable, Option<serde_json::Value>)> {
    match (radius, weights) {
        (Some(_), Some(_)) => Err(CliError::Config(
            "--radius and --weights are mutually exclusive".into(),
        )),
        (Some(r), None) => {
            let kernel = uniform_kernel(table, r)?;
            Ok((
                spatially_weighted_table(table, &kernel)?,
                Some(json!({"kind": "uniform_kernel", "radius": r})),
            ))
        }
        (None, Some(path)) => {
            let triplets = parse_weight_triplets(path)?;
            let matrix = WeightMatrix::from_triplets(table, triplets)?;
            Ok((
                spatially_weighted_table(table, &matrix)?,
                Some(json!({
                    "kind": "weight_matrix",
                    "file": path.display().to_string(),
                })),
            ))
        }
        (None, None) => Ok((table.clone(), None)),
    }
}

fn ensure_out_dir(opts: &OutputOptions) -> Result<()> {
    std::fs::create_dir_all(&opts.out_dir).map_err(|e| CliError::Io {
        path: opts.out_dir.clone(),
        source: e,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Compute {
            input,
            index,
            radius,
            weights,
            common,
        } => {
            let opts = common.output_options();
            ensure_out_dir(&opts)?;
            let region = load_region(&input, &common)?;
            let (table, spatial_meta) =
                prepare_spatial(&region.table, radius, weights.as_deref())
                    .map_err(|e| e.with_input(&input))?;
            let summary =
                report::run_compute(&table, index, common.base, &input, spatial_meta, &opts)
                    .map_err(|e| e.with_input(&input))?;
            println!("compute ok: {summary}");
        }
        Command::Decompose {
            input,
            index,
            supergroups,
            common,
        } => {
            let opts = common.output_options();
            ensure_out_dir(&opts)?;
            let region = load_region(&input, &common)?;
            let summary = report::run_decompose(
                &region.table,
                region.hierarchy.as_ref(),
                index,
                supergroups.as_deref(),
                common.base,
                &input,
                &opts,
            )
            .map_err(|e| e.with_input(&input))?;
            println!("decompose ok: {summary}");
        }
        Command::Sweep {
            overall,
            steps,
            common,
        } => {
            let opts = common.output_options();
            ensure_out_dir(&opts)?;
            let proportions: Vec<f64> = overall
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|_| CliError::Config(format!("invalid proportion {s:?}")))
                })
                .collect::<Result<_>>()?;
            let overall = GroupDistribution::new(proportions).map_err(CliError::Domain)?;
            let summary = report::run_sweep(&overall, steps, common.base, &opts)?;
            println!("sweep ok: {summary}");
        }
        Command::Correlate {
            inputs,
            pair,
            common,
        } => {
            if inputs.len() < 2 {
                return Err(CliError::Config(
                    "correlate needs at least two region files".into(),
                ));
            }
            let opts = common.output_options();
            ensure_out_dir(&opts)?;
            let pair = match pair.as_str() {
                "ddi" => IndexPair::DivergenceDissimilarity,
                _ => IndexPair::DivergenceInfoTheory,
            };
            let mut regions = Vec::with_capacity(inputs.len());
            for path in &inputs {
                let region = load_region(path, &common)?;
                let id = path
                    .file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .unwrap_or_else(|| path.display().to_string());
                regions.push((id, region.table));
            }
            let summary = report::run_correlate(&regions, &inputs, pair, common.base, &opts)?;
            println!("correlate ok: {summary}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(error) => {
            let payload = json!({
                "error": {
                    "kind": error.kind(),
                    "message": error.to_string(),
                }
            });
            eprintln!("{payload}");
            ExitCode::from(error.exit_code())
        }
    }
}
