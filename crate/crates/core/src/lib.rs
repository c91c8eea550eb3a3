//! Diversity, inequality, and segregation indexes over grouped population
//! data.
//!
//! Given per-unit population counts by group (census tracts by race,
//! schools by gender, …), this crate computes:
//!
//! - entropy `E` and the Theil income-inequality index `I`
//! - the information theory index `H` (relative diversity)
//! - the dissimilarity index `DI`, two-group and multigroup
//! - discrete KL divergence and the divergence index `D` (segregation as
//!   the population-weighted divergence of local compositions from the
//!   overall composition)
//!
//! plus additive within/between decomposition of `D`, `H`, and `E` over a
//! district hierarchy, spatially weighted (ego-centric neighborhood)
//! variants, and comparative analyses: functional-form sweeps,
//! correlations across regions, and equivalence diagnostics for the
//! `H = D/E` identity.
//!
//! # Quick start
//!
//! ```rust
//! use segdiv::{GroupSet, UnitRecord, UnitTable, LogBase};
//! use segdiv::indexes::{divergence_overall, info_theory_overall};
//!
//! let groups = GroupSet::new(["white", "black"])?;
//! let units = vec![
//!     UnitRecord::new("tract-1", vec![720.0, 80.0])?,
//!     UnitRecord::new("tract-2", vec![30.0, 170.0])?,
//! ];
//! let table = UnitTable::new(groups, units)?;
//!
//! let d = divergence_overall(&table, LogBase::Base2)?;
//! let h = info_theory_overall(&table, LogBase::Base2)?;
//! assert!(d.value > 0.0 && h.value > 0.0);
//! # Ok::<(), segdiv::Error>(())
//! ```
//!
//! Zero-population units stay in the table but carry weight 0 everywhere
//! and report null local values. The default log base is 2 (bits); the
//! natural log and number-of-groups bases are selectable per call.
//!
//! With the default `parallel` feature, per-unit and per-region loops run
//! on rayon; reductions stay sequential in input order, so results are
//! identical with and without the feature.

pub mod analysis;
pub mod decomp;
mod error;
mod exec;
pub mod indexes;
pub mod pop;
pub mod spatial;

pub use error::{Error, Result};
pub use indexes::{IndexValue, LocalIndexVector};
pub use pop::{
    aggregate_by_district, GroupDistribution, GroupSet, Hierarchy, LogBase, UnitRecord,
    UnitTable, PROPORTION_SUM_TOLERANCE,
};
