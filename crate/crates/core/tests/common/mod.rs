//! Shared generators for randomized test suites.

#![allow(dead_code)]

use rand::Rng;
use rand_distr::{Distribution, Exp1, LogNormal};

use segdiv::{GroupSet, Hierarchy, UnitRecord, UnitTable};

/// A table with `n_units` units over `m_groups` groups, integer-valued
/// counts in 0..=1000 with roughly `zero_frac` empty cells. Always has
/// positive total population.
pub fn random_table<R: Rng>(rng: &mut R, n_units: usize, m_groups: usize, zero_frac: f64) -> UnitTable {
    let groups = GroupSet::new((0..m_groups).map(|g| format!("g{g}"))).unwrap();
    loop {
        let units: Vec<UnitRecord> = (0..n_units)
            .map(|i| {
                let counts: Vec<f64> = (0..m_groups)
                    .map(|_| {
                        if rng.gen_bool(zero_frac) {
                            0.0
                        } else {
                            rng.gen_range(1..=1000) as f64
                        }
                    })
                    .collect();
                UnitRecord::new(format!("u{i}"), counts).unwrap()
            })
            .collect();
        if units.iter().any(|u| u.total() > 0.0) {
            return UnitTable::new(groups.clone(), units).unwrap();
        }
    }
}

/// Random assignment of the table's units to at most `max_districts`
/// districts.
pub fn random_hierarchy<R: Rng>(rng: &mut R, table: &UnitTable, max_districts: usize) -> Hierarchy {
    let districts = rng.gen_range(1..=max_districts);
    Hierarchy::new(table.units().iter().map(|u| {
        (
            u.unit_id().to_string(),
            format!("d{}", rng.gen_range(0..districts)),
        )
    }))
    .unwrap()
}

/// A region whose unit compositions scatter around a random base
/// composition with multiplicative lognormal noise. Produces the kind of
/// heterogeneous-but-anchored data where deviation-based and
/// diversity-based local indexes visibly disagree.
pub fn noisy_region<R: Rng>(rng: &mut R, n_units: usize, m_groups: usize, sigma: f64) -> UnitTable {
    let groups = GroupSet::new((0..m_groups).map(|g| format!("g{g}"))).unwrap();
    // Flat Dirichlet base via normalized Exp(1) draws, smoothed away from 0.
    let mut base: Vec<f64> = (0..m_groups).map(|_| {
        let e: f64 = Exp1.sample(rng);
        e + 0.0
    }).collect();
    let sum: f64 = base.iter().sum();
    for b in &mut base {
        *b = *b / sum + 0.05;
    }
    let norm: f64 = base.iter().sum();
    for b in &mut base {
        *b /= norm;
    }

    let noise = LogNormal::new(0.0, sigma).unwrap();
    let units = (0..n_units)
        .map(|i| {
            let tau = rng.gen_range(100.0..2000.0);
            let mut weights: Vec<f64> = base.iter().map(|b| b * noise.sample(rng)).collect();
            let wsum: f64 = weights.iter().sum();
            for w in &mut weights {
                *w = *w / wsum * tau;
            }
            UnitRecord::new(format!("u{i}"), weights).unwrap()
        })
        .collect();
    UnitTable::new(groups, units).unwrap()
}
