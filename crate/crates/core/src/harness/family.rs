use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{adm_mass, mtau_distance, WeightedNormSpec};
use crate::error::Result;
use crate::geometry::RadialGrid;
use crate::initialdata::{convergent_family, family_limit, InitialDataSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyMember {
    pub k: u32,
    pub mass: f64,
    /// `‖g_k - g_∞‖` in the `W^{k,q}_τ + L^1(R)` norm.
    pub distance: f64,
    /// `|m(g_k) - m(g_∞)| / (C ‖g_k - g_∞‖) - 1`, clipped at zero.
    pub violation: f64,
}

/// Mass differences against distances to the limit, with the least-squares
/// constant `C` of `|Δm| ≈ C ‖Δg‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub limit_mass: f64,
    pub constant: f64,
    pub max_violation: f64,
    pub members: Vec<FamilyMember>,
}

impl FamilyReport {
    /// Ratios `‖g_{k+1} - g_∞‖ / ‖g_k - g_∞‖`.
    pub fn distance_ratios(&self) -> Vec<f64> {
        self.members.windows(2).map(|w| w[1].distance / w[0].distance).collect()
    }
}

pub fn family_continuity(base: &InitialDataSpec, grid: Arc<RadialGrid>, members: u32) -> Result<FamilyReport> {
    let limit = family_limit(base, grid.clone())?;
    let limit_mass = adm_mass(&limit)?.extrapolated;
    let spec = WeightedNormSpec::default_for(limit.dim(), limit.profile().tau);
    let mut rows = Vec::with_capacity(members as usize);
    for k in 0..members {
        let g = convergent_family(base, k, grid.clone())?;
        let mass = adm_mass(&g)?.extrapolated;
        let distance = mtau_distance(&g, &limit, &spec)?.total;
        rows.push(FamilyMember { k, mass, distance, violation: 0.0 });
    }
    let (num, den) = rows
        .iter()
        .fold((0.0, 0.0), |(n, d), m| (n + m.distance * (m.mass - limit_mass).abs(), d + m.distance * m.distance));
    let constant = if den > 0.0 { num / den } else { 0.0 };
    for m in &mut rows {
        let bound = constant * m.distance;
        let diff = (m.mass - limit_mass).abs();
        m.violation = if bound > 0.0 {
            (diff / bound - 1.0).max(0.0)
        } else if diff > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
    }
    let max_violation = rows.iter().map(|m| m.violation).fold(0.0, f64::max);
    Ok(FamilyReport { limit_mass, constant, max_violation, members: rows })
}
