//! Cellular downlink model seen by the UAV: per-cell received power,
//! signal-to-interference ratio and outage probability.

mod antenna;
mod coverage;
mod fading;
mod layout;
mod pathloss;

pub use antenna::{
    antenna_gain_dbi, array_gain_db, element_gain_dbi, horizontal_attenuation_db, vertical_attenuation_db,
    ELEMENT_MAX_GAIN_DBI, HALF_POWER_BEAMWIDTH_DEG,
};
pub use coverage::{outage_oracle_grid, CoverageGrid};
pub use fading::{db_to_linear, draw_fading, draw_fading_into, rayleigh_power, rician_power, FadingDraw};
pub use layout::{hex_site_positions, make_sites, SectorTemplate};
pub use pathloss::{path_loss_db, MAX_UAV_HEIGHT, MIN_UAV_HEIGHT};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::citygen::{los_blocked, EnvRealization};
use crate::geometry::Vec3;
use crate::Result;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sector {
    pub cell_id: usize,
    pub azimuth: f64,
    pub downtilt: f64,
    pub n_elements: usize,
    pub tx_power_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSite {
    pub position: [f64; 2],
    pub antenna_height: f64,
    pub sectors: Vec<Sector>,
}

impl CellSite {
    pub fn antenna_position(&self) -> Vec3 {
        Vec3::new(self.position[0], self.position[1], self.antenna_height)
    }
}

/// Channel and measurement settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub fc_ghz: f64,
    pub gamma_th_db: f64,
    pub rician_k_db: f64,
    /// SIR measurements per location and candidate association.
    pub measurements: usize,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self { fc_ghz: 2.0, gamma_th_db: 0.0, rician_k_db: 15.0, measurements: 1000 }
    }
}

/// Per-cell outage estimates at one location.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementReport {
    pub location: Vec3,
    pub per_assoc_outage: Vec<f64>,
    pub best_assoc: usize,
    pub best_outage: f64,
}

impl MeasurementReport {
    /// Builds a report from per-association outages, picking the lowest
    /// outage (first index on ties).
    pub fn from_per_assoc(location: Vec3, per_assoc_outage: Vec<f64>) -> Self {
        let (best_assoc, best_outage) = per_assoc_outage
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, p)| if p < best.1 { (i, p) } else { best });
        Self { location, per_assoc_outage, best_assoc, best_outage }
    }
}

/// Deterministic part of every link at a location: mean received powers
/// (before fading) and LoS states, indexed by cell id.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkBudget {
    pub mean_power_mw: Vec<f64>,
    pub los: Vec<bool>,
}

impl LinkBudget {
    pub fn num_cells(&self) -> usize {
        self.mean_power_mw.len()
    }
}

pub fn link_budget(env: &EnvRealization, q: Vec3, params: &RadioParams) -> Result<LinkBudget> {
    let m = env.num_cells();
    let mut mean_power_mw = vec![0.0; m];
    let mut los = vec![false; m];
    for site in &env.sites {
        let bs = site.antenna_position();
        let clear = !los_blocked(bs, q, &env.buildings);
        let pl = path_loss_db(bs.dist(q), q.z, clear, params.fc_ghz)?;
        let d = (q - bs).to_array();
        for s in &site.sectors {
            let g = antenna_gain_dbi(s.azimuth, s.downtilt, s.n_elements, d);
            mean_power_mw[s.cell_id] = db_to_linear(s.tx_power_dbm - pl + g);
            los[s.cell_id] = clear;
        }
    }
    Ok(LinkBudget { mean_power_mw, los })
}

/// SIR of serving cell `b` for one fading draw; `+inf` without interferers.
pub fn sir_from_budget(budget: &LinkBudget, b: usize, draw: &FadingDraw) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (m, (&p, &h)) in budget.mean_power_mw.iter().zip(&draw.gains).enumerate() {
        if m == b {
            signal = p * h;
        } else {
            interference += p * h;
        }
    }
    if interference == 0.0 {
        f64::INFINITY
    } else {
        signal / interference
    }
}

pub fn sir_linear(env: &EnvRealization, q: Vec3, b: usize, draw: &FadingDraw, params: &RadioParams) -> Result<f64> {
    Ok(sir_from_budget(&link_budget(env, q, params)?, b, draw))
}

/// Empirical outage for every candidate association from `j` fading draws,
/// each draw shared by all associations.
pub fn outage_from_budget<R: Rng + ?Sized>(
    budget: &LinkBudget,
    location: Vec3,
    j: usize,
    gamma_th_db: f64,
    rician_k_db: f64,
    rng: &mut R,
) -> MeasurementReport {
    let m = budget.num_cells();
    let gamma = db_to_linear(gamma_th_db);
    let k = db_to_linear(rician_k_db);
    let mut gains = Vec::with_capacity(m);
    let mut rx = vec![0.0; m];
    let mut outages = vec![0usize; m];
    for _ in 0..j {
        draw_fading_into(&budget.los, k, rng, &mut gains);
        let mut total = 0.0;
        for ((r, &p), &g) in rx.iter_mut().zip(&budget.mean_power_mw).zip(&gains) {
            *r = p * g;
            total += *r;
        }
        // SIR_b < gamma  <=>  p_b (1 + gamma) < gamma * total
        let rhs = gamma * total;
        for (count, &p) in outages.iter_mut().zip(&rx) {
            if p * (1.0 + gamma) < rhs {
                *count += 1;
            }
        }
    }
    let per_assoc = outages.into_iter().map(|c| c as f64 / j as f64).collect();
    MeasurementReport::from_per_assoc(location, per_assoc)
}

pub fn empirical_outage<R: Rng + ?Sized>(
    env: &EnvRealization,
    q: Vec3,
    params: &RadioParams,
    rng: &mut R,
) -> Result<MeasurementReport> {
    assert!(params.measurements >= 1, "at least one measurement per location");
    let budget = link_budget(env, q, params)?;
    Ok(outage_from_budget(&budget, q, params.measurements, params.gamma_th_db, params.rician_k_db, rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngs::indexed;

    fn budget(p: &[f64]) -> LinkBudget {
        LinkBudget { mean_power_mw: p.to_vec(), los: vec![false; p.len()] }
    }

    #[test]
    fn symmetric_two_cell_sir() {
        let d = FadingDraw { gains: vec![1.0, 1.0] };
        assert_eq!(sir_from_budget(&budget(&[2.0, 2.0]), 0, &d), 1.0);
    }

    #[test]
    fn single_cell_is_interference_free() {
        let d = FadingDraw { gains: vec![0.7] };
        assert_eq!(sir_from_budget(&budget(&[1.0]), 0, &d), f64::INFINITY);
        let mut rng = indexed(1, 1);
        let r = outage_from_budget(&budget(&[1.0]), Vec3::default(), 100, 0.0, 15.0, &mut rng);
        assert_eq!(r.best_outage, 0.0);
    }

    #[test]
    fn report_best_is_min() {
        let r = MeasurementReport::from_per_assoc(Vec3::default(), vec![0.4, 0.1, 0.1, 0.9]);
        assert_eq!(r.best_assoc, 1);
        assert_eq!(r.best_outage, 0.1);
    }

    #[test]
    fn mean_of_indicators() {
        // four draws with indicators (1, 0, 0, 1) on association 0
        let r = MeasurementReport::from_per_assoc(Vec3::default(), vec![2.0 / 4.0]);
        assert_eq!(r.best_outage, 0.5);
    }

    #[test]
    fn scale_invariance_and_extra_interferer() {
        let d = FadingDraw { gains: vec![0.3, 1.7, 0.9] };
        let s1 = sir_from_budget(&budget(&[1.0, 2.0, 0.0]), 0, &d);
        let s2 = sir_from_budget(&budget(&[10.0, 20.0, 0.0]), 0, &d);
        assert!((s1 - s2).abs() < 1e-12 * s1);
        let s3 = sir_from_budget(&budget(&[1.0, 2.0, 0.5]), 0, &d);
        assert!(s3 <= s1);
    }

    #[test]
    fn deterministic_with_seed() {
        let b = budget(&[1.0, 0.6, 0.2]);
        let a = outage_from_budget(&b, Vec3::default(), 500, 0.0, 15.0, &mut indexed(9, 2));
        let c = outage_from_budget(&b, Vec3::default(), 500, 0.0, 15.0, &mut indexed(9, 2));
        assert_eq!(a, c);
        assert!(a.per_assoc_outage.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(a.per_assoc_outage.iter().all(|&p| a.best_outage <= p));
    }
}
