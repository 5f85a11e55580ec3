//! Urban building realization and line-of-sight blockage.
//!
//! Buildings are square footprints laid on a regular lattice whose size is
//! chosen so that the building density and the built-up land fraction match
//! the statistical parameters exactly. Heights are Rayleigh distributed and
//! clipped.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::Open01;
use serde::{Deserialize, Serialize};

use crate::geometry::{Bounds, Vec3};
use crate::radio::CellSite;
use crate::rngs::SimRng;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BuildingParams {
    /// Fraction of land covered by buildings.
    pub alpha_bd: f64,
    /// Buildings per square kilometer.
    pub beta_bd: f64,
    /// Mean of the Rayleigh height distribution, meters.
    pub sigma_bd: f64,
    pub height_cap: f64,
    pub area_x: f64,
    pub area_y: f64,
}

impl Default for BuildingParams {
    fn default() -> Self {
        Self { alpha_bd: 0.3, beta_bd: 300.0, sigma_bd: 50.0, height_cap: 90.0, area_x: 2000.0, area_y: 2000.0 }
    }
}

impl BuildingParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidBuildingParams(m.to_string()));
        if !(self.alpha_bd > 0.0 && self.alpha_bd <= 1.0) {
            return bad("alpha_bd must lie in (0, 1]");
        }
        if !(self.beta_bd > 0.0) {
            return bad("beta_bd must be positive");
        }
        if !(self.sigma_bd > 0.0) {
            return bad("sigma_bd must be positive");
        }
        if !(self.height_cap > 0.0) {
            return bad("height_cap must be positive");
        }
        if !(self.area_x > 0.0 && self.area_y > 0.0) {
            return bad("area extent must be positive");
        }
        Ok(())
    }

    /// Nominal lattice pitch `1000 / sqrt(beta)` in meters.
    pub fn nominal_pitch(&self) -> f64 {
        1000.0 / self.beta_bd.sqrt()
    }

    /// Square footprint side `1000 * sqrt(alpha / beta)` in meters.
    pub fn side(&self) -> f64 {
        1000.0 * (self.alpha_bd / self.beta_bd).sqrt()
    }

    /// Number of buildings in the region, `beta * area`.
    pub fn count(&self) -> usize {
        (self.beta_bd * self.area_x * self.area_y / 1.0e6).round() as usize
    }

    /// Rayleigh scale parameter giving mean `sigma_bd`.
    pub fn rayleigh_scale(&self) -> f64 {
        self.sigma_bd * (2.0 / std::f64::consts::PI).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Building {
    pub center: [f64; 2],
    pub half_side: f64,
    pub height: f64,
}

/// The fixed world: buildings, cell sites and the flight airspace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvRealization {
    pub params: BuildingParams,
    pub seed: u64,
    pub buildings: Vec<Building>,
    pub sites: Vec<CellSite>,
    pub bounds: Bounds,
}

impl EnvRealization {
    pub fn num_cells(&self) -> usize {
        self.sites.iter().map(|s| s.sectors.len()).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = self.to_json()?;
        text.push('\n');
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })
    }
}

/// One Rayleigh draw with the given scale; strictly positive.
pub fn sample_rayleigh(scale: f64, rng: &mut SimRng) -> f64 {
    let u: f64 = rng.sample(Open01);
    scale * (-2.0 * u.ln()).sqrt()
}

/// Lays out `beta * area` square buildings on a lattice covering the region.
///
/// The lattice has `ceil(area / nominal_pitch)` slots per axis (grown if the
/// slot count falls short of the building count); surplus slots are left
/// empty by a seeded selection. Footprint side and count are exact, so the
/// covered fraction is exactly `alpha_bd`.
pub fn generate_buildings(params: &BuildingParams, seed: u64) -> Result<Vec<Building>> {
    params.validate()?;
    let side = params.side();
    let nominal = params.nominal_pitch();
    if side > nominal {
        return Err(Error::InvalidBuildingParams(format!(
            "footprint side {side:.3} m exceeds lattice pitch {nominal:.3} m"
        )));
    }
    let n = params.count();
    let mut nx = ((params.area_x / nominal).ceil() as usize).max(1);
    let mut ny = ((params.area_y / nominal).ceil() as usize).max(1);
    while nx * ny < n {
        if params.area_x / nx as f64 >= params.area_y / ny as f64 {
            nx += 1;
        } else {
            ny += 1;
        }
    }
    let pitch_x = params.area_x / nx as f64;
    let pitch_y = params.area_y / ny as f64;
    if side > pitch_x || side > pitch_y {
        return Err(Error::InvalidBuildingParams(format!(
            "footprint side {side:.3} m exceeds fitted lattice pitch ({pitch_x:.3}, {pitch_y:.3}) m"
        )));
    }

    let mut rng = crate::rngs::indexed(seed, 0);
    let mut slots: Vec<usize> = (0..nx * ny).collect();
    slots.shuffle(&mut rng);
    slots.truncate(n);
    slots.sort_unstable();

    let scale = params.rayleigh_scale();
    let buildings = slots
        .into_iter()
        .map(|slot| {
            let (i, j) = (slot % nx, slot / nx);
            let height = sample_rayleigh(scale, &mut rng).min(params.height_cap);
            Building {
                center: [(i as f64 + 0.5) * pitch_x, (j as f64 + 0.5) * pitch_y],
                half_side: side / 2.0,
                height,
            }
        })
        .collect();
    Ok(buildings)
}

/// Parameter interval `[t0, t1]` of the 2D segment `a + t (b - a)`, `t` in
/// `[0, 1]`, inside the footprint, if any.
fn footprint_crossing(a: Vec3, b: Vec3, bld: &Building) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    let axes = [(a.x, b.x - a.x, bld.center[0]), (a.y, b.y - a.y, bld.center[1])];
    for (origin, delta, center) in axes {
        let (lo, hi) = (center - bld.half_side, center + bld.half_side);
        if delta.abs() < 1e-12 {
            if origin < lo || origin > hi {
                return None;
            }
        } else {
            let (mut ta, mut tb) = ((lo - origin) / delta, (hi - origin) / delta);
            if ta > tb {
                std::mem::swap(&mut ta, &mut tb);
            }
            t0 = t0.max(ta);
            t1 = t1.min(tb);
            if t0 > t1 {
                return None;
            }
        }
    }
    Some((t0, t1))
}

/// True iff the segment between `p1` and `p2` passes through a building.
pub fn los_blocked(p1: Vec3, p2: Vec3, buildings: &[Building]) -> bool {
    let (min_x, max_x) = (p1.x.min(p2.x), p1.x.max(p2.x));
    let (min_y, max_y) = (p1.y.min(p2.y), p1.y.max(p2.y));
    buildings.iter().any(|bld| {
        let [cx, cy] = bld.center;
        if cx + bld.half_side < min_x
            || cx - bld.half_side > max_x
            || cy + bld.half_side < min_y
            || cy - bld.half_side > max_y
        {
            return false;
        }
        match footprint_crossing(p1, p2, bld) {
            // the segment height is linear in t, so its minimum over the
            // crossing sits at one of the two ends
            Some((t0, t1)) => {
                let z0 = p1.z + t0 * (p2.z - p1.z);
                let z1 = p1.z + t1 * (p2.z - p1.z);
                z0.min(z1) < bld.height
            }
            None => false,
        }
    })
}

pub fn max_height(buildings: &[Building]) -> f64 {
    buildings.iter().map(|b| b.height).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn default_params(area: f64) -> BuildingParams {
        BuildingParams {
            alpha_bd: 0.3,
            beta_bd: 300.0,
            sigma_bd: 50.0,
            height_cap: 90.0,
            area_x: area,
            area_y: area,
        }
    }

    #[test]
    fn count_matches_density() {
        let b = generate_buildings(&default_params(2000.0), 7).unwrap();
        assert_eq!(b.len(), 1200);
        let b = generate_buildings(&default_params(1000.0), 7).unwrap();
        assert_eq!(b.len(), 300);
    }

    #[test]
    fn side_and_pitch() {
        let p = default_params(2000.0);
        assert!((p.side() - 31.6228).abs() < 1e-3);
        assert!((p.nominal_pitch() - 57.735).abs() < 1e-3);
    }

    #[test]
    fn covered_fraction_is_alpha() {
        let p = default_params(2000.0);
        let b = generate_buildings(&p, 3).unwrap();
        let covered: f64 = b.iter().map(|b| (2.0 * b.half_side).powi(2)).sum();
        assert!((covered / (p.area_x * p.area_y) - 0.3).abs() < 1e-12);
    }

    #[test]
    fn footprints_inside_region_and_heights_capped() {
        let p = default_params(1000.0);
        for b in generate_buildings(&p, 11).unwrap() {
            assert!(b.center[0] - b.half_side >= 0.0 && b.center[0] + b.half_side <= 1000.0);
            assert!(b.center[1] - b.half_side >= 0.0 && b.center[1] + b.half_side <= 1000.0);
            assert!(b.height > 0.0 && b.height <= 90.0);
        }
    }

    #[test]
    fn rayleigh_mean_matches_sigma() {
        let p = default_params(1000.0);
        let mut rng = crate::rngs::indexed(1, 1);
        let n = 100_000;
        let mean = (0..n).map(|_| sample_rayleigh(p.rayleigh_scale(), &mut rng)).sum::<f64>() / n as f64;
        assert!((mean - 50.0).abs() / 50.0 < 0.02, "mean {mean}");
    }

    #[test]
    fn rejects_overlapping_footprints() {
        let mut p = default_params(1000.0);
        p.alpha_bd = 1.0;
        p.beta_bd = 300.0;
        // side == nominal pitch is allowed, but the fitted lattice is tighter
        assert!(generate_buildings(&p, 1).is_err());
        p.alpha_bd = 0.0;
        assert!(matches!(generate_buildings(&p, 1), Err(Error::InvalidBuildingParams(_))));
    }

    #[test]
    fn deterministic_per_seed() {
        let p = default_params(1000.0);
        assert_eq!(generate_buildings(&p, 5).unwrap(), generate_buildings(&p, 5).unwrap());
        assert_ne!(generate_buildings(&p, 5).unwrap(), generate_buildings(&p, 6).unwrap());
    }

    fn one_building(height: f64) -> Vec<Building> {
        vec![Building { center: [100.0, 0.0], half_side: 15.0, height }]
    }

    #[test]
    fn blockage_examples() {
        let bs = Vec3::new(0.0, 0.0, 25.0);
        assert!(!los_blocked(bs, Vec3::new(200.0, 0.0, 100.0), &[]));
        // crossing heights 56.9..68.1 m clear a 50 m roof
        assert!(!los_blocked(bs, Vec3::new(200.0, 0.0, 100.0), &one_building(50.0)));
        // crossing heights 27.1..27.9 m hit it
        assert!(los_blocked(bs, Vec3::new(200.0, 0.0, 30.0), &one_building(50.0)));
    }

    #[test]
    fn vertical_segment_inside_footprint() {
        let b = one_building(50.0);
        assert!(los_blocked(Vec3::new(100.0, 0.0, 10.0), Vec3::new(100.0, 0.0, 120.0), &b));
        assert!(!los_blocked(Vec3::new(100.0, 0.0, 60.0), Vec3::new(100.0, 0.0, 120.0), &b));
    }

    fn arb_point() -> impl Strategy<Value = Vec3> {
        (-50.0..250.0f64, -100.0..100.0f64, 0.0..150.0f64).prop_map(|(x, y, z)| Vec3::new(x, y, z))
    }

    proptest! {
        #[test]
        fn blockage_is_symmetric(a in arb_point(), b in arb_point(), h in 1.0..120.0f64) {
            let bl = one_building(h);
            prop_assert_eq!(los_blocked(a, b, &bl), los_blocked(b, a, &bl));
        }

        #[test]
        fn blockage_monotone_in_height(a in arb_point(), b in arb_point(), h in 1.0..100.0f64, dh in 0.0..50.0f64) {
            if los_blocked(a, b, &one_building(h)) {
                prop_assert!(los_blocked(a, b, &one_building(h + dh)));
            }
        }

        #[test]
        fn endpoints_above_roofs_never_blocked(a in arb_point(), b in arb_point(), h in 1.0..100.0f64) {
            let lift = Vec3::new(0.0, 0.0, h + 1.0);
            let (a, b) = (Vec3::new(a.x, a.y, 0.0) + lift, Vec3::new(b.x, b.y, a.z) + lift);
            prop_assert!(!los_blocked(a, b, &one_building(h)));
        }
    }
}
