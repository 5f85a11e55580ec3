use serde::{Deserialize, Serialize};

use super::{CellSite, Sector};

/// Per-sector settings shared by every site.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SectorTemplate {
    pub antenna_height: f64,
    pub downtilt: f64,
    pub n_elements: usize,
    pub tx_power_dbm: f64,
    /// Azimuth of the first sector; the others follow at +120 and +240 degrees.
    pub first_azimuth: f64,
}

impl Default for SectorTemplate {
    fn default() -> Self {
        Self { antenna_height: 25.0, downtilt: 10.0, n_elements: 8, tx_power_dbm: 20.0, first_azimuth: 30.0 }
    }
}

/// One center site plus up to six on a hexagonal ring of radius `isd`.
pub fn hex_site_positions(center: [f64; 2], isd: f64, count: usize) -> Vec<[f64; 2]> {
    let mut out = vec![center];
    for k in 0..count.saturating_sub(1).min(6) {
        let a = (30.0 + 60.0 * k as f64).to_radians();
        out.push([center[0] + isd * a.cos(), center[1] + isd * a.sin()]);
    }
    out.truncate(count);
    out
}

/// Three-sector sites with sequential cell ids (site-major).
pub fn make_sites(positions: &[[f64; 2]], tpl: &SectorTemplate) -> Vec<CellSite> {
    positions
        .iter()
        .enumerate()
        .map(|(i, &position)| CellSite {
            position,
            antenna_height: tpl.antenna_height,
            sectors: (0..3)
                .map(|s| Sector {
                    cell_id: 3 * i + s,
                    azimuth: (tpl.first_azimuth + 120.0 * s as f64) % 360.0,
                    downtilt: tpl.downtilt,
                    n_elements: tpl.n_elements,
                    tx_power_dbm: tpl.tx_power_dbm,
                })
                .collect(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seven_sites_twenty_one_cells() {
        let sites = make_sites(&hex_site_positions([1000.0, 1000.0], 577.0, 7), &SectorTemplate::default());
        assert_eq!(sites.len(), 7);
        let ids: Vec<usize> = sites.iter().flat_map(|s| s.sectors.iter().map(|c| c.cell_id)).collect();
        assert_eq!(ids, (0..21).collect::<Vec<_>>());
        for s in &sites {
            assert_eq!(s.sectors.len(), 3);
            let d = (s.sectors[1].azimuth - s.sectors[0].azimuth).rem_euclid(360.0);
            assert!((d - 120.0).abs() < 1e-9);
        }
        for p in &sites[1..] {
            let r = (p.position[0] - 1000.0).hypot(p.position[1] - 1000.0);
            assert!((r - 577.0).abs() < 1e-9);
        }
    }
}
