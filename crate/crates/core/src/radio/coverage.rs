//! Coverage (1 - outage) maps sampled on a regular horizontal grid.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use super::{link_budget, outage_from_budget, RadioParams};
use crate::citygen::EnvRealization;
use crate::geometry::{Bounds, Vec3};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageGrid {
    pub x0: f64,
    pub y0: f64,
    pub pitch: f64,
    pub nx: usize,
    pub ny: usize,
    pub altitude: f64,
    /// Row-major by y, then x.
    pub coverage: Vec<f64>,
}

impl CoverageGrid {
    /// Grid over the horizontal extent of `bounds`, `extent / pitch + 1`
    /// points per axis, filled from `f(point) -> coverage`.
    pub fn from_fn<F>(bounds: &Bounds, altitude: f64, pitch: f64, f: F) -> Result<Self>
    where
        F: Fn(Vec3, usize) -> Result<f64> + Sync,
    {
        let (nx, ny) = Self::dims(bounds, pitch)?;
        let (x0, y0) = (bounds.lower.x, bounds.lower.y);
        let coverage = (0..nx * ny)
            .into_par_iter()
            .map(|idx| {
                let q = Vec3::new(x0 + (idx % nx) as f64 * pitch, y0 + (idx / nx) as f64 * pitch, altitude);
                f(q, idx)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { x0, y0, pitch, nx, ny, altitude, coverage })
    }

    pub fn dims(bounds: &Bounds, pitch: f64) -> Result<(usize, usize)> {
        if !(pitch > 0.0) {
            return Err(Error::InvalidConfig(format!("grid pitch {pitch} must be positive")));
        }
        let n = |extent: f64| (extent / pitch + 1e-9).floor() as usize + 1;
        Ok((n(bounds.width()), n(bounds.depth())))
    }

    pub fn len(&self) -> usize {
        self.coverage.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coverage.is_empty()
    }

    pub fn point(&self, idx: usize) -> Vec3 {
        Vec3::new(
            self.x0 + (idx % self.nx) as f64 * self.pitch,
            self.y0 + (idx / self.nx) as f64 * self.pitch,
            self.altitude,
        )
    }

    /// Index of the grid point nearest to `(x, y)`, clamped to the grid.
    pub fn nearest_index(&self, x: f64, y: f64) -> usize {
        let i = ((x - self.x0) / self.pitch).round().clamp(0.0, (self.nx - 1) as f64) as usize;
        let j = ((y - self.y0) / self.pitch).round().clamp(0.0, (self.ny - 1) as f64) as usize;
        j * self.nx + i
    }

    pub fn coverage_at(&self, x: f64, y: f64) -> f64 {
        self.coverage[self.nearest_index(x, y)]
    }

    pub fn outage_at(&self, x: f64, y: f64) -> f64 {
        1.0 - self.coverage_at(x, y)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(32 * self.len() + 16);
        s.push_str("x,y,coverage\n");
        for (idx, c) in self.coverage.iter().enumerate() {
            let q = self.point(idx);
            let _ = writeln!(s, "{:.3},{:.3},{:.6}", q.x, q.y, c);
        }
        s
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Parses the `x,y,coverage` schema written by [`CoverageGrid::to_csv`].
    pub fn load_csv(path: &Path, altitude: f64) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingInput(path.to_path_buf()));
        }
        let bad = |msg: String| Error::Malformed { path: path.to_path_buf(), msg };
        let text = std::fs::read_to_string(path)?;
        let mut lines = text.lines();
        if lines.next() != Some("x,y,coverage") {
            return Err(bad("expected header `x,y,coverage`".into()));
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate() {
            let vals: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| bad(format!("row {}: {e}", n + 2)))?;
            if vals.len() != 3 {
                return Err(bad(format!("row {}: expected 3 fields", n + 2)));
            }
            rows.push([vals[0], vals[1], vals[2]]);
        }
        if rows.is_empty() {
            return Err(bad("no rows".into()));
        }
        let nx = rows.iter().take_while(|r| r[1] == rows[0][1]).count();
        if rows.len() % nx != 0 {
            return Err(bad("ragged grid".into()));
        }
        let pitch = if nx > 1 { rows[1][0] - rows[0][0] } else { rows.get(nx).map_or(1.0, |r| r[1] - rows[0][1]) };
        Ok(Self {
            x0: rows[0][0],
            y0: rows[0][1],
            pitch,
            nx,
            ny: rows.len() / nx,
            altitude,
            coverage: rows.iter().map(|r| r[2]).collect(),
        })
    }
}

/// Monte-Carlo ground-truth coverage under the best association. Each grid
/// point draws from its own stream keyed by `(seed, index)`, so the result
/// does not depend on evaluation order.
pub fn outage_oracle_grid(
    env: &EnvRealization,
    params: &RadioParams,
    altitude: f64,
    pitch: f64,
    n_samples: usize,
    seed: u64,
) -> Result<CoverageGrid> {
    CoverageGrid::from_fn(&env.bounds, altitude, pitch, |q, idx| {
        let budget = link_budget(env, q, params)?;
        let mut rng = crate::rngs::indexed(seed, idx as u64);
        let report = outage_from_budget(&budget, q, n_samples, params.gamma_th_db, params.rician_k_db, &mut rng);
        Ok(1.0 - report.best_outage)
    })
}
