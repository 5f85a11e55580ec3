//! Unit-mean small-scale fading power gains.

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

/// One realization of the per-cell fading power gains.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FadingDraw {
    pub gains: Vec<f64>,
}

/// Rician power gain with linear K-factor, unit mean. `K = inf` is the
/// deterministic pure line-of-sight limit.
pub fn rician_power<R: Rng + ?Sized>(k_linear: f64, rng: &mut R) -> f64 {
    if k_linear.is_infinite() {
        return 1.0;
    }
    let los = (k_linear / (k_linear + 1.0)).sqrt();
    let sigma = (0.5 / (k_linear + 1.0)).sqrt();
    let re = los + sigma * rng.sample::<f64, _>(StandardNormal);
    let im = sigma * rng.sample::<f64, _>(StandardNormal);
    re * re + im * im
}

/// Rayleigh amplitude, i.e. unit-mean exponential power.
pub fn rayleigh_power<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Exp1)
}

/// Fills `out` with one draw per cell: Rician for LoS links, Rayleigh otherwise.
pub fn draw_fading_into<R: Rng + ?Sized>(los: &[bool], k_linear: f64, rng: &mut R, out: &mut Vec<f64>) {
    out.clear();
    out.extend(los.iter().map(|&l| if l { rician_power(k_linear, rng) } else { rayleigh_power(rng) }));
}

pub fn draw_fading<R: Rng + ?Sized>(los: &[bool], rician_k_db: f64, rng: &mut R) -> FadingDraw {
    let mut gains = Vec::with_capacity(los.len());
    draw_fading_into(los, db_to_linear(rician_k_db), rng, &mut gains);
    FadingDraw { gains }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rngs::indexed;

    const N: usize = 1_000_000;

    #[test]
    fn rayleigh_median_ln2() {
        let mut rng = indexed(3, 0);
        let mut v: Vec<f64> = (0..N).map(|_| rayleigh_power(&mut rng)).collect();
        v.sort_by(f64::total_cmp);
        let median = v[N / 2];
        assert!((median - std::f64::consts::LN_2).abs() / std::f64::consts::LN_2 < 0.01);
    }

    #[test]
    fn unit_mean_power() {
        let mut rng = indexed(4, 0);
        let k = db_to_linear(15.0);
        let ray = (0..N).map(|_| rayleigh_power(&mut rng)).sum::<f64>() / N as f64;
        let ric = (0..N).map(|_| rician_power(k, &mut rng)).sum::<f64>() / N as f64;
        assert!((ray - 1.0).abs() < 0.005, "{ray}");
        assert!((ric - 1.0).abs() < 0.005, "{ric}");
    }

    #[test]
    fn pure_los_limit() {
        let mut rng = indexed(5, 0);
        assert_eq!(rician_power(f64::INFINITY, &mut rng), 1.0);
        let d = draw_fading(&[true, true], f64::INFINITY, &mut rng);
        assert_eq!(d.gains, vec![1.0, 1.0]);
        // very large K concentrates around 1
        let spread = (0..1000).map(|_| (rician_power(1e8, &mut rng) - 1.0).abs()).fold(0.0, f64::max);
        assert!(spread < 1e-3);
    }

    #[test]
    fn gains_nonnegative() {
        let mut rng = indexed(6, 0);
        let d = draw_fading(&[true, false, true, false], 15.0, &mut rng);
        assert!(d.gains.iter().all(|&g| g >= 0.0));
    }
}
