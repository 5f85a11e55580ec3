//! Urban-macro path loss for aerial users.

use crate::scalar::Scalar;
use crate::{Error, Result};

pub const MIN_UAV_HEIGHT: f64 = 22.5;
pub const MAX_UAV_HEIGHT: f64 = 300.0;

/// Path loss in dB. `d3d` and `h_ut` in meters, `fc_ghz` in GHz.
pub fn path_loss_db<T: Scalar>(d3d: T, h_ut: T, los: bool, fc_ghz: T) -> Result<T> {
    let h = h_ut.as_f64();
    if !(MIN_UAV_HEIGHT..=MAX_UAV_HEIGHT).contains(&h) {
        return Err(Error::HeightOutOfRange { height: h, min: MIN_UAV_HEIGHT, max: MAX_UAV_HEIGHT });
    }
    let c = T::of;
    Ok(if los {
        c(28.0) + c(22.0) * d3d.log10() + c(20.0) * fc_ghz.log10()
    } else {
        c(-17.5)
            + (c(46.0) - c(7.0) * h_ut.log10()) * d3d.log10()
            + c(20.0) * (c(40.0 * std::f64::consts::PI) * fc_ghz / c(3.0)).log10()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spot_values() {
        assert!((path_loss_db(1000.0f64, 100.0, true, 2.0).unwrap() - 100.0206).abs() < 0.01);
        assert!((path_loss_db(100.0f64, 100.0, true, 2.0).unwrap() - 78.0206).abs() < 0.01);
        assert!((path_loss_db(1000.0f64, 100.0, false, 2.0).unwrap() - 116.9625).abs() < 0.01);
    }

    #[test]
    fn height_validity() {
        assert!(matches!(path_loss_db(100.0f64, 10.0, true, 2.0), Err(Error::HeightOutOfRange { .. })));
        assert!(path_loss_db(100.0f64, 301.0, false, 2.0).is_err());
        assert!(path_loss_db(100.0f64, 22.5, false, 2.0).is_ok());
    }

    #[test]
    fn nlos_exceeds_los_at_distance() {
        for d in [200.0f64, 500.0, 1500.0] {
            assert!(path_loss_db(d, 100.0, false, 2.0).unwrap() > path_loss_db(d, 100.0, true, 2.0).unwrap());
        }
    }
}
