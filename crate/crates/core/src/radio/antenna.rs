//! Sector antenna: directional element pattern times a vertical
//! uniform-linear-array factor electrically steered below the horizon.

use crate::scalar::Scalar;

/// Peak element gain, dBi.
pub const ELEMENT_MAX_GAIN_DBI: f64 = 8.0;
/// Element half-power beamwidth in both planes, degrees.
pub const HALF_POWER_BEAMWIDTH_DEG: f64 = 65.0;
/// Side-lobe / front-to-back attenuation floor, dB.
pub const SIDE_LOBE_FLOOR_DB: f64 = 30.0;
/// Vertical element spacing in wavelengths.
pub const ELEMENT_SPACING_WAVELENGTHS: f64 = 0.5;
/// Array-factor null floor (linear), keeps gains finite in dB.
const ARRAY_NULL_FLOOR: f64 = 1e-6;

/// Wraps an angle in degrees to `(-180, 180]`.
pub fn wrap_deg<T: Scalar>(a: T) -> T {
    let full = T::of(360.0);
    let half = T::of(180.0);
    let mut w = a % full;
    if w > half {
        w = w - full;
    } else if w <= -half {
        w = w + full;
    }
    w
}

/// Vertical element attenuation in dB (non-positive), `theta` being the
/// zenith angle and `theta_peak` the zenith angle of the main lobe.
pub fn vertical_attenuation_db<T: Scalar>(theta_deg: T, theta_peak_deg: T) -> T {
    let r = (theta_deg - theta_peak_deg) / T::of(HALF_POWER_BEAMWIDTH_DEG);
    -(T::of(12.0) * r * r).min(T::of(SIDE_LOBE_FLOOR_DB))
}

/// Horizontal element attenuation in dB for an azimuth offset from boresight.
pub fn horizontal_attenuation_db<T: Scalar>(phi_rel_deg: T) -> T {
    let r = wrap_deg(phi_rel_deg) / T::of(HALF_POWER_BEAMWIDTH_DEG);
    -(T::of(12.0) * r * r).min(T::of(SIDE_LOBE_FLOOR_DB))
}

/// Element gain in dBi.
pub fn element_gain_dbi<T: Scalar>(theta_deg: T, theta_peak_deg: T, phi_rel_deg: T) -> T {
    let combined =
        vertical_attenuation_db(theta_deg, theta_peak_deg) + horizontal_attenuation_db(phi_rel_deg);
    T::of(ELEMENT_MAX_GAIN_DBI) - (-combined).min(T::of(SIDE_LOBE_FLOOR_DB))
}

/// Normalized array power gain in dB, at most `10 log10(n)`, for a vertical
/// ULA phase-steered to `theta_steer`.
pub fn array_gain_db<T: Scalar>(theta_deg: T, theta_steer_deg: T, n_elements: usize) -> T {
    let n = T::of(n_elements as f64);
    let two_pi_d = T::of(2.0 * std::f64::consts::PI * ELEMENT_SPACING_WAVELENGTHS);
    let psi = two_pi_d * (theta_deg.to_radians().cos() - theta_steer_deg.to_radians().cos());
    let half = psi / T::of(2.0);
    let denom = half.sin();
    let af = if denom.abs() < T::of(1e-9) {
        n
    } else {
        let num = (n * half).sin();
        num * num / (n * denom * denom)
    };
    T::of(10.0) * af.max(T::of(ARRAY_NULL_FLOOR)).log10()
}

/// Total sector gain (element + array) toward a point offset `d` from the
/// antenna, in dBi. `azimuth` and `downtilt` in degrees.
pub fn antenna_gain_dbi<T: Scalar>(azimuth_deg: T, downtilt_deg: T, n_elements: usize, d: [T; 3]) -> T {
    let horiz = d[0].hypot(d[1]);
    // zenith angle: 0 straight up, 90 horizon, 180 straight down
    let theta = horiz.atan2(d[2]).to_degrees();
    let phi = d[1].atan2(d[0]).to_degrees();
    let steer = T::of(90.0) + downtilt_deg;
    element_gain_dbi(theta, steer, phi - azimuth_deg) + array_gain_db(theta, steer, n_elements)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boresight_peak() {
        // 10 degree depression along azimuth 30
        let az: f64 = 30.0;
        let d = [az.to_radians().cos() * 100.0, az.to_radians().sin() * 100.0, -100.0 * 10f64.to_radians().tan()];
        let g = antenna_gain_dbi(az, 10.0, 8, d);
        assert!((g - 17.0309).abs() < 0.01, "{g}");
        assert!((g - (8.0 + 10.0 * 8f64.log10())).abs() < 1e-9);
    }

    #[test]
    fn half_power_horizontal_offset() {
        let peak = element_gain_dbi(100.0f64, 100.0, 0.0);
        let off = element_gain_dbi(100.0f64, 100.0, 32.5);
        assert!((peak - off - 3.0).abs() < 1e-12);
        assert!((element_gain_dbi(100.0, 100.0, -32.5) - off).abs() < 1e-12);
    }

    #[test]
    fn back_lobe_floor() {
        assert_eq!(horizontal_attenuation_db(180.0f64), -30.0);
        assert_eq!(element_gain_dbi(100.0f64, 100.0, 180.0), 8.0 - 30.0);
        // combined floor also caps at 30 dB
        assert_eq!(element_gain_dbi(10.0f64, 100.0, 180.0), 8.0 - 30.0);
    }

    #[test]
    fn array_gain_bounded() {
        let cap = 10.0 * 8f64.log10();
        for i in 0..=1800 {
            let theta = i as f64 * 0.1;
            assert!(array_gain_db(theta, 100.0, 8) <= cap + 1e-9);
        }
        assert!((array_gain_db(100.0f64, 100.0, 8) - cap).abs() < 1e-9);
    }

    #[test]
    fn uav_above_site_is_attenuated() {
        // directly overhead: zenith angle 0, far outside the main lobe
        let g = antenna_gain_dbi(0.0f64, 10.0, 8, [1e-3, 0.0, 75.0]);
        assert!(g < 0.0, "{g}");
    }

    #[test]
    fn generic_over_f32() {
        let g32 = antenna_gain_dbi(0.0f32, 10.0, 8, [300.0, 40.0, 75.0]);
        let g64 = antenna_gain_dbi(0.0f64, 10.0, 8, [300.0, 40.0, 75.0]);
        assert!((g32 as f64 - g64).abs() < 1e-3);
    }
}
