//! Link budget: pathloss, noise, Shannon rate and the beam codebook.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::SimError;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Pathloss distances are clamped below this, in metres.
pub const MIN_DISTANCE_M: f64 = 10.0;

/// Shannon rate `bandwidth * log2(1 + sinr)`.
pub fn link_rate(sinr_linear: f64, bandwidth_hz: f64) -> Result<f64, SimError> {
    if sinr_linear.is_nan() || sinr_linear < 0.0 || bandwidth_hz.is_nan() || bandwidth_hz < 0.0 {
        return Err(SimError::Domain(format!(
            "link_rate needs non-negative inputs, got sinr={sinr_linear}, bandwidth={bandwidth_hz}"
        )));
    }
    Ok(bandwidth_hz * (1.0 + sinr_linear).log2())
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// Log-distance pathloss anchored at free-space loss at 1 m.
pub fn pathloss_db(carrier_hz: f64, exponent: f64, distance_m: f64) -> f64 {
    let d = distance_m.max(MIN_DISTANCE_M);
    let fspl_1m = 20.0 * (4.0 * PI * carrier_hz / SPEED_OF_LIGHT).log10();
    fspl_1m + 10.0 * exponent * d.log10()
}

pub fn thermal_noise_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    -174.0 + 10.0 * bandwidth_hz.log10() + noise_figure_db
}

/// Wraps an angle to `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    let mut x = a % (2.0 * PI);
    if x <= -PI {
        x += 2.0 * PI;
    } else if x > PI {
        x -= 2.0 * PI;
    }
    x
}

/// Beam-steering codebook of a uniform linear array with constant-modulus
/// phase-shifter weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamCodebook {
    num_antennas: usize,
    angles: Vec<f64>,
}

impl BeamCodebook {
    pub fn new(num_antennas: usize, angles: Vec<f64>) -> Result<Self, SimError> {
        if num_antennas == 0 || angles.is_empty() {
            return Err(SimError::Config(
                "beam codebook needs at least one antenna and one vector".into(),
            ));
        }
        Ok(BeamCodebook { num_antennas, angles: angles.into_iter().map(wrap_angle).collect() })
    }

    /// `num_beams` steering angles spread evenly over the full circle.
    pub fn uniform(num_antennas: usize, num_beams: usize) -> Result<Self, SimError> {
        let angles = (0..num_beams)
            .map(|i| -PI + 2.0 * PI * (i as f64 + 0.5) / num_beams as f64)
            .collect();
        BeamCodebook::new(num_antennas, angles)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn num_antennas(&self) -> usize {
        self.num_antennas
    }

    pub fn angle(&self, index: usize) -> f64 {
        self.angles[index]
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Phase-shifter weights of vector `index` (half-wavelength spacing).
    pub fn weights(&self, index: usize) -> Vec<Complex64> {
        let theta = self.angles[index];
        let norm = 1.0 / (self.num_antennas as f64).sqrt();
        (0..self.num_antennas)
            .map(|n| Complex64::from_polar(norm, PI * n as f64 * theta.sin()))
            .collect()
    }

    /// Index of the steering angle nearest `bearing`; ties go to the lower index.
    pub fn nearest(&self, bearing: f64) -> usize {
        let mut best = 0;
        let mut best_err = f64::INFINITY;
        for (i, &a) in self.angles.iter().enumerate() {
            let err = wrap_angle(bearing - a).abs();
            if err < best_err {
                best = i;
                best_err = err;
            }
        }
        best
    }

    pub fn boresight_gain_db(&self) -> f64 {
        linear_to_db(self.num_antennas as f64)
    }

    /// Array gain towards `bearing` with cosine roll-off off boresight.
    pub fn gain_db(&self, index: usize, bearing: f64) -> f64 {
        self.boresight_gain_db() * wrap_angle(bearing - self.angles[index]).cos()
    }
}
