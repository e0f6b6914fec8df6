//! App3: codebook beam selection on the beamformed layer.

use crate::sim::channel::BeamCodebook;
use crate::sim::controls::BeamChoice;

use super::suite::Plan;

#[derive(Debug, Clone, Default)]
pub struct Beamforming;

/// Codebook index whose steering angle is closest to `bearing`.
pub fn nearest_beam(codebook: &BeamCodebook, bearing: f64) -> usize {
    codebook.nearest(bearing)
}

impl Beamforming {
    pub(crate) fn act(&self, plan: &Plan<'_>) -> Vec<BeamChoice> {
        let radio = plan.radio;
        let mut out = Vec::new();
        for (u, s) in plan.serving.iter().enumerate() {
            let Some(b) = *s else { continue };
            if plan.active[b] && radio.bs_rat(b).beamformed() {
                let index = nearest_beam(radio.codebook(), radio.bearing(b, u));
                out.push(BeamChoice { bs: b, ue: u, index });
            }
        }
        out
    }
}
