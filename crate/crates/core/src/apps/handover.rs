//! App5: handovers that lower the estimated energy per delivered bit.

use crate::sim::controls::Handover;

use super::suite::Plan;

#[derive(Debug, Clone, Default)]
pub struct HandoverManager;

impl HandoverManager {
    /// Estimated joules per bit of serving `u` from `b`: BS power draw over
    /// the link's full-band Shannon rate.
    pub(crate) fn energy_per_bit(plan: &Plan<'_>, u: usize, b: usize) -> f64 {
        let radio = plan.radio;
        let p = radio.energy_params(b).power_w(true, plan.powers_dbm[b]);
        let rate = radio.bandwidth_hz(b) * (1.0 + plan.sinr_estimate(u, b)).log2();
        if rate > 0.0 { p / rate } else { f64::INFINITY }
    }

    pub(crate) fn act(&self, plan: &mut Plan<'_>) -> Vec<Handover> {
        let nb = plan.radio.num_bs();
        let mut out = Vec::new();
        for u in 0..plan.serving.len() {
            let Some(s) = plan.serving[u] else { continue };
            let here = Self::energy_per_bit(plan, u, s);
            let mut best = (s, here);
            for b in 0..nb {
                if b == s || !plan.active[b] {
                    continue;
                }
                let e = Self::energy_per_bit(plan, u, b);
                if e < best.1 {
                    best = (b, e);
                }
            }
            if best.0 != s && best.1 < here {
                plan.serving[u] = Some(best.0);
                out.push(Handover { ue: u, source: s, target: best.0 });
            }
        }
        out
    }
}
