//! App4: greedy power allocation on an estimated full-buffer sum rate.

use crate::sim::controls::PowerChoice;
use crate::sim::Radio;

use super::suite::Plan;

/// Coordinate passes before giving up on convergence.
const MAX_PASSES: usize = 4;

#[derive(Debug, Clone, Default)]
pub struct PowerAllocation;

/// Full-buffer Shannon sum rate with equal bandwidth split per serving BS.
pub fn sum_rate(
    radio: &Radio<'_>,
    serving: &[Option<usize>],
    active: &[bool],
    powers_dbm: &[f64],
    beam_gain_db: impl Fn(usize, usize) -> f64,
) -> f64 {
    let nb = radio.num_bs();
    let mut attached = vec![0usize; nb];
    for &b in serving.iter().flatten() {
        attached[b] += 1;
    }
    let mut total = 0.0;
    for (u, s) in serving.iter().enumerate() {
        let Some(b) = *s else { continue };
        if !active[b] {
            continue;
        }
        let sinr = radio.sinr_linear(u, b, powers_dbm, active, beam_gain_db(b, u));
        total += radio.bandwidth_hz(b) / attached[b] as f64 * (1.0 + sinr).log2();
    }
    total
}

/// Greedy coordinate ascent over per-BS power indices: each pass tries every
/// level of every BS in turn, keeping strict improvements, until a pass
/// changes nothing.
pub fn greedy_power(levels: &[usize], start: &[usize], mut objective: impl FnMut(&[usize]) -> f64) -> Vec<usize> {
    let mut idx = start.to_vec();
    let mut best = objective(&idx);
    for _ in 0..MAX_PASSES {
        let mut improved = false;
        for b in 0..idx.len() {
            let keep = idx[b];
            let mut pick = keep;
            for l in 0..levels[b] {
                if l == keep {
                    continue;
                }
                idx[b] = l;
                let v = objective(&idx);
                if v > best {
                    best = v;
                    pick = l;
                    improved = true;
                }
            }
            idx[b] = pick;
        }
        if !improved {
            break;
        }
    }
    idx
}

impl PowerAllocation {
    pub(crate) fn act(&self, plan: &Plan<'_>) -> Vec<PowerChoice> {
        let radio = plan.radio;
        let nb = radio.num_bs();
        let levels: Vec<usize> = (0..nb).map(|b| radio.power_levels(b).len()).collect();
        let start: Vec<usize> = (0..nb).map(|b| radio.default_power_index(b)).collect();
        let mut powers: Vec<f64> = (0..nb).map(|b| radio.power_levels(b)[start[b]]).collect();
        let beams = |b: usize, u: usize| if plan.beams_on { radio.best_beam_gain_db(b, u) } else { 0.0 };
        let chosen = greedy_power(&levels, &start, |idx| {
            for b in 0..nb {
                powers[b] = radio.power_levels(b)[idx[b]];
            }
            sum_rate(&radio, &plan.serving, &plan.active, &powers, beams)
        });
        (0..nb)
            .filter(|&b| plan.active[b])
            .map(|b| PowerChoice { bs: b, index: chosen[b] })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn higher_level_chosen_when_it_helps() {
        let pick = greedy_power(&[2], &[0], |i| [1.0, 2.0][i[0]]);
        assert_eq!(pick, vec![1]);
        let pick = greedy_power(&[2], &[0], |i| [2.0, 1.0][i[0]]);
        assert_eq!(pick, vec![0]);
    }

    #[test]
    fn coordinate_ascent_reaches_separable_optimum() {
        let w = [[0.0, 3.0, 1.0], [2.0, 0.0, 5.0], [1.0, 1.0, 1.5]];
        let pick = greedy_power(&[3, 3, 3], &[0, 0, 0], |i| (0..3).map(|b| w[b][i[b]]).sum());
        assert_eq!(pick, vec![1, 2, 2]);
    }
}
