use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Steering {
    pub ue: usize,
    pub bs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BeamChoice {
    pub bs: usize,
    pub ue: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PowerChoice {
    pub bs: usize,
    pub index: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Handover {
    pub ue: usize,
    pub source: usize,
    pub target: usize,
}

/// Control outputs of the network applications for one tick.
///
/// Beams, powers and the sleep set apply only to the slot they are passed
/// to; steering and handovers change the persistent UE attachment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AppControls {
    pub steering: Vec<Steering>,
    pub sleep: Vec<usize>,
    pub beams: Vec<BeamChoice>,
    pub power: Vec<PowerChoice>,
    pub handovers: Vec<Handover>,
}

impl AppControls {
    pub fn is_empty(&self) -> bool {
        self.steering.is_empty()
            && self.sleep.is_empty()
            && self.beams.is_empty()
            && self.power.is_empty()
            && self.handovers.is_empty()
    }

    pub fn merge(&mut self, other: AppControls) {
        self.steering.extend(other.steering);
        self.sleep.extend(other.sleep);
        self.sleep.sort_unstable();
        self.sleep.dedup();
        self.beams.extend(other.beams);
        self.power.extend(other.power);
        self.handovers.extend(other.handovers);
    }

    pub fn is_sleeping(&self, bs: usize) -> bool {
        self.sleep.binary_search(&bs).is_ok()
    }

    /// Drops every entry that references a BS in the sleep set and returns
    /// how many were dropped.
    pub fn enforce_sleep_safety(&mut self) -> usize {
        self.sleep.sort_unstable();
        self.sleep.dedup();
        if self.sleep.is_empty() {
            return 0;
        }
        let sleep = std::mem::take(&mut self.sleep);
        let asleep = |b: usize| sleep.binary_search(&b).is_ok();
        let before = self.steering.len() + self.beams.len() + self.power.len() + self.handovers.len();
        self.steering.retain(|s| !asleep(s.bs));
        self.beams.retain(|b| !asleep(b.bs));
        self.power.retain(|p| !asleep(p.bs));
        self.handovers.retain(|h| !asleep(h.source) && !asleep(h.target));
        let after = self.steering.len() + self.beams.len() + self.power.len() + self.handovers.len();
        self.sleep = sleep;
        before - after
    }

    /// True when no sleeping BS is referenced by another control.
    pub fn is_sleep_safe(&self) -> bool {
        let asleep = |b: usize| self.sleep.contains(&b);
        !self.steering.iter().any(|s| asleep(s.bs))
            && !self.beams.iter().any(|b| asleep(b.bs))
            && !self.power.iter().any(|p| asleep(p.bs))
            && !self.handovers.iter().any(|h| asleep(h.source) || asleep(h.target))
    }
}
