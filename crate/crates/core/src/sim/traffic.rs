//! Packet arrival processes for the four traffic classes.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Pareto, Uniform};
use serde::{Deserialize, Serialize};

use super::SimError;

/// Shape of the Pareto inter-arrival law used for video. The scale is solved
/// from the configured mean.
pub const PARETO_SHAPE: f64 = 1.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrafficKind {
    Video,
    Gaming,
    Voice,
    Urllc,
}

impl TrafficKind {
    pub const ALL: [TrafficKind; 4] = [
        TrafficKind::Video,
        TrafficKind::Gaming,
        TrafficKind::Voice,
        TrafficKind::Urllc,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn as_str(self) -> &'static str {
        match self {
            TrafficKind::Video => "video",
            TrafficKind::Gaming => "gaming",
            TrafficKind::Voice => "voice",
            TrafficKind::Urllc => "urllc",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        TrafficKind::ALL.into_iter().find(|k| k.as_str() == s)
    }
}

impl std::fmt::Display for TrafficKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InterArrival {
    Pareto,
    Uniform,
    Poisson,
}

impl InterArrival {
    /// Relative error allowed between the empirical mean gap and the
    /// configured mean, and the sample size it is stated for. The Pareto
    /// law has infinite variance at shape 1.5, hence the wider band.
    pub fn mean_tolerance(self) -> (f64, usize) {
        match self {
            InterArrival::Pareto => (0.10, 1_000_000),
            InterArrival::Uniform | InterArrival::Poisson => (0.05, 100_000),
        }
    }
}

/// A traffic class: arrival law plus fixed packet size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficClass {
    pub kind: TrafficKind,
    pub mean_interarrival_s: f64,
    pub distribution: InterArrival,
    pub packet_bits: f64,
}

impl TrafficClass {
    pub fn default_for(kind: TrafficKind) -> Self {
        let (mean, distribution, bytes) = match kind {
            TrafficKind::Video => (0.0125, InterArrival::Pareto, 1500.0),
            TrafficKind::Gaming => (0.040, InterArrival::Uniform, 1500.0),
            TrafficKind::Voice => (0.020, InterArrival::Poisson, 500.0),
            TrafficKind::Urllc => (0.0005, InterArrival::Poisson, 256.0),
        };
        TrafficClass {
            kind,
            mean_interarrival_s: mean,
            distribution,
            packet_bits: bytes * 8.0,
        }
    }

    /// Mean offered rate of one UE of this class, in bit/s.
    pub fn offered_bps(&self) -> f64 {
        self.packet_bits / self.mean_interarrival_s
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.mean_interarrival_s > 0.0 && self.mean_interarrival_s.is_finite()) {
            return Err(SimError::Config(format!(
                "{}: mean inter-arrival must be positive, got {}",
                self.kind, self.mean_interarrival_s
            )));
        }
        if !(self.packet_bits > 0.0 && self.packet_bits.is_finite()) {
            return Err(SimError::Config(format!(
                "{}: packet size must be positive, got {}",
                self.kind, self.packet_bits
            )));
        }
        Ok(())
    }

    pub fn gap_sampler(&self) -> Result<GapSampler, SimError> {
        self.validate()?;
        let mean = self.mean_interarrival_s;
        let sampler = match self.distribution {
            InterArrival::Pareto => {
                let scale = mean * (PARETO_SHAPE - 1.0) / PARETO_SHAPE;
                GapSampler::Pareto(
                    Pareto::new(scale, PARETO_SHAPE)
                        .map_err(|e| SimError::Config(format!("pareto: {e}")))?,
                )
            }
            InterArrival::Uniform => GapSampler::Uniform(
                Uniform::new_inclusive(0.5 * mean, 1.5 * mean)
                    .map_err(|e| SimError::Config(format!("uniform: {e}")))?,
            ),
            InterArrival::Poisson => GapSampler::Exp(
                Exp::new(1.0 / mean).map_err(|e| SimError::Config(format!("exp: {e}")))?,
            ),
        };
        Ok(sampler)
    }
}

/// Inter-arrival gap sampler. Every sample is strictly positive.
#[derive(Debug, Clone)]
pub enum GapSampler {
    Pareto(Pareto<f64>),
    Uniform(Uniform<f64>),
    Exp(Exp<f64>),
}

impl GapSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        loop {
            let g = match self {
                GapSampler::Pareto(d) => d.sample(rng),
                GapSampler::Uniform(d) => d.sample(rng),
                GapSampler::Exp(d) => d.sample(rng),
            };
            if g > 0.0 && g.is_finite() {
                return g;
            }
        }
    }
}

/// Deterministic RNG stream for a traffic class, derived from the run seed.
pub fn class_stream(seed: u64, kind: TrafficKind) -> ChaCha8Rng {
    stream(seed, 0x7400 + kind.index() as u64)
}

/// Independent ChaCha stream `id` under `seed`.
pub fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Arrival timestamps on `(0, horizon]`, strictly increasing.
pub fn generate_arrivals<R: Rng + ?Sized>(
    class: &TrafficClass,
    horizon: f64,
    rng: &mut R,
) -> Result<Vec<f64>, SimError> {
    if !(horizon > 0.0 && horizon.is_finite()) {
        return Err(SimError::Config(format!(
            "arrival horizon must be positive, got {horizon}"
        )));
    }
    let mut process = ArrivalProcess::new(class.gap_sampler()?, 0.0, rng);
    let mut out = Vec::with_capacity((horizon / class.mean_interarrival_s) as usize + 1);
    process.drain_until(horizon, rng, |t| out.push(t));
    Ok(out)
}

/// Streaming arrival process; yields timestamps slot by slot.
#[derive(Debug, Clone)]
pub struct ArrivalProcess {
    sampler: GapSampler,
    next: f64,
}

impl ArrivalProcess {
    pub fn new<R: Rng + ?Sized>(sampler: GapSampler, start: f64, rng: &mut R) -> Self {
        let next = advance(start, &sampler, rng);
        ArrivalProcess { sampler, next }
    }

    pub fn next_arrival(&self) -> f64 {
        self.next
    }

    /// Emits every arrival with timestamp `<= until`.
    pub fn drain_until<R: Rng + ?Sized>(&mut self, until: f64, rng: &mut R, mut emit: impl FnMut(f64)) {
        while self.next <= until {
            emit(self.next);
            self.next = advance(self.next, &self.sampler, rng);
        }
    }
}

fn advance<R: Rng + ?Sized>(from: f64, sampler: &GapSampler, rng: &mut R) -> f64 {
    loop {
        let t = from + sampler.sample(rng);
        if t > from {
            return t;
        }
    }
}
