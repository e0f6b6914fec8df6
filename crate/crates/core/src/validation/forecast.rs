use serde::{Deserialize, Serialize};

use super::ValidationError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResult {
    /// Predicted offered volume for the next tick, bit/s.
    pub predicted_bps: f64,
    pub model_id: String,
    pub history_window: usize,
}

/// Next-tick traffic volume predictor.
pub trait Forecaster: Send + Sync {
    fn id(&self) -> &str;
    fn min_history(&self) -> usize;
    /// Prediction from a history that is at least `min_history` long.
    fn predict(&self, history: &[f64]) -> f64;
}

/// Repeats the value observed one season before the next tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeasonalNaive {
    pub season: usize,
    pub min_window: usize,
}

impl Default for SeasonalNaive {
    fn default() -> Self {
        SeasonalNaive { season: 24, min_window: 24 }
    }
}

impl Forecaster for SeasonalNaive {
    fn id(&self) -> &str {
        "seasonal_naive"
    }

    fn min_history(&self) -> usize {
        self.min_window.max(self.season).max(1)
    }

    fn predict(&self, history: &[f64]) -> f64 {
        history[history.len() - self.season.max(1)]
    }
}

pub fn predict_traffic(forecaster: &dyn Forecaster, history: &[f64]) -> Result<ForecastResult, ValidationError> {
    let need = forecaster.min_history();
    if history.len() < need {
        return Err(ValidationError::InsufficientHistory { have: history.len(), need });
    }
    let predicted_bps = forecaster.predict(history).max(0.0);
    Ok(ForecastResult { predicted_bps, model_id: forecaster.id().to_string(), history_window: need })
}
