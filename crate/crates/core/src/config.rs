use serde::{Deserialize, Serialize};

/// Discretization and iteration settings for the transfer operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorConfig {
    /// Uniform cell count of the Ulam partition before refinement.
    pub ulam_n: usize,
    /// Extra geometric refinement levels (ratio 1/2) on each side of every
    /// neutral fixed point.
    pub neutral_levels: usize,
    /// Midpoint sub-intervals per Ulam quadrature piece.
    pub quad_subdiv: usize,
    pub power_max_iter: usize,
    /// Relative width of the Collatz-Wielandt bracket at convergence.
    pub power_tol: f64,
    pub subleading_max_iter: usize,
    pub growth_n_max: usize,
    pub growth_window: usize,
    /// Node count of the norm-growth grid; defaults to `ulam_n`.
    pub growth_grid_n: Option<usize>,
}

impl Default for OperatorConfig {
    fn default() -> Self {
        Self {
            ulam_n: 1024,
            neutral_levels: 12,
            quad_subdiv: 4,
            power_max_iter: 10_000,
            power_tol: 1e-12,
            subleading_max_iter: 3000,
            growth_n_max: 60,
            growth_window: 10,
            growth_grid_n: None,
        }
    }
}

impl OperatorConfig {
    pub fn growth_grid(&self) -> usize {
        self.growth_grid_n.unwrap_or(self.ulam_n)
    }
}

/// Settings for pressure sweeps, classification and spectra.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisConfig {
    pub operator: OperatorConfig,
    pub t_min: f64,
    pub t_max: f64,
    pub t_samples: usize,
    /// Longest period used for orbit averages; `None` picks the largest
    /// period up to 12 whose itinerary count fits `period_cap`.
    pub max_period: Option<usize>,
    pub period_cap: usize,
    pub tol_flat: f64,
    pub tol_strict: f64,
    /// Decision tolerance is `decision_factor` times the pressure confidence,
    /// but never below `decision_floor`.
    pub decision_factor: f64,
    pub decision_floor: f64,
    /// Margin by which `P(t phi)` must exceed `P(t phi - alpha log|Df|)` for
    /// the spectral-gap certificate.
    pub certificate_margin: f64,
    /// Bisection steps when locating a transition parameter.
    pub bisection_steps: usize,
    /// Samples of the rate-function grid.
    pub s_samples: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            operator: OperatorConfig::default(),
            t_min: -6.0,
            t_max: 6.0,
            t_samples: 121,
            max_period: None,
            period_cap: 531_441,
            tol_flat: 1e-4,
            tol_strict: 1e-4,
            decision_factor: 10.0,
            decision_floor: 1e-6,
            certificate_margin: 1e-3,
            bisection_steps: 24,
            s_samples: 201,
        }
    }
}

impl AnalysisConfig {
    /// Uniform t grid over the window.
    pub fn t_grid(&self) -> Vec<f64> {
        let n = self.t_samples.max(2);
        (0..n)
            .map(|i| self.t_min + (self.t_max - self.t_min) * i as f64 / (n - 1) as f64)
            .collect()
    }

    /// Effective maximal period for a map of the given degree.
    pub fn period_for_degree(&self, k: usize) -> usize {
        if let Some(p) = self.max_period {
            return p;
        }
        let mut p = 0;
        let mut count: usize = 1;
        while p < 12 {
            match count.checked_mul(k) {
                Some(c) if c <= self.period_cap => {
                    count = c;
                    p += 1;
                }
                _ => break,
            }
        }
        p.max(1)
    }
}
