use serde::{Deserialize, Serialize};

use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ControlMode {
    /// Load factor prescribed: scales the force pattern or the driven
    /// displacements.
    DisplacementControl,
    /// Dissipated energy per increment prescribed.
    DissipationControl,
}

/// Increment sizing and control switching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepControl {
    pub mode: ControlMode,
    /// Load-factor increment (mm when displacement driven, N scale when
    /// force driven).
    pub step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Initial dissipation increment (N mm); defaults to the dissipation of
    /// the step that triggered the switch.
    pub dissipation_step: Option<f64>,
    pub min_dissipation_step: f64,
    pub max_dissipation_step: f64,
    pub growth: f64,
    pub cut: f64,
    pub target_iterations: usize,
    /// Per-step dissipation (N mm) above which dissipation control takes
    /// over; defaults to `1e-2 G_Ic` times the smallest interface element.
    pub switch_threshold: Option<f64>,
    pub max_steps: usize,
    /// Stop once the load factor magnitude reaches this value.
    pub max_load_factor: Option<f64>,
    /// Stop once `|monitor[index]|` reaches `value`.
    pub stop_monitor: Option<MonitorStop>,
    /// Stop once the load drops below this fraction of its peak.
    pub stop_load_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonitorStop {
    pub index: usize,
    pub value: f64,
}

impl Default for StepControl {
    fn default() -> Self {
        Self {
            mode: ControlMode::DisplacementControl,
            step: 0.01,
            min_step: 1e-8,
            max_step: 1.0,
            dissipation_step: None,
            min_dissipation_step: 1e-9,
            max_dissipation_step: 1e3,
            growth: 1.3,
            cut: 0.5,
            target_iterations: 5,
            switch_threshold: None,
            max_steps: 200,
            max_load_factor: None,
            stop_monitor: None,
            stop_load_ratio: None,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.to_string()));
        if !(self.step > 0.0 && self.min_step > 0.0 && self.max_step > 0.0) {
            return bad("step sizes must be positive");
        }
        if !(self.min_step <= self.max_step) {
            return bad("min_step exceeds max_step");
        }
        if !(self.min_dissipation_step > 0.0 && self.min_dissipation_step <= self.max_dissipation_step) {
            return bad("dissipation step bounds must be positive with min <= max");
        }
        if let Some(d) = self.dissipation_step {
            if !(d > 0.0) {
                return bad("dissipation_step must be positive");
            }
        }
        if let Some(t) = self.switch_threshold {
            if !(t > 0.0) {
                return bad("switch_threshold must be positive");
            }
        }
        if !(self.growth >= 1.0 && self.cut > 0.0 && self.cut < 1.0) {
            return bad("growth must be >= 1 and cut in (0, 1)");
        }
        if self.target_iterations == 0 || self.max_steps == 0 {
            return bad("target_iterations and max_steps must be positive");
        }
        Ok(())
    }
}

/// Newton stopping rules.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergenceSettings {
    /// Residual tolerance relative to the force scale `max(|lambda f|, |R|)`.
    pub tolerance: f64,
    /// Absolute floor of the force scale (N).
    pub absolute_floor: f64,
    pub max_iterations: usize,
    /// Abort when the residual exceeds this multiple of the first one.
    pub divergence_factor: f64,
    /// Iterations of plain Newton before updates are backtracked.
    pub line_search_after: usize,
    /// Maximum halvings of a backtracked update (0 disables the search).
    pub line_search_cuts: usize,
}

impl Default for ConvergenceSettings {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            absolute_floor: 1e-8,
            max_iterations: 20,
            divergence_factor: 1e8,
            line_search_after: 4,
            line_search_cuts: 10,
        }
    }
}

impl ConvergenceSettings {
    pub fn validate(&self) -> Result<(), SolverError> {
        if !(self.tolerance > 0.0 && self.absolute_floor > 0.0) || self.max_iterations == 0 {
            return Err(SolverError::Config("tolerance, floor and max_iterations must be positive".into()));
        }
        if !(self.divergence_factor > 1.0) {
            return Err(SolverError::Config("divergence_factor must exceed 1".into()));
        }
        Ok(())
    }
}
