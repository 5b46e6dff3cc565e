use serde::{Deserialize, Serialize};

use crate::error::LayoutError;

/// Force constants, cooling schedule and stopping rule for a layout run.
///
/// Lengths are in world units. `theta = 0` evaluates repulsion exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LayoutParams {
    pub ideal_edge_length: f64,
    pub k_repel: f64,
    pub k_attract: f64,
    /// Magnitude of the constant vertical push per hierarchical edge.
    pub k_hierarchy: f64,
    pub theta: f64,
    pub max_iterations: usize,
    /// Stop once the largest per-node move drops below this many edge lengths.
    pub convergence_eps: f64,
    /// Starting step cap as a fraction of the initial placement radius.
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    pub seed: u64,
    pub min_distance: f64,
}

impl Default for LayoutParams {
    fn default() -> Self {
        Self {
            ideal_edge_length: 1.0,
            k_repel: 1.0,
            k_attract: 1.0,
            k_hierarchy: 7.0,
            theta: 0.75,
            max_iterations: 500,
            convergence_eps: 1e-3,
            initial_temperature: 0.1,
            cooling_factor: 0.95,
            seed: 0,
            min_distance: 1e-3,
        }
    }
}

impl LayoutParams {
    pub fn validate(&self) -> Result<(), LayoutError> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Result<(), LayoutError> {
            Err(LayoutError::InvalidParam {
                field,
                reason: reason.into(),
            })
        }
        let positive = [
            ("idealEdgeLength", self.ideal_edge_length),
            ("kRepel", self.k_repel),
            ("kAttract", self.k_attract),
            ("convergenceEps", self.convergence_eps),
            ("initialTemperature", self.initial_temperature),
            ("minDistance", self.min_distance),
        ];
        for (field, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return bad(field, format!("must be finite and > 0, got {v}"));
            }
        }
        for (field, v) in [("kHierarchy", self.k_hierarchy), ("theta", self.theta)] {
            if !v.is_finite() || v < 0.0 {
                return bad(field, format!("must be finite and >= 0, got {v}"));
            }
        }
        if !(self.cooling_factor > 0.0 && self.cooling_factor <= 1.0) {
            return bad(
                "coolingFactor",
                format!("must lie in (0, 1], got {}", self.cooling_factor),
            );
        }
        if self.max_iterations == 0 {
            return bad("maxIterations", "must be > 0");
        }
        Ok(())
    }
}

/// Partial parameters as supplied by a user. Unset fields take the defaults;
/// an unset `minDistance` follows `1e-3 * idealEdgeLength`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ParamsPatch {
    pub ideal_edge_length: Option<f64>,
    pub k_repel: Option<f64>,
    pub k_attract: Option<f64>,
    pub k_hierarchy: Option<f64>,
    pub theta: Option<f64>,
    pub max_iterations: Option<i64>,
    pub convergence_eps: Option<f64>,
    pub initial_temperature: Option<f64>,
    pub cooling_factor: Option<f64>,
    pub seed: Option<u64>,
    pub min_distance: Option<f64>,
}

impl ParamsPatch {
    /// Fields set in `over` win.
    pub fn or(self, over: ParamsPatch) -> ParamsPatch {
        ParamsPatch {
            ideal_edge_length: over.ideal_edge_length.or(self.ideal_edge_length),
            k_repel: over.k_repel.or(self.k_repel),
            k_attract: over.k_attract.or(self.k_attract),
            k_hierarchy: over.k_hierarchy.or(self.k_hierarchy),
            theta: over.theta.or(self.theta),
            max_iterations: over.max_iterations.or(self.max_iterations),
            convergence_eps: over.convergence_eps.or(self.convergence_eps),
            initial_temperature: over.initial_temperature.or(self.initial_temperature),
            cooling_factor: over.cooling_factor.or(self.cooling_factor),
            seed: over.seed.or(self.seed),
            min_distance: over.min_distance.or(self.min_distance),
        }
    }

    pub fn resolve(self) -> Result<LayoutParams, LayoutError> {
        let d = LayoutParams::default();
        let ideal_edge_length = self.ideal_edge_length.unwrap_or(d.ideal_edge_length);
        let max_iterations = match self.max_iterations {
            None => d.max_iterations,
            Some(n) if n > 0 => n as usize,
            Some(n) => {
                return Err(LayoutError::InvalidParam {
                    field: "maxIterations",
                    reason: format!("must be > 0, got {n}"),
                })
            }
        };
        let params = LayoutParams {
            ideal_edge_length,
            k_repel: self.k_repel.unwrap_or(d.k_repel),
            k_attract: self.k_attract.unwrap_or(d.k_attract),
            k_hierarchy: self.k_hierarchy.unwrap_or(d.k_hierarchy),
            theta: self.theta.unwrap_or(d.theta),
            max_iterations,
            convergence_eps: self.convergence_eps.unwrap_or(d.convergence_eps),
            initial_temperature: self.initial_temperature.unwrap_or(d.initial_temperature),
            cooling_factor: self.cooling_factor.unwrap_or(d.cooling_factor),
            seed: self.seed.unwrap_or(d.seed),
            min_distance: self.min_distance.unwrap_or(1e-3 * ideal_edge_length),
        };
        params.validate()?;
        Ok(params)
    }
}
