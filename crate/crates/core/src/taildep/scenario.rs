use std::fmt;

use serde::{Deserialize, Serialize};

use super::measures::{q_upper_kendall, TailMeasureResult};
use crate::error::{Error, Result};
use crate::vine::{simulate, VineModel};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    #[serde(rename = "H")]
    High,
    #[serde(rename = "L")]
    Low,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::High => Direction::Low,
            Direction::Low => Direction::High,
        }
    }

    fn letter(self) -> char {
        match self {
            Direction::High => 'H',
            Direction::Low => 'L',
        }
    }

    fn from_letter(c: char) -> Option<Self> {
        match c.to_ascii_uppercase() {
            'H' => Some(Direction::High),
            'L' => Some(Direction::Low),
            _ => None,
        }
    }
}

/// Joint extreme scenario: each conditioning variable in its upper (High)
/// or lower (Low) tail, measured against a tail of the target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioPattern {
    pub target: usize,
    pub conditioning: Vec<(usize, Direction)>,
    pub target_direction: Direction,
    pub alpha: f64,
    pub beta: f64,
}

impl ScenarioPattern {
    /// Parses letters such as `HLL`, one per entry of `vars`, with the
    /// target in its upper tail.
    pub fn from_label(label: &str, target: usize, vars: &[usize], alpha: f64, beta: f64) -> Result<Self> {
        let dirs: Option<Vec<Direction>> = label.chars().map(Direction::from_letter).collect();
        let dirs = dirs.ok_or_else(|| Error::Domain(format!("pattern {label:?} may only contain H and L")))?;
        if dirs.len() != vars.len() {
            return Err(Error::Domain(format!(
                "pattern {label:?} has {} letters for {} conditioning variables",
                dirs.len(),
                vars.len()
            )));
        }
        let p = Self {
            target,
            conditioning: vars.iter().copied().zip(dirs).collect(),
            target_direction: Direction::High,
            alpha,
            beta,
        };
        p.validate(None)?;
        Ok(p)
    }

    /// Direction letters of the conditioning variables.
    pub fn label(&self) -> String {
        self.conditioning.iter().map(|(_, d)| d.letter()).collect()
    }

    /// The same scenario with every direction flipped, target included.
    pub fn reflected(&self) -> Self {
        Self {
            conditioning: self.conditioning.iter().map(|&(v, d)| (v, d.flip())).collect(),
            target_direction: self.target_direction.flip(),
            ..self.clone()
        }
    }

    pub fn validate(&self, n_vars: Option<usize>) -> Result<()> {
        if self.conditioning.is_empty() {
            return Err(Error::Domain("scenario needs at least one conditioning variable".into()));
        }
        for (name, x) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(x > 0.0 && x < 0.5) {
                return Err(Error::Domain(format!("{name} must lie in (0, 0.5), got {x}")));
            }
        }
        let mut seen = vec![self.target];
        for &(v, _) in &self.conditioning {
            if seen.contains(&v) {
                return Err(Error::Domain(format!("variable {v} appears twice in the scenario")));
            }
            seen.push(v);
        }
        if let Some(n) = n_vars {
            if let Some(v) = seen.iter().find(|&&v| v >= n) {
                return Err(Error::Domain(format!("variable {v} is out of range for {n} variables")));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ScenarioPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

fn oriented(col: &[f64], d: Direction) -> Vec<f64> {
    match d {
        Direction::High => col.to_vec(),
        // Negation reverses the order exactly, which is all the rank-based
        // measures see, so it acts as u -> 1 - u without rounding.
        Direction::Low => col.iter().map(|v| -v).collect(),
    }
}

/// Evaluates a scenario on a sample given by columns: every Low coordinate
/// is reflected and the upper Kendall measure is computed.
pub fn scenario_on_sample(cols: &[Vec<f64>], pattern: &ScenarioPattern) -> Result<TailMeasureResult> {
    pattern.validate(Some(cols.len()))?;
    let x: Vec<Vec<f64>> = pattern.conditioning.iter().map(|&(v, d)| oriented(&cols[v], d)).collect();
    let y = oriented(&cols[pattern.target], pattern.target_direction);
    q_upper_kendall(&x, &y, pattern.alpha, pattern.beta)
}

/// Scenario measure on `n_mc` rows simulated from the vine.
pub fn scenario_tail_coefficient(
    model: &VineModel,
    pattern: &ScenarioPattern,
    n_mc: usize,
    seed: u64,
) -> Result<TailMeasureResult> {
    pattern.validate(Some(model.n_vars()))?;
    let cols = simulate(model, n_mc, seed)?;
    scenario_on_sample(&cols, pattern)
}
