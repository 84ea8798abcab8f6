use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise-constant applied force: each breakpoint holds until the next.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForceTimeline {
    breakpoints: Vec<(f64, f64)>,
}

impl ForceTimeline {
    pub fn new(breakpoints: Vec<(f64, f64)>) -> Result<Self> {
        if breakpoints.is_empty() {
            return Err(Error::input("force timeline needs at least one breakpoint"));
        }
        if breakpoints.iter().any(|&(t, f)| !t.is_finite() || !f.is_finite()) {
            return Err(Error::input("force timeline values must be finite"));
        }
        if breakpoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::input("force timeline times must be strictly increasing"));
        }
        Ok(Self { breakpoints })
    }

    pub fn constant(force: f64) -> Self {
        Self {
            breakpoints: vec![(0.0, force)],
        }
    }

    /// `before` until `at`, then `after`.
    pub fn step(at: f64, before: f64, after: f64) -> Result<Self> {
        Self::new(vec![(0.0, before), (at, after)])
    }

    pub fn breakpoints(&self) -> &[(f64, f64)] {
        &self.breakpoints
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0].0
    }

    /// Force at `t`, or `None` before the first breakpoint.
    pub fn force_at(&self, t: f64) -> Option<f64> {
        let k = self.breakpoints.partition_point(|&(bt, _)| bt <= t);
        (k > 0).then(|| self.breakpoints[k - 1].1)
    }

    pub fn max_force(&self) -> f64 {
        self.breakpoints.iter().map(|b| b.1).fold(f64::NEG_INFINITY, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_hold() {
        let tl = ForceTimeline::new(vec![(0.0, 0.0), (2.0, 1.0), (4.0, 3.0)]).unwrap();
        assert_eq!(tl.force_at(0.0), Some(0.0));
        assert_eq!(tl.force_at(1.999), Some(0.0));
        assert_eq!(tl.force_at(2.0), Some(1.0));
        assert_eq!(tl.force_at(100.0), Some(3.0));
        assert_eq!(tl.force_at(-0.1), None);
    }

    #[test]
    fn rejects_unordered() {
        assert!(ForceTimeline::new(vec![(0.0, 0.0), (0.0, 1.0)]).is_err());
        assert!(ForceTimeline::new(vec![]).is_err());
    }
}
