// SPDX-License-Identifier: MIT OR Apache-2.0

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::proxies::ProxyVector;
use crate::scalar::Scalar;

const SUM_TOLERANCE: f64 = 1e-9;

/// Convex pair of mixing weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct Pair<S>(pub S, pub S);

impl<S: Scalar> Pair<S> {
    pub fn even() -> Self {
        Pair(S::of(0.5), S::of(0.5))
    }

    fn check(&self, name: &str) -> Result<()> {
        let ok = self.0 >= S::zero()
            && self.1 >= S::zero()
            && ((self.0 + self.1).as_f64() - 1.0).abs() <= SUM_TOLERANCE;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!(
                "{name} weights ({}, {}) must be non-negative and sum to 1",
                self.0, self.1
            )))
        }
    }
}

/// Mixing weights inside each load: α for IL, β for EL, γ for GL.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct CompositionWeights<S> {
    pub alpha: Pair<S>,
    pub beta: Pair<S>,
    pub gamma: Pair<S>,
}

impl<S: Scalar> Default for CompositionWeights<S> {
    fn default() -> Self {
        Self {
            alpha: Pair::even(),
            beta: Pair::even(),
            gamma: Pair::even(),
        }
    }
}

impl<S: Scalar> CompositionWeights<S> {
    pub fn validate(&self) -> Result<()> {
        self.alpha.check("alpha")?;
        self.beta.check("beta")?;
        self.gamma.check("gamma")
    }
}

/// Weights of the composite index over (IL, EL, GL).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "S: Scalar")]
pub struct CliWeights<S> {
    pub w: [S; 3],
}

impl<S: Scalar> Default for CliWeights<S> {
    fn default() -> Self {
        let third = S::one() / S::of(3.0);
        Self {
            w: [third, third, third],
        }
    }
}

impl<S: Scalar> CliWeights<S> {
    pub fn new(w: [S; 3]) -> Result<Self> {
        let cw = Self { w };
        cw.validate()?;
        Ok(cw)
    }

    pub fn validate(&self) -> Result<()> {
        let sum: f64 = self.w.iter().map(|v| v.as_f64()).sum();
        if self.w.iter().all(|v| *v >= S::zero()) && (sum - 1.0).abs() <= SUM_TOLERANCE {
            Ok(())
        } else {
            Err(Error::config(format!(
                "load-index weights {:?} must be non-negative and sum to 1",
                self.w
            )))
        }
    }
}

/// (IL, EL, GL) from normalized proxies.
pub fn compose_loads<S: Scalar>(
    normalized: &ProxyVector<S>,
    cw: &CompositionWeights<S>,
) -> (S, S, S) {
    let one = S::one();
    let il = cw.alpha.0 * normalized.entropy + cw.alpha.1 * normalized.dispersion;
    let el = cw.beta.0 * normalized.miss + cw.beta.1 * normalized.stability;
    let gl = cw.gamma.0 * (one - normalized.consolidation) + cw.gamma.1 * (one - normalized.reuse);
    (il, el, gl)
}

pub fn composite_cli<S: Scalar>(il: S, el: S, gl: S, w: &CliWeights<S>) -> S {
    w.w[0] * il + w.w[1] * el + w.w[2] * gl
}
