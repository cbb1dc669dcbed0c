//! Utility maximization over the collision-free candidates.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::geometry::Vec2;
use crate::model::{Candidate, ModelParams};

/// The chosen move for one agent on one tick.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decision {
    pub alpha_hat: f64,
    pub phi_hat: f64,
    pub target: Vec2,
    pub utility: f64,
}

impl Decision {
    pub fn stay(position: Vec2) -> Self {
        Decision {
            alpha_hat: 0.0,
            phi_hat: 0.0,
            target: position,
            utility: 0.0,
        }
    }
}

/// `w_α·α + w_φ·(1 − |φ|/φ_τ)`.
pub fn utility(alpha: f64, phi: f64, params: &ModelParams) -> f64 {
    params.w_alpha * alpha + params.w_phi * (1.0 - phi.abs() / params.phi_tau)
}

/// Total preference order on `(α, φ)`: higher utility, then smaller `|φ|`,
/// then larger `α`, then positive `φ` before negative. `Less` means
/// preferred.
pub fn preference(a: (f64, f64), b: (f64, f64), params: &ModelParams) -> Ordering {
    let (ua, ub) = (utility(a.0, a.1, params), utility(b.0, b.1, params));
    ub.total_cmp(&ua)
        .then_with(|| a.1.abs().total_cmp(&b.1.abs()))
        .then_with(|| b.0.total_cmp(&a.0))
        .then_with(|| b.1.total_cmp(&a.1))
}

/// Argmax of the utility over `feasible` under the total preference order.
pub fn choose(feasible: &[Candidate], params: &ModelParams) -> Result<Decision> {
    let best = feasible
        .iter()
        .min_by(|a, b| preference((a.alpha, a.phi), (b.alpha, b.phi), params))
        .ok_or(Error::EmptyFeasibleSet)?;
    Ok(Decision {
        alpha_hat: best.alpha,
        phi_hat: best.phi,
        target: best.target,
        utility: utility(best.alpha, best.phi, params),
    })
}

/// The `(α, φ)` grid sorted from most to least preferred. Scanning it and
/// stopping at the first admissible target yields the same decision as
/// [`choose`] over the full feasible set.
#[derive(Debug, Clone)]
pub struct RankedGrid {
    entries: Vec<(f64, f64)>,
}

impl RankedGrid {
    pub fn new(params: &ModelParams) -> Self {
        let alphas = params.alpha_values();
        let phis = params.phi_values();
        let mut entries: Vec<(f64, f64)> = alphas
            .iter()
            .flat_map(|&a| phis.iter().map(move |&p| (a, p)))
            .collect();
        entries.sort_by(|&a, &b| preference(a, b, params));
        RankedGrid { entries }
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
