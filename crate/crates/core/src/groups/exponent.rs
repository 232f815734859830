use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::ball::{pruned_orbit, BoundaryCloud};
use super::{displacement, GroupKind, GroupPresentation};
use crate::word::free_ball_count;
use crate::error::{Error, Result};
use crate::hyperbolic::InteriorPoint;
use crate::linalg::least_squares;

/// Result of the orbit-counting fit `log N(R) ~ delta R + c`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriticalExponentEstimate {
    pub value: f64,
    /// Unclamped least-squares slope.
    pub raw_slope: f64,
    pub radii: Vec<f64>,
    pub counts: Vec<usize>,
    /// RMS residual of the fit in `log N`.
    pub residual: f64,
    pub depth: usize,
    pub fit_window: (f64, f64),
    pub elements: usize,
}

#[derive(Clone, Debug)]
pub struct DeltaOptions {
    /// Lower end of the fit window as a fraction of the complete radius.
    pub window_start: f64,
    /// Number of radii sampled in the window.
    pub samples: usize,
    /// Minimum number of enumerated elements for nonelementary groups.
    pub min_elements: usize,
}

impl Default for DeltaOptions {
    fn default() -> Self {
        Self { window_start: 0.5, samples: 48, min_elements: 1000 }
    }
}

/// Estimates the critical exponent by the slope of the orbit-counting
/// function.
///
/// `depth` fixes the element budget: the estimate uses as many orbit points
/// as the word ball of that radius holds, but chooses them by displacement
/// (the `budget` nearest orbit points), so that cusp elements with long words
/// are not missed. The fit runs over `[window_start * R, R]` where `R` is the
/// displacement of the last point in the budget.
pub fn estimate_delta(g: &GroupPresentation, depth: usize, x0: &InteriorPoint) -> Result<CriticalExponentEstimate> {
    estimate_delta_with(g, depth, x0, &DeltaOptions::default())
}

pub fn estimate_delta_with(
    g: &GroupPresentation,
    depth: usize,
    x0: &InteriorPoint,
    opts: &DeltaOptions,
) -> Result<CriticalExponentEstimate> {
    if x0.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: g.dim(), found: x0.dim() });
    }
    let elementary = g.rank() == 1 || g.kind() == GroupKind::Cyclic;
    let needed = if elementary { 100 } else { opts.min_elements };
    let budget = free_ball_count(g.rank(), depth);
    if depth < 2 || budget < needed {
        return Err(Error::InsufficientData(format!(
            "depth {depth} gives {budget} elements, fewer than the {needed} needed; use a larger L_max"
        )));
    }
    // A word can dip back towards x0 by at most one generator step.
    let mut margin = 0.0f64;
    for l in 0..2 * g.rank() as u8 {
        margin = margin.max(displacement(g.letter(l), x0)?);
    }
    let node_cap = budget.saturating_mul(64).max(1 << 20);
    let mut r = 2.0 * margin;
    let all = loop {
        let (ds, _) = pruned_orbit(g, x0, r, r + margin, node_cap)?;
        if ds.len() >= budget {
            break ds;
        }
        // Jump towards the predicted radius, using the local growth rate.
        let n = ds.len() as f64;
        let half = ds.partition_point(|&d| d <= r / 2.0).max(1) as f64;
        let rate = ((n / half).ln() / (r / 2.0)).max(0.05);
        let step = ((budget as f64 / n).ln() / rate).clamp(0.25, 2.0 * margin.max(0.5));
        r += step;
    };
    let hi = all[budget - 1];
    let lo = hi * opts.window_start;
    let count_below = |r: f64| all.partition_point(|&d| d <= r);
    if count_below(lo) < 3 || !(hi > lo) {
        return Err(Error::InsufficientData(format!(
            "counting window [{lo:.3}, {hi:.3}] holds too few orbit points; use a larger L_max"
        )));
    }
    let k = opts.samples.max(4);
    let radii: Vec<f64> = (0..k).map(|i| lo + (hi - lo) * i as f64 / (k - 1) as f64).collect();
    let counts: Vec<usize> = radii.iter().map(|&r| count_below(r)).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let (slope, intercept) = least_squares(&radii, &ys);
    let residual = (radii
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum::<f64>()
        / k as f64)
        .sqrt();
    Ok(CriticalExponentEstimate {
        value: slope.clamp(0.0, g.dim() as f64),
        raw_slope: slope,
        radii,
        counts,
        residual,
        depth,
        fit_window: (lo, hi),
        elements: budget,
    })
}

/// Box-counting dimension: slope of `log N(eps)` against `log(1/eps)` for
/// axis-aligned cubes of side `eps` in `R^{n+1}`.
pub fn box_dimension(cloud: &BoundaryCloud, scales: &[f64]) -> Result<f64> {
    if cloud.len() < 1000 {
        return Err(Error::InsufficientData(format!(
            "box counting needs at least 1000 points, got {}",
            cloud.len()
        )));
    }
    let mut s: Vec<f64> = scales.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup();
    if s.len() < 2 || !(s[0] > 0.0) || !s.iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidParameter("box counting needs at least two distinct positive scales".into()));
    }
    if (s[s.len() - 1] / s[0]).log10() < 1.5 {
        return Err(Error::InvalidParameter(format!(
            "scales span {:.2} decades; at least 1.5 are needed",
            (s[s.len() - 1] / s[0]).log10()
        )));
    }
    // Fixed irrational offset keeps the grid off symmetry planes.
    const OFFSET: f64 = 0.318_309_886_183_790_7;
    let mut xs = Vec::with_capacity(s.len());
    let mut ys = Vec::with_capacity(s.len());
    for &eps in &s {
        let mut cells: HashSet<Vec<i64>> = HashSet::with_capacity(cloud.len());
        for p in &cloud.points {
            cells.insert(p.coords().iter().map(|c| ((c + OFFSET) / eps).floor() as i64).collect());
        }
        xs.push((1.0 / eps).ln());
        ys.push((cells.len() as f64).ln());
    }
    Ok(least_squares(&xs, &ys).0)
}
