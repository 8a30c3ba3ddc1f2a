//! Greedy δ-nets: every input point lies within δ of a kept point, and kept
//! points are more than δ apart.

use serde::{Deserialize, Serialize};

use crate::grid::PointGrid;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinOptions {
    pub max_points: usize,
    /// Smallest spacing tried, as a fraction of the reference length.
    pub min_spacing: f64,
    /// Ratio between consecutive spacings tried.
    pub growth: f64,
}

impl Default for ThinOptions {
    fn default() -> Self {
        Self {
            max_points: 1200,
            min_spacing: 0.005,
            growth: 1.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub dim: usize,
    pub coords: Vec<f64>,
    pub spacing: f64,
    pub raw_points: usize,
}

impl Net {
    pub fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.coords.len() / self.dim
        }
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }
}

/// Greedy net in input order.
pub fn greedy_net(coords: &[f64], dim: usize, delta: f64) -> Vec<f64> {
    if coords.is_empty() {
        return Vec::new();
    }
    let mut grid = PointGrid::new(dim, delta);
    for x in coords.chunks_exact(dim) {
        if !grid.any_within(x, delta) {
            grid.insert(x);
        }
    }
    (0..grid.len()).flat_map(|i| grid.point(i).to_vec()).collect()
}

/// The net for the smallest spacing `reference * min_spacing * growth^k`
/// that keeps at most `max_points` points.
pub fn thin_to_budget(coords: &[f64], dim: usize, reference: f64, opts: &ThinOptions) -> Net {
    let raw_points = if dim == 0 { 0 } else { coords.len() / dim };
    let mut delta = reference * opts.min_spacing;
    loop {
        let net = greedy_net(coords, dim, delta);
        if net.len() / dim.max(1) <= opts.max_points.max(1) {
            return Net {
                dim,
                coords: net,
                spacing: delta,
                raw_points,
            };
        }
        delta *= opts.growth;
    }
}
