use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{ib_quantize, relabel, EdgeDistribution, Label, Labeling, SourceSymbol};
use crate::error::{param, Result};

pub const DEFAULT_GRID_SIZE: usize = 2048;

/// Maps a real channel LLR onto a message label through sorted thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelQuantizer {
    pub sigma: f64,
    /// `|T| - 1` ascending LLR cut points, symmetric about zero.
    pub thresholds: Vec<f64>,
    pub labeling: Labeling,
    /// Quantized channel `p(x, t)` (natural labels).
    pub distribution: EdgeDistribution,
}

impl ChannelQuantizer {
    pub fn size(&self) -> usize {
        self.thresholds.len() + 1
    }

    /// Natural label: the number of thresholds at or below `llr`. An LLR of
    /// exactly zero lands in the positive half.
    pub fn natural_label(&self, llr: f64) -> Label {
        self.thresholds.partition_point(|&c| c <= llr) as Label
    }

    pub fn quantize(&self, llr: f64) -> Label {
        let t = self.natural_label(llr);
        match self.labeling {
            Labeling::Natural => t,
            Labeling::Relabeled => relabel(self.size(), t),
        }
    }

    pub fn relabeled(&self) -> Self {
        Self {
            labeling: Labeling::Relabeled,
            ..self.clone()
        }
    }
}

/// Probability that `N(mean, sd)` falls in `[lo, hi)`, computed on the side
/// of the mean that avoids cancellation.
fn interval_mass(n: &Normal, mean: f64, lo: f64, hi: f64) -> f64 {
    if lo >= mean {
        n.sf(lo) - n.sf(hi)
    } else {
        n.cdf(hi) - n.cdf(lo)
    }
}

/// IB-optimal `size`-level quantizer of the BPSK/AWGN channel LLR at noise
/// standard deviation `sigma`.
///
/// The LLR density (mean `+-2/sigma^2`, std `2/sigma`) is discretized on
/// `grid_size` uniform cells spanning `+-(4 * 2/sigma^2 + 6 * 2/sigma)`, with
/// the outer cells extended to infinity, then quantized by [`ib_quantize`].
pub fn design_channel_quantizer(
    sigma: f64,
    size: usize,
    grid_size: usize,
) -> Result<ChannelQuantizer> {
    if sigma.is_nan() || sigma <= 0.0 || !sigma.is_finite() {
        return param(format!("sigma must be positive, got {sigma}"));
    }
    if size < 2 || !size.is_power_of_two() {
        return param(format!("alphabet size {size} must be a power of two >= 2"));
    }
    if grid_size < 8 * size || !grid_size.is_multiple_of(2) {
        return param(format!(
            "grid of {grid_size} cells is too coarse for {size} labels"
        ));
    }
    let mean = 2.0 / (sigma * sigma);
    let sd = 2.0 / sigma;
    let span = 4.0 * mean + 6.0 * sd;
    let width = 2.0 * span / grid_size as f64;
    let given0 = Normal::new(mean, sd).expect("finite parameters");
    let given1 = Normal::new(-mean, sd).expect("finite parameters");

    let mid = grid_size / 2;
    // Positions are computed from signed cell offsets so that the grid is
    // exactly mirror-symmetric in floating point.
    let edge = |i: usize| -> f64 {
        if i == 0 {
            f64::NEG_INFINITY
        } else if i == grid_size {
            f64::INFINITY
        } else {
            (i as f64 - mid as f64) * width
        }
    };
    let mut positive = Vec::with_capacity(mid);
    for i in mid..grid_size {
        let (lo, hi) = (edge(i), edge(i + 1));
        positive.push([
            0.5 * interval_mass(&given0, mean, lo, hi),
            0.5 * interval_mass(&given1, -mean, lo, hi),
        ]);
    }
    let total: f64 = 2.0 * positive.iter().map(|p| p[0] + p[1]).sum::<f64>();
    let mut cells = Vec::with_capacity(grid_size);
    for i in 0..grid_size {
        let center = (i as f64 - mid as f64 + 0.5) * width;
        let p = if i >= mid {
            positive[i - mid]
        } else {
            let [a, b] = positive[mid - 1 - i];
            [b, a]
        };
        cells.push(SourceSymbol {
            p: [p[0] / total, p[1] / total],
            llr: center,
            positive_on_zero: i >= mid,
        });
    }

    let q = ib_quantize(&cells, size)?;
    let thresholds = (1..grid_size)
        .filter(|&i| q.labels[i] != q.labels[i - 1])
        .map(edge)
        .collect::<Vec<_>>();
    debug_assert_eq!(thresholds.len(), size - 1);
    Ok(ChannelQuantizer {
        sigma,
        thresholds,
        labeling: Labeling::Natural,
        distribution: q.output,
    })
}
