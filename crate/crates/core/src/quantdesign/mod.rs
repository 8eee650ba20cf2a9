//! Information-bottleneck quantizer design and quantized density evolution.
//!
//! Messages live in a finite alphabet `T = {0, .., |T|-1}`. Under the natural
//! labeling the first half of the alphabet carries negative LLRs and the
//! second half positive ones, so the MSB of a label is its hard decision
//! (MSB = 1 means bit 0). The relabeled alphabet reverses the negative half,
//! which turns the min-sum `f` update into sign-XNOR plus magnitude-min.

mod channel;
mod density;
mod ib;
mod lut;

use serde::{Deserialize, Serialize};

pub use channel::{design_channel_quantizer, ChannelQuantizer, DEFAULT_GRID_SIZE};
pub use density::{boxplus, f_density, g_density};
pub use ib::{ib_quantize, mutual_information, Quantization, SourceSymbol};
pub use lut::{
    bit_channel_error_probabilities, design_luts, minsum_lut, natural_minsum_circuit, relabel_map,
    relabeled_minsum_circuit, LutDesign, LutSet, LutVariant, NodeTables,
};

/// Message label. Alphabets are at most a few hundred entries wide.
pub type Label = u16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Labeling {
    Natural,
    Relabeled,
}

/// A finite message alphabet together with the LLR each label stands for.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MessageAlphabet {
    pub size: usize,
    pub labeling: Labeling,
    /// `L_x(t)` indexed by natural label.
    pub llr: Vec<f64>,
}

impl MessageAlphabet {
    /// LLR carried by `label` under this alphabet's labeling.
    pub fn llr_of(&self, label: Label) -> f64 {
        match self.labeling {
            Labeling::Natural => self.llr[label as usize],
            Labeling::Relabeled => self.llr[relabel(self.size, label) as usize],
        }
    }

    /// Natural labeling invariants: strictly increasing and anti-symmetric
    /// about the middle of the alphabet, within `tol`.
    pub fn is_well_formed(&self, tol: f64) -> bool {
        let h = self.size / 2;
        let increasing = self.llr.windows(2).all(|w| w[0] < w[1]);
        let antisym = (0..h).all(|j| (self.llr[h - 1 - j] + self.llr[h + j]).abs() <= tol);
        let signs = (0..h).all(|j| self.llr[j] < 0.0 && self.llr[h + j] > 0.0);
        increasing && antisym && signs
    }
}

/// `rho(t)`: reverse the negative half, keep the positive half.
pub(crate) fn relabel(size: usize, t: Label) -> Label {
    let h = (size / 2) as Label;
    if t < h {
        h - 1 - t
    } else {
        t
    }
}

/// `t -> |T| - 1 - t`, the label-domain LLR sign flip under natural labeling.
pub fn flip(size: usize, t: Label) -> Label {
    (size - 1) as Label - t
}

/// Joint pmf `p(x, t)` of a bit and its message, plus the LLR of each label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeDistribution {
    /// `[p(x = 0, t), p(x = 1, t)]` indexed by natural label.
    pub pmf: Vec<[f64; 2]>,
    /// `L_x(t)`; equals `ln(p(0,t)/p(1,t))` whenever both are positive.
    pub llr: Vec<f64>,
}

impl EdgeDistribution {
    /// Builds the distribution with LLRs read off the pmf.
    pub fn from_pmf(pmf: Vec<[f64; 2]>) -> Self {
        let llr = pmf.iter().map(|p| (p[0] / p[1]).ln()).collect();
        Self { pmf, llr }
    }

    /// Symmetric BSC-like distribution on `{0, 1}`: label 1 means bit 0.
    pub fn bsc(eps: f64) -> Self {
        Self::from_pmf(vec![
            [eps / 2.0, (1.0 - eps) / 2.0],
            [(1.0 - eps) / 2.0, eps / 2.0],
        ])
    }

    pub fn size(&self) -> usize {
        self.pmf.len()
    }

    pub fn total(&self) -> f64 {
        self.pmf.iter().map(|p| p[0] + p[1]).sum()
    }

    pub fn alphabet(&self) -> MessageAlphabet {
        MessageAlphabet {
            size: self.size(),
            labeling: Labeling::Natural,
            llr: self.llr.clone(),
        }
    }

    /// `I(X;T)` in bits.
    pub fn mutual_information(&self) -> f64 {
        mi_bits(self.pmf.iter().copied())
    }

    /// Probability of a wrong hard decision (MSB rule) when bits are
    /// uniform.
    pub fn error_probability(&self) -> f64 {
        let h = self.size() / 2;
        let wrong0: f64 = self.pmf[..h].iter().map(|p| p[0]).sum();
        let wrong1: f64 = self.pmf[h..].iter().map(|p| p[1]).sum();
        wrong0 + wrong1
    }
}

pub(crate) fn mi_bits(pmf: impl Iterator<Item = [f64; 2]> + Clone) -> f64 {
    let px0: f64 = pmf.clone().map(|p| p[0]).sum();
    let px1: f64 = pmf.clone().map(|p| p[1]).sum();
    let mut mi = 0.0;
    for p in pmf {
        let pt = p[0] + p[1];
        for (pj, px) in [(p[0], px0), (p[1], px1)] {
            if pj > 0.0 {
                mi += pj * (pj / (px * pt)).log2();
            }
        }
    }
    mi
}
