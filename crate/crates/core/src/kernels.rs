//! Arithmetic personalities of the `f`, `g`, hard-decision and combine
//! updates: floating point, saturating fixed point and table lookup.

use std::fmt::Debug;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{param, Error, Result};
use crate::quantdesign::{Label, LutSet, NodeTables};
use crate::Bit;

/// One message domain. `node` is the heap id of the tree node whose update
/// is evaluated; only table kernels look at it.
pub trait Kernel: Sync + Send {
    type Msg: Copy + Default + PartialEq + Debug + Send + Sync;

    fn name(&self) -> String;
    fn map_channel(&self, llr: f64) -> Self::Msg;
    fn f(&self, node: usize, a: Self::Msg, b: Self::Msg) -> Self::Msg;
    fn g(&self, node: usize, a: Self::Msg, b: Self::Msg, bit: Bit) -> Self::Msg;
    fn hard_decision(&self, m: Self::Msg) -> Bit;
}

pub fn f_float(a: f64, b: f64) -> f64 {
    let m = a.abs().min(b.abs());
    if (a < 0.0) != (b < 0.0) && m != 0.0 {
        -m
    } else {
        m
    }
}

pub fn g_float(a: f64, b: f64, bit: Bit) -> f64 {
    if bit == 0 {
        b + a
    } else {
        b - a
    }
}

/// `Qi.Qc`: internal and channel word lengths in two's complement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedFormat {
    pub qi: u32,
    pub qc: u32,
}

impl FixedFormat {
    pub fn new(qi: u32, qc: u32) -> Result<Self> {
        if !(2..=16).contains(&qc) || qi < qc || qi > 16 {
            return param(format!("invalid fixed-point format {qi}.{qc}"));
        }
        Ok(Self { qi, qc })
    }

    pub fn max_internal(self) -> i16 {
        ((1i32 << (self.qi - 1)) - 1) as i16
    }

    pub fn max_channel(self) -> i16 {
        ((1i32 << (self.qc - 1)) - 1) as i16
    }
}

impl std::fmt::Display for FixedFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}.{}", self.qi, self.qc)
    }
}

pub fn f_fixed(a: i16, b: i16) -> i16 {
    let m = a.abs().min(b.abs());
    if (a < 0) != (b < 0) {
        -m
    } else {
        m
    }
}

pub fn g_fixed(fmt: FixedFormat, a: i16, b: i16, bit: Bit) -> i16 {
    let max = fmt.max_internal() as i32;
    let v = if bit == 0 {
        b as i32 + a as i32
    } else {
        b as i32 - a as i32
    };
    v.clamp(-max, max) as i16
}

/// `round(llr * scale)` (half away from zero) clamped to the channel range.
pub fn quantize_channel_llr(llr: f64, fmt: FixedFormat, scale: f64) -> i16 {
    let max = fmt.max_channel() as f64;
    (llr * scale).round().clamp(-max, max) as i16
}

/// Scale that saturates the channel LLR with probability `p_sat` at noise
/// level `sigma`: the `|L|` level exceeded with that probability is mapped
/// onto the upper rounding edge of the largest channel code.
pub fn saturation_scale(fmt: FixedFormat, sigma: f64, p_sat: f64) -> Result<f64> {
    if sigma.is_nan() || sigma <= 0.0 || p_sat.is_nan() || p_sat <= 0.0 || p_sat >= 1.0 {
        return param(format!("invalid scale request sigma={sigma} p_sat={p_sat}"));
    }
    let mean = 2.0 / (sigma * sigma);
    let llr = Normal::new(mean, 2.0 / sigma).expect("finite parameters");
    let tail = |x: f64| llr.sf(x) + llr.cdf(-x);
    let (mut lo, mut hi) = (0.0, mean + 40.0 / sigma);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > p_sat {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((fmt.max_channel() as f64 + 0.5) / (0.5 * (lo + hi)))
}

pub fn hard_decision_float(m: f64) -> Bit {
    (m < 0.0) as Bit
}

/// MSB rule, valid for both labelings.
pub fn hard_decision_lut(size: usize, t: Label) -> Bit {
    ((t as usize) < size / 2) as Bit
}

pub fn combine(beta_l: &[Bit], beta_r: &[Bit]) -> Result<Vec<Bit>> {
    if beta_l.len() != beta_r.len() {
        return param(format!(
            "combine of lengths {} and {}",
            beta_l.len(),
            beta_r.len()
        ));
    }
    let mut out: Vec<Bit> = beta_l.iter().zip(beta_r).map(|(l, r)| l ^ r).collect();
    out.extend_from_slice(beta_r);
    Ok(out)
}

/// Combine with an all-zero left estimate.
pub fn combine_zero_left(beta_r: &[Bit]) -> Vec<Bit> {
    [beta_r, beta_r].concat()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FloatKernel;

impl Kernel for FloatKernel {
    type Msg = f64;

    fn name(&self) -> String {
        "float".into()
    }

    fn map_channel(&self, llr: f64) -> f64 {
        llr
    }

    fn f(&self, _: usize, a: f64, b: f64) -> f64 {
        f_float(a, b)
    }

    fn g(&self, _: usize, a: f64, b: f64, bit: Bit) -> f64 {
        g_float(a, b, bit)
    }

    fn hard_decision(&self, m: f64) -> Bit {
        hard_decision_float(m)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FixedKernel {
    pub format: FixedFormat,
    pub scale: f64,
}

impl FixedKernel {
    pub fn new(format: FixedFormat, scale: f64) -> Result<Self> {
        if scale.is_nan() || scale <= 0.0 || !scale.is_finite() {
            return param(format!("channel scale must be positive, got {scale}"));
        }
        Ok(Self { format, scale })
    }

    /// Kernel scaled for 1 % channel saturation at `sigma`.
    pub fn for_sigma(format: FixedFormat, sigma: f64) -> Result<Self> {
        Self::new(format, saturation_scale(format, sigma, 0.01)?)
    }
}

impl Kernel for FixedKernel {
    type Msg = i16;

    fn name(&self) -> String {
        format!("fixed:{}", self.format)
    }

    fn map_channel(&self, llr: f64) -> i16 {
        quantize_channel_llr(llr, self.format, self.scale)
    }

    fn f(&self, _: usize, a: i16, b: i16) -> i16 {
        f_fixed(a, b)
    }

    fn g(&self, _: usize, a: i16, b: i16, bit: Bit) -> i16 {
        g_fixed(self.format, a, b, bit)
    }

    fn hard_decision(&self, m: i16) -> Bit {
        (m < 0) as Bit
    }
}

/// Table-lookup kernel over a designed [`LutSet`].
#[derive(Debug, Clone)]
pub struct LutKernel {
    set: LutSet,
    /// Indexed by heap id; index 0 is unused.
    nodes: Vec<NodeTables>,
    size: usize,
}

impl LutKernel {
    pub fn new(set: LutSet) -> Self {
        let size = set.size();
        let top = set.tables.keys().next_back().copied().unwrap_or(0);
        let mut nodes = vec![
            NodeTables {
                f: Vec::new(),
                g: Vec::new()
            };
            top + 1
        ];
        for (&id, t) in &set.tables {
            nodes[id] = t.clone();
        }
        Self { set, nodes, size }
    }

    pub fn set(&self) -> &LutSet {
        &self.set
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn tables(&self, node: usize) -> Result<&NodeTables> {
        self.nodes
            .get(node)
            .filter(|t| !t.f.is_empty())
            .ok_or_else(|| Error::Corruption(format!("no tables for node {node}")))
    }

    fn check(&self, t: Label) -> Result<usize> {
        if (t as usize) < self.size {
            Ok(t as usize)
        } else {
            Err(Error::Corruption(format!(
                "message {t} outside an alphabet of {}",
                self.size
            )))
        }
    }

    pub fn f_lut(&self, node: usize, a: Label, b: Label) -> Result<Label> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        Ok(self.tables(node)?.f[a * self.size + b])
    }

    pub fn g_lut(&self, node: usize, a: Label, b: Label, bit: Bit) -> Result<Label> {
        let (a, b) = (self.check(a)?, self.check(b)?);
        Ok(self.tables(node)?.g[(a * self.size + b) * 2 + (bit & 1) as usize])
    }
}

impl Kernel for LutKernel {
    type Msg = Label;

    fn name(&self) -> String {
        self.set.variant.name().into()
    }

    fn map_channel(&self, llr: f64) -> Label {
        self.set.channel.quantize(llr)
    }

    fn f(&self, node: usize, a: Label, b: Label) -> Label {
        self.nodes[node].f[a as usize * self.size + b as usize]
    }

    fn g(&self, node: usize, a: Label, b: Label, bit: Bit) -> Label {
        self.nodes[node].g[(a as usize * self.size + b as usize) * 2 + bit as usize]
    }

    fn hard_decision(&self, t: Label) -> Bit {
        hard_decision_lut(self.size, t)
    }
}
