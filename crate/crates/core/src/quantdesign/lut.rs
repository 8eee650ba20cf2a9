//! Per-node decoding tables from quantized density evolution.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    design_channel_quantizer, f_density, g_density, ib_quantize, relabel, ChannelQuantizer,
    EdgeDistribution, Label, Labeling, MessageAlphabet, SourceSymbol, DEFAULT_GRID_SIZE,
};
use crate::error::{design, param, Result};
use crate::PolarCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LutVariant {
    #[serde(rename = "ib")]
    Ib,
    #[serde(rename = "ms-ib")]
    MsIb,
    #[serde(rename = "re-ms-ib")]
    ReMsIb,
}

impl LutVariant {
    pub fn name(self) -> &'static str {
        match self {
            LutVariant::Ib => "ib",
            LutVariant::MsIb => "ms-ib",
            LutVariant::ReMsIb => "re-ms-ib",
        }
    }

    pub fn labeling(self) -> Labeling {
        match self {
            LutVariant::ReMsIb => Labeling::Relabeled,
            _ => Labeling::Natural,
        }
    }
}

/// Tables of one internal tree node, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeTables {
    /// Indexed `t_a * |T| + t_b`.
    pub f: Vec<Label>,
    /// Indexed `(t_a * |T| + t_b) * 2 + u`.
    pub g: Vec<Label>,
}

impl NodeTables {
    fn conjugate(&self, size: usize) -> NodeTables {
        let rho = relabel_map(size);
        let mut f = vec![0; size * size];
        let mut g = vec![0; 2 * size * size];
        for a in 0..size {
            for b in 0..size {
                let (ra, rb) = (rho[a] as usize, rho[b] as usize);
                f[ra * size + rb] = rho[self.f[a * size + b] as usize];
                for u in 0..2 {
                    g[(ra * size + rb) * 2 + u] = rho[self.g[(a * size + b) * 2 + u] as usize];
                }
            }
        }
        NodeTables { f, g }
    }
}

/// A complete set of decoding tables for one code length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LutSet {
    pub variant: LutVariant,
    /// Channel message alphabet.
    pub alphabet: MessageAlphabet,
    pub channel: ChannelQuantizer,
    /// Keyed by heap id of the unpruned tree (root 1).
    pub tables: BTreeMap<usize, NodeTables>,
}

impl LutSet {
    pub fn size(&self) -> usize {
        self.alphabet.size
    }

    pub fn labeling(&self) -> Labeling {
        self.alphabet.labeling
    }

    pub fn table_count(&self) -> usize {
        2 * self.tables.len()
    }

    pub fn node(&self, heap_id: usize) -> Option<&NodeTables> {
        self.tables.get(&heap_id)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let set: LutSet = serde_json::from_str(s)?;
        let size = set.size();
        let bad = set.tables.values().any(|t| {
            t.f.len() != size * size
                || t.g.len() != 2 * size * size
                || t.f.iter().chain(&t.g).any(|&x| x as usize >= size)
        });
        if bad || set.channel.size() != size {
            return param("table dimensions do not match the alphabet");
        }
        Ok(set)
    }
}

#[derive(Debug, Clone)]
pub struct LutDesign {
    pub luts: LutSet,
    /// Hard-decision error probability of every bit channel `u_i`.
    pub leaf_error_probs: Vec<f64>,
}

/// `rho` as a lookup table.
pub fn relabel_map(size: usize) -> Vec<Label> {
    (0..size as Label).map(|t| relabel(size, t)).collect()
}

/// Min-sum `f` over natural labels: `t_o = f(t_a - D, t_b - D) + D` with
/// `D = (|T| - 1) / 2`, evaluated in doubled integers.
pub fn minsum_lut(size: usize) -> Vec<Label> {
    let off = size as i64 - 1;
    let mut out = Vec::with_capacity(size * size);
    for a in 0..size as i64 {
        for b in 0..size as i64 {
            let (a2, b2) = (2 * a - off, 2 * b - off);
            let mag = a2.abs().min(b2.abs());
            let o2 = if (a2 < 0) == (b2 < 0) { mag } else { -mag };
            out.push(((o2 + off) / 2) as Label);
        }
    }
    out
}

fn split(size: usize, t: Label) -> (bool, Label, u32) {
    let bits = size.trailing_zeros();
    let low = (size / 2 - 1) as Label;
    (t >> (bits - 1) == 1, t & low, bits)
}

/// Bit-level min-sum on natural labels: magnitudes of negative inputs are
/// bit-inverted before the compare, the sign is the inverted XOR of the
/// MSBs, and the magnitude is inverted back when the result is negative.
pub fn natural_minsum_circuit(size: usize, a: Label, b: Label) -> Label {
    let (sa, ma, bits) = split(size, a);
    let (sb, mb, _) = split(size, b);
    let low = (size / 2 - 1) as Label;
    let ma = if sa { ma } else { ma ^ low };
    let mb = if sb { mb } else { mb ^ low };
    let sign = !(sa ^ sb);
    let m = ma.min(mb);
    let m = if sign { m } else { m ^ low };
    ((sign as Label) << (bits - 1)) | m
}

/// Bit-level min-sum on relabeled labels: XNOR of the MSBs and the minimum
/// of the raw magnitude bits.
pub fn relabeled_minsum_circuit(size: usize, a: Label, b: Label) -> Label {
    let (sa, ma, bits) = split(size, a);
    let (sb, mb, _) = split(size, b);
    let sign = !(sa ^ sb);
    ((sign as Label) << (bits - 1)) | ma.min(mb)
}

/// Joint pmf of a fixed table's output, with each label's LLR read off the
/// pmf (or averaged over its members if a mass vanishes). The result is
/// averaged with its mirror image so that round-off cannot break symmetry.
fn push_through(symbols: &[SourceSymbol], table: &[Label], size: usize) -> EdgeDistribution {
    let mut pmf = vec![[0.0; 2]; size];
    let mut weighted = vec![0.0; size];
    let mut plain = vec![(0.0, 0usize); size];
    for (s, &t) in symbols.iter().zip(table) {
        let t = t as usize;
        pmf[t][0] += s.p[0];
        pmf[t][1] += s.p[1];
        weighted[t] += (s.p[0] + s.p[1]) * s.llr;
        plain[t].0 += s.llr;
        plain[t].1 += 1;
    }
    let h = size / 2;
    let mut out = EdgeDistribution {
        pmf: vec![[0.0; 2]; size],
        llr: vec![0.0; size],
    };
    for j in 0..h {
        let (t, m) = (h + j, h - 1 - j);
        let a = 0.5 * (pmf[t][0] + pmf[m][1]);
        let b = 0.5 * (pmf[t][1] + pmf[m][0]);
        let l = if a > 0.0 && b > 0.0 {
            (a / b).ln()
        } else if a + b > 0.0 {
            (weighted[t] - weighted[m]) / (2.0 * (a + b))
        } else {
            0.5 * (plain[t].0 / plain[t].1.max(1) as f64 - plain[m].0 / plain[m].1.max(1) as f64)
        };
        out.pmf[t] = [a, b];
        out.pmf[m] = [b, a];
        out.llr[t] = l;
        out.llr[m] = -l;
    }
    out
}

#[derive(Default)]
struct Evolution {
    tables: Vec<(usize, NodeTables)>,
    leaves: Vec<(usize, f64)>,
}

impl Evolution {
    fn extend(&mut self, other: Evolution) {
        self.tables.extend(other.tables);
        self.leaves.extend(other.leaves);
    }
}

/// Density evolution below node `heap_id` of length `len` whose input
/// messages follow `dist`.
fn evolve(
    dist: &EdgeDistribution,
    heap_id: usize,
    len: usize,
    n_bits: usize,
    minsum_f: Option<&[Label]>,
    keep_tables: bool,
) -> Result<Evolution> {
    if len == 1 {
        return Ok(Evolution {
            tables: Vec::new(),
            leaves: vec![(heap_id - n_bits, dist.error_probability())],
        });
    }
    let size = dist.size();
    let fs = f_density(dist, dist)?;
    let (f_table, f_out) = match minsum_f {
        Some(t) => (t.to_vec(), push_through(&fs, t, size)),
        None => {
            let q = ib_quantize(&fs, size)?;
            (q.labels, q.output)
        }
    };
    let gq = ib_quantize(&g_density(dist, dist)?, size)?;
    let (left, right) = rayon::join(
        || evolve(&f_out, 2 * heap_id, len / 2, n_bits, minsum_f, keep_tables),
        || {
            evolve(
                &gq.output,
                2 * heap_id + 1,
                len / 2,
                n_bits,
                minsum_f,
                keep_tables,
            )
        },
    );
    let mut out = Evolution::default();
    if keep_tables {
        out.tables.push((
            heap_id,
            NodeTables {
                f: f_table,
                g: gq.labels,
            },
        ));
    }
    out.extend(left?);
    out.extend(right?);
    Ok(out)
}

fn collect_leaves(mut leaves: Vec<(usize, f64)>) -> Vec<f64> {
    leaves.sort_by_key(|&(i, _)| i);
    leaves.into_iter().map(|(_, p)| p).collect()
}

/// Designs the `f`/`g` tables of every internal node of the unpruned tree
/// for `code`, starting from the quantized channel of `channel_q`.
///
/// `IB` quantizes both updates. `MsIb` fixes every `f` table to
/// [`minsum_lut`] and propagates the exact output density of that table.
/// `ReMsIb` is `MsIb` conjugated by the relabeling.
pub fn design_luts(
    code: &PolarCode,
    channel_q: &ChannelQuantizer,
    variant: LutVariant,
) -> Result<LutDesign> {
    let size = channel_q.size();
    let channel = &channel_q.distribution;
    if channel.size() != size {
        return design(format!(
            "channel distribution has {} labels, quantizer has {size}",
            channel.size()
        ));
    }
    let ms = minsum_lut(size);
    let minsum_f = (variant != LutVariant::Ib).then_some(ms.as_slice());
    let evo = evolve(channel, 1, code.len(), code.len(), minsum_f, true)?;

    let mut tables: BTreeMap<usize, NodeTables> = evo.tables.into_iter().collect();
    let mut channel = channel_q.clone();
    channel.labeling = Labeling::Natural;
    if variant == LutVariant::ReMsIb {
        for t in tables.values_mut() {
            *t = t.conjugate(size);
        }
        channel = channel.relabeled();
    }
    let mut alphabet = channel.distribution.alphabet();
    alphabet.labeling = variant.labeling();
    Ok(LutDesign {
        luts: LutSet {
            variant,
            alphabet,
            channel,
            tables,
        },
        leaf_error_probs: collect_leaves(evo.leaves),
    })
}

/// Bit-channel error probabilities of a length-`n_bits` code on the AWGN
/// channel, by IB density evolution over a `fidelity`-letter alphabet.
pub fn bit_channel_error_probabilities(
    n_bits: usize,
    sigma: f64,
    fidelity: usize,
) -> Result<Vec<f64>> {
    let grid = DEFAULT_GRID_SIZE.max(8 * fidelity);
    let q = design_channel_quantizer(sigma, fidelity, grid)?;
    let evo = evolve(&q.distribution, 1, n_bits, n_bits, None, false)?;
    Ok(collect_leaves(evo.leaves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantdesign::flip;
    use crate::{ebn0_to_sigma, PolarCode};

    fn minsum_oracle(size: usize, a: usize, b: usize) -> usize {
        let d = (size as f64 - 1.0) / 2.0;
        let (x, y) = (a as f64 - d, b as f64 - d);
        let s = if x * y >= 0.0 { 1.0 } else { -1.0 };
        let o = s * x.abs().min(y.abs()) + d;
        assert_eq!(o.fract(), 0.0);
        o as usize
    }

    fn design_at(n_bits: usize, variant: LutVariant) -> LutDesign {
        let code = PolarCode::new(n_bits, n_bits / 2, 3.0, (0..n_bits / 2).collect()).unwrap();
        let q = design_channel_quantizer(ebn0_to_sigma(3.0, 0.5), 16, DEFAULT_GRID_SIZE).unwrap();
        design_luts(&code, &q, variant).unwrap()
    }

    #[test]
    fn minsum_examples() {
        let t = minsum_lut(8);
        assert_eq!(t[7 * 8 + 7], 7);
        assert_eq!(t[7], 0);
        assert_eq!(t[0], 7);
        assert_eq!(minsum_lut(16)[15 * 16 + 15], 15);
    }

    #[test]
    fn minsum_matches_real_arithmetic_and_circuits() {
        for size in [4usize, 8, 16] {
            let t = minsum_lut(size);
            let rho = relabel_map(size);
            for a in 0..size {
                for b in 0..size {
                    let o = t[a * size + b];
                    assert_eq!(o as usize, minsum_oracle(size, a, b));
                    assert_eq!(natural_minsum_circuit(size, a as Label, b as Label), o);
                    assert_eq!(
                        relabeled_minsum_circuit(size, rho[a], rho[b]),
                        rho[o as usize]
                    );
                }
            }
        }
        assert_eq!(relabeled_minsum_circuit(16, 8, 8), 8);
    }

    #[test]
    fn relabel_map_examples() {
        assert_eq!(relabel_map(8), vec![3, 2, 1, 0, 4, 5, 6, 7]);
        let r = relabel_map(16);
        assert_eq!(&r[..8], &[7, 6, 5, 4, 3, 2, 1, 0]);
        assert!((8..16).all(|t| r[t] == t as Label));
        assert!((0..16).all(|t| r[r[t] as usize] == t as Label));
    }

    #[test]
    fn table_counts() {
        let d = design_at(8, LutVariant::Ib);
        assert_eq!(d.luts.table_count(), 14);
        assert_eq!(
            d.luts.tables.keys().copied().collect::<Vec<_>>(),
            (1..8).collect::<Vec<_>>()
        );
        assert_eq!(d.leaf_error_probs.len(), 8);
        let ms = design_at(8, LutVariant::MsIb);
        let distinct: std::collections::HashSet<_> =
            ms.luts.tables.values().map(|t| t.f.clone()).collect();
        assert_eq!(distinct.len(), 1);
    }

    #[test]
    fn relabeled_tables_are_conjugates() {
        let ms = design_at(16, LutVariant::MsIb).luts;
        let re = design_at(16, LutVariant::ReMsIb).luts;
        let size = 16;
        let rho = relabel_map(size);
        for (id, m) in &ms.tables {
            let r = &re.tables[id];
            for a in 0..size {
                for b in 0..size {
                    let (ra, rb) = (rho[a] as usize, rho[b] as usize);
                    assert_eq!(r.f[ra * size + rb], rho[m.f[a * size + b] as usize]);
                    for u in 0..2 {
                        assert_eq!(
                            r.g[(ra * size + rb) * 2 + u],
                            rho[m.g[(a * size + b) * 2 + u] as usize]
                        );
                    }
                }
            }
        }
        for llr in [-3.0, -0.2, 0.0, 0.4, 9.0] {
            assert_eq!(
                re.channel.quantize(llr),
                rho[ms.channel.quantize(llr) as usize]
            );
        }
    }

    #[test]
    fn table_invariants() {
        let size = 16;
        let h = size / 2;
        for variant in [LutVariant::Ib, LutVariant::MsIb] {
            let d = design_at(32, variant);
            for t in d.luts.tables.values() {
                for a in 0..size {
                    for b in 0..size {
                        let o = t.f[a * size + b] as usize;
                        assert!(o < size);
                        assert_eq!(o >= h, (a >= h) == (b >= h), "{variant:?} f({a},{b}) = {o}");
                        let g1 = t.g[(a * size + b) * 2 + 1];
                        let g0 = t.g[(flip(size, a as Label) as usize * size + b) * 2];
                        assert_eq!(g1, g0);
                        if b + 1 < size {
                            assert!(
                                t.g[(a * size + b) * 2] <= t.g[(a * size + b + 1) * 2],
                                "{variant:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bit_channels_polarize() {
        let sigma = ebn0_to_sigma(3.0, 0.5);
        let pe = bit_channel_error_probabilities(8, sigma, 32).unwrap();
        assert!(pe[0] > pe[7]);
        assert!(pe.iter().all(|&p| (0.0..=0.5).contains(&p)));
        // Degraded then upgraded branch of a single butterfly.
        let pe2 = bit_channel_error_probabilities(2, sigma, 32).unwrap();
        let p = bit_channel_error_probabilities(1, sigma, 32).unwrap()[0];
        assert!(pe2[0] > p && pe2[1] < p);
    }

    #[test]
    fn json_round_trip() {
        let d = design_at(4, LutVariant::ReMsIb);
        let s = d.luts.to_json().unwrap();
        assert!(s.contains("\"re-ms-ib\"") && s.contains("\"relabeled\""));
        assert_eq!(LutSet::from_json(&s).unwrap(), d.luts);
    }
}
