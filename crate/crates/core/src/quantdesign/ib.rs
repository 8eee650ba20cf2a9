//! Optimal symmetric information-bottleneck quantizer for binary-input
//! sources.
//!
//! For a binary relevant variable the clusters of an optimal deterministic
//! quantizer are contiguous in LLR order, so the search reduces to choosing
//! boundaries. Only the positive-LLR half is optimized; the negative half is
//! its mirror image, which keeps the output alphabet anti-symmetric.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::{mi_bits, EdgeDistribution, Label};
use crate::error::{design, param, Result};

/// One source symbol `s` of a joint pmf `p(x, s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceSymbol {
    /// `[p(x = 0, s), p(x = 1, s)]`.
    pub p: [f64; 2],
    /// Sort key: the LLR of `s`. Kept separately from `p` so that symbols
    /// with vanishing probability still have a well-defined position.
    pub llr: f64,
    /// Side taken by a zero-LLR symbol. Mirror-image symbols must disagree.
    pub positive_on_zero: bool,
}

impl SourceSymbol {
    fn is_positive(&self) -> bool {
        self.llr > 0.0 || (self.llr == 0.0 && self.positive_on_zero)
    }
}

/// Result of [`ib_quantize`].
#[derive(Debug, Clone)]
pub struct Quantization {
    /// Natural label assigned to each source symbol, in input order.
    pub labels: Vec<Label>,
    /// `p(x, t)` of the quantized output.
    pub output: EdgeDistribution,
    /// `I(X;T)` in bits.
    pub mutual_information: f64,
}

/// `I(X;S)` in bits of an unquantized source.
pub fn mutual_information(source: &[SourceSymbol]) -> f64 {
    mi_bits(source.iter().map(|s| s.p))
}

/// Above this many distinct positive LLR values, adjacent values are first
/// merged greedily (smallest information loss first) before the exact
/// boundary search.
const PREMERGE_LIMIT: usize = 2048;

/// Largest `groups^2 * clusters` solved by the plain cubic recurrence.
const FULL_DP_BUDGET: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
struct Group {
    /// Range in the sorted positive-symbol list.
    start: usize,
    end: usize,
    p: [f64; 2],
    min_llr: f64,
    max_llr: f64,
    llr_sum: f64,
    weighted_llr: f64,
}

impl Group {
    fn absorb(&mut self, other: &Group) {
        debug_assert_eq!(self.end, other.start);
        self.end = other.end;
        self.p[0] += other.p[0];
        self.p[1] += other.p[1];
        self.min_llr = self.min_llr.min(other.min_llr);
        self.max_llr = self.max_llr.max(other.max_llr);
        self.llr_sum += other.llr_sum;
        self.weighted_llr += other.weighted_llr;
    }
}

/// Contribution of one positive cluster (and implicitly its mirror) to
/// `I(X;T)`, in nats, with `p(x) = 1/2`.
fn cluster_info(a: f64, b: f64) -> f64 {
    let a = a.max(0.0);
    let b = b.max(0.0);
    let s = a + b;
    if s <= 0.0 {
        return 0.0;
    }
    let mut v = 0.0;
    if a > 0.0 {
        v += a * (2.0 * a / s).ln();
    }
    if b > 0.0 {
        v += b * (2.0 * b / s).ln();
    }
    v
}

/// Maps source symbols onto a `size`-letter natural alphabet maximizing
/// `I(X;T)` over symmetric partitions that are contiguous in LLR order.
///
/// Symbols may come in any order; they are sorted by `llr` internally.
pub fn ib_quantize(source: &[SourceSymbol], size: usize) -> Result<Quantization> {
    if size < 2 || !size.is_power_of_two() {
        return param(format!("alphabet size {size} must be a power of two >= 2"));
    }
    let mut total = 0.0;
    for s in source {
        if !(s.p[0] >= 0.0 && s.p[1] >= 0.0 && s.p[0].is_finite() && s.p[1].is_finite())
            || s.llr.is_nan()
        {
            return param(format!("invalid source symbol {s:?}"));
        }
        total += s.p[0] + s.p[1];
    }
    if (total - 1.0).abs() > 1e-9 {
        return param(format!("source pmf sums to {total}, not 1"));
    }

    let half = size / 2;
    let mut pos: Vec<usize> = (0..source.len())
        .filter(|&i| source[i].is_positive())
        .collect();
    pos.sort_by(|&a, &b| source[a].llr.total_cmp(&source[b].llr).then(a.cmp(&b)));

    let mut groups = group_equal_llrs(source, &pos);
    if groups.is_empty() {
        return design("source has no positive LLR values");
    }
    if groups.len() > PREMERGE_LIMIT.max(16 * half) {
        groups = greedy_merge(groups, PREMERGE_LIMIT.max(16 * half));
    }
    // A source concentrated on fewer values than labels leaves the innermost
    // labels empty.
    let clusters = groups.len().min(half);
    let empty = half - clusters;

    let starts = optimal_boundaries(&groups, clusters);

    // Cluster j spans groups[starts[j]..starts[j + 1]].
    let mut labels = vec![0 as Label; source.len()];
    let mut pmf = vec![[0.0; 2]; size];
    let mut llr = vec![0.0; size];
    let mut cuts = Vec::with_capacity(clusters);
    for j in 0..clusters {
        let g0 = starts[j];
        let g1 = if j + 1 < clusters {
            starts[j + 1]
        } else {
            groups.len()
        };
        let mut merged = groups[g0];
        for g in &groups[g0 + 1..g1] {
            merged.absorb(g);
        }
        let t = half + empty + j;
        for &i in &pos[merged.start..merged.end] {
            labels[i] = t as Label;
        }
        cuts.push(merged.min_llr);
        let [a, b] = merged.p;
        let l = if a > 0.0 && b > 0.0 {
            (a / b).ln()
        } else if a + b > 0.0 {
            merged.weighted_llr / (a + b)
        } else {
            merged.llr_sum / (merged.end - merged.start) as f64
        };
        pmf[t] = [a, b];
        pmf[size - 1 - t] = [b, a];
        llr[t] = l;
        llr[size - 1 - t] = -l;
    }
    let weakest = llr[half + empty];
    for e in 0..empty {
        let l = weakest * (e + 1) as f64 / (empty + 1) as f64;
        llr[half + e] = l;
        llr[half - 1 - e] = -l;
    }

    // Negative-side symbols follow the mirrored cut points.
    for (i, s) in source.iter().enumerate() {
        if s.is_positive() {
            continue;
        }
        let m = -s.llr;
        let j = (1..clusters).rev().find(|&j| cuts[j] <= m).unwrap_or(0);
        labels[i] = (half - 1 - empty - j) as Label;
    }

    let output = EdgeDistribution { pmf, llr };
    let mutual_information = output.mutual_information();
    Ok(Quantization {
        labels,
        output,
        mutual_information,
    })
}

fn group_equal_llrs(source: &[SourceSymbol], pos: &[usize]) -> Vec<Group> {
    let mut groups: Vec<Group> = Vec::new();
    for (k, &i) in pos.iter().enumerate() {
        let s = &source[i];
        let g = Group {
            start: k,
            end: k + 1,
            p: s.p,
            min_llr: s.llr,
            max_llr: s.llr,
            llr_sum: s.llr,
            weighted_llr: (s.p[0] + s.p[1]) * s.llr,
        };
        match groups.last_mut() {
            // Positive-side LLRs are >= 0, so a zero sum means an all-zero
            // group; it is folded into the weakest positive group so that no
            // positive label ends up carrying a zero LLR.
            Some(last) if last.max_llr == s.llr || last.llr_sum == 0.0 => last.absorb(&g),
            _ => groups.push(g),
        }
    }
    groups
}

#[derive(Debug)]
struct MergeCandidate {
    loss: f64,
    left: usize,
    stamp: (u32, u32),
}

impl PartialEq for MergeCandidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for MergeCandidate {}

impl PartialOrd for MergeCandidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for MergeCandidate {
    // Min-heap on (loss, left).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .loss
            .total_cmp(&self.loss)
            .then(other.left.cmp(&self.left))
    }
}

fn merge_loss(a: &Group, b: &Group) -> f64 {
    cluster_info(a.p[0], a.p[1]) + cluster_info(b.p[0], b.p[1])
        - cluster_info(a.p[0] + b.p[0], a.p[1] + b.p[1])
}

/// Repeatedly merges the adjacent pair losing the least information until
/// `target` groups remain.
fn greedy_merge(mut groups: Vec<Group>, target: usize) -> Vec<Group> {
    let n = groups.len();
    let mut next: Vec<usize> = (1..=n).collect();
    let mut prev: Vec<usize> = (0..n).map(|i| i.wrapping_sub(1)).collect();
    let mut alive = vec![true; n];
    let mut version = vec![0u32; n];
    let mut heap = BinaryHeap::with_capacity(n);
    for i in 0..n - 1 {
        heap.push(MergeCandidate {
            loss: merge_loss(&groups[i], &groups[i + 1]),
            left: i,
            stamp: (0, 0),
        });
    }
    let mut remaining = n;
    while remaining > target {
        let Some(c) = heap.pop() else { break };
        let l = c.left;
        let r = next[l];
        if !alive[l] || r >= n || (version[l], version[r]) != c.stamp {
            continue;
        }
        let absorbed = groups[r];
        groups[l].absorb(&absorbed);
        alive[r] = false;
        next[l] = next[r];
        if next[l] < n {
            prev[next[l]] = l;
        }
        version[l] += 1;
        remaining -= 1;
        let p = prev[l];
        if p < n {
            heap.push(MergeCandidate {
                loss: merge_loss(&groups[p], &groups[l]),
                left: p,
                stamp: (version[p], version[l]),
            });
        }
        let q = next[l];
        if q < n {
            heap.push(MergeCandidate {
                loss: merge_loss(&groups[l], &groups[q]),
                left: l,
                stamp: (version[l], version[q]),
            });
        }
    }
    groups
        .into_iter()
        .zip(alive)
        .filter_map(|(g, a)| a.then_some(g))
        .collect()
}

/// Start index (into `groups`) of each of `clusters` contiguous clusters
/// maximizing the summed cluster information. At equal value the smaller
/// split point wins at every stage.
fn optimal_boundaries(groups: &[Group], clusters: usize) -> Vec<usize> {
    let g = groups.len();
    let mut pa = vec![0.0; g + 1];
    let mut pb = vec![0.0; g + 1];
    for (i, grp) in groups.iter().enumerate() {
        pa[i + 1] = pa[i] + grp.p[0];
        pb[i + 1] = pb[i] + grp.p[1];
    }
    let w = |i: usize, j: usize| cluster_info(pa[j] - pa[i], pb[j] - pb[i]);

    // value[k][j]: best value of k + 1 clusters over groups[..j].
    let mut value = vec![vec![f64::NEG_INFINITY; g + 1]; clusters];
    let mut arg = vec![vec![0usize; g + 1]; clusters];
    for (j, v) in value[0].iter_mut().enumerate().skip(1) {
        *v = w(0, j);
    }
    let full = g.saturating_mul(g).saturating_mul(clusters) <= FULL_DP_BUDGET;
    for k in 1..clusters {
        let (before, after) = value.split_at_mut(k);
        let prev = &before[k - 1];
        let cur = &mut after[0];
        let args = &mut arg[k];
        if full {
            for j in (k + 1)..=g {
                let (best, at) = best_split(prev, &w, j, k, j - 1);
                cur[j] = best;
                args[j] = at;
            }
        } else {
            divide_and_conquer(prev, cur, args, &w, k, k + 1, g, k, g - 1);
        }
    }

    let mut starts = vec![0; clusters];
    let mut j = g;
    for k in (1..clusters).rev() {
        let i = arg[k][j];
        starts[k] = i;
        j = i;
    }
    starts
}

fn best_split(
    prev: &[f64],
    w: &impl Fn(usize, usize) -> f64,
    j: usize,
    lo: usize,
    hi: usize,
) -> (f64, usize) {
    let mut best = f64::NEG_INFINITY;
    let mut at = lo;
    for (i, &p) in prev.iter().enumerate().take(hi.min(j - 1) + 1).skip(lo) {
        let v = p + w(i, j);
        if v > best {
            best = v;
            at = i;
        }
    }
    (best, at)
}

/// Monotone-argmax recursion; valid because the cluster information
/// satisfies the Monge property over LLR-sorted groups.
#[allow(clippy::too_many_arguments)]
fn divide_and_conquer(
    prev: &[f64],
    cur: &mut [f64],
    args: &mut [usize],
    w: &impl Fn(usize, usize) -> f64,
    k: usize,
    j_lo: usize,
    j_hi: usize,
    opt_lo: usize,
    opt_hi: usize,
) {
    if j_lo > j_hi {
        return;
    }
    let mid = (j_lo + j_hi) / 2;
    let lo = opt_lo.max(k);
    let (best, at) = best_split(prev, w, mid, lo, opt_hi);
    cur[mid] = best;
    args[mid] = at;
    if mid > j_lo {
        divide_and_conquer(prev, cur, args, w, k, j_lo, mid - 1, opt_lo, at);
    }
    divide_and_conquer(prev, cur, args, w, k, mid + 1, j_hi, at, opt_hi);
}
