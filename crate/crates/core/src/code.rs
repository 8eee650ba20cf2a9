//! Polar code definition, encoders and the pruned SSC decoder tree.
//!
//! Bit order follows the encoding graph top to bottom: index 0 is `u_0` on the
//! input side and `x_0` on the codeword side.

use serde::{Deserialize, Serialize};

use crate::error::{param, Result};
use crate::{ebn0_to_sigma, quantdesign, Bit};

/// Static definition of an `(N, k)` polar code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PolarCodeFile", into = "PolarCodeFile")]
pub struct PolarCode {
    n_bits: usize,
    k: usize,
    design_ebn0_db: f64,
    frozen: Vec<usize>,
    frozen_mask: Vec<bool>,
}

/// On-disk form: `{"n_bits", "k", "design_ebn0_db", "frozen"}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct PolarCodeFile {
    n_bits: usize,
    k: usize,
    design_ebn0_db: f64,
    frozen: Vec<usize>,
}

impl TryFrom<PolarCodeFile> for PolarCode {
    type Error = crate::Error;

    fn try_from(f: PolarCodeFile) -> Result<Self> {
        PolarCode::new(f.n_bits, f.k, f.design_ebn0_db, f.frozen)
    }
}

impl From<PolarCode> for PolarCodeFile {
    fn from(c: PolarCode) -> Self {
        PolarCodeFile {
            n_bits: c.n_bits,
            k: c.k,
            design_ebn0_db: c.design_ebn0_db,
            frozen: c.frozen,
        }
    }
}

fn check_length(n_bits: usize) -> Result<()> {
    if n_bits < 1 || !n_bits.is_power_of_two() {
        return param(format!("block length {n_bits} is not a power of two"));
    }
    Ok(())
}

impl PolarCode {
    /// Builds a code from an explicit frozen set. The set is sorted and must
    /// hold exactly `n_bits - k` distinct indices below `n_bits`.
    pub fn new(
        n_bits: usize,
        k: usize,
        design_ebn0_db: f64,
        mut frozen: Vec<usize>,
    ) -> Result<Self> {
        check_length(n_bits)?;
        if k > n_bits {
            return param(format!("k = {k} exceeds N = {n_bits}"));
        }
        frozen.sort_unstable();
        frozen.dedup();
        if frozen.len() != n_bits - k {
            return param(format!(
                "frozen set holds {} distinct indices, expected N - k = {}",
                frozen.len(),
                n_bits - k
            ));
        }
        if let Some(&bad) = frozen.iter().find(|&&i| i >= n_bits) {
            return param(format!("frozen index {bad} out of range for N = {n_bits}"));
        }
        let mut frozen_mask = vec![false; n_bits];
        for &i in &frozen {
            frozen_mask[i] = true;
        }
        Ok(Self {
            n_bits,
            k,
            design_ebn0_db,
            frozen,
            frozen_mask,
        })
    }

    /// Freezes the `N - k` least reliable bit channels of a length-`n_bits`
    /// code designed for `design_ebn0_db` (channel noise taken at rate
    /// `k / N`). Reliabilities come from quantized density evolution with a
    /// `fidelity`-level message alphabet.
    pub fn construct(
        n_bits: usize,
        k: usize,
        design_ebn0_db: f64,
        fidelity: usize,
    ) -> Result<Self> {
        check_length(n_bits)?;
        if k == 0 || k > n_bits {
            return param(format!("k = {k} must satisfy 0 < k <= N = {n_bits}"));
        }
        if fidelity < 16 || !fidelity.is_power_of_two() {
            return param(format!("fidelity {fidelity} must be a power of two >= 16"));
        }
        let sigma = ebn0_to_sigma(design_ebn0_db, k as f64 / n_bits as f64);
        let order = reliability_order(n_bits, sigma, fidelity)?;
        Self::new(n_bits, k, design_ebn0_db, frozen_from_order(&order, k))
    }

    pub fn len(&self) -> usize {
        self.n_bits
    }

    pub fn is_empty(&self) -> bool {
        self.n_bits == 0
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `log2(N)`.
    pub fn stages(&self) -> u32 {
        self.n_bits.trailing_zeros()
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n_bits as f64
    }

    pub fn design_ebn0_db(&self) -> f64 {
        self.design_ebn0_db
    }

    /// Sorted frozen indices.
    pub fn frozen(&self) -> &[usize] {
        &self.frozen
    }

    pub fn frozen_mask(&self) -> &[bool] {
        &self.frozen_mask
    }

    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i]
    }

    /// Information indices in ascending order.
    pub fn info_indices(&self) -> Vec<usize> {
        (0..self.n_bits).filter(|&i| !self.frozen_mask[i]).collect()
    }

    /// `x = u F^{(x)n}` over GF(2).
    pub fn encode_nonsystematic(&self, u: &[Bit]) -> Result<Vec<Bit>> {
        if u.len() != self.n_bits {
            return param(format!(
                "input has {} bits, expected {}",
                u.len(),
                self.n_bits
            ));
        }
        let mut x = u.to_vec();
        butterfly(&mut x);
        Ok(x)
    }

    /// Systematic encoding: the message lands verbatim on the information
    /// positions of the returned codeword. This holds when the information
    /// set is closed under binary domination (`i` information and every bit
    /// of `i` set in `j` makes `j` information), as for every constructed
    /// code; for other frozen sets the result is still a codeword.
    pub fn encode_systematic(&self, msg: &[Bit]) -> Result<Vec<Bit>> {
        if msg.len() != self.k {
            return param(format!(
                "message has {} bits, expected k = {}",
                msg.len(),
                self.k
            ));
        }
        let mut v = vec![0; self.n_bits];
        for (&i, &b) in self.info_indices().iter().zip(msg) {
            v[i] = b;
        }
        butterfly(&mut v);
        for &i in &self.frozen {
            v[i] = 0;
        }
        butterfly(&mut v);
        Ok(v)
    }

    /// Reads the information positions of a codeword, ascending.
    pub fn extract_message(&self, codeword: &[Bit]) -> Vec<Bit> {
        debug_assert_eq!(codeword.len(), self.n_bits);
        codeword
            .iter()
            .zip(&self.frozen_mask)
            .filter(|(_, &f)| !f)
            .map(|(&b, _)| b)
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// In-place GF(2) product with `F^{(x)n}`; an involution.
pub fn butterfly(x: &mut [Bit]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in x.chunks_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (a, b) in lo.iter_mut().zip(hi.iter()) {
                *a ^= *b;
            }
        }
        half *= 2;
    }
}

/// Bit-channel indices sorted from least to most reliable. Equal error
/// probabilities order the smaller index first.
pub fn reliability_order(n_bits: usize, sigma: f64, fidelity: usize) -> Result<Vec<usize>> {
    check_length(n_bits)?;
    let pe = quantdesign::bit_channel_error_probabilities(n_bits, sigma, fidelity)?;
    let mut order: Vec<usize> = (0..n_bits).collect();
    order.sort_by(|&a, &b| pe[b].total_cmp(&pe[a]).then(a.cmp(&b)));
    Ok(order)
}

/// The first `N - k` entries of a least-to-most-reliable order.
pub fn frozen_from_order(order: &[usize], k: usize) -> Vec<usize> {
    let mut frozen = order[..order.len() - k].to_vec();
    frozen.sort_unstable();
    frozen
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    Rate0,
    Rate1,
    Internal { left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNode {
    /// Heap index in the unpruned tree: root 1, children `2i` and `2i + 1`.
    pub heap_id: usize,
    /// First leaf index covered.
    pub lo: usize,
    pub len: usize,
    pub kind: NodeKind,
}

impl TreeNode {
    pub fn hi(&self) -> usize {
        self.lo + self.len
    }
}

/// Maximally pruned SSC decoder tree stored as an arena.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderTree {
    nodes: Vec<TreeNode>,
    root: usize,
}

impl DecoderTree {
    pub fn build(code: &PolarCode) -> Self {
        Self::build_with(code, true)
    }

    /// The full SC tree: every leaf has length 1 and nothing is pruned.
    pub fn unpruned(code: &PolarCode) -> Self {
        Self::build_with(code, false)
    }

    fn build_with(code: &PolarCode, prune: bool) -> Self {
        let mut tree = DecoderTree {
            nodes: Vec::with_capacity(2 * code.len()),
            root: 0,
        };
        tree.root = tree.grow(code.frozen_mask(), 1, 0, code.len(), prune);
        tree
    }

    fn grow(&mut self, mask: &[bool], heap_id: usize, lo: usize, len: usize, prune: bool) -> usize {
        let span = &mask[lo..lo + len];
        let kind = if (prune || len == 1) && span.iter().all(|&f| f) {
            NodeKind::Rate0
        } else if (prune || len == 1) && span.iter().all(|&f| !f) {
            NodeKind::Rate1
        } else {
            let half = len / 2;
            let left = self.grow(mask, 2 * heap_id, lo, half, prune);
            let right = self.grow(mask, 2 * heap_id + 1, lo + half, half, prune);
            NodeKind::Internal { left, right }
        };
        self.nodes.push(TreeNode {
            heap_id,
            lo,
            len,
            kind,
        });
        self.nodes.len() - 1
    }

    pub fn root(&self) -> &TreeNode {
        &self.nodes[self.root]
    }

    pub fn root_index(&self) -> usize {
        self.root
    }

    pub fn node(&self, idx: usize) -> &TreeNode {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[TreeNode] {
        &self.nodes
    }

    /// Leaves in decoding order (left to right).
    pub fn leaves(&self) -> Vec<&TreeNode> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(i) = stack.pop() {
            let node = &self.nodes[i];
            match node.kind {
                NodeKind::Internal { left, right } => {
                    stack.push(right);
                    stack.push(left);
                }
                _ => out.push(node),
            }
        }
        out
    }

    pub fn count(&self, pred: impl Fn(&NodeKind) -> bool) -> usize {
        self.nodes.iter().filter(|n| pred(&n.kind)).count()
    }

    /// Depth-first rendering such as `I(R0(2),I(R0(1),R1(1)))` for tests.
    pub fn shape(&self) -> String {
        fn go(t: &DecoderTree, i: usize, out: &mut String) {
            let n = &t.nodes[i];
            match n.kind {
                NodeKind::Rate0 => out.push_str(&format!("R0({})", n.len)),
                NodeKind::Rate1 => out.push_str(&format!("R1({})", n.len)),
                NodeKind::Internal { left, right } => {
                    out.push_str("I(");
                    go(t, left, out);
                    out.push(',');
                    go(t, right, out);
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        go(self, self.root, &mut s);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn code_8_5() -> PolarCode {
        PolarCode::new(8, 5, 3.0, vec![0, 1, 2]).unwrap()
    }

    /// Dense `F^{(x)n}` built by explicit Kronecker products.
    fn dense_kernel(n_bits: usize) -> Vec<Vec<u8>> {
        let mut m = vec![vec![1u8]];
        while m.len() < n_bits {
            let s = m.len();
            let mut next = vec![vec![0u8; 2 * s]; 2 * s];
            for r in 0..s {
                for c in 0..s {
                    next[r][c] = m[r][c];
                    next[r + s][c] = m[r][c];
                    next[r + s][c + s] = m[r][c];
                }
            }
            m = next;
        }
        m
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(PolarCode::new(6, 3, 0.0, vec![0, 1, 2]).is_err());
        assert!(PolarCode::new(8, 9, 0.0, vec![]).is_err());
        assert!(PolarCode::new(8, 5, 0.0, vec![0, 1]).is_err());
        assert!(PolarCode::new(8, 5, 0.0, vec![0, 1, 8]).is_err());
        assert!(PolarCode::construct(8, 0, 3.0, 16).is_err());
        assert!(PolarCode::construct(8, 4, 3.0, 8).is_err());
        assert!(PolarCode::construct(12, 4, 3.0, 16).is_err());
    }

    #[test]
    fn construct_small_codes() {
        let c = PolarCode::construct(8, 5, 3.0, 256).unwrap();
        assert_eq!(c.frozen(), &[0, 1, 2]);
        let c = PolarCode::construct(2, 2, 3.0, 16).unwrap();
        assert!(c.frozen().is_empty());
    }

    #[test]
    fn nonsystematic_examples() {
        let c = PolarCode::new(2, 2, 0.0, vec![]).unwrap();
        assert_eq!(c.encode_nonsystematic(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(c.encode_nonsystematic(&[0, 0]).unwrap(), vec![0, 0]);
        assert!(c.encode_nonsystematic(&[0]).is_err());
    }

    #[test]
    fn nonsystematic_matches_dense_product() {
        let c = code_8_5();
        let f = dense_kernel(8);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..64 {
            let u: Vec<u8> = (0..8).map(|_| rng.gen_range(0..2)).collect();
            let dense: Vec<u8> = (0..8)
                .map(|col| (0..8).fold(0, |acc, row| acc ^ (u[row] & f[row][col])))
                .collect();
            assert_eq!(c.encode_nonsystematic(&u).unwrap(), dense);
        }
    }

    #[test]
    fn systematic_examples() {
        let c = PolarCode::new(2, 1, 0.0, vec![0]).unwrap();
        assert_eq!(c.encode_systematic(&[1]).unwrap(), vec![1, 1]);
        let c = code_8_5();
        assert_eq!(c.encode_systematic(&[0; 5]).unwrap(), vec![0; 8]);
        assert!(c.encode_systematic(&[0; 4]).is_err());
    }

    #[test]
    fn systematic_round_trip_128() {
        let c = PolarCode::construct(128, 64, 3.0, 64).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let msg: Vec<u8> = (0..64).map(|_| rng.gen_range(0..2)).collect();
            let x = c.encode_systematic(&msg).unwrap();
            assert_eq!(c.extract_message(&x), msg);
            let mut u = x.clone();
            butterfly(&mut u);
            assert!(c.frozen().iter().all(|&i| u[i] == 0));
            assert_eq!(c.encode_nonsystematic(&u).unwrap(), x);
        }
    }

    #[test]
    fn tree_for_8_5_matches_pruned_figure() {
        let t = DecoderTree::build(&code_8_5());
        assert_eq!(t.shape(), "I(I(R0(2),I(R0(1),R1(1))),R1(4))");
        let heap: Vec<usize> = t.leaves().iter().map(|n| n.heap_id).collect();
        assert_eq!(heap, vec![4, 10, 11, 3]);
    }

    #[test]
    fn trivial_trees() {
        let all_frozen = PolarCode::new(8, 0, 0.0, (0..8).collect()).unwrap();
        assert_eq!(DecoderTree::build(&all_frozen).shape(), "R0(8)");
        let none = PolarCode::new(8, 8, 0.0, vec![]).unwrap();
        assert_eq!(DecoderTree::build(&none).shape(), "R1(8)");
        assert_eq!(DecoderTree::unpruned(&none).leaves().len(), 8);
    }

    #[test]
    fn json_shape() {
        let c = code_8_5();
        let v: serde_json::Value = serde_json::from_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(v["n_bits"], 8);
        assert_eq!(v["k"], 5);
        assert_eq!(v["frozen"], serde_json::json!([0, 1, 2]));
        assert_eq!(PolarCode::from_json(&c.to_json().unwrap()).unwrap(), c);
        assert!(
            PolarCode::from_json(r#"{"n_bits":8,"k":5,"design_ebn0_db":1,"frozen":[0]}"#).is_err()
        );
    }

    fn arb_code() -> impl Strategy<Value = PolarCode> {
        (1u32..=7)
            .prop_flat_map(|n| proptest::collection::vec(any::<bool>(), 1usize << n))
            .prop_map(|mask| {
                let frozen: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
                let k = mask.len() - frozen.len();
                PolarCode::new(mask.len(), k, 0.0, frozen).unwrap()
            })
    }

    proptest! {
        #[test]
        fn butterfly_is_an_involution(bits in (0u32..=8).prop_flat_map(|n| proptest::collection::vec(0u8..2, 1usize << n))) {
            let mut x = bits.clone();
            butterfly(&mut x);
            butterfly(&mut x);
            prop_assert_eq!(x, bits);
        }

        #[test]
        fn tree_leaves_partition_and_are_pure(code in arb_code()) {
            let t = DecoderTree::build(&code);
            let mut next = 0;
            for leaf in t.leaves() {
                prop_assert_eq!(leaf.lo, next);
                next = leaf.hi();
                let span = &code.frozen_mask()[leaf.lo..leaf.hi()];
                match leaf.kind {
                    NodeKind::Rate0 => prop_assert!(span.iter().all(|&f| f)),
                    NodeKind::Rate1 => prop_assert!(span.iter().all(|&f| !f)),
                    NodeKind::Internal { .. } => unreachable!(),
                }
            }
            prop_assert_eq!(next, code.len());
            for node in t.nodes() {
                if let NodeKind::Internal { left, right } = node.kind {
                    let (l, r) = (t.node(left), t.node(right));
                    prop_assert_eq!(l.len, node.len / 2);
                    prop_assert_eq!(r.len, node.len / 2);
                    let same_pure = matches!((l.kind, r.kind), (NodeKind::Rate0, NodeKind::Rate0) | (NodeKind::Rate1, NodeKind::Rate1));
                    prop_assert!(!same_pure);
                }
            }
        }
    }

    #[test]
    fn construction_nests_in_k_at_fixed_sigma() {
        let order = reliability_order(64, 0.8, 64).unwrap();
        let mut prev: Option<Vec<usize>> = None;
        for k in 1..=64 {
            let frozen = frozen_from_order(&order, k);
            if let Some(p) = &prev {
                assert!(frozen.iter().all(|i| p.contains(i)));
            }
            prev = Some(frozen);
        }
    }
}
