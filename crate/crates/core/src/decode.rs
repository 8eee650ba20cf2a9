//! Successive-cancellation decoding over the full and the pruned tree.
//!
//! Both engines keep one `alpha` slice per tree depth (a node of length `L`
//! works in `alpha[L..2L]`, the channel sits in `alpha[N..2N]`) and build the
//! bit estimates in place in a single length-`N` buffer.

use crate::code::{butterfly, DecoderTree, NodeKind, PolarCode};
use crate::error::{param, Result};
use crate::kernels::Kernel;
use crate::Bit;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecodeOutput {
    /// Root bit estimate `beta`.
    pub codeword: Vec<Bit>,
    /// Codeword bits at the information positions.
    pub message: Vec<Bit>,
    /// `beta` mapped back through the transform.
    pub u: Vec<Bit>,
}

fn finish(code: &PolarCode, codeword: Vec<Bit>) -> DecodeOutput {
    let message = code.extract_message(&codeword);
    let mut u = codeword.clone();
    butterfly(&mut u);
    DecodeOutput {
        codeword,
        message,
        u,
    }
}

pub fn extract_message(code: &PolarCode, codeword: &[Bit]) -> Vec<Bit> {
    code.extract_message(codeword)
}

fn prepare<K: Kernel>(code: &PolarCode, input: &[K::Msg]) -> Result<Vec<K::Msg>> {
    let n = code.len();
    if input.len() != n {
        return param(format!(
            "{} channel messages for a length-{n} code",
            input.len()
        ));
    }
    let mut alpha = vec![K::Msg::default(); 2 * n];
    alpha[n..].copy_from_slice(input);
    Ok(alpha)
}

fn f_step<K: Kernel>(kernel: &K, alpha: &mut [K::Msg], node: usize, len: usize) {
    let h = len / 2;
    let (child, parent) = alpha.split_at_mut(len);
    let parent = &parent[..len];
    for i in 0..h {
        child[h + i] = kernel.f(node, parent[i], parent[i + h]);
    }
}

fn g_step<K: Kernel>(kernel: &K, alpha: &mut [K::Msg], beta_l: &[Bit], node: usize, len: usize) {
    let h = len / 2;
    let (child, parent) = alpha.split_at_mut(len);
    let parent = &parent[..len];
    for i in 0..h {
        child[h + i] = kernel.g(node, parent[i], parent[i + h], beta_l[i]);
    }
}

fn combine_in_place(beta: &mut [Bit]) {
    let h = beta.len() / 2;
    let (l, r) = beta.split_at_mut(h);
    for (a, b) in l.iter_mut().zip(r.iter()) {
        *a ^= *b;
    }
}

/// Plain SC decoding over the unpruned tree.
pub fn decode_sc<K: Kernel>(
    code: &PolarCode,
    kernel: &K,
    input: &[K::Msg],
) -> Result<DecodeOutput> {
    let mut alpha = prepare::<K>(code, input)?;
    let mut beta = vec![0; code.len()];
    sc_node(code, kernel, &mut alpha, &mut beta, 1, 0, code.len());
    Ok(finish(code, beta))
}

fn sc_node<K: Kernel>(
    code: &PolarCode,
    kernel: &K,
    alpha: &mut [K::Msg],
    beta: &mut [Bit],
    heap_id: usize,
    lo: usize,
    len: usize,
) {
    if len == 1 {
        beta[lo] = if code.is_frozen(lo) {
            0
        } else {
            kernel.hard_decision(alpha[1])
        };
        return;
    }
    let h = len / 2;
    f_step(kernel, alpha, heap_id, len);
    sc_node(code, kernel, alpha, beta, 2 * heap_id, lo, h);
    g_step(kernel, alpha, &beta[lo..lo + h], heap_id, len);
    sc_node(code, kernel, alpha, beta, 2 * heap_id + 1, lo + h, h);
    combine_in_place(&mut beta[lo..lo + len]);
}

/// SSC decoding over the pruned tree built from the same code.
pub fn decode_ssc<K: Kernel>(
    code: &PolarCode,
    tree: &DecoderTree,
    kernel: &K,
    input: &[K::Msg],
) -> Result<DecodeOutput> {
    if tree.root().len != code.len() {
        return param("decoder tree does not match the code length");
    }
    let mut alpha = prepare::<K>(code, input)?;
    let mut beta = vec![0; code.len()];
    ssc_node(tree, kernel, &mut alpha, &mut beta, tree.root_index());
    Ok(finish(code, beta))
}

fn ssc_node<K: Kernel>(
    tree: &DecoderTree,
    kernel: &K,
    alpha: &mut [K::Msg],
    beta: &mut [Bit],
    idx: usize,
) {
    let node = tree.node(idx);
    let (lo, len) = (node.lo, node.len);
    match node.kind {
        NodeKind::Rate0 => beta[lo..lo + len].fill(0),
        NodeKind::Rate1 => {
            for i in 0..len {
                beta[lo + i] = kernel.hard_decision(alpha[len + i]);
            }
        }
        NodeKind::Internal { left, right } => {
            let h = len / 2;
            if tree.node(left).kind == NodeKind::Rate0 {
                beta[lo..lo + h].fill(0);
            } else {
                f_step(kernel, alpha, node.heap_id, len);
                ssc_node(tree, kernel, alpha, beta, left);
            }
            if tree.node(right).kind == NodeKind::Rate0 {
                beta[lo + h..lo + len].fill(0);
            } else {
                g_step(kernel, alpha, &beta[lo..lo + h], node.heap_id, len);
                ssc_node(tree, kernel, alpha, beta, right);
            }
            combine_in_place(&mut beta[lo..lo + len]);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ebn0_to_sigma;
    use crate::kernels::{FixedFormat, FixedKernel, FloatKernel, LutKernel};
    use crate::quantdesign::{design_channel_quantizer, design_luts, relabel_map, LutVariant};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn code_8_5() -> PolarCode {
        PolarCode::new(8, 5, 3.0, vec![0, 1, 2]).unwrap()
    }

    fn code_128() -> PolarCode {
        PolarCode::from_json(include_str!("../tests/golden/code_128_64.json")).unwrap()
    }

    fn noisy_llrs(code: &PolarCode, rng: &mut ChaCha8Rng, sigma: f64) -> Vec<f64> {
        let msg: Vec<Bit> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
        let x = code.encode_systematic(&msg).unwrap();
        x.iter()
            .map(|&b| {
                let s = if b == 0 { 1.0 } else { -1.0 };
                let n = gauss(rng);
                2.0 * (s + sigma * n) / (sigma * sigma)
            })
            .collect()
    }

    fn gauss(rng: &mut ChaCha8Rng) -> f64 {
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    fn check_equivalence<K: Kernel>(code: &PolarCode, kernel: &K, frames: usize, seed: u64) {
        let tree = DecoderTree::build(code);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sigma = ebn0_to_sigma(2.0, code.rate());
        for _ in 0..frames {
            let input: Vec<K::Msg> = noisy_llrs(code, &mut rng, sigma)
                .iter()
                .map(|&l| kernel.map_channel(l))
                .collect();
            let sc = decode_sc(code, kernel, &input).unwrap();
            let ssc = decode_ssc(code, &tree, kernel, &input).unwrap();
            assert_eq!(sc, ssc, "{} input {input:?}", kernel.name());
            assert!(code.frozen().iter().all(|&i| ssc.u[i] == 0));
        }
    }

    #[test]
    fn two_bit_hand_trace() {
        let code = PolarCode::new(2, 1, 0.0, vec![0]).unwrap();
        let out = decode_sc(&code, &FloatKernel, &[-1.0, 3.0]).unwrap();
        assert_eq!(out.u, vec![0, 0]);
        assert_eq!(out.codeword, vec![0, 0]);
        assert_eq!(out.message, vec![0]);
    }

    #[test]
    fn noiseless_round_trips() {
        let code = code_128();
        let tree = DecoderTree::build(&code);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let msg: Vec<Bit> = (0..64).map(|_| rng.gen_range(0..2)).collect();
            let x = code.encode_systematic(&msg).unwrap();
            let llr: Vec<f64> = x
                .iter()
                .map(|&b| if b == 0 { 30.0 } else { -30.0 })
                .collect();
            for out in [
                decode_sc(&code, &FloatKernel, &llr).unwrap(),
                decode_ssc(&code, &tree, &FloatKernel, &llr).unwrap(),
            ] {
                assert_eq!(out.message, msg);
                assert_eq!(out.codeword, x);
            }
        }
        assert_eq!(
            extract_message(&code_8_5(), &[0, 0, 0, 1, 1, 0, 1, 1]),
            vec![1, 1, 0, 1, 1]
        );
        assert!(decode_sc(&code, &FloatKernel, &[0.0; 4]).is_err());
    }

    #[test]
    fn degenerate_codes() {
        let all_info = PolarCode::new(8, 8, 0.0, vec![]).unwrap();
        let tree = DecoderTree::build(&all_info);
        let llr = [1.0, -2.0, 0.0, -0.5, 3.0, 4.0, -1.0, 2.0];
        let out = decode_ssc(&all_info, &tree, &FloatKernel, &llr).unwrap();
        assert_eq!(out.codeword, vec![0, 1, 0, 1, 0, 0, 1, 0]);
        let all_frozen = PolarCode::new(8, 0, 0.0, (0..8).collect()).unwrap();
        let tree = DecoderTree::build(&all_frozen);
        let out = decode_ssc(&all_frozen, &tree, &FloatKernel, &llr).unwrap();
        assert_eq!(out.codeword, vec![0; 8]);
        assert!(out.message.is_empty());
    }

    /// Counts hard decisions taken on an exact-zero message.
    struct ZeroWatch<'a> {
        inner: &'a FixedKernel,
        zeros: AtomicUsize,
    }

    impl Kernel for ZeroWatch<'_> {
        type Msg = i16;
        fn name(&self) -> String {
            self.inner.name()
        }
        fn map_channel(&self, llr: f64) -> i16 {
            self.inner.map_channel(llr)
        }
        fn f(&self, node: usize, a: i16, b: i16) -> i16 {
            self.inner.f(node, a, b)
        }
        fn g(&self, node: usize, a: i16, b: i16, bit: Bit) -> i16 {
            self.inner.g(node, a, b, bit)
        }
        fn hard_decision(&self, m: i16) -> Bit {
            if m == 0 {
                self.zeros.fetch_add(1, Ordering::Relaxed);
            }
            self.inner.hard_decision(m)
        }
    }

    #[test]
    fn ssc_equals_sc_float() {
        for (code, seed) in [(code_8_5(), 1), (code_128(), 2)] {
            check_equivalence(&code, &FloatKernel, 10_000, seed);
        }
    }

    /// In two's complement a zero message has no sign, so a rate-1 node fed
    /// a zero may resolve the tie differently under SC and SSC. Every other
    /// frame must agree exactly.
    #[test]
    fn fixed_point_divergence_is_confined_to_zero_ties() {
        let fixed =
            FixedKernel::for_sigma(FixedFormat::new(5, 4).unwrap(), ebn0_to_sigma(3.0, 0.5))
                .unwrap();
        for (code, seed) in [(code_8_5(), 11), (code_128(), 12)] {
            let tree = DecoderTree::build(&code);
            let watch = ZeroWatch {
                inner: &fixed,
                zeros: AtomicUsize::new(0),
            };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sigma = ebn0_to_sigma(2.0, code.rate());
            let (mut clean, mut diverged) = (0, 0);
            for _ in 0..10_000 {
                let input: Vec<i16> = noisy_llrs(&code, &mut rng, sigma)
                    .iter()
                    .map(|&l| fixed.map_channel(l))
                    .collect();
                let sc = decode_sc(&code, &fixed, &input).unwrap();
                watch.zeros.store(0, Ordering::Relaxed);
                let ssc = decode_ssc(&code, &tree, &watch, &input).unwrap();
                if watch.zeros.load(Ordering::Relaxed) == 0 {
                    assert_eq!(sc, ssc, "{input:?}");
                    clean += 1;
                } else if sc != ssc {
                    diverged += 1;
                }
            }
            assert!(clean > 1000, "{clean}");
            assert!(diverged > 0);
        }
    }

    #[test]
    fn ssc_equals_sc_lut() {
        let q = design_channel_quantizer(ebn0_to_sigma(3.0, 0.5), 16, 2048).unwrap();
        for (code, seed) in [(code_8_5(), 5), (code_128(), 6)] {
            for v in [LutVariant::Ib, LutVariant::MsIb, LutVariant::ReMsIb] {
                let k = LutKernel::new(design_luts(&code, &q, v).unwrap().luts);
                check_equivalence(&code, &k, 10_000, seed);
            }
        }
    }

    #[test]
    fn relabeled_decoder_matches_frame_by_frame() {
        let code = code_128();
        let tree = DecoderTree::build(&code);
        let q = design_channel_quantizer(ebn0_to_sigma(3.0, 0.5), 16, 2048).unwrap();
        let ms = LutKernel::new(design_luts(&code, &q, LutVariant::MsIb).unwrap().luts);
        let re = LutKernel::new(design_luts(&code, &q, LutVariant::ReMsIb).unwrap().luts);
        let rho = relabel_map(16);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let sigma = ebn0_to_sigma(2.5, 0.5);
        for _ in 0..2000 {
            let a: Vec<u16> = noisy_llrs(&code, &mut rng, sigma)
                .iter()
                .map(|&l| ms.map_channel(l))
                .collect();
            let b: Vec<u16> = a.iter().map(|&t| rho[t as usize]).collect();
            assert_eq!(
                decode_ssc(&code, &tree, &ms, &a).unwrap(),
                decode_ssc(&code, &tree, &re, &b).unwrap()
            );
        }
    }
}
