//! Systematic encoding, one noisy transmission, and SC and SSC decoding with
//! floating-point messages.

use polarlut::decode::{decode_sc, decode_ssc};
use polarlut::harness::{awgn_channel, frame_rng};
use polarlut::kernels::FloatKernel;
use polarlut::{ebn0_to_sigma, Bit, DecoderTree, PolarCode};
use rand::Rng;

fn main() -> polarlut::Result<()> {
    let code = PolarCode::new(8, 5, 3.0, vec![0, 1, 2])?;
    let tree = DecoderTree::build(&code);
    let mut rng = frame_rng(1, 0, 0);
    let msg: Vec<Bit> = (0..code.k()).map(|_| rng.gen_range(0..2)).collect();
    let x = code.encode_systematic(&msg)?;
    println!("message  {msg:?}");
    println!("codeword {x:?}");

    let sigma = ebn0_to_sigma(4.0, code.rate());
    let llr = awgn_channel(&x, sigma, &mut rng);
    println!(
        "llr      {:?}",
        llr.iter().map(|l| format!("{l:.2}")).collect::<Vec<_>>()
    );

    let sc = decode_sc(&code, &FloatKernel, &llr)?;
    let ssc = decode_ssc(&code, &tree, &FloatKernel, &llr)?;
    println!("SC  -> {:?}", sc.message);
    println!("SSC -> {:?}", ssc.message);
    assert_eq!(sc, ssc);
    Ok(())
}
