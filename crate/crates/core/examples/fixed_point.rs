//! Bit-true fixed-point decoding next to floating point on the same frames.

use polarlut::decode::decode_ssc;
use polarlut::harness::{frame, frame_rng};
use polarlut::kernels::{FixedFormat, FixedKernel, FloatKernel, Kernel};
use polarlut::{ebn0_to_sigma, DecoderTree, PolarCode};

fn main() -> polarlut::Result<()> {
    let code = PolarCode::construct(64, 32, 3.0, 64)?;
    let tree = DecoderTree::build(&code);
    let fmt = FixedFormat::new(5, 4)?;
    let fixed = FixedKernel::for_sigma(fmt, ebn0_to_sigma(3.0, code.rate()))?;
    println!("{} with channel scale {:.3}", fixed.name(), fixed.scale);

    let sigma = ebn0_to_sigma(2.5, code.rate());
    let (mut float_err, mut fixed_err) = (0, 0);
    let frames = 20_000;
    for f in 0..frames {
        let mut rng = frame_rng(5, 0, f);
        let (msg, llr) = frame(&code, sigma, &mut rng);
        let a = decode_ssc(&code, &tree, &FloatKernel, &llr)?;
        let q: Vec<i16> = llr.iter().map(|&l| fixed.map_channel(l)).collect();
        let b = decode_ssc(&code, &tree, &fixed, &q)?;
        float_err += (a.message != msg) as u32;
        fixed_err += (b.message != msg) as u32;
    }
    println!(
        "FER over {frames} frames: float {:.4}, fixed {:.4}",
        float_err as f64 / frames as f64,
        fixed_err as f64 / frames as f64
    );
    Ok(())
}
