//! Streams frames through the registered (128,64) datapath and checks each
//! output against the reference SSC decoder. Injecting faster than the
//! initiation interval allows shows the corruption it causes.

use polarlut::decode::decode_ssc;
use polarlut::harness::{frame, frame_rng};
use polarlut::kernels::FloatKernel;
use polarlut::pipeline::{schedule, simulate, unroll, PipelineMode};
use polarlut::{ebn0_to_sigma, DecoderTree, PolarCode};

fn main() -> polarlut::Result<()> {
    let code = PolarCode::construct(128, 64, 3.0, 128)?;
    let tree = DecoderTree::build(&code);
    let sigma = ebn0_to_sigma(2.0, code.rate());
    let frames: Vec<Vec<f64>> = (0..200)
        .map(|f| frame(&code, sigma, &mut frame_rng(9, 0, f)).1)
        .collect();
    let s = schedule(&unroll(&tree), PipelineMode::Partial(10))?;
    for period in [10, 5] {
        let run = simulate(&s, &FloatKernel, &frames, period)?;
        let wrong = frames
            .iter()
            .zip(&run.outputs)
            .filter(|(x, y)| {
                decode_ssc(&code, &tree, &FloatKernel, x)
                    .map(|d| d.codeword != **y)
                    .unwrap_or(true)
            })
            .count();
        println!(
            "II 10 injected every {period} cycles: {} cycles, {wrong} of {} frames differ from SSC",
            run.cycles,
            frames.len()
        );
    }
    Ok(())
}
