//! Paired decoder comparison: relabeling leaves MS-IB decoding unchanged
//! frame by frame, while IB and float decoders disagree on some frames.

use polarlut::harness::{compare_decoders, DesignParams};
use polarlut::PolarCode;

fn main() -> polarlut::Result<()> {
    let code = PolarCode::construct(128, 64, 3.0, 128)?;
    let params = DesignParams::default();
    for (a, b) in [
        ("ms-ib", "re-ms-ib"),
        ("float", "float/sc"),
        ("float", "ib"),
    ] {
        let r = compare_decoders(&code, a.parse()?, b.parse()?, 2.0, &params, 20_000, 4)?;
        match &r.first {
            None => println!("{a} vs {b}: identical on {} frames", r.frames),
            Some(d) => println!(
                "{a} vs {b}: {} of {} frames differ, first is frame {}",
                r.divergent_frames, r.frames, d.frame
            ),
        }
    }
    Ok(())
}
