//! A short paired FER/BER sweep written to CSV files.

use polarlut::harness::{run_sweep, write_results_csv, CodeRef, DesignParams, SweepConfig};
use polarlut::PolarCode;

fn main() -> polarlut::Result<()> {
    let code = PolarCode::construct(128, 64, 3.0, 128)?;
    let cfg = SweepConfig {
        code: CodeRef::Inline(code),
        decoders: ["float", "fixed:5.4", "ms-ib"]
            .iter()
            .map(|d| d.parse())
            .collect::<Result<_, _>>()?,
        ebn0_db: vec![1.0, 2.0, 3.0],
        max_frames: 50_000,
        min_frame_errors: 100,
        seed: 1,
        workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        design: DesignParams::default(),
    };
    let result = run_sweep(&cfg)?;
    for c in &result.curves {
        for p in &c.points {
            println!(
                "{:<10} {:.1} dB  FER {:.3e}  BER {:.3e}  ({} frames)",
                c.decoder.to_string(),
                p.ebn0_db,
                p.fer(),
                p.ber(),
                p.frames
            );
        }
    }
    let dir = std::env::temp_dir().join("polarlut-sweep");
    for path in write_results_csv(&result, &dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
