//! Unrolls the (8,5) decoder, prints its cycle-by-cycle schedule and
//! register inventory, then reports timing for the (128,64) decoder.

use polarlut::pipeline::{export_schedule, schedule, throughput_report, unroll, PipelineMode};
use polarlut::{DecoderTree, PolarCode};

fn main() -> polarlut::Result<()> {
    let small = PolarCode::new(8, 5, 3.0, vec![0, 1, 2])?;
    let graph = unroll(&DecoderTree::build(&small));
    for mode in [PipelineMode::Deep, PipelineMode::Partial(2)] {
        let s = schedule(&graph, mode)?;
        let e = export_schedule(&s, 4);
        println!(
            "{mode:?}: latency {} CC, II {}",
            e.latency_cc, e.initiation_interval
        );
        for c in &e.cycles {
            let kinds: Vec<String> = c
                .blocks
                .iter()
                .map(|b| format!("{:?}({})", b.kind, b.width))
                .collect();
            println!("  CC{}: {}", c.cycle, kinds.join(" "));
        }
        for r in &e.registers {
            println!(
                "  reg col {} signal {} {:?} x{}{}",
                r.column,
                r.signal,
                r.payload,
                r.width,
                if r.dotted { " (removed)" } else { "" }
            );
        }
        println!(
            "  {} registers, {} bits",
            e.totals.registers, e.totals.register_bits
        );
    }

    let code = PolarCode::construct(128, 64, 3.0, 128)?;
    let s = schedule(
        &unroll(&DecoderTree::build(&code)),
        PipelineMode::Partial(10),
    )?;
    for ghz in [1.47, 1.51] {
        let r = throughput_report(&s, ghz * 1e9, code.k(), 5)?;
        println!(
            "(128,64) at {ghz} GHz: {} CC, II {}, {:.3} Gbps, {:.1} ns, {} register bits",
            r.latency_cc,
            r.initiation_interval,
            r.info_throughput_bps / 1e9,
            r.latency_ns,
            r.register_bits
        );
    }
    Ok(())
}
