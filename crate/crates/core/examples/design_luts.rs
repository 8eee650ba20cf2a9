//! Designs the three LUT variants for a small code and shows the pieces:
//! the channel quantizer, per-node tables, and the min-sum `f` table with
//! its two circuit forms.

use polarlut::quantdesign::{
    design_channel_quantizer, design_luts, minsum_lut, natural_minsum_circuit, relabel_map,
    relabeled_minsum_circuit, LutVariant, DEFAULT_GRID_SIZE,
};
use polarlut::{ebn0_to_sigma, PolarCode};

fn main() -> polarlut::Result<()> {
    let code = PolarCode::construct(32, 16, 3.0, 64)?;
    let sigma = ebn0_to_sigma(3.0, code.rate());
    let q = design_channel_quantizer(sigma, 16, DEFAULT_GRID_SIZE)?;
    println!(
        "channel thresholds {:?}",
        q.thresholds
            .iter()
            .map(|t| format!("{t:.3}"))
            .collect::<Vec<_>>()
    );
    println!(
        "channel I(X;T) = {:.4} bit",
        q.distribution.mutual_information()
    );

    for variant in [LutVariant::Ib, LutVariant::MsIb, LutVariant::ReMsIb] {
        let d = design_luts(&code, &q, variant)?;
        let worst = code
            .info_indices()
            .iter()
            .map(|&i| d.leaf_error_probs[i])
            .fold(0.0, f64::max);
        println!(
            "{:<8} {} tables, worst information bit error probability {worst:.2e}",
            variant.name(),
            d.luts.table_count()
        );
    }

    let size = 8;
    let ms = minsum_lut(size);
    let rho = relabel_map(size);
    println!("min-sum f over natural labels (|T| = {size}):");
    for a in 0..size {
        let row: Vec<u16> = (0..size).map(|b| ms[a * size + b]).collect();
        println!("  {row:?}");
        for b in 0..size {
            assert_eq!(
                natural_minsum_circuit(size, a as u16, b as u16),
                ms[a * size + b]
            );
            assert_eq!(
                relabeled_minsum_circuit(size, rho[a], rho[b]),
                rho[ms[a * size + b] as usize]
            );
        }
    }
    Ok(())
}
