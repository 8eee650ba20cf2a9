//! Builds the (128,64) code used throughout and prints its frozen set and
//! pruned decoder tree.

use polarlut::{DecoderTree, NodeKind, PolarCode};

fn main() -> polarlut::Result<()> {
    let code = PolarCode::construct(128, 64, 3.0, 128)?;
    let tree = DecoderTree::build(&code);
    println!("frozen ({}): {:?}", code.frozen().len(), code.frozen());
    println!(
        "tree: {} nodes, {} rate-0 and {} rate-1 leaves",
        tree.nodes().len(),
        tree.count(|k| *k == NodeKind::Rate0),
        tree.count(|k| *k == NodeKind::Rate1)
    );
    println!("{}", tree.shape());
    println!("{}", code.to_json()?);
    Ok(())
}
