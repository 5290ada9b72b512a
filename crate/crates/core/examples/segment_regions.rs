//! Exact regions along a segment and an infinite line for a small random net.
//!
//! cargo run --example segment_regions

use region_atlas::net::init::uniform_net;
use region_atlas::region::{count_line, decompose_segment, LineMode, ParamSegment};
use region_atlas::rng;

fn main() -> region_atlas::Result<()> {
    let net = uniform_net(&mut rng::stream(1, "example"), 3, &[12, 12], 2, 1.0, 0.5);
    let seg = ParamSegment::segment(&[-2.0, 0.5, 1.0], &[2.0, -1.0, 0.0])?;
    let dec = decompose_segment(&net, &seg)?;
    println!("{} neurons, {} pieces, {} transitions", net.neuron_count(), dec.len(), dec.transitions());
    for iv in &dec.intervals {
        println!(
            "  u in [{:.4}, {:.4}]  pattern {}  output slope {:?}",
            iv.lo,
            iv.hi,
            iv.pattern.to_hex(),
            iv.output_slope.iter().map(|v| (v * 1e3).round() / 1e3).collect::<Vec<_>>()
        );
    }
    let line = count_line(&net, &[0.0, 0.0, 0.0], &[1.0, 0.3, -0.2], LineMode::Infinite)?;
    println!("infinite line through the origin: {} transitions", line.transitions());
    Ok(())
}
