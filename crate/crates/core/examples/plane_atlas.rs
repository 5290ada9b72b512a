//! Exact region map of a 2D slice through a 5-dimensional input space,
//! written as SVG and JSON.
//!
//! cargo run --example plane_atlas -- [out_dir]

use region_atlas::net::init::uniform_net;
use region_atlas::plane::{decompose_plane, render_svg, PlaneFrame, SvgOptions};
use region_atlas::region::{Provenance, Trajectory};
use region_atlas::rng;

fn main() -> region_atlas::Result<()> {
    let out = std::env::args().nth(1).unwrap_or_else(|| "plane_atlas_out".into());
    std::fs::create_dir_all(&out)?;
    let net = uniform_net(&mut rng::stream(4, "example"), 5, &[10, 10], 1, 1.0, 0.5);
    let p1 = [1.0, 0.0, 0.0, 0.5, -0.5];
    let p2 = [0.0, 1.5, 0.0, -0.5, 0.0];
    let p3 = [-1.0, 0.0, 1.0, 0.0, 0.5];
    let frame = PlaneFrame::from_points(&p1, &p2, &p3, 0.1)?;
    let arr = decompose_plane(&net, &frame)?;
    println!(
        "{} polygons, area {:.6} of window {:.6}",
        arr.len(),
        arr.total_area(),
        arr.window().area()
    );
    let path = Trajectory::new(vec![p1.to_vec(), p2.to_vec(), p3.to_vec(), p1.to_vec()], Provenance::External)?;
    render_svg(&arr, &[path], &SvgOptions::default(), format!("{out}/plane.svg"))?;
    arr.save_json(format!("{out}/plane.json"))?;
    println!("wrote {out}/plane.svg and {out}/plane.json");
    Ok(())
}
