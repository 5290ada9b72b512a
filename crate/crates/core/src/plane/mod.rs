//! Exact linear regions on 2D slices of the input space.

mod arrangement;
mod frame;
mod svg;

pub use arrangement::{
    decompose_plane, decompose_plane_with, ArrangementFile, PlaneArrangement, Polygon, PolygonRecord,
};
pub use frame::{PlaneFrame, Window};
pub use svg::{render_svg, svg_string, SvgOptions};
