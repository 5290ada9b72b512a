//! Exact polygonal decomposition of a plane slice into linear regions.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::frame::{PlaneFrame, Window};
use crate::error::{Error, Result};
use crate::net::{eval_affine, restrict_layer, ActivationPattern, ReluNet};
use crate::region::DecomposeOptions;

/// Convex cell of the arrangement, vertices counter-clockwise in `(a, b)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Polygon {
    pub vertices: Vec<[f64; 2]>,
    pub pattern: ActivationPattern,
    /// Stable hash of the pattern, used for coloring.
    pub color: u64,
}

impl Polygon {
    pub fn area(&self) -> f64 {
        polygon_area(&self.vertices)
    }

    pub fn centroid(&self) -> [f64; 2] {
        centroid(&self.vertices)
    }

    /// Parameter range `[t0, t1]` of the chord `p + t (q - p)`, `t` in
    /// `[0, 1]`, that lies inside this polygon.
    pub fn clip_chord(&self, p: [f64; 2], q: [f64; 2]) -> Option<(f64, f64)> {
        let d = [q[0] - p[0], q[1] - p[1]];
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        let n = self.vertices.len();
        for i in 0..n {
            let v = self.vertices[i];
            let w = self.vertices[(i + 1) % n];
            // Inside is to the left of v -> w.
            let nx = -(w[1] - v[1]);
            let ny = w[0] - v[0];
            let num = nx * (p[0] - v[0]) + ny * (p[1] - v[1]);
            let den = nx * d[0] + ny * d[1];
            if den == 0.0 {
                if num < 0.0 {
                    return None;
                }
            } else {
                let t = -num / den;
                if den > 0.0 {
                    t0 = t0.max(t);
                } else {
                    t1 = t1.min(t);
                }
            }
            if t0 > t1 {
                return None;
            }
        }
        Some((t0, t1))
    }
}

pub(crate) fn polygon_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    let mut s = 0.0;
    for i in 0..n {
        let (p, q) = (v[i], v[(i + 1) % n]);
        s += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * s
}

fn centroid(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len();
    let (mut cx, mut cy, mut a) = (0.0, 0.0, 0.0);
    // Shift to the first vertex for accuracy far from the origin.
    let o = v[0];
    for i in 0..n {
        let p = [v[i][0] - o[0], v[i][1] - o[1]];
        let q = [v[(i + 1) % n][0] - o[0], v[(i + 1) % n][1] - o[1]];
        let cross = p[0] * q[1] - q[0] * p[1];
        a += cross;
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    if a == 0.0 {
        let m = v.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0], s[1] + p[1]]);
        return [m[0] / n as f64, m[1] / n as f64];
    }
    [o[0] + cx / (3.0 * a), o[1] + cy / (3.0 * a)]
}

/// Convex cells with their activation patterns tiling a plane window.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneArrangement {
    pub frame: PlaneFrame,
    pub polygons: Vec<Polygon>,
}

struct Tolerances {
    snap: f64,
    min_area: f64,
}

/// Splits a convex polygon along `f(a, b) = 0`. Returns `None` when the line
/// misses the interior or one side would be a sliver below `min_area`.
fn split(poly: &[[f64; 2]], f: &[f64; 3], tol: &Tolerances) -> Option<(Vec<[f64; 2]>, Vec<[f64; 2]>)> {
    let grad = f[0].hypot(f[1]);
    if grad == 0.0 {
        return None;
    }
    let vals: Vec<f64> = poly
        .iter()
        .map(|p| {
            let v = eval_affine(f, p);
            if v.abs() / grad <= tol.snap {
                0.0
            } else {
                v
            }
        })
        .collect();
    if !vals.iter().any(|&v| v > 0.0) || !vals.iter().any(|&v| v < 0.0) {
        return None;
    }
    let n = poly.len();
    let (mut pos, mut neg) = (Vec::with_capacity(n + 1), Vec::with_capacity(n + 1));
    for i in 0..n {
        let j = (i + 1) % n;
        let (p, vp, vq) = (poly[i], vals[i], vals[j]);
        if vp >= 0.0 {
            pos.push(p);
        }
        if vp <= 0.0 {
            neg.push(p);
        }
        if (vp > 0.0 && vq < 0.0) || (vp < 0.0 && vq > 0.0) {
            let q = poly[j];
            let t = vp / (vp - vq);
            let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])];
            pos.push(x);
            neg.push(x);
        }
    }
    if polygon_area(&pos) < tol.min_area || polygon_area(&neg) < tol.min_area {
        return None;
    }
    Some((pos, neg))
}

struct Cell {
    vertices: Vec<[f64; 2]>,
    coeffs: Vec<[f64; 3]>,
    pattern: ActivationPattern,
}

pub fn decompose_plane(net: &ReluNet, frame: &PlaneFrame) -> Result<PlaneArrangement> {
    decompose_plane_with(net, frame, &DecomposeOptions::default())
}

/// Splits the window layer by layer along every neuron's zero line.
///
/// Inside each current cell a neuron's pre-activation is affine in `(a, b)`,
/// so its zero set is a straight line and the cell splits into at most two
/// convex parts. After all neurons of a layer have cut a cell, each part
/// fixes that layer's mask from the sign at its centroid and the masked
/// coefficients feed the next layer. Vertices within `1e-12` of a cutting
/// line snap onto it, and cuts that would leave a sliver smaller than
/// `1e-12` of the window area are skipped.
pub fn decompose_plane_with(
    net: &ReluNet,
    frame: &PlaneFrame,
    opts: &DecomposeOptions,
) -> Result<PlaneArrangement> {
    if frame.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "plane frame",
            expected: net.input_dim(),
            found: frame.dim(),
        });
    }
    let w = frame.window;
    if net.clips() {
        let corners: Vec<Vec<f64>> = w
            .corners()
            .iter()
            .map(|c| net.standardize_point(&frame.point(c[0], c[1])))
            .collect();
        net.ensure_clip_inactive(corners.iter().map(Vec::as_slice))?;
    }
    let origin = net.standardize_point(&frame.origin);
    let e1 = net.standardize_direction(&frame.e1);
    let e2 = net.standardize_direction(&frame.e2);
    let input: Vec<[f64; 3]> = (0..frame.dim()).map(|i| [e1[i], e2[i], origin[i]]).collect();
    let tol = Tolerances {
        snap: 1e-12 * w.diameter().max(1.0),
        min_area: 1e-12 * w.area(),
    };

    let n = net.neuron_count();
    let layers = net.hidden();
    let mut cells = vec![Cell {
        vertices: w.corners().to_vec(),
        coeffs: restrict_layer(&layers[0], &input),
        pattern: ActivationPattern::zeros(n),
    }];
    let mut offset = 0;
    for (k, layer) in layers.iter().enumerate() {
        let mut next = Vec::with_capacity(cells.len());
        for cell in cells {
            if cell.coeffs.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("pre-activation coefficients in layer {k}")));
            }
            let mut parts = vec![cell.vertices];
            for c in &cell.coeffs {
                let mut cut = Vec::with_capacity(parts.len() * 2);
                for part in parts {
                    match split(&part, c, &tol) {
                        Some((p, q)) => {
                            cut.push(p);
                            cut.push(q);
                        }
                        None => cut.push(part),
                    }
                }
                parts = cut;
                if next.len() + parts.len() > opts.max_regions {
                    return Err(Error::RegionOverflow {
                        limit: opts.max_regions,
                    });
                }
            }
            for vertices in parts {
                let at = centroid(&vertices);
                let mut pattern = cell.pattern.clone();
                let masked: Vec<[f64; 3]> = cell
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let active = eval_affine(c, &at) >= 0.0;
                        pattern.set(offset + j, active);
                        if active {
                            *c
                        } else {
                            [0.0; 3]
                        }
                    })
                    .collect();
                let coeffs = match layers.get(k + 1) {
                    Some(l) => restrict_layer(l, &masked),
                    None => Vec::new(),
                };
                next.push(Cell {
                    vertices,
                    coeffs,
                    pattern,
                });
            }
        }
        offset += layer.outputs();
        cells = next;
    }

    let polygons = cells
        .into_iter()
        .map(|c| Polygon {
            color: c.pattern.stable_hash(),
            vertices: dedup_vertices(c.vertices),
            pattern: c.pattern,
        })
        .collect();
    Ok(PlaneArrangement {
        frame: frame.clone(),
        polygons,
    })
}

fn dedup_vertices(mut v: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    v.dedup();
    while v.len() > 1 && v.first() == v.last() {
        v.pop();
    }
    v
}

impl PlaneArrangement {
    pub fn len(&self) -> usize {
        self.polygons.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polygons.is_empty()
    }

    pub fn total_area(&self) -> f64 {
        self.polygons.iter().map(Polygon::area).sum()
    }

    pub fn window(&self) -> Window {
        self.frame.window
    }

    /// Patterns met along the chord from `p` to `q` (plane coordinates), in
    /// order, each with its parameter range. Pieces shorter than `1e-9` of the
    /// chord are ignored and consecutive equal patterns merged.
    pub fn patterns_along_chord(&self, p: [f64; 2], q: [f64; 2]) -> Vec<(f64, f64, ActivationPattern)> {
        let mut hits: Vec<(f64, f64, &ActivationPattern)> = self
            .polygons
            .iter()
            .filter_map(|poly| {
                let (t0, t1) = poly.clip_chord(p, q)?;
                (t1 - t0 > 1e-9).then_some((t0, t1, &poly.pattern))
            })
            .collect();
        hits.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut out: Vec<(f64, f64, ActivationPattern)> = Vec::new();
        for (t0, t1, pat) in hits {
            match out.last_mut() {
                Some(last) if &last.2 == pat => last.1 = last.1.max(t1),
                _ => out.push((t0, t1, pat.clone())),
            }
        }
        out
    }

    pub fn to_file(&self) -> ArrangementFile {
        ArrangementFile {
            frame: self.frame.clone(),
            neurons: self.polygons.first().map_or(0, |p| p.pattern.len()),
            polygons: self
                .polygons
                .iter()
                .map(|p| PolygonRecord {
                    vertices: p.vertices.clone(),
                    pattern: p.pattern.to_hex(),
                    color: format!("{:016x}", p.color),
                })
                .collect(),
        }
    }

    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let s = serde_json::to_string(&self.to_file())?;
        fs::write(path, s).map_err(|e| Error::file(path, e))
    }
}

/// JSON dump of an arrangement: the frame, then every polygon's vertices with
/// its pattern as a hex string (see [`ActivationPattern::to_hex`]).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArrangementFile {
    pub frame: PlaneFrame,
    pub neurons: usize,
    pub polygons: Vec<PolygonRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PolygonRecord {
    pub vertices: Vec<[f64; 2]>,
    pub pattern: String,
    pub color: String,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init::uniform_net;
    use crate::net::{Dense, ObsNormalizer};
    use crate::region::{decompose_segment, ParamSegment};
    use rand::Rng;

    fn unit_frame(d: usize, half: f64) -> PlaneFrame {
        let mut e1 = vec![0.0; d];
        let mut e2 = vec![0.0; d];
        e1[0] = 1.0;
        e2[1] = 1.0;
        PlaneFrame::new(vec![0.0; d], e1, e2, Window::new(-half, half, -half, half).unwrap()).unwrap()
    }

    fn check_invariants(net: &ReluNet, arr: &PlaneArrangement) {
        let area = arr.window().area();
        assert!((arr.total_area() - area).abs() <= 1e-6 * area);
        for p in &arr.polygons {
            assert!(p.area() > 0.0);
            let c = p.centroid();
            let x = arr.frame.point(c[0], c[1]);
            assert_eq!(net.activation_pattern(&x).unwrap(), p.pattern);
            // Convexity: every turn is a left turn (allowing collinear).
            let n = p.vertices.len();
            for i in 0..n {
                let (a, b, cc) = (p.vertices[i], p.vertices[(i + 1) % n], p.vertices[(i + 2) % n]);
                let cross = (b[0] - a[0]) * (cc[1] - b[1]) - (b[1] - a[1]) * (cc[0] - b[0]);
                assert!(cross >= -1e-9 * area, "non-convex polygon");
            }
        }
    }

    #[test]
    fn zero_net_is_one_polygon() {
        let z = ReluNet::zeros(2, &[5, 5], 1).unwrap();
        let arr = decompose_plane(&z, &unit_frame(2, 3.0)).unwrap();
        assert_eq!(arr.len(), 1);
        assert!((arr.total_area() - 36.0).abs() < 1e-12);
    }

    #[test]
    fn two_lines_make_four_cells() {
        let h = Dense::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]], &[0.0, 0.0]).unwrap();
        let net = ReluNet::new(vec![h], Dense::zeros(1, 2)).unwrap();
        let arr = decompose_plane(&net, &unit_frame(2, 1.0)).unwrap();
        assert_eq!(arr.len(), 4);
        let mut pats: Vec<String> = arr.polygons.iter().map(|p| p.pattern.to_string()).collect();
        pats.sort();
        assert_eq!(pats, ["00", "01", "10", "11"]);
    }

    #[test]
    fn seeded_nets_satisfy_invariants() {
        for seed in 0..10 {
            let net = uniform_net(&mut crate::rng::stream(seed, "plane"), 2, &[8, 8], 1, 1.0, 0.5);
            let arr = decompose_plane(&net, &unit_frame(2, 2.0)).unwrap();
            assert!(arr.len() > 1);
            check_invariants(&net, &arr);
        }
    }

    #[test]
    fn chords_agree_with_segment_decomposition() {
        let net = uniform_net(&mut crate::rng::stream(5, "plane"), 3, &[8, 6], 2, 1.0, 0.5);
        let mut frame_pts = crate::rng::stream(5, "pts");
        let pts: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..3).map(|_| frame_pts.random_range(-1.0..1.0)).collect())
            .collect();
        let frame = PlaneFrame::from_points(&pts[0], &pts[1], &pts[2], 0.1).unwrap();
        let arr = decompose_plane(&net, &frame).unwrap();
        check_invariants(&net, &arr);
        let w = arr.window();
        let mut rng = crate::rng::stream(6, "chord");
        for _ in 0..50 {
            let p = [rng.random_range(w.a_min..w.a_max), rng.random_range(w.b_min..w.b_max)];
            let q = [rng.random_range(w.a_min..w.a_max), rng.random_range(w.b_min..w.b_max)];
            let along: Vec<_> = arr.patterns_along_chord(p, q).into_iter().map(|x| x.2).collect();
            let seg = ParamSegment::segment(&frame.point(p[0], p[1]), &frame.point(q[0], q[1])).unwrap();
            let dec: Vec<_> = decompose_segment(&net, &seg).unwrap().patterns().cloned().collect();
            assert_eq!(along, dec);
        }
    }

    #[test]
    fn clip_and_dimension_errors() {
        let norm = ObsNormalizer::new(vec![0.0, 0.0], vec![1.0, 1.0], Some(1.5), 1e-8).unwrap();
        let net = uniform_net(&mut crate::rng::stream(1, "x"), 2, &[3], 1, 1.0, 0.5)
            .with_normalizer(norm)
            .unwrap();
        assert!(matches!(
            decompose_plane(&net, &unit_frame(2, 2.0)),
            Err(Error::ClipActive { .. })
        ));
        assert!(decompose_plane(&net, &unit_frame(2, 1.0)).is_ok());
        assert!(decompose_plane(&net, &unit_frame(3, 1.0)).is_err());
        let big = uniform_net(&mut crate::rng::stream(1, "x"), 2, &[16, 16], 1, 1.0, 0.5);
        assert!(matches!(
            decompose_plane_with(&big, &unit_frame(2, 3.0), &DecomposeOptions { max_regions: 3 }),
            Err(Error::RegionOverflow { limit: 3 })
        ));
    }

    #[test]
    fn json_dump_lists_every_polygon() {
        let net = uniform_net(&mut crate::rng::stream(2, "plane"), 2, &[4], 1, 1.0, 0.5);
        let arr = decompose_plane(&net, &unit_frame(2, 2.0)).unwrap();
        let f = arr.to_file();
        assert_eq!(f.polygons.len(), arr.len());
        assert_eq!(f.neurons, 4);
        assert_eq!(f.polygons[0].pattern.len(), 1);
    }
}
