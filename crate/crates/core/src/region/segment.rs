//! Exact decomposition of a one-parameter family of inputs into linear
//! regions.

use crate::error::{Error, Result};
use crate::net::{eval_affine, restrict_layer, ActivationPattern, ReluNet};

pub const DEFAULT_MAX_REGIONS: usize = 10_000_000;
pub const MAX_REGIONS_ENV: &str = "REGION_ATLAS_MAX_REGIONS";

/// Limits applied during decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DecomposeOptions {
    /// Maximum number of pieces a single segment or plane may split into.
    pub max_regions: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        Self {
            max_regions: DEFAULT_MAX_REGIONS,
        }
    }
}

impl DecomposeOptions {
    /// Defaults, with `max_regions` overridden by `REGION_ATLAS_MAX_REGIONS`
    /// when it is set to a positive integer.
    pub fn from_env() -> Result<Self> {
        match std::env::var(MAX_REGIONS_ENV) {
            Ok(v) => {
                let max_regions = v
                    .trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&n| n > 0)
                    .ok_or_else(|| {
                        Error::InvalidInput(format!("{MAX_REGIONS_ENV}={v:?} is not a positive integer"))
                    })?;
                Ok(Self { max_regions })
            }
            Err(_) => Ok(Self::default()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LineMode {
    /// `u` in `[0, 1]`, the chord from the anchor to anchor + direction.
    Bounded,
    /// `u` over the whole real line.
    Infinite,
}

/// Points `anchor + u * direction` for `u` in `[lo, hi]`.
///
/// A segment from `a` to `b` is the bounded case with anchor `a`, direction
/// `b - a` and `u` in `[0, 1]`, i.e. `s(u) = (1 - u) a + u b`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSegment {
    anchor: Vec<f64>,
    direction: Vec<f64>,
    lo: f64,
    hi: f64,
}

fn check_finite(v: &[f64], what: &str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what.into()))
    }
}

impl ParamSegment {
    pub fn segment(a: &[f64], b: &[f64]) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::DimensionMismatch {
                what: "segment endpoint",
                expected: a.len(),
                found: b.len(),
            });
        }
        check_finite(a, "segment endpoint")?;
        check_finite(b, "segment endpoint")?;
        Ok(Self {
            anchor: a.to_vec(),
            direction: a.iter().zip(b).map(|(x, y)| y - x).collect(),
            lo: 0.0,
            hi: 1.0,
        })
    }

    pub fn line(anchor: &[f64], direction: &[f64], mode: LineMode) -> Result<Self> {
        if anchor.len() != direction.len() {
            return Err(Error::DimensionMismatch {
                what: "line direction",
                expected: anchor.len(),
                found: direction.len(),
            });
        }
        check_finite(anchor, "line anchor")?;
        check_finite(direction, "line direction")?;
        if direction.iter().all(|&v| v == 0.0) {
            return Err(Error::Degenerate("line direction is zero".into()));
        }
        let (lo, hi) = match mode {
            LineMode::Bounded => (0.0, 1.0),
            LineMode::Infinite => (f64::NEG_INFINITY, f64::INFINITY),
        };
        Ok(Self {
            anchor: anchor.to_vec(),
            direction: direction.to_vec(),
            lo,
            hi,
        })
    }

    /// Restricts to a sub-range of the parameter.
    pub fn with_domain(mut self, lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || lo.is_nan() || hi.is_nan() {
            return Err(Error::InvalidInput(format!("empty parameter domain [{lo}, {hi}]")));
        }
        self.lo = lo;
        self.hi = hi;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.anchor.len()
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn anchor(&self) -> &[f64] {
        &self.anchor
    }

    pub fn direction(&self) -> &[f64] {
        &self.direction
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    pub fn is_degenerate(&self) -> bool {
        self.direction.iter().all(|&v| v == 0.0)
    }

    pub fn point_at(&self, u: f64) -> Vec<f64> {
        self.anchor
            .iter()
            .zip(&self.direction)
            .map(|(p, v)| p + u * v)
            .collect()
    }

    /// Euclidean length of the bounded segment.
    pub fn length(&self) -> f64 {
        let norm = self.direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        norm * (self.hi - self.lo)
    }
}

/// One linear piece of a decomposed segment.
#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub pattern: ActivationPattern,
    /// Network output on this piece is `output_slope * u + output_offset`.
    pub output_slope: Vec<f64>,
    pub output_offset: Vec<f64>,
}

impl Interval {
    /// Point used to identify the piece: the midpoint, or one unit inside a
    /// half-infinite piece, or 0 for the whole line.
    pub fn representative(&self) -> f64 {
        representative(self.lo, self.hi)
    }

    pub fn output_at(&self, u: f64) -> Vec<f64> {
        self.output_slope
            .iter()
            .zip(&self.output_offset)
            .map(|(s, o)| s * u + o)
            .collect()
    }
}

fn representative(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (true, false) => lo + 1.0,
        (false, true) => hi - 1.0,
        (false, false) => 0.0,
    }
}

/// Ordered partition of a segment's parameter domain into linear pieces.
#[derive(Clone, Debug, PartialEq)]
pub struct SegmentDecomposition {
    pub intervals: Vec<Interval>,
}

impl SegmentDecomposition {
    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn transitions(&self) -> usize {
        self.intervals.len().saturating_sub(1)
    }

    /// Interior breakpoints in increasing order.
    pub fn crossing_points(&self) -> Vec<f64> {
        self.intervals.iter().skip(1).map(|i| i.lo).collect()
    }

    pub fn patterns(&self) -> impl Iterator<Item = &ActivationPattern> {
        self.intervals.iter().map(|i| &i.pattern)
    }

    pub fn min_width(&self) -> f64 {
        self.intervals
            .iter()
            .map(|i| i.hi - i.lo)
            .fold(f64::INFINITY, f64::min)
    }
}

fn merge_tolerance(lo: f64, hi: f64, roots: &[f64]) -> f64 {
    if lo.is_finite() && hi.is_finite() {
        1e-12 + 1e-9 * (hi - lo)
    } else {
        let scale = roots
            .iter()
            .chain([lo, hi].iter().filter(|v| v.is_finite()))
            .fold(1.0f64, |m, r| m.max(r.abs()));
        1e-12 + 1e-9 * scale
    }
}

/// Sorted cut points strictly inside `(lo, hi)`, with roots closer than the
/// merge tolerance collapsed onto their mean.
fn cut_points(lo: f64, hi: f64, coeffs: &[[f64; 2]]) -> Vec<f64> {
    let mut roots: Vec<f64> = coeffs
        .iter()
        .filter(|c| c[0] != 0.0)
        .map(|c| -c[1] / c[0])
        .filter(|r| r.is_finite() && *r > lo && *r < hi)
        .collect();
    if roots.is_empty() {
        return roots;
    }
    let tol = merge_tolerance(lo, hi, &roots);
    roots.sort_by(f64::total_cmp);
    let mut cuts = Vec::new();
    let mut cluster: Vec<f64> = Vec::new();
    for r in roots {
        if let Some(&last) = cluster.last() {
            if r - last >= tol {
                cuts.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
                cluster.clear();
            }
        }
        cluster.push(r);
    }
    cuts.push(cluster.iter().sum::<f64>() / cluster.len() as f64);
    cuts.retain(|&c| c - lo >= tol && hi - c >= tol);
    cuts
}

struct Piece {
    lo: f64,
    hi: f64,
    coeffs: Vec<[f64; 2]>,
    pattern: ActivationPattern,
}

pub fn decompose_segment(net: &ReluNet, seg: &ParamSegment) -> Result<SegmentDecomposition> {
    decompose_segment_with(net, seg, &DecomposeOptions::default())
}

/// Splits the segment layer by layer at every neuron's zero crossing.
///
/// Within each current piece a neuron's pre-activation is affine in `u`, so it
/// changes sign at most once. Each piece is cut at the roots of the current
/// layer, every sub-piece fixes that layer's mask from the sign at its
/// representative point, and the masked affine coefficients feed the next
/// layer.
pub fn decompose_segment_with(
    net: &ReluNet,
    seg: &ParamSegment,
    opts: &DecomposeOptions,
) -> Result<SegmentDecomposition> {
    if seg.dim() != net.input_dim() {
        return Err(Error::DimensionMismatch {
            what: "segment",
            expected: net.input_dim(),
            found: seg.dim(),
        });
    }
    let anchor = net.standardize_point(&seg.anchor);
    let dir = net.standardize_direction(&seg.direction);
    if net.clips() {
        if seg.is_bounded() {
            let a = seg_point(&anchor, &dir, seg.lo);
            let b = seg_point(&anchor, &dir, seg.hi);
            net.ensure_clip_inactive([a.as_slice(), b.as_slice()])?;
        } else if let Some(i) = dir.iter().position(|&v| v != 0.0) {
            return Err(Error::ClipActive { coordinate: i });
        } else {
            net.ensure_clip_inactive([anchor.as_slice()])?;
        }
    }

    let input: Vec<[f64; 2]> = dir.iter().zip(&anchor).map(|(&v, &p)| [v, p]).collect();
    let n = net.neuron_count();
    let mut pieces = vec![Piece {
        lo: seg.lo,
        hi: seg.hi,
        coeffs: restrict_layer(&net.hidden()[0], &input),
        pattern: ActivationPattern::zeros(n),
    }];

    let mut offset = 0;
    let layers = net.hidden();
    let mut finals = Vec::new();
    for (k, layer) in layers.iter().enumerate() {
        let mut next = Vec::with_capacity(pieces.len());
        for piece in pieces {
            if piece.coeffs.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!("pre-activation coefficients in layer {k}")));
            }
            let cuts = if seg.is_degenerate() {
                Vec::new()
            } else {
                cut_points(piece.lo, piece.hi, &piece.coeffs)
            };
            let mut bounds = Vec::with_capacity(cuts.len() + 2);
            bounds.push(piece.lo);
            bounds.extend(cuts);
            bounds.push(piece.hi);
            if next.len() + bounds.len() - 1 > opts.max_regions {
                return Err(Error::RegionOverflow {
                    limit: opts.max_regions,
                });
            }
            for w in bounds.windows(2) {
                let (lo, hi) = (w[0], w[1]);
                let t = representative(lo, hi);
                let mut pattern = piece.pattern.clone();
                let masked: Vec<[f64; 2]> = piece
                    .coeffs
                    .iter()
                    .enumerate()
                    .map(|(j, c)| {
                        let active = eval_affine(c, &[t]) >= 0.0;
                        pattern.set(offset + j, active);
                        if active {
                            *c
                        } else {
                            [0.0, 0.0]
                        }
                    })
                    .collect();
                let coeffs = match layers.get(k + 1) {
                    Some(l) => restrict_layer(l, &masked),
                    None => restrict_layer(net.output(), &masked),
                };
                next.push(Piece {
                    lo,
                    hi,
                    coeffs,
                    pattern,
                });
            }
        }
        offset += layer.outputs();
        if k + 1 == layers.len() {
            finals = next;
            break;
        }
        pieces = next;
    }

    let mut intervals: Vec<Interval> = Vec::with_capacity(finals.len());
    for p in finals {
        if let Some(last) = intervals.last_mut() {
            if last.pattern == p.pattern {
                last.hi = p.hi;
                continue;
            }
        }
        intervals.push(Interval {
            lo: p.lo,
            hi: p.hi,
            pattern: p.pattern,
            output_slope: p.coeffs.iter().map(|c| c[0]).collect(),
            output_offset: p.coeffs.iter().map(|c| c[1]).collect(),
        });
    }
    Ok(SegmentDecomposition { intervals })
}

fn seg_point(anchor: &[f64], dir: &[f64], u: f64) -> Vec<f64> {
    anchor.iter().zip(dir).map(|(p, v)| p + u * v).collect()
}

/// Decomposes the line `anchor + u * direction`, bounded to `u` in `[0, 1]` or
/// infinite in both directions.
pub fn count_line(
    net: &ReluNet,
    anchor: &[f64],
    direction: &[f64],
    mode: LineMode,
) -> Result<SegmentDecomposition> {
    decompose_segment(net, &ParamSegment::line(anchor, direction, mode)?)
}

pub fn count_line_with(
    net: &ReluNet,
    anchor: &[f64],
    direction: &[f64],
    mode: LineMode,
    opts: &DecomposeOptions,
) -> Result<SegmentDecomposition> {
    decompose_segment_with(net, &ParamSegment::line(anchor, direction, mode)?, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init::uniform_net;
    use crate::net::{Dense, ObsNormalizer};
    use proptest::prelude::*;
    use rand::Rng;

    fn one_neuron() -> ReluNet {
        ReluNet::new(
            vec![Dense::from_rows(&[vec![1.0]], &[0.0]).unwrap()],
            Dense::from_rows(&[vec![1.0]], &[0.0]).unwrap(),
        )
        .unwrap()
    }

    fn net(seed: u64, d: usize, widths: &[usize]) -> ReluNet {
        uniform_net(&mut crate::rng::stream(seed, "seg-net"), d, widths, 2, 1.0, 0.5)
    }

    fn random_point(rng: &mut crate::rng::Rng, d: usize) -> Vec<f64> {
        (0..d).map(|_| rng.random_range(-2.0..2.0)).collect()
    }

    fn check_partition(dec: &SegmentDecomposition, lo: f64, hi: f64) {
        assert_eq!(dec.intervals.first().unwrap().lo, lo);
        assert_eq!(dec.intervals.last().unwrap().hi, hi);
        for w in dec.intervals.windows(2) {
            assert_eq!(w[0].hi, w[1].lo);
            assert!(w[0].lo < w[0].hi);
            assert_ne!(w[0].pattern, w[1].pattern);
        }
    }

    #[test]
    fn single_neuron_crossing() {
        let seg = ParamSegment::segment(&[-1.0], &[1.0]).unwrap();
        let dec = decompose_segment(&one_neuron(), &seg).unwrap();
        assert_eq!(dec.len(), 2);
        assert_eq!(dec.crossing_points(), vec![0.5]);
        assert_eq!(dec.intervals[0].pattern.to_string(), "0");
        assert_eq!(dec.intervals[1].pattern.to_string(), "1");
    }

    #[test]
    fn zero_net_has_one_region() {
        let z = ReluNet::zeros(3, &[4, 4], 1).unwrap();
        let seg = ParamSegment::segment(&[0.0, 1.0, 2.0], &[5.0, -1.0, 0.0]).unwrap();
        let dec = decompose_segment(&z, &seg).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.transitions(), 0);
        let line = count_line(&z, &[0.0; 3], &[1.0, 0.0, 0.0], LineMode::Infinite).unwrap();
        assert_eq!(line.len(), 1);
        assert_eq!(line.intervals[0].lo, f64::NEG_INFINITY);
        assert_eq!(line.intervals[0].hi, f64::INFINITY);
    }

    #[test]
    fn degenerate_segment_is_one_interval() {
        let n = net(1, 2, &[6, 6]);
        let seg = ParamSegment::segment(&[0.3, 0.3], &[0.3, 0.3]).unwrap();
        let dec = decompose_segment(&n, &seg).unwrap();
        assert_eq!(dec.len(), 1);
        assert_eq!(dec.intervals[0].pattern, n.activation_pattern(&[0.3, 0.3]).unwrap());
        assert_eq!(seg.length(), 0.0);
    }

    #[test]
    fn patterns_and_outputs_match_network() {
        for seed in 0..30 {
            let n = net(seed, 3, &[8, 8]);
            let mut rng = crate::rng::stream(seed, "seg");
            let a = random_point(&mut rng, 3);
            let b = random_point(&mut rng, 3);
            let seg = ParamSegment::segment(&a, &b).unwrap();
            let dec = decompose_segment(&n, &seg).unwrap();
            check_partition(&dec, 0.0, 1.0);
            for iv in &dec.intervals {
                let u = iv.representative();
                let x = seg.point_at(u);
                assert_eq!(iv.pattern, n.activation_pattern(&x).unwrap());
                let f = n.forward(&x).unwrap();
                for (p, q) in f.iter().zip(iv.output_at(u)) {
                    assert!((p - q).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn depth_one_infinite_line_crosses_each_neuron_once() {
        for seed in 0..20 {
            let n = net(seed, 3, &[12]);
            let mut rng = crate::rng::stream(seed, "line");
            let p = random_point(&mut rng, 3);
            let v = random_point(&mut rng, 3);
            let dec = count_line(&n, &p, &v, LineMode::Infinite).unwrap();
            let w = &n.hidden()[0];
            let analytic = (0..12)
                .filter(|&j| (0..3).map(|i| w.weight[(j, i)] * v[i]).sum::<f64>() != 0.0)
                .count();
            assert_eq!(dec.transitions(), analytic);
            check_partition(&dec, f64::NEG_INFINITY, f64::INFINITY);
        }
    }

    #[test]
    fn bounded_line_equals_segment() {
        let n = net(4, 2, &[5, 5]);
        let d = count_line(&n, &[0.1, 0.2], &[1.0, -3.0], LineMode::Bounded).unwrap();
        let s = decompose_segment(&n, &ParamSegment::segment(&[0.1, 0.2], &[1.1, -2.8]).unwrap()).unwrap();
        assert_eq!(
            d.patterns().collect::<Vec<_>>(),
            s.patterns().collect::<Vec<_>>()
        );
    }

    #[test]
    fn coincident_crossings_count_once() {
        // Two neurons sharing a hyperplane flip together.
        let h = Dense::from_rows(&[vec![1.0], vec![2.0]], &[0.0, 0.0]).unwrap();
        let o = Dense::from_rows(&[vec![1.0, 1.0]], &[0.0]).unwrap();
        let n = ReluNet::new(vec![h], o).unwrap();
        let dec = decompose_segment(&n, &ParamSegment::segment(&[-1.0], &[1.0]).unwrap()).unwrap();
        assert_eq!(dec.transitions(), 1);
        assert_eq!(dec.intervals[1].pattern.to_string(), "11");
    }

    #[test]
    fn region_guard() {
        let n = net(3, 2, &[16, 16]);
        let seg = ParamSegment::segment(&[-5.0, -5.0], &[5.0, 5.0]).unwrap();
        let opts = DecomposeOptions { max_regions: 2 };
        assert!(matches!(
            decompose_segment_with(&n, &seg, &opts),
            Err(Error::RegionOverflow { limit: 2 })
        ));
    }

    #[test]
    fn clip_rejection() {
        let norm = ObsNormalizer::new(vec![0.0], vec![1.0], Some(5.0), 1e-8).unwrap();
        let n = one_neuron().with_normalizer(norm).unwrap();
        let inside = ParamSegment::segment(&[-1.0], &[1.0]).unwrap();
        assert!(decompose_segment(&n, &inside).is_ok());
        let outside = ParamSegment::segment(&[-1.0], &[9.0]).unwrap();
        assert!(matches!(
            decompose_segment(&n, &outside),
            Err(Error::ClipActive { coordinate: 0 })
        ));
        assert!(count_line(&n, &[0.0], &[1.0], LineMode::Infinite).is_err());
    }

    #[test]
    fn normalizer_is_part_of_input_space() {
        let norm = ObsNormalizer::new(vec![0.5], vec![4.0], None, 0.0 + 1e-8).unwrap();
        let n = one_neuron().with_normalizer(norm).unwrap();
        let dec = decompose_segment(&n, &ParamSegment::segment(&[-1.5], &[2.5]).unwrap()).unwrap();
        assert_eq!(dec.transitions(), 1);
        assert!((dec.crossing_points()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn errors() {
        assert!(ParamSegment::line(&[0.0], &[0.0], LineMode::Infinite).is_err());
        assert!(ParamSegment::segment(&[0.0], &[0.0, 1.0]).is_err());
        assert!(ParamSegment::segment(&[f64::NAN], &[0.0]).is_err());
        let seg = ParamSegment::segment(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!(decompose_segment(&one_neuron(), &seg).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn reversal_symmetry(seed in 0u64..10_000) {
            let n = net(seed, 3, &[6, 7, 5]);
            let mut rng = crate::rng::stream(seed, "rev");
            let a = random_point(&mut rng, 3);
            let b = random_point(&mut rng, 3);
            let fwd = decompose_segment(&n, &ParamSegment::segment(&a, &b).unwrap()).unwrap();
            let rev = decompose_segment(&n, &ParamSegment::segment(&b, &a).unwrap()).unwrap();
            let f: Vec<_> = fwd.patterns().cloned().collect();
            let mut r: Vec<_> = rev.patterns().cloned().collect();
            r.reverse();
            prop_assert_eq!(f, r);
        }

        #[test]
        fn sampled_patterns_appear_in_decomposition(seed in 0u64..10_000) {
            let n = net(seed, 2, &[8, 8]);
            let mut rng = crate::rng::stream(seed, "samp");
            let a = random_point(&mut rng, 2);
            let b = random_point(&mut rng, 2);
            let seg = ParamSegment::segment(&a, &b).unwrap();
            let dec = decompose_segment(&n, &seg).unwrap();
            for i in 0..=500 {
                let u = i as f64 / 500.0;
                let p = n.activation_pattern(&seg.point_at(u)).unwrap();
                let idx = dec.intervals.partition_point(|iv| iv.hi < u).min(dec.len() - 1);
                let near = &dec.intervals[idx.saturating_sub(1)..(idx + 2).min(dec.len())];
                prop_assert!(near.iter().any(|iv| iv.pattern == p));
            }
        }
    }
}
