use std::fs;
use std::path::Path;

use rand::seq::index::sample;
use serde::Serialize;

use super::{emit, to_json, Cli, OverlayArg, RenderArgs};
use crate::error::{Error, Result};
use crate::net::ReluNet;
use crate::plane::{decompose_plane_with, render_svg, PlaneFrame, SvgOptions, Window};
use crate::region::{read_trajectories, DecomposeOptions, Provenance, Trajectory};
use crate::rng;
use crate::toy::TrainRun;

/// Plot window for the toy environment: position then velocity.
pub const TOY_WINDOW: [f64; 4] = [-50.0, 150.0, -20.0, 20.0];

#[derive(Serialize)]
struct Rendered {
    epoch: Option<usize>,
    polygons: usize,
    svg: String,
}

/// Three distinct states drawn from the trajectories.
fn frame_from_trajectories(trajs: &[Trajectory], k: usize, margin: f64, seed: u64) -> Result<PlaneFrame> {
    if k != 3 {
        return Err(Error::Usage(format!("a plane needs exactly 3 points, got --k {k}")));
    }
    let states: Vec<&Vec<f64>> = trajs.iter().flat_map(|t| t.states()).collect();
    if states.len() < 3 {
        return Err(Error::InvalidInput("need at least 3 states to span a plane".into()));
    }
    let mut r = rng::stream(seed, "plane-points");
    let mut idx = sample(&mut r, states.len(), 3).into_vec();
    idx.sort_unstable();
    PlaneFrame::from_points(states[idx[0]], states[idx[1]], states[idx[2]], margin)
}

fn window_frame(w: &[f64]) -> Result<PlaneFrame> {
    if w.len() != 4 {
        return Err(Error::Usage("--window takes a_min,a_max,b_min,b_max".into()));
    }
    PlaneFrame::new(vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], Window::new(w[0], w[1], w[2], w[3])?)
}

pub(super) fn run(cli: &Cli, a: &RenderArgs) -> Result<()> {
    let out = cli
        .out
        .as_deref()
        .ok_or_else(|| Error::Usage("render-plane needs --out <directory>".into()))?;
    fs::create_dir_all(out).map_err(|e| Error::file(out, e))?;
    let opts = DecomposeOptions::from_env()?;

    // (epoch, net, overlays) triples to render.
    let mut jobs: Vec<(Option<usize>, ReluNet, Vec<Trajectory>)> = Vec::new();
    match (&a.run, &a.ckpt) {
        (Some(dir), _) => {
            let run = TrainRun::load(dir)?;
            let epochs = a.epochs.clone().unwrap_or_else(|| vec![run.epochs()]);
            let fixed = match a.overlay {
                OverlayArg::Fixed | OverlayArg::Both => Some(run.fixed_trajectory()?),
                _ => None,
            };
            for e in epochs {
                let net = run.checkpoint(e)?.clone();
                let mut ov: Vec<Trajectory> = fixed.iter().cloned().collect();
                if matches!(a.overlay, OverlayArg::Current | OverlayArg::Both) {
                    ov.extend(run.current.get(e).into_iter().flatten().cloned());
                }
                jobs.push((Some(e), net, ov));
            }
        }
        (None, Some(p)) => {
            if a.epochs.is_some() {
                return Err(Error::Usage("--epochs needs --run".into()));
            }
            jobs.push((None, ReluNet::load(p)?, Vec::new()));
        }
        (None, None) => return Err(Error::Usage("pass --run <dir> or --ckpt <file>".into())),
    }

    let (frame, labels, extra) = match &a.points_from {
        Some(p) => {
            let trajs = read_trajectories(p)?;
            let f = frame_from_trajectories(&trajs, a.k, a.margin, cli.seed)?;
            let keep = if a.overlay == OverlayArg::None { Vec::new() } else { trajs };
            (f, ("a", "b"), keep)
        }
        None => {
            let w = a.window.clone().unwrap_or_else(|| TOY_WINDOW.to_vec());
            (window_frame(&w)?, ("position x", "velocity"), Vec::new())
        }
    };
    let svg_opts = SvgOptions {
        a_label: labels.0.into(),
        b_label: labels.1.into(),
        ..Default::default()
    };

    let mut written = Vec::new();
    for (epoch, net, mut overlays) in jobs {
        if net.input_dim() != frame.dim() {
            return Err(Error::DimensionMismatch {
                what: "plane frame",
                expected: net.input_dim(),
                found: frame.dim(),
            });
        }
        overlays.extend(extra.iter().map(|t| {
            Trajectory::new(t.states().to_vec(), Provenance::External).expect("already validated")
        }));
        let arr = decompose_plane_with(&net, &frame, &opts)?;
        let stem = match epoch {
            Some(e) => format!("epoch_{e:04}"),
            None => "plane".to_string(),
        };
        let svg = out.join(format!("{stem}.svg"));
        render_svg(&arr, &overlays, &svg_opts, &svg)?;
        if a.json {
            arr.save_json(out.join(format!("{stem}.json")))?;
        }
        written.push(Rendered {
            epoch,
            polygons: arr.len(),
            svg: file_name(&svg),
        });
    }
    emit(None, &to_json(&written)?)
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}
