//! Exact linear-region analysis for ReLU networks.
//!
//! A ReLU MLP partitions its input space into convex cells on which it is
//! affine. This crate enumerates those cells exactly along segments, infinite
//! lines, piecewise-linear trajectories and 2D slices of the input space, and
//! reports transition counts and densities. The [`toy`] module contains a
//! small point-mass environment together with PPO and behavior-cloning
//! trainers that produce checkpoint series for studying how regions evolve
//! during training.
//!
//! ```
//! use region_atlas::net::{Dense, ReluNet};
//! use region_atlas::region::{decompose_segment, ParamSegment};
//!
//! let hidden = Dense::from_rows(&[vec![1.0]], &[0.0]).unwrap();
//! let output = Dense::from_rows(&[vec![1.0]], &[0.0]).unwrap();
//! let net = ReluNet::new(vec![hidden], output).unwrap();
//! let seg = ParamSegment::segment(&[-1.0], &[1.0]).unwrap();
//! let dec = decompose_segment(&net, &seg).unwrap();
//! assert_eq!(dec.transitions(), 1);
//! assert_eq!(dec.crossing_points(), vec![0.5]);
//! ```

pub mod cli;
pub mod error;
pub mod net;
pub mod plane;
pub mod region;
pub mod rng;
pub mod toy;

pub use error::{Error, Result};
