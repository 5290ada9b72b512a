//! Exact region enumeration along segments, lines and trajectories.

mod io;
mod lines;
mod segment;
mod trajectory;

pub use io::{
    metrics_csv, read_trajectories, read_trajectory, write_trajectory, TrajectoryBatch,
    TrajectoryFile,
};
pub use lines::{mean_std, random_lines_density, random_lines_density_with, LineAnchor, LineDensitySummary};
pub use segment::{
    count_line, count_line_with, decompose_segment, decompose_segment_with, DecomposeOptions,
    Interval, LineMode, ParamSegment, SegmentDecomposition, DEFAULT_MAX_REGIONS, MAX_REGIONS_ENV,
};
pub use trajectory::{
    trajectory_counts, trajectory_metrics, trajectory_metrics_with, trajectory_patterns,
    trajectory_patterns_with, Provenance, Trajectory, TrajectoryMetrics,
};
