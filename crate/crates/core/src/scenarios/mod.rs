//! End-to-end pipelines and sample data.

mod pipeline;
mod sample;
mod scan;

pub use pipeline::{
    genus2_pipeline, genus2_pipeline_with_points, sample_divisor_point, Degeneration, PipelineReport, DEGENERATION_STEPS,
    DIVISOR_SAMPLES, INDECOMPOSABILITY_THRESHOLD, MAX_POINT_RESAMPLES, RESIDUAL_NAMES, UPSI_SAMPLES,
};
pub use sample::{sample_direction, sample_point, sample_siegel, MIN_SAMPLED_IM_EIGENVALUE};
pub use scan::{scan_min_residual, scan_min_residual_seeded, ScanReport, EXCLUSION_RADIUS, ITERS_PER_PARAMETER};
