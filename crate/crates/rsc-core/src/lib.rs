//! Rank-based spectral clustering of multi-epoch time series.
//!
//! The pipeline estimates smoothed, bias-corrected log-periodograms per
//! epoch, ranks them with modified band depth, and clusters channels by
//! functional-median or central-region dissimilarity; a mean-Euclidean
//! baseline, AR(2)-mixture simulators, contamination models, adjusted Rand
//! evaluation, and benchmark / moving-window experiments round it out.

pub mod cluster;
pub mod depth;
pub mod error;
pub mod eval;
pub mod io;
pub mod simulate;
pub mod spectral;

pub use cluster::{
    agglomerate, elbow_trace, hierarchical_cluster, Agglomeration, ClusterPartition, ElbowResult,
    Measure, MergeStep, MergeTrace,
};
pub use depth::{
    central_region, detect_outliers, functional_median, modified_band_depth, CentralRegion,
    DepthRanking,
};
pub use error::{Error, Result};
pub use eval::{
    adjusted_rand_index, moving_window_experiment, run_benchmark, BenchmarkConfig, BenchmarkDesign,
    BenchmarkReport, BenchmarkRow, WindowStabilityReport,
};
pub use simulate::{
    apply_shift_plan, bimodal_dataset, contaminate_eyeblink, contaminate_shift, draw_shift_plan,
    simulate_ar2, simulate_mixture, sub_seed, Ar2Spec, BimodalDesign, ContaminationSpec,
    EyeblinkParams, MixtureDesign, RawDataset, ShiftPlan,
};
pub use spectral::{
    build_ensemble, dft, log_bias_correct, periodogram, select_bandwidth_gcv, smooth_periodogram,
    ChannelEnsemble, Curve, Epoch, FrequencyGrid, ScaleTag, SmoothingConfig, EULER_GAMMA,
};
