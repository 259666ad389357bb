//! Topological maps, shortest-path planning and navigation trials.

mod map;
mod trial;

pub use map::{
    build_topo_map, default_places, plan, Action, RotationModel, SubNodeId, TopoMap, TopoNode, TranslationEdge,
};
pub use trial::{
    oracle_navigator, run_benchmark, run_trial, sample_trials, BenchmarkMode, BenchmarkReport, Decision,
    GroundTruthLocalizer, Localizer, Outcome, SegmentLog, SimilarityLocalizer, TrialConfig, TrialResult, TrialSpec,
};
