//! Data ingestion, preprocessing, the Monte-Carlo power/FDR harness, the
//! gamma sweep and the two-direction study.

mod harness;
mod ingest;
mod preprocess;
mod study;

pub use harness::{
    gamma_sweep_panel, gamma_sweep_sim, run_power_fdr, write_sweep_tsv, CellResult,
    GammaSweepPoint, HarnessOptions, PowerFdrReport, TestMethod,
};
pub use ingest::{
    ingest_panel_csv, is_long_format, write_long_csv, IngestedPanel, PanelSource,
    WidePanelSource,
};
pub use preprocess::{preprocess, PreprocessOptions, PreprocessReport};
pub use study::{directional_study, DirectionalRow, DirectionalStudyResult, Verdict};
