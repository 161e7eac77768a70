//! Quality and rate metrics, BD-rate, and the sweep and ablation drivers.

pub mod bdrate;
pub mod harness;
pub mod metrics;

pub use bdrate::{bd_rate, RdCurve, RdPoint};
pub use harness::{
    ablation_models, curve_from_rows, fit_lambda_from_sweeps, measure, read_sweep_csv, run_ablation,
    run_rd_sweep, write_ablation_csv, write_sweep_csv, AblationModel, SweepRow,
};
pub use metrics::{psnr_y, psnr_yuv};
