//! Evaluation and benchmark construction for video moment retrieval with
//! queries that may refer to several moments of the same video.
//!
//! - [`domain`]: segments, predictions, query instances and temporal IoU.
//! - [`metrics`]: R@1 and mAP, plus the per-moment R_m and mAP_m.
//! - [`postprocess`]: 1-D NMS and active-prediction diagnostics.
//! - [`bench`]: grouping caption queries into multi-moment instances,
//!   windowing, the single/multi partition and dataset statistics.
//! - [`io`]: JSONL parsers and report writers.
//! - [`cli`]: the `moment-eval` command line.

pub mod bench;
pub mod cli;
pub mod domain;
pub mod io;
pub mod metrics;
pub mod postprocess;
