//! Joint sparse classification and regression with per-class hard sample
//! selection.
//!
//! A sample-weighted logistic classifier (`w`) and a sample-weighted linear
//! regressor (`v`) share a row-sparsity penalty `λ Σⱼ ‖(wⱼ, vⱼ)‖₂`, so a
//! feature is kept or dropped for both tasks at once. Each class contributes
//! only its `k` best-fitting samples to each task, which balances the classes
//! and discards outliers. The model is fitted by alternating minimization; see
//! [`optimizer::fit`].
//!
//! ```no_run
//! use jointsel::{fit, generate_synthetic, Hyperparams, SynthConfig};
//!
//! let (data, _planted) = generate_synthetic(&SynthConfig::default()).unwrap();
//! let report = fit(&data, &Hyperparams { lambda: 0.1, ..Default::default() }).unwrap();
//! for f in report.model.feature_ranking().iter().take(10) {
//!     println!("{} {:.4}", f.name, f.norm);
//! }
//! ```

pub mod cli;
pub mod cv;
pub mod dataset;
pub mod error;
pub mod io;
mod linalg;
pub mod logistic;
pub mod metrics;
pub mod optimizer;
pub mod ridge;
pub mod selector;
pub mod synth;

pub use cv::{repeated_kfold_cv, CvConfig, CvReport, DEFAULT_LAMBDA_GRID};
pub use dataset::{Dataset, Hyperparams, ModelState, SelectionMask, Standardizer};
pub use error::{Error, Result};
pub use io::{load_csv, load_model, save_model, write_csv};
pub use optimizer::{fit, FitReport};
pub use synth::{generate_synthetic, Planted, SynthConfig};
