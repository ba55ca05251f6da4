//! Optimised simulation campaigns from disturbance-trace datasets, and
//! runtime estimation for the simulations they drive.
//!
//! The pipeline sorts a dataset out of core, labels the states each trace
//! resumes from and must save, then emits a campaign that simulates every
//! distinct prefix once. [`vm`] replays campaigns symbolically to check
//! them; [`estimator`] predicts how long a campaign will take.

pub mod adapter;
pub mod campaign;
pub mod dtfile;
pub mod error;
pub mod estimator;
pub mod extsort;
pub mod generate;
pub mod labelling;
pub mod optimise;
pub mod par;
pub mod records;
pub mod trace;
pub mod vm;

pub use campaign::{parse_campaign, Campaign, CampaignLine, CampaignReader, SimCommand};
pub use error::{Error, Result};
pub use extsort::{merge_pair, sort_file, SortBudget, SortStats};
pub use labelling::{compute_load_labels, compute_store_labels};
pub use optimise::{generate_campaign, optimise_dataset, CampaignStats, Compression};
pub use par::Parallelism;
pub use trace::{DisturbanceTrace, Horizon, Label};
