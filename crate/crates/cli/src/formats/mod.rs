//! On-disk formats. Every format is versioned and documented in the type
//! that owns it.

mod ckptfile;
mod csv;
mod fapfile;
mod logfile;
mod manifest;
mod prefs;

pub use ckptfile::{load_checkpoint, save_checkpoint};
pub use csv::{
    load_feature_csv, load_motion_csv, save_feature_csv, save_motion_csv, load_external_lld,
};
pub use fapfile::save_fap;
pub use logfile::{format_log_record, save_training_log};
pub use manifest::{load_manifest, load_split, save_manifest, save_split, ManifestEntry};
pub use prefs::load_preference_csv;
