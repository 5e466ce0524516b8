//! Building interaction programs: from catalogs, from site-description files,
//! and synthetically.

pub mod format;
pub mod hierarchy;
pub mod split;
pub mod synth;

pub use format::{load_site, save_site, Site, SiteError, SiteFile};
pub use hierarchy::{build_hierarchy, HierarchyError};
pub use split::{split_coalesced, CoalescedLink, SplitError};
pub use synth::{generate_synthetic, SynthError};
