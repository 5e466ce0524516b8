//! Shipped example sites, theories, traces and activities.

use crate::analysis::{parse_activities, ActivitySpec};
use crate::ebg::{parse_traces, DomainTheory, Trace};
use crate::ingest::{load_site, Site};
use crate::model::{Catalog, InteractionProgram};

pub const CAMERA_SITE: &str = include_str!("../fixtures/camera.site.toml");
pub const CAMERA_CATALOG_SITE: &str = include_str!("../fixtures/camera_catalog.site.toml");
pub const FROZEN_SITE: &str = include_str!("../fixtures/frozen.site.toml");
pub const CONGRESS_SITE: &str = include_str!("../fixtures/congress.site.toml");
pub const BOOKSTORE_SITE: &str = include_str!("../fixtures/bookstore.site.toml");
pub const BOOKSTORE_THEORY: &str = include_str!("../fixtures/bookstore.theory.toml");
pub const LINUS_TRACE: &str = include_str!("../fixtures/linus.trace.jsonl");
pub const CAMERA_ACTIVITIES: &str = include_str!("../fixtures/camera.activities.toml");

fn site(text: &str) -> Site {
    load_site(text).expect("shipped fixtures load")
}

pub fn camera_site() -> Site {
    site(CAMERA_SITE)
}

pub fn camera() -> InteractionProgram {
    camera_site().program
}

pub fn camera_catalog() -> Catalog {
    let file = crate::ingest::format::parse_site_file(CAMERA_CATALOG_SITE).expect("fixture parses");
    let schema = crate::model::Schema::new(file.schema);
    Catalog::new(schema, file.catalog.expect("catalog fixture").items).expect("fixture catalog")
}

pub fn frozen() -> InteractionProgram {
    site(FROZEN_SITE).program
}

pub fn congress_site() -> Site {
    site(CONGRESS_SITE)
}

pub fn bookstore_site() -> Site {
    site(BOOKSTORE_SITE)
}

pub fn bookstore_theory() -> DomainTheory {
    DomainTheory::parse(BOOKSTORE_THEORY).expect("fixture theory parses")
}

pub fn linus_trace() -> Trace {
    parse_traces(LINUS_TRACE)
        .expect("fixture trace parses")
        .pop()
        .expect("one trace")
}

pub fn camera_activities() -> Vec<ActivitySpec> {
    parse_activities(CAMERA_ACTIVITIES).expect("fixture activities parse")
}
