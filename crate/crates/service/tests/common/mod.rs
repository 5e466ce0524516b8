#![allow(dead_code)]

use personable_core::fixtures;
use personable_service::manager::{NewSession, NewSite};
use personable_service::{Config, SessionManager};
use tempfile::TempDir;

pub fn config(dir: &TempDir) -> Config {
    let mut c = Config::new(dir.path());
    c.verify = true;
    c
}

/// A manager with the camera, congress and bookstore sites loaded.
pub fn manager(dir: &TempDir) -> SessionManager {
    let m = SessionManager::open(config(dir)).unwrap();
    add_sites(&m);
    m
}

pub fn add_sites(m: &SessionManager) {
    m.add_site(NewSite {
        id: Some("camera".into()),
        description: fixtures::CAMERA_SITE.into(),
        theory: None,
        activities: Some(fixtures::CAMERA_ACTIVITIES.into()),
    })
    .unwrap();
    m.add_site(NewSite {
        id: Some("congress".into()),
        description: fixtures::CONGRESS_SITE.into(),
        ..Default::default()
    })
    .unwrap();
    m.add_site(NewSite {
        id: Some("bookstore".into()),
        description: fixtures::BOOKSTORE_SITE.into(),
        theory: Some(fixtures::BOOKSTORE_THEORY.into()),
        activities: None,
    })
    .unwrap();
}

pub fn session(m: &SessionManager, site: &str, user: Option<&str>, template: Option<&str>) -> String {
    m.create_session(NewSession {
        site: site.into(),
        template: template.map(Into::into),
        user: user.map(Into::into),
    })
    .unwrap()
    .session
}

/// Browses the bookstore to a title and fills both forms.
pub fn buy(m: &SessionManager, id: &str, category: &str, title: &str, payment: &str, shipping: &str) {
    m.click(id, &format!("category={category}")).unwrap();
    m.click(id, &format!("title={title}")).unwrap();
    m.fill(id, "payment", payment).unwrap();
    m.fill(id, "shipping", shipping).unwrap();
}

use std::collections::BTreeMap;

use personable_core::ingest::load_site;
use personable_core::{partial_evaluate, Assignment, InteractionProgram, SpecializationKind};
use personable_service::session::Step;
use personable_service::{ServiceError, Status};

pub const SITES: [&str; 3] = ["camera", "congress", "bookstore"];

/// Lexicon phrases per site, plus one term no site knows.
pub fn terms(site: &str) -> &'static [&'static str] {
    match site {
        "camera" => &["Canon", "Nikon", "Minolta", "35mm", "APS", "SLR", "single lens reflex", "tripod"],
        "congress" => &[
            "North Dakota",
            "Virginia",
            "Montana",
            "Democrat",
            "Republican",
            "Senator",
            "Representative",
            "Senior seat",
            "Junior seat",
            "tripod",
        ],
        _ => &["Mystery", "Science", "Fiction", "John Nash", "A Beautiful Mind", "Cosmos", "Emma", "tripod"],
    }
}

/// Base programs loaded straight from the fixtures, independent of the
/// manager.
pub fn bases() -> BTreeMap<&'static str, InteractionProgram> {
    [
        ("camera", fixtures::CAMERA_SITE),
        ("congress", fixtures::CONGRESS_SITE),
        ("bookstore", fixtures::BOOKSTORE_SITE),
    ]
    .into_iter()
    .map(|(id, text)| (id, load_site(text).unwrap().program))
    .collect()
}

/// Drives one random action against session `id`. Expected rejections
/// (contradictions, inactive sessions and so on) are part of the traffic;
/// anything else fails the test. Returns whether the session changed.
pub fn act(m: &SessionManager, id: &str, action: u8, pick: usize) -> bool {
    let before = m.session(id).unwrap();
    let site = before.site.clone();
    let result: Result<(), ServiceError> = match action % 6 {
        0 | 1 => {
            let page = m.page(id).unwrap();
            match page.links.get(pick % page.links.len().max(1)) {
                Some(l) => m.click(id, &l.variable.to_string()).map(drop),
                None => Ok(()),
            }
        }
        2 => {
            let t = terms(&site);
            let chosen: Vec<String> = (0..=pick % 2).map(|k| t[(pick / 3 + k * 5) % t.len()].to_string()).collect();
            m.out_of_turn(id, &chosen).map(drop)
        }
        3 if site == "bookstore" => m.fill(id, ["payment", "shipping"][pick % 2], &format!("v{}", pick % 4)).map(drop),
        3 => m.choices(id, "maker").map(drop).or(Ok(())),
        4 => m.save(id).map(drop),
        _ => m.resume(id).map(drop),
    };
    match result {
        Ok(()) => {}
        Err(
            ServiceError::SessionNotActive { .. }
            | ServiceError::NotSaved { .. }
            | ServiceError::ConflictsWithSession { .. }
            | ServiceError::Map(_),
        ) => assert_eq!(m.session(id).unwrap(), before, "rejected action changed the session"),
        Err(e) => panic!("unexpected error: {e}"),
    }
    m.session(id).unwrap() != before
}

/// Recomputes the specialization from the base program and the session's
/// assignment, and rebuilds the assignment from the history.
pub fn check_session(m: &SessionManager, bases: &BTreeMap<&str, InteractionProgram>, id: &str) {
    let s = m.session(id).unwrap();
    let page = m.page(id).unwrap();
    let base = &bases[s.site.as_str()];

    let fresh = partial_evaluate(base, &s.applied).unwrap();
    let p = fresh.program().expect("sessions never hold an empty result");
    assert_eq!(&page.page, p.root.page());
    assert_eq!(page.leaves, p.root.leaf_count());
    assert_eq!(page.kind, fresh.kind());
    let fresh_links: Vec<_> = p.root.edges().iter().map(|e| e.variable.clone()).collect();
    let links: Vec<_> = page.links.iter().map(|l| l.variable.clone()).collect();
    assert_eq!(links, fresh_links);

    let mut acc = Assignment::new();
    for step in &s.history {
        let added = match step {
            Step::Template { baked, .. } => baked.clone(),
            Step::Click { variable, .. } => Assignment::closed_from_trues(&base.schema, [variable]).unwrap(),
            Step::OutOfTurn { added, .. } => added.clone(),
            Step::FormFill { .. } => Assignment::new(),
        };
        acc = acc.union(&added).expect("history is consistent");
    }
    assert_eq!(acc, s.applied);

    match s.status {
        Status::Completed => assert_eq!(fresh.kind(), SpecializationKind::Complete),
        Status::Active => assert_ne!(fresh.kind(), SpecializationKind::Complete),
        Status::Saved => assert!(s.ever_saved),
    }
}
