mod common;

use common::{buy, manager, session};
use personable_core::{fixtures, partial_evaluate, Assignment, PageId, SpecializationKind, Variable};
use personable_service::manager::{DeriveRequest, NewSession};
use personable_service::{ServiceError, SessionManager, Status};
use tempfile::TempDir;

fn v(s: &str) -> Variable {
    s.parse().unwrap()
}

fn link_vars(m: &SessionManager, id: &str) -> Vec<String> {
    m.page(id)
        .unwrap()
        .links
        .iter()
        .map(|l| l.variable.to_string())
        .collect()
}

#[test]
fn new_session_shows_the_home_page() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    let page = m.page(&id).unwrap();
    assert_eq!(page.status, Status::Active);
    assert_eq!(page.kind, SpecializationKind::Partial);
    assert_eq!(page.leaves, fixtures::camera().root.leaf_count());
    assert_eq!(link_vars(&m, &id), ["maker=Canon", "maker=Nikon", "maker=Minolta"]);
    assert!(page.applied.is_empty());
}

#[test]
fn out_of_turn_slr_matches_a_fresh_specialization() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    let r = m.out_of_turn(&id, &["SLR".into()]).unwrap();
    assert!(!r.no_match);
    assert!(r.warnings.is_empty());
    assert_eq!(link_vars(&m, &id), ["maker=Nikon", "maker=Minolta"]);

    let camera = fixtures::camera();
    let a = Assignment::closed_from_trues(&camera.schema, [&v("type=SLR")]).unwrap();
    let fresh = partial_evaluate(&camera, &a).unwrap();
    assert_eq!(r.view.leaves, fresh.leaves().len());
    assert!(r.view.eliminated.contains(&PageId::new("canon")));
}

#[test]
fn clicks_walk_down_to_completion() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    m.click(&id, "maker=Nikon").unwrap();
    let r = m.click(&id, "type=SLR").unwrap();
    assert_eq!(r.view.status, Status::Completed);
    assert_eq!(r.view.kind, SpecializationKind::Complete);
    assert!(r.view.content.is_some());
    let err = m.click(&id, "type=SLR").unwrap_err();
    assert!(matches!(err, ServiceError::SessionNotActive { .. }));
}

#[test]
fn click_off_the_current_page_is_rejected_without_mutation() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    let before = m.session(&id).unwrap();
    assert_eq!(m.click(&id, "type=SLR").unwrap_err().kind(), "no-such-edge");
    assert!(matches!(m.click(&id, "no-equals"), Err(ServiceError::BadRequest(_))));
    assert_eq!(m.session(&id).unwrap(), before);
}

#[test]
fn unknown_terms_warn_and_leave_the_session_alone() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "congress", None, None);
    let before = m.session(&id).unwrap();
    let r = m.out_of_turn(&id, &["warranty".into()]).unwrap();
    assert_eq!(r.warnings.len(), 1);
    assert!(!r.no_match);
    assert_eq!(m.session(&id).unwrap(), before);

    let r = m.out_of_turn(&id, &["warranty".into(), "North Dakota".into()]).unwrap();
    assert_eq!(r.warnings.len(), 1);
    assert_eq!(r.view.applied.true_value_of("state"), Some("ND"));
}

#[test]
fn senior_seat_then_representative_is_a_contradiction() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "congress", None, None);
    let r = m.out_of_turn(&id, &["Senior seat".into()]).unwrap();
    assert_eq!(r.view.applied.get(&v("branch=senate")), Some(true));
    let before = m.session(&id).unwrap();
    let err = m.out_of_turn(&id, &["Representative".into()]).unwrap_err();
    assert_eq!(err.kind(), "contradiction");
    assert_eq!(m.session(&id).unwrap(), before);
}

#[test]
fn north_dakota_representative_is_a_single_page() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "congress", None, None);
    let r = m
        .out_of_turn(&id, &["North Dakota".into(), "Representative".into()])
        .unwrap();
    assert_eq!(r.view.status, Status::Completed);
    assert_eq!(r.view.page, PageId::new("nd-house-r"));
}

#[test]
fn consistent_input_with_no_pages_is_no_match() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    m.click(&id, "maker=Canon").unwrap();
    let before = m.session(&id).unwrap();
    let r = m.out_of_turn(&id, &["SLR".into()]).unwrap();
    assert!(r.no_match);
    assert_eq!(m.session(&id).unwrap(), before);
}

#[test]
fn choices_follow_the_surviving_paths() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    assert_eq!(m.choices(&id, "type").unwrap(), ["35mm", "APS", "SLR"]);
    m.out_of_turn(&id, &["SLR".into()]).unwrap();
    assert_eq!(m.choices(&id, "maker").unwrap(), ["Nikon", "Minolta"]);
    assert_eq!(m.choices(&id, "type").unwrap(), ["SLR"]);
    assert!(matches!(m.choices(&id, "colour"), Err(ServiceError::UnknownAttribute(_))));
}

#[test]
fn save_and_resume() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "camera", None, None);
    assert!(matches!(m.resume(&id), Err(ServiceError::NotSaved { .. })));
    m.click(&id, "maker=Nikon").unwrap();
    assert_eq!(m.save(&id).unwrap().status, Status::Saved);
    assert_eq!(m.save(&id).unwrap().status, Status::Saved);
    assert!(matches!(m.click(&id, "type=SLR"), Err(ServiceError::SessionNotActive { .. })));
    assert_eq!(m.resume(&id).unwrap().status, Status::Active);
    assert_eq!(m.resume(&id).unwrap().status, Status::Active);
    assert_eq!(m.click(&id, "type=SLR").unwrap().view.status, Status::Completed);
    m.save(&id).unwrap();
    assert_eq!(m.resume(&id).unwrap().status, Status::Completed);
}

#[test]
fn form_fills_need_a_declared_slot() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "bookstore", Some("linus"), None);
    assert!(matches!(m.fill(&id, "colour", "red"), Err(ServiceError::UnknownSlot(_))));
    let cam = session(&m, "camera", None, None);
    assert!(matches!(m.fill(&cam, "payment", "Visa"), Err(ServiceError::UnknownSlot(_))));
    m.fill(&id, "payment", "Visa").unwrap();
    assert_eq!(m.page(&id).unwrap().slots["payment"], "Visa");
}

#[test]
fn trace_export_needs_completion() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "bookstore", Some("linus"), None);
    m.click(&id, "category=Science").unwrap();
    assert!(matches!(m.trace(&id), Err(ServiceError::NotCompleted { .. })));
    m.click(&id, "title=John Nash").unwrap();
    m.fill(&id, "payment", "Discover").unwrap();
    m.fill(&id, "shipping", "Fedex").unwrap();
    let t = m.trace(&id).unwrap();
    assert_eq!(t.user, "linus");
    let names: Vec<&str> = t.events.iter().map(|e| e.name.as_str()).collect();
    assert_eq!(names, ["category", "title", "payment", "shipping"]);
    assert!(t.events.windows(2).all(|w| w[0].ts < w[1].ts));
    // Exporting is pure.
    assert!(m.remembered("bookstore", "linus").unwrap().is_none());
}

#[test]
fn recorded_traces_become_a_remembered_template() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let id = session(&m, "bookstore", Some("linus"), None);
    buy(&m, &id, "Science", "John Nash", "Discover", "Fedex");
    let rec = m.record_trace(&id).unwrap();
    assert_eq!(rec.remembered.as_deref(), Some("remembered-linus"));
    assert_eq!(m.remembered("bookstore", "linus").unwrap().as_deref(), Some("remembered-linus"));

    let next = m
        .create_session(NewSession {
            site: "bookstore".into(),
            template: Some("remembered-linus".into()),
            user: Some("linus".into()),
        })
        .unwrap();
    assert_eq!(next.slots["payment"], "Discover");
    assert_eq!(next.slots["shipping"], "Fedex");
    assert_eq!(next.template.as_deref(), Some("remembered-linus"));
    assert_eq!(next.status, Status::Active);

    let err = m
        .create_session(NewSession {
            site: "bookstore".into(),
            template: Some("remembered-linus".into()),
            user: Some("ada".into()),
        })
        .unwrap_err();
    assert!(matches!(err, ServiceError::ScopeMismatch { .. }));
    let err = m
        .create_session(NewSession {
            site: "camera".into(),
            template: Some("remembered-linus".into()),
            user: Some("linus".into()),
        })
        .unwrap_err();
    assert!(matches!(err, ServiceError::ScopeMismatch { .. }));

    let listed: Vec<String> = m.templates("bookstore", Some("ada")).unwrap().into_iter().map(|t| t.id).collect();
    assert!(!listed.contains(&"remembered-linus".to_string()));
}

#[test]
fn derivation_from_recorded_traces() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    for (user, cat, title, pay, ship) in [
        ("linus", "Science", "John Nash", "Discover", "Fedex"),
        ("linus", "Science", "Cosmos", "Discover", "Fedex"),
        ("ada", "Mystery", "The Hound", "Visa", "UPS"),
    ] {
        let id = session(&m, "bookstore", Some(user), None);
        buy(&m, &id, cat, title, pay, ship);
        m.record_trace(&id).unwrap();
    }
    let d = m.derive("bookstore", DeriveRequest::default()).unwrap();
    assert_eq!(d.templates.last().unwrap().id, "vanilla");
    assert!(d.table.windows(2).all(|w| w[0].utility >= w[1].utility));
    assert!(d.templates.iter().all(|t| t.id == "vanilla" || t.id.starts_with("derived-")));

    // Derived templates replace the previous derivation.
    let again = m.derive("bookstore", DeriveRequest::default()).unwrap();
    let ids: Vec<String> = m
        .templates("bookstore", None)
        .unwrap()
        .into_iter()
        .filter(|t| t.origin == personable_service::store::Origin::Derived)
        .map(|t| t.id)
        .collect();
    assert_eq!(ids.len(), again.templates.len());

    let vanilla = m
        .create_session(NewSession {
            site: "bookstore".into(),
            template: Some("vanilla".into()),
            user: None,
        })
        .unwrap();
    assert_eq!(vanilla.leaves, fixtures::bookstore_site().program.root.leaf_count());

    assert!(matches!(
        m.derive("camera", DeriveRequest::default()),
        Err(ServiceError::NoTheory(_))
    ));
}

#[test]
fn derive_rejects_traces_outside_the_schema() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let bad = r#"{"trace":"t","user":"u","ts":1,"kind":"click","name":"colour","value":"red"}"#;
    let err = m
        .derive(
            "bookstore",
            DeriveRequest {
                traces: Some(bad.into()),
                ..Default::default()
            },
        )
        .unwrap_err();
    assert_eq!(err.kind(), "invalid-trace");
}

#[test]
fn unknown_ids_are_reported() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    assert!(matches!(m.page("nope"), Err(ServiceError::UnknownSession(_))));
    assert!(matches!(m.site_summary("nope"), Err(ServiceError::UnknownSite(_))));
    let err = m
        .create_session(NewSession {
            site: "camera".into(),
            template: Some("nope".into()),
            user: None,
        })
        .unwrap_err();
    assert!(matches!(err, ServiceError::UnknownTemplate(_)));
    let err = m
        .add_site(personable_service::manager::NewSite {
            id: Some("camera".into()),
            description: fixtures::CAMERA_SITE.into(),
            ..Default::default()
        })
        .unwrap_err();
    assert!(matches!(err, ServiceError::SiteExists(_)));
}

#[test]
fn analysis_reports_frozen_and_audience() {
    let dir = TempDir::new().unwrap();
    let m = manager(&dir);
    let a = m.analysis("camera").unwrap();
    assert!(!a.frozen.frozen);
    assert_eq!(a.audience.rows.len(), 5);
    assert_eq!(a.audience.summary["personable"], 2);
}
