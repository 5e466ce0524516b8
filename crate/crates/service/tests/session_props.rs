mod common;

use common::{act, bases, check_session, manager, session, SITES};
use personable_service::SessionManager;
use proptest::prelude::*;
use tempfile::TempDir;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn random_actions_keep_sessions_equal_to_fresh_specializations(
        site in 0usize..3,
        actions in prop::collection::vec((any::<u8>(), any::<usize>()), 0..30),
    ) {
        let dir = TempDir::new().unwrap();
        let m = manager(&dir);
        let bases = bases();
        let id = session(&m, SITES[site], Some("prop"), None);
        for (a, pick) in actions {
            act(&m, &id, a, pick);
            check_session(&m, &bases, &id);
        }
        let live = m.session(&id).unwrap();
        let page = m.page(&id).unwrap();
        drop(m);
        let reopened = SessionManager::open(common::config(&dir)).unwrap();
        prop_assert_eq!(reopened.session(&id).unwrap(), live);
        prop_assert_eq!(reopened.page(&id).unwrap(), page);
    }
}
