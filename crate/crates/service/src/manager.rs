//! Hosts sites, templates and sessions on top of the store.
//!
//! Requests to one session are serialized by that session's mutex; different
//! sessions proceed independently. Site and template catalogs sit behind
//! read-write locks and are replaced atomically.

use std::collections::{BTreeMap, HashMap};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};
use std::time::{SystemTime, UNIX_EPOCH};

use personable_core::analysis::{audience, detect_frozen, parse_activities, ActivitySpec, AudienceReport, FrozenDiagnosis};
use personable_core::ebg::{
    check_trace, derive_templates, parse_traces, remember, DeriveOptions, DomainTheory, Rejection,
    Scope, Template, TemplateScore, Trace, VANILLA,
};
use personable_core::ingest::{load_site, Site};
use personable_core::mapper::{MapError, Mapper, Provenance};
use personable_core::{Node, PageId, SpecializationKind, Variable, Violation};
use serde::{Deserialize, Serialize};

use crate::error::ServiceError;
use crate::session::{resumed_status, LiveSession, LogEntry, Session, Status, Step};
use crate::store::{valid_id, Origin, SiteRecord, Snapshot, Store, TemplateRecord};

#[derive(Debug, Clone)]
pub struct Config {
    pub data_dir: PathBuf,
    pub top_k: usize,
    pub remember_threshold: usize,
    /// Recompute and replay every session after each mutation.
    pub verify: bool,
    /// Write a snapshot after this many log entries.
    pub snapshot_every: usize,
}

impl Config {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            top_k: 5,
            remember_threshold: 1,
            verify: cfg!(debug_assertions),
            snapshot_every: 50,
        }
    }
}

pub struct HostedSite {
    pub record: SiteRecord,
    pub site: Site,
    pub theory: Option<DomainTheory>,
    pub activities: Vec<ActivitySpec>,
}

impl HostedSite {
    fn from_record(record: SiteRecord) -> Result<Self, ServiceError> {
        let site = load_site(&record.description)?;
        let theory = record.theory.as_deref().map(DomainTheory::parse).transpose()?;
        let activities = match &record.activities {
            Some(text) => parse_activities(text)?,
            None => Vec::new(),
        };
        Ok(Self {
            record,
            site,
            theory,
            activities,
        })
    }

    fn base(&self) -> &personable_core::InteractionProgram {
        &self.site.program
    }
}

// ---------------------------------------------------------------------------
// Request and response payloads
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NewSite {
    #[serde(default)]
    pub id: Option<String>,
    pub description: String,
    #[serde(default)]
    pub theory: Option<String>,
    #[serde(default)]
    pub activities: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteSummary {
    pub id: String,
    pub name: Option<String>,
    pub attributes: Vec<String>,
    pub leaves: usize,
    pub depth: usize,
    pub violations: Vec<Violation>,
    pub has_theory: bool,
    pub activities: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AnalysisView {
    pub site: String,
    pub frozen: FrozenDiagnosis,
    pub violations: Vec<Violation>,
    pub audience: AudienceReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TemplateSummary {
    pub id: String,
    pub name: String,
    pub origin: Origin,
    pub scope: Scope,
    pub baked: Vec<Variable>,
    pub slots: BTreeMap<String, String>,
    pub free: Vec<String>,
    pub subsumed_events: usize,
    pub entry_kind: SpecializationKind,
}

impl From<&TemplateRecord> for TemplateSummary {
    fn from(r: &TemplateRecord) -> Self {
        let t = &r.template;
        Self {
            id: r.id.clone(),
            name: t.name.clone(),
            origin: r.origin,
            scope: t.scope.clone(),
            baked: t.baked.trues().cloned().collect(),
            slots: t.slots.clone(),
            free: t.free.iter().map(ToString::to_string).collect(),
            subsumed_events: t.subsumed_events,
            entry_kind: t.entry_kind,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DeriveRequest {
    /// Trace log text; the site's recorded traces are used when absent.
    #[serde(default)]
    pub traces: Option<String>,
    #[serde(default)]
    pub max_frontier: Option<usize>,
    #[serde(default)]
    pub top_k: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeriveResponse {
    pub table: Vec<TemplateScore>,
    pub templates: Vec<TemplateSummary>,
    pub rejected: Vec<Rejection>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct NewSession {
    pub site: String,
    #[serde(default)]
    pub template: Option<String>,
    #[serde(default)]
    pub user: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkView {
    pub variable: Variable,
    pub anchor: String,
    pub resolved: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentView {
    pub content_ref: String,
    pub title: String,
    pub body: String,
}

/// What the user sees: the current root page of the specialized program.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageView {
    pub session: String,
    pub site: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub template: Option<String>,
    pub status: Status,
    pub kind: SpecializationKind,
    pub page: PageId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub content: Option<ContentView>,
    pub links: Vec<LinkView>,
    pub leaves: usize,
    pub eliminated: Vec<PageId>,
    pub applied: personable_core::Assignment,
    pub slots: BTreeMap<String, String>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionResponse {
    #[serde(flatten)]
    pub view: PageView,
    /// Unrecognized terms and similar non-fatal notes.
    pub warnings: Vec<String>,
    /// The input matched nothing; the session is unchanged.
    pub no_match: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub provenance: BTreeMap<Variable, Provenance>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RecordedTrace {
    pub trace: Trace,
    /// Remembered template for the user, when one was (re)computed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub remembered: Option<String>,
}

// ---------------------------------------------------------------------------
// Manager
// ---------------------------------------------------------------------------

struct Slot {
    live: LiveSession,
    log_len: usize,
}

pub struct SessionManager {
    store: Store,
    config: Config,
    sites: RwLock<BTreeMap<String, Arc<HostedSite>>>,
    templates: RwLock<BTreeMap<String, BTreeMap<String, TemplateRecord>>>,
    sessions: RwLock<HashMap<String, Arc<Mutex<Slot>>>>,
    clock: AtomicU64,
    /// Serializes corpus appends and remembrance updates.
    corpus: Mutex<()>,
    recovery_issues: Vec<String>,
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

fn lock<T>(m: &Mutex<T>) -> std::sync::MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

impl SessionManager {
    /// Opens the data directory and recovers every stored site, template and
    /// session. Records that cannot be recovered are skipped and listed in
    /// [`SessionManager::recovery_issues`].
    pub fn open(config: Config) -> Result<Self, ServiceError> {
        let store = Store::open(&config.data_dir)?;
        let mut issues = Vec::new();

        let mut sites = BTreeMap::new();
        let mut templates = BTreeMap::new();
        for id in store.site_ids()? {
            match store.get_site(&id).map_err(ServiceError::from).and_then(HostedSite::from_record) {
                Ok(h) => {
                    let recs: BTreeMap<String, TemplateRecord> = store
                        .templates(&id)?
                        .into_iter()
                        .map(|r| (r.id.clone(), r))
                        .collect();
                    templates.insert(id.clone(), recs);
                    sites.insert(id, Arc::new(h));
                }
                Err(e) => issues.push(format!("site {id}: {e}")),
            }
        }

        let mut sessions = HashMap::new();
        let mut latest_ts = 0;
        for id in store.session_ids()? {
            match recover_session(&store, &sites, &id) {
                Ok(slot) => {
                    latest_ts = latest_ts.max(last_ts(&slot.live.session));
                    sessions.insert(id, Arc::new(Mutex::new(slot)));
                }
                Err(e) => issues.push(format!("session {id}: {e}")),
            }
        }
        for issue in &issues {
            tracing::warn!("recovery: {issue}");
        }
        Ok(Self {
            store,
            config,
            sites: RwLock::new(sites),
            templates: RwLock::new(templates),
            sessions: RwLock::new(sessions),
            clock: AtomicU64::new(latest_ts),
            corpus: Mutex::new(()),
            recovery_issues: issues,
        })
    }

    pub fn config(&self) -> &Config {
        &self.config
    }

    pub fn recovery_issues(&self) -> &[String] {
        &self.recovery_issues
    }

    /// Strictly increasing timestamps, close to wall-clock milliseconds.
    fn tick(&self) -> u64 {
        let now = now_ms();
        let mut prev = self.clock.load(Ordering::Relaxed);
        loop {
            let next = now.max(prev + 1);
            match self.clock.compare_exchange(prev, next, Ordering::SeqCst, Ordering::Relaxed) {
                Ok(_) => return next,
                Err(p) => prev = p,
            }
        }
    }

    fn site(&self, id: &str) -> Result<Arc<HostedSite>, ServiceError> {
        self.sites
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSite(id.to_string()))
    }

    // Sites

    pub fn add_site(&self, req: NewSite) -> Result<SiteSummary, ServiceError> {
        let site = load_site(&req.description)?;
        let id = req
            .id
            .clone()
            .or_else(|| site.name.clone())
            .unwrap_or_else(|| uuid::Uuid::new_v4().simple().to_string());
        if !valid_id(&id) {
            return Err(ServiceError::BadRequest(format!("`{id}` is not a usable site id")));
        }
        let hosted = HostedSite::from_record(SiteRecord {
            id: id.clone(),
            description: req.description,
            theory: req.theory,
            activities: req.activities,
        })?;
        let mut sites = self.sites.write().unwrap_or_else(|e| e.into_inner());
        if sites.contains_key(&id) {
            return Err(ServiceError::SiteExists(id));
        }
        self.store.put_site(&hosted.record)?;
        let summary = summarize(&hosted);
        sites.insert(id.clone(), Arc::new(hosted));
        self.templates
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .entry(id)
            .or_default();
        Ok(summary)
    }

    pub fn sites(&self) -> Vec<SiteSummary> {
        self.sites
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .values()
            .map(|h| summarize(h))
            .collect()
    }

    pub fn site_summary(&self, id: &str) -> Result<SiteSummary, ServiceError> {
        Ok(summarize(&*self.site(id)?))
    }

    pub fn analysis(&self, id: &str) -> Result<AnalysisView, ServiceError> {
        let h = self.site(id)?;
        Ok(AnalysisView {
            site: id.to_string(),
            frozen: detect_frozen(h.base()),
            violations: h.site.report.clone(),
            audience: audience(h.base(), &h.activities)?,
        })
    }

    // Templates

    pub fn templates(&self, site: &str, user: Option<&str>) -> Result<Vec<TemplateSummary>, ServiceError> {
        self.site(site)?;
        let all = self.templates.read().unwrap_or_else(|e| e.into_inner());
        Ok(all
            .get(site)
            .into_iter()
            .flat_map(|m| m.values())
            .filter(|r| user.is_none_or(|u| r.template.scope.applies_to(u)))
            .map(TemplateSummary::from)
            .collect())
    }

    pub fn derive(&self, site: &str, req: DeriveRequest) -> Result<DeriveResponse, ServiceError> {
        let h = self.site(site)?;
        let theory = h.theory.as_ref().ok_or_else(|| ServiceError::NoTheory(site.to_string()))?;
        let corpus = match &req.traces {
            Some(text) => parse_traces(text)?,
            None => self.store.traces(site)?,
        };
        let slots = theory.slots();
        for t in &corpus {
            check_trace(t, h.site.schema(), &slots)?;
        }
        let opts = DeriveOptions {
            max_frontier: req.max_frontier.unwrap_or(DeriveOptions::default().max_frontier),
            top_k: req.top_k.unwrap_or(self.config.top_k),
        };
        let derivation = derive_templates(theory, h.base(), &corpus, opts);

        let mut all = self.templates.write().unwrap_or_else(|e| e.into_inner());
        let entry = all.entry(site.to_string()).or_default();
        let stale: Vec<String> = entry
            .values()
            .filter(|r| r.origin == Origin::Derived)
            .map(|r| r.id.clone())
            .collect();
        for id in stale {
            self.store.delete_template(site, &id)?;
            entry.remove(&id);
        }
        let mut summaries = Vec::new();
        for (i, t) in derivation.templates.into_iter().enumerate() {
            let id = if t.is_vanilla() {
                VANILLA.to_string()
            } else {
                format!("derived-{}", i + 1)
            };
            let record = TemplateRecord {
                id: id.clone(),
                site: site.to_string(),
                origin: Origin::Derived,
                template: t,
            };
            self.store.put_template(&record)?;
            summaries.push(TemplateSummary::from(&record));
            entry.insert(id, record);
        }
        Ok(DeriveResponse {
            table: derivation.table,
            templates: summaries,
            rejected: derivation.rejected,
        })
    }

    // Sessions

    pub fn create_session(&self, req: NewSession) -> Result<PageView, ServiceError> {
        let h = self.site(&req.site)?;
        if let Some(u) = &req.user {
            if !valid_id(u) {
                return Err(ServiceError::BadRequest(format!("`{u}` is not a usable user id")));
            }
        }
        let template = match &req.template {
            None => None,
            Some(tid) => Some(self.find_template(&req.site, tid, req.user.as_deref())?),
        };
        let id = uuid::Uuid::new_v4().simple().to_string();
        let mut live = LiveSession::start(Session::new(id.clone(), req.site.clone(), req.user.clone()), h.base());
        let mut log = vec![LogEntry::Created {
            site: req.site.clone(),
            user: req.user.clone(),
        }];
        if let (Some(t), Some(tid)) = (&template, &req.template) {
            let step = LiveSession::template_step(tid, t);
            if !live.apply(h.base(), step.clone())? {
                return Err(ServiceError::NoMatch);
            }
            log.push(LogEntry::Step(step));
        }
        for e in &log {
            self.store.append_log(&id, e)?;
        }
        let slot = Slot {
            live,
            log_len: log.len(),
        };
        self.verify(&h, &slot)?;
        let view = page_view(&h, &slot.live);
        self.sessions
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(id, Arc::new(Mutex::new(slot)));
        Ok(view)
    }

    fn find_template(&self, site: &str, id: &str, user: Option<&str>) -> Result<Template, ServiceError> {
        let all = self.templates.read().unwrap_or_else(|e| e.into_inner());
        let record = match all.get(site).and_then(|m| m.get(id)) {
            Some(r) => r,
            None if all.values().any(|m| m.contains_key(id)) => {
                return Err(ServiceError::ScopeMismatch {
                    template: id.to_string(),
                })
            }
            None => return Err(ServiceError::UnknownTemplate(id.to_string())),
        };
        if let Scope::PerUser(owner) = &record.template.scope {
            if user != Some(owner.as_str()) {
                return Err(ServiceError::ScopeMismatch {
                    template: id.to_string(),
                });
            }
        }
        Ok(record.template.clone())
    }

    fn slot(&self, id: &str) -> Result<Arc<Mutex<Slot>>, ServiceError> {
        self.sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(id)
            .cloned()
            .ok_or_else(|| ServiceError::UnknownSession(id.to_string()))
    }

    pub fn session_ids(&self) -> Vec<String> {
        let mut ids: Vec<String> = self
            .sessions
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .keys()
            .cloned()
            .collect();
        ids.sort();
        ids
    }

    pub fn session(&self, id: &str) -> Result<Session, ServiceError> {
        Ok(lock(&*self.slot(id)?).live.session.clone())
    }

    pub fn page(&self, id: &str) -> Result<PageView, ServiceError> {
        let slot = self.slot(id)?;
        let slot = lock(&slot);
        let h = self.site(&slot.live.session.site)?;
        Ok(page_view(&h, &slot.live))
    }

    /// Runs `f` on a copy of the session; commits the copy and its log
    /// entries only when `f` succeeds.
    fn mutate<T>(
        &self,
        id: &str,
        f: impl FnOnce(&HostedSite, &mut LiveSession) -> Result<(T, Vec<LogEntry>), ServiceError>,
    ) -> Result<(T, PageView), ServiceError> {
        let slot = self.slot(id)?;
        let mut slot = lock(&slot);
        let h = self.site(&slot.live.session.site)?;
        let mut draft = slot.live.clone();
        let (out, entries) = f(&h, &mut draft)?;
        for e in &entries {
            self.store.append_log(id, e)?;
        }
        let before = slot.log_len;
        slot.live = draft;
        slot.log_len += entries.len();
        if slot.log_len / self.config.snapshot_every.max(1) > before / self.config.snapshot_every.max(1)
            || entries.iter().any(|e| matches!(e, LogEntry::Saved))
        {
            self.store.put_snapshot(&Snapshot {
                entries: slot.log_len,
                session: slot.live.session.clone(),
            })?;
        }
        self.verify(&h, &slot)?;
        Ok((out, page_view(&h, &slot.live)))
    }

    fn verify(&self, h: &HostedSite, slot: &Slot) -> Result<(), ServiceError> {
        if !self.config.verify {
            return Ok(());
        }
        slot.live.check_invariant(h.base())?;
        let id = &slot.live.session.id;
        let replayed = LiveSession::replay(id, h.base(), &self.store.read_log(id)?)?;
        let same_program = match (replayed.current.program(), slot.live.current.program()) {
            (Some(a), Some(b)) => a.same_structure(b),
            (a, b) => a.is_none() && b.is_none(),
        };
        if replayed.session != slot.live.session || !same_program {
            return Err(ServiceError::ReplayDiverged {
                session: id.clone(),
                reason: "replayed log differs from the live session".into(),
            });
        }
        Ok(())
    }

    pub fn click(&self, id: &str, variable: &str) -> Result<ActionResponse, ServiceError> {
        let variable: Variable = variable
            .parse()
            .map_err(|e: personable_core::model::ParseVariableError| ServiceError::BadRequest(e.to_string()))?;
        let ts = self.tick();
        let (no_match, view) = self.mutate(id, |h, live| {
            let step = Step::Click { variable, ts };
            let applied = live.apply(h.base(), step.clone())?;
            Ok((!applied, if applied { vec![LogEntry::Step(step)] } else { vec![] }))
        })?;
        Ok(ActionResponse {
            view,
            warnings: Vec::new(),
            no_match,
            provenance: BTreeMap::new(),
        })
    }

    pub fn out_of_turn(&self, id: &str, terms: &[String]) -> Result<ActionResponse, ServiceError> {
        let ts = self.tick();
        let ((warnings, no_match, provenance), view) = self.mutate(id, |h, live| {
            if live.session.status != Status::Active {
                return Err(ServiceError::SessionNotActive {
                    session: live.session.id.clone(),
                    status: live.session.status,
                });
            }
            let terms: Vec<String> = terms
                .iter()
                .map(|t| t.trim().to_string())
                .filter(|t| !t.is_empty())
                .collect();
            let mapper = Mapper::new(h.site.schema(), &h.site.lexicon, &h.site.rules);
            let mapping = match mapper.map_with_prior(&live.session.applied, &terms) {
                Ok(m) => m,
                Err(MapError::AllTermsUnknown(unknown)) => {
                    return Ok(((unrecognized(&unknown), false, BTreeMap::new()), vec![]))
                }
                Err(e) => return Err(e.into()),
            };
            let warnings = unrecognized(&mapping.unrecognized);
            if mapping.assignment.is_empty() {
                return Ok(((warnings, false, mapping.provenance), vec![]));
            }
            let step = Step::OutOfTurn {
                terms,
                asserted: mapping.asserted().cloned().collect(),
                added: mapping.assignment.clone(),
                ts,
            };
            if live.apply(h.base(), step.clone())? {
                Ok(((warnings, false, mapping.provenance), vec![LogEntry::Step(step)]))
            } else {
                Ok(((warnings, true, BTreeMap::new()), vec![]))
            }
        })?;
        Ok(ActionResponse {
            view,
            warnings,
            no_match,
            provenance,
        })
    }

    pub fn fill(&self, id: &str, slot_name: &str, value: &str) -> Result<ActionResponse, ServiceError> {
        let ts = self.tick();
        let ((), view) = self.mutate(id, |h, live| {
            let declared = h.theory.as_ref().is_some_and(|t| t.slots().contains(slot_name));
            if !declared {
                return Err(ServiceError::UnknownSlot(slot_name.to_string()));
            }
            let step = Step::FormFill {
                slot: slot_name.to_string(),
                value: value.to_string(),
                ts,
            };
            live.apply(h.base(), step.clone())?;
            Ok(((), vec![LogEntry::Step(step)]))
        })?;
        Ok(ActionResponse {
            view,
            warnings: Vec::new(),
            no_match: false,
            provenance: BTreeMap::new(),
        })
    }

    /// Values of `attribute` still on some surviving path, plus the value
    /// already decided true, in schema order.
    pub fn choices(&self, id: &str, attribute: &str) -> Result<Vec<String>, ServiceError> {
        let slot = self.slot(id)?;
        let slot = lock(&slot);
        let h = self.site(&slot.live.session.site)?;
        let attr = h
            .site
            .schema()
            .attribute(attribute)
            .ok_or_else(|| ServiceError::UnknownAttribute(attribute.to_string()))?;
        let mut present = std::collections::BTreeSet::new();
        if let Some(p) = slot.live.current.program() {
            p.root.walk(&mut |n: &Node| {
                for e in n.edges() {
                    if e.variable.attribute == attribute {
                        present.insert(e.variable.value.clone());
                    }
                }
            });
        }
        if let Some(v) = slot.live.session.applied.true_value_of(attribute) {
            present.insert(v.to_string());
        }
        Ok(attr.values.iter().filter(|v| present.contains(*v)).cloned().collect())
    }

    pub fn save(&self, id: &str) -> Result<PageView, ServiceError> {
        let ((), view) = self.mutate(id, |_, live| match live.session.status {
            Status::Saved => Ok(((), vec![])),
            Status::Active | Status::Completed => {
                live.session.status = Status::Saved;
                live.session.ever_saved = true;
                Ok(((), vec![LogEntry::Saved]))
            }
        })?;
        Ok(view)
    }

    pub fn resume(&self, id: &str) -> Result<PageView, ServiceError> {
        let ((), view) = self.mutate(id, |_, live| match live.session.status {
            Status::Saved => {
                live.session.status = resumed_status(&live.current);
                Ok(((), vec![LogEntry::Resumed]))
            }
            _ if live.session.ever_saved => Ok(((), vec![])),
            _ => Err(ServiceError::NotSaved {
                session: live.session.id.clone(),
            }),
        })?;
        Ok(view)
    }

    pub fn trace(&self, id: &str) -> Result<Trace, ServiceError> {
        lock(&*self.slot(id)?).live.export_trace()
    }

    /// Adds the completed session's trace to the site's corpus and refreshes
    /// the user's remembered template.
    pub fn record_trace(&self, id: &str) -> Result<RecordedTrace, ServiceError> {
        let trace = self.trace(id)?;
        let site = self.session(id)?.site;
        let h = self.site(&site)?;
        let _guard = lock(&self.corpus);
        let mut corpus = self.store.traces(&site)?;
        if !corpus.iter().any(|t| t.id == trace.id) {
            self.store.append_trace(&site, &trace)?;
            corpus.push(trace.clone());
        }
        let user = self.session(id)?.user;
        let remembered = match (user, &h.theory) {
            (Some(user), Some(theory)) => {
                match remember(theory, h.base(), &user, &corpus, self.config.remember_threshold) {
                    Some(t) => {
                        let tid = format!("remembered-{user}");
                        let record = TemplateRecord {
                            id: tid.clone(),
                            site: site.clone(),
                            origin: Origin::Remembered,
                            template: t,
                        };
                        let mut all = self.templates.write().unwrap_or_else(|e| e.into_inner());
                        self.store.put_template(&record)?;
                        self.store.put_remembered(&site, &user, &tid)?;
                        all.entry(site.clone()).or_default().insert(tid.clone(), record);
                        Some(tid)
                    }
                    None => None,
                }
            }
            _ => None,
        };
        Ok(RecordedTrace { trace, remembered })
    }

    pub fn remembered(&self, site: &str, user: &str) -> Result<Option<String>, ServiceError> {
        self.site(site)?;
        Ok(self.store.get_remembered(site, user)?)
    }
}

fn unrecognized(terms: &[String]) -> Vec<String> {
    terms.iter().map(|t| format!("term `{t}` is not recognized")).collect()
}

fn last_ts(s: &Session) -> u64 {
    s.history
        .iter()
        .filter_map(|st| match st {
            Step::Click { ts, .. } | Step::OutOfTurn { ts, .. } | Step::FormFill { ts, .. } => Some(*ts),
            Step::Template { .. } => None,
        })
        .max()
        .unwrap_or(0)
}

fn recover_session(
    store: &Store,
    sites: &BTreeMap<String, Arc<HostedSite>>,
    id: &str,
) -> Result<Slot, ServiceError> {
    if store.repair_log(id)? {
        tracing::warn!("session {id}: dropped an incomplete final log line");
    }
    let log = store.read_log(id)?;
    let site_id = match log.first() {
        Some(LogEntry::Created { site, .. }) => site.clone(),
        _ => {
            return Err(ServiceError::ReplayDiverged {
                session: id.to_string(),
                reason: "log has no creation entry".into(),
            })
        }
    };
    let h = sites
        .get(&site_id)
        .ok_or_else(|| ServiceError::UnknownSite(site_id.clone()))?;
    let live = match store.get_snapshot(id)? {
        Some(snap) if snap.entries <= log.len() => {
            let current = personable_core::partial_evaluate(h.base(), &snap.session.applied)?;
            let start = LiveSession {
                session: snap.session,
                current,
            };
            LiveSession::replay_from(id, h.base(), Some(start), &log[snap.entries..])?
        }
        _ => LiveSession::replay(id, h.base(), &log)?,
    };
    Ok(Slot {
        live,
        log_len: log.len(),
    })
}

fn summarize(h: &HostedSite) -> SiteSummary {
    SiteSummary {
        id: h.record.id.clone(),
        name: h.site.name.clone(),
        attributes: h.site.schema().attributes().map(|a| a.name.clone()).collect(),
        leaves: h.base().root.leaf_count(),
        depth: h.base().depth(),
        violations: h.site.report.clone(),
        has_theory: h.theory.is_some(),
        activities: h.activities.len(),
    }
}

fn content_view(h: &HostedSite, content_ref: &str) -> ContentView {
    match h.site.content.get(content_ref) {
        Some(c) => ContentView {
            content_ref: content_ref.to_string(),
            title: c.title.clone(),
            body: c.body.clone(),
        },
        None => ContentView {
            content_ref: content_ref.to_string(),
            title: content_ref.to_string(),
            body: String::new(),
        },
    }
}

pub fn page_view(h: &HostedSite, live: &LiveSession) -> PageView {
    let s = &live.session;
    let program = live
        .current
        .program()
        .expect("sessions never hold an empty specialization");
    let (content, links) = match &program.root {
        Node::Leaf(l) => (Some(content_view(h, &l.content)), Vec::new()),
        Node::Branch(b) => (
            b.content.as_deref().map(|c| content_view(h, c)),
            b.edges
                .iter()
                .map(|e| LinkView {
                    variable: e.variable.clone(),
                    anchor: e.anchor.clone(),
                    resolved: e.resolved,
                })
                .collect(),
        ),
    };
    PageView {
        session: s.id.clone(),
        site: s.site.clone(),
        user: s.user.clone(),
        template: s.template().map(str::to_string),
        status: s.status,
        kind: live.current.kind(),
        page: program.root.page().clone(),
        content,
        links,
        leaves: program.root.leaf_count(),
        eliminated: live.current.eliminated.iter().cloned().collect(),
        applied: s.applied.clone(),
        slots: s.slots.clone(),
        steps: s.history.len(),
    }
}
