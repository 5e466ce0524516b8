//! The `personable` command line.

use std::collections::BTreeMap;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use personable_core::analysis::{audience, detect_frozen, parse_activities};
use personable_core::ebg::{check_trace, derive_templates, parse_traces, DeriveOptions, DomainTheory, Rejection, Scope, TemplateScore};
use personable_core::ingest::format::{parse_site_file, site_from_file};
use personable_core::ingest::{generate_synthetic, load_site, save_site, Site};
use personable_core::mapper::{Lexicon, Mapper, RuleSet};
use personable_core::{partial_evaluate, Assignment, PageId, SpecializationKind, Variable, Violation};
use personable_service::manager::NewSite;
use personable_service::{Config, ServiceError, SessionManager};
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(name = "personable", version, about = "Personalize hierarchical sites by partial evaluation and interaction templates")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the session service.
    Serve(ServeArgs),
    /// Load a site description (or generate a synthetic one) and report on it.
    Ingest(IngestArgs),
    /// Partially evaluate a site against an assignment and out-of-turn terms.
    Specialize(SpecializeArgs),
    /// Judge which activities a site supports.
    Analyze(AnalyzeArgs),
    /// Derive interaction templates from a trace log.
    DeriveTemplates(DeriveArgs),
}

#[derive(Debug, clap::Args)]
pub struct ServeArgs {
    #[arg(long, env = "PERSONABLE_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, env = "PERSONABLE_BIND", default_value = "127.0.0.1")]
    pub bind: IpAddr,
    #[arg(long, env = "PERSONABLE_DATA_DIR", default_value = "personable-data")]
    pub data_dir: PathBuf,
    /// Templates kept per derivation, besides the vanilla one.
    #[arg(long, env = "PERSONABLE_TOP_K", default_value_t = 5)]
    pub top_k: usize,
    /// Traces a user needs before a remembered template is offered.
    #[arg(long, env = "PERSONABLE_REMEMBER_THRESHOLD", default_value_t = 1)]
    pub remember_threshold: usize,
    /// Replay every session after each change (slow; for debugging).
    #[arg(long, env = "PERSONABLE_VERIFY")]
    pub verify: bool,
    /// Site descriptions to host at startup, unless already stored.
    #[arg(long = "site")]
    pub sites: Vec<PathBuf>,
}

impl ServeArgs {
    pub fn config(&self) -> Config {
        let mut c = Config::new(&self.data_dir);
        c.top_k = self.top_k;
        c.remember_threshold = self.remember_threshold;
        c.verify = self.verify;
        c
    }
}

#[derive(Debug, clap::Args)]
pub struct IngestArgs {
    /// Site description file.
    #[arg(required_unless_present = "synthetic")]
    pub file: Option<PathBuf>,
    /// Rebuild a catalog site with this attribute order (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub order: Option<Vec<String>>,
    /// Generate a synthetic site instead: DEPTH,FANOUT,SEED.
    #[arg(long, value_delimiter = ',', value_name = "DEPTH,FANOUT,SEED", conflicts_with = "file")]
    pub synthetic: Option<Vec<u64>>,
    /// Write the canonical site description here.
    #[arg(long)]
    pub save: Option<PathBuf>,
    /// Include an indented outline of the program.
    #[arg(long)]
    pub outline: bool,
}

#[derive(Debug, clap::Args)]
pub struct SpecializeArgs {
    #[arg(long)]
    pub site: PathBuf,
    /// Variables to set true, as attribute=value.
    #[arg(long = "assign", value_name = "K=V")]
    pub assign: Vec<String>,
    /// Out-of-turn terms looked up in the site's lexicon.
    #[arg(long = "terms", value_name = "TERM")]
    pub terms: Vec<String>,
    #[arg(long)]
    pub outline: bool,
}

#[derive(Debug, clap::Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub site: PathBuf,
    #[arg(long)]
    pub activities: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
pub struct DeriveArgs {
    #[arg(long)]
    pub site: PathBuf,
    #[arg(long)]
    pub theory: PathBuf,
    #[arg(long)]
    pub traces: PathBuf,
    #[arg(long, default_value_t = DeriveOptions::default().max_frontier)]
    pub max_frontier: usize,
    #[arg(long, env = "PERSONABLE_TOP_K", default_value_t = DeriveOptions::default().top_k)]
    pub top_k: usize,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn read_site(path: &Path) -> Result<Site> {
    load_site(&read(path)?).with_context(|| format!("loading {}", path.display()))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)?)
}

/// Runs one command; returns what should be printed.
pub fn run(cli: Cli) -> Result<Option<String>> {
    match cli.command {
        Command::Serve(args) => serve(args).map(|()| None),
        Command::Ingest(args) => ingest(&args).map(Some),
        Command::Specialize(args) => specialize(&args).map(Some),
        Command::Analyze(args) => analyze(&args).map(Some),
        Command::DeriveTemplates(args) => derive(&args).map(Some),
    }
}

pub fn serve(args: ServeArgs) -> Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let manager = SessionManager::open(args.config())?;
    for path in &args.sites {
        match manager.add_site(NewSite {
            id: None,
            description: read(path)?,
            theory: None,
            activities: None,
        }) {
            Ok(s) => tracing::info!("hosting site {}", s.id),
            Err(ServiceError::SiteExists(id)) => tracing::info!("site {id} already stored"),
            Err(e) => return Err(e).with_context(|| format!("hosting {}", path.display())),
        }
    }
    let addr = SocketAddr::new(args.bind, args.port);
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(personable_service::http::serve(Arc::new(manager), addr))?;
    Ok(())
}

#[derive(Debug, Serialize)]
pub struct IngestReport {
    pub name: Option<String>,
    pub attributes: Vec<String>,
    pub pages: usize,
    pub leaves: usize,
    pub depth: usize,
    pub violations: Vec<Violation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outline: Option<String>,
}

pub fn ingest(args: &IngestArgs) -> Result<String> {
    let site = match (&args.synthetic, &args.file) {
        (Some(shape), _) => {
            let [depth, fanout, seed] = shape[..] else {
                bail!("--synthetic takes DEPTH,FANOUT,SEED");
            };
            let program = generate_synthetic(u32::try_from(depth)?, u32::try_from(fanout)?, seed)?;
            Site {
                name: Some(format!("synthetic-{depth}-{fanout}-{seed}")),
                program,
                lexicon: Lexicon::default(),
                rules: RuleSet::empty(),
                content: BTreeMap::new(),
                report: Vec::new(),
            }
        }
        (None, Some(path)) => {
            let mut file = parse_site_file(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
            if let Some(order) = &args.order {
                let Some(catalog) = file.catalog.as_mut() else {
                    bail!("--order needs a catalog site");
                };
                catalog.order = order.clone();
            }
            site_from_file(&file).with_context(|| format!("loading {}", path.display()))?
        }
        (None, None) => bail!("give a site file or --synthetic"),
    };
    if let Some(out) = &args.save {
        std::fs::write(out, save_site(&site)).with_context(|| format!("writing {}", out.display()))?;
    }
    let mut pages = std::collections::BTreeSet::new();
    site.program.root.collect_pages(&mut pages);
    json(&IngestReport {
        name: site.name.clone(),
        attributes: site.schema().attributes().map(|a| a.name.clone()).collect(),
        pages: pages.len(),
        leaves: site.program.root.leaf_count(),
        depth: site.program.depth(),
        violations: site.report.clone(),
        outline: args.outline.then(|| site.program.outline()),
    })
}

#[derive(Debug, Serialize)]
pub struct SpecializeReport {
    pub kind: SpecializationKind,
    pub assignment: Assignment,
    pub unrecognized: Vec<String>,
    pub root: Option<PageId>,
    pub leaves: Vec<PageId>,
    pub eliminated: Vec<PageId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outline: Option<String>,
}

pub fn specialize(args: &SpecializeArgs) -> Result<String> {
    let site = read_site(&args.site)?;
    let vars = args
        .assign
        .iter()
        .map(|s| s.parse::<Variable>().map_err(|e| anyhow::anyhow!("--assign {s}: {e}")))
        .collect::<Result<Vec<_>>>()?;
    let clicked = Assignment::closed_from_trues(site.schema(), &vars)?;
    let mut unrecognized = Vec::new();
    let mut assignment = clicked.clone();
    if !args.terms.is_empty() {
        let mapping = Mapper::new(site.schema(), &site.lexicon, &site.rules).map_with_prior(&clicked, &args.terms)?;
        unrecognized = mapping.unrecognized;
        assignment = clicked
            .union(&mapping.assignment)
            .expect("mapping is checked against the prior assignment");
    }
    let result = partial_evaluate(&site.program, &assignment)?;
    json(&SpecializeReport {
        kind: result.kind(),
        root: result.program().map(|p| p.root.page().clone()),
        leaves: result.leaves(),
        eliminated: result.eliminated.iter().cloned().collect(),
        outline: args.outline.then(|| result.program().map(|p| p.outline())).flatten(),
        assignment,
        unrecognized,
    })
}

pub fn analyze(args: &AnalyzeArgs) -> Result<String> {
    let site = read_site(&args.site)?;
    let activities = match &args.activities {
        Some(p) => parse_activities(&read(p)?).with_context(|| format!("loading {}", p.display()))?,
        None => Vec::new(),
    };
    let report = audience(&site.program, &activities)?;
    json(&serde_json::json!({
        "frozen": detect_frozen(&site.program),
        "violations": site.report,
        "audience": report,
    }))
}

#[derive(Debug, Serialize)]
pub struct TemplateLine {
    pub name: String,
    pub scope: Scope,
    pub baked: Vec<Variable>,
    pub slots: BTreeMap<String, String>,
    pub free: Vec<String>,
    pub entry_kind: SpecializationKind,
}

#[derive(Debug, Serialize)]
pub struct DeriveReport {
    pub traces: usize,
    pub table: Vec<TemplateScore>,
    pub templates: Vec<TemplateLine>,
    pub rejected: Vec<Rejection>,
}

pub fn derive(args: &DeriveArgs) -> Result<String> {
    let site = read_site(&args.site)?;
    let theory = DomainTheory::parse(&read(&args.theory)?).with_context(|| format!("loading {}", args.theory.display()))?;
    let traces = parse_traces(&read(&args.traces)?).with_context(|| format!("loading {}", args.traces.display()))?;
    let slots = theory.slots();
    for t in &traces {
        check_trace(t, site.schema(), &slots)?;
    }
    let d = derive_templates(
        &theory,
        &site.program,
        &traces,
        DeriveOptions {
            max_frontier: args.max_frontier,
            top_k: args.top_k,
        },
    );
    json(&DeriveReport {
        traces: traces.len(),
        table: d.table,
        templates: d
            .templates
            .iter()
            .map(|t| TemplateLine {
                name: t.name.clone(),
                scope: t.scope.clone(),
                baked: t.baked.trues().cloned().collect(),
                slots: t.slots.clone(),
                free: t.free.iter().map(ToString::to_string).collect(),
                entry_kind: t.entry_kind,
            })
            .collect(),
        rejected: d.rejected,
    })
}
