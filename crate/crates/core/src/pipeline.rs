//! End-to-end build: list, fetch, screen, prompt, generate, assemble rows.
//!
//! Output directory layout:
//!
//! - `corpus.jsonl`: one [`ClueInstructExample`] per accepted page with
//!   valid clues
//! - `progress.jsonl`: one [`PageOutcome`] per finished page; pages listed
//!   here are skipped when the build is run again
//! - `generations.jsonl`: every generation attempt result, for audit
//! - `manifest.json`: the [`BuildManifest`] of the latest run
//!
//! Pages are processed in batches; a batch is fetched and generated
//! concurrently and written in listing order.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{build_example, config_hash, ClueInstructExample, ExampleRules};
use crate::generate::{generate_batch, ChatBackend, ClueSet, ClueStatus, GenParams, GenerateError, GenerationRequest};
use crate::ingest::{fetch_pages, IngestConfig, IngestError, PageRecord, PageSource, DEFAULT_CATEGORIES};
use crate::prompt::PromptTemplate;
use crate::screen::{screen_page, RejectReason, ScreenConfig};

pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const PROGRESS_FILE: &str = "progress.jsonl";
pub const GENERATIONS_FILE: &str = "generations.jsonl";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceConfig {
    Live,
    Fixtures { path: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineConfig {
    pub source: SourceConfig,
    /// Category names in priority order; a page listed under several takes
    /// the first.
    pub categories: Vec<String>,
    pub pages_per_category: usize,
    pub screen: ScreenConfig,
    /// Template file; the built-in template when absent.
    pub prompt_template: Option<PathBuf>,
    pub generation: GenParams,
    /// Connection settings for the live source.
    pub ingest: IngestConfig,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub test_size: usize,
    /// Pages per fetch and generate batch.
    pub batch_size: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            source: SourceConfig::Live,
            categories: DEFAULT_CATEGORIES.iter().map(|s| s.to_string()).collect(),
            pages_per_category: 500,
            screen: ScreenConfig::default(),
            prompt_template: None,
            generation: GenParams::default(),
            ingest: IngestConfig::default(),
            output_dir: PathBuf::from("build"),
            seed: 0,
            test_size: 600,
            batch_size: 32,
        }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no categories configured")]
    EmptyConfig,
    #[error("config: {0}")]
    Config(String),
    #[error("{stage} stage failed: {message}")]
    Stage { stage: &'static str, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, PipelineError> {
        toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn from_toml_file(path: &Path) -> Result<Self, PipelineError> {
        let text = fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("pipeline config serializes")
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if self.categories.is_empty() {
            return Err(PipelineError::EmptyConfig);
        }
        if let SourceConfig::Fixtures { path } = &self.source {
            if !path.is_dir() {
                return Err(PipelineError::Config(format!("fixture directory {} does not exist", path.display())));
            }
        }
        if let Some(p) = &self.prompt_template {
            if !p.is_file() {
                return Err(PipelineError::Config(format!("prompt template {} does not exist", p.display())));
            }
        }
        if self.batch_size == 0 {
            return Err(PipelineError::Config("batch_size must be positive".into()));
        }
        self.screen.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        self.generation.validate().map_err(|e| PipelineError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn template(&self) -> Result<PromptTemplate, PipelineError> {
        match &self.prompt_template {
            Some(p) => PromptTemplate::from_file(p, crate::generate::CLUE_COUNT).map_err(|e| PipelineError::Config(e.to_string())),
            None => Ok(PromptTemplate::default()),
        }
    }
}

/// What happened to one listed page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Outcome {
    /// The page exists but yields nothing usable (missing, empty lead).
    Unfetchable { reason: String },
    Rejected { reasons: Vec<RejectReason> },
    Generated { status: ClueStatus, row_id: Option<String> },
    /// Row assembly refused the page; should not happen with a consistent
    /// config.
    Invalid { reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageOutcome {
    pub title: String,
    pub category: String,
    #[serde(flatten)]
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCounts {
    pub pages_listed: usize,
    pub pages_fetched: usize,
    pub pages_unfetchable: usize,
    pub accepted: usize,
    pub rejected: usize,
    pub rejected_by_reason: BTreeMap<RejectReason, usize>,
    pub generated: BTreeMap<ClueStatus, usize>,
    pub invalid_rows: usize,
    pub rows_written: usize,
}

impl StageCounts {
    fn add(&mut self, o: &PageOutcome) {
        match &o.outcome {
            Outcome::Unfetchable { .. } => self.pages_unfetchable += 1,
            Outcome::Rejected { reasons } => {
                self.pages_fetched += 1;
                self.rejected += 1;
                for r in reasons {
                    *self.rejected_by_reason.entry(*r).or_insert(0) += 1;
                }
            }
            Outcome::Generated { status, row_id } => {
                self.pages_fetched += 1;
                self.accepted += 1;
                *self.generated.entry(*status).or_insert(0) += 1;
                if row_id.is_some() {
                    self.rows_written += 1;
                }
            }
            Outcome::Invalid { .. } => {
                self.pages_fetched += 1;
                self.accepted += 1;
                self.invalid_rows += 1;
            }
        }
    }

    fn from_outcomes<'a, I: IntoIterator<Item = &'a PageOutcome>>(listed: usize, it: I) -> Self {
        let mut c = StageCounts {
            pages_listed: listed,
            ..StageCounts::default()
        };
        for o in it {
            c.add(o);
        }
        c
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildManifest {
    pub seed: u64,
    pub config_hash: String,
    pub tool_version: String,
    /// Everything recorded in the output directory so far.
    pub totals: StageCounts,
    /// Work done by the latest run only.
    pub last_run: StageCounts,
    /// The latest run found nothing left to do.
    pub no_op: bool,
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Reads JSON lines, ignoring an unparsable final line left by an
/// interrupted write.
pub fn read_jsonl_lenient<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, PipelineError> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(io_err(path)(e)),
    };
    let lines: Vec<String> = BufReader::new(file).lines().collect::<Result<_, _>>().map_err(io_err(path))?;
    let mut out = Vec::with_capacity(lines.len());
    for (i, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(v) => out.push(v),
            Err(_) if i + 1 == lines.len() => log::warn!("{}: ignoring incomplete last line", path.display()),
            Err(e) => {
                return Err(PipelineError::Stage {
                    stage: "resume",
                    message: format!("{}:{}: {e}", path.display(), i + 1),
                })
            }
        }
    }
    Ok(out)
}

/// Cuts a trailing line that lacks its newline, left by an interrupted
/// write, so that later appends start on a fresh line.
fn trim_torn_tail(path: &Path) -> Result<(), PipelineError> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(()),
        Err(e) => return Err(io_err(path)(e)),
    };
    if bytes.last().is_some_and(|&b| b != b'\n') {
        let keep = bytes.iter().rposition(|&b| b == b'\n').map_or(0, |i| i + 1);
        log::warn!("{}: dropping incomplete last line", path.display());
        let file = OpenOptions::new().write(true).open(path).map_err(io_err(path))?;
        file.set_len(keep as u64).map_err(io_err(path))?;
    }
    Ok(())
}

struct Appender {
    path: PathBuf,
    file: File,
}

impl Appender {
    fn open(path: PathBuf) -> Result<Self, PipelineError> {
        let file = OpenOptions::new().create(true).append(true).open(&path).map_err(io_err(&path))?;
        Ok(Appender { path, file })
    }

    fn push<T: Serialize>(&mut self, value: &T) -> Result<(), PipelineError> {
        let mut line = serde_json::to_string(value).expect("record serializes");
        line.push('\n');
        self.file.write_all(line.as_bytes()).map_err(io_err(&self.path))
    }
}

/// Lists every configured category; a title keeps the first category that
/// lists it.
fn list_titles(cfg: &PipelineConfig, source: &dyn PageSource) -> Result<Vec<(String, String)>, PipelineError> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for cat in &cfg.categories {
        let titles = source.list_category_pages(cat, cfg.pages_per_category).map_err(|e| PipelineError::Stage {
            stage: "ingest",
            message: e.to_string(),
        })?;
        for t in titles {
            if seen.insert(t.clone()) {
                out.push((t, cat.clone()));
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct GenerationLog<'a> {
    title: &'a str,
    keyword: &'a str,
    #[serde(flatten)]
    clues: &'a ClueSet,
}

/// Runs the whole build into `cfg.output_dir`, skipping pages finished by
/// an earlier run.
pub fn run_pipeline(cfg: &PipelineConfig, source: &dyn PageSource, backend: &dyn ChatBackend) -> Result<BuildManifest, PipelineError> {
    cfg.validate()?;
    let template = cfg.template()?;
    let out = &cfg.output_dir;
    fs::create_dir_all(out).map_err(io_err(out))?;

    let progress_path = out.join(PROGRESS_FILE);
    for name in [PROGRESS_FILE, CORPUS_FILE, GENERATIONS_FILE] {
        trim_torn_tail(&out.join(name))?;
    }
    let mut outcomes: Vec<PageOutcome> = read_jsonl_lenient(&progress_path)?;
    let done: HashSet<String> = outcomes.iter().map(|o| o.title.clone()).collect();
    let existing_rows: HashSet<String> = read_jsonl_lenient::<ClueInstructExample>(&out.join(CORPUS_FILE))?
        .into_iter()
        .map(|r| r.id)
        .collect();

    let listed = list_titles(cfg, source)?;
    let todo: Vec<&(String, String)> = listed.iter().filter(|(t, _)| !done.contains(t)).collect();
    let category_of: HashMap<&str, &str> = listed.iter().map(|(t, c)| (t.as_str(), c.as_str())).collect();

    let mut progress = Appender::open(progress_path)?;
    let mut corpus = Appender::open(out.join(CORPUS_FILE))?;
    let mut gen_log = Appender::open(out.join(GENERATIONS_FILE))?;
    let rules = ExampleRules {
        screen: cfg.screen.clone(),
        categories: cfg.categories.clone(),
    };
    let mut run_outcomes = Vec::new();

    for batch in todo.chunks(cfg.batch_size) {
        let titles: Vec<String> = batch.iter().map(|(t, _)| t.clone()).collect();
        let fetched = fetch_pages(source, &titles, cfg.ingest.concurrency);

        let mut pages: Vec<Result<PageRecord, String>> = Vec::with_capacity(batch.len());
        for (res, (title, _)) in fetched.into_iter().zip(batch.iter()) {
            match res {
                Ok(mut page) => {
                    page.category = category_of[title.as_str()].to_string();
                    pages.push(Ok(page));
                }
                Err(e @ (IngestError::PageNotFound(_) | IngestError::EmptyLead(_))) => pages.push(Err(e.to_string())),
                Err(e) => {
                    return Err(PipelineError::Stage {
                        stage: "ingest",
                        message: e.to_string(),
                    })
                }
            }
        }

        let decisions: Vec<_> = pages.iter().map(|p| p.as_ref().ok().map(|page| screen_page(page, &cfg.screen))).collect();
        let mut requests = Vec::new();
        let mut request_of = vec![None; pages.len()];
        for (i, (page, d)) in pages.iter().zip(&decisions).enumerate() {
            if let (Ok(page), Some(d)) = (page, d) {
                if d.accepted {
                    let keyword = d.kept_keyword.clone().expect("accepted decision keeps a keyword");
                    let prompt = template.render(&page.lead_text, &keyword, &page.category).map_err(|e| PipelineError::Stage {
                        stage: "prompt",
                        message: format!("{}: {e}", page.title),
                    })?;
                    request_of[i] = Some(requests.len());
                    requests.push(GenerationRequest { prompt, keyword });
                }
            }
        }
        let mut generated = Vec::with_capacity(requests.len());
        for res in generate_batch(&requests, backend, &cfg.generation) {
            match res {
                Ok(set) => generated.push(set),
                Err(e @ (GenerateError::AuthFailure(_) | GenerateError::EndpointUnreachable { .. } | GenerateError::InvalidParams(_))) => {
                    return Err(PipelineError::Stage {
                        stage: "generate",
                        message: e.to_string(),
                    })
                }
            }
        }

        for (i, ((title, category), page)) in batch.iter().zip(&pages).enumerate() {
            let outcome = match (page, &decisions[i]) {
                (Err(reason), _) => Outcome::Unfetchable { reason: reason.clone() },
                (Ok(_), Some(d)) if !d.accepted => Outcome::Rejected { reasons: d.reasons.clone() },
                (Ok(page), Some(d)) => {
                    let req = request_of[i].expect("accepted page has a request");
                    let set = &generated[req];
                    gen_log.push(&GenerationLog {
                        title,
                        keyword: &requests[req].keyword,
                        clues: set,
                    })?;
                    if set.status != ClueStatus::Valid {
                        Outcome::Generated {
                            status: set.status,
                            row_id: None,
                        }
                    } else {
                        match build_example(page, d, set, &rules) {
                            Ok(row) => {
                                if !existing_rows.contains(&row.id) {
                                    corpus.push(&row)?;
                                }
                                Outcome::Generated {
                                    status: set.status,
                                    row_id: Some(row.id),
                                }
                            }
                            Err(e) => Outcome::Invalid { reason: e.to_string() },
                        }
                    }
                }
                (Ok(_), None) => unreachable!("every fetched page is screened"),
            };
            let rec = PageOutcome {
                title: title.clone(),
                category: category.clone(),
                outcome,
            };
            progress.push(&rec)?;
            run_outcomes.push(rec);
        }
    }

    outcomes.extend(run_outcomes.iter().cloned());
    let manifest = BuildManifest {
        seed: cfg.seed,
        config_hash: config_hash(cfg),
        tool_version: crate::VERSION.to_string(),
        totals: StageCounts::from_outcomes(listed.len(), &outcomes),
        last_run: StageCounts::from_outcomes(todo.len(), &run_outcomes),
        no_op: todo.is_empty(),
    };
    let manifest_path = out.join(MANIFEST_FILE);
    fs::write(&manifest_path, serde_json::to_string_pretty(&manifest).expect("manifest serializes")).map_err(io_err(&manifest_path))?;
    Ok(manifest)
}
