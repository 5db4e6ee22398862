use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use eduverba_core::dataset::{
    build_example, export_corpus, import_published, read_jsonl, split, stats, truncate_training, write_jsonl, ColumnMapping, DatasetError, ExampleRules, Manifest,
    StatsConfig,
};
use eduverba_core::generate::mock::{FaultRates, SyntheticBackend};
use eduverba_core::generate::{generate_batch, parse_clues, ChatBackend, GenerationRequest, HttpChatBackend};
use eduverba_core::grid::{assemble, render, AssembleConfig, RenderFormat, View};
use eduverba_core::ingest::{fetch_pages, FixtureSource, IngestError, LiveSource, PageSource};
use eduverba_core::metrics::{adherence_report, evaluate_corpus};
use eduverba_core::pipeline::{run_pipeline, PipelineConfig, SourceConfig, CORPUS_FILE};
use eduverba_core::rating::RatingFilter;
use eduverba_core::screen::{screen_page, RejectReason};
use eduverba_core::{ClueInstructExample, ClueSet, ClueStatus, PageRecord, RatingStore, ScreenConfig};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::io_error;
use crate::mock_llm::{self, MockConfig};
use crate::serve::{self, AppState};
use crate::{Cli, CliError, Command, MockArgs, RatingsCommand, ScreenArgs};

fn load_config(path: Option<&Path>) -> Result<PipelineConfig, CliError> {
    let mut cfg = match path {
        Some(p) => PipelineConfig::from_toml_file(p)?,
        None => PipelineConfig::default(),
    };
    cfg.ingest.apply_env();
    Ok(cfg)
}

fn workers() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn write_text(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
            }
            fs::write(p, text).map_err(|e| io_error(p, e))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serializes")
}

fn backend(mock: &MockArgs, cfg: &PipelineConfig) -> Box<dyn ChatBackend + Send> {
    match mock.mock_seed {
        Some(seed) => Box::new(SyntheticBackend::new(seed, mock.malformed_rate, mock.leak_rate)),
        None => Box::new(HttpChatBackend::from_env(&cfg.generation)),
    }
}

fn source(cfg: &PipelineConfig, fixtures: Option<PathBuf>) -> Box<dyn PageSource> {
    let fixtures = fixtures.or(match &cfg.source {
        SourceConfig::Fixtures { path } => Some(path.clone()),
        SourceConfig::Live => None,
    });
    match fixtures {
        Some(dir) => Box::new(FixtureSource::new(dir)),
        None => Box::new(LiveSource::from_config(&cfg.ingest)),
    }
}

fn apply_screen_flags(cfg: &mut ScreenConfig, a: &ScreenArgs) {
    if let Some(v) = a.min_views {
        cfg.min_views = v;
    }
    if let Some(v) = a.min_context_words {
        cfg.min_context_words = v;
    }
    if let Some(v) = a.max_context_words {
        cfg.max_context_words = v;
    }
    if let Some(v) = a.max_keyword_words {
        cfg.max_keyword_words = v;
    }
    if let Some(v) = a.min_keyword_chars {
        cfg.min_keyword_chars = v;
    }
    if let Some(v) = a.max_keyword_chars {
        cfg.max_keyword_chars = v;
    }
}

/// A rejected page and why.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Rejection {
    pub title: String,
    pub category: String,
    pub reasons: Vec<RejectReason>,
}

/// One page with its generation result.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratedPage {
    pub page: PageRecord,
    pub clues: ClueSet,
}

fn ingest(cfg: &PipelineConfig, categories: Vec<String>, limit: Option<usize>, fixtures: Option<PathBuf>, out: &Path) -> Result<(), CliError> {
    let categories = if categories.is_empty() { cfg.categories.clone() } else { categories };
    if categories.is_empty() {
        return Err(CliError::Config("no categories configured".into()));
    }
    let src = source(cfg, fixtures);
    let limit = limit.unwrap_or(cfg.pages_per_category);
    let mut seen = HashSet::new();
    let mut pages = Vec::new();
    for cat in &categories {
        let titles: Vec<String> = src.list_category_pages(cat, limit)?.into_iter().filter(|t| seen.insert(t.clone())).collect();
        for (title, res) in titles.iter().zip(fetch_pages(src.as_ref(), &titles, cfg.ingest.concurrency.max(1))) {
            match res {
                Ok(mut page) => {
                    page.category = cat.clone();
                    pages.push(page);
                }
                Err(e @ (IngestError::PageNotFound(_) | IngestError::EmptyLead(_))) => log::warn!("{title}: {e}"),
                Err(e) => return Err(e.into()),
            }
        }
    }
    write_jsonl(out, &pages)?;
    eprintln!("fetched {} pages from {} categories", pages.len(), categories.len());
    Ok(())
}

fn screen(cfg: &PipelineConfig, input: &Path, out: &Path, report: Option<&Path>, flags: &ScreenArgs) -> Result<(), CliError> {
    let mut rules = cfg.screen.clone();
    apply_screen_flags(&mut rules, flags);
    rules.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let pages: Vec<PageRecord> = read_jsonl(input)?;
    let mut kept = Vec::new();
    let mut rejected = Vec::new();
    for mut page in pages {
        let d = screen_page(&page, &rules);
        match d.kept_keyword {
            Some(k) if d.accepted => {
                page.keywords = vec![k];
                kept.push(page);
            }
            _ => rejected.push(Rejection {
                title: page.title,
                category: page.category,
                reasons: d.reasons,
            }),
        }
    }
    write_jsonl(out, &kept)?;
    if let Some(r) = report {
        write_jsonl(r, &rejected)?;
    }
    eprintln!("accepted {}, rejected {}", kept.len(), rejected.len());
    Ok(())
}

fn generate(cfg: &PipelineConfig, input: &Path, out: &Path, mock: &MockArgs) -> Result<(), CliError> {
    let pages: Vec<PageRecord> = read_jsonl(input)?;
    let tpl = cfg.template()?;
    let mut requests = Vec::with_capacity(pages.len());
    for p in &pages {
        let keyword = p
            .keywords
            .first()
            .ok_or_else(|| CliError::Validation(format!("{}: no keyword; screen the pages first", p.title)))?;
        requests.push(GenerationRequest {
            prompt: tpl.render(&p.lead_text, keyword, &p.category)?,
            keyword: keyword.clone(),
        });
    }
    let model = backend(mock, cfg);
    let mut rows = Vec::with_capacity(pages.len());
    let mut counts: HashMap<ClueStatus, usize> = HashMap::new();
    for (page, res) in pages.into_iter().zip(generate_batch(&requests, &model, &cfg.generation)) {
        let clues = res?;
        *counts.entry(clues.status).or_insert(0) += 1;
        rows.push(GeneratedPage { page, clues });
    }
    write_jsonl(out, &rows)?;
    eprintln!("generated {} pages: {counts:?}", rows.len());
    Ok(())
}

fn build(cfg: &PipelineConfig, input: &Path, out: &Path) -> Result<(), CliError> {
    let generated: Vec<GeneratedPage> = read_jsonl(input)?;
    let rules = ExampleRules {
        screen: cfg.screen.clone(),
        categories: cfg.categories.clone(),
    };
    let mut rows = Vec::new();
    let mut ids = HashSet::new();
    let (mut not_valid, mut invalid) = (0, 0);
    for g in &generated {
        if g.clues.status != ClueStatus::Valid {
            not_valid += 1;
            continue;
        }
        match build_example(&g.page, &screen_page(&g.page, &cfg.screen), &g.clues, &rules) {
            Ok(ex) if ids.insert(ex.id.clone()) => rows.push(ex),
            Ok(ex) => log::warn!("duplicate row {} from {}", ex.id, g.page.title),
            Err(DatasetError::InvariantViolation(m)) => {
                log::warn!("{}: {m}", g.page.title);
                invalid += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_jsonl(out, &rows)?;
    let manifest = Manifest::new(cfg.seed, cfg)
        .count("generations", generated.len())
        .count("not_valid", not_valid)
        .count("invalid_rows", invalid)
        .count("rows_written", rows.len());
    write_text(Some(&out.with_extension("manifest.json")), &to_json(&manifest))?;
    eprintln!("wrote {} rows ({not_valid} generations not valid, {invalid} rows refused)", rows.len());
    Ok(())
}

#[derive(Debug, Deserialize)]
struct HypothesisRow {
    id: String,
    #[serde(default)]
    clues: Option<Vec<String>>,
    /// Raw model output, parsed like a generation reply.
    #[serde(default)]
    output: Option<String>,
}

fn evaluate(hyp: &Path, reference: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let hyps: Vec<HypothesisRow> = read_jsonl(hyp)?;
    let refs: Vec<ClueInstructExample> = read_jsonl(reference)?;
    let by_id: HashMap<&str, &HypothesisRow> = hyps.iter().map(|h| (h.id.as_str(), h)).collect();
    let mut missing = 0;
    let pairs: Vec<(String, Vec<String>, Vec<String>)> = refs
        .iter()
        .map(|r| {
            let clues = match by_id.get(r.id.as_str()) {
                Some(HypothesisRow { clues: Some(c), .. }) => c.clone(),
                Some(HypothesisRow { output: Some(raw), .. }) => parse_clues(raw).unwrap_or_default(),
                Some(_) => Vec::new(),
                None => {
                    missing += 1;
                    Vec::new()
                }
            };
            (r.id.clone(), clues, r.clues.clone())
        })
        .collect();
    let report = evaluate_corpus(&pairs, missing, workers());
    eprintln!("ROUGE-1/2/L {} over {} examples ({missing} missing)", report.aggregate.display(), report.n_examples);
    write_text(out, &to_json(&report))
}

fn parse_buckets(spec: &str) -> Result<usize, CliError> {
    spec.strip_prefix("buckets=")
        .unwrap_or(spec)
        .parse::<usize>()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("bad histogram spec {spec:?}, expected buckets=N")))
}

fn adherence(data: &Path, histogram: &str, out: Option<&Path>) -> Result<(), CliError> {
    let buckets = parse_buckets(histogram)?;
    let corpus: Vec<ClueInstructExample> = read_jsonl(data)?;
    let (report, skipped) = adherence_report::<f64, _>(&corpus, buckets, workers());
    if !skipped.is_empty() {
        log::warn!("{} examples have no sentences and were skipped", skipped.len());
    }
    eprintln!("mean best-sentence ROUGE-L {:.4} over {} clues", report.mean, report.per_clue.len());
    write_text(out, &to_json(&report))
}

/// Reads `(keyword, clue)` pairs from corpus rows or `{keyword, clue}` rows.
fn curated_entries(path: &Path) -> Result<Vec<(String, String)>, CliError> {
    let rows: Vec<Value> = read_jsonl(path)?;
    rows.iter()
        .enumerate()
        .map(|(i, v)| {
            let keyword = v["keyword"].as_str();
            let clue = v["clue"].as_str().or_else(|| v["clues"][0].as_str());
            match (keyword, clue) {
                (Some(k), Some(c)) => Ok((k.to_string(), c.to_string())),
                _ => Err(CliError::Validation(format!("{}:{}: needs keyword and clue", path.display(), i + 1))),
            }
        })
        .collect()
}

#[allow(clippy::too_many_arguments)]
fn assemble_cmd(
    input: &Path,
    rows: usize,
    cols: usize,
    seed: u64,
    format: &str,
    blank: bool,
    relaxed: bool,
    time_budget_ms: Option<u64>,
    out: Option<&Path>,
    layout_out: Option<&Path>,
) -> Result<(), CliError> {
    let format: RenderFormat = format.parse().map_err(|e: eduverba_core::grid::GridError| CliError::Config(e.to_string()))?;
    let entries = curated_entries(input)?;
    let cfg = AssembleConfig {
        max_rows: rows,
        max_cols: cols,
        seed,
        time_budget: time_budget_ms.map(Duration::from_millis),
        strict_adjacency: !relaxed,
        ..AssembleConfig::default()
    };
    let layout = assemble(&entries, &cfg)?;
    for u in &layout.unplaced {
        eprintln!("not placed: {} ({})", u.keyword, u.reason);
    }
    if let Some(p) = layout_out {
        write_text(Some(p), &layout.to_json())?;
    }
    let view = if blank { View::Blank } else { View::Solution };
    write_text(out, &render(&layout, format, view))
}

fn ratings(cmd: RatingsCommand) -> Result<(), CliError> {
    match cmd {
        RatingsCommand::Export { ledger, out } => {
            let store = RatingStore::open(&ledger, None)?;
            let mut buf = Vec::new();
            store.export_csv(&mut buf).map_err(|e| CliError::Config(e.to_string()))?;
            match out {
                Some(p) => write_text(Some(&p), &String::from_utf8_lossy(&buf)),
                None => std::io::stdout().write_all(&buf).map_err(|e| CliError::Config(e.to_string())),
            }
        }
        RatingsCommand::Summary { ledger, annotator, model } => {
            let store = RatingStore::open(&ledger, None)?;
            let filter = RatingFilter { annotator, model };
            let summary = store.summary(&filter);
            println!("{}", to_json(&summary));
            for a in store.agreement() {
                eprintln!("{} / {}: {} of {} shared clues agree", a.annotators.0, a.annotators.1, a.agreed, a.shared);
            }
            Ok(())
        }
    }
}

fn runtime() -> Result<tokio::runtime::Runtime, CliError> {
    tokio::runtime::Runtime::new().map_err(|e| CliError::Config(format!("cannot start runtime: {e}")))
}

fn addr(host: &str, port: u16) -> Result<SocketAddr, CliError> {
    format!("{host}:{port}").parse().map_err(|e| CliError::Config(format!("bad address {host}:{port}: {e}")))
}

async fn ctrl_c() {
    if tokio::signal::ctrl_c().await.is_err() {
        std::future::pending::<()>().await;
    }
}

fn serve_cmd(host: &str, port: u16, corpus: &Path, ledger: &Path, assets: Option<PathBuf>) -> Result<(), CliError> {
    let state = Arc::new(AppState::load(corpus, ledger, AssembleConfig::default())?);
    let addr = addr(host, port)?;
    runtime()?.block_on(async move {
        let listener = serve::bind(addr).await?;
        eprintln!("serving on http://{}", listener.local_addr()?);
        serve::serve(listener, state, assets, ctrl_c()).await
    })?;
    Ok(())
}

fn mock_llm_cmd(host: &str, port: u16, cfg: MockConfig) -> Result<(), CliError> {
    let addr = addr(host, port)?;
    runtime()?.block_on(async move {
        let listener = serve::bind(addr).await?;
        eprintln!("mock model on http://{}{}", listener.local_addr()?, mock_llm::COMPLETIONS_PATH);
        axum::serve(listener, mock_llm::router(cfg)).with_graceful_shutdown(ctrl_c()).await?;
        Ok::<_, serve::ServeError>(())
    })?;
    Ok(())
}

fn pipeline(mut cfg: PipelineConfig, fixtures: Option<PathBuf>, output_dir: Option<PathBuf>, mock: &MockArgs) -> Result<(), CliError> {
    if let Some(dir) = fixtures {
        cfg.source = SourceConfig::Fixtures { path: dir };
    }
    if let Some(dir) = output_dir {
        cfg.output_dir = dir;
    }
    let src = source(&cfg, None);
    let model = backend(mock, &cfg);
    let manifest = run_pipeline(&cfg, src.as_ref(), &model)?;
    let corpus: Vec<ClueInstructExample> = read_jsonl(&cfg.output_dir.join(CORPUS_FILE))?;
    if corpus.len() > cfg.test_size {
        let s = split(&corpus, cfg.test_size, cfg.seed)?;
        write_jsonl(&cfg.output_dir.join("train.jsonl"), &s.train)?;
        write_jsonl(&cfg.output_dir.join("test.jsonl"), &s.test)?;
    } else {
        log::warn!("{} rows is not more than test_size {}; split skipped", corpus.len(), cfg.test_size);
    }
    println!("{}", to_json(&manifest));
    Ok(())
}

pub fn dispatch(cli: Cli) -> Result<(), CliError> {
    let cfg = load_config(cli.config.as_deref())?;
    match cli.command {
        Command::Ingest {
            categories,
            limit,
            fixtures,
            out,
        } => ingest(&cfg, categories, limit, fixtures, &out),
        Command::Screen { input, out, report, rules } => screen(&cfg, &input, &out, report.as_deref(), &rules),
        Command::Generate { input, out, mock } => generate(&cfg, &input, &out, &mock),
        Command::Build { input, out } => build(&cfg, &input, &out),
        Command::Stats { data, out } => {
            let corpus: Vec<ClueInstructExample> = read_jsonl(&data)?;
            write_text(out.as_deref(), &to_json(&stats(&corpus, &StatsConfig::default())))
        }
        Command::Split {
            data,
            test_size,
            seed,
            out_dir,
        } => {
            let corpus: Vec<ClueInstructExample> = read_jsonl(&data)?;
            let s = split(&corpus, test_size.unwrap_or(cfg.test_size), seed.unwrap_or(cfg.seed))?;
            write_jsonl(&out_dir.join("train.jsonl"), &s.train)?;
            write_jsonl(&out_dir.join("test.jsonl"), &s.test)?;
            eprintln!("train {} test {}", s.train.len(), s.test.len());
            Ok(())
        }
        Command::Truncate { data, fraction, seed, out } => {
            let train: Vec<ClueInstructExample> = read_jsonl(&data)?;
            let subset = truncate_training(&train, fraction, seed.unwrap_or(cfg.seed))?;
            write_jsonl(&out, &subset)?;
            eprintln!("kept {} of {}", subset.len(), train.len());
            Ok(())
        }
        Command::Export { data, out } => {
            let corpus: Vec<ClueInstructExample> = read_jsonl(&data)?;
            write_jsonl(&out, &export_corpus(&corpus, &cfg.template()?)?)?;
            Ok(())
        }
        Command::Evaluate { hyp, reference, out } => evaluate(&hyp, &reference, out.as_deref()),
        Command::Adherence { data, histogram, out } => adherence(&data, &histogram, out.as_deref()),
        Command::Assemble {
            input,
            rows,
            cols,
            seed,
            format,
            blank,
            relaxed,
            time_budget_ms,
            out,
            layout,
        } => assemble_cmd(&input, rows, cols, seed, &format, blank, relaxed, time_budget_ms, out.as_deref(), layout.as_deref()),
        Command::Ratings { action } => ratings(action),
        Command::Serve {
            host,
            port,
            corpus,
            ledger,
            assets,
        } => serve_cmd(&host, port, &corpus, &ledger, assets),
        Command::Pipeline { fixtures, output_dir, mock } => pipeline(cfg, fixtures, output_dir, &mock),
        Command::Import {
            input,
            out,
            id_column,
            context_column,
            keyword_column,
            category_column,
            clues_column,
            url_column,
        } => {
            let mapping = ColumnMapping {
                id: id_column,
                context: context_column,
                keyword: keyword_column,
                category: category_column,
                clues: clues_column,
                source_url: url_column,
            };
            let (rows, report) = import_published(&input, &mapping)?;
            for (line, why) in report.skipped.iter().take(20) {
                log::warn!("row {line} skipped: {why}");
            }
            write_jsonl(&out, &rows)?;
            eprintln!("imported {} of {} rows", report.imported, report.rows_read);
            Ok(())
        }
        Command::ShowConfig => {
            println!("{}", cfg.to_toml());
            Ok(())
        }
        Command::MockLlm {
            host,
            port,
            seed,
            malformed_rate,
            leak_rate,
            api_key,
        } => mock_llm_cmd(
            &host,
            port,
            MockConfig {
                seed,
                rates: FaultRates {
                    malformed: malformed_rate,
                    leak: leak_rate,
                },
                api_key,
            },
        ),
    }
}
