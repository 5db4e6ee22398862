//! Page ingestion from a live MediaWiki installation or an offline fixture tree.

mod fixture;
mod live;
pub mod markup;

use std::fmt;
use std::str::FromStr;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use fixture::FixtureSource;
pub use live::{HttpTransport, LiveSource, TransportError, UreqTransport};
pub use markup::{extract_bold_keywords, lead_section, strip_markup};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("source unavailable: {0}")]
    SourceUnavailable(String),
    #[error("unknown category: {0}")]
    UnknownCategory(String),
    #[error("page not found: {0}")]
    PageNotFound(String),
    #[error("page has no extractable lead: {0}")]
    EmptyLead(String),
}

/// Project assessment importance. Variant order is the ranking used when
/// several projects disagree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize, Default)]
pub enum Importance {
    #[default]
    Unknown,
    Low,
    Mid,
    High,
    Top,
}

impl FromStr for Importance {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s.trim().to_ascii_lowercase().as_str() {
            "top" => Ok(Importance::Top),
            "high" => Ok(Importance::High),
            "mid" => Ok(Importance::Mid),
            "low" => Ok(Importance::Low),
            "unknown" | "na" | "" | "???" => Ok(Importance::Unknown),
            _ => Err(()),
        }
    }
}

impl fmt::Display for Importance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Importance::Top => "Top",
            Importance::High => "High",
            Importance::Mid => "Mid",
            Importance::Low => "Low",
            Importance::Unknown => "Unknown",
        };
        f.write_str(s)
    }
}

/// Highest importance among several project assessments.
pub fn max_importance<I: IntoIterator<Item = Importance>>(it: I) -> Importance {
    it.into_iter().max().unwrap_or_default()
}

/// One mined page.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PageRecord {
    pub title: String,
    /// Plain text of the lead section.
    pub lead_text: String,
    /// Bold spans of the lead, in order of appearance.
    pub keywords: Vec<String>,
    /// The single corpus category the page is assigned to.
    pub category: String,
    /// Every category the source reported for the page.
    #[serde(default)]
    pub categories: Vec<String>,
    pub views: u64,
    pub importance: Importance,
    pub url: String,
    pub fetched_at: DateTime<Utc>,
}

impl PageRecord {
    /// Field equality ignoring `fetched_at`.
    pub fn same_content(&self, other: &PageRecord) -> bool {
        let mut a = self.clone();
        a.fetched_at = other.fetched_at;
        &a == other
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PageMetadata {
    pub views: u64,
    pub importance: Importance,
    pub categories: Vec<String>,
    pub url: String,
}

/// Anything that can list category members and serve lead markup plus
/// metadata for a title.
pub trait PageSource: Sync {
    fn list_category_pages(&self, category: &str, limit: usize) -> Result<Vec<String>, IngestError>;

    /// Raw markup of the page. May contain the full article; only the lead
    /// is used.
    fn raw_page(&self, title: &str) -> Result<String, IngestError>;

    fn fetch_metadata(&self, title: &str) -> Result<PageMetadata, IngestError>;

    fn fetch_page(&self, title: &str) -> Result<PageRecord, IngestError> {
        if title.trim().is_empty() {
            return Err(IngestError::PageNotFound(String::new()));
        }
        let raw = self.raw_page(title)?;
        let raw_lead = lead_section(&raw);
        let lead_text = strip_markup(raw_lead);
        if lead_text.is_empty() {
            return Err(IngestError::EmptyLead(title.to_string()));
        }
        let keywords = extract_bold_keywords(raw_lead);
        let meta = self.fetch_metadata(title)?;
        Ok(PageRecord {
            title: title.to_string(),
            lead_text,
            keywords,
            category: meta.categories.first().cloned().unwrap_or_default(),
            categories: meta.categories,
            views: meta.views,
            importance: meta.importance,
            url: meta.url,
            fetched_at: Utc::now(),
        })
    }
}

/// Fetches `titles` with at most `concurrency` requests in flight. Results
/// come back in input order.
pub fn fetch_pages<S: PageSource + ?Sized>(
    source: &S,
    titles: &[String],
    concurrency: usize,
) -> Vec<Result<PageRecord, IngestError>> {
    crate::par::map_ordered(titles, concurrency, |t| source.fetch_page(t))
}

/// A (display name, source query) pair, e.g. `("Geography", "Category:Geography")`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CategorySpec {
    pub name: String,
    pub query: String,
}

impl CategorySpec {
    pub fn new(name: &str) -> Self {
        CategorySpec {
            name: name.to_string(),
            query: format!("Category:{name}"),
        }
    }
}

/// Twenty-category default taxonomy.
pub const DEFAULT_CATEGORIES: [&str; 20] = [
    "Geography",
    "Science",
    "Applied Science",
    "History",
    "Society",
    "Literature",
    "Arts",
    "Music",
    "Film",
    "Sports",
    "Religion",
    "Philosophy",
    "Politics",
    "Economics",
    "Mathematics",
    "Technology",
    "Language",
    "Biography",
    "Games",
    "Education",
];

pub fn default_categories() -> Vec<CategorySpec> {
    DEFAULT_CATEGORIES.iter().map(|c| CategorySpec::new(c)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestConfig {
    pub api_base: String,
    pub rest_base: String,
    pub user_agent: String,
    pub politeness_delay_ms: u64,
    pub view_window_days: u32,
    pub concurrency: usize,
    pub max_retries: u32,
    pub pages_per_category: usize,
    pub categories: Vec<CategorySpec>,
}

impl Default for IngestConfig {
    fn default() -> Self {
        IngestConfig {
            api_base: "https://en.wikipedia.org/w/api.php".into(),
            rest_base: "https://wikimedia.org/api/rest_v1".into(),
            user_agent: format!("eduverba/{} (educational crossword dataset builder)", crate::VERSION),
            politeness_delay_ms: 100,
            view_window_days: 30,
            concurrency: 4,
            max_retries: 3,
            pages_per_category: 500,
            categories: default_categories(),
        }
    }
}

impl IngestConfig {
    /// Applies `EDUVERBA_WIKI_API`, `EDUVERBA_WIKI_REST`,
    /// `EDUVERBA_USER_AGENT` and `EDUVERBA_POLITENESS_MS` when set.
    pub fn apply_env(&mut self) {
        self.apply_env_from(|k| std::env::var(k).ok());
    }

    pub fn apply_env_from<F: Fn(&str) -> Option<String>>(&mut self, get: F) {
        if let Some(v) = get("EDUVERBA_WIKI_API") {
            self.api_base = v;
        }
        if let Some(v) = get("EDUVERBA_WIKI_REST") {
            self.rest_base = v;
        }
        if let Some(v) = get("EDUVERBA_USER_AGENT") {
            self.user_agent = v;
        }
        if let Some(ms) = get("EDUVERBA_POLITENESS_MS").and_then(|v| v.parse().ok()) {
            self.politeness_delay_ms = ms;
        }
    }
}

/// Enforces a minimum spacing between consecutive requests to one host.
#[derive(Debug)]
pub struct RateLimiter {
    delay: Duration,
    next_slot: Mutex<Option<Instant>>,
}

impl RateLimiter {
    pub fn new(delay: Duration) -> Self {
        RateLimiter {
            delay,
            next_slot: Mutex::new(None),
        }
    }

    /// Blocks until the caller may issue its request.
    pub fn acquire(&self) {
        let wait = {
            let mut next = self.next_slot.lock().expect("rate limiter poisoned");
            let now = Instant::now();
            let slot = match *next {
                Some(t) if t > now => t,
                _ => now,
            };
            *next = Some(slot + self.delay);
            slot.saturating_duration_since(now)
        };
        if !wait.is_zero() {
            std::thread::sleep(wait);
        }
    }
}
