//! MediaWiki Action API + page-view REST client.

use std::time::Duration;

use chrono::{Days, Utc};
use serde_json::Value;
use thiserror::Error;
use url::Url;

use super::{max_importance, CategorySpec, Importance, IngestConfig, IngestError, PageMetadata, PageSource, RateLimiter};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransportError {
    #[error("not found")]
    NotFound,
    #[error("http status {0}")]
    Status(u16),
    #[error("network: {0}")]
    Network(String),
}

/// GET-and-decode-JSON. Split out so the API mapping can be exercised
/// against canned responses.
pub trait HttpTransport: Send + Sync {
    fn get_json(&self, url: &str) -> Result<Value, TransportError>;
}

/// Blocking transport with retries, a user agent and per-host politeness.
pub struct UreqTransport {
    agent: ureq::Agent,
    limiter: RateLimiter,
    max_retries: u32,
}

impl UreqTransport {
    pub fn new(cfg: &IngestConfig) -> Self {
        let agent: ureq::Agent = ureq::Agent::config_builder()
            .timeout_global(Some(Duration::from_secs(30)))
            .http_status_as_error(false)
            .user_agent(cfg.user_agent.as_str())
            .build()
            .into();
        UreqTransport {
            agent,
            limiter: RateLimiter::new(Duration::from_millis(cfg.politeness_delay_ms)),
            max_retries: cfg.max_retries.max(1),
        }
    }
}

impl HttpTransport for UreqTransport {
    fn get_json(&self, url: &str) -> Result<Value, TransportError> {
        let mut last = TransportError::Network("no attempt made".into());
        for attempt in 0..self.max_retries {
            if attempt > 0 {
                std::thread::sleep(Duration::from_millis(200 << attempt.min(6)));
            }
            self.limiter.acquire();
            match self.agent.get(url).call() {
                Ok(mut resp) => {
                    let status = resp.status().as_u16();
                    match status {
                        200..=299 => {
                            return resp
                                .body_mut()
                                .read_json::<Value>()
                                .map_err(|e| TransportError::Network(e.to_string()))
                        }
                        404 => return Err(TransportError::NotFound),
                        429 | 500..=599 => last = TransportError::Status(status),
                        _ => return Err(TransportError::Status(status)),
                    }
                }
                Err(e) => last = TransportError::Network(e.to_string()),
            }
        }
        Err(last)
    }
}

/// Live wiki source. Category names are mapped to their configured source
/// query; unknown names fall back to `Category:<name>`.
pub struct LiveSource<T: HttpTransport> {
    transport: T,
    api_base: String,
    rest_base: String,
    window_days: u32,
    categories: Vec<CategorySpec>,
}

impl LiveSource<UreqTransport> {
    pub fn from_config(cfg: &IngestConfig) -> Self {
        LiveSource::with_transport(UreqTransport::new(cfg), cfg)
    }
}

impl<T: HttpTransport> LiveSource<T> {
    pub fn with_transport(transport: T, cfg: &IngestConfig) -> Self {
        LiveSource {
            transport,
            api_base: cfg.api_base.clone(),
            rest_base: cfg.rest_base.trim_end_matches('/').to_string(),
            window_days: cfg.view_window_days.max(1),
            categories: cfg.categories.clone(),
        }
    }

    fn api_url(&self, params: &[(&str, &str)]) -> Result<String, IngestError> {
        let mut all = vec![("format", "json"), ("formatversion", "2")];
        all.extend_from_slice(params);
        Url::parse_with_params(&self.api_base, &all)
            .map(String::from)
            .map_err(|e| IngestError::SourceUnavailable(format!("bad api base: {e}")))
    }

    fn get(&self, url: &str, title: &str) -> Result<Value, IngestError> {
        self.transport.get_json(url).map_err(|e| match e {
            TransportError::NotFound => IngestError::PageNotFound(title.to_string()),
            other => IngestError::SourceUnavailable(other.to_string()),
        })
    }

    fn query_for(&self, category: &str) -> String {
        self.categories
            .iter()
            .find(|c| c.name == category)
            .map(|c| c.query.clone())
            .unwrap_or_else(|| format!("Category:{category}"))
    }

    fn page_views(&self, title: &str) -> Result<u64, IngestError> {
        let end = Utc::now().date_naive() - Days::new(1);
        let start = end - Days::new(u64::from(self.window_days) - 1);
        let mut url = Url::parse(&self.rest_base)
            .map_err(|e| IngestError::SourceUnavailable(format!("bad rest base: {e}")))?;
        url.path_segments_mut()
            .map_err(|_| IngestError::SourceUnavailable("rest base cannot be a base".into()))?
            .extend([
                "metrics",
                "pageviews",
                "per-article",
                "en.wikipedia",
                "all-access",
                "user",
                &title.replace(' ', "_"),
                "daily",
                &format!("{}00", start.format("%Y%m%d")),
                &format!("{}00", end.format("%Y%m%d")),
            ]);
        match self.transport.get_json(url.as_str()) {
            Ok(v) => Ok(v["items"]
                .as_array()
                .map(|items| items.iter().filter_map(|i| i["views"].as_u64()).sum())
                .unwrap_or(0)),
            // no recorded views in the window
            Err(TransportError::NotFound) => Ok(0),
            Err(e) => Err(IngestError::SourceUnavailable(e.to_string())),
        }
    }
}

impl<T: HttpTransport> PageSource for LiveSource<T> {
    fn list_category_pages(&self, category: &str, limit: usize) -> Result<Vec<String>, IngestError> {
        if category.trim().is_empty() {
            return Err(IngestError::UnknownCategory(String::new()));
        }
        let query = self.query_for(category);
        let mut titles: Vec<String> = Vec::new();
        let mut cont: Option<String> = None;
        while titles.len() < limit {
            let batch = (limit - titles.len()).min(500).to_string();
            let mut params = vec![
                ("action", "query"),
                ("list", "categorymembers"),
                ("cmtitle", query.as_str()),
                ("cmnamespace", "0"),
                ("cmtype", "page"),
                ("cmlimit", batch.as_str()),
            ];
            if let Some(c) = cont.as_deref() {
                params.push(("cmcontinue", c));
            }
            let v = self.get(&self.api_url(&params)?, category)?;
            let members = v["query"]["categorymembers"].as_array().cloned().unwrap_or_default();
            if members.is_empty() && titles.is_empty() && cont.is_none() {
                return Err(IngestError::UnknownCategory(category.to_string()));
            }
            for m in members {
                if let Some(t) = m["title"].as_str() {
                    if !titles.iter().any(|x| x == t) {
                        titles.push(t.to_string());
                    }
                }
            }
            match v["continue"]["cmcontinue"].as_str() {
                Some(c) => cont = Some(c.to_string()),
                None => break,
            }
        }
        titles.truncate(limit);
        Ok(titles)
    }

    fn raw_page(&self, title: &str) -> Result<String, IngestError> {
        let url = self.api_url(&[
            ("action", "parse"),
            ("page", title),
            ("prop", "wikitext"),
            ("section", "0"),
            ("redirects", "1"),
        ])?;
        let v = self.get(&url, title)?;
        if let Some(code) = v["error"]["code"].as_str() {
            return Err(match code {
                "missingtitle" | "invalidtitle" => IngestError::PageNotFound(title.to_string()),
                other => IngestError::SourceUnavailable(other.to_string()),
            });
        }
        v["parse"]["wikitext"]
            .as_str()
            .map(String::from)
            .ok_or_else(|| IngestError::SourceUnavailable(format!("no wikitext for {title}")))
    }

    fn fetch_metadata(&self, title: &str) -> Result<PageMetadata, IngestError> {
        let url = self.api_url(&[
            ("action", "query"),
            ("prop", "pageassessments|info|categories"),
            ("inprop", "url"),
            ("clshow", "!hidden"),
            ("cllimit", "max"),
            ("redirects", "1"),
            ("titles", title),
        ])?;
        let v = self.get(&url, title)?;
        let page = v["query"]["pages"]
            .as_array()
            .and_then(|p| p.first())
            .cloned()
            .ok_or_else(|| IngestError::PageNotFound(title.to_string()))?;
        if page["missing"].as_bool().unwrap_or(false) {
            return Err(IngestError::PageNotFound(title.to_string()));
        }
        let importance = max_importance(
            page["pageassessments"]
                .as_object()
                .into_iter()
                .flat_map(|o| o.values())
                .filter_map(|a| a["importance"].as_str())
                .filter_map(|s| s.parse::<Importance>().ok()),
        );
        let categories = page["categories"]
            .as_array()
            .into_iter()
            .flatten()
            .filter_map(|c| c["title"].as_str())
            .map(|t| t.trim_start_matches("Category:").to_string())
            .collect();
        let url = page["fullurl"].as_str().unwrap_or_default().to_string();
        Ok(PageMetadata {
            views: self.page_views(title)?,
            importance,
            categories,
            url,
        })
    }
}
