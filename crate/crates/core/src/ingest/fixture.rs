use std::fs;
use std::path::{Path, PathBuf};

use super::{max_importance, Importance, IngestError, PageMetadata, PageSource};

/// Offline source laid out as `<root>/<category>/<title>.wiki` with a
/// `<title>.meta` sidecar of `key=value` lines.
///
/// Recognised meta keys: `views` (a total, or comma-separated daily counts
/// of which the trailing window is summed), `importance` (one value or a
/// comma list, the maximum wins), `url`, and `categories` (extra category
/// names beyond the containing directory).
#[derive(Debug, Clone)]
pub struct FixtureSource {
    root: PathBuf,
    window_days: usize,
    category_order: Vec<String>,
}

impl FixtureSource {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        FixtureSource {
            root: root.into(),
            window_days: 30,
            category_order: Vec::new(),
        }
    }

    pub fn with_window_days(mut self, days: usize) -> Self {
        self.window_days = days.max(1);
        self
    }

    /// Category names in priority order; a page found under several
    /// directories is assigned the first one listed here.
    pub fn with_category_order(mut self, order: Vec<String>) -> Self {
        self.category_order = order;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn category_dirs(&self) -> Result<Vec<String>, IngestError> {
        let entries = fs::read_dir(&self.root)
            .map_err(|e| IngestError::SourceUnavailable(format!("{}: {e}", self.root.display())))?;
        let mut dirs: Vec<String> = entries
            .filter_map(Result::ok)
            .filter(|e| e.path().is_dir())
            .filter_map(|e| e.file_name().into_string().ok())
            .collect();
        dirs.sort();
        let rank = |d: &String| {
            self.category_order
                .iter()
                .position(|c| c == d)
                .unwrap_or(usize::MAX)
        };
        dirs.sort_by_key(|d| rank(d));
        Ok(dirs)
    }

    /// Directories holding `title`, in category priority order.
    fn locate(&self, title: &str) -> Result<Vec<String>, IngestError> {
        let stem = title_to_stem(title);
        let found: Vec<String> = self
            .category_dirs()?
            .into_iter()
            .filter(|d| self.root.join(d).join(format!("{stem}.wiki")).is_file())
            .collect();
        if found.is_empty() {
            Err(IngestError::PageNotFound(title.to_string()))
        } else {
            Ok(found)
        }
    }
}

/// File stem for a title. `/` cannot appear in a file name.
pub fn title_to_stem(title: &str) -> String {
    title.replace('%', "%25").replace('/', "%2F")
}

fn stem_to_title(stem: &str) -> String {
    stem.replace("%2F", "/").replace("%25", "%")
}

#[derive(Debug, Default, PartialEq)]
struct Meta {
    daily_views: Vec<u64>,
    importance: Importance,
    url: String,
    categories: Vec<String>,
}

fn parse_meta(text: &str) -> Meta {
    let mut meta = Meta::default();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            continue;
        };
        let value = value.trim();
        match key.trim() {
            "views" => {
                meta.daily_views = value
                    .split(',')
                    .filter_map(|v| v.trim().replace('_', "").parse().ok())
                    .collect()
            }
            "importance" => {
                meta.importance = max_importance(value.split(',').filter_map(|v| v.parse().ok()))
            }
            "url" => meta.url = value.to_string(),
            "categories" => {
                meta.categories = value
                    .split(',')
                    .map(str::trim)
                    .filter(|c| !c.is_empty())
                    .map(String::from)
                    .collect()
            }
            _ => {}
        }
    }
    meta
}

impl PageSource for FixtureSource {
    fn list_category_pages(&self, category: &str, limit: usize) -> Result<Vec<String>, IngestError> {
        if !self.root.is_dir() {
            return Err(IngestError::SourceUnavailable(format!("{} is not a directory", self.root.display())));
        }
        let dir = self.root.join(category);
        if category.is_empty() || !dir.is_dir() {
            return Err(IngestError::UnknownCategory(category.to_string()));
        }
        let entries = fs::read_dir(&dir)
            .map_err(|e| IngestError::SourceUnavailable(format!("{}: {e}", dir.display())))?;
        let mut titles: Vec<String> = entries
            .filter_map(Result::ok)
            .filter_map(|e| {
                let name = e.file_name().into_string().ok()?;
                name.strip_suffix(".wiki").map(stem_to_title)
            })
            .collect();
        titles.sort();
        titles.dedup();
        titles.truncate(limit);
        Ok(titles)
    }

    fn raw_page(&self, title: &str) -> Result<String, IngestError> {
        let dirs = self.locate(title)?;
        let path = self.root.join(&dirs[0]).join(format!("{}.wiki", title_to_stem(title)));
        fs::read_to_string(&path)
            .map_err(|e| IngestError::SourceUnavailable(format!("{}: {e}", path.display())))
    }

    fn fetch_metadata(&self, title: &str) -> Result<PageMetadata, IngestError> {
        let dirs = self.locate(title)?;
        let path = self.root.join(&dirs[0]).join(format!("{}.meta", title_to_stem(title)));
        let meta = match fs::read_to_string(&path) {
            Ok(text) => parse_meta(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Meta::default(),
            Err(e) => return Err(IngestError::SourceUnavailable(format!("{}: {e}", path.display()))),
        };
        let window = meta.daily_views.len().saturating_sub(self.window_days);
        let views = meta.daily_views[window..].iter().sum();
        let mut categories = dirs;
        for c in meta.categories {
            if !categories.contains(&c) {
                categories.push(c);
            }
        }
        Ok(PageMetadata {
            views,
            importance: meta.importance,
            categories,
            url: meta.url,
        })
    }
}
