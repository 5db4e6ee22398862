//! Adapter for externally published corpora in JSONL, JSON-array or CSV
//! form. Column names are configurable; each field also has a short list of
//! fallback names tried in order.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{example_id, ClueInstructExample, DatasetError};
use crate::generate::CLUE_COUNT;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnMapping {
    pub id: Option<String>,
    pub context: Option<String>,
    pub keyword: Option<String>,
    pub category: Option<String>,
    pub clues: Option<String>,
    pub source_url: Option<String>,
}

const FALLBACK_ID: &[&str] = &["id", "example_id"];
const FALLBACK_CONTEXT: &[&str] = &["context", "text", "content", "passage"];
const FALLBACK_KEYWORD: &[&str] = &["keyword", "answer", "title"];
const FALLBACK_CATEGORY: &[&str] = &["category", "topic", "domain"];
const FALLBACK_CLUES: &[&str] = &["clues", "output", "target", "clue"];
const FALLBACK_URL: &[&str] = &["source_url", "url", "link"];

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImportReport {
    pub rows_read: usize,
    pub imported: usize,
    /// `(1-based row, reason)` for every skipped row.
    pub skipped: Vec<(usize, String)>,
}

fn lookup<'a>(row: &'a HashMap<String, Value>, chosen: &Option<String>, fallbacks: &[&str]) -> Option<&'a Value> {
    match chosen {
        Some(name) => row.get(name),
        None => fallbacks.iter().find_map(|k| row.get(*k)),
    }
}

fn as_text(v: Option<&Value>) -> Option<String> {
    match v? {
        Value::String(s) => Some(s.trim().to_string()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn strip_enumeration(line: &str) -> &str {
    let l = line.trim();
    let l = l.trim_start_matches(['-', '*', '\u{2022}']).trim_start();
    let digits = l.len() - l.trim_start_matches(|c: char| c.is_ascii_digit()).len();
    if digits > 0 {
        if let Some(rest) = l[digits..].strip_prefix(['.', ')', ':']) {
            return rest.trim();
        }
    }
    l
}

/// Accepts a string array, a JSON string holding an array or a
/// `{"clues": [..]}` object, or plain text with one clue per line.
fn clue_list(v: &Value) -> Option<Vec<String>> {
    match v {
        Value::Array(items) => items.iter().map(|i| i.as_str().map(|s| s.trim().to_string())).collect(),
        Value::Object(obj) => obj.get("clues").and_then(clue_list),
        Value::String(s) => {
            let t = s.trim();
            if t.starts_with('[') || t.starts_with('{') {
                if let Ok(inner) = serde_json::from_str::<Value>(t) {
                    return clue_list(&inner);
                }
            }
            Some(t.lines().map(strip_enumeration).filter(|l| !l.is_empty()).map(String::from).collect())
        }
        _ => None,
    }
}

fn read_rows(path: &Path) -> Result<Vec<HashMap<String, Value>>, DatasetError> {
    let io = |source| DatasetError::Io {
        path: path.display().to_string(),
        source,
    };
    let parse = |line: usize, message: String| DatasetError::Parse {
        path: path.display().to_string(),
        line,
        message,
    };
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
    match ext.as_str() {
        "csv" => {
            let mut rdr = csv::Reader::from_path(path).map_err(|e| parse(0, e.to_string()))?;
            let headers = rdr.headers().map_err(|e| parse(1, e.to_string()))?.clone();
            let mut rows = Vec::new();
            for (i, rec) in rdr.records().enumerate() {
                let rec = rec.map_err(|e| parse(i + 2, e.to_string()))?;
                rows.push(headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), Value::String(v.to_string()))).collect());
            }
            Ok(rows)
        }
        "json" => {
            let text = std::fs::read_to_string(path).map_err(io)?;
            serde_json::from_str(&text).map_err(|e| parse(e.line(), e.to_string()))
        }
        _ => super::read_jsonl(path),
    }
}

/// Reads a published corpus. Rows missing a field, or without exactly three
/// clues, are skipped and reported. Rows without an id get a content hash
/// of their URL (or context when there is none) and keyword.
pub fn import_published(path: &Path, mapping: &ColumnMapping) -> Result<(Vec<ClueInstructExample>, ImportReport), DatasetError> {
    let rows = read_rows(path)?;
    let mut report = ImportReport {
        rows_read: rows.len(),
        ..ImportReport::default()
    };
    let mut out = Vec::with_capacity(rows.len());
    let mut seen = HashMap::new();
    for (i, row) in rows.iter().enumerate() {
        let field = |chosen: &Option<String>, fb: &[&str]| as_text(lookup(row, chosen, fb)).filter(|s| !s.is_empty());
        let (Some(context), Some(keyword), Some(category)) = (
            field(&mapping.context, FALLBACK_CONTEXT),
            field(&mapping.keyword, FALLBACK_KEYWORD),
            field(&mapping.category, FALLBACK_CATEGORY),
        ) else {
            report.skipped.push((i + 1, "missing context, keyword or category".into()));
            continue;
        };
        let clues = match lookup(row, &mapping.clues, FALLBACK_CLUES).and_then(clue_list) {
            Some(c) if c.len() == CLUE_COUNT => c,
            Some(c) => {
                report.skipped.push((i + 1, format!("expected {CLUE_COUNT} clues, found {}", c.len())));
                continue;
            }
            None => {
                report.skipped.push((i + 1, "missing clues".into()));
                continue;
            }
        };
        let source_url = field(&mapping.source_url, FALLBACK_URL).unwrap_or_default();
        let mut id = field(&mapping.id, FALLBACK_ID)
            .unwrap_or_else(|| example_id(if source_url.is_empty() { &context } else { &source_url }, &keyword));
        let n = seen.entry(id.clone()).or_insert(0usize);
        *n += 1;
        if *n > 1 {
            id = format!("{id}-{n}");
        }
        out.push(ClueInstructExample {
            id,
            context,
            keyword,
            category,
            clues,
            source_url,
        });
    }
    report.imported = out.len();
    Ok((out, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerations_stripped() {
        assert_eq!(strip_enumeration("1. Big cat"), "Big cat");
        assert_eq!(strip_enumeration("- Big cat"), "Big cat");
        assert_eq!(strip_enumeration("2) Big cat"), "Big cat");
        assert_eq!(strip_enumeration("1984 novel"), "1984 novel");
    }

    #[test]
    fn clue_shapes() {
        let want = vec!["a".to_string(), "b".into(), "c".into()];
        assert_eq!(clue_list(&serde_json::json!(["a", "b", "c"])).unwrap(), want);
        assert_eq!(clue_list(&serde_json::json!("[\"a\",\"b\",\"c\"]")).unwrap(), want);
        assert_eq!(clue_list(&serde_json::json!("{\"clues\":[\"a\",\"b\",\"c\"]}")).unwrap(), want);
        assert_eq!(clue_list(&serde_json::json!("1. a\n2. b\n3. c\n")).unwrap(), want);
        assert!(clue_list(&serde_json::json!(5)).is_none());
    }

    #[test]
    fn jsonl_with_fallback_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pub.jsonl");
        std::fs::write(
            &path,
            concat!(
                "{\"text\":\"Tapirs are mammals.\",\"answer\":\"Tapir\",\"topic\":\"Science\",\"output\":[\"x\",\"y\",\"z\"]}\n",
                "{\"text\":\"Tapirs are mammals.\",\"answer\":\"Tapir\",\"topic\":\"Science\",\"output\":[\"x\",\"y\",\"z\"]}\n",
                "{\"text\":\"Short.\",\"answer\":\"Nope\",\"topic\":\"Games\",\"output\":[\"x\"]}\n",
                "{\"answer\":\"Nope\"}\n",
            ),
        )
        .unwrap();
        let (rows, report) = import_published(&path, &ColumnMapping::default()).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(report.rows_read, 4);
        assert_eq!(report.skipped.len(), 2);
        assert_eq!(report.skipped[0].0, 3);
        assert_eq!(rows[1].id, format!("{}-2", rows[0].id));
    }

    #[test]
    fn csv_with_explicit_mapping() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pub.csv");
        std::fs::write(&path, "ctx,kw,cat,cl,key\n\"Some text, here.\",Nile,Geography,\"1. a\n2. b\n3. c\",k1\n").unwrap();
        let mapping = ColumnMapping {
            id: Some("key".into()),
            context: Some("ctx".into()),
            keyword: Some("kw".into()),
            category: Some("cat".into()),
            clues: Some("cl".into()),
            source_url: None,
        };
        let (rows, _) = import_published(&path, &mapping).unwrap();
        assert_eq!(rows[0].id, "k1");
        assert_eq!(rows[0].context, "Some text, here.");
        assert_eq!(rows[0].clues, ["a", "b", "c"]);
    }

    #[test]
    fn json_array_input() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("pub.json");
        std::fs::write(&path, r#"[{"context":"c","keyword":"k","category":"Music","clues":"[\"a\",\"b\",\"c\"]"}]"#).unwrap();
        let (rows, _) = import_published(&path, &ColumnMapping::default()).unwrap();
        assert_eq!(rows.len(), 1);
    }
}
