use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

pub const CLUE_COUNT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("no clue structure found in response")]
    NoStructure,
    #[error("expected {CLUE_COUNT} clues, found {0}")]
    WrongCount(usize),
}

/// Wire payload: `{"clues": [..]}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CluePayload {
    pub clues: Vec<String>,
}

impl CluePayload {
    /// Canonical serialization used both for model targets and mock replies.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("string vector serializes")
    }
}

/// Pulls the clue array out of a model reply. Surrounding prose and code
/// fences are tolerated; the first JSON object carrying a `clues` array of
/// strings decides the outcome.
pub fn parse_clues(raw: &str) -> Result<Vec<String>, ParseError> {
    for (start, _) in raw.match_indices('{') {
        let mut stream = serde_json::Deserializer::from_str(&raw[start..]).into_iter::<Value>();
        let Some(Ok(Value::Object(obj))) = stream.next() else {
            continue;
        };
        let Some(Value::Array(items)) = obj.get("clues") else {
            continue;
        };
        let Some(clues) = items
            .iter()
            .map(|v| v.as_str().map(|s| s.trim().to_string()))
            .collect::<Option<Vec<String>>>()
        else {
            continue;
        };
        return match clues.len() {
            0 => Err(ParseError::NoStructure),
            CLUE_COUNT => Ok(clues),
            n => Err(ParseError::WrongCount(n)),
        };
    }
    Err(ParseError::NoStructure)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn bare_payload() {
        let raw = r#"{"clues": ["one", "two", "three"]}"#;
        assert_eq!(parse_clues(raw).unwrap(), vec!["one", "two", "three"]);
    }

    #[test]
    fn prose_wrapped() {
        let raw = "Here you go: {\"clues\": [\"May be blocked by phone companies\", \"b\", \"c\"]} Hope it helps!";
        assert_eq!(parse_clues(raw).unwrap()[0], "May be blocked by phone companies");
    }

    #[test]
    fn code_fenced() {
        let raw = "```json\n{\n  \"clues\": [\"a\", \"b\", \"c\"]\n}\n```";
        assert_eq!(parse_clues(raw).unwrap().len(), 3);
    }

    #[test]
    fn single_clue_is_wrong_count() {
        assert_eq!(parse_clues(r#"{"clues": ["only one"]}"#), Err(ParseError::WrongCount(1)));
        assert_eq!(parse_clues(r#"{"clues": ["a","b","c","d"]}"#), Err(ParseError::WrongCount(4)));
    }

    #[test]
    fn no_structure() {
        assert_eq!(parse_clues("I cannot help with that."), Err(ParseError::NoStructure));
        assert_eq!(parse_clues(r#"{"clues": []}"#), Err(ParseError::NoStructure));
        assert_eq!(parse_clues(r#"{"answers": ["a","b","c"]}"#), Err(ParseError::NoStructure));
        assert_eq!(parse_clues(""), Err(ParseError::NoStructure));
    }

    #[test]
    fn first_structured_object_wins() {
        let raw = r#"{"note": 1} then {"clues": ["x"]} then {"clues": ["a","b","c"]}"#;
        assert_eq!(parse_clues(raw), Err(ParseError::WrongCount(1)));
    }

    #[test]
    fn nested_object_inside_prose_braces() {
        let raw = r#"Sure {not json} {"clues": ["a","b","c"]}"#;
        assert_eq!(parse_clues(raw).unwrap(), vec!["a", "b", "c"]);
    }

    proptest! {
        #[test]
        fn payload_round_trips(clues in proptest::collection::vec("[^\"\\\\]{1,30}", 3), pre in "[a-z ]{0,20}", post in "[a-z ]{0,20}") {
            let clues: Vec<String> = clues.into_iter().map(|c| c.trim().to_string()).collect();
            let raw = format!("{pre}{}{post}", CluePayload { clues: clues.clone() }.to_json());
            prop_assert_eq!(parse_clues(&raw).unwrap(), clues);
        }
    }
}
