use serde::{Deserialize, Serialize};

use super::{ClueInstructExample, DatasetError};
use crate::generate::CluePayload;
use crate::prompt::PromptTemplate;

/// An instruction-tuning pair: the rendered prompt and the JSON the model
/// is trained to produce.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrainingRecord {
    pub id: String,
    pub input: String,
    pub target: String,
}

pub fn export_instruction_format(ex: &ClueInstructExample, tpl: &PromptTemplate) -> Result<TrainingRecord, DatasetError> {
    Ok(TrainingRecord {
        id: ex.id.clone(),
        input: tpl.render(&ex.context, &ex.keyword, &ex.category)?,
        target: CluePayload {
            clues: ex.clues.clone(),
        }
        .to_json(),
    })
}

pub fn export_corpus(corpus: &[ClueInstructExample], tpl: &PromptTemplate) -> Result<Vec<TrainingRecord>, DatasetError> {
    corpus.iter().map(|ex| export_instruction_format(ex, tpl)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::test_support::example;
    use crate::generate::parse_clues;

    #[test]
    fn target_parses_back_to_clues() {
        let ex = example(3, "Science");
        let rec = export_instruction_format(&ex, &PromptTemplate::default()).unwrap();
        assert_eq!(rec.id, ex.id);
        assert!(rec.input.contains("Category: Science"));
        assert!(rec.input.contains(&ex.context));
        assert_eq!(parse_clues(&rec.target).unwrap(), ex.clues);
    }
}
