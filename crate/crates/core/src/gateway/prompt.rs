use thiserror::Error;

use crate::bank::Problem;

/// System-style instruction sent with every prompt; `{language}` is replaced
/// by the problem's language name.
pub const SYSTEM_INSTRUCTION: &str = "You are a code generator. Reply with {language} code only: \
one complete definition of a function named foo (plus any helper functions it needs), \
with no main function and no explanation.";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("the explanation is empty")]
    EmptyText,
}

/// The two messages sent to a backend.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssembledPrompt {
    pub system: String,
    /// `prefix + " " + student text`, the text the student sees as their
    /// prompt.
    pub user: String,
}

fn language_name(tag: &str) -> String {
    match tag.to_ascii_lowercase().as_str() {
        "c" => "C".to_string(),
        other => other.to_string(),
    }
}

pub fn system_instruction(language_tag: &str) -> String {
    SYSTEM_INSTRUCTION.replace("{language}", &language_name(language_tag))
}

/// Joins the problem's fixed prefix and the student's explanation. The
/// explanation is passed through untouched; it only has to contain
/// something other than whitespace.
pub fn assemble_prompt(p: &Problem, student_text: &str) -> Result<AssembledPrompt, PromptError> {
    if student_text.trim().is_empty() {
        return Err(PromptError::EmptyText);
    }
    let mut user = String::with_capacity(p.prompt_prefix.len() + 1 + student_text.len());
    user.push_str(&p.prompt_prefix);
    user.push(' ');
    user.push_str(student_text);
    Ok(AssembledPrompt {
        system: system_instruction(&p.language_tag),
        user,
    })
}
