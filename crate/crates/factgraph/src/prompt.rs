//! Prompt assembly for batched claim verification and parsing of the
//! tuple-list answers that come back.
//!
//! Prompts are rendered from a versioned template resource (currently
//! `templates/prompt_v1.txt`) whose sections — task, instructions, output
//! format, example claims, example output — precede the numbered claims of
//! the batch. Answers are expected as a Python-style list of
//! `(claim number, True|False, "explanation")` tuples; the parser is
//! strict, reporting byte offsets for syntax errors and refusing duplicate
//! or miscounted answers, because silently guessing would corrupt the
//! downstream accuracy measurement.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::ClaimRecord;

const TEMPLATE_V1: &str = include_str!("../templates/prompt_v1.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PromptError {
    #[error("chunk size must be at least 1")]
    InvalidChunkSize,
    #[error("prompt batch is empty")]
    EmptyBatch,
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("expected {expected} answers, found {found}")]
    AnswerCountMismatch { expected: usize, found: usize },
    #[error("duplicate claim number {0}")]
    DuplicateNumber(usize),
    #[error("claim {0}: verdict is not the bare word True or False")]
    VerdictNotBoolean(usize),
}

/// One parsed answer tuple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LlmAnswer {
    pub number: usize,
    pub verdict: bool,
    pub explanation: String,
}

/// Split claims into consecutive batches of at most `size`, preserving
/// order; the last batch may be smaller.
pub fn chunk_claims(
    claims: &[ClaimRecord],
    size: usize,
) -> Result<Vec<&[ClaimRecord]>, PromptError> {
    if size == 0 {
        return Err(PromptError::InvalidChunkSize);
    }
    Ok(claims.chunks(size).collect())
}

/// Example claims and a sample reply, substituted for the template's
/// built-in example section when supplied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExampleBlock {
    pub claims: Vec<String>,
    pub output: String,
}

/// A versioned prompt template: the fixed sections around the claims.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptTemplate {
    pub version: u32,
    pub task: String,
    pub instructions: Vec<String>,
    pub output_format: String,
    pub example_claims: Vec<String>,
    pub example_output: String,
    /// Line rendered after the example claims ("..." in version 1, marking
    /// the block as a sample).
    pub example_suffix: Option<String>,
}

impl PromptTemplate {
    /// The version 1 template, parsed from the bundled resource.
    pub fn v1() -> Self {
        Self::parse(TEMPLATE_V1, 1).expect("bundled template is well-formed")
    }

    fn parse(text: &str, version: u32) -> Option<Self> {
        let task = section(text, "Task:", "Instructions:")?;
        let instructions = section(text, "Instructions:", "Output Format:")?
            .lines()
            .filter_map(|l| l.strip_prefix("- "))
            .map(str::to_string)
            .collect();
        let output_format = section(text, "Output Format:", "Example Claims:")?;
        let examples_text = section(text, "Example Claims:", "Example output:")?;
        let mut example_claims = Vec::new();
        let mut example_suffix = None;
        for line in examples_text.lines().filter(|l| !l.is_empty()) {
            match line.split_once(". ") {
                Some((n, claim)) if n.parse::<usize>().is_ok() => {
                    example_claims.push(claim.to_string())
                }
                _ => example_suffix = Some(line.to_string()),
            }
        }
        let example_output = section(
            text,
            "Example output:",
            "Here are the actual claims you should answer:",
        )?;
        Some(PromptTemplate {
            version,
            task: task.trim().to_string(),
            instructions,
            output_format: output_format.trim().to_string(),
            example_claims,
            example_output: example_output.trim().to_string(),
            example_suffix,
        })
    }
}

fn section(text: &str, header: &str, next: &str) -> Option<String> {
    let start = text.find(header)? + header.len();
    let end = text[start..].find(next)? + start;
    Some(text[start..end].trim_matches('\n').to_string())
}

/// A fully assembled prompt: template sections plus the numbered claims of
/// one batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptBundle {
    pub task_text: String,
    pub instructions: Vec<String>,
    pub output_format_text: String,
    pub example_claims: Vec<(usize, String)>,
    pub example_suffix: Option<String>,
    pub example_output: String,
    pub claims: Vec<(usize, String)>,
}

impl PromptBundle {
    /// Number the batch 1..=n and combine it with the template, optionally
    /// substituting a custom example block.
    pub fn new(
        template: &PromptTemplate,
        batch: &[ClaimRecord],
        examples: Option<&ExampleBlock>,
    ) -> Result<Self, PromptError> {
        if batch.is_empty() {
            return Err(PromptError::EmptyBatch);
        }
        let number = |texts: &[String]| -> Vec<(usize, String)> {
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| (i + 1, t.clone()))
                .collect()
        };
        let (example_claims, example_output, example_suffix) = match examples {
            Some(block) => (number(&block.claims), block.output.clone(), None),
            None => (
                number(&template.example_claims),
                template.example_output.clone(),
                template.example_suffix.clone(),
            ),
        };
        Ok(PromptBundle {
            task_text: template.task.clone(),
            instructions: template.instructions.clone(),
            output_format_text: template.output_format.clone(),
            example_claims,
            example_suffix,
            example_output,
            claims: batch
                .iter()
                .enumerate()
                .map(|(i, c)| (i + 1, c.claim.clone()))
                .collect(),
        })
    }

    /// Render the sections in order, ending with one numbered claim line
    /// per batch entry.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Task:\n{}\n", self.task_text);
        out.push_str("Instructions:\n");
        for instruction in &self.instructions {
            let _ = writeln!(out, "- {instruction}");
        }
        let _ = writeln!(out, "\nOutput Format:\n{}\n", self.output_format_text);
        out.push_str("Example Claims:\n");
        for (number, claim) in &self.example_claims {
            let _ = writeln!(out, "\n{number}. {claim}");
        }
        if let Some(suffix) = &self.example_suffix {
            let _ = writeln!(out, "{suffix}");
        }
        let _ = writeln!(out, "\nExample output:\n\n{}\n", self.example_output);
        out.push_str("Here are the actual claims you should answer:\n");
        for (number, claim) in &self.claims {
            let _ = writeln!(out, "{number}. {claim}");
        }
        out
    }
}

/// Assemble the version 1 prompt for one batch of claims.
pub fn build_prompt(
    batch: &[ClaimRecord],
    examples: Option<&ExampleBlock>,
) -> Result<String, PromptError> {
    Ok(PromptBundle::new(&PromptTemplate::v1(), batch, examples)?.render())
}

/// Render answers in the reply grammar: a bracketed list of
/// `(number, True|False, "explanation")` tuples, one per line.
pub fn render_answers(answers: &[LlmAnswer]) -> String {
    let mut out = String::from("[\n");
    for answer in answers {
        let verdict = if answer.verdict { "True" } else { "False" };
        let escaped = answer
            .explanation
            .replace('\\', "\\\\")
            .replace('"', "\\\"");
        let _ = writeln!(
            out,
            "    ({}, {}, \"{}\"),",
            answer.number, verdict, escaped
        );
    }
    out.push(']');
    out
}

/// Parse a reply and enforce the expected answer count.
///
/// Grammar: optional whitespace, `[`, zero or more comma-separated tuples
/// with an optional trailing comma, `]`, optional trailing text ignored
/// only if whitespace. Each tuple is `(number, True|False, "explanation")`
/// where the explanation escapes `"` and `\` with a backslash.
pub fn parse_response(text: &str, expected_count: usize) -> Result<Vec<LlmAnswer>, PromptError> {
    let mut parser = Parser {
        bytes: text.as_bytes(),
        pos: 0,
    };
    let answers = parser.parse_list()?;
    let mut seen = std::collections::HashSet::new();
    for answer in &answers {
        if !seen.insert(answer.number) {
            return Err(PromptError::DuplicateNumber(answer.number));
        }
    }
    if answers.len() != expected_count {
        return Err(PromptError::AnswerCountMismatch {
            expected: expected_count,
            found: answers.len(),
        });
    }
    Ok(answers)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> PromptError {
        PromptError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn skip_whitespace(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn expect(&mut self, byte: u8) -> Result<(), PromptError> {
        if self.bytes.get(self.pos) == Some(&byte) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(format!("expected {:?}", byte as char)))
        }
    }

    fn parse_list(&mut self) -> Result<Vec<LlmAnswer>, PromptError> {
        self.skip_whitespace();
        self.expect(b'[')?;
        let mut answers = Vec::new();
        loop {
            self.skip_whitespace();
            match self.bytes.get(self.pos) {
                Some(b']') => {
                    self.pos += 1;
                    break;
                }
                Some(b'(') => {
                    answers.push(self.parse_tuple()?);
                    self.skip_whitespace();
                    match self.bytes.get(self.pos) {
                        Some(b',') => {
                            self.pos += 1;
                        }
                        Some(b']') => {
                            self.pos += 1;
                            break;
                        }
                        _ => return Err(self.error("expected ',' or ']' after tuple")),
                    }
                }
                _ => return Err(self.error("expected '(' or ']'")),
            }
        }
        self.skip_whitespace();
        if self.pos != self.bytes.len() {
            return Err(self.error("unexpected trailing content"));
        }
        Ok(answers)
    }

    fn parse_tuple(&mut self) -> Result<LlmAnswer, PromptError> {
        self.expect(b'(')?;
        self.skip_whitespace();
        let number = self.parse_number()?;
        self.skip_whitespace();
        self.expect(b',')?;
        self.skip_whitespace();
        let verdict = self.parse_verdict(number)?;
        self.skip_whitespace();
        self.expect(b',')?;
        self.skip_whitespace();
        let explanation = self.parse_string()?;
        self.skip_whitespace();
        self.expect(b')')?;
        Ok(LlmAnswer {
            number,
            verdict,
            explanation,
        })
    }

    fn parse_number(&mut self) -> Result<usize, PromptError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.error("expected a claim number"));
        }
        let number: usize = std::str::from_utf8(&self.bytes[start..self.pos])
            .expect("digits are UTF-8")
            .parse()
            .map_err(|_| PromptError::Syntax {
                offset: start,
                message: "claim number out of range".into(),
            })?;
        if number == 0 {
            return Err(PromptError::Syntax {
                offset: start,
                message: "claim numbers start at 1".into(),
            });
        }
        Ok(number)
    }

    fn parse_verdict(&mut self, number: usize) -> Result<bool, PromptError> {
        let start = self.pos;
        while self
            .bytes
            .get(self.pos)
            .is_some_and(|b| b.is_ascii_alphanumeric())
        {
            self.pos += 1;
        }
        match &self.bytes[start..self.pos] {
            b"True" => Ok(true),
            b"False" => Ok(false),
            [] => Err(self.error("expected a verdict")),
            _ => Err(PromptError::VerdictNotBoolean(number)),
        }
    }

    fn parse_string(&mut self) -> Result<String, PromptError> {
        self.expect(b'"')?;
        let mut out = Vec::new();
        loop {
            match self.bytes.get(self.pos) {
                None => return Err(self.error("unterminated string")),
                Some(b'"') => {
                    self.pos += 1;
                    break;
                }
                Some(b'\\') => {
                    self.pos += 1;
                    match self.bytes.get(self.pos) {
                        Some(&c @ (b'"' | b'\\')) => {
                            out.push(c);
                            self.pos += 1;
                        }
                        _ => {
                            return Err(
                                self.error("invalid escape (only \\\" and \\\\ are allowed)")
                            )
                        }
                    }
                }
                Some(&c) => {
                    out.push(c);
                    self.pos += 1;
                }
            }
        }
        String::from_utf8(out).map_err(|_| self.error("string is not valid UTF-8"))
    }
}
