use serde::{Deserialize, Serialize};

use super::EnrichmentError;
use crate::model::{TemplateCategory, TemplateHit};
use crate::text;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PatternToken {
    /// Any run of tokens, possibly empty.
    Wildcard,
    Literal(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub id: String,
    pub category: TemplateCategory,
    pub pattern: Vec<PatternToken>,
}

/// Parses a whitespace-separated template where `?` stands for a wildcard.
/// Adjacent wildcards collapse into one.
pub fn compile_pattern(spec: &str) -> Result<Vec<PatternToken>, EnrichmentError> {
    let mut out = Vec::new();
    for raw in spec.split_whitespace() {
        if raw == "?" {
            if out.last() != Some(&PatternToken::Wildcard) {
                out.push(PatternToken::Wildcard);
            }
            continue;
        }
        out.extend(text::tokenize(raw).into_iter().map(PatternToken::Literal));
    }
    if !out.iter().any(|t| matches!(t, PatternToken::Literal(_))) {
        return Err(EnrichmentError::InvalidTemplate(spec.to_string()));
    }
    Ok(out)
}

pub fn compile_template(
    id: impl Into<String>,
    category: TemplateCategory,
    spec: &str,
) -> Result<Template, EnrichmentError> {
    Ok(Template { id: id.into(), category, pattern: compile_pattern(spec)? })
}

/// Glob match over tokens with backtracking to the most recent wildcard.
pub(crate) fn matches_tokens(pattern: &[PatternToken], tokens: &[String]) -> bool {
    let (mut p, mut t) = (0usize, 0usize);
    let mut resume: Option<(usize, usize)> = None;
    while t < tokens.len() {
        match pattern.get(p) {
            Some(PatternToken::Wildcard) => {
                resume = Some((p, t));
                p += 1;
            }
            Some(PatternToken::Literal(lit)) if *lit == tokens[t] => {
                p += 1;
                t += 1;
            }
            _ => match resume {
                Some((sp, st)) => {
                    p = sp + 1;
                    t = st + 1;
                    resume = Some((sp, st + 1));
                }
                None => return false,
            },
        }
    }
    pattern[p..].iter().all(|x| *x == PatternToken::Wildcard)
}

/// True iff the normalized token sequence of `text` is generated by the
/// template.
pub fn match_template(t: &Template, text: &str) -> bool {
    matches_tokens(&t.pattern, &text::tokenize(text))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawTemplate {
    id: String,
    category: TemplateCategory,
    pattern: String,
}

#[derive(Debug, Clone, Default)]
pub struct TemplateDictionary {
    templates: Vec<Template>,
}

impl TemplateDictionary {
    pub fn new(templates: Vec<Template>) -> Self {
        Self { templates }
    }

    /// Reads a JSON list of `{id, category, pattern}`.
    pub fn from_json(json: &str) -> Result<Self, EnrichmentError> {
        let raw: Vec<RawTemplate> =
            serde_json::from_str(json).map_err(|e| EnrichmentError::Templates(e.to_string()))?;
        let mut templates = Vec::with_capacity(raw.len());
        for r in raw {
            if templates.iter().any(|t: &Template| t.id == r.id) {
                return Err(EnrichmentError::Templates(format!("duplicate template id `{}`", r.id)));
            }
            templates.push(compile_template(r.id, r.category, &r.pattern)?);
        }
        Ok(Self { templates })
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }

    pub(crate) fn hits_tokens(&self, tokens: &[String]) -> Vec<TemplateHit> {
        self.templates
            .iter()
            .filter(|t| matches_tokens(&t.pattern, tokens))
            .map(|t| TemplateHit { category: t.category, template_id: t.id.clone() })
            .collect()
    }

    pub fn hits(&self, text: &str) -> Vec<TemplateHit> {
        self.hits_tokens(&text::tokenize(text))
    }
}
