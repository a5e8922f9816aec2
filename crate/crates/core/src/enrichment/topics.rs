use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::{EnrichmentError, TermSet, WeightedTerm};
use crate::text;

fn default_threshold() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicDomain {
    pub id: String,
    pub keywords: Vec<WeightedTerm>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

/// Multi-label keyword classifier over a fixed set of domains.
#[derive(Debug, Clone)]
pub struct Taxonomy {
    domains: Vec<TopicDomain>,
    compiled: Vec<TermSet>,
}

impl Taxonomy {
    pub fn new(domains: Vec<TopicDomain>) -> Result<Self, EnrichmentError> {
        let mut seen = HashSet::new();
        for d in &domains {
            if d.id.is_empty() || !seen.insert(d.id.clone()) {
                return Err(EnrichmentError::Taxonomy(format!("duplicate or empty domain id `{}`", d.id)));
            }
        }
        let compiled = domains.iter().map(|d| TermSet::new(&d.keywords)).collect();
        Ok(Self { domains, compiled })
    }

    pub fn from_json(json: &str) -> Result<Self, EnrichmentError> {
        let domains: Vec<TopicDomain> =
            serde_json::from_str(json).map_err(|e| EnrichmentError::Taxonomy(e.to_string()))?;
        Self::new(domains)
    }

    pub fn domains(&self) -> &[TopicDomain] {
        &self.domains
    }

    pub fn contains(&self, id: &str) -> bool {
        self.domains.iter().any(|d| d.id == id)
    }

    pub fn get(&self, id: &str) -> Option<&TopicDomain> {
        self.domains.iter().find(|d| d.id == id)
    }

    pub(crate) fn classify_tokens(&self, tokens: &[String]) -> BTreeSet<String> {
        self.domains
            .iter()
            .zip(&self.compiled)
            .filter(|(d, terms)| terms.score(tokens) >= d.threshold)
            .map(|(d, _)| d.id.clone())
            .collect()
    }
}

/// Domains whose summed keyword weight (each distinct keyword counted once)
/// reaches the domain threshold.
pub fn classify_topics(text: &str, taxonomy: &Taxonomy) -> BTreeSet<String> {
    taxonomy.classify_tokens(&text::tokenize(text))
}
