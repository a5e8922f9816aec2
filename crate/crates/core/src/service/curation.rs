use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::enrichment::{TermSet, WeightedTerm};
use crate::model::time::iso;
use crate::model::{BoundingBox, EmotionLabel, EnrichedMessage, Emotion, TemplateCategory, Timestamp};
use crate::text;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TopicOrigin {
    #[default]
    Operator,
    PromotedFromEmerging,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WatchTopic {
    pub id: String,
    pub label: String,
    pub terms: Vec<WeightedTerm>,
    #[serde(with = "iso")]
    pub created_ts: Timestamp,
    pub origin: TopicOrigin,
}

impl WatchTopic {
    pub fn matches(&self, m: &EnrichedMessage) -> bool {
        let tokens: Vec<String> = text::tokenize(&m.base.text);
        TermSet::new(&self.terms).score(&tokens) > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewWatchTopic {
    pub label: String,
    pub terms: Vec<WeightedTerm>,
    #[serde(default)]
    pub origin: TopicOrigin,
}

impl NewWatchTopic {
    pub fn validate(&self) -> Result<(), String> {
        if self.label.trim().is_empty() {
            return Err("label must not be empty".into());
        }
        if self.terms.is_empty() {
            return Err("terms must not be empty".into());
        }
        if self.terms.iter().any(|t| t.term.trim().is_empty() || !(t.weight.is_finite() && t.weight > 0.0)) {
            return Err("every term needs text and a positive weight".into());
        }
        Ok(())
    }
}

/// Fields present in one filter must all match.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductFilter {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<BTreeSet<TemplateCategory>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topics: Option<BTreeSet<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bbox: Option<BoundingBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub emotion: Option<BTreeSet<Emotion>>,
}

impl ProductFilter {
    pub fn is_empty(&self) -> bool {
        self.categories.is_none() && self.topics.is_none() && self.bbox.is_none() && self.emotion.is_none()
    }

    pub fn matches(&self, m: &EnrichedMessage) -> bool {
        let cats = self.categories.as_ref().is_none_or(|c| m.template_hits.iter().any(|h| c.contains(&h.category)));
        let topics = self.topics.as_ref().is_none_or(|t| m.topics.iter().any(|x| t.contains(x)));
        let bbox = self.bbox.as_ref().is_none_or(|b| m.geo().is_some_and(|p| b.contains(p)));
        let EmotionLabel { primary, .. } = m.emotion;
        let emotion = self.emotion.as_ref().is_none_or(|e| e.contains(&primary));
        cats && topics && bbox && emotion
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    #[default]
    Draft,
    Published,
}

/// A curated feed: messages matching any of its filters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Product {
    pub id: String,
    pub name: String,
    pub filters: Vec<ProductFilter>,
    #[serde(default)]
    pub visibility: Visibility,
}

impl Product {
    pub fn matches(&self, m: &EnrichedMessage) -> bool {
        self.filters.iter().any(|f| f.matches(m))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewProduct {
    #[serde(default)]
    pub id: Option<String>,
    pub name: String,
    pub filters: Vec<ProductFilter>,
    #[serde(default)]
    pub visibility: Visibility,
}

impl NewProduct {
    pub fn validate(&self) -> Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("name must not be empty".into());
        }
        if self.filters.is_empty() {
            return Err("a product needs at least one filter".into());
        }
        if self.filters.iter().any(ProductFilter::is_empty) {
            return Err("every filter needs at least one field".into());
        }
        if let Some(id) = &self.id {
            if id.is_empty() || !id.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_') {
                return Err("product id may only contain ASCII letters, digits, `-` and `_`".into());
            }
        }
        Ok(())
    }
}

pub fn fixture_products() -> Vec<Product> {
    serde_json::from_str(crate::fixtures::PRODUCTS_JSON).expect("shipped products are valid")
}
