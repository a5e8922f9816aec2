use std::collections::HashMap;
use std::io::Read;

use super::EnrichmentError;
use crate::model::{Emotion, EmotionLabel};
use crate::text;

/// Term → (emotion, weight) lexicon. A term may carry several emotions.
#[derive(Debug, Clone, Default)]
pub struct EmotionLexicon {
    entries: HashMap<String, Vec<(Emotion, f64)>>,
    max_words: usize,
}

impl EmotionLexicon {
    pub fn insert(&mut self, term: &str, emotion: Emotion, weight: f64) {
        let key = text::token_key(term);
        if key.is_empty() || emotion == Emotion::Neutral {
            return;
        }
        self.max_words = self.max_words.max(key.split(' ').count());
        self.entries.entry(key).or_default().push((emotion, weight));
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Reads `term,emotion,weight` CSV with a header row.
    pub fn from_csv<R: Read>(source: R) -> Result<Self, EnrichmentError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).comment(Some(b'#')).from_reader(source);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| EnrichmentError::Lexicon { line: 1, msg: e.to_string() })?
            .iter()
            .map(str::to_string)
            .collect();
        if header != ["term", "emotion", "weight"] {
            return Err(EnrichmentError::Lexicon { line: 1, msg: format!("bad header {header:?}") });
        }
        let mut lex = EmotionLexicon::default();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| EnrichmentError::Lexicon {
                line: e.position().map_or(0, |p| p.line()),
                msg: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let bad = |msg: String| EnrichmentError::Lexicon { line, msg };
            let emotion: Emotion = rec.get(1).unwrap_or("").parse().map_err(bad)?;
            if emotion == Emotion::Neutral {
                return Err(EnrichmentError::Lexicon { line, msg: "neutral is not a lexicon emotion".into() });
            }
            let weight: f64 = rec
                .get(2)
                .unwrap_or("")
                .parse()
                .ok()
                .filter(|w: &f64| w.is_finite() && *w > 0.0)
                .ok_or_else(|| EnrichmentError::Lexicon { line, msg: "weight must be a positive number".into() })?;
            lex.insert(rec.get(0).unwrap_or(""), emotion, weight);
        }
        Ok(lex)
    }

    pub(crate) fn classify_tokens(&self, tokens: &[String]) -> EmotionLabel {
        let mut sums = [0.0f64; 8];
        for i in 0..tokens.len() {
            for len in 1..=self.max_words.min(tokens.len() - i) {
                let hits = if len == 1 {
                    self.entries.get(&tokens[i])
                } else {
                    self.entries.get(&tokens[i..i + len].join(" "))
                };
                for &(e, w) in hits.into_iter().flatten() {
                    sums[e as usize] += w;
                }
            }
        }
        let total: f64 = sums.iter().sum();
        if total <= 0.0 {
            return EmotionLabel::NEUTRAL;
        }
        // strict `>` keeps the earliest emotion on ties
        let mut best = 0;
        for i in 1..sums.len() {
            if sums[i] > sums[best] {
                best = i;
            }
        }
        EmotionLabel { primary: Emotion::PRIMARIES[best], intensity: sums[best] / total }
    }
}

/// Plutchik primary with the largest summed weight over matched terms;
/// intensity is its share of the total.
pub fn classify_emotion(text: &str, lexicon: &EmotionLexicon) -> EmotionLabel {
    lexicon.classify_tokens(&text::tokenize(text))
}
