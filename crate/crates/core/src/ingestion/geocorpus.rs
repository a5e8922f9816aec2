use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::phrases::{fill, Lang, PhraseBanks};
use super::GroundTruth;
use crate::gazetteer::{ContextConfig, Gazetteer, GazetteerEntry};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("corpus size must not be negative, got {0}")]
    NegativeSize(i64),
    #[error("ambiguity rate must lie in [0, 1), got {0}")]
    InvalidRate(f64),
    #[error("gazetteer has no entry usable for the corpus")]
    EmptyGazetteer,
}

/// How a sentence was built.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceKind {
    /// A place named after a spatial cue.
    Spatial,
    /// No place at all.
    Plain,
    /// An invented place-like name.
    Fake,
    /// A gazetteer alias used as an ordinary word.
    AliasWord,
    /// A canonical gazetteer name used as an ordinary word.
    CanonicalWord,
    /// A real place with one letter substituted.
    Misspelled,
    /// An invented place followed by a real one.
    Mixed,
}

impl SentenceKind {
    pub fn is_bait(self) -> bool {
        !matches!(self, SentenceKind::Spatial | SentenceKind::Plain)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoCorpus {
    pub texts: Vec<String>,
    pub kinds: Vec<SentenceKind>,
    /// `geolabels[i]` is the entry sentence `i` refers to, if any.
    pub truth: GroundTruth,
}

impl GeoCorpus {
    pub fn len(&self) -> usize {
        self.texts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.texts.is_empty()
    }

    pub fn label(&self, i: usize) -> Option<&str> {
        self.truth.geolabels.get(&i).and_then(|l| l.as_deref())
    }
}

/// Share of sentences whose geoparse result equals the label, counting a
/// correct "no place" as a hit.
pub fn geoparse_accuracy(corpus: &GeoCorpus, g: &Gazetteer, ctx: &ContextConfig) -> f64 {
    if corpus.is_empty() {
        return 1.0;
    }
    let hits = (0..corpus.len())
        .filter(|&i| crate::gazetteer::geoparse(&corpus.texts[i], g, ctx).map(|e| e.id.as_str()) == corpus.label(i))
        .count();
    hits as f64 / corpus.len() as f64
}

/// Names that resolve unambiguously back to their own entry.
fn unique_names<'a>(g: &'a Gazetteer, e: &'a GazetteerEntry) -> Vec<&'a str> {
    std::iter::once(&e.canonical_name)
        .chain(&e.aliases)
        .filter(|n| matches!(g.lookup(n).as_slice(), [only] if only.id == e.id))
        .map(String::as_str)
        .collect()
}

/// One substituted letter, avoiding the first letter of each word and any
/// result that is itself a gazetteer name.
fn misspell<R: Rng>(rng: &mut R, g: &Gazetteer, name: &str) -> Option<String> {
    let chars: Vec<char> = name.chars().collect();
    let positions: Vec<usize> = (1..chars.len())
        .filter(|&i| chars[i].is_ascii_lowercase() && chars[i - 1].is_alphabetic())
        .collect();
    for _ in 0..8 {
        let &pos = positions.choose(rng)?;
        let mut out = chars.clone();
        let replacement = (b'a' + rng.gen_range(0..26u8)) as char;
        if replacement == out[pos] {
            continue;
        }
        out[pos] = replacement;
        let s: String = out.into_iter().collect();
        if g.lookup(&s).is_empty() {
            return Some(s);
        }
    }
    None
}

/// Labeled sentences for measuring geoparsing. An `ambiguity_rate` share
/// contains bait; the rest name a place after a spatial cue (85%) or name
/// nothing.
pub fn synthesize_geocorpus(
    g: &Gazetteer,
    phrases: &PhraseBanks,
    n: i64,
    ambiguity_rate: f64,
    seed: u64,
) -> Result<GeoCorpus, CorpusError> {
    if n < 0 {
        return Err(CorpusError::NegativeSize(n));
    }
    if !(0.0..1.0).contains(&ambiguity_rate) {
        return Err(CorpusError::InvalidRate(ambiguity_rate));
    }
    let places: Vec<(&GazetteerEntry, Vec<&str>)> = g
        .entries()
        .iter()
        .map(|e| (e, unique_names(g, e)))
        .filter(|(_, names)| !names.is_empty())
        .collect();
    if places.is_empty() && n > 0 {
        return Err(CorpusError::EmptyGazetteer);
    }
    let gp = &phrases.geocorpus;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus = GeoCorpus { texts: Vec::new(), kinds: Vec::new(), truth: GroundTruth::default() };
    for i in 0..n as usize {
        let lang = Lang::random(&mut rng);
        let (entry, names) = places.choose(&mut rng).expect("non-empty");
        let name = *names.choose(&mut rng).expect("non-empty");
        let fake = gp.fake_names.choose(&mut rng).expect("non-empty").as_str();
        let (kind, text, label) = if rng.gen_bool(ambiguity_rate) {
            match rng.gen_range(0..100) {
                0..=29 => (SentenceKind::Fake, fill(gp.fake.pick(lang, &mut rng), "{fake}", fake), None),
                30..=54 => (SentenceKind::AliasWord, gp.alias_word.pick(lang, &mut rng).to_string(), None),
                55..=79 => {
                    let long: Vec<&str> = names.iter().copied().filter(|n| n.chars().count() >= 5).collect();
                    match long.choose(&mut rng).and_then(|n| misspell(&mut rng, g, n)) {
                        Some(typo) => {
                            (SentenceKind::Misspelled, fill(gp.misspelled.pick(lang, &mut rng), "{typo}", &typo), Some(entry.id.clone()))
                        }
                        None => (SentenceKind::Fake, fill(gp.fake.pick(lang, &mut rng), "{fake}", fake), None),
                    }
                }
                80..=91 => {
                    let t = fill(gp.mixed.pick(lang, &mut rng), "{fake}", fake);
                    (SentenceKind::Mixed, fill(&t, "{place}", name), Some(entry.id.clone()))
                }
                _ => (SentenceKind::CanonicalWord, gp.canonical_word.pick(lang, &mut rng).to_string(), None),
            }
        } else if rng.gen_bool(0.85) {
            (SentenceKind::Spatial, fill(gp.spatial.pick(lang, &mut rng), "{place}", name), Some(entry.id.clone()))
        } else {
            (SentenceKind::Plain, gp.plain.pick(lang, &mut rng).to_string(), None)
        };
        corpus.texts.push(text);
        corpus.kinds.push(kind);
        corpus.truth.geolabels.insert(i, label);
    }
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::GAZETTEER_CSV;
    use crate::gazetteer::load_gazetteer;
    use crate::text::token_key;

    fn setup() -> (Gazetteer, PhraseBanks) {
        (load_gazetteer(GAZETTEER_CSV.as_bytes()).unwrap(), PhraseBanks::embedded())
    }

    fn levenshtein(a: &str, b: &str) -> usize {
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let mut prev: Vec<usize> = (0..=b.len()).collect();
        for i in 1..=a.len() {
            let mut cur = vec![i; b.len() + 1];
            for j in 1..=b.len() {
                cur[j] = (prev[j] + 1).min(cur[j - 1] + 1).min(prev[j - 1] + usize::from(a[i - 1] != b[j - 1]));
            }
            prev = cur;
        }
        prev[b.len()]
    }

    #[test]
    fn sizes_and_errors() {
        let (g, p) = setup();
        assert!(synthesize_geocorpus(&g, &p, 0, 0.15, 1).unwrap().is_empty());
        assert_eq!(synthesize_geocorpus(&g, &p, -1, 0.15, 1), Err(CorpusError::NegativeSize(-1)));
        assert_eq!(synthesize_geocorpus(&g, &p, 5, 1.0, 1), Err(CorpusError::InvalidRate(1.0)));
        let c = synthesize_geocorpus(&g, &p, 300, 0.15, 1).unwrap();
        assert_eq!((c.len(), c.kinds.len(), c.truth.geolabels.len()), (300, 300, 300));
        assert_eq!(c, synthesize_geocorpus(&g, &p, 300, 0.15, 1).unwrap());
    }

    #[test]
    fn zero_ambiguity_names_places_verbatim_after_a_cue() {
        let (g, p) = setup();
        let cues = ContextConfig::default().spatial_prepositions;
        let c = synthesize_geocorpus(&g, &p, 400, 0.0, 5).unwrap();
        assert!(c.kinds.iter().all(|k| !k.is_bait()));
        for i in 0..c.len() {
            let Some(id) = c.label(i) else { continue };
            let e = g.get(id).unwrap();
            let text = &c.texts[i];
            let name = std::iter::once(&e.canonical_name).chain(&e.aliases).filter(|n| text.contains(n.as_str())).max_by_key(|n| n.len()).unwrap();
            let before = &text[..text.find(name.as_str()).unwrap()];
            let words: Vec<String> = before.split_whitespace().map(token_key).collect();
            let window = &words[words.len().saturating_sub(3)..];
            assert!(window.iter().any(|w| cues.contains(w)), "{text}");
        }
    }

    #[test]
    fn fake_names_are_far_from_every_gazetteer_name() {
        let (g, p) = setup();
        let keys: Vec<String> = g.entries().iter().flat_map(|e| std::iter::once(&e.canonical_name).chain(&e.aliases)).map(|n| token_key(n)).collect();
        for fake in &p.geocorpus.fake_names {
            let f = token_key(fake);
            for k in &keys {
                assert!(levenshtein(&f, k) > k.chars().count().div_ceil(8), "{fake} ~ {k}");
            }
        }
    }

    #[test]
    fn bait_rate_is_roughly_respected() {
        let (g, p) = setup();
        let c = synthesize_geocorpus(&g, &p, 2000, 0.15, 3).unwrap();
        let bait = c.kinds.iter().filter(|k| k.is_bait()).count() as f64 / 2000.0;
        assert!((bait - 0.15).abs() < 0.03, "{bait}");
    }
}
