//! Text normalization and tokenization shared by the gazetteer matcher and
//! the classifiers.
//!
//! Normalization folds case, strips accents and collapses whitespace runs to
//! a single space. Tokens are maximal runs of alphanumeric characters; an
//! apostrophe between two alphanumerics stays inside the token, so
//! `they're` is one token.

use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

/// Normalized text plus, for every normalized char, the byte range of the
/// original char it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub text: String,
    chars: Vec<char>,
    origin: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub text: String,
    /// Char offsets into the normalized text.
    pub start: usize,
    pub end: usize,
}

fn is_apostrophe(c: char) -> bool {
    matches!(c, '\'' | '\u{2019}' | '\u{02BC}')
}

fn fold_into(c: char, out: &mut Vec<char>) {
    if is_apostrophe(c) {
        out.push('\'');
        return;
    }
    let mut one = [0u8; 4];
    for d in c.encode_utf8(&mut one).nfd() {
        if is_combining_mark(d) {
            continue;
        }
        out.extend(d.to_lowercase());
    }
}

impl Normalized {
    pub fn new(raw: &str) -> Self {
        let mut chars = Vec::with_capacity(raw.len());
        let mut origin = Vec::with_capacity(raw.len());
        let mut pending_space: Option<(usize, usize)> = None;
        let mut folded = Vec::with_capacity(4);
        for (pos, c) in raw.char_indices() {
            let range = (pos, pos + c.len_utf8());
            if c.is_whitespace() {
                if !chars.is_empty() && pending_space.is_none() {
                    pending_space = Some(range);
                }
                continue;
            }
            if let Some(sp) = pending_space.take() {
                chars.push(' ');
                origin.push(sp);
            }
            folded.clear();
            fold_into(c, &mut folded);
            for &f in &folded {
                chars.push(f);
                origin.push(range);
            }
        }
        Self { text: chars.iter().collect(), chars, origin }
    }

    pub fn char_len(&self) -> usize {
        self.chars.len()
    }

    pub fn slice(&self, start: usize, end: usize) -> String {
        self.chars[start..end].iter().collect()
    }

    /// Original text behind the normalized char range `[start, end)`.
    pub fn original<'a>(&self, raw: &'a str, start: usize, end: usize) -> &'a str {
        if start >= end || end > self.origin.len() {
            return "";
        }
        &raw[self.origin[start].0..self.origin[end - 1].1]
    }

    pub fn tokens(&self) -> Vec<Token> {
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        let n = self.chars.len();
        for i in 0..=n {
            let c = self.chars.get(i).copied();
            let inside = match c {
                Some(ch) if ch.is_alphanumeric() => true,
                Some(ch) if ch == '\'' => {
                    start.is_some() && self.chars.get(i + 1).is_some_and(|nx| nx.is_alphanumeric())
                }
                _ => false,
            };
            match (inside, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push(Token { text: self.slice(s, i), start: s, end: i });
                    start = None;
                }
                _ => {}
            }
        }
        out
    }
}

pub fn normalize(raw: &str) -> String {
    Normalized::new(raw).text
}

pub fn tokenize(raw: &str) -> Vec<String> {
    Normalized::new(raw).tokens().into_iter().map(|t| t.text).collect()
}

/// Number of tokens a phrase normalizes to.
pub fn word_count(raw: &str) -> usize {
    Normalized::new(raw).tokens().len()
}

/// Normalized tokens joined with single spaces; the canonical key used for
/// name and keyword comparison.
pub fn token_key(raw: &str) -> String {
    tokenize(raw).join(" ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folds_case_accents_and_whitespace() {
        assert_eq!(normalize("  Città   di\tRoma "), "citta di roma");
        assert_eq!(normalize("PIAZZA  del Popolo"), "piazza del popolo");
        assert_eq!(normalize(""), "");
    }

    #[test]
    fn apostrophes_stay_inside_tokens() {
        assert_eq!(tokenize("they're breaking the windshields of the cars!"), vec![
            "they're", "breaking", "the", "windshields", "of", "the", "cars"
        ]);
        assert_eq!(tokenize("Castel Sant\u{2019}Angelo"), vec!["castel", "sant'angelo"]);
        assert_eq!(tokenize("'quoted' words"), vec!["quoted", "words"]);
        assert_eq!(tokenize("#15O, corteo... via-Cavour"), vec!["15o", "corteo", "via", "cavour"]);
    }

    #[test]
    fn spans_map_back_to_original() {
        let raw = "Già  a Piazza Venezia";
        let n = Normalized::new(raw);
        let toks = n.tokens();
        let piazza = &toks[2];
        assert_eq!(piazza.text, "piazza");
        assert_eq!(n.original(raw, piazza.start, toks[3].end), "Piazza Venezia");
        assert_eq!(n.original(raw, toks[0].start, toks[0].end), "Già");
    }
}
