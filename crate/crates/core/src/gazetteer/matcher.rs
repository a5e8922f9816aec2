use serde::{Deserialize, Serialize};

use super::Gazetteer;
use crate::text::Normalized;

pub const EXACT_SCORE: f64 = 1.0;
pub const NORMALIZED_SCORE: f64 = 0.95;
pub const ALIAS_SCORE: f64 = 0.9;
pub const FUZZY_WEIGHT: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    Exact,
    Normalized,
    Alias,
    Fuzzy,
}

/// Char offsets `[start, end)` into the normalized text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToponymMatch {
    pub entry_id: String,
    pub span: Span,
    pub mode: MatchMode,
    pub score: f64,
    /// Gazetteer spelling (canonical name or alias) that matched.
    pub name: String,
}

/// Edit budget for a name of `len` normalized chars: one edit per started
/// block of eight.
pub fn fuzzy_budget(len: usize) -> usize {
    len.div_ceil(8)
}

/// Levenshtein distance if it is at most `max`, computed over a diagonal band.
pub fn levenshtein_within(a: &[char], b: &[char], max: usize) -> Option<usize> {
    if a.len().abs_diff(b.len()) > max {
        return None;
    }
    let (n, m) = (a.len(), b.len());
    let inf = max + 1;
    let mut prev = vec![inf; m + 1];
    let mut cur = vec![inf; m + 1];
    for (j, slot) in prev.iter_mut().enumerate().take(max.min(m) + 1) {
        *slot = j;
    }
    for i in 1..=n {
        let lo = i.saturating_sub(max).max(1);
        let hi = (i + max).min(m);
        cur.iter_mut().for_each(|c| *c = inf);
        if i <= max {
            cur[0] = i;
        }
        let mut row_min = cur[0];
        for j in lo..=hi {
            let sub = prev[j - 1] + usize::from(a[i - 1] != b[j - 1]);
            let del = prev[j] + 1;
            let ins = cur[j - 1] + 1;
            cur[j] = sub.min(del).min(ins).min(inf);
            row_min = row_min.min(cur[j]);
        }
        if row_min > max {
            return None;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    (prev[m] <= max).then_some(prev[m])
}

#[derive(Debug, Clone)]
struct Candidate {
    entry: usize,
    first_tok: usize,
    last_tok: usize,
    mode: MatchMode,
    score: f64,
    form: usize,
}

/// Finds gazetteer names in `text`.
///
/// Every token n-gram is compared against the index exactly (original
/// spelling), after normalization, as an alias, and fuzzily. Overlaps are
/// resolved in favour of non-fuzzy matches, then longest-first, then by
/// score; the result is sorted by span start.
pub fn match_candidates(text: &str, index: &Gazetteer) -> Vec<ToponymMatch> {
    let norm = Normalized::new(text);
    let toks = norm.tokens();
    if toks.is_empty() || index.is_empty() {
        return Vec::new();
    }
    let mut cands: Vec<Candidate> = Vec::new();
    for i in 0..toks.len() {
        for len in 1..=index.max_tokens.min(toks.len() - i) {
            let last = i + len - 1;
            let key = toks[i..=last].iter().map(|t| t.text.as_str()).collect::<Vec<_>>().join(" ");
            let mut best: Option<Candidate> = None;
            let mut consider = |c: Candidate| {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        c.score > b.score
                            || (c.score == b.score
                                && index.entry_at(c.entry).id < index.entry_at(b.entry).id)
                    }
                };
                if better {
                    best = Some(c);
                }
            };
            if let Some(forms) = index.by_key.get(&key) {
                let surface = norm.original(text, toks[i].start, toks[last].end);
                let surface: String = surface.split_whitespace().collect::<Vec<_>>().join(" ");
                for &f in forms {
                    let form = &index.forms[f];
                    let (mode, score) = if form.is_alias {
                        (MatchMode::Alias, ALIAS_SCORE)
                    } else if form.display == surface {
                        (MatchMode::Exact, EXACT_SCORE)
                    } else {
                        (MatchMode::Normalized, NORMALIZED_SCORE)
                    };
                    consider(Candidate { entry: form.entry, first_tok: i, last_tok: last, mode, score, form: f });
                }
            } else if let Some(bucket) = index.fuzzy.get(&len) {
                let key_chars: Vec<char> = key.chars().collect();
                for &f in bucket {
                    let form = &index.forms[f];
                    let budget = fuzzy_budget(form.key_chars.len());
                    if let Some(d) = levenshtein_within(&key_chars, &form.key_chars, budget) {
                        if d == 0 {
                            continue;
                        }
                        let longest = key_chars.len().max(form.key_chars.len()) as f64;
                        let similarity = 1.0 - d as f64 / longest;
                        consider(Candidate {
                            entry: form.entry,
                            first_tok: i,
                            last_tok: last,
                            mode: MatchMode::Fuzzy,
                            score: FUZZY_WEIGHT * similarity,
                            form: f,
                        });
                    }
                }
            }
            if let Some(b) = best {
                cands.push(b);
            }
        }
    }

    cands.sort_by(|a, b| {
        (a.mode == MatchMode::Fuzzy)
            .cmp(&(b.mode == MatchMode::Fuzzy))
            .then((b.last_tok - b.first_tok).cmp(&(a.last_tok - a.first_tok)))
            .then(b.score.total_cmp(&a.score))
            .then(a.first_tok.cmp(&b.first_tok))
            .then_with(|| index.entry_at(a.entry).id.cmp(&index.entry_at(b.entry).id))
    });
    let mut taken = vec![false; toks.len()];
    let mut chosen: Vec<Candidate> = Vec::new();
    for c in cands {
        if taken[c.first_tok..=c.last_tok].iter().any(|&t| t) {
            continue;
        }
        taken[c.first_tok..=c.last_tok].iter_mut().for_each(|t| *t = true);
        chosen.push(c);
    }
    chosen.sort_by_key(|c| c.first_tok);
    chosen
        .into_iter()
        .map(|c| ToponymMatch {
            entry_id: index.entry_at(c.entry).id.clone(),
            span: Span { start: toks[c.first_tok].start, end: toks[c.last_tok].end },
            mode: c.mode,
            score: c.score,
            name: index.forms[c.form].display.clone(),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gazetteer::tests::fixture;
    use crate::text::{token_key, Normalized};

    fn plain_levenshtein(a: &[char], b: &[char]) -> usize {
        let mut d: Vec<Vec<usize>> = (0..=a.len()).map(|i| vec![i; b.len() + 1]).collect();
        for (j, v) in d[0].iter_mut().enumerate() {
            *v = j;
        }
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                let cost = usize::from(a[i - 1] != b[j - 1]);
                d[i][j] = (d[i - 1][j] + 1).min(d[i][j - 1] + 1).min(d[i - 1][j - 1] + cost);
            }
        }
        d[a.len()][b.len()]
    }

    #[test]
    fn exact_match_with_substring_oracle() {
        let g = fixture();
        let text = "riot at Piazza del Popolo now";
        let m = match_candidates(text, &g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].entry_id, "popolo");
        assert_eq!(m[0].mode, MatchMode::Exact);
        assert_eq!(m[0].score, 1.0);
        let norm = Normalized::new(text);
        let start = norm.text.find("piazza del popolo").unwrap();
        assert_eq!(m[0].span, Span { start, end: start + "piazza del popolo".len() });
    }

    #[test]
    fn case_folded_match_is_normalized_mode() {
        let g = fixture();
        let m = match_candidates("walking down via del corso", &g);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].entry_id.as_str(), m[0].mode, m[0].score), ("corso", MatchMode::Normalized, 0.95));
    }

    #[test]
    fn empty_text_and_alias() {
        let g = fixture();
        assert!(match_candidates("", &g).is_empty());
        let m = match_candidates("near the Colosseum", &g);
        assert_eq!((m[0].entry_id.as_str(), m[0].mode, m[0].score), ("colosseo", MatchMode::Alias, 0.9));
    }

    #[test]
    fn fuzzy_match_scores_below_one() {
        let g = fixture();
        let m = match_candidates("crowd at Piazza del Popollo", &g);
        assert_eq!(m.len(), 1);
        assert_eq!(m[0].mode, MatchMode::Fuzzy);
        let expected = 0.9 * (1.0 - 1.0 / 18.0);
        assert!((m[0].score - expected).abs() < 1e-12);
        // "Popolo" alias has 6 chars, budget 1: two edits are too many
        assert!(match_candidates("pooplu", &g).is_empty());
    }

    #[test]
    fn longest_match_wins_overlap() {
        let g = fixture();
        let m = match_candidates("Via del Corso e Corso", &g);
        assert_eq!(m.len(), 2);
        assert_eq!(m[0].name, "Via del Corso");
        assert_eq!(m[1].name, "Corso");
        assert!(m[0].span.end <= m[1].span.start);
    }

    #[test]
    fn exact_alias_beats_longer_fuzzy_overlap() {
        // "a tuscolana" is two edits from "via tuscolana"
        let g = crate::gazetteer::load_gazetteer(
            "id,canonical_name,kind,lat,lon,aliases,context_cues\ntusc,Via Tuscolana,street,41.875,12.525,Tuscolana,via\n".as_bytes(),
        )
        .unwrap();
        let m = match_candidates("Pranzo a Tuscolana oggi", &g);
        assert_eq!(m.len(), 1);
        assert_eq!((m[0].mode, m[0].name.as_str()), (MatchMode::Alias, "Tuscolana"));
    }

    #[test]
    fn budget_is_one_edit_per_eight_chars() {
        assert_eq!(fuzzy_budget(5), 1);
        assert_eq!(fuzzy_budget(8), 1);
        assert_eq!(fuzzy_budget(9), 2);
        assert_eq!(fuzzy_budget(17), 3);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn banded_levenshtein_agrees_with_full_table(a in "[abc]{0,10}", b in "[abc]{0,10}", max in 0usize..4) {
                let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
                let full = plain_levenshtein(&a, &b);
                let expect = (full <= max).then_some(full);
                prop_assert_eq!(levenshtein_within(&a, &b, max), expect);
            }

            #[test]
            fn matches_sorted_disjoint_and_within_budget(
                words in proptest::collection::vec(
                    prop_oneof![
                        Just("piazza"), Just("del"), Just("popolo"), Just("via"), Just("corso"),
                        Just("colosseo"), Just("colloseo"), Just("venezia"), Just("at"), Just("the"),
                        Just("Pantheon"), Just("pantheom"), Just("Popolo"),
                    ],
                    0..12,
                )
            ) {
                let g = fixture();
                let text = words.join(" ");
                let norm = Normalized::new(&text);
                let m = match_candidates(&text, &g);
                for pair in m.windows(2) {
                    prop_assert!(pair[0].span.end <= pair[1].span.start);
                }
                for hit in &m {
                    prop_assert!((0.0..=1.0).contains(&hit.score));
                    let surface: Vec<char> = norm.slice(hit.span.start, hit.span.end).chars().collect();
                    let name: Vec<char> = token_key(&hit.name).chars().collect();
                    let d = plain_levenshtein(&surface, &name);
                    prop_assert!(d <= fuzzy_budget(name.len()));
                    if hit.mode == MatchMode::Fuzzy {
                        prop_assert!(hit.score < 1.0 && d > 0);
                    }
                }
            }
        }
    }
}
