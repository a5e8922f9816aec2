//! Toponym recognition and geocoding against a single-region gazetteer.

mod context;
mod matcher;

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{GeoPoint, GeoProvenance, Message, ResolvedGeo};
use crate::text;

pub use context::{filter_by_context, ContextConfig, KindFloor};
pub use matcher::{levenshtein_within, match_candidates, MatchMode, Span, ToponymMatch};

pub const CSV_HEADER: [&str; 7] = ["id", "canonical_name", "kind", "lat", "lon", "aliases", "context_cues"];

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("gazetteer header must be `{}`, got `{found}`", CSV_HEADER.join(","))]
    Header { found: String },
    #[error("line {line}: {msg}")]
    Malformed { line: u64, msg: String },
    #[error("line {line}: coordinate out of range (lat={lat}, lon={lon})")]
    Range { line: u64, lat: f64, lon: f64 },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: u64, id: String },
    #[error("line {line}: unknown kind `{kind}`")]
    UnknownKind { line: u64, kind: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceKind {
    Street,
    Mall,
    Cinema,
    Museum,
    Landmark,
    Neighborhood,
    Pub,
    Bar,
    Shop,
    Store,
    Gym,
    Other,
}

impl PlaceKind {
    pub const ALL: [PlaceKind; 12] = [
        PlaceKind::Street,
        PlaceKind::Mall,
        PlaceKind::Cinema,
        PlaceKind::Museum,
        PlaceKind::Landmark,
        PlaceKind::Neighborhood,
        PlaceKind::Pub,
        PlaceKind::Bar,
        PlaceKind::Shop,
        PlaceKind::Store,
        PlaceKind::Gym,
        PlaceKind::Other,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PlaceKind::Street => "street",
            PlaceKind::Mall => "mall",
            PlaceKind::Cinema => "cinema",
            PlaceKind::Museum => "museum",
            PlaceKind::Landmark => "landmark",
            PlaceKind::Neighborhood => "neighborhood",
            PlaceKind::Pub => "pub",
            PlaceKind::Bar => "bar",
            PlaceKind::Shop => "shop",
            PlaceKind::Store => "store",
            PlaceKind::Gym => "gym",
            PlaceKind::Other => "other",
        }
    }
}

impl fmt::Display for PlaceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PlaceKind {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().to_lowercase();
        PlaceKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GazetteerEntry {
    pub id: String,
    pub canonical_name: String,
    pub kind: PlaceKind,
    pub location: GeoPoint,
    pub aliases: Vec<String>,
    pub context_cues: Vec<String>,
}

/// One searchable surface form of an entry.
#[derive(Debug, Clone)]
pub(crate) struct NameForm {
    pub entry: usize,
    /// Stored spelling with whitespace collapsed (exact-mode comparison).
    pub display: String,
    pub key_chars: Vec<char>,
    pub is_alias: bool,
}

/// Immutable lookup structure over gazetteer entries.
#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    entries: Vec<GazetteerEntry>,
    by_id: HashMap<String, usize>,
    pub(crate) forms: Vec<NameForm>,
    pub(crate) by_key: HashMap<String, Vec<usize>>,
    /// Fuzzy candidates bucketed by token count.
    pub(crate) fuzzy: BTreeMap<usize, Vec<usize>>,
    pub(crate) max_tokens: usize,
    /// Normalized context cues per entry.
    pub(crate) cues: Vec<Vec<String>>,
}

/// Names shorter than this (in normalized chars) are never fuzzy-matched.
pub const FUZZY_MIN_CHARS: usize = 5;

impl Gazetteer {
    pub fn from_entries(entries: Vec<GazetteerEntry>) -> Result<Self, GazetteerError> {
        let mut g = Gazetteer::default();
        for (i, e) in entries.into_iter().enumerate() {
            let line = i as u64 + 2;
            if g.by_id.contains_key(&e.id) {
                return Err(GazetteerError::DuplicateId { line, id: e.id });
            }
            if e.canonical_name.trim().is_empty() || text::word_count(&e.canonical_name) == 0 {
                return Err(GazetteerError::Malformed { line, msg: "canonical_name is empty".into() });
            }
            g.push(e);
        }
        Ok(g)
    }

    fn push(&mut self, mut e: GazetteerEntry) {
        let idx = self.entries.len();
        // aliases are unique per entry once case-folded, and never repeat the canonical name
        let canonical_key = text::token_key(&e.canonical_name);
        let mut seen = vec![canonical_key];
        e.aliases.retain(|a| {
            let k = text::token_key(a);
            if k.is_empty() || seen.contains(&k) {
                false
            } else {
                seen.push(k);
                true
            }
        });
        let names = std::iter::once((e.canonical_name.clone(), false)).chain(e.aliases.iter().map(|a| (a.clone(), true)));
        for (name, is_alias) in names {
            let key = text::token_key(&name);
            let tokens = key.split(' ').count();
            let form_idx = self.forms.len();
            let key_chars: Vec<char> = key.chars().collect();
            if key_chars.len() >= FUZZY_MIN_CHARS {
                self.fuzzy.entry(tokens).or_default().push(form_idx);
            }
            self.max_tokens = self.max_tokens.max(tokens);
            self.by_key.entry(key).or_default().push(form_idx);
            self.forms.push(NameForm {
                entry: idx,
                display: name.split_whitespace().collect::<Vec<_>>().join(" "),
                key_chars,
                is_alias,
            });
        }
        self.cues.push(e.context_cues.iter().map(|c| text::token_key(c)).filter(|c| !c.is_empty()).collect());
        self.by_id.insert(e.id.clone(), idx);
        self.entries.push(e);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[GazetteerEntry] {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&GazetteerEntry> {
        self.by_id.get(id).map(|&i| &self.entries[i])
    }

    pub(crate) fn entry_index(&self, id: &str) -> Option<usize> {
        self.by_id.get(id).copied()
    }

    pub(crate) fn entry_at(&self, i: usize) -> &GazetteerEntry {
        &self.entries[i]
    }

    /// Case-insensitive lookup of a canonical name or alias.
    pub fn lookup(&self, name: &str) -> Vec<&GazetteerEntry> {
        let mut out: Vec<&GazetteerEntry> = self
            .by_key
            .get(&text::token_key(name))
            .map(|forms| forms.iter().map(|&f| &self.entries[self.forms[f].entry]).collect())
            .unwrap_or_default();
        out.dedup_by(|a, b| a.id == b.id);
        out
    }
}

fn split_list(field: &str) -> Vec<String> {
    field.split('|').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

/// Reads the gazetteer CSV (`id,canonical_name,kind,lat,lon,aliases,context_cues`).
pub fn load_gazetteer<R: Read>(source: R) -> Result<Gazetteer, GazetteerError> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(source);
    let header = rdr
        .headers()
        .map_err(|e| GazetteerError::Malformed { line: 1, msg: e.to_string() })?
        .clone();
    if header.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(GazetteerError::Header { found: header.iter().collect::<Vec<_>>().join(",") });
    }
    let mut g = Gazetteer::default();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            GazetteerError::Malformed { line, msg: e.to_string() }
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let id = field(0).to_string();
        if id.is_empty() {
            return Err(GazetteerError::Malformed { line, msg: "empty id".into() });
        }
        if g.by_id.contains_key(&id) {
            return Err(GazetteerError::DuplicateId { line, id });
        }
        let canonical_name = field(1).to_string();
        if text::word_count(&canonical_name) == 0 {
            return Err(GazetteerError::Malformed { line, msg: "canonical_name is empty".into() });
        }
        let kind = PlaceKind::from_str(field(2))
            .map_err(|_| GazetteerError::UnknownKind { line, kind: field(2).to_string() })?;
        let parse = |i: usize, name: &str| {
            field(i)
                .parse::<f64>()
                .map_err(|_| GazetteerError::Malformed { line, msg: format!("{name} `{}` is not a number", field(i)) })
        };
        let (lat, lon) = (parse(3, "lat")?, parse(4, "lon")?);
        let location = GeoPoint::new(lat, lon).map_err(|_| GazetteerError::Range { line, lat, lon })?;
        g.push(GazetteerEntry {
            id,
            canonical_name,
            kind,
            location,
            aliases: split_list(field(5)),
            context_cues: split_list(field(6)),
        });
    }
    Ok(g)
}

/// Resolves a message to one location. A declared coordinate always wins;
/// otherwise the best retained toponym (highest score, then earliest span,
/// then smallest entry id) is used.
pub fn geocode(msg: &Message, index: &Gazetteer, ctx: &ContextConfig) -> Option<ResolvedGeo> {
    if let Some(point) = msg.declared_geo {
        return Some(ResolvedGeo { point, provenance: GeoProvenance::Declared });
    }
    geoparse(&msg.text, index, ctx).map(|e| ResolvedGeo {
        point: e.location,
        provenance: GeoProvenance::Geoparsed,
    })
}

/// The single entry a free text refers to, if any.
pub fn geoparse<'g>(text: &str, index: &'g Gazetteer, ctx: &ContextConfig) -> Option<&'g GazetteerEntry> {
    let matches = filter_by_context(match_candidates(text, index), text, index, ctx);
    best_match(&matches).and_then(|m| index.get(&m.entry_id))
}

pub fn best_match(matches: &[ToponymMatch]) -> Option<&ToponymMatch> {
    matches.iter().min_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.span.start.cmp(&b.span.start))
            .then(a.entry_id.cmp(&b.entry_id))
    })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::model::{Source, SourceKind};

    pub(crate) const FIXTURE: &str = "\
id,canonical_name,kind,lat,lon,aliases,context_cues
popolo,Piazza del Popolo,landmark,41.9107,12.4764,Popolo,piazza|square
corso,Via del Corso,street,41.9003,12.4813,Corso,via|street
venezia,Piazza Venezia,landmark,41.8959,12.4825,,
colosseo,Colosseo,landmark,41.8902,12.4922,Colosseum|Anfiteatro Flavio,
pantheon,Pantheon,landmark,41.8986,12.4769,,
";

    pub(crate) fn fixture() -> Gazetteer {
        load_gazetteer(FIXTURE.as_bytes()).unwrap()
    }

    fn msg(text: &str, geo: Option<GeoPoint>) -> Message {
        Message {
            id: "m".into(),
            source: Source::new(SourceKind::TwitterLike),
            author_id: "a".into(),
            ts: 0,
            text: text.into(),
            declared_geo: geo,
            reply_to: None,
            mentions: vec![],
        }
    }

    #[test]
    fn header_only_is_empty() {
        let g = load_gazetteer(format!("{}\n", CSV_HEADER.join(",")).as_bytes()).unwrap();
        assert!(g.is_empty());
    }

    #[test]
    fn rows_roundtrip_by_name() {
        let g = fixture();
        assert_eq!(g.len(), 5);
        for e in g.entries() {
            assert_eq!(g.lookup(&e.canonical_name.to_uppercase())[0].id, e.id);
        }
        assert_eq!(g.lookup("colosseum")[0].id, "colosseo");
    }

    #[test]
    fn bad_rows_report_line() {
        let bad = format!("{}\na,A,landmark,95.0,12.0,,\n", CSV_HEADER.join(","));
        assert!(matches!(load_gazetteer(bad.as_bytes()), Err(GazetteerError::Range { line: 2, .. })));
        let dup = format!("{}\na,A,landmark,41,12,,\na,B,landmark,41,12,,\n", CSV_HEADER.join(","));
        assert!(matches!(load_gazetteer(dup.as_bytes()), Err(GazetteerError::DuplicateId { line: 3, .. })));
        let short = format!("{}\na,A,landmark,41\n", CSV_HEADER.join(","));
        assert!(matches!(load_gazetteer(short.as_bytes()), Err(GazetteerError::Malformed { line: 2, .. })));
        let kind = format!("{}\na,A,castle,41,12,,\n", CSV_HEADER.join(","));
        assert!(matches!(load_gazetteer(kind.as_bytes()), Err(GazetteerError::UnknownKind { line: 2, .. })));
        assert!(matches!(load_gazetteer("id,name\n".as_bytes()), Err(GazetteerError::Header { .. })));
    }

    #[test]
    fn quoted_fields_and_duplicate_aliases() {
        let csv = format!("{}\nx,\"Bar, the Place\",bar,41.9,12.5,\"The Place|the place|THE  PLACE\",\n", CSV_HEADER.join(","));
        let g = load_gazetteer(csv.as_bytes()).unwrap();
        assert_eq!(g.entries()[0].canonical_name, "Bar, the Place");
        assert_eq!(g.entries()[0].aliases, vec!["The Place"]);
    }

    #[test]
    fn geocode_examples() {
        let g = fixture();
        let ctx = ContextConfig::default();
        let declared = GeoPoint::new(41.9, 12.5).unwrap();
        let r = geocode(&msg("fires near Piazza Venezia", Some(declared)), &g, &ctx).unwrap();
        assert_eq!((r.point, r.provenance), (declared, GeoProvenance::Declared));
        let r = geocode(&msg("fires near Piazza Venezia", None), &g, &ctx).unwrap();
        assert_eq!(r.point, g.get("venezia").unwrap().location);
        assert_eq!(r.provenance, GeoProvenance::Geoparsed);
        assert!(geocode(&msg("so tired today", None), &g, &ctx).is_none());
    }

    #[test]
    fn geocode_tie_breaks_on_span_then_id() {
        let g = fixture();
        let ctx = ContextConfig::default();
        let r = geocode(&msg("from Pantheon to Colosseo", None), &g, &ctx).unwrap();
        assert_eq!(r.point, g.get("pantheon").unwrap().location);
    }
}
