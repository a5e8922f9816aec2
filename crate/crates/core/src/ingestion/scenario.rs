use std::collections::{BTreeMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::phrases::{fill, Bilingual, Lang, PhraseBanks};
use super::EventLog;
use crate::enrichment::EventSpec;
use crate::fixtures;
use crate::gazetteer::{load_gazetteer, Gazetteer, GazetteerEntry};
use crate::model::geo::{point_along, polyline_length_m};
use crate::model::time::iso;
use crate::model::{
    cell_of, destination, distance_to_polyline_m, haversine_m, CellIndex, GeoPoint, GridSpec, Message, Source,
    SourceKind, TemplateCategory, Timestamp,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScenarioError {
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("infeasible injection #{index}: {reason}")]
    Infeasible { index: usize, reason: String },
}

/// Where an injection lands.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Anchor {
    Cell(CellIndex),
    PathOffsetM(f64),
    Point(GeoPoint),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentCounts {
    pub peaceful: u32,
    pub violent: u32,
    pub bystander: u32,
    pub remote: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentRates {
    pub peaceful: f64,
    pub violent: f64,
    pub bystander: f64,
    pub remote: f64,
}

impl Default for AgentRates {
    fn default() -> Self {
        Self { peaceful: 2.0, violent: 3.0, bystander: 1.5, remote: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncidentInjection {
    pub category: TemplateCategory,
    pub at: Anchor,
    #[serde(with = "iso")]
    pub window_start: Timestamp,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GatheringInjection {
    pub at: Anchor,
    #[serde(with = "iso")]
    pub window_start: Timestamp,
    pub count: u32,
}

fn default_window_s() -> i64 {
    300
}

fn default_near_path() -> f64 {
    0.03
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub seed: u64,
    /// Area of interest; injections must fall inside its bbox.
    pub grid: GridSpec,
    pub event: EventSpec,
    pub agents: AgentCounts,
    #[serde(default)]
    pub messages_per_agent: AgentRates,
    /// Share of bystanders idling next to the route with a declared position.
    #[serde(default = "default_near_path")]
    pub bystander_near_path: f64,
    /// Length of an analytics window; injection windows are aligned to it.
    #[serde(default = "default_window_s")]
    pub window_s: i64,
    #[serde(default)]
    pub incidents: Vec<IncidentInjection>,
    #[serde(default)]
    pub gatherings: Vec<GatheringInjection>,
}

impl ScenarioSpec {
    pub fn from_json(json: &str) -> Result<Self, ScenarioError> {
        serde_json::from_str(json).map_err(|e| ScenarioError::Invalid(e.to_string()))
    }

    pub fn embedded() -> Self {
        Self::from_json(fixtures::SCENARIO_JSON).expect("shipped scenario is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GatheringTruth {
    pub ix: u32,
    pub iy: u32,
    #[serde(with = "iso")]
    pub window_start: Timestamp,
}

/// Generator-side labels. `incidents` maps each message built from a
/// category phrase bank to that category.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default)]
    pub relevance: BTreeMap<String, bool>,
    #[serde(default)]
    pub incidents: BTreeMap<String, TemplateCategory>,
    #[serde(default)]
    pub gatherings: Vec<GatheringTruth>,
    #[serde(default)]
    pub geolabels: BTreeMap<usize, Option<String>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Group {
    Protest,
    Bystander,
    Remote,
}

struct Draft {
    ts: Timestamp,
    author: usize,
    group: Group,
    core: bool,
    text: String,
    geo: Option<GeoPoint>,
    relevant: bool,
    category: Option<TemplateCategory>,
}

const REMOTE_CITIES: [(f64, f64); 7] = [
    (45.4642, 9.1900),
    (40.8518, 14.2681),
    (45.0703, 7.6869),
    (43.7696, 11.2558),
    (44.4949, 11.3426),
    (51.5072, -0.1276),
    (40.4168, -3.7038),
];
const VIOLENT_CORE: usize = 20;
const REPLY_P: f64 = 0.12;
const MENTION_P: f64 = 0.1;
const CORE_MENTION_P: f64 = 0.3;

fn round6(p: GeoPoint) -> GeoPoint {
    let r = |v: f64| (v * 1e6).round() / 1e6;
    GeoPoint { lat: r(p.lat), lon: r(p.lon) }
}

fn jitter<R: Rng>(rng: &mut R, p: GeoPoint, max_m: f64) -> GeoPoint {
    destination(p, rng.gen_range(0.0..360.0), rng.gen_range(0.0..max_m))
}

fn times<R: Rng>(rng: &mut R, rate: f64) -> u32 {
    let base = rate.floor();
    base as u32 + u32::from(rng.gen_bool((rate - base).clamp(0.0, 1.0)))
}

fn name_of<'a, R: Rng>(rng: &mut R, e: &'a GazetteerEntry, alias_p: f64) -> &'a str {
    match e.aliases.choose(rng) {
        Some(a) if rng.gen_bool(alias_p) => a,
        _ => &e.canonical_name,
    }
}

fn nearest<'a>(p: GeoPoint, entries: &[&'a GazetteerEntry]) -> &'a GazetteerEntry {
    entries
        .iter()
        .min_by(|a, b| haversine_m(p, a.location).total_cmp(&haversine_m(p, b.location)))
        .copied()
        .expect("candidate list is non-empty")
}

fn pick_source<R: Rng>(rng: &mut R) -> Source {
    match rng.gen_range(0..20) {
        0..=13 => Source::new(SourceKind::TwitterLike),
        14..=16 => Source::labeled(SourceKind::PhotoLike, "flickr"),
        _ => Source::labeled(SourceKind::CheckinLike, "foursquare"),
    }
}

struct Ctx<'a> {
    spec: &'a ScenarioSpec,
    all: Vec<&'a GazetteerEntry>,
    event_places: Vec<&'a GazetteerEntry>,
    far_places: Vec<&'a GazetteerEntry>,
    path_len: f64,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a ScenarioSpec, g: &'a Gazetteer) -> Result<Self, ScenarioError> {
        let ev = &spec.event;
        let event_places: Vec<_> = ev.place_ids.iter().filter_map(|id| g.get(id)).collect();
        let far_places: Vec<_> = g
            .entries()
            .iter()
            .filter(|e| !ev.place_ids.contains(&e.id))
            .filter(|e| spec.grid.bbox.contains(e.location))
            .filter(|e| distance_to_polyline_m(e.location, &ev.path) > ev.buffer_m + 400.0)
            .collect();
        let all: Vec<_> = g.entries().iter().collect();
        if all.is_empty() {
            return Err(ScenarioError::Invalid("gazetteer is empty".into()));
        }
        if event_places.is_empty() || far_places.is_empty() {
            return Err(ScenarioError::Invalid("gazetteer lacks event places or places away from the route".into()));
        }
        Ok(Self { spec, all, event_places, far_places, path_len: polyline_length_m(&ev.path) })
    }

    fn on_path<R: Rng>(&self, rng: &mut R, offset: f64, max_jitter: f64) -> GeoPoint {
        let p = point_along(&self.spec.event.path, offset.clamp(0.0, self.path_len)).expect("path is non-empty");
        round6(jitter(rng, p, max_jitter))
    }

    fn event_time<R: Rng>(&self, rng: &mut R) -> Timestamp {
        let w = self.spec.event.window;
        rng.gen_range(w.start..w.end())
    }

    fn place_text<R: Rng>(&self, rng: &mut R, bank: &Bilingual, lang: Lang, place: &GazetteerEntry, alias_p: f64) -> String {
        let name = name_of(rng, place, alias_p);
        fill(bank.pick(lang, rng), "{place}", name)
    }

    fn validate(&self) -> Result<(), ScenarioError> {
        let s = self.spec;
        let r = &s.messages_per_agent;
        let rates = [r.peaceful, r.violent, r.bystander, r.remote];
        if rates.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(ScenarioError::Invalid("message rates must be finite and non-negative".into()));
        }
        if !(0.0..=1.0).contains(&s.bystander_near_path) {
            return Err(ScenarioError::Invalid("bystander_near_path must lie in [0, 1]".into()));
        }
        if s.window_s <= 0 {
            return Err(ScenarioError::Invalid("window_s must be positive".into()));
        }
        s.event.validate().map_err(ScenarioError::Invalid)
    }

    /// Resolves an anchor and checks the injection window.
    fn injection(&self, index: usize, at: Anchor, window_start: Timestamp) -> Result<GeoPoint, ScenarioError> {
        let fail = |reason: String| ScenarioError::Infeasible { index, reason };
        let s = self.spec;
        let point = match at {
            Anchor::Cell(c) if s.grid.contains_cell(c) => s.grid.cell_center(c),
            Anchor::Cell(c) => return Err(fail(format!("cell ({}, {}) is outside the grid", c.ix, c.iy))),
            Anchor::PathOffsetM(o) if (0.0..=self.path_len).contains(&o) => {
                point_along(&s.event.path, o).expect("path is non-empty")
            }
            Anchor::PathOffsetM(o) => return Err(fail(format!("path offset {o} m beyond route length {:.0} m", self.path_len))),
            Anchor::Point(p) => p,
        };
        if !s.grid.bbox.contains(point) {
            return Err(fail("location is outside the bounding box".into()));
        }
        let w = s.event.window;
        if window_start.rem_euclid(s.window_s) != 0 {
            return Err(fail(format!("window start is not aligned to {} s windows", s.window_s)));
        }
        if window_start < w.start || window_start + s.window_s > w.end() {
            return Err(fail("window lies outside the event window".into()));
        }
        Ok(point)
    }
}

/// Builds a scenario with the shipped gazetteer and phrase banks.
pub fn synthesize_scenario(spec: &ScenarioSpec) -> Result<(EventLog, GroundTruth), ScenarioError> {
    let g = load_gazetteer(fixtures::GAZETTEER_CSV.as_bytes()).expect("shipped gazetteer is valid");
    synthesize_scenario_with(spec, &g, &PhraseBanks::embedded())
}

/// Seeded generator: the same spec and resources always give the same log.
pub fn synthesize_scenario_with(
    spec: &ScenarioSpec,
    gazetteer: &Gazetteer,
    phrases: &PhraseBanks,
) -> Result<(EventLog, GroundTruth), ScenarioError> {
    let ctx = Ctx::new(spec, gazetteer)?;
    ctx.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut drafts: Vec<Draft> = Vec::new();
    let mut truth = GroundTruth::default();
    let mut author = 0usize;
    let ev = &spec.event;
    let rates = spec.messages_per_agent;

    // injections first so their geometry errors surface before any work
    let mut injected = Vec::new();
    for (i, inc) in spec.incidents.iter().enumerate() {
        let p = ctx.injection(i, inc.at, inc.window_start)?;
        if phrases.category(inc.category).is_none() {
            return Err(ScenarioError::Infeasible { index: i, reason: "no phrase bank for category `other`".into() });
        }
        injected.push(p);
    }
    let mut gathering_points = Vec::new();
    for (i, gat) in spec.gatherings.iter().enumerate() {
        let p = ctx.injection(spec.incidents.len() + i, gat.at, gat.window_start)?;
        let cell = cell_of(p, &spec.grid).map_err(|e| ScenarioError::Infeasible { index: spec.incidents.len() + i, reason: e.to_string() })?;
        truth.gatherings.push(GatheringTruth { ix: cell.ix, iy: cell.iy, window_start: gat.window_start });
        gathering_points.push((p, cell));
    }

    let duration = ev.window.duration as f64;
    for _ in 0..spec.agents.peaceful {
        let lang = Lang::random(&mut rng);
        let shift = rng.gen_range(-0.3..0.3) * ctx.path_len;
        for _ in 0..times(&mut rng, rates.peaceful) {
            let ts = ctx.event_time(&mut rng);
            let progress = (ts - ev.window.start) as f64 / duration * ctx.path_len;
            let pos = ctx.on_path(&mut rng, progress + shift, 150.0);
            let place = nearest(pos, &ctx.event_places);
            let (bank, category) = match rng.gen_range(0..100) {
                0..=69 => (&phrases.event_chatter, None),
                70..=84 => (&phrases.joyful, Some(TemplateCategory::Joyful)),
                85..=89 => (&phrases.curiosity, Some(TemplateCategory::Curiosity)),
                90..=92 => (&phrases.injury, Some(TemplateCategory::Injury)),
                _ => (&phrases.geocorpus.spatial, None),
            };
            let text = ctx.place_text(&mut rng, bank, lang, place, 0.2);
            let geo = rng.gen_bool(0.6).then_some(pos);
            drafts.push(Draft { ts, author, group: Group::Protest, core: false, text, geo, relevant: true, category });
        }
        author += 1;
    }
    for v in 0..spec.agents.violent as usize {
        let lang = Lang::random(&mut rng);
        let shift = rng.gen_range(-0.3..0.3) * ctx.path_len;
        for _ in 0..times(&mut rng, rates.violent) {
            let ts = ctx.event_time(&mut rng);
            let progress = (ts - ev.window.start) as f64 / duration * ctx.path_len;
            let pos = ctx.on_path(&mut rng, progress + shift, 150.0);
            let place = nearest(pos, &ctx.event_places);
            let (bank, category) = match rng.gen_range(0..10) {
                0..=5 => (&phrases.violence, Some(TemplateCategory::Violence)),
                6..=7 => (&phrases.law_infringement, Some(TemplateCategory::LawInfringement)),
                _ => (&phrases.event_chatter, None),
            };
            let text = ctx.place_text(&mut rng, bank, lang, place, 0.2);
            let geo = rng.gen_bool(0.6).then_some(pos);
            drafts.push(Draft { ts, author, group: Group::Protest, core: v < VIOLENT_CORE, text, geo, relevant: true, category });
        }
        author += 1;
    }
    let bbox = spec.grid.bbox;
    for _ in 0..spec.agents.bystander {
        let lang = Lang::random(&mut rng);
        let near = rng.gen_bool(spec.bystander_near_path);
        let home = if near {
            None
        } else {
            // rejection sampling away from the route
            loop {
                let p = GeoPoint {
                    lat: rng.gen_range(bbox.min.lat..bbox.max.lat),
                    lon: rng.gen_range(bbox.min.lon..bbox.max.lon),
                };
                if distance_to_polyline_m(p, &ev.path) > ev.buffer_m + 400.0 {
                    break Some(round6(p));
                }
            }
        };
        for _ in 0..times(&mut rng, rates.bystander) {
            let ts = ctx.event_time(&mut rng);
            let (pos, geo) = match home {
                Some(p) => (p, rng.gen_bool(0.5).then_some(p)),
                None => {
                    let offset = rng.gen_range(0.0..ctx.path_len);
                    let p = ctx.on_path(&mut rng, offset, 150.0);
                    (p, Some(p))
                }
            };
            let place = if near { *ctx.far_places.choose(&mut rng).expect("non-empty") } else { nearest(pos, &ctx.far_places) };
            let text = ctx.place_text(&mut rng, &phrases.city_chatter, lang, place, 0.2);
            drafts.push(Draft { ts, author, group: Group::Bystander, core: false, text, geo, relevant: false, category: None });
        }
        author += 1;
    }
    for _ in 0..spec.agents.remote {
        let lang = Lang::random(&mut rng);
        let (lat, lon) = *REMOTE_CITIES.choose(&mut rng).expect("non-empty");
        let home = GeoPoint { lat: lat + rng.gen_range(-0.05..0.05), lon: lon + rng.gen_range(-0.05..0.05) };
        let home = if bbox.contains(home) { None } else { Some(round6(home)) };
        for _ in 0..times(&mut rng, rates.remote) {
            let ts = ctx.event_time(&mut rng);
            let relevant = rng.gen_bool(0.5);
            let bank = if relevant { &phrases.remote_event } else { &phrases.remote_chatter };
            let text = bank.pick(lang, &mut rng).to_string();
            let geo = home.filter(|_| rng.gen_bool(0.3));
            drafts.push(Draft { ts, author, group: Group::Remote, core: false, text, geo, relevant, category: None });
        }
        author += 1;
    }
    for (inc, &p) in spec.incidents.iter().zip(&injected) {
        let bank = phrases.category(inc.category).expect("checked above");
        let place = nearest(p, &ctx.all);
        for _ in 0..inc.count {
            let lang = Lang::random(&mut rng);
            let ts = inc.window_start + rng.gen_range(0..spec.window_s);
            let pos = round6(jitter(&mut rng, p, 50.0));
            let text = ctx.place_text(&mut rng, bank, lang, place, 0.0);
            drafts.push(Draft { ts, author, group: Group::Protest, core: false, text, geo: Some(pos), relevant: true, category: Some(inc.category) });
            author += 1;
        }
    }
    let (cw, ch) = (spec.grid.cell_width(), spec.grid.cell_height());
    for (gat, &(_, cell)) in spec.gatherings.iter().zip(&gathering_points) {
        let center = spec.grid.cell_center(cell);
        let place = nearest(center, &ctx.all);
        for _ in 0..gat.count {
            let lang = Lang::random(&mut rng);
            let ts = gat.window_start + rng.gen_range(0..spec.window_s);
            let pos = round6(GeoPoint {
                lat: center.lat + rng.gen_range(-0.3..0.3) * ch,
                lon: center.lon + rng.gen_range(-0.3..0.3) * cw,
            });
            let text = ctx.place_text(&mut rng, &phrases.gathering, lang, place, 0.0);
            drafts.push(Draft { ts, author, group: Group::Protest, core: false, text, geo: Some(pos), relevant: true, category: None });
            author += 1;
        }
    }

    // stable sort keeps generation order among equal timestamps
    drafts.sort_by_key(|d| d.ts);
    let width = (author.max(1)).to_string().len().max(5);
    let author_id = |a: usize| format!("u{a:0width$}");
    let core_authors: Vec<usize> = {
        let first_violent = spec.agents.peaceful as usize;
        (first_violent..first_violent + (spec.agents.violent as usize).min(VIOLENT_CORE)).collect()
    };
    let mut recent: BTreeMap<u8, VecDeque<usize>> = BTreeMap::new();
    let mut messages = Vec::with_capacity(drafts.len());
    for (i, d) in drafts.iter().enumerate() {
        let id = format!("m{:06}", i + 1);
        let key = d.group as u8;
        let pool = recent.entry(key).or_default();
        let reply_to = if !pool.is_empty() && rng.gen_bool(REPLY_P) {
            Some(format!("m{:06}", pool[rng.gen_range(0..pool.len())] + 1))
        } else {
            None
        };
        let mut mentions = Vec::new();
        if d.core && rng.gen_bool(CORE_MENTION_P) {
            let other = core_authors[rng.gen_range(0..core_authors.len())];
            if other != d.author {
                mentions.push(author_id(other));
            }
        } else if !pool.is_empty() && rng.gen_bool(MENTION_P) {
            let other = drafts[pool[rng.gen_range(0..pool.len())]].author;
            if other != d.author {
                mentions.push(author_id(other));
            }
        }
        pool.push_back(i);
        if pool.len() > 30 {
            pool.pop_front();
        }
        truth.relevance.insert(id.clone(), d.relevant);
        if let Some(c) = d.category {
            truth.incidents.insert(id.clone(), c);
        }
        messages.push(Message {
            id,
            source: pick_source(&mut rng),
            author_id: author_id(d.author),
            ts: d.ts,
            text: d.text.clone(),
            declared_geo: d.geo,
            reply_to,
            mentions,
        });
    }
    let log = EventLog::new(messages).map_err(|e| ScenarioError::Invalid(e.to_string()))?;
    Ok((log, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::PipelineConfig;

    fn small(seed: u64) -> ScenarioSpec {
        let mut s = ScenarioSpec::embedded();
        s.seed = seed;
        s.agents = AgentCounts { peaceful: 60, violent: 10, bystander: 30, remote: 20 };
        s
    }

    #[test]
    fn empty_spec_gives_empty_log() {
        let mut s = small(1);
        s.agents = AgentCounts::default();
        s.incidents.clear();
        s.gatherings.clear();
        let (log, truth) = synthesize_scenario(&s).unwrap();
        assert!(log.is_empty());
        assert_eq!(truth, GroundTruth::default());
    }

    #[test]
    fn same_seed_same_output() {
        let (a, ta) = synthesize_scenario(&small(42)).unwrap();
        let (b, tb) = synthesize_scenario(&small(42)).unwrap();
        assert_eq!(a.to_jsonl(), b.to_jsonl());
        assert_eq!(ta, tb);
        let (c, _) = synthesize_scenario(&small(43)).unwrap();
        assert_ne!(a.to_jsonl(), c.to_jsonl());
    }

    #[test]
    fn three_gatherings_listed_and_labels_cover_every_message() {
        let (log, truth) = synthesize_scenario(&small(7)).unwrap();
        assert_eq!(truth.gatherings.len(), 3);
        assert_eq!(truth.relevance.len(), log.len());
        let ids: std::collections::BTreeSet<&str> = log.messages().iter().map(|m| m.id.as_str()).collect();
        assert!(truth.relevance.keys().all(|k| ids.contains(k.as_str())));
        assert!(truth.incidents.keys().all(|k| ids.contains(k.as_str())));
        for m in log.messages() {
            if let Some(p) = &m.reply_to {
                assert!(ids.contains(p.as_str()) && p < &m.id);
            }
            assert!(!m.mentions.contains(&m.author_id));
        }
    }

    #[test]
    fn injections_land_where_specified() {
        let s = small(9);
        let (log, truth) = synthesize_scenario(&s).unwrap();
        for g in &truth.gatherings {
            let cell = CellIndex { ix: g.ix, iy: g.iy };
            let n = log
                .messages()
                .iter()
                .filter(|m| m.ts >= g.window_start && m.ts < g.window_start + s.window_s)
                .filter(|m| m.declared_geo.and_then(|p| cell_of(p, &s.grid).ok()) == Some(cell))
                .count();
            assert!(n >= 60, "{n}");
        }
    }

    #[test]
    fn infeasible_injections_are_errors() {
        let mut s = small(1);
        s.gatherings[0].at = Anchor::Cell(CellIndex { ix: 64, iy: 0 });
        assert!(matches!(synthesize_scenario(&s), Err(ScenarioError::Infeasible { index: 4, .. })));
        let mut s = small(1);
        s.incidents[0].at = Anchor::Point(GeoPoint::new(45.0, 9.0).unwrap());
        assert!(matches!(synthesize_scenario(&s), Err(ScenarioError::Infeasible { index: 0, .. })));
        let mut s = small(1);
        s.incidents[1].window_start += 17;
        assert!(matches!(synthesize_scenario(&s), Err(ScenarioError::Infeasible { index: 1, .. })));
        let mut s = small(1);
        s.incidents[2].at = Anchor::PathOffsetM(1e6);
        assert!(matches!(synthesize_scenario(&s), Err(ScenarioError::Infeasible { index: 2, .. })));
    }

    #[test]
    fn ground_truth_json_shape() {
        let (_, truth) = synthesize_scenario(&small(3)).unwrap();
        let v: serde_json::Value = serde_json::to_value(&truth).unwrap();
        assert_eq!(v["gatherings"][0]["window_start"], "2011-10-15T15:00:00Z");
        assert!(v["relevance"]["m000001"].is_boolean());
        let back: GroundTruth = serde_json::from_value(v).unwrap();
        assert_eq!(back, truth);
    }

    /// Every message from a category bank carries exactly that template
    /// category, and no other message carries any.
    #[test]
    fn phrase_banks_are_category_pure() {
        let enricher = PipelineConfig::default().enricher().unwrap();
        let (log, truth) = synthesize_scenario(&small(11)).unwrap();
        for m in log.messages() {
            let e = enricher.enrich(m.clone());
            let got: std::collections::BTreeSet<TemplateCategory> = e.template_hits.iter().map(|h| h.category).collect();
            let want: std::collections::BTreeSet<TemplateCategory> = truth.incidents.get(&m.id).copied().into_iter().collect();
            assert_eq!(got, want, "{}: {}", m.id, m.text);
        }
    }
}
