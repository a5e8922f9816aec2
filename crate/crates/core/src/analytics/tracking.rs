use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::time::iso;
use crate::model::{EnrichedMessage, GeoPoint, Timestamp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedPosition {
    pub point: GeoPoint,
    #[serde(with = "iso")]
    pub ts: Timestamp,
}

/// Last known position of every author seen so far. Later timestamps win;
/// on equal timestamps the later message in the stream wins.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct UserTracker {
    last: BTreeMap<String, TrackedPosition>,
}

impl UserTracker {
    pub fn observe(&mut self, m: &EnrichedMessage) {
        let Some(point) = m.geo() else { return };
        let pos = TrackedPosition { point, ts: m.base.ts };
        match self.last.get_mut(&m.base.author_id) {
            Some(cur) if cur.ts > pos.ts => {}
            Some(cur) => *cur = pos,
            None => {
                self.last.insert(m.base.author_id.clone(), pos);
            }
        }
    }

    pub fn get(&self, author: &str) -> Option<TrackedPosition> {
        self.last.get(author).copied()
    }

    pub fn positions(&self, tracked: &BTreeSet<String>) -> BTreeMap<String, TrackedPosition> {
        tracked.iter().filter_map(|a| self.get(a).map(|p| (a.clone(), p))).collect()
    }
}

pub fn track_users<'a, I>(msgs: I, tracked: &BTreeSet<String>) -> BTreeMap<String, TrackedPosition>
where
    I: IntoIterator<Item = &'a EnrichedMessage>,
{
    let mut t = UserTracker::default();
    for m in msgs {
        if tracked.contains(&m.base.author_id) {
            t.observe(m);
        }
    }
    t.positions(tracked)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::testutil::enriched;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn by(author: &str, id: &str, ts: i64, geo: Option<(f64, f64)>) -> EnrichedMessage {
        let mut m = enriched(id, ts, geo.map(|(a, b)| GeoPoint::new(a, b).unwrap()), true);
        m.base.author_id = author.into();
        m
    }

    #[test]
    fn examples() {
        let tracked = BTreeSet::from(["ann".to_string(), "bob".to_string()]);
        let msgs = [by("ann", "1", 10, Some((41.9, 12.5))), by("ann", "2", 20, Some((41.91, 12.5))), by("bob", "3", 30, None)];
        let pos = track_users(&msgs, &tracked);
        assert_eq!(pos.len(), 1);
        assert_eq!(pos["ann"].ts, 20);
        assert_eq!(pos["ann"].point.lat, 41.91);
    }

    #[test]
    fn matches_full_scan() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let mut msgs: Vec<EnrichedMessage> = (0..1000)
            .map(|i| {
                let geo = rng.gen_bool(0.6).then(|| (rng.gen_range(41.8..42.0), rng.gen_range(12.4..12.6)));
                by(&format!("u{}", rng.gen_range(0..40)), &format!("m{i}"), rng.gen_range(0..500), geo)
            })
            .collect();
        msgs.sort_by_key(|m| m.base.ts);
        let tracked: BTreeSet<String> = (0..50).step_by(3).map(|i| format!("u{i}")).collect();
        let got = track_users(&msgs, &tracked);
        for a in &tracked {
            let want = msgs
                .iter()
                .filter(|m| &m.base.author_id == a && m.geo().is_some())
                .next_back()
                .map(|m| TrackedPosition { point: m.geo().unwrap(), ts: m.base.ts });
            assert_eq!(got.get(a).copied(), want);
        }
    }
}
