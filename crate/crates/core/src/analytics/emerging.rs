use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmergingConfig {
    pub growth_ratio: f64,
    pub min_count: u32,
}

impl Default for EmergingConfig {
    fn default() -> Self {
        Self { growth_ratio: 3.0, min_count: 10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmergingTopic {
    pub topic: String,
    pub count: u32,
    pub previous: u32,
    pub ratio: f64,
}

/// Topics whose count grew by `growth_ratio` between the previous and the
/// current window. Ranked by ratio, then count (both descending), then id.
pub fn emerging_topics(
    previous: &BTreeMap<String, u32>,
    current: &BTreeMap<String, u32>,
    cfg: &EmergingConfig,
) -> Vec<EmergingTopic> {
    let mut out: Vec<EmergingTopic> = current
        .iter()
        .filter(|&(_, &count)| count >= cfg.min_count)
        .map(|(topic, &count)| {
            let prev = previous.get(topic).copied().unwrap_or(0);
            EmergingTopic { topic: topic.clone(), count, previous: prev, ratio: f64::from(count) / f64::from(prev.max(1)) }
        })
        .filter(|t| t.ratio >= cfg.growth_ratio)
        .collect();
    out.sort_by(|a, b| {
        b.ratio.total_cmp(&a.ratio).then(b.count.cmp(&a.count)).then_with(|| a.topic.cmp(&b.topic))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn counts(pairs: &[(&str, u32)]) -> BTreeMap<String, u32> {
        pairs.iter().map(|&(t, c)| (t.to_string(), c)).collect()
    }

    #[test]
    fn constant_counts_emerge_nothing() {
        let c = counts(&[("culture", 40), ("security", 12)]);
        assert!(emerging_topics(&c, &c, &EmergingConfig::default()).is_empty());
    }

    #[test]
    fn growth_ratio_filters() {
        let prev = counts(&[("roadblocks", 2), ("food", 5)]);
        let cur = counts(&[("roadblocks", 20), ("food", 10)]);
        let cfg = EmergingConfig { growth_ratio: 3.0, min_count: 1 };
        let out = emerging_topics(&prev, &cur, &cfg);
        assert_eq!(out.len(), 1);
        assert_eq!((out[0].topic.as_str(), out[0].ratio), ("roadblocks", 10.0));
    }

    #[test]
    fn new_topic_clamps_previous() {
        let out = emerging_topics(&BTreeMap::new(), &counts(&[("fire", 15)]), &EmergingConfig { growth_ratio: 3.0, min_count: 10 });
        assert_eq!(out[0].ratio, 15.0);
        assert_eq!(out[0].previous, 0);
    }

    #[test]
    fn ranking_ties() {
        let cur = counts(&[("b", 30), ("a", 30), ("c", 20)]);
        let prev = counts(&[("a", 3), ("b", 3), ("c", 2)]);
        let ids: Vec<String> =
            emerging_topics(&prev, &cur, &EmergingConfig::default()).into_iter().map(|t| t.topic).collect();
        assert_eq!(ids, ["a", "b", "c"]);
    }

    proptest! {
        #[test]
        fn listing_matches_predicate(
            prev in proptest::collection::btree_map("[a-e]", 0u32..40, 0..5),
            cur in proptest::collection::btree_map("[a-e]", 0u32..40, 0..5),
            g in 1.0f64..5.0, min in 0u32..20,
        ) {
            let cfg = EmergingConfig { growth_ratio: g, min_count: min };
            let out = emerging_topics(&prev, &cur, &cfg);
            for (t, &c) in &cur {
                let p = prev.get(t).copied().unwrap_or(0).max(1);
                let want = c >= min && f64::from(c) / f64::from(p) >= g;
                prop_assert_eq!(want, out.iter().any(|e| &e.topic == t));
            }
            prop_assert!(out.windows(2).all(|w| w[0].ratio >= w[1].ratio));
        }
    }
}
