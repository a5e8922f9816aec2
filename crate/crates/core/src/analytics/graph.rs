use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{EnrichedMessage, Message};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("message `{0}` not found")]
    NotFound(String),
    #[error("reply cycle through message `{0}`")]
    Cycle(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    SharedTopic,
    Interaction,
}

/// Undirected edge with `a < b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(x: &str, y: &str, kind: EdgeKind) -> Option<Self> {
        match x.cmp(y) {
            std::cmp::Ordering::Less => Some(Self { a: x.into(), b: y.into(), kind }),
            std::cmp::Ordering::Greater => Some(Self { a: y.into(), b: x.into(), kind }),
            std::cmp::Ordering::Equal => None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SimilarityGraph {
    pub nodes: Vec<String>,
    pub edges: BTreeSet<Edge>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphOptions {
    /// Treat mentions as direct interactions alongside replies.
    pub mention_edges: bool,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self { mention_edges: true }
    }
}

/// Links messages sharing a topic, and messages in direct interaction (a
/// reply, or one mentioning the other's author).
pub fn build_similarity_graph(msgs: &[EnrichedMessage], opts: GraphOptions) -> SimilarityGraph {
    let mut edges = BTreeSet::new();
    let mut by_topic: HashMap<&str, Vec<usize>> = HashMap::new();
    let mut by_id: HashMap<&str, usize> = HashMap::new();
    let mut by_author: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, m) in msgs.iter().enumerate() {
        for t in &m.topics {
            by_topic.entry(t.as_str()).or_default().push(i);
        }
        by_id.insert(m.base.id.as_str(), i);
        by_author.entry(m.base.author_id.as_str()).or_default().push(i);
    }
    let id = |i: usize| msgs[i].base.id.as_str();
    for members in by_topic.values() {
        for (k, &x) in members.iter().enumerate() {
            for &y in &members[k + 1..] {
                edges.extend(Edge::new(id(x), id(y), EdgeKind::SharedTopic));
            }
        }
    }
    for (i, m) in msgs.iter().enumerate() {
        if let Some(&parent) = m.base.reply_to.as_deref().and_then(|r| by_id.get(r)) {
            edges.extend(Edge::new(id(i), id(parent), EdgeKind::Interaction));
        }
        if opts.mention_edges {
            for mentioned in &m.base.mentions {
                for &j in by_author.get(mentioned.as_str()).into_iter().flatten() {
                    edges.extend(Edge::new(id(i), id(j), EdgeKind::Interaction));
                }
            }
        }
    }
    SimilarityGraph { nodes: msgs.iter().map(|m| m.base.id.clone()).collect(), edges }
}

/// Size of the reply tree rooted at `msg_id`, the root included.
pub fn conversation_length<'a, I>(msg_id: &str, msgs: I) -> Result<usize, GraphError>
where
    I: IntoIterator<Item = &'a Message>,
{
    let mut children: HashMap<&str, Vec<&str>> = HashMap::new();
    let mut known = false;
    for m in msgs {
        known |= m.id == msg_id;
        if let Some(parent) = m.reply_to.as_deref() {
            children.entry(parent).or_default().push(m.id.as_str());
        }
    }
    if !known {
        return Err(GraphError::NotFound(msg_id.to_string()));
    }
    let mut seen = std::collections::HashSet::new();
    let mut stack = vec![msg_id];
    while let Some(cur) = stack.pop() {
        if !seen.insert(cur) {
            return Err(GraphError::Cycle(cur.to_string()));
        }
        stack.extend(children.get(cur).into_iter().flatten().copied());
    }
    Ok(seen.len())
}

/// Fails if following `reply_to` links from any message revisits it.
/// Replies to messages outside the set end the chain.
pub fn check_reply_forest<'a, I>(msgs: I) -> Result<(), GraphError>
where
    I: IntoIterator<Item = &'a Message>,
{
    let parent: HashMap<&str, Option<&str>> = msgs.into_iter().map(|m| (m.id.as_str(), m.reply_to.as_deref())).collect();
    // 0 = unvisited, 1 = on current path, 2 = known acyclic
    let mut state: HashMap<&str, u8> = HashMap::with_capacity(parent.len());
    let mut ids: Vec<&str> = parent.keys().copied().collect();
    ids.sort_unstable();
    for start in ids {
        let mut path = Vec::new();
        let mut cur = Some(start);
        while let Some(id) = cur {
            match state.get(id) {
                Some(2) => break,
                Some(1) => return Err(GraphError::Cycle(id.to_string())),
                _ => {}
            }
            state.insert(id, 1);
            path.push(id);
            cur = parent.get(id).copied().flatten().filter(|p| parent.contains_key(p));
        }
        for id in path {
            state.insert(id, 2);
        }
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::analytics::testutil::enriched;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// O(n²) pairwise check of the edge rules.
    pub(crate) fn brute_force(msgs: &[EnrichedMessage], opts: GraphOptions) -> BTreeSet<Edge> {
        let mut out = BTreeSet::new();
        for a in msgs {
            for b in msgs {
                if a.base.id >= b.base.id {
                    continue;
                }
                if a.topics.intersection(&b.topics).next().is_some() {
                    out.insert(Edge::new(&a.base.id, &b.base.id, EdgeKind::SharedTopic).unwrap());
                }
                let reply = b.base.reply_to.as_ref() == Some(&a.base.id) || a.base.reply_to.as_ref() == Some(&b.base.id);
                let mention = opts.mention_edges
                    && (a.base.mentions.contains(&b.base.author_id) || b.base.mentions.contains(&a.base.author_id));
                if reply || mention {
                    out.insert(Edge::new(&a.base.id, &b.base.id, EdgeKind::Interaction).unwrap());
                }
            }
        }
        out
    }

    pub(crate) fn random_messages(rng: &mut ChaCha8Rng, n: usize) -> Vec<EnrichedMessage> {
        let topics = ["culture", "security", "health", "mobility", "food"];
        (0..n)
            .map(|i| {
                let mut m = enriched(&format!("m{i:02}"), i as i64, None, true);
                m.base.author_id = format!("u{}", rng.gen_range(0..6));
                for t in topics {
                    if rng.gen_bool(0.15) {
                        m.topics.insert(t.to_string());
                    }
                }
                if i > 0 && rng.gen_bool(0.3) {
                    m.base.reply_to = Some(format!("m{:02}", rng.gen_range(0..i)));
                }
                if rng.gen_bool(0.2) {
                    m.base.mentions.push(format!("u{}", rng.gen_range(0..8)));
                }
                m
            })
            .collect()
    }

    #[test]
    fn no_edges_without_shared_topics_or_replies() {
        let mut a = enriched("a", 0, None, true);
        a.topics.insert("culture".into());
        let mut b = enriched("b", 1, None, true);
        b.topics.insert("health".into());
        assert!(build_similarity_graph(&[a, b], GraphOptions::default()).edges.is_empty());
    }

    #[test]
    fn reply_makes_interaction_edge() {
        let a = enriched("a", 0, None, true);
        let mut b = enriched("b", 1, None, true);
        b.base.reply_to = Some("a".into());
        let g = build_similarity_graph(&[a, b], GraphOptions::default());
        assert_eq!(g.edges.into_iter().collect::<Vec<_>>(), vec![Edge {
            a: "a".into(),
            b: "b".into(),
            kind: EdgeKind::Interaction
        }]);
    }

    #[test]
    fn matches_pairwise_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for round in 0..50 {
            let msgs = random_messages(&mut rng, 20);
            let opts = GraphOptions { mention_edges: round % 2 == 0 };
            assert_eq!(build_similarity_graph(&msgs, opts).edges, brute_force(&msgs, opts));
        }
    }

    #[test]
    fn conversation_examples() {
        let mk = |id: &str, parent: Option<&str>| {
            let mut m = enriched(id, 0, None, true).base;
            m.reply_to = parent.map(String::from);
            m
        };
        let solo = [mk("root", None)];
        assert_eq!(conversation_length("root", &solo), Ok(1));
        let chain = [mk("root", None), mk("r1", Some("root")), mk("r2", Some("r1"))];
        assert_eq!(conversation_length("root", &chain), Ok(3));
        let fan = [mk("root", None), mk("r1", Some("root")), mk("r2", Some("root"))];
        assert_eq!(conversation_length("root", &fan), Ok(3));
        assert_eq!(conversation_length("r1", &fan), Ok(1));
        assert_eq!(conversation_length("zz", &fan), Err(GraphError::NotFound("zz".into())));
        let cyc = [mk("a", Some("b")), mk("b", Some("a"))];
        assert!(matches!(check_reply_forest(&cyc), Err(GraphError::Cycle(_))));
        assert!(matches!(conversation_length("a", &cyc), Err(GraphError::Cycle(_))));
        assert_eq!(check_reply_forest(&chain), Ok(()));
        // dangling parent is fine
        assert_eq!(check_reply_forest(&[mk("x", Some("missing"))]), Ok(()));
    }

    #[test]
    fn conversation_recurrence_on_random_forests() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let msgs: Vec<Message> = random_messages(&mut rng, 40).into_iter().map(|m| m.base).collect();
            for m in &msgs {
                let children: Vec<&Message> = msgs.iter().filter(|c| c.reply_to.as_ref() == Some(&m.id)).collect();
                let sum: usize = children.iter().map(|c| conversation_length(&c.id, &msgs).unwrap()).sum();
                assert_eq!(conversation_length(&m.id, &msgs).unwrap(), 1 + sum);
            }
        }
    }
}
