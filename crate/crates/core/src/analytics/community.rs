use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::graph::GraphOptions;
use crate::model::Message;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CommunityError {
    #[error("community size must be at least 2, got {0}")]
    TooSmall(usize),
    #[error("community size {k} exceeds the {authors} observed authors")]
    TooLarge { k: usize, authors: usize },
}

/// Undirected weighted author graph; weights count interactions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InteractionGraph {
    adjacency: BTreeMap<String, BTreeMap<String, u64>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Community {
    pub members: BTreeSet<String>,
    pub internal_weight: u64,
}

impl InteractionGraph {
    pub fn add_author(&mut self, a: &str) {
        if !self.adjacency.contains_key(a) {
            self.adjacency.insert(a.to_string(), BTreeMap::new());
        }
    }

    pub fn add_interaction(&mut self, a: &str, b: &str, weight: u64) {
        self.add_author(a);
        self.add_author(b);
        if a == b || weight == 0 {
            return;
        }
        *self.adjacency.get_mut(a).and_then(|m| Some(m.entry(b.to_string()).or_insert(0))).unwrap() += weight;
        *self.adjacency.get_mut(b).and_then(|m| Some(m.entry(a.to_string()).or_insert(0))).unwrap() += weight;
    }

    /// Replies link the reply's author to the parent's author; mentions link
    /// the author to each mentioned account.
    pub fn from_messages<'a, I>(msgs: I, opts: GraphOptions) -> Self
    where
        I: IntoIterator<Item = &'a Message>,
    {
        let msgs: Vec<&Message> = msgs.into_iter().collect();
        let author_of: HashMap<&str, &str> = msgs.iter().map(|m| (m.id.as_str(), m.author_id.as_str())).collect();
        let mut g = InteractionGraph::default();
        for m in msgs {
            g.observe(m, author_of.get(m.reply_to.as_deref().unwrap_or("")).copied(), opts);
        }
        g
    }

    /// Folds one message in, given the author of the message it replies to.
    pub fn observe(&mut self, m: &Message, parent_author: Option<&str>, opts: GraphOptions) {
        self.add_author(&m.author_id);
        if let Some(p) = parent_author {
            self.add_interaction(&m.author_id, p, 1);
        }
        if opts.mention_edges {
            for who in &m.mentions {
                self.add_interaction(&m.author_id, who, 1);
            }
        }
    }

    pub fn authors(&self) -> impl Iterator<Item = &str> {
        self.adjacency.keys().map(String::as_str)
    }

    pub fn author_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn weight(&self, a: &str, b: &str) -> u64 {
        self.adjacency.get(a).and_then(|m| m.get(b)).copied().unwrap_or(0)
    }

    /// Edges with `a < b`.
    pub fn edges(&self) -> impl Iterator<Item = (&str, &str, u64)> {
        self.adjacency
            .iter()
            .flat_map(|(a, nb)| nb.iter().filter(move |(b, _)| a < *b).map(move |(b, &w)| (a.as_str(), b.as_str(), w)))
    }

    pub fn internal_weight(&self, members: &BTreeSet<String>) -> u64 {
        self.edges().filter(|(a, b, _)| members.contains(*a) && members.contains(*b)).map(|(_, _, w)| w).sum()
    }
}

/// Greedy densest-k author set: seed with the heaviest edge, then keep
/// adding the author with the largest weight into the current set. Ties go
/// to the lexicographically smallest id.
pub fn extract_community(g: &InteractionGraph, k: usize) -> Result<Community, CommunityError> {
    if k < 2 {
        return Err(CommunityError::TooSmall(k));
    }
    let n = g.author_count();
    if k > n {
        return Err(CommunityError::TooLarge { k, authors: n });
    }
    let seed = g
        .edges()
        .fold(None::<(&str, &str, u64)>, |best, e| match best {
            Some(b) if b.2 >= e.2 => Some(b),
            _ => Some(e),
        })
        .map(|(a, b, _)| (a, b))
        .unwrap_or_else(|| {
            let mut it = g.authors();
            (it.next().unwrap_or_default(), it.next().unwrap_or_default())
        });
    let mut members: BTreeSet<String> = BTreeSet::new();
    let mut gain: BTreeMap<&str, u64> = g.authors().map(|a| (a, 0)).collect();
    let mut internal = 0u64;
    let mut admit = |who: &str, members: &mut BTreeSet<String>, gain: &mut BTreeMap<&str, u64>| {
        internal += gain.remove(who).unwrap_or(0);
        members.insert(who.to_string());
        for (nb, &w) in g.adjacency.get(who).into_iter().flatten() {
            if let Some(v) = gain.get_mut(nb.as_str()) {
                *v += w;
            }
        }
    };
    admit(seed.0, &mut members, &mut gain);
    admit(seed.1, &mut members, &mut gain);
    while members.len() < k {
        // BTreeMap iterates ids in order, so `>` keeps the smallest on ties
        let mut best: Option<(&str, u64)> = None;
        for (&who, &w) in &gain {
            if best.is_none_or(|(_, bw)| w > bw) {
                best = Some((who, w));
            }
        }
        let Some((who, _)) = best else { break };
        admit(who, &mut members, &mut gain);
    }
    Ok(Community { members, internal_weight: internal })
}

#[derive(Debug, Clone, Deserialize)]
pub struct CommunityFixture {
    pub name: String,
    pub authors: Vec<String>,
    pub edges: Vec<(String, String, u64)>,
    pub k: usize,
}

impl CommunityFixture {
    pub fn graph(&self) -> InteractionGraph {
        let mut g = InteractionGraph::default();
        for a in &self.authors {
            g.add_author(a);
        }
        for (a, b, w) in &self.edges {
            g.add_interaction(a, b, *w);
        }
        g
    }
}
