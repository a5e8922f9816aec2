//! Shipped resources, embedded so the binary works without a data directory.

use crate::analytics::CommunityFixture;

pub const GAZETTEER_CSV: &str = include_str!("../fixtures/gazetteer/rome.csv");
pub const TAXONOMY_JSON: &str = include_str!("../fixtures/resources/taxonomy.json");
pub const EMOTION_LEXICON_CSV: &str = include_str!("../fixtures/resources/emotion_lexicon.csv");
pub const TEMPLATES_JSON: &str = include_str!("../fixtures/resources/templates.json");
pub const PRODUCTS_JSON: &str = include_str!("../fixtures/resources/products.json");
pub const PHRASES_JSON: &str = include_str!("../fixtures/resources/phrases.json");
pub const EVENT_JSON: &str = include_str!("../fixtures/events/rome-oct15.json");
pub const SCENARIO_JSON: &str = include_str!("../fixtures/scenarios/rome-oct15.json");

const COMMUNITY_JSON: [&str; 12] = [
    include_str!("../fixtures/communities/weight-nine-triangle.json"),
    include_str!("../fixtures/communities/two-cliques-bridge.json"),
    include_str!("../fixtures/communities/dense-core-with-periphery.json"),
    include_str!("../fixtures/communities/whole-graph.json"),
    include_str!("../fixtures/communities/no-edges.json"),
    include_str!("../fixtures/communities/chat-room.json"),
    include_str!("../fixtures/communities/random-0.json"),
    include_str!("../fixtures/communities/random-1.json"),
    include_str!("../fixtures/communities/random-2.json"),
    include_str!("../fixtures/communities/random-3.json"),
    include_str!("../fixtures/communities/random-4.json"),
    include_str!("../fixtures/communities/random-5.json"),
];

pub fn community_fixtures() -> Vec<CommunityFixture> {
    COMMUNITY_JSON
        .iter()
        .map(|s| serde_json::from_str(s).expect("shipped community fixture is valid JSON"))
        .collect()
}
