use rand::seq::SliceRandom;
use rand::Rng;
use serde::Deserialize;

use crate::model::TemplateCategory;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lang {
    En,
    It,
}

impl Lang {
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        if rng.gen_bool(0.5) {
            Lang::En
        } else {
            Lang::It
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bilingual {
    pub en: Vec<String>,
    pub it: Vec<String>,
}

impl Bilingual {
    pub fn get(&self, lang: Lang) -> &[String] {
        match lang {
            Lang::En => &self.en,
            Lang::It => &self.it,
        }
    }

    pub fn pick<R: Rng>(&self, lang: Lang, rng: &mut R) -> &str {
        self.get(lang).choose(rng).expect("phrase bank is non-empty")
    }

    pub fn all(&self) -> impl Iterator<Item = &String> {
        self.en.iter().chain(&self.it)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeoPhrases {
    pub spatial: Bilingual,
    pub plain: Bilingual,
    pub fake: Bilingual,
    pub fake_names: Vec<String>,
    pub alias_word: Bilingual,
    pub canonical_word: Bilingual,
    pub misspelled: Bilingual,
    pub mixed: Bilingual,
}

/// Sentence banks used by the generators. `{place}`, `{fake}` and
/// `{typo}` are slots.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhraseBanks {
    pub violence: Bilingual,
    pub law_infringement: Bilingual,
    pub injury: Bilingual,
    pub joyful: Bilingual,
    pub curiosity: Bilingual,
    pub event_chatter: Bilingual,
    pub gathering: Bilingual,
    pub city_chatter: Bilingual,
    pub remote_event: Bilingual,
    pub remote_chatter: Bilingual,
    pub geocorpus: GeoPhrases,
}

impl PhraseBanks {
    pub fn from_json(json: &str) -> Result<Self, String> {
        let b: PhraseBanks = serde_json::from_str(json).map_err(|e| e.to_string())?;
        let banks = [
            &b.violence,
            &b.law_infringement,
            &b.injury,
            &b.joyful,
            &b.curiosity,
            &b.event_chatter,
            &b.gathering,
            &b.city_chatter,
            &b.remote_event,
            &b.remote_chatter,
            &b.geocorpus.spatial,
            &b.geocorpus.plain,
            &b.geocorpus.fake,
            &b.geocorpus.alias_word,
            &b.geocorpus.canonical_word,
            &b.geocorpus.misspelled,
            &b.geocorpus.mixed,
        ];
        if banks.iter().any(|bank| bank.en.is_empty() || bank.it.is_empty()) || b.geocorpus.fake_names.is_empty() {
            return Err("every phrase bank needs English and Italian entries".into());
        }
        Ok(b)
    }

    pub fn embedded() -> Self {
        Self::from_json(crate::fixtures::PHRASES_JSON).expect("shipped phrase banks are valid")
    }

    /// Bank whose sentences carry exactly this template category.
    pub fn category(&self, c: TemplateCategory) -> Option<&Bilingual> {
        match c {
            TemplateCategory::Violence => Some(&self.violence),
            TemplateCategory::LawInfringement => Some(&self.law_infringement),
            TemplateCategory::Injury => Some(&self.injury),
            TemplateCategory::Joyful => Some(&self.joyful),
            TemplateCategory::Curiosity => Some(&self.curiosity),
            TemplateCategory::Other => None,
        }
    }

    /// Banks expected to carry no template category at all.
    pub fn neutral_banks(&self) -> [&Bilingual; 5] {
        [&self.event_chatter, &self.gathering, &self.city_chatter, &self.remote_event, &self.remote_chatter]
    }
}

pub fn fill(template: &str, slot: &str, value: &str) -> String {
    template.replace(slot, value)
}
