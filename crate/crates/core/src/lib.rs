//! Enrichment and live analytics for geo-tagged social message streams.

pub mod analytics;
pub mod enrichment;
pub mod fixtures;
pub mod gazetteer;
pub mod ingestion;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod service;
pub mod text;
