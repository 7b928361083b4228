//! Synthetic dataset generators and categorical CSV ingestion.

mod ingest;
mod synthetic;

pub use ingest::{ingest_categorical, ingest_categorical_path, CategoricalSchema, Ingested, RowFilter};
pub use synthetic::{gen_synthetic1, gen_synthetic2, Synthetic1Spec, Synthetic2Spec};
