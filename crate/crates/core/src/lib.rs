//! Retrieval of Asset Administration Shell (AAS) models that are similar to
//! a query model.
//!
//! The pipeline: parse AAS JSON documents, map them onto an RDF graph,
//! optionally narrow the candidate set with a SPARQL constraint, embed graph
//! entities by running walk sentences through a skip-gram trainer, aggregate
//! entity vectors into one vector per shell, and rank candidates against the
//! query by a similarity metric with a configurable decision policy.
//!
//! Every randomized stage takes an explicit seed and produces identical
//! output for identical input, seed, and thread count.

pub mod aas;
pub mod aas2rdf;
pub mod corpus;
mod encoding;
pub mod matcher;
pub mod pipeline;
pub mod rdf;
pub mod seed;
pub mod skipgram;
pub mod sparql;
pub mod walks;

pub use aas::{AASDocument, AasError, AssetKind, Shell, Submodel, SubmodelElement, ValueType};
pub use aas2rdf::{map_document, subgraph_of, MapError, MappingRules, Vocabulary};
pub use rdf::{Graph, RdfError, Term, Triple};
pub use corpus::{
    builtin_templates, eval_retrieval, gen_corpus, CorpusError, CorpusSpec, GroundTruth,
    RetrievalMetrics,
};
pub use matcher::{
    apply_policy, cosine, euclidean, graph_vector, rank, CandidateSet, DecisionPolicy,
    GraphVectorStrategy, MatchError, MatchResult, SimilarityMetric,
};
pub use pipeline::{run_pipeline, MatchReport, PipelineConfig, PipelineError};
pub use skipgram::{
    build_vocab, gradient_check, train, EmbeddingTable, Hyperparams, SkipgramError, Vocab,
};
pub use sparql::{eval_ask, eval_select, parse_query, prefilter, Query, SparqlError};
pub use walks::{generate_walks, WalkConfig, WalkCorpus, WalkError, WalkStrategy};
