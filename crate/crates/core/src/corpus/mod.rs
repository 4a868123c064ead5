//! Synthetic evaluation corpus: template-derived shell documents with
//! controlled heterogeneity, plus retrieval-quality scoring.
//!
//! Generation starts from template families (submodel skeletons whose
//! properties carry synonym pools) and perturbs each instance with a
//! seeded generator: property names flip to pool synonyms with
//! `synonym_rate`, optional submodels vanish with `drop_rate`. Semantic
//! ids are never perturbed; they are the stable cross-instance signal a
//! matcher is supposed to exploit. Ground truth records which template
//! produced each document, and [`eval_retrieval`] scores ranked result
//! lists against it with precision@k and mean reciprocal rank.

mod templates;

pub use templates::builtin_templates;

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::aas::{AASDocument, AssetKind, Shell, Submodel, SubmodelElement, ValueType};
use crate::seed;

/// Namespace for the semantic-id IRIs minted for template content.
pub const SEMANTIC_NS: &str = "https://aasmatch.example/sem/";

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error("property `{id_short}` has no synonym pool in the spec")]
    UnknownProperty { id_short: String },
    #[error("query `{query}` missing from ground truth")]
    MissingGroundTruth { query: String },
    #[error("query `{query}` appears in its own ranked list")]
    SelfMatch { query: String },
    #[error("k must be at least 1")]
    InvalidK,
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("ground truth file line {line}: {message}")]
    BadTruthLine { line: usize, message: String },
}

mod value_type_serde {
    use super::ValueType;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(vt: &ValueType, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(vt.name())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<ValueType, D::Error> {
        let name = String::deserialize(d)?;
        ValueType::parse_name(&name)
            .ok_or_else(|| de::Error::custom(format!("unknown value type `{name}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateProperty {
    /// Canonical name; must be a member of `synonyms`.
    pub id_short: String,
    pub synonyms: Vec<String>,
    #[serde(with = "value_type_serde")]
    pub value_type: ValueType,
    pub value: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemplateSubmodel {
    pub id_short: String,
    /// Mandatory submodels survive every drop rate.
    pub mandatory: bool,
    pub properties: Vec<TemplateProperty>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    /// Stable template id, also the ground-truth label.
    pub id: String,
    /// Prefix for generated shell idShorts.
    pub label: String,
    pub submodels: Vec<TemplateSubmodel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub templates: Vec<Template>,
    pub instances_per_template: usize,
    /// Probability each property idShort flips to another pool member.
    pub synonym_rate: f64,
    /// Probability each non-mandatory submodel is omitted.
    pub drop_rate: f64,
    pub seed: u64,
}

impl CorpusSpec {
    /// The built-in five-family spec.
    pub fn builtin(
        instances_per_template: usize,
        synonym_rate: f64,
        drop_rate: f64,
        seed: u64,
    ) -> Self {
        CorpusSpec {
            templates: builtin_templates(),
            instances_per_template,
            synonym_rate,
            drop_rate,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let fail = |msg: String| Err(CorpusError::InvalidSpec(msg));
        if self.templates.len() < 2 {
            return fail("at least 2 templates are required".to_string());
        }
        if self.instances_per_template == 0 {
            return fail("instances_per_template must be positive".to_string());
        }
        for (name, rate) in [("synonym_rate", self.synonym_rate), ("drop_rate", self.drop_rate)] {
            if !(0.0..=1.0).contains(&rate) {
                return fail(format!("{name} {rate} outside [0,1]"));
            }
        }
        let mut template_ids = std::collections::BTreeSet::new();
        for t in &self.templates {
            if !template_ids.insert(&t.id) {
                return fail(format!("duplicate template id `{}`", t.id));
            }
            if t.submodels.is_empty() {
                return fail(format!("template `{}` has no submodels", t.id));
            }
            if !t.submodels.iter().any(|s| s.mandatory) {
                return fail(format!("template `{}` has no mandatory submodel", t.id));
            }
            for s in &t.submodels {
                for p in &s.properties {
                    if !p.synonyms.contains(&p.id_short) {
                        return fail(format!(
                            "pool for `{}` does not contain its canonical name",
                            p.id_short
                        ));
                    }
                    if !p.value_type.accepts(&p.value) {
                        return fail(format!(
                            "value `{}` is not a valid {}",
                            p.value,
                            p.value_type.name()
                        ));
                    }
                }
            }
        }
        // Lookups during perturbation are by bare name, so a name reused
        // with a different pool or mandatory flag would be ambiguous.
        self.pool_index()?;
        self.mandatory_index()?;
        Ok(())
    }

    /// Pool member -> full pool, rejecting conflicting pools.
    fn pool_index(&self) -> Result<BTreeMap<&str, &[String]>, CorpusError> {
        let mut index: BTreeMap<&str, &[String]> = BTreeMap::new();
        for p in self
            .templates
            .iter()
            .flat_map(|t| &t.submodels)
            .flat_map(|s| &s.properties)
        {
            for member in &p.synonyms {
                match index.get(member.as_str()) {
                    Some(existing) if *existing != p.synonyms.as_slice() => {
                        return Err(CorpusError::InvalidSpec(format!(
                            "`{member}` belongs to two different synonym pools"
                        )));
                    }
                    _ => {
                        index.insert(member, &p.synonyms);
                    }
                }
            }
        }
        Ok(index)
    }

    /// Submodel idShort -> mandatory flag, rejecting conflicts.
    fn mandatory_index(&self) -> Result<BTreeMap<&str, bool>, CorpusError> {
        let mut index = BTreeMap::new();
        for s in self.templates.iter().flat_map(|t| &t.submodels) {
            match index.get(s.id_short.as_str()) {
                Some(&flag) if flag != s.mandatory => {
                    return Err(CorpusError::InvalidSpec(format!(
                        "submodel `{}` is mandatory in one template and optional in another",
                        s.id_short
                    )));
                }
                _ => {
                    index.insert(s.id_short.as_str(), s.mandatory);
                }
            }
        }
        Ok(index)
    }
}

/// Which template produced each document, plus what the perturbation did.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GroundTruth {
    template_of: BTreeMap<String, String>,
    perturbations: BTreeMap<String, Vec<String>>,
}

impl GroundTruth {
    pub fn template_of(&self, doc_id: &str) -> Option<&str> {
        self.template_of.get(doc_id).map(String::as_str)
    }

    pub fn perturbations_of(&self, doc_id: &str) -> &[String] {
        self.perturbations.get(doc_id).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn len(&self) -> usize {
        self.template_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.template_of.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.template_of.iter().map(|(d, t)| (d.as_str(), t.as_str()))
    }

    /// TSV lines `doc_id<TAB>template_id`, sorted by doc id.
    pub fn save(&self, path: &Path) -> Result<(), CorpusError> {
        let mut out = String::new();
        for (doc, template) in &self.template_of {
            out.push_str(doc);
            out.push('\t');
            out.push_str(template);
            out.push('\n');
        }
        fs::write(path, out)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path)?;
        let mut truth = GroundTruth::default();
        for (idx, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let (doc, template) = line.split_once('\t').ok_or(CorpusError::BadTruthLine {
                line: idx + 1,
                message: "expected doc_id<TAB>template_id".to_string(),
            })?;
            if truth
                .template_of
                .insert(doc.to_string(), template.to_string())
                .is_some()
            {
                return Err(CorpusError::BadTruthLine {
                    line: idx + 1,
                    message: format!("duplicate doc id `{doc}`"),
                });
            }
        }
        Ok(truth)
    }
}

/// Generate the corpus: `instances_per_template` documents per template,
/// each independently perturbed with a seed derived from the spec seed,
/// the template id, and the instance index.
pub fn gen_corpus(spec: &CorpusSpec) -> Result<(Vec<AASDocument>, GroundTruth), CorpusError> {
    spec.validate()?;
    let mut documents = Vec::new();
    let mut truth = GroundTruth::default();
    for template in &spec.templates {
        for instance in 0..spec.instances_per_template {
            let doc = instantiate(template, instance);
            let doc_seed = seed::derive_indexed(spec.seed, &format!("doc:{}", template.id), instance as u64);
            let (doc, log) = perturb(&doc, spec, doc_seed)?;
            let doc_id = doc.shells[0].id.clone();
            truth.template_of.insert(doc_id.clone(), template.id.clone());
            truth.perturbations.insert(doc_id, log);
            documents.push(doc);
        }
    }
    Ok((documents, truth))
}

/// The unperturbed instance of a template: canonical names, fixed values,
/// ids minted from the template id and instance index.
fn instantiate(template: &Template, instance: usize) -> AASDocument {
    let base = format!("urn:aasmatch:corpus:{}:{instance:03}", template.id);
    let submodels: Vec<Submodel> = template
        .submodels
        .iter()
        .map(|sm| Submodel {
            id: format!("{base}:{}", sm.id_short),
            id_short: sm.id_short.clone(),
            semantic_id: Some(format!("{SEMANTIC_NS}{}/{}", template.id, sm.id_short)),
            elements: sm
                .properties
                .iter()
                .map(|p| SubmodelElement {
                    id_short: p.id_short.clone(),
                    semantic_id: Some(format!(
                        "{SEMANTIC_NS}{}/{}/{}",
                        template.id,
                        sm.id_short,
                        p.id_short.replace(' ', "-")
                    )),
                    value_type: p.value_type,
                    value: Some(p.value.clone()),
                })
                .collect(),
        })
        .collect();
    AASDocument {
        shells: vec![Shell {
            id: base.clone(),
            id_short: format!("{}{instance}", template.label),
            asset_kind: AssetKind::Instance,
            submodel_refs: submodels.iter().map(|s| s.id.clone()).collect(),
        }],
        submodels,
    }
}

/// Apply seeded heterogeneity to one document: optional submodels drop
/// with `drop_rate`, property names flip to another pool synonym with
/// `synonym_rate`. Semantic ids and values stay put. Returns the new
/// document and a human-readable log of what changed.
pub fn perturb(
    doc: &AASDocument,
    spec: &CorpusSpec,
    seed_value: u64,
) -> Result<(AASDocument, Vec<String>), CorpusError> {
    let pools = spec.pool_index()?;
    let mandatory = spec.mandatory_index()?;
    let mut rng = seed::rng(seed_value);
    let mut log = Vec::new();
    let mut out = doc.clone();

    let mut dropped: Vec<String> = Vec::new();
    out.submodels.retain(|sm| {
        // Submodels the spec does not know are kept; only known optional
        // ones may drop.
        let keep = mandatory.get(sm.id_short.as_str()).copied().unwrap_or(true)
            || !rng.gen_bool(spec.drop_rate);
        if !keep {
            dropped.push(sm.id.clone());
            log.push(format!("drop {}", sm.id_short));
        }
        keep
    });
    for shell in &mut out.shells {
        shell.submodel_refs.retain(|r| !dropped.contains(r));
    }

    for sm in &mut out.submodels {
        for element in &mut sm.elements {
            let pool = pools
                .get(element.id_short.as_str())
                .ok_or_else(|| CorpusError::UnknownProperty {
                    id_short: element.id_short.clone(),
                })?;
            if rng.gen_bool(spec.synonym_rate) {
                let others: Vec<&String> =
                    pool.iter().filter(|s| **s != element.id_short).collect();
                if !others.is_empty() {
                    let pick = others[rng.gen_range(0..others.len())].clone();
                    log.push(format!("rename {}/{} -> {pick}", sm.id_short, element.id_short));
                    element.id_short = pick;
                }
            }
        }
    }
    Ok((out, log))
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryDetail {
    pub query: String,
    /// Rank of the first same-template candidate, if any reached the list.
    pub first_hit_rank: Option<usize>,
    pub hits_in_top_k: usize,
    pub reciprocal_rank: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalMetrics {
    /// Mean over queries of |same-template in top k| / k.
    pub precision_at_k: f64,
    /// Mean over queries of 1/first-hit-rank (0 when no hit listed).
    pub mean_reciprocal_rank: f64,
    pub per_query: Vec<QueryDetail>,
}

/// One query's ranked candidate ids, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList {
    pub query: String,
    pub ranked: Vec<String>,
}

/// Score ranked lists against ground truth. A candidate is relevant when
/// it shares the query's source template. Self-matches must already be
/// excluded from the lists.
pub fn eval_retrieval(
    results: &[RankedList],
    truth: &GroundTruth,
    k: usize,
) -> Result<RetrievalMetrics, CorpusError> {
    if k == 0 {
        return Err(CorpusError::InvalidK);
    }
    let mut per_query = Vec::with_capacity(results.len());
    let mut precision_sum = 0.0;
    let mut rr_sum = 0.0;
    for list in results {
        let query_template =
            truth
                .template_of(&list.query)
                .ok_or_else(|| CorpusError::MissingGroundTruth {
                    query: list.query.clone(),
                })?;
        if list.ranked.contains(&list.query) {
            return Err(CorpusError::SelfMatch {
                query: list.query.clone(),
            });
        }
        let mut first_hit_rank = None;
        let mut hits_in_top_k = 0;
        for (pos, candidate) in list.ranked.iter().enumerate() {
            let candidate_template =
                truth
                    .template_of(candidate)
                    .ok_or_else(|| CorpusError::MissingGroundTruth {
                        query: candidate.clone(),
                    })?;
            if candidate_template == query_template {
                if first_hit_rank.is_none() {
                    first_hit_rank = Some(pos + 1);
                }
                if pos < k {
                    hits_in_top_k += 1;
                }
            }
        }
        let reciprocal_rank = match first_hit_rank {
            Some(rank) if rank <= list.ranked.len() => 1.0 / rank as f64,
            _ => 0.0,
        };
        precision_sum += hits_in_top_k as f64 / k as f64;
        rr_sum += reciprocal_rank;
        per_query.push(QueryDetail {
            query: list.query.clone(),
            first_hit_rank,
            hits_in_top_k,
            reciprocal_rank,
        });
    }
    let n = results.len().max(1) as f64;
    Ok(RetrievalMetrics {
        precision_at_k: precision_sum / n,
        mean_reciprocal_rank: rr_sum / n,
        per_query,
    })
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 1..=k {
        // Exact at every step: c holds C(n, i-1) * remaining factor.
        c = c * (n - k + i) as u128 / i as u128;
    }
    c
}

/// Expected reciprocal rank of the first relevant hit when `r` relevant
/// candidates sit at uniformly random positions among `n`, truncated at
/// rank `k`. Baseline for judging learned rankings.
pub fn expected_random_reciprocal_rank(n: usize, r: usize, k: usize) -> f64 {
    if r == 0 || n == 0 || k == 0 || r > n {
        return 0.0;
    }
    let total = binomial(n as u64, r as u64) as f64;
    let last = k.min(n - r + 1);
    (1..=last)
        .map(|j| {
            let ways = binomial((n - j) as u64, (r - 1) as u64) as f64;
            (1.0 / j as f64) * ways / total
        })
        .sum()
}
