//! Deterministic mapping from AAS documents onto RDF graphs.
//!
//! Every shell, submodel, and element gets a minted IRI derived from its id
//! by percent-encoding, so the mapping is injective and needs no blank
//! nodes. The emitted triples follow a fixed vocabulary; the full mapping
//! table lives in `docs/rdf-mapping.md`. Element order inside a submodel is
//! deliberately not encoded.
//!
//! Per shell: `hasIdShort` and `assetKind` literals plus one `hasSubmodel`
//! edge per resolved reference. Per submodel: `hasIdShort`, optional
//! `hasSemanticId` (an IRI object, shared across documents that use the
//! same template), and one `hasElement` edge per element. Per element:
//! `hasIdShort`, `hasValueType`, optional `hasSemanticId`, and the value as
//! a typed literal under `hasValue`.

use thiserror::Error;

use crate::aas::AASDocument;
use crate::encoding::encode_iri_segment;
use crate::rdf::{Graph, Term, Triple};

/// Namespace for the fixed mapping predicates.
pub const VOCAB_NS: &str = "https://aasmatch.example/vocab#";
/// Default namespace under which entity IRIs are minted.
pub const DEFAULT_NAMESPACE: &str = "https://aasmatch.example/id/";

#[derive(Debug, Error)]
pub enum MapError {
    #[error("namespace `{0}` must be an absolute IRI ending in `/` or `#`")]
    InvalidNamespace(String),
    #[error("shell `{shell_id}` references unknown submodel `{submodel_id}`")]
    UnresolvedReference { shell_id: String, submodel_id: String },
    #[error("semantic id `{0}` is not a valid IRI")]
    InvalidSemanticId(String),
    #[error("`{0}` does not occur as a subject in the graph")]
    UnknownShell(String),
}

/// The fixed predicate vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub has_submodel: String,
    pub has_element: String,
    pub has_id_short: String,
    pub has_semantic_id: String,
    pub has_value: String,
    pub has_value_type: String,
    pub asset_kind: String,
    pub rdf_type: String,
}

impl Default for Vocabulary {
    fn default() -> Self {
        let p = |name: &str| format!("{VOCAB_NS}{name}");
        Vocabulary {
            has_submodel: p("hasSubmodel"),
            has_element: p("hasElement"),
            has_id_short: p("hasIdShort"),
            has_semantic_id: p("hasSemanticId"),
            has_value: p("hasValue"),
            has_value_type: p("hasValueType"),
            asset_kind: p("assetKind"),
            // reserved for vocabulary completeness; the mapping emits no
            // type triples (entity roles are implied by the predicates)
            rdf_type: "http://www.w3.org/1999/02/22-rdf-syntax-ns#type".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingRules {
    pub namespace: String,
    pub vocab: Vocabulary,
}

impl Default for MappingRules {
    fn default() -> Self {
        MappingRules {
            namespace: DEFAULT_NAMESPACE.to_string(),
            vocab: Vocabulary::default(),
        }
    }
}

impl MappingRules {
    pub fn new(namespace: impl Into<String>) -> Result<Self, MapError> {
        let namespace = namespace.into();
        let absolute = namespace.contains(':');
        let delimited = namespace.ends_with('/') || namespace.ends_with('#');
        if Term::iri(namespace.clone()).is_err() || !absolute || !delimited {
            return Err(MapError::InvalidNamespace(namespace));
        }
        Ok(MappingRules {
            namespace,
            vocab: Vocabulary::default(),
        })
    }

    /// IRI minted for a shell or submodel id.
    pub fn entity_iri(&self, id: &str) -> Term {
        // encoded segments contain only unreserved characters, so the
        // result is always a valid IRI
        Term::iri(format!("{}{}", self.namespace, encode_iri_segment(id))).expect("encoded IRI")
    }

    /// IRI minted for an element inside a submodel.
    pub fn element_iri(&self, submodel_id: &str, element_id_short: &str) -> Term {
        Term::iri(format!(
            "{}{}/{}",
            self.namespace,
            encode_iri_segment(submodel_id),
            encode_iri_segment(element_id_short)
        ))
        .expect("encoded IRI")
    }

    fn predicate(&self, iri: &str) -> Term {
        Term::iri(iri).expect("vocabulary IRI")
    }
}

/// Map a validated document to its RDF graph. Calling this twice on equal
/// inputs yields graphs with byte-identical canonical serialization.
pub fn map_document(doc: &AASDocument, rules: &MappingRules) -> Result<Graph, MapError> {
    let mut graph = Graph::new();
    let vocab = &rules.vocab;
    let lit = |s: &str| Term::literal(s);

    for shell in &doc.shells {
        let shell_iri = rules.entity_iri(&shell.id);
        push(&mut graph, &shell_iri, rules.predicate(&vocab.has_id_short), lit(&shell.id_short));
        push(&mut graph, &shell_iri, rules.predicate(&vocab.asset_kind), lit(shell.asset_kind.name()));
        for sm_ref in &shell.submodel_refs {
            if doc.submodel_by_id(sm_ref).is_none() {
                return Err(MapError::UnresolvedReference {
                    shell_id: shell.id.clone(),
                    submodel_id: sm_ref.clone(),
                });
            }
            let sm_iri = rules.entity_iri(sm_ref);
            push(&mut graph, &shell_iri, rules.predicate(&vocab.has_submodel), sm_iri);
        }
    }

    for sm in &doc.submodels {
        let sm_iri = rules.entity_iri(&sm.id);
        push(&mut graph, &sm_iri, rules.predicate(&vocab.has_id_short), lit(&sm.id_short));
        if let Some(sem) = &sm.semantic_id {
            let sem_iri =
                Term::iri(sem.clone()).map_err(|_| MapError::InvalidSemanticId(sem.clone()))?;
            push(&mut graph, &sm_iri, rules.predicate(&vocab.has_semantic_id), sem_iri);
        }
        for elem in &sm.elements {
            let elem_iri = rules.element_iri(&sm.id, &elem.id_short);
            push(&mut graph, &sm_iri, rules.predicate(&vocab.has_element), elem_iri.clone());
            push(&mut graph, &elem_iri, rules.predicate(&vocab.has_id_short), lit(&elem.id_short));
            push(
                &mut graph,
                &elem_iri,
                rules.predicate(&vocab.has_value_type),
                lit(elem.value_type.name()),
            );
            if let Some(sem) = &elem.semantic_id {
                let sem_iri =
                    Term::iri(sem.clone()).map_err(|_| MapError::InvalidSemanticId(sem.clone()))?;
                push(&mut graph, &elem_iri, rules.predicate(&vocab.has_semantic_id), sem_iri);
            }
            if let Some(value) = &elem.value {
                let value_lit = Term::typed_literal(value.clone(), elem.value_type.datatype_iri())
                    .expect("datatype IRIs are fixed constants");
                push(&mut graph, &elem_iri, rules.predicate(&vocab.has_value), value_lit);
            }
        }
    }

    Ok(graph)
}

fn push(graph: &mut Graph, subject: &Term, predicate: Term, object: Term) {
    let triple = Triple::new(subject.clone(), predicate, object)
        .expect("mapper only builds structurally valid triples");
    graph.insert(triple);
}

/// All triples reachable from `shell_iri` by directed traversal
/// (shell → submodels → elements → literals).
pub fn subgraph_of(graph: &Graph, shell_iri: &Term) -> Result<Graph, MapError> {
    if graph.triples_with_subject(shell_iri).next().is_none() {
        return Err(MapError::UnknownShell(shell_iri.to_string()));
    }
    let mut out = Graph::new();
    let mut queue = vec![shell_iri.clone()];
    let mut visited = std::collections::HashSet::new();
    visited.insert(shell_iri.clone());
    while let Some(node) = queue.pop() {
        for triple in graph.triples_with_subject(&node) {
            out.insert(triple.clone());
            let object = triple.object();
            if object.is_entity() && visited.insert(object.clone()) {
                queue.push(object.clone());
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aas::{validate, AssetKind, Shell, Submodel, SubmodelElement, ValueType};
    use crate::rdf::serialize_ntriples;

    fn doc_with(submodels: usize, elements_per: usize) -> AASDocument {
        let sem = |name: &str| Some(format!("https://example.org/sem/{name}"));
        let submodel_list: Vec<Submodel> = (0..submodels)
            .map(|i| Submodel {
                id: format!("urn:sm:{i}"),
                id_short: format!("SM{i}"),
                semantic_id: sem(&format!("Template{i}")),
                elements: (0..elements_per)
                    .map(|j| SubmodelElement {
                        id_short: format!("Prop{j}"),
                        semantic_id: sem(&format!("Prop{j}")),
                        value_type: ValueType::Integer,
                        value: Some(format!("{}", 10 * j)),
                    })
                    .collect(),
            })
            .collect();
        AASDocument {
            shells: vec![Shell {
                id: "urn:shell:0".into(),
                id_short: "Shell0".into(),
                asset_kind: AssetKind::Instance,
                submodel_refs: submodel_list.iter().map(|sm| sm.id.clone()).collect(),
            }],
            submodels: submodel_list,
        }
    }

    fn pred(name: &str) -> Term {
        Term::iri(format!("{VOCAB_NS}{name}")).unwrap()
    }

    #[test]
    fn minimal_mapping_emits_edge_and_id_shorts() {
        let doc = doc_with(1, 0);
        let rules = MappingRules::default();
        let graph = map_document(&doc, &rules).unwrap();
        let shell = rules.entity_iri("urn:shell:0");
        let sm = rules.entity_iri("urn:sm:0");
        let has = |s: &Term, p: &str, o: Term| {
            graph.contains(&Triple::new(s.clone(), pred(p), o).unwrap())
        };
        assert!(has(&shell, "hasSubmodel", sm.clone()));
        assert!(has(&shell, "hasIdShort", Term::literal("Shell0")));
        assert!(has(&sm, "hasIdShort", Term::literal("SM0")));
        assert!(has(&shell, "assetKind", Term::literal("Instance")));
    }

    #[test]
    fn values_become_typed_literals() {
        let doc = doc_with(1, 1);
        let rules = MappingRules::default();
        let graph = map_document(&doc, &rules).unwrap();
        let elem = rules.element_iri("urn:sm:0", "Prop0");
        let value = Term::typed_literal("0", "http://www.w3.org/2001/XMLSchema#integer").unwrap();
        assert!(graph.contains(&Triple::new(elem, pred("hasValue"), value).unwrap()));
    }

    /// Independent count oracle reading the mapping table: 2 literals plus
    /// the reference edges per shell; idShort, optional semanticId, and the
    /// element edge per submodel; idShort, valueType, optional semanticId,
    /// optional value per element.
    fn expected_triples(doc: &AASDocument) -> usize {
        let shells: usize = doc
            .shells
            .iter()
            .map(|sh| 2 + sh.submodel_refs.len())
            .sum();
        let submodels: usize = doc
            .submodels
            .iter()
            .map(|sm| {
                1 + usize::from(sm.semantic_id.is_some())
                    + sm.elements
                        .iter()
                        .map(|e| {
                            2 + usize::from(e.semantic_id.is_some())
                                + usize::from(e.value.is_some())
                        })
                        .sum::<usize>()
                    + sm.elements.len()
            })
            .sum();
        shells + submodels
    }

    #[test]
    fn triple_count_matches_closed_form_on_full_documents() {
        // documents where every submodel is referenced once, carries a
        // semantic id, and every element has semantic id and value: the
        // count collapses to 2 + 3*|submodels| + 5*|elements|
        for (submodels, elements) in [(5, 3), (1, 0), (3, 1)] {
            let doc = doc_with(submodels, elements);
            assert!(validate(&doc).is_empty());
            let graph = map_document(&doc, &MappingRules::default()).unwrap();
            assert_eq!(graph.len(), expected_triples(&doc));
            assert_eq!(graph.len(), 2 + 3 * submodels + 5 * submodels * elements);
        }
    }

    #[test]
    fn mapping_is_byte_deterministic() {
        let doc = doc_with(3, 2);
        let rules = MappingRules::default();
        let a = serialize_ntriples(&map_document(&doc, &rules).unwrap());
        let b = serialize_ntriples(&map_document(&doc, &rules).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn distinct_ids_cannot_collide() {
        let rules = MappingRules::default();
        assert_ne!(rules.entity_iri("a/b"), rules.entity_iri("a%2Fb"));
        assert_ne!(
            rules.element_iri("a", "b/c"),
            rules.element_iri("a/b", "c")
        );
    }

    #[test]
    fn unresolved_reference_rejected() {
        let mut doc = doc_with(1, 0);
        doc.shells[0].submodel_refs.push("urn:sm:absent".into());
        assert!(matches!(
            map_document(&doc, &MappingRules::default()),
            Err(MapError::UnresolvedReference { .. })
        ));
    }

    #[test]
    fn namespace_invariant_enforced() {
        assert!(MappingRules::new("https://x.example/ns/").is_ok());
        assert!(MappingRules::new("https://x.example/ns#").is_ok());
        assert!(MappingRules::new("https://x.example/ns").is_err());
        assert!(MappingRules::new("relative/").is_err());
        assert!(MappingRules::new("has space/").is_err());
    }

    #[test]
    fn single_shell_subgraph_is_whole_graph() {
        let doc = doc_with(2, 2);
        let rules = MappingRules::default();
        let graph = map_document(&doc, &rules).unwrap();
        let sub = subgraph_of(&graph, &rules.entity_iri("urn:shell:0")).unwrap();
        assert_eq!(sub, graph);
    }

    #[test]
    fn disjoint_shells_partition_the_repository() {
        let rules = MappingRules::default();
        let mut merged = Graph::new();
        let mut docs = Vec::new();
        for d in 0..2 {
            let mut doc = doc_with(2, 1);
            doc.shells[0].id = format!("urn:shell:{d}");
            for (i, sm) in doc.submodels.iter_mut().enumerate() {
                sm.id = format!("urn:sm:{d}:{i}");
            }
            doc.shells[0].submodel_refs =
                doc.submodels.iter().map(|sm| sm.id.clone()).collect();
            merged.merge(&map_document(&doc, &rules).unwrap());
            docs.push(doc);
        }
        let sub0 = subgraph_of(&merged, &rules.entity_iri("urn:shell:0")).unwrap();
        let sub1 = subgraph_of(&merged, &rules.entity_iri("urn:shell:1")).unwrap();
        assert_eq!(sub0.len() + sub1.len(), merged.len());
        assert!(sub0.iter().all(|t| !sub1.contains(t)));
    }

    /// Reachability oracle: iterate to fixpoint over the subject set.
    fn reachable_oracle(graph: &Graph, root: &Term) -> Graph {
        let mut frontier = vec![root.clone()];
        let mut seen = std::collections::HashSet::from([root.clone()]);
        let mut out = Graph::new();
        while let Some(node) = frontier.pop() {
            for t in graph.iter().filter(|t| t.subject() == &node) {
                out.insert(t.clone());
                if t.object().is_entity() && seen.insert(t.object().clone()) {
                    frontier.push(t.object().clone());
                }
            }
        }
        out
    }

    #[test]
    fn subgraph_matches_reachability_oracle_on_merged_repository() {
        let rules = MappingRules::default();
        let mut merged = Graph::new();
        let mut rng = crate::seed::rng(31);
        use rand::Rng;
        for d in 0..6 {
            let mut doc = doc_with(rng.gen_range(1..4), rng.gen_range(0..3));
            doc.shells[0].id = format!("urn:shell:{d}");
            for (i, sm) in doc.submodels.iter_mut().enumerate() {
                sm.id = format!("urn:sm:{d}:{i}");
                // shared semantic ids connect documents, so reachability
                // crosses document boundaries through them
                sm.semantic_id = Some(format!("https://example.org/sem/T{i}"));
            }
            doc.shells[0].submodel_refs =
                doc.submodels.iter().map(|sm| sm.id.clone()).collect();
            merged.merge(&map_document(&doc, &rules).unwrap());
        }
        for d in 0..6 {
            let root = rules.entity_iri(&format!("urn:shell:{d}"));
            let sub = subgraph_of(&merged, &root).unwrap();
            assert_eq!(sub, reachable_oracle(&merged, &root));
        }
    }

    #[test]
    fn unknown_shell_is_an_error() {
        let graph = map_document(&doc_with(1, 0), &MappingRules::default()).unwrap();
        let absent = Term::iri("https://aasmatch.example/id/nope").unwrap();
        assert!(matches!(
            subgraph_of(&graph, &absent),
            Err(MapError::UnknownShell(_))
        ));
    }

    #[test]
    fn reverse_extraction_recovers_document_fields() {
        let doc = doc_with(3, 2);
        let rules = MappingRules::default();
        let graph = map_document(&doc, &rules).unwrap();
        for sm in &doc.submodels {
            let sm_iri = rules.entity_iri(&sm.id);
            let id_shorts: Vec<&Term> = graph
                .triples_with_subject(&sm_iri)
                .filter(|t| t.predicate() == &pred("hasIdShort"))
                .map(|t| t.object())
                .collect();
            assert_eq!(id_shorts, vec![&Term::literal(sm.id_short.clone())]);
            let mut elems: Vec<String> = graph
                .triples_with_subject(&sm_iri)
                .filter(|t| t.predicate() == &pred("hasElement"))
                .map(|t| t.object().text().to_string())
                .collect();
            elems.sort();
            let mut expected: Vec<String> = sm
                .elements
                .iter()
                .map(|e| rules.element_iri(&sm.id, &e.id_short).text().to_string())
                .collect();
            expected.sort();
            assert_eq!(elems, expected);
        }
    }
}
