// SPDX-License-Identifier: Apache-2.0

//! Single-inheritance cloud service taxonomy with similarity, compatibility
//! and numeric reasoning.
//!
//! File format, one entry per line, UTF-8:
//!
//! ```text
//! # comment
//! Service
//! Service>ComputeService
//! Service>StorageService
//! ```
//!
//! The single bare line names the root; every other line is `Parent>Child`.
//! A parent must be the root or appear as a child somewhere in the file.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use thiserror::Error;

use crate::decimal::Decimal;
use crate::registry::ResourceType;

#[derive(Debug, Error)]
pub enum OntologyError {
    #[error("CycleDetected: concept `{0}` lies on a parent cycle")]
    CycleDetected(String),
    #[error("UnknownParent: edge `{parent}>{child}` names an undeclared parent")]
    UnknownParent { parent: String, child: String },
    #[error("UnknownConcept: `{0}`")]
    UnknownConcept(String),
    #[error("concept `{child}` has two parents (`{first}`, `{second}`)")]
    MultipleParents {
        child: String,
        first: String,
        second: String,
    },
    #[error("ontology declares no root concept")]
    MissingRoot,
    #[error("ontology declares more than one root (`{0}`, `{1}`)")]
    MultipleRoots(String, String),
    #[error("root concept `{0}` cannot have a parent")]
    RootHasParent(String),
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ontology {
    root: String,
    parent: BTreeMap<String, String>,
    /// Root has depth 1.
    depth: BTreeMap<String, usize>,
}

fn valid_concept(s: &str) -> bool {
    !s.is_empty() && !s.chars().any(|c| c.is_whitespace() || c == '>' || c == '#')
}

impl Ontology {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, OntologyError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn parse(text: &str) -> Result<Self, OntologyError> {
        let mut root: Option<String> = None;
        let mut parent: BTreeMap<String, String> = BTreeMap::new();
        let mut edges = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |reason: &str| OntologyError::Malformed {
                line: line_no,
                reason: reason.to_string(),
            };
            match line.split_once('>') {
                None => {
                    if !valid_concept(line) {
                        return Err(malformed("invalid concept name"));
                    }
                    if let Some(existing) = &root {
                        return Err(OntologyError::MultipleRoots(
                            existing.clone(),
                            line.to_string(),
                        ));
                    }
                    root = Some(line.to_string());
                }
                Some((p, c)) => {
                    let (p, c) = (p.trim(), c.trim());
                    if !valid_concept(p) || !valid_concept(c) {
                        return Err(malformed("expected `Parent>Child`"));
                    }
                    if let Some(first) = parent.get(c) {
                        if first != p {
                            return Err(OntologyError::MultipleParents {
                                child: c.to_string(),
                                first: first.clone(),
                                second: p.to_string(),
                            });
                        }
                        continue;
                    }
                    parent.insert(c.to_string(), p.to_string());
                    edges.push((p.to_string(), c.to_string()));
                }
            }
        }

        let root = root.ok_or(OntologyError::MissingRoot)?;
        if parent.contains_key(&root) {
            return Err(OntologyError::RootHasParent(root));
        }
        for (p, c) in &edges {
            if *p != root && !parent.contains_key(p) {
                return Err(OntologyError::UnknownParent {
                    parent: p.clone(),
                    child: c.clone(),
                });
            }
        }

        let mut depth: BTreeMap<String, usize> = BTreeMap::new();
        depth.insert(root.clone(), 1);
        for start in parent.keys() {
            if depth.contains_key(start) {
                continue;
            }
            // Walk up until a concept with known depth; a repeat means a cycle.
            let mut chain = vec![start.as_str()];
            let mut on_chain: BTreeSet<&str> = BTreeSet::from([start.as_str()]);
            let mut cur = start.as_str();
            let base = loop {
                let p = parent[cur].as_str();
                if let Some(d) = depth.get(p) {
                    break *d;
                }
                if !on_chain.insert(p) {
                    return Err(OntologyError::CycleDetected(p.to_string()));
                }
                chain.push(p);
                cur = p;
            };
            for (i, c) in chain.iter().rev().enumerate() {
                depth.insert((*c).to_string(), base + 1 + i);
            }
        }

        Ok(Ontology {
            root,
            parent,
            depth,
        })
    }

    pub fn root(&self) -> &str {
        &self.root
    }

    pub fn len(&self) -> usize {
        self.depth.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depth.is_empty()
    }

    pub fn contains(&self, concept: &str) -> bool {
        self.depth.contains_key(concept)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &str> {
        self.depth.keys().map(String::as_str)
    }

    pub fn parent(&self, concept: &str) -> Option<&str> {
        self.parent.get(concept).map(String::as_str)
    }

    pub fn depth(&self, concept: &str) -> Result<usize, OntologyError> {
        self.depth
            .get(concept)
            .copied()
            .ok_or_else(|| OntologyError::UnknownConcept(concept.to_string()))
    }

    /// Deepest concept that is an ancestor-or-self of both.
    pub fn lowest_common_ancestor<'a>(
        &'a self,
        a: &'a str,
        b: &'a str,
    ) -> Result<&'a str, OntologyError> {
        let (mut x, mut y) = (a, b);
        let (mut dx, mut dy) = (self.depth(x)?, self.depth(y)?);
        while dx > dy {
            x = self.parent[x].as_str();
            dx -= 1;
        }
        while dy > dx {
            y = self.parent[y].as_str();
            dy -= 1;
        }
        while x != y {
            x = self.parent[x].as_str();
            y = self.parent[y].as_str();
        }
        Ok(x)
    }

    /// Wu-Palmer similarity `2·depth(lca) / (depth(a) + depth(b))`.
    pub fn concept_similarity(&self, a: &str, b: &str) -> Result<f64, OntologyError> {
        let lca = self.lowest_common_ancestor(a, b)?;
        let num = 2 * self.depth(lca)?;
        let den = self.depth(a)? + self.depth(b)?;
        Ok(num as f64 / den as f64)
    }

    /// True when `a` is `b` or a descendant of `b`.
    pub fn is_subconcept(&self, a: &str, b: &str) -> Result<bool, OntologyError> {
        self.depth(b)?;
        let mut cur = a;
        let mut d = self.depth(a)?;
        let db = self.depth(b)?;
        while d > db {
            cur = self.parent[cur].as_str();
            d -= 1;
        }
        Ok(cur == b)
    }
}

pub fn compatible(required: ResourceType, offered: ResourceType) -> bool {
    required == offered
}

/// Closed interval requirement on a named numeric field. `None` bounds are
/// unbounded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NumericRequirement {
    pub attribute: String,
    pub lo: Option<Decimal>,
    pub hi: Option<Decimal>,
}

impl NumericRequirement {
    pub fn new(
        attribute: impl Into<String>,
        lo: Option<Decimal>,
        hi: Option<Decimal>,
    ) -> Option<Self> {
        if let (Some(l), Some(h)) = (lo, hi) {
            if l > h {
                return None;
            }
        }
        Some(NumericRequirement {
            attribute: attribute.into(),
            lo,
            hi,
        })
    }
}

pub fn numeric_match(req: &NumericRequirement, value: Decimal) -> bool {
    req.lo.is_none_or(|lo| lo <= value) && req.hi.is_none_or(|hi| value <= hi)
}
