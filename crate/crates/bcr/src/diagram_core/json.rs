//! JSON form of (numbered) diagrams.
//!
//! `{"n_vertices": 4, "vertex_kinds": "iiii", "edges": [[0,1,"i"], ...], "numbering": [...]}`;
//! `numbering` is optional and aligned with `edges`.

use serde::{Deserialize, Serialize};

use super::{BcrDiagram, Edge, Kind, NumberedDiagram, NumberingError, RawGraph, ValidationReport};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagramJson {
    pub n_vertices: usize,
    pub vertex_kinds: String,
    pub edges: Vec<(usize, usize, String)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numbering: Option<Vec<usize>>,
}

#[derive(Debug, thiserror::Error)]
pub enum JsonError {
    #[error("malformed diagram JSON: {0}")]
    Syntax(#[from] serde_json::Error),
    #[error("vertex_kinds has {got} letters, n_vertices is {expected}")]
    KindCount { expected: usize, got: usize },
    #[error("unknown kind code {0:?}, expected 'i' or 'e'")]
    KindCode(String),
    #[error("invalid diagram: {0}")]
    Invalid(ValidationReport),
    #[error("invalid numbering: {0}")]
    Numbering(#[from] NumberingError),
}

fn kind_of(s: &str) -> Result<Kind, JsonError> {
    let mut chars = s.chars();
    match (chars.next().and_then(Kind::from_code), chars.next()) {
        (Some(k), None) => Ok(k),
        _ => Err(JsonError::KindCode(s.to_string())),
    }
}

impl DiagramJson {
    pub fn from_diagram(d: &BcrDiagram) -> Self {
        DiagramJson {
            n_vertices: d.n_vertices(),
            vertex_kinds: d.kinds().iter().map(|k| k.code()).collect(),
            edges: d.edges().iter().map(|e| (e.source, e.target, e.kind.code().to_string())).collect(),
            numbering: None,
        }
    }

    pub fn from_numbered(d: &NumberedDiagram) -> Self {
        DiagramJson { numbering: Some(d.numbering().to_vec()), ..Self::from_diagram(d.diagram()) }
    }

    /// The raw graph, before validation.
    pub fn raw(&self) -> Result<RawGraph, JsonError> {
        let kinds: Vec<Kind> = self
            .vertex_kinds
            .chars()
            .map(|c| Kind::from_code(c).ok_or_else(|| JsonError::KindCode(c.to_string())))
            .collect::<Result<_, _>>()?;
        if kinds.len() != self.n_vertices {
            return Err(JsonError::KindCount { expected: self.n_vertices, got: kinds.len() });
        }
        let edges = self
            .edges
            .iter()
            .map(|(s, t, k)| Ok(Edge::new(*s, *t, kind_of(k)?)))
            .collect::<Result<_, JsonError>>()?;
        Ok(RawGraph::from_kinds(&kinds, edges))
    }

    pub fn diagram(&self) -> Result<BcrDiagram, JsonError> {
        BcrDiagram::from_raw(&self.raw()?).map_err(JsonError::Invalid)
    }

    /// Numbered diagram; an absent numbering means `σ(e) = e + 1`.
    pub fn numbered(&self) -> Result<NumberedDiagram, JsonError> {
        let d = self.diagram()?;
        match &self.numbering {
            Some(num) => Ok(NumberedDiagram::new(d, num.clone())?),
            None => Ok(NumberedDiagram::identity(d)),
        }
    }

    pub fn parse(text: &str) -> Result<Self, JsonError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn parse_many(text: &str) -> Result<Vec<Self>, JsonError> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        if v.is_array() {
            Ok(serde_json::from_value(v)?)
        } else {
            Ok(vec![serde_json::from_value(v)?])
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("serialisable")
    }
}
