//! Manifold specifications: `plumbing-v1` graph JSON or a constructor
//! expression `seifert(b0; a1/w1, …)`, `brieskorn(a1, …)`, `lens(p, r)`.

use serde::{Deserialize, Serialize};

use plumbing_core::graph::PlumbingGraph;
use plumbing_core::seifert::{brieskorn, lens_graph, seifert_graph, SeifertData};

use crate::error::CliError;

pub const FORMAT: &str = "plumbing-v1";

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphJson {
    pub format: String,
    pub vertices: Vec<VertexJson>,
    pub edges: Vec<(String, String)>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexJson {
    pub id: String,
    pub weight: i64,
}

impl GraphJson {
    pub fn from_graph(g: &PlumbingGraph) -> Self {
        GraphJson {
            format: FORMAT.to_string(),
            vertices: g.input_vertices().into_iter().map(|(id, weight)| VertexJson { id, weight }).collect(),
            edges: g.input_edges().to_vec(),
        }
    }

    pub fn into_graph(self) -> Result<PlumbingGraph, CliError> {
        if self.format != FORMAT {
            return Err(CliError::Validation(format!(
                "unsupported format {:?}, expected {FORMAT:?}",
                self.format
            )));
        }
        let vertices = self.vertices.into_iter().map(|v| (v.id, v.weight)).collect();
        PlumbingGraph::new(vertices, self.edges).map_err(|e| CliError::Validation(e.to_string()))
    }
}

pub fn graph_to_json(g: &PlumbingGraph) -> String {
    serde_json::to_string(&GraphJson::from_graph(g)).expect("graph serializes")
}

/// Parses either form; text whose first non-blank character is `{` is JSON.
pub fn parse_spec(text: &str) -> Result<PlumbingGraph, CliError> {
    if text.trim_start().starts_with('{') {
        let parsed: GraphJson = serde_json::from_str(text).map_err(|e| CliError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        return parsed.into_graph();
    }
    let expr = Parser::new(text).expression()?;
    expr.build()
}

#[derive(Debug, PartialEq, Eq)]
enum Expr {
    Seifert { b0: i64, pairs: Vec<(i64, i64)> },
    Brieskorn(Vec<i64>),
    Lens(i64, i64),
}

impl Expr {
    fn build(self) -> Result<PlumbingGraph, CliError> {
        let core = |e: plumbing_core::error::Error| CliError::Validation(e.to_string());
        match self {
            Expr::Seifert { b0, pairs } => seifert_graph(&SeifertData::new(b0, pairs).map_err(core)?).map_err(core),
            Expr::Brieskorn(a) => seifert_graph(&brieskorn(&a).map_err(core)?).map_err(core),
            Expr::Lens(p, r) => lens_graph(p, r).map_err(core),
        }
    }
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser { text, pos: 0 }
    }

    fn error(&self, message: impl Into<String>) -> CliError {
        let before = &self.text[..self.pos];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        CliError::Parse { line, column, message: message.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.text[self.pos..].chars().next()
    }

    fn expect(&mut self, c: char) -> Result<(), CliError> {
        match self.peek() {
            Some(d) if d == c => {
                self.pos += c.len_utf8();
                Ok(())
            }
            Some(d) => Err(self.error(format!("expected '{c}', found '{d}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    fn ident(&mut self) -> Result<String, CliError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| !c.is_ascii_alphanumeric() && c != '_').unwrap_or(rest.len());
        if len == 0 {
            return Err(self.error("expected a constructor name"));
        }
        self.pos += len;
        Ok(rest[..len].to_ascii_lowercase())
    }

    fn int(&mut self) -> Result<i64, CliError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let sign = usize::from(rest.starts_with('-') || rest.starts_with('+'));
        let digits = rest[sign..].find(|c: char| !c.is_ascii_digit()).unwrap_or(rest.len() - sign);
        if digits == 0 {
            return Err(self.error("expected an integer"));
        }
        let tok = &rest[..sign + digits];
        let v = tok.parse().map_err(|_| self.error(format!("integer {tok} out of range")))?;
        self.pos += tok.len();
        Ok(v)
    }

    fn int_list(&mut self) -> Result<Vec<i64>, CliError> {
        let mut out = vec![self.int()?];
        while self.peek() == Some(',') {
            self.pos += 1;
            out.push(self.int()?);
        }
        Ok(out)
    }

    fn expression(&mut self) -> Result<Expr, CliError> {
        let start = self.pos;
        let name = self.ident()?;
        self.expect('(')?;
        let expr = match name.as_str() {
            "seifert" => {
                let b0 = self.int()?;
                self.expect(';')?;
                let mut pairs = Vec::new();
                loop {
                    let a = self.int()?;
                    self.expect('/')?;
                    let w = self.int()?;
                    pairs.push((a, w));
                    if self.peek() != Some(',') {
                        break;
                    }
                    self.pos += 1;
                }
                Expr::Seifert { b0, pairs }
            }
            "brieskorn" => Expr::Brieskorn(self.int_list()?),
            "lens" => {
                let p = self.int()?;
                self.expect(',')?;
                let r = self.int()?;
                Expr::Lens(p, r)
            }
            _ => {
                self.pos = start;
                self.skip_ws();
                return Err(self.error(format!(
                    "unknown constructor {name:?}; expected seifert, brieskorn or lens"
                )));
            }
        };
        self.expect(')')?;
        if let Some(c) = self.peek() {
            return Err(self.error(format!("unexpected trailing '{c}'")));
        }
        Ok(expr)
    }
}
