//! Reader for IAM-style datasets: GXL graph files plus CXL class indices.
//!
//! Attribute names differ between datasets, so a small schema file maps
//! GXL attribute keys to the vertex and edge attributes of the graphs.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use graphdrift::{AttributeValue, AttributedGraph};
use roxmltree::{Document, Node, ParsingOptions};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{file}: {source}")]
    Io {
        file: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{file}: malformed XML: {msg}")]
    Parse { file: PathBuf, msg: String },
    #[error("{file}: schema violation: {msg}")]
    Schema { file: PathBuf, msg: String },
    #[error("{file}: {source}")]
    Graph {
        file: PathBuf,
        #[source]
        source: graphdrift::Error,
    },
    #[error("schema definition: {0}")]
    Definition(String),
}

type Result<T> = std::result::Result<T, LoadError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KeyKind {
    Numeric,
    Categorical,
    None,
}

/// How one element type (vertex or edge) reads its attributes.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElementSchema {
    pub kind: KeyKind,
    /// Keys forming the attribute, in order; numeric keys become vector
    /// components, a categorical attribute has exactly one key.
    #[serde(default)]
    pub keys: Vec<String>,
    /// Keys present in the files but not used.
    #[serde(default)]
    pub ignore: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetSchema {
    pub name: String,
    /// CXL files listing the graphs; missing files are skipped.
    pub index_files: Vec<String>,
    /// Overrides the GXL `edgemode` attribute when set.
    #[serde(default)]
    pub directed: Option<bool>,
    pub vertex: ElementSchema,
    pub edge: ElementSchema,
}

const BUILTIN: &[(&str, &str)] = &[
    ("letter", include_str!("../schemas/letter.toml")),
    ("mutagenicity", include_str!("../schemas/mutagenicity.toml")),
    ("aids", include_str!("../schemas/aids.toml")),
];

impl DatasetSchema {
    pub fn from_toml(text: &str) -> Result<Self> {
        let schema: Self = toml::from_str(text).map_err(|e| LoadError::Definition(e.to_string()))?;
        for (what, el) in [("vertex", &schema.vertex), ("edge", &schema.edge)] {
            let ok = match el.kind {
                KeyKind::Numeric => !el.keys.is_empty(),
                KeyKind::Categorical => el.keys.len() == 1,
                KeyKind::None => el.keys.is_empty(),
            };
            if !ok {
                return Err(LoadError::Definition(format!(
                    "{what}: {:?} attributes with keys {:?}",
                    el.kind, el.keys
                )));
            }
        }
        Ok(schema)
    }

    /// A built-in schema by name, or a schema file path.
    pub fn resolve(name_or_path: &str) -> Result<Self> {
        if let Some((_, text)) = BUILTIN.iter().find(|b| b.0.eq_ignore_ascii_case(name_or_path)) {
            return Self::from_toml(text);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path).map_err(|source| LoadError::Io {
            file: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|source| LoadError::Io {
        file: path.to_path_buf(),
        source,
    })
}

fn parse<'a>(path: &Path, text: &'a str) -> Result<Document<'a>> {
    Document::parse_with_options(
        text,
        ParsingOptions {
            allow_dtd: true,
            ..ParsingOptions::default()
        },
    ).map_err(|e| LoadError::Parse {
        file: path.to_path_buf(),
        msg: e.to_string(),
    })
}

/// `(file, class)` entries of a CXL index.
pub fn read_class_index(path: &Path) -> Result<Vec<(String, String)>> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    doc.descendants()
        .filter(|n| n.has_tag_name("print"))
        .map(|n| match (n.attribute("file"), n.attribute("class")) {
            (Some(f), Some(c)) => Ok((f.to_string(), c.to_string())),
            _ => Err(LoadError::Parse {
                file: path.to_path_buf(),
                msg: "<print> without file or class".into(),
            }),
        })
        .collect()
}

/// Loads every graph listed in the schema's index files below `dir`,
/// grouped by class label.
pub fn load_gxl_collection(dir: &Path, schema: &DatasetSchema) -> Result<BTreeMap<String, Vec<AttributedGraph>>> {
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    let mut any = false;
    for index in &schema.index_files {
        let path = dir.join(index);
        if !path.exists() {
            continue;
        }
        any = true;
        for e in read_class_index(&path)? {
            if seen.insert(e.0.clone()) {
                entries.push(e);
            }
        }
    }
    if !any {
        return Err(LoadError::Io {
            file: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no class index file found"),
        });
    }
    let mut out: BTreeMap<String, Vec<AttributedGraph>> = BTreeMap::new();
    for (file, class) in entries {
        let g = load_gxl_file(&dir.join(&file), schema)?;
        out.entry(class).or_default().push(g);
    }
    Ok(out)
}

/// Parses one GXL file.
pub fn load_gxl_file(path: &Path, schema: &DatasetSchema) -> Result<AttributedGraph> {
    let text = read(path)?;
    let doc = parse(path, &text)?;
    let schema_err = |msg: String| LoadError::Schema {
        file: path.to_path_buf(),
        msg,
    };
    let graph_err = |source| LoadError::Graph {
        file: path.to_path_buf(),
        source,
    };
    let graph = doc
        .descendants()
        .find(|n| n.has_tag_name("graph"))
        .ok_or_else(|| LoadError::Parse {
            file: path.to_path_buf(),
            msg: "no <graph> element".into(),
        })?;
    let directed = schema
        .directed
        .unwrap_or_else(|| graph.attribute("edgemode") == Some("directed"));

    let mut b = AttributedGraph::builder(directed);
    let mut edges = HashSet::new();
    for el in graph.children().filter(Node::is_element) {
        match el.tag_name().name() {
            "node" => {
                let id = el.attribute("id").ok_or_else(|| schema_err("node without id".into()))?;
                let attr = read_attribute(el, &schema.vertex).map_err(schema_err)?;
                b.add_vertex(id, attr).map_err(graph_err)?;
            }
            "edge" => {
                let (Some(from), Some(to)) = (el.attribute("from"), el.attribute("to")) else {
                    return Err(schema_err("edge without from/to".into()));
                };
                let key = if directed || from <= to { (from, to) } else { (to, from) };
                // some releases list an undirected edge in both directions
                if !edges.insert(key) {
                    continue;
                }
                let attr = read_attribute(el, &schema.edge).map_err(schema_err)?;
                b.add_edge(from, to, attr).map_err(graph_err)?;
            }
            _ => {}
        }
    }
    Ok(b.build())
}

fn read_attribute(el: Node, schema: &ElementSchema) -> std::result::Result<AttributeValue, String> {
    let mut values: BTreeMap<&str, String> = BTreeMap::new();
    for attr in el.children().filter(|c| c.has_tag_name("attr")) {
        let name = attr.attribute("name").ok_or("<attr> without name")?;
        if schema.ignore.iter().any(|k| k == name) {
            continue;
        }
        if !schema.keys.iter().any(|k| k == name) {
            return Err(format!("unknown attribute key {name:?}"));
        }
        let text = attr
            .children()
            .find(Node::is_element)
            .and_then(|v| v.text())
            .unwrap_or("")
            .trim()
            .to_string();
        values.insert(name, text);
    }
    let get = |k: &str| values.get(k).ok_or_else(|| format!("missing attribute key {k:?}"));
    match schema.kind {
        KeyKind::None => Ok(AttributeValue::None),
        KeyKind::Categorical => Ok(AttributeValue::Categorical(get(&schema.keys[0])?.clone())),
        KeyKind::Numeric => schema
            .keys
            .iter()
            .map(|k| {
                let s = get(k)?;
                s.parse::<f64>().map_err(|_| format!("attribute {k:?} is not numeric: {s:?}"))
            })
            .collect::<std::result::Result<Vec<f64>, String>>()
            .map(AttributeValue::NumericVector),
    }
}
