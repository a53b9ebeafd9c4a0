//! Graph serialization for external viewers: CSV edge lists and GEXF 1.2
//! with typed node attributes.

use std::fmt::Write as _;

use crate::graph::{WeightedDigraph, WeightedGraph};

/// Attribute value attached to a GEXF node.
#[derive(Debug, Clone)]
pub enum AttrValue {
    Str(String),
    Long(i64),
    Double(f64),
}

impl AttrValue {
    fn type_name(&self) -> &'static str {
        match self {
            AttrValue::Str(_) => "string",
            AttrValue::Long(_) => "long",
            AttrValue::Double(_) => "double",
        }
    }

    fn render(&self) -> String {
        match self {
            AttrValue::Str(s) => s.clone(),
            AttrValue::Long(v) => v.to_string(),
            AttrValue::Double(v) => format!("{v}"),
        }
    }
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

/// `source,target,weight` rows, sorted, with a header.
pub fn edges_to_csv(edges: &[(String, String, f64)]) -> String {
    let mut out = String::from("source,target,weight\n");
    for (source, target, weight) in edges {
        let _ = writeln!(out, "{},{},{}", csv_field(source), csv_field(target), weight);
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// GEXF document: node list with declared attributes plus weighted edges.
/// `attributes` declares (name, example value) pairs fixing each column's
/// type; `node_attrs` yields per-node values in the same order.
pub struct GexfDoc {
    pub directed: bool,
    pub attribute_names: Vec<String>,
    /// (node id, node label, attribute values aligned with `attribute_names`)
    pub nodes: Vec<(String, String, Vec<AttrValue>)>,
    pub edges: Vec<(String, String, f64)>,
}

impl GexfDoc {
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n");
        let _ = writeln!(
            out,
            "  <graph mode=\"static\" defaultedgetype=\"{}\">",
            if self.directed { "directed" } else { "undirected" }
        );

        if !self.attribute_names.is_empty() {
            out.push_str("    <attributes class=\"node\">\n");
            for (idx, name) in self.attribute_names.iter().enumerate() {
                let type_name = self
                    .nodes
                    .first()
                    .and_then(|(_, _, values)| values.get(idx))
                    .map(|v| v.type_name())
                    .unwrap_or("string");
                let _ = writeln!(
                    out,
                    "      <attribute id=\"{idx}\" title=\"{}\" type=\"{type_name}\"/>",
                    xml_escape(name)
                );
            }
            out.push_str("    </attributes>\n");
        }

        out.push_str("    <nodes>\n");
        for (id, label, values) in &self.nodes {
            if values.is_empty() {
                let _ = writeln!(
                    out,
                    "      <node id=\"{}\" label=\"{}\"/>",
                    xml_escape(id),
                    xml_escape(label)
                );
            } else {
                let _ = writeln!(
                    out,
                    "      <node id=\"{}\" label=\"{}\">",
                    xml_escape(id),
                    xml_escape(label)
                );
                out.push_str("        <attvalues>\n");
                for (idx, value) in values.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "          <attvalue for=\"{idx}\" value=\"{}\"/>",
                        xml_escape(&value.render())
                    );
                }
                out.push_str("        </attvalues>\n");
                out.push_str("      </node>\n");
            }
        }
        out.push_str("    </nodes>\n");

        out.push_str("    <edges>\n");
        for (edge_id, (source, target, weight)) in self.edges.iter().enumerate() {
            let _ = writeln!(
                out,
                "      <edge id=\"{edge_id}\" source=\"{}\" target=\"{}\" weight=\"{weight}\"/>",
                xml_escape(source),
                xml_escape(target)
            );
        }
        out.push_str("    </edges>\n");
        out.push_str("  </graph>\n");
        out.push_str("</gexf>\n");
        out
    }
}

/// GEXF for an undirected graph with per-node attributes supplied by `attrs`.
pub fn gexf_for_graph<F>(graph: &WeightedGraph, attribute_names: &[&str], attrs: F) -> String
where
    F: Fn(&str) -> Vec<AttrValue>,
{
    let mut ids: Vec<String> = graph.node_ids().to_vec();
    ids.sort();
    GexfDoc {
        directed: false,
        attribute_names: attribute_names.iter().map(|s| s.to_string()).collect(),
        nodes: ids
            .into_iter()
            .map(|id| {
                let values = attrs(&id);
                (id.clone(), id, values)
            })
            .collect(),
        edges: graph.edges(),
    }
    .render()
}

/// GEXF for a directed graph with per-node attributes supplied by `attrs`.
pub fn gexf_for_digraph<F>(graph: &WeightedDigraph, attribute_names: &[&str], attrs: F) -> String
where
    F: Fn(&str) -> Vec<AttrValue>,
{
    let mut ids: Vec<String> = graph.node_ids().to_vec();
    ids.sort();
    GexfDoc {
        directed: true,
        attribute_names: attribute_names.iter().map(|s| s.to_string()).collect(),
        nodes: ids
            .into_iter()
            .map(|id| {
                let values = attrs(&id);
                (id.clone(), id, values)
            })
            .collect(),
        edges: graph.edges(),
    }
    .render()
}
