use crate::analyze::MeetingNetwork;

use super::decimal;

const MAX_PENWIDTH: f64 = 8.0;

/// Quoted DOT ID. Markup-significant characters and backslashes are written
/// as character entities, which Graphviz resolves in labels; the output
/// never contains a backslash.
fn quote(label: &str) -> String {
    let mut out = String::from("\"");
    for c in label.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '"' => out.push_str("&quot;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '\\' => out.push_str("&#92;"),
            '\n' => out.push_str("&#10;"),
            '\r' => out.push_str("&#13;"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Inverse of the escaping applied to node IDs.
pub fn dot_unescape(id: &str) -> String {
    let inner = id.strip_prefix('"').and_then(|s| s.strip_suffix('"')).unwrap_or(id);
    inner
        .replace("&quot;", "\"")
        .replace("&lt;", "<")
        .replace("&gt;", ">")
        .replace("&#92;", "\\")
        .replace("&#10;", "\n")
        .replace("&#13;", "\r")
        .replace("&amp;", "&")
}

/// Undirected star graph. Nodes in lexicographic label order; pen width is
/// proportional to weight, the heaviest edge drawn at 8.
pub fn to_dot(network: &MeetingNetwork) -> String {
    let mut labels: Vec<&str> = network.nodes();
    labels.sort_unstable();
    labels.dedup();
    let max = network.edges.iter().map(|e| e.weight).max().unwrap_or(1).max(1) as f64;
    let mut out = String::from("graph meetings {\n");
    for label in labels {
        out.push_str(&format!("  {} [label={}];\n", quote(label), quote(label)));
    }
    for e in &network.edges {
        let pen = e.weight as f64 * MAX_PENWIDTH / max;
        out.push_str(&format!(
            "  {} -- {} [weight={}, penwidth={}];\n",
            quote(&network.ego),
            quote(&e.label),
            e.weight,
            decimal(pen)
        ));
    }
    out.push_str("}\n");
    out
}
