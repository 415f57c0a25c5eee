use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::tree::{MetaTree, Node, NodeKind};

/// How sibling order is folded into path labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LabelingScheme {
    /// Bare labels.
    Plain,
    /// Every label suffixed with its position among all siblings.
    GlobalOrder,
    /// Every label suffixed with its position among same-labeled siblings.
    TypeOrder,
    /// Only `trak` labels carry their position among `trak` siblings.
    TrackOnly,
}

impl LabelingScheme {
    pub fn name(self) -> &'static str {
        match self {
            LabelingScheme::Plain => "plain",
            LabelingScheme::GlobalOrder => "global-order",
            LabelingScheme::TypeOrder => "type-order",
            LabelingScheme::TrackOnly => "track-only",
        }
    }
}

impl FromStr for LabelingScheme {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        [LabelingScheme::Plain, LabelingScheme::GlobalOrder, LabelingScheme::TypeOrder, LabelingScheme::TrackOnly]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown labeling scheme {s:?}"))
    }
}

impl fmt::Display for LabelingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PathEntry {
    /// Escaped labels joined by `/`.
    pub labels: String,
    /// Escaped value text for entries that end in a value leaf.
    pub terminal_value: Option<String>,
}

impl PathEntry {
    pub fn render(&self) -> String {
        match &self.terminal_value {
            Some(v) => format!("{}/{}", self.labels, v),
            None => self.labels.clone(),
        }
    }
}

impl fmt::Display for PathEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

fn escape(text: &str, extra: &[char]) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        if c == '%' || c == '/' || c.is_control() || extra.contains(&c) {
            let mut buf = [0u8; 4];
            for b in c.encode_utf8(&mut buf).bytes() {
                out.push_str(&format!("%{b:02X}"));
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Escapes `%`, `/`, `-` and control characters so that the separator and
/// the ordinal suffix never occur inside a label.
pub fn escape_label(label: &str) -> String {
    escape(label, &['-'])
}

/// Escapes `%`, `/` and control characters.
pub fn escape_value(value: &str) -> String {
    escape(value, &[])
}

/// Removes a trailing `-k` ordinal from one rendered segment.
pub fn strip_ordinal(segment: &str) -> &str {
    match segment.rsplit_once('-') {
        Some((head, tail)) if !tail.is_empty() && tail.bytes().all(|b| b.is_ascii_digit()) => head,
        _ => segment,
    }
}

fn segments<'a>(children: &'a [Node], scheme: LabelingScheme) -> Vec<(String, &'a Node)> {
    let mut per_label: HashMap<&str, usize> = HashMap::new();
    let mut position = 0usize;
    children
        .iter()
        .filter(|c| c.kind != NodeKind::Value)
        .map(|c| {
            position += 1;
            let same = per_label.entry(c.label.as_str()).or_insert(0);
            *same += 1;
            let base = escape_label(&c.label);
            let seg = match scheme {
                LabelingScheme::Plain => base,
                LabelingScheme::GlobalOrder => format!("{base}-{position}"),
                LabelingScheme::TypeOrder => format!("{base}-{same}"),
                LabelingScheme::TrackOnly if c.kind == NodeKind::Box && c.label == "trak" => {
                    format!("{base}-{same}")
                }
                LabelingScheme::TrackOnly => base,
            };
            (seg, c)
        })
        .collect()
}

/// Calls `visit` for every labeled node below the root, in DFS order, with
/// its rendered root-to-node path.
pub fn visit_node_paths<'a>(tree: &'a MetaTree, scheme: LabelingScheme, mut visit: impl FnMut(&str, &'a Node)) {
    fn walk<'a>(node: &'a Node, prefix: &str, scheme: LabelingScheme, visit: &mut impl FnMut(&str, &'a Node)) {
        for (seg, child) in segments(&node.children, scheme) {
            let path = if prefix.is_empty() { seg } else { format!("{prefix}/{seg}") };
            visit(&path, child);
            walk(child, &path, scheme, visit);
        }
    }
    walk(&tree.root, "", scheme, &mut visit);
}

/// Root-to-leaf entries in DFS order. The root's own label is not part of
/// any path.
pub fn enumerate_paths(tree: &MetaTree, scheme: LabelingScheme) -> Vec<PathEntry> {
    let mut out = Vec::new();
    visit_node_paths(tree, scheme, |path, node| {
        if let Some(v) = node.value() {
            out.push(PathEntry { labels: path.to_owned(), terminal_value: Some(escape_value(v)) });
        } else if node.children.is_empty() {
            out.push(PathEntry { labels: path.to_owned(), terminal_value: None });
        }
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat(labels: &[&str]) -> MetaTree {
        let mut root = Node::new("container", NodeKind::Container);
        root.children = labels.iter().map(|l| Node::new(*l, NodeKind::Box)).collect();
        MetaTree { root }
    }

    fn rendered(t: &MetaTree, s: LabelingScheme) -> Vec<String> {
        enumerate_paths(t, s).iter().map(PathEntry::render).collect()
    }

    #[test]
    fn fig4_orderings() {
        let t = flat(&["ftyp", "moov", "mdat"]);
        assert_eq!(rendered(&t, LabelingScheme::GlobalOrder), ["ftyp-1", "moov-2", "mdat-3"]);
        assert_eq!(rendered(&t, LabelingScheme::TypeOrder), ["ftyp-1", "moov-1", "mdat-1"]);
        assert_eq!(rendered(&t, LabelingScheme::Plain), ["ftyp", "moov", "mdat"]);
    }

    #[test]
    fn two_traks() {
        let t = flat(&["trak", "trak"]);
        assert_eq!(rendered(&t, LabelingScheme::TypeOrder), ["trak-1", "trak-2"]);
        assert_eq!(rendered(&t, LabelingScheme::TrackOnly), ["trak-1", "trak-2"]);
        let t = flat(&["free", "free"]);
        assert_eq!(rendered(&t, LabelingScheme::TrackOnly), ["free", "free"]);
    }

    #[test]
    fn single_node_has_no_paths() {
        assert!(enumerate_paths(&flat(&[]), LabelingScheme::Plain).is_empty());
    }

    #[test]
    fn escaping() {
        assert_eq!(escape_label("ac-3"), "ac%2D3");
        assert_eq!(escape_label("a/b%"), "a%2Fb%25");
        assert_eq!(escape_value("1-2/3"), "1-2%2F3");
        assert_eq!(escape_label("\u{1}x"), "%01x");
        assert_eq!(strip_ordinal("ac%2D3-12"), "ac%2D3");
        assert_eq!(strip_ordinal("moov"), "moov");
    }

    #[test]
    fn value_leaves_are_terminal() {
        let mut root = Node::new("container", NodeKind::Container);
        let mut mvhd = Node::new("mvhd", NodeKind::Box);
        let mut d = Node::new("@duration", NodeKind::Field);
        d.children.push(Node::new("17654", NodeKind::Value));
        mvhd.children.push(d);
        let mut moov = Node::new("moov", NodeKind::Box);
        moov.children.push(mvhd);
        root.children.push(moov);
        let t = MetaTree { root };
        assert_eq!(rendered(&t, LabelingScheme::Plain), ["moov/mvhd/@duration/17654"]);
        assert_eq!(rendered(&t, LabelingScheme::GlobalOrder), ["moov-1/mvhd-1/@duration-1/17654"]);
    }
}
