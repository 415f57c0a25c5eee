//! The joint file-metadata tree: container boxes and their fields next to the
//! decoded codec parameter sets.

mod exclusion;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bmff::{BoxNode, BoxTree};
use crate::h264::{EncodingSetting, ParamSet};

pub use self::exclusion::{ExclusionList, ExclusionProfile, Pattern};

pub const ROOT_LABEL: &str = "file";
pub const CONTAINER_LABEL: &str = "container";
pub const CODEC_LABEL: &str = "codec";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NodeKind {
    Root,
    Container,
    Codec,
    Box,
    Field,
    ParamSet,
    Param,
    Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Node {
    pub label: String,
    pub kind: NodeKind,
    pub children: Vec<Node>,
}

impl Node {
    pub fn new(label: impl Into<String>, kind: NodeKind) -> Self {
        Node { label: label.into(), kind, children: Vec::new() }
    }

    fn with_value(label: impl Into<String>, kind: NodeKind, value: String) -> Self {
        Node { label: label.into(), kind, children: vec![Node::new(value, NodeKind::Value)] }
    }

    /// Field and parameter nodes: the ones that carry a value leaf.
    pub fn is_attribute(&self) -> bool {
        matches!(self.kind, NodeKind::Field | NodeKind::Param)
    }

    pub fn count(&self) -> usize {
        1 + self.children.iter().map(Node::count).sum::<usize>()
    }

    pub fn value_count(&self) -> usize {
        usize::from(self.kind == NodeKind::Value) + self.children.iter().map(Node::value_count).sum::<usize>()
    }

    /// The value text under an attribute node.
    pub fn value(&self) -> Option<&str> {
        self.children.iter().find(|c| c.kind == NodeKind::Value).map(|c| c.label.as_str())
    }

    pub fn child(&self, label: &str) -> Option<&Node> {
        self.children.iter().find(|c| c.label == label)
    }

    fn strip(&self) -> Node {
        Node {
            label: self.label.clone(),
            kind: self.kind,
            children: self.children.iter().filter(|c| c.kind != NodeKind::Value).map(Node::strip).collect(),
        }
    }

    fn prune(&self, path: &mut Vec<String>, excl: &ExclusionList) -> Node {
        let mut children = Vec::with_capacity(self.children.len());
        for c in &self.children {
            path.push(c.label.clone());
            if !(c.is_attribute() && excl.matches(path)) {
                children.push(c.prune(path, excl));
            }
            path.pop();
        }
        Node { label: self.label.clone(), kind: self.kind, children }
    }

    fn render(&self, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:indent$}{}", "", self.label, indent = depth * 2)?;
        for c in &self.children {
            c.render(depth + 1, f)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MetaTree {
    pub root: Node,
}

impl MetaTree {
    pub fn container(&self) -> Option<&Node> {
        self.root.children.iter().find(|c| c.kind == NodeKind::Container)
    }

    pub fn codec(&self) -> Option<&Node> {
        self.root.children.iter().find(|c| c.kind == NodeKind::Codec)
    }

    pub fn node_count(&self) -> usize {
        self.root.count()
    }

    pub fn value_count(&self) -> usize {
        self.root.value_count()
    }

    /// The same tree without its container or codec subtree.
    pub fn only(&self, kind: NodeKind) -> MetaTree {
        let mut root = Node::new(self.root.label.clone(), self.root.kind);
        root.children = self.root.children.iter().filter(|c| c.kind == kind).cloned().collect();
        MetaTree { root }
    }
}

/// Indented rendering, one label per line.
impl fmt::Display for MetaTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.render(0, f)
    }
}

pub fn build_container_subtree(tree: &BoxTree) -> Node {
    let mut n = Node::new(CONTAINER_LABEL, NodeKind::Container);
    n.children = tree.boxes.iter().map(box_node).collect();
    n
}

fn box_node(b: &BoxNode) -> Node {
    let mut n = Node::new(b.box_type.to_string(), NodeKind::Box);
    n.children.extend(
        b.fields.iter().map(|(name, v)| Node::with_value(name.clone(), NodeKind::Field, v.to_string())),
    );
    n.children.extend(b.children.iter().map(box_node));
    n
}

/// SPS, then one PPS node per picture parameter set, then VUI when present.
pub fn build_codec_subtree(setting: &EncodingSetting) -> Node {
    let mut n = Node::new(CODEC_LABEL, NodeKind::Codec);
    n.children.push(param_set_node(&setting.sps.params));
    n.children.extend(setting.pps.iter().map(|p| param_set_node(&p.params)));
    if let Some(vui) = setting.vui() {
        n.children.push(param_set_node(vui));
    }
    n
}

fn param_set_node(set: &ParamSet) -> Node {
    let mut n = Node::new(set.kind().label(), NodeKind::ParamSet);
    n.children = set
        .params()
        .iter()
        .map(|p| Node::with_value(p.name.clone(), NodeKind::Param, p.value.to_string()))
        .collect();
    n
}

pub fn join(container: &Node, codec: Option<&Node>) -> MetaTree {
    let mut root = Node::new(ROOT_LABEL, NodeKind::Root);
    root.children.push(container.clone());
    root.children.extend(codec.cloned());
    MetaTree { root }
}

/// Drops every field or parameter node (with its value) whose label path
/// below the root matches the list.
pub fn prune(tree: &MetaTree, excl: &ExclusionList) -> MetaTree {
    if excl.is_empty() {
        return tree.clone();
    }
    MetaTree { root: tree.root.prune(&mut Vec::new(), excl) }
}

/// Removes exactly the value leaves.
pub fn strip_values(tree: &MetaTree) -> MetaTree {
    MetaTree { root: tree.root.strip() }
}
