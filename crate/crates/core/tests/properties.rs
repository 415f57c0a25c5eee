use proptest::prelude::*;

use vidsource::bmff::parse_boxes;
use vidsource::classifier::{balanced_accuracy, balanced_weights, DecisionTree};
use vidsource::features::{
    enumerate_paths, strip_ordinal, vectorize, LabelingScheme, Scope, VectorKind, Vocabulary,
};
use vidsource::h264::{escape_rbsp, unescape_rbsp, BitCursor, BitWriter};
use vidsource::metaclass::{ldp_embed, tree_hash};
use vidsource::tree::{MetaTree, Node, NodeKind, CODEC_LABEL, CONTAINER_LABEL, ROOT_LABEL};

const LABELS: &[&str] = &["moov", "trak", "mdia", "free", "udta", "stsd"];

fn leaf_field(name: &str, value: String) -> Node {
    let mut n = Node::new(name, NodeKind::Field);
    n.children.push(Node::new(value, NodeKind::Value));
    n
}

fn arb_box() -> impl Strategy<Value = Node> {
    let leaf = (0..LABELS.len(), proptest::option::of(0u32..50)).prop_map(|(l, v)| {
        let mut n = Node::new(LABELS[l], NodeKind::Box);
        if let Some(v) = v {
            n.children.push(leaf_field("@version", v.to_string()));
        }
        n
    });
    leaf.prop_recursive(4, 40, 4, |inner| {
        (0..LABELS.len(), prop::collection::vec(inner, 1..4)).prop_map(|(l, kids)| {
            let mut n = Node::new(LABELS[l], NodeKind::Box);
            n.children = kids;
            n
        })
    })
}

fn arb_tree() -> impl Strategy<Value = MetaTree> {
    (prop::collection::vec(arb_box(), 1..4), prop::collection::vec(0i64..9, 0..4)).prop_map(|(boxes, params)| {
        let mut container = Node::new(CONTAINER_LABEL, NodeKind::Container);
        container.children = boxes;
        let mut root = Node::new(ROOT_LABEL, NodeKind::Root);
        root.children.push(container);
        if !params.is_empty() {
            let mut sps = Node::new("SPS", NodeKind::ParamSet);
            for (i, p) in params.iter().enumerate() {
                let mut n = Node::new(format!("p{i}"), NodeKind::Param);
                n.children.push(Node::new(p.to_string(), NodeKind::Value));
                sps.children.push(n);
            }
            let mut codec = Node::new(CODEC_LABEL, NodeKind::Codec);
            codec.children.push(sps);
            root.children.push(codec);
        }
        MetaTree { root }
    })
}

fn map_values(node: &mut Node, f: &impl Fn(&str) -> String) {
    for c in &mut node.children {
        if c.kind == NodeKind::Value {
            c.label = f(&c.label);
        } else {
            map_values(c, f);
        }
    }
}

fn relabel(node: &mut Node) {
    if node.kind == NodeKind::Box {
        node.label = format!("{}x", node.label);
    }
    for c in &mut node.children {
        relabel(c);
    }
}

fn plain(path: &str) -> String {
    path.split('/').map(strip_ordinal).collect::<Vec<_>>().join("/")
}

proptest! {
    #[test]
    fn exp_golomb_round_trip(u in 0u64..(1 << 31), s in -(1i64 << 30)..(1i64 << 30)) {
        let mut w = BitWriter::new();
        w.write_ue(u);
        w.write_se(s);
        w.write_trailing_bits();
        let bytes = w.into_bytes();
        let mut r = BitCursor::new(&bytes);
        prop_assert_eq!(r.read_ue().unwrap(), u);
        prop_assert_eq!(r.read_se().unwrap(), s);
    }

    #[test]
    fn rbsp_escape_round_trip(payload in prop::collection::vec(prop_oneof![Just(0u8), Just(3u8), any::<u8>()], 0..200)) {
        let escaped = escape_rbsp(&payload);
        prop_assert!(!escaped.windows(3).any(|w| w[0] == 0 && w[1] == 0 && w[2] <= 2));
        prop_assert_eq!(unescape_rbsp(&escaped), payload);
    }

    #[test]
    fn box_parser_never_panics(tail in prop::collection::vec(any::<u8>(), 0..256)) {
        let mut bytes = vec![0, 0, 0, 16, b'f', b't', b'y', b'p', b'i', b's', b'o', b'm', 0, 0, 0, 0];
        bytes.extend(tail);
        let a = parse_boxes(&bytes).unwrap();
        let b = parse_boxes(&bytes).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn ordinals_project_to_plain(t in arb_tree()) {
        let base: Vec<String> = enumerate_paths(&t, LabelingScheme::Plain).iter().map(|e| e.render()).collect();
        for scheme in [LabelingScheme::GlobalOrder, LabelingScheme::TypeOrder, LabelingScheme::TrackOnly] {
            let projected: Vec<String> = enumerate_paths(&t, scheme)
                .iter()
                .map(|e| match &e.terminal_value {
                    Some(v) => format!("{}/{v}", plain(&e.labels)),
                    None => plain(&e.labels),
                })
                .collect();
            prop_assert_eq!(&projected, &base);
        }
    }

    #[test]
    fn sparse_is_binary(corpus in prop::collection::vec(arb_tree(), 1..6)) {
        for scheme in [LabelingScheme::Plain, LabelingScheme::GlobalOrder, LabelingScheme::TypeOrder] {
            let v = Vocabulary::fit(VectorKind::SparseBinary, scheme, Scope::All, &corpus).unwrap();
            for t in &corpus {
                let x = vectorize::<f64>(t, &v);
                prop_assert_eq!(x.len(), v.len());
                prop_assert!(x.values.iter().all(|&e| e == 0.0 || e == 1.0));
                prop_assert!(x.values.iter().any(|&e| e == 1.0));
            }
        }
    }

    #[test]
    fn dimensions_add_across_subtrees(corpus in prop::collection::vec(arb_tree(), 1..6)) {
        for kind in [VectorKind::SparseBinary, VectorKind::TrackTypeAware] {
            let dim = |scope| Vocabulary::fit(kind, LabelingScheme::TrackOnly, scope, &corpus).unwrap().len();
            prop_assert_eq!(dim(Scope::All), dim(Scope::Container) + dim(Scope::Codec));
        }
    }

    #[test]
    fn vocabulary_ignores_corpus_order(mut corpus in prop::collection::vec(arb_tree(), 2..6), k in 0usize..5) {
        let a = Vocabulary::fit(VectorKind::TrackTypeAware, LabelingScheme::TrackOnly, Scope::All, &corpus).unwrap();
        let len = corpus.len();
        corpus.rotate_left(k % len);
        corpus.reverse();
        let b = Vocabulary::fit(VectorKind::TrackTypeAware, LabelingScheme::TrackOnly, Scope::All, &corpus).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn hash_ignores_values(t in arb_tree()) {
        let mut u = t.clone();
        map_values(&mut u.root, &|v| format!("{v}9"));
        prop_assert_eq!(vidsource::metaclass::signature(&t, vidsource::metaclass::Abstraction::Hash),
                        vidsource::metaclass::signature(&u, vidsource::metaclass::Abstraction::Hash));
    }

    #[test]
    fn relabel_keeps_ldp(t in arb_tree()) {
        let mut u = t.clone();
        relabel(&mut u.root);
        prop_assert_ne!(tree_hash(&t), tree_hash(&u));
        prop_assert_eq!(ldp_embed(&t), ldp_embed(&u));
    }

    #[test]
    fn tree_is_scale_invariant(
        rows in prop::collection::vec((prop::collection::vec(-50i32..50, 3), 0usize..3), 4..30),
        scale in 1u32..20,
    ) {
        let x: Vec<Vec<f64>> = rows.iter().map(|(r, _)| r.iter().map(|&v| f64::from(v)).collect()).collect();
        let y: Vec<usize> = rows.iter().map(|(_, c)| *c).collect();
        let w = balanced_weights::<f64>(&y, 3);
        let xs: Vec<Vec<f64>> = x.iter().map(|r| r.iter().map(|v| v * f64::from(scale)).collect()).collect();
        let a = DecisionTree::fit(&x, &y, &w).unwrap();
        let b = DecisionTree::fit(&xs, &y, &w).unwrap();
        for (r, rs) in x.iter().zip(&xs) {
            prop_assert_eq!(a.predict(r).unwrap(), b.predict(rs).unwrap());
        }
    }

    #[test]
    fn tree_fits_distinct_rows(rows in prop::collection::btree_map(prop::collection::vec(0i32..6, 2), 0usize..4, 1..25)) {
        let x: Vec<Vec<f64>> = rows.keys().map(|r| r.iter().map(|&v| f64::from(v)).collect()).collect();
        let y: Vec<usize> = rows.values().copied().collect();
        let w = vec![1.0f64; 4];
        let t = DecisionTree::fit(&x, &y, &w).unwrap();
        for (r, &c) in x.iter().zip(&y) {
            prop_assert_eq!(t.predict(r).unwrap(), c);
        }
    }

    #[test]
    fn balanced_accuracy_ignores_sample_order(
        pairs in prop::collection::vec((0usize..4, 0usize..4), 1..60),
        k in 0usize..60,
    ) {
        let (t, p): (Vec<usize>, Vec<usize>) = pairs.iter().copied().unzip();
        let mut shuffled = pairs.clone();
        shuffled.rotate_left(k % pairs.len());
        shuffled.reverse();
        let (ts, ps): (Vec<usize>, Vec<usize>) = shuffled.into_iter().unzip();
        let a = balanced_accuracy(&t, &p).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert_eq!(a, balanced_accuracy(&ts, &ps).unwrap());
    }

    #[test]
    fn weights_balance_class_mass(labels in prop::collection::vec(0usize..5, 1..80)) {
        let w = balanced_weights::<f64>(&labels, 5);
        let k = w.iter().filter(|&&v| v > 0.0).count() as f64;
        for c in 0..5 {
            let n_c = labels.iter().filter(|&&l| l == c).count() as f64;
            if n_c > 0.0 {
                prop_assert!((n_c * w[c] - labels.len() as f64 / k).abs() < 1e-9);
            } else {
                prop_assert_eq!(w[c], 0.0);
            }
        }
    }
}
