//! Planar rooted trees indexing the products `m_d`.
//!
//! A tree is stored as a node arena. Every node except the root point owns
//! the edge joining it to its parent, so edge ids coincide with node ids of
//! the upper endpoint. The trunk is the edge owned by `top`.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("arity {0} is below 2")]
    InvalidArity(usize),
    #[error("edge {0} is not an interior edge")]
    NotInteriorEdge(usize),
    #[error("tree is not in the codimension-one stratum")]
    NotCodimOne,
    #[error("index {index} out of range for {leaves} leaves")]
    IndexOutOfRange { index: usize, leaves: usize },
    #[error("cannot parse tree string: {0}")]
    Parse(String),
}

/// Edge identifier: the node id at the end of the edge away from the root.
pub type EdgeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Node {
    parent: Option<usize>,
    children: Vec<usize>,
    leaf: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FukayaTree {
    nodes: Vec<Node>,
    top: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Shape {
    Leaf,
    Join(Vec<Shape>),
}

impl FukayaTree {
    fn from_shape(shape: &Shape) -> Self {
        let mut nodes = Vec::new();
        let mut next_leaf = 0;
        fn build(s: &Shape, parent: Option<usize>, nodes: &mut Vec<Node>, next: &mut usize) -> usize {
            let id = nodes.len();
            nodes.push(Node { parent, children: Vec::new(), leaf: None });
            match s {
                Shape::Leaf => {
                    nodes[id].leaf = Some(*next);
                    *next += 1;
                }
                Shape::Join(cs) => {
                    for c in cs {
                        let cid = build(c, Some(id), nodes, next);
                        nodes[id].children.push(cid);
                    }
                }
            }
            id
        }
        let top = build(shape, None, &mut nodes, &mut next_leaf);
        FukayaTree { nodes, top }
    }

    fn shape_at(&self, n: usize) -> Shape {
        let node = &self.nodes[n];
        if node.leaf.is_some() {
            Shape::Leaf
        } else {
            Shape::Join(node.children.iter().map(|&c| self.shape_at(c)).collect())
        }
    }

    fn shape(&self) -> Shape {
        self.shape_at(self.top)
    }

    /// The tree with a single edge.
    pub fn single() -> Self {
        Self::from_shape(&Shape::Leaf)
    }

    /// The corolla with `d` leaves attached to one vertex.
    pub fn corolla(d: usize) -> Result<Self, TreeError> {
        if d < 2 {
            return Err(TreeError::InvalidArity(d));
        }
        Ok(Self::from_shape(&Shape::Join(vec![Shape::Leaf; d])))
    }

    /// Parses the nested-parenthesis form, e.g. `"((1 2) 3)"`.
    ///
    /// Leaf labels must read `1..d` from left to right.
    pub fn parse(s: &str) -> Result<Self, TreeError> {
        let toks: Vec<String> = s
            .replace('(', " ( ")
            .replace(')', " ) ")
            .split_whitespace()
            .map(str::to_string)
            .collect();
        let mut pos = 0;
        let mut expect = 1usize;
        fn go(t: &[String], pos: &mut usize, expect: &mut usize) -> Result<Shape, TreeError> {
            let tok = t.get(*pos).ok_or_else(|| TreeError::Parse("unexpected end".into()))?;
            *pos += 1;
            if tok == "(" {
                let mut cs = Vec::new();
                loop {
                    match t.get(*pos).map(String::as_str) {
                        Some(")") => {
                            *pos += 1;
                            break;
                        }
                        Some(_) => cs.push(go(t, pos, expect)?),
                        None => return Err(TreeError::Parse("unbalanced parenthesis".into())),
                    }
                }
                if cs.len() < 2 {
                    return Err(TreeError::Parse("vertex with fewer than two children".into()));
                }
                Ok(Shape::Join(cs))
            } else {
                let k: usize = tok.parse().map_err(|_| TreeError::Parse(format!("bad token {tok}")))?;
                if k != *expect {
                    return Err(TreeError::Parse(format!("leaf {k} out of order")));
                }
                *expect += 1;
                Ok(Shape::Leaf)
            }
        }
        let shape = go(&toks, &mut pos, &mut expect)?;
        if pos != toks.len() {
            return Err(TreeError::Parse("trailing tokens".into()));
        }
        Ok(Self::from_shape(&shape))
    }

    pub fn num_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| n.leaf.is_some()).count()
    }

    /// Node id at the top of the trunk.
    pub fn top(&self) -> usize {
        self.top
    }

    pub fn root_edge(&self) -> EdgeId {
        self.top
    }

    /// Number of nodes (leaf endpoints and interior vertices, not the root point).
    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn children(&self, n: usize) -> &[usize] {
        &self.nodes[n].children
    }

    pub fn parent(&self, n: usize) -> Option<usize> {
        self.nodes[n].parent
    }

    /// Zero-based leaf index if `n` is a leaf.
    pub fn leaf_index(&self, n: usize) -> Option<usize> {
        self.nodes[n].leaf
    }

    pub fn is_leaf(&self, n: usize) -> bool {
        self.nodes[n].leaf.is_some()
    }

    /// Leaf node ids in planar order.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(self.top, &mut out);
        out
    }

    fn collect_leaves(&self, n: usize, out: &mut Vec<usize>) {
        if self.is_leaf(n) {
            out.push(n);
        }
        for &c in &self.nodes[n].children {
            self.collect_leaves(c, out);
        }
    }

    /// Interior vertices, in depth-first planar order.
    pub fn vertices(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&n| !self.is_leaf(n)).collect()
    }

    /// All edges, one per node.
    pub fn edges(&self) -> Vec<EdgeId> {
        (0..self.nodes.len()).collect()
    }

    /// Edges joining two interior vertices.
    pub fn interior_edges(&self) -> Vec<EdgeId> {
        (0..self.nodes.len()).filter(|&e| self.is_interior_edge(e)).collect()
    }

    pub fn is_interior_edge(&self, e: EdgeId) -> bool {
        e < self.nodes.len() && e != self.top && !self.is_leaf(e)
    }

    /// Valency of an interior vertex: children plus the edge below.
    pub fn valency(&self, v: usize) -> usize {
        self.nodes[v].children.len() + 1
    }

    pub fn is_generic(&self) -> bool {
        self.vertices().iter().all(|&v| self.valency(v) == 3)
    }

    /// Zero-based leaf indices lying above edge `e`.
    pub fn leaves_above(&self, e: EdgeId) -> Vec<usize> {
        let mut out = Vec::new();
        self.collect_leaves(e, &mut out);
        out.into_iter().map(|n| self.nodes[n].leaf.unwrap()).collect()
    }

    /// Canonical nested-parenthesis string with one-based leaf labels.
    pub fn canonical(&self) -> String {
        fn go(t: &FukayaTree, n: usize, out: &mut String) {
            match t.nodes[n].leaf {
                Some(k) => out.push_str(&(k + 1).to_string()),
                None => {
                    out.push('(');
                    for (i, &c) in t.nodes[n].children.iter().enumerate() {
                        if i > 0 {
                            out.push(' ');
                        }
                        go(t, c, out);
                    }
                    out.push(')');
                }
            }
        }
        let mut s = String::new();
        go(self, self.top, &mut s);
        s
    }

    /// Contracts the interior edge `e`; the children of `e` are spliced into
    /// its parent at the position of `e`.
    pub fn collapse_edge(&self, e: EdgeId) -> Result<Self, TreeError> {
        if !self.is_interior_edge(e) {
            return Err(TreeError::NotInteriorEdge(e));
        }
        fn go(t: &FukayaTree, n: usize, cut: usize) -> Shape {
            if t.is_leaf(n) {
                return Shape::Leaf;
            }
            let mut cs = Vec::new();
            for &c in &t.nodes[n].children {
                if c == cut {
                    for &g in &t.nodes[c].children {
                        cs.push(go(t, g, cut));
                    }
                } else {
                    cs.push(go(t, c, cut));
                }
            }
            Shape::Join(cs)
        }
        Ok(Self::from_shape(&go(self, self.top, e)))
    }

    /// The two generic trees collapsing onto a tree with exactly one
    /// valency-4 vertex, together with the new interior edge in each.
    pub fn expansions(&self) -> Result<((Self, EdgeId), (Self, EdgeId)), TreeError> {
        let vs = self.vertices();
        let big: Vec<usize> = vs.iter().copied().filter(|&v| self.valency(v) != 3).collect();
        if big.len() != 1 || self.valency(big[0]) != 4 {
            return Err(TreeError::NotCodimOne);
        }
        let v = big[0];
        let mk = |left: bool| -> (Self, EdgeId) {
            fn go(t: &FukayaTree, n: usize, v: usize, left: bool) -> Shape {
                if t.is_leaf(n) {
                    return Shape::Leaf;
                }
                let cs: Vec<Shape> = t.nodes[n].children.iter().map(|&c| go(t, c, v, left)).collect();
                if n == v {
                    let mut it = cs.into_iter();
                    let (a, b, c) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                    if left {
                        Shape::Join(vec![Shape::Join(vec![a, b]), c])
                    } else {
                        Shape::Join(vec![a, Shape::Join(vec![b, c])])
                    }
                } else {
                    Shape::Join(cs)
                }
            }
            let t = Self::from_shape(&go(self, self.top, v, left));
            // the new edge is the unique interior edge whose collapse gives back self
            let e = t
                .interior_edges()
                .into_iter()
                .find(|&e| t.collapse_edge(e).map(|c| c == *self).unwrap_or(false))
                .expect("expansion must collapse back");
            (t, e)
        };
        Ok((mk(true), mk(false)))
    }

    /// Grafts the trunk of `ta` onto leaf `j + 1` (one-based) of `tb`.
    pub fn connected_sum(ta: &Self, j: usize, tb: &Self) -> Result<Self, TreeError> {
        let lb = tb.num_leaves();
        if j + 1 > lb || j + 1 == 0 {
            return Err(TreeError::IndexOutOfRange { index: j + 1, leaves: lb });
        }
        fn go(t: &FukayaTree, n: usize, target: usize, graft: &Shape) -> Shape {
            match t.nodes[n].leaf {
                Some(k) if k == target => graft.clone(),
                Some(_) => Shape::Leaf,
                None => Shape::Join(t.nodes[n].children.iter().map(|&c| go(t, c, target, graft)).collect()),
            }
        }
        Ok(Self::from_shape(&go(tb, tb.top, j, &ta.shape())))
    }

    /// Generation of an edge: the largest number of edges on a monotone
    /// path from its lower endpoint to a leaf.
    pub fn generation(&self, e: EdgeId) -> usize {
        if self.is_leaf(e) {
            1
        } else {
            1 + self.nodes[e].children.iter().map(|&c| self.generation(c)).max().unwrap()
        }
    }

    /// Height of the tree, the generation of its trunk.
    pub fn height(&self) -> usize {
        self.generation(self.top)
    }

    pub fn counters(&self) -> TreeCounters {
        let mut n_e = BTreeMap::new();
        let mut n_v = BTreeMap::new();
        for e in self.edges() {
            if self.is_leaf(e) {
                n_e.insert(e, 1);
            } else {
                let above = self.interior_edges_above(e);
                n_v.insert(e, above + 1);
                n_e.insert(e, above + 2);
            }
        }
        TreeCounters { n_t: self.num_leaves() - 1, n_e, n_v }
    }

    fn interior_edges_above(&self, v: usize) -> usize {
        self.nodes[v]
            .children
            .iter()
            .map(|&c| if self.is_leaf(c) { 0 } else { 1 + self.interior_edges_above(c) })
            .sum()
    }

    pub fn to_json(&self) -> TreeJson {
        let edges = self
            .edges()
            .into_iter()
            .map(|e| EdgeJson {
                id: e,
                from: self.nodes[e].parent,
                to: e,
                kind: if e == self.top {
                    "root"
                } else if self.is_leaf(e) {
                    "leaf"
                } else {
                    "interior"
                }
                .to_string(),
            })
            .collect();
        TreeJson {
            canonical: self.canonical(),
            leaves: self.leaves(),
            edges,
            children: self.vertices().into_iter().map(|v| (v, self.nodes[v].children.clone())).collect(),
        }
    }
}

impl fmt::Display for FukayaTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.canonical())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct EdgeJson {
    pub id: usize,
    pub from: Option<usize>,
    pub to: usize,
    pub kind: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct TreeJson {
    pub canonical: String,
    pub leaves: Vec<usize>,
    pub edges: Vec<EdgeJson>,
    pub children: BTreeMap<usize, Vec<usize>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeCounters {
    pub n_t: usize,
    pub n_e: BTreeMap<EdgeId, usize>,
    pub n_v: BTreeMap<usize, usize>,
}

/// All planar binary trees with `d` ordered leaves, each exactly once.
///
/// Order: the split of the leaves at the top vertex increases, then
/// recursively left before right.
pub fn enumerate_generic(d: usize) -> Result<Vec<FukayaTree>, TreeError> {
    if d < 2 {
        return Err(TreeError::InvalidArity(d));
    }
    fn shapes(d: usize, memo: &mut BTreeMap<usize, Vec<Shape>>) -> Vec<Shape> {
        if let Some(v) = memo.get(&d) {
            return v.clone();
        }
        let out = if d == 1 {
            vec![Shape::Leaf]
        } else {
            let mut out = Vec::new();
            for k in 1..d {
                let ls = shapes(k, memo);
                let rs = shapes(d - k, memo);
                for l in &ls {
                    for r in &rs {
                        out.push(Shape::Join(vec![l.clone(), r.clone()]));
                    }
                }
            }
            out
        };
        memo.insert(d, out.clone());
        out
    }
    let mut memo = BTreeMap::new();
    Ok(shapes(d, &mut memo).iter().map(FukayaTree::from_shape).collect())
}

/// A Fukaya embedding: node `i` of the source goes to `nodes[i]` of the target.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Embedding {
    pub nodes: Vec<usize>,
    /// Zero-based target leaf receiving the first source leaf.
    pub first_leaf: usize,
}

/// All injective, non surjective simplicial maps `t0 -> t1` sending the
/// leaves of `t0` increasingly onto consecutive leaves of `t1`.
pub fn fukaya_embeddings(t0: &FukayaTree, t1: &FukayaTree) -> Vec<Embedding> {
    fn matches(t0: &FukayaTree, a: usize, t1: &FukayaTree, b: usize, map: &mut Vec<usize>) -> bool {
        map[a] = b;
        match (t0.is_leaf(a), t1.is_leaf(b)) {
            (true, true) => true,
            (false, false) => {
                let ca = t0.children(a);
                let cb = t1.children(b);
                ca.len() == cb.len() && ca.iter().zip(cb).all(|(&x, &y)| matches(t0, x, t1, y, map))
            }
            _ => false,
        }
    }
    let mut out = Vec::new();
    for b in 0..t1.num_nodes() {
        let mut map = vec![usize::MAX; t0.num_nodes()];
        if !matches(t0, t0.top, t1, b, &mut map) {
            continue;
        }
        let surjective = b == t1.top && t0.num_nodes() == t1.num_nodes();
        if surjective {
            continue;
        }
        let first_leaf = t1.leaf_index(map[t0.leaves()[0]]).unwrap();
        out.push(Embedding { nodes: map, first_leaf });
    }
    out.sort();
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeLabel {
    /// Generation of the edge.
    pub h: usize,
    /// One-based index of the leftmost leaf whose maximal path contains the edge.
    pub j: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Forest {
    pub trees: Vec<FukayaTree>,
}

impl Forest {
    pub fn new(trees: Vec<FukayaTree>) -> Self {
        Forest { trees }
    }

    pub fn height(&self) -> usize {
        self.trees.iter().map(FukayaTree::height).max().unwrap_or(0)
    }

    pub fn num_leaves(&self) -> usize {
        self.trees.iter().map(FukayaTree::num_leaves).sum()
    }

    /// Erases every trunk of maximal generation; each tree of full height
    /// splits into the subtrees sitting on its top vertex.
    pub fn contract(&self) -> Forest {
        let h = self.height();
        let mut out = Vec::new();
        for t in &self.trees {
            if t.height() == h && !t.is_leaf(t.top) {
                for &c in t.children(t.top) {
                    out.push(FukayaTree::from_shape(&t.shape_at(c)));
                }
            } else if t.height() < h {
                out.push(t.clone());
            }
        }
        Forest { trees: out }
    }
}

/// Labels `(tree index, edge) -> e_h^j` for every edge of the forest.
pub fn standard_labels(f: &Forest) -> BTreeMap<(usize, EdgeId), EdgeLabel> {
    let mut out = BTreeMap::new();
    let mut offset = 0;
    for (ti, t) in f.trees.iter().enumerate() {
        for e in t.edges() {
            let j = offset + t.leaves_above(e).into_iter().min().unwrap() + 1;
            out.insert((ti, e), EdgeLabel { h: t.generation(e), j });
        }
        offset += t.num_leaves();
    }
    out
}

/// Labels of a single tree viewed as a one-tree forest.
pub fn tree_labels(t: &FukayaTree) -> BTreeMap<EdgeId, EdgeLabel> {
    standard_labels(&Forest::new(vec![t.clone()]))
        .into_iter()
        .map(|((_, e), l)| (e, l))
        .collect()
}

pub fn catalan(n: usize) -> u128 {
    let mut c: u128 = 1;
    for i in 0..n as u128 {
        c = c * 2 * (2 * i + 1) / (i + 2);
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count_binary(d: usize) -> u128 {
        if d == 1 {
            return 1;
        }
        (1..d).map(|k| count_binary(k) * count_binary(d - k)).sum()
    }

    #[test]
    fn census_matches_recursive_count() {
        for d in 2..=8 {
            let ts = enumerate_generic(d).unwrap();
            assert_eq!(ts.len() as u128, count_binary(d));
            assert_eq!(ts.len() as u128, catalan(d - 1));
            let mut names: Vec<String> = ts.iter().map(|t| t.canonical()).collect();
            names.sort();
            names.dedup();
            assert_eq!(names.len(), ts.len());
        }
        assert_eq!(enumerate_generic(1), Err(TreeError::InvalidArity(1)));
    }

    #[test]
    fn parse_round_trip() {
        for d in 2..=6 {
            for t in enumerate_generic(d).unwrap() {
                assert_eq!(FukayaTree::parse(&t.canonical()).unwrap(), t);
            }
        }
        assert!(FukayaTree::parse("((2 1) 3)").is_err());
        assert!(FukayaTree::parse("((1 2) 3").is_err());
    }

    #[test]
    fn collapse_three_leaf_gives_corolla() {
        let c3 = FukayaTree::corolla(3).unwrap();
        for t in enumerate_generic(3).unwrap() {
            let ie = t.interior_edges();
            assert_eq!(ie.len(), 1);
            assert_eq!(t.collapse_edge(ie[0]).unwrap(), c3);
            let leaf = t.leaves()[0];
            assert_eq!(t.collapse_edge(leaf), Err(TreeError::NotInteriorEdge(leaf)));
            assert_eq!(t.collapse_edge(t.root_edge()), Err(TreeError::NotInteriorEdge(t.root_edge())));
        }
    }

    #[test]
    fn comb_upper_edge_collapse() {
        let comb = FukayaTree::parse("(((1 2) 3) 4)").unwrap();
        // the upper interior edge carries leaves 1 and 2
        let e = comb.interior_edges().into_iter().find(|&e| comb.leaves_above(e) == vec![0, 1]).unwrap();
        let c = comb.collapse_edge(e).unwrap();
        let census: Vec<usize> = c.vertices().iter().map(|&v| c.valency(v)).collect();
        let mut sorted = census.clone();
        sorted.sort();
        assert_eq!(sorted, vec![3, 4]);
        assert_eq!(c.canonical(), "((1 2 3) 4)");
        assert_eq!(c.interior_edges().len(), comb.interior_edges().len() - 1);
    }

    #[test]
    fn expansions_of_corolla() {
        let c3 = FukayaTree::corolla(3).unwrap();
        let ((a, ea), (b, eb)) = c3.expansions().unwrap();
        let mut got = vec![a.canonical(), b.canonical()];
        got.sort();
        assert_eq!(got, vec!["((1 2) 3)".to_string(), "(1 (2 3))".to_string()]);
        assert_eq!(a.collapse_edge(ea).unwrap(), c3);
        assert_eq!(b.collapse_edge(eb).unwrap(), c3);
        let g = FukayaTree::parse("((1 2) 3)").unwrap();
        assert_eq!(g.expansions().unwrap_err(), TreeError::NotCodimOne);
    }

    #[test]
    fn connected_sum_of_corollas() {
        let c2 = FukayaTree::corolla(2).unwrap();
        let s = FukayaTree::connected_sum(&c2, 0, &c2).unwrap();
        assert!(enumerate_generic(3).unwrap().contains(&s));
        assert_eq!(s.canonical(), "((1 2) 3)");
        let s2 = FukayaTree::connected_sum(&c2, 1, &c2).unwrap();
        assert_eq!(s2.canonical(), "(1 (2 3))");
        assert!(matches!(
            FukayaTree::connected_sum(&c2, 2, &c2),
            Err(TreeError::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn labels_of_small_trees() {
        let c2 = FukayaTree::corolla(2).unwrap();
        let l = tree_labels(&c2);
        let leaves = c2.leaves();
        assert_eq!(l[&leaves[0]], EdgeLabel { h: 1, j: 1 });
        assert_eq!(l[&leaves[1]], EdgeLabel { h: 1, j: 2 });
        assert_eq!(l[&c2.root_edge()], EdgeLabel { h: 2, j: 1 });
        let one = FukayaTree::single();
        assert_eq!(tree_labels(&one)[&one.root_edge()], EdgeLabel { h: 1, j: 1 });
    }

    #[test]
    fn counters_small() {
        let c2 = FukayaTree::corolla(2).unwrap();
        assert_eq!(c2.counters().n_v[&c2.top()], 1);
        let comb = FukayaTree::parse("(((1 2) 3) 4)").unwrap();
        let c = comb.counters();
        assert_eq!(c.n_t, 3);
        assert_eq!(c.n_e[&comb.root_edge()], c.n_v[&comb.top()] + 1);
    }
}
