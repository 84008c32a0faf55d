//! Stable and unstable sets, transverse intersections and the recursion over
//! decorated trees.

use super::decor::Decor;
use super::field::{FlowField, FlowTrace};
use super::geom::{det, fmt_q, same_ray, segment_hit, strictly_ccw_between, Lattice, Pt, Q};
use super::surface::{PLFunction, PLSurface, VertexKind};
use super::FlowError;
use crate::trees::{tree_labels, EdgeId, FukayaTree};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

/// Weighted oriented polyline; orientation is the order of the points.
pub type Piece = (Vec<Pt>, i64);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Separatrices {
    pub saddle: usize,
    /// Backward orbits from the saddle, in fan order.
    pub stable_branches: Vec<FlowTrace>,
    /// Forward orbits from the saddle, in fan order.
    pub unstable_branches: Vec<FlowTrace>,
    /// Oriented stable curve through the saddle.
    pub stable: Vec<Pt>,
    /// Oriented unstable curve through the saddle.
    pub unstable: Vec<Pt>,
    /// Flow direction of the first stable branch at the saddle.
    pub w: Pt,
    /// Directions of the unstable branches at the saddle.
    pub out_dirs: Vec<Pt>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum StableGeometry {
    Point(String, String),
    Curve(Vec<(String, String)>),
    Region,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StableSet {
    pub owner: String,
    pub dimension: usize,
    pub geometry: StableGeometry,
}

/// Membership or multiplicity oracle of a two-dimensional set.
#[derive(Debug, Clone)]
pub enum Region {
    /// Stable set of a minimum under `g^k X`.
    Basin { min: usize, k: i64 },
    /// Unstable set of a maximum under `g^k X`.
    Source { max: usize, k: i64 },
    /// Backward saturation of a weighted curve under `g^k X`.
    Sweep { pieces: Arc<Vec<Piece>>, factors: Vec<Region>, k: i64 },
    /// The invariant strip of `g^k X`, when the engine has one.
    Band { k: i64 },
}

#[derive(Debug, Clone)]
pub enum SetVal {
    Points { pts: Vec<(Pt, i64)>, excess: bool },
    Curve { pieces: Vec<Piece>, factors: Vec<Region>, excess: bool },
    Region { factors: Vec<Region>, excess: bool },
}

impl SetVal {
    pub fn dim(&self) -> i64 {
        match self {
            SetVal::Points { .. } => 0,
            SetVal::Curve { .. } => 1,
            SetVal::Region { .. } => 2,
        }
    }

    fn excess(&self) -> bool {
        match self {
            SetVal::Points { excess, .. } | SetVal::Curve { excess, .. } | SetVal::Region { excess, .. } => *excess,
        }
    }

    fn is_empty(&self) -> bool {
        match self {
            SetVal::Points { pts, .. } => pts.is_empty(),
            SetVal::Curve { pieces, .. } => pieces.is_empty(),
            SetVal::Region { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Loc {
    V(usize),
    E(usize),
}

fn loc_of(seg: usize, t: &Q) -> Loc {
    use num_traits::{One, Zero};
    if t.is_zero() {
        Loc::V(seg)
    } else if t.is_one() {
        Loc::V(seg + 1)
    } else {
        Loc::E(seg)
    }
}

fn rays(poly: &[Pt], loc: Loc, x: &Pt) -> Option<(Pt, Pt)> {
    match loc {
        Loc::V(k) => {
            if k == 0 || k + 1 >= poly.len() {
                None
            } else {
                Some((&poly[k - 1] - &poly[k], &poly[k + 1] - &poly[k]))
            }
        }
        Loc::E(i) => Some((&poly[i] - x, &poly[i + 1] - x)),
    }
}

fn bbox(a: &Pt, b: &Pt) -> (Q, Q, Q, Q) {
    let (x0, x1) = if a.x <= b.x { (a.x.clone(), b.x.clone()) } else { (b.x.clone(), a.x.clone()) };
    let (y0, y1) = if a.y <= b.y { (a.y.clone(), b.y.clone()) } else { (b.y.clone(), a.y.clone()) };
    (x0, x1, y0, y1)
}

fn shift_range(lo_a: &Q, hi_a: &Q, lo_b: &Q, hi_b: &Q, p: &Q) -> (i64, i64) {
    use num_traits::ToPrimitive;
    let lo = ((lo_a - hi_b) / p).ceil().to_integer().to_i64().unwrap();
    let hi = ((hi_a - lo_b) / p).floor().to_integer().to_i64().unwrap();
    (lo, hi)
}

/// Lattice translates `S` with the boxes of `a` and `b + S` overlapping.
fn box_shifts(lat: &Lattice, a: &(Q, Q, Q, Q), b: &(Q, Q, Q, Q)) -> Vec<Pt> {
    match &lat.period {
        None => {
            if a.1 < b.0 || b.1 < a.0 || a.3 < b.2 || b.3 < a.2 {
                vec![]
            } else {
                vec![Pt::zero()]
            }
        }
        Some((px, py)) => {
            let (i0, i1) = shift_range(&a.0, &a.1, &b.0, &b.1, px);
            let (j0, j1) = shift_range(&a.2, &a.3, &b.2, &b.3, py);
            let mut out = Vec::new();
            for i in i0..=i1 {
                for j in j0..=j1 {
                    out.push(lat.shift(i, j));
                }
            }
            out
        }
    }
}

fn on_polyline(lat: &Lattice, p: &Pt, poly: &[Pt]) -> Result<bool, FlowError> {
    if poly.len() == 1 {
        return Ok(lat.same(p, &poly[0]));
    }
    crossings_raw(lat, &[p.clone(), p.clone()], poly).map(|h| !h.is_empty())
}

type RawHit = (Loc, Loc, Pt, Pt);

fn crossings_raw(lat: &Lattice, a: &[Pt], b: &[Pt]) -> Result<Vec<RawHit>, FlowError> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let bb: Vec<_> = b.windows(2).map(|w| bbox(&w[0], &w[1])).collect();
    for (i, sa) in a.windows(2).enumerate() {
        let ba = bbox(&sa[0], &sa[1]);
        for (j, sb) in b.windows(2).enumerate() {
            for sh in box_shifts(lat, &ba, &bb[j]) {
                let q0 = &sb[0] + &sh;
                let q1 = &sb[1] + &sh;
                let hit = segment_hit(&sa[0], &sa[1], &q0, &q1)
                    .map_err(|_| FlowError::Degenerate("curves overlap along a segment".into()))?;
                if let Some((x, t, u)) = hit {
                    let key = (loc_of(i, &t), loc_of(j, &u), sh.clone());
                    if seen.insert(key.clone()) {
                        out.push((key.0, key.1, x, sh));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Transverse crossings of `a` and `b`, as points on `a` with the sign of
/// `det[tangent a, tangent b]`. Touching, overlaps and endpoint hits are
/// degenerate.
pub fn crossings(lat: &Lattice, a: &[Pt], b: &[Pt]) -> Result<Vec<(Pt, i32)>, FlowError> {
    if a.len() == 1 || b.len() == 1 {
        let (p, other) = if a.len() == 1 { (&a[0], b) } else { (&b[0], a) };
        if on_polyline(lat, p, other)? {
            return Err(FlowError::Degenerate("point lies on a curve".into()));
        }
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for (la, lb, x, sh) in crossings_raw(lat, a, b)? {
        let shifted: Vec<Pt> = b.iter().map(|p| p + &sh).collect();
        let (Some((a_back, a_fwd)), Some((b_back, b_fwd))) = (rays(a, la, &x), rays(&shifted, lb, &x)) else {
            // orbits sharing their limit point meet only at infinity
            if rays(a, la, &x).is_none() && rays(&shifted, lb, &x).is_none() {
                continue;
            }
            return Err(FlowError::Degenerate("curve endpoint meets another curve".into()));
        };
        for r in [&a_back, &a_fwd] {
            for s in [&b_back, &b_fwd] {
                if same_ray(r, s) {
                    return Err(FlowError::Degenerate("curves are tangent".into()));
                }
            }
        }
        let i1 = strictly_ccw_between(&a_fwd, &a_back, &b_fwd);
        let i2 = strictly_ccw_between(&a_fwd, &a_back, &b_back);
        if i1 == i2 {
            return Err(FlowError::Degenerate("curves touch without crossing".into()));
        }
        out.push((x, if i1 { 1 } else { -1 }));
    }
    Ok(out)
}

/// Immutable flow data with a decoration `Φ`; edge `k` uses `Φ^k_* X`.
#[derive(Debug, Clone)]
pub struct Engine {
    pub surface: PLSurface,
    pub function: PLFunction,
    pub field: FlowField,
    pub backward: FlowField,
    pub critical: Vec<(usize, VertexKind)>,
    pub separatrices: BTreeMap<usize, Separatrices>,
    pub decor: Decor,
    /// Restricts every set to the strip of points whose backward limit lies
    /// this far above their forward limit.
    pub strip: Option<Q>,
}

fn reversed(v: &[Pt]) -> Vec<Pt> {
    v.iter().rev().cloned().collect()
}

fn join(first: Vec<Pt>, second: &[Pt]) -> Vec<Pt> {
    let mut out = first;
    out.extend_from_slice(&second[1..]);
    out
}

impl Engine {
    pub fn new(surface: PLSurface, function: PLFunction, g: Pt) -> Result<Self, FlowError> {
        Self::with_decor(surface, function, Decor::Translate(g), None)
    }

    pub fn with_decor(surface: PLSurface, function: PLFunction, decor: Decor, strip: Option<Q>) -> Result<Self, FlowError> {
        if !surface.is_closed() {
            return Err(FlowError::Unsupported("flow trees need a closed surface".into()));
        }
        let field = FlowField::build(&surface, &function)?;
        let backward = field.reversed();
        let critical: Vec<(usize, VertexKind)> = field.critical.iter().map(|(v, k)| (*v, *k)).collect();
        let mut e = Engine { surface, function, field, backward, critical, separatrices: BTreeMap::new(), decor, strip };
        for (v, k) in e.critical.clone() {
            if k == VertexKind::Saddle {
                let s = e.compute_separatrices(v)?;
                e.separatrices.insert(v, s);
            }
        }
        Ok(e)
    }

    pub fn kind(&self, v: usize) -> Option<VertexKind> {
        self.field.critical.get(&v).copied()
    }

    pub fn name(&self, v: usize) -> &str {
        &self.surface.names[v]
    }

    pub fn position(&self, v: usize) -> Pt {
        self.surface.vertices[v].clone()
    }

    fn compute_separatrices(&self, v: usize) -> Result<Separatrices, FlowError> {
        let s = &self.surface;
        let (incoming, outgoing) = self.field.saddle_sectors(s, v)?;
        let at = &s.vertices[v];
        let mut stable_branches = Vec::new();
        for (t, k, r) in &incoming {
            let off = at - &s.charts[*t][*k];
            let tr = self.backward.trace_from_corner(s, *t, *k, &off, r)?;
            if self.kind(tr.terminal.0) != Some(VertexKind::Max) {
                return Err(FlowError::Degenerate(format!("saddle connection into {}", s.names[v])));
            }
            stable_branches.push(tr);
        }
        let mut unstable_branches = Vec::new();
        for (t, k, d) in &outgoing {
            let off = at - &s.charts[*t][*k];
            let tr = self.field.trace_from_corner(s, *t, *k, &off, d)?;
            if self.kind(tr.terminal.0) != Some(VertexKind::Min) {
                return Err(FlowError::Degenerate(format!("saddle connection out of {}", s.names[v])));
            }
            unstable_branches.push(tr);
        }
        let w = -&incoming[0].2;
        let stable = join(reversed(&stable_branches[0].points), &stable_branches[1].points);
        let out_dirs: Vec<Pt> = outgoing.iter().map(|o| o.2.clone()).collect();
        // or(W^s) ∧ or(W^u) = or(M)
        let u_idx = if det(&w, &out_dirs[0]) > Q::from_integer(0.into()) { 0 } else { 1 };
        let unstable = join(reversed(&unstable_branches[1 - u_idx].points), &unstable_branches[u_idx].points);
        Ok(Separatrices { saddle: v, stable_branches, unstable_branches, stable, unstable, w, out_dirs })
    }

    fn translate(&self, poly: &[Pt], k: i64) -> Vec<Pt> {
        self.decor.image(poly, k)
    }

    fn strip_mult(&self, p: &Pt, k: i64) -> Result<i64, FlowError> {
        let Some(height) = &self.strip else { return Ok(1) };
        let pp = self.decor.inverse(p, k);
        if self.critical_at(&pp).is_some() {
            return Err(FlowError::Degenerate("strip queried at a critical point".into()));
        }
        let down = self.field.trace(&self.surface, &pp)?.terminal.1;
        let up = self.backward.trace(&self.surface, &pp)?.terminal.1;
        let rise = &up.y - &down.y;
        if rise == Q::from_integer(0.into()) {
            return Err(FlowError::Degenerate("point on the edge of the strip".into()));
        }
        Ok((rise == *height) as i64)
    }

    fn restrict(&self, v: SetVal, k: i64) -> Result<SetVal, FlowError> {
        if self.strip.is_none() {
            return Ok(v);
        }
        self.meet(&v, &SetVal::Region { factors: vec![Region::Band { k }], excess: false })
    }

    /// Critical vertex of the base field at `p`, if any.
    fn critical_at(&self, p: &Pt) -> Option<(usize, VertexKind)> {
        self.critical.iter().find(|(v, _)| self.surface.lattice.same(p, &self.surface.vertices[*v])).copied()
    }

    pub fn region_mult(&self, r: &Region, p: &Pt) -> Result<i64, FlowError> {
        match r {
            Region::Band { k } => self.strip_mult(p, *k),
            Region::Basin { min, k } => {
                let pp = self.decor.inverse(p, *k);
                match self.critical_at(&pp) {
                    Some((v, VertexKind::Min)) => return Ok((v == *min) as i64),
                    Some(_) => return Err(FlowError::Degenerate("basin queried at a critical point".into())),
                    None => {}
                }
                let t = self.field.trace(&self.surface, &pp)?;
                match self.kind(t.terminal.0) {
                    Some(VertexKind::Min) => Ok((t.terminal.0 == *min) as i64),
                    _ => Err(FlowError::Degenerate("query point on a stable separatrix".into())),
                }
            }
            Region::Source { max, k } => {
                let pp = self.decor.inverse(p, *k);
                match self.critical_at(&pp) {
                    Some((v, VertexKind::Max)) => return Ok((v == *max) as i64),
                    Some(_) => return Err(FlowError::Degenerate("source queried at a critical point".into())),
                    None => {}
                }
                let t = self.backward.trace(&self.surface, &pp)?;
                match self.kind(t.terminal.0) {
                    Some(VertexKind::Max) => Ok((t.terminal.0 == *max) as i64),
                    _ => Err(FlowError::Degenerate("query point on an unstable separatrix".into())),
                }
            }
            Region::Sweep { pieces, factors, k } => {
                let pp = self.decor.inverse(p, *k);
                let orbit = if self.critical_at(&pp).is_some() {
                    vec![p.clone()]
                } else {
                    self.translate(&self.field.trace(&self.surface, &pp)?.points, *k)
                };
                let mut total = 0;
                for (poly, w) in pieces.iter() {
                    for (q, sg) in crossings(&self.surface.lattice, poly, &orbit)? {
                        total += sg as i64 * w * self.factor_product(factors, &q)?;
                    }
                }
                Ok(total)
            }
        }
    }

    fn factor_product(&self, factors: &[Region], p: &Pt) -> Result<i64, FlowError> {
        let mut m = 1;
        for f in factors {
            m *= self.region_mult(f, p)?;
            if m == 0 {
                break;
            }
        }
        Ok(m)
    }

    /// `W^s(x, g^k X)`.
    pub fn stable_val(&self, x: usize, k: i64) -> Result<SetVal, FlowError> {
        Ok(match self.kind(x) {
            Some(VertexKind::Min) => SetVal::Region { factors: vec![Region::Basin { min: x, k }], excess: false },
            Some(VertexKind::Saddle) => SetVal::Curve {
                pieces: vec![(self.translate(&self.separatrices[&x].stable, k), 1)],
                factors: vec![],
                excess: false,
            },
            Some(VertexKind::Max) => SetVal::Points { pts: vec![(self.decor.apply(&self.position(x), k), 1)], excess: false },
            None => return Err(FlowError::Degenerate(format!("{} is not critical", self.name(x)))),
        })
    }

    /// `W^u(y, X)`.
    pub fn unstable_val(&self, y: usize) -> Result<SetVal, FlowError> {
        Ok(match self.kind(y) {
            Some(VertexKind::Min) => SetVal::Points { pts: vec![(self.position(y), 1)], excess: false },
            Some(VertexKind::Saddle) => SetVal::Curve {
                pieces: vec![(self.separatrices[&y].unstable.clone(), 1)],
                factors: vec![],
                excess: false,
            },
            Some(VertexKind::Max) => SetVal::Region { factors: vec![Region::Source { max: y, k: 0 }], excess: false },
            None => return Err(FlowError::Degenerate(format!("{} is not critical", self.name(y)))),
        })
    }

    pub fn stable_set(&self, x: usize) -> Result<StableSet, FlowError> {
        let kind = self.kind(x).ok_or_else(|| FlowError::Degenerate("not critical".into()))?;
        let geometry = match kind {
            VertexKind::Min => StableGeometry::Region,
            VertexKind::Saddle => StableGeometry::Curve(
                self.separatrices[&x].stable.iter().map(|p| (fmt_q(&p.x), fmt_q(&p.y))).collect(),
            ),
            VertexKind::Max => {
                let p = self.position(x);
                StableGeometry::Point(fmt_q(&p.x), fmt_q(&p.y))
            }
        };
        Ok(StableSet { owner: self.name(x).to_string(), dimension: 2 - kind.index(), geometry })
    }

    /// Transverse intersection (fiber product over the surface).
    pub fn meet(&self, a: &SetVal, b: &SetVal) -> Result<SetVal, FlowError> {
        let lat = &self.surface.lattice;
        let excess = a.excess() || b.excess();
        Ok(match (a, b) {
            (SetVal::Points { pts: pa, .. }, SetVal::Points { pts: pb, .. }) => {
                for (p, _) in pa {
                    if pb.iter().any(|(q, _)| lat.same(p, q)) {
                        return Err(FlowError::Degenerate("points coincide".into()));
                    }
                }
                SetVal::Points { pts: vec![], excess }
            }
            (SetVal::Points { pts, .. }, SetVal::Curve { pieces, .. })
            | (SetVal::Curve { pieces, .. }, SetVal::Points { pts, .. }) => {
                for (p, _) in pts {
                    for (poly, _) in pieces {
                        if on_polyline(lat, p, poly)? {
                            return Err(FlowError::Degenerate("point lies on a curve".into()));
                        }
                    }
                }
                SetVal::Points { pts: vec![], excess }
            }
            (SetVal::Points { pts, .. }, SetVal::Region { factors, .. })
            | (SetVal::Region { factors, .. }, SetVal::Points { pts, .. }) => {
                let mut out = Vec::new();
                for (p, w) in pts {
                    let m = self.factor_product(factors, p)?;
                    if m != 0 {
                        out.push((p.clone(), w * m));
                    }
                }
                SetVal::Points { pts: out, excess }
            }
            (SetVal::Curve { pieces: pa, factors: fa, .. }, SetVal::Curve { pieces: pb, factors: fb, .. }) => {
                let mut out = Vec::new();
                for (a_poly, wa) in pa {
                    for (b_poly, wb) in pb {
                        for (q, sg) in crossings(lat, a_poly, b_poly)? {
                            let m = self.factor_product(fa, &q)? * self.factor_product(fb, &q)?;
                            if m != 0 {
                                out.push((q, sg as i64 * wa * wb * m));
                            }
                        }
                    }
                }
                SetVal::Points { pts: out, excess }
            }
            (SetVal::Curve { pieces, factors, .. }, SetVal::Region { factors: fr, .. })
            | (SetVal::Region { factors: fr, .. }, SetVal::Curve { pieces, factors, .. }) => {
                let mut f = factors.clone();
                f.extend(fr.iter().cloned());
                SetVal::Curve { pieces: pieces.clone(), factors: f, excess }
            }
            (SetVal::Region { factors: fa, .. }, SetVal::Region { factors: fb, .. }) => {
                let mut f = fa.clone();
                f.extend(fb.iter().cloned());
                SetVal::Region { factors: f, excess }
            }
        })
    }

    /// Backward-orbit sweep under `g^k X` (fiber product with the semi-flow graph).
    pub fn sweep(&self, s: &SetVal, k: i64) -> Result<SetVal, FlowError> {
        Ok(match s {
            SetVal::Points { pts, excess } => {
                let mut pieces = Vec::new();
                for (p, w) in pts {
                    let pp = self.decor.inverse(p, k);
                    match self.critical_at(&pp) {
                        Some((_, VertexKind::Max)) => pieces.push((vec![p.clone()], *w)),
                        Some(_) => return Err(FlowError::Degenerate("sweep through a sink or saddle".into())),
                        None => {
                            let t = self.backward.trace(&self.surface, &pp)?;
                            pieces.push((self.translate(&t.points, k), *w));
                        }
                    }
                }
                SetVal::Curve { pieces, factors: vec![], excess: *excess }
            }
            SetVal::Curve { pieces, factors, excess } => {
                if pieces.iter().any(|(p, _)| p.len() == 1) {
                    return Err(FlowError::Degenerate("sweep of a collapsed curve".into()));
                }
                SetVal::Region {
                    factors: vec![Region::Sweep { pieces: Arc::new(pieces.clone()), factors: factors.clone(), k }],
                    excess: *excess,
                }
            }
            SetVal::Region { .. } => SetVal::Region { factors: vec![], excess: true },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeTrace {
    pub edge: usize,
    pub dimension: i64,
    pub points: Vec<(String, String, i64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiIntersectionResult {
    pub tree: String,
    pub entries: Vec<String>,
    pub output: String,
    pub count: i64,
    pub trace: Vec<NodeTrace>,
}

/// Field power of each edge: `g^{j-1}` for label `(h, j)`.
pub fn decoration_powers(t: &FukayaTree) -> BTreeMap<EdgeId, i64> {
    tree_labels(t).into_iter().map(|(e, l)| (e, l.j as i64 - 1)).collect()
}

fn stable_dim(e: &Engine, x: usize) -> i64 {
    2 - e.kind(x).map_or(0, |k| k.index() as i64)
}

fn record(trace: &mut Vec<NodeTrace>, edge: usize, v: &SetVal) {
    let points = match v {
        SetVal::Points { pts, .. } => pts.iter().map(|(p, w)| (fmt_q(&p.x), fmt_q(&p.y), *w)).collect(),
        _ => vec![],
    };
    trace.push(NodeTrace { edge, dimension: v.dim(), points });
}

impl Engine {
    fn eval_edge(
        &self,
        t: &FukayaTree,
        e: EdgeId,
        entries: &[usize],
        powers: &BTreeMap<EdgeId, i64>,
        trace: &mut Vec<NodeTrace>,
    ) -> Result<(SetVal, i64), FlowError> {
        let k = powers[&e];
        if let Some(i) = t.leaf_index(e) {
            let v = self.restrict(self.stable_val(entries[i], k)?, k)?;
            return Ok((v, stable_dim(self, entries[i])));
        }
        let mut acc: Option<(SetVal, i64)> = None;
        for &c in t.children(e) {
            let (v, d) = self.eval_edge(t, c, entries, powers, trace)?;
            acc = Some(match acc {
                None => (v, d),
                Some((a, da)) => (self.meet(&a, &v)?, da + d - 2),
            });
        }
        let (iv, dim) = acc.expect("interior vertex has children");
        check_dim(&iv, dim)?;
        record(trace, e, &iv);
        if e == t.root_edge() {
            return Ok((iv, dim));
        }
        let swept = self.restrict(self.sweep(&iv, k)?, k)?;
        check_dim(&swept, dim + 1)?;
        Ok((swept, dim + 1))
    }

    /// Signed count `<I_T(x_1..x_d), y>`.
    pub fn multi_intersection(&self, t: &FukayaTree, entries: &[usize], output: usize) -> Result<MultiIntersectionResult, FlowError> {
        if entries.len() != t.num_leaves() {
            return Err(FlowError::DimensionMismatch("entry count differs from leaf count".into()));
        }
        let mut res = MultiIntersectionResult {
            tree: t.canonical(),
            entries: entries.iter().map(|&x| self.name(x).to_string()).collect(),
            output: self.name(output).to_string(),
            count: 0,
            trace: vec![],
        };
        let d = entries.len() as i64;
        let predicted: i64 = entries.iter().map(|&x| stable_dim(self, x) - 2).sum::<i64>() + d - 2 + 2;
        let final_dim = predicted + (2 - stable_dim(self, output)) - 2;
        if final_dim != 0 {
            return Ok(res);
        }
        let powers = decoration_powers(t);
        let (root, _) = self.eval_edge(t, t.root_edge(), entries, &powers, &mut res.trace)?;
        let fin = self.meet(&root, &self.restrict(self.unstable_val(output)?, 0)?)?;
        if fin.is_empty() {
            return Ok(res);
        }
        let SetVal::Points { pts, excess } = fin else {
            return Err(FlowError::DimensionMismatch("final set is not zero-dimensional".into()));
        };
        if excess && !pts.is_empty() {
            return Err(FlowError::Degenerate("non-transverse sweep meets the output".into()));
        }
        res.count = pts.iter().map(|(_, w)| w).sum();
        Ok(res)
    }
}

fn check_dim(v: &SetVal, predicted: i64) -> Result<(), FlowError> {
    if predicted > 2 {
        if v.excess() || v.is_empty() {
            return Ok(());
        }
        return Err(FlowError::DimensionMismatch(format!("expected excess set of dimension {predicted}")));
    }
    if predicted < 0 {
        if v.is_empty() {
            return Ok(());
        }
        return Err(FlowError::DimensionMismatch(format!("nonempty set of negative dimension {predicted}")));
    }
    if v.dim() != predicted && !(v.is_empty() || v.excess()) {
        return Err(FlowError::DimensionMismatch(format!("set of dimension {} where {predicted} was predicted", v.dim())));
    }
    Ok(())
}
