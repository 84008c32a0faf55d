//! Piecewise constant descent fields and exact orbit tracing.

use super::geom::{det, orient, sign, Pt, Q};
use super::surface::{classify, PLFunction, PLSurface, VertexKind};
use super::FlowError;
use num_traits::{Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, VecDeque};

const STEP_CAP: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TriField {
    Constant(Pt),
    /// Radial toward `vertex`, located at `at` in this triangle's chart.
    RadialTo { vertex: usize, at: Pt },
    /// Radial away from `vertex`.
    RadialFrom { vertex: usize, at: Pt },
}

impl TriField {
    fn apex(&self) -> Option<(usize, &Pt)> {
        match self {
            TriField::RadialTo { vertex, at } | TriField::RadialFrom { vertex, at } => Some((*vertex, at)),
            TriField::Constant(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowField {
    pub tri: Vec<TriField>,
    pub critical: BTreeMap<usize, VertexKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowTrace {
    pub points: Vec<Pt>,
    /// Critical vertex where the orbit stops, with its position in the same chart.
    pub terminal: (usize, Pt),
}

pub fn gradient(c: &[Pt; 3], f: [&Q; 3]) -> Pt {
    let b = &c[1] - &c[0];
    let cc = &c[2] - &c[0];
    let db = f[1] - f[0];
    let dc = f[2] - f[0];
    let d = det(&b, &cc);
    Pt::new((&db * &cc.y - &dc * &b.y) / &d, (&dc * &b.x - &db * &cc.x) / &d)
}

impl FlowField {
    /// `-∇f` per triangle, radial on the conical neighbourhood of each
    /// extremum: the connected triangles around it whose linear piece passes
    /// through the extremal value.
    pub fn build(s: &PLSurface, f: &PLFunction) -> Result<Self, FlowError> {
        let crit: BTreeMap<usize, VertexKind> = classify(s, f)?.into_iter().collect();
        let mut tri: Vec<Option<TriField>> = vec![None; s.triangles.len()];
        for (&v, &kind) in &crit {
            if kind == VertexKind::Saddle {
                continue;
            }
            let mut queue = VecDeque::new();
            for (t, k) in s.star(v)? {
                queue.push_back((t, s.charts[t][k].clone()));
            }
            let mut seen = BTreeSet::new();
            while let Some((t, at)) = queue.pop_front() {
                if !seen.insert(t) || s.triangles[t].iter().any(|u| *u != v && crit.contains_key(u)) {
                    continue;
                }
                let fv = [&f.values[s.triangles[t][0]], &f.values[s.triangles[t][1]], &f.values[s.triangles[t][2]]];
                let c = &s.charts[t];
                let plane = fv[0] + gradient(c, fv).dot(&(&at - &c[0]));
                if plane != f.values[v] {
                    continue;
                }
                if tri[t].is_some() {
                    return Err(FlowError::Degenerate(format!("triangle {t} lies near two extrema")));
                }
                tri[t] = Some(match kind {
                    VertexKind::Min => TriField::RadialTo { vertex: v, at: at.clone() },
                    _ => TriField::RadialFrom { vertex: v, at: at.clone() },
                });
                for adj in s.adjacent[t].iter().flatten() {
                    queue.push_back((adj.triangle, &at + &adj.shift));
                }
            }
        }
        let tri = tri
            .into_iter()
            .enumerate()
            .map(|(t, field)| {
                field.unwrap_or_else(|| {
                    let c = &s.triangles[t];
                    TriField::Constant(-&gradient(&s.charts[t], [&f.values[c[0]], &f.values[c[1]], &f.values[c[2]]]))
                })
            })
            .collect();
        let ff = FlowField { tri, critical: crit };
        ff.validate(s, f)?;
        Ok(ff)
    }

    pub fn reversed(&self) -> Self {
        FlowField {
            tri: self
                .tri
                .iter()
                .map(|t| match t {
                    TriField::Constant(v) => TriField::Constant(-v),
                    TriField::RadialTo { vertex, at } => TriField::RadialFrom { vertex: *vertex, at: at.clone() },
                    TriField::RadialFrom { vertex, at } => TriField::RadialTo { vertex: *vertex, at: at.clone() },
                })
                .collect(),
            critical: self.critical.clone(),
        }
    }

    /// Field direction at a chart point of triangle `t`.
    pub fn direction(&self, _s: &PLSurface, t: usize, local: &Pt) -> Pt {
        match &self.tri[t] {
            TriField::Constant(v) => v.clone(),
            TriField::RadialTo { at, .. } => at - local,
            TriField::RadialFrom { at, .. } => local - at,
        }
    }

    pub fn validate(&self, s: &PLSurface, f: &PLFunction) -> Result<(), FlowError> {
        for (t, field) in self.tri.iter().enumerate() {
            let fv = [&f.values[s.triangles[t][0]], &f.values[s.triangles[t][1]], &f.values[s.triangles[t][2]]];
            match field {
                TriField::Constant(v) => {
                    if !gradient(&s.charts[t], fv).dot(v).is_negative() {
                        return Err(FlowError::Degenerate(format!("no descent on triangle {t}")));
                    }
                }
                TriField::RadialTo { vertex, .. } | TriField::RadialFrom { vertex, .. } => {
                    let low = matches!(field, TriField::RadialTo { .. });
                    let apex = &f.values[*vertex];
                    let ok = s.triangles[t].iter().all(|&u| u == *vertex || (&f.values[u] > apex) == low);
                    if !ok {
                        return Err(FlowError::Degenerate(format!("radial field is not monotone on triangle {t}")));
                    }
                }
            }
            for i in 0..3 {
                let Some(adj) = &s.adjacent[t][i] else { continue };
                let a = &s.charts[t][(i + 1) % 3];
                let b = &s.charts[t][(i + 2) % 3];
                let e = b - a;
                let here = sign(&det(&e, &self.direction(s, t, &mid(a, b))));
                let (ta, tb) = (&(a + &adj.shift), &(b + &adj.shift));
                let there = sign(&det(&e, &self.direction(s, adj.triangle, &mid(ta, tb))));
                // along a ray through a radial apex both sides are tangent
                if here == 0 && there == 0 && self.is_spoke(s, t, i) {
                    continue;
                }
                if here == 0 || here != there {
                    return Err(FlowError::Degenerate(format!(
                        "field does not cross the edge {}-{} transversally",
                        s.names[s.triangles[t][(i + 1) % 3]],
                        s.names[s.triangles[t][(i + 2) % 3]]
                    )));
                }
                if self.tri[t].apex().is_some() {
                    let h2 = sign(&det(&e, &self.direction(s, t, a)));
                    let h3 = sign(&det(&e, &self.direction(s, t, b)));
                    if h2 != here || h3 != here {
                        return Err(FlowError::Degenerate(format!("radial field tangent on triangle {t}")));
                    }
                }
            }
        }
        for (&v, &k) in &self.critical {
            if k == VertexKind::Saddle {
                self.saddle_sectors(s, v)?;
            }
        }
        Ok(())
    }

    /// Edge on a ray through the apex, between two triangles of one radial region.
    fn is_spoke(&self, s: &PLSurface, t: usize, i: usize) -> bool {
        let Some((v, at)) = self.tri[t].apex() else { return false };
        let Some(adj) = &s.adjacent[t][i] else { return false };
        if self.tri[adj.triangle].apex().map(|a| a.0) != Some(v) {
            return false;
        }
        let a = &s.charts[t][(i + 1) % 3];
        let b = &s.charts[t][(i + 2) % 3];
        det(&(b - a), &(at - a)).is_zero()
    }

    /// Incoming and outgoing sectors `(triangle, corner, direction)` at a saddle.
    pub fn saddle_sectors(
        &self,
        s: &PLSurface,
        v: usize,
    ) -> Result<(Vec<(usize, usize, Pt)>, Vec<(usize, usize, Pt)>), FlowError> {
        let mut incoming = Vec::new();
        let mut outgoing = Vec::new();
        for (t, k) in s.star(v)? {
            let TriField::Constant(dir) = &self.tri[t] else {
                return Err(FlowError::Degenerate(format!("saddle {} touches an extremum star", s.names[v])));
            };
            let c = &s.charts[t];
            let e1 = &c[(k + 1) % 3] - &c[k];
            let e2 = &c[(k + 2) % 3] - &c[k];
            for (r, list) in [(dir.clone(), &mut outgoing), (-dir, &mut incoming)] {
                let a = sign(&det(&e1, &r));
                let b = sign(&det(&r, &e2));
                if (a == 0 && b > 0) || (b == 0 && a > 0) {
                    return Err(FlowError::Degenerate(format!("separatrix of {} runs along an edge", s.names[v])));
                }
                if a > 0 && b > 0 {
                    list.push((t, k, r));
                }
            }
        }
        if incoming.len() != 2 || outgoing.len() != 2 {
            return Err(FlowError::Degenerate(format!(
                "saddle {} has {} incoming and {} outgoing sectors",
                s.names[v],
                incoming.len(),
                outgoing.len()
            )));
        }
        Ok((incoming, outgoing))
    }

    /// Forward orbit of `p` (global coordinates) until a critical vertex.
    pub fn trace(&self, s: &PLSurface, p: &Pt) -> Result<FlowTrace, FlowError> {
        if let Some((v, at)) = vertex_at(s, p) {
            if self.critical.contains_key(&v) {
                return Ok(FlowTrace { points: vec![p.clone()], terminal: (v, at) });
            }
            return Err(FlowError::Degenerate(format!("orbit starts at regular vertex {}", s.names[v])));
        }
        for (t, off) in locate(s, p) {
            let local = p - &off;
            let dir = self.direction(s, t, &local);
            if dir.is_zero() {
                continue;
            }
            if let Some(exit) = exit_point(s, t, &local, &dir) {
                let _ = exit;
                return self.run(s, t, off, p.clone(), vec![p.clone()]);
            }
        }
        Err(FlowError::Degenerate("cannot start orbit".into()))
    }

    /// Orbit leaving vertex corner `k` of triangle `t` along `dir`, with `t` in
    /// the chart shifted by `off`.
    pub fn trace_from_corner(&self, s: &PLSurface, t: usize, k: usize, off: &Pt, dir: &Pt) -> Result<FlowTrace, FlowError> {
        let start = &s.charts[t][k] + off;
        let local = s.charts[t][k].clone();
        match exit_point(s, t, &local, dir) {
            Some((_, Exit::Edge(_))) => self.run_with_dir(s, t, off.clone(), start.clone(), vec![start], Some(dir.clone())),
            _ => Err(FlowError::Degenerate("separatrix leaves through a vertex".into())),
        }
    }

    fn run(&self, s: &PLSurface, t: usize, off: Pt, p: Pt, pts: Vec<Pt>) -> Result<FlowTrace, FlowError> {
        self.run_with_dir(s, t, off, p, pts, None)
    }

    fn run_with_dir(
        &self,
        s: &PLSurface,
        mut t: usize,
        mut off: Pt,
        mut p: Pt,
        mut pts: Vec<Pt>,
        mut forced: Option<Pt>,
    ) -> Result<FlowTrace, FlowError> {
        for _ in 0..STEP_CAP {
            let local = &p - &off;
            if let TriField::RadialTo { vertex, at } = &self.tri[t] {
                let target = at + &off;
                if target != p {
                    pts.push(target.clone());
                }
                return Ok(FlowTrace { points: pts, terminal: (*vertex, target) });
            }
            let dir = forced.take().unwrap_or_else(|| self.direction(s, t, &local));
            let Some((x, exit)) = exit_point(s, t, &local, &dir) else {
                return Err(FlowError::Degenerate("orbit cannot leave triangle".into()));
            };
            let global = &x + &off;
            pts.push(global.clone());
            match exit {
                Exit::Vertex(k) => {
                    let v = s.triangles[t][k];
                    if self.critical.contains_key(&v) {
                        return Ok(FlowTrace { points: pts, terminal: (v, global) });
                    }
                    return Err(FlowError::Degenerate(format!("orbit hits regular vertex {}", s.names[v])));
                }
                Exit::Edge(i) => {
                    let Some(adj) = &s.adjacent[t][i] else {
                        return Err(FlowError::Unsupported("orbit reaches the boundary".into()));
                    };
                    off = &off - &adj.shift;
                    t = adj.triangle;
                    p = global;
                }
            }
        }
        Err(FlowError::Degenerate("step cap exceeded".into()))
    }
}

fn mid(a: &Pt, b: &Pt) -> Pt {
    (a + b).scale(&Q::new(1.into(), 2.into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Exit {
    Edge(usize),
    Vertex(usize),
}

/// First point where the ray from `local` along `dir` leaves triangle `t`.
pub fn exit_point(s: &PLSurface, t: usize, local: &Pt, dir: &Pt) -> Option<(Pt, Exit)> {
    let c = &s.charts[t];
    let mut best: Option<(Q, Pt, Exit)> = None;
    for i in 0..3 {
        let a = &c[(i + 1) % 3];
        let b = &c[(i + 2) % 3];
        let e = b - a;
        let den = det(dir, &e);
        if den.is_zero() {
            continue;
        }
        let al = a - local;
        let sp = det(&al, &e) / &den;
        let u = det(&al, dir) / &den;
        if !sp.is_positive() || u.is_negative() || u > Q::from_integer(1.into()) {
            continue;
        }
        let x = local + &dir.scale(&sp);
        let exit = if u.is_zero() {
            Exit::Vertex((i + 1) % 3)
        } else if u == Q::from_integer(1.into()) {
            Exit::Vertex((i + 2) % 3)
        } else {
            Exit::Edge(i)
        };
        if best.as_ref().map_or(true, |(bs, _, _)| sp < *bs) {
            best = Some((sp, x, exit));
        }
    }
    best.map(|(_, x, e)| (x, e))
}

/// Triangles whose closure contains `p`, with chart offsets.
pub fn locate(s: &PLSurface, p: &Pt) -> Vec<(usize, Pt)> {
    let mut out = Vec::new();
    for (t, c) in s.charts.iter().enumerate() {
        for off in s.lattice.candidate_shifts(p, &c[0]) {
            let l = p - &off;
            if orient(&c[0], &c[1], &l) >= 0 && orient(&c[1], &c[2], &l) >= 0 && orient(&c[2], &c[0], &l) >= 0 {
                out.push((t, off));
            }
        }
    }
    out
}

/// Mesh vertex at `p`, if any, with its position in `p`'s chart.
pub fn vertex_at(s: &PLSurface, p: &Pt) -> Option<(usize, Pt)> {
    for (v, q) in s.vertices.iter().enumerate() {
        if s.lattice.same(p, q) {
            return Some((v, p.clone()));
        }
    }
    None
}
