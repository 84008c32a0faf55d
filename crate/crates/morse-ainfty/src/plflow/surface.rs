//! Triangulated surfaces, PL functions and critical-vertex classification.

use super::geom::{fmt_q, orient, parse_q, Lattice, Pt, Q};
use super::FlowError;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VertexJson {
    pub id: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub x: String,
    pub y: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeshJson {
    pub vertices: Vec<VertexJson>,
    pub triangles: Vec<[usize; 3]>,
    #[serde(default)]
    pub boundary: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<[String; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<BTreeMap<usize, String>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FunctionJson {
    pub values: BTreeMap<usize, String>,
}

/// Neighbor of a triangle across one of its edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Adjacent {
    pub triangle: usize,
    /// Add to a point in this triangle's chart to get the neighbor's chart.
    pub shift: Pt,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLSurface {
    pub ids: Vec<usize>,
    pub names: Vec<String>,
    pub vertices: Vec<Pt>,
    pub triangles: Vec<[usize; 3]>,
    /// Per triangle, the three corners in one chart, counterclockwise.
    pub charts: Vec<[Pt; 3]>,
    /// `adjacent[t][i]` is across the edge opposite corner `i`.
    pub adjacent: Vec<[Option<Adjacent>; 3]>,
    pub boundary: Vec<[usize; 2]>,
    pub lattice: Lattice,
}

/// Vertex values of a PL function, indexed like the surface vertices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLFunction {
    pub values: Vec<Q>,
}

fn nearest(lat: &Lattice, base: &Pt, p: &Pt) -> Pt {
    match &lat.period {
        None => p.clone(),
        Some((px, py)) => {
            let fix = |a: &Q, b: &Q, per: &Q| -> Q {
                let half = per / Q::from_integer(2.into());
                let mut v = b.clone();
                while &v - a > half {
                    v -= per;
                }
                while a - &v > half {
                    v += per;
                }
                v
            };
            Pt::new(fix(&base.x, &p.x, px), fix(&base.y, &p.y, py))
        }
    }
}

impl PLSurface {
    pub fn from_json(m: &MeshJson) -> Result<Self, FlowError> {
        let bad = |s: String| FlowError::Parse(s);
        let mut index = BTreeMap::new();
        let mut ids = Vec::new();
        let mut names = Vec::new();
        let mut vertices = Vec::new();
        for v in &m.vertices {
            let x = parse_q(&v.x).ok_or_else(|| bad(format!("vertex {} x", v.id)))?;
            let y = parse_q(&v.y).ok_or_else(|| bad(format!("vertex {} y", v.id)))?;
            if index.insert(v.id, vertices.len()).is_some() {
                return Err(bad(format!("duplicate vertex {}", v.id)));
            }
            ids.push(v.id);
            names.push(v.name.clone().unwrap_or_else(|| format!("v{}", v.id)));
            vertices.push(Pt::new(x, y));
        }
        let lattice = match &m.period {
            Some([a, b]) => Lattice::torus(
                parse_q(a).ok_or_else(|| bad("period".into()))?,
                parse_q(b).ok_or_else(|| bad("period".into()))?,
            ),
            None => Lattice::plane(),
        };
        let look = |id: &usize| index.get(id).copied().ok_or_else(|| bad(format!("unknown vertex {id}")));
        let mut triangles = Vec::new();
        let mut charts = Vec::new();
        for t in &m.triangles {
            let tri = [look(&t[0])?, look(&t[1])?, look(&t[2])?];
            let a = vertices[tri[0]].clone();
            let b = nearest(&lattice, &a, &vertices[tri[1]]);
            let c = nearest(&lattice, &a, &vertices[tri[2]]);
            if orient(&a, &b, &c) <= 0 {
                return Err(bad(format!("triangle {:?} is not counterclockwise", t)));
            }
            triangles.push(tri);
            charts.push([a, b, c]);
        }
        let boundary = m
            .boundary
            .iter()
            .map(|e| Ok([look(&e[0])?, look(&e[1])?]))
            .collect::<Result<Vec<_>, FlowError>>()?;
        let mut s = PLSurface { ids, names, vertices, triangles, charts, adjacent: Vec::new(), boundary, lattice };
        s.build_adjacency()?;
        Ok(s)
    }

    fn build_adjacency(&mut self) -> Result<(), FlowError> {
        // key: ordered vertex pair and displacement between them in chart
        let mut edges: BTreeMap<(usize, usize, Pt), Vec<(usize, usize)>> = BTreeMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for i in 0..3 {
                let (a, b) = ((i + 1) % 3, (i + 2) % 3);
                let (va, vb) = (tri[a], tri[b]);
                let (lo, hi, pl, ph) = if va <= vb { (va, vb, a, b) } else { (vb, va, b, a) };
                let disp = &self.charts[t][ph] - &self.charts[t][pl];
                edges.entry((lo, hi, disp)).or_default().push((t, i));
            }
        }
        let mut adjacent: Vec<[Option<Adjacent>; 3]> = vec![[None, None, None]; self.triangles.len()];
        for ((lo, _, _), users) in &edges {
            match users.as_slice() {
                [_] => {}
                [(t1, i1), (t2, i2)] => {
                    let p1 = self.corner_of(*t1, *lo);
                    let p2 = self.corner_of(*t2, *lo);
                    adjacent[*t1][*i1] = Some(Adjacent { triangle: *t2, shift: &p2 - &p1 });
                    adjacent[*t2][*i2] = Some(Adjacent { triangle: *t1, shift: &p1 - &p2 });
                }
                _ => return Err(FlowError::Parse("edge shared by more than two triangles".into())),
            }
        }
        self.adjacent = adjacent;
        Ok(())
    }

    fn corner_of(&self, t: usize, v: usize) -> Pt {
        let k = self.triangles[t].iter().position(|&w| w == v).unwrap();
        self.charts[t][k].clone()
    }

    pub fn to_json(&self, f: Option<&PLFunction>) -> MeshJson {
        MeshJson {
            vertices: (0..self.vertices.len())
                .map(|i| VertexJson {
                    id: self.ids[i],
                    name: Some(self.names[i].clone()),
                    x: fmt_q(&self.vertices[i].x),
                    y: fmt_q(&self.vertices[i].y),
                })
                .collect(),
            triangles: self.triangles.iter().map(|t| [self.ids[t[0]], self.ids[t[1]], self.ids[t[2]]]).collect(),
            boundary: self.boundary.iter().map(|e| [self.ids[e[0]], self.ids[e[1]]]).collect(),
            period: self.lattice.period.as_ref().map(|(a, b)| [fmt_q(a), fmt_q(b)]),
            values: f.map(|f| (0..self.ids.len()).map(|i| (self.ids[i], fmt_q(&f.values[i]))).collect()),
        }
    }

    pub fn is_closed(&self) -> bool {
        self.adjacent.iter().all(|a| a.iter().all(Option::is_some))
    }

    /// Triangles around `v` as `(triangle, corner)` in counterclockwise order.
    pub fn star(&self, v: usize) -> Result<Vec<(usize, usize)>, FlowError> {
        let mut first = None;
        for (t, tri) in self.triangles.iter().enumerate() {
            if let Some(k) = tri.iter().position(|&w| w == v) {
                first = Some((t, k));
                break;
            }
        }
        let Some(start) = first else { return Ok(Vec::new()) };
        let mut out = vec![start];
        let mut cur = start;
        loop {
            // rotate counterclockwise across the edge from `v` to corner k+2
            let (t, k) = cur;
            let Some(adj) = &self.adjacent[t][(k + 1) % 3] else {
                return Err(FlowError::Unsupported(format!("vertex {} is on the boundary", self.names[v])));
            };
            let nt = adj.triangle;
            let nk = self.triangles[nt].iter().position(|&w| w == v).unwrap();
            if (nt, nk) == start {
                break;
            }
            out.push((nt, nk));
            cur = (nt, nk);
            if out.len() > self.triangles.len() {
                return Err(FlowError::Parse("vertex link is not a cycle".into()));
            }
        }
        Ok(out)
    }

    /// Link vertices of an interior vertex in counterclockwise order.
    pub fn link(&self, v: usize) -> Result<Vec<usize>, FlowError> {
        Ok(self.star(v)?.into_iter().map(|(t, k)| self.triangles[t][(k + 1) % 3]).collect())
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

impl PLFunction {
    pub fn from_json(s: &PLSurface, values: &BTreeMap<usize, String>) -> Result<Self, FlowError> {
        let mut out = Vec::with_capacity(s.ids.len());
        for id in &s.ids {
            let v = values.get(id).ok_or_else(|| FlowError::Parse(format!("no value for vertex {id}")))?;
            out.push(parse_q(v).ok_or_else(|| FlowError::Parse(format!("bad value {v}")))?);
        }
        Ok(PLFunction { values: out })
    }

    pub fn to_json(&self, s: &PLSurface) -> FunctionJson {
        FunctionJson { values: (0..s.ids.len()).map(|i| (s.ids[i], fmt_q(&self.values[i]))).collect() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum VertexKind {
    Min,
    Saddle,
    Max,
}

impl VertexKind {
    pub fn index(self) -> usize {
        match self {
            VertexKind::Min => 0,
            VertexKind::Saddle => 1,
            VertexKind::Max => 2,
        }
    }
}

/// Critical vertices of `f` in vertex order. Closed surfaces only.
pub fn classify(s: &PLSurface, f: &PLFunction) -> Result<Vec<(usize, VertexKind)>, FlowError> {
    let mut out = Vec::new();
    for v in 0..s.vertices.len() {
        let link = s.link(v)?;
        let fv = &f.values[v];
        let mut signs = Vec::with_capacity(link.len());
        for &w in &link {
            if f.values[w] == *fv {
                return Err(FlowError::Degenerate(format!(
                    "tie between {} and {}",
                    s.names[v], s.names[w]
                )));
            }
            signs.push(f.values[w] > *fv);
        }
        let changes = (0..signs.len()).filter(|&i| signs[i] != signs[(i + 1) % signs.len()]).count();
        let kind = match changes {
            0 if signs[0] => Some(VertexKind::Min),
            0 => Some(VertexKind::Max),
            2 => None,
            4 => Some(VertexKind::Saddle),
            _ => return Err(FlowError::Degenerate(format!("multi-saddle at {}", s.names[v]))),
        };
        if let Some(k) = kind {
            out.push((v, k));
        }
    }
    Ok(out)
}
