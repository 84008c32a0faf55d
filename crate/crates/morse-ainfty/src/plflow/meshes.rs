//! Built-in meshes.

use super::geom::{fmt_q, q, qi, Lattice, Pt, Q};
use super::surface::{MeshJson, PLFunction, PLSurface, VertexJson};
use super::FlowError;
use std::collections::BTreeMap;

struct Builder {
    lattice: Lattice,
    points: Vec<(Pt, String, Q)>,
    index: BTreeMap<Pt, usize>,
    triangles: Vec<[usize; 3]>,
}

impl Builder {
    fn vertex(&mut self, p: &Pt, name: Option<&str>, value: &Q) -> usize {
        let r = self.lattice.reduce(&(p + &Pt::new(qi(1), qi(1))));
        // representatives live in [-1, px - 1) x [-1, py - 1)
        let r = &r - &Pt::new(qi(1), qi(1));
        if let Some(&i) = self.index.get(&r) {
            if let Some(n) = name {
                self.points[i].1 = n.to_string();
            }
            return i;
        }
        let i = self.points.len();
        self.index.insert(r.clone(), i);
        self.points.push((r, name.map(str::to_string).unwrap_or_else(|| format!("v{i}")), value.clone()));
        i
    }

    fn fan(&mut self, center: usize, link: &[usize]) {
        for i in 0..link.len() {
            self.triangles.push([center, link[i], link[(i + 1) % link.len()]]);
        }
    }

    fn finish(self, px: i64, py: i64) -> MeshJson {
        MeshJson {
            vertices: self
                .points
                .iter()
                .enumerate()
                .map(|(i, (p, n, _))| VertexJson { id: i, name: Some(n.clone()), x: fmt_q(&p.x), y: fmt_q(&p.y) })
                .collect(),
            triangles: self.triangles,
            boundary: vec![],
            period: Some([px.to_string(), py.to_string()]),
            values: Some(self.points.iter().enumerate().map(|(i, (_, _, v))| (i, fmt_q(v))).collect()),
        }
    }
}

/// Square ring of 12 points around `c` with half-width 1, counterclockwise from
/// the lower right corner.
fn ring(c: &Pt) -> Vec<Pt> {
    let h = q(1, 2);
    let one = qi(1);
    let offs = [
        (one.clone(), -&one),
        (one.clone(), -&h),
        (one.clone(), h.clone()),
        (one.clone(), one.clone()),
        (h.clone(), one.clone()),
        (-&h, one.clone()),
        (-&one, one.clone()),
        (-&one, h.clone()),
        (-&one, -&h),
        (-&one, -&one),
        (-&h, -&one),
        (h.clone(), -&one),
    ];
    offs.iter().map(|(dx, dy)| Pt::new(&c.x + dx, &c.y + dy)).collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Cell {
    Min,
    Saddle,
    Max,
}

fn cell_kind(x: i64, y: i64) -> Cell {
    match ((x / 2).rem_euclid(2), (y / 2).rem_euclid(2)) {
        (0, 0) => Cell::Min,
        (1, 1) => Cell::Max,
        _ => Cell::Saddle,
    }
}

/// Grid torus with critical vertices at the even lattice points of the period
/// rectangle `(px, py)`, both multiples of 4: minima where both coordinates are
/// multiples of 4, maxima where neither is, saddles elsewhere. `critical` gives
/// the name and value of each grid point, listed in creation order. Ring corners
/// carry 2, other ring points 3/2 near a minimum and 5/2 near a maximum, and
/// `offset` shifts each regular vertex value by its creation index.
fn grid_torus(px: i64, py: i64, critical: &[(i64, i64, &str, Q)], offset: impl Fn(usize) -> Q) -> MeshJson {
    let lattice = Lattice::torus(qi(px), qi(py));
    let mut b = Builder { lattice: lattice.clone(), points: vec![], index: BTreeMap::new(), triangles: vec![] };
    let p = |x: i64, y: i64| Pt::new(qi(x), qi(y));
    let ids: Vec<usize> = critical.iter().map(|(x, y, n, v)| b.vertex(&p(*x, *y), Some(n), v)).collect();
    let ring_value = |pt: &Pt, c: (i64, i64)| -> Q {
        let rel = pt - &p(c.0, c.1);
        if rel.x.abs_sub_one() && rel.y.abs_sub_one() {
            return qi(2);
        }
        // the neighbouring extremum whose ring also contains this point
        for (dx, dy) in [(0, 0), (2, 0), (-2, 0), (0, 2), (0, -2)] {
            let e = (c.0 + dx, c.1 + dy);
            let r = pt - &p(e.0, e.1);
            if r.x.abs_le_one() && r.y.abs_le_one() {
                match cell_kind(e.0, e.1) {
                    Cell::Min => return q(3, 2),
                    Cell::Max => return q(5, 2),
                    Cell::Saddle => {}
                }
            }
        }
        unreachable!("ring point without an extremum")
    };
    let mut order: Vec<usize> = (0..critical.len()).collect();
    order.sort_by_key(|&i| match cell_kind(critical[i].0, critical[i].1) {
        Cell::Min => 0,
        Cell::Max => 1,
        Cell::Saddle => 2,
    });
    for i in order {
        let (x, y, _, _) = critical[i];
        let c = p(x, y);
        let link: Vec<usize> = ring(&c)
            .iter()
            .map(|pt| {
                let next = b.points.len();
                let value = ring_value(pt, (x, y)) + offset(next);
                b.vertex(pt, None, &value)
            })
            .collect();
        b.fan(ids[i], &link);
    }
    b.finish(px, py)
}

/// Torus `R^2 / (4Z)^2` with minimum at (0,0), saddles at (2,0) and (0,2) and
/// maximum at (2,2). Without offsets the separatrices are the lines through the
/// saddles and the ring corners tie with the saddle value 2.
pub fn designed_torus(offset: impl Fn(usize) -> Q) -> MeshJson {
    grid_torus(
        4,
        4,
        &[(0, 0, "min", qi(0)), (2, 0, "s1", qi(2)), (0, 2, "s2", qi(2)), (2, 2, "max", qi(3))],
        offset,
    )
}

fn standard_offset(i: usize) -> Q {
    q(2 * ((7 * i as i64) % 20) - 19, 400)
}

/// Torus `R^2 / (8Z x 4Z)` with two minima, four saddles and two maxima at
/// different levels, so that the Morse differential is nonzero.
pub fn double_torus_cover() -> MeshJson {
    grid_torus(
        8,
        4,
        &[
            (0, 0, "a0", qi(0)),
            (4, 0, "a1", q(1, 2)),
            (2, 0, "b0", qi(2)),
            (6, 0, "b1", qi(2)),
            (0, 2, "b2", qi(2)),
            (4, 2, "b3", qi(2)),
            (2, 2, "c0", qi(3)),
            (6, 2, "c1", q(11, 4)),
        ],
        |i| standard_offset(i) + q((i as i64 * 13) % 7, 4000),
    )
}

/// Torus `R^2 / (2k Z x 4Z)` whose rows `y = 0` and `y = 2` each carry the
/// `k` critical points of a circle function, placed at `x = 2i` with the first
/// one a minimum. `levels[i]` in `[0, 1]` orders points within a row; the lower
/// row keeps the base indices and the upper row raises them by one. Names are
/// `<name>.0` and `<name>.1`.
pub fn row_torus(names: &[String], levels: &[Q], attempt: u64) -> MeshJson {
    let k = levels.len() as i64;
    let mut crit: Vec<(i64, i64, String, Q)> = Vec::new();
    for (i, (n, r)) in names.iter().zip(levels).enumerate() {
        let x = 2 * i as i64;
        let (lo, hi) = if i % 2 == 0 {
            (r * q(1, 2), q(17, 8) + r * q(1, 8))
        } else {
            (q(7, 4) + r * q(1, 8), qi(3) + r * q(1, 2))
        };
        crit.push((x, 0, format!("{n}.0"), lo));
        crit.push((x, 2, format!("{n}.1"), hi));
    }
    let refs: Vec<(i64, i64, &str, Q)> = crit.iter().map(|(x, y, n, v)| (*x, *y, n.as_str(), v.clone())).collect();
    let a = attempt as i64;
    grid_torus(2 * k, 4, &refs, move |i| standard_offset(i) + q((i as i64 * 13 + 5 * a) % 7, 4000))
}

trait Unit {
    fn abs_sub_one(&self) -> bool;
    fn abs_le_one(&self) -> bool;
}

impl Unit for Q {
    fn abs_sub_one(&self) -> bool {
        *self == qi(1) || *self == qi(-1)
    }
    fn abs_le_one(&self) -> bool {
        *self >= qi(-1) && *self <= qi(1)
    }
}

/// The designed torus with distinct small offsets on all regular vertices.
pub fn standard_torus() -> MeshJson {
    designed_torus(standard_offset)
}

/// The designed torus without offsets.
pub fn symmetric_torus() -> MeshJson {
    designed_torus(|_| qi(0))
}

/// Barycentric subdivision with linearly interpolated values. New vertices are
/// named `v<id>` after the existing ones.
pub fn barycentric(m: &MeshJson) -> Result<MeshJson, FlowError> {
    let s = PLSurface::from_json(m)?;
    let values = m.values.as_ref().ok_or_else(|| FlowError::Parse("mesh without values".into()))?;
    let f = PLFunction::from_json(&s, values)?;
    let mut points: Vec<(Pt, String, Q)> =
        (0..s.vertices.len()).map(|i| (s.vertices[i].clone(), s.names[i].clone(), f.values[i].clone())).collect();
    let mut index: BTreeMap<Pt, usize> = points.iter().enumerate().map(|(i, p)| (s.lattice.reduce(&p.0), i)).collect();
    let mut add = |p: Pt, v: Q| -> usize {
        let key = s.lattice.reduce(&p);
        if let Some(&i) = index.get(&key) {
            return i;
        }
        let i = points.len();
        index.insert(key, i);
        points.push((p, format!("v{i}"), v));
        i
    };
    let half = q(1, 2);
    let third = q(1, 3);
    let mut triangles = Vec::new();
    for (t, tri) in s.triangles.iter().enumerate() {
        let c = &s.charts[t];
        let val = |k: usize| f.values[tri[k]].clone();
        let mid = |i: usize, j: usize| ((&c[i] + &c[j]).scale(&half), (val(i) + val(j)) * &half);
        let (pab, vab) = mid(0, 1);
        let (pbc, vbc) = mid(1, 2);
        let (pca, vca) = mid(2, 0);
        let mab = add(pab, vab);
        let mbc = add(pbc, vbc);
        let mca = add(pca, vca);
        let o = add((&(&c[0] + &c[1]) + &c[2]).scale(&third), (val(0) + val(1) + val(2)) * &third);
        let [a, b, cc] = *tri;
        for tr in [[a, mab, o], [mab, b, o], [b, mbc, o], [mbc, cc, o], [cc, mca, o], [mca, a, o]] {
            triangles.push(tr);
        }
    }
    let ids = &s.ids;
    let id_of = |i: usize| if i < ids.len() { ids[i] } else { ids.iter().max().copied().unwrap_or(0) + 1 + (i - ids.len()) };
    Ok(MeshJson {
        vertices: points
            .iter()
            .enumerate()
            .map(|(i, (p, n, _))| VertexJson { id: id_of(i), name: Some(n.clone()), x: fmt_q(&p.x), y: fmt_q(&p.y) })
            .collect(),
        triangles: triangles.into_iter().map(|t| t.map(id_of)).collect(),
        boundary: m.boundary.clone(),
        period: m.period.clone(),
        values: Some(points.iter().enumerate().map(|(i, (_, _, v))| (id_of(i), fmt_q(v))).collect()),
    })
}
