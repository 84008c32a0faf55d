//! Independent simplicial oracles shared by the integration tests.
#![allow(dead_code)]

use morse_ainfty::ainfty::AInftyStructure;
use morse_ainfty::morse::Variant;
use morse_ainfty::plflow::{PLSurface, Pt, Q};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Rank over the rationals by plain Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<BigRational>>) -> usize {
    let mut r = 0;
    let cols = rows.first().map_or(0, |x| x.len());
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in 0..rows.len() {
            if i != r && !rows[i][c].is_zero() {
                let f = &rows[i][c] / &rows[r][c];
                for j in c..cols {
                    let v = &rows[r][j] * &f;
                    rows[i][j] -= v;
                }
            }
        }
        r += 1;
    }
    r
}

/// Oriented simplices as sorted vertex lists; `relative` are those of the
/// subcomplex to quotient out.
pub struct Complex {
    pub simplices: Vec<Vec<Vec<usize>>>,
}

impl Complex {
    /// Closure of the given top simplices, dropping every simplex of `sub`.
    pub fn from_top(top: &[Vec<usize>], sub: &[Vec<usize>]) -> Self {
        let mut by_dim: Vec<std::collections::BTreeSet<Vec<usize>>> = vec![Default::default(); 4];
        let mut drop: std::collections::BTreeSet<Vec<usize>> = Default::default();
        let faces = |s: &[usize]| -> Vec<Vec<usize>> {
            let mut s = s.to_vec();
            s.sort();
            let n = s.len();
            let mut out = vec![];
            for mask in 1u32..(1 << n) {
                out.push((0..n).filter(|i| mask & (1 << i) != 0).map(|i| s[i]).collect::<Vec<_>>());
            }
            out
        };
        for s in sub {
            drop.extend(faces(s));
        }
        for s in top {
            for f in faces(s) {
                if !drop.contains(&f) {
                    by_dim[f.len() - 1].insert(f);
                }
            }
        }
        Complex { simplices: by_dim.into_iter().map(|s| s.into_iter().collect()).collect() }
    }

    pub fn betti(&self) -> Vec<usize> {
        let n: Vec<usize> = self.simplices.iter().map(|s| s.len()).collect();
        let top = n.iter().rposition(|&c| c > 0).map_or(0, |t| t + 1);
        let rank_d = |k: usize| -> usize {
            // boundary C_k -> C_{k-1}
            if k == 0 || k >= self.simplices.len() || self.simplices[k].is_empty() || self.simplices[k - 1].is_empty() {
                return 0;
            }
            let index: BTreeMap<&Vec<usize>, usize> = self.simplices[k - 1].iter().enumerate().map(|(i, s)| (s, i)).collect();
            let rows = self.simplices[k]
                .iter()
                .map(|s| {
                    let mut row = vec![BigRational::zero(); index.len()];
                    for i in 0..s.len() {
                        let mut f = s.clone();
                        f.remove(i);
                        if let Some(&j) = index.get(&f) {
                            row[j] = if i % 2 == 0 { BigRational::one() } else { -BigRational::one() };
                        }
                    }
                    row
                })
                .collect();
            rank(rows)
        };
        (0..top).map(|k| n[k] - rank_d(k) - rank_d(k + 1)).collect()
    }
}

pub fn surface_complex(s: &PLSurface) -> Complex {
    let top: Vec<Vec<usize>> = s.triangles.iter().map(|t| t.to_vec()).collect();
    Complex::from_top(&top, &[])
}

fn qi(n: i64) -> Q {
    Q::from_integer(n.into())
}

/// Signed count of crossings of the chart segment `a -> b` with the lines
/// `coord = c + k * period`.
fn line_crossings(a: &Q, b: &Q, c: &Q, period: &Q) -> i64 {
    let count_below = |v: &Q| -> i64 {
        // number of lines c + k p that are < v, up to a constant
        ((v - c) / period).ceil().to_integer().try_into().unwrap()
    };
    count_below(b) - count_below(a)
}

/// Integer 1-cocycle counting signed crossings with the lines x = c (axis 0) or
/// y = c (axis 1), evaluated on the oriented edge `u -> v` of triangle `t`.
pub fn line_cochain(s: &PLSurface, axis: usize, c: &Q, t: usize, u: usize, v: usize) -> i64 {
    let tri = s.triangles[t];
    let pu = &s.charts[t][tri.iter().position(|&x| x == u).unwrap()];
    let pv = &s.charts[t][tri.iter().position(|&x| x == v).unwrap()];
    let (period, a, b) = match axis {
        0 => (s.lattice.period.as_ref().unwrap().0.clone(), pu.x.clone(), pv.x.clone()),
        _ => (s.lattice.period.as_ref().unwrap().1.clone(), pu.y.clone(), pv.y.clone()),
    };
    line_crossings(&a, &b, c, &period)
}

/// `<α_i ∪ α_j, [M]>` for the line cocycles along x = c and y = c, by the
/// ordered-simplex cup formula.
pub fn cup_form(s: &PLSurface, c: &Q) -> [[i64; 2]; 2] {
    let mut out = [[0i64; 2]; 2];
    for (t, tri) in s.triangles.iter().enumerate() {
        let mut sorted = tri.to_vec();
        sorted.sort();
        // permutation parity of the sorted order against the counterclockwise order
        let pos: Vec<usize> = sorted.iter().map(|v| tri.iter().position(|x| x == v).unwrap()).collect();
        let even = matches!((pos[0], pos[1], pos[2]), (0, 1, 2) | (1, 2, 0) | (2, 0, 1));
        let eps = if even { 1 } else { -1 };
        for i in 0..2 {
            for j in 0..2 {
                out[i][j] += eps * line_cochain(s, i, c, t, sorted[0], sorted[1]) * line_cochain(s, j, c, t, sorted[1], sorted[2]);
            }
        }
    }
    out
}

/// A closed loop along a horizontal (axis 0) or vertical (axis 1) line through
/// mesh vertices.
pub fn lattice_loop(axis: usize, level: &Q, period: &Q, steps: &[Q]) -> Vec<Pt> {
    let mut pts = vec![];
    let mut at = qi(0);
    for st in steps {
        pts.push(if axis == 0 { Pt::new(at.clone(), level.clone()) } else { Pt::new(level.clone(), at.clone()) });
        at += st;
    }
    assert_eq!(&at, period);
    pts.push(if axis == 0 { Pt::new(at, level.clone()) } else { Pt::new(level.clone(), at) });
    pts
}

pub fn abs(v: &Q) -> Q {
    v.abs()
}

/// Conjugates every operation by the diagonal sign change `e_i ↦ ±e_i`, bit
/// `i` of `mask` choosing a minus sign.
pub fn flip_basis(s: &AInftyStructure, mask: u64) -> AInftyStructure {
    let eps = |i: usize| if mask >> (i % 64) & 1 == 1 { -1 } else { 1 };
    let mut out = s.clone();
    for m in out.ops.values_mut() {
        for (t, v) in m.iter_mut() {
            let e: i64 = t.iter().map(|&i| eps(i)).product();
            for (y, c) in v.iter_mut() {
                *c *= BigInt::from(e * eps(*y));
            }
        }
    }
    out
}

pub fn data(name: &str) -> String {
    std::fs::read_to_string(std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name)).unwrap()
}

pub fn cycle(vs: &[usize]) -> Vec<Vec<usize>> {
    (0..vs.len()).map(|i| vec![vs[i], vs[(i + 1) % vs.len()]]).collect()
}

/// Square annulus: inner ring 0..4, outer ring 4..8.
pub fn annulus() -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let mut top = vec![];
    for i in 0..4 {
        let j = (i + 1) % 4;
        top.push(vec![i, j, 4 + i]);
        top.push(vec![j, 4 + j, 4 + i]);
    }
    let mut boundary = cycle(&[0, 1, 2, 3]);
    boundary.extend(cycle(&[4, 5, 6, 7]));
    (top, boundary)
}

/// Bundled critical-point data with the variant to read it in and a
/// triangulation of the same space, relative to the boundary for `D`.
pub fn complex_oracles() -> Vec<(&'static str, Variant, Complex)> {
    let path = vec![vec![0, 1], vec![1, 2]];
    let (ann, ann_boundary) = annulus();
    vec![
        ("interval-D.json", Variant::D, Complex::from_top(&path, &[vec![0], vec![2]])),
        ("interval-N.json", Variant::N, Complex::from_top(&path, &[])),
        ("circle4.json", Variant::N, Complex::from_top(&cycle(&[0, 1, 2, 3]), &[])),
        ("annulus-D.json", Variant::D, Complex::from_top(&ann, &ann_boundary)),
    ]
}
