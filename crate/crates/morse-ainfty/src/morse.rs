//! Neumann and Dirichlet Morse complexes built from critical-point data.

use crate::ainfty::{homology, mat_mul, AInftyStructure, AlgebraError, Generator, GradedBasis, HomologyGroup, Matrix};
use crate::signs::Convention;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, VecDeque};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MorseError {
    #[error("grading violation: {0}")]
    GradingViolation(String),
    #[error("invalid critical point: {0}")]
    InvalidPoint(String),
    #[error("duality mismatch: {}", .0.join("; "))]
    Mismatch(Vec<String>),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Locus {
    Interior,
    Boundary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Flavor {
    None,
    Neumann,
    Dirichlet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub name: String,
    pub locus: Locus,
    pub flavor: Flavor,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Connection {
    pub from: String,
    pub to: String,
    pub count: i64,
}

/// A connection `from -> to` contributes `count * to` to `∂ from`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MorseComplexData {
    pub n: usize,
    pub points: Vec<CriticalPoint>,
    pub connections: Vec<Connection>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Variant {
    N,
    D,
}

impl std::str::FromStr for Variant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "N" | "n" => Ok(Variant::N),
            "D" | "d" => Ok(Variant::D),
            _ => Err(format!("unknown variant {s}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MorseComplex {
    pub variant: Variant,
    /// Generators with their homological degree, in layout order.
    pub generators: Vec<(String, usize)>,
    /// `boundary[k]` is the matrix of `∂: C_k -> C_{k-1}` (rows `C_{k-1}`).
    pub boundary: BTreeMap<usize, Matrix>,
}

impl MorseComplexData {
    pub fn validate(&self) -> Result<(), MorseError> {
        for p in &self.points {
            let ok_flavor = (p.flavor == Flavor::None) == (p.locus == Locus::Interior);
            let bound = if p.locus == Locus::Interior { self.n } else { self.n.saturating_sub(1) };
            if !ok_flavor || p.index > bound {
                return Err(MorseError::InvalidPoint(p.name.clone()));
            }
        }
        Ok(())
    }

    fn point(&self, name: &str) -> Option<&CriticalPoint> {
        self.points.iter().find(|p| p.name == name)
    }
}

/// Homological degree of a point in the chosen variant, if it is a generator.
pub fn variant_degree(p: &CriticalPoint, variant: Variant) -> Option<usize> {
    match (p.flavor, variant) {
        (Flavor::None, _) => Some(p.index),
        (Flavor::Neumann, Variant::N) => Some(p.index),
        (Flavor::Dirichlet, Variant::D) => Some(p.index + 1),
        _ => None,
    }
}

pub fn build_complex(data: &MorseComplexData, variant: Variant) -> Result<MorseComplex, MorseError> {
    data.validate()?;
    let mut pts: Vec<(&CriticalPoint, usize)> =
        data.points.iter().filter_map(|p| variant_degree(p, variant).map(|k| (p, k))).collect();
    pts.sort_by(|a, b| (a.0.locus, a.0.index, &a.0.name).cmp(&(b.0.locus, b.0.index, &b.0.name)));
    let generators: Vec<(String, usize)> = pts.iter().map(|(p, k)| (p.name.clone(), *k)).collect();
    let in_deg = |k: usize| -> Vec<usize> { (0..generators.len()).filter(|&i| generators[i].1 == k).collect() };
    let top = generators.iter().map(|g| g.1).max().unwrap_or(0);
    let mut boundary = BTreeMap::new();
    for k in 1..=top {
        boundary.insert(k, vec![vec![BigInt::zero(); in_deg(k).len()]; in_deg(k - 1).len()]);
    }
    for c in &data.connections {
        let (Some(pf), Some(pt)) = (data.point(&c.from), data.point(&c.to)) else {
            return Err(MorseError::GradingViolation(format!("unknown point in {} -> {}", c.from, c.to)));
        };
        let (Some(kf), Some(kt)) = (variant_degree(pf, variant), variant_degree(pt, variant)) else {
            continue;
        };
        if kf != kt + 1 {
            return Err(MorseError::GradingViolation(format!(
                "{} (degree {kf}) -> {} (degree {kt})",
                c.from, c.to
            )));
        }
        let col = in_deg(kf).iter().position(|&i| generators[i].0 == c.from).unwrap();
        let row = in_deg(kt).iter().position(|&i| generators[i].0 == c.to).unwrap();
        let m = boundary.get_mut(&kf).unwrap();
        m[row][col] += BigInt::from(c.count);
    }
    Ok(MorseComplex { variant, generators, boundary })
}

impl MorseComplex {
    pub fn in_degree(&self, k: usize) -> Vec<String> {
        self.generators.iter().filter(|g| g.1 == k).map(|g| g.0.clone()).collect()
    }

    /// `m_1 = ∂` viewed as a degree +1 map after negating degrees.
    pub fn as_structure(&self) -> AInftyStructure {
        let basis = GradedBasis {
            generators: self.generators.iter().map(|(n, k)| Generator { name: n.clone(), degree: -(*k as i64) }).collect(),
        };
        let mut s = AInftyStructure::new(basis, 1, Convention::Keller);
        for (k, m) in &self.boundary {
            let cols = self.in_degree(*k);
            let rows = self.in_degree(k - 1);
            for (r, row) in m.iter().enumerate() {
                for (c, v) in row.iter().enumerate() {
                    if !v.is_zero() {
                        let from = s.basis.index(&cols[c]).unwrap();
                        let to = s.basis.index(&rows[r]).unwrap();
                        s.add(&[from], to, v);
                    }
                }
            }
        }
        s
    }

    pub fn homology(&self) -> Result<Vec<HomologyGroup>, MorseError> {
        let mut h: Vec<HomologyGroup> = homology(&self.as_structure())?
            .into_iter()
            .map(|g| HomologyGroup { degree: -g.degree, ..g })
            .collect();
        h.sort_by_key(|g| g.degree);
        Ok(h)
    }

    pub fn betti(&self) -> Result<Vec<usize>, MorseError> {
        Ok(self.homology()?.iter().map(|g| g.betti).collect())
    }
}

pub fn check_d_squared(c: &MorseComplex) -> bool {
    c.boundary.iter().all(|(k, m)| match c.boundary.get(&(k + 1)) {
        Some(next) if !m.is_empty() && !next.is_empty() => {
            mat_mul(m, next).iter().all(|row| row.iter().all(Zero::is_zero))
        }
        _ => true,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DualityReport {
    pub ranks: Vec<(usize, usize, usize)>,
    pub entries_checked: usize,
}

/// Compares `C_k^D(f)` with `C_{n-k}^N(-f)`, matching generators by name.
pub fn duality_check(data_f: &MorseComplexData, data_minus_f: &MorseComplexData) -> Result<DualityReport, MorseError> {
    let n = data_f.n;
    let mut issues = Vec::new();
    if data_minus_f.n != n {
        issues.push("ambient dimensions differ".to_string());
    }
    for p in &data_f.points {
        let expect = match p.flavor {
            Flavor::None => Flavor::None,
            Flavor::Dirichlet => Flavor::Neumann,
            Flavor::Neumann => Flavor::Dirichlet,
        };
        match data_minus_f.point(&p.name) {
            Some(q) if q.flavor == expect => {}
            _ => issues.push(format!("{} has no {:?} partner", p.name, expect)),
        }
    }
    if !issues.is_empty() {
        return Err(MorseError::Mismatch(issues));
    }
    let cd = build_complex(data_f, Variant::D)?;
    let cn = build_complex(data_minus_f, Variant::N)?;
    let mut ranks = Vec::new();
    for k in 0..=n {
        let a = cd.in_degree(k).len();
        let b = cn.in_degree(n - k).len();
        if a != b {
            issues.push(format!("rank C_{k}^D = {a} but rank C_{}^N = {b}", n - k));
        }
        ranks.push((k, a, b));
    }
    // entry (y, x) of ∂^D against entry (x, y) of ∂^N, up to a sign per generator
    let entry = |c: &MorseComplex, from: &str, to: &str| -> BigInt {
        let kf = c.generators.iter().find(|g| g.0 == from).map(|g| g.1);
        let kt = c.generators.iter().find(|g| g.0 == to).map(|g| g.1);
        match (kf, kt) {
            (Some(kf), Some(kt)) if kf == kt + 1 => {
                let col = c.in_degree(kf).iter().position(|g| g == from).unwrap();
                let row = c.in_degree(kt).iter().position(|g| g == to).unwrap();
                c.boundary[&kf][row][col].clone()
            }
            _ => BigInt::zero(),
        }
    };
    let names: Vec<String> = cd.generators.iter().map(|g| g.0.clone()).collect();
    let mut constraints: BTreeMap<usize, Vec<(usize, bool)>> = BTreeMap::new();
    let mut checked = 0;
    for (i, x) in names.iter().enumerate() {
        for (j, y) in names.iter().enumerate() {
            let a = entry(&cd, x, y);
            let b = entry(&cn, y, x);
            if a.is_zero() && b.is_zero() {
                continue;
            }
            checked += 1;
            if a.abs() != b.abs() {
                issues.push(format!("|<∂{x}, {y}>| differs from the dual entry"));
                continue;
            }
            let flip = a != b;
            constraints.entry(i).or_default().push((j, flip));
            constraints.entry(j).or_default().push((i, flip));
        }
    }
    let mut sign: Vec<Option<bool>> = vec![None; names.len()];
    for start in 0..names.len() {
        if sign[start].is_some() {
            continue;
        }
        sign[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &(v, flip) in constraints.get(&u).map(Vec::as_slice).unwrap_or(&[]) {
                let want = sign[u].unwrap() ^ flip;
                match sign[v] {
                    None => {
                        sign[v] = Some(want);
                        queue.push_back(v);
                    }
                    Some(s) if s != want => issues.push(format!("no consistent sign for {}", names[v])),
                    _ => {}
                }
            }
        }
    }
    if issues.is_empty() {
        Ok(DualityReport { ranks, entries_checked: checked })
    } else {
        Err(MorseError::Mismatch(issues))
    }
}
