//! Graded free ℤ-modules with A∞ operations, morphisms and homotopies.

use crate::signs::{
    convention_convert_sign, morphism_rhs_sign, pow_m1, Convention, Sign,
};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("operation m_{0} is not available")]
    MissingOperation(usize),
    #[error("m_1 does not square to zero")]
    NotAComplex,
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("degree violation: {0}")]
    DegreeViolation(String),
    #[error("arity mismatch: {0}")]
    ArityMismatch(String),
    #[error("unknown generator {0}")]
    UnknownGenerator(String),
    #[error("malformed structure: {0}")]
    Malformed(String),
}

/// Sparse ℤ-combination of basis elements, keyed by basis index.
pub type Vector = BTreeMap<usize, BigInt>;

pub fn vec_add(v: &mut Vector, k: usize, c: &BigInt) {
    if c.is_zero() {
        return;
    }
    let e = v.entry(k).or_insert_with(BigInt::zero);
    *e += c;
    if e.is_zero() {
        v.remove(&k);
    }
}

pub fn vec_axpy(v: &mut Vector, a: &BigInt, w: &Vector) {
    for (k, c) in w {
        vec_add(v, *k, &(a * c));
    }
}

pub fn unit(k: usize) -> Vector {
    let mut v = Vector::new();
    v.insert(k, BigInt::one());
    v
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub degree: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GradedBasis {
    pub generators: Vec<Generator>,
}

impl GradedBasis {
    pub fn new(generators: Vec<Generator>) -> Result<Self, AlgebraError> {
        let mut seen = std::collections::BTreeSet::new();
        for g in &generators {
            if !seen.insert(g.name.clone()) {
                return Err(AlgebraError::Malformed(format!("duplicate generator {}", g.name)));
            }
        }
        Ok(GradedBasis { generators })
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn degree(&self, i: usize) -> i64 {
        self.generators[i].degree
    }

    pub fn name(&self, i: usize) -> &str {
        &self.generators[i].name
    }

    pub fn index(&self, name: &str) -> Result<usize, AlgebraError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| AlgebraError::UnknownGenerator(name.to_string()))
    }

    pub fn in_degree(&self, k: i64) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.degree(i) == k).collect()
    }

    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let lo = self.generators.iter().map(|g| g.degree).min()?;
        let hi = self.generators.iter().map(|g| g.degree).max()?;
        Some((lo, hi))
    }
}

/// Sparse multilinear map stored on basis tuples.
pub type MultiMap = BTreeMap<Vec<usize>, Vector>;

/// Every tuple of basis indices of length `d`, in lexicographic order.
pub fn all_tuples(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * n);
        for t in &out {
            for i in 0..n {
                let mut u = t.clone();
                u.push(i);
                next.push(u);
            }
        }
        out = next;
    }
    out
}

/// Applies a multilinear map to vector arguments.
fn apply_multi(map: &MultiMap, args: &[Vector]) -> Vector {
    let mut out = Vector::new();
    let mut stack: Vec<(Vec<usize>, BigInt)> = vec![(Vec::new(), BigInt::one())];
    for a in args {
        let mut next = Vec::new();
        for (t, c) in &stack {
            for (k, ck) in a {
                let mut u = t.clone();
                u.push(*k);
                next.push((u, c * ck));
            }
        }
        stack = next;
        if stack.is_empty() {
            return out;
        }
    }
    for (t, c) in stack {
        if let Some(v) = map.get(&t) {
            vec_axpy(&mut out, &c, v);
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AInftyStructure {
    pub basis: GradedBasis,
    pub ops: BTreeMap<usize, MultiMap>,
    pub maxd: usize,
    pub convention: Convention,
}

impl AInftyStructure {
    pub fn new(basis: GradedBasis, maxd: usize, convention: Convention) -> Self {
        let ops = (1..=maxd).map(|d| (d, MultiMap::new())).collect();
        AInftyStructure { basis, ops, maxd, convention }
    }

    pub fn degrees(&self, t: &[usize]) -> Vec<i64> {
        t.iter().map(|&i| self.basis.degree(i)).collect()
    }

    /// Adds `coeff * out` to `m_d(inputs)`.
    pub fn add(&mut self, inputs: &[usize], out: usize, coeff: &BigInt) {
        let d = inputs.len();
        let m = self.ops.entry(d).or_default();
        let v = m.entry(inputs.to_vec()).or_default();
        vec_add(v, out, coeff);
        if v.is_empty() {
            m.remove(inputs);
        }
        if d > self.maxd {
            self.maxd = d;
        }
    }

    pub fn op(&self, inputs: &[usize]) -> Result<Vector, AlgebraError> {
        let d = inputs.len();
        if d > self.maxd || d == 0 {
            return Err(AlgebraError::MissingOperation(d));
        }
        Ok(self.ops.get(&d).and_then(|m| m.get(inputs)).cloned().unwrap_or_default())
    }

    pub fn apply(&self, args: &[Vector]) -> Result<Vector, AlgebraError> {
        let d = args.len();
        if d > self.maxd || d == 0 {
            return Err(AlgebraError::MissingOperation(d));
        }
        Ok(self.ops.get(&d).map(|m| apply_multi(m, args)).unwrap_or_default())
    }

    /// Checks `deg m_d(x) = sum deg x_i + 2 - d` on every stored entry.
    pub fn check_degrees(&self) -> Result<(), AlgebraError> {
        for (d, m) in &self.ops {
            for (t, v) in m {
                let want: i64 = self.degrees(t).iter().sum::<i64>() + 2 - *d as i64;
                for k in v.keys() {
                    if self.basis.degree(*k) != want {
                        return Err(AlgebraError::DegreeViolation(format!(
                            "m_{d}({}) has a component on {}",
                            self.names(t).join(","),
                            self.basis.name(*k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn names(&self, t: &[usize]) -> Vec<String> {
        t.iter().map(|&i| self.basis.name(i).to_string()).collect()
    }

    /// Relation sign for the term `m_{j+1+l}(1^j ⊗ m_k ⊗ 1^l)`, Koszul part included.
    pub fn relation_sign(&self, j: usize, k: usize, l: usize, degs: &[i64]) -> Sign {
        relation_entry_sign_for(self.convention, j, k, l, degs)
    }

    /// The A∞ relation at arity `d` evaluated on basis inputs.
    pub fn defect(&self, inputs: &[usize]) -> Result<Vector, AlgebraError> {
        let d = inputs.len();
        if d > self.maxd || d == 0 {
            return Err(AlgebraError::MissingOperation(d));
        }
        let degs = self.degrees(inputs);
        let mut out = Vector::new();
        for k in 1..=d {
            for j in 0..=d - k {
                let l = d - k - j;
                let inner = self.op(&inputs[j..j + k])?;
                if inner.is_empty() {
                    continue;
                }
                let mut args: Vec<Vector> = inputs[..j].iter().map(|&i| unit(i)).collect();
                args.push(inner);
                args.extend(inputs[j + k..].iter().map(|&i| unit(i)));
                let outer = self.apply(&args)?;
                let s = BigInt::from(self.relation_sign(j, k, l, &degs));
                vec_axpy(&mut out, &s, &outer);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let gens: Vec<Value> = self
            .basis
            .generators
            .iter()
            .map(|g| json!({"name": g.name, "degree": g.degree}))
            .collect();
        let mut ops = serde_json::Map::new();
        for (d, m) in &self.ops {
            let entries: Vec<Value> = m
                .iter()
                .map(|(t, v)| {
                    json!({
                        "in": self.names(t),
                        "out": v.iter().map(|(k, c)| json!({"gen": self.basis.name(*k), "coeff": coeff_json(c)})).collect::<Vec<_>>()
                    })
                })
                .collect();
            ops.insert(d.to_string(), Value::Array(entries));
        }
        json!({
            "generators": gens,
            "ops": ops,
            "maxd": self.maxd,
            "convention": self.convention.to_string(),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, AlgebraError> {
        let bad = |s: &str| AlgebraError::Malformed(s.to_string());
        let gens: Vec<Generator> = serde_json::from_value(v.get("generators").cloned().ok_or_else(|| bad("generators"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let basis = GradedBasis::new(gens)?;
        let convention = match v.get("convention").and_then(Value::as_str) {
            Some(s) => s.parse().map_err(|e: String| bad(&e))?,
            None => Convention::Keller,
        };
        let ops = v.get("ops").and_then(Value::as_object).ok_or_else(|| bad("ops"))?;
        let mut maxd = v.get("maxd").and_then(Value::as_u64).unwrap_or(0) as usize;
        for k in ops.keys() {
            let d: usize = k.parse().map_err(|_| bad("op arity"))?;
            maxd = maxd.max(d);
        }
        let mut s = AInftyStructure::new(basis, maxd.max(1), convention);
        for (k, entries) in ops {
            let d: usize = k.parse().map_err(|_| bad("op arity"))?;
            for e in entries.as_array().ok_or_else(|| bad("op entries"))? {
                let ins: Vec<String> = serde_json::from_value(e.get("in").cloned().ok_or_else(|| bad("in"))?)
                    .map_err(|e| bad(&e.to_string()))?;
                if ins.len() != d {
                    return Err(AlgebraError::ArityMismatch(format!("entry of m_{d} with {} inputs", ins.len())));
                }
                let t: Vec<usize> = ins.iter().map(|n| s.basis.index(n)).collect::<Result<_, _>>()?;
                for o in e.get("out").and_then(Value::as_array).ok_or_else(|| bad("out"))? {
                    let g = o.get("gen").and_then(Value::as_str).ok_or_else(|| bad("gen"))?;
                    let c = coeff_from_json(o.get("coeff").ok_or_else(|| bad("coeff"))?)?;
                    let gi = s.basis.index(g)?;
                    s.add(&t, gi, &c);
                }
            }
        }
        Ok(s)
    }
}

pub fn coeff_json(c: &BigInt) -> Value {
    match c.to_i64() {
        Some(v) => json!(v),
        None => json!(c.to_string()),
    }
}

pub fn coeff_from_json(v: &Value) -> Result<BigInt, AlgebraError> {
    if let Some(i) = v.as_i64() {
        return Ok(BigInt::from(i));
    }
    v.as_str()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| AlgebraError::Malformed(format!("bad coefficient {v}")))
}

/// Relation sign in either convention, Koszul factor included.
pub fn relation_entry_sign_for(c: Convention, j: usize, k: usize, l: usize, degs: &[i64]) -> Sign {
    let s: i64 = degs[..j].iter().sum();
    let base = match c {
        Convention::Keller => (j + k * l) as i64,
        Convention::LH => (j * k + l) as i64,
    };
    pow_m1(base + (2 - k as i64) * s)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub arity: usize,
    pub inputs: Vec<String>,
    pub defect: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Report {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

fn describe(basis: &GradedBasis, v: &Vector) -> Vec<(String, String)> {
    v.iter().map(|(k, c)| (basis.name(*k).to_string(), c.to_string())).collect()
}

/// Evaluates the relations for every basis tuple of arity up to `maxd`.
pub fn verify_structure(s: &AInftyStructure, maxd: usize) -> Result<Report, AlgebraError> {
    if maxd > s.maxd {
        return Err(AlgebraError::MissingOperation(maxd));
    }
    let n = s.basis.len();
    let tuples: Vec<Vec<usize>> = (1..=maxd).flat_map(|d| all_tuples(n, d)).collect();
    let results: Vec<Result<Option<Violation>, AlgebraError>> = tuples
        .par_iter()
        .map(|t| {
            let v = s.defect(t)?;
            Ok(if v.is_empty() {
                None
            } else {
                Some(Violation { arity: t.len(), inputs: s.names(t), defect: describe(&s.basis, &v) })
            })
        })
        .collect();
    let mut violations = Vec::new();
    for r in results {
        if let Some(v) = r? {
            violations.push(v);
        }
    }
    Ok(Report { checked: tuples.len(), violations })
}

/// `m_i ↦ (-1)^{i(i-1)/2} m_i`, switching the convention tag.
pub fn convert_convention(s: &AInftyStructure) -> AInftyStructure {
    let mut out = s.clone();
    out.convention = s.convention.other();
    for (d, m) in out.ops.iter_mut() {
        let sg = BigInt::from(convention_convert_sign(*d));
        for v in m.values_mut() {
            for c in v.values_mut() {
                *c *= &sg;
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AInftyMorphism {
    pub source: AInftyStructure,
    pub target: AInftyStructure,
    /// `maps[d]` sends source basis tuples to target vectors.
    pub maps: BTreeMap<usize, MultiMap>,
    pub maxd: usize,
}

impl AInftyMorphism {
    pub fn identity(s: &AInftyStructure) -> Self {
        let mut f1 = MultiMap::new();
        for i in 0..s.basis.len() {
            f1.insert(vec![i], unit(i));
        }
        let mut maps = BTreeMap::new();
        maps.insert(1, f1);
        AInftyMorphism { source: s.clone(), target: s.clone(), maps, maxd: s.maxd }
    }

    pub fn add(&mut self, inputs: &[usize], out: usize, coeff: &BigInt) {
        let m = self.maps.entry(inputs.len()).or_default();
        let v = m.entry(inputs.to_vec()).or_default();
        vec_add(v, out, coeff);
        if v.is_empty() {
            m.remove(inputs);
        }
    }

    pub fn component(&self, inputs: &[usize]) -> Vector {
        self.maps.get(&inputs.len()).and_then(|m| m.get(inputs)).cloned().unwrap_or_default()
    }

    fn apply(&self, args: &[Vector]) -> Vector {
        self.maps.get(&args.len()).map(|m| apply_multi(m, args)).unwrap_or_default()
    }

    /// Checks `deg f_d(x) = sum deg x_i + 1 - d`.
    pub fn check_degrees(&self) -> Result<(), AlgebraError> {
        for (d, m) in &self.maps {
            for (t, v) in m {
                let want: i64 = self.source.degrees(t).iter().sum::<i64>() + 1 - *d as i64;
                for k in v.keys() {
                    if self.target.basis.degree(*k) != want {
                        return Err(AlgebraError::DegreeViolation(format!(
                            "f_{d}({}) has a component on {}",
                            self.source.names(t).join(","),
                            self.target.basis.name(*k)
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Left minus right side of the morphism relation on basis inputs.
    pub fn relation_defect(&self, inputs: &[usize]) -> Result<Vector, AlgebraError> {
        let i = inputs.len();
        let src = &self.source;
        let degs = src.degrees(inputs);
        let mut lhs = Vector::new();
        for k in 1..=i {
            for j in 0..=i - k {
                let l = i - k - j;
                let inner = src.op(&inputs[j..j + k])?;
                if inner.is_empty() {
                    continue;
                }
                let mut args: Vec<Vector> = inputs[..j].iter().map(|&x| unit(x)).collect();
                args.push(inner);
                args.extend(inputs[j + k..].iter().map(|&x| unit(x)));
                let sg = relation_entry_sign_for(src.convention, j, k, l, &degs);
                vec_axpy(&mut lhs, &BigInt::from(sg), &self.apply(&args));
            }
        }
        let mut rhs = Vector::new();
        for parts in compositions(i) {
            let r = parts.len();
            if r > self.target.maxd {
                return Err(AlgebraError::MissingOperation(r));
            }
            let mut args = Vec::with_capacity(r);
            let mut pos = 0;
            let mut koszul = 0i64;
            let mut before = 0i64;
            let mut empty = false;
            for &p in &parts {
                koszul += (1 - p as i64) * before;
                let v = self.component(&inputs[pos..pos + p]);
                if v.is_empty() {
                    empty = true;
                    break;
                }
                before += degs[pos..pos + p].iter().sum::<i64>();
                args.push(v);
                pos += p;
            }
            if empty {
                continue;
            }
            let sg = morphism_rhs_sign(&parts, src.convention) * pow_m1(koszul);
            vec_axpy(&mut rhs, &BigInt::from(sg), &self.target.apply(&args)?);
        }
        vec_axpy(&mut lhs, &BigInt::from(-1), &rhs);
        Ok(lhs)
    }
}

/// Ordered compositions of `n` into positive parts.
pub fn compositions(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for mut rest in compositions(n - first) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

pub fn verify_morphism(f: &AInftyMorphism, maxd: usize) -> Result<Report, AlgebraError> {
    let n = f.source.basis.len();
    let tuples: Vec<Vec<usize>> = (1..=maxd).flat_map(|d| all_tuples(n, d)).collect();
    let results: Vec<Result<Option<Violation>, AlgebraError>> = tuples
        .par_iter()
        .map(|t| {
            let v = f.relation_defect(t)?;
            Ok(if v.is_empty() {
                None
            } else {
                Some(Violation { arity: t.len(), inputs: f.source.names(t), defect: describe(&f.target.basis, &v) })
            })
        })
        .collect();
    let mut violations = Vec::new();
    for r in results {
        if let Some(v) = r? {
            violations.push(v);
        }
    }
    Ok(Report { checked: tuples.len(), violations })
}

// ---------------------------------------------------------------------------
// integer linear algebra

pub type Matrix = Vec<Vec<BigInt>>;

pub fn zeros(r: usize, c: usize) -> Matrix {
    vec![vec![BigInt::zero(); c]; r]
}

pub fn identity(n: usize) -> Matrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = BigInt::one();
    }
    m
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let r = a.len();
    let k = b.len();
    let c = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(r, c);
    for i in 0..r {
        for t in 0..k {
            if a[i][t].is_zero() {
                continue;
            }
            for j in 0..c {
                if !b[t][j].is_zero() {
                    out[i][j] += &a[i][t] * &b[t][j];
                }
            }
        }
    }
    out
}

/// Smith form `u * a * v = diag(d)` with unimodular `u`, `v`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub diag: Vec<BigInt>,
    pub u: Matrix,
    pub v: Matrix,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }

    /// Elementary divisors larger than one.
    pub fn torsion(&self) -> Vec<BigInt> {
        self.diag.iter().filter(|d| !d.is_one()).cloned().collect()
    }
}

pub fn smith_normal_form(a: &Matrix, cols: usize) -> Smith {
    let m = a.len();
    let n = cols;
    let mut a = a.clone();
    let mut u = identity(m);
    let mut v = identity(n);
    let mut diag = Vec::new();
    let mut t = 0;
    while t < m.min(n) {
        // pivot of minimal absolute value
        let mut best: Option<(usize, usize)> = None;
        for i in t..m {
            for j in t..n {
                if !a[i][j].is_zero() && best.map_or(true, |(bi, bj)| a[i][j].abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let mut changed = false;
            for i in t + 1..m {
                if a[i][t].is_zero() {
                    continue;
                }
                let q = a[i][t].div_floor(&a[t][t]);
                for j in t..n {
                    let x = &q * &a[t][j];
                    a[i][j] -= x;
                }
                for j in 0..m {
                    let x = &q * &u[t][j];
                    u[i][j] -= x;
                }
                if !a[i][t].is_zero() {
                    a.swap(t, i);
                    u.swap(t, i);
                    changed = true;
                }
            }
            for j in t + 1..n {
                if a[t][j].is_zero() {
                    continue;
                }
                let q = a[t][j].div_floor(&a[t][t]);
                for i in t..m {
                    let x = &q * &a[i][t];
                    a[i][j] -= x;
                }
                for i in 0..n {
                    let x = &q * &v[i][t];
                    v[i][j] -= x;
                }
                if !a[t][j].is_zero() {
                    for row in a.iter_mut() {
                        row.swap(t, j);
                    }
                    for row in v.iter_mut() {
                        row.swap(t, j);
                    }
                    changed = true;
                }
            }
            if changed {
                continue;
            }
            // divisibility of the remaining block
            let mut fix = None;
            'outer: for i in t + 1..m {
                for j in t + 1..n {
                    if !a[i][j].is_zero() && !(&a[i][j] % &a[t][t]).is_zero() {
                        fix = Some(i);
                        break 'outer;
                    }
                }
            }
            match fix {
                Some(i) => {
                    for j in t..n {
                        let x = a[i][j].clone();
                        a[t][j] += x;
                    }
                    for j in 0..m {
                        let x = u[i][j].clone();
                        u[t][j] += x;
                    }
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for j in t..n {
                a[t][j] = -a[t][j].clone();
            }
            for j in 0..m {
                u[t][j] = -u[t][j].clone();
            }
        }
        diag.push(a[t][t].clone());
        t += 1;
    }
    Smith { diag, u, v, rows: m, cols: n }
}

/// An integer solution of `a x = b`, if one exists.
pub fn solve_integer(a: &Matrix, cols: usize, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let s = smith_normal_form(a, cols);
    let ub: Vec<BigInt> = s.u.iter().map(|row| row.iter().zip(b).map(|(x, y)| x * y).sum()).collect();
    let mut y = vec![BigInt::zero(); cols];
    for (i, val) in ub.iter().enumerate() {
        if i < s.rank() {
            if !(val % &s.diag[i]).is_zero() {
                return None;
            }
            y[i] = val / &s.diag[i];
        } else if !val.is_zero() {
            return None;
        }
    }
    Some((0..cols).map(|i| (0..cols).map(|j| &s.v[i][j] * &y[j]).sum()).collect())
}

/// A ℤ-basis of the kernel of `a`.
pub fn kernel_basis(a: &Matrix, cols: usize) -> Vec<Vec<BigInt>> {
    let s = smith_normal_form(a, cols);
    (s.rank()..cols).map(|j| (0..cols).map(|i| s.v[i][j].clone()).collect()).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    pub degree: i64,
    pub betti: usize,
    pub torsion: Vec<String>,
}

/// Matrix of `m_1` from degree `k` to degree `k + 1`.
pub fn differential_matrix(s: &AInftyStructure, k: i64) -> (Matrix, Vec<usize>, Vec<usize>) {
    let src = s.basis.in_degree(k);
    let dst = s.basis.in_degree(k + 1);
    let mut m = zeros(dst.len(), src.len());
    for (c, &g) in src.iter().enumerate() {
        if let Ok(v) = s.op(&[g]) {
            for (k2, coeff) in v {
                if let Some(r) = dst.iter().position(|&h| h == k2) {
                    m[r][c] = coeff;
                }
            }
        }
    }
    (m, src, dst)
}

/// Integral homology of `(A, m_1)` via Smith normal form.
pub fn homology(s: &AInftyStructure) -> Result<Vec<HomologyGroup>, AlgebraError> {
    let Some((lo, hi)) = s.basis.degree_range() else { return Ok(Vec::new()) };
    for g in 0..s.basis.len() {
        let v = s.op(&[g])?;
        let vv = s.apply(&[v])?;
        if !vv.is_empty() {
            return Err(AlgebraError::NotAComplex);
        }
    }
    let mut out = Vec::new();
    for k in lo..=hi {
        let (dk, src, _) = differential_matrix(s, k);
        let (dprev, _, _) = differential_matrix(s, k - 1);
        let rk = smith_normal_form(&dk, src.len()).rank();
        let prev_cols = s.basis.in_degree(k - 1).len();
        let sp = smith_normal_form(&dprev, prev_cols);
        out.push(HomologyGroup {
            degree: k,
            betti: src.len() - rk - sp.rank(),
            torsion: sp.torsion().iter().map(|t| t.to_string()).collect(),
        });
    }
    Ok(out)
}

/// Whether `f_1` induces an isomorphism on rational homology: the mapping
/// cone `A[1] ⊕ B` with `d(a, b) = (-m_1 a, f_1 a + m'_1 b)` is acyclic.
pub fn is_quasi_isomorphism(f: &AInftyMorphism) -> Result<bool, AlgebraError> {
    let (a, b) = (&f.source, &f.target);
    let lo = a.basis.degree_range().map_or(0, |r| r.0 - 1).min(b.basis.degree_range().map_or(0, |r| r.0));
    let hi = a.basis.degree_range().map_or(0, |r| r.1).max(b.basis.degree_range().map_or(0, |r| r.1));
    // cone generators of degree n: source generators of degree n + 1, then target ones
    let gens = |n: i64| -> Vec<(bool, usize)> {
        let mut g: Vec<(bool, usize)> = a.basis.in_degree(n + 1).into_iter().map(|x| (false, x)).collect();
        g.extend(b.basis.in_degree(n).into_iter().map(|y| (true, y)));
        g
    };
    let cone_d = |n: i64| -> Result<(Matrix, usize), AlgebraError> {
        let (src, dst) = (gens(n), gens(n + 1));
        let mut m = zeros(dst.len(), src.len());
        for (c, &(tgt, g)) in src.iter().enumerate() {
            let mut put = |side: bool, v: Vector, sg: i64| {
                for (h, coeff) in v {
                    if let Some(r) = dst.iter().position(|&x| x == (side, h)) {
                        m[r][c] += coeff * sg;
                    }
                }
            };
            if tgt {
                put(true, b.op(&[g])?, 1);
            } else {
                put(false, a.op(&[g])?, -1);
                put(true, f.component(&[g]), 1);
            }
        }
        Ok((m, src.len()))
    };
    for n in lo..=hi {
        let (dn, cols) = cone_d(n)?;
        let (dp, pcols) = cone_d(n - 1)?;
        if smith_normal_form(&dn, cols).rank() + smith_normal_form(&dp, pcols).rank() != gens(n).len() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Triple Massey product as a coset: a representative and generators of the
/// indeterminacy submodule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MasseyCoset {
    pub degree: i64,
    pub representative: Vector,
    pub indeterminacy: Vec<Vector>,
}

impl MasseyCoset {
    /// Whether `v` lies in the coset, decided over ℤ.
    pub fn contains(&self, v: &Vector, basis: &GradedBasis) -> bool {
        let gens = basis.in_degree(self.degree);
        let cols = self.indeterminacy.len();
        let mut a = zeros(gens.len(), cols);
        for (c, w) in self.indeterminacy.iter().enumerate() {
            for (r, g) in gens.iter().enumerate() {
                a[r][c] = w.get(g).cloned().unwrap_or_default();
            }
        }
        let b: Vec<BigInt> = gens
            .iter()
            .map(|g| v.get(g).cloned().unwrap_or_default() - self.representative.get(g).cloned().unwrap_or_default())
            .collect();
        if cols == 0 {
            return b.iter().all(Zero::is_zero);
        }
        solve_integer(&a, cols, &b).is_some()
    }
}

fn to_dense(v: &Vector, gens: &[usize]) -> Vec<BigInt> {
    gens.iter().map(|g| v.get(g).cloned().unwrap_or_default()).collect()
}

fn from_dense(x: &[BigInt], gens: &[usize]) -> Vector {
    let mut v = Vector::new();
    for (c, g) in x.iter().zip(gens) {
        vec_add(&mut v, *g, c);
    }
    v
}

/// Solves `m_1 u = target` with `u` in degree `k`.
fn primitive(s: &AInftyStructure, k: i64, target: &Vector) -> Option<Vector> {
    let (m, src, dst) = differential_matrix(s, k);
    if target.keys().any(|g| !dst.contains(g)) {
        return None;
    }
    if src.is_empty() {
        return if target.is_empty() { Some(Vector::new()) } else { None };
    }
    let x = solve_integer(&m, src.len(), &to_dense(target, &dst))?;
    Some(from_dense(&x, &src))
}

fn cycles(s: &AInftyStructure, k: i64) -> Vec<Vector> {
    let (m, src, _) = differential_matrix(s, k);
    kernel_basis(&m, src.len()).iter().map(|x| from_dense(x, &src)).collect()
}

pub fn massey3(s: &AInftyStructure, a: usize, b: usize, c: usize) -> Result<MasseyCoset, AlgebraError> {
    if s.maxd < 3 {
        return Err(AlgebraError::MissingOperation(3));
    }
    for &x in &[a, b, c] {
        if !s.op(&[x])?.is_empty() {
            return Err(AlgebraError::PreconditionFailed(format!("{} is not a cycle", s.basis.name(x))));
        }
    }
    let (da, db, dc) = (s.basis.degree(a), s.basis.degree(b), s.basis.degree(c));
    let ab = s.op(&[a, b])?;
    let bc = s.op(&[b, c])?;
    let u = primitive(s, da + db - 1, &ab)
        .ok_or_else(|| AlgebraError::PreconditionFailed("m_2(a,b) is not exact".into()))?;
    let v = primitive(s, db + dc - 1, &bc)
        .ok_or_else(|| AlgebraError::PreconditionFailed("m_2(b,c) is not exact".into()))?;
    let sa = BigInt::from(-pow_m1(da));
    let mut rep = s.op(&[a, b, c])?;
    vec_axpy(&mut rep, &BigInt::one(), &s.apply(&[u, unit(c)])?);
    vec_axpy(&mut rep, &sa, &s.apply(&[unit(a), v])?);
    let deg = da + db + dc - 1;
    let mut ind = Vec::new();
    for z in cycles(s, da + db - 1) {
        let w = s.apply(&[z, unit(c)])?;
        if !w.is_empty() {
            ind.push(w);
        }
    }
    for z in cycles(s, db + dc - 1) {
        let w = s.apply(&[unit(a), z])?;
        if !w.is_empty() {
            ind.push(w);
        }
    }
    for g in s.basis.in_degree(deg - 1) {
        let w = s.op(&[g])?;
        if !w.is_empty() {
            ind.push(w);
        }
    }
    Ok(MasseyCoset { degree: deg, representative: rep, indeterminacy: ind })
}

// ---------------------------------------------------------------------------
// bar construction

/// ℤ-combination of tensor words of basis elements.
pub type BarElement = BTreeMap<Vec<usize>, BigInt>;

fn bar_add(e: &mut BarElement, w: Vec<usize>, c: BigInt) {
    if c.is_zero() {
        return;
    }
    let x = e.entry(w.clone()).or_insert_with(BigInt::zero);
    *x += c;
    if x.is_zero() {
        e.remove(&w);
    }
}

fn bar_axpy(e: &mut BarElement, a: &BigInt, f: &BarElement) {
    for (w, c) in f {
        bar_add(e, w.clone(), a * c);
    }
}

/// Shifted degree `|x| - 1`.
fn sdeg(b: &GradedBasis, w: &[usize]) -> i64 {
    w.iter().map(|&i| b.degree(i) - 1).sum()
}

/// Sign relating `m_n` to the shifted operation `b_n = s m_n (s^{-1})^{⊗n}`.
fn shift_sign(b: &GradedBasis, w: &[usize]) -> i64 {
    let n = w.len() as i64;
    w.iter().enumerate().map(|(i, &x)| (n - 1 - i as i64) * (b.degree(x) - 1)).sum()
}

/// Component maps of a coderivation or coalgebra map, as shifted operations
/// on words. The shift realizes the LH signs; Keller components are rescaled
/// by `(-1)^{n(n-1)/2}` first.
fn shifted_component(maps: &BTreeMap<usize, MultiMap>, b: &GradedBasis, c: Convention, w: &[usize]) -> Vector {
    let mut v = maps.get(&w.len()).and_then(|m| m.get(w)).cloned().unwrap_or_default();
    let conv = if c == Convention::Keller { convention_convert_sign(w.len()) } else { 1 };
    if pow_m1(shift_sign(b, w)) * conv < 0 {
        for c in v.values_mut() {
            *c = -c.clone();
        }
    }
    v
}

/// The bar differential extended as a coderivation.
pub fn bar_differential(s: &AInftyStructure, x: &BarElement) -> BarElement {
    let mut out = BarElement::new();
    for (w, c) in x {
        let n = w.len();
        for k in 1..=n.min(s.maxd) {
            for j in 0..=n - k {
                let inner = shifted_component(&s.ops, &s.basis, s.convention, &w[j..j + k]);
                let sg = pow_m1(sdeg(&s.basis, &w[..j]));
                for (g, cg) in inner {
                    let mut nw = w[..j].to_vec();
                    nw.push(g);
                    nw.extend_from_slice(&w[j + k..]);
                    bar_add(&mut out, nw, c * cg * BigInt::from(sg));
                }
            }
        }
    }
    out
}

/// Coalgebra map induced by component maps `f_d`.
pub fn bar_morphism(f: &AInftyMorphism, x: &BarElement) -> BarElement {
    let b = &f.source.basis;
    let mut out = BarElement::new();
    for (w, c) in x {
        for parts in compositions(w.len()) {
            let mut acc: Vec<(Vec<usize>, BigInt)> = vec![(Vec::new(), c.clone())];
            let mut pos = 0;
            for &p in &parts {
                let comp = shifted_component(&f.maps, b, f.source.convention, &w[pos..pos + p]);
                let mut next = Vec::new();
                for (pre, cp) in &acc {
                    for (g, cg) in &comp {
                        let mut nw = pre.clone();
                        nw.push(*g);
                        next.push((nw, cp * cg));
                    }
                }
                acc = next;
                pos += p;
            }
            for (nw, cc) in acc {
                bar_add(&mut out, nw, cc);
            }
        }
    }
    out
}

/// Components `h_d` of an `(F, G)`-coderivation of shifted degree -1.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Coderivation {
    pub maps: BTreeMap<usize, MultiMap>,
}

/// `H(w) = sum F(w_1) ⊗ h(w_2) ⊗ G(w_3)` with Koszul sign from passing `h` over `F(w_1)`.
pub fn bar_coderivation(h: &Coderivation, f: &AInftyMorphism, g: &AInftyMorphism, x: &BarElement) -> BarElement {
    let b = &f.source.basis;
    let tb = &f.target.basis;
    let mut out = BarElement::new();
    for (w, c) in x {
        let n = w.len();
        for i in 0..n {
            for k in 1..=n - i {
                let left: BarElement = [(w[..i].to_vec(), BigInt::one())].into_iter().collect();
                let right: BarElement = [(w[i + k..].to_vec(), BigInt::one())].into_iter().collect();
                let fl = if i == 0 { left.clone() } else { bar_morphism(f, &left) };
                let gr = if i + k == n { right.clone() } else { bar_morphism(g, &right) };
                let mid = shifted_component(&h.maps, b, f.source.convention, &w[i..i + k]);
                if mid.is_empty() {
                    continue;
                }
                for (lw, lc) in &fl {
                    let sg = BigInt::from(pow_m1(sdeg(tb, lw)));
                    for (mg, mc) in &mid {
                        for (rw, rc) in &gr {
                            let mut nw = lw.clone();
                            nw.push(*mg);
                            nw.extend_from_slice(rw);
                            bar_add(&mut out, nw, c * lc * mc * rc * &sg);
                        }
                    }
                }
            }
        }
    }
    out
}

/// `F - G - D'H + HD` on `x`.
pub fn homotopy_defect(f: &AInftyMorphism, g: &AInftyMorphism, h: &Coderivation, x: &BarElement) -> BarElement {
    let mut out = bar_morphism(f, x);
    bar_axpy(&mut out, &BigInt::from(-1), &bar_morphism(g, x));
    let hx = bar_coderivation(h, f, g, x);
    bar_axpy(&mut out, &BigInt::from(-1), &bar_differential(&f.target, &hx));
    let dx = bar_differential(&f.source, x);
    bar_axpy(&mut out, &BigInt::one(), &bar_coderivation(h, f, g, &dx));
    out
}

pub fn word(w: &[usize]) -> BarElement {
    [(w.to_vec(), BigInt::one())].into_iter().collect()
}
