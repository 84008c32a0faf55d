//! Continuation morphisms between the structures of two decorations, counted
//! as flow trees on a cylinder over a circle.

use crate::plflow::geom::{det, sign, Pt, Q};
use crate::ainfty::{is_quasi_isomorphism, verify_morphism, AInftyMorphism, AInftyStructure, Generator, GradedBasis, Report};
use crate::plflow::MeshJson;
use crate::plflow::{
    basis_order, decoration_generator, geometric_m1, raw_counts, Decor, Engine, FlowError, MultiIntersectionResult, PLFunction, PLSurface,
};
use crate::signs::{pow_m1, Convention};
use num_bigint::BigInt;
use crate::plflow::meshes::row_torus;
use crate::trees::enumerate_generic;
use rayon::prelude::*;
use std::collections::BTreeMap;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BaseKind {
    Circle,
    Interval,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSetup {
    pub base: BaseKind,
    /// Values at the vertices of the base, in cyclic order for a circle.
    pub values: Vec<Q>,
    pub seed_a: u64,
    pub seed_b: u64,
}

/// Critical points of the base in cyclic order, starting at a minimum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BaseCritical {
    pub names: Vec<String>,
    pub values: Vec<Q>,
}

impl BaseCritical {
    pub fn index(&self, i: usize) -> usize {
        i % 2
    }

    /// Values rescaled to `[0, 1]`.
    pub fn levels(&self) -> Vec<Q> {
        let lo = self.values.iter().min().cloned().unwrap_or_default();
        let hi = self.values.iter().max().cloned().unwrap_or_default();
        let span = &hi - &lo;
        self.values.iter().map(|v| if span == Q::default() { Q::default() } else { (v - &lo) / &span }).collect()
    }
}

pub fn base_critical(setup: &CylinderSetup) -> Result<BaseCritical, FlowError> {
    if setup.base == BaseKind::Interval {
        return Err(FlowError::Unsupported("continuation over an interval base".into()));
    }
    let v = &setup.values;
    let n = v.len();
    if n < 3 {
        return Err(FlowError::Parse("a circle needs at least three vertices".into()));
    }
    let mut crit = Vec::new();
    for i in 0..n {
        let (prev, next) = (&v[(i + n - 1) % n], &v[(i + 1) % n]);
        if prev == &v[i] || next == &v[i] {
            return Err(FlowError::Degenerate(format!("equal values at adjacent vertices near {i}")));
        }
        if (prev > &v[i]) == (next > &v[i]) {
            crit.push((i, prev > &v[i]));
        }
    }
    let start = crit.iter().position(|(_, is_min)| *is_min).ok_or_else(|| FlowError::Degenerate("constant base".into()))?;
    crit.rotate_left(start);
    Ok(BaseCritical {
        names: crit.iter().map(|(i, _)| format!("p{i}")).collect(),
        values: crit.iter().map(|(i, _)| v[*i].clone()).collect(),
    })
}

/// Height of the strip between the rows.
fn rise() -> Q {
    Q::from_integer(2.into())
}

fn row() -> Q {
    Q::from_integer(2.into())
}

/// Horizontal decoration step of a seed: `±a/101` with the sign taken from the
/// parity of the second generator coordinate.
pub fn seed_shift(seed: u64, attempt: u64) -> Q {
    let g = decoration_generator(seed, attempt);
    let odd = (&g.y * Q::from_integer(103.into())).to_integer() % 2u8 == 1.into();
    if odd {
        -g.x
    } else {
        g.x
    }
}

#[derive(Debug, Clone)]
pub struct Cylinder {
    pub base: BaseCritical,
    pub surface: PLSurface,
    pub function: PLFunction,
    /// Vertex of base point `i` on the input row.
    pub inputs: Vec<usize>,
    /// Vertex of base point `i` on the output row.
    pub outputs: Vec<usize>,
    pub attempt: u64,
}

/// Checks that the critical vertices are exactly the row copies of the base
/// critical points with the expected indices.
pub fn census(base: &BaseCritical, s: &PLSurface, f: &PLFunction) -> Result<(Vec<usize>, Vec<usize>), FlowError> {
    let crit = crate::plflow::classify(s, f)?;
    let copies: Vec<String> = base.names.iter().flat_map(|n| [format!("{n}.0"), format!("{n}.1")]).collect();
    let stray: Vec<&str> = crit.iter().map(|(v, _)| s.names[*v].as_str()).filter(|n| !copies.iter().any(|c| c == n)).collect();
    if !stray.is_empty() {
        return Err(FlowError::Degenerate(format!("interior critical vertices {stray:?}")));
    }
    let find = |name: &str| s.names.iter().position(|n| n == name);
    let mut inputs = Vec::new();
    let mut outputs = Vec::new();
    for (i, n) in base.names.iter().enumerate() {
        for (row, list, shift) in [("0", &mut inputs, 0), ("1", &mut outputs, 1)] {
            let v = find(&format!("{n}.{row}")).ok_or_else(|| FlowError::Degenerate(format!("{n}.{row} missing")))?;
            let kind = crit.iter().find(|(u, _)| *u == v).map(|(_, k)| *k);
            if kind.map(|k| k.index()) != Some(base.index(i) + shift) {
                return Err(FlowError::Degenerate(format!("{n}.{row} has the wrong index")));
            }
            list.push(v);
        }
    }
    Ok((inputs, outputs))
}

pub fn build_cylinder(setup: &CylinderSetup, attempt: u64) -> Result<Cylinder, FlowError> {
    build_cylinder_edited(setup, attempt, |_| {})
}

impl Cylinder {
    /// Flow data with the shear from `a` on the input row to `b` on the output
    /// row; `strip` restricts to the cylinder between the rows.
    pub fn engine(&self, a: Q, b: Q, strip: bool) -> Result<Engine, FlowError> {
        Engine::with_decor(
            self.surface.clone(),
            self.function.clone(),
            Decor::Shear { a, b, c: Q::new(1.into(), 29.into()), row: row() },
            strip.then(rise),
        )
    }
}

/// Flow lines of the strip from output-row critical points down to input-row
/// ones, `(input i, output j) -> count`.
pub fn strip_connections(c: &Cylinder, e: &Engine) -> Result<BTreeMap<(usize, usize), i64>, FlowError> {
    let row_of = |v: usize| -> Option<(bool, usize)> {
        c.inputs.iter().position(|&u| u == v).map(|i| (false, i)).or_else(|| c.outputs.iter().position(|&u| u == v).map(|i| (true, i)))
    };
    let inside = |pts: &[Pt]| -> Result<bool, FlowError> {
        let m = (&pts[0] + &pts[1]).scale(&Q::new(1.into(), 2.into()));
        e.region_mult(&crate::plflow::Region::Band { k: 0 }, &m).map(|x| x == 1)
    };
    let mut out: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (s, sep) in &e.separatrices {
        let Some((upper, si)) = row_of(*s) else { continue };
        for (br, dir) in sep.unstable_branches.iter().zip(&sep.out_dirs) {
            if let (true, Some((false, xi))) = (upper, row_of(br.terminal.0)) {
                if inside(&br.points)? {
                    *out.entry((xi, si)).or_default() -= sign(&det(&sep.w, dir)) as i64;
                }
            }
        }
        for (i, br) in sep.stable_branches.iter().enumerate() {
            if let (false, Some((true, yi))) = (upper, row_of(br.terminal.0)) {
                if inside(&br.points)? {
                    *out.entry((si, yi)).or_default() += if i == 1 { 1 } else { -1 };
                }
            }
        }
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

/// Tree counts from input-row entries to an output-row critical point, summed
/// over generic trees with `d` leaves; keys are base indices.
pub fn strip_counts(c: &Cylinder, e: &Engine, d: usize) -> Result<BTreeMap<(Vec<usize>, usize), i64>, FlowError> {
    Ok(strip_traces(c, e, d)?.0)
}

/// As [`strip_counts`], also returning the nonzero tree counts.
pub fn strip_traces(c: &Cylinder, e: &Engine, d: usize) -> Result<(BTreeMap<(Vec<usize>, usize), i64>, Vec<MultiIntersectionResult>), FlowError> {
    let k = c.base.names.len();
    let trees = enumerate_generic(d).map_err(|err| FlowError::Unsupported(err.to_string()))?;
    let mut jobs = Vec::new();
    for tuple in crate::ainfty::all_tuples(k, d) {
        let deg: i64 = tuple.iter().map(|&i| c.base.index(i) as i64).sum::<i64>() + 1 - d as i64;
        for y in (0..k).filter(|&y| c.base.index(y) as i64 == deg) {
            for t in &trees {
                jobs.push((tuple.clone(), y, t));
            }
        }
    }
    let res: Vec<Result<MultiIntersectionResult, FlowError>> = jobs
        .par_iter()
        .map(|(tuple, y, t)| {
            let entries: Vec<usize> = tuple.iter().map(|&i| c.inputs[i]).collect();
            e.multi_intersection(t, &entries, c.outputs[*y]).map_err(|err| {
                let names: Vec<&str> = tuple.iter().map(|&i| c.base.names[i].as_str()).collect();
                err.with_context(&format!("tree {} entries {:?} output {}", t.canonical(), names, c.base.names[*y]))
            })
        })
        .collect();
    let mut out = BTreeMap::new();
    let mut traces = Vec::new();
    for ((tuple, y, _), r) in jobs.iter().zip(res) {
        let r = r?;
        *out.entry((tuple.clone(), *y)).or_default() += r.count;
        if r.count != 0 {
            traces.push(r);
        }
    }
    out.retain(|_, c: &mut i64| *c != 0);
    Ok((out, traces))
}

/// Tree counts among input-row critical points on the whole torus with a
/// constant horizontal decoration, keyed by base indices.
pub fn row_counts(c: &Cylinder, e: &Engine, maxd: usize) -> Result<BTreeMap<(Vec<usize>, usize), i64>, FlowError> {
    let order = basis_order(e);
    let raw = raw_counts(e, maxd)?;
    let base_of = |v: usize| c.inputs.iter().position(|&u| u == v);
    let mut out = BTreeMap::new();
    for ((tuple, y), n) in raw {
        let ins: Option<Vec<usize>> = tuple.iter().map(|&i| base_of(order[i])).collect();
        if let (Some(ins), Some(yy)) = (ins, base_of(order[y])) {
            out.insert((ins, yy), n);
        }
    }
    Ok(out)
}

/// Structure of the input row of the full torus with the constant horizontal
/// decoration `shift`, on the base generators.
pub fn endpoint_structure(c: &Cylinder, shift: &Q, maxd: usize) -> Result<AInftyStructure, FlowError> {
    let e = c.engine(shift.clone(), shift.clone(), false)?;
    let gens = (0..c.base.names.len()).map(|i| Generator { name: c.base.names[i].clone(), degree: c.base.index(i) as i64 }).collect();
    let basis = GradedBasis::new(gens).map_err(|err| FlowError::Parse(err.to_string()))?;
    let mut s = AInftyStructure::new(basis, maxd, Convention::Keller);
    let b = |v: usize| c.inputs.iter().position(|&u| u == v);
    for ((x, y), n) in geometric_m1(&e) {
        if let (Some(x), Some(y)) = (b(x), b(y)) {
            s.add(&[x], y, &BigInt::from(n));
        }
    }
    for ((t, y), n) in row_counts(c, &e, maxd)? {
        s.add(&t, y, &BigInt::from(n));
    }
    Ok(s)
}

/// Sign turning a raw cylinder count into the coefficient of `f_d`.
pub fn fd_sign(d: usize) -> i64 {
    pow_m1((d * (d + 1) / 2) as i64) as i64
}

/// Coefficient `<f_d(x_1..x_d), y>` on base indices, computed on the first
/// admissible cylinder; zero when the degrees do not match.
pub fn compute_fd(setup: &CylinderSetup, entries: &[usize], output: usize) -> Result<i64, FlowError> {
    let c = build_cylinder(setup, 0)?;
    let k = c.base.names.len();
    if entries.is_empty() || entries.iter().chain([&output]).any(|&i| i >= k) {
        return Err(FlowError::Parse("base index out of range".into()));
    }
    let d = entries.len();
    let deg: i64 = entries.iter().map(|&i| c.base.index(i) as i64).sum::<i64>() + 1 - d as i64;
    if c.base.index(output) as i64 != deg {
        return Ok(0);
    }
    let e = c.engine(seed_shift(setup.seed_a, 0), seed_shift(setup.seed_b, 0), true)?;
    let raw = if d == 1 {
        strip_connections(&c, &e)?.get(&(entries[0], output)).copied().unwrap_or(0)
    } else {
        strip_counts(&c, &e, d)?.get(&(entries.to_vec(), output)).copied().unwrap_or(0)
    };
    Ok(fd_sign(d) * raw)
}

#[derive(Debug, Clone)]
pub struct ContinuationResult {
    pub cylinder: Cylinder,
    pub shifts: (Q, Q),
    pub source: AInftyStructure,
    pub target: AInftyStructure,
    pub morphism: AInftyMorphism,
    /// Nonzero tree counts behind `f_d`, `d ≥ 2`.
    pub traces: Vec<MultiIntersectionResult>,
    /// Reasons earlier attempts were rejected.
    pub failures: Vec<String>,
}

impl ContinuationResult {
    pub fn attempt(&self) -> u64 {
        self.cylinder.attempt
    }

    /// Whether every recorded tree vertex lies strictly between the rows.
    pub fn type_c_empty(&self) -> bool {
        let period = rise() * Q::from_integer(2.into());
        self.traces.iter().flat_map(|t| &t.trace).flat_map(|n| &n.points).all(|(_, y, _)| {
            let Some(y) = crate::plflow::geom::parse_q(y) else { return false };
            let t = &y - (&y / &period).floor() * &period;
            t > Q::default() && t < rise()
        })
    }
}

/// Morphism from the input-row structure of `a` to that of `b` on a given
/// cylinder.
pub fn continuation_on(c: Cylinder, a: Q, b: Q, maxd: usize) -> Result<ContinuationResult, FlowError> {
    let source = endpoint_structure(&c, &a, maxd)?;
    let target = endpoint_structure(&c, &b, maxd)?;
    let e = c.engine(a.clone(), b.clone(), true)?;
    let mut morphism = AInftyMorphism { source: source.clone(), target: target.clone(), maps: BTreeMap::new(), maxd };
    for ((x, y), n) in strip_connections(&c, &e)? {
        morphism.add(&[x], y, &BigInt::from(fd_sign(1) * n));
    }
    let mut traces = Vec::new();
    for d in 2..=maxd {
        let (counts, tr) = strip_traces(&c, &e, d)?;
        for ((t, y), n) in counts {
            morphism.add(&t, y, &BigInt::from(fd_sign(d) * n));
        }
        traces.extend(tr);
    }
    Ok(ContinuationResult { cylinder: c, shifts: (a, b), source, target, morphism, traces, failures: Vec::new() })
}

/// Runs the continuation with reseeding: a degenerate cylinder or decoration
/// moves on to the next attempt.
pub fn continuation_with(
    setup: &CylinderSetup,
    maxd: usize,
    max_retries: u64,
    build: impl Fn(&CylinderSetup, u64) -> Result<Cylinder, FlowError>,
) -> Result<ContinuationResult, FlowError> {
    if maxd == 0 {
        return Err(FlowError::Unsupported("maxd must be at least 1".into()));
    }
    base_critical(setup)?;
    let mut failures = Vec::new();
    for attempt in 0..=max_retries {
        let run = build(setup, attempt).and_then(|c| {
            continuation_on(c, seed_shift(setup.seed_a, attempt), seed_shift(setup.seed_b, attempt), maxd)
        });
        match run {
            Ok(mut r) => {
                r.failures = failures;
                return Ok(r);
            }
            Err(FlowError::Degenerate(msg)) => failures.push(format!("attempt {attempt}: {msg}")),
            Err(other) => return Err(other),
        }
    }
    Err(FlowError::Degenerate(format!("no admissible cylinder: {}", failures.join("; "))))
}

pub fn continuation(setup: &CylinderSetup, maxd: usize) -> Result<ContinuationResult, FlowError> {
    continuation_with(setup, maxd, 5, build_cylinder)
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub morphism: Report,
    pub quasi_isomorphism: bool,
    pub degrees_ok: bool,
    pub type_c_empty: bool,
    pub result: ContinuationResult,
}

impl ContinuationReport {
    pub fn ok(&self) -> bool {
        self.morphism.ok() && self.quasi_isomorphism && self.degrees_ok && self.type_c_empty
    }
}

/// Checks a computed continuation: morphism relations up to `maxd`, `f_1` a
/// quasi-isomorphism, `deg f_d = 1 - d`, and no tree meeting the rows.
pub fn check_continuation(result: ContinuationResult, maxd: usize) -> Result<ContinuationReport, FlowError> {
    let alg = |err: crate::ainfty::AlgebraError| FlowError::Unsupported(err.to_string());
    let morphism = verify_morphism(&result.morphism, maxd).map_err(alg)?;
    let quasi_isomorphism = is_quasi_isomorphism(&result.morphism).map_err(alg)?;
    let degrees_ok = result.morphism.check_degrees().is_ok();
    let type_c_empty = result.type_c_empty();
    Ok(ContinuationReport { morphism, quasi_isomorphism, degrees_ok, type_c_empty, result })
}

pub fn verify_continuation(setup: &CylinderSetup, maxd: usize) -> Result<ContinuationReport, FlowError> {
    check_continuation(continuation(setup, maxd)?, maxd)
}

/// Cylinder from an edited mesh; used to inject faults.
pub fn build_cylinder_edited(setup: &CylinderSetup, attempt: u64, edit: impl Fn(&mut MeshJson)) -> Result<Cylinder, FlowError> {
    let base = base_critical(setup)?;
    let mut mesh = row_torus(&base.names, &base.levels(), attempt);
    edit(&mut mesh);
    let surface = PLSurface::from_json(&mesh)?;
    let function = PLFunction::from_json(&surface, mesh.values.as_ref().expect("generated meshes carry values"))?;
    let (inputs, outputs) = census(&base, &surface, &function)?;
    Ok(Cylinder { base, surface, function, inputs, outputs, attempt })
}
