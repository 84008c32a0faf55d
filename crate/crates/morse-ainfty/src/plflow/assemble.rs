//! Decorations, perturbations and assembly of the operations `m_d`.

use super::geom::{det, fmt_q, Pt, Q};
use super::sets::Engine;
use super::surface::{classify, PLFunction, PLSurface};
use super::FlowError;
use crate::ainfty::{all_tuples, AInftyStructure, Generator, GradedBasis};
use crate::morse::{build_complex, check_d_squared, Connection, CriticalPoint, Flavor, Locus, MorseComplexData, Variant};
use crate::signs::{md_prefactor, Convention, PrefactorStrategy};
use crate::trees::enumerate_generic;
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeMap;

fn rng_for(seed: u64, stream: u64, j: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r.set_word_pos(j as u128 * 64);
    r
}

/// Translation generating the decoration family of attempt `attempt`.
pub fn decoration_generator(seed: u64, attempt: u64) -> Pt {
    let mut r = rng_for(seed, 1, attempt);
    let a: i64 = r.gen_range(1..=20);
    let b: i64 = r.gen_range(1..=20);
    Pt::new(Q::new(a.into(), 101.into()), Q::new(b.into(), 103.into()))
}

fn min_gap(f: &PLFunction) -> Option<Q> {
    let mut v = f.values.clone();
    v.sort();
    v.dedup();
    v.windows(2).map(|w| &w[1] - &w[0]).min()
}

/// Seeded value perturbation of magnitude below `eps` times the smallest value
/// gap; `j = 0` is the identity.
pub fn perturb_with(s: &PLSurface, f: &PLFunction, seed: u64, j: u64, eps: Q, retries: usize) -> Result<PLFunction, FlowError> {
    if j == 0 {
        return Ok(f.clone());
    }
    let gap = min_gap(f).unwrap_or_else(|| Q::from_integer(1.into()));
    let reference = classify(s, f).ok();
    let mut eps = eps;
    for _ in 0..=retries {
        let mut r = rng_for(seed, 2, j);
        let unit = &eps * &gap / Q::from_integer(1001.into());
        let values = f
            .values
            .iter()
            .map(|v| v + &unit * Q::from_integer(r.gen_range(-1000i64..=1000).into()))
            .collect();
        let g = PLFunction { values };
        match (classify(s, &g), &reference) {
            (Ok(c), Some(r0)) if &c == r0 => return Ok(g),
            (Ok(_), None) => return Ok(g),
            _ => eps /= Q::from_integer(2.into()),
        }
    }
    Err(FlowError::PerturbationFailed(format!("classification changed for every ε down to {}", fmt_q(&eps))))
}

/// Default relative size of value perturbations.
pub fn default_epsilon() -> Q {
    Q::new(1.into(), 4.into())
}

pub fn perturb(s: &PLSurface, f: &PLFunction, seed: u64, j: u64) -> Result<PLFunction, FlowError> {
    perturb_with(s, f, seed, j, default_epsilon(), 8)
}

pub fn classify_critical_vertices(s: &PLSurface, f: &PLFunction) -> Result<Vec<CriticalPoint>, FlowError> {
    if !s.is_closed() {
        return Err(FlowError::Unsupported("boundary vertices are not classified".into()));
    }
    Ok(classify(s, f)?
        .into_iter()
        .map(|(v, k)| CriticalPoint { name: s.names[v].clone(), locus: Locus::Interior, flavor: Flavor::None, index: k.index() })
        .collect())
}

/// Critical vertices in basis order: by index, then name.
pub fn basis_order(e: &Engine) -> Vec<usize> {
    let mut v: Vec<usize> = e.critical.iter().map(|(v, _)| *v).collect();
    v.sort_by(|a, b| (e.kind(*a).map(|k| k.index()), e.name(*a)).cmp(&(e.kind(*b).map(|k| k.index()), e.name(*b))));
    v
}

/// `<m_1 x, y>` from the frontier of the stable sets.
pub fn geometric_m1(e: &Engine) -> BTreeMap<(usize, usize), i64> {
    let mut out: BTreeMap<(usize, usize), i64> = BTreeMap::new();
    for (s, sep) in &e.separatrices {
        for (br, dir) in sep.unstable_branches.iter().zip(&sep.out_dirs) {
            let sg = -super::geom::sign(&det(&sep.w, dir)) as i64;
            *out.entry((br.terminal.0, *s)).or_default() += sg;
        }
        for (i, br) in sep.stable_branches.iter().enumerate() {
            *out.entry((*s, br.terminal.0)).or_default() += if i == 1 { 1 } else { -1 };
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

pub fn complex_data(e: &Engine) -> MorseComplexData {
    let points = basis_order(e)
        .into_iter()
        .map(|v| CriticalPoint {
            name: e.name(v).to_string(),
            locus: Locus::Interior,
            flavor: Flavor::None,
            index: e.kind(v).unwrap().index(),
        })
        .collect();
    let connections = geometric_m1(e)
        .into_iter()
        .map(|((x, y), count)| Connection { from: e.name(y).to_string(), to: e.name(x).to_string(), count })
        .collect();
    MorseComplexData { n: 2, points, connections }
}

/// Sum over generic trees of the multi-intersection counts, keyed by
/// (inputs, output) in basis indices.
pub type RawCounts = BTreeMap<(Vec<usize>, usize), i64>;

pub fn raw_counts(e: &Engine, maxd: usize) -> Result<RawCounts, FlowError> {
    let order = basis_order(e);
    let deg: Vec<i64> = order.iter().map(|v| e.kind(*v).unwrap().index() as i64).collect();
    let n = order.len();
    let forests = (2..=maxd)
        .map(|d| enumerate_generic(d).map_err(|err| FlowError::Unsupported(err.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    let mut jobs = Vec::new();
    for (trees, d) in forests.iter().zip(2..) {
        for tuple in all_tuples(n, d) {
            let target = tuple.iter().map(|&i| deg[i]).sum::<i64>() + 2 - d as i64;
            for y in (0..n).filter(|&y| deg[y] == target) {
                for t in trees {
                    jobs.push((tuple.clone(), y, t));
                }
            }
        }
    }
    let results: Vec<Result<i64, FlowError>> = jobs
        .par_iter()
        .map(|(tuple, y, t)| {
            let entries: Vec<usize> = tuple.iter().map(|&i| order[i]).collect();
            e.multi_intersection(t, &entries, order[*y]).map(|r| r.count).map_err(|err| {
                let names: Vec<&str> = entries.iter().map(|&v| e.name(v)).collect();
                err.with_context(&format!("tree {} entries {:?} output {}", t.canonical(), names, e.name(order[*y])))
            })
        })
        .collect();
    let mut out = RawCounts::new();
    for ((tuple, y, _), r) in jobs.iter().zip(results) {
        *out.entry((tuple.clone(), *y)).or_default() += r?;
    }
    out.retain(|_, c| *c != 0);
    Ok(out)
}

pub fn build_structure(e: &Engine, raw: &RawCounts, maxd: usize, strategy: PrefactorStrategy, convention: Convention) -> AInftyStructure {
    let order = basis_order(e);
    let pos: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let gens = order
        .iter()
        .map(|v| Generator { name: e.name(*v).to_string(), degree: e.kind(*v).unwrap().index() as i64 })
        .collect();
    let mut s = AInftyStructure::new(GradedBasis::new(gens).expect("critical vertex names are distinct"), maxd, convention);
    for ((x, y), c) in geometric_m1(e) {
        s.add(&[pos[&x]], pos[&y], &BigInt::from(c));
    }
    for ((tuple, y), c) in raw {
        let degs: Vec<i64> = tuple.iter().map(|&i| s.basis.degree(i)).collect();
        s.add(tuple, *y, &BigInt::from(c * md_prefactor(&degs, strategy) as i64));
    }
    s
}

#[derive(Debug, Clone)]
pub struct AssembleOptions {
    pub seed: u64,
    pub maxd: usize,
    pub strategy: PrefactorStrategy,
    pub convention: Convention,
    pub max_retries: usize,
    pub epsilon: Q,
}

impl AssembleOptions {
    pub fn new(seed: u64, maxd: usize) -> Self {
        AssembleOptions {
            seed,
            maxd,
            strategy: PrefactorStrategy::Trivial,
            convention: Convention::Keller,
            max_retries: 5,
            epsilon: default_epsilon(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub structure: AInftyStructure,
    pub complex: MorseComplexData,
    pub raw: RawCounts,
    pub engine: Engine,
    /// Attempt that succeeded; 0 means no reseed was needed.
    pub attempt: usize,
    pub failures: Vec<String>,
}

/// Engine for attempt `attempt`: perturbed values and a fresh decoration.
pub fn engine_for(s: &PLSurface, f: &PLFunction, seed: u64, attempt: u64) -> Result<Engine, FlowError> {
    engine_with(s, f, seed, attempt, default_epsilon())
}

pub fn engine_with(s: &PLSurface, f: &PLFunction, seed: u64, attempt: u64, eps: Q) -> Result<Engine, FlowError> {
    let g = perturb_with(s, f, seed, attempt, eps, 8)?;
    Engine::new(s.clone(), g, decoration_generator(seed, attempt))
}

pub fn assemble_structure(s: &PLSurface, f: &PLFunction, opts: &AssembleOptions) -> Result<Assembled, FlowError> {
    if opts.maxd == 0 {
        return Err(FlowError::Unsupported("maxd must be at least 1".into()));
    }
    let mut failures = Vec::new();
    for attempt in 0..=opts.max_retries {
        let run = engine_with(s, f, opts.seed, attempt as u64, opts.epsilon.clone()).and_then(|e| {
            let raw = raw_counts(&e, opts.maxd)?;
            Ok((e, raw))
        });
        match run {
            Ok((engine, raw)) => {
                let structure = build_structure(&engine, &raw, opts.maxd, opts.strategy, opts.convention);
                let complex = complex_data(&engine);
                let ok = build_complex(&complex, Variant::N).map(|c| check_d_squared(&c)).unwrap_or(false);
                if !ok {
                    return Err(FlowError::Degenerate("geometric m_1 does not square to zero".into()));
                }
                return Ok(Assembled { structure, complex, raw, engine, attempt, failures });
            }
            Err(FlowError::Degenerate(msg)) => failures.push(msg),
            Err(other) => return Err(other),
        }
    }
    Err(FlowError::Degenerate(format!("no admissible decoration after {} attempts: {}", failures.len(), failures.join("; "))))
}

/// Strategies whose structure passes the relations, in declaration order.
pub fn passing_strategies(e: &Engine, raw: &RawCounts, maxd: usize, convention: Convention) -> Vec<PrefactorStrategy> {
    PrefactorStrategy::ALL
        .iter()
        .copied()
        .filter(|st| {
            let s = build_structure(e, raw, maxd, *st, convention);
            crate::ainfty::verify_structure(&s, maxd).map(|r| r.ok()).unwrap_or(false)
        })
        .collect()
}

/// `<m_2(a, b), w>` pairing matrix on the degree-one generators.
pub fn product_pairing(s: &AInftyStructure) -> Vec<Vec<BigInt>> {
    let ones = s.basis.in_degree(1);
    let twos = s.basis.in_degree(2);
    ones.iter()
        .map(|&a| {
            ones.iter()
                .map(|&b| {
                    let v = s.op(&[a, b]).unwrap_or_default();
                    twos.iter().map(|w| v.get(w).cloned().unwrap_or_else(BigInt::zero)).fold(BigInt::zero(), |x, y| x + y)
                })
                .collect()
        })
        .collect()
}

pub fn is_unimodular_2x2(m: &[Vec<BigInt>]) -> bool {
    m.len() == 2 && (&m[0][0] * &m[1][1] - &m[0][1] * &m[1][0]).abs() == BigInt::from(1)
}

