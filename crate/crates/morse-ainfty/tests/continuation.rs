use morse_ainfty::ainfty::*;
use morse_ainfty::continuation::*;
use morse_ainfty::plflow::{FlowError, Q};
use morse_ainfty::signs::{convention_convert_sign, Convention};
use num_bigint::BigInt;
use std::collections::BTreeMap;

fn q(n: i64) -> Q {
    Q::from_integer(n.into())
}

fn circle(values: &[i64], a: u64, b: u64) -> CylinderSetup {
    CylinderSetup { base: BaseKind::Circle, values: values.iter().map(|&v| q(v)).collect(), seed_a: a, seed_b: b }
}

fn ops(s: &AInftyStructure, d: usize) -> BTreeMap<(Vec<usize>, usize), BigInt> {
    let mut out = BTreeMap::new();
    if let Some(m) = s.ops.get(&d) {
        for (t, v) in m {
            for (y, c) in v {
                out.insert((t.clone(), *y), c.clone());
            }
        }
    }
    out
}

/// Morse data of the circle itself: minima at even positions, maxima at odd
/// ones, and `m_2` from basins moved by the horizontal shift `g`.
fn circle_oracle(k: usize, g: &Q) -> (BTreeMap<(Vec<usize>, usize), BigInt>, BTreeMap<(Vec<usize>, usize), BigInt>) {
    let one = BigInt::from(1);
    let mut m1 = BTreeMap::new();
    for x in (0..k).step_by(2) {
        m1.insert((vec![x], (x + 1) % k), one.clone());
        m1.insert((vec![x], (x + k - 1) % k), -one.clone());
    }
    // a maximum pushed by g lands in the basin of its neighbor on that side
    let ahead = |y: usize, dir: bool| if dir { (y + 1) % k } else { (y + k - 1) % k };
    let pos = *g > Q::default();
    let mut m2 = BTreeMap::new();
    for x in (0..k).step_by(2) {
        m2.insert((vec![x, x], x), one.clone());
    }
    for y in (1..k).step_by(2) {
        m2.insert((vec![ahead(y, pos), y], y), one.clone());
        m2.insert((vec![y, ahead(y, !pos)], y), one.clone());
    }
    (m1, m2)
}

fn negate_arity(m: &mut BTreeMap<usize, MultiMap>, d: usize) {
    if let Some(x) = m.get_mut(&d) {
        for v in x.values_mut() {
            for c in v.values_mut() {
                *c = -c.clone();
            }
        }
    }
}

fn to_lh(f: &AInftyMorphism) -> AInftyMorphism {
    let mut g = f.clone();
    g.source = convert_convention(&f.source);
    g.target = convert_convention(&f.target);
    for d in 1..=f.maxd {
        if convention_convert_sign(d) < 0 {
            negate_arity(&mut g.maps, d);
        }
    }
    g
}

fn bar_defects(f: &AInftyMorphism, maxd: usize) -> usize {
    let n = f.source.basis.len();
    (1..=maxd)
        .flat_map(|d| all_tuples(n, d))
        .filter(|w| {
            let x = word(w);
            let lhs = bar_differential(&f.target, &bar_morphism(f, &x));
            let rhs = bar_morphism(f, &bar_differential(&f.source, &x));
            lhs != rhs
        })
        .count()
}

#[test]
fn four_point_circle_through_arity_three() {
    let rep = verify_continuation(&circle(&[0, 3, 1, 2], 0, 1), 3).unwrap();
    assert!(rep.ok(), "{:?}", rep.morphism.violations);
    let r = &rep.result;
    assert!(r.shifts.0 < Q::default() && r.shifts.1 > Q::default());
    assert_eq!(ops(&r.source, 3).len(), 0);
    assert!(r.morphism.maps.get(&2).is_some_and(|m| !m.is_empty()));
    assert!(r.morphism.maps.get(&3).is_some_and(|m| !m.is_empty()));
    assert!(verify_structure(&r.source, 3).unwrap().ok());
    assert!(verify_structure(&r.target, 3).unwrap().ok());

    // coalgebra maps of the bar constructions commute with the differentials
    assert_eq!(bar_defects(&r.morphism, 3), 0);
    let mut wrong = r.morphism.clone();
    negate_arity(&mut wrong.maps, 3);
    assert!(bar_defects(&wrong, 3) > 0);
    assert!(!verify_morphism(&wrong, 3).unwrap().ok());

    let lh = to_lh(&r.morphism);
    assert_eq!(lh.source.convention, Convention::LH);
    assert!(verify_morphism(&lh, 3).unwrap().ok());
}

#[test]
fn endpoints_match_circle_oracle() {
    for (a, b) in [(0u64, 1u64), (4, 5)] {
        let r = continuation(&circle(&[0, 3, 1, 2], a, b), 2).unwrap();
        for (s, g) in [(&r.source, &r.shifts.0), (&r.target, &r.shifts.1)] {
            let (m1, m2) = circle_oracle(4, g);
            assert_eq!(ops(s, 1), m1);
            assert_eq!(ops(s, 2), m2, "shift {g}");
        }
    }
}

#[test]
fn six_point_circle_arity_two() {
    let rep = verify_continuation(&circle(&[0, 5, 2, 4, 1, 3], 2, 3), 2).unwrap();
    assert!(rep.ok(), "{:?}", rep.morphism.violations);
    assert_eq!(rep.result.source.basis.len(), 6);
    let (m1, m2) = circle_oracle(6, &rep.result.shifts.1);
    assert_eq!(ops(&rep.result.target, 1), m1);
    assert_eq!(ops(&rep.result.target, 2), m2);
}

#[test]
fn equal_seeds_give_identity() {
    let r = continuation(&circle(&[0, 3, 1, 2], 3, 3), 3).unwrap();
    assert_eq!(r.source, r.target);
    assert_eq!(r.morphism.maps, AInftyMorphism::identity(&r.source).maps);
}

#[test]
fn corrupted_f2_is_flagged() {
    let mut r = continuation(&circle(&[0, 3, 1, 2], 0, 1), 2).unwrap();
    let (t, y) = {
        let m = &r.morphism.maps[&2];
        let (t, v) = m.iter().next().unwrap();
        (t.clone(), *v.keys().next().unwrap())
    };
    r.morphism.add(&t, y, &BigInt::from(1));
    let rep = check_continuation(r, 2).unwrap();
    assert!(!rep.ok());
    assert!(rep.morphism.violations.iter().all(|v| v.arity == 2));
    assert!(!rep.morphism.violations.is_empty());
}

#[test]
fn interior_critical_vertex_triggers_retry() {
    let setup = circle(&[0, 3, 1, 2], 0, 1);
    let faulty = |s: &CylinderSetup, attempt: u64| {
        build_cylinder_edited(s, attempt, |m| {
            if attempt == 0 {
                let v = m.vertices.iter().find(|v| v.x == "1" && v.y == "1").unwrap().id;
                m.values.as_mut().unwrap().insert(v, "-10".into());
            }
        })
    };
    assert!(matches!(faulty(&setup, 0), Err(FlowError::Degenerate(_))));
    let r = continuation_with(&setup, 1, 3, faulty).unwrap();
    assert_eq!(r.attempt(), 1);
    assert_eq!(r.failures.len(), 1);
    assert!(r.failures[0].contains("interior"), "{:?}", r.failures);
    assert!(is_quasi_isomorphism(&r.morphism).unwrap());
}

#[test]
fn census_counts_row_copies() {
    for (vals, n) in [(vec![0, 1, 0, 1], 8), (vec![0, 3, 1, 2], 8), (vec![0, 5, 2, 4, 1, 3], 12)] {
        let c = build_cylinder(&circle(&vals, 0, 0), 0).unwrap();
        assert_eq!(c.inputs.len() + c.outputs.len(), n);
    }
    let two = build_cylinder(&circle(&[0, 1, 2], 0, 0), 0).unwrap();
    assert_eq!(two.inputs.len() + two.outputs.len(), 4);
}

#[test]
fn base_errors() {
    let mut s = circle(&[0, 1, 2], 0, 1);
    s.base = BaseKind::Interval;
    assert!(matches!(verify_continuation(&s, 2), Err(FlowError::Unsupported(_))));
    assert!(matches!(build_cylinder(&circle(&[0, 1], 0, 1), 0), Err(FlowError::Parse(_))));
    assert!(matches!(build_cylinder(&circle(&[0, 1, 1, 2], 0, 1), 0), Err(FlowError::Degenerate(_))));
}

#[test]
fn single_entries() {
    let setup = circle(&[0, 3, 1, 2], 0, 1);
    // degree mismatch
    assert_eq!(compute_fd(&setup, &[0], 1).unwrap(), 0);
    assert_eq!(compute_fd(&setup, &[0, 1], 0).unwrap(), 0);
    for x in 0..4 {
        for y in 0..4 {
            assert_eq!(compute_fd(&setup, &[x], y).unwrap(), i64::from(x == y));
        }
    }
}
