//! One line per acceptance criterion, printed whether or not the test captures
//! output.

mod common;

use morse_ainfty::ainfty::*;
use morse_ainfty::continuation::*;
use morse_ainfty::morse::{build_complex, check_d_squared, MorseComplexData, Variant};
use morse_ainfty::plflow::geom::q;
use morse_ainfty::plflow::sets::crossings;
use morse_ainfty::plflow::*;
use morse_ainfty::signs::Convention;
use morse_ainfty::trees::enumerate_generic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Write;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn load(m: &MeshJson) -> (PLSurface, PLFunction) {
    let s = PLSurface::from_json(m).unwrap();
    let f = PLFunction::from_json(&s, m.values.as_ref().unwrap()).unwrap();
    (s, f)
}

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

fn circle(a: u64, b: u64) -> CylinderSetup {
    CylinderSetup { base: BaseKind::Circle, values: [0, 3, 1, 2].iter().map(|&v| q(v, 1)).collect(), seed_a: a, seed_b: b }
}

/// Catalan numbers by the convolution recurrence.
fn catalan_rec(n: usize) -> usize {
    let mut c = vec![1usize];
    for k in 1..=n {
        c.push((0..k).map(|i| c[i] * c[k - 1 - i]).sum());
    }
    c[n]
}

fn tree_census() -> Outcome {
    let want = [1usize, 2, 5, 14, 42, 132, 429];
    let mut got = vec![];
    for d in 2..=8 {
        let n = enumerate_generic(d).map_err(err)?.len();
        check(n == want[d - 2] && n == catalan_rec(d - 1), format!("d = {d}: {n} trees"))?;
        got.push(n);
    }
    Ok(format!("{got:?}"))
}

fn complexes() -> Outcome {
    let mut seen = vec![];
    for (name, variant, oracle) in common::complex_oracles() {
        let data: MorseComplexData = serde_json::from_str(&common::data(name)).map_err(err)?;
        let c = build_complex(&data, variant).map_err(err)?;
        check(check_d_squared(&c), format!("{name}: m_1^2 != 0"))?;
        let b = c.betti().map_err(err)?;
        check(b == oracle.betti(), format!("{name}: {b:?} vs {:?}", oracle.betti()))?;
        seen.push(format!("{name} {b:?}"));
    }
    let m: MeshJson = serde_json::from_str(&common::data("torus.json")).map_err(err)?;
    let (s, f) = load(&m);
    let a = assemble_structure(&s, &f, &AssembleOptions::new(0, 1)).map_err(err)?;
    let c = build_complex(&a.complex, Variant::N).map_err(err)?;
    let b = c.betti().map_err(err)?;
    check(check_d_squared(&c) && b == common::surface_complex(&s).betti(), format!("torus: {b:?}"))?;
    seen.push(format!("torus.json {b:?}"));
    Ok(seen.join(", "))
}

fn cup_product() -> Outcome {
    let (s, f) = load(&meshes::standard_torus());
    let d = common::cup_form(&s, &q(1, 7));
    let loops = [
        vec![Pt::new(q(0, 1), q(1, 3)), Pt::new(q(2, 1), q(1, 3)), Pt::new(q(4, 1), q(1, 3))],
        vec![Pt::new(q(1, 3), q(0, 1)), Pt::new(q(1, 3), q(2, 1)), Pt::new(q(1, 3), q(4, 1))],
    ];
    let a = assemble_structure(&s, &f, &AssembleOptions::new(0, 2)).map_err(err)?;
    let e = &a.engine;
    let saddles: Vec<usize> = basis_order(e).into_iter().filter(|v| e.kind(*v) == Some(VertexKind::Saddle)).collect();
    let mut ev = [[0i64; 2]; 2];
    for (i, sd) in saddles.iter().enumerate() {
        for (j, lp) in loops.iter().enumerate() {
            ev[i][j] = crossings(&s.lattice, lp, &e.separatrices[sd].stable).map_err(err)?.iter().map(|h| h.1 as i64).sum();
        }
    }
    let mut expected = [[0i64; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            for p in 0..2 {
                for r in 0..2 {
                    expected[i][j] += ev[i][p] * d[p][r] * ev[j][r];
                }
            }
        }
    }
    let m = product_pairing(&a.structure);
    let got: Vec<Vec<i64>> = m.iter().map(|r| r.iter().map(|c| i64::try_from(c).unwrap()).collect()).collect();
    check(got == expected.map(|r| r.to_vec()).to_vec(), format!("pairing {got:?}, cup {expected:?}"))?;
    check(is_unimodular_2x2(&m), "pairing not unimodular")?;
    Ok(format!("pairing {got:?}"))
}

fn relations() -> Outcome {
    let (s, f) = load(&meshes::standard_torus());
    let mut checked = 0;
    for seed in 0..3 {
        let a = assemble_structure(&s, &f, &AssembleOptions::new(seed, 3)).map_err(err)?;
        let r = verify_structure(&a.structure, 3).map_err(err)?;
        check(r.ok(), format!("seed {seed}: {} violations", r.violations.len()))?;
        checked += r.checked;
    }
    Ok(format!("3 seeds, {checked} tuples"))
}

fn conventions() -> Outcome {
    let mut pool = vec![];
    let (s, f) = load(&meshes::standard_torus());
    for seed in 0..3 {
        pool.push(assemble_structure(&s, &f, &AssembleOptions::new(seed, 3)).map_err(err)?.structure);
    }
    let (s, f) = load(&meshes::double_torus_cover());
    pool.push(assemble_structure(&s, &f, &AssembleOptions::new(0, 3)).map_err(err)?.structure);
    let r = continuation(&circle(0, 1), 3).map_err(err)?;
    pool.push(r.source);
    pool.push(r.target);
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for i in 0..100 {
        let base = &pool[i % pool.len()];
        let s = common::flip_basis(base, rng.gen());
        let t = convert_convention(&s);
        check(t.convention == Convention::LH, "conversion kept the tag")?;
        let r = verify_structure(&t, 3).map_err(err)?;
        check(r.ok(), format!("structure {i}: {} violations after conversion", r.violations.len()))?;
        check(convert_convention(&t) == s, format!("structure {i}: round trip differs"))?;
    }
    Ok(format!("100 structures from {} geometric ones", pool.len()))
}

fn continuation_map() -> Outcome {
    let rep = verify_continuation(&circle(0, 1), 2).map_err(err)?;
    check(rep.morphism.ok(), format!("{} morphism violations", rep.morphism.violations.len()))?;
    check(rep.quasi_isomorphism, "f_1 is not a quasi-isomorphism")?;
    check(rep.degrees_ok, "f_d of the wrong degree")?;
    let same = continuation(&circle(3, 3), 2).map_err(err)?;
    check(same.morphism.maps == AInftyMorphism::identity(&same.source).maps, "equal seeds: not the identity")?;
    Ok(format!("{} relations checked, equal seeds give the identity", rep.morphism.checked))
}

fn determinism() -> Outcome {
    let (s, f) = load(&meshes::standard_torus());
    let run = || assemble_structure(&s, &f, &AssembleOptions::new(5, 3)).map(|a| a.structure.to_json().to_string());
    check(run().map_err(err)? == run().map_err(err)?, "assembled structures differ")?;
    let (s, f) = load(&meshes::symmetric_torus());
    let run = || assemble_structure(&s, &f, &AssembleOptions::new(1, 2)).map(|a| (a.attempt, a.structure.to_json().to_string()));
    check(run().map_err(err)? == run().map_err(err)?, "reseeded structures differ")?;
    let cont = || continuation(&circle(0, 1), 2).map(|r| format!("{:?}", (r.shifts, r.morphism, r.traces)));
    check(cont().map_err(err)? == cont().map_err(err)?, "continuation runs differ")?;
    Ok("structures, reseeded structures and continuation maps repeat exactly".into())
}

fn degeneracy() -> Outcome {
    let (s, f) = load(&meshes::symmetric_torus());
    check(matches!(engine_for(&s, &f, 0, 0), Err(FlowError::Degenerate(_))), "no degeneracy detected")?;
    let a = assemble_structure(&s, &f, &AssembleOptions::new(0, 3)).map_err(err)?;
    check((1..=5).contains(&a.attempt), format!("attempt {}", a.attempt))?;
    check(verify_structure(&a.structure, 3).map_err(err)?.ok(), "reseeded structure fails the relations")?;
    Ok(format!("recovered at attempt {}", a.attempt))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome, Duration); 8] = [
        ("tree census", tree_census, Duration::from_secs(1)),
        ("complex validity", complexes, Duration::from_secs(10)),
        ("product correctness", cup_product, Duration::from_secs(60)),
        ("A-infinity relations", relations, Duration::from_secs(30 * 60)),
        ("convention equivalence", conventions, Duration::from_secs(30 * 60)),
        ("continuation", continuation_map, Duration::from_secs(5 * 60)),
        ("determinism", determinism, Duration::from_secs(30 * 60)),
        ("degeneracy robustness", degeneracy, Duration::from_secs(30 * 60)),
    ];
    let mut failed = vec![];
    let mut out = std::io::stdout().lock();
    for (i, (name, f, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let r = f();
        let el = t.elapsed();
        let r = match r {
            Ok(m) if el > *limit => Err(format!("{m}; took {el:.2?}, limit {limit:?}")),
            r => r,
        };
        let line = match &r {
            Ok(m) => format!("criterion {} {name}: PASS ({el:.2?}) {m}", i + 1),
            Err(m) => format!("criterion {} {name}: FAIL ({el:.2?}) {m}", i + 1),
        };
        writeln!(out, "{line}").unwrap();
        if r.is_err() {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
