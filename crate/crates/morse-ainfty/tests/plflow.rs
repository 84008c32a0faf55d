mod common;

use morse_ainfty::ainfty::verify_structure;
use morse_ainfty::morse::{build_complex, check_d_squared, Variant};
use morse_ainfty::plflow::geom::q;
use morse_ainfty::plflow::sets::crossings;
use morse_ainfty::plflow::*;
use morse_ainfty::signs::{Convention, PrefactorStrategy};
use morse_ainfty::trees::{enumerate_generic, FukayaTree};
use num_bigint::BigInt;

fn load(m: &MeshJson) -> (PLSurface, PLFunction) {
    let s = PLSurface::from_json(m).unwrap();
    let f = PLFunction::from_json(&s, m.values.as_ref().unwrap()).unwrap();
    (s, f)
}

fn pt(x: Q, y: Q) -> Pt {
    Pt::new(x, y)
}

/// Morse pairing of the degree-one generators into the top generator.
fn morse_pairing(a: &Assembled) -> [[i64; 2]; 2] {
    let m = product_pairing(&a.structure);
    let g = |i: usize, j: usize| -> i64 { i64::try_from(&m[i][j]).unwrap() };
    [[g(0, 0), g(0, 1)], [g(1, 0), g(1, 1)]]
}

#[test]
fn separatrices_of_the_torus() {
    let (s, f) = load(&meshes::standard_torus());
    let e = Engine::new(s, f, decoration_generator(0, 0)).unwrap();
    assert_eq!(e.separatrices.len(), 2);
    for sep in e.separatrices.values() {
        assert_eq!(sep.stable_branches.len(), 2);
        assert_eq!(sep.unstable_branches.len(), 2);
        for b in &sep.stable_branches {
            assert_eq!(e.kind(b.terminal.0), Some(VertexKind::Max));
        }
        for b in &sep.unstable_branches {
            assert_eq!(e.kind(b.terminal.0), Some(VertexKind::Min));
        }
        let st = e.stable_set(sep.saddle).unwrap();
        assert_eq!(st.dimension, 1);
    }
}

#[test]
fn traces_end_at_minima_and_reject_regular_vertices() {
    let (s, f) = load(&meshes::standard_torus());
    let field = FlowField::build(&s, &f).unwrap();
    let t = field.trace(&s, &pt(q(1, 3), q(1, 7))).unwrap();
    assert_eq!(s.names[t.terminal.0], "min");
    let regular = (0..s.vertices.len()).find(|v| s.names[*v].starts_with('v')).unwrap();
    assert!(matches!(field.trace(&s, &s.vertices[regular].clone()), Err(FlowError::Degenerate(_))));
    let min = s.vertex_by_name("min").unwrap();
    assert_eq!(field.trace(&s, &s.vertices[min].clone()).unwrap().terminal.0, min);
}

#[test]
fn cup_product_matches_simplicial_oracle() {
    let (s, f) = load(&meshes::standard_torus());
    let c = q(1, 7);
    let d = common::cup_form(&s, &c);
    assert_eq!(d, [[0, 1], [-1, 0]]);
    let loops = [
        vec![pt(q(0, 1), q(1, 3)), pt(q(2, 1), q(1, 3)), pt(q(4, 1), q(1, 3))],
        vec![pt(q(1, 3), q(0, 1)), pt(q(1, 3), q(2, 1)), pt(q(1, 3), q(4, 1))],
    ];
    for seed in 0..3 {
        let a = assemble_structure(&s, &f, &AssembleOptions::new(seed, 2)).unwrap();
        let e = &a.engine;
        // evaluation of the saddle classes on the dual loops
        let saddles: Vec<usize> = basis_order(e).into_iter().filter(|v| e.kind(*v) == Some(VertexKind::Saddle)).collect();
        let mut ev = [[0i64; 2]; 2];
        for (i, sd) in saddles.iter().enumerate() {
            for (j, lp) in loops.iter().enumerate() {
                ev[i][j] = crossings(&s.lattice, lp, &e.separatrices[sd].stable).unwrap().iter().map(|h| h.1 as i64).sum();
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
        let m = morse_pairing(&a);
        assert_eq!(m, expected, "seed {seed}");
        assert_eq!((m[0][0] * m[1][1] - m[0][1] * m[1][0]).abs(), 1);
        assert!(is_unimodular_2x2(&product_pairing(&a.structure)));
    }
}

#[test]
fn relations_hold_through_arity_three() {
    for (mesh, seeds) in [(meshes::standard_torus(), 0..3u64), (meshes::double_torus_cover(), 0..1u64)] {
        let (s, f) = load(&mesh);
        for seed in seeds {
            let a = assemble_structure(&s, &f, &AssembleOptions::new(seed, 3)).unwrap();
            let r = verify_structure(&a.structure, 3).unwrap();
            assert!(r.ok(), "seed {seed}: {:?}", r.violations);
            assert!(check_d_squared(&build_complex(&a.complex, Variant::N).unwrap()));
        }
    }
}

#[test]
fn prefactor_selection_on_the_torus() {
    let (s, f) = load(&meshes::standard_torus());
    let a = assemble_structure(&s, &f, &AssembleOptions::new(4, 3)).unwrap();
    let ok = passing_strategies(&a.engine, &a.raw, 3, Convention::Keller);
    assert_eq!(ok, vec![PrefactorStrategy::Trivial]);
}

#[test]
fn geometric_complexes_match_simplicial_homology() {
    for mesh in [meshes::standard_torus(), meshes::double_torus_cover()] {
        let (s, f) = load(&mesh);
        let a = assemble_structure(&s, &f, &AssembleOptions::new(0, 1)).unwrap();
        let betti = build_complex(&a.complex, Variant::N).unwrap().betti().unwrap();
        assert_eq!(betti, common::surface_complex(&s).betti());
        assert_eq!(betti, vec![1, 2, 1]);
    }
}

#[test]
fn symmetric_mesh_is_cured_by_reseeding() {
    let (s, f) = load(&meshes::symmetric_torus());
    assert!(matches!(engine_for(&s, &f, 0, 0), Err(FlowError::Degenerate(_))));
    for seed in 0..3 {
        let a = assemble_structure(&s, &f, &AssembleOptions::new(seed, 3)).unwrap();
        assert!(a.attempt >= 1 && a.attempt <= 5);
        assert_eq!(a.failures.len(), a.attempt);
        assert!(verify_structure(&a.structure, 3).unwrap().ok());
    }
    let mut opts = AssembleOptions::new(0, 2);
    opts.max_retries = 0;
    assert!(matches!(assemble_structure(&s, &f, &opts), Err(FlowError::Degenerate(_))));
}

#[test]
fn reruns_are_identical() {
    let (s, f) = load(&meshes::standard_torus());
    let a = assemble_structure(&s, &f, &AssembleOptions::new(7, 3)).unwrap();
    let b = assemble_structure(&s, &f, &AssembleOptions::new(7, 3)).unwrap();
    assert_eq!(a.structure.to_json().to_string(), b.structure.to_json().to_string());
    assert_eq!(a.raw, b.raw);
}

#[test]
fn dimension_filter_forces_zero() {
    let (s, f) = load(&meshes::standard_torus());
    let e = engine_for(&s, &f, 0, 0).unwrap();
    let v = |n: &str| s.vertex_by_name(n).unwrap();
    let t = FukayaTree::parse("(1 2)").unwrap();
    let r = e.multi_intersection(&t, &[v("s1"), v("s2")], v("s1")).unwrap();
    assert_eq!(r.count, 0);
    assert!(r.trace.is_empty());
    let r = e.multi_intersection(&t, &[v("s1"), v("s2")], v("max")).unwrap();
    assert_eq!(r.count.abs(), 1);
    for t in enumerate_generic(3).unwrap() {
        let r = e.multi_intersection(&t, &[v("max"), v("max"), v("max")], v("min")).unwrap();
        assert_eq!(r.count, 0);
    }
}

#[test]
fn refinement_leaves_products_unchanged() {
    let coarse = meshes::standard_torus();
    let fine = meshes::barycentric(&coarse).unwrap();
    let (s0, f0) = load(&coarse);
    let (s1, f1) = load(&fine);
    assert_eq!(s1.triangles.len(), 6 * s0.triangles.len());
    let a = assemble_structure(&s0, &f0, &AssembleOptions::new(1, 2)).unwrap();
    let b = assemble_structure(&s1, &f1, &AssembleOptions::new(1, 2)).unwrap();
    assert_eq!(b.attempt, 0);
    assert_eq!(morse_pairing(&a), morse_pairing(&b));
    assert_eq!(a.raw, b.raw);
}

#[test]
fn perturbation_contract() {
    let (s, f) = load(&meshes::standard_torus());
    assert_eq!(perturb(&s, &f, 3, 0).unwrap(), f);
    let g = perturb(&s, &f, 3, 1).unwrap();
    assert_ne!(g, f);
    assert_eq!(classify(&s, &g).unwrap(), classify(&s, &f).unwrap());
    // an oversized ε is halved until the classification survives
    let h = perturb_with(&s, &f, 3, 2, q(400, 1), 20).unwrap();
    assert_eq!(classify(&s, &h).unwrap(), classify(&s, &f).unwrap());
    assert!(matches!(perturb_with(&s, &f, 3, 2, q(400, 1), 0), Err(FlowError::PerturbationFailed(_))));
    let _ = BigInt::from(0);
}
