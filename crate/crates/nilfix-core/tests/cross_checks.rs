//! Cross-module consistency: the n-valued analysis, the twisted-conjugacy
//! formulas and the brute-force oracles must tell the same story.

use std::sync::Arc;

use num_bigint::BigUint;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use nilfix_core::linalg::{rat_frac, rat_int};
use nilfix_core::twisted::{oracle_nilpotent_over_bounds, setup_for_endomorphism};
use nilfix_core::{
    brute_force_reidemeister_z_k, count_matches_nielsen, oracle_abelian_classes,
    reidemeister_abelian, reidemeister_full, reidemeister_product, AffineLift, AffineNValuedMap,
    BasisIndex, Endomorphism, ExtendedCount, GroupPresentation, IntegerMatrix, LayerDatum,
    RationalMatrix,
};

fn heisenberg_power_endo(m: i64, n: i64) -> Endomorphism {
    let p = Arc::new(GroupPresentation::heisenberg());
    Endomorphism::new(
        p.clone(),
        vec![
            (BasisIndex::new(1, 1), p.element_from_i64(&[vec![m, 0], vec![0]]).unwrap()),
            (BasisIndex::new(1, 2), p.element_from_i64(&[vec![0, n], vec![0]]).unwrap()),
            (BasisIndex::new(2, 1), p.element_from_i64(&[vec![0, 0], vec![m * n]]).unwrap()),
        ],
    )
    .unwrap()
}

#[test]
fn rank_one_family_matches_both_oracles() {
    for d in 1i64..=3 {
        for m in 2i64..=4 {
            let n = d * m;
            let datum = LayerDatum::new(
                IntegerMatrix::from_i64_rows(&[vec![n]]).unwrap(),
                RationalMatrix::from_rows(vec![vec![rat_frac(1, m)]]).unwrap(),
            )
            .unwrap();
            let expected = BigUint::from((n - d) as u64);
            assert_eq!(reidemeister_abelian(&datum), ExtendedCount::Finite(expected.clone()));
            assert_eq!(oracle_abelian_classes(&datum).unwrap(), expected);
            assert_eq!(brute_force_reidemeister_z_k(datum.b(), datum.m()).unwrap(), expected);
        }
    }
}

#[test]
fn heisenberg_analysis_agrees_with_twisted_formulas_and_box_census() {
    for (m, n) in [(2i64, 3i64), (3, 2), (-1, 2), (2, -2)] {
        let phi = heisenberg_power_endo(m, n);
        if phi.has_eigenvalue_one() {
            continue;
        }
        let p = phi.presentation().clone();
        let map = AffineNValuedMap::new(vec![AffineLift {
            translation: p.identity(),
            linear_part: phi.clone(),
        }])
        .unwrap();
        let report = map.analyze().unwrap();
        let setup = setup_for_endomorphism(&phi).unwrap();
        let product = reidemeister_product(&setup);
        assert_eq!(report.reidemeister, product, "m={m} n={n}");
        assert_eq!(
            reidemeister_full(&BigUint::from(1u32), &setup).unwrap(),
            product,
            "m={m} n={n}"
        );
        let expected = ((1 - m) * (1 - n) * (1 - m * n)).unsigned_abs();
        assert_eq!(product, ExtendedCount::finite(expected), "m={m} n={n}");

        // box census, kept to the cheap bounds
        let counts = oracle_nilpotent_over_bounds(&phi, &[4, 5]).unwrap();
        if counts[0].1 == counts[1].1 {
            assert_eq!(counts[0].1 as u64, expected, "m={m} n={n} box census");
        }
    }
}

#[test]
fn random_two_valued_torus_maps_census_equals_algebra() {
    let p = Arc::new(GroupPresentation::abelian(2));
    let mut rng = StdRng::seed_from_u64(31);
    let mut done = 0;
    while done < 20 {
        let cols: Vec<Vec<i64>> =
            (0..2).map(|_| (0..2).map(|_| rng.gen_range(-2..=2)).collect()).collect();
        let phi = Endomorphism::new(
            p.clone(),
            vec![
                (BasisIndex::new(1, 1), p.element_from_i64(&[cols[0].clone()]).unwrap()),
                (BasisIndex::new(1, 2), p.element_from_i64(&[cols[1].clone()]).unwrap()),
            ],
        )
        .unwrap();
        if phi.has_eigenvalue_one() {
            continue;
        }
        let g1 = p
            .element(vec![vec![
                rat_frac(rng.gen_range(-3..=3), 3),
                rat_frac(rng.gen_range(-3..=3), 3),
            ]])
            .unwrap();
        let g2 = p.multiply(&g1, &p.element(vec![vec![rat_frac(1, 2), rat_int(0)]]).unwrap());
        let map = AffineNValuedMap::new(vec![
            AffineLift { translation: g1, linear_part: phi.clone() },
            AffineLift { translation: g2, linear_part: phi.clone() },
        ])
        .unwrap();
        if !map.validate_disjointness(50, 42).passed() {
            continue;
        }
        let cmp = count_matches_nielsen(&map).unwrap();
        assert!(cmp.matches, "census {} vs nielsen {}", cmp.fixed_points, cmp.nielsen);
        done += 1;
    }
}

#[test]
fn two_valued_torus_map_with_non_diagonal_fractional_part() {
    // M = [[0, 1/2], [1, 0]] with translations (0,0) and (1/2,0): the second
    // generator swaps the lifts, det(I - M) = 1/2, so R = N = 2 * 1/2 = 1
    // and the census finds the single point (0,0).
    let p = Arc::new(GroupPresentation::abelian(2));
    let phi = Endomorphism::new(
        p.clone(),
        vec![
            (BasisIndex::new(1, 1), p.element(vec![vec![rat_int(0), rat_int(1)]]).unwrap()),
            (BasisIndex::new(1, 2), p.element(vec![vec![rat_frac(1, 2), rat_int(0)]]).unwrap()),
        ],
    )
    .unwrap();
    let map = AffineNValuedMap::new(vec![
        AffineLift { translation: p.identity(), linear_part: phi.clone() },
        AffineLift {
            translation: p.element(vec![vec![rat_frac(1, 2), rat_int(0)]]).unwrap(),
            linear_part: phi,
        },
    ])
    .unwrap();
    assert!(map.validate_disjointness(100, 42).passed());
    let sigma = map.compute_sigma().unwrap();
    assert!(map.sigma_cocycle_check(&sigma, 50, 42).unwrap().passed());
    assert_eq!(map.sigma_orbits(&sigma), vec![vec![0, 1]]);

    let report = map.analyze().unwrap();
    assert_eq!(report.components[0].det_value, rat_frac(1, 2));
    assert_eq!(report.reidemeister, ExtendedCount::finite(1));
    assert_eq!(report.nielsen, BigUint::from(1u32));

    let points = nilfix_core::enumerate_fixed_points(&map, false).unwrap();
    assert_eq!(points.len(), 1);
    assert_eq!(points[0].coordinates, vec![rat_int(0), rat_int(0)]);
}

#[test]
fn two_valued_map_on_the_heisenberg_nilmanifold() {
    // Two lifts sharing the lattice-preserving linear part, the second
    // translated by the central element (0,0 | 1/2). Conjugation by a
    // central element is trivial, so sigma is trivial, both components are
    // essential and the counts double the single-valued case.
    let phi = heisenberg_power_endo(2, 3);
    let p = phi.presentation().clone();
    let center_half = p
        .element(vec![vec![rat_int(0), rat_int(0)], vec![rat_frac(1, 2)]])
        .unwrap();
    let map = AffineNValuedMap::new(vec![
        AffineLift { translation: p.identity(), linear_part: phi.clone() },
        AffineLift { translation: center_half, linear_part: phi },
    ])
    .unwrap();
    assert!(map.validate_disjointness(100, 42).passed());
    let sigma = map.compute_sigma().unwrap();
    assert!(map.sigma_cocycle_check(&sigma, 30, 42).unwrap().passed());
    assert_eq!(map.sigma_orbits(&sigma), vec![vec![0], vec![1]]);

    let report = map.analyze().unwrap();
    assert_eq!(report.reidemeister, ExtendedCount::finite(20));
    assert_eq!(report.nielsen, BigUint::from(20u32));
    for c in &report.components {
        assert_eq!(c.reidemeister, ExtendedCount::finite(10));
        assert_eq!(c.index_sign, -1);
    }
}

#[test]
fn explicit_law_presentation_runs_the_whole_pipeline() {
    let text = r#"{
        "group": {
            "class": 2,
            "ranks": [2, 1],
            "law": [{"layer": 2, "coordinate": 1,
                     "terms": [{"coeff": "1", "x": [[1, 1, 1]], "y": [[1, 2, 1]]}]}]
        },
        "lifts": [
            {"translation": [["0", "0"], ["0"]],
             "endomorphism": {"images": [
                {"basis": [1, 1], "value": [["2", "0"], ["0"]]},
                {"basis": [1, 2], "value": [["0", "3"], ["0"]]},
                {"basis": [2, 1], "value": [["0", "0"], ["6"]]}
             ]}}
        ]
    }"#;
    let map =
        nilfix_core::io::map_from_value(&nilfix_core::io::parse_json(text).unwrap()).unwrap();
    assert!(map.presentation().check_group_axioms(200, 42).passed());
    assert!(map.lifts()[0].linear_part.validate_homomorphism(200, 42).passed());
    let report = map.analyze().unwrap();
    assert_eq!(report.reidemeister, ExtendedCount::finite(10));
    assert_eq!(report.nielsen, BigUint::from(10u32));
}

#[test]
fn two_valued_circle_map_with_fractional_component_counts() {
    // lifts (0, 1/2) and (1/2, 1/2) swap under the generator: one component
    // of size 2 with det(I - M) = 1/2, so R = N = 1.
    let p = Arc::new(GroupPresentation::abelian(1));
    let phi = Endomorphism::new(
        p.clone(),
        vec![(BasisIndex::new(1, 1), p.element(vec![vec![rat_frac(1, 2)]]).unwrap())],
    )
    .unwrap();
    let map = AffineNValuedMap::new(vec![
        AffineLift { translation: p.identity(), linear_part: phi.clone() },
        AffineLift {
            translation: p.element(vec![vec![rat_frac(1, 2)]]).unwrap(),
            linear_part: phi,
        },
    ])
    .unwrap();
    let report = map.analyze().unwrap();
    assert_eq!(report.components.len(), 1);
    assert_eq!(report.components[0].orbit, vec![0, 1]);
    assert_eq!(report.components[0].det_value, rat_frac(1, 2));
    assert_eq!(report.reidemeister, ExtendedCount::finite(1));
    assert_eq!(report.nielsen, BigUint::from(1u32));

    let cmp = count_matches_nielsen(&map).unwrap();
    assert!(cmp.matches);
    assert_eq!(cmp.fixed_points, 1);
}
