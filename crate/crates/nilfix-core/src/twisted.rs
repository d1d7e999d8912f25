//! Generalized twisted conjugacy class counts for morphisms phi: H -> N on
//! finitely generated torsion-free nilpotent groups.
//!
//! The subgroup H enters through per-layer data only: an integer matrix B
//! whose columns span the layer-i sublattice of H inside Z^{k_i}, and a
//! rational matrix M describing the induced morphism on that layer. The
//! class count per layer is the lattice index of (I - M)B in Z^{k_i}, and
//! the total count is the product over the layers.

use std::collections::HashMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::endo::Endomorphism;
use crate::error::{Error, Result};
use crate::group::GroupElement;
use crate::linalg::{lattice_index, ExtendedCount, IntegerMatrix, RationalMatrix};
use crate::uf::UnionFind;

/// One layer of twisted-conjugacy data: the sublattice matrix B and the
/// induced morphism matrix M, with M*B integral and B nonsingular.
#[derive(Clone, Debug)]
pub struct LayerDatum {
    b: IntegerMatrix,
    m: RationalMatrix,
}

impl LayerDatum {
    pub fn new(b: IntegerMatrix, m: RationalMatrix) -> Result<Self> {
        if !b.is_square() || !m.is_square() || b.rows() != m.rows() {
            return Err(Error::InvalidLayerDatum(format!(
                "B is {}x{} and M is {}x{}; both must be square of equal size",
                b.rows(),
                b.cols(),
                m.rows(),
                m.cols()
            )));
        }
        if b.det()?.is_zero() {
            return Err(Error::InvalidLayerDatum("det(B) = 0".into()));
        }
        if !m.mul(&b.to_rational()).is_integral() {
            return Err(Error::InvalidLayerDatum("M*B has non-integer entries".into()));
        }
        Ok(LayerDatum { b, m })
    }

    pub fn rank(&self) -> usize {
        self.b.rows()
    }

    pub fn b(&self) -> &IntegerMatrix {
        &self.b
    }

    pub fn m(&self) -> &RationalMatrix {
        &self.m
    }

    /// (I - M) * B, integral because both B and MB are.
    pub fn twisted_lattice(&self) -> IntegerMatrix {
        self.m
            .i_minus()
            .mul(&self.b.to_rational())
            .to_integer()
            .expect("B - MB is integral by the layer invariant")
    }
}

/// Per-layer data for a full nilpotent twisted-conjugacy computation.
#[derive(Clone, Debug)]
pub struct TwistedSetup {
    layers: Vec<LayerDatum>,
}

impl TwistedSetup {
    pub fn new(layers: Vec<LayerDatum>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Dimension("twisted setup needs at least one layer".into()));
        }
        Ok(TwistedSetup { layers })
    }

    pub fn layers(&self) -> &[LayerDatum] {
        &self.layers
    }
}

/// Class count for one abelian layer: the index of (I - M)B Z^k in Z^k,
/// finite exactly when det(I - M) != 0.
pub fn reidemeister_abelian(d: &LayerDatum) -> ExtendedCount {
    lattice_index(&d.twisted_lattice()).expect("twisted lattice is square")
}

/// Product of the per-layer counts; infinity absorbs.
pub fn reidemeister_product(s: &TwistedSetup) -> ExtendedCount {
    let mut acc = ExtendedCount::finite(1);
    for layer in &s.layers {
        acc = acc * reidemeister_abelian(layer);
    }
    acc
}

/// True iff some layer has det(I - M_i) = 0, i.e. eigenvalue 1.
pub fn is_infinite(s: &TwistedSetup) -> bool {
    s.layers
        .iter()
        .any(|d| d.m.i_minus().det().expect("square").is_zero())
}

/// Count via the index form [N:H] * |det(I - M)|_inf with M the block
/// diagonal of the layer matrices. The given index must equal the product
/// of the per-layer lattice indices |det B_i|.
pub fn reidemeister_full(index_n_h: &BigUint, s: &TwistedSetup) -> Result<ExtendedCount> {
    let mut expected = BigUint::one();
    for layer in &s.layers {
        let d = layer.b.det()?.abs().to_biguint().expect("abs");
        expected *= d;
    }
    if &expected != index_n_h {
        return Err(Error::IndexMismatch {
            expected: expected.to_string(),
            given: index_n_h.to_string(),
        });
    }
    let mut det = crate::linalg::Rational::one();
    for layer in &s.layers {
        det *= layer.m.i_minus().det()?;
    }
    if det.is_zero() {
        return Ok(ExtendedCount::Infinite);
    }
    let scaled = det.abs() * crate::linalg::Rational::from_integer(BigInt::from(index_n_h.clone()));
    if !scaled.denom().is_one() {
        return Err(Error::NonIntegralCount(format!(
            "[N:H] * |det(I - M)| = {scaled} is not an integer"
        )));
    }
    Ok(ExtendedCount::Finite(scaled.numer().to_biguint().expect("non-negative")))
}

/// Brute-force class count for one abelian layer by enumerating a
/// fundamental box and merging along the lattice (I - M)B.
///
/// Since d * Z^k lies inside the lattice L = (I - M)B Z^k (d = |det L|),
/// the box [0, d)^k with wrap-around already contains every class, and
/// merging each cell with cell + column(L) mod d realizes exactly the
/// quotient Z^k / L.
pub fn oracle_abelian_classes(datum: &LayerDatum) -> Result<BigUint> {
    let k = datum.rank();
    if k > 3 {
        return Err(Error::GuardViolation(format!("abelian oracle limited to k <= 3, got {k}")));
    }
    let lat = datum.twisted_lattice();
    let det = lat.det()?;
    if det.is_zero() {
        return Err(Error::GuardViolation("abelian oracle requires det((I-M)B) != 0".into()));
    }
    let d = det
        .abs()
        .to_u64()
        .ok_or_else(|| Error::GuardViolation("determinant too large for enumeration".into()))?;
    let cells = d
        .checked_pow(k as u32)
        .filter(|&c| c <= 4_000_000)
        .ok_or_else(|| Error::GuardViolation("fundamental box too large to enumerate".into()))?;

    let mut uf = UnionFind::new(cells as usize);
    // columns of L reduced into [0, d)
    let cols: Vec<Vec<u64>> = (0..k)
        .map(|j| {
            lat.column(j)
                .iter()
                .map(|v| v.mod_floor_u64(d))
                .collect()
        })
        .collect();
    let mut coords = vec![0u64; k];
    for cell in 0..cells {
        let mut c = cell;
        for slot in coords.iter_mut() {
            *slot = c % d;
            c /= d;
        }
        for col in &cols {
            let mut neighbor = 0u64;
            let mut stride = 1u64;
            for (slot, step) in coords.iter().zip(col) {
                neighbor += ((slot + step) % d) * stride;
                stride *= d;
            }
            uf.union(cell as usize, neighbor as usize);
        }
    }
    let mut roots = std::collections::BTreeSet::new();
    for cell in 0..cells as usize {
        roots.insert(uf.find(cell));
    }
    Ok(BigUint::from(roots.len()))
}

trait ModFloorU64 {
    fn mod_floor_u64(&self, d: u64) -> u64;
}

impl ModFloorU64 for BigInt {
    fn mod_floor_u64(&self, d: u64) -> u64 {
        use num_integer::Integer;
        self.mod_floor(&BigInt::from(d)).to_u64().expect("reduced value fits")
    }
}

/// Per-box class count of the twisted conjugacy relation a ~ g a phi(g)^-1
/// with H = N, by union-find over the lattice points of a coordinate box.
///
/// Points with coordinates in [-box_bound, box_bound] are merged along
/// generator moves whenever the move stays inside the box; the returned
/// count is the number of classes meeting the smaller core box with
/// coordinates bounded by box_bound - 2. Classes are infinite sets, so a
/// box census is evidence: callers should watch the count stabilize over
/// increasing bounds.
pub fn oracle_nilpotent_classes(phi: &Endomorphism, box_bound: i64) -> Result<usize> {
    let p = phi.presentation().clone();
    if p.class() > 2 {
        return Err(Error::GuardViolation(format!(
            "nilpotent oracle limited to class <= 2, got {}",
            p.class()
        )));
    }
    if !(2..=6).contains(&box_bound) {
        return Err(Error::GuardViolation(format!(
            "box bound must be in 2..=6, got {box_bound}"
        )));
    }
    if phi.has_eigenvalue_one() {
        return Err(Error::GuardViolation(
            "nilpotent oracle requires det(I - M_i) != 0 for every layer".into(),
        ));
    }
    if phi.images().iter().any(|img| !img.is_lattice()) {
        return Err(Error::GuardViolation(
            "nilpotent oracle requires a lattice-preserving endomorphism".into(),
        ));
    }

    let dim = p.dimension();
    let width = (2 * box_bound + 1) as usize;
    let cells = width
        .checked_pow(dim as u32)
        .filter(|&c| c <= 6_000_000)
        .ok_or_else(|| Error::GuardViolation("coordinate box too large".into()))?;

    let index_of = |coords: &[i64]| -> Option<usize> {
        let mut idx = 0usize;
        for &c in coords.iter().rev() {
            if c.abs() > box_bound {
                return None;
            }
            idx = idx * width + (c + box_bound) as usize;
        }
        Some(idx)
    };
    let coords_of = |mut idx: usize| -> Vec<i64> {
        let mut out = Vec::with_capacity(dim);
        for _ in 0..dim {
            out.push((idx % width) as i64 - box_bound);
            idx /= width;
        }
        out
    };
    let to_element = |coords: &[i64]| -> GroupElement {
        let flat: Vec<BigInt> = coords.iter().map(|&c| BigInt::from(c)).collect();
        p.element_from_flat(&flat).expect("box coordinates conform")
    };
    let flat_i64 = |g: &GroupElement| -> Option<Vec<i64>> {
        g.lattice_coordinates()?.iter().map(|v| v.to_i64()).collect()
    };

    // generator moves a -> g a phi(g)^-1 for g in the basis and inverses
    let mut moves = Vec::new();
    for idx in p.basis_indices() {
        let gen = p.basis_element(idx);
        let gen_inv = p.inverse(&gen);
        let phi_gen = phi.evaluate_lattice(&gen)?;
        moves.push((gen.clone(), p.inverse(&phi_gen)));
        moves.push((gen_inv, phi_gen));
    }

    let mut uf = UnionFind::new(cells);
    for cell in 0..cells {
        let alpha = to_element(&coords_of(cell));
        for (g, phi_g_inv) in &moves {
            let image = p.multiply(&p.multiply(g, &alpha), phi_g_inv);
            if let Some(coords) = flat_i64(&image) {
                if let Some(target) = index_of(&coords) {
                    uf.union(cell, target);
                }
            }
        }
    }

    let core = box_bound - 2;
    let mut roots = std::collections::BTreeSet::new();
    let mut core_cells = vec![vec![0i64; dim]];
    for axis in 0..dim {
        let mut next = Vec::new();
        for partial in core_cells {
            for v in -core..=core {
                let mut c = partial.clone();
                c[axis] = v;
                next.push(c);
            }
        }
        core_cells = next;
    }
    for coords in core_cells {
        let idx = index_of(&coords).expect("core box lies inside the box");
        roots.insert(uf.find(idx));
    }
    Ok(roots.len())
}

/// Convenience: the twisted setup of an endomorphism with H = N
/// (every B_i the identity, M_i the layer matrices).
pub fn setup_for_endomorphism(phi: &Endomorphism) -> Result<TwistedSetup> {
    let layers = phi
        .layer_matrices()
        .0
        .into_iter()
        .map(|m| LayerDatum::new(IntegerMatrix::identity(m.rows()), m))
        .collect::<Result<Vec<_>>>()?;
    TwistedSetup::new(layers)
}

/// Runs the box oracle over several bounds, reusing repeated bounds.
pub fn oracle_nilpotent_over_bounds(
    phi: &Endomorphism,
    bounds: &[i64],
) -> Result<Vec<(i64, usize)>> {
    let mut out = Vec::with_capacity(bounds.len());
    let mut memo: HashMap<i64, usize> = HashMap::new();
    for &b in bounds {
        let count = match memo.get(&b) {
            Some(&c) => c,
            None => {
                let c = oracle_nilpotent_classes(phi, b)?;
                memo.insert(b, c);
                c
            }
        };
        out.push((b, count));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{BasisIndex, GroupPresentation};
    use crate::linalg::{rat_frac, rat_int, Rational};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::sync::Arc;

    fn layer_1x1(b: i64, m: Rational) -> LayerDatum {
        LayerDatum::new(
            IntegerMatrix::from_i64_rows(&[vec![b]]).unwrap(),
            RationalMatrix::from_rows(vec![vec![m]]).unwrap(),
        )
        .unwrap()
    }

    fn heis_setup() -> TwistedSetup {
        TwistedSetup::new(vec![
            LayerDatum::new(
                IntegerMatrix::identity(2),
                RationalMatrix::from_rows(vec![
                    vec![rat_int(2), rat_int(0)],
                    vec![rat_int(0), rat_int(3)],
                ])
                .unwrap(),
            )
            .unwrap(),
            LayerDatum::new(
                IntegerMatrix::identity(1),
                RationalMatrix::from_rows(vec![vec![rat_int(6)]]).unwrap(),
            )
            .unwrap(),
        ])
        .unwrap()
    }

    #[test]
    fn abelian_count_of_z_example() {
        // H = 6Z inside Z, phi(z) = z/2: three classes.
        assert_eq!(reidemeister_abelian(&layer_1x1(6, rat_frac(1, 2))), ExtendedCount::finite(3));
        // identity morphism on a finite index subgroup: infinitely many.
        assert_eq!(reidemeister_abelian(&layer_1x1(6, rat_int(1))), ExtendedCount::Infinite);
        // full lattice, zero morphism: a single class.
        assert_eq!(
            reidemeister_abelian(
                &LayerDatum::new(
                    IntegerMatrix::identity(2),
                    RationalMatrix::from_rows(vec![
                        vec![rat_int(0), rat_int(0)],
                        vec![rat_int(0), rat_int(0)],
                    ])
                    .unwrap()
                )
                .unwrap()
            ),
            ExtendedCount::finite(1)
        );
    }

    #[test]
    fn layer_invariants_are_enforced() {
        assert!(matches!(
            LayerDatum::new(
                IntegerMatrix::from_i64_rows(&[vec![0]]).unwrap(),
                RationalMatrix::from_rows(vec![vec![rat_int(1)]]).unwrap()
            ),
            Err(Error::InvalidLayerDatum(_))
        ));
        // M = 1/2 with B = 1: MB is not integral.
        assert!(matches!(
            LayerDatum::new(
                IntegerMatrix::identity(1),
                RationalMatrix::from_rows(vec![vec![rat_frac(1, 2)]]).unwrap()
            ),
            Err(Error::InvalidLayerDatum(_))
        ));
    }

    #[test]
    fn product_over_layers() {
        assert_eq!(reidemeister_product(&heis_setup()), ExtendedCount::finite(10));
        let with_eigenvalue_one = TwistedSetup::new(vec![
            layer_1x1(6, rat_frac(1, 2)),
            layer_1x1(1, rat_int(1)),
        ])
        .unwrap();
        assert_eq!(reidemeister_product(&with_eigenvalue_one), ExtendedCount::Infinite);
        let single = TwistedSetup::new(vec![layer_1x1(6, rat_frac(1, 2))]).unwrap();
        assert_eq!(
            reidemeister_product(&single),
            reidemeister_abelian(&layer_1x1(6, rat_frac(1, 2)))
        );
    }

    #[test]
    fn full_formula_agrees_with_product() {
        let single = TwistedSetup::new(vec![layer_1x1(6, rat_frac(1, 2))]).unwrap();
        assert_eq!(
            reidemeister_full(&BigUint::from(6u32), &single).unwrap(),
            ExtendedCount::finite(3)
        );
        assert_eq!(
            reidemeister_full(&BigUint::from(1u32), &heis_setup()).unwrap(),
            ExtendedCount::finite(10)
        );
        let identity_blocks = TwistedSetup::new(vec![layer_1x1(1, rat_int(1))]).unwrap();
        assert_eq!(
            reidemeister_full(&BigUint::from(1u32), &identity_blocks).unwrap(),
            ExtendedCount::Infinite
        );
        assert!(matches!(
            reidemeister_full(&BigUint::from(5u32), &single),
            Err(Error::IndexMismatch { .. })
        ));
    }

    #[test]
    fn infinite_detection_matches_formulas() {
        let cases = vec![
            TwistedSetup::new(vec![layer_1x1(6, rat_frac(1, 2))]).unwrap(),
            TwistedSetup::new(vec![layer_1x1(3, rat_int(1))]).unwrap(),
            heis_setup(),
        ];
        for s in cases {
            assert_eq!(is_infinite(&s), reidemeister_product(&s).is_infinite());
        }
    }

    #[test]
    fn abelian_oracle_examples() {
        assert_eq!(oracle_abelian_classes(&layer_1x1(6, rat_frac(1, 2))).unwrap(), BigUint::from(3u32));
        let full = LayerDatum::new(
            IntegerMatrix::identity(2),
            RationalMatrix::from_rows(vec![
                vec![rat_int(0), rat_int(0)],
                vec![rat_int(0), rat_int(0)],
            ])
            .unwrap(),
        )
        .unwrap();
        assert_eq!(oracle_abelian_classes(&full).unwrap(), BigUint::from(1u32));
    }

    #[test]
    fn abelian_oracle_guards() {
        let singular = layer_1x1(6, rat_int(1));
        assert!(matches!(oracle_abelian_classes(&singular), Err(Error::GuardViolation(_))));
    }

    /// Random admissible layer data: B nonsingular, M = T B^-1 with T integral,
    /// det(I - M) != 0.
    fn random_layer(rng: &mut StdRng, k: usize) -> LayerDatum {
        loop {
            let b_rows: Vec<Vec<i64>> =
                (0..k).map(|_| (0..k).map(|_| rng.gen_range(-2..=2)).collect()).collect();
            let b = IntegerMatrix::from_i64_rows(&b_rows).unwrap();
            if b.det().unwrap().is_zero() {
                continue;
            }
            let t_rows: Vec<Vec<i64>> =
                (0..k).map(|_| (0..k).map(|_| rng.gen_range(-2..=2)).collect()).collect();
            let t = IntegerMatrix::from_i64_rows(&t_rows).unwrap();
            let b_inv = b.to_rational().inverse().unwrap().unwrap();
            let m = t.to_rational().mul(&b_inv);
            if m.i_minus().det().unwrap().is_zero() {
                continue;
            }
            return LayerDatum::new(b, m).unwrap();
        }
    }

    #[test]
    fn oracle_agrees_with_formula_on_random_data() {
        let mut rng = StdRng::seed_from_u64(2024);
        for i in 0..50 {
            let k = if i % 2 == 0 { 1 } else { 2 };
            let datum = random_layer(&mut rng, k);
            let formula = reidemeister_abelian(&datum);
            let oracle = oracle_abelian_classes(&datum).unwrap();
            assert_eq!(formula, ExtendedCount::Finite(oracle), "layer {i}");
        }
    }

    fn heis_phi() -> Endomorphism {
        let p = Arc::new(GroupPresentation::heisenberg());
        Endomorphism::new(
            p.clone(),
            vec![
                (BasisIndex::new(1, 1), p.element_from_i64(&[vec![2, 0], vec![0]]).unwrap()),
                (BasisIndex::new(1, 2), p.element_from_i64(&[vec![0, 3], vec![0]]).unwrap()),
                (BasisIndex::new(2, 1), p.element_from_i64(&[vec![0, 0], vec![6]]).unwrap()),
            ],
        )
        .unwrap()
    }

    #[test]
    fn nilpotent_oracle_on_multiplication_by_three() {
        let p = Arc::new(GroupPresentation::abelian(1));
        let phi = Endomorphism::new(
            p.clone(),
            vec![(BasisIndex::new(1, 1), p.element_from_i64(&[vec![3]]).unwrap())],
        )
        .unwrap();
        for bound in [4, 5, 6] {
            assert_eq!(oracle_nilpotent_classes(&phi, bound).unwrap(), 2);
        }
    }

    #[test]
    fn nilpotent_oracle_on_doubling_torus_map() {
        let p = Arc::new(GroupPresentation::abelian(2));
        let phi = Endomorphism::new(
            p.clone(),
            vec![
                (BasisIndex::new(1, 1), p.element_from_i64(&[vec![2, 0]]).unwrap()),
                (BasisIndex::new(1, 2), p.element_from_i64(&[vec![0, 2]]).unwrap()),
            ],
        )
        .unwrap();
        // |det(I - 2I)| = 1: a single class.
        assert_eq!(oracle_nilpotent_classes(&phi, 5).unwrap(), 1);
    }

    #[test]
    fn nilpotent_oracle_stabilizes_on_heisenberg() {
        let phi = heis_phi();
        let counts = oracle_nilpotent_over_bounds(&phi, &[4, 5, 6]).unwrap();
        assert_eq!(counts, vec![(4, 10), (5, 10), (6, 10)]);
    }

    #[test]
    fn nilpotent_oracle_counts_are_monotone_after_stabilization() {
        // Below the stabilization point the core box can still reveal new
        // classes, so monotonicity is only claimed from there on.
        let phi = heis_phi();
        let counts: Vec<usize> = oracle_nilpotent_over_bounds(&phi, &[4, 5, 6])
            .unwrap()
            .into_iter()
            .map(|(_, c)| c)
            .collect();
        for w in counts.windows(2) {
            assert!(w[0] >= w[1], "per-box counts must not increase: {counts:?}");
        }
    }

    #[test]
    fn nilpotent_oracle_guards() {
        let phi = heis_phi();
        assert!(matches!(
            oracle_nilpotent_classes(&phi, 9),
            Err(Error::GuardViolation(_))
        ));
        let p = Arc::new(GroupPresentation::abelian(1));
        let id = Endomorphism::identity(p);
        assert!(matches!(
            oracle_nilpotent_classes(&id, 4),
            Err(Error::GuardViolation(_))
        ));
    }

    #[test]
    fn setup_for_endomorphism_matches_closed_form() {
        let phi = heis_phi();
        let setup = setup_for_endomorphism(&phi).unwrap();
        assert_eq!(reidemeister_product(&setup), ExtendedCount::finite(10));
        assert_eq!(
            reidemeister_full(&BigUint::one(), &setup).unwrap(),
            ExtendedCount::finite(10)
        );
    }
}
