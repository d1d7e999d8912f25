//! Geometric verification on tori: enumerate the actual fixed points of an
//! affine n-valued map on an abelian presentation and compare against the
//! algebraic counts. Everything is exact rational arithmetic.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::linalg::{smith_normal_form, IntegerMatrix, Rational, RationalMatrix};
use crate::nvalued::AffineNValuedMap;
use crate::uf::UnionFind;

/// A fixed point of one lift on the torus. `coordinates` is the reduced
/// representative in [0,1)^k; `witness` is the lattice shift z selecting the
/// concrete deck translate: the unreduced solution x = (I-M)^-1 (g + z)
/// satisfies (I-M) x = g + z exactly and reduces to `coordinates` mod Z^k.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorusFixedPoint {
    pub coordinates: Vec<Rational>,
    /// 1-based index of the lift whose congruence produced the point.
    pub lift_index: usize,
    pub witness: Vec<BigInt>,
}

fn fractional_part(r: &Rational) -> Rational {
    r - Rational::from_integer(r.floor().to_integer())
}

/// Sublattice {w in Z^k : M w in Z^k}, returned as a basis matrix.
///
/// With q the common denominator and P = qM integral, the condition reads
/// P w = 0 mod q. Diagonalizing P = U^-1 D V^-1 turns it into d_i u_i = 0
/// mod q for u = V^-1 w, so u_i must be a multiple of q / gcd(d_i, q) and
/// V * diag(q / gcd(d_i, q)) is a basis.
fn integrality_sublattice(m: &RationalMatrix) -> Result<IntegerMatrix> {
    let k = m.rows();
    let mut q = BigInt::one();
    for e in m.entries() {
        q = q.lcm(e.denom());
    }
    let p_entries: Vec<BigInt> = m.entries().iter().map(|e| e.numer() * (&q / e.denom())).collect();
    let p = IntegerMatrix::new(k, k, p_entries)?;
    let snf = smith_normal_form(&p)?;
    let mut scale = IntegerMatrix::identity(k);
    for i in 0..k {
        // gcd(d_i, q) >= 1 since q >= 1
        let step = &q / snf.s.at(i, i).gcd(&q);
        scale.set(i, i, step);
    }
    Ok(snf.v.mul(&scale))
}

/// All torus solutions of (I - M) x = g mod Z^k for one lift, as exact
/// rationals: one per residue of Z^k modulo the lattice (I - M) Z^k \cap Z^k.
fn lift_fixed_points(
    m: &RationalMatrix,
    a: &RationalMatrix,
    a_inv: &RationalMatrix,
    g: &[Rational],
    lift_index: usize,
) -> Result<Vec<TorusFixedPoint>> {
    // (I - M) Z^k \cap Z^k = (I - M) * {w : M w integral}
    let s_basis = integrality_sublattice(m)?;
    let lat = a
        .mul(&s_basis.to_rational())
        .to_integer()
        .expect("(I - M) maps the integrality sublattice into Z^k");
    let snf = smith_normal_form(&lat)?;
    let diag = snf.diagonal();
    let mut total: u64 = 1;
    for d in &diag {
        let v = d.to_u64().ok_or_else(|| {
            Error::GuardViolation("too many fixed points to enumerate".into())
        })?;
        assert!(v > 0, "nonsingular lift has positive Smith diagonal");
        total = total
            .checked_mul(v)
            .filter(|&t| t <= 1_000_000)
            .ok_or_else(|| Error::GuardViolation("too many fixed points to enumerate".into()))?;
    }
    let u_inv = snf
        .u
        .to_rational()
        .inverse()?
        .expect("U is unimodular")
        .to_integer()
        .expect("inverse of a unimodular matrix is integral")
        .to_rational();

    let k = a.rows();
    let mut out = Vec::with_capacity(total as usize);
    let mut radix = vec![0u64; k];
    for _ in 0..total {
        // z = U^-1 * r runs over residue representatives of Z^k mod lat
        let r: Vec<Rational> =
            radix.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect();
        let z: Vec<Rational> = u_inv.mul_vec(&r);
        let shifted: Vec<Rational> = g.iter().zip(&z).map(|(gi, zi)| gi + zi).collect();
        let x = a_inv.mul_vec(&shifted);
        let coordinates: Vec<Rational> = x.iter().map(fractional_part).collect();
        let witness: Vec<BigInt> = z.iter().map(|zi| zi.to_integer()).collect();
        out.push(TorusFixedPoint { coordinates, lift_index, witness });

        for (slot, d) in radix.iter_mut().zip(&diag) {
            *slot += 1;
            if *slot < d.to_u64().expect("checked above") {
                break;
            }
            *slot = 0;
        }
    }
    Ok(out)
}

/// Enumerates the fixed point set of an affine n-valued map on a torus,
/// deduplicated across lifts and sorted by coordinates. A lift with
/// det(I - M) = 0 is an error unless `skip_singular` is set.
pub fn enumerate_fixed_points(
    map: &AffineNValuedMap,
    skip_singular: bool,
) -> Result<Vec<TorusFixedPoint>> {
    let p = map.presentation();
    if !p.is_abelian_presentation() {
        return Err(Error::NotAbelian);
    }
    let mut seen: BTreeMap<Vec<Rational>, TorusFixedPoint> = BTreeMap::new();
    for (i, lift) in map.lifts().iter().enumerate() {
        let m = lift.linear_part.layer_matrices().0.into_iter().next().expect("one layer");
        let a = m.i_minus();
        let det = a.det()?;
        if det.is_zero() {
            if skip_singular {
                continue;
            }
            return Err(Error::SingularLift { lift: i + 1 });
        }
        let a_inv = a.inverse()?.expect("nonsingular");
        let g = lift.translation.layer(1).to_vec();
        for point in lift_fixed_points(&m, &a, &a_inv, &g, i + 1)? {
            seen.entry(point.coordinates.clone()).or_insert(point);
        }
    }
    Ok(seen.into_values().collect())
}

/// Comparison of the geometric census against the algebraic count.
#[derive(Clone, Debug)]
pub struct NielsenComparison {
    pub fixed_points: usize,
    pub nielsen: BigUint,
    pub matches: bool,
}

/// True iff the number of enumerated fixed points equals the Nielsen number.
/// Requires every lift to be nonsingular.
pub fn count_matches_nielsen(map: &AffineNValuedMap) -> Result<NielsenComparison> {
    let points = enumerate_fixed_points(map, false)?;
    let nielsen = map.nielsen()?;
    let matches = BigUint::from(points.len()) == nielsen;
    Ok(NielsenComparison { fixed_points: points.len(), nielsen, matches })
}

fn cofactor_det_small(m: &IntegerMatrix) -> BigInt {
    match m.rows() {
        1 => m.at(0, 0).clone(),
        2 => m.at(0, 0) * m.at(1, 1) - m.at(0, 1) * m.at(1, 0),
        3 => {
            m.at(0, 0) * (m.at(1, 1) * m.at(2, 2) - m.at(1, 2) * m.at(2, 1))
                - m.at(0, 1) * (m.at(1, 0) * m.at(2, 2) - m.at(1, 2) * m.at(2, 0))
                + m.at(0, 2) * (m.at(1, 0) * m.at(2, 1) - m.at(1, 1) * m.at(2, 0))
        }
        n => panic!("cofactor determinant limited to n <= 3, got {n}"),
    }
}

/// Residue count of Z^k modulo the sublattice (I - M) B Z^k by direct
/// enumeration, independent of the determinant formula it checks.
///
/// d Z^k lies inside the lattice L (d = |det L| by cofactor expansion), so
/// Z^k / L is the quotient of (Z/d)^k by the subgroup generated by the
/// columns of L; a breadth-first closure computes that subgroup's order.
pub fn brute_force_reidemeister_z_k(b: &IntegerMatrix, m: &RationalMatrix) -> Result<BigUint> {
    let k = b.rows();
    if k > 3 {
        return Err(Error::GuardViolation(format!(
            "residue enumeration limited to k <= 3, got {k}"
        )));
    }
    if !b.is_square() || !m.is_square() || m.rows() != k {
        return Err(Error::Dimension("B and M must be square of equal size".into()));
    }
    let product = m.i_minus().mul(&b.to_rational());
    let lat = product
        .to_integer()
        .ok_or_else(|| Error::InvalidLayerDatum("(I - M)B has non-integer entries".into()))?;
    let d_big = cofactor_det_small(&lat).abs();
    if d_big.is_zero() {
        return Err(Error::GuardViolation("residue enumeration requires det((I-M)B) != 0".into()));
    }
    let d = d_big
        .to_u64()
        .ok_or_else(|| Error::GuardViolation("determinant too large for enumeration".into()))?;
    let cells = d
        .checked_pow(k as u32)
        .filter(|&c| c <= 4_000_000)
        .ok_or_else(|| Error::GuardViolation("residue box too large to enumerate".into()))?;

    // subgroup of (Z/d)^k generated by the columns of L, by BFS closure
    let cols: Vec<Vec<u64>> = (0..k)
        .map(|j| lat.column(j).iter().map(|v| v.mod_floor(&d_big).to_u64().unwrap()).collect())
        .collect();
    let encode = |coords: &[u64]| -> usize {
        let mut idx = 0usize;
        for &c in coords.iter().rev() {
            idx = idx * d as usize + c as usize;
        }
        idx
    };
    let decode = |mut idx: usize| -> Vec<u64> {
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            out.push((idx % d as usize) as u64);
            idx /= d as usize;
        }
        out
    };
    let mut visited = vec![false; cells as usize];
    let mut queue = std::collections::VecDeque::new();
    visited[0] = true;
    queue.push_back(0usize);
    let mut order = 0u64;
    while let Some(cell) = queue.pop_front() {
        order += 1;
        let coords = decode(cell);
        for col in &cols {
            let next: Vec<u64> =
                coords.iter().zip(col).map(|(a, b)| (a + b) % d).collect();
            let idx = encode(&next);
            if !visited[idx] {
                visited[idx] = true;
                queue.push_back(idx);
            }
        }
    }
    assert_eq!(cells % order, 0, "subgroup order divides the group order");
    Ok(BigUint::from(cells / order))
}

/// Union-find variant of the residue count over the same fundamental box,
/// kept alongside the BFS count for cross-checks in tests.
pub fn residue_classes_union_find(lat: &IntegerMatrix) -> Result<BigUint> {
    let k = lat.rows();
    let d_big = cofactor_det_small(lat).abs();
    let d = d_big
        .to_u64()
        .filter(|&v| v > 0)
        .ok_or_else(|| Error::GuardViolation("nonsingular lattice required".into()))?;
    let cells = d
        .checked_pow(k as u32)
        .filter(|&c| c <= 4_000_000)
        .ok_or_else(|| Error::GuardViolation("residue box too large".into()))?;
    let mut uf = UnionFind::new(cells as usize);
    let cols: Vec<Vec<u64>> = (0..k)
        .map(|j| lat.column(j).iter().map(|v| v.mod_floor(&d_big).to_u64().unwrap()).collect())
        .collect();
    for cell in 0..cells as usize {
        let mut coords = Vec::with_capacity(k);
        let mut idx = cell;
        for _ in 0..k {
            coords.push((idx % d as usize) as u64);
            idx /= d as usize;
        }
        for col in &cols {
            let mut target = 0usize;
            let mut stride = 1usize;
            for (a, b) in coords.iter().zip(col) {
                target += ((a + b) % d) as usize * stride;
                stride *= d as usize;
            }
            uf.union(cell, target);
        }
    }
    let mut roots = std::collections::BTreeSet::new();
    for cell in 0..cells as usize {
        roots.insert(uf.find(cell));
    }
    Ok(BigUint::from(roots.len()))
}
