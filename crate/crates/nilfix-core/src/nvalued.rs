//! Affine n-valued self-maps of a nilmanifold, given by their lift tuple
//! (g_1, phi_1), ..., (g_n, phi_n), together with the permutation data the
//! covering action induces on the lift-factors and the class counts derived
//! from it.
//!
//! Moving a lift-factor across a deck transformation gamma turns lift i into
//! a lattice translate of exactly one lift j: the one with the same linear
//! part and with delta = g_i * phi_i(gamma) * g_j^-1 on the lattice. That
//! match defines a permutation sigma_gamma (with sigma_gamma(j) = i) and the
//! translation record delta per lift. Orbits of the sigma permutations split
//! the map into irreducible components; each component contributes
//! orbit_size * |det(I - phi_*)| classes.

use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, Zero};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::endo::Endomorphism;
use crate::error::{Error, Result};
use crate::group::{sample_lattice_element_seeded, BasisIndex, GroupElement, GroupPresentation};
use crate::linalg::{abs_inf, ExtendedCount, ExtendedRational, Rational};
use crate::uf::UnionFind;

/// One affine lift-factor: x -> g * phi(x).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineLift {
    pub translation: GroupElement,
    pub linear_part: Endomorphism,
}

/// An affine n-valued map as its tuple of affine lift-factors over a shared
/// presentation.
#[derive(Clone, Debug)]
pub struct AffineNValuedMap {
    presentation: Arc<GroupPresentation>,
    lifts: Vec<AffineLift>,
}

/// Permutation of {0..n-1} stored as its image table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &img in &images {
            if img >= n || seen[img] {
                return Err(Error::Dimension("not a permutation".into()));
            }
            seen[img] = true;
        }
        Ok(Permutation(images))
    }

    /// Number of points the permutation acts on.
    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.0[i]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.0.len()];
        for (i, &img) in self.0.iter().enumerate() {
            inv[img] = i;
        }
        Permutation(inv)
    }

    /// (self . other)(i) = self(other(i))
    pub fn compose(&self, other: &Permutation) -> Permutation {
        Permutation(other.0.iter().map(|&i| self.0[i]).collect())
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }
}

/// Matching data of one deck transformation gamma: the permutation
/// sigma_gamma and the lattice translations phi_i(gamma) per lift.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElementAction {
    pub sigma: Permutation,
    pub translations: Vec<GroupElement>,
}

/// Actions of all Malcev basis generators.
#[derive(Clone, Debug)]
pub struct SigmaData {
    pub generators: Vec<BasisIndex>,
    pub actions: Vec<ElementAction>,
}

/// Report for one irreducible component (one sigma orbit).
#[derive(Clone, Debug)]
pub struct ComponentReport {
    /// 0-based lift indices of the orbit, increasing.
    pub orbit: Vec<usize>,
    /// Smallest lift index of the orbit.
    pub representative: usize,
    /// det(I - phi_*) of the shared linear part.
    pub det_value: Rational,
    /// orbit size times |det|_inf.
    pub reidemeister: ExtendedCount,
    /// orbit size times |det|; zero for inessential components.
    pub nielsen: BigUint,
    /// Sign of the determinant: the fixed point index of the component's
    /// classes (-1, 0 or +1).
    pub index_sign: i8,
}

/// Full analysis of an affine n-valued map.
#[derive(Clone, Debug)]
pub struct MapReport {
    pub reidemeister: ExtendedCount,
    pub nielsen: BigUint,
    pub components: Vec<ComponentReport>,
}

/// Disjointness check outcome for one lift pair.
#[derive(Clone, Debug)]
pub struct DisjointnessViolation {
    /// 0-based lift indices.
    pub pair: (usize, usize),
    /// Sample point for pairs with different linear parts; `None` for the
    /// exact equal-linear-part check.
    pub witness: Option<String>,
}

#[derive(Clone, Debug)]
pub struct DisjointnessReport {
    pub exact_pairs: usize,
    pub sampled_pairs: usize,
    pub samples_per_pair: usize,
    pub violations: Vec<DisjointnessViolation>,
}

impl DisjointnessReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Clone, Debug)]
pub struct CocycleViolation {
    pub description: String,
}

#[derive(Clone, Debug)]
pub struct CocycleReport {
    pub pairs_checked: usize,
    pub violations: Vec<CocycleViolation>,
}

impl CocycleReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

impl AffineNValuedMap {
    /// Builds the map from its lifts; they must share one presentation.
    pub fn new(lifts: Vec<AffineLift>) -> Result<Self> {
        if lifts.is_empty() {
            return Err(Error::Dimension("an n-valued map needs at least one lift".into()));
        }
        let presentation = lifts[0].linear_part.presentation().clone();
        for (i, lift) in lifts.iter().enumerate() {
            if lift.linear_part.presentation().as_ref() != presentation.as_ref() {
                return Err(Error::Dimension(format!(
                    "lift {} uses a different group presentation",
                    i + 1
                )));
            }
            if lift.translation.layers().len() != presentation.class()
                || lift
                    .translation
                    .layers()
                    .iter()
                    .zip(presentation.ranks())
                    .any(|(l, &k)| l.len() != k)
            {
                return Err(Error::Dimension(format!(
                    "translation of lift {} does not match the layer ranks",
                    i + 1
                )));
            }
        }
        Ok(AffineNValuedMap { presentation, lifts })
    }

    pub fn n(&self) -> usize {
        self.lifts.len()
    }

    pub fn presentation(&self) -> &Arc<GroupPresentation> {
        &self.presentation
    }

    pub fn lifts(&self) -> &[AffineLift] {
        &self.lifts
    }

    /// Matching rule for one lattice element gamma: for each lift i find the
    /// unique j with equal linear part and g_i * phi_i(gamma) * g_j^-1 on
    /// the lattice; then sigma_gamma(j) = i and the translation of lift i is
    /// that lattice element.
    pub fn element_action(&self, gamma: &GroupElement) -> Result<ElementAction> {
        let p = &self.presentation;
        if !gamma.is_lattice() {
            return Err(Error::NotLatticeElement(gamma.describe()));
        }
        let n = self.n();
        let mut images = vec![usize::MAX; n]; // images[j] = i once matched
        let mut translations = Vec::with_capacity(n);
        for (i, lift) in self.lifts.iter().enumerate() {
            let phi_gamma = lift.linear_part.evaluate_lattice(gamma)?;
            let translated = p.multiply(&lift.translation, &phi_gamma);
            let mut matched: Option<(usize, GroupElement)> = None;
            for (j, other) in self.lifts.iter().enumerate() {
                if !lift.linear_part.linear_part_eq(&other.linear_part) {
                    continue;
                }
                let delta = p.multiply(&translated, &p.inverse(&other.translation));
                if delta.is_lattice() {
                    if let Some((first, _)) = matched {
                        return Err(Error::SigmaAmbiguous {
                            lift: i + 1,
                            element: gamma.describe(),
                            first: first + 1,
                            second: j + 1,
                        });
                    }
                    matched = Some((j, delta));
                }
            }
            let (j, delta) = matched.ok_or_else(|| Error::SigmaNoMatch {
                lift: i + 1,
                element: gamma.describe(),
            })?;
            if images[j] != usize::MAX {
                return Err(Error::SigmaCollision { target: j + 1, element: gamma.describe() });
            }
            images[j] = i;
            translations.push(delta);
        }
        let sigma = Permutation::from_images(images)
            .map_err(|_| Error::SigmaCollision { target: 0, element: gamma.describe() })?;
        Ok(ElementAction { sigma, translations })
    }

    /// Matching data for every Malcev basis generator.
    pub fn compute_sigma(&self) -> Result<SigmaData> {
        let generators = self.presentation.basis_indices();
        let actions = generators
            .iter()
            .map(|&idx| self.element_action(&self.presentation.basis_element(idx)))
            .collect::<Result<Vec<_>>>()?;
        Ok(SigmaData { generators, actions })
    }

    /// Orbits of {0..n-1} under all generator permutations, each orbit
    /// sorted, orbits ordered by their smallest element.
    pub fn sigma_orbits(&self, sigma: &SigmaData) -> Vec<Vec<usize>> {
        let mut uf = UnionFind::new(self.n());
        for action in &sigma.actions {
            for j in 0..self.n() {
                uf.union(j, action.sigma.apply(j));
            }
        }
        uf.groups()
    }

    /// Full analysis: sigma data, orbits, one report per irreducible
    /// component, and the total Reidemeister and Nielsen numbers.
    pub fn analyze(&self) -> Result<MapReport> {
        let sigma = self.compute_sigma()?;
        let orbits = self.sigma_orbits(&sigma);
        let mut components = Vec::with_capacity(orbits.len());
        let mut total_r = ExtendedCount::finite(0);
        let mut total_n = BigUint::zero();
        for orbit in orbits {
            let rep = orbit[0];
            for &i in &orbit[1..] {
                if !self.lifts[i].linear_part.linear_part_eq(&self.lifts[rep].linear_part) {
                    return Err(Error::InconsistentOrbit(format!(
                        "lifts {} and {} share an orbit but have different linear parts",
                        rep + 1,
                        i + 1
                    )));
                }
            }
            let det_value = self.lifts[rep].linear_part.det_i_minus_differential();
            let orbit_size = BigInt::from(orbit.len());
            let nielsen_rat = det_value.abs() * Rational::from_integer(orbit_size.clone());
            if !nielsen_rat.denom().is_one() {
                return Err(Error::NonIntegralCount(format!(
                    "orbit size * |det| = {nielsen_rat} for orbit at lift {}",
                    rep + 1
                )));
            }
            let nielsen = nielsen_rat.numer().to_biguint().expect("non-negative");
            let reidemeister = match abs_inf(&det_value) {
                ExtendedRational::Infinite => ExtendedCount::Infinite,
                ExtendedRational::Finite(_) => ExtendedCount::Finite(nielsen.clone()),
            };
            let index_sign = match det_value.numer().sign() {
                num_bigint::Sign::Plus => 1,
                num_bigint::Sign::NoSign => 0,
                num_bigint::Sign::Minus => -1,
            };
            total_r = total_r + reidemeister.clone();
            total_n += &nielsen;
            components.push(ComponentReport {
                orbit,
                representative: rep,
                det_value,
                reidemeister,
                nielsen,
                index_sign,
            });
        }
        Ok(MapReport { reidemeister: total_r, nielsen: total_n, components })
    }

    /// Sum over all lifts of |det(I - phi_i*)|_inf.
    pub fn reidemeister(&self) -> Result<ExtendedCount> {
        Ok(self.analyze()?.reidemeister)
    }

    /// Sum over all lifts of |det(I - phi_i*)|; always finite.
    pub fn nielsen(&self) -> Result<BigUint> {
        Ok(self.analyze()?.nielsen)
    }

    /// Pairwise disjointness of the lift images. Pairs with equal linear
    /// parts are decided exactly (g_i g_j^-1 off the lattice); pairs with
    /// different linear parts are sampled at random lattice points and the
    /// outcome is evidence, not proof.
    pub fn validate_disjointness(&self, sample_count: usize, seed: u64) -> DisjointnessReport {
        let p = &self.presentation;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut violations = Vec::new();
        let mut exact_pairs = 0;
        let mut sampled_pairs = 0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let (li, lj) = (&self.lifts[i], &self.lifts[j]);
                if li.linear_part.linear_part_eq(&lj.linear_part) {
                    exact_pairs += 1;
                    let quot = p.multiply(&li.translation, &p.inverse(&lj.translation));
                    if quot.is_lattice() {
                        violations.push(DisjointnessViolation { pair: (i, j), witness: None });
                    }
                } else {
                    sampled_pairs += 1;
                    for _ in 0..sample_count.max(1) {
                        let x = sample_lattice_element_seeded(p, &mut rng, 5);
                        let vi = match li.linear_part.evaluate_lattice(&x) {
                            Ok(v) => p.multiply(&li.translation, &v),
                            Err(_) => continue,
                        };
                        let vj = match lj.linear_part.evaluate_lattice(&x) {
                            Ok(v) => p.multiply(&lj.translation, &v),
                            Err(_) => continue,
                        };
                        let quot = p.multiply(&vi, &p.inverse(&vj));
                        if quot.is_lattice() {
                            violations.push(DisjointnessViolation {
                                pair: (i, j),
                                witness: Some(x.describe()),
                            });
                            break;
                        }
                    }
                }
            }
        }
        DisjointnessReport {
            exact_pairs,
            sampled_pairs,
            samples_per_pair: sample_count,
            violations,
        }
    }

    /// Verifies that the matching data composes like a homomorphism into the
    /// wreath-type product: at a product gamma*delta the permutation must be
    /// sigma_gamma . sigma_delta and the translations must compose as
    /// t_i(gamma) * t_{sigma_gamma^-1(i)}(delta). Checks all ordered
    /// generator pairs, then random lattice pairs up to the sample budget.
    pub fn sigma_cocycle_check(
        &self,
        sigma: &SigmaData,
        sample_count: usize,
        seed: u64,
    ) -> Result<CocycleReport> {
        let p = &self.presentation;
        let mut violations = Vec::new();
        let mut pairs_checked = 0;

        let check_pair = |this: &Self,
                              gamma: &GroupElement,
                              delta: &GroupElement,
                              act_gamma: &ElementAction,
                              act_delta: &ElementAction,
                              violations: &mut Vec<CocycleViolation>|
         -> Result<()> {
            let product = p.multiply(gamma, delta);
            let act_product = this.element_action(&product)?;
            let expected_sigma = act_gamma.sigma.compose(&act_delta.sigma);
            if act_product.sigma != expected_sigma {
                violations.push(CocycleViolation {
                    description: format!(
                        "sigma at {} * {} is not the composition",
                        gamma.describe(),
                        delta.describe()
                    ),
                });
                return Ok(());
            }
            let inv = act_gamma.sigma.inverse();
            for i in 0..this.n() {
                let expected = p.multiply(
                    &act_gamma.translations[i],
                    &act_delta.translations[inv.apply(i)],
                );
                if act_product.translations[i] != expected {
                    violations.push(CocycleViolation {
                        description: format!(
                            "translation {} at {} * {} does not compose",
                            i + 1,
                            gamma.describe(),
                            delta.describe()
                        ),
                    });
                    return Ok(());
                }
            }
            Ok(())
        };

        for (gi, &g_idx) in sigma.generators.iter().enumerate() {
            for (di, &d_idx) in sigma.generators.iter().enumerate() {
                let gamma = p.basis_element(g_idx);
                let delta = p.basis_element(d_idx);
                check_pair(
                    self,
                    &gamma,
                    &delta,
                    &sigma.actions[gi],
                    &sigma.actions[di],
                    &mut violations,
                )?;
                pairs_checked += 1;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while pairs_checked < sample_count {
            let gamma = sample_lattice_element_seeded(p, &mut rng, 5);
            let delta = sample_lattice_element_seeded(p, &mut rng, 5);
            let act_gamma = self.element_action(&gamma)?;
            let act_delta = self.element_action(&delta)?;
            check_pair(self, &gamma, &delta, &act_gamma, &act_delta, &mut violations)?;
            pairs_checked += 1;
        }
        Ok(CocycleReport { pairs_checked, violations })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{rat_frac, rat_int};
    use rand::Rng;

    fn torus() -> Arc<GroupPresentation> {
        Arc::new(GroupPresentation::abelian(2))
    }

    fn torus_endo(p: &Arc<GroupPresentation>, cols: [[i64; 2]; 2], den: i64) -> Endomorphism {
        Endomorphism::new(
            p.clone(),
            vec![
                (
                    BasisIndex::new(1, 1),
                    p.element(vec![vec![rat_frac(cols[0][0], den), rat_frac(cols[0][1], den)]])
                        .unwrap(),
                ),
                (
                    BasisIndex::new(1, 2),
                    p.element(vec![vec![rat_frac(cols[1][0], den), rat_frac(cols[1][1], den)]])
                        .unwrap(),
                ),
            ],
        )
        .unwrap()
    }

    /// The three-valued map with lifts ((0,0), diag(1/2,-1)),
    /// ((1/2,0), diag(1/2,-1)), ((0,1/2), -I).
    pub(crate) fn map_f() -> AffineNValuedMap {
        let p = torus();
        let half = torus_endo(&p, [[1, 0], [0, -2]], 2);
        let minus = torus_endo(&p, [[-1, 0], [0, -1]], 1);
        AffineNValuedMap::new(vec![
            AffineLift {
                translation: p.element(vec![vec![rat_int(0), rat_int(0)]]).unwrap(),
                linear_part: half.clone(),
            },
            AffineLift {
                translation: p.element(vec![vec![rat_frac(1, 2), rat_int(0)]]).unwrap(),
                linear_part: half,
            },
            AffineLift {
                translation: p.element(vec![vec![rat_int(0), rat_frac(1, 2)]]).unwrap(),
                linear_part: minus,
            },
        ])
        .unwrap()
    }

    /// Same map with the third linear part diag(1,-1): infinite Reidemeister.
    pub(crate) fn map_g() -> AffineNValuedMap {
        let p = torus();
        let half = torus_endo(&p, [[1, 0], [0, -2]], 2);
        let third = torus_endo(&p, [[1, 0], [0, -1]], 1);
        AffineNValuedMap::new(vec![
            AffineLift {
                translation: p.element(vec![vec![rat_int(0), rat_int(0)]]).unwrap(),
                linear_part: half.clone(),
            },
            AffineLift {
                translation: p.element(vec![vec![rat_frac(1, 2), rat_int(0)]]).unwrap(),
                linear_part: half,
            },
            AffineLift {
                translation: p.element(vec![vec![rat_int(0), rat_frac(1, 2)]]).unwrap(),
                linear_part: third,
            },
        ])
        .unwrap()
    }

    fn heis_map() -> AffineNValuedMap {
        let p = Arc::new(GroupPresentation::heisenberg());
        let phi = Endomorphism::new(
            p.clone(),
            vec![
                (BasisIndex::new(1, 1), p.element_from_i64(&[vec![2, 0], vec![0]]).unwrap()),
                (BasisIndex::new(1, 2), p.element_from_i64(&[vec![0, 3], vec![0]]).unwrap()),
                (BasisIndex::new(2, 1), p.element_from_i64(&[vec![0, 0], vec![6]]).unwrap()),
            ],
        )
        .unwrap();
        AffineNValuedMap::new(vec![AffineLift { translation: p.identity(), linear_part: phi }])
            .unwrap()
    }

    #[test]
    fn sigma_of_map_f() {
        let m = map_f();
        let sigma = m.compute_sigma().unwrap();
        // generator (1,0): lifts 1 and 2 swap, lift 3 is fixed
        assert_eq!(sigma.actions[0].sigma.images(), &[1, 0, 2]);
        // generator (0,1): everything fixed
        assert_eq!(sigma.actions[1].sigma.images(), &[0, 1, 2]);
    }

    #[test]
    fn sigma_for_single_valued_map_is_conjugated_translation() {
        let p = torus();
        let phi = torus_endo(&p, [[2, 0], [0, 3]], 1);
        let g = p.element(vec![vec![rat_frac(1, 3), rat_frac(1, 7)]]).unwrap();
        let m = AffineNValuedMap::new(vec![AffineLift {
            translation: g.clone(),
            linear_part: phi.clone(),
        }])
        .unwrap();
        let sigma = m.compute_sigma().unwrap();
        for (idx, action) in m.presentation().basis_indices().iter().zip(&sigma.actions) {
            let gamma = m.presentation().basis_element(*idx);
            let expected = m.presentation().multiply(
                &m.presentation().multiply(&g, &phi.evaluate_lattice(&gamma).unwrap()),
                &m.presentation().inverse(&g),
            );
            assert_eq!(action.translations[0], expected);
            assert_eq!(action.sigma.images(), &[0]);
        }
    }

    #[test]
    fn sigma_of_identity_map_is_translation_by_gamma() {
        let p = torus();
        let m = AffineNValuedMap::new(vec![AffineLift {
            translation: p.identity(),
            linear_part: Endomorphism::identity(p.clone()),
        }])
        .unwrap();
        let sigma = m.compute_sigma().unwrap();
        for (idx, action) in p.basis_indices().iter().zip(&sigma.actions) {
            assert_eq!(action.translations[0], p.basis_element(*idx));
        }
    }

    #[test]
    fn orbits_of_the_torus_maps() {
        let f = map_f();
        let sigma = f.compute_sigma().unwrap();
        assert_eq!(f.sigma_orbits(&sigma), vec![vec![0, 1], vec![2]]);
        let g = map_g();
        let sigma = g.compute_sigma().unwrap();
        assert_eq!(g.sigma_orbits(&sigma), vec![vec![0, 1], vec![2]]);
    }

    #[test]
    fn singleton_orbits_for_trivial_sigma() {
        let m = heis_map();
        let sigma = m.compute_sigma().unwrap();
        assert_eq!(m.sigma_orbits(&sigma), vec![vec![0]]);
    }

    #[test]
    fn reidemeister_and_nielsen_of_map_f() {
        let m = map_f();
        assert_eq!(m.reidemeister().unwrap(), ExtendedCount::finite(6));
        assert_eq!(m.nielsen().unwrap(), BigUint::from(6u32));
    }

    #[test]
    fn reidemeister_and_nielsen_of_map_g() {
        let m = map_g();
        assert_eq!(m.reidemeister().unwrap(), ExtendedCount::Infinite);
        assert_eq!(m.nielsen().unwrap(), BigUint::from(2u32));
    }

    #[test]
    fn identity_map_counts() {
        let p = torus();
        let m = AffineNValuedMap::new(vec![AffineLift {
            translation: p.identity(),
            linear_part: Endomorphism::identity(p.clone()),
        }])
        .unwrap();
        assert_eq!(m.reidemeister().unwrap(), ExtendedCount::Infinite);
        assert_eq!(m.nielsen().unwrap(), BigUint::zero());
    }

    #[test]
    fn component_reports_of_map_f() {
        let report = map_f().analyze().unwrap();
        assert_eq!(report.components.len(), 2);
        let c0 = &report.components[0];
        assert_eq!(c0.orbit, vec![0, 1]);
        assert_eq!(c0.det_value, rat_int(1));
        assert_eq!(c0.reidemeister, ExtendedCount::finite(2));
        assert_eq!(c0.nielsen, BigUint::from(2u32));
        assert_eq!(c0.index_sign, 1);
        let c1 = &report.components[1];
        assert_eq!(c1.orbit, vec![2]);
        assert_eq!(c1.det_value, rat_int(4));
        assert_eq!(c1.reidemeister, ExtendedCount::finite(4));
        assert_eq!(c1.nielsen, BigUint::from(4u32));
        assert_eq!(c1.index_sign, 1);
    }

    #[test]
    fn component_reports_of_map_g() {
        let report = map_g().analyze().unwrap();
        let c1 = &report.components[1];
        assert_eq!(c1.orbit, vec![2]);
        assert_eq!(c1.reidemeister, ExtendedCount::Infinite);
        assert_eq!(c1.nielsen, BigUint::zero());
        assert_eq!(c1.index_sign, 0);
    }

    #[test]
    fn heisenberg_single_component() {
        let report = heis_map().analyze().unwrap();
        assert_eq!(report.components.len(), 1);
        assert_eq!(report.components[0].det_value, rat_int(-10));
        assert_eq!(report.reidemeister, ExtendedCount::finite(10));
        assert_eq!(report.nielsen, BigUint::from(10u32));
        assert_eq!(report.components[0].index_sign, -1);
    }

    #[test]
    fn disjointness_of_map_f() {
        let report = map_f().validate_disjointness(100, 42);
        assert!(report.passed());
        assert_eq!(report.exact_pairs, 1);
        assert_eq!(report.sampled_pairs, 2);
    }

    #[test]
    fn duplicate_lift_fails_disjointness() {
        let p = torus();
        let phi = torus_endo(&p, [[2, 0], [0, 3]], 1);
        let lift = AffineLift {
            translation: p.element(vec![vec![rat_frac(1, 2), rat_int(0)]]).unwrap(),
            linear_part: phi,
        };
        let m = AffineNValuedMap::new(vec![lift.clone(), lift]).unwrap();
        let report = m.validate_disjointness(10, 42);
        assert!(!report.passed());
        assert_eq!(report.violations[0].pair, (0, 1));
        assert!(report.violations[0].witness.is_none());
    }

    #[test]
    fn single_lift_is_vacuously_disjoint() {
        let report = heis_map().validate_disjointness(10, 42);
        assert!(report.passed());
        assert_eq!(report.exact_pairs + report.sampled_pairs, 0);
    }

    #[test]
    fn cocycle_on_both_torus_maps() {
        for m in [map_f(), map_g()] {
            let sigma = m.compute_sigma().unwrap();
            let report = m.sigma_cocycle_check(&sigma, 50, 42).unwrap();
            assert!(report.passed(), "{:?}", report.violations);
        }
    }

    #[test]
    fn cocycle_reduces_to_homomorphism_for_single_lift() {
        let m = heis_map();
        let sigma = m.compute_sigma().unwrap();
        let report = m.sigma_cocycle_check(&sigma, 60, 42).unwrap();
        assert!(report.passed());
    }

    #[test]
    fn corrupted_translation_fails_matching() {
        let p = torus();
        let mut map = map_g();
        // Shifting lift 1 by (1/3, 0) leaves both candidate deltas for
        // generator (1,0) off the lattice.
        map.lifts[0].translation =
            p.element(vec![vec![rat_frac(1, 3), rat_int(0)]]).unwrap();
        let err = map.compute_sigma().unwrap_err();
        assert!(matches!(err, Error::SigmaNoMatch { .. }));
    }

    #[test]
    fn orbit_sizes_sum_to_n() {
        for m in [map_f(), map_g(), heis_map()] {
            let sigma = m.compute_sigma().unwrap();
            let total: usize = m.sigma_orbits(&sigma).iter().map(|o| o.len()).sum();
            assert_eq!(total, m.n());
        }
    }

    #[test]
    fn totals_regroup_per_lift_determinants() {
        for m in [map_f(), map_g()] {
            let report = m.analyze().unwrap();
            let mut per_lift = ExtendedCount::finite(0);
            for lift in m.lifts() {
                let det = lift.linear_part.det_i_minus_differential();
                per_lift = per_lift
                    + match abs_inf(&det) {
                        ExtendedRational::Infinite => ExtendedCount::Infinite,
                        ExtendedRational::Finite(v) => {
                            ExtendedCount::Finite(v.to_integer().to_biguint().unwrap())
                        }
                    };
            }
            assert_eq!(report.reidemeister, per_lift);
            let from_components = report
                .components
                .iter()
                .fold(ExtendedCount::finite(0), |acc, c| acc + c.reidemeister.clone());
            assert_eq!(report.reidemeister, from_components);
        }
    }

    #[test]
    fn nielsen_bounded_by_reidemeister_with_equality_when_finite() {
        for m in [map_f(), map_g(), heis_map()] {
            let report = m.analyze().unwrap();
            let nielsen = ExtendedCount::Finite(report.nielsen.clone());
            assert!(nielsen <= report.reidemeister);
            if !report.reidemeister.is_infinite() {
                assert_eq!(nielsen, report.reidemeister);
            }
        }
    }

    #[test]
    fn nielsen_invariant_under_lift_permutation_and_lattice_translation() {
        let m = map_f();
        let base = m.nielsen().unwrap();
        let mut permuted = m.lifts().to_vec();
        permuted.rotate_left(1);
        let mp = AffineNValuedMap::new(permuted).unwrap();
        assert_eq!(mp.nielsen().unwrap(), base);

        let p = m.presentation().clone();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let mut lifts = m.lifts().to_vec();
            let which = rng.gen_range(0..lifts.len());
            let gamma = sample_lattice_element_seeded(&p, &mut rng, 3);
            lifts[which].translation = p.multiply(&gamma, &lifts[which].translation);
            let shifted = AffineNValuedMap::new(lifts).unwrap();
            assert_eq!(shifted.nielsen().unwrap(), base);
            assert_eq!(shifted.reidemeister().unwrap(), m.reidemeister().unwrap());
        }
    }

    #[test]
    fn index_sign_is_zero_exactly_for_vanishing_determinant() {
        for m in [map_f(), map_g(), heis_map()] {
            for c in m.analyze().unwrap().components {
                assert_eq!(c.index_sign == 0, c.det_value.is_zero());
                if !c.det_value.is_zero() {
                    assert!(c.index_sign == 1 || c.index_sign == -1);
                }
            }
        }
    }
}
