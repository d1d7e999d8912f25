//! Endomorphisms of a presented group, given by the images of all Malcev
//! basis elements, and the matrices they induce on the layer quotients.

use std::sync::Arc;

use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::group::{sample_lattice_element_seeded, BasisIndex, GroupElement, GroupPresentation};
use crate::linalg::{abs_inf, ExtendedRational, Rational, RationalMatrix};

/// Endomorphism specified by one image per basis element, in canonical order.
///
/// Construction enforces filtration compatibility: the image of a layer-i
/// basis element must have zero coordinates in all layers below i, otherwise
/// the induced layer matrices are not well defined.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Endomorphism {
    presentation: Arc<GroupPresentation>,
    images: Vec<GroupElement>,
}

/// Per-layer matrices of the morphism induced on the layer quotients.
/// Column j of matrix i holds the layer-i coordinates of the image of the
/// j-th layer-i basis element.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerMatrices(pub Vec<RationalMatrix>);

/// Sampled homomorphism verification report.
#[derive(Clone, Debug)]
pub struct HomReport {
    pub samples: usize,
    pub failures: Vec<HomFailure>,
}

#[derive(Clone, Debug)]
pub struct HomFailure {
    pub witness: String,
}

impl HomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Endomorphism {
    pub fn new(
        presentation: Arc<GroupPresentation>,
        images: Vec<(BasisIndex, GroupElement)>,
    ) -> Result<Self> {
        let expected = presentation.basis_indices();
        let mut slots: Vec<Option<GroupElement>> = vec![None; expected.len()];
        for (idx, image) in images {
            let slot = expected
                .iter()
                .position(|&e| e == idx)
                .ok_or_else(|| Error::Parse(format!("basis index ({}, {}) out of range", idx.layer, idx.pos)))?;
            if image.layers().len() != presentation.class()
                || image
                    .layers()
                    .iter()
                    .zip(presentation.ranks())
                    .any(|(l, &k)| l.len() != k)
            {
                return Err(Error::Dimension(format!(
                    "image of a[{},{}] does not match the layer ranks",
                    idx.layer, idx.pos
                )));
            }
            if slots[slot].is_some() {
                return Err(Error::DuplicateBasisImage(idx));
            }
            slots[slot] = Some(image);
        }
        let mut ordered = Vec::with_capacity(expected.len());
        for (slot, idx) in slots.into_iter().zip(&expected) {
            match slot {
                Some(image) => ordered.push(image),
                None => return Err(Error::MissingBasisImage(*idx)),
            }
        }
        for (image, idx) in ordered.iter().zip(&expected) {
            for lower in 1..idx.layer {
                if image.layer(lower).iter().any(|c| !c.is_zero()) {
                    return Err(Error::FiltrationViolation { basis: *idx });
                }
            }
        }
        Ok(Endomorphism { presentation, images: ordered })
    }

    pub fn identity(presentation: Arc<GroupPresentation>) -> Self {
        let images = presentation
            .basis_indices()
            .into_iter()
            .map(|idx| (idx, presentation.basis_element(idx)))
            .collect();
        Self::new(presentation, images).expect("identity images are filtration compatible")
    }

    pub fn presentation(&self) -> &Arc<GroupPresentation> {
        &self.presentation
    }

    pub fn image(&self, idx: BasisIndex) -> &GroupElement {
        let slot = self
            .presentation
            .basis_indices()
            .iter()
            .position(|&e| e == idx)
            .expect("basis index in range");
        &self.images[slot]
    }

    pub fn images(&self) -> &[GroupElement] {
        &self.images
    }

    /// Two endomorphisms have the same linear part iff all basis images agree.
    pub fn linear_part_eq(&self, other: &Endomorphism) -> bool {
        self.images == other.images
    }

    pub fn layer_matrices(&self) -> LayerMatrices {
        let ranks = self.presentation.ranks();
        let mut mats = Vec::with_capacity(ranks.len());
        let mut offset = 0;
        for (layer0, &k) in ranks.iter().enumerate() {
            let mut m = RationalMatrix::identity(k);
            for (col, image) in self.images[offset..offset + k].iter().enumerate() {
                for row in 0..k {
                    m.set(row, col, image.layer(layer0 + 1)[row].clone());
                }
            }
            mats.push(m);
            offset += k;
        }
        LayerMatrices(mats)
    }

    /// Applies the endomorphism to a lattice element by factoring it as an
    /// ordered product of basis elements and mapping factor by factor.
    pub fn evaluate_lattice(&self, x: &GroupElement) -> Result<GroupElement> {
        let exps = self.presentation.factor_exponents(x)?;
        let p = &self.presentation;
        let mut acc = p.identity();
        for (image, w) in self.images.iter().zip(&exps) {
            if w.is_zero() {
                continue;
            }
            acc = p.multiply(&acc, &p.power(image, w));
        }
        Ok(acc)
    }

    /// Samples lattice pairs and checks multiplicativity of the evaluation.
    /// Basis images need not define a homomorphism, so this is the check
    /// that they do, up to sampling.
    pub fn validate_homomorphism(&self, sample_count: usize, seed: u64) -> HomReport {
        let p = &self.presentation;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures = Vec::new();
        for _ in 0..sample_count.max(1) {
            let x = sample_lattice_element_seeded(p, &mut rng, 5);
            let y = sample_lattice_element_seeded(p, &mut rng, 5);
            let xy = p.multiply(&x, &y);
            if !xy.is_lattice() {
                failures.push(HomFailure {
                    witness: format!(
                        "product {} of lattice samples left the lattice",
                        xy.describe()
                    ),
                });
                break;
            }
            let lhs = match self.evaluate_lattice(&xy) {
                Ok(v) => v,
                Err(e) => {
                    failures.push(HomFailure { witness: format!("evaluation failed: {e}") });
                    break;
                }
            };
            let rhs = p.multiply(
                &self.evaluate_lattice(&x).expect("sample is on the lattice"),
                &self.evaluate_lattice(&y).expect("sample is on the lattice"),
            );
            if lhs != rhs {
                failures.push(HomFailure {
                    witness: format!(
                        "phi(x*y) != phi(x)*phi(y) at x={} y={}",
                        x.describe(),
                        y.describe()
                    ),
                });
                break;
            }
        }
        HomReport { samples: sample_count, failures }
    }

    /// det(I - induced differential). The differential is block triangular
    /// with the layer matrices on the diagonal, so the determinant is the
    /// product of the per-layer determinants det(I - M_i).
    pub fn det_i_minus_differential(&self) -> Rational {
        let mut acc = Rational::one();
        for m in &self.layer_matrices().0 {
            acc *= m.i_minus().det().expect("layer matrices are square");
        }
        acc
    }

    /// True iff some layer matrix has eigenvalue 1, decided exactly as
    /// det(I - M_i) = 0.
    pub fn has_eigenvalue_one(&self) -> bool {
        self.layer_matrices()
            .0
            .iter()
            .any(|m| m.i_minus().det().expect("square").is_zero())
    }

    /// Composition self . inner; inner must map the lattice into itself so
    /// that its images can be pushed through `self`.
    pub fn compose(&self, inner: &Endomorphism) -> Result<Endomorphism> {
        let images = self
            .presentation
            .basis_indices()
            .into_iter()
            .zip(inner.images.iter())
            .map(|(idx, img)| Ok((idx, self.evaluate_lattice(img)?)))
            .collect::<Result<Vec<_>>>()?;
        Endomorphism::new(self.presentation.clone(), images)
    }
}

/// Extended absolute value of det(I - differential); infinite exactly when
/// some layer matrix has eigenvalue 1.
pub fn abs_inf_det(phi: &Endomorphism) -> ExtendedRational {
    abs_inf(&phi.det_i_minus_differential())
}
