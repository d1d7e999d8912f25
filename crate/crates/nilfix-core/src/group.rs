//! Nilpotent Lie groups in Malcev coordinates with a polynomial
//! multiplication law, together with their integer lattices.
//!
//! Elements carry one rational coordinate vector per layer of the isolated
//! lower central series. Multiplication acts layer by layer: coordinates add
//! and a correction polynomial in the lower-layer coordinates of both factors
//! is added on top. Layer 1 never has a correction, so each layer can be
//! computed from the layers below it.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{rat_pow, rat_to_string, Rational};

/// Position of a Malcev basis element: 1-based layer and 1-based index
/// within the layer, matching the usual double-subscript notation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisIndex {
    pub layer: usize,
    pub pos: usize,
}

impl BasisIndex {
    pub fn new(layer: usize, pos: usize) -> Self {
        BasisIndex { layer, pos }
    }
}

/// Group element as per-layer rational coordinate vectors.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroupElement {
    layers: Vec<Vec<Rational>>,
}

impl GroupElement {
    pub fn layers(&self) -> &[Vec<Rational>] {
        &self.layers
    }

    pub fn layer(&self, layer: usize) -> &[Rational] {
        &self.layers[layer - 1]
    }

    pub fn coordinate(&self, idx: BasisIndex) -> &Rational {
        &self.layers[idx.layer - 1][idx.pos - 1]
    }

    /// True iff every coordinate is an integer.
    pub fn is_lattice(&self) -> bool {
        self.layers.iter().flatten().all(|c| c.denom().is_one())
    }

    pub fn is_identity(&self) -> bool {
        self.layers.iter().flatten().all(|c| c.is_zero())
    }

    /// Integer coordinates in canonical order, if the element is on the lattice.
    pub fn lattice_coordinates(&self) -> Option<Vec<BigInt>> {
        if !self.is_lattice() {
            return None;
        }
        Some(self.layers.iter().flatten().map(|c| c.numer().clone()).collect())
    }

    /// Renders coordinates as "(a, b | c)" with layers separated by bars.
    pub fn describe(&self) -> String {
        let parts: Vec<String> = self
            .layers
            .iter()
            .map(|layer| layer.iter().map(rat_to_string).collect::<Vec<_>>().join(", "))
            .collect();
        format!("({})", parts.join(" | "))
    }
}

/// One monomial of a law polynomial: coeff * prod x[v]^e * prod y[w]^f,
/// where the variables refer to coordinates of the two factors.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub coeff: Rational,
    pub x_vars: Vec<(BasisIndex, u32)>,
    pub y_vars: Vec<(BasisIndex, u32)>,
}

/// Multivariate polynomial given as an explicit term list.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Polynomial {
    pub terms: Vec<Term>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn eval(&self, x: &GroupElement, y: &GroupElement) -> Rational {
        let mut acc = Rational::zero();
        for term in &self.terms {
            let mut value = term.coeff.clone();
            for &(idx, exp) in &term.x_vars {
                value *= rat_pow(x.coordinate(idx), exp);
            }
            for &(idx, exp) in &term.y_vars {
                value *= rat_pow(y.coordinate(idx), exp);
            }
            acc += value;
        }
        acc
    }
}

/// A nilpotent Lie group with lattice, presented by layer ranks and the
/// correction polynomials of the multiplication law.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    ranks: Vec<usize>,
    /// law[i][j] corrects coordinate j+1 of layer i+1; layer 1 entries stay zero.
    law: Vec<Vec<Polynomial>>,
}

/// Outcome of one sampled axiom check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomFailure {
    pub axiom: &'static str,
    pub witness: String,
}

/// Sampled group-axiom verification: pass/fail with first counterexamples.
#[derive(Clone, Debug)]
pub struct AxiomReport {
    pub samples: usize,
    pub failures: Vec<AxiomFailure>,
}

impl AxiomReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl GroupPresentation {
    /// Builds a presentation after validating that every law polynomial
    /// references only lower-layer variables within range.
    pub fn new(ranks: Vec<usize>, entries: Vec<(usize, usize, Polynomial)>) -> Result<Self> {
        if ranks.is_empty() || ranks.contains(&0) {
            return Err(Error::Dimension("ranks must be a nonempty list of positive integers".into()));
        }
        let c = ranks.len();
        let mut law: Vec<Vec<Polynomial>> =
            ranks.iter().map(|&k| vec![Polynomial::zero(); k]).collect();
        let mut seen = std::collections::BTreeSet::new();
        for (layer, coordinate, poly) in entries {
            if layer < 2 || layer > c {
                return Err(Error::Parse(format!(
                    "law target layer {layer} out of range 2..={c}"
                )));
            }
            if coordinate < 1 || coordinate > ranks[layer - 1] {
                return Err(Error::Parse(format!(
                    "law target coordinate {coordinate} out of range for layer {layer}"
                )));
            }
            if !seen.insert((layer, coordinate)) {
                return Err(Error::Parse(format!(
                    "duplicate law entry for layer {layer} coordinate {coordinate}"
                )));
            }
            for term in &poly.terms {
                for &(idx, _) in term.x_vars.iter().chain(term.y_vars.iter()) {
                    if idx.layer >= layer {
                        return Err(Error::Parse(format!(
                            "law for layer {layer} references variable in layer {} (must be lower)",
                            idx.layer
                        )));
                    }
                    if idx.pos < 1 || idx.pos > ranks[idx.layer - 1] {
                        return Err(Error::Parse(format!(
                            "law variable index ({}, {}) out of range",
                            idx.layer, idx.pos
                        )));
                    }
                }
            }
            let cleaned =
                Polynomial { terms: poly.terms.into_iter().filter(|t| !t.coeff.is_zero()).collect() };
            law[layer - 1][coordinate - 1] = cleaned;
        }
        Ok(GroupPresentation { ranks, law })
    }

    /// Free abelian group of rank k: one layer, no corrections.
    pub fn abelian(k: usize) -> Self {
        GroupPresentation { ranks: vec![k], law: vec![vec![Polynomial::zero(); k]] }
    }

    /// Discrete Heisenberg lattice inside its Malcev completion:
    /// ranks (2, 1), correction x[1,1] * y[1,2] on the top coordinate.
    pub fn heisenberg() -> Self {
        let term = Term {
            coeff: Rational::one(),
            x_vars: vec![(BasisIndex::new(1, 1), 1)],
            y_vars: vec![(BasisIndex::new(1, 2), 1)],
        };
        GroupPresentation {
            ranks: vec![2, 1],
            law: vec![
                vec![Polynomial::zero(), Polynomial::zero()],
                vec![Polynomial { terms: vec![term] }],
            ],
        }
    }

    /// Resolves "abelian(k)" or "heisenberg".
    pub fn builtin(name: &str) -> Result<Self> {
        let name = name.trim();
        if name == "heisenberg" {
            return Ok(Self::heisenberg());
        }
        if let Some(rest) = name.strip_prefix("abelian(") {
            if let Some(arg) = rest.strip_suffix(')') {
                let k: usize = arg
                    .trim()
                    .parse()
                    .map_err(|_| Error::UnknownBuiltin(name.to_string()))?;
                if k >= 1 {
                    return Ok(Self::abelian(k));
                }
            }
        }
        Err(Error::UnknownBuiltin(name.to_string()))
    }

    pub fn class(&self) -> usize {
        self.ranks.len()
    }

    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    pub fn is_abelian_presentation(&self) -> bool {
        self.class() == 1
    }

    /// Total dimension: sum of the layer ranks.
    pub fn dimension(&self) -> usize {
        self.ranks.iter().sum()
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement { layers: self.ranks.iter().map(|&k| vec![Rational::zero(); k]).collect() }
    }

    /// Checked element construction from per-layer coordinates.
    pub fn element(&self, layers: Vec<Vec<Rational>>) -> Result<GroupElement> {
        if layers.len() != self.class()
            || layers.iter().zip(&self.ranks).any(|(l, &k)| l.len() != k)
        {
            return Err(Error::Dimension(format!(
                "element layers do not match ranks {:?}",
                self.ranks
            )));
        }
        Ok(GroupElement { layers })
    }

    pub fn element_from_i64(&self, layers: &[Vec<i64>]) -> Result<GroupElement> {
        self.element(
            layers
                .iter()
                .map(|l| l.iter().map(|&v| Rational::from_integer(BigInt::from(v))).collect())
                .collect(),
        )
    }

    /// Lattice element from flat integer coordinates in canonical order.
    pub fn element_from_flat(&self, coords: &[BigInt]) -> Result<GroupElement> {
        if coords.len() != self.dimension() {
            return Err(Error::Dimension("flat coordinate count mismatch".into()));
        }
        let mut layers = Vec::with_capacity(self.class());
        let mut offset = 0;
        for &k in &self.ranks {
            layers.push(
                coords[offset..offset + k]
                    .iter()
                    .map(|v| Rational::from_integer(v.clone()))
                    .collect(),
            );
            offset += k;
        }
        Ok(GroupElement { layers })
    }

    /// All basis positions in canonical order.
    pub fn basis_indices(&self) -> Vec<BasisIndex> {
        let mut out = Vec::with_capacity(self.dimension());
        for (layer0, &k) in self.ranks.iter().enumerate() {
            for pos0 in 0..k {
                out.push(BasisIndex::new(layer0 + 1, pos0 + 1));
            }
        }
        out
    }

    pub fn basis_element(&self, idx: BasisIndex) -> GroupElement {
        let mut e = self.identity();
        e.layers[idx.layer - 1][idx.pos - 1] = Rational::one();
        e
    }

    fn conforms(&self, x: &GroupElement) -> bool {
        x.layers.len() == self.class()
            && x.layers.iter().zip(&self.ranks).all(|(l, &k)| l.len() == k)
    }

    /// Layer i of x*y is x_i + y_i + p_i(lower layers of x, lower layers of y).
    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        assert!(self.conforms(x) && self.conforms(y), "element shape mismatch");
        let mut layers = Vec::with_capacity(self.class());
        for (layer0, &k) in self.ranks.iter().enumerate() {
            let mut coords = Vec::with_capacity(k);
            for j in 0..k {
                let mut v = &x.layers[layer0][j] + &y.layers[layer0][j];
                let p = &self.law[layer0][j];
                if !p.is_zero() {
                    v += p.eval(x, y);
                }
                coords.push(v);
            }
            layers.push(coords);
        }
        GroupElement { layers }
    }

    /// Layer-triangular solve of x*y = identity: each correction polynomial
    /// only consumes lower layers of y, which are already known.
    pub fn inverse(&self, x: &GroupElement) -> GroupElement {
        assert!(self.conforms(x), "element shape mismatch");
        let mut y = self.identity();
        for (layer0, &k) in self.ranks.iter().enumerate() {
            for j in 0..k {
                let p = &self.law[layer0][j];
                let correction =
                    if p.is_zero() { Rational::zero() } else { p.eval(x, &y) };
                y.layers[layer0][j] = -(&x.layers[layer0][j] + correction);
            }
        }
        y
    }

    /// x^m by square-and-multiply; negative exponents go through the inverse.
    pub fn power(&self, x: &GroupElement, m: &BigInt) -> GroupElement {
        if m.is_zero() {
            return self.identity();
        }
        let base = if m.is_negative() { self.inverse(x) } else { x.clone() };
        let mut exp = m.abs().to_biguint().expect("abs is non-negative");
        let mut acc = self.identity();
        let mut sq = base;
        let one = num_bigint::BigUint::one();
        loop {
            if (&exp & &one).is_one() {
                acc = self.multiply(&acc, &sq);
            }
            exp >>= 1;
            if exp.is_zero() {
                break;
            }
            sq = self.multiply(&sq, &sq);
        }
        acc
    }

    pub fn power_i64(&self, x: &GroupElement, m: i64) -> GroupElement {
        self.power(x, &BigInt::from(m))
    }

    /// x^-1 y^-1 x y
    pub fn commutator(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let xi = self.inverse(x);
        let yi = self.inverse(y);
        self.multiply(&self.multiply(&self.multiply(&xi, &yi), x), y)
    }

    /// Ordered-product exponents of a lattice element: the unique w with
    /// x = a(1,1)^w1 * a(1,2)^w2 * ... in canonical basis order. Peels one
    /// basis element at a time; only higher layers are disturbed, so the
    /// exponent at each position can be read off directly.
    pub fn factor_exponents(&self, x: &GroupElement) -> Result<Vec<BigInt>> {
        if !x.is_lattice() {
            return Err(Error::NotLatticeElement(x.describe()));
        }
        let mut remaining = x.clone();
        let mut exps = Vec::with_capacity(self.dimension());
        for idx in self.basis_indices() {
            let coord = remaining.coordinate(idx).clone();
            if !coord.denom().is_one() {
                return Err(Error::NonIntegralFactorization(x.describe()));
            }
            let w = coord.numer().clone();
            let peel = self.power(&self.basis_element(idx), &(-w.clone()));
            remaining = self.multiply(&peel, &remaining);
            exps.push(w);
        }
        if !remaining.is_identity() {
            return Err(Error::NonIntegralFactorization(x.describe()));
        }
        Ok(exps)
    }

    fn sample_lattice_element<R: Rng>(&self, rng: &mut R, bound: i64) -> GroupElement {
        let layers = self
            .ranks
            .iter()
            .map(|&k| {
                (0..k)
                    .map(|_| Rational::from_integer(BigInt::from(rng.gen_range(-bound..=bound))))
                    .collect()
            })
            .collect();
        GroupElement { layers }
    }

    /// Samples pseudo-random integer triples and checks associativity, the
    /// two-sided identity, two-sided inverses, and lattice closure. Generic
    /// presentations cannot be proven associative, so this is evidence, not
    /// proof. Records the first counterexample per axiom.
    pub fn check_group_axioms(&self, sample_count: usize, seed: u64) -> AxiomReport {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut failures: Vec<AxiomFailure> = Vec::new();
        let fail = |failures: &mut Vec<AxiomFailure>, axiom: &'static str, witness: String| {
            if !failures.iter().any(|f| f.axiom == axiom) {
                failures.push(AxiomFailure { axiom, witness });
            }
        };
        let e = self.identity();
        for _ in 0..sample_count.max(1) {
            let x = self.sample_lattice_element(&mut rng, 5);
            let y = self.sample_lattice_element(&mut rng, 5);
            let z = self.sample_lattice_element(&mut rng, 5);

            let xy = self.multiply(&x, &y);
            if self.multiply(&xy, &z) != self.multiply(&x, &self.multiply(&y, &z)) {
                fail(
                    &mut failures,
                    "associativity",
                    format!("x={} y={} z={}", x.describe(), y.describe(), z.describe()),
                );
            }
            if self.multiply(&x, &e) != x {
                fail(&mut failures, "right identity", format!("x={}", x.describe()));
            }
            if self.multiply(&e, &x) != x {
                fail(&mut failures, "left identity", format!("x={}", x.describe()));
            }
            let xi = self.inverse(&x);
            if self.multiply(&x, &xi) != e {
                fail(&mut failures, "right inverse", format!("x={}", x.describe()));
            }
            if self.multiply(&xi, &x) != e {
                fail(&mut failures, "left inverse", format!("x={}", x.describe()));
            }
            if !xy.is_lattice() {
                fail(
                    &mut failures,
                    "lattice closure under multiplication",
                    format!("x={} y={}", x.describe(), y.describe()),
                );
            }
            if !xi.is_lattice() {
                fail(
                    &mut failures,
                    "lattice closure under inversion",
                    format!("x={}", x.describe()),
                );
            }
        }
        AxiomReport { samples: sample_count, failures }
    }
}

/// Deterministic sampler for rational-coordinate elements, used by tests
/// and validation reports.
pub fn sample_rational_element<R: Rng>(
    p: &GroupPresentation,
    rng: &mut R,
    bound: i64,
    max_denominator: i64,
) -> GroupElement {
    let layers = p
        .ranks()
        .iter()
        .map(|&k| {
            (0..k)
                .map(|_| {
                    let n = rng.gen_range(-bound..=bound);
                    let d = rng.gen_range(1..=max_denominator);
                    Rational::new(BigInt::from(n), BigInt::from(d))
                })
                .collect()
        })
        .collect();
    p.element(layers).expect("shape by construction")
}

/// Deterministic sampler for lattice elements in a coordinate box.
pub fn sample_lattice_element_seeded(
    p: &GroupPresentation,
    rng: &mut ChaCha8Rng,
    bound: i64,
) -> GroupElement {
    let layers: Vec<Vec<Rational>> = p
        .ranks()
        .iter()
        .map(|&k| {
            (0..k)
                .map(|_| Rational::from_integer(BigInt::from(rng.gen_range(-bound..=bound))))
                .collect()
        })
        .collect();
    p.element(layers).expect("shape by construction")
}

pub fn big_to_i64(v: &BigInt) -> Option<i64> {
    v.to_i64()
}
