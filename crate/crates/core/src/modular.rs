//! Modular automorphisms: Dehn twists along edges of a graph of groups and
//! the unimodular automorphisms `α_n` of abelian flats.

use std::fmt;

use num_bigint::BigInt;

use crate::error::{input, Error, Result};
use crate::gog::{APath, Element, GraphOfGroups};
use crate::lattice::IntMatrix;
use crate::words::Word;

/// Dehn twist along the oriented edge `edge` by the edge-group element with
/// coordinates `g`. Edge groups here are abelian, so every element is central.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DehnTwist {
    pub edge: usize,
    pub g: Vec<i64>,
}

impl DehnTwist {
    pub fn new(gog: &GraphOfGroups, edge_id: &str, g: Vec<i64>) -> Result<Self> {
        let edge = gog
            .graph()
            .edge_index(edge_id)
            .ok_or_else(|| Error::Input(format!("unknown edge `{edge_id}`")))?;
        let rank = gog.edge_group(edge).rank();
        if g.len() != rank {
            return Err(Error::DimensionMismatch { expected: rank, got: g.len() });
        }
        Ok(DehnTwist { edge, g })
    }

    pub fn inverse(&self) -> DehnTwist {
        self.pow(-1)
    }

    pub fn pow(&self, k: i64) -> DehnTwist {
        DehnTwist { edge: self.edge, g: self.g.iter().map(|x| x * k).collect() }
    }

    /// The label substitution: `ω_e(g)` in front of labels after `e`,
    /// `α_e(g⁻¹)` in front of labels after `ē`.
    pub fn labels(&self, gog: &GraphOfGroups) -> LabelTwist {
        let neg: Vec<i64> = self.g.iter().map(|x| -x).collect();
        LabelTwist {
            edge: self.edge,
            forward: gog.omega_image(self.edge, &self.g),
            reverse: gog.alpha_image(self.edge, &neg),
        }
    }
}

/// A raw label substitution along an edge. Dehn twists are the instances
/// with `forward = ω_e(g)` and `reverse = α_e(g⁻¹)`; other choices generally
/// do not induce automorphisms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabelTwist {
    pub edge: usize,
    /// Element of the vertex group at `ω(e)`.
    pub forward: Element,
    /// Element of the vertex group at `α(e)`.
    pub reverse: Element,
}

impl LabelTwist {
    pub fn inverse(&self, gog: &GraphOfGroups) -> LabelTwist {
        let g = gog.graph();
        LabelTwist {
            edge: self.edge,
            forward: gog.vertex_group(g.omega(self.edge)).inverse(&self.forward),
            reverse: gog.vertex_group(g.alpha(self.edge)).inverse(&self.reverse),
        }
    }

    /// Substitutes labels and returns the normal form.
    pub fn apply(&self, gog: &GraphOfGroups, p: &APath) -> Result<APath> {
        gog.check_path(p)?;
        if self.edge >= gog.graph().edge_count() {
            return input("twist edge is not an edge of the graph");
        }
        let mut out = p.clone();
        for (i, &e) in p.edges.iter().enumerate() {
            let prefix = if e == self.edge {
                &self.forward
            } else if e == self.edge ^ 1 {
                &self.reverse
            } else {
                continue;
            };
            let grp = gog.vertex_group(gog.graph().omega(e));
            out.labels[i + 1] = grp.mul(prefix, &p.labels[i + 1]);
        }
        gog.normal_form(&out)
    }

    pub fn apply_word(&self, gog: &GraphOfGroups, w: &Word) -> Result<Word> {
        gog.path_to_word(&self.apply(gog, &gog.word_to_path(w)?)?)
    }

    /// True iff every relator of the presentation maps to a trivial element
    /// and the twist followed by its inverse fixes every generator.
    pub fn verify(&self, gog: &GraphOfGroups) -> Result<bool> {
        let pres = gog.presentation()?;
        for r in &pres.relators {
            let nf = self.apply(gog, &gog.word_to_path(r)?)?;
            if !(nf.edges.is_empty() && nf.labels[0].is_identity()) {
                return Ok(false);
            }
        }
        let inv = self.inverse(gog);
        for name in &pres.generators {
            let p = gog.word_to_path(&Word::generator(name))?;
            let back = inv.apply(gog, &self.apply(gog, &p)?)?;
            if back != gog.normal_form(&p)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

pub fn apply_twist(gog: &GraphOfGroups, t: &DehnTwist, p: &APath) -> Result<APath> {
    t.labels(gog).apply(gog, p)
}

pub fn twist_word(gog: &GraphOfGroups, t: &DehnTwist, w: &Word) -> Result<Word> {
    t.labels(gog).apply_word(gog, w)
}

pub fn verify_twist_automorphism(gog: &GraphOfGroups, t: &DehnTwist) -> Result<bool> {
    t.labels(gog).verify(gog)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlatVariant {
    /// `k_j ↦ k_j`, `b_j ↦ Σ_{i≤j} n^{j−i} b_i + n^j Σ_l k_l`.
    WithK,
    /// `z_j ↦ Σ_{i≤j} n^{j−i} z_i`.
    PureB,
}

/// Matrix of `α_n` acting on column vectors over the basis `k₁…k_p, b₁…b_m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatAutomorphism {
    pub n: u64,
    pub k_dim: usize,
    pub b_dim: usize,
    pub matrix: IntMatrix,
}

impl fmt::Display for FlatAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.matrix.fmt(f)
    }
}

pub fn flat_automorphism(n: u64, k_dim: usize, b_dim: usize, variant: FlatVariant) -> Result<FlatAutomorphism> {
    if n == 0 {
        return input("n must be positive");
    }
    if variant == FlatVariant::PureB && k_dim != 0 {
        return input("the pure variant has no K-block");
    }
    let dim = k_dim + b_dim;
    let mut m = IntMatrix::identity(dim);
    let n = BigInt::from(n);
    for j in 1..=b_dim {
        for i in 1..=j {
            m[(k_dim + i - 1, k_dim + j - 1)] = n.pow((j - i) as u32);
        }
        for l in 0..k_dim {
            m[(l, k_dim + j - 1)] = n.pow(j as u32);
        }
    }
    Ok(FlatAutomorphism { n: n.try_into().expect("fits"), k_dim, b_dim, matrix: m })
}

pub fn compose(a: &IntMatrix, b: &IntMatrix) -> Result<IntMatrix> {
    a.mul(b)
}

pub fn invert(a: &IntMatrix) -> Result<IntMatrix> {
    a.unimodular_inverse()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::tests::bareiss_det;
    use proptest::prelude::*;

    const BS12: &str = "vertex v free 1 a\nedge t T v v cyclic alpha=a omega=a^2\n";
    const DOUBLE: &str =
        "vertex u free 2 a b\nvertex w free 2 c d\nedge e E u w cyclic alpha=a b a^-1 b^-1 omega=c d c^-1 d^-1\n";
    const HNN: &str = "vertex v free 2 a b\nedge t T v v cyclic alpha=a omega=b^2\n";

    fn gog(text: &str) -> GraphOfGroups {
        GraphOfGroups::parse(text).unwrap()
    }

    #[test]
    fn twist_misses_paths_without_the_edge() {
        let g = gog(DOUBLE);
        let t = DehnTwist::new(&g, "e", vec![1]).unwrap();
        let p = g.parse_path("u: a b").unwrap();
        assert_eq!(apply_twist(&g, &t, &p).unwrap(), g.normal_form(&p).unwrap());
    }

    #[test]
    fn twist_in_a_double_conjugates_the_far_side() {
        let g = gog(DOUBLE);
        let t = DehnTwist::new(&g, "e", vec![1]).unwrap();
        let p = g.parse_path("u: 1 ; e ; c ; E ; 1").unwrap();
        // direct substitution: (1, e, ω(w)·c, ē, α(w⁻¹))
        let direct = g.parse_path("u: 1 ; e ; c d c^-1 d^-1 c ; E ; b a b^-1 a^-1").unwrap();
        assert_eq!(apply_twist(&g, &t, &p).unwrap(), g.normal_form(&direct).unwrap());
        let back = apply_twist(&g, &t.inverse(), &apply_twist(&g, &t, &p).unwrap()).unwrap();
        assert_eq!(back, g.normal_form(&p).unwrap());
        // as words: the far-side letter is conjugated by w = [a,b]
        let w = twist_word(&g, &t, &Word::parse("c").unwrap()).unwrap();
        let expect = Word::parse("a b a^-1 b^-1 c b a b^-1 a^-1").unwrap();
        assert!(g.is_trivial(&w.mul(&expect.inverse())).unwrap());
    }

    #[test]
    fn verify_examples() {
        let g = gog(BS12);
        assert!(verify_twist_automorphism(&g, &DehnTwist::new(&g, "t", vec![0]).unwrap()).unwrap());
        assert!(verify_twist_automorphism(&g, &DehnTwist::new(&g, "t", vec![1]).unwrap()).unwrap());
        assert!(verify_twist_automorphism(&g, &DehnTwist::new(&g, "T", vec![-3]).unwrap()).unwrap());
        let g = gog(HNN);
        let t = g.graph().edge_index("t").unwrap();
        let bad = LabelTwist {
            edge: t,
            forward: Element::Free(Word::parse("a").unwrap()),
            reverse: Element::Free(Word::parse("a^-1").unwrap()),
        };
        assert!(!bad.verify(&g).unwrap());
        assert!(DehnTwist::new(&g, "x", vec![1]).is_err());
        assert!(DehnTwist::new(&g, "t", vec![1, 2]).is_err());
    }

    #[test]
    fn twists_preserve_triviality_and_add_up() {
        let g = gog(HNN);
        let t = DehnTwist::new(&g, "t", vec![1]).unwrap();
        let alphabet = crate::words::Alphabet::new(["a", "b", "t"]).unwrap();
        for w in alphabet.enumerate(4) {
            let tw = twist_word(&g, &t, &w).unwrap();
            assert_eq!(g.is_trivial(&w).unwrap(), g.is_trivial(&tw).unwrap(), "{w}");
        }
        for name in ["a", "b", "t"] {
            let p = g.word_to_path(&Word::generator(name)).unwrap();
            for (a, b) in [(1, 2), (-1, 3), (2, -2)] {
                let two = apply_twist(&g, &t.pow(b), &apply_twist(&g, &t.pow(a), &p).unwrap()).unwrap();
                assert_eq!(two, apply_twist(&g, &t.pow(a + b), &p).unwrap());
            }
        }
    }

    #[test]
    fn flat_examples() {
        let a = flat_automorphism(3, 0, 2, FlatVariant::PureB).unwrap();
        assert_eq!(a.matrix, IntMatrix::from_rows(&[vec![1, 3], vec![0, 1]]).unwrap());
        let a = flat_automorphism(2, 1, 1, FlatVariant::WithK).unwrap();
        assert_eq!(a.matrix, IntMatrix::from_rows(&[vec![1, 2], vec![0, 1]]).unwrap());
        let a = flat_automorphism(2, 1, 2, FlatVariant::WithK).unwrap();
        assert_eq!(a.to_string(), "1 2 4; 0 1 2; 0 0 1");
        assert!(flat_automorphism(2, 1, 2, FlatVariant::PureB).is_err());
        assert!(flat_automorphism(0, 0, 2, FlatVariant::PureB).is_err());
        let m = IntMatrix::from_rows(&[vec![1, 5], vec![0, 1]]).unwrap();
        assert_eq!(invert(&m).unwrap(), IntMatrix::from_rows(&[vec![1, -5], vec![0, 1]]).unwrap());
    }

    #[test]
    fn flat_matrices_are_unitriangular() {
        for n in 1..=10 {
            for (k, b, v) in [(0, 4, FlatVariant::PureB), (2, 3, FlatVariant::WithK)] {
                let m = flat_automorphism(n, k, b, v).unwrap().matrix;
                assert_eq!(bareiss_det(&m), BigInt::from(1));
                for i in 0..m.rows() {
                    assert_eq!(m[(i, i)], BigInt::from(1));
                    for j in 0..i {
                        assert_eq!(m[(i, j)], BigInt::from(0));
                    }
                }
                assert!(compose(&m, &invert(&m).unwrap()).unwrap().is_identity());
            }
        }
    }

    proptest! {
        #[test]
        fn unimodular_products_stay_unimodular(ns in proptest::collection::vec((1u64..6, 0usize..2), 1..5)) {
            let mut acc = IntMatrix::identity(3);
            for (n, k) in ns {
                let variant = if k == 0 { FlatVariant::PureB } else { FlatVariant::WithK };
                let a = flat_automorphism(n, k, 3 - k, variant).unwrap().matrix;
                acc = compose(&acc, &invert(&a).unwrap()).unwrap();
                acc = compose(&a, &acc).unwrap();
                acc = compose(&acc, &a).unwrap();
            }
            prop_assert_eq!(bareiss_det(&acc).magnitude().clone(), num_bigint::BigUint::from(1u32));
        }
    }
}
