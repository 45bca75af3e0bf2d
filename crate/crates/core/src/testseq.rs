//! Parametric homomorphism families and explicit test-sequence
//! constructions.
//!
//! Limit conditions ("dominates the growth", "stable kernel") are only ever
//! sampled on a finite range of indices. A passing report is evidence, not
//! a proof.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::RangeInclusive;

use num_rational::Ratio;

use crate::error::{input, Error, Result};
use crate::target::{GroupHom, Target};
use crate::words::{is_identifier, Word};

/// Integer polynomial `c₀ + c₁n + c₂n² + …` in the index `n`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ExponentPoly(Vec<i64>);

impl ExponentPoly {
    pub fn new(mut coeffs: Vec<i64>) -> Self {
        while coeffs.last() == Some(&0) {
            coeffs.pop();
        }
        ExponentPoly(coeffs)
    }

    pub fn constant(c: i64) -> Self {
        ExponentPoly::new(vec![c])
    }

    pub fn coefficients(&self) -> &[i64] {
        &self.0
    }

    pub fn eval(&self, n: u64) -> Result<i64> {
        let n = i128::from(n);
        let mut acc: i128 = 0;
        for &c in self.0.iter().rev() {
            acc = acc
                .checked_mul(n)
                .and_then(|x| x.checked_add(i128::from(c)))
                .ok_or_else(|| Error::Input("exponent overflow".into()))?;
        }
        i64::try_from(acc).map_err(|_| Error::Input("exponent overflow".into()))
    }
}

/// An exponent as a function of `n`: a closed-form polynomial or a table of
/// values where only inequalities pin it down.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Exponent {
    Poly(ExponentPoly),
    Table(BTreeMap<u64, i64>),
}

impl Exponent {
    pub fn eval(&self, n: u64) -> Result<i64> {
        match self {
            Exponent::Poly(p) => p.eval(n),
            Exponent::Table(t) => t.get(&n).copied().ok_or_else(|| Error::Input(format!("no table entry for n = {n}"))),
        }
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Exponent::Poly(p) => {
                let cs: Vec<String> = p.0.iter().map(i64::to_string).collect();
                write!(f, "[{}]", if cs.is_empty() { "0".to_string() } else { cs.join(" ") })
            }
            Exponent::Table(t) => {
                let es: Vec<String> = t.iter().map(|(n, k)| format!("{n}:{k}")).collect();
                write!(f, "@{{{}}}", es.join(", "))
            }
        }
    }
}

/// Product of factors `base^{e(n)}`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct ParametricWord {
    factors: Vec<(Word, Exponent)>,
}

impl ParametricWord {
    pub fn new(factors: Vec<(Word, Exponent)>) -> Result<Self> {
        if factors.iter().any(|(b, _)| b.is_identity()) {
            return input("parametric word bases must be non-trivial");
        }
        Ok(ParametricWord { factors })
    }

    pub fn power(base: Word, e: Exponent) -> Result<Self> {
        ParametricWord::new(vec![(base, e)])
    }

    pub fn factors(&self) -> &[(Word, Exponent)] {
        &self.factors
    }

    /// Parses `(<word>)^[c0 c1 c2] (<word>)^@{1:3, 2:5} (<word>)`.
    pub fn parse(text: &str) -> Result<Self> {
        let mut factors = Vec::new();
        let mut rest = text.trim();
        let err = |m: &str| Error::Parse(format!("parametric word: {m}"));
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| err("expected `(`"))?;
            let close = body.find(')').ok_or_else(|| err("missing `)`"))?;
            let base = Word::parse(&body[..close])?;
            rest = body[close + 1..].trim_start();
            let exp = if let Some(r) = rest.strip_prefix("^[") {
                let end = r.find(']').ok_or_else(|| err("missing `]`"))?;
                let cs = r[..end]
                    .split_whitespace()
                    .map(|c| c.parse::<i64>().map_err(|_| err("bad coefficient")))
                    .collect::<Result<Vec<_>>>()?;
                rest = r[end + 1..].trim_start();
                Exponent::Poly(ExponentPoly::new(cs))
            } else if let Some(r) = rest.strip_prefix("^@{") {
                let end = r.find('}').ok_or_else(|| err("missing `}`"))?;
                let mut table = BTreeMap::new();
                for entry in r[..end].split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let (n, k) = entry.split_once(':').ok_or_else(|| err("table entries are `n:k`"))?;
                    let n = n.trim().parse().map_err(|_| err("bad table index"))?;
                    let k = k.trim().parse().map_err(|_| err("bad table value"))?;
                    table.insert(n, k);
                }
                rest = r[end + 1..].trim_start();
                Exponent::Table(table)
            } else {
                Exponent::Poly(ExponentPoly::constant(1))
            };
            factors.push((base, exp));
        }
        ParametricWord::new(factors)
    }

    pub fn eval(&self, n: u64) -> Result<Word> {
        let mut out = Word::identity();
        for (base, e) in &self.factors {
            out = out.mul(&base.pow(e.eval(n)?));
        }
        Ok(out)
    }
}

impl fmt::Display for ParametricWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.factors.iter().map(|(b, e)| format!("({b})^{e}")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// A family `n ↦ λ_n` of homomorphisms given by parametric generator images.
#[derive(Clone, Debug)]
pub struct ParametricHom {
    images: BTreeMap<String, ParametricWord>,
    pub target: Target,
}

impl ParametricHom {
    pub fn new(images: impl IntoIterator<Item = (String, ParametricWord)>, target: Target) -> Self {
        ParametricHom { images: images.into_iter().collect(), target }
    }

    /// One `name = <parametric word>` per line; `#` starts a comment.
    pub fn parse(text: &str, target: Target) -> Result<Self> {
        let mut images = BTreeMap::new();
        for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()).filter(|l| !l.is_empty()) {
            let (name, pw) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected `name = word`, got `{line}`")))?;
            let name = name.trim();
            if !is_identifier(name) {
                return Err(Error::Parse(format!("bad generator name `{name}`")));
            }
            if images.insert(name.to_string(), ParametricWord::parse(pw)?).is_some() {
                return Err(Error::Parse(format!("`{name}` assigned twice")));
            }
        }
        Ok(ParametricHom { images, target })
    }

    pub fn image(&self, name: &str) -> Option<&ParametricWord> {
        self.images.get(name)
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.images.keys().map(String::as_str)
    }

    /// The member `λ_n`.
    pub fn evaluate(&self, n: u64) -> Result<GroupHom> {
        if n == 0 {
            return input("n must be positive");
        }
        let images = self
            .images
            .iter()
            .map(|(k, pw)| Ok((k.clone(), pw.eval(n)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupHom::new(images, self.target.clone()))
    }
}

pub fn evaluate(h: &ParametricHom, n: u64) -> Result<GroupHom> {
    h.evaluate(n)
}

/// `x y x y² x ⋯ x y^{nL} x`.
pub fn gen_merz_word(x: &Word, y: &Word, l: u64, n: u64) -> Result<Word> {
    if x.is_identity() || y.is_identity() {
        return input("x and y must be non-trivial");
    }
    let mut out = x.clone();
    for j in 1..=n * l {
        out = out.mul(&y.pow(j as i64)).mul(x);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    pub n: u64,
    pub min_a: usize,
    pub max_b: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthReport {
    pub rows: Vec<GrowthRow>,
    /// `max_b / min_a` strictly decreases along the range.
    pub decreasing: bool,
    /// `max_b / min_a < 1/n` at the right endpoint.
    pub below_inverse_n: bool,
}

impl GrowthReport {
    pub fn passes(&self) -> bool {
        self.decreasing && self.below_inverse_n
    }

    pub fn ratio(&self, row: &GrowthRow) -> Ratio<u64> {
        Ratio::new(row.max_b as u64, row.min_a as u64)
    }
}

/// Samples whether the `a` generators dominate the growth of the `b`
/// generators on `range`, measuring reduced word length of the images.
pub fn dominates_growth(
    h: &ParametricHom,
    a_gens: &[&str],
    b_gens: &[&str],
    range: RangeInclusive<u64>,
) -> Result<GrowthReport> {
    if a_gens.is_empty() || b_gens.is_empty() {
        return input("both generator sets must be non-empty");
    }
    if a_gens.iter().any(|a| b_gens.contains(a)) {
        return input("generator sets must be disjoint");
    }
    if range.is_empty() || *range.start() == 0 {
        return input("range must be a non-empty interval of positive integers");
    }
    let mut rows = Vec::new();
    for n in range {
        let lam = h.evaluate(n)?;
        let len = |g: &str| -> Result<usize> {
            lam.image(g).map(Word::len).ok_or_else(|| Error::UnknownGenerator(g.to_string()))
        };
        let mut min_a = usize::MAX;
        for a in a_gens {
            let l = len(a)?;
            if l == 0 {
                return input(format!("image of `{a}` is trivial at n = {n}"));
            }
            min_a = min_a.min(l);
        }
        let max_b = b_gens.iter().map(|b| len(b)).collect::<Result<Vec<_>>>()?.into_iter().max().unwrap_or(0);
        rows.push(GrowthRow { n, min_a, max_b });
    }
    let ratio = |r: &GrowthRow| Ratio::new(r.max_b as u128, r.min_a as u128);
    let decreasing = rows.windows(2).all(|w| ratio(&w[1]) < ratio(&w[0]));
    let last = rows.last().expect("non-empty range");
    let below_inverse_n = (last.max_b as u128) * u128::from(last.n) < last.min_a as u128;
    Ok(GrowthReport { rows, decreasing, below_inverse_n })
}

/// `λ_n(a_i) = w^{k_n^i}` with `k_n^1` least such that `|w^{k_n^1}| > n·dist(n)`
/// and `k_n^i` least such that `|w^{k_n^i}| > n·|w^{k_n^{i−1}}|`, tabulated for
/// `n ∈ [1, n_max]`. Generators are named `a1 … ak`.
pub fn abelian_flat_sequence(w: &Word, k: usize, dist: impl Fn(u64) -> u64, n_max: u64) -> Result<ParametricHom> {
    if w.is_identity() || !w.is_cyclically_reduced() {
        return input("w must be non-trivial and cyclically reduced");
    }
    let len = w.len() as u64;
    let mut tables: Vec<BTreeMap<u64, i64>> = vec![BTreeMap::new(); k];
    for n in 1..=n_max {
        // |w^j| = j·|w| since w is cyclically reduced
        let mut bound = n * dist(n);
        for table in tables.iter_mut() {
            let kn = bound / len + 1;
            table.insert(n, kn as i64);
            bound = n * kn * len;
        }
    }
    let images = tables
        .into_iter()
        .enumerate()
        .map(|(i, t)| Ok((format!("a{}", i + 1), ParametricWord::power(w.clone(), Exponent::Table(t))?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ParametricHom::new(images, Target::Free))
}

/// `m·s + t` for every `m`.
pub fn progression_exponents(s: i64, t: i64, ms: &[i64]) -> Vec<i64> {
    ms.iter().map(|m| m * s + t).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum KernelClass {
    AllTrivial,
    AllNontrivial,
    /// Triviality per index of the range.
    Mixed(Vec<bool>),
}

impl fmt::Display for KernelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelClass::AllTrivial => f.write_str("all-trivial"),
            KernelClass::AllNontrivial => f.write_str("all-nontrivial"),
            KernelClass::Mixed(v) => {
                let bits: String = v.iter().map(|&b| if b { '1' } else { '0' }).collect();
                write!(f, "mixed {bits}")
            }
        }
    }
}

/// Classifies each word by whether `λ_n` kills it for the `n` in `range`.
/// This is a finite sample, not a decision of the stable kernel.
pub fn stable_kernel_sample(h: &ParametricHom, words: &[Word], range: RangeInclusive<u64>) -> Result<Vec<KernelClass>> {
    let homs = range.map(|n| h.evaluate(n)).collect::<Result<Vec<_>>>()?;
    words
        .iter()
        .map(|w| {
            let bits = homs
                .iter()
                .map(|lam| lam.target.is_trivial(&lam.apply(w)?))
                .collect::<Result<Vec<bool>>>()?;
            Ok(if bits.iter().all(|&b| b) {
                KernelClass::AllTrivial
            } else if bits.iter().all(|&b| !b) {
                KernelClass::AllNontrivial
            } else {
                KernelClass::Mixed(bits)
            })
        })
        .collect()
}

/// Least `K ∈ [1, bound]` such that `a₀ z^{i₁} a₁ ⋯ z^{i_k} a_k ≠ 1` in the
/// free group whenever every `|i_j| ∈ [K, bound]`, or `None`.
pub fn baumslag_threshold(parts: &[Word], z: &Word, bound: u64) -> Result<Option<u64>> {
    if z.is_identity() {
        return input("z must be non-trivial");
    }
    if parts.is_empty() {
        return input("need at least a₀");
    }
    let k = parts.len() - 1;
    let b = bound as i64;
    let mut needed: u64 = 1;
    let mut exps = vec![-b; k];
    if bound == 0 {
        return Ok(None);
    }
    loop {
        if exps.iter().all(|&i| i != 0) {
            let mut w = parts[0].clone();
            for (j, &i) in exps.iter().enumerate() {
                w = w.mul(&z.pow(i)).mul(&parts[j + 1]);
            }
            if w.is_identity() {
                let m = exps.iter().map(|i| i.unsigned_abs()).min().unwrap_or(u64::MAX);
                needed = needed.max(m.saturating_add(1));
            }
        }
        // next vector in [-b, b]^k
        let mut j = 0;
        while j < k && exps[j] == b {
            exps[j] = -b;
            j += 1;
        }
        if j == k {
            break;
        }
        exps[j] += 1;
    }
    Ok((needed <= bound).then_some(needed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{check_cprime, pieces, Cprime};
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s).unwrap()
    }

    #[test]
    fn merz_word_examples() {
        assert_eq!(gen_merz_word(&w("a"), &w("b"), 1, 2).unwrap().to_string(), "a b a b^2 a");
        assert_eq!(gen_merz_word(&w("a"), &w("b"), 0, 4).unwrap(), w("a"));
        assert!(gen_merz_word(&w("1"), &w("b"), 1, 1).is_err());
        // b^3 a b^4 recurs inside b^4 a b^5, so L = 1 is too short for C'(1/5)
        let w5 = gen_merz_word(&w("a"), &w("b"), 1, 5).unwrap();
        assert!(!check_cprime(std::slice::from_ref(&w5), Ratio::new(1, 5)).unwrap().holds());
        assert!(w5.contains_subword(&w("b^4 a b^5")) && w5.contains_subword(&w("b^3 a b^4")));
        let w5 = gen_merz_word(&w("a"), &w("b"), 4, 5).unwrap();
        assert!(check_cprime(&[w5], Ratio::new(1, 5)).unwrap().holds());
    }

    #[test]
    fn merz_word_lengths() {
        for n in 1..=10u64 {
            for l in 1..=3u64 {
                let m = n * l;
                let expect = (m + 1) + m * (m + 1) / 2;
                assert_eq!(gen_merz_word(&w("a"), &w("b"), l, n).unwrap().len() as u64, expect);
                let wide = gen_merz_word(&w("a c"), &w("b d^-1"), l, n).unwrap();
                assert_eq!(wide.len() as u64, 2 * (m + 1) + m * (m + 1));
            }
        }
    }

    /// Longest common subword of the cyclic word and its inverse/other
    /// positions by brute force over all subword pairs.
    fn longest_piece_brute(r: &Word) -> usize {
        let cyc = |x: &Word, i: usize, l: usize| -> Vec<(String, bool)> {
            (0..l)
                .map(|t| {
                    let g = &x.letters()[(i + t) % x.len()];
                    (g.name().to_string(), g.is_inverse())
                })
                .collect()
        };
        let n = r.len();
        let inv = r.inverse();
        let mut best = 0;
        for l in 1..n {
            for i in 0..n {
                let s = cyc(r, i, l);
                let again = (0..n).any(|j| j != i && cyc(r, j, l) == s) || (0..n).any(|j| cyc(&inv, j, l) == s);
                if again {
                    best = best.max(l);
                }
            }
        }
        best
    }

    #[test]
    fn merz_word_longest_piece() {
        for l in 1..=4u64 {
            for n in 2..=8u64 {
                let r = gen_merz_word(&w("a"), &w("b"), l, n).unwrap();
                let longest = pieces(std::slice::from_ref(&r)).iter().map(Word::len).max().unwrap_or(0);
                if n * l <= 5 {
                    assert_eq!(longest, longest_piece_brute(&r));
                }
                // b^{nL-2} a b^{nL-1} recurs inside b^{nL-1} a b^{nL}
                assert_eq!(longest as u64, 2 * n * l - 2);
                let holds = check_cprime(std::slice::from_ref(&r), Ratio::new(1, n as i64)).unwrap().holds();
                assert_eq!(holds, n as usize * longest < r.len());
                if l == 4 {
                    assert!(holds);
                }
            }
        }
        let r = gen_merz_word(&w("a"), &w("b"), 1, 2).unwrap();
        assert!(check_cprime(&[r], Ratio::new(1, 2)).unwrap().holds());
        let r = gen_merz_word(&w("a"), &w("b"), 1, 3).unwrap();
        assert!(matches!(check_cprime(&[r], Ratio::new(1, 10)).unwrap(), Cprime::Fails { .. }));
    }

    #[test]
    fn parametric_words() {
        let pw = ParametricWord::parse("(a b)^[0 0 1]").unwrap();
        assert_eq!(pw.eval(3).unwrap(), w("a b").pow(9));
        let pw = ParametricWord::parse("(a)^[1 1] (b)^@{1:2, 2:5} (c)").unwrap();
        assert_eq!(pw.eval(2).unwrap(), w("a^3 b^5 c"));
        assert!(pw.eval(3).is_err());
        assert_eq!(pw.to_string(), "(a)^[1 1] (b)^@{1:2, 2:5} (c)^[1]");
        assert_eq!(ParametricWord::parse("").unwrap().eval(4).unwrap(), Word::identity());
        assert!(ParametricWord::parse("(1)^[2]").is_err());
        assert!(ParametricWord::parse("(a)^[x]").is_err());
        assert_eq!(ExponentPoly::new(vec![1, 0, 0]).coefficients(), &[1]);
        assert_eq!(ExponentPoly::new(vec![-2, 0, 1]).eval(3).unwrap(), 7);
    }

    #[test]
    fn evaluate_matches_repeated_multiplication() {
        let h = ParametricHom::parse("a = (x y)^[0 0 1]\nb = (y)^[-1 1] (x)^[2]", Target::Free).unwrap();
        for n in 1..=6u64 {
            let lam = h.evaluate(n).unwrap();
            let mut a = Word::identity();
            for _ in 0..n * n {
                a = a.mul(&w("x y"));
            }
            assert_eq!(lam.image("a").unwrap(), &a);
            assert_eq!(lam.image("b").unwrap().len() as u64, n - 1 + 2);
        }
        assert!(h.evaluate(0).is_err());
        let empty = ParametricHom::parse("a = ", Target::Free).unwrap();
        assert_eq!(empty.evaluate(2).unwrap().image("a").unwrap(), &Word::identity());
    }

    #[test]
    fn growth_examples() {
        let h = ParametricHom::parse("a = (x y)^[0 0 0 1]\nb = (x y)^[0 1]", Target::Free).unwrap();
        let r = dominates_growth(&h, &["a"], &["b"], 2..=10).unwrap();
        for row in &r.rows {
            assert_eq!(row.min_a as u64, 2 * row.n.pow(3));
            assert_eq!(row.max_b as u64, 2 * row.n);
        }
        assert!(r.passes());
        let h = ParametricHom::parse("a = (x y)\nb = (x y)", Target::Free).unwrap();
        assert!(!dominates_growth(&h, &["a"], &["b"], 2..=10).unwrap().passes());
        let h = ParametricHom::parse("a = (x)^[-2 1]\nb = (x)", Target::Free).unwrap();
        assert!(dominates_growth(&h, &["a"], &["b"], 1..=4).is_err());
        assert!(dominates_growth(&h, &["a"], &["a"], 3..=4).is_err());
    }

    #[test]
    fn flat_sequence_examples() {
        let h = abelian_flat_sequence(&w("a b"), 2, |n| n, 20).unwrap();
        for n in 1..=20u64 {
            let lam = h.evaluate(n).unwrap();
            let k1 = lam.image("a1").unwrap().len() as u64 / 2;
            // least k with 2k > n²
            let oracle = (1..).find(|k| 2 * k > n * n).unwrap();
            assert_eq!(k1, oracle);
            assert_eq!(k1, n * n / 2 + 1);
        }
        let one = abelian_flat_sequence(&w("a b"), 1, |n| n, 5).unwrap();
        assert_eq!(one.domain().collect::<Vec<_>>(), ["a1"]);
        assert!(abelian_flat_sequence(&w("a b a^-1"), 1, |n| n, 5).is_err());
        for i in 2..=3 {
            let h = abelian_flat_sequence(&w("a b"), 3, |n| n, 20).unwrap();
            let (a, b) = (format!("a{i}"), format!("a{}", i - 1));
            assert!(dominates_growth(&h, &[&a], &[&b], 1..=20).unwrap().passes());
        }
    }

    #[test]
    fn progressions() {
        assert_eq!(progression_exponents(3, 2, &[0, 1, 2]), [2, 5, 8]);
        assert_eq!(progression_exponents(0, 4, &[0, 7, -1]), [4, 4, 4]);
        assert!(progression_exponents(3, 2, &[-5, 9, 13]).iter().all(|e| e.rem_euclid(3) == 2));
    }

    #[test]
    fn kernel_examples() {
        let h = ParametricHom::parse("a = (x)^[0 1]\nb = (x)", Target::Free).unwrap();
        let c = stable_kernel_sample(&h, &[w("a b a^-1 b^-1"), w("a b^-1"), w("a")], 1..=5).unwrap();
        assert_eq!(c[0], KernelClass::AllTrivial);
        assert_eq!(c[1], KernelClass::Mixed(vec![true, false, false, false, false]));
        assert_eq!(c[1].to_string(), "mixed 10000");
        assert_eq!(c[2], KernelClass::AllNontrivial);
        let c = stable_kernel_sample(&h, &[w("a b^-1")], 2..=10).unwrap();
        assert_eq!(c[0], KernelClass::AllNontrivial);
    }

    /// Exhaustive reduction over every exponent vector; the threshold is the
    /// least K with no trivial word among vectors with all |i| ≥ K.
    fn threshold_oracle(parts: &[Word], z: &Word, bound: i64) -> Option<u64> {
        let k = parts.len() - 1;
        let vectors: Vec<Vec<i64>> = (0..k).fold(vec![vec![]], |acc, _| {
            acc.into_iter()
                .flat_map(|v| (-bound..=bound).filter(|&i| i != 0).map(move |i| [v.clone(), vec![i]].concat()))
                .collect()
        });
        (1..=bound as u64).find(|&kk| {
            vectors.iter().filter(|v| v.iter().all(|i| i.unsigned_abs() >= kk)).all(|v| {
                let mut word = parts[0].clone();
                for (j, &i) in v.iter().enumerate() {
                    word = word.mul(&z.pow(i)).mul(&parts[j + 1]);
                }
                !word.is_identity()
            })
        })
    }

    #[test]
    fn baumslag_examples() {
        let e = Word::identity();
        assert_eq!(baumslag_threshold(&[e.clone(), e.clone()], &w("a"), 5).unwrap(), Some(1));
        assert_eq!(baumslag_threshold(&[e.clone(), w("b"), e.clone()], &w("a"), 5).unwrap(), Some(1));
        let patho = [e.clone(), w("a^-1"), e.clone()];
        assert_eq!(baumslag_threshold(&patho, &w("a"), 4).unwrap(), threshold_oracle(&patho, &w("a"), 4));
        let patho = [w("b"), w("b^-1"), w("b")];
        assert_eq!(baumslag_threshold(&patho, &w("a"), 4).unwrap(), threshold_oracle(&patho, &w("a"), 4));
        assert_eq!(baumslag_threshold(&[w("a^3"), w("a^-3")], &w("a"), 4).unwrap(), Some(1));
        // a^3 a^i a is trivial at i = -4
        assert_eq!(baumslag_threshold(&[w("a^3"), w("a")], &w("a"), 4).unwrap(), None);
        assert_eq!(baumslag_threshold(&[w("a^3"), w("a")], &w("a"), 5).unwrap(), Some(5));
        assert!(baumslag_threshold(&[e.clone()], &e, 3).is_err());
    }

    proptest! {
        #[test]
        fn threshold_matches_oracle(ps in proptest::collection::vec(0usize..5, 2..4), bound in 1i64..4) {
            let pool = ["1", "a", "a^-1", "b", "a^2"];
            let parts: Vec<Word> = ps.iter().map(|&i| w(pool[i])).collect();
            prop_assert_eq!(baumslag_threshold(&parts, &w("a"), bound as u64).unwrap(), threshold_oracle(&parts, &w("a"), bound));
        }

        #[test]
        fn progressions_hit_one_residue_class(s in 1i64..20, t in -30i64..30, start in -20i64..20) {
            let ms: Vec<i64> = (start..start + s).collect();
            let mut es: Vec<i64> = progression_exponents(s, t, &ms).iter().map(|e| (e - t) / s).collect();
            es.sort();
            prop_assert_eq!(&es, &ms);
            prop_assert!(progression_exponents(s, t, &ms).iter().all(|e| (e - t).rem_euclid(s) == 0));
        }

        #[test]
        fn flat_exponents_increase(len in 1usize..3, c in 1u64..4, k in 1usize..4) {
            let w0 = if len == 1 { w("a") } else { w("a b") };
            let h = abelian_flat_sequence(&w0, k, |n| c * n, 12).unwrap();
            let exps = |n: u64| -> Vec<usize> {
                let lam = h.evaluate(n).unwrap();
                (1..=k).map(|i| lam.image(&format!("a{i}")).unwrap().len() / len).collect()
            };
            for n in 1..=12u64 {
                let e = exps(n);
                prop_assert!(e.windows(2).all(|p| p[0] < p[1]));
                if n > 1 {
                    prop_assert!(exps(n - 1).iter().zip(&e).all(|(a, b)| a < b));
                }
            }
        }

        #[test]
        fn mixed_never_becomes_all_trivial(e1 in -3i64..4, e2 in -3i64..4, lo in 1u64..4, extra in 0u64..4) {
            let h = ParametricHom::parse("a = (x)^[0 1]\nb = (x)^[-2 1] (y)", Target::Free).unwrap();
            let word = w("a").pow(e1).mul(&w("b").pow(e2));
            let small = stable_kernel_sample(&h, std::slice::from_ref(&word), lo..=lo + 2).unwrap();
            let big = stable_kernel_sample(&h, std::slice::from_ref(&word), lo..=lo + 2 + extra).unwrap();
            if let KernelClass::Mixed(_) = small[0] {
                prop_assert!(matches!(big[0], KernelClass::Mixed(_)));
            }
        }
    }
}
