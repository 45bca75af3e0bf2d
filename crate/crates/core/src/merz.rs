//! Systems of equations `Σ(x, y, a) = 1` with inequalities `Ψ(x, y, a) ≠ 1`,
//! the group `G_Σ`, and checks for homomorphisms, retractions and formal
//! solutions.
//!
//! Everything here verifies certificates supplied by the caller. Nothing
//! searches for formal solutions, and [`sample_ae_sentence`] only ever
//! samples finitely many universal values.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{input, Error, Result};
use crate::gog::Presentation;
use crate::target::{GroupHom, Target};
use crate::words::{is_identifier, Alphabet, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqSystem {
    pub x_vars: Vec<String>,
    pub y_vars: Vec<String>,
    pub coeffs: Vec<String>,
    /// Relators `V(y, a)` of the base group.
    pub base: Vec<Word>,
    pub sigma: Vec<Word>,
    pub psi: Vec<Word>,
}

impl EqSystem {
    pub fn new(
        x_vars: Vec<String>,
        y_vars: Vec<String>,
        coeffs: Vec<String>,
        base: Vec<Word>,
        sigma: Vec<Word>,
        psi: Vec<Word>,
    ) -> Result<Self> {
        let mut seen = BTreeSet::new();
        for name in x_vars.iter().chain(&y_vars).chain(&coeffs) {
            if !is_identifier(name) {
                return Err(Error::Parse(format!("bad variable name `{name}`")));
            }
            if !seen.insert(name.as_str()) {
                return input(format!("variable `{name}` declared twice"));
            }
        }
        let ya: BTreeSet<&str> = y_vars.iter().chain(&coeffs).map(String::as_str).collect();
        for w in &base {
            if let Some(g) = w.generator_names().into_iter().find(|g| !ya.contains(g)) {
                return Err(Error::UnknownGenerator(g.to_string()));
            }
        }
        for w in sigma.iter().chain(&psi) {
            if let Some(g) = w.generator_names().into_iter().find(|g| !seen.contains(g)) {
                return Err(Error::UnknownGenerator(g.to_string()));
            }
        }
        Ok(EqSystem { x_vars, y_vars, coeffs, base, sigma, psi })
    }

    /// Sections `[xvars] [yvars] [coeffs] [V] [Sigma] [Psi]`; names are
    /// whitespace separated, words one per line, `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: BTreeMap<String, Vec<String>> = BTreeMap::new();
        let mut current: Option<String> = None;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if !["xvars", "yvars", "coeffs", "V", "Sigma", "Psi"].contains(&name) {
                    return Err(Error::Parse(format!("unknown section `[{name}]`")));
                }
                if sections.contains_key(name) {
                    return Err(Error::Parse(format!("section `[{name}]` repeated")));
                }
                sections.insert(name.to_string(), Vec::new());
                current = Some(name.to_string());
                continue;
            }
            let sec = current.as_ref().ok_or_else(|| Error::Parse("content before the first section".into()))?;
            sections.get_mut(sec).expect("section exists").push(line.to_string());
        }
        let names = |s: &str| -> Vec<String> {
            sections.get(s).map_or_else(Vec::new, |ls| {
                ls.iter().flat_map(|l| l.split_whitespace().map(str::to_string)).collect()
            })
        };
        let words = |s: &str| -> Result<Vec<Word>> {
            sections.get(s).map_or_else(|| Ok(Vec::new()), |ls| ls.iter().map(|l| Word::parse(l)).collect())
        };
        EqSystem::new(names("xvars"), names("yvars"), names("coeffs"), words("V")?, words("Sigma")?, words("Psi")?)
    }

    /// `x ∪ y ∪ a` in that order.
    pub fn generators(&self) -> Vec<String> {
        self.x_vars.iter().chain(&self.y_vars).chain(&self.coeffs).cloned().collect()
    }
}

/// `G_Σ = ⟨x, y, a | V(y, a), Σ(x, y, a)⟩`.
pub fn build_gsigma(sys: &EqSystem) -> Presentation {
    Presentation {
        generators: sys.generators(),
        relators: sys.base.iter().chain(&sys.sigma).cloned().collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomCheck {
    Ok,
    /// The first relator whose image is non-trivial.
    Fails { index: usize, relator: Word, image: Word },
}

impl HomCheck {
    pub fn is_ok(&self) -> bool {
        matches!(self, HomCheck::Ok)
    }
}

/// Whether `h` kills every relator, checked in the target of `h`.
pub fn verify_hom(h: &GroupHom, relators: &[Word]) -> Result<HomCheck> {
    for (index, r) in relators.iter().enumerate() {
        let image = h.apply(r)?;
        if !h.target.is_trivial(&image)? {
            return Ok(HomCheck::Fails { index, relator: r.clone(), image });
        }
    }
    Ok(HomCheck::Ok)
}

/// Whether `π(g) = g` as reduced words for every fixed generator. Returns
/// the first generator that moves.
pub fn verify_retraction(pi: &GroupHom, fixed: &[&str]) -> Result<Option<String>> {
    for g in fixed {
        let image = pi.image(g).ok_or_else(|| Error::UnknownGenerator(g.to_string()))?;
        if *image != Word::generator(g) {
            return Ok(Some(g.to_string()));
        }
    }
    Ok(None)
}

/// A candidate formal solution. `pi` maps `G_Σ` into the closure group (the
/// target), `iota` is the embedding of the `y ∪ a` part into the same group,
/// and `psi_spec` maps the closure group's generators to a free group.
#[derive(Clone, Debug)]
pub struct FormalCertificate {
    pub pi: GroupHom,
    pub iota: GroupHom,
    pub psi_spec: GroupHom,
}

impl FormalCertificate {
    /// Sections `[pi] [iota] [psispec]`, one `name -> word` per line.
    pub fn parse(text: &str, target: Target) -> Result<Self> {
        let mut sections: BTreeMap<String, String> = BTreeMap::new();
        let mut current: Option<String> = None;
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                if !["pi", "iota", "psispec"].contains(&name) {
                    return Err(Error::Parse(format!("unknown section `[{name}]`")));
                }
                sections.insert(name.to_string(), String::new());
                current = Some(name.to_string());
                continue;
            }
            let sec = current.as_ref().ok_or_else(|| Error::Parse("content before the first section".into()))?;
            let body = sections.get_mut(sec).expect("section exists");
            body.push_str(line);
            body.push('\n');
        }
        let get = |s: &str| sections.get(s).map(String::as_str).unwrap_or("");
        Ok(FormalCertificate {
            pi: GroupHom::parse(get("pi"), target.clone())?,
            iota: GroupHom::parse(get("iota"), target)?,
            psi_spec: GroupHom::parse(get("psispec"), Target::Free)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Clause {
    /// `Ψspec` is not a homomorphism on the target: relator index.
    PsiSpecHom(usize),
    /// `π` does not kill relator `index` of `G_Σ`.
    Relator(usize),
    /// `π` and `ι` disagree on this generator.
    Agreement(String),
    /// `Ψspec(π(v_j)) = 1` for inequality `index`.
    Inequality(usize),
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Clause::PsiSpecHom(i) => write!(f, "psispec does not kill target relator {i}"),
            Clause::Relator(i) => write!(f, "relator {i} survives under pi"),
            Clause::Agreement(g) => write!(f, "pi and iota disagree on {g}"),
            Clause::Inequality(i) => write!(f, "inequality {i} dies under psispec . pi"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormalReport {
    pub failures: Vec<Clause>,
}

impl FormalReport {
    pub fn passes(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Relators of the target group as seen by `Ψspec`.
fn target_relators(t: &Target) -> Result<Vec<Word>> {
    match t {
        Target::Free => Ok(Vec::new()),
        Target::Gog(g) => Ok(g.presentation()?.relators),
    }
}

/// Checks (i) `π` kills the relators of `G_Σ`, (ii) `π` agrees with `ι` on
/// `y ∪ a` in the target, (iii) `Ψspec(π(v)) ≠ 1` for every inequality `v`.
/// Also checks that `Ψspec` kills the target's relators.
pub fn verify_formal_solution(cert: &FormalCertificate, sys: &EqSystem) -> Result<FormalReport> {
    let mut failures = Vec::new();
    if let HomCheck::Fails { index, .. } = verify_hom(&cert.psi_spec, &target_relators(&cert.pi.target)?)? {
        failures.push(Clause::PsiSpecHom(index));
    }
    for g in sys.generators() {
        if cert.pi.image(&g).is_none() {
            return Err(Error::UnknownGenerator(g));
        }
    }
    for (i, r) in build_gsigma(sys).relators.iter().enumerate() {
        if !cert.pi.target.is_trivial(&cert.pi.apply(r)?)? {
            failures.push(Clause::Relator(i));
        }
    }
    for g in sys.y_vars.iter().chain(&sys.coeffs) {
        let lhs = cert.pi.image(g).expect("checked above");
        let rhs = cert.iota.image(g).ok_or_else(|| Error::UnknownGenerator(g.clone()))?;
        if !cert.pi.target.equal(lhs, rhs)? {
            failures.push(Clause::Agreement(g.clone()));
        }
    }
    for (j, v) in sys.psi.iter().enumerate() {
        if cert.psi_spec.apply(&cert.pi.apply(v)?)?.is_identity() {
            failures.push(Clause::Inequality(j));
        }
    }
    Ok(FormalReport { failures })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AeVerdict {
    Witness(BTreeMap<String, Word>),
    /// Inconclusive: no witness with every `|x_i|` at most the bound.
    NoWitnessWithinBound,
}

impl fmt::Display for AeVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AeVerdict::Witness(xs) => {
                let parts: Vec<String> = xs.iter().map(|(k, w)| format!("{k} -> {w}")).collect();
                write!(f, "witness {}", parts.join(", "))
            }
            AeVerdict::NoWitnessWithinBound => f.write_str("no witness within bound (inconclusive)"),
        }
    }
}

/// For each sampled assignment of the `y` variables, searches the
/// `x`-assignments with `|x_i| ≤ x_bound` in shortlex order for one with
/// `Σ = 1` and `Ψ ≠ 1` in the free group on the coefficients and the letters
/// of the samples. Coefficients map to themselves.
pub fn sample_ae_sentence(sys: &EqSystem, samples: &[GroupHom], x_bound: usize) -> Result<Vec<AeVerdict>> {
    samples.iter().map(|s| sample_one(sys, s, x_bound)).collect()
}

fn sample_one(sys: &EqSystem, sample: &GroupHom, x_bound: usize) -> Result<AeVerdict> {
    let mut letters: Vec<String> = sys.coeffs.clone();
    let mut extra = BTreeSet::new();
    for y in &sys.y_vars {
        let w = sample.image(y).ok_or_else(|| Error::Input(format!("sample leaves `{y}` unassigned")))?;
        extra.extend(w.generator_names().into_iter().map(str::to_string));
    }
    letters.extend(extra.into_iter().filter(|l| !sys.coeffs.contains(l)));
    let alphabet = Alphabet::new(&letters)?;
    let candidates = alphabet.enumerate(x_bound);
    let mut images: BTreeMap<String, Word> = BTreeMap::new();
    for y in &sys.y_vars {
        images.insert(y.clone(), sample.image(y).expect("checked").clone());
    }
    for a in &sys.coeffs {
        images.insert(a.clone(), Word::generator(a));
    }
    let k = sys.x_vars.len();
    let mut idx = vec![0usize; k];
    loop {
        for (x, &i) in sys.x_vars.iter().zip(&idx) {
            images.insert(x.clone(), candidates[i].clone());
        }
        let h = GroupHom::free(images.clone());
        let sigma_ok = sys.sigma.iter().map(|w| h.apply(w)).collect::<Result<Vec<_>>>()?.iter().all(Word::is_identity);
        if sigma_ok && sys.psi.iter().map(|w| h.apply(w)).collect::<Result<Vec<_>>>()?.iter().all(|w| !w.is_identity()) {
            let xs = sys.x_vars.iter().map(|x| (x.clone(), images[x].clone())).collect();
            return Ok(AeVerdict::Witness(xs));
        }
        // odometer, last variable fastest
        let mut j = k;
        loop {
            if j == 0 {
                return Ok(AeVerdict::NoWitnessWithinBound);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < candidates.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}
