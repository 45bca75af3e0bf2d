//! Target groups for homomorphisms and concrete homomorphisms given by
//! generator images.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::gog::GraphOfGroups;
use crate::words::{is_identifier, Word};

/// Where images live: a free group on whatever letters occur, or the
/// fundamental group of a graph of groups.
#[derive(Clone, Debug)]
pub enum Target {
    Free,
    Gog(Arc<GraphOfGroups>),
}

impl Target {
    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        match self {
            Target::Free => Ok(w.is_identity()),
            Target::Gog(g) => g.is_trivial(w),
        }
    }

    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool> {
        self.is_trivial(&u.mul(&v.inverse()))
    }
}

/// A map on generators, extended to words by substitution.
#[derive(Clone, Debug)]
pub struct GroupHom {
    images: BTreeMap<String, Word>,
    pub target: Target,
}

impl GroupHom {
    pub fn new(images: impl IntoIterator<Item = (String, Word)>, target: Target) -> Self {
        GroupHom { images: images.into_iter().collect(), target }
    }

    pub fn free(images: impl IntoIterator<Item = (String, Word)>) -> Self {
        GroupHom::new(images, Target::Free)
    }

    /// Parses `x -> y^2, y -> y`; entries may also be separated by newlines
    /// or semicolons.
    pub fn parse(text: &str, target: Target) -> Result<Self> {
        let mut images = BTreeMap::new();
        for entry in text.split([',', ';', '\n']).map(str::trim).filter(|s| !s.is_empty()) {
            let (name, word) = entry
                .split_once("->")
                .ok_or_else(|| Error::Parse(format!("expected `name -> word`, got `{entry}`")))?;
            let name = name.trim();
            if !is_identifier(name) {
                return Err(Error::Parse(format!("bad generator name `{name}`")));
            }
            if images.insert(name.to_string(), Word::parse(word)?).is_some() {
                return Err(Error::Parse(format!("`{name}` assigned twice")));
            }
        }
        Ok(GroupHom { images, target })
    }

    pub fn image(&self, name: &str) -> Option<&Word> {
        self.images.get(name)
    }

    pub fn images(&self) -> &BTreeMap<String, Word> {
        &self.images
    }

    pub fn domain(&self) -> impl Iterator<Item = &str> {
        self.images.keys().map(String::as_str)
    }

    pub fn set(&mut self, name: &str, w: Word) {
        self.images.insert(name.to_string(), w);
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        w.substitute(|g| self.images.get(g))
    }

    /// `self ∘ other`: apply `other` first.
    pub fn after(&self, other: &GroupHom) -> Result<GroupHom> {
        let images = other
            .images
            .iter()
            .map(|(k, w)| Ok((k.clone(), self.apply(w)?)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        Ok(GroupHom { images, target: self.target.clone() })
    }
}

impl fmt::Display for GroupHom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.images.iter().map(|(k, w)| format!("{k} -> {w}")).collect();
        f.write_str(&parts.join(", "))
    }
}
