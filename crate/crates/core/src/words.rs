//! Free-group words: free and cyclic reduction, roots and powers, pieces and
//! the C′(p) small cancellation test.
//!
//! A [`Word`] is always freely reduced. Letters carry a generator name and an
//! inverse bit; the empty word is the identity and prints as `1`.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;

use crate::error::{input, Error, Result};

/// A generator or its inverse.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    name: Arc<str>,
    inverse: bool,
}

impl Generator {
    pub fn new(name: &str) -> Self {
        Generator { name: Arc::from(name), inverse: false }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_inverse(&self) -> bool {
        self.inverse
    }

    /// +1 or -1.
    pub fn sign(&self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inverse(&self) -> Generator {
        Generator { name: self.name.clone(), inverse: !self.inverse }
    }

    fn cancels(&self, other: &Generator) -> bool {
        self.inverse != other.inverse && self.name == other.name
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.inverse {
            write!(f, "{}^-1", self.name)
        } else {
            write!(f, "{}", self.name)
        }
    }
}

pub(crate) fn is_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// An ordered set of generator names. The order fixes the shortlex order on
/// words: `a < a^-1 < b < b^-1 < …`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<Arc<str>>,
    index: HashMap<Arc<str>, usize>,
}

impl Alphabet {
    pub fn new<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> Result<Self> {
        let mut alphabet = Alphabet::default();
        for name in names {
            let name = name.as_ref();
            if !is_identifier(name) {
                return Err(Error::Parse(format!("invalid generator name `{name}`")));
            }
            if alphabet.index.contains_key(name) {
                return input(format!("duplicate generator `{name}`"));
            }
            let name: Arc<str> = Arc::from(name);
            alphabet.index.insert(name.clone(), alphabet.names.len());
            alphabet.names.push(name);
        }
        Ok(alphabet)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.names.iter().map(|n| &**n)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.index.contains_key(name)
    }

    /// The letters of this alphabet in shortlex order.
    pub fn letters(&self) -> Vec<Generator> {
        self.names
            .iter()
            .flat_map(|n| {
                let g = Generator { name: n.clone(), inverse: false };
                [g.clone(), g.inverse()]
            })
            .collect()
    }

    fn rank(&self, g: &Generator) -> usize {
        2 * self.index.get(&g.name).copied().unwrap_or(usize::MAX / 4) + g.inverse as usize
    }

    /// Shortlex comparison: shorter words first, then letter by letter.
    pub fn shortlex(&self, u: &Word, v: &Word) -> Ordering {
        u.len().cmp(&v.len()).then_with(|| {
            for (x, y) in u.letters.iter().zip(&v.letters) {
                match self.rank(x).cmp(&self.rank(y)) {
                    Ordering::Equal => continue,
                    o => return o,
                }
            }
            Ordering::Equal
        })
    }

    /// Parses a word and checks every letter belongs to this alphabet.
    pub fn parse(&self, text: &str) -> Result<Word> {
        let w = Word::parse(text)?;
        self.check(&w)?;
        Ok(w)
    }

    pub fn check(&self, w: &Word) -> Result<()> {
        match w.letters.iter().find(|g| !self.contains(&g.name)) {
            Some(g) => Err(Error::UnknownGenerator(g.name.to_string())),
            None => Ok(()),
        }
    }

    /// All reduced words of length at most `max_len`, in shortlex order.
    pub fn enumerate(&self, max_len: usize) -> Vec<Word> {
        let letters = self.letters();
        let mut out = vec![Word::identity()];
        let mut layer = vec![Word::identity()];
        for _ in 0..max_len {
            let mut next = Vec::new();
            for w in &layer {
                for g in &letters {
                    if w.letters.last().is_some_and(|l| l.cancels(g)) {
                        continue;
                    }
                    let mut letters = w.letters.clone();
                    letters.push(g.clone());
                    next.push(Word { letters });
                }
            }
            out.extend(next.iter().cloned());
            layer = next;
        }
        out
    }
}

/// Freely reduces `raw`, rejecting letters outside `alphabet`.
pub fn reduce(alphabet: &Alphabet, raw: &[Generator]) -> Result<Word> {
    if let Some(g) = raw.iter().find(|g| !alphabet.contains(&g.name)) {
        return Err(Error::UnknownGenerator(g.name.to_string()));
    }
    Ok(Word::from_letters(raw.iter().cloned()))
}

/// A freely reduced word.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Generator>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn generator(name: &str) -> Self {
        Word { letters: vec![Generator::new(name)] }
    }

    /// Reduces an arbitrary letter sequence with a single stack pass.
    pub fn from_letters(raw: impl IntoIterator<Item = Generator>) -> Self {
        let mut letters: Vec<Generator> = Vec::new();
        for g in raw {
            if letters.last().is_some_and(|l| l.cancels(&g)) {
                letters.pop();
            } else {
                letters.push(g);
            }
        }
        Word { letters }
    }

    /// `x^e` for a single generator.
    pub fn power_of_generator(name: &str, e: i64) -> Self {
        Word::generator(name).pow(e)
    }

    /// Parses the text syntax: whitespace-separated tokens `name`, `name^k`
    /// (k may be negative, suffixes may repeat) or `1` for the identity.
    pub fn parse(text: &str) -> Result<Self> {
        let mut raw = Vec::new();
        for token in text.split_whitespace() {
            let mut parts = token.split('^');
            let head = parts.next().unwrap_or_default();
            let mut exp: i64 = 1;
            for p in parts {
                let k: i64 = p
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad exponent in `{token}`")))?;
                exp = exp
                    .checked_mul(k)
                    .ok_or_else(|| Error::Parse(format!("exponent overflow in `{token}`")))?;
            }
            if head == "1" {
                continue;
            }
            if !is_identifier(head) {
                return Err(Error::Parse(format!("bad token `{token}`")));
            }
            let g = Generator::new(head);
            let g = if exp < 0 { g.inverse() } else { g };
            raw.extend(std::iter::repeat_n(g, exp.unsigned_abs() as usize));
        }
        Ok(Word::from_letters(raw))
    }

    pub fn letters(&self) -> &[Generator] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(Generator::inverse).collect() }
    }

    pub fn mul(&self, other: &Word) -> Word {
        let mut overlap = 0;
        while overlap < self.len().min(other.len())
            && self.letters[self.len() - 1 - overlap].cancels(&other.letters[overlap])
        {
            overlap += 1;
        }
        let mut letters = self.letters[..self.len() - overlap].to_vec();
        letters.extend_from_slice(&other.letters[overlap..]);
        Word { letters }
    }

    pub fn pow(&self, e: i64) -> Word {
        if e < 0 {
            return self.inverse().pow(-e);
        }
        if self.is_empty() || e == 0 {
            return Word::identity();
        }
        let (core, conj) = self.cyclic_reduce();
        let mut letters = conj.letters.clone();
        for _ in 0..e {
            letters.extend_from_slice(&core.letters);
        }
        letters.extend(conj.inverse().letters);
        Word { letters }
    }

    pub fn conjugate_by(&self, g: &Word) -> Word {
        g.mul(self).mul(&g.inverse())
    }

    /// `w = conjugator · core · conjugator⁻¹` with `core` cyclically reduced.
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let n = self.len();
        let mut k = 0;
        while 2 * k + 1 < n && self.letters[k].cancels(&self.letters[n - 1 - k]) {
            k += 1;
        }
        (
            Word { letters: self.letters[k..n - k].to_vec() },
            Word { letters: self.letters[..k].to_vec() },
        )
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.len() < 2 || !self.letters[0].cancels(&self.letters[self.len() - 1])
    }

    /// The primitive root `r` and the maximal exponent `k` with `w = r^k`.
    pub fn primitive_root(&self) -> Result<(Word, u64)> {
        if self.is_empty() {
            return input("the identity has no primitive root");
        }
        let (core, conj) = self.cyclic_reduce();
        let n = core.len();
        let period = (1..=n)
            .filter(|d| n % d == 0)
            .find(|&d| (d..n).all(|i| core.letters[i] == core.letters[i - d]))
            .unwrap_or(n);
        let root = Word { letters: core.letters[..period].to_vec() };
        Ok((root.conjugate_by(&conj), (n / period) as u64))
    }

    /// Returns `k` with `self = u^k`, if such `k` exists.
    pub fn is_power_of(&self, u: &Word) -> Option<i64> {
        if self.is_empty() {
            return Some(0);
        }
        if u.is_empty() {
            return None;
        }
        let (root, e) = u.primitive_root().ok()?;
        let (core, conj) = root.cyclic_reduce();
        let inner = self.len().checked_sub(2 * conj.len())?;
        if inner == 0 || inner % core.len() != 0 {
            return None;
        }
        let j = (inner / core.len()) as i64;
        let j = [j, -j].into_iter().find(|&j| root.pow(j) == *self)?;
        (j % e as i64 == 0).then_some(j / e as i64)
    }

    pub fn subword(&self, start: usize, len: usize) -> Word {
        Word { letters: self.letters[start..start + len].to_vec() }
    }

    pub fn contains_subword(&self, w: &Word) -> bool {
        w.is_empty() || self.letters.windows(w.len()).any(|s| s == w.letters.as_slice())
    }

    /// Exponent sum of each generator of `alphabet` (abelianization).
    pub fn exponent_vector(&self, alphabet: &Alphabet) -> Result<Vec<i64>> {
        let mut v = vec![0; alphabet.len()];
        for g in &self.letters {
            let i = alphabet
                .position(&g.name)
                .ok_or_else(|| Error::UnknownGenerator(g.name.to_string()))?;
            v[i] += g.sign();
        }
        Ok(v)
    }

    /// `g1^v1 g2^v2 …` over the names of `alphabet`.
    pub fn from_exponents(alphabet: &Alphabet, v: &[i64]) -> Word {
        let letters = alphabet
            .names
            .iter()
            .zip(v)
            .flat_map(|(name, &e)| {
                let g = Generator { name: name.clone(), inverse: e < 0 };
                std::iter::repeat_n(g, e.unsigned_abs() as usize)
            });
        Word { letters: letters.collect() }
    }

    /// Replaces every generator by its image; names without an image are an error.
    pub fn substitute<'a>(&self, image: impl Fn(&str) -> Option<&'a Word>) -> Result<Word> {
        let mut out = Word::identity();
        for g in &self.letters {
            let w = image(&g.name).ok_or_else(|| Error::UnknownGenerator(g.name.to_string()))?;
            out = if g.inverse { out.mul(&w.inverse()) } else { out.mul(w) };
        }
        Ok(out)
    }

    pub fn generator_names(&self) -> BTreeSet<&str> {
        self.letters.iter().map(|g| &*g.name).collect()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "1");
        }
        let mut first = true;
        for run in self.letters.chunk_by(|a, b| a == b) {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            let g = &run[0];
            match (run.len(), g.inverse) {
                (1, false) => write!(f, "{}", g.name)?,
                (k, false) => write!(f, "{}^{}", g.name, k)?,
                (k, true) => write!(f, "{}^-{}", g.name, k)?,
            }
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

impl std::str::FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Word::parse(s)
    }
}

/// Interns letters as small integers so substrings hash cheaply.
struct Symbols {
    ids: HashMap<Generator, u32>,
    letters: Vec<Generator>,
}

impl Symbols {
    fn new() -> Self {
        Symbols { ids: HashMap::new(), letters: Vec::new() }
    }

    fn encode(&mut self, w: &Word) -> Vec<u32> {
        w.letters
            .iter()
            .map(|g| {
                let next = self.letters.len() as u32;
                *self.ids.entry(g.clone()).or_insert_with(|| {
                    self.letters.push(g.clone());
                    next
                })
            })
            .collect()
    }

    fn decode(&self, s: &[u32]) -> Word {
        Word { letters: s.iter().map(|&i| self.letters[i as usize].clone()).collect() }
    }
}

#[derive(Default)]
struct Occurrences {
    entry: usize,
    count: usize,
    several_entries: bool,
}

impl Occurrences {
    fn is_piece(&self) -> bool {
        self.several_entries || self.count >= 2
    }
}

/// Occurrence table for every non-empty subword of every `x_i^{±1}`.
struct PieceTable {
    symbols: Symbols,
    encoded: Vec<[Vec<u32>; 2]>,
}

impl PieceTable {
    fn new(tuple: &[Word]) -> Self {
        let mut symbols = Symbols::new();
        let encoded = tuple
            .iter()
            .map(|x| [symbols.encode(x), symbols.encode(&x.inverse())])
            .collect();
        PieceTable { symbols, encoded }
    }

    fn occurrences(&self) -> HashMap<&[u32], Occurrences> {
        let mut table: HashMap<&[u32], Occurrences> = HashMap::new();
        for (i, pair) in self.encoded.iter().enumerate() {
            for s in pair {
                for start in 0..s.len() {
                    for end in start + 1..=s.len() {
                        let occ = table
                            .entry(&s[start..end])
                            .or_insert(Occurrences { entry: i, ..Default::default() });
                        if occ.entry != i {
                            occ.several_entries = true;
                        }
                        occ.count += 1;
                    }
                }
            }
        }
        table
    }
}

/// All maximal pieces of the tuple: subwords of two distinct `x_i^{±1}`, or
/// occurring twice among the occurrences in `x_j` and `x_j⁻¹` (overlaps allowed).
pub fn pieces(tuple: &[Word]) -> BTreeSet<Word> {
    let table = PieceTable::new(tuple);
    let occ = table.occurrences();
    let is_piece = |s: &[u32]| occ.get(s).is_some_and(Occurrences::is_piece);
    let alphabet = table.symbols.letters.len() as u32;
    let mut out = BTreeSet::new();
    let mut buf = Vec::new();
    for (s, o) in &occ {
        if !o.is_piece() {
            continue;
        }
        let extends = (0..alphabet).any(|a| {
            buf.clear();
            buf.push(a);
            buf.extend_from_slice(s);
            if is_piece(&buf) {
                return true;
            }
            buf.clear();
            buf.extend_from_slice(s);
            buf.push(a);
            is_piece(&buf)
        });
        if !extends {
            out.insert(table.symbols.decode(s));
        }
    }
    out
}

/// Outcome of a C′(p) check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cprime {
    Holds,
    /// `piece` is a subword of `tuple[entry]` with `|piece| ≥ p·|tuple[entry]|`.
    Fails { piece: Word, entry: usize },
}

impl Cprime {
    pub fn holds(&self) -> bool {
        matches!(self, Cprime::Holds)
    }
}

/// Tests the small cancellation condition C′(p) for `0 < p < 1`.
///
/// For every entry the longest piece occurring in it is found. The witness is
/// the entry with the largest ratio `|piece| / |x_i|` (lowest index on ties),
/// so a failure at `p` reports the same witness at every smaller `p`.
pub fn check_cprime(tuple: &[Word], p: Ratio<i64>) -> Result<Cprime> {
    if *p.numer() <= 0 || p >= Ratio::from_integer(1) {
        return input(format!("C′(p) needs 0 < p < 1, got {p}"));
    }
    let table = PieceTable::new(tuple);
    let occ = table.occurrences();
    let mut worst: Option<(usize, Vec<u32>, usize)> = None;
    for (i, [x, _]) in table.encoded.iter().enumerate() {
        let longest = (1..=x.len()).rev().find_map(|len| {
            x.windows(len)
                .find(|s| occ.get(s).is_some_and(Occurrences::is_piece))
                .map(|s| s.to_vec())
        });
        let Some(s) = longest else { continue };
        let better = match &worst {
            None => true,
            Some((_, ws, wlen)) => s.len() * wlen > ws.len() * x.len(),
        };
        if better {
            worst = Some((i, s, x.len()));
        }
    }
    match worst {
        // |w| < p·|x|  ⇔  |w|·den < num·|x|
        Some((entry, s, len)) if (s.len() as i64) * p.denom() >= p.numer() * len as i64 => {
            Ok(Cprime::Fails { piece: table.symbols.decode(&s), entry })
        }
        _ => Ok(Cprime::Holds),
    }
}

/// Parses `a/b` or an integer.
pub fn parse_ratio(text: &str) -> Result<Ratio<i64>> {
    let bad = || Error::Parse(format!("bad rational `{text}`"));
    match text.split_once('/') {
        Some((n, d)) => {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: i64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Ratio::new(n, d))
        }
        None => Ok(Ratio::from_integer(text.trim().parse().map_err(|_| bad())?)),
    }
}
