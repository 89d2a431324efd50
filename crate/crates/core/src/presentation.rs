//! Words over a finite generating set, free reduction, group-ring elements
//! and Fox derivatives.
//!
//! Text form: generator `i` is the lowercase letter `'a' + i`, its inverse the
//! uppercase letter. The empty word is written `1`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

/// Relators longer than this are rejected.
pub const MAX_RELATOR_LEN: usize = 10_000;

/// Letters are limited to `a..=z`.
pub const MAX_GENERATORS: usize = 26;

#[derive(Debug, Error)]
pub enum PresentationError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("generator index {index} out of range for {count} generators")]
    GeneratorOutOfRange { index: usize, count: usize },
    #[error("relator of length {0} exceeds the limit of {MAX_RELATOR_LEN}")]
    RelatorTooLong(usize),
    #[error("relator {0} reduces to the empty word")]
    EmptyRelator(usize),
    #[error("a presentation needs between 1 and {MAX_GENERATORS} generators, got {0}")]
    GeneratorCount(usize),
    #[error("invalid letter {0:?}")]
    InvalidLetter(char),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Letter {
    pub generator: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(generator: usize, exponent: i8) -> Self {
        debug_assert!(exponent == 1 || exponent == -1);
        Self { generator, inverse: exponent < 0 }
    }

    pub fn exponent(self) -> i8 {
        if self.inverse {
            -1
        } else {
            1
        }
    }

    pub fn inv(self) -> Self {
        Self { generator: self.generator, inverse: !self.inverse }
    }

    pub fn to_char(self) -> char {
        let c = (b'a' + self.generator as u8) as char;
        if self.inverse {
            c.to_ascii_uppercase()
        } else {
            c
        }
    }

    pub fn from_char(c: char) -> Result<Self, PresentationError> {
        match c {
            'a'..='z' => Ok(Self { generator: (c as u8 - b'a') as usize, inverse: false }),
            'A'..='Z' => Ok(Self { generator: (c as u8 - b'A') as usize, inverse: true }),
            _ => Err(PresentationError::InvalidLetter(c)),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    pub fn generator(g: usize) -> Self {
        Self(vec![Letter::new(g, 1)])
    }

    pub fn parse(s: &str) -> Result<Self, PresentationError> {
        let s = s.trim();
        if s == "1" {
            return Ok(Self::empty());
        }
        s.chars().map(Letter::from_char).collect::<Result<Vec<_>, _>>().map(Self)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    /// Concatenation followed by free reduction.
    pub fn mul(&self, other: &Word) -> Self {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        free_reduce(&Self(letters))
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator).max()
    }

    /// Signed count of each generator (image in the abelianization).
    pub fn exponent_sums(&self, generator_count: usize) -> Vec<i64> {
        let mut sums = vec![0i64; generator_count];
        for l in &self.0 {
            sums[l.generator] += l.exponent() as i64;
        }
        sums
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for l in &self.0 {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

pub fn free_reduce(w: &Word) -> Word {
    let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in w.letters() {
        if stack.last() == Some(&l.inv()) {
            stack.pop();
        } else {
            stack.push(l);
        }
    }
    Word(stack)
}

/// Finite integer combination of reduced words.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct GroupRingElement {
    terms: BTreeMap<Word, i64>,
}

impl GroupRingElement {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::from_word(Word::empty(), 1)
    }

    pub fn from_word(w: Word, coefficient: i64) -> Self {
        let mut out = Self::zero();
        out.add_term(w, coefficient);
        out
    }

    pub fn from_terms<I: IntoIterator<Item = (Word, i64)>>(terms: I) -> Self {
        let mut out = Self::zero();
        for (w, c) in terms {
            out.add_term(w, c);
        }
        out
    }

    pub fn add_term(&mut self, w: Word, coefficient: i64) {
        if coefficient == 0 {
            return;
        }
        let w = free_reduce(&w);
        let entry = self.terms.entry(w.clone()).or_insert(0);
        *entry += coefficient;
        if *entry == 0 {
            self.terms.remove(&w);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Word, i64)> {
        self.terms.iter().map(|(w, &c)| (w, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (w, c) in other.terms() {
            out.add_term(w.clone(), c);
        }
        out
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::from_terms(self.terms().map(|(w, c)| (w.clone(), c * k)))
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1))
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (u, a) in self.terms() {
            for (v, b) in other.terms() {
                out.add_term(u.mul(v), a * b);
            }
        }
        out
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.terms.keys().filter_map(Word::max_generator).max()
    }

    /// Parses `±c*word` terms joined by `+`, e.g. `1*1 + -1*abA`.
    pub fn parse(s: &str) -> Result<Self, String> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() || compact == "0" {
            return Ok(Self::zero());
        }
        let bytes = compact.as_bytes();
        let mut out = Self::zero();
        let mut i = 0;
        let mut first = true;
        while i < bytes.len() {
            if !first {
                if bytes[i] != b'+' {
                    return Err(format!("expected '+' between terms at {:?}", &compact[i..]));
                }
                i += 1;
            }
            first = false;
            let start = i;
            if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                i += 1;
            }
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let coefficient: i64 = compact[start..i]
                .parse()
                .map_err(|_| format!("bad coefficient {:?}", &compact[start..i]))?;
            if i >= bytes.len() || bytes[i] != b'*' {
                return Err(format!("expected '*' after coefficient in {:?}", compact));
            }
            i += 1;
            let word_start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'1') {
                i += 1;
            }
            let word = Word::parse(&compact[word_start..i]).map_err(|e| e.to_string())?;
            if word_start == i {
                return Err(format!("missing word in {:?}", compact));
            }
            out.add_term(word, coefficient);
        }
        Ok(out)
    }
}

impl fmt::Display for GroupRingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (w, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{w}")?;
        }
        Ok(())
    }
}

/// A finite presentation `<g_1..g_k | relators>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupPresentation {
    name: String,
    generator_count: usize,
    relators: Vec<Word>,
}

impl GroupPresentation {
    pub fn new(
        name: impl Into<String>,
        generator_count: usize,
        relators: Vec<Word>,
    ) -> Result<Self, PresentationError> {
        if generator_count == 0 || generator_count > MAX_GENERATORS {
            return Err(PresentationError::GeneratorCount(generator_count));
        }
        let mut reduced = Vec::with_capacity(relators.len());
        for (i, r) in relators.into_iter().enumerate() {
            if r.len() > MAX_RELATOR_LEN {
                return Err(PresentationError::RelatorTooLong(r.len()));
            }
            if let Some(g) = r.max_generator() {
                if g >= generator_count {
                    return Err(PresentationError::GeneratorOutOfRange {
                        index: g,
                        count: generator_count,
                    });
                }
            }
            let r = free_reduce(&r);
            if r.is_empty() {
                return Err(PresentationError::EmptyRelator(i));
            }
            reduced.push(r);
        }
        Ok(Self { name: name.into(), generator_count, relators: reduced })
    }

    /// Bundled fixtures: `Z`, `F2`, `Z2` (free abelian of rank 2) and `Z3` (cyclic of order 3).
    pub fn preset(name: &str) -> Option<Arc<Self>> {
        let (k, rels): (usize, &[&str]) = match name {
            "Z" => (1, &[]),
            "F2" => (2, &[]),
            "Z2" => (2, &["abAB"]),
            "Z3" => (1, &["aaa"]),
            _ => return None,
        };
        let rels = rels.iter().map(|r| Word::parse(r).expect("fixture word")).collect();
        Some(Arc::new(Self::new(name, k, rels).expect("fixture presentation")))
    }

    pub fn preset_names() -> &'static [&'static str] {
        &["Z", "F2", "Z2", "Z3"]
    }

    /// Parses `gens: <k>` followed by `rel: <word>` lines; `#` starts a comment.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, PresentationError> {
        let mut gens: Option<usize> = None;
        let mut rels = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| PresentationError::Parse { line: line_no, message };
            let (key, value) =
                line.split_once(':').ok_or_else(|| err(format!("expected `key: value`, got {line:?}")))?;
            match key.trim() {
                "gens" => {
                    if gens.is_some() {
                        return Err(err("duplicate `gens` line".into()));
                    }
                    let k = value.trim().parse().map_err(|_| err(format!("bad generator count {value:?}")))?;
                    gens = Some(k);
                }
                "rel" => {
                    if gens.is_none() {
                        return Err(err("`rel` before `gens`".into()));
                    }
                    let w = Word::parse(value).map_err(|e| err(e.to_string()))?;
                    if w.is_empty() {
                        return Err(err("empty relator".into()));
                    }
                    rels.push((line_no, w));
                }
                other => return Err(err(format!("unknown key {other:?}"))),
            }
        }
        let k = gens.ok_or(PresentationError::Parse { line: 1, message: "missing `gens` line".into() })?;
        for (line, w) in &rels {
            if let Some(g) = w.max_generator() {
                if g >= k {
                    return Err(PresentationError::Parse {
                        line: *line,
                        message: format!("generator index {g} out of range for {k} generators"),
                    });
                }
            }
        }
        Self::new(name, k, rels.into_iter().map(|(_, w)| w).collect())
    }

    pub fn from_file(path: &Path) -> Result<Self, PresentationError> {
        let text = std::fs::read_to_string(path).map_err(|source| PresentationError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        Self::parse(name, &text)
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("gens: {}\n", self.generator_count);
        for r in &self.relators {
            out.push_str(&format!("rel: {r}\n"));
        }
        out
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generator_count(&self) -> usize {
        self.generator_count
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    /// `S = {g_1, g_1^-1, ..., g_k, g_k^-1}`.
    pub fn symmetric_generators(&self) -> Vec<Letter> {
        (0..self.generator_count)
            .flat_map(|g| [Letter::new(g, 1), Letter::new(g, -1)])
            .collect()
    }

    /// Fox derivative of `word` with respect to generator `generator`.
    pub fn fox_derivative(&self, word: &Word, generator: usize) -> Result<GroupRingElement, PresentationError> {
        if generator >= self.generator_count {
            return Err(PresentationError::GeneratorOutOfRange {
                index: generator,
                count: self.generator_count,
            });
        }
        Ok(fox_derivative(word, generator))
    }
}

/// Fox derivative via the product rule: each occurrence of `g` contributes
/// its prefix, each occurrence of `g^-1` contributes minus its prefix times `g^-1`.
pub fn fox_derivative(word: &Word, generator: usize) -> GroupRingElement {
    let mut out = GroupRingElement::zero();
    let mut prefix: Vec<Letter> = Vec::new();
    for &l in word.letters() {
        if l.generator == generator {
            if l.inverse {
                let mut p = prefix.clone();
                p.push(l);
                out.add_term(Word(p), -1);
            } else {
                out.add_term(Word(prefix.clone()), 1);
            }
        }
        prefix.push(l);
    }
    out
}
