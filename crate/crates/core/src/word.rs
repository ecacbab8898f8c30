//! Freely reduced words in syllable form.

use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::arith::bit_size_i64;

/// Anything usable as a letter of a word.
pub trait Letter: Clone + Eq + Ord + Hash + fmt::Debug {}
impl<T: Clone + Eq + Ord + Hash + fmt::Debug> Letter for T {}

/// A freely reduced word `x_1^{a_1} ... x_m^{a_m}`: exponents are nonzero
/// and adjacent syllables carry distinct letters. The empty word is the
/// identity.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(bound(serialize = "L: Serialize", deserialize = "L: Deserialize<'de> + Letter"))]
#[serde(try_from = "Vec<(L, i64)>", into = "Vec<(L, i64)>")]
pub struct Word<L: Letter> {
    syllables: Vec<(L, i64)>,
}

impl<L: Letter> Default for Word<L> {
    fn default() -> Self {
        Word { syllables: Vec::new() }
    }
}

/// Reduce a raw sequence of `(letter, exponent)` pairs.
pub fn free_reduce<L: Letter>(raw: impl IntoIterator<Item = (L, i64)>) -> Word<L> {
    let mut w = Word::empty();
    for (l, e) in raw {
        w.push(l, e);
    }
    w
}

impl<L: Letter> Word<L> {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn letter(l: L) -> Self {
        Word { syllables: vec![(l, 1)] }
    }

    pub fn power(l: L, e: i64) -> Self {
        free_reduce([(l, e)])
    }

    pub fn is_empty(&self) -> bool {
        self.syllables.is_empty()
    }

    pub fn syllables(&self) -> &[(L, i64)] {
        &self.syllables
    }

    pub fn into_syllables(self) -> Vec<(L, i64)> {
        self.syllables
    }

    pub fn syllable_count(&self) -> usize {
        self.syllables.len()
    }

    /// Number of letters after expanding every power.
    pub fn letter_length(&self) -> u64 {
        self.syllables.iter().map(|(_, e)| e.unsigned_abs()).sum()
    }

    /// Append `l^e` on the right, cancelling and merging as needed.
    pub fn push(&mut self, l: L, e: i64) {
        if e == 0 {
            return;
        }
        if let Some((last, exp)) = self.syllables.last_mut() {
            if *last == l {
                *exp += e;
                if *exp == 0 {
                    self.syllables.pop();
                }
                return;
            }
        }
        self.syllables.push((l, e));
    }

    pub fn concat(&self, other: &Word<L>) -> Word<L> {
        let mut w = self.clone();
        for (l, e) in &other.syllables {
            w.push(l.clone(), *e);
        }
        w
    }

    pub fn inverse(&self) -> Word<L> {
        Word { syllables: self.syllables.iter().rev().map(|(l, e)| (l.clone(), -e)).collect() }
    }

    /// Sum of the bit sizes of the exponents; 0 for the empty word.
    pub fn bit_size(&self) -> u64 {
        self.syllables.iter().map(|&(_, e)| bit_size_i64(e)).sum()
    }

    pub fn letters(&self) -> impl Iterator<Item = &L> {
        self.syllables.iter().map(|(l, _)| l)
    }

    pub fn map_letters<M: Letter>(&self, mut f: impl FnMut(&L) -> M) -> Word<M> {
        free_reduce(self.syllables.iter().map(|(l, e)| (f(l), *e)))
    }

    /// Replace each letter by a word and reduce. Fails on the first letter
    /// `f` rejects.
    pub fn substitute<M: Letter, E>(&self, mut f: impl FnMut(&L) -> Result<Word<M>, E>) -> Result<Word<M>, E> {
        let mut out = Word::empty();
        for (l, e) in &self.syllables {
            let image = f(l)?;
            let piece = if *e > 0 { image } else { image.inverse() };
            for _ in 0..e.unsigned_abs() {
                for (m, k) in piece.syllables() {
                    out.push(m.clone(), *k);
                }
            }
        }
        Ok(out)
    }
}

pub fn word_bit_size<L: Letter>(w: &Word<L>) -> u64 {
    w.bit_size()
}

impl<L: Letter> TryFrom<Vec<(L, i64)>> for Word<L> {
    type Error = String;
    fn try_from(raw: Vec<(L, i64)>) -> Result<Self, String> {
        let w = free_reduce(raw.iter().cloned());
        if w.syllables != raw {
            return Err("word is not in freely reduced syllable form".into());
        }
        Ok(w)
    }
}

impl<L: Letter> From<Word<L>> for Vec<(L, i64)> {
    fn from(w: Word<L>) -> Self {
        w.syllables
    }
}

impl<L: Letter> FromIterator<(L, i64)> for Word<L> {
    fn from_iter<I: IntoIterator<Item = (L, i64)>>(iter: I) -> Self {
        free_reduce(iter)
    }
}

impl<L: Letter + fmt::Display> fmt::Display for Word<L> {
    /// `a^3 b^-1`; the empty word prints as `1`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "1");
        }
        for (i, (l, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            if *e == 1 {
                write!(f, "{l}")?;
            } else {
                write!(f, "{l}^{e}")?;
            }
        }
        Ok(())
    }
}

impl<L: Letter> fmt::Debug for Word<L> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.syllables.iter()).finish()
    }
}

/// Parse whitespace-separated tokens `name` or `name^exp`. A lone `1`
/// stands for the identity and contributes nothing.
pub fn parse_word(text: &str) -> Result<Word<String>, String> {
    let mut w = Word::empty();
    for tok in text.split_whitespace() {
        if tok == "1" {
            continue;
        }
        let (name, exp) = match tok.split_once('^') {
            Some((n, e)) => {
                let e: i64 = e.parse().map_err(|_| format!("bad exponent in token {tok:?}"))?;
                (n, e)
            }
            None => (tok, 1),
        };
        let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        if !valid {
            return Err(format!("bad generator name in token {tok:?}"));
        }
        w.push(name.to_string(), exp);
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(raw: &[(char, i64)]) -> Word<char> {
        free_reduce(raw.iter().copied())
    }

    #[test]
    fn reduction_examples() {
        assert!(w(&[('a', 1), ('a', -1)]).is_empty());
        assert_eq!(w(&[('a', 1), ('b', 1), ('b', -1), ('a', 1)]).syllables(), &[('a', 2)]);
        assert_eq!(w(&[('a', 2), ('b', 0), ('a', -1)]).syllables(), &[('a', 1)]);
        // cascading cancellation
        assert!(w(&[('a', 1), ('b', 2), ('c', 1), ('c', -1), ('b', -2), ('a', -1)]).is_empty());
    }

    #[test]
    fn bit_size_examples() {
        assert_eq!(w(&[]).bit_size(), 0);
        assert_eq!(w(&[('A', 1), ('B', 1)]).bit_size(), 2);
        assert_eq!(word_bit_size(&w(&[('A', -3), ('B', 5)])), 5);
    }

    #[test]
    fn substitution() {
        // r1 -> a^3, r2 -> b^2; r1 r2^-1 -> a^3 b^-2
        let rel = w(&[('1', 1), ('2', -1)]);
        let exp: Result<Word<char>, ()> =
            rel.substitute(|l| Ok(if *l == '1' { w(&[('a', 3)]) } else { w(&[('b', 2)]) }));
        assert_eq!(exp.unwrap().syllables(), &[('a', 3), ('b', -2)]);
    }

    #[test]
    fn parse_and_display() {
        let p = parse_word("a^3 b^-1 b a").unwrap();
        assert_eq!(p.to_string(), "a^4");
        assert_eq!(parse_word("").unwrap(), Word::empty());
        assert_eq!(parse_word("1").unwrap().to_string(), "1");
        assert!(parse_word("a^x").is_err());
        assert!(parse_word("3a").is_err());
    }

    #[test]
    fn serde_rejects_unreduced() {
        let ok: Word<String> = serde_json::from_str(r#"[["a",2],["b",-1]]"#).unwrap();
        assert_eq!(ok.syllable_count(), 2);
        assert!(serde_json::from_str::<Word<String>>(r#"[["a",2],["a",-1]]"#).is_err());
        assert!(serde_json::from_str::<Word<String>>(r#"[["a",0]]"#).is_err());
    }

    fn raw_word() -> impl Strategy<Value = Vec<(u8, i64)>> {
        prop::collection::vec((0u8..3, -3i64..=3), 0..20)
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent_and_shrinking(raw in raw_word()) {
            let once = free_reduce(raw.iter().copied());
            let twice = free_reduce(once.syllables().iter().copied());
            prop_assert_eq!(&once, &twice);
            let raw_len: u64 = raw.iter().map(|(_, e)| e.unsigned_abs()).sum();
            prop_assert!(once.letter_length() <= raw_len);
            for pair in once.syllables().windows(2) {
                prop_assert!(pair[0].0 != pair[1].0);
            }
            prop_assert!(once.syllables().iter().all(|&(_, e)| e != 0));
        }

        #[test]
        fn inverse_cancels(raw in raw_word()) {
            let x = free_reduce(raw.iter().copied());
            prop_assert!(x.concat(&x.inverse()).is_empty());
            prop_assert!(x.inverse().concat(&x).is_empty());
        }
    }
}
