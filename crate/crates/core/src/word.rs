//! Reduced words in a free group.
//!
//! All scenarios use the rank-2 group `F(a, b)`, but letters carry a generator
//! index so larger alphabets work the same way. Text form: lowercase letter
//! `a`, `b`, ... is a generator, the uppercase letter its inverse, and the empty
//! string is the identity (`abAB` is the commutator `a b a⁻¹ b⁻¹`).

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WordError {
    #[error("invalid letter {0:?} in word (expected a-z or A-Z)")]
    InvalidLetter(char),
}

/// A generator or its inverse, stored as `±generator` (generator index ≥ 1).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter(i8);

impl Letter {
    pub const A: Letter = Letter(1);
    pub const A_INV: Letter = Letter(-1);
    pub const B: Letter = Letter(2);
    pub const B_INV: Letter = Letter(-2);

    /// `generator` is 1-based; `positive == false` gives the inverse letter.
    pub fn new(generator: u8, positive: bool) -> Letter {
        assert!((1..=26).contains(&generator), "generator index out of range");
        let g = generator as i8;
        Letter(if positive { g } else { -g })
    }

    pub fn generator(self) -> u8 {
        self.0.unsigned_abs()
    }

    pub fn sign(self) -> i8 {
        self.0.signum()
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    fn to_char(self) -> char {
        let base = if self.0 > 0 { b'a' } else { b'A' };
        (base + self.generator() - 1) as char
    }

    fn from_char(c: char) -> Result<Letter, WordError> {
        match c {
            'a'..='z' => Ok(Letter::new(c as u8 - b'a' + 1, true)),
            'A'..='Z' => Ok(Letter::new(c as u8 - b'A' + 1, false)),
            _ => Err(WordError::InvalidLetter(c)),
        }
    }
}

/// A freely reduced word. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Word {
        Word::default()
    }

    pub fn letter(l: Letter) -> Word {
        Word { letters: vec![l] }
    }

    /// Freely reduces an arbitrary letter sequence.
    pub fn reduce<I: IntoIterator<Item = Letter>>(raw: I) -> Word {
        let mut w = Word::identity();
        for l in raw {
            w.push(l);
        }
        w
    }

    /// Appends a letter, cancelling it against the last letter if possible.
    pub fn push(&mut self, l: Letter) {
        if self.letters.last() == Some(&l.inverse()) {
            self.letters.pop();
        } else {
            self.letters.push(l);
        }
    }

    /// Right-multiplies in place by a reduced word.
    pub fn append(&mut self, other: &Word) {
        for &l in &other.letters {
            self.push(l);
        }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn multiply(&self, other: &Word) -> Word {
        let mut out = self.clone();
        out.append(other);
        out
    }

    pub fn inverse(&self) -> Word {
        Word {
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out.append(&base);
        }
        out
    }

    /// Splits the word as `conjugator · core · conjugator⁻¹` with `core`
    /// cyclically reduced (its first and last letters do not cancel).
    pub fn cyclic_reduce(&self) -> (Word, Word) {
        let n = self.letters.len();
        let mut i = 0;
        while 2 * i + 1 < n && self.letters[i] == self.letters[n - 1 - i].inverse() {
            i += 1;
        }
        let conjugator = Word {
            letters: self.letters[..i].to_vec(),
        };
        let core = Word {
            letters: self.letters[i..n - i].to_vec(),
        };
        (core, conjugator)
    }

    /// Lexicographically least rotation of the cyclic reduction. Equal for
    /// conjugate words, so it names a conjugacy class.
    pub fn conjugacy_representative(&self) -> Word {
        let (core, _) = self.cyclic_reduce();
        let n = core.len();
        (0..n)
            .map(|r| Word {
                letters: core.letters[r..]
                    .iter()
                    .chain(&core.letters[..r])
                    .copied()
                    .collect(),
            })
            .min()
            .unwrap_or_default()
    }

    /// Exponent sums per generator (index 0 is generator 1).
    pub fn abelianization(&self, rank: usize) -> Vec<i64> {
        let mut out = vec![0; rank];
        for l in &self.letters {
            out[l.generator() as usize - 1] += l.sign() as i64;
        }
        out
    }
}

impl From<Letter> for Word {
    fn from(l: Letter) -> Word {
        Word::letter(l)
    }
}

impl Mul for &Word {
    type Output = Word;

    fn mul(self, rhs: &Word) -> Word {
        self.multiply(rhs)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = WordError;

    fn from_str(s: &str) -> Result<Word, WordError> {
        let letters = s
            .trim()
            .chars()
            .map(Letter::from_char)
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Word::reduce(letters))
    }
}

/// All reduced words of length ≤ `maxlen` over `rank` generators, shortest first.
pub fn reduced_words(rank: u8, maxlen: usize) -> Vec<Word> {
    let alphabet: Vec<Letter> = (1..=rank)
        .flat_map(|g| [Letter::new(g, true), Letter::new(g, false)])
        .collect();
    let mut out = vec![Word::identity()];
    let mut frontier = vec![Word::identity()];
    for _ in 0..maxlen {
        let mut next = Vec::new();
        for w in &frontier {
            for &l in &alphabet {
                if w.letters.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.letters.push(l);
                next.push(v);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}
