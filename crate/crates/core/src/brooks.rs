//! Brooks counting quasimorphisms `h_w(g) = #w(g) − #w⁻¹(g)` on a free group
//! and their homogenizations.

use thiserror::Error;

use crate::word::{reduced_words, Word};

/// Default cap on `(f, g)` pairs visited by [`CountingQM::estimate_defect`].
pub const DEFAULT_DEFECT_BUDGET: usize = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QmError {
    #[error("counting pattern must be a nonempty word")]
    EmptyPattern,
    #[error("defect enumeration needs {pairs} pairs, over the budget of {budget}")]
    EnumerationBudget { pairs: usize, budget: usize },
    #[error("maxlen must be at least 1")]
    ZeroLength,
}

/// Number of (possibly overlapping) occurrences of `w` as a subword of `g`.
pub fn count_occurrences(w: &Word, g: &Word) -> usize {
    let (w, g) = (w.letters(), g.letters());
    if w.is_empty() || g.len() < w.len() {
        return 0;
    }
    g.windows(w.len()).filter(|s| *s == w).count()
}

/// Occurrences of `w` in the bi-infinite periodic word `…ccc…` that start in
/// one period. `c` must be cyclically reduced so that the periodic word is reduced.
fn count_cyclic(w: &Word, c: &Word) -> usize {
    let (w, c) = (w.letters(), c.letters());
    let n = c.len();
    if n == 0 || w.is_empty() {
        return 0;
    }
    (0..n)
        .filter(|&i| w.iter().enumerate().all(|(k, l)| c[(i + k) % n] == *l))
        .count()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountingQM {
    pattern: Word,
    inverse_pattern: Word,
}

impl CountingQM {
    pub fn new(pattern: Word) -> Result<CountingQM, QmError> {
        if pattern.is_identity() {
            return Err(QmError::EmptyPattern);
        }
        let inverse_pattern = pattern.inverse();
        Ok(CountingQM {
            pattern,
            inverse_pattern,
        })
    }

    pub fn pattern(&self) -> &Word {
        &self.pattern
    }

    /// `h_w(g)`.
    pub fn value(&self, g: &Word) -> f64 {
        count_occurrences(&self.pattern, g) as f64
            - count_occurrences(&self.inverse_pattern, g) as f64
    }

    /// Exact homogenization `lim h_w(gᵏ)/k`, read off the cyclic word of `g`.
    pub fn homogenized(&self, g: &Word) -> f64 {
        let (core, _) = g.cyclic_reduce();
        count_cyclic(&self.pattern, &core) as f64 - count_cyclic(&self.inverse_pattern, &core) as f64
    }

    /// `h_w(gᵏ)/k`: the limit definition truncated at `k`. A cross-check for
    /// [`CountingQM::homogenized`], off by at most `defect / k`.
    pub fn homogenize_oracle(&self, g: &Word, k: u32) -> f64 {
        assert!(k >= 1);
        self.value(&g.pow(k as i64)) / k as f64
    }

    /// `r̄(a) + r̄(b) − r̄(ab)` for the given pair.
    pub fn deficiency(&self, a: &Word, b: &Word) -> f64 {
        self.homogenized(a) + self.homogenized(b) - self.homogenized(&(a * b))
    }

    /// `sup |h(fg) − h(f) − h(g)|` over reduced rank-2 words with `|f|, |g| ≤ maxlen`.
    /// A lower bound for the defect.
    pub fn estimate_defect(&self, maxlen: usize) -> Result<f64, QmError> {
        self.estimate_defect_with_budget(maxlen, DEFAULT_DEFECT_BUDGET)
    }

    pub fn estimate_defect_with_budget(&self, maxlen: usize, budget: usize) -> Result<f64, QmError> {
        if maxlen == 0 {
            return Err(QmError::ZeroLength);
        }
        // 1 + 4(3^L − 1)/2 words
        let words = 1 + 2 * (3usize.saturating_pow(maxlen as u32) - 1);
        let pairs = words.saturating_mul(words);
        if pairs > budget {
            return Err(QmError::EnumerationBudget { pairs, budget });
        }
        let all = reduced_words(2, maxlen);
        let values: Vec<f64> = all.iter().map(|w| self.value(w)).collect();
        let mut sup = 0.0f64;
        for (f, hf) in all.iter().zip(&values) {
            for (g, hg) in all.iter().zip(&values) {
                let d = (self.value(&(f * g)) - hf - hg).abs();
                sup = sup.max(d);
            }
        }
        Ok(sup)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn qm(s: &str) -> CountingQM {
        CountingQM::new(w(s)).unwrap()
    }

    /// Position-by-position scan, written independently of `windows`.
    fn scan_count(pattern: &str, text: &str) -> usize {
        let (p, t): (Vec<char>, Vec<char>) = (pattern.chars().collect(), text.chars().collect());
        let mut n = 0;
        let mut i = 0;
        while i + p.len() <= t.len() {
            if (0..p.len()).all(|k| t[i + k] == p[k]) {
                n += 1;
            }
            i += 1;
        }
        n
    }

    #[test]
    fn count_examples() {
        assert_eq!(scan_count("ab", "abab"), 2);
        assert_eq!(count_occurrences(&w("ab"), &w("abab")), 2);
        assert_eq!(count_occurrences(&w("ab"), &w("a")), 0);
        assert_eq!(scan_count("aa", "aaa"), 2);
        assert_eq!(count_occurrences(&w("aa"), &w("aaa")), 2);
    }

    #[test]
    fn brooks_value_examples() {
        let q = qm("ab");
        assert_eq!(q.value(&w("abab")), 2.0);
        assert_eq!(q.value(&w("BA")), -1.0);
        assert_eq!(q.value(&Word::identity()), 0.0);
    }

    #[test]
    fn homogenized_reference_values() {
        let q = qm("ab");
        assert_eq!(q.homogenized(&w("a")), 0.0);
        assert_eq!(q.homogenized(&w("b")), 0.0);
        assert_eq!(q.homogenized(&w("ab")), 1.0);
        assert_eq!(q.deficiency(&w("a"), &w("b")), -1.0);
        for g in ["a", "b", "ab"] {
            assert!((q.homogenize_oracle(&w(g), 200) - q.homogenized(&w(g))).abs() <= 2.0 / 200.0);
        }

        let c = qm("abAB");
        assert_eq!(c.homogenized(&w("a")), 0.0);
        assert_eq!(c.homogenized(&w("b")), 0.0);
        assert_eq!(c.homogenized(&w("abAB")), 1.0);
        assert_eq!(c.homogenized(&w("ab")), 0.0);
        assert!((c.homogenize_oracle(&w("abAB"), 200) - 1.0).abs() <= 2.0 / 200.0);
    }

    #[test]
    fn oracle_examples() {
        let q = qm("ab");
        let d = q.estimate_defect(4).unwrap();
        assert!((q.homogenize_oracle(&w("ab"), 100) - 1.0).abs() <= d / 100.0 + 1e-12);
        assert_eq!(q.homogenize_oracle(&w("a"), 37), 0.0);
        assert!((q.homogenize_oracle(&w("ba"), 100) - 1.0).abs() <= d / 100.0 + 1e-12);
    }

    #[test]
    fn defect_brute_force() {
        let q = qm("ab");
        let d1 = q.estimate_defect(1).unwrap();
        let d2 = q.estimate_defect(2).unwrap();
        let d4 = q.estimate_defect(4).unwrap();
        // f = a, g = b creates one occurrence of ab
        assert_eq!(d1, 1.0);
        assert!(d1 <= d2 && d2 <= d4);
        assert!(matches!(
            q.estimate_defect_with_budget(9, 1_000),
            Err(QmError::EnumerationBudget { .. })
        ));
        assert_eq!(q.estimate_defect(0), Err(QmError::ZeroLength));
    }

    #[test]
    fn empty_pattern_rejected() {
        assert_eq!(CountingQM::new(Word::identity()), Err(QmError::EmptyPattern));
    }

    fn word_strategy(max: usize) -> impl Strategy<Value = Word> {
        prop::collection::vec(0..4usize, 0..max).prop_map(|v| {
            Word::reduce(v.into_iter().map(|i| {
                [
                    crate::word::Letter::A,
                    crate::word::Letter::A_INV,
                    crate::word::Letter::B,
                    crate::word::Letter::B_INV,
                ][i]
            }))
        })
    }

    proptest! {
        #[test]
        fn homogeneity_and_antisymmetry(g in word_strategy(14), k in -8i64..=8) {
            for q in [qm("ab"), qm("abAB"), qm("aab")] {
                let r = q.homogenized(&g);
                prop_assert_eq!(q.homogenized(&g.pow(k)), k as f64 * r);
                prop_assert_eq!(q.homogenized(&g.inverse()), -r);
                prop_assert_eq!(q.homogenized(&g.pow(2)), 2.0 * r);
            }
        }

        #[test]
        fn conjugation_invariance(g in word_strategy(12), u in word_strategy(12)) {
            for q in [qm("ab"), qm("abAB")] {
                let conj = &(&u * &g) * &u.inverse();
                prop_assert_eq!(q.homogenized(&conj), q.homogenized(&g));
            }
        }
    }
}
