//! Exact counting of words avoiding a fixed factor.
//!
//! `avoidance_count` computes A_w(n), the number of length-`n` words over a
//! `q`-letter alphabet containing no occurrence of the factor `w`, by dynamic
//! programming over the pattern's failure-function automaton. `mu_exact`
//! maximizes A_w(n) over all patterns of a given length, scanning canonical
//! forms only (avoidance counts are invariant under letter renaming).

use num_traits::Zero;
use rayon::prelude::*;
use thiserror::Error;

use crate::word::{failure_array, Alphabet, Letter, Word, WordError};
use crate::BigCount;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AvoidanceError {
    #[error(transparent)]
    Word(#[from] WordError),
    #[error("mu scan over {needed} patterns exceeds budget {budget}")]
    ScanBudgetExceeded { needed: u128, budget: u64 },
    #[error("enumeration of {needed} words exceeds budget {budget}")]
    EnumerationBudgetExceeded { needed: u128, budget: u64 },
}

/// Failure-function automaton of a single pattern `w` with `|w| = m`.
///
/// State `s` is the length of the longest suffix of the text read so far that
/// is a prefix of `w`; state `m` means `w` occurred. For avoidance counting
/// state `m` is treated as absorbing-reject, so its outgoing transitions are
/// never consulted (they are still filled with the usual continue-matching
/// values).
#[derive(Debug, Clone)]
pub struct FactorAutomaton {
    pattern: Word,
    q: usize,
    transitions: Vec<u32>,
}

impl FactorAutomaton {
    pub fn new(alphabet: &Alphabet, pattern: &Word) -> Result<Self, AvoidanceError> {
        if pattern.is_empty() {
            return Err(WordError::EmptyPattern.into());
        }
        let pattern = Word::new(pattern.letters().to_vec(), alphabet)?;
        let q = alphabet.size();
        let m = pattern.len();
        let fail = failure_array(pattern.letters());
        let w = pattern.letters();
        let mut transitions = vec![0u32; (m + 1) * q];
        for s in 0..=m {
            for a in 0..q {
                let t = if s < m && w[s] as usize == a {
                    (s + 1) as u32
                } else if s == 0 {
                    0
                } else {
                    transitions[fail[s - 1] * q + a]
                };
                transitions[s * q + a] = t;
            }
        }
        Ok(FactorAutomaton {
            pattern,
            q,
            transitions,
        })
    }

    pub fn pattern(&self) -> &Word {
        &self.pattern
    }

    /// Number of states, `m + 1`.
    pub fn state_count(&self) -> usize {
        self.pattern.len() + 1
    }

    pub fn accepting_state(&self) -> usize {
        self.pattern.len()
    }

    pub fn next_state(&self, state: usize, letter: Letter) -> usize {
        self.transitions[state * self.q + letter as usize] as usize
    }
}

/// A_w(n): the exact number of length-`n` words avoiding the factor `w`,
/// in `O(n * m * q)` big-integer additions.
pub fn avoidance_count(
    alphabet: &Alphabet,
    pattern: &Word,
    n: usize,
) -> Result<BigCount, AvoidanceError> {
    let automaton = FactorAutomaton::new(alphabet, pattern)?;
    Ok(avoidance_count_with(&automaton, n))
}

/// DP core of [`avoidance_count`] for a prebuilt automaton; useful when one
/// pattern is evaluated at many lengths.
pub fn avoidance_count_with(automaton: &FactorAutomaton, n: usize) -> BigCount {
    let m = automaton.pattern.len();
    let q = automaton.q;
    let mut cur = vec![BigCount::zero(); m];
    let mut next = vec![BigCount::zero(); m];
    cur[0] = BigCount::from(1u32);
    for _ in 0..n {
        for (s, count) in cur.iter().enumerate() {
            if count.is_zero() {
                continue;
            }
            for a in 0..q {
                let t = automaton.transitions[s * q + a] as usize;
                if t < m {
                    next[t] += count;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
        for value in &mut next {
            value.set_zero();
        }
    }
    cur.into_iter().sum()
}

/// Result of a mu scan: the maximum avoidance count together with the
/// canonical pattern attaining it (smallest such pattern in lexicographic
/// order, for deterministic reporting).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MuValue {
    pub value: BigCount,
    pub witness: Word,
}

/// mu(n, m) = max over all patterns w of length m of A_w(n).
///
/// The scan covers canonical forms only; every pattern is a letter renaming
/// of some canonical form and renaming preserves A_w(n). Rejects scans whose
/// raw pattern count `q^m` exceeds `scan_budget`.
pub fn mu_exact(
    alphabet: &Alphabet,
    n: usize,
    m: usize,
    scan_budget: u64,
) -> Result<BigCount, AvoidanceError> {
    mu_exact_with_witness(alphabet, n, m, scan_budget).map(|mu| mu.value)
}

/// [`mu_exact`] plus the attaining canonical pattern.
pub fn mu_exact_with_witness(
    alphabet: &Alphabet,
    n: usize,
    m: usize,
    scan_budget: u64,
) -> Result<MuValue, AvoidanceError> {
    if m == 0 {
        return Err(WordError::EmptyPattern.into());
    }
    let needed = pow_u128(alphabet.size(), m);
    if needed.is_none_or(|p| p > scan_budget as u128) {
        return Err(AvoidanceError::ScanBudgetExceeded {
            needed: needed.unwrap_or(u128::MAX),
            budget: scan_budget,
        });
    }
    let patterns: Vec<Word> = canonical_patterns(alphabet, m).collect();
    let best = patterns
        .into_par_iter()
        .map(|w| {
            let automaton = FactorAutomaton::new(alphabet, &w).expect("canonical pattern is valid");
            MuValue {
                value: avoidance_count_with(&automaton, n),
                witness: w,
            }
        })
        .reduce_with(|a, b| {
            // max by value; ties break toward the lexicographically smaller
            // witness so the scan is deterministic under any parallel split
            match a.value.cmp(&b.value) {
                std::cmp::Ordering::Greater => a,
                std::cmp::Ordering::Less => b,
                std::cmp::Ordering::Equal => {
                    if a.witness <= b.witness {
                        a
                    } else {
                        b
                    }
                }
            }
        })
        .expect("at least one canonical pattern exists for m >= 1");
    Ok(best)
}

/// The exact integer form `(q^m - 1)^{floor(n/m)} * q^{n mod m}` of the
/// avoidance upper bound `q^n (1 - q^{-m})^{floor(n/m)}`: chop the word into
/// `floor(n/m)` blocks of length `m` plus a short rest; an avoiding word's
/// blocks each differ from `w`. The two forms are equal by rearrangement, and
/// the integer form keeps inequality checks exact.
pub fn mu_upper_lemma1(
    alphabet: &Alphabet,
    n: usize,
    m: usize,
) -> Result<BigCount, AvoidanceError> {
    if m == 0 {
        return Err(WordError::EmptyPattern.into());
    }
    let q = BigCount::from(alphabet.size());
    let blocks = (n / m) as u32;
    let rest = (n % m) as u32;
    let block_choices = q.pow(m as u32) - 1u32;
    Ok(block_choices.pow(blocks) * q.pow(rest))
}

/// Brute-force oracle for [`avoidance_count`]: enumerates all `q^n` words
/// and tests containment by direct window comparison. Independent of the
/// automaton path on purpose.
pub fn brute_force_avoidance(
    alphabet: &Alphabet,
    pattern: &Word,
    n: usize,
    enumeration_budget: u64,
) -> Result<BigCount, AvoidanceError> {
    if pattern.is_empty() {
        return Err(WordError::EmptyPattern.into());
    }
    let pattern = Word::new(pattern.letters().to_vec(), alphabet)?;
    let needed = pow_u128(alphabet.size(), n);
    if needed.is_none_or(|p| p > enumeration_budget as u128) {
        return Err(AvoidanceError::EnumerationBudgetExceeded {
            needed: needed.unwrap_or(u128::MAX),
            budget: enumeration_budget,
        });
    }
    let q = alphabet.size() as Letter;
    let w = pattern.letters();
    let m = w.len();
    let mut word = vec![0 as Letter; n];
    let mut avoiding = 0u64;
    loop {
        let contains = n >= m && word.windows(m).any(|window| window == w);
        if !contains {
            avoiding += 1;
        }
        // radix-q odometer
        let mut i = n;
        loop {
            if i == 0 {
                return Ok(BigCount::from(avoiding));
            }
            i -= 1;
            word[i] += 1;
            if word[i] < q {
                break;
            }
            word[i] = 0;
        }
    }
}

/// Iterator over the canonical patterns of length `m`: words whose letters
/// first appear in the order `0, 1, 2, ...` (restricted growth sequences
/// capped at `q` distinct letters), in lexicographic order.
pub fn canonical_patterns(alphabet: &Alphabet, m: usize) -> CanonicalPatterns {
    CanonicalPatterns {
        q: alphabet.size() as Letter,
        next: if m == 0 { None } else { Some(vec![0; m]) },
        emit_empty: m == 0,
    }
}

pub struct CanonicalPatterns {
    q: Letter,
    next: Option<Vec<Letter>>,
    emit_empty: bool,
}

impl Iterator for CanonicalPatterns {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.emit_empty {
            self.emit_empty = false;
            return Some(Word::empty());
        }
        let current = self.next.take()?;
        // advance: rightmost position that can still grow within both the
        // alphabet and the first-occurrence discipline
        let mut successor = current.clone();
        let mut pos = successor.len();
        loop {
            if pos == 0 {
                break;
            }
            pos -= 1;
            let prefix_max = successor[..pos].iter().copied().max();
            let cap = prefix_max.map_or(0, |x| x + 1).min(self.q - 1);
            if successor[pos] < cap {
                successor[pos] += 1;
                for slot in successor[pos + 1..].iter_mut() {
                    *slot = 0;
                }
                self.next = Some(successor);
                break;
            }
        }
        Some(Word::from_raw(current))
    }
}

fn pow_u128(base: usize, exp: usize) -> Option<u128> {
    let mut result: u128 = 1;
    for _ in 0..exp {
        result = result.checked_mul(base as u128)?;
    }
    Some(result)
}
