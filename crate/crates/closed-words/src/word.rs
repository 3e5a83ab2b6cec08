//! Words over a finite alphabet, their borders, and the closed/privileged
//! predicates.
//!
//! A non-empty word `w` is a *border* of `u` if `|w| < |u|` and `w` is both a
//! prefix and a suffix of `u`. A word is *closed* if it has a border that
//! occurs in it exactly twice; it is *privileged* if it has length at most 1
//! or has a privileged border that occurs exactly twice. By convention words
//! of length 0 and 1 are treated as closed (and privileged), so that the
//! privileged words are a subset of the closed words at every length.

use std::collections::HashMap;

use thiserror::Error;

/// A single symbol, an integer in `[0, q)`.
pub type Letter = u32;

/// Errors from word construction and the basic word operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum WordError {
    #[error("alphabet size must be at least 2, got {0}")]
    AlphabetTooSmall(usize),
    #[error("letter {letter} out of range for alphabet of size {q}")]
    LetterOutOfRange { letter: Letter, q: usize },
    #[error("empty pattern not allowed")]
    EmptyPattern,
    #[error("cannot parse word {text:?}: {reason}")]
    Parse { text: String, reason: String },
}

/// A `q`-letter alphabet, `q >= 2`. Letters are the integers `0..q`,
/// rendered as `a`, `b`, `c`, ... when `q <= 26`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alphabet {
    q: usize,
}

impl Alphabet {
    pub fn new(q: usize) -> Result<Self, WordError> {
        if q < 2 || q > Letter::MAX as usize {
            return Err(WordError::AlphabetTooSmall(q));
        }
        Ok(Alphabet { q })
    }

    /// The number of letters, `q`.
    pub fn size(&self) -> usize {
        self.q
    }

    pub fn contains(&self, letter: Letter) -> bool {
        (letter as usize) < self.q
    }

    pub fn letters(&self) -> impl Iterator<Item = Letter> {
        0..self.q as Letter
    }
}

/// A finite word over some alphabet; letters are integers in `[0, q)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    /// Builds a word, checking every letter against the alphabet.
    pub fn new(letters: Vec<Letter>, alphabet: &Alphabet) -> Result<Self, WordError> {
        if let Some(&letter) = letters.iter().find(|&&l| !alphabet.contains(l)) {
            return Err(WordError::LetterOutOfRange {
                letter,
                q: alphabet.size(),
            });
        }
        Ok(Word { letters })
    }

    pub fn empty() -> Self {
        Word::default()
    }

    /// Internal constructor for letter sequences that are valid by
    /// construction (canonical forms, census counters, prefixes).
    pub(crate) fn from_raw(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    /// Parses the textual rendering: letters `a`-`z` when `q <= 26`,
    /// comma-separated integers otherwise. The empty string is the empty word.
    pub fn parse(text: &str, alphabet: &Alphabet) -> Result<Self, WordError> {
        if text.is_empty() {
            return Ok(Word::empty());
        }
        let letters: Vec<Letter> = if alphabet.size() <= 26 {
            text.chars()
                .map(|c| {
                    if c.is_ascii_lowercase() {
                        Ok(c as Letter - 'a' as Letter)
                    } else {
                        Err(WordError::Parse {
                            text: text.to_owned(),
                            reason: format!("invalid letter {c:?}"),
                        })
                    }
                })
                .collect::<Result<_, _>>()?
        } else {
            text.split(',')
                .map(|part| {
                    part.trim().parse::<Letter>().map_err(|e| WordError::Parse {
                        text: text.to_owned(),
                        reason: format!("invalid letter {part:?}: {e}"),
                    })
                })
                .collect::<Result<_, _>>()?
        };
        Word::new(letters, alphabet)
    }

    /// Renders per the same convention `parse` accepts.
    pub fn render(&self, alphabet: &Alphabet) -> String {
        if alphabet.size() <= 26 {
            self.letters
                .iter()
                .map(|&l| (b'a' + l as u8) as char)
                .collect()
        } else {
            self.letters
                .iter()
                .map(|l| l.to_string())
                .collect::<Vec<_>>()
                .join(",")
        }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    /// All border lengths of the word together with the maximal one.
    pub fn border_profile(&self) -> BorderProfile {
        let fail = failure_array(&self.letters);
        let maximal = fail.last().copied().unwrap_or(0);
        // The borders of a word are exactly the failure-function iterates of
        // its full length, collected here in ascending order.
        let mut lengths = Vec::new();
        let mut len = maximal;
        while len > 0 {
            lengths.push(len);
            len = fail[len - 1];
        }
        lengths.reverse();
        BorderProfile {
            word: self.clone(),
            border_lengths: lengths,
            maximal_border_length: maximal,
        }
    }

    /// The longest border, or `None` for unbordered words.
    pub fn maximal_border(&self) -> Option<Word> {
        let fail = failure_array(&self.letters);
        match fail.last().copied().unwrap_or(0) {
            0 => None,
            b => Some(Word::from_raw(self.letters[..b].to_vec())),
        }
    }

    /// Number of (possibly overlapping) occurrences of `pattern` in `self`.
    /// The empty pattern is rejected.
    pub fn count_occurrences(&self, pattern: &Word) -> Result<usize, WordError> {
        if pattern.is_empty() {
            return Err(WordError::EmptyPattern);
        }
        Ok(count_occurrences_in(&self.letters, &pattern.letters))
    }

    /// A word is closed if it has length at most 1 or its maximal border
    /// occurs in it exactly twice. (Any border occurring exactly twice is
    /// necessarily the maximal one, so this matches the existential form of
    /// the definition.)
    pub fn is_closed(&self) -> bool {
        let fail = failure_array(&self.letters);
        closed_with_border(&self.letters, &fail).0
    }

    /// A word is privileged if it has length at most 1 or has a privileged
    /// border occurring exactly twice. The test walks the maximal-border
    /// chain; see [`PrivilegeMemo`] for the memoized bulk variant.
    pub fn is_privileged(&self) -> bool {
        let mut memo = PrivilegeMemo::new();
        memo.is_privileged(&self.letters)
    }

    /// The image of the word under the letter renaming that maps letters to
    /// `0, 1, 2, ...` in order of first occurrence. Closedness,
    /// privilegedness, and factor-avoidance counts are invariant under
    /// letter renaming, so canonical forms serve as scan representatives.
    pub fn canonical_form(&self) -> Word {
        let mut rename: HashMap<Letter, Letter> = HashMap::new();
        let mut next: Letter = 0;
        let letters = self
            .letters
            .iter()
            .map(|&l| {
                *rename.entry(l).or_insert_with(|| {
                    let assigned = next;
                    next += 1;
                    assigned
                })
            })
            .collect();
        Word::from_raw(letters)
    }
}

/// The borders of a word: all border lengths in ascending order plus the
/// maximal border length (`0` encodes "no border").
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BorderProfile {
    word: Word,
    border_lengths: Vec<usize>,
    maximal_border_length: usize,
}

impl BorderProfile {
    pub fn word(&self) -> &Word {
        &self.word
    }

    pub fn border_lengths(&self) -> &[usize] {
        &self.border_lengths
    }

    pub fn maximal_border_length(&self) -> usize {
        self.maximal_border_length
    }

    pub fn maximal_border(&self) -> Option<Word> {
        match self.maximal_border_length {
            0 => None,
            b => Some(Word::from_raw(self.word.letters[..b].to_vec())),
        }
    }
}

/// The classic failure function: `fail[i]` is the length of the longest
/// border of the prefix of length `i + 1`. Linear time.
pub fn failure_array(letters: &[Letter]) -> Vec<usize> {
    let mut fail = Vec::new();
    failure_array_into(letters, &mut fail);
    fail
}

/// `failure_array` into a reused buffer; the census hot loop calls this once
/// per scanned word.
pub(crate) fn failure_array_into(letters: &[Letter], fail: &mut Vec<usize>) {
    fail.clear();
    if letters.is_empty() {
        return;
    }
    fail.push(0);
    let mut b = 0usize;
    for i in 1..letters.len() {
        while b > 0 && letters[b] != letters[i] {
            b = fail[b - 1];
        }
        if letters[b] == letters[i] {
            b += 1;
        }
        fail.push(b);
    }
}

/// Occurrences of the prefix of length `b >= 1` inside the whole word, using
/// the word's own failure array as the pattern table (the failure array of a
/// prefix is a prefix of the failure array).
pub(crate) fn count_prefix_occurrences(letters: &[Letter], fail: &[usize], b: usize) -> usize {
    debug_assert!(b >= 1 && b < letters.len());
    let mut state = 0usize;
    let mut count = 0usize;
    for &c in letters {
        while state > 0 && (state == b || letters[state] != c) {
            state = fail[state - 1];
        }
        if state < b && letters[state] == c {
            state += 1;
        }
        if state == b {
            count += 1;
        }
    }
    count
}

/// KMP occurrence count of `pattern` (non-empty) in `text`.
pub(crate) fn count_occurrences_in(text: &[Letter], pattern: &[Letter]) -> usize {
    let m = pattern.len();
    debug_assert!(m >= 1);
    let fail = failure_array(pattern);
    let mut state = 0usize;
    let mut count = 0usize;
    for &c in text {
        while state > 0 && (state == m || pattern[state] != c) {
            state = fail[state - 1];
        }
        if state < m && pattern[state] == c {
            state += 1;
        }
        if state == m {
            count += 1;
        }
    }
    count
}

/// Closed test given a precomputed failure array; returns the verdict and
/// the maximal border length (0 when unbordered or `|u| <= 1`).
pub(crate) fn closed_with_border(letters: &[Letter], fail: &[usize]) -> (bool, usize) {
    if letters.len() <= 1 {
        return (true, 0);
    }
    let b = fail[letters.len() - 1];
    if b == 0 {
        return (false, 0);
    }
    (count_prefix_occurrences(letters, fail, b) == 2, b)
}

/// Memo for bulk privileged tests, keyed by border-chain words.
///
/// The borders of a word are nested, so the privileged test only ever
/// descends through the maximal-border chain; every chain element is a prefix
/// of the word under test. Census workers keep one memo per shard so that the
/// short borders shared by many words are classified once.
#[derive(Debug, Default)]
pub struct PrivilegeMemo {
    map: HashMap<Box<[Letter]>, bool>,
}

impl PrivilegeMemo {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.map.clear();
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Privileged test over raw letters, memoizing every chain element it
    /// settles along the way.
    pub fn is_privileged(&mut self, letters: &[Letter]) -> bool {
        let mut settled_lengths: Vec<usize> = Vec::new();
        let mut len = letters.len();
        let mut fail = Vec::new();
        let verdict = loop {
            if len <= 1 {
                break true;
            }
            if let Some(&known) = self.map.get(&letters[..len]) {
                break known;
            }
            settled_lengths.push(len);
            failure_array_into(&letters[..len], &mut fail);
            let b = fail[len - 1];
            if b == 0 || count_prefix_occurrences(&letters[..len], &fail, b) != 2 {
                break false;
            }
            // The whole chain below this point shares the verdict of the
            // maximal border: each element already passed its closed check.
            len = b;
        };
        for &l in &settled_lengths {
            self.map.insert(letters[..l].into(), verdict);
        }
        verdict
    }
}
