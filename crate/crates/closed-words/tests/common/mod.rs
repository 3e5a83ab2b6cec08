//! Definitional oracles for the integration tests: direct transcriptions of
//! the definitions, sharing no code with the library's algorithmic paths.
//!
//! Each test binary uses its own subset of these.
#![allow(dead_code)]

use closed_words::Letter;

/// Iterator over all `q^n` letter sequences of length `n`, lexicographic.
pub struct AllWords {
    q: Letter,
    next: Option<Vec<Letter>>,
}

pub fn all_words(q: usize, n: usize) -> AllWords {
    AllWords {
        q: q as Letter,
        next: Some(vec![0; n]),
    }
}

impl Iterator for AllWords {
    type Item = Vec<Letter>;

    fn next(&mut self) -> Option<Vec<Letter>> {
        let current = self.next.take()?;
        let mut successor = current.clone();
        let mut i = successor.len();
        loop {
            if i == 0 {
                break;
            }
            i -= 1;
            successor[i] += 1;
            if successor[i] < self.q {
                self.next = Some(successor);
                break;
            }
            successor[i] = 0;
        }
        Some(current)
    }
}

/// Border lengths by definition: each proper prefix compared against the
/// suffix of the same length.
pub fn naive_borders(u: &[Letter]) -> Vec<usize> {
    (1..u.len())
        .filter(|&l| u[..l] == u[u.len() - l..])
        .collect()
}

/// Occurrence count by sliding-window comparison.
pub fn naive_count(u: &[Letter], w: &[Letter]) -> usize {
    if w.is_empty() || w.len() > u.len() {
        return 0;
    }
    u.windows(w.len()).filter(|window| *window == w).count()
}

/// Closed by definition: some border occurs exactly twice (length <= 1 words
/// count as closed by convention).
pub fn naive_is_closed(u: &[Letter]) -> bool {
    if u.len() <= 1 {
        return true;
    }
    naive_borders(u)
        .into_iter()
        .any(|l| naive_count(u, &u[..l]) == 2)
}

/// Privileged by the recursive definition, trying every border.
pub fn naive_is_privileged(u: &[Letter]) -> bool {
    if u.len() <= 1 {
        return true;
    }
    naive_borders(u)
        .into_iter()
        .any(|l| naive_is_privileged(&u[..l]) && naive_count(u, &u[..l]) == 2)
}
