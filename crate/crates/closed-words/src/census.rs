//! Exhaustive ground truth: exact counts of closed and privileged words by
//! scanning all `q^n` words, with prefix sharding for parallelism and a
//! line-oriented on-disk cache.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use num_traits::Zero;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::word::{closed_with_border, failure_array_into, Alphabet, Letter, PrivilegeMemo};
use crate::BigCount;

#[derive(Debug, Error)]
pub enum CensusError {
    #[error("census of {q}^{n} words exceeds enumeration budget {budget}")]
    BudgetExceeded { q: usize, n: usize, budget: u64 },
    #[error("census I/O failed: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed census file {path}: {reason}")]
    Malformed { path: PathBuf, reason: String },
    #[error("checksum mismatch in census file {path}")]
    ChecksumMismatch { path: PathBuf },
    #[error("census file {path} holds q={found_q} n={found_n}, expected q={want_q} n={want_n}")]
    HeaderMismatch {
        path: PathBuf,
        found_q: usize,
        found_n: usize,
        want_q: usize,
        want_n: usize,
    },
}

/// Exact counts for one `(q, n)`: `closed_total` = C(n), `privileged_total`
/// = B(n), and `closed_by_border[m]` = C(n, m), the closed words whose
/// maximal border has length `m` (nonzero entries only, `1 <= m <= n - 1`).
///
/// For `n >= 2` the border classes partition the closed words, so the map
/// sums to `closed_total`. Lengths 0 and 1 are closed by convention and
/// carry no border, so their tables have an empty map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusTable {
    q: usize,
    n: usize,
    closed_total: BigCount,
    privileged_total: BigCount,
    closed_by_border: BTreeMap<usize, BigCount>,
}

impl CensusTable {
    /// Assembles and validates a table. Rejects any violation of the
    /// structural invariants (partition, subset, `C(n) <= q^n`, border
    /// lengths in range).
    pub fn from_parts(
        q: usize,
        n: usize,
        closed_total: BigCount,
        privileged_total: BigCount,
        closed_by_border: BTreeMap<usize, BigCount>,
    ) -> Result<Self, String> {
        if q < 2 {
            return Err(format!("alphabet size {q} below 2"));
        }
        for (&m, count) in &closed_by_border {
            if m == 0 || m + 1 > n {
                return Err(format!("border length {m} outside [1, {}]", n.max(1) - 1));
            }
            if count.is_zero() {
                return Err(format!("explicit zero count at m={m}"));
            }
        }
        if n >= 2 {
            let sum: BigCount = closed_by_border.values().sum();
            if sum != closed_total {
                return Err(format!(
                    "border classes sum to {sum}, closed_total is {closed_total}"
                ));
            }
        }
        if privileged_total > closed_total {
            return Err(format!(
                "privileged_total {privileged_total} exceeds closed_total {closed_total}"
            ));
        }
        if closed_total > BigCount::from(q).pow(n as u32) {
            return Err(format!("closed_total {closed_total} exceeds q^n"));
        }
        Ok(CensusTable {
            q,
            n,
            closed_total,
            privileged_total,
            closed_by_border,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// C(n).
    pub fn closed_total(&self) -> &BigCount {
        &self.closed_total
    }

    /// B(n).
    pub fn privileged_total(&self) -> &BigCount {
        &self.privileged_total
    }

    /// C(n, m), zero when no closed word has a maximal border of length `m`.
    pub fn closed_with_border(&self, m: usize) -> BigCount {
        self.closed_by_border
            .get(&m)
            .cloned()
            .unwrap_or_else(BigCount::zero)
    }

    /// Nonzero `(m, C(n, m))` entries in ascending `m` order.
    pub fn closed_by_border(&self) -> &BTreeMap<usize, BigCount> {
        &self.closed_by_border
    }
}

/// One census shard: the words with a fixed length-`prefix_length` prefix,
/// identified by the prefix's rank in `[0, q^prefix_length)`. The shards of a
/// plan partition the full word set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardSpec {
    pub prefix_length: usize,
    pub prefix_rank: u64,
}

/// Shard layout for a census of `q^n` words on `workers` threads: the prefix
/// length is the smallest `p` with `q^p >= 64 * workers` (capped at `n`),
/// giving enough shards for uncoordinated load balance. Any layout yields the
/// same table.
pub fn shard_plan(alphabet: &Alphabet, n: usize, workers: usize) -> Vec<ShardSpec> {
    let q = alphabet.size() as u64;
    let target = 64u64.saturating_mul(workers.max(1) as u64);
    let mut prefix_length = 0usize;
    let mut shards = 1u64;
    while shards < target && prefix_length < n {
        prefix_length += 1;
        shards = shards.saturating_mul(q);
    }
    (0..shards)
        .map(|prefix_rank| ShardSpec {
            prefix_length,
            prefix_rank,
        })
        .collect()
}

#[derive(Clone)]
struct ShardCounts {
    closed: u64,
    privileged: u64,
    by_border: Vec<u64>,
}

impl ShardCounts {
    fn new(n: usize) -> Self {
        ShardCounts {
            closed: 0,
            privileged: 0,
            by_border: vec![0; n],
        }
    }

    fn merge(mut self, other: ShardCounts) -> ShardCounts {
        self.closed += other.closed;
        self.privileged += other.privileged;
        for (mine, theirs) in self.by_border.iter_mut().zip(other.by_border) {
            *mine += theirs;
        }
        self
    }
}

/// Exact census of all `q^n` words: classifies each word as closed (with its
/// maximal-border length) and privileged. Deterministic for every worker
/// count. Refuses censuses larger than `enumeration_budget` words.
pub fn run_census(
    alphabet: &Alphabet,
    n: usize,
    workers: usize,
    enumeration_budget: u64,
) -> Result<CensusTable, CensusError> {
    let q = alphabet.size();
    let within_budget = pow_u128(q, n).is_some_and(|p| p <= enumeration_budget as u128);
    if !within_budget {
        return Err(CensusError::BudgetExceeded {
            q,
            n,
            budget: enumeration_budget,
        });
    }
    if n <= 1 {
        // no borders; closed and privileged by convention
        let total = BigCount::from(q).pow(n as u32);
        return Ok(CensusTable {
            q,
            n,
            closed_total: total.clone(),
            privileged_total: total,
            closed_by_border: BTreeMap::new(),
        });
    }

    let shards = shard_plan(alphabet, n, workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .expect("building census thread pool");
    let counts = pool.install(|| {
        shards
            .par_iter()
            .map(|shard| scan_shard(alphabet, n, shard))
            .reduce(|| ShardCounts::new(n), ShardCounts::merge)
    });

    let closed_by_border: BTreeMap<usize, BigCount> = counts
        .by_border
        .iter()
        .enumerate()
        .filter(|(_, &c)| c > 0)
        .map(|(m, &c)| (m, BigCount::from(c)))
        .collect();
    Ok(CensusTable {
        q,
        n,
        closed_total: BigCount::from(counts.closed),
        privileged_total: BigCount::from(counts.privileged),
        closed_by_border,
    })
}

fn scan_shard(alphabet: &Alphabet, n: usize, shard: &ShardSpec) -> ShardCounts {
    let q = alphabet.size() as Letter;
    let p = shard.prefix_length;
    let mut word = vec![0 as Letter; n];
    let mut rank = shard.prefix_rank;
    for i in (0..p).rev() {
        word[i] = (rank % q as u64) as Letter;
        rank /= q as u64;
    }

    let mut counts = ShardCounts::new(n);
    let mut fail: Vec<usize> = Vec::with_capacity(n);
    let mut memo = PrivilegeMemo::new();
    loop {
        failure_array_into(&word, &mut fail);
        let (closed, border) = closed_with_border(&word, &fail);
        if closed {
            counts.closed += 1;
            counts.by_border[border] += 1;
            if memo.is_privileged(&word[..border]) {
                counts.privileged += 1;
            }
        }
        // odometer over the suffix positions p..n
        let mut i = n;
        loop {
            if i == p {
                return counts;
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

/// Censuses for every `n` in the range, reusing `cache` where possible and
/// storing freshly computed tables back into it.
pub fn census_range(
    alphabet: &Alphabet,
    range: RangeInclusive<usize>,
    workers: usize,
    enumeration_budget: u64,
    mut cache: Option<&mut CensusCache>,
) -> Result<Vec<CensusTable>, CensusError> {
    let mut tables = Vec::new();
    for n in range {
        if let Some(cache) = cache.as_deref_mut() {
            if let Some(table) = cache.load(alphabet.size(), n)? {
                tables.push(table);
                continue;
            }
        }
        let table = run_census(alphabet, n, workers, enumeration_budget)?;
        if let Some(cache) = cache.as_deref_mut() {
            cache.store(&table)?;
        }
        tables.push(table);
    }
    Ok(tables)
}

/// Writes a table in the cache file format (see [`load_census`]).
pub fn save_census(path: &Path, table: &CensusTable) -> Result<(), CensusError> {
    let body = render_body(table);
    let checksum = body_checksum(&body);
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let mut file = fs::File::create(path)?;
    write!(
        file,
        "q={} n={} checksum={}\n{}",
        table.q, table.n, checksum, body
    )?;
    Ok(())
}

/// Reads a table written by [`save_census`].
///
/// Format: a header line `q=<int> n=<int> checksum=<hex>` followed by
/// `closed_total=<decimal>`, `privileged_total=<decimal>`, and one
/// `m=<int> count=<decimal>` line per nonzero C(n, m). The checksum is the
/// SHA-256 of everything after the header line.
pub fn load_census(path: &Path) -> Result<CensusTable, CensusError> {
    let raw = fs::read_to_string(path)?;
    let malformed = |reason: String| CensusError::Malformed {
        path: path.to_path_buf(),
        reason,
    };
    let (header, body) = raw
        .split_once('\n')
        .ok_or_else(|| malformed("missing header line".into()))?;
    let mut q = None;
    let mut n = None;
    let mut checksum = None;
    for token in header.split_whitespace() {
        match token.split_once('=') {
            Some(("q", v)) => {
                q = Some(
                    v.parse::<usize>()
                        .map_err(|e| malformed(format!("bad q: {e}")))?,
                )
            }
            Some(("n", v)) => {
                n = Some(
                    v.parse::<usize>()
                        .map_err(|e| malformed(format!("bad n: {e}")))?,
                )
            }
            Some(("checksum", v)) => checksum = Some(v.to_owned()),
            _ => return Err(malformed(format!("unexpected header token {token:?}"))),
        }
    }
    let q = q.ok_or_else(|| malformed("header missing q".into()))?;
    let n = n.ok_or_else(|| malformed("header missing n".into()))?;
    let checksum = checksum.ok_or_else(|| malformed("header missing checksum".into()))?;
    if checksum != body_checksum(body) {
        return Err(CensusError::ChecksumMismatch {
            path: path.to_path_buf(),
        });
    }

    let mut closed_total = None;
    let mut privileged_total = None;
    let mut by_border = BTreeMap::new();
    for line in body.lines() {
        if let Some(v) = line.strip_prefix("closed_total=") {
            closed_total = Some(parse_count(v).map_err(&malformed)?);
        } else if let Some(v) = line.strip_prefix("privileged_total=") {
            privileged_total = Some(parse_count(v).map_err(&malformed)?);
        } else if let Some(rest) = line.strip_prefix("m=") {
            let (m, count) = rest
                .split_once(" count=")
                .ok_or_else(|| malformed(format!("bad border line {line:?}")))?;
            let m: usize = m.parse().map_err(|e| malformed(format!("bad m: {e}")))?;
            let count = parse_count(count).map_err(&malformed)?;
            if by_border.insert(m, count).is_some() {
                return Err(malformed(format!("duplicate border length {m}")));
            }
        } else {
            return Err(malformed(format!("unexpected line {line:?}")));
        }
    }
    let closed_total = closed_total.ok_or_else(|| malformed("missing closed_total".into()))?;
    let privileged_total =
        privileged_total.ok_or_else(|| malformed("missing privileged_total".into()))?;
    CensusTable::from_parts(q, n, closed_total, privileged_total, by_border).map_err(malformed)
}

fn parse_count(text: &str) -> Result<BigCount, String> {
    text.parse::<BigCount>()
        .map_err(|e| format!("bad count {text:?}: {e}"))
}

fn render_body(table: &CensusTable) -> String {
    let mut body = format!(
        "closed_total={}\nprivileged_total={}\n",
        table.closed_total, table.privileged_total
    );
    for (m, count) in &table.closed_by_border {
        body.push_str(&format!("m={m} count={count}\n"));
    }
    body
}

fn body_checksum(body: &str) -> String {
    let digest = Sha256::digest(body.as_bytes());
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Directory of census files, one per `(q, n)`, with hit/miss counters.
#[derive(Debug)]
pub struct CensusCache {
    dir: PathBuf,
    hits: u64,
    misses: u64,
}

impl CensusCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        CensusCache {
            dir: dir.into(),
            hits: 0,
            misses: 0,
        }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn path_for(&self, q: usize, n: usize) -> PathBuf {
        self.dir.join(format!("census_q{q}_n{n}.txt"))
    }

    /// Loads the cached table for `(q, n)` if present, verifying that the
    /// file's header matches the request.
    pub fn load(&mut self, q: usize, n: usize) -> Result<Option<CensusTable>, CensusError> {
        let path = self.path_for(q, n);
        if !path.exists() {
            self.misses += 1;
            return Ok(None);
        }
        let table = load_census(&path)?;
        if table.q != q || table.n != n {
            return Err(CensusError::HeaderMismatch {
                path,
                found_q: table.q,
                found_n: table.n,
                want_q: q,
                want_n: n,
            });
        }
        self.hits += 1;
        Ok(Some(table))
    }

    pub fn store(&mut self, table: &CensusTable) -> Result<(), CensusError> {
        fs::create_dir_all(&self.dir)?;
        save_census(&self.path_for(table.q, table.n), table)
    }
}

fn pow_u128(base: usize, exp: usize) -> Option<u128> {
    let mut result: u128 = 1;
    for _ in 0..exp {
        result = result.checked_mul(base as u128)?;
    }
    Some(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::DEFAULT_ENUMERATION_BUDGET;

    fn alphabet(q: usize) -> Alphabet {
        Alphabet::new(q).unwrap()
    }

    #[test]
    fn census_small_binary() {
        let a2 = alphabet(2);
        let t2 = run_census(&a2, 2, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(t2.closed_total(), &BigCount::from(2u32));
        assert_eq!(t2.privileged_total(), &BigCount::from(2u32));

        let t3 = run_census(&a2, 3, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(t3.closed_total(), &BigCount::from(4u32));
        assert_eq!(t3.privileged_total(), &BigCount::from(4u32));
        assert_eq!(t3.closed_with_border(1), BigCount::from(2u32));
        assert_eq!(t3.closed_with_border(2), BigCount::from(2u32));
        assert_eq!(t3.closed_with_border(3), BigCount::zero());
    }

    #[test]
    fn census_convention_lengths() {
        let a2 = alphabet(2);
        let t0 = run_census(&a2, 0, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(t0.closed_total(), &BigCount::from(1u32));
        assert_eq!(t0.privileged_total(), &BigCount::from(1u32));
        assert!(t0.closed_by_border().is_empty());

        let t1 = run_census(&a2, 1, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert_eq!(t1.closed_total(), &BigCount::from(2u32));
        assert!(t1.closed_by_border().is_empty());
    }

    #[test]
    fn budget_guard() {
        let a2 = alphabet(2);
        assert!(matches!(
            run_census(&a2, 60, 1, DEFAULT_ENUMERATION_BUDGET),
            Err(CensusError::BudgetExceeded { n: 60, .. })
        ));
    }

    #[test]
    fn shard_plan_partitions() {
        let a2 = alphabet(2);
        let plan = shard_plan(&a2, 10, 4);
        let p = plan[0].prefix_length;
        assert!(plan.iter().all(|s| s.prefix_length == p));
        assert_eq!(plan.len() as u128, 2u128.pow(p as u32));
        assert!(plan.len() >= 256); // 64 * workers
        let mut ranks: Vec<u64> = plan.iter().map(|s| s.prefix_rank).collect();
        ranks.sort_unstable();
        assert!(ranks.iter().enumerate().all(|(i, &r)| i as u64 == r));

        // short words: prefix length capped at n
        let tiny = shard_plan(&a2, 2, 8);
        assert_eq!(tiny[0].prefix_length, 2);
        assert_eq!(tiny.len(), 4);
    }

    #[test]
    fn worker_count_does_not_change_table() {
        let a2 = alphabet(2);
        let reference = run_census(&a2, 9, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        for workers in [2, 4, 8] {
            let t = run_census(&a2, 9, workers, DEFAULT_ENUMERATION_BUDGET).unwrap();
            assert_eq!(t, reference);
        }
    }

    #[test]
    fn range_uses_cache() {
        let a2 = alphabet(2);
        let dir = tempfile::tempdir().unwrap();
        let mut cache = CensusCache::new(dir.path());
        let first =
            census_range(&a2, 2..=4, 1, DEFAULT_ENUMERATION_BUDGET, Some(&mut cache)).unwrap();
        assert_eq!(first.len(), 3);
        assert_eq!(cache.hits(), 0);
        assert_eq!(cache.misses(), 3);

        let again =
            census_range(&a2, 2..=4, 1, DEFAULT_ENUMERATION_BUDGET, Some(&mut cache)).unwrap();
        assert_eq!(again, first);
        assert_eq!(cache.hits(), 3);
        assert_eq!(cache.misses(), 3);

        // an empty range yields an empty list
        #[allow(clippy::reversed_empty_ranges)]
        let empty_range = 5..=4;
        let empty = census_range(&a2, empty_range, 1, DEFAULT_ENUMERATION_BUDGET, None).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn save_load_round_trip() {
        let a2 = alphabet(2);
        let table = run_census(&a2, 3, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        save_census(&path, &table).unwrap();
        assert_eq!(load_census(&path).unwrap(), table);
    }

    #[test]
    fn corrupted_checksum_rejected() {
        let a2 = alphabet(2);
        let table = run_census(&a2, 3, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.txt");
        save_census(&path, &table).unwrap();
        let mut text = fs::read_to_string(&path).unwrap();
        text = text.replace("closed_total=4", "closed_total=5");
        fs::write(&path, text).unwrap();
        assert!(matches!(
            load_census(&path),
            Err(CensusError::ChecksumMismatch { .. })
        ));
    }

    #[test]
    fn mismatched_header_rejected() {
        let a2 = alphabet(2);
        let table = run_census(&a2, 3, 1, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut cache = CensusCache::new(dir.path());
        cache.store(&table).unwrap();
        // ask for q=3 under the path of the q=2 file
        fs::copy(cache.path_for(2, 3), cache.path_for(3, 3)).unwrap();
        assert!(matches!(
            cache.load(3, 3),
            Err(CensusError::HeaderMismatch { found_q: 2, .. })
        ));
    }
}
