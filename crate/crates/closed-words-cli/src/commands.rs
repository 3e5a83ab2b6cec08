//! The subcommands: census, avoid, mu, verify, bounds, report.
//!
//! Output discipline: result tables and reports go to stdout (or the report
//! file) and are byte-deterministic for a fixed configuration, modulo the
//! generated-at line that `--suppress-timestamp` removes; diagnostics such as
//! cache hit counts go to stderr.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use closed_words::bounds::{
    corollary1_report, lemma4_report, prop2_report, prop3_report, theorem1_report, theorem2_report,
};
use closed_words::{
    avoidance_count, canonical_patterns, eq1_check, lemma3_check, ln_count, mu_exact_with_witness,
    mu_upper_lemma1, run_census, Alphabet, AsymptoticParams, BigCount, BoundReport, CensusCache,
    CensusTable, Formula, Word,
};
use serde_json::json;

use crate::config::{parse_n_spec, Config, OutputFormat};

pub fn timestamp_line(suppress: bool) -> Option<String> {
    (!suppress).then(|| format!("# generated: {}", chrono::Utc::now().to_rfc3339()))
}

fn alphabet(config: &Config) -> Result<Alphabet> {
    Alphabet::new(config.q).map_err(|e| anyhow!(e))
}

fn params(config: &Config) -> Result<AsymptoticParams> {
    Ok(AsymptoticParams::new(alphabet(config)?, config.kappa)?)
}

pub fn census(config: &Config, n_spec: &str, suppress_timestamp: bool) -> Result<ExitCode> {
    let alphabet = alphabet(config)?;
    let ns = parse_n_spec(n_spec)?;
    let mut cache = CensusCache::new(&config.cache_dir);
    let mut tables = Vec::new();
    for &n in &ns {
        let n = n as usize;
        let table = match cache.load(config.q, n)? {
            Some(table) => table,
            None => {
                let table = run_census(&alphabet, n, config.workers, config.enumeration_budget)?;
                cache.store(&table)?;
                table
            }
        };
        tables.push(table);
    }

    match config.output_format {
        OutputFormat::Csv => {
            let mut out = String::new();
            if let Some(line) = timestamp_line(suppress_timestamp) {
                out.push_str(&line);
                out.push('\n');
            }
            out.push_str("n,closed,privileged\n");
            for table in &tables {
                out.push_str(&format!(
                    "{},{},{}\n",
                    table.n(),
                    table.closed_total(),
                    table.privileged_total()
                ));
            }
            print!("{out}");
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = tables
                .iter()
                .map(|t| {
                    json!({
                        "n": t.n(),
                        "closed": t.closed_total().to_string(),
                        "privileged": t.privileged_total().to_string(),
                    })
                })
                .collect();
            let mut doc = json!({ "q": config.q, "rows": rows });
            if !suppress_timestamp {
                doc["generated"] = json!(chrono::Utc::now().to_rfc3339());
            }
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    eprintln!(
        "cache: {} hits, {} misses ({})",
        cache.hits(),
        cache.misses(),
        cache.dir().display()
    );
    Ok(ExitCode::SUCCESS)
}

pub fn avoid(config: &Config, pattern: &str, n: usize, bound: bool) -> Result<ExitCode> {
    let alphabet = alphabet(config)?;
    let word = Word::parse(pattern, &alphabet).map_err(|e| anyhow!(e))?;
    if word.is_empty() {
        bail!("pattern must be non-empty");
    }
    let count = avoidance_count(&alphabet, &word, n)?;
    if bound {
        let limit = mu_upper_lemma1(&alphabet, n, word.len())?;
        let ok = count <= limit;
        println!(
            "A={count} lemma1={limit} {}",
            if ok { "ok" } else { "VIOLATION" }
        );
        return Ok(if ok {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }
    println!("{count}");
    Ok(ExitCode::SUCCESS)
}

pub fn mu(config: &Config, n: usize, m: usize, bound: bool) -> Result<ExitCode> {
    let alphabet = alphabet(config)?;
    let result = mu_exact_with_witness(&alphabet, n, m, config.mu_scan_budget)?;
    eprintln!("argmax: {}", result.witness.render(&alphabet));
    if bound {
        let limit = mu_upper_lemma1(&alphabet, n, m)?;
        let ok = result.value <= limit;
        println!(
            "mu={} lemma1={limit} {}",
            result.value,
            if ok { "ok" } else { "VIOLATION" }
        );
        return Ok(if ok {
            ExitCode::SUCCESS
        } else {
            ExitCode::from(1)
        });
    }
    println!("{}", result.value);
    Ok(ExitCode::SUCCESS)
}

struct CheckRow {
    n: usize,
    check: &'static str,
    pass: bool,
    detail: String,
}

pub fn verify(
    config: &Config,
    n_max: usize,
    inject_fault: bool,
    suppress_timestamp: bool,
) -> Result<ExitCode> {
    if n_max < 2 {
        bail!("--n-max must be at least 2");
    }
    let alphabet = alphabet(config)?;
    let params = params(config)?;
    let mut rows: Vec<CheckRow> = Vec::new();

    for n in 2..=n_max {
        let mut table = run_census(&alphabet, n, config.workers, config.enumeration_budget)?;
        if inject_fault && n == n_max {
            table = corrupt_table(&table)?;
            eprintln!("warning: fault injected into census q={} n={n}", config.q);
        }

        let sum: BigCount = table.closed_by_border().values().sum();
        rows.push(CheckRow {
            n,
            check: "partition",
            pass: &sum == table.closed_total(),
            detail: format!("sum={sum} C={}", table.closed_total()),
        });

        rows.push(CheckRow {
            n,
            check: "subset",
            pass: table.privileged_total() <= table.closed_total(),
            detail: format!("B={} C={}", table.privileged_total(), table.closed_total()),
        });

        rows.push(lemma1_row(&alphabet, n)?);
        rows.push(lemma3_row(config, &table)?);

        let eq1 = eq1_check(&params, &table, config.mu_scan_budget)?;
        rows.push(CheckRow {
            n,
            check: "eq1",
            pass: eq1.pass,
            detail: format!("C={} rhs={}", eq1.lhs, eq1.rhs),
        });
    }

    let failures = rows.iter().filter(|row| !row.pass).count();
    let mut out = String::new();
    if let Some(line) = timestamp_line(suppress_timestamp) {
        out.push_str(&line);
        out.push('\n');
    }
    out.push_str("q,n,check,status,detail\n");
    for row in &rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            config.q,
            row.n,
            row.check,
            if row.pass { "pass" } else { "fail" },
            row.detail
        ));
    }
    out.push_str(&format!(
        "# verify: {} checks, {failures} failures\n",
        rows.len()
    ));
    print!("{out}");
    Ok(if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn lemma1_row(alphabet: &Alphabet, n: usize) -> Result<CheckRow> {
    let mut patterns = 0usize;
    let mut failure: Option<String> = None;
    for m in 1..=5 {
        for w in canonical_patterns(alphabet, m) {
            patterns += 1;
            let count = avoidance_count(alphabet, &w, n)?;
            let bound = mu_upper_lemma1(alphabet, n, m)?;
            if count > bound && failure.is_none() {
                failure = Some(format!("w={} A={count} bound={bound}", w.render(alphabet)));
            }
        }
    }
    Ok(CheckRow {
        n,
        check: "lemma1",
        pass: failure.is_none(),
        detail: failure.unwrap_or_else(|| format!("patterns={patterns}")),
    })
}

fn lemma3_row(config: &Config, table: &CensusTable) -> Result<CheckRow> {
    let n = table.n();
    let mut failure: Option<String> = None;
    for m in 1..n {
        let check = lemma3_check(table, m, config.mu_scan_budget)?;
        if !check.pass && failure.is_none() {
            failure = Some(format!("m={m} count={} bound={}", check.lhs, check.rhs));
        }
    }
    Ok(CheckRow {
        n,
        check: "lemma3",
        pass: failure.is_none(),
        detail: failure.unwrap_or_else(|| format!("cases={}", n - 1)),
    })
}

/// Test-only corruption: lifts C(n) to q^n, putting the surplus into the
/// m = 1 border class. Keeps partition/subset intact so the failure surfaces
/// in the lemma3 and eq1 rows.
fn corrupt_table(table: &CensusTable) -> Result<CensusTable> {
    let full = BigCount::from(table.q()).pow(table.n() as u32);
    let delta = &full - table.closed_total();
    let mut by_border = table.closed_by_border().clone();
    *by_border.entry(1).or_insert_with(|| BigCount::from(0u32)) += &delta;
    CensusTable::from_parts(
        table.q(),
        table.n(),
        full,
        table.privileged_total().clone(),
        by_border,
    )
    .map_err(|reason| anyhow!("fault injection produced an invalid table: {reason}"))
}

pub fn bounds(
    config: &Config,
    n_spec: &str,
    formula: &str,
    out: Option<PathBuf>,
    suppress_timestamp: bool,
) -> Result<ExitCode> {
    let formula: Formula = formula.parse().map_err(|e: String| anyhow!(e))?;
    let ns = parse_n_spec(n_spec)?;
    if ns.is_empty() {
        bail!("empty n range");
    }
    let params = params(config)?;
    let report: BoundReport = match formula {
        Formula::Prop2 => prop2_report(&params, &ns)?,
        Formula::Theorem1 => theorem1_report(&params, &ns, config.mu_scan_budget)?,
        Formula::Corollary1 => corollary1_report(&params, &ns, config.mu_scan_budget)?,
        Formula::Lemma4 => lemma4_report(&params, &ns)?,
        Formula::Prop3 => prop3_report(&params, &ns, config.mu_scan_budget)?,
        Formula::Theorem2 => {
            let censuses = load_cached_censuses(config, &ns)?;
            theorem2_report(&params, &censuses, config.mu_scan_budget)?.bound
        }
    };

    let extension = match config.output_format {
        OutputFormat::Csv => "csv",
        OutputFormat::Json => "json",
    };
    let path =
        out.unwrap_or_else(|| PathBuf::from(format!("{}_q{}.{extension}", formula, config.q)));
    let contents = match config.output_format {
        OutputFormat::Csv => {
            let mut text = String::new();
            if let Some(line) = timestamp_line(suppress_timestamp) {
                text.push_str(&line);
                text.push('\n');
            }
            text.push_str(&report.to_csv());
            text
        }
        OutputFormat::Json => {
            let mut doc = report_to_json(&report);
            if !suppress_timestamp {
                doc["generated"] = json!(chrono::Utc::now().to_rfc3339());
            }
            let mut text = serde_json::to_string_pretty(&doc)?;
            text.push('\n');
            text
        }
    };
    fs::write(&path, contents).with_context(|| format!("writing report {}", path.display()))?;
    println!("c_star={} argmax_n={}", report.c_star, report.argmax_n);
    eprintln!("report written: {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn load_cached_censuses(config: &Config, ns: &[u64]) -> Result<Vec<CensusTable>> {
    let mut cache = CensusCache::new(&config.cache_dir);
    let mut censuses = Vec::new();
    for &n in ns {
        let n = n as usize;
        match cache.load(config.q, n)? {
            Some(table) => censuses.push(table),
            None => bail!(
                "missing census for q={} n={n}: run `closed-words census --q {} --n {n}..{n}` first",
                config.q,
                config.q
            ),
        }
    }
    Ok(censuses)
}

fn report_to_json(report: &BoundReport) -> serde_json::Value {
    let rows: Vec<serde_json::Value> = report
        .rows
        .iter()
        .map(|row| {
            json!({
                "n": row.n,
                "exact": row.exact.as_ref().map(|v| v.to_string()),
                "bound_log": row.bound_log,
                "ratio": row.ratio,
            })
        })
        .collect();
    json!({
        "q": report.q,
        "formula": report.formula.id(),
        "c_star": report.c_star,
        "argmax_n": report.argmax_n,
        "rows": rows,
        "notes": report.notes,
    })
}

pub fn report(config: &Config, suppress_timestamp: bool) -> Result<ExitCode> {
    let mut tables: Vec<CensusTable> = Vec::new();
    let entries = fs::read_dir(&config.cache_dir)
        .with_context(|| format!("reading cache dir {}", config.cache_dir.display()))?;
    let prefix = format!("census_q{}_n", config.q);
    let mut cache = CensusCache::new(&config.cache_dir);
    for entry in entries {
        let entry = entry?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        let Some(stem) = name
            .strip_prefix(&prefix)
            .and_then(|s| s.strip_suffix(".txt"))
        else {
            continue;
        };
        let Ok(n) = stem.parse::<usize>() else {
            continue;
        };
        if let Some(table) = cache.load(config.q, n)? {
            tables.push(table);
        }
    }
    if tables.is_empty() {
        bail!(
            "no cached censuses for q={} in {}; run `closed-words census` first",
            config.q,
            config.cache_dir.display()
        );
    }
    tables.sort_by_key(|t| t.n());

    let ln_q = (config.q as f64).ln();
    let ratio_of = |table: &CensusTable| -> Option<f64> {
        if table.n() < 2 {
            return None;
        }
        let nf = table.n() as f64;
        let shape_log = nf.ln().ln() + nf * ln_q - 0.5 * nf.ln();
        Some((ln_count(table.closed_total()) - shape_log).exp())
    };
    let best = tables
        .iter()
        .filter_map(|t| ratio_of(t).map(|r| (r, t.n())))
        .fold(None, |best: Option<(f64, usize)>, cand| match best {
            Some(b) if b.0 >= cand.0 => Some(b),
            _ => Some(cand),
        });

    match config.output_format {
        OutputFormat::Csv => {
            let mut out = String::new();
            if let Some(line) = timestamp_line(suppress_timestamp) {
                out.push_str(&line);
                out.push('\n');
            }
            out.push_str("n,closed,privileged,thm2_ratio\n");
            for table in &tables {
                let ratio = ratio_of(table).map(|r| r.to_string()).unwrap_or_default();
                out.push_str(&format!(
                    "{},{},{},{ratio}\n",
                    table.n(),
                    table.closed_total(),
                    table.privileged_total()
                ));
            }
            if let Some((c_star, argmax)) = best {
                out.push_str(&format!("# c_star={c_star} argmax_n={argmax}\n"));
            }
            print!("{out}");
        }
        OutputFormat::Json => {
            let rows: Vec<serde_json::Value> = tables
                .iter()
                .map(|t| {
                    json!({
                        "n": t.n(),
                        "closed": t.closed_total().to_string(),
                        "privileged": t.privileged_total().to_string(),
                        "thm2_ratio": ratio_of(t),
                    })
                })
                .collect();
            let mut doc = json!({ "q": config.q, "rows": rows });
            if let Some((c_star, argmax)) = best {
                doc["c_star"] = json!(c_star);
                doc["argmax_n"] = json!(argmax);
            }
            if !suppress_timestamp {
                doc["generated"] = json!(chrono::Utc::now().to_rfc3339());
            }
            println!("{}", serde_json::to_string_pretty(&doc)?);
        }
    }
    Ok(ExitCode::SUCCESS)
}
