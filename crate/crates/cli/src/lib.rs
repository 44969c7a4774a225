//! Command implementations behind the `ntlot` binary.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use ntlot_core::eval::{default_taus, emit_profiles, emit_results, read_results, Verdict};
use ntlot_core::generator::catalog_class;
use ntlot_core::runner::{run_instance, InstanceReport, RunOptions};
use ntlot_core::{
    create_backend, generate, paired_t_test, performance_profile, read_instance, write_instance,
    BenchmarkRecord, HeuristicConfig, Method,
};

/// Writes `count` replicas of `class` as `<class>-<r>.ilssp`, `r` from 1,
/// with seeds `seed, seed + 1, ...`.
pub fn cmd_generate(class: &str, seed: u64, count: usize, out: &Path) -> Result<Vec<PathBuf>> {
    let spec = catalog_class(class)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let mut files = Vec::with_capacity(count);
    for r in 1..=count {
        let inst = generate(&spec, seed + r as u64 - 1)?;
        let path = out.join(format!("{class}-{r}.ilssp"));
        write_instance(&inst, &path)?;
        files.push(path);
    }
    Ok(files)
}

/// Everything `solve` needs, resolved and checked.
#[derive(Debug, Clone)]
pub struct RunManifest {
    pub config_path: Option<PathBuf>,
    pub instances: Vec<PathBuf>,
    pub methods: Vec<Method>,
    /// Recorded for instances whose file carries no seed.
    pub seed: u64,
    pub out: PathBuf,
    pub backend: Option<String>,
    pub cfg: HeuristicConfig,
    pub lower_bound: bool,
    pub jobs: usize,
}

impl RunManifest {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        config_path: Option<PathBuf>,
        instances: Vec<PathBuf>,
        methods: &str,
        seed: u64,
        out: PathBuf,
        backend: Option<String>,
        scale: f64,
        lower_bound: bool,
        jobs: usize,
    ) -> Result<Self> {
        let methods = Method::parse_list(methods)?;
        let base = match &config_path {
            Some(p) => HeuristicConfig::load(p)?,
            None => HeuristicConfig::default(),
        };
        let cfg = base.scaled(scale)?;
        if instances.is_empty() {
            bail!("no instance files given");
        }
        // Fails early on an unknown backend name.
        create_backend(backend.as_deref())?;
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        let probe = out.join(".write-probe");
        fs::write(&probe, b"").with_context(|| format!("{} is not writable", out.display()))?;
        let _ = fs::remove_file(probe);
        Ok(RunManifest {
            config_path,
            instances,
            methods,
            seed,
            out,
            backend,
            cfg,
            lower_bound,
            jobs: jobs.max(1),
        })
    }
}

fn instance_name(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| path.display().to_string())
}

fn solve_one(path: &Path, manifest: &RunManifest) -> Vec<BenchmarkRecord> {
    let name = instance_name(path);
    let failed = |why: String| {
        log::error!("{name}: {why}");
        manifest
            .methods
            .iter()
            .map(|m| BenchmarkRecord {
                instance: name.clone(),
                method: m.name().to_string(),
                seed: manifest.seed,
                ub: None,
                lb: None,
                gap_l: None,
                time_s: 0.0,
                feasible: false,
            })
            .collect()
    };
    let inst = match read_instance(path) {
        Ok(i) => i,
        Err(e) => return failed(e.to_string()),
    };
    let mut backend = match create_backend(manifest.backend.as_deref()) {
        Ok(b) => b,
        Err(e) => return failed(e.to_string()),
    };
    let seed = inst.meta.seed.unwrap_or(manifest.seed);
    let opts = RunOptions {
        cfg: manifest.cfg.clone(),
        lower_bound: manifest.lower_bound,
    };
    log::info!("{name}: solving with {} methods", manifest.methods.len());
    let report = run_instance(
        &inst,
        &name,
        seed,
        &manifest.methods,
        &opts,
        backend.as_mut(),
    );
    write_solutions(&report, &manifest.out);
    report.records()
}

fn write_solutions(report: &InstanceReport, out: &Path) {
    let dir = out.join("solutions");
    if let Err(e) = fs::create_dir_all(&dir) {
        log::error!("creating {}: {e}", dir.display());
        return;
    }
    for run in &report.runs {
        if let Some(err) = &run.error {
            log::warn!("{} {}: {err}", report.instance, run.method);
        }
        if let Some(sol) = &run.solution {
            let path = dir.join(format!("{}-{}.json", report.instance, run.method));
            if let Err(e) = sol.write_json(&path) {
                log::error!("{e}");
            }
        }
    }
}

/// Runs every instance of the manifest on `jobs` workers and writes
/// `results.csv` plus one JSON file per validated solution.
pub fn cmd_solve(manifest: &RunManifest) -> Result<Vec<BenchmarkRecord>> {
    let next = AtomicUsize::new(0);
    let rows = Mutex::new(Vec::new());
    let workers = manifest.jobs.min(manifest.instances.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let idx = next.fetch_add(1, Ordering::SeqCst);
                let Some(path) = manifest.instances.get(idx) else {
                    break;
                };
                let recs = solve_one(path, manifest);
                rows.lock()
                    .expect("no worker panics while holding the lock")
                    .extend(recs);
            });
        }
    });
    let rows = rows.into_inner().expect("workers joined");
    emit_results(&rows, &manifest.out.join("results.csv"))?;
    Ok(rows)
}

/// One row of the pairwise significance matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PairRow {
    pub a: String,
    pub b: String,
    pub pairs: usize,
    pub t: f64,
    pub p_value: f64,
    pub mean_diff: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct ReportOutput {
    pub records: Vec<BenchmarkRecord>,
    pub pairs: Vec<PairRow>,
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::ABetter => "a_better",
        Verdict::BBetter => "b_better",
        Verdict::NoSignificance => "no_significance",
    }
}

/// Profiles per method and paired t-tests on `ub` over instances where both
/// methods are feasible.
pub fn cmd_report(csvs: &[PathBuf], out: &Path, alpha: f64) -> Result<ReportOutput> {
    let mut records = Vec::new();
    for p in csvs {
        records.extend(read_results(p)?);
    }
    if records.is_empty() {
        bail!("no result rows in {} file(s)", csvs.len());
    }
    let mut by_method: BTreeMap<&str, BTreeMap<&str, &BenchmarkRecord>> = BTreeMap::new();
    for r in &records {
        if by_method
            .entry(r.method.as_str())
            .or_default()
            .insert(r.instance.as_str(), r)
            .is_some()
        {
            bail!(
                "duplicate row for instance {} method {}",
                r.instance,
                r.method
            );
        }
    }
    let reference: BTreeSet<&str> = by_method.values().next().unwrap().keys().copied().collect();
    for (method, rows) in &by_method {
        let set: BTreeSet<&str> = rows.keys().copied().collect();
        if set != reference {
            let diff: Vec<&str> = set.symmetric_difference(&reference).copied().collect();
            bail!(
                "method {method} covers a different instance set (differs on: {})",
                diff.join(", ")
            );
        }
    }

    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let curves = performance_profile(&records, &default_taus(&records));
    emit_profiles(&curves, out)?;

    let methods: Vec<&str> = by_method.keys().copied().collect();
    let mut pairs = Vec::new();
    for (ia, a) in methods.iter().enumerate() {
        for b in &methods[ia + 1..] {
            let (mut xa, mut xb) = (Vec::new(), Vec::new());
            for inst in &reference {
                let (ra, rb) = (by_method[a][inst], by_method[b][inst]);
                if let (true, true, Some(ua), Some(ub)) = (ra.feasible, rb.feasible, ra.ub, rb.ub) {
                    xa.push(ua);
                    xb.push(ub);
                }
            }
            let row = match paired_t_test(&xa, &xb, alpha) {
                Ok(t) => PairRow {
                    a: a.to_string(),
                    b: b.to_string(),
                    pairs: xa.len(),
                    t: t.t,
                    p_value: t.p_value,
                    mean_diff: t.mean_diff,
                    verdict: t.verdict,
                },
                Err(_) => PairRow {
                    a: a.to_string(),
                    b: b.to_string(),
                    pairs: xa.len(),
                    t: f64::NAN,
                    p_value: f64::NAN,
                    mean_diff: f64::NAN,
                    verdict: Verdict::NoSignificance,
                },
            };
            pairs.push(row);
        }
    }
    let path = out.join("ttest.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| path.display().to_string())?;
    w.write_record([
        "method_a",
        "method_b",
        "pairs",
        "t",
        "p_value",
        "mean_diff",
        "verdict",
    ])?;
    for r in &pairs {
        w.write_record([
            r.a.clone(),
            r.b.clone(),
            r.pairs.to_string(),
            r.t.to_string(),
            r.p_value.to_string(),
            r.mean_diff.to_string(),
            verdict_name(r.verdict).to_string(),
        ])?;
    }
    w.flush()?;
    Ok(ReportOutput { records, pairs })
}
