//! Acceptance criteria, run one after another against the `oival` binary.
//!
//! Prints one line per criterion; exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use serde_json::Value;

type Check = Result<String, String>;

/// Name, check and time limit in seconds.
type Criterion = (&'static str, fn() -> Check, u64);

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oival"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures")
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn int(v: &Value, path: &[&str]) -> Result<u64, String> {
    path.iter()
        .try_fold(v, |v, k| v.get(k))
        .and_then(Value::as_u64)
        .ok_or_else(|| format!("report has no integer at {}", path.join(".")))
}

/// Runs a suite with its default sizes and checks the common report fields.
fn suite(name: &str, cases: u64, horizon: u64) -> Result<Value, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let out = dir.path().join("report.json");
    let run = bin()
        .args(["verify", "--suite", name, "--seed", "1", "--out"])
        .arg(&out)
        .output()
        .map_err(|e| e.to_string())?;
    let text = std::fs::read_to_string(&out).map_err(|e| format!("no report: {e}"))?;
    let report: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    let cex = report["counterexamples"].as_array().map_or(0, Vec::len);
    ensure(
        run.status.code() == Some(0) && report["passed"] == Value::Bool(true) && cex == 0,
        format!("suite failed: {}", String::from_utf8_lossy(&run.stderr).trim()),
    )?;
    ensure(int(&report, &["cases"])? >= cases, format!("{} cases, expected {cases}", report["cases"]))?;
    ensure(int(&report, &["horizon"])? == horizon, format!("horizon {}, expected {horizon}", report["horizon"]))?;
    Ok(report)
}

fn tilde() -> Check {
    let r = suite("tilde", 1000, 10_000)?;
    Ok(format!("{} checks", r["checks"]))
}

fn omit0() -> Check {
    let r = suite("omit0", 1000, 1000)?;
    let hit = int(&r, &["stats", "cases_with_omitted_intervals"])?;
    ensure(hit > 0, "no case had an omitted interval")?;
    Ok(format!("{} checks, {hit} cases with omitted intervals", r["checks"]))
}

fn splitter() -> Check {
    let r = suite("splitter", 500, 10_000)?;
    let w = int(&r, &["stats", "fewest_witnesses"])?;
    ensure(w >= 50, format!("only {w} witnesses"))?;
    Ok(format!("fewest witnesses {w}"))
}

fn dominator() -> Check {
    let r = suite("dominator", 200, 100_000)?;
    let w = int(&r, &["stats", "fewest_witnesses"])?;
    ensure(w >= 25, format!("only {w} witnesses"))?;
    Ok(format!("fewest witnesses {w}"))
}

fn gm() -> Check {
    let r = suite("gm", 4, 8)?;
    let mut parts = Vec::new();
    for k in 0..=3 {
        let e = &r["stats"]["exhaustive"][format!("k={k}")];
        let a: Vec<u64> = serde_json::from_value(e["a"].clone()).map_err(|_| format!("k={k}: no a"))?;
        let traces = int(e, &["traces"])?;
        ensure(a.first() == Some(&1), format!("k={k}: a(1) = {:?}", a.first()))?;
        ensure(a.windows(2).all(|w| w[0] < w[1]), format!("k={k}: members not distinct"))?;
        if k == 0 {
            ensure(a.len() == 9 && a[8] <= 24, format!("k=0: a(9) = {:?}", a.get(8)))?;
            ensure(traces == 1 << a[8], format!("k=0: {traces} traces, expected 2^{}", a[8]))?;
        }
        parts.push(format!("k={k}:{traces}"));
    }
    Ok(format!("traces {}", parts.join(" ")))
}

fn selectors() -> Check {
    let r = suite("selectors", 7, 1000)?;
    let demos = r["stats"]["demos"].as_object().ok_or("no demo stats")?;
    for p in ["bs", "uid", "utgg", "tower", "jordan", "crown"] {
        let d = demos.get(p).ok_or(format!("{p} missing"))?;
        ensure(d["verdict"] == "gamma-certified", format!("{p}: {}", d["verdict"]))?;
        let excess = int(d, &["worst_excess"])?;
        ensure(excess <= 2, format!("{p}: {excess} misses beyond the threshold"))?;
        ensure(int(d, &["cardinality_checked"])? == 1000, format!("{p}: cardinality not checked to 1000"))?;
    }
    Ok(format!("{} demos certified", demos.len()))
}

fn hitting() -> Check {
    let r = suite("hitting", 200, 10_000)?;
    let w = int(&r, &["stats", "widest_sparse_window"])?;
    let g = r["stats"]["guard"].as_object().ok_or("no guard stats")?;
    let checked: u64 = g.values().map(|v| v["intervals_checked"].as_u64().unwrap_or(0)).sum();
    ensure(checked > 0, "guard checked no interval")?;
    Ok(format!("{} embeddings, widest window {w}, {checked} guard intervals", r["stats"]["embeddings"]))
}

fn defeater() -> Check {
    let r = suite("defeater", 1, 200)?;
    let greedy = r["stats"]["greedy"].as_object().ok_or("no greedy stats")?;
    let mut defeated = 0;
    for (name, v) in greedy {
        if v == "survives" {
            continue;
        }
        let f = int(v, &["failures"])?;
        ensure(f >= 20, format!("{name}: {f} failures"))?;
        defeated += 1;
    }
    ensure(defeated >= 4, format!("{defeated} defeated selections"))?;
    let c = int(&r, &["stats", "cantor_certified"])?;
    ensure(c == 100, format!("cantor certified {c} of 100"))?;
    Ok(format!("{defeated} selections defeated, cantor 100/100"))
}

fn reclaw() -> Check {
    let r = suite("reclaw", 500, 19)?;
    Ok(format!("{} checks", r["checks"]))
}

fn determinism() -> Check {
    let dir = fixtures();
    let manifest: Value = serde_json::from_str(
        &std::fs::read_to_string(dir.join("demos.json")).map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let demos = manifest.as_array().ok_or("manifest is not an array")?;
    for d in demos {
        let name = d["name"].as_str().ok_or("demo without name")?;
        let mut outs = Vec::new();
        for i in 0..2 {
            let out = tmp.path().join(format!("{name}.{i}.json"));
            let run = bin()
                .current_dir(&dir)
                .args(["demo", "--procedure", d["procedure"].as_str().unwrap_or_default()])
                .args(["--sample", d["sample"].as_str().unwrap_or_default()])
                .args(["--covers", d["covers"].as_str().unwrap_or_default()])
                .args(["--horizon", &d["horizon"].to_string(), "--seed", &d["seed"].to_string()])
                .arg("--out")
                .arg(&out)
                .output()
                .map_err(|e| e.to_string())?;
            ensure(run.status.success(), format!("{name}: {}", String::from_utf8_lossy(&run.stderr).trim()))?;
            outs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
        }
        ensure(outs[0] == outs[1], format!("{name}: two runs differ"))?;
        let golden = dir.join("golden").join(format!("{name}.json"));
        let want = std::fs::read(&golden).map_err(|e| format!("{name}: golden: {e}"))?;
        ensure(outs[0] == want, format!("{name}: differs from golden"))?;
        let replay = bin().arg("replay").arg(&golden).output().map_err(|e| e.to_string())?;
        ensure(replay.status.success(), format!("{name}: replay differs"))?;
    }
    Ok(format!("{} demos match their goldens", demos.len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("tilde", tilde, 5),
        ("omit0", omit0, 5),
        ("splitter", splitter, 10),
        ("dominator", dominator, 30),
        ("gm", gm, 60),
        ("selectors", selectors, 60),
        ("hitting", hitting, 30),
        ("defeater", defeater, 10),
        ("reclaw", reclaw, 5),
        ("determinism", determinism, 30),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let res = check();
        let took = t.elapsed();
        let res = res.and_then(|d| {
            ensure(took < Duration::from_secs(*limit), format!("took {took:.2?}, limit {limit} s"))?;
            Ok(d)
        });
        match res {
            Ok(d) => println!("criterion {:>2} {name:<12} PASS {took:>9.2?}  {d}", i + 1),
            Err(e) => {
                failed += 1;
                println!("criterion {:>2} {name:<12} FAIL {took:>9.2?}  {e}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
