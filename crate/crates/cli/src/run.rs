//! Command implementations. Each writes into the output directory only.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use limcyc::bifurc::{self, SemistableSolution};
use limcyc::cycles::{self, DetectConfig};
use limcyc::field::System;
use limcyc::flow;
use limcyc::retmap;
use limcyc::verify::{self, PropositionReport};
use limcyc::{Error, VectorField2};
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Why a command stopped short of exit status 0.
#[derive(Debug)]
pub enum Failure {
    /// Bad configuration or a violated precondition: exit 2.
    Config(String),
    /// The dispatched operation failed: exit 1.
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_precondition() {
            Failure::Config(format!("{}: {e}", e.tag()))
        } else {
            Failure::Run(e)
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(Error::from(e))
    }
}

pub type Outcome = std::result::Result<i32, Failure>;

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Ctx {
    fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    fn create(&self, name: &str) -> Result<BufWriter<File>, Failure> {
        Ok(BufWriter::new(File::create(self.path(name))?))
    }

    fn write_json(&self, name: &str, v: &Value) -> Result<(), Failure> {
        fs::write(self.path(name), serde_json::to_string_pretty(v).expect("json value") + "\n")?;
        Ok(())
    }

    fn system(&self) -> Result<System, Failure> {
        let def =
            self.cfg.system.as_ref().ok_or_else(|| Failure::Config("this command needs a `system` block".into()))?;
        Ok(def.resolve()?)
    }

    fn field(&self) -> Result<VectorField2, Failure> {
        Ok(self.system()?.field()?)
    }
}

/// Creates the output directory and writes the resolved configuration.
pub fn prepare(cfg: RunConfig, out: &Path) -> Result<Ctx, Failure> {
    fs::create_dir_all(out).map_err(|e| Failure::Config(format!("cannot create {}: {e}", out.display())))?;
    fs::write(out.join("config.json"), cfg.to_json() + "\n")?;
    Ok(Ctx { cfg, out: out.to_path_buf() })
}

pub fn integrate(ctx: &Ctx) -> Outcome {
    let o = &ctx.cfg.integrate;
    if !(o.t_end > 0.0 && o.t_end.is_finite()) {
        return Err(Failure::Config(format!("integrate.t_end must be positive, got {}", o.t_end)));
    }
    let field = ctx.field()?;
    let cfg = ctx.cfg.integrator.with_max_time(o.t_end);
    let tr = flow::integrate(&field, (o.init[0], o.init[1]), &cfg, None)?;
    match o.resample {
        Some(n) => tr.write_resampled_csv(ctx.create("trajectory.csv")?, n)?,
        None => tr.write_csv(ctx.create("trajectory.csv")?)?,
    }
    let last = tr.last();
    ctx.write_json("integrate.json", &json!({ "termination": tr.termination, "t": last.t, "x": last.x, "y": last.y, "s": last.s, "steps": tr.nodes.len() - 1 }))?;
    println!("termination: {:?} at t = {}", tr.termination, last.t);
    Ok(0)
}

pub fn retmap(ctx: &Ctx) -> Outcome {
    let o = &ctx.cfg.retmap;
    let field = ctx.field()?;
    let entries = retmap::scan(&field, (o.y_min, o.y_max), o.n, &ctx.cfg.integrator)?;
    retmap::write_scan_csv(&entries, ctx.create("retmap.csv")?)?;
    let failed = entries.iter().filter(|e| e.sample().is_none()).count();
    println!("{} samples, {} without a return", entries.len(), failed);
    Ok(0)
}

pub fn cycles(ctx: &Ctx) -> Outcome {
    let o = &ctx.cfg.cycles;
    let field = ctx.field()?;
    let set = cycles::find_cycles_with(&field, (o.y_min, o.y_max), o.n, &ctx.cfg.integrator, &DetectConfig::default())?;
    ctx.write_json(
        "cycles.json",
        &json!({
            "cycles": set.export_json(),
            "center_detected": set.center_detected,
            "candidates": set.candidates,
            "range": set.range,
            "n": set.n,
            "sample_failures": set.sample_failures,
            "failures": set.failures,
            "notes": set.notes,
        }),
    )?;
    if o.polylines {
        for (k, c) in set.cycles.iter().enumerate() {
            cycles::write_polyline_csv(&c.polyline, ctx.create(&format!("cycle_{k}.csv"))?)?;
        }
    }
    println!("{} cycle(s){}", set.cycles.len(), if set.center_detected { ", center detected" } else { "" });
    for c in &set.cycles {
        println!("  y0 = {}  period = {}  multiplier = {}  {:?}", c.y0, c.period, c.multiplier, c.klass);
    }
    Ok(0)
}

fn count_entry(b: f64, c: f64, a: f64, cfg: &limcyc::IntegratorConfig) -> Value {
    match bifurc::count_cycles(b, c, a, cfg) {
        Ok(n) => json!({ "a": a, "hyperbolic": n.hyperbolic, "semistable": n.semistable, "y_range": n.y_range }),
        Err(e) => json!({ "a": a, "error": e.tag() }),
    }
}

pub fn semistable(ctx: &Ctx) -> Outcome {
    let o = &ctx.cfg.semistable;
    let cfg = &ctx.cfg.integrator;
    let (bracket, sol): (Option<bifurc::FoldBracket>, SemistableSolution) = match o.init {
        Some([a, y]) => (None, bifurc::solve_semistable(o.b, o.c, (a, y), cfg)?),
        None => {
            let (br, sol) = bifurc::semistable(o.b, o.c, cfg)?;
            (Some(br), sol)
        }
    };
    let perturb = if sol.converged && !o.perturb.is_empty() {
        serde_json::to_value(bifurc::perturb_semistable(&sol, &o.perturb, cfg)?).expect("counts serialise")
    } else {
        Value::Null
    };
    let counts = if o.counts {
        Value::Array([0.0, 0.5, 1.5].iter().map(|k| count_entry(o.b, o.c, k * sol.a_star, cfg)).collect())
    } else {
        Value::Null
    };
    let uniqueness = if o.uniqueness {
        serde_json::to_value(bifurc::uniqueness_scan(o.b, o.c, sol.a_star, cfg)?).expect("scan serialises")
    } else {
        Value::Null
    };
    ctx.write_json(
        "semistable.json",
        &json!({ "bracket": bracket, "solution": sol, "perturb": perturb, "counts": counts, "uniqueness": uniqueness }),
    )?;
    println!("a* = {}  y0* = {}  converged = {}", sol.a_star, sol.y0_star, sol.converged);
    Ok(if sol.converged { 0 } else { 1 })
}

pub fn phi(ctx: &Ctx) -> Outcome {
    let o = &ctx.cfg.phi;
    let surf = bifurc::phi_surface(&o.b_grid, &o.c_grid, &ctx.cfg.integrator)?;
    surf.write_csv(ctx.create("phi.csv")?)?;
    println!("{} nodes, all converged: {}", surf.nodes.len(), surf.all_converged());
    Ok(if surf.all_converged() { 0 } else { 1 })
}

pub fn sweep(ctx: &Ctx) -> Outcome {
    let o = &ctx.cfg.sweep;
    let fam = ctx
        .system()?
        .family()
        .ok_or_else(|| Failure::Config("sweep needs a family system (quadratic or quintic)".into()))?;
    let table = bifurc::rotated_sweep_table(&fam, (o.lambda_min, o.lambda_max), o.n, &ctx.cfg.integrator)?;
    table.write_csv(ctx.create("sweep.csv")?)?;
    ctx.write_json("sweep.json", &serde_json::to_value(&table).expect("table serialises"))?;
    println!("{} rows, monotone: {:?}", table.rows.len(), table.monotone);
    match table.lost {
        Some((lambda, last_good)) => Err(Failure::Run(Error::CycleLost { lambda, last_good })),
        None => Ok(0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Which {
    Prop1,
    Prop2,
    Prop3,
}

pub fn verify(ctx: &Ctx, which: Which) -> Outcome {
    let cfg = &ctx.cfg.integrator;
    let report: PropositionReport = match which {
        Which::Prop1 => verify::verify_prop1(&ctx.cfg.prop1, cfg)?,
        Which::Prop2 => verify::verify_prop2(&ctx.cfg.prop2, cfg)?,
        Which::Prop3 => verify::verify_prop3(&ctx.cfg.prop3, cfg)?,
    };
    fs::write(ctx.path("report.json"), report.to_json() + "\n")?;
    let summary = report.summary();
    fs::write(ctx.path("summary.txt"), &summary)?;
    print!("{summary}");
    Ok(report.exit_code())
}
