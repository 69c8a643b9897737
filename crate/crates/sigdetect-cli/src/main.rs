//! Command-line surface for the sigdetect library.

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use std::io::Write;
use std::process::ExitCode;

use sigdetect::gof::{statistic, GofFamily, SupDomain};
use sigdetect::inference::{
    critical_value, detection_boundary, fmt_sig, power, power_sweep, pvalue, sf_h0, MethodChoice,
    SweepSpec, TestSpec, SWEEP_CSV_HEADER,
};
use sigdetect::models::{MixtureModel, PvalueSide};
use sigdetect::montecarlo::{empirical_sf, sample_stats, SimConfig};

#[derive(Parser)]
#[command(
    name = "sigdetect",
    about = "Finite-sample distributions, p-values, critical values and power \
             for supremum-type goodness-of-fit statistics",
    version
)]
struct Cli {
    /// Output format: csv or json
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Worker threads (default: hardware count; env SIGDETECT_THREADS overrides)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct FamilyArgs {
    /// Statistic family: ks, hc2004, hc2008, bj, rbj, phi:s=<real>
    #[arg(long, default_value = "hc2004")]
    family: String,
}

#[derive(Args, Clone)]
struct DomainArgs {
    /// Truncation domain `k0:k1[,a0:a1]`; defaults k0=1, k1=n/2, a0=0, a1=1
    #[arg(long)]
    domain: Option<String>,
    /// Override the lower index bound
    #[arg(long)]
    k0: Option<usize>,
    /// Override the upper index bound
    #[arg(long)]
    k1: Option<usize>,
    /// Override the lower p-value bound
    #[arg(long)]
    alpha0: Option<f64>,
    /// Override the upper p-value bound
    #[arg(long)]
    alpha1: Option<f64>,
}

impl DomainArgs {
    fn resolve(&self, n: usize) -> Result<SupDomain, String> {
        let mut dom = match &self.domain {
            None => SupDomain::default_for(n),
            Some(s) => parse_domain(s)?,
        };
        if let Some(k0) = self.k0 {
            dom.k0 = k0;
        }
        if let Some(k1) = self.k1 {
            dom.k1 = k1;
        }
        if let Some(a0) = self.alpha0 {
            dom.alpha0 = a0;
        }
        if let Some(a1) = self.alpha1 {
            dom.alpha1 = a1;
        }
        Ok(dom)
    }
}

fn parse_domain(s: &str) -> Result<SupDomain, String> {
    let (idx, pv) = match s.split_once(',') {
        Some((a, b)) => (a, Some(b)),
        None => (s, None),
    };
    let (k0s, k1s) = idx
        .split_once(':')
        .ok_or_else(|| format!("bad domain '{s}', expected k0:k1[,a0:a1]"))?;
    let k0 = k0s.parse().map_err(|_| format!("bad k0 '{k0s}'"))?;
    let k1 = k1s.parse().map_err(|_| format!("bad k1 '{k1s}'"))?;
    let (alpha0, alpha1) = match pv {
        None => (0.0, 1.0),
        Some(p) => {
            let (a0s, a1s) = p
                .split_once(':')
                .ok_or_else(|| format!("bad p-value bounds '{p}', expected a0:a1"))?;
            (
                a0s.parse().map_err(|_| format!("bad a0 '{a0s}'"))?,
                a1s.parse().map_err(|_| format!("bad a1 '{a1s}'"))?,
            )
        }
    };
    Ok(SupDomain {
        k0,
        k1,
        alpha0,
        alpha1,
    })
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Alternative as `normalmix:eps=<e>,mu=<m>`
    #[arg(long)]
    h1: Option<String>,
    /// Alternative as a JSON model file
    #[arg(long)]
    model_json: Option<String>,
    /// p-value sidedness: onesided or twosided
    #[arg(long, default_value = "twosided")]
    side: String,
}

impl ModelArgs {
    fn side(&self) -> Result<PvalueSide, String> {
        match self.side.to_ascii_lowercase().as_str() {
            "onesided" | "one-sided" | "one" => Ok(PvalueSide::OneSided),
            "twosided" | "two-sided" | "two" => Ok(PvalueSide::TwoSided),
            other => Err(format!("unknown side '{other}'")),
        }
    }

    fn model(&self) -> Result<Option<MixtureModel>, String> {
        match (&self.h1, &self.model_json) {
            (Some(_), Some(_)) => Err("use either --h1 or --model-json, not both".into()),
            (None, None) => Ok(None),
            (Some(spec), None) => parse_h1(spec).map(Some),
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| format!("cannot read {path}: {e}"))?;
                MixtureModel::from_json(&text)
                    .map(Some)
                    .map_err(|e| e.to_string())
            }
        }
    }
}

fn parse_h1(spec: &str) -> Result<MixtureModel, String> {
    let rest = spec
        .strip_prefix("normalmix:")
        .ok_or_else(|| format!("unknown alternative '{spec}', expected normalmix:eps=..,mu=.."))?;
    let (mut eps, mut mu) = (None, None);
    for kv in rest.split(',') {
        match kv.split_once('=') {
            Some(("eps", v)) | Some(("epsilon", v)) => {
                eps = Some(v.parse::<f64>().map_err(|_| format!("bad eps '{v}'"))?)
            }
            Some(("mu", v)) => mu = Some(v.parse::<f64>().map_err(|_| format!("bad mu '{v}'"))?),
            _ => return Err(format!("bad alternative option '{kv}'")),
        }
    }
    match (eps, mu) {
        (Some(e), Some(m)) => Ok(MixtureModel::normal_mix(e, m)),
        _ => Err("normalmix requires both eps and mu".into()),
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Evaluate the statistic on a file of p-values
    Stat {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        domain: DomainArgs,
        /// Newline-delimited p-values
        #[arg(long)]
        pvalues: String,
    },
    /// Null tail probability of an observed statistic value
    Pvalue {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        observed: f64,
        #[arg(long, default_value = "exact-auto")]
        method: String,
    },
    /// Null CDF/SF curve over a grid of thresholds
    Cdf {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        bmin: f64,
        #[arg(long)]
        bmax: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, default_value = "exact-auto")]
        method: String,
    },
    /// Smallest threshold with null tail probability at most the level
    Critical {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        level: f64,
        #[arg(long, default_value = "exact-auto")]
        method: String,
    },
    /// Power against a mixture alternative at a given level
    Power {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        level: f64,
        #[arg(long, default_value = "exact-auto")]
        method: String,
    },
    /// Batch power evaluation from a JSON grid spec
    Sweep {
        /// Sweep specification file
        #[arg(long)]
        spec: String,
    },
    /// Sample statistics under a model and report empirical tails
    Simulate {
        #[command(flatten)]
        family: FamilyArgs,
        #[command(flatten)]
        domain: DomainArgs,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 5000)]
        reps: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Thresholds at which to report the empirical tail
        #[arg(long, value_delimiter = ',')]
        b: Vec<f64>,
        /// Dump raw samples as little-endian 64-bit floats
        #[arg(long)]
        out: Option<String>,
    },
    /// Sparse-regime detection boundary rho*(alpha)
    Boundary {
        #[arg(long)]
        alpha: f64,
    },
}

enum Format {
    Csv,
    Json,
}

struct Ctx {
    format: Format,
}

impl Ctx {
    /// Every subcommand starts by echoing its resolved configuration.
    fn header(&self, config: &serde_json::Value) {
        match self.format {
            Format::Csv => println!("# config {config}"),
            Format::Json => println!("{}", json!({ "config": config })),
        }
    }

    fn rows(&self, header: &str, rows: &[Vec<(&str, serde_json::Value)>]) {
        match self.format {
            Format::Csv => {
                println!("{header}");
                for row in rows {
                    let cells: Vec<String> = row
                        .iter()
                        .map(|(_, v)| match v {
                            serde_json::Value::Number(n) => {
                                n.as_f64().map(fmt_sig).unwrap_or_else(|| n.to_string())
                            }
                            serde_json::Value::String(s) => s.clone(),
                            serde_json::Value::Null => String::new(),
                            other => other.to_string(),
                        })
                        .collect();
                    println!("{}", cells.join(","));
                }
            }
            Format::Json => {
                for row in rows {
                    let mut obj = serde_json::Map::new();
                    for (k, v) in row {
                        obj.insert((*k).to_string(), v.clone());
                    }
                    println!("{}", serde_json::Value::Object(obj));
                }
            }
        }
    }
}

fn num(x: f64) -> serde_json::Value {
    json!(x)
}

type CliResult = Result<(), (u8, String)>;

fn usage_err<E: std::fmt::Display>(e: E) -> (u8, String) {
    (2, e.to_string())
}

fn num_err(e: sigdetect::Error) -> (u8, String) {
    (3, e.to_string())
}

fn run(cli: &Cli) -> CliResult {
    let ctx = Ctx {
        format: match cli.format.to_ascii_lowercase().as_str() {
            "csv" => Format::Csv,
            "json" => Format::Json,
            other => return Err(usage_err(format!("unknown format '{other}'"))),
        },
    };
    match &cli.cmd {
        Cmd::Stat {
            family,
            domain,
            pvalues,
        } => {
            let fam = GofFamily::parse(&family.family).map_err(usage_err)?;
            let text = std::fs::read_to_string(pvalues)
                .map_err(|e| usage_err(format!("cannot read {pvalues}: {e}")))?;
            let mut pv = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let t = line.trim();
                if t.is_empty() {
                    continue;
                }
                pv.push(
                    t.parse::<f64>()
                        .map_err(|_| usage_err(format!("line {}: bad p-value '{t}'", i + 1)))?,
                );
            }
            if pv.is_empty() {
                return Err(usage_err("no p-values in input"));
            }
            let n = pv.len();
            let dom = domain.resolve(n).map_err(usage_err)?;
            ctx.header(&json!({
                "command": "stat", "family": fam.to_string(), "n": n, "domain": dom,
                "pvalues": pvalues,
            }));
            let st = statistic(fam, &pv, dom).map_err(num_err)?;
            ctx.rows(
                "statistic,argmax_index,empty_domain",
                &[vec![
                    ("statistic", num(st.value)),
                    (
                        "argmax_index",
                        st.argmax_index.map(|i| json!(i)).unwrap_or(json!(null)),
                    ),
                    ("empty_domain", json!(st.empty_domain)),
                ]],
            );
            Ok(())
        }
        Cmd::Pvalue {
            family,
            domain,
            n,
            observed,
            method,
        } => {
            let fam = GofFamily::parse(&family.family).map_err(usage_err)?;
            let dom = domain.resolve(*n).map_err(usage_err)?;
            let meth = MethodChoice::parse(method).map_err(usage_err)?;
            ctx.header(&json!({
                "command": "pvalue", "family": fam.to_string(), "n": n, "domain": dom,
                "observed": observed, "method": meth.to_string(),
            }));
            let spec = TestSpec::new(fam, dom, *n).map_err(num_err)?;
            let out = pvalue(&spec, *observed, meth).map_err(num_err)?;
            ctx.rows(
                "pvalue,pvalue_sci,routine,flags",
                &[vec![
                    ("pvalue", num(out.value)),
                    ("pvalue_sci", json!(format!("{:.11e}", out.value))),
                    ("routine", json!(out.routine)),
                    ("flags", json!(out.flags())),
                ]],
            );
            Ok(())
        }
        Cmd::Cdf {
            family,
            domain,
            n,
            bmin,
            bmax,
            points,
            method,
        } => {
            let fam = GofFamily::parse(&family.family).map_err(usage_err)?;
            let dom = domain.resolve(*n).map_err(usage_err)?;
            let meth = MethodChoice::parse(method).map_err(usage_err)?;
            if *points < 2 || !(bmax > bmin) {
                return Err(usage_err("need points >= 2 and bmax > bmin"));
            }
            ctx.header(&json!({
                "command": "cdf", "family": fam.to_string(), "n": n, "domain": dom,
                "bmin": bmin, "bmax": bmax, "points": points, "method": meth.to_string(),
            }));
            let spec = TestSpec::new(fam, dom, *n).map_err(num_err)?;
            let mut rows = Vec::new();
            for i in 0..*points {
                let b = bmin + (bmax - bmin) * i as f64 / (*points as f64 - 1.0);
                let out = sf_h0(&spec, b, meth).map_err(num_err)?;
                rows.push(vec![
                    ("b", num(b)),
                    ("cdf", num(1.0 - out.value)),
                    ("sf", num(out.value)),
                    ("routine", json!(out.routine)),
                    ("flags", json!(out.flags())),
                ]);
            }
            ctx.rows("b,cdf,sf,routine,flags", &rows);
            Ok(())
        }
        Cmd::Critical {
            family,
            domain,
            n,
            level,
            method,
        } => {
            let fam = GofFamily::parse(&family.family).map_err(usage_err)?;
            let dom = domain.resolve(*n).map_err(usage_err)?;
            let meth = MethodChoice::parse(method).map_err(usage_err)?;
            ctx.header(&json!({
                "command": "critical", "family": fam.to_string(), "n": n, "domain": dom,
                "level": level, "method": meth.to_string(),
            }));
            let spec = TestSpec::new(fam, dom, *n).map_err(num_err)?;
            let b = critical_value(&spec, *level, meth).map_err(num_err)?;
            let achieved = sf_h0(&spec, b, meth).map_err(num_err)?;
            ctx.rows(
                "critical,achieved_sf,routine",
                &[vec![
                    ("critical", num(b)),
                    ("achieved_sf", num(achieved.value)),
                    ("routine", json!(achieved.routine)),
                ]],
            );
            Ok(())
        }
        Cmd::Power {
            family,
            domain,
            model,
            n,
            level,
            method,
        } => {
            let fam = GofFamily::parse(&family.family).map_err(usage_err)?;
            let dom = domain.resolve(*n).map_err(usage_err)?;
            let meth = MethodChoice::parse(method).map_err(usage_err)?;
            let side = model.side().map_err(usage_err)?;
            let h1 = model
                .model()
                .map_err(usage_err)?
                .ok_or_else(|| usage_err("power requires --h1 or --model-json"))?;
            ctx.header(&json!({
                "command": "power", "family": fam.to_string(), "n": n, "domain": dom,
                "level": level, "method": meth.to_string(), "side": side, "h1": h1,
            }));
            let spec = TestSpec::new(fam, dom, *n).map_err(num_err)?;
            let crit = critical_value(&spec, *level, meth).map_err(num_err)?;
            let out = power(&spec, *level, &h1, side, meth).map_err(num_err)?;
            ctx.rows(
                "power,critical,routine,flags",
                &[vec![
                    ("power", num(out.value)),
                    ("critical", num(crit)),
                    ("routine", json!(out.routine)),
                    ("flags", json!(out.flags())),
                ]],
            );
            Ok(())
        }
        Cmd::Sweep { spec } => {
            let text = std::fs::read_to_string(spec)
                .map_err(|e| usage_err(format!("cannot read {spec}: {e}")))?;
            let sweep: SweepSpec =
                serde_json::from_str(&text).map_err(|e| usage_err(format!("bad sweep spec: {e}")))?;
            ctx.header(&json!({ "command": "sweep", "spec": sweep }));
            let rows = power_sweep(&sweep).map_err(num_err)?;
            match ctx.format {
                Format::Csv => {
                    println!("{SWEEP_CSV_HEADER}");
                    for r in &rows {
                        println!("{}", r.to_csv());
                    }
                }
                Format::Json => {
                    for r in &rows {
                        println!("{}", serde_json::to_string(r).unwrap());
                    }
                }
            }
            Ok(())
        }
        Cmd::Simulate {
            family,
            domain,
            model,
            n,
            reps,
            seed,
            b,
            out,
        } => {
            let fam = GofFamily::parse(&family.family).map_err(usage_err)?;
            let dom = domain.resolve(*n).map_err(usage_err)?;
            let side = model.side().map_err(usage_err)?;
            let h1 = model.model().map_err(usage_err)?.unwrap_or_else(|| {
                MixtureModel::pure_null(sigdetect::models::ComponentDist::std_normal())
            });
            let cfg = SimConfig::new(*reps, *seed);
            ctx.header(&json!({
                "command": "simulate", "family": fam.to_string(), "n": n, "domain": dom,
                "reps": reps, "seed": seed, "chunk": cfg.chunk, "side": side, "model": h1,
                "out": out,
            }));
            let samples = sample_stats(&h1, fam, dom, *n, side, &cfg).map_err(num_err)?;
            if let Some(path) = out {
                let mut f = std::fs::File::create(path)
                    .map_err(|e| usage_err(format!("cannot create {path}: {e}")))?;
                for x in &samples {
                    f.write_all(&x.to_le_bytes())
                        .map_err(|e| usage_err(format!("write failed: {e}")))?;
                }
            }
            if b.is_empty() {
                let mean = samples.iter().sum::<f64>() / samples.len() as f64;
                let min = samples.iter().cloned().fold(f64::INFINITY, f64::min);
                let max = samples.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                ctx.rows(
                    "reps,mean,min,max",
                    &[vec![
                        ("reps", json!(samples.len())),
                        ("mean", num(mean)),
                        ("min", num(min)),
                        ("max", num(max)),
                    ]],
                );
            } else {
                let mut rows = Vec::new();
                for &t in b {
                    let est = empirical_sf(&samples, t).map_err(num_err)?;
                    rows.push(vec![
                        ("b", num(t)),
                        ("sf", num(est.value)),
                        ("se", num(est.se)),
                        ("reps", json!(est.reps)),
                    ]);
                }
                ctx.rows("b,sf,se,reps", &rows);
            }
            Ok(())
        }
        Cmd::Boundary { alpha } => {
            ctx.header(&json!({ "command": "boundary", "alpha": alpha }));
            let r = detection_boundary(*alpha).map_err(num_err)?;
            ctx.rows("alpha,r", &[vec![("alpha", num(*alpha)), ("r", num(r))]]);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = std::env::var("SIGDETECT_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(cli.threads);
    if let Some(t) = threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("{}", json!({ "error": { "message": msg, "exit": code } }));
            ExitCode::from(code)
        }
    }
}
