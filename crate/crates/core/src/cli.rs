//! Command-line front end.

use std::ffi::OsString;
use std::str::FromStr;

use clap::{Parser, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Map, Number, Value};

use crate::curve::CurveSpec;
use crate::error::Error;
use crate::oracle;
use crate::zeta::{self, Options, Strategy, Timings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Auto,
    Bsgs,
    Naive,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Plain,
    Json,
}

/// Zeta functions of cyclic covers y^r = F(x) of the projective line over F_p.
#[derive(Parser, Debug, Clone)]
#[command(name = "cyclic-zeta", version)]
pub struct RunConfig {
    #[arg(long)]
    pub p: u64,
    #[arg(long)]
    pub r: u64,
    /// Coefficients of F, constant term first, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub poly: Vec<i64>,
    /// Override the p-adic precision N.
    #[arg(long = "n")]
    pub n_override: Option<u32>,
    #[arg(long, value_enum, default_value = "auto")]
    pub strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "on")]
    pub interpolation: Switch,
    #[arg(long, value_enum, default_value = "plain")]
    pub output: OutputFormat,
    /// Compare counts over F_{p^i}, i <= this, with brute force.
    #[arg(long)]
    pub verify: Option<usize>,
    /// Report wall-clock time per phase.
    #[arg(long)]
    pub timing: bool,
    #[arg(long, env = "ZETA_THREADS", default_value_t = 1)]
    pub threads: usize,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub p: u64,
    pub r: u64,
    pub f: Vec<i64>,
    pub n: u32,
    pub strategy: Strategy,
    pub l: Vec<BigInt>,
    pub frobenius_polynomial: Vec<BigInt>,
    pub u: Vec<BigInt>,
    /// (i, count from L, brute-force count if verified).
    pub counts: Vec<(usize, BigInt, Option<u64>)>,
    pub timings: Option<Timings>,
}

#[derive(Debug)]
pub enum RunError {
    Input(Error),
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Input(_) => 2,
            RunError::Internal(_) => 3,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Input(e) => write!(f, "invalid input: {e} ({e:?})"),
            RunError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl From<Error> for RunError {
    fn from(e: Error) -> Self {
        if e.is_input_error() {
            RunError::Input(e)
        } else {
            RunError::Internal(format!("{e} ({e:?})"))
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, RunError> {
    let curve = CurveSpec::new(cfg.p, cfg.r, &cfg.poly, cfg.n_override)?;
    let opts = Options {
        strategy: match cfg.strategy {
            StrategyArg::Auto => Strategy::Auto,
            StrategyArg::Bsgs => Strategy::Bsgs,
            StrategyArg::Naive => Strategy::Naive,
        },
        interpolation: cfg.interpolation == Switch::On,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.max(1))
        .build()
        .map_err(|e| RunError::Internal(e.to_string()))?;
    let z = pool.install(|| zeta::compute_zeta(&curve, &opts))?;
    let imax = cfg.verify.unwrap_or(2).max(1);
    let from_l = zeta::point_counts_from_l(&z.l, curve.p, imax);
    let mut counts = Vec::with_capacity(imax);
    for (k, c) in from_l.into_iter().enumerate() {
        let i = k + 1;
        let brute = match cfg.verify {
            Some(_) => Some(pool.install(|| oracle::count_points(&curve, i))?),
            None => None,
        };
        if let Some(b) = brute {
            if BigInt::from(b) != c {
                return Err(RunError::Internal(format!(
                    "count over F_{{p^{i}}} from L(t) is {c} but brute force gives {b}"
                )));
            }
        }
        counts.push((i, c, brute));
    }
    Ok(Report {
        p: curve.p,
        r: curve.r,
        f: cfg.poly.clone(),
        n: z.n,
        strategy: z.strategy,
        frobenius_polynomial: z.frobenius_polynomial(),
        l: z.l,
        u: z.u,
        counts,
        timings: cfg.timing.then_some(z.timings),
    })
}

fn num(x: &BigInt) -> Value {
    Value::Number(Number::from_str(&x.to_string()).expect("integers are valid JSON numbers"))
}

fn nums(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(num).collect())
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

impl Report {
    pub fn to_json(&self) -> Value {
        let mut counts = Map::new();
        for (i, c, _) in &self.counts {
            counts.insert(i.to_string(), num(c));
        }
        let mut out = json!({
            "p": self.p,
            "r": self.r,
            "F": self.f,
            "N": self.n,
            "L": nums(&self.l),
            "frobenius_polynomial": nums(&self.frobenius_polynomial),
            "U": nums(&self.u),
            "counts": counts,
            "strategy": self.strategy.name(),
        });
        if let Some(t) = &self.timings {
            out["timings_ms"] = json!({
                "expansion": ms(t.expansion),
                "horizontal": ms(t.horizontal),
                "vertical": ms(t.vertical),
                "lift": ms(t.lift),
            });
        }
        if self.counts.iter().any(|c| c.2.is_some()) {
            out["verified"] = Value::Bool(true);
        }
        out
    }

    pub fn to_plain(&self) -> String {
        let join = |xs: &[BigInt]| {
            xs.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut s = String::new();
        s += &format!("curve: y^{} = F(x) over F_{}, F = {:?}\n", self.r, self.p, self.f);
        s += &format!("N: {}\nstrategy: {}\n", self.n, self.strategy.name());
        s += &format!("L: [{}]\n", join(&self.l));
        s += &format!("frobenius_polynomial: [{}]\n", join(&self.frobenius_polynomial));
        s += &format!("U: [{}]\n", join(&self.u));
        for (i, c, b) in &self.counts {
            let tag = if b.is_some() { " (verified)" } else { "" };
            s += &format!("#C(F_p^{i}): {c}{tag}\n");
        }
        if let Some(t) = &self.timings {
            s += &format!(
                "timings_ms: expansion {:.1}, horizontal {:.1}, vertical {:.1}, lift {:.1}\n",
                ms(t.expansion),
                ms(t.horizontal),
                ms(t.vertical),
                ms(t.lift)
            );
        }
        s
    }
}

/// Parses arguments, runs and prints. Returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cfg) {
        Ok(rep) => {
            match cfg.output {
                OutputFormat::Json => println!("{}", rep.to_json()),
                OutputFormat::Plain => print!("{}", rep.to_plain()),
            }
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
