use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, ValueEnum};
use wavecode::signal::{pad_to_pow2, read_djia, read_signal, saw};
use wavecode::{fptas, greedy_select, hybrid, rest_optimal, FilterBank, LpNorm};

use crate::report::Report;
use crate::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Dataset {
    Saw,
    Djia,
    File,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum BenchAlgo {
    Rest,
    Unrest,
    Hybrid,
    Greedy,
}

impl BenchAlgo {
    fn name(self) -> &'static str {
        match self {
            BenchAlgo::Rest => "rest",
            BenchAlgo::Unrest => "unrest",
            BenchAlgo::Hybrid => "hybrid",
            BenchAlgo::Greedy => "greedy",
        }
    }

    fn run(self, f: &[f64], b: usize, p: LpNorm, eps: f64) -> wavecode::Result<f64> {
        let r = match self {
            BenchAlgo::Rest => rest_optimal(f, b, p, None)?,
            BenchAlgo::Unrest => fptas(f, b, p, eps, None)?,
            BenchAlgo::Hybrid => hybrid(f, b, p, eps, None)?,
            BenchAlgo::Greedy => greedy_select(f, b, p, &FilterBank::haar())?,
        };
        Ok(r.reported_error)
    }
}

#[derive(Args)]
pub struct BenchArgs {
    #[arg(long, value_enum, default_value = "saw")]
    pub dataset: Dataset,
    /// Data file for `djia` and `file`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub column: Option<usize>,
    /// Zero-pad instead of truncating to a power-of-two prefix.
    #[arg(long)]
    pub pad: bool,
    #[arg(long, default_value_t = 2048)]
    pub n: usize,
    #[arg(long, default_value_t = 256)]
    pub period: usize,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "rest,unrest,hybrid")]
    pub algos: Vec<BenchAlgo>,
    /// Budgets: comma-separated values or inclusive ranges `A..B`.
    #[arg(long, default_value = "4..64")]
    pub budgets: String,
    #[arg(long, default_value = "inf")]
    pub p: LpNorm,
    #[arg(long, default_value_t = 1.0)]
    pub eps: f64,
    /// Prefix lengths for the timing table as log2 sizes, e.g. `9..13`.
    #[arg(long)]
    pub prefixes: Option<String>,
    /// Budget used in the timing table.
    #[arg(long, default_value_t = 16)]
    pub timing_b: usize,
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    /// Error-versus-budget CSV (default: stdout).
    #[arg(long)]
    pub errors: Option<PathBuf>,
    /// Time-versus-length CSV (default: stdout).
    #[arg(long)]
    pub times: Option<PathBuf>,
}

pub fn parse_list(spec: &str, flag: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::usage(format!("{flag}: cannot parse '{spec}'"));
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| bad())?;
            let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| bad())?);
        }
    }
    if out.is_empty() {
        return Err(bad());
    }
    Ok(out)
}

fn load(a: &BenchArgs) -> Result<(Vec<f64>, String), Failure> {
    let need = || Failure::usage("--input is required for this dataset");
    let (raw, name) = match a.dataset {
        Dataset::Saw => (saw(a.n, a.period)?, format!("saw(n={},period={})", a.n, a.period)),
        Dataset::Djia => {
            let p = a.input.as_ref().ok_or_else(need)?;
            (read_djia(p)?, format!("djia:{}", p.display()))
        }
        Dataset::File => {
            let p = a.input.as_ref().ok_or_else(need)?;
            (crate::commands::at(p, read_signal(p, a.column))?, format!("file:{}", p.display()))
        }
    };
    if raw.is_empty() {
        return Err(Failure {
            code: 3,
            msg: "dataset is empty".into(),
        });
    }
    let f = if a.pad {
        pad_to_pow2(&raw)
    } else {
        let keep = 1usize << (usize::BITS - 1 - raw.len().leading_zeros());
        raw[..keep].to_vec()
    };
    Ok((f, name))
}

pub fn run(a: &BenchArgs) -> Result<(), Failure> {
    let (f, name) = load(a)?;
    let n = f.len();
    let budgets = parse_list(&a.budgets, "--budgets")?;
    let mut algos = a.algos.clone();
    algos.sort();
    algos.dedup();

    let mut rep = Report::new("bench", &["dataset", "algo", "n", "B", "error", "wall_ms"]);
    rep.config("dataset", &name)
        .config("n", n)
        .config("p", a.p)
        .config("eps", a.eps)
        .config("budgets", &a.budgets)
        .config("algos", algos.iter().map(|x| x.name()).collect::<Vec<_>>().join(";"));
    let mut errors: BTreeMap<(usize, BenchAlgo), f64> = BTreeMap::new();
    for &b in budgets.iter().filter(|&&b| b <= n) {
        for &algo in &algos {
            let start = Instant::now();
            let e = algo.run(&f, b, a.p, a.eps)?;
            let wall = start.elapsed().as_secs_f64() * 1e3;
            errors.insert((b, algo), e);
            rep.row(vec![
                name.clone(),
                algo.name().into(),
                n.to_string(),
                b.to_string(),
                e.to_string(),
                format!("{wall:.3}"),
            ]);
        }
    }
    let mut violations = Vec::new();
    for (&(b, algo), &e) in &errors {
        if algo != BenchAlgo::Unrest {
            continue;
        }
        if let Some(&rest) = errors.get(&(b, BenchAlgo::Rest)) {
            if e > (1.0 + a.eps) * rest + 1e-9 {
                violations.push(b);
            }
        }
    }
    if algos.contains(&BenchAlgo::Unrest) && algos.contains(&BenchAlgo::Rest) {
        rep.note(format!("check unrest<=(1+eps)*rest violations={violations:?}"));
    }
    rep.emit(a.errors.as_deref())?;

    let Some(spec) = &a.prefixes else {
        return Ok(());
    };
    let logs = parse_list(spec, "--prefixes")?;
    let mut times = Report::new("bench", &["algo", "n", "B", "median_ms", "ratio"]);
    times
        .config("dataset", &name)
        .config("p", a.p)
        .config("eps", a.eps)
        .config("B", a.timing_b)
        .config("repeats", a.repeats);
    for &algo in &algos {
        let mut prev: Option<f64> = None;
        for &l in &logs {
            let len = 1usize << l;
            if len > n {
                return Err(Failure::usage(format!("prefix 2^{l} exceeds the dataset length {n}")));
            }
            let prefix = &f[..len];
            let mut t: Vec<f64> = (0..a.repeats.max(1))
                .map(|_| {
                    let start = Instant::now();
                    algo.run(prefix, a.timing_b.min(len), a.p, a.eps).map(|_| start.elapsed().as_secs_f64() * 1e3)
                })
                .collect::<wavecode::Result<_>>()?;
            t.sort_by(f64::total_cmp);
            let med = t[t.len() / 2];
            times.row(vec![
                algo.name().into(),
                len.to_string(),
                a.timing_b.to_string(),
                format!("{med:.3}"),
                prev.map_or(String::new(), |p| format!("{:.3}", med / p)),
            ]);
            prev = Some(med);
        }
    }
    times.emit(a.times.as_deref())?;
    Ok(())
}
