use std::path::{Path, PathBuf};
use std::time::Instant;

use wavecode::best_basis::CutSolution;
use wavecode::haar::FptasConfig;
use wavecode::image2d::{greedy2d, image_errors, Image, Pgm, PgmFormat};
use wavecode::oracle;
use wavecode::quant::{bitcomplexity_select, multiplane_select, spectrum_select, FixedPoint, IndexCoding};
use wavecode::signal::{coefficients_to_csv, prepare, read_costs, read_signal, read_weights, saw, signal_to_text, write_signal};
use wavecode::{
    best_basis_select, cascade_forward, greedy_select, lp_error, rest_optimal, universal_select, FptasStats, Inner,
    LpNorm, Representation, Rounding, Schedule, Weights,
};

use crate::report::Report;
use crate::{
    Algo, CodingArg, CompressArgs, Failure, GenSawArgs, ImageArgs, InnerArg, OracleArgs, PgmArg, ReconstructArgs,
    RoundingArg, ScheduleArg, SignalArgs, TransformArgs,
};

type Res<T = ()> = Result<T, Failure>;

/// Attaches the path to bare I/O errors.
pub fn at<T>(path: &Path, r: wavecode::Result<T>) -> Res<T> {
    r.map_err(|e| match e {
        wavecode::Error::Io(io) => Failure {
            code: 3,
            msg: format!("{}: {io}", path.display()),
        },
        other => other.into(),
    })
}

pub fn load_signal(path: &Path, column: Option<usize>, pad: bool) -> Res<Vec<f64>> {
    Ok(prepare(at(path, read_signal(path, column))?, pad)?)
}

fn load(a: &SignalArgs) -> Res<Vec<f64>> {
    load_signal(&a.input, a.column, a.pad)
}

fn write_or_print(path: Option<&Path>, text: &str) -> Res {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn ms(start: Instant) -> String {
    format!("{:.3}", start.elapsed().as_secs_f64() * 1e3)
}

pub fn transform(a: &TransformArgs) -> Res {
    let f = load(&a.signal)?;
    let c = cascade_forward(&f, &a.filter, a.scaling)?;
    write_or_print(a.output.as_deref(), &coefficients_to_csv(&c))
}

/// Report norms: the target first, then the requested extras without repeats.
fn report_norms(target: LpNorm, extra: &[LpNorm]) -> Vec<LpNorm> {
    let mut out = vec![target];
    for &p in extra {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

enum Outcome {
    Single(Representation),
    Cut(CutSolution),
    Planes(Vec<Representation>),
}

impl Outcome {
    fn reconstructions(&self) -> Res<Vec<Vec<f64>>> {
        Ok(match self {
            Outcome::Single(r) => vec![r.reconstruct()?],
            Outcome::Cut(c) => vec![c.reconstruct()?],
            Outcome::Planes(ps) => ps.iter().map(|r| r.reconstruct()).collect::<Result<_, _>>()?,
        })
    }

    fn terms(&self) -> usize {
        match self {
            Outcome::Single(r) => r.terms.len(),
            Outcome::Cut(c) => c.terms_used(),
            Outcome::Planes(ps) => ps.iter().map(|r| r.terms.len()).sum(),
        }
    }
}

fn plane_path(base: &Path, k: usize, planes: usize) -> PathBuf {
    if planes == 1 {
        base.to_path_buf()
    } else {
        let mut s = base.as_os_str().to_owned();
        s.push(format!(".{k}"));
        PathBuf::from(s)
    }
}

fn fptas_config(a: &CompressArgs) -> FptasConfig {
    FptasConfig {
        rounding: match a.rounding {
            RoundingArg::Auto => Rounding::Auto,
            RoundingArg::Uniform => Rounding::Uniform,
            RoundingArg::PerLevel => Rounding::PerLevel,
        },
        schedule: match a.schedule {
            ScheduleArg::Bisect => Schedule::Bisect,
            ScheduleArg::Sweep => Schedule::Sweep,
        },
        ..FptasConfig::new(a.eps)
    }
}

fn coding(c: CodingArg) -> IndexCoding {
    match c {
        CodingArg::Flat => IndexCoding::Flat,
        CodingArg::ScaleAware => IndexCoding::ScaleAware,
    }
}

pub fn compress(a: &CompressArgs) -> Res {
    use Algo::*;
    if a.algo != Multiplane && a.input.len() != 1 {
        return Err(Failure::usage("--input may be repeated only with --algo multiplane"));
    }
    let haar_only = matches!(a.algo, Unrest | Finegrain | Rest | Hybrid | BestBasis);
    if haar_only && !a.filter.is_haar() {
        return Err(Failure::usage(format!("--algo {} supports only --filter haar", a.algo.name())));
    }
    if a.weights.is_some() && !matches!(a.algo, Unrest | Finegrain | Rest | Hybrid) {
        return Err(Failure::usage(format!("--weights is not supported by --algo {}", a.algo.name())));
    }
    let quant = matches!(a.algo, Spectrum | Bitcomplexity | Multiplane);
    if quant && a.budget_bits.is_none() {
        return Err(Failure::usage(format!("--algo {} needs --budget-bits", a.algo.name())));
    }
    let signals: Vec<Vec<f64>> = a
        .input
        .iter()
        .map(|p| load_signal(p, a.column, a.pad))
        .collect::<Res<_>>()?;
    let f = &signals[0];
    let n = f.len();
    let weights: Option<Weights> = a.weights.as_deref().map(|p| at(p, read_weights(p, n))).transpose()?;
    let w = weights.as_ref();
    let bits = a.budget_bits.unwrap_or(0);

    let start = Instant::now();
    let mut stats: Option<FptasStats> = None;
    let mut quant_info: Option<(u64, f64)> = None;
    let outcome = match a.algo {
        Greedy => Outcome::Single(greedy_select(f, a.budget, a.p, &a.filter)?),
        Universal => Outcome::Single(universal_select(f, a.budget, &a.filter)?),
        Unrest | Finegrain => {
            let mut cfg = fptas_config(a);
            if a.algo == Finegrain {
                cfg.rounding = Rounding::PerLevel;
            }
            let (r, s) = wavecode::haar::fptas_with(f, a.budget, a.p, w, &cfg)?;
            stats = Some(s);
            Outcome::Single(r)
        }
        Hybrid => {
            let (r, s) = wavecode::haar::hybrid_with(f, a.budget, a.p, w, &fptas_config(a))?;
            stats = Some(s);
            Outcome::Single(r)
        }
        Rest => Outcome::Single(rest_optimal(f, a.budget, a.p, w)?),
        BestBasis => {
            let inner = match a.inner {
                InnerArg::Greedy => Inner::Greedy,
                InnerArg::Hybrid => Inner::Hybrid { eps: a.eps },
                InnerArg::Unrest => Inner::Fptas { eps: a.eps },
            };
            Outcome::Cut(best_basis_select(f, a.budget, a.p, inner, a.min_block)?)
        }
        Spectrum => {
            let costs = match &a.costs {
                Some(p) => at(p, read_costs(p, n))?,
                None => coding(a.index_coding).costs(n),
            };
            let s = spectrum_select(f, &costs, bits, a.p, &a.filter)?;
            quant_info = Some((s.cost_bits, s.lower_bound));
            Outcome::Single(s.repr)
        }
        Bitcomplexity => {
            let costs = coding(a.index_coding).costs(n);
            let coder = FixedPoint::for_values(f, a.frac_bits);
            let r = bitcomplexity_select(f, &costs, &coder, bits, a.p, &a.filter)?;
            quant_info = Some((r.cost_bits, r.guess));
            Outcome::Single(r.repr)
        }
        Multiplane => {
            if !a.p.is_inf() {
                return Err(Failure::usage("--algo multiplane selects under --p inf only"));
            }
            let m = multiplane_select(&signals, bits, coding(a.index_coding), a.value_bits, &a.filter)?;
            quant_info = Some((m.cost_bits, m.lower_bound));
            Outcome::Planes(m.planes)
        }
    };
    let wall = ms(start);

    if let Some(out) = &a.output {
        match &outcome {
            Outcome::Single(r) => r.write(out)?,
            Outcome::Cut(c) => c.write(out)?,
            Outcome::Planes(ps) => {
                for (k, r) in ps.iter().enumerate() {
                    r.write(&plane_path(out, k, ps.len()))?;
                }
            }
        }
    }
    let recs = outcome.reconstructions()?;
    if let Some(out) = &a.reconstruction {
        for (k, r) in recs.iter().enumerate() {
            write_signal(&plane_path(out, k, recs.len()), r)?;
        }
    }

    let mut columns = vec!["algo", "n", "B", "norm", "error", "terms", "wall_ms"];
    if a.stats {
        columns.extend(["peak_live_tables", "rungs", "rounding"]);
    }
    if quant {
        columns.extend([
            "cost_bits",
            if a.algo == Bitcomplexity { "guess" } else { "lower_bound" },
        ]);
    }
    let mut rep = Report::new("compress", &columns);
    let inputs: Vec<String> = a.input.iter().map(|p| p.display().to_string()).collect();
    rep.config("input", inputs.join(";"))
        .config("algo", a.algo.name())
        .config("B", a.budget)
        .config("p", a.p)
        .config("eps", a.eps)
        .config("filter", &a.filter)
        .config("weights", a.weights.as_ref().map_or("none".into(), |p| p.display().to_string()))
        .config("pad", a.pad)
        .config("n", n);
    if matches!(a.algo, Unrest | Finegrain | Hybrid) {
        rep.config("rounding", format!("{:?}", a.rounding).to_lowercase())
            .config("schedule", format!("{:?}", a.schedule).to_lowercase());
    }
    if a.algo == BestBasis {
        rep.config("inner", format!("{:?}", a.inner).to_lowercase()).config("min_block", a.min_block);
    }
    if quant {
        rep.config("budget_bits", bits)
            .config("index_coding", format!("{:?}", a.index_coding).to_lowercase());
    }
    for p in report_norms(a.p, &a.norms) {
        let mut err = 0.0f64;
        for (sig, r) in signals.iter().zip(&recs) {
            err = err.max(lp_error(sig, r, p, w)?);
        }
        let mut row = vec![
            a.algo.name(),
            n.to_string(),
            a.budget.to_string(),
            p.to_string(),
            err.to_string(),
            outcome.terms().to_string(),
            wall.clone(),
        ];
        if a.stats {
            match &stats {
                Some(s) => row.extend([
                    s.peak_live_tables().to_string(),
                    s.rungs.len().to_string(),
                    s.rounding.map_or("nearest".into(), |r| format!("{r:?}").to_lowercase()),
                ]),
                None => row.extend(["".into(), "".into(), "".into()]),
            }
        }
        if let Some((cost, extra)) = quant_info {
            row.extend([cost.to_string(), extra.to_string()]);
        }
        rep.row(row);
    }
    rep.emit(a.report.as_deref())?;
    Ok(())
}

pub fn reconstruct(a: &ReconstructArgs) -> Res {
    let text = at(&a.input, std::fs::read_to_string(&a.input).map_err(Into::into))?;
    let f = if text.trim_start().starts_with("cut") {
        CutSolution::from_text(&text, &a.input)?.reconstruct()?
    } else {
        Representation::from_text(&text, &a.input)?.reconstruct()?
    };
    write_or_print(a.output.as_deref(), &signal_to_text(&f))
}

pub fn oracle(a: &OracleArgs) -> Res {
    let f = load(&a.signal)?;
    let weights = a.weights.as_deref().map(|p| at(p, read_weights(p, f.len()))).transpose()?;
    let start = Instant::now();
    let r = if a.restricted {
        oracle::brute_force_restricted_weighted(&f, a.budget, a.p, &a.filter, weights.as_ref())?
    } else {
        oracle::brute_force_unrestricted_weighted(&f, a.budget, a.p, &a.filter, weights.as_ref())?
    };
    let wall = ms(start);
    let mut rep = Report::new("oracle", &["kind", "n", "B", "norm", "error", "support", "values", "wall_ms"]);
    rep.config("input", a.signal.input.display())
        .config("B", a.budget)
        .config("p", a.p)
        .config("filter", &a.filter)
        .config("restricted", a.restricted);
    let join = |v: Vec<String>| v.join(";");
    rep.row(vec![
        if a.restricted { "restricted" } else { "unrestricted" }.into(),
        f.len().to_string(),
        a.budget.to_string(),
        a.p.to_string(),
        r.error.to_string(),
        join(r.support.iter().map(|s| s.to_string()).collect()),
        join(r.values.iter().map(|v| v.to_string()).collect()),
        wall,
    ]);
    rep.emit(a.report.as_deref())?;
    Ok(())
}

pub fn gen_saw(a: &GenSawArgs) -> Res {
    let f = saw(a.n, a.period)?;
    write_or_print(a.output.as_deref(), &signal_to_text(&f))
}

fn parse_card(spec: &str) -> Res<(usize, usize)> {
    let bad = || Failure::usage(format!("--card expects WIDTHxHEIGHT, got '{spec}'"));
    let (w, h) = spec.split_once(['x', 'X']).ok_or_else(bad)?;
    Ok((w.trim().parse().map_err(|_| bad())?, h.trim().parse().map_err(|_| bad())?))
}

pub fn image(a: &ImageArgs) -> Res {
    let (img, maxval, source) = match (&a.input, &a.card) {
        (Some(p), _) => {
            let pgm = at(p, Pgm::read(p))?;
            (Image::from_pgm(&pgm, a.pad)?, pgm.maxval, p.display().to_string())
        }
        (None, Some(c)) => {
            let (w, h) = parse_card(c)?;
            (Image::test_card(w, h)?, 255, format!("card:{w}x{h}"))
        }
        (None, None) => return Err(Failure::usage("give --input or --card")),
    };
    let g = greedy2d(&img, a.budget, a.p, &a.filter)?;
    if let Some(out) = &a.output {
        let format = match a.format {
            PgmArg::Binary => PgmFormat::Binary,
            PgmArg::Ascii => PgmFormat::Ascii,
        };
        g.reconstruction.to_pgm(maxval).write(out, format)?;
    }
    let mut rep = Report::new("image", &["p", "B", "error"]);
    rep.config("input", source)
        .config("width", img.width)
        .config("height", img.height)
        .config("B", a.budget)
        .config("select_p", a.p)
        .config("filter", &a.filter)
        .config("pad", a.pad);
    let norms = report_norms(a.p, &[LpNorm::ONE, LpNorm::TWO, LpNorm::INF]);
    for (p, e) in image_errors(&img, &g.reconstruction, &norms)? {
        rep.row(vec![p.to_string(), a.budget.to_string(), e.to_string()]);
    }
    rep.emit(a.report.as_deref())?;
    Ok(())
}
