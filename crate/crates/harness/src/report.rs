//! Comparison runs, parameter sweeps and their CSV reports.

use std::io::{Read, Write};
use std::time::Instant;

use anyhow::{bail, Context};
use qrdm_core::oracle::{jacobi_svd, SpectrumReport, MAX_ORDER};
use qrdm_core::rrqr::factorize;
use qrdm_core::{Algorithm, DenseMatrix, DmParams, Error, RRQRResult, StopCriterion};
use rayon::prelude::*;

pub const CSV_HEADER: [&str; 15] = [
    "matrix",
    "algo",
    "m",
    "n",
    "rank_oracle",
    "rank_computed",
    "ratio_d_min",
    "ratio_d_max",
    "ratio_s_min",
    "ratio_s_max",
    "time_s",
    "mean_ks",
    "breaks",
    "fallbacks",
    "flags",
];

pub const FLAG_ORACLE_FAILED: &str = "oracle_failed";
pub const FLAG_ORACLE_SKIPPED: &str = "oracle_skipped";
pub const FLAG_R11_FAILED: &str = "r11_oracle_failed";
/// Fewer computed diagonal entries than the oracle rank.
pub const FLAG_SHORT: &str = "short_diagonal";

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub matrix: String,
    pub algo: Algorithm,
    pub m: usize,
    pub n: usize,
    pub rank_oracle: Option<usize>,
    pub rank_computed: usize,
    /// Extremes of `d_i / sigma_i`, `d` the descending `|r_ii|`.
    pub ratio_d: Option<(f64, f64)>,
    /// Extremes of `sigma_i(R11) / sigma_i` with `R11` of the oracle rank's order.
    pub ratio_s: Option<(f64, f64)>,
    pub time_s: f64,
    pub mean_ks: f64,
    pub breaks: usize,
    pub fallbacks: usize,
    pub flags: Vec<String>,
}

impl ComparisonRow {
    pub fn oracle_failed(&self) -> bool {
        self.flags.iter().any(|f| f == FLAG_ORACLE_FAILED || f == FLAG_R11_FAILED)
    }
}

/// Reference spectrum of one input, shared by every algorithm run on it.
#[derive(Debug, Clone)]
pub enum Oracle {
    /// Spectrum and the numerical rank under the requested threshold.
    Ok(SpectrumReport, usize),
    Skipped,
    Failed,
}

impl Oracle {
    /// `rank_tol` is relative to `sigma_1`; `None` means `eps * n`.
    pub fn compute(a: &DenseMatrix, rank_tol: Option<f64>) -> Self {
        if a.rows().min(a.cols()) > MAX_ORDER {
            return Oracle::Skipped;
        }
        match jacobi_svd(a) {
            Ok(s) => {
                let nr = match rank_tol {
                    None => s.numerical_rank,
                    Some(t) => s.rank_above(t * s.sigma_max()),
                };
                Oracle::Ok(s, nr)
            }
            Err(_) => Oracle::Failed,
        }
    }

    pub fn spectrum(&self) -> Option<(&SpectrumReport, usize)> {
        match self {
            Oracle::Ok(s, nr) => Some((s, *nr)),
            _ => None,
        }
    }
}

fn extremes(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values.fold(None, |acc, x| match acc {
        None => Some((x, x)),
        Some((lo, hi)) => Some((lo.min(x), hi.max(x))),
    })
}

/// `|r_ii|` for the computed reflectors, largest first.
pub fn sorted_diagonal(res: &RRQRResult) -> Vec<f64> {
    let mut d: Vec<f64> = res.diagonal().iter().map(|x| x.abs()).collect();
    d.sort_by(|x, y| y.total_cmp(x));
    d
}

/// `min_i` and `max_i` of `d_i / sigma_i` over `i < nr`.
pub fn diagonal_ratios(res: &RRQRResult, spec: &SpectrumReport, nr: usize) -> Option<(f64, f64)> {
    let d = sorted_diagonal(res);
    let k = nr.min(d.len());
    extremes((0..k).map(|i| d[i] / spec.sigmas[i]))
}

fn run_timed(
    a: &DenseMatrix,
    algo: Algorithm,
    params: &DmParams,
    stop: StopCriterion,
) -> qrdm_core::Result<(RRQRResult, f64)> {
    let copy = a.clone();
    let t = Instant::now();
    let res = factorize(copy, algo, params, stop)?;
    Ok((res, t.elapsed().as_secs_f64()))
}

/// Factors `a` once untimed, then once timed, and evaluates the result.
pub fn evaluate(
    id: &str,
    a: &DenseMatrix,
    oracle: &Oracle,
    algo: Algorithm,
    params: &DmParams,
    stop: StopCriterion,
) -> qrdm_core::Result<ComparisonRow> {
    run_timed(a, algo, params, stop)?;
    let (res, time_s) = run_timed(a, algo, params, stop)?;

    let mut flags = Vec::new();
    let (mut ratio_d, mut ratio_s, mut rank_oracle) = (None, None, None);
    match oracle {
        Oracle::Skipped => flags.push(FLAG_ORACLE_SKIPPED.to_string()),
        Oracle::Failed => flags.push(FLAG_ORACLE_FAILED.to_string()),
        Oracle::Ok(spec, nr) => {
            let nr = *nr;
            rank_oracle = Some(nr);
            ratio_d = diagonal_ratios(&res, spec, nr);
            let k = nr.min(res.reflector_count());
            if k < nr {
                flags.push(FLAG_SHORT.to_string());
            }
            if k > 0 {
                match jacobi_svd(&res.r11(k)) {
                    Ok(r11) => {
                        ratio_s = extremes((0..k).map(|i| r11.sigmas[i] / spec.sigmas[i]));
                    }
                    Err(Error::NoConvergence { .. }) => flags.push(FLAG_R11_FAILED.to_string()),
                    Err(e) => return Err(e),
                }
            }
        }
    }

    let steps = res.step_log.len();
    let mean_ks = if steps == 0 {
        0.0
    } else {
        res.step_log.iter().map(|s| s.k_accepted as f64).sum::<f64>() / steps as f64
    };
    Ok(ComparisonRow {
        matrix: id.to_string(),
        algo,
        m: a.rows(),
        n: a.cols(),
        rank_oracle,
        rank_computed: res.rank,
        ratio_d,
        ratio_s,
        time_s,
        mean_ks,
        breaks: res.step_log.iter().filter(|s| s.broke_early).count(),
        fallbacks: res.step_log.iter().filter(|s| s.fell_back_to_scalar).count(),
        flags,
    })
}

#[derive(Debug, Clone)]
pub struct CompareOptions {
    pub algos: Vec<Algorithm>,
    pub params: DmParams,
    pub stop: StopCriterion,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Oracle rank threshold relative to `sigma_1`; `None` means `eps * n`.
    pub rank_tol: Option<f64>,
}

impl Default for CompareOptions {
    fn default() -> Self {
        Self {
            algos: vec![Algorithm::Qrp, Algorithm::Qrdm, Algorithm::Qrdm2],
            params: DmParams::default(),
            stop: StopCriterion::default(),
            jobs: None,
            rank_tol: None,
        }
    }
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> anyhow::Result<T> {
    match jobs {
        None => Ok(f()),
        Some(j) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(j)
                .build()
                .context("building worker pool")?;
            Ok(pool.install(f))
        }
    }
}

/// One row per (matrix, algorithm), matrices in input order and
/// algorithms in option order. Matrices are processed in parallel.
pub fn compare_run(
    matrices: &[(String, DenseMatrix)],
    opts: &CompareOptions,
) -> anyhow::Result<Vec<ComparisonRow>> {
    let per_matrix: Vec<qrdm_core::Result<Vec<ComparisonRow>>> = with_pool(opts.jobs, || {
        matrices
            .par_iter()
            .map(|(id, a)| {
                let oracle = Oracle::compute(a, opts.rank_tol);
                opts.algos
                    .iter()
                    .map(|&algo| evaluate(id, a, &oracle, algo, &opts.params, opts.stop))
                    .collect()
            })
            .collect()
    })?;
    let mut rows = Vec::new();
    for (r, (id, _)) in per_matrix.into_iter().zip(matrices) {
        rows.extend(r.with_context(|| format!("factoring {id}"))?);
    }
    Ok(rows)
}

fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn fmt_opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

pub fn write_csv(rows: &[ComparisonRow], out: impl Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.matrix.clone(),
            r.algo.name().to_string(),
            r.m.to_string(),
            r.n.to_string(),
            fmt_opt(r.rank_oracle, |x| x.to_string()),
            r.rank_computed.to_string(),
            fmt_opt(r.ratio_d, |x| fmt_f64(x.0)),
            fmt_opt(r.ratio_d, |x| fmt_f64(x.1)),
            fmt_opt(r.ratio_s, |x| fmt_f64(x.0)),
            fmt_opt(r.ratio_s, |x| fmt_f64(x.1)),
            fmt_f64(r.time_s),
            fmt_f64(r.mean_ks),
            r.breaks.to_string(),
            r.fallbacks.to_string(),
            r.flags.join(";"),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn field(rec: &csv::StringRecord, i: usize) -> &str {
    rec.get(i).unwrap_or("")
}

fn opt_pair(a: &str, b: &str) -> anyhow::Result<Option<(f64, f64)>> {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => Ok(None),
        (false, false) => Ok(Some((a.parse()?, b.parse()?))),
        _ => bail!("ratio pair {a:?}, {b:?} is half blank"),
    }
}

/// Parses a report produced by [`write_csv`].
pub fn read_csv(input: impl Read) -> anyhow::Result<Vec<ComparisonRow>> {
    let mut r = csv::Reader::from_reader(input);
    let header = r.headers()?.clone();
    if header.iter().ne(CSV_HEADER) {
        bail!("unexpected report header {header:?}");
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let row = (|| -> anyhow::Result<ComparisonRow> {
            let flags = field(&rec, 14);
            Ok(ComparisonRow {
                matrix: field(&rec, 0).to_string(),
                algo: field(&rec, 1).parse()?,
                m: field(&rec, 2).parse()?,
                n: field(&rec, 3).parse()?,
                rank_oracle: match field(&rec, 4) {
                    "" => None,
                    s => Some(s.parse()?),
                },
                rank_computed: field(&rec, 5).parse()?,
                ratio_d: opt_pair(field(&rec, 6), field(&rec, 7))?,
                ratio_s: opt_pair(field(&rec, 8), field(&rec, 9))?,
                time_s: field(&rec, 10).parse()?,
                mean_ks: field(&rec, 11).parse()?,
                breaks: field(&rec, 12).parse()?,
                fallbacks: field(&rec, 13).parse()?,
                flags: if flags.is_empty() {
                    Vec::new()
                } else {
                    flags.split(';').map(str::to_string).collect()
                },
            })
        })()
        .with_context(|| format!("report line {line}"))?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub tau: f64,
    pub delta: f64,
    /// Smallest `d_i / sigma_i` over all matrices; `None` when no matrix
    /// had a usable oracle spectrum.
    pub min_ratio: Option<f64>,
    /// `floor(log10(min_ratio))`.
    pub magnitude: Option<i32>,
    /// Summed factorization time over the matrix set.
    pub time_s: f64,
}

/// Replaces the degenerate endpoints `tau = 0` and `delta = 1`.
pub fn sweep_params(tau: f64, delta: f64, k_dm: usize) -> qrdm_core::Result<DmParams> {
    let tau = if tau == 0.0 { f64::EPSILON } else { tau };
    let delta = if delta == 1.0 { 1.0 - f64::EPSILON } else { delta };
    DmParams::new(tau, delta, k_dm)
}

/// QRDM2 over a `tau x delta` grid. Each oracle spectrum is computed once.
pub fn grid_sweep(
    matrices: &[(String, DenseMatrix)],
    taus: &[f64],
    deltas: &[f64],
    k_dm: usize,
    stop: StopCriterion,
    rank_tol: Option<f64>,
) -> anyhow::Result<Vec<SweepRow>> {
    for &x in taus.iter().chain(deltas) {
        if !(0.0..=1.0).contains(&x) {
            bail!("grid value {x} outside [0, 1]");
        }
    }
    let oracles: Vec<Oracle> = matrices.par_iter().map(|(_, a)| Oracle::compute(a, rank_tol)).collect();
    let mut rows = Vec::with_capacity(taus.len() * deltas.len());
    for &tau in taus {
        for &delta in deltas {
            let params = sweep_params(tau, delta, k_dm)?;
            let mut time_s = 0.0;
            let mut min_ratio: Option<f64> = None;
            for ((id, a), oracle) in matrices.iter().zip(&oracles) {
                let (res, t) = run_timed(a, Algorithm::Qrdm2, &params, stop)
                    .with_context(|| format!("factoring {id} at tau={tau}, delta={delta}"))?;
                time_s += t;
                if let Some(lo) = oracle.spectrum().and_then(|(s, nr)| diagonal_ratios(&res, s, nr)).map(|r| r.0) {
                    min_ratio = Some(min_ratio.map_or(lo, |m| m.min(lo)));
                }
            }
            rows.push(SweepRow {
                tau,
                delta,
                min_ratio,
                magnitude: min_ratio.map(|r| r.log10().floor() as i32),
                time_s,
            });
        }
    }
    Ok(rows)
}

pub fn write_sweep_csv(rows: &[SweepRow], out: impl Write) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["tau", "delta", "min_ratio", "magnitude", "time_s"])?;
    for r in rows {
        w.write_record([
            fmt_f64(r.tau),
            fmt_f64(r.delta),
            fmt_opt(r.min_ratio, fmt_f64),
            fmt_opt(r.magnitude, |x| x.to_string()),
            fmt_f64(r.time_s),
        ])?;
    }
    w.flush()?;
    Ok(())
}
