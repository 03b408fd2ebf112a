//! Theoretical regime curves, density sweeps on coupled samples, and the
//! supersaturation diagnostics report.

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::supersat::{build_balanced_family, Certificate, SupersatConfig};
use crate::turan::{estimate_random_ex, EstimateMode, RandomExConfig, RandomExStats, ResultMode, SolverOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `p·n^r`
    Sparse,
    /// `n^{1+1/(2ℓ−1)}`
    Plateau,
    /// `p^{1/(2ℓ−1)}·n^{1+2/(2ℓ−1)}`, `r = 3` only
    Middle,
    /// `p·n^{r−1}`
    Dense,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::Sparse => "sparse",
            Regime::Plateau => "plateau",
            Regime::Middle => "middle",
            Regime::Dense => "dense",
        }
    }
}

/// Piecewise growth of `ex(G_{n,p}^(r), C_{2ℓ}^(r))` with `o(1)` exponents set to zero.
///
/// For `r ≥ 4`: `p·n^r` up to `p₀ = n^{−(r−1)+1/(2ℓ−1)}`, then the plateau
/// `n^{1+1/(2ℓ−1)}` up to `p₁ = n^{−(r−2)+1/(2ℓ−1)}`, then `p·n^{r−1}`.
/// For `r = 3` the upper piece is sharper: the plateau ends at `n^{−1}`,
/// followed by `p^{1/(2ℓ−1)}·n^{1+2/(2ℓ−1)}` up to `n^{−1+1/(2ℓ−2)}`, then `p·n²`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeCurve {
    pub r: usize,
    pub ell: usize,
    pub n: f64,
    pub p0: f64,
    pub p1: f64,
    /// `r = 3`: start and end of the middle piece.
    pub middle: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub p: f64,
    pub value: f64,
    pub regime: Regime,
}

impl RegimeCurve {
    pub fn new(r: usize, ell: usize, n: f64) -> Result<Self> {
        if r < 3 {
            return Err(Error::InvalidParameter(format!("curve needs r >= 3, got {r}")));
        }
        if ell < 2 || !(n > 1.0) {
            return Err(Error::InvalidParameter(format!("need ell >= 2 and n > 1 (ell={ell}, n={n})")));
        }
        let a = 1.0 / (2.0 * ell as f64 - 1.0);
        let rf = r as f64;
        let middle = (r == 3).then(|| (1.0 / n, n.powf(-1.0 + 1.0 / (2.0 * ell as f64 - 2.0))));
        Ok(RegimeCurve {
            r,
            ell,
            n,
            p0: n.powf(-(rf - 1.0) + a),
            p1: n.powf(-(rf - 2.0) + a),
            middle,
        })
    }

    fn a(&self) -> f64 {
        1.0 / (2.0 * self.ell as f64 - 1.0)
    }

    pub fn plateau(&self) -> f64 {
        self.n.powf(1.0 + self.a())
    }

    pub fn sparse_piece(&self, p: f64) -> f64 {
        p * self.n.powi(self.r as i32)
    }

    pub fn dense_piece(&self, p: f64) -> f64 {
        p * self.n.powi(self.r as i32 - 1)
    }

    pub fn middle_piece(&self, p: f64) -> f64 {
        p.powf(self.a()) * self.n.powf(1.0 + 2.0 * self.a())
    }

    pub fn regime(&self, p: f64) -> Regime {
        if p <= self.p0 {
            return Regime::Sparse;
        }
        match self.middle {
            Some((lo, hi)) => {
                if p <= lo {
                    Regime::Plateau
                } else if p <= hi {
                    Regime::Middle
                } else {
                    Regime::Dense
                }
            }
            None if p <= self.p1 => Regime::Plateau,
            None => Regime::Dense,
        }
    }

    pub fn value(&self, p: f64) -> f64 {
        match self.regime(p) {
            Regime::Sparse => self.sparse_piece(p),
            Regime::Plateau => self.plateau(),
            Regime::Middle => self.middle_piece(p),
            Regime::Dense => self.dense_piece(p),
        }
    }

    /// Relative mismatch of the adjacent pieces at each breakpoint.
    pub fn continuity_errors(&self) -> Vec<(&'static str, f64)> {
        let rel = |a: f64, b: f64| (a - b).abs() / a.abs().max(b.abs());
        let plateau = self.plateau();
        let mut out = vec![
            ("p0", rel(self.sparse_piece(self.p0), plateau)),
            ("p1", rel(self.dense_piece(self.p1), plateau)),
        ];
        if let Some((lo, hi)) = self.middle {
            out.push(("middle_start", rel(self.middle_piece(lo), plateau)));
            out.push(("middle_end", rel(self.middle_piece(hi), self.dense_piece(hi))));
        }
        out
    }
}

/// Evaluates the curve on a grid of densities in `(0, 1]`.
pub fn theoretical_curve(r: usize, ell: usize, n: f64, grid: &[f64]) -> Result<(RegimeCurve, Vec<CurvePoint>)> {
    let curve = RegimeCurve::new(r, ell, n)?;
    if let Some(&bad) = grid.iter().find(|&&p| !(p > 0.0 && p <= 1.0)) {
        return Err(Error::InvalidParameter(format!("grid value {bad} outside (0, 1]")));
    }
    if let Some((name, err)) = curve.continuity_errors().into_iter().find(|&(_, e)| e > 1e-9) {
        return Err(Error::InvalidParameter(format!("curve discontinuous at {name}: {err:e}")));
    }
    let points = grid
        .iter()
        .map(|&p| CurvePoint {
            p,
            value: curve.value(p),
            regime: curve.regime(p),
        })
        .collect();
    Ok((curve, points))
}

/// `points` log-spaced densities from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && lo <= hi && hi <= 1.0) || points == 0 {
        return Err(Error::InvalidParameter(format!("bad grid lo={lo} hi={hi} points={points}")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| {
            if i == 0 {
                lo
            } else if i + 1 == points {
                hi
            } else {
                (a + (b - a) * i as f64 / (points - 1) as f64).exp()
            }
        })
        .collect())
}

/// Flat key-value sweep configuration (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub n: usize,
    pub r: usize,
    pub ell: usize,
    pub trials: usize,
    pub seed: u64,
    pub mode: EstimateMode,
    /// Explicit densities; when empty the log grid `p_min..p_max` is used.
    #[serde(default)]
    pub p_values: Vec<f64>,
    pub p_min: Option<f64>,
    pub p_max: Option<f64>,
    pub points: Option<usize>,
    pub exact_cap: Option<usize>,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn grid(&self) -> Result<Vec<f64>> {
        if !self.p_values.is_empty() {
            if let Some(&bad) = self.p_values.iter().find(|&&p| !(0.0..=1.0).contains(&p)) {
                return Err(Error::InvalidParameter(format!("density {bad} outside [0, 1]")));
            }
            return Ok(self.p_values.clone());
        }
        match (self.p_min, self.p_max, self.points) {
            (Some(lo), Some(hi), Some(k)) => log_grid(lo, hi, k),
            _ => Err(Error::InvalidParameter("need p_values or p_min, p_max and points".into())),
        }
    }

    pub fn solver_options(&self) -> SolverOptions {
        let mut o = SolverOptions::default();
        if let Some(cap) = self.exact_cap {
            o.exact_cap = cap;
        }
        o
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub p: f64,
    pub trials: usize,
    pub mean_value: f64,
    pub std_dev: f64,
    pub mean_edges: f64,
    pub mean_copies: f64,
    /// Solver method, or `mixed` when trials differ.
    pub method: String,
    pub theory: f64,
    pub regime: Option<Regime>,
    pub failures: usize,
}

pub const CSV_COLUMNS: [&str; 10] = [
    "p",
    "trials",
    "mean_value",
    "std_dev",
    "mean_edges",
    "mean_copies",
    "method",
    "theory",
    "regime",
    "failures",
];

#[derive(Debug, Clone)]
pub struct SweepOutcome {
    pub config: SweepConfig,
    pub grid: Vec<f64>,
    pub records: Vec<SweepRecord>,
    pub stats: Vec<RandomExStats>,
    /// `(trial, grid index)` where an exact value dropped below its predecessor.
    pub monotonicity_violations: Vec<(usize, usize)>,
    pub wall_seconds: f64,
}

fn record(cfg: &SweepConfig, p: f64, stats: &RandomExStats) -> SweepRecord {
    let mut methods: Vec<&str> = stats.trials.iter().filter_map(|t| t.method.map(|m| m.as_str())).collect();
    methods.sort_unstable();
    methods.dedup();
    let method = match methods[..] {
        [m] => m.to_string(),
        [] => "none".to_string(),
        _ => "mixed".to_string(),
    };
    let curve = RegimeCurve::new(cfg.r, cfg.ell, cfg.n as f64).ok();
    let (theory, regime) = match curve {
        Some(c) if p > 0.0 => (c.value(p), Some(c.regime(p))),
        Some(_) => (0.0, Some(Regime::Sparse)),
        None => (f64::NAN, None),
    };
    SweepRecord {
        p,
        trials: stats.trials.len(),
        mean_value: stats.mean,
        std_dev: stats.std_dev,
        mean_edges: stats.mean_edges,
        mean_copies: stats.mean_copies,
        method,
        theory,
        regime,
        failures: stats.failures,
    }
}

fn write_csv_header(w: &mut dyn Write, cfg: &SweepConfig) -> Result<()> {
    for line in cfg.to_toml().lines() {
        writeln!(w, "# {line}")?;
    }
    Ok(())
}

fn write_csv_row(w: &mut csv::Writer<impl Write>, rec: &SweepRecord) -> Result<()> {
    w.write_record([
        rec.p.to_string(),
        rec.trials.to_string(),
        rec.mean_value.to_string(),
        rec.std_dev.to_string(),
        rec.mean_edges.to_string(),
        rec.mean_copies.to_string(),
        rec.method.clone(),
        rec.theory.to_string(),
        rec.regime.map_or("", Regime::as_str).to_string(),
        rec.failures.to_string(),
    ])?;
    Ok(())
}

/// Estimates `ex` at every grid density with the same trial seeds, so trial
/// `t` sees nested samples across the grid. Rows are written to `csv_out` in
/// grid order; on failure the rows before the failing density are flushed
/// before the error is returned.
pub fn regime_sweep(cfg: &SweepConfig, csv_out: Option<&mut dyn Write>) -> Result<SweepOutcome> {
    let start = Instant::now();
    let grid = cfg.grid()?;
    let opts = cfg.solver_options();
    let results: Vec<Result<RandomExStats>> = grid
        .par_iter()
        .map(|&p| {
            estimate_random_ex(
                &RandomExConfig {
                    n: cfg.n,
                    r: cfg.r,
                    ell: cfg.ell,
                    p,
                    seed: cfg.seed,
                    trials: cfg.trials,
                    mode: cfg.mode,
                },
                &opts,
            )
        })
        .collect();
    let mut writer = match csv_out {
        Some(w) => {
            write_csv_header(w, cfg)?;
            let mut cw = csv::Writer::from_writer(w);
            cw.write_record(CSV_COLUMNS)?;
            Some(cw)
        }
        None => None,
    };
    let mut records = Vec::new();
    let mut stats = Vec::new();
    for (&p, res) in grid.iter().zip(results) {
        let s = match res {
            Ok(s) => s,
            Err(e) => {
                if let Some(w) = writer.as_mut() {
                    w.flush()?;
                }
                return Err(e);
            }
        };
        let rec = record(cfg, p, &s);
        if let Some(w) = writer.as_mut() {
            write_csv_row(w, &rec)?;
        }
        records.push(rec);
        stats.push(s);
    }
    if let Some(w) = writer.as_mut() {
        w.flush()?;
    }
    let monotonicity_violations = exact_monotonicity_violations(&stats);
    if !monotonicity_violations.is_empty() {
        log::error!("coupled exact values decreased at {monotonicity_violations:?}");
    }
    Ok(SweepOutcome {
        config: cfg.clone(),
        grid,
        records,
        stats,
        monotonicity_violations,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Per trial, positions where an exact value is smaller than the previous exact value.
pub fn exact_monotonicity_violations(stats: &[RandomExStats]) -> Vec<(usize, usize)> {
    let trials = stats.first().map_or(0, |s| s.trials.len());
    let mut out = Vec::new();
    for t in 0..trials {
        let mut prev: Option<usize> = None;
        for (i, s) in stats.iter().enumerate() {
            let tr = &s.trials[t];
            if tr.mode != Some(ResultMode::Exact) {
                continue;
            }
            let v = tr.value.expect("exact trials carry a value");
            if prev.is_some_and(|q| v < q) {
                out.push((t, i));
            }
            prev = Some(v);
        }
    }
    out
}

/// Measured and theoretical log-log slopes between consecutive grid points.
pub fn slopes(records: &[SweepRecord]) -> Vec<(f64, f64, f64)> {
    records
        .windows(2)
        .filter(|w| w[0].p > 0.0 && w[0].mean_value > 0.0 && w[1].mean_value > 0.0 && w[0].p < w[1].p)
        .map(|w| {
            let dp = (w[1].p / w[0].p).ln();
            let measured = (w[1].mean_value / w[0].mean_value).ln() / dp;
            let theory = (w[1].theory / w[0].theory).ln() / dp;
            (w[1].p, measured, theory)
        })
        .collect()
}

/// JSON summary: config echo, totals, wall time and slopes.
pub fn sweep_summary(outcome: &SweepOutcome) -> serde_json::Value {
    let total_trials: usize = outcome.records.iter().map(|r| r.trials).sum();
    let failures: usize = outcome.records.iter().map(|r| r.failures).sum();
    let slopes: Vec<serde_json::Value> = slopes(&outcome.records)
        .into_iter()
        .map(|(p, m, t)| serde_json::json!({"p": p, "measured": m, "theory": t}))
        .collect();
    serde_json::json!({
        "config": outcome.config,
        "grid_points": outcome.grid.len(),
        "total_trials": total_trials,
        "failures": failures,
        "monotonicity_violations": outcome.monotonicity_violations.len(),
        "wall_seconds": outcome.wall_seconds,
        "records": outcome.records,
        "slopes": slopes,
    })
}

/// Calibration constants of the diagnostics; defaults follow the asymptotic choices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConstants {
    /// Stand-in for the polylog factor in the shadow claim.
    pub plog: f64,
    /// `α_r`; `None` means `r!/(2·r^{R+r})`.
    pub alpha: Option<f64>,
}

impl Default for ReportConstants {
    fn default() -> Self {
        ReportConstants { plog: 1.0, alpha: None }
    }
}

pub fn default_alpha(r: usize) -> f64 {
    let big_r = (r * (r - 1) / 2) as i32;
    let fact: f64 = (1..=r).map(|i| i as f64).product();
    fact / (2.0 * (r as f64).powi(big_r + r as i32))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClaimLine {
    pub name: &'static str,
    pub measured: f64,
    pub reference: f64,
    pub ratio: f64,
    pub holds_here: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupersatReport {
    pub certificate: Certificate,
    pub k_density: f64,
    pub alpha: f64,
    pub claims: Vec<ClaimLine>,
}

impl SupersatReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# diagnostics at this scale; not assertions");
        let _ = writeln!(s, "K={:.6e}", self.k_density);
        let _ = writeln!(s, "alpha_r={:.6e}", self.alpha);
        for c in &self.claims {
            let _ = writeln!(
                s,
                "{}: measured={:.6e} reference={:.6e} ratio={:.6e} holds_at_this_scale={}",
                c.name, c.measured, c.reference, c.ratio, c.holds_here
            );
        }
        s.push_str(&self.certificate.to_text());
        s
    }
}

/// Runs the supersaturation pipeline and compares three measured quantities
/// with their asymptotic reference values.
pub fn supersaturation_report(g: &Hypergraph, cfg: &SupersatConfig, consts: &ReportConstants) -> Result<SupersatReport> {
    let bf = build_balanced_family(g, cfg)?;
    let cert = bf.certificate.clone();
    let (r, n) = (cert.r, cert.n as f64);
    let big_r = (r * (r - 1) / 2) as i32;
    let k_density = cert.host_edges as f64 / n.powi(r as i32 - 1);
    let alpha = consts.alpha.unwrap_or_else(|| default_alpha(r));
    let ln_n = n.ln();
    let (a, b) = cert.shadow_pair;
    let scale = cert
        .scales
        .iter()
        .find(|(pair, _)| *pair == (a, b))
        .map(|&(_, d)| d as f64)
        .unwrap_or(0.0);
    let shadow = cert.shadow_size as f64;
    let line = |name, measured: f64, reference: f64| ClaimLine {
        name,
        measured,
        reference,
        ratio: measured / reference,
        holds_here: measured >= reference,
    };
    let tf = 1.0 / (r as f64 - 1.0);
    let claims = vec![
        line(
            "shadow",
            shadow,
            k_density.powf(tf) * (cert.part_sizes[0] as f64).powf(2.0 - tf) / consts.plog,
        ),
        line(
            "codegree_scale",
            scale,
            8.0 * cert.ell as f64 * (r as f64).powi(big_r + 1) * ln_n.powi(big_r) * n.powi(r as i32 - 3),
        ),
        line(
            "shadow_times_scale",
            shadow * scale,
            alpha * k_density * n.powi(r as i32 - 1) / (2.0 * ln_n.powi(big_r)),
        ),
    ];
    Ok(SupersatReport {
        certificate: cert,
        k_density,
        alpha,
        claims,
    })
}
