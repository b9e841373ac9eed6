//! Scan of the nondegeneracy integral `I(x1, beta)` over one period of `x1`.

use std::f64::consts::PI;

use rayon::prelude::*;
use sglab::backlund::nondegeneracy_integral_on;
use sglab::profiles::nearest_singularity;
use sglab::{Grid, SolitonParams, C64};

use crate::config::ExperimentConfig;
use crate::error::Result;
use crate::report::{num, opt, Report};
use crate::runners::identities::grid_for;

pub const HEADER: [&str; 9] = ["beta", "x1", "re_i", "im_i", "abs_i", "refine_gap", "band", "L", "N"];

/// One sample of the scan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sample {
    pub x1: f64,
    pub value: C64,
    pub refine_gap: Option<f64>,
    /// Parity of the interval between consecutive singular shifts containing `x1`; intervals
    /// one period apart share a parity.
    pub band: i64,
}

/// Scan of one speed.
#[derive(Clone, Debug, PartialEq)]
pub struct BetaScan {
    pub beta: f64,
    pub grid: Grid,
    pub samples: Vec<Sample>,
    /// `|I(x1 + period) - I(x1)|` at the first sample.
    pub period_gap: f64,
}

impl BetaScan {
    pub fn min_abs(&self) -> f64 {
        self.samples.iter().map(|s| s.value.norm()).fold(f64::INFINITY, f64::min)
    }

    pub fn max_imag(&self) -> f64 {
        self.samples.iter().map(|s| s.value.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_refine_gap(&self) -> Option<f64> {
        self.samples.iter().filter_map(|s| s.refine_gap).reduce(f64::max)
    }

    /// Whether `Re I` keeps one sign inside every band.
    pub fn sign_definite_bands(&self) -> bool {
        let mut bands: Vec<(i64, f64)> = Vec::new();
        for s in &self.samples {
            let sign = s.value.re.signum();
            match bands.iter().find(|(b, _)| *b == s.band) {
                Some((_, first)) if *first != sign => return false,
                Some(_) => {}
                None => bands.push((s.band, sign)),
            }
        }
        true
    }
}

/// Shifts `(j + 1/2) period / n` kept at distance at least `margin` from the singular set.
pub fn scan_points(beta: f64, n: usize, margin: f64) -> Result<Vec<f64>> {
    let p = SolitonParams::new(beta, 0.0, 0.0)?;
    let period = p.period();
    Ok((0..n)
        .map(|j| (j as f64 + 0.5) * period / n as f64)
        .filter(|&x1| nearest_singularity(x1, &p).1 >= margin)
        .collect())
}

fn band(x1: f64, alpha: f64) -> i64 {
    let spacing = PI / alpha;
    (((x1 - 0.5 * spacing) / spacing).floor() as i64).rem_euclid(2)
}

/// Scans `I(x1, beta)` for one speed.
pub fn scan_beta(beta: f64, base: Grid, n: usize, margin: f64, refine: bool) -> Result<BetaScan> {
    let (g, _) = grid_for(beta, base);
    let alpha = (1.0 - beta * beta).sqrt();
    let fine = g.refined();
    let mut samples = Vec::new();
    for x1 in scan_points(beta, n, margin)? {
        let value = nondegeneracy_integral_on(x1, beta, &g)?;
        let refine_gap = if refine { Some((nondegeneracy_integral_on(x1, beta, &fine)? - value).norm()) } else { None };
        samples.push(Sample { x1, value, refine_gap, band: band(x1, alpha) });
    }
    let period = SolitonParams::new(beta, 0.0, 0.0)?.period();
    let period_gap = match samples.first() {
        Some(s) => (nondegeneracy_integral_on(s.x1 + period, beta, &g)? - s.value).norm(),
        None => 0.0,
    };
    Ok(BetaScan { beta, grid: g, samples, period_gap })
}

pub fn run_nondegeneracy_scan(cfg: &ExperimentConfig) -> Result<Report> {
    let base = cfg.grid()?;
    let n = cfg.count("samples") as usize;
    let (margin, refine) = (cfg.real("margin"), cfg.flag("refine"));
    let scans: Vec<Result<BetaScan>> =
        cfg.reals("betas").par_iter().map(|&b| scan_beta(b, base, n, margin, refine)).collect();
    let mut report = Report::new(HEADER.to_vec());
    let (imag_tol, refine_tol, period_tol) = (cfg.real("imag_tol"), cfg.real("refine_tol"), cfg.real("period_tol"));
    let (mut min_abs, mut max_imag, mut max_gap) = (f64::INFINITY, 0.0_f64, 0.0_f64);
    for scan in scans {
        let scan = scan?;
        for s in &scan.samples {
            report.push(vec![
                num(scan.beta),
                num(s.x1),
                num(s.value.re),
                num(s.value.im),
                num(s.value.norm()),
                opt(s.refine_gap),
                s.band.to_string(),
                num(scan.grid.l()),
                scan.grid.n().to_string(),
            ]);
        }
        let (m, im) = (scan.min_abs(), scan.max_imag());
        let gap = scan.max_refine_gap().unwrap_or(0.0);
        let bands = scan.sign_definite_bands();
        let ok = report.check(m > 0.0 && m.is_finite())
            & report.check(im < imag_tol)
            & report.check(gap < refine_tol)
            & report.check(scan.period_gap < period_tol)
            & report.check(bands);
        report.note(format!(
            "beta = {}: min|I| = {m:.6e}, max|Im I| = {im:.3e}, refine gap = {gap:.3e}, period gap = {:.3e}, \
             sign-definite bands = {bands}{}",
            scan.beta,
            scan.period_gap,
            if ok { "" } else { " [FAIL]" }
        ));
        min_abs = min_abs.min(m);
        max_imag = max_imag.max(im);
        max_gap = max_gap.max(gap);
    }
    report.note(format!("scan: min|I| = {min_abs:.6e}, max|Im I| = {max_imag:.3e}, max refine gap = {max_gap:.3e}"));
    Ok(report)
}
