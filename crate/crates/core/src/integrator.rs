//! Level sums `φ_n`, gap sums `ψ_n`, convergence detection and the Hölder
//! error bounds.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{HolderData, Ifs, PointAddress, Word};
use crate::kfunc::KFunction;
use crate::scalar::{Accumulator, Mode, Scalar};

/// Words per parallel work unit. Partial sums are combined in a fixed
/// pairwise tree, so the result does not depend on the thread count.
const CHUNK: u64 = 1024;

/// `(f(a) + f(b)) (g(b) − g(a))`.
pub fn trace_term(f_a: &Scalar, f_b: &Scalar, g_a: &Scalar, g_b: &Scalar) -> Scalar {
    (f_a + f_b) * (g_b - g_a)
}

/// `Tr_A + Tr_B − Tr_I` for `A = [a,x]`, `B = [x,b]`, `I = [a,b]`.
pub fn subdivision_defect(f: [&Scalar; 3], g: [&Scalar; 3]) -> Scalar {
    let [fa, fx, fb] = f;
    let [ga, gx, gb] = g;
    trace_term(fa, fx, ga, gx) + trace_term(fx, fb, gx, gb) - trace_term(fa, fb, ga, gb)
}

/// `Δ_A f Δ_B g − Δ_B f Δ_A g`.
pub fn cross_difference(f: [&Scalar; 3], g: [&Scalar; 3]) -> Scalar {
    let [fa, fx, fb] = f;
    let [ga, gx, gb] = g;
    (fx - fa) * (gb - gx) - (fb - fx) * (gx - ga)
}

/// Sum `term(w)` over all words of length `n`, deterministically.
pub fn level_sum<F>(ifs: &Ifs, n: usize, term: F) -> Result<Scalar>
where
    F: Fn(&Word) -> Result<Scalar> + Sync,
{
    let count = ifs.level_size(n)?;
    let base = ifs.n_maps();
    let chunks = count.div_ceil(CHUNK);
    let partials = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = Accumulator::new();
            for idx in c * CHUNK..((c + 1) * CHUNK).min(count) {
                acc.push(&term(&Word::from_index(idx, base, n))?);
            }
            Ok(acc.total())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(tree_sum(partials))
}

fn tree_sum(mut v: Vec<Scalar>) -> Scalar {
    if v.is_empty() {
        return Scalar::zero();
    }
    while v.len() > 1 {
        v = v
            .chunks(2)
            .map(|pair| match pair {
                [x, y] => x + y,
                [x] => x.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    v.pop().unwrap()
}

/// `φ_n(f,g)`: trace terms over all `I_w` with `|w| = n`.
pub fn phi_n(ifs: &Ifs, f: &KFunction, g: &KFunction, n: usize) -> Result<Scalar> {
    let big_n = ifs.n_maps();
    level_sum(ifs, n, |w| {
        let (a, b) = (PointAddress::left(w), PointAddress::right(w, big_n));
        Ok(trace_term(&f.eval(ifs, &a)?, &f.eval(ifs, &b)?, &g.eval(ifs, &a)?, &g.eval(ifs, &b)?))
    })
}

/// `ψ_n(f,g)` for `n ≥ 1`: trace terms over the gaps of all words of
/// length `n − 1`. Degenerate gaps contribute through their two addresses.
pub fn psi_n(ifs: &Ifs, f: &KFunction, g: &KFunction, n: usize) -> Result<Scalar> {
    if n == 0 {
        return Err(Error::InvalidConfig("psi_n is defined for n >= 1".into()));
    }
    let big_n = ifs.n_maps();
    level_sum(ifs, n - 1, |w| {
        let mut acc = Accumulator::new();
        for l in 0..big_n - 1 {
            let a = PointAddress::right(&w.child(l), big_n);
            let b = PointAddress::left(&w.child(l + 1));
            acc.push(&trace_term(&f.eval(ifs, &a)?, &f.eval(ifs, &b)?, &g.eval(ifs, &a)?, &g.eval(ifs, &b)?));
        }
        Ok(acc.total())
    })
}

/// Sum over words of length `n` of the subdivision defects produced by
/// cutting each `I_w` into its children and gaps, left to right. Satisfies
/// `φ_{n+1} + ψ_{n+1} = φ_n + level_cross_correction(n)`.
pub fn level_cross_correction(ifs: &Ifs, f: &KFunction, g: &KFunction, n: usize) -> Result<Scalar> {
    let big_n = ifs.n_maps();
    level_sum(ifs, n, |w| {
        let mut fs = Vec::with_capacity(2 * big_n);
        let mut gs = Vec::with_capacity(2 * big_n);
        for l in 0..big_n {
            let child = w.child(l);
            for addr in [PointAddress::left(&child), PointAddress::right(&child, big_n)] {
                fs.push(f.eval(ifs, &addr)?);
                gs.push(g.eval(ifs, &addr)?);
            }
        }
        let mut acc = Accumulator::new();
        for j in 1..fs.len() - 1 {
            acc.push(&cross_difference([&fs[0], &fs[j], &fs[j + 1]], [&gs[0], &gs[j], &gs[j + 1]]));
        }
        Ok(acc.total())
    })
}

#[derive(Clone, Debug)]
pub struct ConvergenceConfig {
    pub tol: Scalar,
    pub consecutive: usize,
    pub max_depth: usize,
    pub holder_f: Option<HolderData>,
    pub holder_g: Option<HolderData>,
}

impl ConvergenceConfig {
    /// Tolerance `10^-10`, three consecutive levels, and as deep as the
    /// word cap of `ifs` allows.
    pub fn for_ifs(ifs: &Ifs) -> Self {
        ConvergenceConfig {
            tol: Scalar::ratio(1, 10_000_000_000),
            consecutive: 3,
            max_depth: ifs.max_depth_within_cap().max(1),
            holder_f: None,
            holder_g: None,
        }
    }

    pub fn with_max_depth(mut self, depth: usize) -> Self {
        self.max_depth = depth;
        self
    }

    pub fn with_holder(mut self, f: HolderData, g: HolderData) -> Self {
        self.holder_f = Some(f);
        self.holder_g = Some(g);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.tol.signum() <= 0 {
            return Err(Error::InvalidConfig(format!("tol must be positive, got {}", self.tol)));
        }
        if self.consecutive == 0 {
            return Err(Error::InvalidConfig("consecutive must be at least 1".into()));
        }
        if self.max_depth == 0 {
            return Err(Error::InvalidConfig("max_depth must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    Diverged,
    BudgetExhausted,
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Status::Converged => "converged",
            Status::Diverged => "diverged",
            Status::BudgetExhausted => "budget_exhausted",
        })
    }
}

/// `phi_seq[i]` is `φ_{i+1}` and `psi_seq[i]` is `ψ_{i+1}`.
#[derive(Clone, Debug, Serialize)]
pub struct IntegralResult {
    pub phi_0: Scalar,
    pub phi_seq: Vec<Scalar>,
    pub psi_seq: Vec<Scalar>,
    pub status: Status,
    pub estimate: Option<Scalar>,
    pub growth_ratio: Option<Scalar>,
    pub bound_seq: Option<Vec<Scalar>>,
    pub mode: Mode,
    /// Set when the IFS was exact but some value came out as a float.
    pub coerced: bool,
}

impl IntegralResult {
    pub fn depth(&self) -> usize {
        self.phi_seq.len()
    }

    pub fn phi(&self, n: usize) -> Option<&Scalar> {
        match n {
            0 => Some(&self.phi_0),
            _ => self.phi_seq.get(n - 1),
        }
    }

    /// One row per level: `n,phi_n,psi_n,delta,tail_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,phi_n,psi_n,delta,tail_bound\n");
        let mut prev = &self.phi_0;
        for (i, phi) in self.phi_seq.iter().enumerate() {
            let bound = self.bound_seq.as_ref().and_then(|b| b.get(i)).map(Scalar::render).unwrap_or_default();
            let psi = self.psi_seq.get(i).map(Scalar::render).unwrap_or_default();
            let _ = writeln!(out, "{},{},{},{},{}", i + 1, phi, psi, phi - prev, bound);
            prev = phi;
        }
        out
    }
}

/// Passes of Aitken's Δ² process tried on the level sums.
const AITKEN_PASSES: usize = 4;

/// Iterate `φ_n` for `n = 1, 2, …` and classify the sequence.
///
/// Converged: `|Δ_n| < tol` for `consecutive` levels (estimate `φ_n`), or,
/// for some number of Aitken Δ² passes, `consecutive + 1` successive
/// extrapolates agree within `tol` while the difference ratio lies in
/// (−1, 1) (estimate the last extrapolate). Diverged: the difference ratio
/// stays above `1 + tol` and stable for `consecutive` levels while `|φ_n|`
/// grows. Otherwise BudgetExhausted once the depth or word cap is reached.
pub fn integrate(ifs: &Ifs, f: &KFunction, g: &KFunction, cfg: &ConvergenceConfig) -> Result<IntegralResult> {
    cfg.validate()?;
    f.check_binding(ifs, 3)?;
    g.check_binding(ifs, 3)?;
    let bound_at = |n: usize| -> Result<Option<Scalar>> {
        match (&cfg.holder_f, &cfg.holder_g) {
            (Some(hf), Some(hg)) => tail_bound(ifs, hf, hg, n).map(Some),
            _ => Ok(None),
        }
    };
    let bound_0 = bound_at(0)?;

    let mut res = IntegralResult {
        phi_0: phi_n(ifs, f, g, 0)?,
        phi_seq: Vec::new(),
        psi_seq: Vec::new(),
        status: Status::BudgetExhausted,
        estimate: None,
        growth_ratio: None,
        bound_seq: bound_0.map(|_| Vec::new()),
        mode: ifs.mode(),
        coerced: false,
    };
    let mut all = vec![res.phi_0.clone()];

    for n in 1..=cfg.max_depth {
        if ifs.level_size(n).is_err() {
            break;
        }
        let phi = phi_n(ifs, f, g, n)?;
        let psi = psi_n(ifs, f, g, n)?;
        res.coerced |= res.mode == Mode::Exact && !(phi.is_exact() && psi.is_exact());
        all.push(phi.clone());
        res.phi_seq.push(phi);
        res.psi_seq.push(psi);
        if let Some(bounds) = res.bound_seq.as_mut() {
            bounds.push(bound_at(n)?.unwrap());
        }
        if let Some(verdict) = classify(&all, cfg) {
            match verdict {
                Verdict::Converged(e) => res.estimate = Some(e),
                Verdict::Diverged(r) => res.growth_ratio = Some(r),
            }
            res.status = if res.estimate.is_some() { Status::Converged } else { Status::Diverged };
            return Ok(res);
        }
    }
    Ok(res)
}

enum Verdict {
    Converged(Scalar),
    Diverged(Scalar),
}

fn differences(x: &[Scalar]) -> Vec<Scalar> {
    x.windows(2).map(|w| &w[1] - &w[0]).collect()
}

/// One Δ² pass. A run of equal values extrapolates to itself; a vanishing
/// second difference otherwise leaves a hole.
fn aitken(x: &[Option<Scalar>]) -> Vec<Option<Scalar>> {
    x.windows(3)
        .map(|w| {
            let (a, b, c) = (w[0].as_ref()?, w[1].as_ref()?, w[2].as_ref()?);
            let (d1, d2) = (b - a, c - b);
            let denom = &d2 - &d1;
            if denom.is_zero() {
                return d2.is_zero().then(|| c.clone());
            }
            Some(c - &d2 * &d2 / denom)
        })
        .collect()
}

fn classify(phi: &[Scalar], cfg: &ConvergenceConfig) -> Option<Verdict> {
    let c = cfg.consecutive;
    let one = Scalar::one();
    let deltas = differences(phi);
    if deltas.len() >= c && deltas[deltas.len() - c..].iter().all(|d| d.abs() < cfg.tol) {
        return Some(Verdict::Converged(phi.last().unwrap().clone()));
    }
    let ratios: Vec<Option<Scalar>> =
        deltas.windows(2).map(|w| (!w[0].is_zero()).then(|| &w[1] / &w[0])).collect();
    if ratios.len() < c {
        return None;
    }
    let rwin = &ratios[ratios.len() - c..];

    let contracting = rwin.iter().all(|r| matches!(r, Some(r) if r.abs() < one));
    if contracting {
        let mut level: Vec<Option<Scalar>> = phi.iter().cloned().map(Some).collect();
        for _ in 0..AITKEN_PASSES {
            level = aitken(&level);
            if level.len() <= c {
                break;
            }
            let window = &level[level.len() - c - 1..];
            let agree = window.windows(2).all(|p| match (&p[0], &p[1]) {
                (Some(x), Some(y)) => (x - y).abs() < cfg.tol,
                _ => false,
            });
            if agree {
                return Some(Verdict::Converged(window[c].clone().unwrap()));
            }
        }
    }

    let threshold = &one + &cfg.tol;
    let above = rwin.iter().all(|r| matches!(r, Some(r) if *r > threshold));
    let stable = rwin.windows(2).all(|p| match (&p[0], &p[1]) {
        (Some(x), Some(y)) => (x - y).abs() <= &cfg.tol * y.abs().max(Scalar::one()),
        _ => false,
    });
    let n = phi.len();
    let growing = (n - c..n).all(|i| phi[i].abs() > phi[i - 1].abs());
    if above && stable && growing {
        return rwin[c - 1].clone().map(Verdict::Diverged);
    }
    None
}

/// `Σ_s r_s^e` for the ratios of `ifs`.
pub fn ratio_power_sum(ifs: &Ifs, e: &Scalar) -> Scalar {
    ifs.maps().iter().map(|m| m.r.powf(e)).sum()
}

/// `2 (b−a)^β ‖f‖ |g|_β (Σ r_s^β)^n`, an upper bound for `|φ_n(f,g)|`.
pub fn vanishing_bound(ifs: &Ifs, sup_f: &Scalar, holder_g: &HolderData, n: usize) -> Scalar {
    let beta = &holder_g.alpha;
    let width = ifs.interval().width().powf(beta);
    Scalar::int(2) * width * sup_f * &holder_g.seminorm * ratio_power_sum(ifs, beta).powi(n as i32)
}

/// `2|f|_α |g|_β (2N+1)(b−a) σ^n / (1−σ)` with `σ = Σ r_s^{α+β}`.
pub fn tail_bound(ifs: &Ifs, holder_f: &HolderData, holder_g: &HolderData, n: usize) -> Result<Scalar> {
    let sigma = ratio_power_sum(ifs, &(&holder_f.alpha + &holder_g.alpha));
    let one = Scalar::one();
    if sigma >= one {
        return Err(Error::ExponentTooSmall { sigma: sigma.to_string() });
    }
    let big_n = Scalar::int(2 * ifs.n_maps() as i64 + 1);
    Ok(Scalar::int(2) * &holder_f.seminorm * &holder_g.seminorm * big_n * ifs.interval().width() * sigma.powi(n as i32)
        / (one - sigma))
}
