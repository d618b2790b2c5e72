//! Polynomial moments against the Cantor function, the integration by
//! parts defect, and the term-by-term demonstrations.

use std::collections::BTreeSet;

use num::bigint::BigInt;
use num::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{Ifs, DEFAULT_WORD_CAP};
use crate::integrator::{integrate, phi_n, psi_n, ConvergenceConfig, Status};
use crate::kfunc::KFunction;
use crate::scalar::Scalar;

/// Largest exponent `moment` accepts.
pub const MOMENT_CAP: u32 = 64;

fn binomial(m: u32, r: u32) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..r {
        acc = acc * BigInt::from(m - i) / BigInt::from(i + 1);
    }
    acc
}

/// `φ(x^m, c)` on the middle-third Cantor set from the fixed-point
/// recursion with base value 2.
pub fn moment(m: u32) -> Result<Scalar> {
    Ok(moment_table(m)?.values.pop().unwrap())
}

/// Exact values `φ(x^r, c)` for `r = 0..=max_m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentTable {
    pub values: Vec<Scalar>,
}

pub fn moment_table(max_m: u32) -> Result<MomentTable> {
    if max_m > MOMENT_CAP {
        return Err(Error::ParamOutOfRange(format!("moment exponent {max_m} exceeds the cap {MOMENT_CAP}")));
    }
    let mut values = vec![Scalar::int(2)];
    for m in 1..=max_m {
        let rhs = recursion_sum(m, &values, m) * Scalar::ratio(1, 2);
        // φ (1 − (1 + (−1)^m) / (2·3^m)) = (1/2) Σ_{r<m} (−1/3)^r C(m,r) φ_r
        let three_m = Scalar::int(3).powi(m as i32);
        let lead = if m % 2 == 0 { Scalar::one() - Scalar::one() / three_m } else { Scalar::one() };
        values.push(rhs / lead);
    }
    Ok(MomentTable { values })
}

/// `Σ_{r<upto} (−1/3)^r C(m,r) v_r`.
fn recursion_sum(m: u32, v: &[Scalar], upto: u32) -> Scalar {
    (0..upto)
        .map(|r| {
            let coeff = Scalar::ratio(-1, 3).powi(r as i32) * Scalar::from_big(binomial(m, r), BigInt::one());
            coeff * &v[r as usize]
        })
        .sum()
}

/// One step of the pre-limit recursion:
/// `(1/(2·3^m)) φ_{n−1}(x^m) + (1/2) Σ_{r≤m} (−1/3)^r C(m,r) φ_{n−1}(x^r)`,
/// where `prev[r] = φ_{n−1}(x^r, c)`.
pub fn moment_recursion_step(m: u32, prev: &[Scalar]) -> Scalar {
    let three_m = Scalar::int(3).powi(m as i32);
    &prev[m as usize] / (Scalar::int(2) * three_m) + recursion_sum(m, prev, m + 1) * Scalar::ratio(1, 2)
}

/// Numerators of the level-`n` endpoints of the middle-third Cantor set
/// over the common denominator `3^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryNumerators {
    pub n: usize,
    pub values: BTreeSet<BigInt>,
}

impl BoundaryNumerators {
    /// `Σ_{a ∈ A_n} a^m`.
    pub fn power_sum(&self, m: u32) -> BigInt {
        self.values.iter().map(|a| num::pow::pow(a.clone(), m as usize)).sum()
    }
}

/// `A_0 = {0, 1}`, `A_n = A_{n−1} ∪ {3^n − a : a ∈ A_{n−1}}`.
pub fn boundary_numerators(n: usize) -> Result<BoundaryNumerators> {
    let requested = 1u128.checked_shl(n as u32 + 1).unwrap_or(u128::MAX);
    if requested > DEFAULT_WORD_CAP as u128 {
        return Err(Error::BudgetExceeded { requested, cap: DEFAULT_WORD_CAP });
    }
    let mut values: BTreeSet<BigInt> = [BigInt::zero(), BigInt::one()].into_iter().collect();
    let mut pow = BigInt::one();
    for _ in 1..=n {
        pow *= 3;
        let mirrored: Vec<BigInt> = values.iter().map(|a| &pow - a).collect();
        values.extend(mirrored);
    }
    Ok(BoundaryNumerators { n, values })
}

/// `φ_n(x^m, c) = S_n^{(m)} / (2^n 3^{nm})` from the boundary numerators.
pub fn moment_phi_n_oracle(m: u32, n: usize) -> Result<Scalar> {
    let a = boundary_numerators(n)?;
    let den = num::pow::pow(BigInt::from(2), n) * num::pow::pow(BigInt::from(3), n * m as usize);
    Ok(Scalar::from_big(a.power_sum(m), den))
}

/// `φ_n(1, fg) − φ_n(f, g) − φ_n(g, f)`.
pub fn parts_defect(ifs: &Ifs, f: &KFunction, g: &KFunction, n: usize) -> Result<Scalar> {
    let fg = f.clone() * g.clone();
    Ok(phi_n(ifs, &KFunction::one(), &fg, n)? - phi_n(ifs, f, g, n)? - phi_n(ifs, g, f, n)?)
}

/// `2(1 − 2q)(2q)^n`: the value of `ψ_{n+1}(1, c_{1,q})`.
pub fn cantor_gap_sum(q: &Scalar, n: usize) -> Scalar {
    let two_q = Scalar::int(2) * q;
    Scalar::int(2) * (Scalar::one() - &two_q) * two_q.powi(n as i32)
}

#[derive(Clone, Debug, Serialize)]
pub struct TermRow {
    pub m: u32,
    /// `q = m/(2m+1)`.
    pub q: Scalar,
    /// Computed `ψ_{n+1}(1, c_{1,q})` for `n = 0..depth`.
    pub psi: Vec<Scalar>,
    pub psi_closed_form_holds: bool,
    pub status: Status,
    pub estimate: Option<Scalar>,
    /// `Σ_{n ≥ depth} ψ_{n+1} = 2(2q)^depth`.
    pub tail: Scalar,
}

#[derive(Clone, Debug, Serialize)]
pub struct TermByTermReport {
    pub depth: usize,
    pub rows: Vec<TermRow>,
    /// `φ(1, c_{1,1/2})`, the integral of the limit pair.
    pub limit_estimate: Option<Scalar>,
    /// The limits of the integrals and the integral of the limit differ.
    pub mismatch: bool,
    /// The ψ tails at `depth` grow with `m`, so they are not uniformly small.
    pub non_uniform: bool,
    /// Constant `g_m = 1/m` against the constant limit: both sides are 0.
    pub constant_family_agrees: bool,
}

/// `f_m = 1`, `g_m = c_{1, m/(2m+1)}` for `m = 1..=m_max`: each integral is
/// 0, the limit pair `(1, c_{1,1/2})` integrates to 2.
pub fn term_by_term_demo(m_max: u32, depth: usize) -> Result<TermByTermReport> {
    if m_max == 0 {
        return Err(Error::ParamOutOfRange("m_max must be at least 1".into()));
    }
    let ifs = Ifs::middle_third();
    let cfg = ConvergenceConfig::for_ifs(&ifs).with_max_depth(depth.max(16));
    let one = KFunction::one();
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let q = Scalar::ratio(m as i64, 2 * m as i64 + 1);
        let g = KFunction::cantor(1, q.clone())?;
        let psi = (0..depth).map(|n| psi_n(&ifs, &one, &g, n + 1)).collect::<Result<Vec<_>>>()?;
        let psi_closed_form_holds = psi.iter().enumerate().all(|(n, v)| *v == cantor_gap_sum(&q, n));
        let r = integrate(&ifs, &one, &g, &cfg)?;
        let tail = Scalar::int(2) * (Scalar::int(2) * &q).powi(depth as i32);
        rows.push(TermRow { m, q, psi, psi_closed_form_holds, status: r.status, estimate: r.estimate, tail });
    }
    let limit = integrate(&ifs, &one, &KFunction::cantor(1, Scalar::ratio(1, 2))?, &cfg)?;
    let zero = Scalar::zero();
    let all_zero = rows.iter().all(|r| r.estimate.as_ref() == Some(&zero));
    let mismatch = all_zero && limit.estimate.as_ref().is_some_and(|e| *e != zero);
    let non_uniform = rows.windows(2).all(|w| w[1].tail > w[0].tail);
    let constant_family_agrees = (1..=m_max).all(|m| {
        let g = KFunction::constant(Scalar::ratio(1, m as i64));
        (0..=depth.min(6)).all(|n| phi_n(&ifs, &one, &g, n).map(|v| v.is_zero()).unwrap_or(false))
    });
    Ok(TermByTermReport {
        depth,
        rows,
        limit_estimate: limit.estimate,
        mismatch,
        non_uniform,
        constant_family_agrees,
    })
}
