//! Functions on the self-similar set, evaluated exactly at symbolic
//! addresses.

use std::fmt;
use std::ops::{Add, Mul};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::ifs::{HolderData, Ifs, LogRatio, PointAddress, Word};
use crate::scalar::{Mode, Scalar};
use crate::substitution::SubstitutionMap;

/// Parameters of the generalized Cantor function `c_{k,p}` on the
/// (2k+1)-adic Cantor set.
#[derive(Clone, Debug, PartialEq)]
pub struct CantorParams {
    pub k: u32,
    pub p: Scalar,
}

impl CantorParams {
    pub fn new(k: u32, p: Scalar) -> Result<Self> {
        if k == 0 {
            return Err(Error::ParamOutOfRange("k must be a positive integer".into()));
        }
        if p.signum() <= 0 || p >= Scalar::one() {
            return Err(Error::ParamOutOfRange(format!("p = {p} is not in (0, 1)")));
        }
        Ok(CantorParams { k, p })
    }

    pub fn host(&self) -> Ifs {
        Ifs::cantor(self.k)
    }

    /// `c(b_w) − c(a_w) = p^{|w|}`.
    pub fn endpoint_delta(&self, w: &Word) -> Result<Scalar> {
        if let Some(&d) = w.digits().iter().find(|&&d| d > self.k as usize) {
            return Err(Error::IncompatibleIfs(format!(
                "digit {d} does not exist on the {}-adic Cantor set",
                2 * self.k + 1
            )));
        }
        Ok(self.p.powi(w.len() as i32))
    }

    /// Hölder exponent `log_{2k+1}(1/p)`.
    pub fn holder_exponent(&self) -> LogRatio {
        LogRatio { base: Scalar::int(2 * self.k as i64 + 1), argument: Scalar::one() / &self.p }
    }

    /// Hölder data with the constant `p^{-1}`. Exponents above 1 are
    /// reported as 1 (the set has diameter 1, so the same constant works).
    pub fn holder_data(&self) -> HolderData {
        let alpha = self.holder_exponent().value();
        let alpha = if alpha > Scalar::one() { Scalar::one() } else { alpha };
        HolderData { alpha, seminorm: Scalar::one() / &self.p, sup_norm: Scalar::one() }
    }

    fn to_float(&self) -> CantorParams {
        CantorParams { k: self.k, p: self.p.to_float() }
    }

    fn eval_digits(&self, p: &PointAddress) -> Scalar {
        let k = Scalar::int(self.k as i64);
        let mut pw = Scalar::one();
        let mut acc = Scalar::zero();
        for &s in p.prefix.digits() {
            if s != 0 {
                acc = acc + Scalar::int(s as i64) * &pw;
            }
            pw = pw * &self.p;
        }
        (Scalar::one() - &self.p) / &k * acc + Scalar::int(p.tail as i64) * pw / k
    }
}

/// `Σ_i coeffs[s_i] · ratio^i` over the digits of an address (positions
/// start at 1). The constant tail sums in closed form when `|ratio| < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct DigitWeights {
    pub ratio: Scalar,
    pub coeffs: Vec<Scalar>,
}

impl DigitWeights {
    pub fn new(ratio: Scalar, coeffs: Vec<Scalar>) -> Self {
        DigitWeights { ratio, coeffs }
    }

    pub fn weight(&self, position: usize, digit: usize) -> Scalar {
        &self.coeffs[digit] * self.ratio.powi(position as i32)
    }

    /// `Σ_{i>n} weight(i, digit)`, or `None` when the series diverges.
    pub fn tail(&self, n: usize, digit: usize) -> Option<Scalar> {
        if self.ratio.abs() >= Scalar::one() {
            return None;
        }
        Some(&self.coeffs[digit] * self.ratio.powi(n as i32 + 1) / (Scalar::one() - &self.ratio))
    }

    fn eval(&self, ifs: &Ifs, p: &PointAddress) -> Result<Scalar> {
        if self.coeffs.len() != ifs.n_maps() {
            return Err(Error::IncompatibleIfs(format!(
                "{} digit weights for an IFS with {} maps",
                self.coeffs.len(),
                ifs.n_maps()
            )));
        }
        ifs.check_word(&p.prefix)?;
        ifs.check_digit(p.tail)?;
        let tail = self
            .tail(p.prefix.len(), p.tail)
            .ok_or_else(|| Error::MissingTailForm(self.ratio.to_string()))?;
        let mut pw = Scalar::one();
        let mut acc = Scalar::zero();
        for &s in p.prefix.digits() {
            pw = pw * &self.ratio;
            if !self.coeffs[s].is_zero() {
                acc = acc + &self.coeffs[s] * &pw;
            }
        }
        Ok(acc + tail)
    }
}

/// Expression tree of a function on `K`.
#[derive(Clone, Debug)]
pub enum KFunction {
    Const(Scalar),
    Identity,
    Power(Box<KFunction>, u32),
    Sum(Box<KFunction>, Box<KFunction>),
    Product(Box<KFunction>, Box<KFunction>),
    Scale(Scalar, Box<KFunction>),
    Cantor(CantorParams),
    /// 0 strictly below the threshold, 1 at and above it.
    Step(Scalar),
    DigitWeighted(DigitWeights),
    /// `inner ∘ T_ρ`: the inner function lives on the map's target.
    Pullback(Arc<SubstitutionMap>, Box<KFunction>),
}

impl KFunction {
    pub fn constant(c: Scalar) -> Self {
        KFunction::Const(c)
    }

    pub fn one() -> Self {
        KFunction::Const(Scalar::one())
    }

    pub fn x() -> Self {
        KFunction::Identity
    }

    pub fn x_pow(m: u32) -> Self {
        KFunction::Power(Box::new(KFunction::Identity), m)
    }

    pub fn pow(self, m: u32) -> Self {
        KFunction::Power(Box::new(self), m)
    }

    pub fn scale(c: Scalar, f: KFunction) -> Self {
        KFunction::Scale(c, Box::new(f))
    }

    pub fn cantor(k: u32, p: Scalar) -> Result<Self> {
        Ok(KFunction::Cantor(CantorParams::new(k, p)?))
    }

    pub fn step(threshold: Scalar) -> Self {
        KFunction::Step(threshold)
    }

    pub fn digit_weighted(ratio: Scalar, coeffs: Vec<Scalar>) -> Self {
        KFunction::DigitWeighted(DigitWeights::new(ratio, coeffs))
    }

    pub fn pullback(map: Arc<SubstitutionMap>, inner: KFunction) -> Self {
        KFunction::Pullback(map, Box::new(inner))
    }

    /// Value at `π(p)`.
    pub fn eval(&self, ifs: &Ifs, p: &PointAddress) -> Result<Scalar> {
        match self {
            KFunction::Const(c) => Ok(c.clone()),
            KFunction::Identity => ifs.address_to_point(p),
            KFunction::Power(base, m) => Ok(base.eval(ifs, p)?.powi(*m as i32)),
            KFunction::Sum(f, g) => Ok(f.eval(ifs, p)? + g.eval(ifs, p)?),
            KFunction::Product(f, g) => Ok(f.eval(ifs, p)? * g.eval(ifs, p)?),
            KFunction::Scale(c, f) => Ok(c * f.eval(ifs, p)?),
            KFunction::Cantor(params) => {
                check_cantor_host(params, ifs)?;
                ifs.check_word(&p.prefix)?;
                ifs.check_digit(p.tail)?;
                Ok(params.eval_digits(p))
            }
            KFunction::Step(c) => {
                let x = ifs.address_to_point(p)?;
                let (one, zero) = match x.mode() {
                    Mode::Exact => (Scalar::one(), Scalar::zero()),
                    Mode::Float => (Scalar::float(1.0), Scalar::float(0.0)),
                };
                Ok(if x >= *c { one } else { zero })
            }
            KFunction::DigitWeighted(w) => w.eval(ifs, p),
            KFunction::Pullback(map, inner) => {
                if map.source() != ifs {
                    return Err(Error::IncompatibleIfs("pullback source differs from the IFS".into()));
                }
                let image = map.apply(p)?;
                inner.eval(map.target(), &image)
            }
        }
    }

    /// Value at an arbitrary real point; only algebraic nodes qualify.
    pub fn eval_at_point(&self, x: &Scalar) -> Result<Scalar> {
        match self {
            KFunction::Const(c) => Ok(c.clone()),
            KFunction::Identity => Ok(x.clone()),
            KFunction::Power(base, m) => Ok(base.eval_at_point(x)?.powi(*m as i32)),
            KFunction::Sum(f, g) => Ok(f.eval_at_point(x)? + g.eval_at_point(x)?),
            KFunction::Product(f, g) => Ok(f.eval_at_point(x)? * g.eval_at_point(x)?),
            KFunction::Scale(c, f) => Ok(c * f.eval_at_point(x)?),
            other => Err(Error::NotPointwise(other.to_string())),
        }
    }

    pub fn is_algebraic(&self) -> bool {
        match self {
            KFunction::Const(_) | KFunction::Identity => true,
            KFunction::Power(f, _) | KFunction::Scale(_, f) => f.is_algebraic(),
            KFunction::Sum(f, g) | KFunction::Product(f, g) => f.is_algebraic() && g.is_algebraic(),
            _ => false,
        }
    }

    /// Same function with every embedded scalar in float mode.
    pub fn to_float(&self) -> KFunction {
        match self {
            KFunction::Const(c) => KFunction::Const(c.to_float()),
            KFunction::Identity => KFunction::Identity,
            KFunction::Power(f, m) => KFunction::Power(Box::new(f.to_float()), *m),
            KFunction::Sum(f, g) => KFunction::Sum(Box::new(f.to_float()), Box::new(g.to_float())),
            KFunction::Product(f, g) => KFunction::Product(Box::new(f.to_float()), Box::new(g.to_float())),
            KFunction::Scale(c, f) => KFunction::Scale(c.to_float(), Box::new(f.to_float())),
            KFunction::Cantor(p) => KFunction::Cantor(p.to_float()),
            KFunction::Step(c) => KFunction::Step(c.to_float()),
            KFunction::DigitWeighted(w) => KFunction::DigitWeighted(DigitWeights {
                ratio: w.ratio.to_float(),
                coeffs: w.coeffs.iter().map(Scalar::to_float).collect(),
            }),
            KFunction::Pullback(map, inner) => {
                KFunction::Pullback(Arc::new(map.to_float()), Box::new(inner.to_float()))
            }
        }
    }

    pub fn in_mode(&self, mode: Mode) -> KFunction {
        match mode {
            Mode::Exact => self.clone(),
            Mode::Float => self.to_float(),
        }
    }

    /// Check that the function can be evaluated on `ifs` and that it takes
    /// equal values on addresses the coding map identifies, for all
    /// identifications up to `depth`.
    pub fn check_binding(&self, ifs: &Ifs, depth: usize) -> Result<()> {
        self.check_nodes(ifs)?;
        for (left, right) in identified_pairs(ifs, depth)? {
            let (u, v) = (self.eval(ifs, &left)?, self.eval(ifs, &right)?);
            if u != v {
                return Err(Error::IncompatibleIfs(format!(
                    "{self} takes values {u} and {v} on two addresses of the same point"
                )));
            }
        }
        Ok(())
    }

    fn check_nodes(&self, ifs: &Ifs) -> Result<()> {
        match self {
            KFunction::Const(_) | KFunction::Identity | KFunction::Step(_) => Ok(()),
            KFunction::Power(f, _) | KFunction::Scale(_, f) => f.check_nodes(ifs),
            KFunction::Sum(f, g) | KFunction::Product(f, g) => {
                f.check_nodes(ifs)?;
                g.check_nodes(ifs)
            }
            KFunction::Cantor(p) => check_cantor_host(p, ifs),
            KFunction::DigitWeighted(w) => {
                if w.coeffs.len() != ifs.n_maps() {
                    return Err(Error::IncompatibleIfs("digit weight count differs from map count".into()));
                }
                if w.ratio.abs() >= Scalar::one() {
                    return Err(Error::MissingTailForm(w.ratio.to_string()));
                }
                Ok(())
            }
            KFunction::Pullback(map, inner) => {
                if map.source() != ifs {
                    return Err(Error::IncompatibleIfs("pullback source differs from the IFS".into()));
                }
                if !map.is_well_defined() {
                    return Err(Error::NotWellDefined(map.verdict().to_string()));
                }
                inner.check_nodes(map.target())
            }
        }
    }
}

/// Address pairs `(w·l·(N−1)^∞, w·(l+1)·0^∞)` naming the same point
/// because `I_{(w,l)}` and `I_{(w,l+1)}` touch, for `|w| < depth`.
pub fn identified_pairs(ifs: &Ifs, depth: usize) -> Result<Vec<(PointAddress, PointAddress)>> {
    let n = ifs.n_maps();
    let touching: Vec<usize> = (0..n - 1).filter(|&l| ifs.touches(l)).collect();
    let mut out = Vec::new();
    if touching.is_empty() {
        return Ok(out);
    }
    for level in 0..depth {
        for w in ifs.enumerate_words(level)? {
            for &l in &touching {
                out.push((PointAddress::right(&w.child(l), n), PointAddress::left(&w.child(l + 1))));
            }
        }
    }
    Ok(out)
}

fn check_cantor_host(params: &CantorParams, ifs: &Ifs) -> Result<()> {
    let host = params.host();
    let close = |a: &Scalar, b: &Scalar| match (a.is_exact(), b.is_exact()) {
        (true, true) => a == b,
        _ => (a.to_f64() - b.to_f64()).abs() <= 1e-12,
    };
    let same = ifs.n_maps() == host.n_maps()
        && close(&ifs.interval().a, &host.interval().a)
        && close(&ifs.interval().b, &host.interval().b)
        && ifs
            .maps()
            .iter()
            .zip(host.maps())
            .all(|(m, h)| close(&m.r, &h.r) && close(&m.t, &h.t));
    if same {
        Ok(())
    } else {
        Err(Error::IncompatibleIfs(format!(
            "cantor({},{}) needs the {}-adic Cantor IFS",
            params.k,
            params.p,
            2 * params.k + 1
        )))
    }
}

impl Add for KFunction {
    type Output = KFunction;
    fn add(self, rhs: KFunction) -> KFunction {
        KFunction::Sum(Box::new(self), Box::new(rhs))
    }
}

impl Mul for KFunction {
    type Output = KFunction;
    fn mul(self, rhs: KFunction) -> KFunction {
        KFunction::Product(Box::new(self), Box::new(rhs))
    }
}

impl fmt::Display for KFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KFunction::Const(c) => write!(f, "const({c})"),
            KFunction::Identity => write!(f, "x"),
            KFunction::Power(b, m) => match **b {
                KFunction::Identity => write!(f, "x^{m}"),
                _ => write!(f, "({b})^{m}"),
            },
            KFunction::Sum(a, b) => write!(f, "{a}+{b}"),
            KFunction::Product(a, b) => {
                let wrap = |k: &KFunction| matches!(k, KFunction::Sum(..));
                match (wrap(a), wrap(b)) {
                    (false, false) => write!(f, "{a}*{b}"),
                    (true, false) => write!(f, "({a})*{b}"),
                    (false, true) => write!(f, "{a}*({b})"),
                    (true, true) => write!(f, "({a})*({b})"),
                }
            }
            KFunction::Scale(c, g) => write!(f, "scale({c},{g})"),
            KFunction::Cantor(p) => write!(f, "cantor({},{})", p.k, p.p),
            KFunction::Step(c) => write!(f, "step({c})"),
            KFunction::DigitWeighted(w) => {
                write!(f, "digitw({},[", w.ratio)?;
                for (i, c) in w.coeffs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "])")
            }
            KFunction::Pullback(map, inner) => write!(f, "pullback({},{inner})", map.rho()),
        }
    }
}

/// Bound on `sup |c_{k,p} − c_{k,p0}|` valid for `|p − p0| < eps0` with
/// `eps0 < p0 < 1 − eps0`: `2|p − p0| / (1 − (p0 + eps0))²`.
pub fn cantor_uniform_distance_bound(k: u32, p: &Scalar, p0: &Scalar, eps0: &Scalar) -> Result<Scalar> {
    if k == 0 {
        return Err(Error::ParamOutOfRange("k must be positive".into()));
    }
    let one = Scalar::one();
    if !(eps0.signum() > 0 && eps0 < p0 && *p0 < &one - eps0) {
        return Err(Error::ParamOutOfRange(format!("need eps0 < p0 < 1 - eps0, got p0={p0}, eps0={eps0}")));
    }
    let dp = (p - p0).abs();
    if dp >= *eps0 {
        return Err(Error::ParamOutOfRange(format!("|p - p0| = {dp} is not below eps0 = {eps0}")));
    }
    let gap = one - (p0 + eps0);
    Ok(Scalar::int(2) * dp / (&gap * &gap))
}

/// `max |c_{k,p} − c_{k,p0}|` over the endpoints `a_w, b_w` of every word
/// of length `depth`.
pub fn cantor_sup_distance(k: u32, p: &Scalar, p0: &Scalar, depth: usize) -> Result<Scalar> {
    let f = CantorParams::new(k, p.clone())?;
    let g = CantorParams::new(k, p0.clone())?;
    let host = f.host();
    let mut best = Scalar::zero();
    for w in host.enumerate_words(depth)? {
        for addr in [PointAddress::left(&w), PointAddress::right(&w, host.n_maps())] {
            let d = (f.eval_digits(&addr) - g.eval_digits(&addr)).abs();
            best = best.max(d);
        }
    }
    Ok(best)
}
