//! Digit-permutation substitutions `T_ρ = π₂ ∘ ι_ρ ∘ π₁⁻¹` between two IFSs.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{Ifs, PointAddress, Word};
use crate::integrator::{integrate, phi_n, ConvergenceConfig, IntegralResult};
use crate::kfunc::{identified_pairs, KFunction};
use crate::scalar::Scalar;

/// Default depth for the well-definedness enumeration.
pub const DEFAULT_CHECK_DEPTH: usize = 8;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        let mut seen = vec![false; n];
        for &d in &image {
            if d >= n || seen[d] {
                return Err(Error::NotBijective(format!("{image:?}")));
            }
            seen[d] = true;
        }
        Ok(Permutation(image))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    /// Swap `i` and `j`, fix everything else.
    pub fn transposition(n: usize, i: usize, j: usize) -> Result<Self> {
        if i >= n || j >= n {
            return Err(Error::NotBijective(format!("({i} {j}) on {n} digits")));
        }
        let mut image: Vec<usize> = (0..n).collect();
        image.swap(i, j);
        Ok(Permutation(image))
    }

    /// Comma-separated images, e.g. `"0,2,1"`.
    pub fn parse(s: &str) -> Result<Self> {
        let image = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|_| Error::NotBijective(s.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(image)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.0
    }

    pub fn apply_digit(&self, d: usize) -> usize {
        self.0[d]
    }

    pub fn apply_word(&self, w: &Word) -> Word {
        Word::new(w.digits().iter().map(|&d| self.0[d]).collect())
    }

    pub fn apply_address(&self, p: &PointAddress) -> PointAddress {
        PointAddress { prefix: self.apply_word(&p.prefix), tail: self.0[p.tail] }
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, "]")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SignClass {
    PreservesEnds,
    FlipsEnds,
    Other,
}

impl SignClass {
    pub fn of(rho: &Permutation) -> SignClass {
        let last = rho.len() - 1;
        match (rho.apply_digit(0), rho.apply_digit(last)) {
            (0, l) if l == last => SignClass::PreservesEnds,
            (f, 0) if f == last => SignClass::FlipsEnds,
            _ => SignClass::Other,
        }
    }

    /// `+1`, `−1`, or nothing asserted.
    pub fn sign(self) -> Option<i64> {
        match self {
            SignClass::PreservesEnds => Some(1),
            SignClass::FlipsEnds => Some(-1),
            SignClass::Other => None,
        }
    }
}

impl fmt::Display for SignClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SignClass::PreservesEnds => "preserves-ends",
            SignClass::FlipsEnds => "flips-ends",
            SignClass::Other => "other",
        })
    }
}

/// Outcome of the well-definedness enumeration.
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    /// Every identified pair up to `depth` maps to a single point. `injective`
    /// records that the source coding map identifies nothing.
    Verified { depth: usize, pairs: usize, injective: bool },
    /// Two addresses of one source point land on different target points.
    Falsified { left: PointAddress, right: PointAddress },
}

impl Verdict {
    pub fn is_verified(&self) -> bool {
        matches!(self, Verdict::Verified { .. })
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Verified { injective: true, .. } => {
                write!(f, "verified (source coding map is injective)")
            }
            Verdict::Verified { depth, pairs, .. } => {
                write!(f, "verified ({pairs} identified pairs up to depth {depth})")
            }
            Verdict::Falsified { left, right } => write!(
                f,
                "falsified: {}·{}^∞ and {}·{}^∞ name one source point but different target points",
                left.prefix, left.tail, right.prefix, right.tail
            ),
        }
    }
}

/// Check that `ρ` sends every pair of addresses identified by the source
/// coding map (up to `depth`) to addresses of a single target point.
pub fn check_well_defined(source: &Ifs, target: &Ifs, rho: &Permutation, depth: usize) -> Result<Verdict> {
    if source.n_maps() != target.n_maps() || rho.len() != source.n_maps() {
        return Err(Error::IncompatibleIfs(format!(
            "source has {} maps, target {}, permutation {} digits",
            source.n_maps(),
            target.n_maps(),
            rho.len()
        )));
    }
    if source.is_coding_injective() {
        return Ok(Verdict::Verified { depth, pairs: 0, injective: true });
    }
    let depth = depth.min(source.max_depth_within_cap() + 1);
    let pairs = identified_pairs(source, depth)?;
    for (left, right) in &pairs {
        let u = target.address_to_point(&rho.apply_address(left))?;
        let v = target.address_to_point(&rho.apply_address(right))?;
        if u != v {
            return Ok(Verdict::Falsified { left: left.clone(), right: right.clone() });
        }
    }
    Ok(Verdict::Verified { depth, pairs: pairs.len(), injective: false })
}

#[derive(Clone, Debug)]
pub struct SubstitutionMap {
    source: Ifs,
    target: Ifs,
    rho: Permutation,
    verdict: Verdict,
    sign_class: SignClass,
}

impl SubstitutionMap {
    /// Build the map and run the well-definedness check to `depth`. A
    /// falsified map is still returned; `apply` then refuses to run.
    pub fn new(source: Ifs, target: Ifs, rho: Permutation, depth: usize) -> Result<Self> {
        let verdict = check_well_defined(&source, &target, &rho, depth)?;
        let sign_class = SignClass::of(&rho);
        Ok(SubstitutionMap { source, target, rho, verdict, sign_class })
    }

    pub fn source(&self) -> &Ifs {
        &self.source
    }

    pub fn target(&self) -> &Ifs {
        &self.target
    }

    pub fn rho(&self) -> &Permutation {
        &self.rho
    }

    pub fn verdict(&self) -> &Verdict {
        &self.verdict
    }

    pub fn is_well_defined(&self) -> bool {
        self.verdict.is_verified()
    }

    pub fn sign_class(&self) -> SignClass {
        self.sign_class
    }

    /// `ι_ρ` on an address: `ρ` applied to every digit, tail included.
    pub fn apply(&self, p: &PointAddress) -> Result<PointAddress> {
        if !self.is_well_defined() {
            return Err(Error::NotWellDefined(self.verdict.to_string()));
        }
        self.source.check_word(&p.prefix)?;
        self.source.check_digit(p.tail)?;
        Ok(self.rho.apply_address(p))
    }

    /// `T_ρ(π₁(p))` as a target point.
    pub fn image_point(&self, p: &PointAddress) -> Result<Scalar> {
        self.target.address_to_point(&self.apply(p)?)
    }

    pub fn to_float(&self) -> SubstitutionMap {
        SubstitutionMap { source: self.source.to_float(), target: self.target.to_float(), ..self.clone() }
    }
}

/// Integrals on both sides of a substitution.
#[derive(Clone, Debug)]
pub struct PullbackResult {
    /// `φ¹(f∘T_ρ, g∘T_ρ)` over the source.
    pub source: IntegralResult,
    /// `φ²(f, g)` over the target.
    pub target: IntegralResult,
    pub sign_class: SignClass,
    /// For a ±1 sign class: whether `φ¹_n = ±φ²_n` held at every computed
    /// level. `None` when no identity is asserted.
    pub level_identity: Option<bool>,
}

/// Integrate `(f∘T_ρ, g∘T_ρ)` over the source and `(f, g)` over the target.
pub fn pullback_integral(
    map: &Arc<SubstitutionMap>,
    f: &KFunction,
    g: &KFunction,
    cfg: &ConvergenceConfig,
) -> Result<PullbackResult> {
    if !map.is_well_defined() {
        return Err(Error::NotWellDefined(map.verdict().to_string()));
    }
    let fp = KFunction::pullback(map.clone(), f.clone());
    let gp = KFunction::pullback(map.clone(), g.clone());
    let source = integrate(map.source(), &fp, &gp, cfg)?;
    let target = integrate(map.target(), f, g, cfg)?;
    let level_identity = map.sign_class().sign().map(|s| {
        let s = Scalar::int(s);
        let n = source.depth().min(target.depth());
        (0..=n).all(|i| *source.phi(i).unwrap() == &s * target.phi(i).unwrap())
    });
    Ok(PullbackResult { source, target, sign_class: map.sign_class(), level_identity })
}

/// `(φ¹_n(f∘T_ρ, g∘T_ρ), φ²_n(f, g))` for `n = 0..=depth`.
pub fn pullback_levels(
    map: &Arc<SubstitutionMap>,
    f: &KFunction,
    g: &KFunction,
    depth: usize,
) -> Result<Vec<(Scalar, Scalar)>> {
    let fp = KFunction::pullback(map.clone(), f.clone());
    let gp = KFunction::pullback(map.clone(), g.clone());
    (0..=depth)
        .map(|n| Ok((phi_n(map.source(), &fp, &gp, n)?, phi_n(map.target(), f, g, n)?)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ifs::{Contraction, Interval};

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn thirds() -> Ifs {
        Ifs::new(Interval::unit(), vec![Contraction::new(q(1, 3), q(0, 1)), Contraction::new(q(2, 3), q(1, 3))])
            .unwrap()
    }

    fn map(source: Ifs, target: Ifs, rho: Permutation) -> Arc<SubstitutionMap> {
        Arc::new(SubstitutionMap::new(source, target, rho, DEFAULT_CHECK_DEPTH).unwrap())
    }

    fn cfg(ifs: &Ifs) -> ConvergenceConfig {
        ConvergenceConfig::for_ifs(ifs).with_max_depth(12)
    }

    #[test]
    fn permutations() {
        assert!(Permutation::new(vec![0, 0]).is_err());
        assert!(Permutation::new(vec![0, 2]).is_err());
        assert_eq!(Permutation::parse("0, 2,1").unwrap().image(), &[0, 2, 1]);
        assert!(Permutation::parse("0,x").is_err());
        assert_eq!(Permutation::transposition(3, 1, 2).unwrap(), Permutation::parse("0,2,1").unwrap());
        assert_eq!(SignClass::of(&Permutation::identity(3)), SignClass::PreservesEnds);
        assert_eq!(SignClass::of(&Permutation::parse("2,1,0").unwrap()), SignClass::FlipsEnds);
        assert_eq!(SignClass::of(&Permutation::parse("1,0").unwrap()), SignClass::FlipsEnds);
        assert_eq!(SignClass::of(&Permutation::parse("0,2,1").unwrap()), SignClass::Other);
        assert_eq!(Permutation::parse("0,2,1").unwrap().to_string(), "[0,2,1]");
    }

    #[test]
    fn cantor_function_as_substitution() {
        let m = map(Ifs::middle_third(), Ifs::binary_interval(), Permutation::identity(2));
        assert_eq!(m.verdict(), &Verdict::Verified { depth: 8, pairs: 0, injective: true });
        assert_eq!(m.image_point(&PointAddress::new(vec![1], 0)).unwrap(), q(1, 2));
        let c = KFunction::cantor(1, q(1, 2)).unwrap();
        for w in m.source().enumerate_words(6).unwrap() {
            for a in [PointAddress::left(&w), PointAddress::right(&w, 2)] {
                assert_eq!(m.image_point(&a).unwrap(), c.eval(m.source(), &a).unwrap());
            }
        }
    }

    #[test]
    fn endpoints_map_to_endpoints() {
        let id = map(Ifs::binary_interval(), thirds(), Permutation::identity(2));
        let flip = map(Ifs::binary_interval(), thirds(), Permutation::parse("1,0").unwrap());
        for w in Ifs::binary_interval().enumerate_words(4).unwrap() {
            let (a2, _) = thirds().word_interval(&w).unwrap();
            assert_eq!(id.image_point(&PointAddress::left(&w)).unwrap(), a2);
            let rw = flip.rho().apply_word(&w);
            let (_, b2) = thirds().word_interval(&rw).unwrap();
            assert_eq!(flip.image_point(&PointAddress::left(&w)).unwrap(), b2);
        }
    }

    #[test]
    fn closed_form_image_of_dyadic_points() {
        // T_id(Σ s_i/2^i) = Σ 2^{d_i} s_i / 3^i with d_i = s_1 + … + s_i − 1
        let m = map(Ifs::binary_interval(), thirds(), Permutation::identity(2));
        for w in Ifs::binary_interval().enumerate_words(8).unwrap() {
            let mut total = Scalar::zero();
            let mut ones = 0i32;
            for (i, &s) in w.digits().iter().enumerate() {
                if s == 1 {
                    ones += 1;
                    total = total + q(2, 1).powi(ones - 1) / q(3, 1).powi(i as i32 + 1);
                }
            }
            assert_eq!(m.image_point(&PointAddress::left(&w)).unwrap(), total);
        }
    }

    #[test]
    fn well_definedness() {
        let bin = Ifs::binary_interval();
        for rho in ["0,1", "1,0"] {
            let v = check_well_defined(&bin, &thirds(), &Permutation::parse(rho).unwrap(), 6).unwrap();
            assert!(v.is_verified(), "{rho}");
            let v = check_well_defined(&bin, &bin, &Permutation::parse(rho).unwrap(), 6).unwrap();
            assert!(v.is_verified());
        }
        // touching source, separated target: identified points are torn apart
        let v = check_well_defined(&bin, &Ifs::middle_third(), &Permutation::identity(2), 4).unwrap();
        assert!(!v.is_verified());
        let bad = SubstitutionMap::new(bin.clone(), Ifs::middle_third(), Permutation::identity(2), 4).unwrap();
        assert!(matches!(bad.apply(&PointAddress::new(vec![0], 1)), Err(Error::NotWellDefined(_))));
        assert!(check_well_defined(&bin, &Ifs::cantor(2), &Permutation::identity(2), 4).is_err());
        assert!(check_well_defined(&Ifs::cantor(2), &Ifs::cantor(2), &Permutation::parse("0,2,1").unwrap(), 8)
            .unwrap()
            .is_verified());
    }

    #[test]
    fn moriyoshi_natsume_pullback() {
        let m = map(Ifs::middle_third(), Ifs::binary_interval(), Permutation::identity(2));
        let r = pullback_integral(&m, &KFunction::one(), &KFunction::x(), &cfg(m.source())).unwrap();
        assert_eq!(r.source.estimate, Some(q(2, 1)));
        assert_eq!(r.target.estimate, Some(q(2, 1)));
        assert_eq!(r.level_identity, Some(true));
    }

    #[test]
    fn unequal_ratio_pullbacks() {
        let src = Ifs::binary_interval();
        let id = map(src.clone(), thirds(), Permutation::identity(2));
        let r = pullback_integral(&id, &KFunction::one(), &KFunction::x(), &cfg(&src)).unwrap();
        assert_eq!(r.source.estimate, Some(q(2, 1)));
        assert_eq!(r.level_identity, Some(true));
        let flip = map(src.clone(), thirds(), Permutation::parse("1,0").unwrap());
        let r = pullback_integral(&flip, &KFunction::one(), &KFunction::x(), &cfg(&src)).unwrap();
        assert_eq!(r.source.estimate, Some(q(-2, 1)));
        assert_eq!(r.sign_class, SignClass::FlipsEnds);
        assert_eq!(r.level_identity, Some(true));
        for (s, t) in pullback_levels(&flip, &KFunction::x(), &KFunction::x_pow(2), 8).unwrap() {
            assert_eq!(s, -t);
        }
    }

    #[test]
    fn no_universal_constant_for_other_permutations() {
        let cs2 = Ifs::cantor(2);
        let m = map(cs2.clone(), cs2.clone(), Permutation::parse("0,2,1").unwrap());
        assert_eq!(m.sign_class(), SignClass::Other);
        let g = KFunction::cantor(2, q(1, 3)).unwrap();
        let h = KFunction::digit_weighted(q(1, 3), vec![q(0, 1), q(-1, 1), q(2, 1)]);
        let one = KFunction::one();
        let rg = pullback_integral(&m, &one, &g, &cfg(&cs2)).unwrap();
        let rh = pullback_integral(&m, &one, &h, &cfg(&cs2)).unwrap();
        assert_eq!(rg.level_identity, None);
        assert_eq!(rg.source.estimate, Some(q(1, 1)));
        assert_eq!(rg.target.estimate, Some(q(2, 1)));
        assert_eq!(rh.source.estimate, Some(q(-1, 1)));
        assert_eq!(rh.target.estimate, Some(q(2, 1)));
        let ratio_g = rg.source.estimate.unwrap() / rg.target.estimate.unwrap();
        let ratio_h = rh.source.estimate.unwrap() / rh.target.estimate.unwrap();
        assert_eq!(ratio_g, q(1, 2));
        assert_eq!(ratio_h, q(-1, 2));
        assert_ne!(ratio_g, ratio_h);
    }

    #[test]
    fn pullback_needs_matching_source() {
        let m = map(Ifs::middle_third(), Ifs::binary_interval(), Permutation::identity(2));
        let f = KFunction::pullback(m, KFunction::x());
        assert!(matches!(f.eval(&Ifs::cantor(2), &PointAddress::new(vec![], 0)), Err(Error::IncompatibleIfs(_))));
    }
}
