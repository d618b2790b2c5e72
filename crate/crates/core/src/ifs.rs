//! Iterated function systems on a closed interval, their symbolic words and
//! addresses, the interval/gap geometry, and the similarity dimension.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{Mode, Scalar};

/// Default cap on the number of words enumerated at one level.
pub const DEFAULT_WORD_CAP: u64 = 1 << 24;

#[derive(Clone, Debug, PartialEq)]
pub struct Interval {
    pub a: Scalar,
    pub b: Scalar,
}

impl Interval {
    pub fn new(a: Scalar, b: Scalar) -> Result<Self> {
        if a < b {
            Ok(Interval { a, b })
        } else {
            Err(Error::EmptyInterval)
        }
    }

    pub fn unit() -> Self {
        Interval { a: Scalar::zero(), b: Scalar::one() }
    }

    pub fn width(&self) -> Scalar {
        &self.b - &self.a
    }
}

/// The similitude `x ↦ r·x + t` with `0 < r < 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Contraction {
    pub r: Scalar,
    pub t: Scalar,
}

impl Contraction {
    pub fn new(r: Scalar, t: Scalar) -> Self {
        Contraction { r, t }
    }

    pub fn apply(&self, x: &Scalar) -> Scalar {
        &self.r * x + &self.t
    }

    pub fn fixed_point(&self) -> Scalar {
        &self.t / (Scalar::one() - &self.r)
    }
}

/// An ordered family of contractions whose images tile the interval left
/// to right, touching in at most one point.
#[derive(Clone, Debug)]
pub struct Ifs {
    interval: Interval,
    maps: Vec<Contraction>,
    word_cap: u64,
}

impl PartialEq for Ifs {
    fn eq(&self, other: &Self) -> bool {
        self.interval == other.interval && self.maps == other.maps
    }
}

impl Ifs {
    pub fn new(interval: Interval, maps: Vec<Contraction>) -> Result<Self> {
        if maps.len() < 2 {
            return Err(Error::TooFewMaps(maps.len()));
        }
        for (index, m) in maps.iter().enumerate() {
            if m.r.signum() <= 0 || m.r >= Scalar::one() {
                return Err(Error::RatioViolation { index });
            }
        }
        let images: Vec<(Scalar, Scalar)> =
            maps.iter().map(|m| (m.apply(&interval.a), m.apply(&interval.b))).collect();
        for i in 1..images.len() {
            let (prev_a, prev_b) = &images[i - 1];
            let (a, b) = &images[i];
            if a < prev_a {
                return Err(Error::OrderingViolation { index: i, prev: i - 1 });
            }
            if a < prev_b {
                return Err(Error::OverlapViolation { left: i - 1, right: i });
            }
            if b > &interval.b {
                return Err(Error::OrderingViolation { index: i, prev: i - 1 });
            }
        }
        if images[0].0 != interval.a || images[images.len() - 1].1 != interval.b {
            return Err(Error::EndpointViolation);
        }
        Ok(Ifs { interval, maps, word_cap: DEFAULT_WORD_CAP })
    }

    /// The middle-third Cantor IFS on [0, 1].
    pub fn middle_third() -> Self {
        Self::cantor(1)
    }

    /// The (2k+1)-adic Cantor IFS `x ↦ (x + 2s)/(2k+1)`, `s = 0..=k`.
    pub fn cantor(k: u32) -> Self {
        let m = 2 * k as i64 + 1;
        let maps = (0..=k as i64)
            .map(|s| Contraction::new(Scalar::ratio(1, m), Scalar::ratio(2 * s, m)))
            .collect();
        Ifs::new(Interval::unit(), maps).expect("Cantor IFS is valid")
    }

    /// The two half-maps of [0, 1]; its attractor is the whole interval.
    pub fn binary_interval() -> Self {
        Ifs::new(
            Interval::unit(),
            vec![
                Contraction::new(Scalar::ratio(1, 2), Scalar::zero()),
                Contraction::new(Scalar::ratio(1, 2), Scalar::ratio(1, 2)),
            ],
        )
        .expect("binary IFS is valid")
    }

    pub fn interval(&self) -> &Interval {
        &self.interval
    }

    pub fn maps(&self) -> &[Contraction] {
        &self.maps
    }

    pub fn n_maps(&self) -> usize {
        self.maps.len()
    }

    pub fn word_cap(&self) -> u64 {
        self.word_cap
    }

    pub fn with_word_cap(mut self, cap: u64) -> Self {
        self.word_cap = cap;
        self
    }

    pub fn mode(&self) -> Mode {
        let exact = self.maps.iter().all(|m| m.r.is_exact() && m.t.is_exact())
            && self.interval.a.is_exact()
            && self.interval.b.is_exact();
        if exact {
            Mode::Exact
        } else {
            Mode::Float
        }
    }

    pub fn to_float(&self) -> Ifs {
        Ifs {
            interval: Interval { a: self.interval.a.to_float(), b: self.interval.b.to_float() },
            maps: self
                .maps
                .iter()
                .map(|m| Contraction::new(m.r.to_float(), m.t.to_float()))
                .collect(),
            word_cap: self.word_cap,
        }
    }

    pub fn in_mode(&self, mode: Mode) -> Ifs {
        match mode {
            Mode::Exact => self.clone(),
            Mode::Float => self.to_float(),
        }
    }

    pub fn check_digit(&self, digit: usize) -> Result<()> {
        if digit < self.n_maps() {
            Ok(())
        } else {
            Err(Error::InvalidDigit { digit, n_maps: self.n_maps() })
        }
    }

    pub fn check_word(&self, w: &Word) -> Result<()> {
        w.digits().iter().try_for_each(|&d| self.check_digit(d))
    }

    /// `(R, T)` with `f_w(x) = R·x + T`.
    pub fn word_affine(&self, w: &Word) -> Result<(Scalar, Scalar)> {
        self.check_word(w)?;
        let mut r = Scalar::one();
        let mut t = Scalar::zero();
        for &d in w.digits() {
            let m = &self.maps[d];
            t = &r * &m.t + t;
            r = r * &m.r;
        }
        Ok((r, t))
    }

    /// `(a_w, b_w) = (f_w(a), f_w(b))`.
    pub fn word_interval(&self, w: &Word) -> Result<(Scalar, Scalar)> {
        let (r, t) = self.word_affine(w)?;
        Ok((&r * &self.interval.a + &t, &r * &self.interval.b + &t))
    }

    /// The `N−1` gaps `(b_{(w,l)}, a_{(w,l+1)})` of `I_w`, degenerate ones
    /// included with equal endpoints.
    pub fn gap_intervals(&self, w: &Word) -> Result<Vec<(Scalar, Scalar)>> {
        let (r, t) = self.word_affine(w)?;
        let f = |x: Scalar| &r * x + &t;
        Ok(self
            .maps
            .windows(2)
            .map(|pair| (f(pair[0].apply(&self.interval.b)), f(pair[1].apply(&self.interval.a))))
            .collect())
    }

    /// The coding map: `π(prefix·tail^∞) = f_prefix(fixed point of f_tail)`.
    pub fn address_to_point(&self, p: &PointAddress) -> Result<Scalar> {
        self.check_digit(p.tail)?;
        let (r, t) = self.word_affine(&p.prefix)?;
        Ok(r * self.maps[p.tail].fixed_point() + t)
    }

    /// `true` when `I_{(w,l)}` and `I_{(w,l+1)}` share an endpoint. This
    /// does not depend on `w`.
    pub fn touches(&self, l: usize) -> bool {
        self.maps[l].apply(&self.interval.b) == self.maps[l + 1].apply(&self.interval.a)
    }

    pub fn is_coding_injective(&self) -> bool {
        (0..self.n_maps() - 1).all(|l| !self.touches(l))
    }

    pub fn level_size(&self, n: usize) -> Result<u64> {
        let requested = (self.n_maps() as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
        if requested > self.word_cap as u128 {
            Err(Error::BudgetExceeded { requested, cap: self.word_cap })
        } else {
            Ok(requested as u64)
        }
    }

    /// All `N^n` words of length `n` in lexicographic order.
    pub fn enumerate_words(&self, n: usize) -> Result<Words> {
        let count = self.level_size(n)?;
        Ok(Words { base: self.n_maps(), len: n, next: 0, count })
    }

    /// Deepest level whose word count stays within the cap.
    pub fn max_depth_within_cap(&self) -> usize {
        let mut n = 0;
        while self.level_size(n + 1).is_ok() {
            n += 1;
        }
        n
    }

    /// Solve `Σ r_s^d = 1`.
    pub fn similarity_dimension(&self, tol: f64) -> Dimension {
        similarity_dimension(self, tol)
    }
}

/// A finite word over the digit set; the empty word is the identity map.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(digits: Vec<usize>) -> Self {
        Word(digits)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// The `index`-th word of length `len` over `base` digits, most
    /// significant digit first.
    pub fn from_index(mut index: u64, base: usize, len: usize) -> Self {
        let mut digits = vec![0; len];
        for slot in digits.iter_mut().rev() {
            *slot = (index % base as u64) as usize;
            index /= base as u64;
        }
        Word(digits)
    }

    pub fn digits(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn child(&self, d: usize) -> Word {
        let mut v = self.0.clone();
        v.push(d);
        Word(v)
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, d) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{d}")?;
        }
        write!(f, ")")
    }
}

/// Lexicographic iterator over the words of one level.
#[derive(Clone, Debug)]
pub struct Words {
    base: usize,
    len: usize,
    next: u64,
    count: u64,
}

impl Words {
    pub fn count_total(&self) -> u64 {
        self.count
    }
}

impl Iterator for Words {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.next >= self.count {
            return None;
        }
        let w = Word::from_index(self.next, self.base, self.len);
        self.next += 1;
        Some(w)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.count - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Words {}

/// An eventually-constant point of the shift space: `prefix·tail·tail·…`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PointAddress {
    pub prefix: Word,
    pub tail: usize,
}

impl PointAddress {
    pub fn new(prefix: impl Into<Word>, tail: usize) -> Self {
        PointAddress { prefix: prefix.into(), tail }
    }

    /// Address of the left endpoint `a_w`.
    pub fn left(w: &Word) -> Self {
        PointAddress { prefix: w.clone(), tail: 0 }
    }

    /// Address of the right endpoint `b_w` for an IFS with `n_maps` maps.
    pub fn right(w: &Word, n_maps: usize) -> Self {
        PointAddress { prefix: w.clone(), tail: n_maps - 1 }
    }
}

/// Hölder data of a function: exponent, seminorm and sup norm.
#[derive(Clone, Debug, PartialEq)]
pub struct HolderData {
    pub alpha: Scalar,
    pub seminorm: Scalar,
    pub sup_norm: Scalar,
}

impl HolderData {
    pub fn new(alpha: Scalar, seminorm: Scalar, sup_norm: Scalar) -> Result<Self> {
        if alpha.signum() <= 0 || alpha > Scalar::one() {
            return Err(Error::ParamOutOfRange("Hölder exponent must lie in (0, 1]".into()));
        }
        if seminorm.signum() < 0 || sup_norm.signum() < 0 {
            return Err(Error::ParamOutOfRange("norms must be nonnegative".into()));
        }
        Ok(HolderData { alpha, seminorm, sup_norm })
    }
}

/// `log_base(argument)`, kept symbolic alongside its value.
#[derive(Clone, Debug, PartialEq)]
pub struct LogRatio {
    pub base: Scalar,
    pub argument: Scalar,
}

impl LogRatio {
    pub fn value(&self) -> Scalar {
        if self.base == self.argument {
            return Scalar::one();
        }
        if self.argument == Scalar::one() {
            return Scalar::zero();
        }
        Scalar::float(self.argument.ln() / self.base.ln())
    }
}

impl fmt::Display for LogRatio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "log_{}({})", short(&self.base), short(&self.argument))
    }
}

fn short(s: &Scalar) -> String {
    match s.as_rational() {
        Some(r) if r.is_integer() => r.numer().to_string(),
        Some(r) => format!("{}/{}", r.numer(), r.denom()),
        None => s.to_string(),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dimension {
    pub value: Scalar,
    pub closed_form: Option<LogRatio>,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.closed_form {
            Some(c) => write!(f, "{c} ≈ {:.6}", self.value.to_f64()),
            None => write!(f, "{:.6}", self.value.to_f64()),
        }
    }
}

const DIMENSION_MAX_ITER: usize = 256;

fn similarity_dimension(ifs: &Ifs, tol: f64) -> Dimension {
    let ratios: Vec<&Scalar> = ifs.maps.iter().map(|m| &m.r).collect();
    if ratios.iter().all(|r| *r == ratios[0]) {
        let form = LogRatio {
            base: Scalar::one() / ratios[0],
            argument: Scalar::int(ratios.len() as i64),
        };
        return Dimension { value: form.value(), closed_form: Some(form) };
    }
    let total: Scalar = ratios.iter().copied().sum();
    if total == Scalar::one() && total.is_exact() {
        return Dimension { value: Scalar::one(), closed_form: None };
    }
    let r: Vec<f64> = ratios.iter().map(|r| r.to_f64()).collect();
    let moment = |d: f64| r.iter().map(|x| x.powf(d)).sum::<f64>();
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut mid = 0.5;
    for _ in 0..DIMENSION_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let v = moment(mid);
        if (v - 1.0).abs() < tol {
            break;
        }
        // the moment sum decreases in d
        if v > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Dimension { value: Scalar::float(mid), closed_form: None }
}

/// JSON description of an IFS; every scalar is a decimal or `p/q` string.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct IfsSpec {
    pub interval: [String; 2],
    pub maps: Vec<MapSpec>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct MapSpec {
    pub r: String,
    pub t: String,
}

impl IfsSpec {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::IfsFormat(e.to_string()))
    }

    pub fn build(&self) -> Result<Ifs> {
        let interval = Interval::new(Scalar::parse(&self.interval[0])?, Scalar::parse(&self.interval[1])?)?;
        let maps = self
            .maps
            .iter()
            .map(|m| Ok(Contraction::new(Scalar::parse(&m.r)?, Scalar::parse(&m.t)?)))
            .collect::<Result<Vec<_>>>()?;
        Ifs::new(interval, maps)
    }

    pub fn from_ifs(ifs: &Ifs) -> Self {
        IfsSpec {
            interval: [ifs.interval.a.render(), ifs.interval.b.render()],
            maps: ifs
                .maps
                .iter()
                .map(|m| MapSpec { r: m.r.render(), t: m.t.render() })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn map(r: Scalar, t: Scalar) -> Contraction {
        Contraction::new(r, t)
    }

    fn unequal() -> Ifs {
        Ifs::new(Interval::unit(), vec![map(q(1, 3), q(0, 1)), map(q(2, 3), q(1, 3))]).unwrap()
    }

    #[test]
    fn make_ifs_accepts_and_rejects() {
        assert_eq!(Ifs::middle_third().n_maps(), 2);
        assert_eq!(Ifs::binary_interval().n_maps(), 2);
        let overlap = Ifs::new(Interval::unit(), vec![map(q(1, 2), q(0, 1)), map(q(1, 2), q(1, 4))]);
        assert_eq!(overlap, Err(Error::OverlapViolation { left: 0, right: 1 }));
        let overlap3 = Ifs::new(
            Interval::unit(),
            vec![map(q(1, 3), q(0, 1)), map(q(1, 3), q(1, 4)), map(q(1, 3), q(2, 3))],
        );
        assert!(matches!(overlap3, Err(Error::OverlapViolation { left: 0, right: 1 })));
        let unordered = Ifs::new(
            Interval::unit(),
            vec![map(q(1, 5), q(0, 1)), map(q(1, 5), q(4, 5)), map(q(1, 5), q(2, 5)), map(q(1, 5), q(4, 5))],
        );
        assert!(matches!(unordered, Err(Error::OrderingViolation { .. })));
        let ends = Ifs::new(Interval::unit(), vec![map(q(1, 3), q(1, 9)), map(q(1, 3), q(2, 3))]);
        assert_eq!(ends, Err(Error::EndpointViolation));
        let ratio = Ifs::new(Interval::unit(), vec![map(q(0, 1), q(0, 1)), map(q(1, 3), q(2, 3))]);
        assert_eq!(ratio, Err(Error::RatioViolation { index: 0 }));
        let single = Ifs::new(Interval::unit(), vec![map(q(1, 2), q(0, 1))]);
        assert_eq!(single, Err(Error::TooFewMaps(1)));
    }

    #[test]
    fn word_intervals_of_middle_third() {
        let cs = Ifs::middle_third();
        assert_eq!(cs.word_interval(&Word::new(vec![0, 1])).unwrap(), (q(2, 9), q(3, 9)));
        assert_eq!(cs.word_interval(&Word::new(vec![1, 0])).unwrap(), (q(6, 9), q(7, 9)));
        assert_eq!(cs.word_interval(&Word::empty()).unwrap(), (q(0, 1), q(1, 1)));
        assert_eq!(
            cs.word_interval(&Word::new(vec![2])),
            Err(Error::InvalidDigit { digit: 2, n_maps: 2 })
        );
    }

    #[test]
    fn gaps() {
        let cs = Ifs::middle_third();
        assert_eq!(cs.gap_intervals(&Word::empty()).unwrap(), vec![(q(1, 3), q(2, 3))]);
        assert_eq!(cs.gap_intervals(&Word::new(vec![1])).unwrap(), vec![(q(7, 9), q(8, 9))]);
        assert_eq!(
            Ifs::binary_interval().gap_intervals(&Word::empty()).unwrap(),
            vec![(q(1, 2), q(1, 2))]
        );
    }

    #[test]
    fn coding_map() {
        let cs = Ifs::middle_third();
        assert_eq!(cs.address_to_point(&PointAddress::new(vec![], 0)).unwrap(), q(0, 1));
        assert_eq!(cs.address_to_point(&PointAddress::new(vec![0], 1)).unwrap(), q(1, 3));
        let cs2 = Ifs::cantor(2);
        for w in cs2.enumerate_words(3).unwrap() {
            let (a, b) = cs2.word_interval(&w).unwrap();
            let mid = cs2.address_to_point(&PointAddress::new(w, 1)).unwrap();
            assert_eq!(mid, (a + b) / q(2, 1));
        }
    }

    #[test]
    fn endpoint_addresses_match_word_intervals() {
        for ifs in [Ifs::middle_third(), Ifs::cantor(2), unequal()] {
            let n = ifs.n_maps();
            for depth in 0..=8 {
                if ifs.level_size(depth).unwrap() > 300 {
                    break;
                }
                for w in ifs.enumerate_words(depth).unwrap() {
                    let (a, b) = ifs.word_interval(&w).unwrap();
                    assert_eq!(ifs.address_to_point(&PointAddress::left(&w)).unwrap(), a);
                    assert_eq!(ifs.address_to_point(&PointAddress::right(&w, n)).unwrap(), b);
                }
            }
        }
    }

    #[test]
    fn identification_law_for_touching_images() {
        for ifs in [Ifs::binary_interval(), unequal()] {
            for depth in 0..6 {
                for w in ifs.enumerate_words(depth).unwrap() {
                    for l in 0..ifs.n_maps() - 1 {
                        assert!(ifs.touches(l));
                        let left = PointAddress::right(&w.child(l), ifs.n_maps());
                        let right = PointAddress::left(&w.child(l + 1));
                        assert_eq!(ifs.address_to_point(&left).unwrap(), ifs.address_to_point(&right).unwrap());
                    }
                }
            }
        }
        assert!(Ifs::middle_third().is_coding_injective());
        assert!(!Ifs::binary_interval().is_coding_injective());
    }

    #[test]
    fn dimensions() {
        let d = Ifs::middle_third().similarity_dimension(1e-12);
        assert_eq!(d.closed_form.as_ref().unwrap().to_string(), "log_3(2)");
        assert!((d.value.to_f64() - 2f64.ln() / 3f64.ln()).abs() < 1e-15);
        assert_eq!(Ifs::binary_interval().similarity_dimension(1e-12).value, Scalar::one());
        let d = unequal().similarity_dimension(1e-12);
        assert_eq!(d.value, Scalar::one());
        assert!(d.value.is_exact());
        assert_eq!(Ifs::cantor(2).similarity_dimension(1e-12).to_string(), "log_5(3) ≈ 0.682606");
    }

    #[test]
    fn dimension_by_bisection() {
        let ifs = Ifs::new(
            Interval::unit(),
            vec![map(q(1, 4), q(0, 1)), map(q(1, 2), q(1, 2))],
        )
        .unwrap();
        let d = ifs.similarity_dimension(1e-12).value.to_f64();
        assert!((0.25f64.powf(d) + 0.5f64.powf(d) - 1.0).abs() < 1e-12);
        // monotone: shrinking a ratio lowers the dimension
        let smaller = Ifs::new(
            Interval::unit(),
            vec![map(q(1, 5), q(0, 1)), map(q(1, 2), q(1, 2))],
        )
        .unwrap();
        assert!(smaller.similarity_dimension(1e-12).value.to_f64() < d);
    }

    #[test]
    fn word_enumeration_order_and_budget() {
        let bin = Ifs::binary_interval();
        let words: Vec<Word> = bin.enumerate_words(0).unwrap().collect();
        assert_eq!(words, vec![Word::empty()]);
        let words: Vec<Vec<usize>> = bin.enumerate_words(2).unwrap().map(|w| w.digits().to_vec()).collect();
        assert_eq!(words, vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
        let words: Vec<Vec<usize>> =
            Ifs::cantor(2).enumerate_words(1).unwrap().map(|w| w.digits().to_vec()).collect();
        assert_eq!(words, vec![vec![0], vec![1], vec![2]]);
        let capped = bin.with_word_cap(8);
        assert!(capped.enumerate_words(3).is_ok());
        assert!(matches!(capped.enumerate_words(4), Err(Error::BudgetExceeded { requested: 16, cap: 8 })));
        assert_eq!(capped.max_depth_within_cap(), 3);
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"interval": ["0","1"], "maps": [{"r":"1/3","t":"0"},{"r":"1/3","t":"2/3"}]}"#;
        let ifs = IfsSpec::parse_json(text).unwrap().build().unwrap();
        assert_eq!(ifs, Ifs::middle_third());
        let again = IfsSpec::from_ifs(&ifs).build().unwrap();
        assert_eq!(again, ifs);
        assert!(IfsSpec::parse_json("{").is_err());
    }

    proptest! {
        #[test]
        fn children_nest_and_scale(digits in proptest::collection::vec(0usize..3, 0..6), t in 0usize..3) {
            let ifs = Ifs::cantor(2);
            let w = Word::new(digits);
            let (a, b) = ifs.word_interval(&w).unwrap();
            let (ca, cb) = ifs.word_interval(&w.child(t)).unwrap();
            prop_assert!(a <= ca && cb <= b);
            prop_assert_eq!(&cb - &ca, q(1, 5) * (&b - &a));
        }

        #[test]
        fn children_and_gaps_partition(digits in proptest::collection::vec(0usize..2, 0..6), pick in 0usize..2) {
            let ifs = [Ifs::middle_third(), unequal()][pick].clone();
            let w = Word::new(digits);
            let (a, b) = ifs.word_interval(&w).unwrap();
            let gaps = ifs.gap_intervals(&w).unwrap();
            let mut total = Scalar::zero();
            let mut cursor = a.clone();
            for d in 0..ifs.n_maps() {
                let (ca, cb) = ifs.word_interval(&w.child(d)).unwrap();
                prop_assert_eq!(&ca, &cursor);
                total = total + (&cb - &ca);
                cursor = cb;
                if d < gaps.len() {
                    prop_assert_eq!(&gaps[d].0, &cursor);
                    total = total + (&gaps[d].1 - &gaps[d].0);
                    cursor = gaps[d].1.clone();
                }
            }
            prop_assert_eq!(&cursor, &b);
            prop_assert_eq!(total, &b - &a);
        }
    }
}
