//! Classical Riemann–Stieltjes sums on an interval, used to cross-check the
//! level sums of the binary interval IFS.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::Ifs;
use crate::integrator::phi_n;
use crate::kfunc::KFunction;
use crate::scalar::{Accumulator, Scalar};
use crate::substitution::{Permutation, SubstitutionMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tag {
    Left,
    Right,
    Midpoint,
}

/// Points `x_0 < … < x_N` with one tag per cell.
#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    points: Vec<Scalar>,
    tags: Vec<Scalar>,
}

impl Partition {
    pub fn new(points: Vec<Scalar>, tags: Vec<Scalar>) -> Result<Self> {
        if points.len() < 2 || tags.len() != points.len() - 1 {
            return Err(Error::InvalidConfig(format!(
                "{} points need {} tags, got {}",
                points.len(),
                points.len().saturating_sub(1),
                tags.len()
            )));
        }
        for (i, w) in points.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(Error::InvalidConfig(format!("partition points not increasing at {i}")));
            }
            if tags[i] < w[0] || tags[i] > w[1] {
                return Err(Error::InvalidConfig(format!("tag {i} lies outside its cell")));
            }
        }
        Ok(Partition { points, tags })
    }

    /// `cells` equal cells of `[a, b]`.
    pub fn uniform(a: &Scalar, b: &Scalar, cells: usize, tag: Tag) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidConfig("a partition needs at least one cell".into()));
        }
        let h = (b - a) / Scalar::int(cells as i64);
        let points: Vec<Scalar> = (0..=cells).map(|i| a + &h * Scalar::int(i as i64)).collect();
        let tags = points
            .windows(2)
            .map(|w| match tag {
                Tag::Left => w[0].clone(),
                Tag::Right => w[1].clone(),
                Tag::Midpoint => (&w[0] + &w[1]) / Scalar::int(2),
            })
            .collect();
        Partition::new(points, tags)
    }

    pub fn points(&self) -> &[Scalar] {
        &self.points
    }

    pub fn tags(&self) -> &[Scalar] {
        &self.tags
    }

    pub fn mesh(&self) -> Scalar {
        self.points.windows(2).map(|w| &w[1] - &w[0]).fold(Scalar::zero(), Scalar::max)
    }
}

/// `Σ_r f(ξ_r) (g(x_r) − g(x_{r−1}))`. Only algebraic functions qualify.
pub fn stieltjes_sum(f: &KFunction, g: &KFunction, part: &Partition) -> Result<Scalar> {
    let mut acc = Accumulator::new();
    let mut g_prev = g.eval_at_point(&part.points[0])?;
    for (x, tag) in part.points[1..].iter().zip(&part.tags) {
        let g_x = g.eval_at_point(x)?;
        acc.push(&(f.eval_at_point(tag)? * (&g_x - &g_prev)));
        g_prev = g_x;
    }
    Ok(acc.total())
}

#[derive(Clone, Debug, Serialize)]
pub struct CorrespondenceReport {
    pub depth: usize,
    /// `φ_depth(f, g)` on the binary interval IFS (or the pulled-back pair).
    pub phi: Scalar,
    /// Twice the midpoint Stieltjes sum on the dyadic partition with
    /// `2^depth` cells.
    pub stieltjes: Scalar,
    pub difference: Scalar,
    pub within_tol: bool,
}

fn require_algebraic(f: &KFunction) -> Result<()> {
    if f.is_algebraic() {
        Ok(())
    } else {
        Err(Error::NotPointwise(f.to_string()))
    }
}

fn dyadic_twice_sum(f: &KFunction, g: &KFunction, depth: usize) -> Result<Scalar> {
    let part = Partition::uniform(&Scalar::float(0.0), &Scalar::float(1.0), 1 << depth, Tag::Midpoint)?;
    Ok(Scalar::float(2.0) * stieltjes_sum(&f.to_float(), &g.to_float(), &part)?)
}

/// Compare `φ_depth(f, g)` on `[0,1]` split by `{x/2, x/2 + 1/2}` with twice
/// the Stieltjes sum on the same dyadic cells. Runs in float mode.
pub fn interval_correspondence_check(f: &KFunction, g: &KFunction, depth: usize, tol: f64) -> Result<CorrespondenceReport> {
    require_algebraic(f)?;
    require_algebraic(g)?;
    let ifs = Ifs::binary_interval().to_float();
    let phi = phi_n(&ifs, &f.to_float(), &g.to_float(), depth)?;
    report(depth, phi, dyadic_twice_sum(f, g, depth)?, tol)
}

/// Same comparison for `φ(f∘c, g∘c)` on the middle-third Cantor set, where
/// `c` is the Cantor function seen as the substitution onto `[0,1]`.
pub fn pullback_correspondence_check(f: &KFunction, g: &KFunction, depth: usize, tol: f64) -> Result<CorrespondenceReport> {
    require_algebraic(f)?;
    require_algebraic(g)?;
    let map = SubstitutionMap::new(Ifs::middle_third(), Ifs::binary_interval(), Permutation::identity(2), 1)?;
    let map = Arc::new(map.to_float());
    let fp = KFunction::pullback(map.clone(), f.to_float());
    let gp = KFunction::pullback(map.clone(), g.to_float());
    let phi = phi_n(map.source(), &fp, &gp, depth)?;
    report(depth, phi, dyadic_twice_sum(f, g, depth)?, tol)
}

fn report(depth: usize, phi: Scalar, stieltjes: Scalar, tol: f64) -> Result<CorrespondenceReport> {
    let difference = (&phi - &stieltjes).abs();
    let within_tol = difference.to_f64() < tol;
    Ok(CorrespondenceReport { depth, phi, stieltjes, difference, within_tol })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    #[test]
    fn partitions_validate() {
        assert!(Partition::new(vec![q(0, 1), q(1, 1)], vec![q(1, 2)]).is_ok());
        assert!(Partition::new(vec![q(0, 1), q(0, 1)], vec![q(0, 1)]).is_err());
        assert!(Partition::new(vec![q(0, 1), q(1, 1)], vec![q(2, 1)]).is_err());
        assert!(Partition::new(vec![q(0, 1), q(1, 1)], vec![]).is_err());
        let p = Partition::uniform(&q(0, 1), &q(1, 1), 4, Tag::Right).unwrap();
        assert_eq!(p.tags()[0], q(1, 4));
        assert_eq!(p.mesh(), q(1, 4));
    }

    #[test]
    fn basic_sums() {
        let p = Partition::new(vec![q(0, 1), q(1, 7), q(1, 2), q(1, 1)], vec![q(0, 1), q(1, 3), q(1, 1)]).unwrap();
        assert_eq!(stieltjes_sum(&KFunction::one(), &KFunction::x(), &p).unwrap(), q(1, 1));
        assert!(stieltjes_sum(&KFunction::x(), &KFunction::constant(q(3, 1)), &p).unwrap().is_zero());
        let c = KFunction::cantor(1, q(1, 2)).unwrap();
        assert!(matches!(stieltjes_sum(&c, &KFunction::x(), &p), Err(Error::NotPointwise(_))));
    }

    #[test]
    fn left_sums_converge_to_two_thirds() {
        let p = Partition::uniform(&q(0, 1), &q(1, 1), 4096, Tag::Left).unwrap();
        let v = stieltjes_sum(&KFunction::x(), &KFunction::x_pow(2), &p).unwrap();
        assert!((v.to_f64() - 2.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn first_order_error() {
        let f = KFunction::x();
        let g = KFunction::x_pow(2);
        let err = |cells: usize| {
            let p = Partition::uniform(&q(0, 1), &q(1, 1), cells, Tag::Left).unwrap();
            (stieltjes_sum(&f, &g, &p).unwrap() - q(2, 3)).abs()
        };
        let errs: Vec<Scalar> = (0..6).map(|i| err(16 << i)).collect();
        for w in errs.windows(2) {
            let ratio = (&w[1] / &w[0]).to_f64();
            assert!((0.3..=0.7).contains(&ratio), "{ratio}");
        }
    }

    #[test]
    fn midpoint_tags_are_exact_for_affine_f() {
        let ifs = Ifs::binary_interval();
        let f = KFunction::scale(q(3, 1), KFunction::x()) + KFunction::constant(q(-1, 2));
        let g = KFunction::x_pow(3);
        for n in 0..=6 {
            let part = Partition::uniform(&q(0, 1), &q(1, 1), 1 << n, Tag::Midpoint).unwrap();
            let s = stieltjes_sum(&f, &g, &part).unwrap();
            assert_eq!(phi_n(&ifs, &f, &g, n).unwrap(), Scalar::int(2) * s);
        }
    }

    #[test]
    fn correspondence() {
        let r = interval_correspondence_check(&KFunction::one(), &KFunction::x(), 6, 1e-12).unwrap();
        assert!(r.difference.is_zero() && r.within_tol);
        assert_eq!(r.phi.to_f64(), 2.0);
        let r = interval_correspondence_check(&KFunction::x(), &KFunction::x_pow(2), 12, 1e-3).unwrap();
        assert!((r.phi.to_f64() - 4.0 / 3.0).abs() < 1e-3);
        assert!(r.within_tol);
        let r = pullback_correspondence_check(&KFunction::x(), &KFunction::x(), 10, 1e-9).unwrap();
        assert!((r.phi.to_f64() - 1.0).abs() < 1e-12);
        assert!(r.within_tol);
        let c = KFunction::cantor(1, q(1, 2)).unwrap();
        assert!(interval_correspondence_check(&c, &KFunction::x(), 4, 1.0).is_err());
    }
}
