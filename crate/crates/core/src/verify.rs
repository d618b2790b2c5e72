//! Self-check suite: every identity and closed form the library relies on,
//! evaluated end to end. The rendered report is deterministic.

use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::identities::{moment_phi_n_oracle, moment_table, parts_defect, term_by_term_demo};
use crate::ifs::{Contraction, Ifs, Interval, PointAddress, Word};
use crate::integrator::{
    cross_difference, integrate, phi_n, psi_n, subdivision_defect, vanishing_bound, ConvergenceConfig, Status,
};
use crate::kfunc::{cantor_sup_distance, cantor_uniform_distance_bound, CantorParams, KFunction};
use crate::oracle::{interval_correspondence_check, pullback_correspondence_check};
use crate::scalar::Scalar;
use crate::substitution::{pullback_integral, Permutation, SignClass, SubstitutionMap, DEFAULT_CHECK_DEPTH};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub tag: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(out, "{} {:<24} {}", if c.passed { "PASS" } else { "FAIL" }, c.tag, c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let _ = writeln!(out, "{passed}/{} checks passed", self.checks.len());
        out
    }
}

fn q(n: i64, d: i64) -> Scalar {
    Scalar::ratio(n, d)
}

type Check = fn() -> Result<(bool, String)>;

const CHECKS: &[(&str, Check)] = &[
    ("geometry", geometry),
    ("trace-formula", trace_formula),
    ("gap-sums", gap_sums),
    ("trichotomy", trichotomy),
    ("moments", moments),
    ("step-function", step_function),
    ("parts", parts),
    ("substitution", substitution),
    ("term-by-term", term_by_term),
    ("vanishing", vanishing),
    ("subdivision", subdivision),
    ("interval-correspondence", correspondence),
    ("holder", holder),
];

/// Run every check. Errors inside a check count as failures.
pub fn run_all() -> VerifyReport {
    let checks = CHECKS
        .iter()
        .map(|(tag, check)| match check() {
            Ok((passed, detail)) => CheckOutcome { tag, passed, detail },
            Err(e) => CheckOutcome { tag, passed: false, detail: format!("error: {e}") },
        })
        .collect();
    VerifyReport { checks }
}

fn geometry() -> Result<(bool, String)> {
    let cs = Ifs::middle_third();
    let mut ok = cs.word_interval(&Word::new(vec![0, 1]))? == (q(2, 9), q(3, 9));
    ok &= cs.word_interval(&Word::new(vec![1, 0]))? == (q(6, 9), q(7, 9));
    ok &= cs.gap_intervals(&Word::new(vec![1]))? == vec![(q(7, 9), q(8, 9))];
    ok &= cs.address_to_point(&PointAddress::new(vec![0], 1))? == q(1, 3);
    let overlap = Ifs::new(Interval::unit(), vec![Contraction::new(q(1, 2), q(0, 1)), Contraction::new(q(1, 2), q(1, 4))]);
    ok &= overlap.is_err();
    let dim = cs.similarity_dimension(1e-12);
    ok &= dim.to_string() == "log_3(2) ≈ 0.630930";
    ok &= Ifs::binary_interval().similarity_dimension(1e-12).value == Scalar::one();
    Ok((ok, format!("intervals, gaps, coding map, dim = {dim}")))
}

fn trace_formula() -> Result<(bool, String)> {
    let mut ok = true;
    for k in 1..=2u32 {
        let ifs = Ifs::cantor(k);
        let kk = Scalar::int(k as i64 + 1);
        for (p, qq) in [(q(1, 3), q(1, 4)), (q(1, 2), q(3, 5))] {
            let cp = KFunction::cantor(k, p.clone())?;
            let cq = KFunction::cantor(k, qq.clone())?;
            for n in 0..=4 {
                ok &= phi_n(&ifs, &KFunction::one(), &cp, n)? == Scalar::int(2) * (&kk * &p).powi(n as i32);
                ok &= phi_n(&ifs, &cp, &cq, n)? == (&kk * &qq).powi(n as i32);
            }
        }
    }
    Ok((ok, "φ_n(1,c_{k,p}) = 2((k+1)p)^n and φ_n(c_{k,p},c_{k,q}) = ((k+1)q)^n, k ≤ 2, n ≤ 4".into()))
}

fn gap_sums() -> Result<(bool, String)> {
    let mut ok = true;
    for k in 1..=2u32 {
        let ifs = Ifs::cantor(k);
        let kq = Scalar::int(k as i64);
        for (p, qq) in [(q(1, 3), q(1, 4)), (q(2, 3), q(2, 5))] {
            let cp = KFunction::cantor(k, p)?;
            let cq = KFunction::cantor(k, qq.clone())?;
            for n in 0..=3 {
                let expected = ((Scalar::one() - &qq) / &kq - &qq)
                    * qq.powi(n as i32)
                    * &kq
                    * Scalar::int(k as i64 + 1).powi(n as i32);
                ok &= psi_n(&ifs, &cp, &cq, n + 1)? == expected;
            }
        }
    }
    Ok((ok, "ψ_{n+1}(c_{k,p},c_{k,q}) = ((1−q)/k − q) q^n k(k+1)^n, k ≤ 2, n ≤ 3".into()))
}

fn trichotomy() -> Result<(bool, String)> {
    let mut ok = true;
    let mut seen = Vec::new();
    let cases = [(1u32, q(1, 3)), (1, q(1, 2)), (1, q(3, 4)), (2, q(1, 5)), (2, q(1, 3)), (2, q(1, 2))];
    let expected = [Some(q(0, 1)), Some(q(2, 1)), None, Some(q(0, 1)), Some(q(2, 1)), None];
    for ((k, p), want) in cases.iter().zip(&expected) {
        let ifs = Ifs::cantor(*k);
        let cfg = ConvergenceConfig::for_ifs(&ifs);
        let r = integrate(&ifs, &KFunction::one(), &KFunction::cantor(*k, p.clone())?, &cfg)?;
        ok &= match want {
            Some(v) => r.status == Status::Converged && r.estimate.as_ref() == Some(v),
            None => r.status == Status::Diverged,
        };
        seen.push(match r.estimate {
            Some(e) => e.to_string(),
            None => r.status.to_string(),
        });
        // (c_{k,p}, c_{k,q}) with q below, at and above 1/(k+1)
        let kk = k + 1;
        for (qq, want) in [(q(1, 2 * kk as i64), Some(q(0, 1))), (q(1, kk as i64), Some(q(1, 1))), (q(3, 4), None)] {
            let r = integrate(&ifs, &KFunction::cantor(*k, p.clone())?, &KFunction::cantor(*k, qq)?, &cfg)?;
            ok &= match want {
                Some(v) => r.estimate == Some(v),
                None => r.status == Status::Diverged,
            };
        }
    }
    Ok((ok, format!("φ(1,c_{{k,p}}) = {}", seen.join(", "))))
}

fn moments() -> Result<(bool, String)> {
    let table = moment_table(6)?;
    let literal = [q(2, 1), q(1, 1), q(3, 4), q(5, 8), q(87, 160), q(31, 64), q(10215, 23296)];
    let mut ok = table.values == literal;
    let cs = Ifs::middle_third();
    let c = KFunction::cantor(1, q(1, 2))?;
    for m in 0..=4 {
        for n in 0..=6 {
            ok &= moment_phi_n_oracle(m, n)? == phi_n(&cs, &KFunction::x_pow(m), &c, n)?;
        }
    }
    let gap = (moment_phi_n_oracle(6, 12)? - &table.values[6]).abs();
    ok &= gap.to_f64() < 1e-4;
    Ok((ok, format!("φ(x^m,c), m ≤ 6: last = {}; oracle agrees for m ≤ 4, n ≤ 6", table.values[6])))
}

fn step_function() -> Result<(bool, String)> {
    let cs = Ifs::middle_third();
    let h = KFunction::step(q(1, 3));
    let mut ok = true;
    for n in 1..=10 {
        ok &= phi_n(&cs, &h, &h, n)? == Scalar::one();
    }
    let r = integrate(&cs, &h, &h, &ConvergenceConfig::for_ifs(&cs))?;
    ok &= r.estimate == Some(Scalar::one());
    Ok((ok, format!("φ_n(h,h) = 1 for n ≤ 10, estimate {}", r.estimate.map(|e| e.to_string()).unwrap_or_default())))
}

fn parts() -> Result<(bool, String)> {
    let cs = Ifs::middle_third();
    let mut rng = ChaCha8Rng::seed_from_u64(61);
    let mut ok = true;
    for _ in 0..20 {
        let mut coeff = || q(rng.gen_range(-9..10), rng.gen_range(1..9));
        let f = KFunction::digit_weighted(q(1, 3), vec![coeff(), coeff()]);
        let g = KFunction::digit_weighted(q(1, 2), vec![coeff(), coeff()]) + KFunction::x_pow(2);
        for n in 0..=4 {
            ok &= parts_defect(&cs, &f, &g, n)?.is_zero();
        }
    }
    let c = KFunction::cantor(1, q(1, 2))?;
    let r = integrate(&cs, &KFunction::x(), &(KFunction::x() * c), &ConvergenceConfig::for_ifs(&cs))?;
    let est = r.estimate.unwrap_or_else(Scalar::zero);
    ok &= (est.to_f64() - 0.75).abs() < 1e-9;
    Ok((ok, format!("defect 0 on 20 random pairs, φ(x, x·c) ≈ {}", est.decimal(10))))
}

fn substitution() -> Result<(bool, String)> {
    let mut ok = true;
    let mut values = Vec::new();
    let thirds = Ifs::new(Interval::unit(), vec![Contraction::new(q(1, 3), q(0, 1)), Contraction::new(q(2, 3), q(1, 3))])?;
    let one = KFunction::one();
    let cases = [
        (Ifs::middle_third(), Ifs::binary_interval(), "0,1", KFunction::x(), q(2, 1)),
        (Ifs::binary_interval(), thirds.clone(), "0,1", KFunction::x(), q(2, 1)),
        (Ifs::binary_interval(), thirds, "1,0", KFunction::x(), q(-2, 1)),
        (Ifs::cantor(2), Ifs::cantor(2), "0,2,1", KFunction::cantor(2, q(1, 3))?, q(1, 1)),
        (Ifs::cantor(2), Ifs::cantor(2), "0,2,1", KFunction::digit_weighted(q(1, 3), vec![q(0, 1), q(-1, 1), q(2, 1)]), q(-1, 1)),
    ];
    let mut ratios = Vec::new();
    for (src, tgt, rho, g, want) in cases {
        let map = Arc::new(SubstitutionMap::new(src.clone(), tgt, Permutation::parse(rho)?, DEFAULT_CHECK_DEPTH)?);
        let cfg = ConvergenceConfig::for_ifs(&src).with_max_depth(10);
        let r = pullback_integral(&map, &one, &g, &cfg)?;
        ok &= map.is_well_defined();
        ok &= r.source.estimate.as_ref() == Some(&want);
        ok &= match map.sign_class() {
            SignClass::Other => r.level_identity.is_none(),
            _ => r.level_identity == Some(true),
        };
        if map.sign_class() == SignClass::Other {
            ratios.push(want.clone() / r.target.estimate.clone().unwrap_or_else(Scalar::one));
        }
        values.push(want.to_string());
    }
    ok &= ratios.len() == 2 && ratios[0] != ratios[1];
    let ratio_text: Vec<String> = ratios.iter().map(Scalar::to_string).collect();
    Ok((ok, format!("values {}; ratios {} differ", values.join(", "), ratio_text.join(" vs "))))
}

fn term_by_term() -> Result<(bool, String)> {
    let rep = term_by_term_demo(5, 8)?;
    let ok = rep.rows.iter().all(|r| r.psi_closed_form_holds && r.estimate == Some(Scalar::zero()))
        && rep.limit_estimate == Some(q(2, 1))
        && rep.mismatch
        && rep.non_uniform
        && rep.constant_family_agrees;
    Ok((ok, "ψ_{n+1}(1,c_{1,q}) = 2(1−2q)(2q)^n; φ(1,c_{1,m/(2m+1)}) = 0 but φ(1,c_{1,1/2}) = 2".into()))
}

fn vanishing() -> Result<(bool, String)> {
    let cs = Ifs::middle_third();
    let params = CantorParams::new(1, q(1, 3))?;
    let hg = params.holder_data();
    let g = KFunction::Cantor(params);
    let mut ok = true;
    for n in 0..=10 {
        let b = vanishing_bound(&cs, &Scalar::one(), &hg, n);
        ok &= phi_n(&cs, &KFunction::one(), &g, n)?.abs() <= b;
        ok &= vanishing_bound(&cs, &Scalar::one(), &hg, n + 1) / b == q(2, 3);
    }
    Ok((ok, "|φ_n(1,c_{1,1/3})| ≤ bound, bound ratio 2/3, n ≤ 10".into()))
}

fn subdivision() -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(1000);
    let mut ok = true;
    for _ in 0..1000 {
        let mut r = || q(rng.gen_range(-50..50), rng.gen_range(1..30));
        let f = [r(), r(), r()];
        let g = [r(), r(), r()];
        let fr = [&f[0], &f[1], &f[2]];
        let gr = [&g[0], &g[1], &g[2]];
        ok &= subdivision_defect(fr, gr) == cross_difference(fr, gr);
    }
    Ok((ok, "Tr_A + Tr_B − Tr_I = Δ_A f Δ_B g − Δ_B f Δ_A g on 1000 random triples".into()))
}

fn correspondence() -> Result<(bool, String)> {
    let r = interval_correspondence_check(&KFunction::x(), &KFunction::x_pow(2), 14, 1e-3)?;
    let mut ok = r.within_tol && (r.phi.to_f64() - 4.0 / 3.0).abs() < 1e-3;
    let exact = interval_correspondence_check(&KFunction::one(), &KFunction::x(), 10, 1e-12)?;
    ok &= exact.difference.is_zero();
    let comp = pullback_correspondence_check(&KFunction::x(), &KFunction::x(), 10, 1e-9)?;
    ok &= comp.within_tol && (comp.phi.to_f64() - 1.0).abs() < 1e-12;
    Ok((ok, format!("φ_14(x,x²) = {} on [0,1]; φ(c,c) = {} on the Cantor set", r.phi, comp.phi)))
}

fn holder() -> Result<(bool, String)> {
    let mut ok = true;
    for (k, p) in [(1u32, q(1, 2)), (2, q(1, 3))] {
        let params = CantorParams::new(k, p.clone())?;
        let ifs = params.host();
        let f = KFunction::Cantor(params.clone());
        let alpha = params.holder_exponent().value().to_f64();
        let mut pts = Vec::new();
        for w in ifs.enumerate_words(4)? {
            for a in [PointAddress::left(&w), PointAddress::right(&w, ifs.n_maps())] {
                pts.push((ifs.address_to_point(&a)?.to_f64(), f.eval(&ifs, &a)?.to_f64()));
            }
        }
        for (i, (x, fx)) in pts.iter().enumerate() {
            for (y, fy) in &pts[i + 1..] {
                ok &= (fx - fy).abs() <= (x - y).abs().powf(alpha) / p.to_f64() * (1.0 + 1e-12) + 1e-15;
            }
        }
    }
    let (p, p0, eps0) = (q(9, 20), q(1, 2), q(1, 10));
    let bound = cantor_uniform_distance_bound(1, &p, &p0, &eps0)?;
    let sup = cantor_sup_distance(1, &p, &p0, 8)?;
    ok &= sup <= bound;
    Ok((ok, format!("Hölder constant 1/p on endpoints; sup|c_p − c_p0| ≈ {} ≤ {}", sup.decimal(6), bound)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_passes_and_renders_stably() {
        let a = run_all();
        for c in &a.checks {
            assert!(c.passed, "{}: {}", c.tag, c.detail);
        }
        let text = a.render();
        assert!(text.ends_with("13/13 checks passed\n"));
        assert_eq!(text.lines().count(), 14);
    }
}
