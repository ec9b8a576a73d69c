//! The full battery of exact identities and property checks, rendered as a
//! deterministic plain-text report.
//!
//! The report contains no timings or thread counts, so two runs with the same
//! configuration produce identical bytes.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::characters::{self, character_group};
use crate::circle;
use crate::config::{ExperimentConfig, Lab};
use crate::cuspform;
use crate::diophantine::{self, classify_arc, dirichlet_approx, ArcKind};
use crate::error::Result;
use crate::expsums::{self, coefficient_sum, linear_sum};
use crate::hecke::{self, close, le_with_slack};
use crate::sieve;
use crate::vaughan::{self, VaughanParams};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub header: Vec<String>,
    pub checks: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.header {
            let _ = writeln!(out, "{h}");
        }
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "[{tag}] {:<28} {}", c.name, c.detail);
        }
        let passed = self.checks.iter().filter(|c| c.passed).count();
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "summary: {passed}/{} checks passed: {verdict}", self.checks.len());
        out
    }
}

struct Suite {
    checks: Vec<CheckLine>,
}

impl Suite {
    fn push(&mut self, name: &str, passed: bool, detail: String) {
        self.checks.push(CheckLine { name: name.to_string(), passed, detail });
    }

    /// Records a check whose evaluation may itself fail.
    fn run(&mut self, name: &str, f: impl FnOnce() -> Result<(bool, String)>) {
        match f() {
            Ok((passed, detail)) => self.push(name, passed, detail),
            Err(e) => self.push(name, false, format!("error: {e}")),
        }
    }
}

fn trial_factor(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += 1;
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

fn rel_diff(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

/// Runs every check for the configured form and limit.
pub fn verify_all(config: &ExperimentConfig, lab: &Lab) -> VerifyReport {
    let x = config.limit.min(lab.lambda.limit()).min(lab.sieve.limit());
    let seed = config.seed;
    let (lambda, star, sv) = (&lab.lambda, &lab.star, &lab.sieve);
    let mut s = Suite { checks: Vec::new() };

    // arithmetic tables
    s.run("sieve.convolutions", || {
        let mut bad = None;
        for n in 1..=x {
            let divs = sv.divisors(n);
            let mu: i64 = divs.iter().map(|&d| sv.mobius(d) as i64).sum();
            let phi: u64 = divs.iter().map(|&d| sv.totient(d) as u64).sum();
            let d3: u64 = divs.iter().map(|&d| sv.num_divisors(n / d) as u64).sum();
            let ok = mu == (n == 1) as i64
                && phi == n
                && d3 == sv.num_divisors3(n) as u64
                && divs.len() as u32 == sv.num_divisors(n);
            if !ok {
                bad = Some(n);
                break;
            }
        }
        Ok((bad.is_none(), format!("n<={x} first_failure={bad:?}")))
    });
    s.run("sieve.trial_division", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0001);
        let mut ok = true;
        for _ in 0..500 {
            let n = rng.gen_range(2..=x);
            let f = trial_factor(n);
            let squarefree = f.iter().all(|&(_, e)| e == 1);
            let mu = if squarefree { if f.len() % 2 == 0 { 1 } else { -1 } } else { 0 };
            ok &= sv.smallest_prime_factor(n) == f[0].0
                && sv.mobius(n) == mu
                && sv.omega(n) as usize == f.len()
                && sv.num_divisors(n) == f.iter().map(|&(_, e)| e + 1).product::<u32>()
                && sv.is_prime(n) == (f.len() == 1 && f[0].1 == 1);
        }
        Ok((ok, "500 random n".into()))
    });
    s.run("sieve.divisor_moments", || {
        let xm = x.min(100_000);
        let mut parts = Vec::new();
        let mut ok = true;
        for a in 1..=3 {
            let m = sieve::divisor_moment(sv, a, xm)?;
            ok &= m.constant.is_finite() && m.constant >= m.ratio_at_x;
            parts.push(format!("C_{a}={:.6}", m.constant));
        }
        Ok((ok, format!("X={xm} {}", parts.join(" "))))
    });

    // coefficients
    s.run("form.delta_oracle", || {
        let n = x.min(2000);
        let a = cuspform::delta_series(n)?;
        let b = cuspform::delta_from_eisenstein(n)?;
        let first: Vec<i64> = (1..=6.min(n)).map(|k| cuspform::coefficient_sign(&a, k) as i64).collect();
        Ok((a == b, format!("n<={n} signs(1..6)={first:?}")))
    });
    if let Some(series) = &lab.series {
        s.run("form.hecke_integral", || {
            let bound = isqrt(series.limit()).min(100);
            let r = cuspform::verify_hecke_integral(series, bound)?;
            Ok((r.passed(), format!("weight={} m,n<={bound} pairs={}", series.weight(), r.pairs_checked)))
        });
        s.run("form.deligne_exact", || {
            let v = cuspform::deligne_violation(series, sv.primes_up_to(x));
            Ok((v.is_none(), format!("primes<={x} violation={v:?}")))
        });
        s.run("form.sign_changes", || {
            let signs: Vec<f64> = sv.primes_up_to(x.min(100)).iter().map(|&p| lambda.get(p as u64)).collect();
            let ok = signs.iter().any(|&v| v > 0.0) && signs.iter().any(|&v| v < 0.0);
            Ok((ok, format!("primes<={}", x.min(100))))
        });
    }
    s.run("form.prime_bound", || {
        let bad = sv.primes_up_to(x).iter().map(|&p| p as u64).find(|&p| !le_with_slack(lambda.get(p).abs(), 2.0));
        Ok((bad.is_none(), format!("|lambda(p)|<=2 for p<={x} violation={bad:?}")))
    });
    s.run("form.divisor_bound", || {
        let bad = (1..=x).find(|&n| !le_with_slack(lambda.get(n).abs(), sv.num_divisors(n) as f64));
        Ok((bad.is_none(), format!("|lambda(n)|<=d(n) for n<={x} violation={bad:?}")))
    });

    // Hecke layer
    s.run("hecke.relations", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0002);
        let mut worst: f64 = 0.0;
        for _ in 0..10_000 {
            let (m, n) = hecke::sample_pair(&mut rng, x);
            let lhs = lambda.get(m) * lambda.get(n);
            let product = hecke::hecke_product(lambda, sv, m, n)?;
            let dual = hecke::dual_formula(lambda, sv, m, n)?;
            let scale = 1.0 + lhs.abs();
            worst = worst.max((lhs - product).abs() / scale).max((lambda.get(m * n) - dual).abs() / (1.0 + dual.abs()));
        }
        Ok((worst <= 1e-9, format!("10000 pairs max_rel_err={worst:.3e}")))
    });
    s.run("hecke.lambda_star", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0003);
        let mut ok = true;
        for _ in 0..300 {
            let n = rng.gen_range(1..=x);
            let direct: f64 = sv.divisors(n).iter().map(|&d| lambda.get(d).powi(2)).sum::<f64>().sqrt();
            ok &= close(direct, star.get(n), 1e-12);
        }
        Ok((ok, "300 random n against divisor sums".into()))
    });
    s.run("hecke.star_inequalities", || {
        let r = hecke::check_star_inequalities(lambda, star, sv, 10_000, seed ^ 0x5eed_0004);
        let v: Vec<String> = r.tallies().iter().map(|(k, t)| format!("{k}:{}/{}", t.violations, t.checked)).collect();
        Ok((r.passed(), format!("violations {}", v.join(" "))))
    });
    s.run("hecke.power_identities", || {
        let r = hecke::prime_power_identities(lambda, sv);
        Ok((r.passed, format!("checks={} max_err={:.3e}", r.checks, r.max_abs_error)))
    });
    s.run("hecke.minorant", || {
        let r = hecke::minorant_check(3.0, 1e-4)?;
        let p = hecke::prime_sums(lambda, sv, x)?;
        Ok((
            r.passed() && p.minorant_below_abs(),
            format!("max_excess={:.6e} minorant_sum={:.6} abs_sum={:.6}", r.max_excess, p.minorant_sum, p.abs),
        ))
    });

    // exponential sums
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0005);
    let dyadic: Vec<f64> = (0..4).map(|_| rng.gen_range(1u64..1 << 32) as f64 / (1u64 << 32) as f64).collect();
    s.run("expsums.periodicity", || {
        let mut ok = true;
        for &a in &dyadic {
            let base = linear_sum(lambda, x, a)?.value();
            ok &= linear_sum(lambda, x, a + 1.0)?.value() == base;
            ok &= linear_sum(lambda, x, a - 3.0)?.value() == base;
            let conj = linear_sum(lambda, x, -a)?.value();
            ok &= rel_diff(conj, base.conj()) <= 1e-12;
        }
        Ok((ok, format!("{} dyadic alpha", dyadic.len())))
    });
    s.run("expsums.split_exact", || {
        let mut ok = true;
        let coeff = |n: u64| sv.mobius(n) as f64 * lambda.get(n);
        for &a in &dyadic {
            let whole = coefficient_sum(0, x, a, coeff);
            let k = rng_split(seed, a, x);
            let mut parts = coefficient_sum(0, k, a, coeff);
            parts.merge(&coefficient_sum(k, x, a, coeff));
            ok &= whole.sum.value() == parts.sum.value() && whole.terms == parts.terms;
        }
        Ok((ok, "merged ranges equal the whole bit for bit".into()))
    });
    s.run("expsums.triangle", || {
        let r = expsums::moebius_sum(lambda, sv, x, config.alpha.value())?;
        Ok((r.triangle_ok(), format!("alpha={} |S|={:.6} abs_sum={:.6}", config.alpha, r.abs(), r.abs_sum)))
    });
    s.run("expsums.twisted_dual", || {
        let mut worst: f64 = 0.0;
        for big_n in [6u64, 12, 30] {
            if big_n > x {
                continue;
            }
            let xn = x / big_n;
            let a = dyadic[0];
            let direct = expsums::twisted_linear_sum(lambda, star, sv, big_n, xn, a)?.result.value();
            worst = worst.max(rel_diff(direct, expsums::twisted_via_dual(lambda, sv, big_n, xn, a)?));
        }
        Ok((worst <= 1e-8, format!("N in {{6,12,30}} max_rel_err={worst:.3e}")))
    });
    s.run("expsums.square_expansion", || {
        let mut ok = true;
        let mut checks = 0;
        for a in [1u64, 2, 6, 30] {
            let t = isqrt(x / a).min(50) as f64;
            for &al in &dyadic {
                let c = expsums::verify_square_expansion(lambda, sv, t, a, al)?;
                ok &= c.passed;
                checks += 1;
            }
        }
        Ok((ok, format!("A in {{1,2,6,30}} checks={checks}")))
    });
    s.run("expsums.square_classes", || {
        let t = isqrt(x).min(50) as f64;
        let mut ok = true;
        for &al in &dyadic {
            ok &= expsums::verify_square_inversion(lambda, sv, t, al)?.passed;
        }
        Ok((ok, format!("T={t}")))
    });
    s.run("expsums.parseval", || {
        let n = x.min(512);
        let c: Vec<f64> = (1..=n).map(|k| sv.mobius(k) as f64 * lambda.get(k)).collect();
        let r = expsums::parseval_check(&c, 2 * n)?;
        Ok((r.passed, format!("X={n} R={} rel_err={:.3e}", 2 * n, r.rel_err)))
    });

    // approximation
    s.run("diophantine.dirichlet", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0006);
        let mut ok = true;
        for _ in 0..200 {
            let a: f64 = rng.gen();
            let q_bound = rng.gen_range(2.0..1e6);
            let r = dirichlet_approx(a, q_bound)?;
            ok &= r.q >= 1 && (r.q as f64) <= q_bound && r.err <= 1.0 / (r.q as f64 * q_bound) * (1.0 + 1e-12);
        }
        Ok((ok, "200 random (alpha, Q)".into()))
    });
    s.run("diophantine.arcs", || {
        let big_x = 1e6;
        let golden = classify_arc((5f64.sqrt() - 1.0) / 2.0, big_x, config.c1)?;
        let half = classify_arc(0.5, big_x, config.c1)?;
        let ok = golden.kind == ArcKind::Minor && half.kind == ArcKind::Major && half.approx.q == 2;
        Ok((ok, format!("golden:{:?} q={} half:{:?} q={}", golden.kind, golden.approx.q, half.kind, half.approx.q)))
    });
    s.run("diophantine.min_norm", || {
        let r = diophantine::min_norm_survey(100, 10, 1000, 1000, 1000, seed ^ 0x5eed_0007)?;
        Ok((r.max_ratio <= 10.0, format!("median_ratio={:.4} max_ratio={:.4}", r.median_ratio, r.max_ratio)))
    });

    // combinatorial decomposition
    s.run("vaughan.identity", || {
        let top = x.min(10_000);
        let mut checks = 0;
        for (y, z) in [(2.0, 2.0), (10.0, 10.0), (31.0, 17.0)] {
            let p = VaughanParams::new(y, z)?;
            for m in (y as u64 + 1)..=top {
                if !vaughan::vaughan_identity_check(sv, m, p)?.passed {
                    return Ok((false, format!("fails at m={m} y={y} z={z}")));
                }
                checks += 1;
            }
        }
        Ok((true, format!("m<={top} checks={checks}")))
    });
    s.run("vaughan.decomposition", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0008);
        let mut worst: f64 = 0.0;
        let mut ok = true;
        for _ in 0..5 {
            let xi = rng.gen_range(2..=x);
            let d = vaughan::decompose(lambda, sv, xi, rng.gen(), config.vaughan_params()?)?;
            ok &= d.passed;
            worst = worst.max(d.residual / d.tolerance);
        }
        Ok((ok, format!("5 random configurations worst residual/tol={worst:.3e}")))
    });
    s.run("vaughan.type2_blocks", || {
        let r = vaughan::type2_blocks(lambda, sv, x, config.alpha.value(), config.vaughan_params()?, 0)?;
        Ok((
            r.blocks_match && r.cauchy_schwarz_holds,
            format!("blocks={} binding={}", r.blocks.len(), r.constraint_binds),
        ))
    });

    // characters
    s.run("characters.orthogonality", || {
        let mut worst: f64 = 0.0;
        for q in 1..=30u64 {
            let group = character_group(q)?;
            let phi = group.len() as f64;
            for m in 0..q {
                for n in 0..q {
                    let sum: Complex64 = group.iter().map(|c| c.value(m) * c.value(n).conj()).sum();
                    let coprime = num_integer::gcd(m * n, q) == 1 || q == 1;
                    let expect = if m == n && coprime { 1.0 } else { 0.0 };
                    worst = worst.max((sum / phi - expect).norm());
                }
            }
        }
        Ok((worst <= 1e-10, format!("q<=30 max_err={worst:.3e}")))
    });
    s.run("characters.induced", || {
        let mut ok = true;
        for q in 1..=60u64 {
            for chi in character_group(q)? {
                let star = chi.primitive();
                ok &= star.is_primitive() && q % star.modulus() == 0;
                for n in (1..=q).filter(|&n| num_integer::gcd(n, q) == 1) {
                    ok &= (chi.value(n) - star.value(n)).norm() <= 1e-12;
                }
            }
        }
        Ok((ok, "q<=60".into()))
    });
    s.run("characters.residues", || {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0009);
        let mut ok = true;
        let mut worst: f64 = 0.0;
        for q in [1u64, 4, 5, 6, 12] {
            let a = rng.gen_range(0..q as i64);
            let r = characters::residue_decomposition_check(lambda, sv, x, a, q)?;
            ok &= r.passed;
            worst = worst.max(r.max_diff);
        }
        Ok((ok, format!("q in {{1,4,5,6,12}} max_diff={worst:.3e}")))
    });
    s.run("characters.local_factor", || {
        let c = characters::local_factor_certificate(1e-3)?;
        let ok = c.certified_min >= 0.01 && c.odd_prime_margin_exceeds_eighth;
        Ok((ok, format!("certified_min={:.5} odd_prime_margin={:.5}", c.certified_min, c.odd_prime_margin)))
    });

    // additive problems
    s.run("circle.enumeration", || {
        let n_max = x.min(300);
        let reports = circle::ternary_weighted(lambda, sv, n_max)?;
        let mut ok = reports.get(8).is_some_and(|r| r.r3 == 4) || n_max < 9;
        for r in &reports {
            let (mut r3, mut w) = (0u64, 0.0f64);
            for p1 in sv.primes_up_to(r.n).iter().map(|&p| p as u64) {
                for p2 in sv.primes_up_to(r.n).iter().map(|&p| p as u64) {
                    if p1 + p2 < r.n && sv.is_prime(r.n - p1 - p2) {
                        r3 += 1;
                        w += lambda.get(p1);
                    }
                }
            }
            ok &= r.r3 == r3 && (r.weighted - w).abs() <= 1e-9 * (1.0 + w.abs());
            ok &= r.even == (r.n % 2 == 0) && r.deligne_ok;
        }
        Ok((ok, format!("N<={n_max}")))
    });

    VerifyReport {
        header: vec![
            format!("ortholab verify-all {}", env!("CARGO_PKG_VERSION")),
            format!("form={} limit={} seed={} alpha={} c1={}", config.form, x, seed, config.alpha, config.c1),
        ],
        checks: s.checks,
    }
}

fn rng_split(seed: u64, alpha: f64, x: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ alpha.to_bits());
    rng.gen_range(0..=x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::FormSelector;

    #[test]
    fn small_suite_passes_and_is_repeatable() {
        let config = ExperimentConfig { limit: 1200, seed: 3, ..Default::default() };
        let lab = Lab::load(&config.form, config.limit, None).unwrap();
        let a = verify_all(&config, &lab);
        assert!(a.passed(), "{}", a.render());
        assert_eq!(a.render(), verify_all(&config, &lab).render());

        let config = ExperimentConfig { form: FormSelector::Synthetic { seed: 5 }, limit: 800, ..Default::default() };
        let lab = Lab::load(&config.form, config.limit, None).unwrap();
        let r = verify_all(&config, &lab);
        assert!(r.passed(), "{}", r.render());
        assert!(!r.render().contains("form.hecke_integral"));
    }
}
