//! Acceptance battery. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ortholab_core::characters;
use ortholab_core::circle;
use ortholab_core::config::{ExperimentConfig, FormSelector, Lab};
use ortholab_core::cuspform::{self, normalize, CuspFormSeries};
use ortholab_core::diophantine;
use ortholab_core::expsums::{self, Variant};
use ortholab_core::hecke::{self, lambda_star, HeckeFn};
use ortholab_core::sieve::{build_sieves, SieveTables};
use ortholab_core::vaughan::{self, VaughanParams};
use ortholab_core::verify::verify_all;

const X: u64 = 100_000;

struct Shared {
    /// μ(n) by trial division
    mu: Vec<i64>,
    sieve: SieveTables,
    delta: CuspFormSeries,
    w16: CuspFormSeries,
    l_delta: HeckeFn,
    l_w16: HeckeFn,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn divisors(n: u64) -> Vec<u64> {
    (1..=n).filter(|d| n % d == 0).collect()
}

fn mobius(mut n: u64) -> i64 {
    let mut mu = 1;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            n /= p;
            if n % p == 0 {
                return 0;
            }
            mu = -mu;
        }
        p += 1;
    }
    if n > 1 {
        -mu
    } else {
        mu
    }
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn sigma(k: u32, n: u64) -> BigInt {
    divisors(n).into_iter().map(|d| BigInt::from(d).pow(k)).sum()
}

fn mul(a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::from(0); a.len()];
    for (i, x) in a.iter().enumerate() {
        if *x == BigInt::from(0) {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(a.len() - i) {
            out[i + j] += x * y;
        }
    }
    out
}

/// `(E₄³ − E₆²)/1728` from divisor sums, by schoolbook multiplication.
fn tau_oracle(limit: usize) -> Vec<BigInt> {
    let e4: Vec<BigInt> = (0..=limit)
        .map(|n| if n == 0 { BigInt::from(1) } else { sigma(3, n as u64) * 240 })
        .collect();
    let e6: Vec<BigInt> = (0..=limit)
        .map(|n| if n == 0 { BigInt::from(1) } else { sigma(5, n as u64) * -504 })
        .collect();
    let e4_3 = mul(&mul(&e4, &e4), &e4);
    let e6_2 = mul(&e6, &e6);
    e4_3.iter().zip(&e6_2).map(|(a, b)| (a - b) / 1728).collect()
}

/// Relative difference on the scale `1 + max(|a|, |b|)`, so that sums
/// which cancel to nearly zero are not judged on their rounding noise.
fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

fn crel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / (1.0 + a.norm().max(b.norm()))
}

type Verdict = (bool, String);

fn c1_tau(s: &Shared) -> Verdict {
    let start = Instant::now();
    let series = cuspform::delta_series(2000).unwrap();
    let oracle = tau_oracle(2000);
    let agree = (1..=2000u64).all(|n| *series.coeff(n) == oracle[n as usize]);
    let first: Vec<BigInt> = (1..=6).map(|n| series.coeff(n).clone()).collect();
    let expected: Vec<BigInt> = [1, -24, 252, -1472, 4830, -6048].iter().map(|&v| BigInt::from(v)).collect();
    let also_big = (1..=2000u64).all(|n| s.delta.coeff(n) == series.coeff(n));
    let secs = start.elapsed().as_secs_f64();
    (
        agree && first == expected && also_big && secs < 10.0,
        format!("n<=2000 agree={agree} tau(1..6) ok={} runtime={secs:.2}s", first == expected),
    )
}

fn c2_hecke(s: &Shared) -> Verdict {
    let mut ok = true;
    for form in [&s.delta, &s.w16] {
        ok &= cuspform::verify_hecke_integral(form, 100).unwrap().passed();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for l in [&s.l_delta, &s.l_w16] {
        for _ in 0..10_000 {
            let (m, n) = hecke::sample_pair(&mut rng, X);
            let g = gcd(m, n);
            let product: f64 = divisors(g).iter().map(|&d| l.get(m * n / (d * d))).sum();
            let dual: f64 = divisors(g).iter().map(|&d| s.mu[d as usize] as f64 * l.get(m / d) * l.get(n / d)).sum();
            let lhs = l.get(m) * l.get(n);
            worst = worst.max(rel(lhs, product)).max(rel(l.get(m * n), dual));
            worst = worst.max(rel(product, hecke::hecke_product(l, &s.sieve, m, n).unwrap()));
            worst = worst.max(rel(dual, hecke::dual_formula(l, &s.sieve, m, n).unwrap()));
        }
    }
    (ok && worst <= 1e-9, format!("integral m,n<=100 ok={ok} normalized max_rel={worst:.2e}"))
}

fn c3_deligne(s: &Shared) -> Verdict {
    let primes: Vec<u64> = (2..=X).filter(|&p| is_prime(p)).collect();
    let mut ok = true;
    for (form, l) in [(&s.delta, &s.l_delta), (&s.w16, &s.l_w16)] {
        for &p in &primes {
            let a = form.coeff(p);
            ok &= a * a <= BigInt::from(4) * BigInt::from(p).pow(form.weight() - 1);
            ok &= l.get(p).abs() <= 2.0;
        }
    }
    (ok, format!("{} primes <= 1e5, weights 12 and 16", primes.len()))
}

fn c4_star_inequalities(s: &Shared) -> Verdict {
    let mut functions = vec![("delta".to_string(), s.l_delta.clone()), ("weight16".to_string(), s.l_w16.clone())];
    for seed in 1..=5 {
        functions.push((format!("synthetic{seed}"), hecke::synthetic(&s.sieve, X, seed).unwrap()));
    }
    let mut ok = true;
    let mut failed = Vec::new();
    for (i, (name, l)) in functions.iter().enumerate() {
        let star = lambda_star(l);
        let r = hecke::check_star_inequalities(l, &star, &s.sieve, 10_000, 40 + i as u64);
        if !r.passed() {
            ok = false;
            failed.push(name.clone());
        }
    }
    (ok, format!("7 functions x 10^4 pairs, failures={failed:?}"))
}

fn c5_vaughan(s: &Shared) -> Verdict {
    let mut identity_ok = true;
    for (y, z) in [(2.0, 2.0), (10.0, 10.0), (31.0, 17.0)] {
        let params = VaughanParams::new(y, z).unwrap();
        for m in (y as u64 + 1)..=10_000 {
            // independent evaluation over all factorizations bc | m
            let (mut t1, mut t2) = (0i64, 0i64);
            for k in divisors(m) {
                for b in divisors(k) {
                    let c = k / b;
                    let mm = s.mu[b as usize] * s.mu[c as usize];
                    if (b as f64) <= y && (c as f64) <= z {
                        t1 += mm;
                    } else if (b as f64) > y && (c as f64) > z {
                        t2 += mm;
                    }
                }
            }
            let lib = vaughan::vaughan_identity_check(&s.sieve, m, params).unwrap();
            identity_ok &= -t1 + t2 == s.mu[m as usize] && lib.passed && lib.mobius == s.mu[m as usize];
            if !identity_ok {
                return (false, format!("identity fails at m={m}, y={y}, z={z}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let x = rng.gen_range(10..=X);
        let alpha: f64 = rng.gen();
        let y = rng.gen_range(1.0..50.0);
        let z = rng.gen_range(1.0..50.0);
        let d = vaughan::decompose(&s.l_delta, &s.sieve, x, alpha, VaughanParams::new(y, z).unwrap()).unwrap();
        let t = Complex64::new(d.t_direct.0, d.t_direct.1);
        let rhs = Complex64::new(d.boundary.0 - d.t1.0 + d.t2.0, d.boundary.1 - d.t1.1 + d.t2.1);
        worst = worst.max(crel(t, rhs));
    }
    (identity_ok && worst <= 1e-8, format!("identity exact; 20 decompositions max_rel={worst:.2e}"))
}

fn c6_identities(s: &Shared) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let alphas: Vec<f64> = (0..10).map(|_| rng.gen()).collect();
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for &alpha in &alphas {
        for t in 1..=50u32 {
            let t = t as f64;
            let c = expsums::verify_square_inversion(&s.l_delta, &s.sieve, t, alpha).unwrap();
            worst = worst.max(crel(Complex64::new(c.lhs.0, c.lhs.1), Complex64::new(c.rhs.0, c.rhs.1)));
            for a in [1u64, 2, 6, 30] {
                let c = expsums::verify_square_expansion(&s.l_delta, &s.sieve, t, a, alpha).unwrap();
                let (l, r) = (Complex64::new(c.lhs.0, c.lhs.1), Complex64::new(c.rhs.0, c.rhs.1));
                // direct oracle for the left side
                let direct: Complex64 = (1..=t as u64)
                    .map(|n| Complex64::from_polar(s.l_delta.get(a * n * n), 2.0 * std::f64::consts::PI * n as f64 * alpha))
                    .sum();
                worst = worst.max(crel(l, r)).max(crel(l, direct));
                checks += 2;
            }
        }
    }
    (worst <= 1e-8, format!("{checks} checks, T<=50, 10 alpha, max_rel={worst:.2e}"))
}

fn c7_parseval(s: &Shared) -> Verdict {
    let c: Vec<f64> = (1..=512u64).map(|n| s.mu[n as usize] as f64 * s.l_delta.get(n)).collect();
    let r = expsums::parseval_check(&c, 1024).unwrap();
    let energy: f64 = c.iter().map(|v| v * v).sum();
    let ok = r.rel_err <= 1e-6 && rel(r.energy, energy) <= 1e-12;
    (ok, format!("X=512 R=1024 rel_err={:.2e}", r.rel_err))
}

fn c8_min_norm() -> Verdict {
    let survey = diophantine::min_norm_survey(100, 10, 1000, 1000, 1000, 8).unwrap();
    // brute-force oracle on a few samples
    let mut oracle_ok = true;
    for &(alpha, q, ratio) in survey.samples.iter().take(5) {
        let lhs: f64 = (1..=1000u64)
            .map(|m| {
                let v = m as f64 * alpha;
                let d = (v - v.round()).abs();
                if d == 0.0 { 1000.0 } else { (1.0 / d).min(1000.0) }
            })
            .sum::<f64>()
            * 2.0;
        let rhs = (1000.0 + 1000.0 + 1e6 / q as f64 + q as f64) * (2.0 * q as f64).ln();
        oracle_ok &= rel(lhs / rhs, ratio) < 1e-6;
    }
    (
        oracle_ok && survey.max_ratio <= 10.0 && survey.samples.len() == 100,
        format!("100 samples median_ratio={:.4} max_ratio={:.4}", survey.median_ratio, survey.max_ratio),
    )
}

fn c9_certificate() -> Verdict {
    let c = characters::local_factor_certificate(1e-4).unwrap();
    let ok = c.certified_min >= 0.01 && c.odd_prime_margin > 0.125 && c.odd_prime_margin_exceeds_eighth;
    (
        ok,
        format!(
            "certified_min={:.5} (grid_min={:.5}, Lipschitz={:.4}) odd_prime_margin={:.5}",
            c.certified_min, c.grid_min, c.lipschitz, c.odd_prime_margin
        ),
    )
}

fn c10_residues(s: &Shared) -> Verdict {
    let x = 10_000;
    let mut worst: f64 = 0.0;
    for q in [1u64, 4, 5, 6, 12] {
        for a in 0..q as i64 {
            let r = characters::residue_decomposition_check(&s.l_delta, &s.sieve, x, a, q).unwrap();
            let direct: Complex64 = (1..=x)
                .map(|n| {
                    let c = s.mu[n as usize] as f64 * s.l_delta.get(n);
                    Complex64::from_polar(c, 2.0 * std::f64::consts::PI * ((a as u64 * n) % q) as f64 / q as f64)
                })
                .sum();
            let d = Complex64::new(r.direct.0, r.direct.1);
            worst = worst
                .max(crel(d, Complex64::new(r.residue_split.0, r.residue_split.1)))
                .max(crel(d, Complex64::new(r.character_split.0, r.character_split.1)))
                .max(crel(d, direct));
        }
    }
    (worst <= 1e-8, format!("q in {{1,4,5,6,12}}, all a, X=1e4, max_rel={worst:.2e}"))
}

fn c11_decay(s: &Shared) -> Verdict {
    let start = Instant::now();
    let alphas = [
        ("golden", (5f64.sqrt() - 1.0) / 2.0),
        ("sqrt2-1", 2f64.sqrt() - 1.0),
        ("1/3", 1.0 / 3.0),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, alpha) in alphas {
        let rows = expsums::decay_profile(Variant::Moebius, &s.l_delta, &s.sieve, alpha, &[500, X], 1.0).unwrap();
        let factor = rows[0].per_x / rows[1].per_x;
        ok &= factor >= 3.0;
        parts.push(format!("{name}:{factor:.1}"));
    }
    let secs = start.elapsed().as_secs_f64();
    (ok && secs < 120.0, format!("|M(500)|/500 over |M(1e5)|/1e5 = {} runtime={secs:.2}s", parts.join(" ")))
}

fn c12_circle(s: &Shared) -> Verdict {
    let reports = circle::ternary_weighted(&s.l_delta, &s.sieve, 500).unwrap();
    let primes: Vec<u64> = (2..=500).filter(|&p| is_prime(p)).collect();
    let mut ok = reports.len() == 500;
    for r in &reports {
        let (mut r3, mut w, mut w3) = (0u64, 0.0f64, 0.0f64);
        for &p1 in &primes {
            for &p2 in &primes {
                if p1 + p2 < r.n && is_prime(r.n - p1 - p2) {
                    let p3 = r.n - p1 - p2;
                    r3 += 1;
                    w += s.l_delta.get(p1);
                    w3 += s.l_delta.get(p1) * s.l_delta.get(p2) * s.l_delta.get(p3);
                }
            }
        }
        ok &= r.r3 == r3
            && (r.weighted - w).abs() <= 1e-9 * (1.0 + w.abs())
            && (r.weighted3 - w3).abs() <= 1e-9 * (1.0 + w3.abs())
            && r.even == (r.n % 2 == 0);
    }
    let r9 = reports[8].r3;
    (ok && r9 == 4, format!("N<=500 identical; r3(9)={r9}"))
}

fn c13_determinism() -> Verdict {
    let config = ExperimentConfig { limit: 10_000, seed: 7, ..Default::default() };
    let lab = Lab::load(&FormSelector::Delta, config.limit, None).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| verify_all(&config, &lab).render())
    };
    let (a, b) = (run(1), run(4));
    let same = a == b;
    (same && !a.contains("[FAIL]"), format!("1 vs 4 threads identical={same}, {} bytes", a.len()))
}

fn main() -> ExitCode {
    let sieve = build_sieves(X).unwrap();
    let delta = cuspform::delta_series(X).unwrap();
    let w16 = cuspform::weight16_series(X).unwrap();
    let l_delta = HeckeFn::from_form(&normalize(&delta));
    let l_w16 = HeckeFn::from_form(&normalize(&w16));
    let mu = (0..=X).map(|n| if n == 0 { 0 } else { mobius(n) }).collect();
    let s = Shared { mu, sieve, delta, w16, l_delta, l_w16 };

    let criteria: Vec<(&str, Box<dyn Fn() -> Verdict + '_>)> = vec![
        ("tau oracle", Box::new(|| c1_tau(&s))),
        ("Hecke relations", Box::new(|| c2_hecke(&s))),
        ("prime bound", Box::new(|| c3_deligne(&s))),
        ("lambda-star inequalities", Box::new(|| c4_star_inequalities(&s))),
        ("Vaughan identity and decomposition", Box::new(|| c5_vaughan(&s))),
        ("square-sum identities", Box::new(|| c6_identities(&s))),
        ("discrete Parseval", Box::new(|| c7_parseval(&s))),
        ("min-norm sums", Box::new(c8_min_norm)),
        ("local factor certificate", Box::new(c9_certificate)),
        ("residue/character decomposition", Box::new(|| c10_residues(&s))),
        ("decay profiles", Box::new(|| c11_decay(&s))),
        ("ternary circle sums", Box::new(|| c12_circle(&s))),
        ("determinism", Box::new(c13_determinism)),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let (passed, detail) = check();
        if !passed {
            failures += 1;
        }
        println!("{} {:>2} {name}: {detail}", if passed { "PASS" } else { "FAIL" }, i + 1);
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
