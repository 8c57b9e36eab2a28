mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rug::{Float, Integer};

use weakring::attack::guess::rescan;
use weakring::attack::{
    attack_ringlwe, attack_small_error, evaluate_samples, small_error_on, AttackOptions, SurvivorTest, Verdict,
};
use weakring::embedding::transport::lattice_coordinates;
use weakring::embedding::spectral::spectral_from_parts;
use weakring::embedding::{build_embedding, spectral_stats, transport_to_residue};
use weakring::ring::cyclotomic::cyclotomic_poly;
use weakring::ring::discriminant::{discriminant_abs, DiscriminantMode};
use weakring::ring::field::{self, PrimeField, SmallField};
use weakring::ring::{find_roots_mod, poly_eval_mod, splits_completely};
use weakring::runner::{run_experiment, ExperimentConfig};
use weakring::sampling::samples::{to_jsonl_string, QuotientRing};
use weakring::sampling::{
    gen_polylwe_samples, gen_ringlwe_samples, random_secret, GaussianSpec, LweSampleSet, PolySample, SampleVariant,
    Samples, Truncation,
};
use weakring::vetting::findq::shared_root_degree;
use weakring::vetting::{construct_with_root, findq, search_trinomials, RootTarget, Variant};
use weakring::{Budgets, IntPolynomial, PrimeModulus, RootInfo};

fn pm(q: u64) -> PrimeModulus {
    PrimeModulus::new(q).unwrap()
}

fn eval(v: &[u64], a: u64, q: u64) -> u64 {
    let k = SmallField::new(q);
    v.iter().rev().fold(0, |acc, c| k.add(&k.mul(&acc, &a), c))
}

fn prime_strategy(lo: u64, hi: u64) -> impl Strategy<Value = u64> {
    (lo..hi).prop_map(common::prime_at_or_below).prop_filter("odd prime above lo", move |&p| p > 2 && p >= lo / 2)
}

/// Monic f = (x − r)·g with g monic of degree `d`, so r is a root mod every q.
fn with_root(r: i64, g_coeffs: Vec<i64>) -> IntPolynomial {
    let mut g = g_coeffs;
    g.push(1);
    let g = IntPolynomial::from_i64s(&g);
    let lin = IntPolynomial::from_i64s(&[-r, 1]);
    &lin * &g
}

fn spec(sigma: f64) -> GaussianSpec {
    GaussianSpec::from_sigma(sigma, Truncation::Hard2sigma).unwrap()
}

// ---------------------------------------------------------------------
// ring

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evaluation_is_multiplicative(
        q in prime_strategy(5, 5000),
        r in -50i64..50,
        g in prop::collection::vec(-20i64..20, 1..8),
        seed in any::<u64>(),
    ) {
        let f = with_root(r, g);
        let ring = QuotientRing::new(&f, q).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let u = weakring::sampling::gaussian::uniform_residues(q, f.degree(), &mut rng);
        let v = weakring::sampling::gaussian::uniform_residues(q, f.degree(), &mut rng);
        let a = r.rem_euclid(q as i64) as u64;
        let k = SmallField::new(q);
        prop_assert_eq!(eval(&ring.mul(&u, &v), a, q), k.mul(&eval(&u, a, q), &eval(&v, a, q)));
    }

    #[test]
    fn roots_reverify(
        q in prime_strategy(3, 3000),
        coeffs in prop::collection::vec(-100i64..100, 1..10),
    ) {
        let mut c = coeffs;
        c.push(1);
        let f = IntPolynomial::from_i64s(&c);
        let qm = pm(q);
        let roots = find_roots_mod(&f, &qm).unwrap();
        for r in &roots {
            prop_assert!(r.verify(&f, &qm), "root {} of {}", r.root, f);
        }
        let brute = (0..q).filter(|&x| poly_eval_mod(&f, &Integer::from(x), &qm) == 0).count();
        prop_assert_eq!(roots.len(), brute);
    }

    #[test]
    fn splits_matches_exhaustive_count(
        q in prime_strategy(3, 10_000),
        coeffs in prop::collection::vec(-1000i64..1000, 1..16),
        roots in prop::collection::vec(0u64..10_000, 0..16),
        planted in any::<bool>(),
    ) {
        // half the cases are products of linear factors so that both answers occur
        let f = if planted && !roots.is_empty() {
            roots.iter().fold(IntPolynomial::constant(1), |acc, &r| &acc * &IntPolynomial::from_i64s(&[-((r % q) as i64), 1]))
        } else {
            let mut c = coeffs;
            c.push(1);
            IntPolynomial::from_i64s(&c)
        };
        let qm = pm(q);
        let distinct = (0..q).filter(|&x| poly_eval_mod(&f, &Integer::from(x), &qm) == 0).count();
        let verdict = splits_completely(&f, &qm).unwrap();
        prop_assert_eq!(verdict.splits(), distinct == f.degree(), "f = {}, q = {}", f, q);
    }

    #[test]
    fn numeric_discriminant_matches_resultant(
        n in 2usize..=32,
        a in -40i64..40,
        b in 1i64..40,
        sign in any::<bool>(),
    ) {
        let b = if sign { b } else { -b };
        let f = IntPolynomial::trinomial(n, a, b);
        let exact = common::disc_abs_exact(&f);
        prop_assume!(exact != 0);
        let num = discriminant_abs(&f, DiscriminantMode::Numeric, 256).unwrap();
        let rel = (num.value.clone() / Float::with_val(256, &exact) - 1u32).abs().to_f64();
        prop_assert!(rel < 1e-8, "f = {}: relative error {}", f, rel);
    }
}

#[test]
fn cyclotomic_divides_and_is_coprime() {
    let p = 1_000_003u64;
    let k = SmallField::new(p);
    for m in 1..=60u64 {
        let phi = cyclotomic_poly(m);
        let xm1 = IntPolynomial::binomial(m as usize, -1);
        assert!(xm1.div_exact(&phi).unwrap().is_some(), "Φ_{m} ∤ x^{m} − 1");
        // prime factors of Res(Φ_m, x^k − 1) divide m, so coprimality mod p > m lifts to Q
        let phip = field::reduce_coeffs(&k, phi.coeffs());
        for kk in 1..m {
            let g = field::reduce_coeffs(&k, IntPolynomial::binomial(kk as usize, -1).coeffs());
            assert_eq!(field::gcd(&k, &phip, &g).len(), 1, "gcd(Φ_{m}, x^{kk} − 1) ≠ 1");
        }
    }
}

// ---------------------------------------------------------------------
// sampling

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn polylwe_samples_deterministic_reduced_and_truncated(
        q in prime_strategy(17, 20_000),
        n in 1usize..24,
        sigma in 0.0f64..6.0,
        seed in any::<u64>(),
    ) {
        let f = IntPolynomial::binomial(n, 1);
        let qm = pm(q);
        let sp = spec(sigma);
        let s = random_secret(&qm, n, seed).unwrap();
        let a = gen_polylwe_samples(&f, &qm, &sp, &s, 6, seed).unwrap();
        let b = gen_polylwe_samples(&f, &qm, &sp, &s, 6, seed).unwrap();
        prop_assert_eq!(to_jsonl_string(&a), to_jsonl_string(&b));
        let ring = QuotientRing::new(&f, q).unwrap();
        let bound = sp.bound();
        for smp in a.poly_samples().unwrap() {
            prop_assert!(smp.a.iter().chain(&smp.b).all(|&c| c < q));
            let prod = ring.mul(&smp.a, &s);
            for (bi, pi) in smp.b.iter().zip(prod) {
                let e = (*bi as i64 - pi as i64).rem_euclid(q as i64);
                let e = if e > q as i64 / 2 { e - q as i64 } else { e };
                prop_assert!(e.abs() <= bound, "|e| = {} > {}", e.abs(), bound);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn ringlwe_zero_error_is_homomorphic(seed in any::<u64>(), which in 0usize..3) {
        let (f, q) = [("x^4 + 4", 5u64), ("x^6 + 3*x + 3", 7), ("x^8 + 16*x + 12", 29)][which];
        let f = IntPolynomial::parse(f).unwrap();
        let qm = pm(q);
        let emb = build_embedding(&f, 160).unwrap();
        let s = random_secret(&qm, f.degree(), seed).unwrap();
        let sp = spec(0.0).with_det_root(emb.det_root().to_f64());
        let set = gen_ringlwe_samples(&emb, &qm, &sp, &s, 5, seed).unwrap();
        let one = Integer::from(1);
        let s_bar = eval(&s, 1, q);
        for smp in set.ring_samples().unwrap() {
            let a = transport_to_residue(&smp.a, &emb, &one, &qm).unwrap().to_u64().unwrap();
            let b = transport_to_residue(&smp.b, &emb, &one, &qm).unwrap().to_u64().unwrap();
            prop_assert_eq!(b, a * s_bar % q);
        }
    }
}

// ---------------------------------------------------------------------
// embedding

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn determinant_condition_and_scaling(
        n in 2usize..=16,
        a in -30i64..30,
        b in 1i64..30,
        sign in any::<bool>(),
    ) {
        let b = if sign { b } else { -b };
        let f = IntPolynomial::trinomial(n, a, b);
        let disc = common::disc_abs_exact(&f);
        prop_assume!(disc != 0);
        let prec = 192;
        let emb = build_embedding(&f, prec).unwrap();
        let expect = Float::with_val(prec, &disc).sqrt() >> (emb.r2 as u32);
        let rel = (emb.det_abs.clone() / &expect - 1u32).abs().to_f64();
        prop_assert!(rel < 1e-8, "det mismatch {} for {}", rel, f);

        let s = spectral_stats(&emb, None, None).unwrap();
        prop_assert!(s.condition_number >= 1.0 - 1e-9);
        prop_assert!(s.rho_prime <= 2.0 * s.condition_number, "ρ′ = {} > 2k = {}", s.rho_prime, 2.0 * s.condition_number);

        let m: Vec<f64> = emb.m.to_f64().iter().map(|x| 7.0 * x).collect();
        let mi: Vec<f64> = emb.m_inv.to_f64().iter().map(|x| x / 7.0).collect();
        let scaled = spectral_from_parts(&m, &mi, n, 7.0 * emb.det_root().to_f64()).unwrap();
        prop_assert!((scaled.rho_prime / s.rho_prime - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transport_is_a_ring_homomorphism(
        seed in any::<u64>(),
        which in 0usize..3,
    ) {
        let (f, q) = [("x^4 + 256", 257u64), ("x^6 + 3*x + 3", 7), ("x^5 + 2*x + 3", 1009)][which];
        let f = IntPolynomial::parse(f).unwrap();
        let qm = pm(q);
        let roots = find_roots_mod(&f, &qm).unwrap();
        prop_assume!(!roots.is_empty());
        let alpha = &roots[0].root;
        let emb = build_embedding(&f, 192).unwrap();
        let n = f.degree();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..40 {
            let u: Vec<i64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -50..50)).collect();
            let v: Vec<i64> = (0..n).map(|_| rand::Rng::gen_range(&mut rng, -50..50)).collect();
            let (up, vp) = (IntPolynomial::from_i64s(&u), IntPolynomial::from_i64s(&v));
            let (_, prod) = (&up * &vp).div_rem_monic(&f).unwrap();
            let sum = &up + &vp;
            let lift = |p: &IntPolynomial| -> Vec<Integer> {
                let mut c = p.coeffs().to_vec();
                c.resize(n, Integer::new());
                c
            };
            let t = |p: &IntPolynomial| transport_to_residue(&emb.embed(&lift(p)), &emb, alpha, &qm).unwrap();
            let qv = Integer::from(q);
            prop_assert_eq!(t(&prod), Integer::from(t(&up) * t(&vp)) % &qv);
            prop_assert_eq!(t(&sum), Integer::from(t(&up) + t(&vp)) % &qv);
        }
    }
}

#[test]
fn family_columns_are_orthogonal() {
    for (n, q) in [(4usize, 5u64), (8, 17), (16, 257)] {
        let f = IntPolynomial::binomial(n, q - 1);
        let prec = 192;
        let emb = build_embedding(&f, prec).unwrap();
        let tol = Float::with_val(prec, 1) >> (prec / 2);
        let cols: Vec<Vec<Float>> = (0..n).map(|j| emb.m.column(j)).collect();
        let norm = |c: &[Float]| c.iter().fold(Float::with_val(prec, 0), |acc, x| acc + Float::with_val(prec, x * x)).sqrt();
        for i in 0..n {
            for j in i + 1..n {
                let dot = cols[i].iter().zip(&cols[j]).fold(Float::with_val(prec, 0), |acc, (x, y)| acc + Float::with_val(prec, x * y));
                let bound = Float::with_val(prec, &tol * norm(&cols[i])) * norm(&cols[j]);
                assert!(dot.abs() < bound, "columns {i}, {j} of x^{n} + {}", q - 1);
            }
        }
    }
}

// ---------------------------------------------------------------------
// attack

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// With α = ±1 and n·⌈2σ⌉ inside the acceptance window, truncated errors
    /// never leave it.
    #[test]
    fn planted_residue_always_survives(
        q in prime_strategy(200, 3000),
        n in 2usize..12,
        ratio in 0.05f64..1.0,
        minus in any::<bool>(),
        a in -5i64..5,
        seed in any::<u64>(),
    ) {
        let window = (q / 4).min(q - (3 * q).div_ceil(4)) - 1;
        let bound = (ratio * window as f64 / n as f64).floor();
        let sigma = (bound - 1.0).max(0.0) / 2.0;
        prop_assert!(n as f64 * (2.0 * sigma).ceil() <= window as f64);
        // x^n + a·x + b with f(±1) ≡ 0
        let r: i64 = if minus { -1 } else { 1 };
        let rn = if n % 2 == 1 { r } else { 1 };
        let b = -(rn + a * r);
        let f = IntPolynomial::trinomial(n, a, b);
        let qm = pm(q);
        let s = random_secret(&qm, n, seed).unwrap();
        let set = gen_polylwe_samples(&f, &qm, &spec(sigma), &s, 15, seed).unwrap();
        let alpha = if minus { q - 1 } else { 1 };
        let root = RootInfo::new(Integer::from(alpha), None, &qm);
        let out = attack_small_error(&set, &root, &AttackOptions::default()).unwrap();
        let planted = eval(&s, alpha, q);
        prop_assert!(out.survivors().contains(&planted), "q = {}, f = {}", q, f);
    }

    #[test]
    fn verdicts_independent_of_partitioning(
        q in prime_strategy(1000, 300_000),
        ell in 1usize..10,
        seed in any::<u64>(),
    ) {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let pairs: Vec<(u64, u64)> = (0..ell).map(|_| (rand::Rng::gen_range(&mut rng, 0..q), rand::Rng::gen_range(&mut rng, 0..q))).collect();
        let ev = weakring::attack::EvaluatedSamples { q, alpha: 1, pairs };
        let one = small_error_on(&ev, &AttackOptions { workers: Some(1), ..AttackOptions::default() }).unwrap();
        let many = small_error_on(&ev, &AttackOptions { workers: Some(3), ..AttackOptions::default() }).unwrap();
        let all: Vec<u64> = (0..q).collect();
        let serial = rescan(&all, &ev, SurvivorTest::SmallError, usize::MAX);
        prop_assert_eq!(&one.verdict, &many.verdict);
        prop_assert_eq!(one.survivor_count, serial.survivor_count);
        prop_assert_eq!(one.survivors(), serial.survivors.clone());
        prop_assert_eq!(&one.survivor_trace, &serial.trace);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn transported_attack_matches_polynomial_side(seed in any::<u64>()) {
        let f = IntPolynomial::parse("x^8 + 16*x + 12").unwrap();
        let q = 29u64;
        let qm = pm(q);
        let emb = build_embedding(&f, 160).unwrap();
        let s = random_secret(&qm, 8, seed).unwrap();
        let sp = spec(0.0).with_det_root(emb.det_root().to_f64());
        let ring = gen_ringlwe_samples(&emb, &qm, &sp, &s, 10, seed).unwrap();
        let poly: Vec<PolySample> = ring
            .ring_samples()
            .unwrap()
            .iter()
            .map(|smp| {
                let c = |v: &[Float]| -> Vec<u64> {
                    lattice_coordinates(v, &emb).unwrap().iter().map(|x| x.to_u64().unwrap()).collect()
                };
                PolySample { a: c(&smp.a), b: c(&smp.b) }
            })
            .collect();
        let pset = LweSampleSet {
            variant: SampleVariant::PolylweCoefficient,
            precision_bits: None,
            discretization: None,
            ..ring.with_samples(Samples::Poly(poly))
        };
        let one = RootInfo::new(Integer::from(1), Some(Integer::from(1)), &qm);
        let opts = AttackOptions::default();
        let via_transport = attack_ringlwe(&ring, &emb, &opts).unwrap();
        let ev = evaluate_samples(&pset, &one, &opts).unwrap();
        let direct = small_error_on(&ev, &opts).unwrap();
        prop_assert_eq!(&via_transport.verdict, &direct.verdict);
        prop_assert_eq!(via_transport.survivor_count, direct.survivor_count);
        prop_assert!(via_transport.survivors().contains(&eval(&s, 1, q)));
    }
}

// ---------------------------------------------------------------------
// vetting

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn findq_output_shares_a_root(
        m in prop::sample::select(vec![1u64, 2, 3, 4, 6]),
        n in 3usize..9,
        a in -6i64..6,
        b in 2i64..20,
    ) {
        let f = IntPolynomial::trinomial(n, a, b);
        let phi = cyclotomic_poly(m);
        match findq(&f, m, &Budgets::default()) {
            Ok(r) => {
                prop_assert!(r.shared_degree >= 1);
                prop_assert!(shared_root_degree(&f, &phi, &r.q) >= 1);
            }
            Err(weakring::Error::NotCoprime) => prop_assert_eq!(common::resultant(&f, &phi), 0),
            // no prime can divide a unit resultant, so there is no q
            Err(weakring::Error::InvalidInput(_)) => {
                prop_assert_eq!(Integer::from(common::resultant(&f, &phi).abs_ref()), 1)
            }
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn constructed_polynomials_have_their_roots(
        m in prop::sample::select(vec![1u64, 2, 3, 4, 5, 6, 8]),
        extra in 0usize..6,
        idx in 0usize..40,
    ) {
        let n = weakring::ring::euler_phi(m) as usize + extra;
        let q = (1..).map(|t| t * m + 1).filter(|&p| common::prime_at_or_below(p) == p && p > 2).nth(idx).unwrap();
        let qm = pm(q);
        let c = construct_with_root(m, n, &qm, None).unwrap();
        prop_assert_eq!(c.f.degree(), n);
        prop_assert!(!c.roots.is_empty());
        for r in &c.roots {
            prop_assert!(r.verify(&c.f, &qm));
            let order = if r.is_one { 1 } else if r.is_minus_one { 2 } else { r.order_u64().unwrap() };
            prop_assert_eq!(order, m);
        }
    }

    #[test]
    fn trinomial_hits_recheck(
        n in 4usize..40,
        lo in -30i64..30,
        minus in any::<bool>(),
    ) {
        let target = if minus { RootTarget::MinusOne } else { RootTarget::One };
        let hits = search_trinomials(n, target, lo..=lo + 8, 1..=12, &Integer::from(50), &Budgets::default()).unwrap();
        for h in hits {
            let r = if minus { Integer::from(h.q.value() - 1u32) } else { Integer::from(1) };
            prop_assert_eq!(poly_eval_mod(&h.f, &r, &h.q), 0);
        }
    }
}

// ---------------------------------------------------------------------
// runner

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn report_accounting_holds(seed in any::<u64>(), ell in 1usize..12, w in 0.0f64..20.0) {
        let mut c = ExperimentConfig::new(
            IntPolynomial::parse("x^4 + 256").unwrap(),
            pm(257),
            w,
            Variant::Polylwe,
            ell,
            4,
            seed,
        );
        c.precision_bits = 64;
        let r = run_experiment(&c).unwrap();
        prop_assert_eq!(r.successes, r.recount());
        prop_assert_eq!(r.verdict_counts.values().sum::<usize>(), 4);
        for t in &r.trials {
            let ok = matches!(t.outcome.as_ref().map(|o| &o.verdict), Some(Verdict::Guess { residue }) if Some(*residue) == t.planted_residue);
            prop_assert_eq!(t.correct, ok);
        }
    }
}
