//! The acceptance gate. Each test is one gate criterion; the suite passes
//! only if every criterion holds at its stated tolerance within its stated
//! time limit. Run with `cargo test --test acceptance`.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use num::{BigInt, BigRational, Zero};

use exlab::distkit::{dependency_reversal, Dist, FnTable, JointDist};
use exlab::extract::{adversarial_extract, lre3, CondenserContract, NmExtParams};
use exlab::gf2k::{mul_n, FieldElem, FieldSpec};
use exlab::nofsim::{
    cs_chain_check, cube_bias, enumerate_protocols, gip_table, missing_entropy_check,
    random_protocol, xor_lemma_check, CylinderIntersection, NofProtocol, TruthTable,
};
use exlab::ratio::{pow2, qint};
use exlab::rng::SplitMix64;
use exlab::verify::{
    adversarial_reduction_check, condenser_error, condenser_profile, reduction_bound_check,
    strongness_check, weak_nme_distance, weak_nme_mc_check, Evaluator, SourceFamily,
};
use exlab::Budget;
use exlab_cli::report::RunReport;

fn budget() -> Budget {
    Budget::default()
}

fn within(start: Instant, limit_secs: u64, label: &str) {
    let elapsed = start.elapsed();
    println!("{label}: {:.2}s", elapsed.as_secs_f64());
    assert!(
        elapsed < Duration::from_secs(limit_secs),
        "{label} took {:.2}s, limit {limit_secs}s",
        elapsed.as_secs_f64()
    );
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// A random distribution with small rational weights; some cells may be zero.
fn random_dist(rng: &mut SplitMix64, bits: u32) -> Dist {
    let n = 1usize << bits;
    let mut weights: Vec<u64> = (0..n).map(|_| rng.next_below(6)).collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: u64 = weights.iter().sum();
    let probs = weights.iter().map(|&w| ratio(w, total)).collect();
    Dist::new(bits, probs).unwrap()
}

fn random_joint(rng: &mut SplitMix64, widths: &[u32]) -> JointDist {
    let total_bits: u32 = widths.iter().sum();
    let n = 1usize << total_bits;
    let mut weights: Vec<u64> = (0..n).map(|_| rng.next_below(6)).collect();
    if weights.iter().all(|&w| w == 0) {
        weights[0] = 1;
    }
    let total: u64 = weights.iter().sum();
    let probs = weights.iter().map(|&w| ratio(w, total)).collect();
    JointDist::new(widths.to_vec(), probs).unwrap()
}

fn random_fn_table(rng: &mut SplitMix64, in_bits: u32, out_bits: u32) -> FnTable {
    let entries = (0..1u64 << in_bits)
        .map(|_| rng.next_below(1 << out_bits))
        .collect();
    FnTable::new(in_bits, out_bits, entries).unwrap()
}

fn random_truth_table(rng: &mut SplitMix64, in_bits: u32) -> TruthTable {
    let table_bits = 1u32 << in_bits;
    let mut v = rng.next_u64();
    if table_bits < 64 {
        v &= (1u64 << table_bits) - 1;
    }
    TruthTable::from_int(in_bits, v).unwrap()
}

/// Multiplication is associative, commutative, distributive over XOR, has
/// identity 1 and working inverses: exhaustively for widths up to 4, on a
/// million random triples for widths 8 and 16, and against the schoolbook
/// oracle on every pair for widths up to 6.
#[test]
fn criterion_01_field_axioms() {
    let start = Instant::now();

    for t in 1..=4u32 {
        let size = 1u64 << t;
        for a in 0..size {
            for b in 0..size {
                let ab = mul_n(t, a, b).unwrap();
                assert_eq!(ab, mul_n(t, b, a).unwrap());
                for c in 0..size {
                    let bc = mul_n(t, b, c).unwrap();
                    assert_eq!(mul_n(t, ab, c).unwrap(), mul_n(t, a, bc).unwrap());
                    assert_eq!(
                        mul_n(t, a, b ^ c).unwrap(),
                        ab ^ mul_n(t, a, c).unwrap()
                    );
                }
            }
        }
        for a in 0..size {
            assert_eq!(mul_n(t, a, 1).unwrap(), a);
            if a != 0 {
                let inv = FieldElem::new(a, t).unwrap().inv().unwrap().value();
                assert_eq!(mul_n(t, a, inv).unwrap(), 1);
            }
        }
    }

    for &t in &[8u32, 16] {
        let mask = (1u64 << t) - 1;
        let mut rng = SplitMix64::new(0x0100 + t as u64);
        for _ in 0..1_000_000 {
            let a = rng.next_u64() & mask;
            let b = rng.next_u64() & mask;
            let c = rng.next_u64() & mask;
            let ab = mul_n(t, a, b).unwrap();
            let bc = mul_n(t, b, c).unwrap();
            assert_eq!(ab, mul_n(t, b, a).unwrap());
            assert_eq!(mul_n(t, ab, c).unwrap(), mul_n(t, a, bc).unwrap());
            assert_eq!(mul_n(t, a, b ^ c).unwrap(), ab ^ mul_n(t, a, c).unwrap());
            assert_eq!(mul_n(t, a, 1).unwrap(), a);
            if a != 0 {
                let inv = FieldElem::new(a, t).unwrap().inv().unwrap().value();
                assert_eq!(mul_n(t, a, inv).unwrap(), 1);
            }
        }
    }

    for t in 1..=6u32 {
        let spec = FieldSpec::get(t).unwrap();
        for a in 0..1u64 << t {
            for b in 0..1u64 << t {
                assert_eq!(
                    mul_n(t, a, b).unwrap(),
                    exlab::oracle::schoolbook_mul(t, spec.modulus, a, b)
                );
            }
        }
    }

    within(start, 30, "criterion 01 field axioms");
}

/// Statistical distance satisfies the triangle inequality, symmetry and
/// identity; pushforwards never increase it; conditioning averages it
/// exactly; and the two closeness routes agree, vanishing exactly on
/// distributions that already have k bits of min-entropy.
#[test]
fn criterion_02_distance_toolkit() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x0200);

    for i in 0..1000u64 {
        let bits = 1 + (i % 10) as u32;
        let p = random_dist(&mut rng, bits);
        let q = random_dist(&mut rng, bits);
        let r = random_dist(&mut rng, bits);
        let pq = p.statistical_distance(&q).unwrap();
        let qr = q.statistical_distance(&r).unwrap();
        let pr = p.statistical_distance(&r).unwrap();
        assert!(pr <= &pq + &qr, "triangle inequality failed at instance {i}");
        assert_eq!(pq, q.statistical_distance(&p).unwrap());
        assert!(p.statistical_distance(&p).unwrap().is_zero());
    }

    for i in 0..1000u64 {
        let bits = 1 + (i % 8) as u32;
        let out = 1 + rng.next_below(bits as u64) as u32;
        let f = random_fn_table(&mut rng, bits, out);
        let p = random_dist(&mut rng, bits);
        let q = random_dist(&mut rng, bits);
        let before = p.statistical_distance(&q).unwrap();
        let after = p
            .pushforward(&f)
            .unwrap()
            .statistical_distance(&q.pushforward(&f).unwrap())
            .unwrap();
        assert!(after <= before, "data processing failed at instance {i}");
    }

    // Conditioning on a shared marginal splits the distance exactly.
    for i in 0..1000u64 {
        let xb = 1 + (i % 5) as u32;
        let zb = 1 + ((i / 5) % 5) as u32;
        let xn = 1usize << xb;
        let zn = 1usize << zb;
        let zw: Vec<u64> = (0..zn).map(|_| 1 + rng.next_below(5)).collect();
        let zt: u64 = zw.iter().sum();
        let build = |rng: &mut SplitMix64| -> JointDist {
            let mut probs = vec![BigRational::zero(); xn << zb];
            for (z, &wz) in zw.iter().enumerate() {
                let mut xw: Vec<u64> = (0..xn).map(|_| rng.next_below(6)).collect();
                if xw.iter().all(|&w| w == 0) {
                    xw[0] = 1;
                }
                let xt: u64 = xw.iter().sum();
                for (x, &wx) in xw.iter().enumerate() {
                    probs[(x << zb) | z] = ratio(wz, zt) * ratio(wx, xt);
                }
            }
            JointDist::new(vec![xb, zb], probs).unwrap()
        };
        let pj = build(&mut rng);
        let qj = build(&mut rng);
        let lhs = pj
            .flatten()
            .statistical_distance(&qj.flatten())
            .unwrap();
        let mut rhs = BigRational::zero();
        for z in 0..zn as u64 {
            let (pc, pw) = pj.condition(1, z).unwrap();
            let (qc, qw) = qj.condition(1, z).unwrap();
            assert_eq!(pw, qw, "construction must share the marginal");
            let d = pc
                .marginal_single(0)
                .unwrap()
                .statistical_distance(&qc.marginal_single(0).unwrap())
                .unwrap();
            rhs += pw * d;
        }
        assert_eq!(lhs, rhs, "averaging identity failed at instance {i}");
    }

    for i in 0..1000u64 {
        let bits = 1 + (i % 10) as u32;
        let k = rng.next_below(bits as u64 + 1) as u32;
        let p = random_dist(&mut rng, bits);
        let direct = p.closeness_to_min_entropy(k).unwrap();
        let via_set = p.closeness_via_best_set(k).unwrap();
        assert_eq!(direct, via_set, "closeness routes split at instance {i}");
        let already_flat_enough = p.min_entropy().max_prob <= pow2(-(k as i64));
        assert_eq!(direct.is_zero(), already_flat_enough);
    }

    within(start, 60, "criterion 02 distance toolkit");
}

/// Reversing the sampling order of (source, function value) reconstructs
/// the source distribution exactly.
#[test]
fn criterion_03_dependency_reversal() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x0300);
    for i in 0..100u64 {
        let bits = 1 + (i % 8) as u32;
        let out = 1 + rng.next_below(bits as u64) as u32;
        let f = random_fn_table(&mut rng, bits, out);
        let p = random_dist(&mut rng, bits);
        let rev = dependency_reversal(&p, &f).unwrap();
        assert_eq!(rev.reconstruct(), p, "reconstruction differs at instance {i}");
    }
    within(start, 10, "criterion 03 dependency reversal");
}

/// Conditioning costs at most log(1/eps) bits of min-entropy outside a
/// failure event of mass at most eps, on every random joint tried.
#[test]
fn criterion_04_chain_rule() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x0400);
    let epsilons = [pow2(-1), pow2(-2), pow2(-4)];
    for i in 0..1000u64 {
        let xb = 1 + (i % 5) as u32;
        let yb = 1 + ((i / 5) % 5) as u32;
        let joint = random_joint(&mut rng, &[xb, yb]);
        for eps in &epsilons {
            let report = joint.verify_chain_rule(eps).unwrap();
            assert!(
                report.holds,
                "chain rule failed at instance {i}, eps {eps}, failure mass {}",
                report.failure_mass
            );
        }
    }
    within(start, 60, "criterion 04 chain rule");
}

/// The cube measure of inner product over two uniform n-bit inputs is
/// exactly 2^-n, and the correlation-vs-cube inequality holds on random
/// functions against random cylinder intersections.
#[test]
fn criterion_05_cube_bias_and_chain() {
    let start = Instant::now();

    for n in 1..=6u32 {
        let f = gip_table(2, n).unwrap();
        let tt = TruthTable::from_fn(2 * n, |x| f.eval(x) == 1).unwrap();
        let sources = vec![Dist::uniform(n); 2];
        assert_eq!(
            cube_bias(&tt, &sources, &budget()).unwrap(),
            pow2(-(n as i64)),
            "inner-product cube measure is off at n = {n}"
        );
    }

    let mut rng = SplitMix64::new(0x0500);
    let combos = [(2usize, 1u32), (2, 2), (3, 1), (3, 2)];
    for (j, &(parties, n)) in combos.iter().enumerate() {
        for i in 0..125u64 {
            let f = random_truth_table(&mut rng, parties as u32 * n);
            let factors: Vec<TruthTable> = (0..parties)
                .map(|_| random_truth_table(&mut rng, (parties as u32 - 1) * n))
                .collect();
            let cylinder = CylinderIntersection::new(n, factors).unwrap();
            let sources = vec![Dist::uniform(n); parties];
            let report = cs_chain_check(&f, &cylinder, &sources, &budget()).unwrap();
            assert!(
                report.holds,
                "combo {j} instance {i}: correlation {} powered {} vs cube {}",
                report.correlation, report.correlation_powered, report.cube
            );
        }
    }

    within(start, 300, "criterion 05 cube bias");
}

/// The leakage distance of any function against any protocol is bounded by
/// 2^m times the worst XOR bias, both sides computed exactly.
#[test]
fn criterion_06_xor_lemma() {
    let start = Instant::now();
    let mut rng = SplitMix64::new(0x0600);
    for i in 0..200u64 {
        let m = 1 + (i % 2) as u32;
        let mu = (i % 3) as u32;
        let f = random_fn_table(&mut rng, 4, m);
        let protocol = random_protocol(2, 2, mu, i % 2 == 1, 0x0600 + i).unwrap();
        let x = JointDist::product(&[random_dist(&mut rng, 2), random_dist(&mut rng, 2)]).unwrap();
        let report = xor_lemma_check(&f, &protocol, &x, &budget()).unwrap();
        assert!(
            report.holds,
            "instance {i}: lhs {} vs rhs {}",
            report.lhs, report.rhs
        );
    }
    within(start, 300, "criterion 06 xor lemma");
}

/// With the entropy floor dropped to k = 1, some source pair leaks more
/// through a short protocol than the uniform-case bound allows; the
/// exhaustive check finds a witness for mu = 2 and mu = 3.
#[test]
fn criterion_07_missing_entropy() {
    let start = Instant::now();
    let f = gip_table(2, 2).unwrap();

    let r2 = missing_entropy_check(&f, 2, 2, 1, 2, &budget()).unwrap();
    assert_eq!(r2.protocols_full, 1024);
    assert_eq!(r2.protocols_test, 1);
    assert_eq!(r2.source_tuples, 36);
    assert!(
        r2.holds,
        "mu = 2: worst leakage {} never exceeded the bound {}",
        r2.worst, r2.bound
    );

    let r3 = missing_entropy_check(&f, 2, 2, 1, 3, &budget()).unwrap();
    assert_eq!(r3.protocols_full, 32768);
    assert_eq!(r3.protocols_test, 32);
    assert!(
        r3.holds,
        "mu = 3: worst leakage {} never exceeded the bound {}",
        r3.worst, r3.bound
    );

    within(start, 600, "criterion 07 missing entropy");
}

/// A million-sample Monte-Carlo estimate of the tampering distance lands
/// within three standard errors of the exact value, and a constant map
/// sits at exactly 1 - 2^-m.
#[test]
fn criterion_08_monte_carlo_and_constant_gap() {
    let start = Instant::now();

    let params = NmExtParams::ffm(2, 4, 2, 1).unwrap();
    let ev = Evaluator::from_params(&params);
    let family = SourceFamily::uniform(2, 4).unwrap();
    let mc = weak_nme_mc_check(&ev, &family, 1_000_000, 0x0800, &budget()).unwrap();
    assert_eq!(mc.exact, ratio(47, 1024));
    assert!(
        mc.within_three_sigma,
        "estimate {} vs exact {} is {:.2} sigmas off",
        mc.estimate, mc.exact, mc.sigmas
    );

    for m in 1..=2u32 {
        let constant = Evaluator::constant(2, 4, m, 0).unwrap();
        let d = weak_nme_distance(&constant, &family, &budget()).unwrap();
        assert_eq!(d, qint(1) - pow2(-(m as i64)), "constant gap at m = {m}");
    }

    within(start, 300, "criterion 08 monte carlo");
}

/// Leakage through every protocol stays within the tampering-to-leakage
/// bound: exhaustively over all short protocols on two small sources, and
/// on two hundred seeded protocols at three sources.
#[test]
fn criterion_09_leakage_reduction() {
    let start = Instant::now();

    for n in 1..=2u32 {
        let params = NmExtParams::ffm(2, n, n, 1).unwrap();
        let ev = Evaluator::from_params(&params);
        let family = SourceFamily::uniform(2, n).unwrap();
        for mu in 0..=1u32 {
            let protocols: Vec<NofProtocol> = if mu == 0 {
                let no_leaks: [(usize, FnTable); 0] = [];
                vec![NofProtocol::from_leaks(2, n, &no_leaks).unwrap()]
            } else {
                enumerate_protocols(2, n, mu, &budget()).unwrap().collect()
            };
            let expected = if mu == 0 {
                1
            } else {
                2 * (1usize << (1u32 << n))
            };
            assert_eq!(protocols.len(), expected);
            let report = reduction_bound_check(&ev, &family, &protocols, &budget()).unwrap();
            assert!(report.holds, "violation at n = {n}, mu = {mu}");
            assert!(report.checks.iter().all(|c| c.holds));
        }
    }

    let params = NmExtParams::ffm(3, 4, 2, 1).unwrap();
    let ev = Evaluator::from_params(&params);
    let family = SourceFamily::uniform(3, 4).unwrap();
    let protocols: Vec<NofProtocol> = (0..200u64)
        .map(|seed| random_protocol(3, 4, 2, seed % 2 == 1, seed).unwrap())
        .collect();
    let report = reduction_bound_check(&ev, &family, &protocols, &budget()).unwrap();
    assert_eq!(report.checks.len(), 200);
    assert!(
        report.holds,
        "seeded protocol violated the bound; eps_hat {}",
        report.eps_hat
    );

    within(start, 1800, "criterion 09 reduction");
}

/// The many-source map agrees bit for bit with the three-source map when
/// nothing is fixed, and both its decomposition identity and its output
/// uniformity bound hold with fixed adversarial sources.
#[test]
fn criterion_10_adversarial_composition() {
    let start = Instant::now();
    let params = NmExtParams::ffm(3, 4, 2, 1).unwrap();

    for packed in 0..1u64 << 12 {
        let x1 = packed >> 8;
        let x2 = (packed >> 4) & 0xf;
        let x3 = packed & 0xf;
        assert_eq!(
            adversarial_extract(&params, &[x1, x2, x3]).unwrap(),
            lre3(&params, x1, x2, x3).unwrap()
        );
    }

    let family = SourceFamily::uniform(3, 4).unwrap();
    let cases: [(usize, [usize; 3], &[u64]); 3] = [
        (3, [0, 1, 2], &[]),
        (4, [0, 1, 3], &[0x5]),
        (5, [1, 2, 4], &[0x3, 0xa]),
    ];
    for (n_total, good, bad) in cases {
        let report =
            adversarial_reduction_check(&params, n_total, good, bad, &family, &budget()).unwrap();
        assert!(
            report.structural.holds && report.structural.measured.is_zero(),
            "decomposition broke at n_total = {n_total}"
        );
        assert!(
            report.statistical.holds,
            "output distance {} over bound {} at n_total = {n_total}",
            report.statistical.measured, report.statistical.bound
        );
    }

    within(start, 600, "criterion 10 adversarial composition");
}

/// The condenser profile enumerates every pair of four-entropy supports,
/// its worst pair is confirmed by the standalone error route, and the
/// strongness bound holds both at the profiled floor and at a floor where
/// the bound is strictly below one.
#[test]
fn criterion_11_condenser_profile_and_strongness() {
    let start = Instant::now();
    let cond = CondenserContract::ffm(4, 2).unwrap();

    let profile = condenser_profile(&cond, 2, 1, &budget()).unwrap();
    assert_eq!(profile.pairs, 1820 * 1820);
    assert!(profile.universal);
    let wx = Dist::from_flat(&profile.witness_x);
    let wy = Dist::from_flat(&profile.witness_y);
    assert_eq!(
        condenser_error(&cond, &wx, &wy, 1).unwrap(),
        profile.eps_max,
        "witness pair disagrees with the standalone error route"
    );

    let vacuous = strongness_check(&cond, 2, 1, &profile.eps_max, 4, &budget()).unwrap();
    assert!(vacuous.holds);

    let p1 = condenser_profile(&cond, 1, 1, &budget()).unwrap();
    assert_eq!(p1.pairs, 120 * 120);
    let strong = strongness_check(&cond, 1, 1, &p1.eps_max, 4, &budget()).unwrap();
    assert_eq!(strong.bound, pow2(-1), "bound should be 2^(1+2-4)");
    assert!(
        strong.holds,
        "failure fraction {} exceeds 1/2",
        strong.measured
    );

    within(start, 1800, "criterion 11 condenser profile");
}

// ---------------------------------------------------------------------------
// Criterion 12: byte-identical reports across repeated runs and thread
// counts, over one run of every command family.

fn exlab_bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_exlab"));
    c.env_remove("EXLAB_BUDGET");
    c.current_dir(Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."));
    c
}

fn run_stripped(args: &[String], threads: u32, out: &Path) -> String {
    let output = exlab_bin()
        .args(args)
        .args(["--threads", &threads.to_string(), "--out"])
        .arg(out)
        .output()
        .unwrap();
    assert_eq!(
        output.status.code(),
        Some(0),
        "`exlab {}` failed:\n{}",
        args.join(" "),
        String::from_utf8_lossy(&output.stderr)
    );
    let mut report: RunReport =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    report.strip_timing();
    serde_json::to_string(&report).unwrap()
}

#[test]
fn criterion_12_reproducibility() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();

    let write = |name: &str, body: &str| -> PathBuf {
        let p = dir.path().join(name);
        std::fs::write(&p, body).unwrap();
        p
    };
    let half = write("half.json", r#"{"domain_bits":1,"probs":["1/2","1/2"]}"#);
    let point = write("point.json", r#"{"domain_bits":1,"probs":["1/1","0/1"]}"#);
    let p2421 = write(
        "p2421.json",
        r#"{"n_sources":2,"input_bits":4,"cond_bits":2,"out_bits":1,"condenser":{"kind":"ffm","input_bits":4,"out_bits":2}}"#,
    );
    let p342 = write(
        "p342.json",
        r#"{"n_sources":3,"input_bits":4,"cond_bits":2,"out_bits":1,"condenser":{"kind":"ffm","input_bits":4,"out_bits":2}}"#,
    );
    let p384 = write(
        "p384.json",
        r#"{"n_sources":3,"input_bits":8,"cond_bits":4,"out_bits":2,"condenser":{"kind":"ffm","input_bits":8,"out_bits":4}}"#,
    );
    let s = |v: &[&str]| -> Vec<String> { v.iter().map(|x| x.to_string()).collect() };

    let battery: Vec<Vec<String>> = vec![
        s(&["field", "mul", "--width", "8", "--a", "0x57", "--b", "0x83"]),
        s(&["field", "table", "--width", "64"]),
        s(&["dist", "sd", "--p", half.to_str().unwrap(), "--q", point.to_str().unwrap()]),
        s(&["dist", "hmin", "--p", half.to_str().unwrap()]),
        s(&["dist", "close", "--p", half.to_str().unwrap(), "--k", "1"]),
        s(&["nof", "cube", "--f", "gip", "--N", "2", "--n", "2"]),
        s(&["nof", "leak", "--f", "gip", "--N", "2", "--n", "2", "--mu", "2", "--seed", "42"]),
        s(&["nof", "missing-entropy", "--f", "gip", "--N", "2", "--n", "2", "--mu", "2", "--k", "1"]),
        s(&["extract", "nme", "--params", p384.to_str().unwrap(), "--inputs", "0x57,0x83,0x01"]),
        s(&["extract", "adversarial", "--params", p342.to_str().unwrap(), "--inputs", "0x5,0x9,0xc,0x3"]),
        s(&["verify", "nme", "--params", p2421.to_str().unwrap(), "--mc-samples", "50000", "--seed", "9"]),
        s(&["verify", "reduction", "--params", p2421.to_str().unwrap(), "--mu", "1", "--count", "5", "--seed", "3"]),
        s(&["verify", "condenser", "--n", "3", "--r", "2", "--k", "1", "--l", "1", "--k-prime", "3"]),
        s(&["verify", "adversarial", "--params", p342.to_str().unwrap(), "--n-total", "4", "--good", "0,1,3", "--bad", "0x5"]),
        s(&["fixtures", "check"]),
    ];

    for (i, args) in battery.iter().enumerate() {
        let first = run_stripped(args, 1, &dir.path().join(format!("{i}-a.json")));
        let second = run_stripped(args, 8, &dir.path().join(format!("{i}-b.json")));
        let third = run_stripped(args, 8, &dir.path().join(format!("{i}-c.json")));
        assert_eq!(first, second, "threads changed the report for `exlab {}`", args.join(" "));
        assert_eq!(second, third, "rerun changed the report for `exlab {}`", args.join(" "));
    }

    within(start, 600, "criterion 12 reproducibility");
}
