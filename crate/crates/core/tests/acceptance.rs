//! Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

mod common;

use std::io::Write;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use tamelift::approx::{approximate, corrector, expand_waring, hamiltonian_field, ApproxOptions};
use tamelift::charp::{center_bracket, center_bracket_shifted, check_center_symplecto, phi_p, phi_p_gf};
use tamelift::cli::run_command;
use tamelift::morphism::{check_symplecto, in_hn, specialize_h};
use tamelift::scalars::lift_residue;
use tamelift::singlift::{conjugate_by_curve, hn_scan, lift, random_admissible_curve, witness_family, LiftOptions, ScanVerdict};
use tamelift::tame::{evaluate, random_corpus, random_tame, random_tame_with, transport, RandomTameConfig};
use tamelift::text::{parse_terms, print_terms};
use tamelift::weyl::reorder_coeff;
use tamelift::*;

const CORPUS_SEED: u64 = 11;
const CORPUS_SIZE: usize = 50;

fn report(id: u32, title: &str, outcome: std::result::Result<String, String>) {
    let line = match &outcome {
        Ok(d) => format!("criterion {id} PASS  {title}: {d}"),
        Err(d) => format!("criterion {id} FAIL  {title}: {d}"),
    };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{line}");
    let _ = out.flush();
    if let Err(d) = outcome {
        panic!("criterion {id} failed: {d}");
    }
}

fn corpus() -> Vec<TameWord<Rational>> {
    random_corpus(CORPUS_SIZE, CORPUS_SEED, &())
}

fn residue(c: &Gf) -> i128 {
    let r = lift_residue(c).expect("prime field");
    r.numer().to_string().parse().unwrap()
}

fn rational_int(c: &Rational) -> i128 {
    assert!(c.is_integer());
    c.numer().to_string().parse().unwrap()
}

fn criterion_1() -> std::result::Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let instances = 500;
    for fl in flavors(1).into_iter().chain(flavors(2)) {
        for _ in 0..instances / 2 {
            let f = Poly::new(fl, (), random_terms::<Rational>(&fl, &(), 4, 3, &mut rng));
            let g = Poly::new(fl, (), random_terms::<Rational>(&fl, &(), 4, 3, &mut rng));
            let k = Poly::new(fl, (), random_terms::<Rational>(&fl, &(), 4, 3, &mut rng));
            let fg = f.bracket(&g).unwrap();
            if !fg.add(&g.bracket(&f).unwrap()).unwrap().is_zero() {
                return Err(format!("antisymmetry fails in {fl:?}"));
            }
            let leibniz = f.bracket(&g.mul(&k).unwrap()).unwrap();
            let rhs = fg.mul(&k).unwrap().add(&g.mul(&f.bracket(&k).unwrap()).unwrap()).unwrap();
            if leibniz != rhs {
                return Err(format!("Leibniz fails in {fl:?}"));
            }
            let j1 = f.bracket(&g.bracket(&k).unwrap()).unwrap();
            let j2 = g.bracket(&k.bracket(&f).unwrap()).unwrap();
            let j3 = k.bracket(&fg).unwrap();
            if !j1.add(&j2).unwrap().add(&j3).unwrap().is_zero() {
                return Err(format!("Jacobi fails in {fl:?}"));
            }
        }
    }
    for fl in flavors(1).into_iter().chain(flavors(2)) {
        for _ in 0..instances / 2 {
            let a = WeylElt::new(fl, (), random_terms::<Rational>(&fl, &(), 4, 3, &mut rng));
            let b = WeylElt::new(fl, (), random_terms::<Rational>(&fl, &(), 4, 3, &mut rng));
            let c = WeylElt::new(fl, (), random_terms::<Rational>(&fl, &(), 4, 3, &mut rng));
            let left = a.mul(&b).unwrap().mul(&c).unwrap();
            let right = a.mul(&b.mul(&c).unwrap()).unwrap();
            if left != right {
                return Err(format!("associativity fails in {fl:?}"));
            }
            // The normal form of a·b is the one reached by independent rewriting.
            let nc = nc_mul(&terms_to_nc(&fl, &a.terms, rational_int), &terms_to_nc(&fl, &b.terms, rational_int), 0);
            if nc_to_terms::<Rational>(&fl, &(), &rewrite_normal(&fl, &nc, 0)) != a.mul(&b).unwrap().terms {
                return Err(format!("normal form differs from rewriting in {fl:?}"));
            }
        }
    }
    let mut reorder_cases = 0;
    for fl in [Flavor::standard(1), Flavor::h_augmented(1)] {
        for b in 0..=6u32 {
            for c in 0..=6u32 {
                let d = WeylElt::new(fl, (), parse_terms::<Rational>(&format!("d1^{b}"), fl, &(), NameSide::W).unwrap());
                let x = WeylElt::new(fl, (), parse_terms::<Rational>(&format!("x1^{c}"), fl, &(), NameSide::W).unwrap());
                let mut word = vec![1; b as usize];
                word.extend(vec![0; c as usize]);
                let oracle = nc_to_terms::<Rational>(&fl, &(), &rewrite_normal(&fl, &nc_word(&fl, word, 1), 0));
                if d.mul(&x).unwrap().terms != oracle {
                    return Err(format!("d^{b} x^{c} differs from rewriting in {fl:?}"));
                }
                for k in 0..=b.min(c) {
                    let mut m = Mono::one(&fl);
                    m.e[0] = (c - k) as i32;
                    m.e[1] = (b - k) as i32;
                    m.e[fl.h_slot()] = if fl.has_h() { k as i32 } else { 0 };
                    let got = oracle.coeff(&m).cloned().unwrap_or_else(|| Rational::from_i64(&(), 0));
                    if got != Rational::from_integer(reorder_coeff(b, c, k)) {
                        return Err(format!("reorder coefficient ({b},{c},{k})"));
                    }
                }
                reorder_cases += 1;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 60.0 {
        return Err(format!("runtime {secs:.1}s exceeds 60s"));
    }
    Ok(format!("{instances} bracket and {instances} Weyl instances per flavor, {reorder_cases} reordering cases, {secs:.1}s"))
}

fn criterion_2() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut pairs = 0;
    let mut lifts = 0;
    for p in [2u64, 3, 5] {
        let spec = GfSpec::prime(p).unwrap();
        for n in 1..=2usize {
            let fl = Flavor::standard(n);
            let coord = |name: &str, i: usize| Poly::<Gf>::new(fl, spec.clone(), parse_terms::<Gf>(&format!("{name}{i}"), fl, &spec, NameSide::Center).unwrap());
            for i in 1..=n {
                for j in 1..=n {
                    let b = center_bracket(&coord("w", i), &coord("z", j)).map_err(|e| e.to_string())?;
                    let expect = if i == j { Poly::constant(fl, spec.clone(), Gf::one(&spec)) } else { Poly::zero(fl, spec.clone()) };
                    if b != expect {
                        return Err(format!("{{w{i}, z{j}}} = {} at p = {p}", tamelift::text::print_center(&b)));
                    }
                    for name in ["z", "w"] {
                        if !center_bracket(&coord(name, i), &coord(name, j)).unwrap().is_zero() {
                            return Err(format!("{{{name}{i}, {name}{j}}} ≠ 0 at p = {p}"));
                        }
                    }
                }
            }
        }
    }
    for s in 0..200 {
        let p = [2u64, 3, 5][s % 3];
        let spec = GfSpec::prime(p).unwrap();
        let fl = Flavor::standard(1 + s % 2);
        let a = Poly::new(fl, spec.clone(), random_terms::<Gf>(&fl, &spec, 3, 3, &mut rng));
        let b = Poly::new(fl, spec.clone(), random_terms::<Gf>(&fl, &spec, 3, 3, &mut rng));
        let base = center_bracket(&a, &b).map_err(|e| format!("pair {s} at p = {p}: {e}"))?;
        pairs += 1;
        if s < 50 {
            let shifted = center_bracket_shifted(&a, &b, rng.gen()).map_err(|e| e.to_string())?;
            if shifted != base {
                return Err(format!("shifted lift changes the bracket for pair {s}"));
            }
            lifts += 1;
        }
    }
    Ok(format!("generator table exact for p ∈ {{2,3,5}}, n ≤ 2; {pairs} random pairs divisible; {lifts} shifted lifts agree"))
}

/// Φ_p of an n = 1 map x ↦ a, d ↦ d computed by brute force, as the image of z.
fn oracle_phi_x(fl: &Flavor, a: &Nc, p: i128) -> std::collections::BTreeMap<Vec<i32>, i128> {
    center_read(fl, &pth_power_oracle(fl, a, p), p).expect("p-th power is central")
}

fn criterion_3() -> std::result::Result<String, String> {
    let fl = Flavor::standard(1);
    let fixtures: [(&str, Vec<(Word, i128)>, u64, &str); 4] = [
        ("x1 + d1", vec![(vec![0], 1), (vec![1], 1)], 2, "z1 + w1 + 1"),
        ("x1 + d1", vec![(vec![0], 1), (vec![1], 1)], 3, "z1 + w1"),
        ("x1 + d1^2", vec![(vec![0], 1), (vec![1, 1], 1)], 3, "z1 + w1^2 + 2"),
        ("x1 + d1^2", vec![(vec![0], 1), (vec![1, 1], 1)], 5, "z1 + w1^2"),
    ];
    for (img, words, p, expect) in &fixtures {
        let spec = GfSpec::prime(*p).unwrap();
        let sigma = Endo::new(Side::W, fl, (), vec![parse_terms::<Rational>(img, fl, &(), NameSide::W).unwrap(), parse_terms::<Rational>("d1", fl, &(), NameSide::W).unwrap()]).unwrap();
        let psi = phi_p(&sigma, &spec).map_err(|e| e.to_string())?;
        let mut a = Nc::new();
        for (w, c) in words {
            a.insert((w.clone(), central_zero(&fl)), *c);
        }
        let oracle = oracle_phi_x(&fl, &a, *p as i128);
        let oracle_w = oracle_phi_x(&fl, &nc_word(&fl, vec![1], 1), *p as i128);
        let stated = center_terms_map(&fl, &parse_terms::<Gf>(expect, fl, &spec, NameSide::Center).unwrap(), residue);
        let got_z = center_terms_map(&fl, &psi.images[0], residue);
        let got_w = center_terms_map(&fl, &psi.images[1], residue);
        if oracle != stated || got_z != oracle || got_w != oracle_w {
            return Err(format!("x ↦ {img} at p = {p}: library {:?}, oracle {oracle:?}, expected {expect}", got_z));
        }
    }
    let mut shifts = 0;
    for p in [5u64, 7] {
        let spec = GfSpec::prime(p).unwrap();
        for n in 1..=2usize {
            let sfl = Flavor::standard(n);
            for i in 0..n {
                for deg in 1..=(p as i32 - 2) {
                    for c in 1..p as i64 {
                        for xshift in [true, false] {
                            let mut m = Mono::one(&sfl);
                            m.e[if xshift { n + i } else { i }] = deg;
                            let f = Terms::from_term(m.clone(), Gf::from_i64(&spec, c));
                            let gen = if xshift { ElementaryGen::XShift(i, f) } else { ElementaryGen::PShift(i, f) };
                            let w = TameWord::new(Side::P, sfl, vec![gen]);
                            let phi = evaluate(&w, Side::W, sfl, &spec).unwrap();
                            let psi = phi_p_gf(&phi).map_err(|e| e.to_string())?;
                            let expect = evaluate(&w, Side::Center, sfl, &spec).unwrap();
                            if psi.images != expect.images {
                                return Err(format!("shift of degree {deg} at p = {p}, n = {n} is not preserved"));
                            }
                            shifts += 1;
                        }
                    }
                }
            }
        }
    }
    Ok(format!("4 fixtures equal the brute-force oracle; {shifts} elementary shifts keep their form"))
}

fn criterion_4() -> std::result::Result<String, String> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for s in 0..100 {
        let p = if s % 2 == 0 { 3 } else { 5 };
        let spec = GfSpec::prime(p).unwrap();
        let n = rng.gen_range(1..=2);
        let a = random_tame::<Rational>(n, rng.gen_range(1..=2), 3, rng.gen(), &());
        let b = random_tame::<Rational>(n, rng.gen_range(1..=2), 3, rng.gen(), &());
        let ea = evaluate(&a, Side::W, a.flavor, &()).unwrap();
        let eb = evaluate(&b, Side::W, b.flavor, &()).unwrap();
        let ab = ea.compose(&eb).unwrap();
        let pa = phi_p(&ea, &spec).map_err(|e| e.to_string())?;
        let pb = phi_p(&eb, &spec).map_err(|e| e.to_string())?;
        let pab = phi_p(&ab, &spec).map_err(|e| e.to_string())?;
        if pab != pa.compose(&pb).unwrap() {
            return Err(format!("pair {s} at p = {p}: phi_p is not multiplicative"));
        }
        for psi in [&pa, &pb, &pab] {
            if !check_center_symplecto(psi).map_err(|e| e.to_string())? {
                return Err(format!("pair {s} at p = {p}: image fails the center-bracket check"));
            }
        }
        checked += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 600.0 {
        return Err(format!("runtime {secs:.0}s exceeds 10 min"));
    }
    Ok(format!("{checked} pairs multiplicative and symplectic, {secs:.1}s"))
}

fn criterion_5() -> std::result::Result<String, String> {
    let mut stages = 0;
    let mut correctors = 0;
    for (idx, w) in corpus().iter().enumerate() {
        let sigma = w.eval(&()).unwrap();
        let ap = approximate(&sigma, 6, ApproxOptions::default()).map_err(|e| format!("item {idx}: {e}"))?;
        if ap.residual_rank < 6 {
            return Err(format!("item {idx}: residual rank {}", ap.residual_rank));
        }
        let mut last = 0;
        for st in &ap.stages {
            if st.rank_after <= st.k || st.k <= last {
                return Err(format!("item {idx}: stage {st:?} does not progress"));
            }
            last = st.k;
        }
        let fl = sigma.flavor;
        for (h, terms) in &ap.stage_terms {
            if expand_waring(terms, fl, &()).terms != h.terms {
                return Err(format!("item {idx}: Waring terms do not sum to the Hamiltonian"));
            }
            for t in terms {
                let e = corrector(t, fl, &()).unwrap().eval(&()).unwrap();
                let field = hamiltonian_field(&expand_waring(&[t.clone()], fl, &()).terms, &fl, &());
                let g = Grading::standard();
                for (i, x) in field.iter().enumerate() {
                    let dev = e.images[i].sub(&Terms::generator(&fl, &(), i));
                    let low = (t.d as i64) - 1;
                    if dev.homogeneous(&fl, &g, low) != *x || dev.truncate(&fl, &g, low - 1) != Terms::zero() {
                        return Err(format!("item {idx}: corrector for degree {} fails at order {low}", t.d));
                    }
                }
                correctors += 1;
            }
            stages += 1;
        }
    }
    Ok(format!("{CORPUS_SIZE} items reach rank ≥ 6 over {stages} monotone stages; {correctors} correctors sound"))
}

fn is_hn_member_word(n: usize, big_n: u32, rng: &mut ChaCha8Rng) -> Endo<Rational> {
    let cfg = RandomTameConfig { n, length: rng.gen_range(1..=2), min_degree: big_n, max_degree: big_n + 1, max_terms: 2, coeff_bound: 2, linear: false };
    random_tame_with::<Rational>(&cfg, rng.gen(), &()).eval(&()).unwrap()
}

fn criterion_6() -> std::result::Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let g = Grading::standard();
    let mut members = 0;
    while members < 100 {
        let n = rng.gen_range(1..=2);
        let big_n = rng.gen_range(2..=5i64);
        let phi = is_hn_member_word(n, big_n as u32, &mut rng);
        if phi.is_identity() || !in_hn(&phi, big_n, &g) {
            continue;
        }
        let main = phi.flavor.main_count();
        let mut curves = witness_family(main, big_n);
        curves.extend((0..200).map(|_| random_admissible_curve(main, big_n, &mut rng)));
        for c in &curves {
            if conjugate_by_curve(&phi, c).unwrap().pole_order() != 0 {
                return Err(format!("member {members} (N = {big_n}) has a pole under {:?}", c.m));
            }
        }
        members += 1;
    }
    let mut witnesses = 0;
    while witnesses < 100 {
        let n = rng.gen_range(1..=2);
        let big_n = rng.gen_range(3..=5i64);
        let low = rng.gen_range(2..big_n) as u32;
        let cfg = RandomTameConfig { n, length: 1, min_degree: low, max_degree: low, max_terms: 1, coeff_bound: 2, linear: false };
        let head = random_tame_with::<Rational>(&cfg, rng.gen(), &());
        let tail_cfg = RandomTameConfig { length: rng.gen_range(0..=1), min_degree: big_n as u32, max_degree: big_n as u32, ..cfg };
        let tail = random_tame_with::<Rational>(&tail_cfg, rng.gen(), &());
        let phi = head.concat(&tail).eval(&()).unwrap();
        if in_hn(&phi, big_n, &g) {
            continue;
        }
        match hn_scan(&phi, big_n, 200, rng.gen()).unwrap() {
            ScanVerdict::ConsistentWithHN => return Err(format!("non-member {witnesses} (N = {big_n}) has no witness")),
            ScanVerdict::PoleWitness(w) => {
                let m1 = *w.curve.m.iter().max().unwrap();
                let m2 = *w.curve.m.iter().min().unwrap();
                if !((big_n + 1) * m2 >= m1 && m1 >= big_n * m2) {
                    return Err(format!("witness {:?} violates the inequality for N = {big_n}", w.curve.m));
                }
            }
        }
        witnesses += 1;
    }
    Ok(format!("{members} members pole-free under the witness family and 200 curves; {witnesses} non-members witnessed"))
}

fn criterion_7() -> std::result::Result<String, String> {
    let mut failures = Vec::new();
    let opts = LiftOptions::new(6, vec![3, 5]);
    let mut tally = [0usize; 5];
    let mut prime_errors = 0;
    let mut prime_mismatches = 0;
    for (idx, w) in corpus().iter().enumerate() {
        let sigma = w.eval(&()).unwrap();
        let l = match lift(&sigma, &opts) {
            Ok(l) => l,
            Err(e) => {
                failures.push(format!("item {idx}: {e}"));
                continue;
            }
        };
        let c = &l.certificate;
        for pc in c.primes.iter().filter(|p| !p.consistent) {
            if pc.error.is_some() {
                prime_errors += 1;
            } else {
                prime_mismatches += 1;
            }
        }
        let flags = [c.stabilization, c.primes.iter().all(|p| p.consistent), c.canonicity, c.commutation_h.ok() && c.commutation_specialized.ok(), c.inverse_certified];
        for (t, f) in tally.iter_mut().zip(flags) {
            *t += f as usize;
        }
        if !c.passed() {
            failures.push(format!("item {idx}: {flags:?}"));
        }
    }
    let summary = format!(
        "stabilization {}/{CORPUS_SIZE}, primes {}/{CORPUS_SIZE}, canonicity {}/{CORPUS_SIZE}, commutation {}/{CORPUS_SIZE}, inverse {}/{CORPUS_SIZE}; failed prime checks: {prime_errors} not p-integral, {prime_mismatches} mismatched",
        tally[0], tally[1], tally[2], tally[3], tally[4]
    );
    if failures.is_empty() {
        Ok(summary)
    } else {
        Err(format!("{summary}; first failure {}", failures[0]))
    }
}

fn criterion_8() -> std::result::Result<String, String> {
    let one = Rational::from_i64(&(), 1);
    for (idx, w) in corpus().iter().enumerate() {
        let t = transport(w);
        let hfl = w.flavor.with_kind(BracketKind::HAugmented);
        let lifted_h = evaluate(&t, Side::W, hfl, &()).unwrap();
        let direct = evaluate(&t, Side::W, w.flavor, &()).unwrap();
        let spec = specialize_h(&lifted_h, &one).map_err(|e| e.to_string())?;
        if spec.images != direct.images || spec.flavor != direct.flavor {
            return Err(format!("item {idx}: specialization differs from the standard transport"));
        }
    }
    Ok(format!("{CORPUS_SIZE} items specialize exactly"))
}

fn criterion_9() -> std::result::Result<String, String> {
    let mut printed = 0;
    for (idx, w) in corpus().iter().enumerate() {
        let fl = w.flavor;
        let sigma = w.eval(&()).unwrap();
        let weyl = evaluate(&transport(w), Side::W, fl, &()).unwrap();
        for (e, names) in [(&sigma, NameSide::P), (&weyl, NameSide::W)] {
            for t in &e.images {
                let text = print_terms(t, &fl, names);
                let back = parse_terms::<Rational>(&text, fl, &(), names).map_err(|e| format!("item {idx}: {e}"))?;
                if back != *t || print_terms(&back, &fl, names) != text {
                    return Err(format!("item {idx}: round trip fails for {text}"));
                }
                printed += 1;
            }
        }
        let j = sigma.to_json();
        if Endo::<Rational>::from_json(&j).unwrap() != sigma {
            return Err(format!("item {idx}: JSON round trip fails"));
        }
        if !check_symplecto(&sigma) {
            return Err(format!("item {idx}: corpus evaluation is not symplectic"));
        }
    }
    let dir = std::env::temp_dir().join(format!("tamelift-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let sigma = corpus()[0].eval(&()).unwrap();
    let sigma_path = dir.join("sigma.json");
    std::fs::write(&sigma_path, serde_json::to_string(&sigma.to_json()).unwrap()).unwrap();
    let commands = [
        format!("corpus --seed {CORPUS_SEED} --count 5"),
        "singscan --N 4 --samples 50 --seed 7".to_string(),
        format!("singscan --N 3 --samples 50 --seed 9 --endo {}", sigma_path.display()),
        "bracket --prime 5 --n 2 --a z1*w2^2 --b w1+z2 --shifted 10 --seed 3".to_string(),
        format!("approximate --in {} --order 5", sigma_path.display()),
    ];
    for cmd in &commands {
        let argv: Vec<String> = cmd.split_whitespace().map(String::from).collect();
        let a = run_command(&argv);
        let b = run_command(&argv);
        if a.error.is_some() {
            return Err(format!("`{cmd}` errored: {:?}", a.error));
        }
        if a.canonical_json() != b.canonical_json() {
            return Err(format!("`{cmd}` is not reproducible"));
        }
    }
    let _ = std::fs::remove_dir_all(&dir);
    Ok(format!("{printed} printed images round-trip; {} seeded commands byte-reproducible", commands.len()))
}

#[test]
fn criterion_1_algebra_kernels() {
    report(1, "algebra kernels", criterion_1());
}

#[test]
fn criterion_2_center_bracket() {
    report(2, "center bracket", criterion_2());
}

#[test]
fn criterion_3_phi_p_fixtures() {
    report(3, "phi_p fixtures", criterion_3());
}

#[test]
fn criterion_4_phi_p_homomorphism() {
    report(4, "phi_p homomorphism and symplecticity", criterion_4());
}

#[test]
fn criterion_5_approximation() {
    report(5, "tame approximation", criterion_5());
}

#[test]
fn criterion_6_singularity_trick() {
    report(6, "singularity trick", criterion_6());
}

#[test]
fn criterion_7_lifting() {
    report(7, "lifting end-to-end", criterion_7());
}

#[test]
fn criterion_8_specialization() {
    report(8, "specialization round trip", criterion_8());
}

#[test]
fn criterion_9_cli() {
    report(9, "CLI round trip and reproducibility", criterion_9());
}

