//! Acceptance criteria, one PASS/FAIL line each. Runs as a plain binary
//! (`harness = false`) and exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::process::Command;
use std::time::Instant;

use common::*;
use locc_areas::convert::{choose_q, colour_transform_nielsen, verify_slice_distinct_at};
use locc_areas::diagram::{
    canonical_diagram, verify_colour_conservation, verify_row_distinct, StepProfile,
};
use locc_areas::distill::{
    colour_transform, distribution_from_profile, max_prob, optimal_distribution, swap_delta,
};
use locc_areas::protocol::{
    kraus_convert, kraus_distill, post_states, simulate_float, verify_completeness, KrausProtocol,
};
use locc_areas::{average_yield, nielsen_condition, Error, Rational, SchmidtVector};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn fail<T>(msg: impl Into<String>) -> Result<T, String> {
    Err(msg.into())
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..1_000 {
        let s = random_state(&mut rng, 6, 60);
        let y = average_yield(&optimal_distribution(&s)).map_err(|e| e.to_string())?;
        let dev = (y - emax_oracle(&s)).abs();
        worst = worst.max(dev);
        if dev > 1e-12 {
            return fail(format!("{s}: yield {y} vs oracle {}", emax_oracle(&s)));
        }
    }
    Ok(format!("1000 states, max deviation {worst:.1e}"))
}

/// Widths of the unit rows of a state's canonical diagram, N = LCM of its
/// denominators.
fn row_widths(s: &SchmidtVector) -> (Vec<usize>, i64) {
    let n: i64 = s
        .lambdas()
        .iter()
        .fold(BigUint::from(1u32), |acc, l| {
            num_integer::Integer::lcm(&acc, &l.denom_unsigned())
        })
        .to_i64()
        .unwrap();
    let rows = (s.get(0) * Rational::from_integer(n))
        .numer()
        .to_i64()
        .unwrap();
    let widths = (0..rows)
        .map(|k| s.lambdas().iter().filter(|l| **l > r(k, n)).count())
        .collect();
    (widths, n)
}

/// Yield of the diagram whose rows have these widths, through the library.
fn yield_of_rows(widths: &[usize], n: i64) -> f64 {
    let cols = widths.iter().copied().max().unwrap_or(0);
    let heights: Vec<Rational> = (1..=cols)
        .map(|i| r(widths.iter().filter(|&&w| w >= i).count() as i64, n))
        .collect();
    let profile = StepProfile::new(heights).unwrap();
    average_yield(&distribution_from_profile(&profile)).unwrap()
}

fn criterion_2() -> Outcome {
    for mb in 1..=63u64 {
        for ma in mb + 1..=64 {
            let d = swap_delta(ma, mb).map_err(|e| e.to_string())?;
            let ok = if ma == mb + 1 { d == 0.0 } else { d < -1e-15 };
            if !ok {
                return fail(format!("swap_delta({ma}, {mb}) = {d}"));
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut moves = 0;
    for _ in 0..200 {
        let s = random_state(&mut rng, 6, 60);
        let (widths, n) = row_widths(&s);
        let base = yield_of_rows(&widths, n);
        // one element from a row of width ma onto a row of width mb; rows
        // of equal width give the same diagram, and mb = 0 opens a new row
        let distinct: BTreeSet<usize> = widths.iter().copied().collect();
        for &ma in &distinct {
            for mb in std::iter::once(0).chain(distinct.iter().copied()) {
                if ma <= mb + 1 {
                    continue;
                }
                let mut w = widths.clone();
                let a = w.iter().position(|&x| x == ma).unwrap();
                w[a] -= 1;
                match w.iter().position(|&x| x == mb) {
                    Some(b) if mb > 0 => w[b] += 1,
                    _ => w.push(1),
                }
                w.retain(|&x| x > 0);
                let y = yield_of_rows(&w, n);
                moves += 1;
                if y >= base {
                    return fail(format!("{s}: moving {ma} -> {mb} gives {y} ≥ {base}"));
                }
            }
        }
    }
    Ok(format!(
        "swap table 1..=64, {moves} element moves on 200 states"
    ))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checks = 0;
    for _ in 0..500 {
        let s = random_state(&mut rng, 6, 60);
        for m in 1..=s.len() {
            let res = max_prob(&s, m).map_err(|e| e.to_string())?;
            let formula = (1..=m)
                .map(|k| {
                    let tail: Rational = s.lambdas()[m - k..].iter().cloned().sum();
                    Rational::new(m as i64, k as i64) * tail
                })
                .min()
                .unwrap();
            let geometric = distribution_from_profile(&res.target).probability_of(m as u64);
            if geometric != formula || res.p_max != formula {
                return fail(format!(
                    "{s}, m = {m}: profile gives {geometric}, formula {formula}"
                ));
            }
            checks += 1;
        }
    }
    Ok(format!("{checks} (state, m) pairs"))
}

fn check_protocol(p: &KrausProtocol, s: &SchmidtVector) -> Result<(), String> {
    if !verify_completeness(p) {
        return fail(format!("{s}: incomplete protocol"));
    }
    simulate_float(p, s, 1e-12)
        .map(|_| ())
        .map_err(|e| format!("{s}: {e}"))
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut yes, mut no) = (0, 0);
    for _ in 0..2_000 {
        let (a, b) = random_pair(&mut rng, 6, 60);
        let nielsen = nielsen_condition(&a, &b);
        if nielsen != prefix_oracle(&a, &b) {
            return fail(format!("{a} -> {b}: oracle disagrees"));
        }
        if a.len() <= 2 && b.len() <= 2 && nielsen != (b.get(0) >= a.get(0)) {
            return fail(format!("{a} -> {b}: closed form disagrees"));
        }
        match colour_transform_nielsen(&a, &b) {
            Ok((d, _)) if nielsen => {
                let q = choose_q(&d);
                let p = kraus_convert(&d, &a, &b, &q).map_err(|e| format!("{a} -> {b}: {e}"))?;
                if p.outcome_count() != q || !verify_completeness(&p) {
                    return fail(format!("{a} -> {b}: wrong outcome count or incomplete"));
                }
                let expected_p = Rational::from_biguint(&q).recip();
                for post in post_states(&p, &a) {
                    let post = post.map_err(|e| e.to_string())?;
                    if post.probability != expected_p || post.coefficients != b.lambdas() {
                        return fail(format!("{a} -> {b}: post-state differs from target"));
                    }
                }
                yes += 1;
            }
            Err(Error::NotConvertible) if !nielsen => no += 1,
            other => return fail(format!("{a} -> {b}: nielsen {nielsen}, got {other:?}")),
        }
    }
    Ok(format!("{yes} converted exactly, {no} refused"))
}

fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..500 {
        let s = random_state(&mut rng, 6, 60);
        let t = random_reachable(&mut rng, &s);
        let profile = profile_of(&t, s.len());
        let d = colour_transform(&s, &profile).map_err(|e| format!("{s} -> {t}: {e}"))?;
        if !verify_row_distinct(&d) {
            return fail(format!("{s} -> {t}: a row repeats a colour"));
        }
        if d.colour_columns().values().any(|cols| cols.len() > 2) {
            return fail(format!("{s} -> {t}: a colour spans three columns"));
        }
        if !verify_colour_conservation(&d, &s) {
            return fail(format!("{s} -> {t}: colour areas changed"));
        }
    }
    Ok("500 reachable pairs".into())
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut records = 0;
    for _ in 0..2_000 {
        let a = random_state(&mut rng, 6, 60);
        let b = random_reachable(&mut rng, &a);
        let (d, recs) = colour_transform_nielsen(&a, &b).map_err(|e| format!("{a} -> {b}: {e}"))?;
        let h = d.heights();
        for rec in &recs {
            let ell = &h[rec.l];
            let mut used = rec.w.clone();
            for ((&rk, x), y) in rec.r.iter().zip(&rec.x).zip(&rec.y) {
                if *y != &h[rk] * x / (ell - &h[rk]) {
                    return fail(format!("{a} -> {b}: Y off its formula"));
                }
                used += y;
            }
            if used > rec.z {
                return fail(format!("{a} -> {b}: ΣY + W = {used} exceeds z = {}", rec.z));
            }
            records += 1;
        }
        let q = choose_q(&d);
        for qq in [q.clone(), q * BigUint::from(3u32)] {
            let report = verify_slice_distinct_at(&d, &qq);
            if !report.is_distinct() {
                return fail(format!(
                    "{a} -> {b}: {} conflicts at Q = {qq}",
                    report.violations.len()
                ));
            }
        }
    }
    Ok(format!("2000 pairs, {records} correction records"))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut count = 0;
    for _ in 0..300 {
        let s = random_state(&mut rng, 6, 60);
        let p = kraus_distill(&canonical_diagram(&s), &s).map_err(|e| e.to_string())?;
        check_protocol(&p, &s)?;
        for m in 1..=s.len() {
            let target = max_prob(&s, m).map_err(|e| e.to_string())?.target;
            let d = colour_transform(&s, &target).map_err(|e| e.to_string())?;
            check_protocol(&kraus_distill(&d, &s).map_err(|e| e.to_string())?, &s)?;
            count += 1;
        }
        let t = random_reachable(&mut rng, &s);
        let (d, _) = colour_transform_nielsen(&s, &t).map_err(|e| e.to_string())?;
        let p = kraus_convert(&d, &s, &t, &choose_q(&d)).map_err(|e| e.to_string())?;
        check_protocol(&p, &s)?;
        count += 2;
    }
    Ok(format!(
        "{count} protocols exact and within 1e-12 in floating point"
    ))
}

fn criterion_8() -> Outcome {
    let a = sv(&[(1, 2), (3, 10), (1, 5)]);
    let res = max_prob(&a, 2).map_err(|e| e.to_string())?;
    let oracle = max_prob_bruteforce(&a, 2);
    if oracle != r(1, 1) || res.p_max != oracle {
        return fail(format!("p_2 of {a}: {} vs oracle {oracle}", res.p_max));
    }
    if res.target.heights() != [r(1, 2), r(1, 2), r(0, 1)] {
        return fail(format!("target {}", res.target));
    }

    let b = sv(&[(7, 10), (1, 5), (1, 10)]);
    let res = max_prob(&b, 2).map_err(|e| e.to_string())?;
    let oracle = max_prob_bruteforce(&b, 2);
    if oracle != r(3, 5) || res.p_max != oracle {
        return fail(format!("p_2 of {b}: {} vs oracle {oracle}", res.p_max));
    }

    // By hand: column 1 ends up with colour 1 below and 1/10 of colour 2
    // above, which shares relative heights with colour 2 in column 2.
    // Moving X = 1/10 needs Y = λ'_2 X / (λ'_1 − λ'_2) from column 2.
    let start = sv(&[(1, 2), (1, 4), (1, 4)]);
    let target = sv(&[(1, 2), (7, 20), (3, 20)]);
    let x = r(7, 20) - r(1, 4);
    let y_hand = r(3, 20) * &x / (r(7, 20) - r(3, 20));
    let (d, recs) = colour_transform_nielsen(&start, &target).map_err(|e| e.to_string())?;
    let y = recs.first().and_then(|rec| rec.y.first()).cloned();
    if y_hand != r(3, 40) || y.as_ref() != Some(&y_hand) {
        return fail(format!("Y_1 = {y:?}, by hand {y_hand}"));
    }
    let q = choose_q(&d);
    let one = BigUint::from(1u32);
    if q != BigUint::from(2u32)
        || !verify_slice_distinct_at(&d, &q).is_distinct()
        || verify_slice_distinct_at(&d, &one).is_distinct()
    {
        return fail(format!("Q = {q}"));
    }
    Ok(
        "p_2 = 1 and 3/5 match exhaustive search; Y_1 = 3/40 and Q = 2 match the hand solution"
            .into(),
    )
}

fn write_state(dir: &std::path::Path, name: &str, lambda: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, format!("{{\"lambda\": {lambda}}}")).unwrap();
    path.to_string_lossy().into_owned()
}

fn criterion_9() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_locc-areas");
    let dir = std::env::temp_dir().join(format!("locc-areas-acceptance-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let a = write_state(&dir, "a.json", r#"["1/2", "1/4", "1/4"]"#);
    let b = write_state(&dir, "b.json", r#"["1/2", "7/20", "3/20"]"#);
    let bad = write_state(&dir, "bad.json", r#"["1/2", "1/4"]"#);
    let protocol = dir.join("p.json").to_string_lossy().into_owned();
    let code = |args: &[&str]| -> Result<i32, String> {
        let out = Command::new(exe)
            .args(args)
            .output()
            .map_err(|e| e.to_string())?;
        Ok(out.status.code().unwrap_or(-1))
    };
    let results = [
        (
            "convert",
            code(&["convert", "--state", &a, "--target", &b, "--out", &protocol])?,
            0,
        ),
        ("verify", code(&["verify", &protocol])?, 0),
        (
            "check (reverse)",
            code(&["check", "--state", &b, "--target", &a])?,
            1,
        ),
        (
            "malformed",
            code(&["check", "--state", &bad, "--target", &a])?,
            2,
        ),
    ];
    let _ = std::fs::remove_dir_all(&dir);
    for (what, got, want) in results {
        if got != want {
            return fail(format!("{what} exited {got}, expected {want}"));
        }
    }
    Ok("convert/verify 0, non-convertible 1, malformed 2".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("optimal yield matches the closed form", criterion_1),
        (
            "moving area off the optimal diagram lowers the yield",
            criterion_2,
        ),
        ("max_prob profile agrees with the min formula", criterion_3),
        ("Nielsen condition and exact conversion", criterion_4),
        ("colouring I", criterion_5),
        ("colouring II corrections", criterion_6),
        ("protocol completeness and float cross-check", criterion_7),
        ("worked examples", criterion_8),
        ("command-line exit codes", criterion_9),
    ];
    let started = Instant::now();
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| fail("panicked"));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({detail}; {secs:.2}s)", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}: {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed in {:.1}s",
        criteria.len() - failures,
        criteria.len(),
        started.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
