mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use cubic_census::algebra::{Fq, FqElem};
use cubic_census::analytic::{
    aut_series, aut_series_direct, c1_formula, c2_formula, extract_constants, fhat_closed_form, ghat, psi_hat,
    zeta_p1,
};
use cubic_census::classify::{
    elm_target, elm_transform_local, smoothness_degree_bound, subspace, ReducibilityClass, ReducibleSet,
    SmoothnessChecker, SubspaceKind,
};
use cubic_census::cli::{run, Cell, Mode, RunConfig, STRICT_RATIO_LIMIT};
use cubic_census::counts::{
    sieve_identity, space_pass, verify_elm_sum_identity, verify_theta_psi_recurrence, Census, ClassTag, SpaceContext,
};
use cubic_census::curvepts::{
    effective_divisor_count, enumerate_divisors, ClosedPoint, Divisor, FiberPoint, Marking, PointSet,
};
use cubic_census::sections::{enumerate_gamma, gamma_act, Section, SectionSpace};
use num_bigint::BigInt;
use num_rational::BigRational as Q;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CAP: u128 = 1 << 30;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn pointset(q: u32, d: u32) -> Arc<PointSet> {
    Arc::new(PointSet::new(&Fq::new(q).unwrap(), d).unwrap())
}

fn ctx(q: u32, l: i64, k: i64, dmax: u32) -> SpaceContext {
    SpaceContext::standalone(&Fq::new(q).unwrap(), l, k, dmax, CAP).unwrap()
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    if t > limit {
        return Err(format!("{what} took {t:?}, limit {limit:?}"));
    }
    Ok(())
}

fn c1_divisors_and_zeta() -> Outcome {
    let start = Instant::now();
    for q in [2u32, 3] {
        let ps = pointset(q, 8);
        let mut eff = vec![0u128; 9];
        eff[0] = 1;
        for i in 0..ps.len() {
            let d = ps.degree(i) as usize;
            for j in d..=8 {
                eff[j] += eff[j - d];
            }
        }
        let target = [1i128, -(q as i128 + 1), q as i128];
        for d in 0..=8u32 {
            let closed = ((q as u128).pow(d + 1) - 1) / (q as u128 - 1);
            ensure!(eff[d as usize] == closed && effective_divisor_count(q as u64, d) == closed, "q={q} d={d} effective");
            let mu: i128 = enumerate_divisors(&ps, d).iter().map(|x| x.mu() as i128).sum();
            ensure!(mu == target.get(d as usize).copied().unwrap_or(0), "q={q} d={d} mobius sum {mu}");
        }
    }
    within(start, Duration::from_secs(1), "suite")?;
    Ok(format!("q in {{2,3}}, d <= 8, {:?}", start.elapsed()))
}

fn small_range_formula(q: i128, l: i64, k: i64, deg: i64) -> i128 {
    if l - 3 * k >= deg {
        q.pow((4 * l - 6 * k + 4 - deg) as u32) - q.pow((3 * l - 3 * k + 3) as u32)
    } else {
        0
    }
}

fn c2_small_range() -> Outcome {
    let start = Instant::now();
    let mut checked = 0;
    for (l, k) in [(1i64, 0i64), (2, 0), (3, 1), (2, 1)] {
        let c = ctx(2, l, k, l as u32);
        for d in (0..=l as u32).flat_map(|e| enumerate_divisors(&c.ps, e)) {
            let deg = d.degree(&c.ps) as i64;
            let got = c.phi_alpha(&d, ClassTag::Xir);
            ensure!(got == small_range_formula(2, l, k, deg), "({l},{k}) {d:?}: {got}");
            checked += 1;
        }
    }
    let rational = ctx(2, 1, 0, 1).phi_alpha(&Divisor::single(0), ClassTag::Xir);
    ensure!(rational == 64, "Phi^xir((1,0), rational point) = {rational}");
    within(start, Duration::from_secs(60), "suite")?;
    Ok(format!("{checked} divisors, Phi^xir((1,0), t) = 64"))
}

fn c3_flagship() -> Outcome {
    let mut detail = vec![];
    for (q, n_max) in [(2u32, 5i64), (3, 3)] {
        let mut census = Census::new(q, n_max, CAP).map_err(|e| e.to_string())?;
        let rows = verify_theta_psi_recurrence(&mut census, n_max).map_err(|e| e.to_string())?;
        ensure!(rows.len() == n_max as usize + 1, "q={q}: {} rows", rows.len());
        let psi = |n: i64| if n < 0 { Q::zero() } else { rows[n as usize].psi.clone() };
        let qq = Q::from_integer(BigInt::from(q));
        for r in &rows {
            let rhs = psi(r.n) - (&qq + Q::one()) * psi(r.n - 1) + &qq * psi(r.n - 2);
            ensure!(r.theta == rhs && r.holds(), "q={q} N={}: theta {} vs {}", r.n, r.theta, rhs);
        }
        let thetas: Vec<String> = rows.iter().map(|r| r.theta.to_string()).collect();
        detail.push(format!("q={q} theta=[{}]", thetas.join(", ")));
    }
    Ok(detail.join("; "))
}

fn sample_instances(n: usize, seed: u64) -> Vec<(u32, i64, i64, usize, FiberPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spaces = [(2u32, 1i64, 0i64), (2, 2, 0), (2, 3, 1), (2, 4, 1), (2, 2, 1), (3, 1, 0), (3, 2, 0), (3, 3, 1)];
    let mut out = vec![];
    while out.len() < n {
        let (q, l, k) = spaces[rng.gen_range(0..spaces.len())];
        let ps = pointset(q, 2);
        let i = rng.gen_range(0..ps.len());
        let fps = ps.fiber_points(i);
        let fp = fps[rng.gen_range(0..fps.len())];
        if elm_target(&SectionSpace::new(ps.field(), l, k), &ps, i, fp).is_some() {
            out.push((q, l, k, i, fp));
        }
    }
    out
}

fn c4_elementary_transform() -> Outcome {
    let start = Instant::now();
    let mut bijections = 0;
    for (q, l, k, i, fp) in sample_instances(20, 2024) {
        let ps = pointset(q, 2);
        let sp = SectionSpace::new(ps.field(), l, k);
        let (target, _, tfp) = elm_target(&sp, &ps, i, fp).ok_or("no target")?;
        let sing = subspace(&sp, &ps, SubspaceKind::Sing, &Marking { assignments: vec![(i, fp)] });
        let van = subspace(&target, &ps, SubspaceKind::Van, &Marking { assignments: vec![(i, tfp)] });
        ensure!(sing.solution_count() == van.solution_count(), "q={q} ({l},{k}) point {i} {fp:?}: rank mismatch");
        if ps.degree(i) == 1 {
            let mut images = vec![];
            for c in sing.solutions() {
                let r = elm_transform_local(&sp, &ps, i, fp, &Section { coeffs: c }).map_err(|e| e.to_string())?;
                ensure!(r.target == target && van.contains(&r.section.coeffs), "image outside Van");
                images.push(target.encode(&r.section.coeffs));
            }
            images.sort();
            images.dedup();
            ensure!(images.len() as u128 == van.solution_count(), "elm_transform_local not a bijection");
            bijections += 1;
        }
    }
    let mut census = Census::new(2, 4, CAP).map_err(|e| e.to_string())?;
    let ps = census.points().clone();
    let quad = Divisor::single(ps.index_of(&ClosedPoint::Finite(vec![1, 1, 1])).ok_or("no degree-2 point")?);
    let mut sums = vec![];
    for (n, d) in [(2, Divisor::single(0)), (4, quad)] {
        let (lhs, rhs) = verify_elm_sum_identity(&mut census, n, &d).map_err(|e| e.to_string())?;
        ensure!(lhs == rhs, "N={n}: {lhs} vs {rhs}");
        sums.push(format!("N={n}: {lhs}"));
    }
    within(start, Duration::from_secs(60), "suite")?;
    Ok(format!("20 ranks equal, {bijections} local bijections; weighted sums {}", sums.join(", ")))
}

fn c5_sieve() -> Outcome {
    let mut n = 0;
    for (l, k) in [(2i64, 0i64), (3, 1)] {
        let c = ctx(2, l, k, 2);
        for d in (0..=2).flat_map(|e| enumerate_divisors(&c.ps, e)) {
            let (direct, triple) = sieve_identity(&c, &d);
            ensure!(direct == triple, "({l},{k}) {d:?}: {direct} vs {triple}");
            n += 1;
        }
    }
    Ok(format!("{n} divisors on (2,0) and (3,1)"))
}

fn c6_generating_functions() -> Outcome {
    let start = Instant::now();
    for q in [2u32, 3, 4] {
        let f = fhat_closed_form(q).expand(15).map_err(|e| e.to_string())?;
        for n in 0..=15 {
            ensure!(f.coeff(n) == psi_hat(q, n as i64), "q={q} T^{n}");
        }
        let aut = aut_series(q).expand(20).map_err(|e| e.to_string())?;
        ensure!(aut == aut_series_direct(q, 20), "aut series q={q}");
        let c = extract_constants(q).map_err(|e| e.to_string())?;
        ensure!(c.c1 == c1_formula(q) && c.c2 == c2_formula(q), "constants q={q}");
        let qq = Q::from_integer(BigInt::from(q));
        // 1 / (q^-1 (q-1) Z(q^-3))
        let z = zeta_p1(q).eval(&(Q::one() / (&qq * &qq * &qq)));
        ensure!(c.c1 == ((&qq - Q::one()) / &qq * z).recip(), "c1 zeta form q={q}");
        ensure!(c.reconstruct(q) == ghat(q), "partial fractions q={q}");
    }
    let c = extract_constants(2).map_err(|e| e.to_string())?;
    ensure!(c.c1 == rat(21, 16), "c1 = {}", c.c1);
    ensure!(c.c2 == [rat(9, 8), rat(9, 2), rat(6, 1)], "c2 = {:?}", c.c2);
    within(start, Duration::from_secs(1), "suite")?;
    Ok(format!("q=2: c1 = {}, c2 = ({}, {}, {}), {:?}", c.c1, c.c2[0], c.c2[1], c.c2[2], start.elapsed()))
}

fn c7_cover_census() -> Outcome {
    let mut census = Census::new(2, 4, CAP).map_err(|e| e.to_string())?;
    let z = census.cover_census(0).map_err(|e| e.to_string())?;
    ensure!(z.theta == rat(1, 3) && z.cov3 == 1 && z.c3 == 1, "q=2 N=0: {z:?}");
    for n in 0..=4 {
        let c = census.cover_census(n).map_err(|e| e.to_string())?;
        let rhs = &c.theta + rat(2, 3) * Q::from_integer(BigInt::from(c.c3));
        ensure!(c.insep == 0 && Q::from_integer(BigInt::from(c.cov3)) == rhs, "q=2 N={n}: {c:?}");
    }
    let mut c3 = Census::new(3, 2, CAP).map_err(|e| e.to_string())?;
    let zero = c3.cover_census(0).map_err(|e| e.to_string())?;
    ensure!(zero.insep == 0 && zero.consistent(), "q=3 N=0: {zero:?}");
    let two = c3.cover_census(2).map_err(|e| e.to_string())?;
    ensure!(two.insep == 1 && two.cov3 == two.orbits - 1 && two.consistent(), "q=3 N=2: {two:?}");
    Ok(format!(
        "q=2 N<=4 Cov3 = Theta + (2/3) c3, no inseparable; q=3: Frobenius cover found at N=2 (orbits {}, cov3 {}), \
         none at N=0 since every element of F_3 is a cube",
        two.orbits, two.cov3
    ))
}

fn smoothness_spaces_q2() -> Vec<(i64, i64)> {
    let mut out = vec![];
    for l in 0..=12i64 {
        for k in 0..=l {
            let dim: i64 = (0..4).map(|i| (l - i * k + 1).max(0)).sum();
            if dim <= 12 {
                out.push((l, k));
            }
        }
    }
    out
}

fn check_smoothness(q: u32, l: i64, k: i64, sections: &[Vec<FqElem>]) -> Result<(), String> {
    let sp = SectionSpace::new(&Fq::new(q).unwrap(), l, k);
    let bound = smoothness_degree_bound(&sp);
    let ps = pointset(q, bound);
    let sm = SmoothnessChecker::new(&sp, ps.clone()).map_err(|e| e.to_string())?;
    for c in sections {
        if sp.is_zero(c) {
            continue;
        }
        ensure!(sm.smooth(c) == common::smooth_oracle(&sp, &ps, c, bound), "q={q} ({l},{k}) {c:?}");
    }
    Ok(())
}

fn c8_property_suites() -> Outcome {
    let mut parts = vec![];
    // r and a are multiplicative over disjoint divisors
    let ps = pointset(2, 3);
    let sp = SectionSpace::new(ps.field(), 2, 0);
    let divs: Vec<Divisor> = (0..=2).flat_map(|d| enumerate_divisors(&ps, d)).collect();
    for idx in (0..sp.size() as u64).step_by(13) {
        let c = sp.decode(idx).coeffs;
        for d1 in &divs {
            for d2 in divs.iter().filter(|d2| d2.points.iter().all(|p| !d1.contains(*p))) {
                let mut pts = [d1.points.clone(), d2.points.clone()].concat();
                pts.sort();
                let sum = Divisor { points: pts };
                ensure!(sp.r_d(&c, &ps, &sum) == sp.r_d(&c, &ps, d1) * sp.r_d(&c, &ps, d2), "r not multiplicative");
                ensure!(sp.a_d(&c, &ps, &sum) == sp.a_d(&c, &ps, d1) * sp.a_d(&c, &ps, d2), "a not multiplicative");
            }
        }
    }
    parts.push("multiplicativity");

    for (q, l, k) in [(2u32, 1i64, 0i64), (2, 3, 1), (3, 1, 0)] {
        let c = ctx(q, l, k, 3);
        for d in (0..=3).flat_map(|e| enumerate_divisors(&c.ps, e)) {
            for alpha in [ClassTag::Ir, ClassTag::Xir, ClassTag::All] {
                let subs = d.subdivisors();
                let r: i128 = subs.iter().map(|d1| c.phi_alpha(d1, alpha)).sum();
                let phi: i128 = subs.iter().map(|d1| d.minus(d1).mu() as i128 * c.r_alpha(d1, alpha)).sum();
                ensure!(r == c.r_alpha(&d, alpha) && phi == c.phi_alpha(&d, alpha), "Mobius q={q} ({l},{k}) {d:?}");
            }
        }
    }
    parts.push("Mobius round-trip");

    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (q, l, k) in [(2u32, 2i64, 0i64), (2, 3, 1), (3, 1, 0), (2, 4, 2)] {
        let f = Fq::new(q).unwrap();
        let sp = SectionSpace::new(&f, l, k);
        let ps = pointset(q, smoothness_degree_bound(&sp));
        let red = ReducibleSet::build(&sp, CAP).map_err(|e| e.to_string())?;
        let sm = SmoothnessChecker::new(&sp, ps.clone()).map_err(|e| e.to_string())?;
        let group = enumerate_gamma(&f, k);
        for c in common::all_sections(&sp).iter().step_by(5) {
            let s = Section { coeffs: c.clone() };
            let gs = gamma_act(&sp, &group[rng.gen_range(0..group.len())], &s).map_err(|e| e.to_string())?;
            let (i0, i1) = (sp.encode(c), sp.encode(&gs.coeffs));
            ensure!(red.contains(i0, c) == red.contains(i1, &gs.coeffs), "reducibility moved");
            let horizontal = |cl| matches!(cl, ReducibilityClass::Irreducible);
            ensure!(horizontal(red.class_of(i0, c)) == horizontal(red.class_of(i1, &gs.coeffs)), "class moved");
            if k >= 1 {
                ensure!(red.class_of(i0, c) == red.class_of(i1, &gs.coeffs), "class moved, k={k}");
            }
            ensure!(sm.smooth(c) == sm.smooth(&gs.coeffs), "smoothness moved");
            let (d0, d1) = (sp.discriminant(&s), sp.discriminant(&gs));
            ensure!(d0.is_zero() == d1.is_zero(), "Delta vanishing moved");
            if !d0.is_zero() {
                ensure!(ps.factor(&d0).unwrap().1 == ps.factor(&d1).unwrap().1, "Delta divisor moved");
            }
        }
    }
    parts.push("Gamma-invariance");

    let start = Instant::now();
    let q2 = smoothness_spaces_q2();
    for &(l, k) in &q2 {
        let sp = SectionSpace::new(&Fq::new(2).unwrap(), l, k);
        check_smoothness(2, l, k, &common::all_sections(&sp))?;
    }
    for (l, k) in [(0i64, 0i64), (1, 0), (1, 1), (2, 1), (2, 2)] {
        let sp = SectionSpace::new(&Fq::new(3).unwrap(), l, k);
        check_smoothness(3, l, k, &common::all_sections(&sp))?;
    }
    // the naive oracle sweeps every fiber point, so the two large q=3 spaces are sampled
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (l, k, n) in [(3i64, 1i64, 1500usize), (2, 0, 24)] {
        let sp = SectionSpace::new(&Fq::new(3).unwrap(), l, k);
        let sample: Vec<Vec<FqElem>> = (0..n).map(|_| sp.decode(rng.gen_range(0..sp.size() as u64)).coeffs).collect();
        check_smoothness(3, l, k, &sample)?;
    }
    let smooth_note = format!(
        "smoothness oracle exhaustive on all {} q=2 spaces of dim <= 12 and q=3 spaces with l <= 2 except (2,0), \
         sampled on q=3 (3,1) x1500 and (2,0) x24, {:.1?}",
        q2.len(),
        start.elapsed()
    );

    for (q, l, k, dmax) in [(2u32, 2i64, 0i64, 3usize), (2, 3, 1, 3), (3, 1, 0, 3)] {
        let c = Arc::new(ctx(q, l, k, dmax as u32));
        let pass = |threads: usize| {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let c = c.clone();
            pool.install(move || space_pass(&c, dmax))
        };
        let one = pass(1);
        ensure!(one.zero + one.xr + one.sr + one.ir == one.size, "partition q={q} ({l},{k})");
        let (mut zero, mut xr, mut sr, mut ir) = (0u128, 0u128, 0u128, 0u128);
        for (idx, s) in common::all_sections(&c.space).iter().enumerate() {
            match c.red.class_of(idx as u64, s) {
                ReducibilityClass::Zero => zero += 1,
                ReducibilityClass::XReducible => xr += 1,
                ReducibilityClass::SpeciallyReducible => sr += 1,
                ReducibilityClass::Irreducible => ir += 1,
            }
        }
        ensure!((zero, xr, sr, ir) == (one.zero, one.xr, one.sr, one.ir), "tally q={q} ({l},{k})");
        ensure!(one == pass(4) && one == pass(3), "worker count changed the tally q={q} ({l},{k})");
    }
    parts.push("z/xr/sr/ir partition");
    parts.push("worker-count determinism");
    Ok(format!("{}; {smooth_note}", parts.join(", ")))
}

fn c9_monitoring() -> Outcome {
    let mut detail = vec![];
    for (q, n_max) in [(2u32, 5i64), (3, 3)] {
        let mut cfg = RunConfig::new(q, n_max, Mode::Compare);
        cfg.strict = true;
        let report = run(&cfg).map_err(|e| e.to_string())?;
        let mut worst = 0f64;
        let mut ratios = vec![];
        for row in &report.rows {
            let get = |key: &str| row.iter().find(|(k, _)| *k == key).map(|(_, c)| c.clone());
            ensure!(get("status") == Some(Cell::Text("ok".into())), "q={q} row {row:?}");
            ensure!(get("recurrence_residual") == Some(Cell::Rat(Q::zero())), "nonzero recurrence residual");
            if let Some(Cell::Float(r)) = get("ratio_approx") {
                worst = worst.max(r);
                ratios.push(format!("{r:.3}"));
            }
        }
        let v = report.verdicts.first().ok_or("no verdict")?;
        ensure!(v.pass == (worst <= STRICT_RATIO_LIMIT), "verdict disagrees with ratios");
        ensure!(report.exit_code == i32::from(worst > STRICT_RATIO_LIMIT), "strict exit code {}", report.exit_code);
        detail.push(format!("q={q} ratios [{}] max {worst:.3}", ratios.join(", ")));
    }
    Ok(format!("{} (strict limit {STRICT_RATIO_LIMIT})", detail.join("; ")))
}

// Written to the stderr handle directly so the lines survive test output capture.
fn report(line: String) {
    use std::io::Write;
    let _ = writeln!(std::io::stderr(), "{line}");
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("divisor/zeta suite", c1_divisors_and_zeta),
        ("small-range exact formula", c2_small_range),
        ("Theta-Psi recurrence", c3_flagship),
        ("elementary-transform identities", c4_elementary_transform),
        ("sieve decomposition", c5_sieve),
        ("generating-function suite", c6_generating_functions),
        ("cover census consistency", c7_cover_census),
        ("property suites", c8_property_suites),
        ("monitoring", c9_monitoring),
    ];
    report(String::new());
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panic: {}", msg.unwrap_or_default()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => report(format!("PASS {} {name} [{secs:.2}s]: {detail}", i + 1)),
            Err(why) => {
                report(format!("FAIL {} {name} [{secs:.2}s]: {why}", i + 1));
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria {failed:?}");
}
