//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use macrospin::classical::delta_limit_trend;
use macrospin::cli::{classical_compare, ClassicalCompareArgs, PolicyArg, ZArg};
use macrospin::lg::{
    coarse_lg_with, geometric_grid, k_analytic, k_exact, k_exact_with, scan_angles, violation_boundary, LgProtocol,
};
use macrospin::measurement::{
    disturbance_metric, make_partition, two_time_correlation_with, DichotomicObservable, PartitionPolicy, Propagator,
};
use macrospin::sphere::integrate_sphere;
use macrospin::spin::{build_jx, check_backends, matrix_exp_oracle, rotation_x_with, Hamiltonian, RotationBackend, SpinLength};
use macrospin::states::{
    coherent_vector, husimi_q, maximally_mixed, mixture_to_density, rotate_direction, CoherentMixture,
    CoherentStateParams, DensityMatrix,
};
use macrospin::spin::ComplexOperator;
use macrospin::C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;
type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn sj(two_j: u32) -> SpinLength {
    SpinLength::from_two_j(two_j)
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn e<T: std::fmt::Display>(x: T) -> String {
    x.to_string()
}

fn crit1() -> Outcome {
    let j = sj(1);
    let dt = PI / 4.0;
    let p = LgProtocol::new(Hamiltonian::precession(j, 1.0), dt, DichotomicObservable::sign_of_m(j), maximally_mixed(j))
        .map_err(e)?;
    let k = k_exact(&p).map_err(e)?.k;
    let err = (k - 2.0 * 2f64.sqrt()).abs();
    check(err <= 1e-9, format!("K = {k:.12}, |K - 2 sqrt 2| = {err:.1e}"))
}

fn crit2() -> Outcome {
    let p = LgProtocol::parity_mixed(sj(999), 1.0, 1.054).map_err(e)?;
    let k = k_exact(&p).map_err(e)?.k;
    check((k - 2.481).abs() <= 1e-3, format!("K(j=499.5, x=1.054) = {k:.6}"))
}

fn crit3() -> Outcome {
    let k = k_analytic(1.054);
    let root = violation_boundary(1.0, 2.0).ok_or("no root of K - 2 in (1, 2)")?;
    check(
        (k - 2.481).abs() <= 5e-4 && (root - 1.656).abs() <= 1e-2,
        format!("k_analytic(1.054) = {k:.6}, boundary x = {root:.6}"),
    )
}

fn crit4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst: f64 = 0.0;
    for two_j in [3u32, 21, 999] {
        let j = sj(two_j);
        let n = j.dim() as f64;
        let prop = Propagator::new(Hamiltonian::precession(j, 1.0)).map_err(e)?;
        let rho = maximally_mixed(j);
        let obs = DichotomicObservable::parity(j);
        for _ in 0..20 {
            let a: f64 = rng.random_range(1e-3..PI - 1e-3);
            let c = two_time_correlation_with(&prop, &rho, &obs, 0.0, a).map_err(e)?.c;
            let expect = (n * a).sin() / (n * a.sin());
            worst = worst.max((c - expect).abs());
        }
    }
    check(worst <= 1e-9, format!("max |C - sin(nx)/(n sin x)| = {worst:.1e} over 60 draws"))
}

fn crit5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut lines = Vec::new();
    let mut ok = true;
    for (two_j, n_grid, n_rand) in [(21u32, 57, 20), (199, 29, 10), (999, 15, 5)] {
        let j = sj(two_j);
        let prop = Propagator::new(Hamiltonian::precession(j, 1.0)).map_err(e)?;
        let mut xs: Vec<f64> = (0..n_grid).map(|i| 0.2 + 1.4 * i as f64 / (n_grid - 1) as f64).collect();
        xs.extend((0..n_rand).map(|_| rng.random_range(0.2..=1.6)));
        let mut worst: f64 = 0.0;
        for x in xs {
            let dt = x / j.dim() as f64;
            let p = LgProtocol::new(*prop.hamiltonian(), dt, DichotomicObservable::parity(j), maximally_mixed(j))
                .map_err(e)?;
            let k = k_exact_with(&prop, &p).map_err(e)?.k;
            worst = worst.max((k - k_analytic(x)).abs());
        }
        let bound = 5.0 / j.dim() as f64;
        ok &= worst <= bound;
        lines.push(format!("j={j}: {worst:.2e} <= {bound:.2e}"));
    }
    check(ok, lines.join("; "))
}

fn crit6() -> Outcome {
    let mut worst_oracle: f64 = 0.0;
    for two_j in 1..=20u32 {
        let j = sj(two_j);
        let jx = build_jx(j);
        for &a in &[0.3, -1.1, PI / 2.0, 2.9, 7.4] {
            let reference = matrix_exp_oracle(&jx, C64::new(0.0, -a)).map_err(e)?;
            for b in [RotationBackend::Eigen, RotationBackend::Wigner] {
                let u = rotation_x_with(j, a, b).map_err(e)?;
                worst_oracle = worst_oracle.max(u.max_abs_diff(&reference));
            }
        }
    }
    let mut worst_pair: f64 = 0.0;
    for two_j in [41u32, 100, 199, 256, 333, 400] {
        for &a in &[0.01, 0.7, PI / 2.0, 2.5, PI] {
            worst_pair = worst_pair.max(check_backends(sj(two_j), a, 1e-9).map_err(e)?);
        }
    }
    check(
        worst_oracle <= 1e-10 && worst_pair <= 1e-9,
        format!("vs oracle (j <= 10): {worst_oracle:.1e}; eigen vs wigner (j <= 200): {worst_pair:.1e}"),
    )
}

fn crit7() -> Outcome {
    let args = ClassicalCompareArgs {
        two_j: 1000,
        delta_m: 100,
        n_samples: 100_000,
        seed: 1,
        times: 20,
        omega: 1.0,
        policy: PolicyArg::Ragged,
        z_convention: ZArg::SpinLength,
        out: None,
        summary: None,
    };
    let (_, s) = classical_compare(&args).map_err(e)?;
    check(
        s.median_tvd_ensemble <= 0.02 && s.large_tvd_rows == s.large_tvd_rows_near_border,
        format!(
            "median TVD ensemble = {:.4} (quadrature {:.4}, single spin {:.4}); rows > 0.1: {}, near border: {}",
            s.median_tvd_ensemble,
            s.median_tvd_quadrature,
            s.median_tvd_single_spin,
            s.large_tvd_rows,
            s.large_tvd_rows_near_border
        ),
    )
}

fn crit8() -> Outcome {
    let j = sj(400);
    let angles = geometric_grid(1e-4, PI / 2.0, 50);
    let part = make_partition(j, 45, PartitionPolicy::Ragged).map_err(e)?;
    let prop = Propagator::new(Hamiltonian::precession(j, 1.0)).map_err(e)?;
    let mut slot_max = f64::NEG_INFINITY;
    for &a in &angles {
        slot_max = slot_max.max(coarse_lg_with(&prop, &part, a).map_err(e)?.k);
    }
    let parity_max = scan_angles(j, &DichotomicObservable::parity(j), &angles)
        .map_err(e)?
        .iter()
        .map(|r| r.k)
        .fold(f64::NEG_INFINITY, f64::max);
    check(
        slot_max <= 2.05 && parity_max >= 2.3,
        format!("50 log-spaced angles in [1e-4, pi/2]: max K slots(dm=45) = {slot_max:.4}; max K parity = {parity_max:.4}"),
    )
}

fn random_state(j: SpinLength, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let n = j.dim();
    let rank = rng.random_range(1..=3.min(n));
    let mut w: Vec<f64> = (0..rank).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let mut m = ComplexOperator::zeros(n);
    for wk in w {
        let mut v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= norm);
        *m.as_array_mut() += ComplexOperator::outer(&v, wk).as_array();
    }
    let a = m.as_array().clone();
    let herm = (&a + &a.t().mapv(|z| z.conj())).mapv(|z| z * 0.5);
    let tr: f64 = herm.diag().iter().map(|z| z.re).sum();
    DensityMatrix::new(j, ComplexOperator::from_array(herm.mapv(|z| z / tr))).expect("valid state")
}

fn crit9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut min_q = f64::INFINITY;
    let mut norm_err: f64 = 0.0;
    let mut cov_err: f64 = 0.0;
    for _ in 0..50 {
        let j = sj(rng.random_range(1..=100));
        let rho = random_state(j, &mut rng);
        for _ in 0..10_000 {
            let t = rng.random_range(-1.0f64..=1.0).acos();
            let p = rng.random_range(0.0..2.0 * PI);
            min_q = min_q.min(husimi_q(&rho, t, p).map_err(e)?);
        }
        let total = integrate_sphere(j, |t, p| husimi_q(&rho, t, p).expect("finite angles"));
        norm_err = norm_err.max((total - 1.0).abs());

        let a = rng.random_range(-PI..PI);
        let moved = rho.evolve(&rotation_x_with(j, a, RotationBackend::Eigen).map_err(e)?);
        for _ in 0..20 {
            let t = rng.random_range(-1.0f64..=1.0).acos();
            let p = rng.random_range(0.0..2.0 * PI);
            let dir = CoherentStateParams::new(j, t, p).map_err(e)?.direction();
            let back = CoherentStateParams::from_direction(j, rotate_direction(dir, -a)).map_err(e)?;
            let lhs = husimi_q(&moved, t, p).map_err(e)?;
            let rhs = husimi_q(&rho, back.theta, back.phi).map_err(e)?;
            cov_err = cov_err.max((lhs - rhs).abs());
        }
    }
    let mut point_err: f64 = 0.0;
    for _ in 0..20 {
        let j = sj(rng.random_range(1..=100));
        let comps: Vec<(f64, CoherentStateParams)> = (0..rng.random_range(1..=4))
            .map(|_| {
                let t = rng.random_range(0.0..PI);
                let p = rng.random_range(0.0..2.0 * PI);
                (rng.random_range(0.1..1.0), CoherentStateParams::new(j, t, p).expect("valid angles"))
            })
            .collect();
        let mix = CoherentMixture::normalized(comps).map_err(e)?;
        let rho = mixture_to_density(&mix);
        for _ in 0..50 {
            let t = rng.random_range(0.0..PI);
            let p = rng.random_range(0.0..2.0 * PI);
            point_err = point_err.max((mix.q_from_kernel(t, p) - husimi_q(&rho, t, p).map_err(e)?).abs());
        }
        let single = mix.components()[0].1;
        let pure = DensityMatrix::pure(j, &coherent_vector(&single)).map_err(e)?;
        let peak = husimi_q(&pure, single.theta, single.phi).map_err(e)?;
        point_err = point_err.max((peak - j.dim() as f64 / (4.0 * PI)).abs());
    }
    check(
        min_q >= 0.0 && norm_err <= 1e-6 && point_err <= 1e-10 && cov_err <= 1e-9,
        format!("min g = {min_q:.2e}; |int g - 1| = {norm_err:.1e}; kernel vs overlap = {point_err:.1e}; rotation = {cov_err:.1e}"),
    )
}

fn crit10() -> Outcome {
    let j = sj(400);
    let rho = maximally_mixed(j);
    let floor = (3.0 * j.j().sqrt()).ceil() as usize;
    let mut rows = Vec::new();
    for dm in floor..=j.dim() {
        let part = make_partition(j, dm, PartitionPolicy::Ragged).map_err(e)?;
        rows.push((dm, part.len(), disturbance_metric(&rho, &part).map_err(e)?.average));
    }
    let rises: Vec<(usize, f64)> =
        rows.windows(2).filter(|w| w[1].2 > w[0].2 + 1e-12).map(|w| (w[1].0, w[1].2 - w[0].2)).collect();
    let worst_rise = rises.iter().map(|r| r.1).fold(0.0, f64::max);
    let over: Vec<usize> =
        rows.iter().filter(|&&(dm, _, d)| d > 5.0 * j.j().sqrt() / dm as f64).map(|r| r.0).collect();
    let steps: Vec<String> = rows
        .iter()
        .filter(|r| [floor, 50, 75, 100, 134, 200].contains(&r.0))
        .map(|(dm, ns, d)| format!("{dm}({ns} slots):{d:.4}"))
        .collect();
    check(
        rises.is_empty() && over.is_empty(),
        format!(
            "dm {floor}..={}: {} increases (largest +{worst_rise:.1e}), bound exceeded at {:?}; D = {}",
            j.dim(),
            rises.len(),
            over,
            steps.join(" ")
        ),
    )
}

fn crit11() -> Outcome {
    let js = [sj(200), sj(800), sj(3200)];
    let fast = delta_limit_trend(&js, 0.75, 1.0).map_err(e)?;
    let linear = delta_limit_trend(&js, 1.0, 1.0).map_err(e)?;
    let slow = delta_limit_trend(&js, 0.5, 1.0).map_err(e)?;
    let m = |v: &[macrospin::classical::TrendPoint]| v.iter().map(|p| p.modal_mass).collect::<Vec<f64>>();
    let (mf, ms) = (m(&fast), m(&slow));
    let rising = mf.windows(2).all(|w| w[1] > w[0]) && 1.0 - mf[2] < 1e-3;
    let constant = linear.windows(2).all(|w| w[0].slot_count == w[1].slot_count);
    let spread = ms.iter().copied().fold(0.0, f64::max) - ms.iter().copied().fold(1.0, f64::min);
    let bounded = ms.iter().all(|&x| x < 0.95) && spread < 0.05;
    let counts: Vec<usize> = linear.iter().map(|p| p.slot_count).collect();
    check(
        rising && constant && bounded,
        format!("alpha=0.75 modal {mf:.4?}; alpha=1 slots {counts:?}; alpha=0.5 modal {ms:.4?}"),
    )
}

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "spin-1/2 LG violation", Duration::from_secs(1), crit1),
        (2, "large-spin LG violation", Duration::from_secs(60), crit2),
        (3, "analytic K and boundary", Duration::from_secs(1), crit3),
        (4, "parity correlation formula", Duration::from_secs(60), crit4),
        (5, "exact K converges to analytic K", Duration::from_secs(300), crit5),
        (6, "rotation kernel backends", Duration::from_secs(60), crit6),
        (7, "coarse-graining classicality", Duration::from_secs(300), crit7),
        (8, "coarse-grained macrorealism", Duration::from_secs(300), crit8),
        (9, "Q-function suite", Duration::from_secs(120), crit9),
        (10, "disturbance scaling", Duration::from_secs(120), crit10),
        (11, "delta-limit trends", Duration::from_secs(120), crit11),
    ];
    let filter: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (id, name, limit, f) in criteria {
        if !filter.is_empty() && !filter.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let outcome = f();
        let took = start.elapsed();
        let (ok, detail) = match outcome {
            Ok(d) if took <= limit => (true, d),
            Ok(d) => (false, format!("{d}; over time limit {limit:?}")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!(
            "criterion {id:>2} {} {name} [{:.2}s]: {detail}",
            if ok { "PASS" } else { "FAIL" },
            took.as_secs_f64()
        );
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
