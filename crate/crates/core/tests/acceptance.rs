//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.
//!
//! Oracles (closed forms, direct convolution, quadrature) are computed here,
//! independently of the library.

use std::f64::consts::{LN_2, TAU};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::Instant;

use haarlab::distortion::DistortionSpec;
use haarlab::fourier::{convolve_by_quadrature, FourierDensity};
use haarlab::group::{builtin_group, FiniteGroup, GroupFamily};
use haarlab::lab::{decay_bound_check, detect_obstruction, one_bit_floor, run_series, run_series_fourier, Verdict};
use haarlab::measure::{
    compensation_identity_residual, divergence, divergence_to_uniform, total_variation, GroupDistribution,
};
use haarlab::rd::{blahut_arimoto, sandwich_check, uniform_rate_at, uniform_rd_point, BaOptions, BetaGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Collects failed sub-checks and a short summary.
#[derive(Default)]
struct Report {
    failures: Vec<String>,
    notes: Vec<String>,
}

impl Report {
    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        if !ok && self.failures.len() < 8 {
            self.failures.push(what());
        } else if !ok {
            self.failures.push(String::new());
        }
    }

    fn note(&mut self, s: impl Into<String>) {
        self.notes.push(s.into());
    }
}

fn group(spec: &str) -> Arc<FiniteGroup> {
    builtin_group(spec.parse::<GroupFamily>().unwrap()).unwrap().0
}

fn dist(g: &Arc<FiniteGroup>, mass: Vec<f64>) -> GroupDistribution {
    GroupDistribution::new(g.clone(), mass).unwrap()
}

fn random_mass(rng: &mut ChaCha8Rng, n: usize, full: bool) -> Vec<f64> {
    let power = [1, 2, 4][rng.gen_range(0..3)];
    let mut m: Vec<f64> = (0..n)
        .map(|_| rng.gen::<f64>().powi(power) + if full { 1e-4 } else { 0.0 })
        .collect();
    if !full {
        for _ in 0..rng.gen_range(0..n) {
            m[rng.gen_range(0..n)] = 0.0;
        }
        if m.iter().all(|&v| v == 0.0) {
            m[rng.gen_range(0..n)] = 1.0;
        }
    }
    let s: f64 = m.iter().sum();
    m.iter().map(|v| v / s).collect()
}

fn oracle_convolve(g: &FiniteGroup, p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len()];
    for a in 0..p.len() {
        for b in 0..q.len() {
            out[g.mul(a, b)] += p[a] * q[b];
        }
    }
    out
}

fn oracle_kl(p: &[f64], q: &[f64]) -> f64 {
    p.iter()
        .zip(q)
        .filter(|(x, _)| **x > 0.0)
        .map(|(x, y)| x * (x / y).ln())
        .sum()
}

fn oracle_kl_uniform(p: &[f64]) -> f64 {
    oracle_kl(p, &vec![1.0 / p.len() as f64; p.len()])
}

fn cosine_profile(m: usize) -> Vec<f64> {
    (0..m).map(|k| 2.0 - 2.0 * (TAU * k as f64 / m as f64).cos()).collect()
}

/// `(δ, R)` of the uniform source from the partition function.
fn oracle_uniform_point(profile: &[f64], beta: f64) -> (f64, f64) {
    let w: Vec<f64> = profile.iter().map(|d| (beta * d).exp()).collect();
    let z = w.iter().sum::<f64>() / profile.len() as f64;
    let delta = profile.iter().zip(&w).map(|(d, w)| d * w).sum::<f64>() / w.iter().sum::<f64>();
    (delta, beta * delta - z.ln())
}

/// `e^{-x} I_n(x)` from the periodic integral, trapezoid rule.
fn oracle_bessel_scaled(n: u32, x: f64) -> f64 {
    let m = 2048;
    (0..m)
        .map(|j| {
            let t = TAU * j as f64 / m as f64;
            (x * (t.cos() - 1.0)).exp() * (n as f64 * t).cos()
        })
        .sum::<f64>()
        / m as f64
}

fn binary_entropy(d: f64) -> f64 {
    if d <= 0.0 || d >= 1.0 {
        return 0.0;
    }
    -d * d.ln() - (1.0 - d) * (1.0 - d).ln()
}

/// All built-in groups up to the given order.
fn groups_up_to(max: usize) -> Vec<String> {
    let mut v: Vec<String> = (2..=max).map(|n| format!("cyclic:{n}")).collect();
    v.extend((3..=max / 2).map(|n| format!("dihedral:{n}")));
    v.push("symmetric:3".into());
    if max >= 24 {
        v.push("symmetric:4".into());
        v.push("cube".into());
    }
    v
}

fn c1_so2_endpoints(r: &mut Report) {
    let so2 = DistortionSpec::so2();
    let p = uniform_rd_point(&so2, 0.0).unwrap();
    r.check((p.delta - 2.0).abs() <= 1e-12, || format!("delta(0) = {}", p.delta));
    r.check(p.rate.abs() <= 1e-12, || format!("R(0) = {}", p.rate));
    r.check((so2.d_max() - 4.0).abs() <= 1e-12, || {
        format!("d_max = {}", so2.d_max())
    });
    r.check(so2.d_crit() == 2.0, || format!("d_crit = {}", so2.d_crit()));
    r.note(format!("delta(0)={} R(0)={} d_max={}", p.delta, p.rate, so2.d_max()));
}

/// Sup over the slope grid of `|R_M(δ) − R_SO2(δ)|` at the cyclic curve's `δ`.
fn cyclic_vs_circle_gap(m: usize, betas: &[f64]) -> f64 {
    let so2 = DistortionSpec::so2();
    let profile = cosine_profile(m);
    betas
        .iter()
        .map(|&b| {
            let (delta, rate) = oracle_uniform_point(&profile, b);
            (rate - uniform_rate_at(&so2, delta)).abs()
        })
        .fold(0.0, f64::max)
}

fn c2_bessel_vs_ba(r: &mut Report) {
    let start = Instant::now();
    let betas = BetaGrid {
        min: -20.0,
        max: -0.002,
        count: 40,
        log: true,
    }
    .values();
    r.check(
        betas.len() == 40 && betas.iter().all(|&b| (-20.0..0.0).contains(&b)),
        || "bad grid".into(),
    );
    let g = group("cyclic:64");
    let spec = DistortionSpec::cosine(g.clone()).unwrap();
    let u = GroupDistribution::uniform(g);
    let profile = cosine_profile(64);
    let mut worst: f64 = 0.0;
    for &b in &betas {
        let sol = blahut_arimoto(&u, &spec, b, &BaOptions::default()).unwrap();
        let (delta, rate) = oracle_uniform_point(&profile, b);
        let err = (sol.point.delta - delta).abs().max((sol.point.rate - rate).abs());
        worst = worst.max(err);
        r.check(err <= 1e-8, || format!("beta {b}: BA off by {err:.3e}"));
    }
    // library circle curve against the integral form of I0, I1
    let so2 = DistortionSpec::so2();
    for &b in &betas {
        let x = -2.0 * b;
        let (i0, i1) = (oracle_bessel_scaled(0, x), oracle_bessel_scaled(1, x));
        let want_delta = 2.0 - 2.0 * i1 / i0;
        let want_rate = b * want_delta - (2.0 * b + x + i0.ln());
        let p = uniform_rd_point(&so2, b).unwrap();
        r.check(
            (p.delta - want_delta).abs() <= 1e-10 && (p.rate - want_rate).abs() <= 1e-10,
            || {
                format!(
                    "circle point at beta {b}: ({}, {}) vs ({want_delta}, {want_rate})",
                    p.delta, p.rate
                )
            },
        );
    }
    let (gap64, gap128) = (cyclic_vs_circle_gap(64, &betas), cyclic_vs_circle_gap(128, &betas));
    r.check(gap64 <= 2e-3, || format!("cyclic(64) vs circle gap {gap64:.3e}"));
    // below this both gaps are rounding noise and a ratio means nothing
    const RESOLUTION: f64 = 1e-12;
    r.check(gap128 <= gap64 / 4.0 || gap64 <= RESOLUTION, || {
        format!("no 4x shrink: gap64 {gap64:.3e}, gap128 {gap128:.3e}")
    });
    let (g8, g16, g32) = (
        cyclic_vs_circle_gap(8, &betas),
        cyclic_vs_circle_gap(16, &betas),
        cyclic_vs_circle_gap(32, &betas),
    );
    r.check(g16 <= g8 / 4.0 && g32 <= g16 / 4.0, || {
        format!("coarse gaps {g8:.3e} {g16:.3e} {g32:.3e}")
    });
    let secs = start.elapsed().as_secs_f64();
    r.check(secs < 10.0, || format!("took {secs:.1}s"));
    r.note(format!(
        "BA max err {worst:.1e}; gap M=8,16,32: {g8:.2e},{g16:.2e},{g32:.2e}; M=64: {gap64:.1e}, M=128: {gap128:.1e}"
    ));
}

fn c3_binary_oracle(r: &mut Report) {
    let start = Instant::now();
    let g = group("cyclic:2");
    let spec = DistortionSpec::hamming(g.clone()).unwrap();
    let betas = BetaGrid {
        min: -12.0,
        max: -0.05,
        count: 20,
        log: true,
    }
    .values();
    let mut worst: f64 = 0.0;
    for &b in &betas {
        let sol = blahut_arimoto(&GroupDistribution::uniform(g.clone()), &spec, b, &BaOptions::default()).unwrap();
        let want = LN_2 - binary_entropy(sol.point.delta);
        let err = (sol.point.rate - want).abs();
        worst = worst.max(err);
        r.check(err <= 1e-6, || format!("beta {b}: R = {} vs {want}", sol.point.rate));
    }
    // a non-uniform source exercises the iteration: R = h(p) − h(δ) below min(p, 1−p)
    let p = dist(&g, vec![0.7, 0.3]);
    for &b in &betas {
        let sol = blahut_arimoto(&p, &spec, b, &BaOptions::default()).unwrap();
        if sol.point.delta < 0.3 - 1e-9 {
            let want = binary_entropy(0.3) - binary_entropy(sol.point.delta);
            let err = (sol.point.rate - want).abs();
            worst = worst.max(err);
            r.check(err <= 1e-6, || {
                format!("p=0.3, beta {b}: R = {} vs {want}", sol.point.rate)
            });
        }
    }
    let secs = start.elapsed().as_secs_f64();
    r.check(secs < 1.0, || format!("took {secs:.2}s"));
    r.note(format!("max |R - closed form| = {worst:.1e}"));
}

fn c4_coset_formula(r: &mut Report) {
    let g = group("cyclic:6");
    let half = divergence_to_uniform(&GroupDistribution::uniform_on(g.clone(), &[0, 2, 4]).unwrap());
    let trivial = divergence_to_uniform(&GroupDistribution::uniform_on(g.clone(), &[0]).unwrap());
    r.check((half - 2f64.ln()).abs() <= 1e-12, || format!("index 2: {half}"));
    r.check((trivial - 6f64.ln()).abs() <= 1e-12, || format!("trivial: {trivial}"));
    // every coset of every subgroup of a few groups: D = log index
    for spec in ["cyclic:12", "dihedral:4", "symmetric:3", "cube"] {
        let g = group(spec);
        for x in 0..g.order() {
            let f = haarlab::subgroup_closure(&g, &[x]).unwrap();
            let d = divergence_to_uniform(&GroupDistribution::uniform_on(g.clone(), f.members()).unwrap());
            let want = (f.index() as f64).ln();
            r.check((d - want).abs() <= 1e-12, || format!("{spec}, <{x}>: {d} vs {want}"));
        }
    }
    r.note(format!("D(U_F)={half:.15}, D(point)={trivial:.15}"));
}

fn c5_fourier_law(r: &mut Report) {
    let densities = [
        FourierDensity::single(1, 0.8, 0.0).unwrap(),
        FourierDensity::new(vec![0.5, 0.3, 0.1], vec![0.2, -1.0, 0.7]).unwrap(),
        FourierDensity::new(vec![0.0, 0.9], vec![0.0, 0.4]).unwrap(),
    ];
    for f in &densities {
        for n in 1..=16 {
            let fnn = f.n_fold(n).unwrap();
            for (k, (&a, &an)) in f.amps().iter().zip(fnn.amps()).enumerate() {
                let want = a.powi(n as i32) / 2f64.powi(n as i32 - 1);
                r.check((an - want).abs() <= 1e-14, || {
                    format!("n={n}, k={}: {an} vs {want}", k + 1)
                });
            }
        }
    }
    // analytic products against trapezoid quadrature of (1/2π)∫ f(x−y) g(y) dy
    let m = 512;
    let xs: Vec<f64> = (0..m).map(|j| TAU * j as f64 / m as f64).collect();
    let mut worst: f64 = 0.0;
    let pairs = [(0, 0), (0, 1), (1, 2), (1, 1)];
    for (i, j) in pairs {
        let (f, g) = (&densities[i], &densities[j]);
        let analytic = f.convolve(g);
        let ours: Vec<f64> = xs
            .iter()
            .map(|&x| xs.iter().map(|&y| f.eval(x - y) * g.eval(y)).sum::<f64>() / m as f64)
            .collect();
        let lib = convolve_by_quadrature(f, g, m);
        for (k, &x) in xs.iter().enumerate() {
            let a = analytic.eval(x);
            worst = worst.max((a - ours[k]).abs()).max((a - lib[k]).abs());
        }
    }
    r.check(worst <= 1e-8, || format!("quadrature sup error {worst:.3e}"));
    r.note(format!("quadrature sup error {worst:.1e}"));
}

fn c6_exponential_rate(r: &mut Report) {
    let f = FourierDensity::single(1, 0.8, 0.0).unwrap();
    let series = run_series_fourier(&f, 20).unwrap();
    let fit = series.fit_rate(4).unwrap();
    r.check(fit.first_n == 5 && fit.last_n == 20, || {
        format!("window n={}..{}", fit.first_n, fit.last_n)
    });
    r.check((fit.rho - 0.16).abs() <= 0.02 * 0.16, || {
        format!("circle rho = {}", fit.rho)
    });
    let g = group("cyclic:6");
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_r2: f64 = 1.0;
    let mut max_rho: f64 = 0.0;
    for _ in 0..20 {
        let p = dist(&g, random_mass(&mut rng, 6, true));
        let s = run_series(&p, 20, None).unwrap();
        let fit = s.fit_rate(4).unwrap();
        worst_r2 = worst_r2.min(fit.r2);
        max_rho = max_rho.max(fit.rho);
        r.check(fit.rho < 1.0 && fit.r2 > 0.99, || {
            format!("Z6 fit rho={} r2={}", fit.rho, fit.r2)
        });
    }
    r.note(format!(
        "circle rho={:.5} (r2={:.6}); Z6 x20: max rho {max_rho:.3}, min r2 {worst_r2:.5}",
        fit.rho, fit.r2
    ));
}

fn c7_decay_bound(r: &mut Report) {
    let names = groups_up_to(24);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut min_margin = f64::INFINITY;
    for _ in 0..100 {
        let g = group(&names[rng.gen_range(0..names.len())]);
        let n = g.order();
        let mass = random_mass(&mut rng, n, true);
        let p = dist(&g, mass.clone());
        let rep = decay_bound_check(&p, 20).unwrap();
        r.check(rep.holds, || format!("bound fails on order {n}"));
        let c = mass.iter().fold(f64::INFINITY, |a, &b| a.min(b)) * n as f64;
        let d1 = oracle_kl_uniform(&mass);
        let mut pn = mass.clone();
        for row in &rep.rows {
            if row.n > 1 {
                pn = oracle_convolve(&g, &pn, &mass);
            }
            let d = oracle_kl_uniform(&pn);
            let bound = (1.0 - c).powi(row.n as i32 - 1) * d1;
            if row.n > 1 {
                min_margin = min_margin.min(bound - d);
            }
            r.check(bound - d >= -1e-12, || {
                format!("oracle: n={} D={d} bound={bound}", row.n)
            });
            r.check((row.divergence - d).abs() <= 1e-12, || {
                format!("n={}: D {} vs oracle {d}", row.n, row.divergence)
            });
        }
    }
    r.note(format!("100 instances, n<=20, min margin over n>=2 {min_margin:.2e}"));
}

fn c8_one_bit_floor(r: &mut Report) {
    let names = groups_up_to(12);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut min_floor = f64::INFINITY;
    let mut max_d: f64 = 0.0;
    for _ in 0..100 {
        let g = group(&names[rng.gen_range(0..names.len())]);
        let n = g.order();
        let raw = random_mass(&mut rng, n, false);
        // pull toward uniform until within one bit, keeping some close to it
        let mut t: f64 = rng.gen_range(0.3..=1.0);
        let mass = loop {
            let m: Vec<f64> = raw.iter().map(|v| (1.0 - t) / n as f64 + t * v).collect();
            if oracle_kl_uniform(&m) < LN_2 - 1e-9 {
                break m;
            }
            t *= 0.9;
        };
        let p = dist(&g, mass.clone());
        let rep = one_bit_floor(&p).unwrap();
        let dens: Vec<f64> = mass.iter().map(|v| v * n as f64).collect();
        let floor = dens
            .iter()
            .filter(|&&v| v > 0.0)
            .map(|&v| 2.0 * v * v * (dens.iter().filter(|&&f| f >= v).count() as f64 / n as f64 - 0.5))
            .fold(f64::NEG_INFINITY, f64::max);
        let pp = oracle_convolve(&g, &mass, &mass);
        let min_pp = pp.iter().fold(f64::INFINITY, |a, &b| a.min(b)) * n as f64;
        r.check(rep.applicable && rep.holds, || {
            format!("order {n}: floor {} min {}", rep.floor, rep.min_density_pp)
        });
        r.check(floor > 0.0 && min_pp >= floor - 1e-12, || {
            format!("oracle: floor {floor} min {min_pp}")
        });
        r.check(
            (rep.floor - floor).abs() <= 1e-12 && (rep.min_density_pp - min_pp).abs() <= 1e-12,
            || "library floor disagrees with oracle".into(),
        );
        min_floor = min_floor.min(floor);
        max_d = max_d.max(rep.d_nats);
    }
    // sharpness: U_F with [G:F] = 2 sits at D = log 2 and U_F ∗ U_F vanishes off F
    let boundary = [
        ("cyclic:6", vec![0, 2, 4]),
        ("cyclic:4", vec![0, 2]),
        ("symmetric:3", vec![0, 1, 2]),
    ];
    for (spec, f) in boundary {
        let g = group(spec);
        let p = GroupDistribution::uniform_on(g.clone(), &f).unwrap();
        let rep = one_bit_floor(&p).unwrap();
        r.check((rep.d_nats - LN_2).abs() <= 1e-12, || {
            format!("{spec}: D = {}", rep.d_nats)
        });
        r.check(rep.min_density_pp == 0.0 && !rep.applicable, || {
            format!("{spec}: min density {}", rep.min_density_pp)
        });
    }
    r.note(format!(
        "100 instances, max D {max_d:.4}, min floor {min_floor:.2e}; index-2 U_F gives min density 0"
    ));
}

fn c9_non_convergence(r: &mut Report) {
    let g = group("cyclic:6");
    let sub = GroupDistribution::uniform_on(g.clone(), &[0, 2, 4]).unwrap();
    let coset = GroupDistribution::uniform_on(g.clone(), &[1, 3, 5]).unwrap();
    let rep = detect_obstruction(&sub);
    r.check(rep.verdict == Verdict::SubgroupSupported, || {
        format!("subgroup verdict {:?}", rep.verdict)
    });
    let rep = detect_obstruction(&coset);
    r.check(rep.verdict == Verdict::CosetSupported && rep.period == Some(2), || {
        format!("coset verdict {:?}, period {:?}", rep.verdict, rep.period)
    });
    for (name, p) in [("subgroup", &sub), ("coset", &coset)] {
        let s = run_series(p, 40, None).unwrap();
        let worst = s.divergence.iter().map(|d| (d - LN_2).abs()).fold(0.0, f64::max);
        r.check(s.len() == 40 && worst <= 1e-12, || {
            format!("{name}: divergence off log 2 by {worst:.3e}")
        });
    }
    let (even, odd) = (vec![0, 2, 4], vec![1, 3, 5]);
    let mut pn = coset.clone();
    for n in 1..=40 {
        let want = if n % 2 == 1 { &odd } else { &even };
        r.check(&pn.support() == want, || format!("n={n}: support {:?}", pn.support()));
        pn = pn.convolve(&coset).unwrap();
    }
    r.note("D = log 2 for n <= 40; coset support alternates with period 2");
}

fn c10_property_suites(r: &mut Report) {
    const INSTANCES: usize = 1000;
    let start = Instant::now();
    let names = groups_up_to(24);
    let small = groups_up_to(8);
    let mut rng = ChaCha8Rng::seed_from_u64(10);

    let mut pinsker_gap = f64::INFINITY;
    for _ in 0..INSTANCES {
        let g = group(&names[rng.gen_range(0..names.len())]);
        let (a, b) = (
            random_mass(&mut rng, g.order(), false),
            random_mass(&mut rng, g.order(), true),
        );
        let (p, q) = (dist(&g, a.clone()), dist(&g, b.clone()));
        let d = divergence(&p, &q).unwrap();
        let tv = total_variation(&p, &q).unwrap();
        let want = oracle_kl(&a, &b);
        r.check((d - want).abs() <= 1e-12 * want.max(1.0), || {
            format!("D {d} vs oracle {want}")
        });
        pinsker_gap = pinsker_gap.min(d - 0.5 * tv * tv);
        r.check(0.5 * tv * tv <= d + 1e-15, || format!("Pinsker: tv {tv}, D {d}"));
    }

    let mut worst_residual: f64 = 0.0;
    for _ in 0..INSTANCES {
        let g = group(&names[rng.gen_range(0..names.len())]);
        let k = rng.gen_range(2..=5);
        let family: Vec<GroupDistribution> = (0..k)
            .map(|_| dist(&g, random_mass(&mut rng, g.order(), false)))
            .collect();
        let weights: Vec<f64> = (0..k).map(|_| rng.gen::<f64>() + 1e-3).collect();
        let reference = dist(&g, random_mass(&mut rng, g.order(), true));
        let res = compensation_identity_residual(&family, &weights, &reference).unwrap();
        worst_residual = worst_residual.max(res);
        r.check(res <= 1e-10, || format!("compensation residual {res:.3e}"));
    }

    let mut mono_slack = f64::INFINITY;
    for _ in 0..INSTANCES {
        let g = group(&names[rng.gen_range(0..names.len())]);
        let p = dist(&g, random_mass(&mut rng, g.order(), false));
        let q = dist(&g, random_mass(&mut rng, g.order(), false));
        let pq = p.convolve(&q).unwrap();
        let d = divergence_to_uniform(&pq);
        let bound = divergence_to_uniform(&p).min(divergence_to_uniform(&q));
        mono_slack = mono_slack.min(bound - d);
        r.check(d <= bound + 1e-12, || {
            format!("D(P*Q) {d} above min(D(P), D(Q)) {bound}")
        });
        let mut prev = divergence_to_uniform(&p);
        let mut pn = p.clone();
        for _ in 0..4 {
            pn = pn.convolve(&p).unwrap();
            let next = divergence_to_uniform(&pn);
            r.check(next <= prev + 1e-12, || {
                format!("powers not monotone: {prev} then {next}")
            });
            prev = next;
        }
    }

    let betas = [-4.0, -1.0, -0.25];
    let opts = BaOptions::default();
    let mut violations = 0;
    for _ in 0..INSTANCES {
        let g = group(&small[rng.gen_range(0..small.len())]);
        let spec = if g.is_standard_cyclic() {
            DistortionSpec::cosine(g.clone()).unwrap()
        } else {
            DistortionSpec::hamming(g.clone()).unwrap()
        };
        let p = dist(&g, random_mass(&mut rng, g.order(), false));
        let rep = sandwich_check(&p, &spec, &betas, &opts).unwrap();
        violations += rep.violations.len();
        r.check(rep.violations.is_empty(), || {
            format!("sandwich violations at {:?}", rep.violations)
        });
    }

    let secs = start.elapsed().as_secs_f64();
    r.check(secs < 60.0, || format!("took {secs:.1}s"));
    r.note(format!(
        "4 x {INSTANCES} instances: min D-tv^2/2 {pinsker_gap:.1e}, max residual {worst_residual:.1e}, \
         min monotone slack {mono_slack:.1e}, {violations} band violations"
    ));
}

fn c11_scope_note(r: &mut Report) {
    r.note("informational: there are no empirical tables to reproduce; criteria 1-10 cover closed-form endpoints, oracles and property suites");
}

type Criterion = (&'static str, fn(&mut Report));

fn main() {
    let criteria: [Criterion; 11] = [
        ("circle rate-distortion endpoints", c1_so2_endpoints),
        ("Bessel closed form vs Blahut-Arimoto", c2_bessel_vs_ba),
        ("binary Hamming oracle", c3_binary_oracle),
        ("coset divergence = log index", c4_coset_formula),
        ("Fourier convolution law", c5_fourier_law),
        ("exponential convergence rate", c6_exponential_rate),
        ("decay bound", c7_decay_bound),
        ("one-bit density floor", c8_one_bit_floor),
        ("non-convergence witnesses", c9_non_convergence),
        ("property suites", c10_property_suites),
        ("scope note", c11_scope_note),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut report = Report::default();
        let outcome = catch_unwind(AssertUnwindSafe(|| run(&mut report)));
        let secs = start.elapsed().as_secs_f64();
        let pass = outcome.is_ok() && report.failures.is_empty();
        if !pass {
            failed += 1;
        }
        let detail = match outcome {
            Err(e) => format!(
                "panicked: {}",
                e.downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default()
            ),
            Ok(()) if pass => report.notes.join("; "),
            Ok(()) => {
                let shown: Vec<&String> = report.failures.iter().filter(|f| !f.is_empty()).collect();
                format!("{} failed checks, e.g. {:?}", report.failures.len(), shown)
            }
        };
        println!(
            "criterion {:>2} {} [{name}] ({secs:.2}s): {detail}",
            k + 1,
            if pass { "PASS" } else { "FAIL" }
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
