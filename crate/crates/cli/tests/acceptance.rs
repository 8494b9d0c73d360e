//! End-to-end acceptance checks. Runs as a plain binary so that every
//! criterion prints its own result line; exits nonzero if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use haprtr::experiment::{records_to_csv, run_experiment};
use haprtr::HarnessConfig;
use haprtr_core::assemble::{assemble_rtr, InitStrategy};
use haprtr_core::objective::{cost, hess_vec, riemannian_grad, ReadMatrix, Smoothing, SmoothedL1};
use haprtr_core::pipeline::{generate_instance, hd_ambiguous, mec, Haplotype};
use haprtr_core::rng::{stream, Stream};
use haprtr_core::rtr::{rtr_minimize, solve_subproblem, RtrConfig, StopReason};
use haprtr_core::sphere::{
    dist, exp, geodesic, inner, project_tangent, random_tangent, retract, transport, TangentVector, UnitVector,
};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DESK_CONFIG: &str = include_str!("../../../configs/desk.toml");

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn eps() -> Smoothing {
    Smoothing::new(1e-6).unwrap()
}

fn gaussian(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

fn gradient_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    let h = 1e-6;
    for pair in 0..100 {
        let inst = generate_instance(20, 15, 0.6, 0.2, 1000 + pair).unwrap();
        let x = UnitVector::random(15, &mut rng).unwrap();
        let g = riemannian_grad(&inst.reads, eps(), &x).unwrap();
        for _ in 0..5 {
            let xi = random_tangent(&x, 1.0, &mut rng);
            let fp = cost(&inst.reads, eps(), &geodesic(&x, &xi, h).unwrap()).unwrap();
            let fm = cost(&inst.reads, eps(), &geodesic(&x, &xi, -h).unwrap()).unwrap();
            let fd = (fp - fm) / (2.0 * h);
            worst = worst.max((fd - inner(&g, &xi).unwrap()).abs() / (g.norm() * xi.norm()));
        }
    }
    outcome(worst < 1e-5, format!("500 directions, worst relative error {worst:.2e} (< 1e-5)"))
}

fn hessian_check() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let t = 1e-5;
    let (mut worst_fd, mut worst_sym) = (0.0f64, 0.0f64);
    let (mut one_sided, mut one_sided_small) = (0.0f64, 0.0f64);
    for pair in 0..50 {
        let inst = generate_instance(20, 15, 0.6, 0.2, 2000 + pair).unwrap();
        let x = UnitVector::random(15, &mut rng).unwrap();
        let xi = random_tangent(&x, 1.0, &mut rng);
        let eta = random_tangent(&x, 1.0, &mut rng);

        let hxi = hess_vec(&inst.reads, eps(), &x, &xi).unwrap();
        let pulled = |s: f64| {
            let y = exp(&x, &xi.scaled(s)).unwrap();
            transport(&y, &x, &riemannian_grad(&inst.reads, eps(), &y).unwrap()).unwrap().into_dir()
        };
        let rel = |fd: Vec<f64>| {
            let diff: Vec<f64> = fd.iter().zip(hxi.dir()).map(|(a, b)| a - b).collect();
            norm(&diff) / hxi.norm()
        };
        let (p, m) = (pulled(t), pulled(-t));
        worst_fd = worst_fd.max(rel(p.iter().zip(&m).map(|(a, b)| (a - b) / (2.0 * t)).collect()));

        let g = riemannian_grad(&inst.reads, eps(), &x).unwrap().into_dir();
        one_sided = one_sided.max(rel(p.iter().zip(&g).map(|(a, b)| (a - b) / t).collect()));
        let ps = pulled(t / 10.0);
        one_sided_small = one_sided_small.max(rel(ps.iter().zip(&g).map(|(a, b)| (a - b) / (t / 10.0)).collect()));

        let heta = hess_vec(&inst.reads, eps(), &x, &eta).unwrap();
        let (l, r) = (inner(&hxi, &eta).unwrap(), inner(&xi, &heta).unwrap());
        worst_sym = worst_sym.max((l - r).abs() / hxi.norm().max(heta.norm()));
    }
    outcome(
        worst_fd < 1e-4 && worst_sym < 1e-8,
        format!(
            "50 pairs, central transported difference error {worst_fd:.2e} (< 1e-4), symmetry error {worst_sym:.2e} \
             (< 1e-8); one-sided error {one_sided:.2e} at t=1e-5, {one_sided_small:.2e} at t=1e-6"
        ),
    )
}

fn manifold_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut failures: BTreeMap<&str, usize> = BTreeMap::new();
    let mut fail = |name: &'static str, ok: bool| {
        if !ok {
            *failures.entry(name).or_default() += 1;
        }
    };
    for _ in 0..1000 {
        let n = rng.random_range(2..=50);
        let x = UnitVector::random(n, &mut rng).unwrap();
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let v: Vec<f64> = gaussian(n, &mut rng).into_iter().map(|a| a * scale).collect();

        let p = project_tangent(&x, &v).unwrap();
        let pp = project_tangent(&x, p.dir()).unwrap();
        fail("idempotence", p.dir().iter().zip(pp.dir()).all(|(a, b)| (a - b).abs() <= 1e-12));
        fail("tangency", dot(x.coords(), p.dir()).abs() <= 1e-10 * (1.0 + norm(&v)));

        fail(
            "geodesic norm",
            (0..=20).all(|k| (norm(geodesic(&x, &p, 0.1 * k as f64).unwrap().coords()) - 1.0).abs() <= 1e-10),
        );

        let r = retract(&x, &p).unwrap();
        fail("retraction norm", (norm(r.coords()) - 1.0).abs() <= 1e-12);
        fail("retraction distance", dist(&x, &r).unwrap() <= p.norm() * (1.0 + 1e-12));

        let y = UnitVector::random(n, &mut rng).unwrap();
        match transport(&x, &y, &p) {
            Ok(tv) => {
                fail("transport base", tv.base() == &y);
                fail("transport isometry", (tv.norm() - p.norm()).abs() <= 1e-10 * (1.0 + p.norm()));
            }
            Err(_) => fail("transport defined", false),
        }
    }
    let bad: Vec<String> = failures.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    outcome(
        bad.is_empty(),
        if bad.is_empty() {
            "1000 cases each for projection, geodesic, retraction, transport, distance".to_string()
        } else {
            format!("violations {}", bad.join(", "))
        },
    )
}

fn subproblem_guarantee() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let cfg = RtrConfig::default();
    let (mut radius_bad, mut cauchy_bad, mut negative) = (0, 0, 0);
    for case in 0..200 {
        let n = rng.random_range(2..=30);
        let x = UnitVector::random(n, &mut rng).unwrap();
        let grad = random_tangent(&x, 10f64.powf(rng.random_range(-4.0..1.0)), &mut rng);
        let delta = 10f64.powf(rng.random_range(-3.0..0.7));

        let a = DMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut sym = (&a + a.transpose()) * 0.5;
        if case % 2 == 0 {
            // Force an indefinite operator with a strongly negative direction.
            let d = DVector::from_vec(gaussian(n, &mut rng)).normalize();
            sym -= &d * d.transpose() * (5.0 * n as f64);
        }
        let xv = DVector::from_column_slice(x.coords());
        let proj = DMatrix::identity(n, n) - &xv * xv.transpose();
        let h = &proj * sym * &proj;
        let eig = SymmetricEigen::new((&h + h.transpose()) * 0.5).eigenvalues;
        let h_norm = eig.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if eig.iter().any(|&v| v < -1e-9) {
            negative += 1;
        }

        let op = |v: &TangentVector| {
            let out = &h * DVector::from_column_slice(v.dir());
            TangentVector::new(v.base().clone(), out.as_slice().to_vec())
        };
        let sub = solve_subproblem(&grad, op, delta, &cfg).unwrap();
        if sub.eta.norm() > delta * (1.0 + 1e-12) {
            radius_bad += 1;
        }
        let g = grad.norm();
        let bound = 0.5 * g * if h_norm > 0.0 { delta.min(g / h_norm) } else { delta };
        if sub.model_decrease < bound * (1.0 - 1e-9) {
            cauchy_bad += 1;
        }
    }
    outcome(
        radius_bad == 0 && cauchy_bad == 0 && negative >= 100,
        format!("200 subproblems ({negative} indefinite): radius violations {radius_bad}, Cauchy violations {cauchy_bad}"),
    )
}

fn convergence() -> Outcome {
    let cfg = RtrConfig::default();
    let (mut converged, mut monotone, mut tail_ok) = (0, 0, true);
    let mut max_iters = 0;
    for seed in 0..50 {
        let inst = generate_instance(50, 40, 0.5, 0.2, seed).unwrap();
        let obj = SmoothedL1::new(&inst.reads, eps());
        let x0 = UnitVector::random(40, &mut stream(seed, Stream::RtrInit)).unwrap();
        let sol = rtr_minimize(&obj, x0, &cfg).unwrap();
        max_iters = max_iters.max(sol.trace.iterations.len());
        if sol.trace.stop == StopReason::GradientTolerance && sol.trace.final_grad_norm <= 1e-6 {
            converged += 1;
        } else {
            tail_ok &= sol.trace.final_grad_norm <= 1e-3;
        }

        let mut accepted: Vec<UnitVector> = sol
            .trace
            .iterations
            .iter()
            .filter(|r| r.accepted)
            .map(|r| UnitVector::new(r.point.clone()).unwrap())
            .collect();
        accepted.push(sol.x.clone());
        let costs: Vec<f64> = accepted.iter().map(|p| cost(&inst.reads, eps(), p).unwrap()).collect();
        // Slack of a few ulps of the cost covers summation rounding.
        if costs.windows(2).all(|w| w[1] <= w[0] + 8.0 * f64::EPSILON * w[0].abs()) {
            monotone += 1;
        }
    }
    outcome(
        converged >= 48 && monotone == 50 && tail_ok,
        format!("{converged}/50 reach |grad| <= 1e-6 (max {max_iters} iterations), {monotone}/50 monotone"),
    )
}

fn noiseless_recovery() -> Outcome {
    let mut exact = 0;
    for seed in 0..100 {
        let inst = generate_instance(20, 10, 1.0, 0.0, 3000 + seed).unwrap();
        let cfg = RtrConfig {
            seed,
            ..RtrConfig::default()
        };
        let a = assemble_rtr(&inst.reads, eps(), &cfg, InitStrategy::Random, 3).unwrap();
        if hd_ambiguous(&a.haplotype, &inst.truth_h).unwrap() == 0 {
            exact += 1;
        }
    }
    outcome(exact >= 95, format!("hd = 0 in {exact}/100 runs (>= 95), random starts, up to 3 restarts"))
}

fn brute_force_mec(reads: &ReadMatrix) -> usize {
    let n = reads.cols();
    (0..1u32 << n)
        .map(|bits| {
            let z = Haplotype::new((0..n).map(|j| if bits >> j & 1 == 1 { -1 } else { 1 }).collect()).unwrap();
            mec(reads, &z).unwrap()
        })
        .min()
        .unwrap()
}

fn mec_oracle() -> Outcome {
    let (mut consistent, mut near) = (0, 0);
    for seed in 0..20 {
        let inst = generate_instance(20, 10, 0.7, 0.1, 4000 + seed).unwrap();
        let best = brute_force_mec(&inst.reads);
        if mec(&inst.reads, &inst.truth_h).unwrap() >= best {
            consistent += 1;
        }
        let cfg = RtrConfig {
            seed,
            ..RtrConfig::default()
        };
        let a = assemble_rtr(&inst.reads, eps(), &cfg, InitStrategy::Random, 3).unwrap();
        if mec(&inst.reads, &a.haplotype).unwrap() <= best + 2 {
            near += 1;
        }
    }
    outcome(
        consistent == 20 && near >= 16,
        format!("truth MEC >= brute-force minimum on {consistent}/20; RTR within 2 of minimum on {near}/20 (>= 16)"),
    )
}

fn desk_config() -> HarnessConfig {
    let cfg = HarnessConfig::from_toml(DESK_CONFIG).unwrap();
    assert_eq!((cfg.m, cfg.n, cfg.trials), (100, 120, 20));
    assert_eq!(cfg.pd_grid, vec![0.3, 0.5, 0.7]);
    assert_eq!(cfg.err_grid, vec![0.35]);
    cfg
}

fn ordering(csv: &mut Option<Vec<u8>>) -> Outcome {
    let records = run_experiment(&desk_config(), 0).unwrap();
    let mut sums: BTreeMap<(u64, String), (f64, usize)> = BTreeMap::new();
    for r in &records {
        let e = sums.entry((r.pd.to_bits(), r.method.clone())).or_default();
        e.0 += r.hd as f64;
        e.1 += 1;
    }
    let mean = |pd: f64, m: &str| {
        let (s, k) = sums[&(pd.to_bits(), m.to_string())];
        s / k as f64
    };
    let mut pass = records.len() == 120;
    let mut parts = Vec::new();
    for pd in [0.3, 0.5, 0.7] {
        let (r, a) = (mean(pd, "rtr"), mean(pd, "altmin"));
        pass &= r <= a;
        parts.push(format!("pd {pd}: rtr {r:.2} vs altmin {a:.2}"));
    }
    *csv = Some(records_to_csv(&records).unwrap());
    outcome(pass, format!("mean hd {}", parts.join(", ")))
}

fn determinism(first: &Option<Vec<u8>>) -> Outcome {
    let Some(first) = first else {
        return outcome(false, "no CSV from the sweep run");
    };
    let cfg = desk_config();
    let serial = records_to_csv(&run_experiment(&cfg, 1).unwrap()).unwrap();
    let parallel = records_to_csv(&run_experiment(&cfg, 0).unwrap()).unwrap();
    outcome(
        &serial == first && &parallel == first,
        format!("{} bytes; identical across reruns and thread counts: {}", first.len(), &serial == first && &parallel == first),
    )
}

type Criterion<'a> = (&'static str, Duration, Box<dyn FnMut() -> Outcome + 'a>);

fn main() {
    let mut csv = None;
    let criteria: Vec<Criterion> = vec![
        ("gradient correctness", Duration::from_secs(10), Box::new(gradient_check)),
        ("Hessian correctness", Duration::from_secs(10), Box::new(hessian_check)),
        ("manifold suite", Duration::from_secs(5), Box::new(manifold_suite)),
        ("subproblem guarantee", Duration::from_secs(5), Box::new(subproblem_guarantee)),
        ("convergence", Duration::from_secs(60), Box::new(convergence)),
        ("noiseless recovery", Duration::from_secs(30), Box::new(noiseless_recovery)),
        ("MEC oracle", Duration::from_secs(60), Box::new(mec_oracle)),
        ("desk-scale ordering", Duration::from_secs(300), Box::new(|| ordering(&mut csv))),
    ];
    let mut all = true;
    let mut report = |idx: usize, name: &str, limit: Duration, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let out = run();
        let took = start.elapsed();
        let pass = out.pass && took <= limit;
        all &= pass;
        println!(
            "criterion {idx} {} {name}: {} [{:.2}s, limit {}s]",
            if pass { "PASS" } else { "FAIL" },
            out.detail,
            took.as_secs_f64(),
            limit.as_secs()
        );
    };
    for (i, (name, limit, mut run)) in criteria.into_iter().enumerate() {
        report(i + 1, name, limit, &mut *run);
    }
    report(9, "determinism", Duration::from_secs(300), &mut || determinism(&csv));
    if !all {
        std::process::exit(1);
    }
}
