//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and
//! exits nonzero if any fails.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use num_traits::One;

use polyframe::diagnostics::{
    c_upsilon_lambda_with_gram, cond_lower_bound_1d, condition_number, monte_carlo_gram,
    sample_complexity_bound, NikolskiiSource,
};
use polyframe::domains::draw_samples_on_stream;
use polyframe::experiments::{csv_column, run, ExperimentConfig};
use polyframe::framesolver::{
    assemble_design_matrix, evaluate_approximant, truncated_svd_solve, FrameSvd,
};
use polyframe::indexsets::{hyperbolic_cross_set, total_degree_set};
use polyframe::polybasis::{quadrature_gram, TensorBasis};
use polyframe::quadrature::for_each_tensor_node;
use polyframe::rng::{streams, trial_seed, StreamRng};
use polyframe::{BasisKind, DomainKind, DomainSpec, IndexFamily, SamplingMeasure};

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

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

fn binomial(n: u64, k: u64) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// Counts `m in [0, n]^d` with `prod (m_i + 1) <= n + 1` by scanning the whole box.
fn hc_brute_force(n: u64, d: usize) -> u64 {
    let side = n + 1;
    let total = side.pow(d as u32);
    let mut count = 0;
    let mut digits = vec![0u64; d];
    for _ in 0..total {
        let prod: u64 = digits.iter().map(|&k| k + 1).product();
        if prod <= n + 1 {
            count += 1;
        }
        for k in digits.iter_mut() {
            *k += 1;
            if *k < side {
                break;
            }
            *k = 0;
        }
    }
    count
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    for d in 1..=6usize {
        for n in 0..=20u32 {
            let tp = IndexFamily::TensorProduct.cardinality(n, d, usize::MAX).unwrap();
            if BigUint::from(tp) != BigUint::from(n + 1).pow(d as u32) {
                bad.push(format!("TP n={n} d={d}"));
            }
            let td = IndexFamily::TotalDegree.cardinality(n, d, usize::MAX).unwrap();
            if BigUint::from(td) != binomial(n as u64 + d as u64, d as u64) {
                bad.push(format!("TD n={n} d={d}"));
            }
            let hc = hyperbolic_cross_set(n, d).unwrap();
            let bound = ((n as f64 + 1.0) * (1.0 + (n as f64 + 1.0).ln()).powi(d as i32 - 1)).floor();
            if hc.len() as f64 > bound {
                bad.push(format!("HC bound n={n} d={d}"));
            }
            if (n + 1).pow(d as u32) <= 200_000 && hc.len() as u64 != hc_brute_force(n as u64, d) {
                bad.push(format!("HC count n={n} d={d}"));
            }
        }
    }
    // materialized sets agree with the counts where they fit in memory
    for d in 1..=6usize {
        for n in [0u32, 3, 7] {
            let td = total_degree_set(n, d).unwrap();
            if BigUint::from(td.len()) != binomial(n as u64 + d as u64, d as u64) {
                bad.push(format!("TD set n={n} d={d}"));
            }
        }
    }
    let t = start.elapsed();
    outcome(
        bad.is_empty() && within(t, 1),
        format!("mismatches={bad:?} runtime={:.2}s (limit 1s)", t.as_secs_f64()),
    )
}

/// Full tensor quadrature Gram, computed node by node.
fn direct_gram(family: IndexFamily, n: u32, d: usize, kind: BasisKind) -> f64 {
    let set = family.build(n, d).unwrap();
    let basis = TensorBasis::new(&set, kind);
    let mut tables = basis.scratch();
    let mut phi = vec![0.0; set.len()];
    let mut g = vec![0.0; set.len() * set.len()];
    let rule = kind.quadrature_rule(2 * set.max_degree() as usize + 2);
    for_each_tensor_node(&rule, d, |y, w, _| {
        basis.eval_into(y, &mut tables, &mut phi).unwrap();
        for i in 0..phi.len() {
            let wi = w * phi[i];
            for j in 0..phi.len() {
                g[i * phi.len() + j] += wi * phi[j];
            }
        }
    })
    .unwrap();
    let nn = set.len();
    let mut dev: f64 = 0.0;
    for i in 0..nn {
        for j in 0..nn {
            let target = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[i * nn + j] - target).abs());
        }
    }
    dev
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let kinds = [
        BasisKind::Legendre,
        BasisKind::Chebyshev,
        BasisKind::Cosine { half_width: 1.0 },
        BasisKind::Cosine { half_width: 1.5 },
    ];
    let mut worst: f64 = 0.0;
    for kind in kinds {
        worst = worst.max(direct_gram(IndexFamily::TensorProduct, 50, 1, kind));
        worst = worst.max(direct_gram(IndexFamily::TotalDegree, 20, 2, kind));
        worst = worst.max(direct_gram(IndexFamily::HyperbolicCross, 50, 2, kind));
        worst = worst.max(direct_gram(IndexFamily::TotalDegree, 8, 3, kind));
        for (family, n, d) in [
            (IndexFamily::TotalDegree, 50, 2),
            (IndexFamily::HyperbolicCross, 50, 3),
            (IndexFamily::TensorProduct, 12, 3),
        ] {
            let set = family.build(n, d).unwrap();
            let g = quadrature_gram(&set, kind, 2 * set.max_degree() as usize + 2);
            for (i, row) in g.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    worst = worst.max((v - target).abs());
                }
            }
        }
    }
    let t = start.elapsed();
    outcome(
        worst < 1e-10 && within(t, 30),
        format!("max |G - I| = {worst:.3e} (tol 1e-10) runtime={:.2}s (limit 30s)", t.as_secs_f64()),
    )
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let set = hyperbolic_cross_set(20, 2).unwrap();
    let domain = DomainSpec::new(DomainKind::LShape, 2).unwrap();
    let basis = BasisKind::Legendre;
    let n = set.len();
    let mut errors = Vec::new();
    for t in 0..20u64 {
        let seed = trial_seed(3, t);
        let mut rng = StreamRng::new(seed, streams::COEFFICIENTS);
        let coefs: Vec<f64> = (0..n).map(|_| rng.uniform_in(-1.0, 1.0)).collect();
        let train =
            draw_samples_on_stream(&domain, SamplingMeasure::UniformOnOmega, 5 * n, seed, streams::TRAINING)
                .unwrap();
        let eval =
            draw_samples_on_stream(&domain, SamplingMeasure::UniformOnOmega, 10_000, seed, streams::EVALUATION)
                .unwrap();
        let f_train = evaluate_approximant(&coefs, &set, basis, &train.points).unwrap();
        let a = assemble_design_matrix(&train, &set, basis).unwrap();
        let scale = 1.0 / (train.len() as f64).sqrt();
        let b: Vec<f64> = f_train.iter().map(|v| v * scale).collect();
        let sol = truncated_svd_solve(&a, &b, 1e-8).unwrap();
        let f_eval = evaluate_approximant(&coefs, &set, basis, &eval.points).unwrap();
        let g_eval = evaluate_approximant(&sol.coefficients, &set, basis, &eval.points).unwrap();
        let err = (f_eval
            .iter()
            .zip(&g_eval)
            .map(|(f, g)| (f - g).powi(2))
            .sum::<f64>()
            / eval.len() as f64)
            .sqrt();
        errors.push(err);
    }
    let good = errors.iter().filter(|&&e| e < 1e-7).count();
    let worst = errors.iter().copied().fold(0.0f64, f64::max);
    let t = start.elapsed();
    outcome(
        good >= 18 && within(t, 60),
        format!(
            "N={n} M={} trials below 1e-7: {good}/20 (need 18) worst={worst:.3e} runtime={:.2}s (limit 60s)",
            5 * n,
            t.as_secs_f64()
        ),
    )
}

/// The bounds instances: (domain, dim, target, index set, degree, epsilon).
const BOUNDS_INSTANCES: &[(&str, usize, &str, &str, u64, f64)] = &[
    ("lshape", 2, "cossin", "total_degree", 6, 1e-8),
    ("lshape", 2, "expmean", "hyperbolic_cross", 15, 1e-8),
    ("lshape", 2, "cossin", "total_degree", 10, 1e-4),
    ("circle(1)", 2, "cossin", "total_degree", 8, 1e-8),
    ("circle(0.5)", 2, "cosmean", "total_degree", 6, 1e-8),
    ("annulus(0.5,1)", 2, "expmean", "total_degree", 8, 1e-8),
    ("disc_exclusion(0.5)", 2, "cossin", "hyperbolic_cross", 20, 1e-8),
    ("linear_constraint", 2, "cossin", "total_degree", 6, 1e-6),
    ("corner", 3, "cosmean", "total_degree", 4, 1e-8),
    ("corner", 4, "expmean", "total_degree", 3, 1e-8),
    ("unit_ball", 3, "expmean", "total_degree", 4, 1e-8),
    ("norm_exclusion(0.5)", 3, "cosmean", "total_degree", 4, 1e-8),
];

fn bounds_config(domain: &str, dim: usize, target: &str, family: &str, n: u64, eps: f64) -> String {
    format!(
        r#"
experiment = "bounds"
seed = 45
trials = 5
epsilon = {eps:e}
eval_points = 5000
target = "{target}"

[domain]
kind = "{domain}"
dim = {dim}

[index_set]
kind = "{family}"

[schedule]
mode = "degree"
values = [{n}]
rules = ["linear(3)"]
"#
    )
}

fn criteria_4_5() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut thm = 0.0;
    let mut coef = 0.0;
    let mut min_thm_slack = f64::INFINITY;
    let mut min_coef_slack = f64::INFINITY;
    for &(domain, dim, target, family, n, eps) in BOUNDS_INSTANCES {
        let cfg = ExperimentConfig::from_toml_str(&bounds_config(domain, dim, target, family, n, eps)).unwrap();
        let out = run(&cfg).unwrap();
        let summary = out.file("bounds.csv").unwrap();
        thm += csv_column(summary, "thm_violations").unwrap()[0];
        coef += csv_column(summary, "coef_violations").unwrap()[0];
        let trials = out.file("bounds_trials.csv").unwrap();
        let rhs = csv_column(trials, "thm_rhs").unwrap();
        let slack = csv_column(trials, "thm_slack").unwrap();
        for (s, r) in slack.iter().zip(&rhs) {
            min_thm_slack = min_thm_slack.min(s / r);
        }
        let coef_rhs = csv_column(trials, "coef_rhs").unwrap();
        let coef_slack = csv_column(trials, "coef_slack").unwrap();
        for (s, r) in coef_slack.iter().zip(&coef_rhs) {
            min_coef_slack = min_coef_slack.min(s / r);
        }
    }
    let t = start.elapsed();
    let k = BOUNDS_INSTANCES.len();
    (
        outcome(
            thm == 0.0 && within(t, 300),
            format!(
                "{k} instances x 5 trials, violations={thm} min relative slack={min_thm_slack:.3e} runtime={:.2}s (limit 300s)",
                t.as_secs_f64()
            ),
        ),
        outcome(
            coef == 0.0,
            format!("{k} instances x 5 trials, violations={coef} min relative slack={min_coef_slack:.3e}"),
        ),
    )
}

fn conditioning_config(domain: &str, family: &str, values: &str, rules: &str, trials: usize, eps: &str) -> String {
    format!(
        r#"
experiment = "conditioning"
seed = 6
trials = {trials}
epsilons = {eps}

[domain]
kind = "{domain}"
dim = 2

[index_set]
kind = "{family}"

[schedule]
mode = "degree"
values = {values}
rules = {rules}
"#
    )
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rows = 0;
    let mut violations = 0;
    let mut max_ratio: f64 = 0.0;
    for domain in ["circle(1)", "lshape", "circle(0.5)", "disc_exclusion(0.5)"] {
        let text = conditioning_config(
            domain,
            "total_degree",
            "[4, 8, 12]",
            r#"["linear(1)", "loglinear(1)"]"#,
            5,
            "[1e-3, 1e-6, 1e-8, 1e-10]",
        );
        let cfg = ExperimentConfig::from_toml_str(&text).unwrap();
        let out = run(&cfg).unwrap();
        for name in ["conditioning.csv", "conditioning_trials.csv"] {
            let csv = out.file(name).unwrap();
            let c = csv_column(csv, "c_max").unwrap();
            let cap = csv_column(csv, "cap").unwrap();
            let se = csv_column(csv, "mc_rel_std_err").unwrap();
            for ((c, cap), se) in c.iter().zip(&cap).zip(&se) {
                rows += 1;
                let allowed = cap * (1.0 + 3.0 * se);
                max_ratio = max_ratio.max(c / allowed);
                if !(*c <= allowed) {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0,
        format!(
            "{rows} rows (summary and per-trial, including M = N) violations={violations} max C/cap={max_ratio:.3} runtime={:.2}s",
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let domain = DomainSpec::new(DomainKind::LShape, 2).unwrap();
    let basis = BasisKind::Legendre;
    let mut worst: f64 = 0.0;
    let mut details = Vec::new();
    let mut pass = true;
    for n in [2u32, 3, 4] {
        let set = total_degree_set(n, 2).unwrap();
        let nn = set.len();
        let m = sample_complexity_bound(nn, NikolskiiSource::Lambda(2.0 / 3.0), 0.5, 0.1).unwrap() as usize;
        let gram = monte_carlo_gram(&domain, &set, basis, 200_000, 70 + n as u64).unwrap();
        let g = gram.gram();
        let mut failures = 0;
        for t in 0..50u64 {
            let seed = trial_seed(7_000 + n as u64, t);
            let train =
                draw_samples_on_stream(&domain, SamplingMeasure::UniformOnOmega, m, seed, streams::TRAINING)
                    .unwrap();
            let a = assemble_design_matrix(&train, &set, basis).unwrap();
            let svd = FrameSvd::new(&a.matrix).unwrap();
            let c = c_upsilon_lambda_with_gram(&svd, &g);
            worst = worst.max(c);
            if c > 2f64.sqrt() {
                failures += 1;
            }
        }
        let frac = failures as f64 / 50.0;
        pass &= frac <= 0.2;
        details.push(format!("n={n} N={nn} M={m} fail={frac:.2}"));
    }
    let t = start.elapsed();
    outcome(
        pass && within(t, 600),
        format!(
            "{} max C={worst:.4} (limit sqrt2, failure fraction <= 0.2) runtime={:.2}s (limit 600s)",
            details.join("; "),
            t.as_secs_f64()
        ),
    )
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let values = "[5, 10, 15, 20, 23]";
    let r1 = ExperimentConfig::from_toml_str(&conditioning_config(
        "circle(1)",
        "total_degree",
        values,
        r#"["linear(1)"]"#,
        20,
        "[1e-8]",
    ))
    .unwrap();
    let r_half = ExperimentConfig::from_toml_str(&conditioning_config(
        "circle(0.5)",
        "total_degree",
        values,
        r#"["loglinear(1)"]"#,
        20,
        "[1e-8]",
    ))
    .unwrap();
    let out1 = run(&r1).unwrap();
    let out2 = run(&r_half).unwrap();
    let c1 = csv_column(out1.file("conditioning.csv").unwrap(), "c_max").unwrap();
    let c2 = csv_column(out2.file("conditioning.csv").unwrap(), "c_max").unwrap();
    let n = csv_column(out1.file("conditioning.csv").unwrap(), "N").unwrap();
    let last = *c1.last().unwrap();
    let max_half = c2.iter().copied().fold(0.0f64, f64::max);
    let t = start.elapsed();
    outcome(
        last > 1e3 && max_half < 10.0 && within(t, 600),
        format!(
            "r=1 linear(1) c_max at N={} is {last:.3e} (need > 1e3); r=1/2 loglinear(1) max c_max {max_half:.3} (need < 10) runtime={:.2}s (limit 600s)",
            n.last().unwrap(),
            t.as_secs_f64()
        ),
    )
}

fn criterion_9() -> Outcome {
    let domain = DomainSpec::new(DomainKind::SubBox { lower: -1.0, upper: 0.0 }, 1).unwrap();
    let mut pass = true;
    let mut details = Vec::new();
    for nn in [5usize, 10, 15] {
        let set = total_degree_set(nn as u32 - 1, 1).unwrap();
        let train =
            draw_samples_on_stream(&domain, SamplingMeasure::UniformOnOmega, 50 * nn, 9, streams::TRAINING).unwrap();
        let a = assemble_design_matrix(&train, &set, BasisKind::Legendre).unwrap();
        let cond = condition_number(&FrameSvd::new(&a.matrix).unwrap());
        let bound = cond_lower_bound_1d(nn, 1.0).unwrap();
        pass &= cond > bound;
        if nn == 15 {
            pass &= cond > 1e6;
        }
        details.push(format!("N={nn} cond={cond:.3e} bound={bound:.3e}"));
    }
    outcome(pass, format!("{} (and cond > 1e6 at N=15)", details.join("; ")))
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let text = r#"
experiment = "bounds"
seed = 10
trials = 50
eval_points = 5000
target = "cosmean"

[domain]
kind = "corner"
dim = 3

[index_set]
kind = "total_degree"

[schedule]
mode = "degree"
values = [2, 3, 4]
rules = ["linear(1)"]

[bounds]
delta = 0.5
gamma = 0.1
sample_complexity = true
"#;
    let cfg = ExperimentConfig::from_toml_str(text).unwrap();
    let out = run(&cfg).unwrap();
    let csv = out.file("bounds.csv").unwrap();
    let mean = csv_column(csv, "mean_sq_trunc_error").unwrap();
    let rhs = csv_column(csv, "trunc_rhs").unwrap();
    let m = csv_column(csv, "M").unwrap();
    let violations = mean.iter().zip(&rhs).filter(|(a, b)| !(a <= b)).count();
    let rows: Vec<String> = mean
        .iter()
        .zip(&rhs)
        .zip(&m)
        .map(|((a, b), m)| format!("M={m} mean={a:.3e} rhs={b:.3e}"))
        .collect();
    outcome(
        violations == 0,
        format!(
            "{} violations={violations} runtime={:.2}s",
            rows.join("; "),
            start.elapsed().as_secs_f64()
        ),
    )
}

fn criterion_11() -> Outcome {
    let configs = [
        bounds_config("lshape", 2, "cossin", "total_degree", 5, 1e-8),
        conditioning_config("circle(1)", "total_degree", "[3, 6]", r#"["linear(2)"]"#, 4, "[1e-8, 1e-4]"),
        r#"
experiment = "converge"
seed = 11
trials = 4
eval_points = 2000
target = "expmean"

[domain]
kind = "annulus(0.5,1)"
dim = 2

[index_set]
kind = "hyperbolic_cross"

[schedule]
mode = "budget"
values = [50, 200]
rules = ["loglinear(1)"]
"#
        .to_string(),
        r#"
experiment = "errormap"
seed = 12
target = "cossin"

[domain]
kind = "circle(1)"
dim = 2

[index_set]
kind = "total_degree"

[schedule]
mode = "degree"
values = [6]

[errormap]
grid = 32
"#
        .to_string(),
    ];
    let mut identical = 0;
    for text in &configs {
        let cfg = ExperimentConfig::from_toml_str(text).unwrap();
        let a = run(&cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| run(&cfg).unwrap());
        if a == b && !a.files.is_empty() {
            identical += 1;
        }
    }
    outcome(
        identical == configs.len(),
        format!(
            "{identical}/{} configs byte-identical across reruns (default pool vs 1 thread)",
            configs.len()
        ),
    )
}

fn main() {
    let mut failed = 0;
    let mut report = |id: &str, o: Outcome| {
        println!("acceptance {id}: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed += 1;
        }
    };
    report("1", criterion_1());
    report("2", criterion_2());
    report("3", criterion_3());
    let (c4, c5) = criteria_4_5();
    report("4", c4);
    report("5", c5);
    report("6", criterion_6());
    report("7", criterion_7());
    report("8", criterion_8());
    report("9", criterion_9());
    report("10", criterion_10());
    report("11", criterion_11());
    if failed > 0 {
        println!("acceptance: {failed} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all criteria passed");
}
