// SPDX-License-Identifier: MIT OR Apache-2.0

//! End-to-end acceptance checks. Runs without the libtest harness and prints
//! one PASS/FAIL line per criterion; exits non-zero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::Instant;

use ndarray::{array, Array1, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use recourse::dataset::load_csv;
use recourse::eval::{benchmark, choose_factuals, plausibility_of, BenchmarkConfig, ModelEntry};
use recourse::generators::{feature_tweak, penalty_ddp_diversity, penalty_distance, FeatureTweakConfig, Norm};
use recourse::models::{
    train_autoencoder, AutoencoderConfig, Classifier, DecisionTree, DeepEnsemble, LinearModel, Mlp, Model, ModelSpec,
    TrainConfig, TreeModel, TreeNode, VoteRule,
};
use recourse::search::{compose_objective, ConvergedReason, ConvergenceConfig, ObjectiveContext, SearchOptions, SearchSpace};
use recourse::{generate_counterfactual, load_synthetic, train, Dataset, Generator, Mutability, SyntheticKind};

// Tolerances and sizes fixed by the acceptance contract.
const C1_FACTUALS: usize = 100;
const C1_MIN_VALIDITY: f64 = 0.95;
const C1_MAX_ITER: usize = 1000;
const C2_POINTS: usize = 10;
const C2_REL_TOL: f64 = 1e-4;
const C3_RUNS: usize = 50;
const C4_FACTUALS: usize = 20;
const C4_RUNS: usize = 5;
const C4_MIN_RATIO: f64 = 2.0;
const C5_FACTUALS: usize = 50;
const C6_TREES: usize = 20;
const C6_MAX_LEAVES: usize = 64;
const C7_SEEDS: u64 = 20;
const C7_MAX_COST: f64 = 2.0;
const C8_MAD_EXPECTED: f64 = 2.0;
const C8_MAD_TOL: f64 = 1e-12;
const C8_ROWS: usize = 1000;
const C10_FACTUALS: usize = 50;
const C10_MIN_VALIDITY: f64 = 0.8;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn separable() -> (Dataset, Model) {
    let d = load_synthetic(SyntheticKind::LinearlySeparable, 1000, 1).unwrap();
    let (m, _) = train(&ModelSpec::Linear, &d, &TrainConfig::default()).unwrap();
    (d, m)
}

fn opts(seed: u64, max_iter: usize) -> SearchOptions {
    SearchOptions {
        seed,
        convergence: ConvergenceConfig {
            max_iter,
            ..ConvergenceConfig::default()
        },
        ..SearchOptions::default()
    }
}

fn l2(a: &[f64], b: &[f64]) -> f64 {
    let mut s = 0.0;
    for j in 0..a.len() {
        s += (a[j] - b[j]) * (a[j] - b[j]);
    }
    s.sqrt()
}

fn generic_validity() -> Outcome {
    let (d, m) = separable();
    let g = Generator::preset("generic").unwrap();
    let rows = choose_factuals(&d, &m, 2, C1_FACTUALS, 1).unwrap();
    let mut valid = 0;
    for (i, &row) in rows.iter().enumerate() {
        let x = d.select_factual(row).unwrap();
        let es = generate_counterfactual(&x, 2, &d, &m, &g, &opts(i as u64, C1_MAX_ITER)).unwrap();
        valid += usize::from(es.is_valid(&m).unwrap());
    }
    let frac = valid as f64 / rows.len() as f64;
    check(
        rows.len() == C1_FACTUALS && frac >= C1_MIN_VALIDITY,
        format!("{valid}/{} valid (need >= {C1_MIN_VALIDITY})", rows.len()),
    )
}

fn normal(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn normal2(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| rng.sample::<f64, _>(StandardNormal))
}

fn rel_err(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    let diff = (a - b).mapv(|v| v * v).sum().sqrt();
    let scale = a.mapv(|v| v * v).sum().sqrt().max(b.mapv(|v| v * v).sum().sqrt());
    diff / scale.max(1e-8)
}

fn gradient_correctness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let dim = 3;
    let data = Dataset::new(
        (0..dim).map(|j| format!("f{j}")).collect(),
        normal2(&mut rng, 90, dim),
        (0..90).map(|i| i % 3 + 1).collect(),
    )
    .unwrap();
    let models: Vec<(&str, Box<dyn Classifier>)> = vec![
        ("linear", Box::new(LinearModel::new(normal2(&mut rng, 3, dim), normal(&mut rng, 3)).unwrap())),
        ("mlp", Box::new(Mlp::init(&[dim, 8, 3], 0.0, &mut rng).unwrap())),
        (
            "ensemble",
            Box::new(DeepEnsemble::new((0..3).map(|_| Mlp::init(&[dim, 6, 3], 0.0, &mut rng).unwrap()).collect()).unwrap()),
        ),
    ];
    let penalties = [
        "distance_l1",
        "distance_l2",
        "distance_linf",
        "distance_mad",
        "ddp_diversity",
        "gravitational",
        "claproar",
    ];
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for (_, m) in &models {
        for id in penalties {
            let obj = compose_objective(None, &[(id, 0.5)], SearchSpace::Feature, 2).unwrap();
            for _ in 0..C2_POINTS {
                let x = normal(&mut rng, dim);
                let t = rng.random_range(1..=3);
                let ctx = ObjectiveContext::new(&obj, m.as_ref(), &data, &x, t).unwrap();
                let s = normal2(&mut rng, 2, dim);
                let g = obj.gradient(s.view(), &ctx).unwrap();
                let mut n = Array2::zeros(s.raw_dim());
                for idx in 0..s.len() {
                    let (i, j) = (idx / dim, idx % dim);
                    let mut a = s.clone();
                    let mut b = s.clone();
                    a[[i, j]] += h;
                    b[[i, j]] -= h;
                    n[[i, j]] = (obj.value(a.view(), &ctx).unwrap() - obj.value(b.view(), &ctx).unwrap()) / (2.0 * h);
                }
                worst = worst.max(rel_err(&g, &n));
                checks += 1;
            }
        }
    }
    check(
        worst <= C2_REL_TOL,
        format!("{checks} checks over 3 models x {} penalties, worst relative error {worst:.2e}", penalties.len()),
    )
}

fn mutability() -> Outcome {
    let (d, m) = separable();
    let g = Generator::preset("generic").unwrap();
    let rows = choose_factuals(&d, &m, 2, C3_RUNS, 3).unwrap();
    let fixed = d.clone().set_mutability(vec![Mutability::None, Mutability::Both]).unwrap();
    let up = d.clone().set_mutability(vec![Mutability::Increase, Mutability::Both]).unwrap();
    let mut frozen_ok = true;
    let mut up_ok = true;
    let mut terminal_ok = true;
    for (i, &row) in rows.iter().enumerate() {
        let x = d.select_factual(row).unwrap();
        let o = SearchOptions {
            init_noise: Some(0.1),
            ..opts(i as u64, C1_MAX_ITER)
        };
        let a = generate_counterfactual(&x, 2, &fixed, &m, &g, &o).unwrap();
        frozen_ok &= a.path.iter().all(|p| p.column(0).iter().all(|v| v.to_bits() == x[0].to_bits()));
        // The boundary is unreachable along the second axis alone.
        terminal_ok &= a.converged_reason == Some(ConvergedReason::MaxIter) && !a.is_valid(&m).unwrap();
        let b = generate_counterfactual(&x, 2, &up, &m, &g, &o).unwrap();
        up_ok &= b.path.iter().all(|p| p.column(0).iter().all(|v| *v >= x[0]));
    }
    check(
        frozen_ok && up_ok && terminal_ok,
        format!(
            "{C3_RUNS} runs: immutable bitwise {frozen_ok}, increase envelope {up_ok}, unreachable -> max_iter and invalid {terminal_ok}"
        ),
    )
}

fn mean_pairwise(cfs: &Array2<f64>) -> f64 {
    let l = cfs.nrows();
    let mut acc = 0.0;
    for i in 0..l {
        for j in i + 1..l {
            acc += l2(cfs.row(i).as_slice().unwrap(), cfs.row(j).as_slice().unwrap());
        }
    }
    acc / (l * (l - 1) / 2) as f64
}

fn diversity() -> Outcome {
    let (d, m) = separable();
    let dice = Generator::preset("dice").unwrap().with_num_counterfactuals(C4_RUNS).unwrap();
    let generic = Generator::preset("generic").unwrap();
    let rows = choose_factuals(&d, &m, 2, C4_FACTUALS, 4).unwrap();
    let (mut dice_spread, mut generic_spread) = (0.0, 0.0);
    let mut dice_valid = 0.0;
    for (i, &row) in rows.iter().enumerate() {
        let x = d.select_factual(row).unwrap();
        let es = generate_counterfactual(&x, 2, &d, &m, &dice, &opts(i as u64, C1_MAX_ITER)).unwrap();
        dice_spread += mean_pairwise(&es.counterfactuals);
        dice_valid += es.validity_fraction(&m).unwrap();
        // Independent runs start from the same initial noise level as dice.
        let mut runs = Array2::zeros((C4_RUNS, 2));
        for r in 0..C4_RUNS {
            let o = SearchOptions {
                init_noise: Some(0.1),
                ..opts((i * C4_RUNS + r) as u64 + 10_000, C1_MAX_ITER)
            };
            let one = generate_counterfactual(&x, 2, &d, &m, &generic, &o).unwrap();
            runs.row_mut(r).assign(&one.counterfactuals.row(0));
        }
        generic_spread += mean_pairwise(&runs);
    }
    let n = rows.len() as f64;
    let ratio = dice_spread / generic_spread;
    let sweep: Vec<f64> = [0.5, 1.0, 2.0]
        .iter()
        .map(|s| penalty_ddp_diversity(array![[0.0, 0.0], [*s, 0.0], [0.0, *s]].view()).unwrap())
        .collect();
    let monotone = sweep[0] > sweep[1] && sweep[1] > sweep[2];
    check(
        ratio >= C4_MIN_RATIO && monotone,
        format!(
            "dice spread {:.4} vs generic {:.4} (ratio {ratio:.2}, need >= {C4_MIN_RATIO}), dice validity {:.2}, ddp sweep {sweep:.4?}",
            dice_spread / n,
            generic_spread / n,
            dice_valid / n
        ),
    )
}

fn tradeoff() -> Outcome {
    let d = load_synthetic(SyntheticKind::LinearlySeparable, 1000, 1).unwrap().standardize().unwrap();
    let (m, _) = train(&ModelSpec::Linear, &d, &TrainConfig::default()).unwrap();
    let ae_cfg = AutoencoderConfig {
        hidden: vec![],
        ..AutoencoderConfig::default()
    };
    let ae = Arc::new(train_autoencoder(&d, 1, &ae_cfg).unwrap());
    let gens = vec![
        Generator::preset("generic").unwrap(),
        Generator::preset("revise").unwrap().with_autoencoder(ae).unwrap(),
        Generator::preset("gravitational").unwrap(),
    ];
    let cfg = BenchmarkConfig {
        dataset: "linearly_separable".into(),
        n_samples: C5_FACTUALS,
        seed: 1,
        ..BenchmarkConfig::default()
    };
    let table = benchmark(&d, &[ModelEntry { name: "linear".into(), model: &m }], &gens, &cfg).unwrap();
    let s = table.summary();
    let (generic, revise, grav) = (&s[0], &s[1], &s[2]);
    let ok = generic.cost < grav.cost && generic.implausibility > grav.implausibility && generic.implausibility > revise.implausibility;
    check(
        ok,
        format!(
            "cost generic {:.3} < gravitational {:.3}; implausibility generic {:.4} > gravitational {:.4}, revise {:.4}",
            generic.cost, grav.cost, generic.implausibility, grav.implausibility, revise.implausibility
        ),
    )
}

fn random_tree(rng: &mut ChaCha8Rng, dim: usize, max_depth: usize) -> DecisionTree {
    fn grow(rng: &mut ChaCha8Rng, nodes: &mut Vec<TreeNode>, lo: Vec<f64>, hi: Vec<f64>, depth: usize) -> usize {
        let id = nodes.len();
        if depth == 0 || (depth < 5 && rng.random_bool(0.2)) {
            let p: f64 = [0.1, 0.25, 0.4, 0.6, 0.75, 0.9][rng.random_range(0..6)];
            nodes.push(TreeNode::Leaf { probs: vec![p, 1.0 - p] });
            return id;
        }
        let f = rng.random_range(0..lo.len());
        let t = lo[f] + (hi[f] - lo[f]) * rng.random_range(0.1..0.9);
        nodes.push(TreeNode::Leaf { probs: vec![0.5, 0.5] });
        let (mut lhi, mut rlo) = (hi.clone(), lo.clone());
        lhi[f] = t;
        rlo[f] = t;
        let left = grow(rng, nodes, lo, lhi, depth - 1);
        let right = grow(rng, nodes, rlo, hi, depth - 1);
        nodes[id] = TreeNode::Split {
            feature: f,
            threshold: t,
            left,
            right,
        };
        id
    }
    let mut nodes = Vec::new();
    grow(rng, &mut nodes, vec![-4.0; dim], vec![4.0; dim], max_depth);
    DecisionTree::new(dim, 2, nodes).unwrap()
}

/// Minimum cost over every leaf's ε-instance, found by walking the node array.
fn enumerated_minimum(model: &TreeModel, x: &[f64], t: usize, eps: f64) -> Option<f64> {
    let nodes = model.trees()[0].nodes();
    let mut best: Option<f64> = None;
    let mut stack = vec![(0usize, x.to_vec())];
    while let Some((i, cand)) = stack.pop() {
        match &nodes[i] {
            TreeNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                let mut l = cand.clone();
                l[*feature] = threshold - eps;
                let mut r = cand;
                r[*feature] = threshold + eps;
                stack.push((*left, l));
                stack.push((*right, r));
            }
            TreeNode::Leaf { probs } => {
                let pred = model.predict(Array2::from_shape_vec((1, x.len()), cand.clone()).unwrap().view()).unwrap()[0];
                if (probs[1] > probs[0]) == (t == 2) && pred == t {
                    let c = l2(&cand, x);
                    best = Some(best.map_or(c, |b| b.min(c)));
                }
            }
        }
    }
    best
}

fn feature_tweak_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let dim = 4;
    let data = Dataset::new(
        (0..dim).map(|j| format!("f{j}")).collect(),
        Array2::from_shape_fn((4, dim), |(i, j)| (i + j) as f64),
        vec![1, 2, 1, 2],
    )
    .unwrap();
    let cfg = FeatureTweakConfig::default();
    let mut matched = 0;
    let mut with_candidates = 0;
    let mut leaves_max = 0;
    for _ in 0..C6_TREES {
        let tree = random_tree(&mut rng, dim, 5);
        let leaves = tree.nodes().iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count();
        leaves_max = leaves_max.max(leaves);
        let model = TreeModel::new(vec![tree], VoteRule::Majority).unwrap();
        let x: Vec<f64> = (0..dim).map(|_| rng.random_range(-4.0..4.0)).collect();
        let xa = Array1::from(x.clone());
        let t = 3 - model.predict(xa.view().insert_axis(Axis(0))).unwrap()[0];
        let es = feature_tweak(&xa, t, &data, &model, &cfg).unwrap();
        let got = l2(es.counterfactuals.row(0).as_slice().unwrap(), &x);
        let agrees = match enumerated_minimum(&model, &x, t, cfg.epsilon) {
            Some(want) => {
                with_candidates += 1;
                es.converged_reason == Some(ConvergedReason::ThresholdReached) && got == want
            }
            None => es.converged_reason == Some(ConvergedReason::NoCandidate),
        };
        matched += usize::from(agrees);
    }
    check(
        matched == C6_TREES && leaves_max <= C6_MAX_LEAVES,
        format!(
            "{matched}/{C6_TREES} trees agree with leaf enumeration ({with_candidates} with a candidate, matched exactly; largest tree {leaves_max} leaves)"
        ),
    )
}

fn growing_spheres_geometry() -> Outcome {
    let m = LinearModel::new(array![[1.0, 0.0]], array![0.0]).unwrap();
    let d = Dataset::new(
        vec!["x1".into(), "x2".into()],
        array![[-1.0, 0.0], [1.0, 0.0], [-2.0, 1.0], [2.0, -1.0]],
        vec![1, 2, 1, 2],
    )
    .unwrap();
    let g = Generator::preset("growing_spheres").unwrap();
    let x = array![-1.0, 0.0];
    let mut ok = 0;
    let mut worst: f64 = 0.0;
    for seed in 0..C7_SEEDS {
        let es = generate_counterfactual(&x, 2, &d, &m, &g, &opts(seed, C1_MAX_ITER)).unwrap();
        let cf = es.counterfactuals.row(0);
        let cost = l2(cf.as_slice().unwrap(), x.as_slice().unwrap());
        worst = worst.max(cost);
        if cf[0] > 0.0 && cost <= C7_MAX_COST {
            ok += 1;
        }
    }
    check(
        ok == C7_SEEDS,
        format!("{ok}/{C7_SEEDS} seeds cross x1 = 0 within cost {C7_MAX_COST} (largest {worst:.3})"),
    )
}

fn evaluation_metrics() -> Outcome {
    let mad = penalty_distance(array![1.0, 2.0].view(), array![0.0, 0.0].view(), Norm::Mad, Some(&[1.0, 2.0])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let x = Array2::from_shape_fn((C8_ROWS, 3), |_| rng.random_range(-5.0..5.0));
    let y: Vec<usize> = (0..C8_ROWS).map(|_| rng.random_range(1..=2)).collect();
    let d = Dataset::new(vec!["a".into(), "b".into(), "c".into()], x.clone(), y.clone()).unwrap();
    let mut exact = 0;
    let trials = 20;
    for trial in 0..trials {
        let k = 1 + trial % 7;
        let cf: Vec<f64> = (0..3).map(|_| rng.random_range(-5.0..5.0)).collect();
        let mut dist: Vec<f64> = (0..C8_ROWS)
            .filter(|&i| y[i] == 2)
            .map(|i| l2(x.row(i).as_slice().unwrap(), &cf))
            .collect();
        let mut acc = 0.0;
        for _ in 0..k {
            let (at, v) = dist
                .iter()
                .enumerate()
                .fold((0, f64::INFINITY), |b, (i, v)| if *v < b.1 { (i, *v) } else { b });
            acc += v;
            dist.swap_remove(at);
        }
        if plausibility_of(Array1::from(cf).view(), 2, &d, k).unwrap() == acc / k as f64 {
            exact += 1;
        }
    }
    check(
        (mad - C8_MAD_EXPECTED).abs() <= C8_MAD_TOL && exact == trials,
        format!("distance_mad = {mad}; plausibility equals brute-force kNN in {exact}/{trials} queries on {C8_ROWS} rows"),
    )
}

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_recourse"));
    c.env_remove("RECOURSE_SEED");
    c
}

fn run(dir: &Path, args: &[&str]) -> std::process::Output {
    let out = bin().args(args).current_dir(dir).output().unwrap();
    assert!(
        matches!(out.status.code(), Some(0 | 1)),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let data = "synthetic:overlapping:500:2";
    run(p, &["train", "--data", data, "--model", "linear", "--seed", "1", "-o", "linear.json"]);
    run(p, &["train", "--data", data, "--model", "mlp", "--epochs", "30", "--seed", "1", "-o", "mlp.json"]);
    let bench = |out: &str| {
        run(
            p,
            &[
                "benchmark", "--data", data, "--model", "linear.json,mlp.json", "--generator",
                "generic,dice,greedy,gravitational,growing_spheres", "--target", "2", "--n-samples", "15", "--seed", "7",
                "-o", out,
            ],
        );
        std::fs::read(p.join(out)).unwrap()
    };
    let a = bench("a.csv");
    let b = bench("b.csv");
    let lines = a.iter().filter(|c| **c == b'\n').count();
    check(a == b, format!("two runs, {} bytes / {lines} lines, identical: {}", a.len(), a == b))
}

fn gmsc_workflow() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let csv = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/data/gmsc_standin.csv");
    let target_col = "SeriousDlqin2yrs";
    run(
        p,
        &[
            "train", "--data", csv, "--target", target_col, "--model", "mlp", "--hidden", "32", "--dropout", "0.1",
            "--seed", "1", "-o", "mlp.json",
        ],
    );
    run(
        p,
        &[
            "generate", "--data", csv, "--target-column", target_col, "--model", "mlp.json", "--target", "0",
            "--mutability", "age=increase", "--generator", "gravitational", "--count", &C10_FACTUALS.to_string(),
            "--seed", "1", "-o", "ces.json",
        ],
    );
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(p.join("ces.json")).unwrap()).unwrap();
    let list = doc.as_array().unwrap();
    let data = load_csv(csv, target_col, true).unwrap();
    let age = data.feature_index("age").unwrap();
    let mut valid = 0;
    let mut age_ok = true;
    for e in list {
        valid += usize::from(e["valid"][0].as_bool().unwrap());
        let a0 = e["factual"][age].as_f64().unwrap();
        for step in e["path"].as_array().unwrap() {
            age_ok &= step[0][age].as_f64().unwrap() >= a0;
        }
        age_ok &= e["counterfactuals_original"][0][age].as_f64().unwrap() >= e["factual_original"][age].as_f64().unwrap();
    }
    let frac = valid as f64 / list.len() as f64;
    check(
        list.len() == C10_FACTUALS && frac >= C10_MIN_VALIDITY && age_ok,
        format!("{valid}/{} valid (need >= {C10_MIN_VALIDITY}), age never decreases: {age_ok}", list.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("generic validity", generic_validity),
        ("gradient correctness", gradient_correctness),
        ("mutability", mutability),
        ("diversity", diversity),
        ("tradeoff ordering", tradeoff),
        ("feature tweak oracle", feature_tweak_oracle),
        ("growing spheres geometry", growing_spheres_geometry),
        ("evaluation metrics", evaluation_metrics),
        ("determinism", determinism),
        ("gmsc workflow", gmsc_workflow),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name} ({secs:.1}s): {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
