// SPDX-License-Identifier: MIT OR Apache-2.0

//! Analytic gradients against central finite differences.

use std::sync::Arc;

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use recourse::generators::{
    ddp_diversity_gradient, distance_gradient, gravitational_gradient, penalty_ddp_diversity, penalty_distance,
    penalty_gravitational, Norm,
};
use recourse::models::{train_autoencoder, AutoencoderConfig, Classifier, DeepEnsemble, LinearModel, Loss, Mlp};
use recourse::search::{compose_objective, ObjectiveContext, SearchSpace};
use recourse::Dataset;

const H: f64 = 1e-5;
const TOL: f64 = 1e-4;
const POINTS: usize = 10;

fn normal(rng: &mut ChaCha8Rng, n: usize) -> Array1<f64> {
    (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

fn normal2(rng: &mut ChaCha8Rng, r: usize, c: usize) -> Array2<f64> {
    Array2::from_shape_fn((r, c), |_| rng.sample::<f64, _>(StandardNormal))
}

fn fd<F: Fn(&Array1<f64>) -> f64>(f: F, x: &Array1<f64>) -> Array1<f64> {
    let mut g = Array1::zeros(x.len());
    for j in 0..x.len() {
        let mut a = x.clone();
        let mut b = x.clone();
        a[j] += H;
        b[j] -= H;
        g[j] = (f(&a) - f(&b)) / (2.0 * H);
    }
    g
}

fn fd2<F: Fn(&Array2<f64>) -> f64>(f: F, x: &Array2<f64>) -> Array2<f64> {
    let mut g = Array2::zeros(x.raw_dim());
    for idx in 0..x.len() {
        let (i, j) = (idx / x.ncols(), idx % x.ncols());
        let mut a = x.clone();
        let mut b = x.clone();
        a[[i, j]] += H;
        b[[i, j]] -= H;
        g[[i, j]] = (f(&a) - f(&b)) / (2.0 * H);
    }
    g
}

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(b.iter().map(|x| x * x).sum::<f64>().sqrt());
    diff / scale.max(1e-8)
}

fn models(rng: &mut ChaCha8Rng, dim: usize) -> Vec<(&'static str, Box<dyn Classifier>)> {
    let lin_bin = LinearModel::new(normal2(rng, 1, dim), normal(rng, 1)).unwrap();
    let lin_multi = LinearModel::new(normal2(rng, 3, dim), normal(rng, 3)).unwrap();
    let mlp = Mlp::init(&[dim, 8, 3], 0.0, rng).unwrap();
    let members = (0..3).map(|_| Mlp::init(&[dim, 6, 6, 1], 0.0, rng).unwrap()).collect();
    let ensemble = DeepEnsemble::new(members).unwrap();
    vec![
        ("linear binary", Box::new(lin_bin)),
        ("linear multiclass", Box::new(lin_multi)),
        ("mlp", Box::new(mlp)),
        ("ensemble", Box::new(ensemble)),
    ]
}

#[test]
fn model_input_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let dim = 4;
    for (name, m) in models(&mut rng, dim) {
        let losses: &[Loss] = if m.output_dim() == 1 {
            &[Loss::LogitBinaryCrossentropy, Loss::Hinge]
        } else {
            &[Loss::LogitCrossentropy, Loss::Hinge]
        };
        for &loss in losses {
            for _ in 0..POINTS {
                let x = normal(&mut rng, dim);
                let target = rng.random_range(1..=m.n_classes());
                let g = m.input_gradient(x.view(), target, loss).unwrap();
                let n = fd(|z| m.loss(z.view(), target, loss).unwrap(), &x);
                let e = rel_err(g.as_slice().unwrap(), n.as_slice().unwrap());
                assert!(e <= TOL, "{name} {loss:?}: relative error {e}");
            }
        }
    }
}

#[test]
fn penalty_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let dim = 5;
    let mad: Vec<f64> = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
    for _ in 0..POINTS {
        let x = normal(&mut rng, dim);
        let cf = normal(&mut rng, dim);
        for norm in [Norm::L1, Norm::L2, Norm::Linf, Norm::Mad] {
            let g = distance_gradient(cf.view(), x.view(), norm, Some(&mad)).unwrap();
            let n = fd(|z| penalty_distance(z.view(), x.view(), norm, Some(&mad)).unwrap(), &cf);
            let e = rel_err(g.as_slice().unwrap(), n.as_slice().unwrap());
            assert!(e <= TOL, "{norm:?}: relative error {e}");
        }
        let centroid = normal(&mut rng, dim);
        let g = gravitational_gradient(cf.view(), centroid.view());
        let n = fd(|z| penalty_gravitational(z.view(), centroid.view()), &cf);
        assert!(rel_err(g.as_slice().unwrap(), n.as_slice().unwrap()) <= TOL);

        let cfs = normal2(&mut rng, 4, dim);
        let g = ddp_diversity_gradient(cfs.view()).unwrap();
        let n = fd2(|z| penalty_ddp_diversity(z.view()).unwrap(), &cfs);
        let e = rel_err(g.as_slice().unwrap(), n.as_slice().unwrap());
        assert!(e <= TOL, "ddp: relative error {e}");
    }
}

fn dataset(rng: &mut ChaCha8Rng, n: usize, dim: usize) -> Dataset {
    let x = normal2(rng, n, dim);
    let y = (0..n).map(|i| i % 3 + 1).collect();
    let names = (0..dim).map(|j| format!("f{j}")).collect();
    Dataset::new(names, x, y).unwrap()
}

#[test]
fn objective_gradients_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dim = 3;
    let data = dataset(&mut rng, 60, dim);
    let penalties = [
        "distance_l1",
        "distance_l2",
        "distance_linf",
        "distance_mad",
        "ddp_diversity",
        "gravitational",
        "claproar",
    ];
    for (name, m) in models(&mut rng, dim) {
        for id in penalties {
            let obj = compose_objective(None, &[(id, 0.7)], SearchSpace::Feature, 3).unwrap();
            for _ in 0..POINTS {
                let x = normal(&mut rng, dim);
                let target = rng.random_range(1..=m.n_classes());
                let ctx = ObjectiveContext::new(&obj, m.as_ref(), &data, &x, target).unwrap();
                let states = normal2(&mut rng, 3, dim);
                let g = obj.gradient(states.view(), &ctx).unwrap();
                let n = fd2(|s| obj.value(s.view(), &ctx).unwrap(), &states);
                let e = rel_err(g.as_slice().unwrap(), n.as_slice().unwrap());
                assert!(e <= TOL, "{name} + {id}: relative error {e}");
            }
        }
    }
}

#[test]
fn latent_objective_gradient_chains_through_decoder() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let dim = 4;
    let data = dataset(&mut rng, 80, dim);
    let cfg = AutoencoderConfig {
        hidden: vec![6],
        epochs: 5,
        ..AutoencoderConfig::default()
    };
    let ae = Arc::new(train_autoencoder(&data, 2, &cfg).unwrap());
    let m = Mlp::init(&[dim, 5, 3], 0.0, &mut rng).unwrap();
    let mut obj = compose_objective(None, &[("distance_l2", 0.3), ("gravitational", 0.2)], SearchSpace::Latent, 2).unwrap();
    obj.autoencoder = Some(ae);
    for _ in 0..POINTS {
        let x = normal(&mut rng, dim);
        let ctx = ObjectiveContext::new(&obj, &m, &data, &x, 2).unwrap();
        let z = normal2(&mut rng, 2, 2);
        let g = obj.gradient(z.view(), &ctx).unwrap();
        let n = fd2(|s| obj.value(s.view(), &ctx).unwrap(), &z);
        let e = rel_err(g.as_slice().unwrap(), n.as_slice().unwrap());
        assert!(e <= TOL, "latent: relative error {e}");
    }
}
