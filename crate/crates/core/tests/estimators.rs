use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qzo_core::circuits::{CircuitTemplate, GateSlot};
use qzo_core::optimizers::{
    hessian_sample, metric_sample, spsa_gradient, Algorithm, FidelityOracle, HyperParams,
    LossOracle, Optimizer,
};
use qzo_core::problems::energy_loss;
use qzo_core::rng::StreamKey;
use qzo_core::simulator::{Axis, Observable, PauliTerm};

fn sign_vectors(d: usize) -> Vec<Vec<f64>> {
    (0..1u32 << d)
        .map(|bits| (0..d).map(|i| if bits >> i & 1 == 1 { -1.0 } else { 1.0 }).collect())
        .collect()
}

struct Quadratic {
    a: DMatrix<f64>,
    b: DVector<f64>,
}

impl Quadratic {
    fn random(rng: &mut impl Rng, d: usize) -> Self {
        Quadratic {
            a: DMatrix::from_fn(d, d, |_, _| rng.random_range(-2.0..2.0)),
            b: DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0)),
        }
    }

    fn value(&self, theta: &[f64]) -> f64 {
        let t = DVector::from_column_slice(theta);
        (t.transpose() * &self.a * &t)[(0, 0)] + self.b.dot(&t)
    }

    fn gradient(&self, theta: &[f64]) -> DVector<f64> {
        let t = DVector::from_column_slice(theta);
        (&self.a + self.a.transpose()) * t + &self.b
    }

    fn hessian(&self) -> DMatrix<f64> {
        &self.a + self.a.transpose()
    }
}

#[test]
fn spsa_average_is_exact_gradient() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let q = Quadratic::random(&mut rng, 3);
        let theta: Vec<f64> = (0..3).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut oracle = LossOracle::new(|t| Ok(q.value(t)));
        let deltas = sign_vectors(3);
        let mut avg = DVector::zeros(3);
        for delta in &deltas {
            avg += DVector::from_vec(spsa_gradient(&mut oracle, &theta, 0.1, delta).unwrap());
        }
        avg /= deltas.len() as f64;
        assert!((avg - q.gradient(&theta)).amax() < 1e-10);
    }
}

#[test]
fn hessian_average_is_exact() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for d in [2, 3] {
        let q = Quadratic::random(&mut rng, d);
        let theta: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let mut oracle = LossOracle::new(|t| Ok(q.value(t)));
        let signs = sign_vectors(d);
        let mut avg = DMatrix::zeros(d, d);
        for delta in &signs {
            for delta2 in &signs {
                avg += hessian_sample(&mut oracle, &theta, 0.07, delta, delta2).unwrap();
            }
        }
        avg /= (signs.len() * signs.len()) as f64;
        assert!((avg - q.hessian()).amax() < 1e-10, "d = {d}");
    }
}

fn ry_loss() -> qzo_core::LossFunction {
    let template = CircuitTemplate::new(1, vec![GateSlot::rotation(Axis::Y, 0, 0)]).unwrap();
    let obs = Observable::new(1, vec![PauliTerm::single(1.0, 0, Axis::Z)]).unwrap();
    energy_loss(template, obs).unwrap()
}

fn averaged_metric(eps: f64, theta: f64) -> f64 {
    let loss = ry_loss();
    let mut oracle = FidelityOracle::from_loss(&loss);
    let signs = sign_vectors(1);
    let mut total = 0.0;
    for d1 in &signs {
        for d2 in &signs {
            total += metric_sample(&mut oracle, &[theta], eps, d1, d2).unwrap()[(0, 0)];
        }
    }
    total / 4.0
}

#[test]
fn ry_metric_converges_at_second_order() {
    let mut errors = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        for theta in [-2.0, 0.0, 0.7] {
            let m = averaged_metric(eps, theta);
            let closed_form = eps.sin().powi(2) / (4.0 * eps * eps);
            assert!((m - closed_form).abs() < 1e-12);
            assert!((m - 0.25).abs() <= 5.0 * eps * eps);
        }
        errors.push((averaged_metric(eps, 0.3) - 0.25).abs());
    }
    for w in errors.windows(2) {
        let ratio = w[1] / w[0];
        assert!((0.2..0.3).contains(&ratio), "halving ε gave error ratio {ratio}");
    }
}

#[test]
fn every_optimizer_descends_a_convex_bowl() {
    let f = |t: &[f64]| Ok(t.iter().enumerate().map(|(i, x)| (1.0 + i as f64) * x * x).sum());
    let theta0 = vec![1.0, -0.8, 0.5, 0.3];
    let f0: f64 = f(&theta0).unwrap();
    for a in Algorithm::ALL {
        let mut opt = Optimizer::new(HyperParams::defaults(a), theta0.clone(), StreamKey(9)).unwrap();
        let mut loss = LossOracle::new(f);
        let mut fid = FidelityOracle::new(|x, y| {
            let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
            Ok((-2.0 * d2).exp())
        });
        opt.prime(&mut loss).unwrap();
        for _ in 0..300 {
            let fid = a.needs_fidelity().then_some(&mut fid);
            opt.step(&mut loss, fid).unwrap();
        }
        let end = f(opt.theta()).unwrap();
        assert!(end < 0.5 * f0, "{a}: {f0} -> {end}");
    }
}
