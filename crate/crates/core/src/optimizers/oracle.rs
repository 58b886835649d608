use crate::error::Result;
use crate::problems::LossFunction;
use crate::simulator::fidelity;

type LossFn<'a> = dyn Fn(&[f64]) -> Result<f64> + 'a;
type FidelityFn<'a> = dyn Fn(&[f64], &[f64]) -> Result<f64> + 'a;

/// Counting wrapper around the loss. Optimizers see the problem only
/// through this.
pub struct LossOracle<'a> {
    func: Box<LossFn<'a>>,
    queries: u64,
}

impl<'a> LossOracle<'a> {
    pub fn new(func: impl Fn(&[f64]) -> Result<f64> + 'a) -> Self {
        LossOracle {
            func: Box::new(func),
            queries: 0,
        }
    }

    pub fn from_loss(loss: &'a LossFunction) -> Self {
        LossOracle::new(move |theta| loss.evaluate(theta))
    }

    pub fn evaluate(&mut self, theta: &[f64]) -> Result<f64> {
        self.queries += 1;
        (self.func)(theta)
    }

    /// Number of `evaluate` calls so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }
}

/// Counting wrapper around `F(θ, θ′) = |⟨ψ(θ)|ψ(θ′)⟩|²`.
pub struct FidelityOracle<'a> {
    func: Box<FidelityFn<'a>>,
    queries: u64,
}

impl<'a> FidelityOracle<'a> {
    pub fn new(func: impl Fn(&[f64], &[f64]) -> Result<f64> + 'a) -> Self {
        FidelityOracle {
            func: Box::new(func),
            queries: 0,
        }
    }

    pub fn from_loss(loss: &'a LossFunction) -> Self {
        FidelityOracle::new(move |a, b| fidelity(&loss.state(a)?, &loss.state(b)?))
    }

    pub fn evaluate(&mut self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.queries += 1;
        (self.func)(a, b)
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_every_call() {
        let mut o = LossOracle::new(|t| Ok(t[0] * t[0]));
        for _ in 0..5 {
            o.evaluate(&[1.0]).unwrap();
        }
        assert_eq!(o.queries(), 5);

        let mut f = FidelityOracle::new(|_, _| Ok(1.0));
        f.evaluate(&[0.0], &[1.0]).unwrap();
        assert_eq!(f.queries(), 1);
    }
}
