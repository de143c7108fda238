//! Seeded sampling of `u(X)` with `X` uniform on the domain.
//!
//! The generator is ChaCha8 (`rand_chacha::ChaCha8Rng`) seeded with
//! `seed_from_u64(seed)`. Sharded runs give shard `k` the same seed on
//! stream `k` and draw `⌊n/s⌋` points, plus one for the first `n mod s`
//! shards; the pooled sample is then sorted. A single shard is exactly the
//! unsharded run, and a fixed `(seed, n, s)` always yields the same sample.

use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exprfn::{EvaluateError, PartitionedFunction};

pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_SAMPLES: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SampleError {
    #[error("sample size must be at least 1")]
    Empty,
    #[error("shard count must be at least 1")]
    NoShards,
    #[error(transparent)]
    Evaluate(#[from] EvaluateError),
}

/// Sorted draws of `u(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    values: Vec<f64>,
    seed: u64,
}

impl EmpiricalSample {
    /// Wraps arbitrary values, sorting them.
    pub fn from_values(mut values: Vec<f64>, seed: u64) -> Self {
        values.sort_by(f64::total_cmp);
        EmpiricalSample { values, seed }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Single-column CSV with a `value` header.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["value"])?;
        for v in &self.values {
            w.write_record([v.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn draw(u: &PartitionedFunction, rng: &mut ChaCha8Rng, n: usize, out: &mut Vec<f64>) -> Result<(), SampleError> {
    let (a, _) = u.domain();
    let m = u.measure();
    let mut taken = 0;
    while taken < n {
        let x = a + m * rng.random::<f64>();
        match u.evaluate(x) {
            Ok(y) => {
                out.push(y);
                taken += 1;
            }
            // knots and the left endpoint are null sets; draw again
            Err(EvaluateError::OnKnot(_) | EvaluateError::OutsideDomain(_)) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(())
}

/// `n` draws from a single stream.
pub fn monte_carlo_pushforward(u: &PartitionedFunction, n: usize, seed: u64) -> Result<EmpiricalSample, SampleError> {
    monte_carlo_pushforward_sharded(u, n, seed, 1)
}

/// `n` draws split over `shards` independent streams.
pub fn monte_carlo_pushforward_sharded(
    u: &PartitionedFunction,
    n: usize,
    seed: u64,
    shards: usize,
) -> Result<EmpiricalSample, SampleError> {
    if n == 0 {
        return Err(SampleError::Empty);
    }
    if shards == 0 {
        return Err(SampleError::NoShards);
    }
    let mut values = Vec::with_capacity(n);
    for k in 0..shards {
        let count = n / shards + usize::from(k < n % shards);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        draw(u, &mut rng, count, &mut values)?;
    }
    Ok(EmpiricalSample::from_values(values, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn constant_function_samples_are_constant() {
        let u = fixtures::two_step(0.25, 0.25);
        let s = monte_carlo_pushforward(&u, 1000, DEFAULT_SEED).unwrap();
        assert!(s.values().iter().all(|&v| v == 0.25));
    }

    #[test]
    fn deterministic_and_sorted() {
        let u = fixtures::square();
        let a = monte_carlo_pushforward(&u, 5000, 7).unwrap();
        let b = monte_carlo_pushforward(&u, 5000, 7).unwrap();
        assert_eq!(a, b);
        assert!(a.values().windows(2).all(|w| w[0] <= w[1]));
        assert_ne!(a, monte_carlo_pushforward(&u, 5000, 8).unwrap());
    }

    #[test]
    fn single_shard_is_unsharded_run() {
        let u = fixtures::sawtooth();
        let a = monte_carlo_pushforward(&u, 3001, 42).unwrap();
        let b = monte_carlo_pushforward_sharded(&u, 3001, 42, 1).unwrap();
        assert_eq!(a, b);
        let c = monte_carlo_pushforward_sharded(&u, 3001, 42, 4).unwrap();
        assert_eq!(c.len(), 3001);
        assert_eq!(c, monte_carlo_pushforward_sharded(&u, 3001, 42, 4).unwrap());
    }

    #[test]
    fn step_landing_fractions() {
        let u = fixtures::two_step(0.0, 1.0);
        let s = monte_carlo_pushforward(&u, 100_000, DEFAULT_SEED).unwrap();
        let low = s.values().iter().filter(|&&v| v == 0.0).count() as f64 / 1e5;
        assert!((low - 0.3).abs() < 0.005, "{low}");
    }

    #[test]
    fn csv_export() {
        let s = EmpiricalSample::from_values(vec![0.5, 0.25], 1);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "value\n0.25\n0.5\n");
    }

    #[test]
    fn rejects_empty() {
        assert_eq!(
            monte_carlo_pushforward(&fixtures::identity(), 0, 1),
            Err(SampleError::Empty)
        );
    }
}
