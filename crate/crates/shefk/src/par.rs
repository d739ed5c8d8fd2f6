//! Deterministic parallel reduction: work is split into fixed-size chunks,
//! mapped in parallel, and the partial results are combined sequentially in
//! chunk order. Output is bitwise independent of the worker count.

use rayon::prelude::*;

pub(crate) const CHUNK: usize = 64;

pub(crate) fn chunked_reduce<T, M, C>(n: usize, map: M, zero: T, combine: C) -> T
where
    T: Send,
    M: Fn(std::ops::Range<usize>) -> T + Sync + Send,
    C: Fn(T, T) -> T,
{
    let ranges: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(CHUNK)
        .map(|lo| lo..(lo + CHUNK).min(n))
        .collect();
    let partials: Vec<T> = ranges.into_par_iter().map(map).collect();
    partials.into_iter().fold(zero, combine)
}

/// Accumulator for a scalar Monte Carlo mean with standard error.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct MeanAcc {
    pub sum: f64,
    pub sumsq: f64,
    pub n: usize,
}

impl MeanAcc {
    pub fn push(&mut self, v: f64) {
        self.sum += v;
        self.sumsq += v * v;
        self.n += 1;
    }

    pub fn merge(mut self, other: MeanAcc) -> MeanAcc {
        self.sum += other.sum;
        self.sumsq += other.sumsq;
        self.n += other.n;
        self
    }

    pub fn mean(&self) -> f64 {
        self.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        (self.sumsq / self.n as f64 - m * m).max(0.0)
    }

    pub fn std_error(&self) -> f64 {
        (self.variance() / self.n as f64).sqrt()
    }
}
