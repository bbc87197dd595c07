//! Fast-weight associative memory updated once per frame.
//!
//! The state `S` (n x c) is read with a key `k` (c) and should return the
//! value `v` (n). Each frame takes one gradient step on `1/2 |S k - v|^2`
//! with the frame's adaptive weight as the step size, so a weight of 1 with
//! a unit key writes the pair exactly and a weight of 0 leaves `S` alone.

use alloc::vec;
use alloc::vec::Vec;

use crate::geometry::Pose;
use crate::math;
use crate::scoring::{score_frame, GrayImage, ScoreConfig};
use crate::{Error, Result};

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self * v`
    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: v.len() });
        }
        Ok((0..self.rows).map(|r| dot(self.row(r), v)).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|x| x * x).sum())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    math::sqrt(dot(a, a))
}

/// Fixed-size fast-weight state: `n` value dimensions by `c` key dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct MemoryState {
    weights: Matrix,
}

impl MemoryState {
    pub fn zeros(n: usize, c: usize) -> Self {
        Self { weights: Matrix::zeros(n, c) }
    }

    pub fn from_matrix(weights: Matrix) -> Result<Self> {
        if weights.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("memory state"));
        }
        Ok(Self { weights })
    }

    pub fn n(&self) -> usize {
        self.weights.rows
    }

    pub fn c(&self) -> usize {
        self.weights.cols
    }

    pub fn matrix(&self) -> &Matrix {
        &self.weights
    }

    /// Memory read-out `S k`.
    pub fn recall(&self, key: &[f64]) -> Result<Vec<f64>> {
        self.weights.mul_vec(key)
    }
}

/// One key/value pair presented to the memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub key: Vec<f64>,
    pub value: Vec<f64>,
}

impl Observation {
    pub fn new(key: Vec<f64>, value: Vec<f64>) -> Result<Self> {
        if key.iter().chain(&value).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("observation"));
        }
        Ok(Self { key, value })
    }

    fn check_dims(&self, state: &MemoryState) -> Result<()> {
        if self.key.len() != state.c() {
            return Err(Error::DimensionMismatch { expected: state.c(), found: self.key.len() });
        }
        if self.value.len() != state.n() {
            return Err(Error::DimensionMismatch { expected: state.n(), found: self.value.len() });
        }
        Ok(())
    }
}

/// Gradient of `1/2 |S k - v|^2` with respect to `S`: `(S k - v) k^T`.
pub fn associative_gradient(state: &MemoryState, obs: &Observation) -> Result<Matrix> {
    obs.check_dims(state)?;
    let residual: Vec<f64> = state.recall(&obs.key)?.into_iter().zip(&obs.value).map(|(sk, v)| sk - v).collect();
    let (n, c) = (state.n(), state.c());
    let mut g = Vec::with_capacity(n * c);
    for r in &residual {
        g.extend(obs.key.iter().map(|k| r * k));
    }
    Matrix::from_vec(n, c, g)
}

/// `S - beta * G`.
pub fn apply_update(state: &MemoryState, gradient: &Matrix, beta: f64) -> Result<MemoryState> {
    if gradient.rows != state.n() {
        return Err(Error::DimensionMismatch { expected: state.n(), found: gradient.rows });
    }
    if gradient.cols != state.c() {
        return Err(Error::DimensionMismatch { expected: state.c(), found: gradient.cols });
    }
    if !beta.is_finite() {
        return Err(Error::NonFinite("beta"));
    }
    let data = state.weights.data.iter().zip(&gradient.data).map(|(s, g)| s - beta * g).collect();
    Ok(MemoryState { weights: Matrix { rows: state.n(), cols: state.c(), data } })
}

/// Scores the frame and writes `obs` with the resulting weight.
pub fn stream_step(
    state: &MemoryState,
    prev: Option<&Pose>,
    cur: &Pose,
    img: &GrayImage,
    obs: &Observation,
    cfg: &ScoreConfig,
) -> Result<(MemoryState, f64)> {
    let beta = score_frame(prev, cur, img, cfg)?.weight;
    let g = associative_gradient(state, obs)?;
    Ok((apply_update(state, &g, beta)?, beta))
}

/// Mean relative read-out error `|S k - v| / max(|v|, 1e-12)` over a set.
pub fn recall_error(state: &MemoryState, observations: &[Observation]) -> Result<f64> {
    if observations.is_empty() {
        return Err(Error::EmptySet);
    }
    let mut total = 0.0;
    for obs in observations {
        obs.check_dims(state)?;
        let sk = state.recall(&obs.key)?;
        let err: f64 = math::sqrt(sk.iter().zip(&obs.value).map(|(a, b)| (a - b) * (a - b)).sum());
        total += err / norm(&obs.value).max(1e-12);
    }
    Ok(total / observations.len() as f64)
}
