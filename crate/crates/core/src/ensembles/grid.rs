use rayon::prelude::*;

use crate::error::{Error, Result};

/// Regular lattice `origin + spacing·(i_0, …, i_{n-1})`, first axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    origin: Vec<f64>,
    spacing: f64,
    shape: Vec<usize>,
}

/// Which scalar is sampled at grid nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridQuantity {
    Value,
    Derivative(usize),
}

impl Grid {
    pub fn new(origin: Vec<f64>, spacing: f64, shape: Vec<usize>) -> Result<Self> {
        if origin.len() != shape.len() || origin.is_empty() {
            return Err(Error::invalid(
                "grid origin and shape must share a non-zero length",
            ));
        }
        if !(spacing > 0.0) || !spacing.is_finite() {
            return Err(Error::Domain {
                what: "grid spacing",
                value: spacing,
            });
        }
        if shape.contains(&0) {
            return Err(Error::invalid("grid axes must be non-empty"));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
        })
    }

    /// Nodes covering the cube `center ± half_width` with spacing `h`.
    pub fn cube(center: &[f64], half_width: f64, h: f64) -> Result<Self> {
        let per_axis = (2.0 * half_width / h).ceil() as usize + 1;
        let origin = center
            .iter()
            .map(|c| c - 0.5 * h * (per_axis - 1) as f64)
            .collect();
        Self::new(origin, h, vec![per_axis; center.len()])
    }

    pub fn dim(&self) -> usize {
        self.shape.len()
    }

    pub fn origin(&self) -> &[f64] {
        &self.origin
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.shape)
            .rev()
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter()
            .zip(&self.origin)
            .map(|(&i, &o)| o + self.spacing * i as f64)
            .collect()
    }

    /// Multi-index of a linear index.
    pub fn unravel(&self, mut linear: usize) -> Vec<usize> {
        self.shape
            .iter()
            .map(|&n| {
                let i = linear % n;
                linear /= n;
                i
            })
            .collect()
    }

    /// `f` at every node, evaluated in parallel and returned in linear order.
    pub fn map_points<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        (0..self.len())
            .into_par_iter()
            .map(|k| f(&self.point(&self.unravel(k))))
            .collect()
    }
}
