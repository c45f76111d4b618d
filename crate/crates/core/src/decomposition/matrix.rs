//! Dense matrices of linear maps between free spaces and their ℓ_p-sums,
//! written in the δ-basis.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};

/// Basis vector `δ_block(point)`: `block` is `None` for `F_p(M)` itself and
/// `Some(n)` for the `n`-th summand; `point` is the stable point identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Label {
    pub block: Option<i64>,
    pub point: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearMapMatrix {
    rows: Vec<Label>,
    cols: Vec<Label>,
    data: Vec<f64>,
}

impl LinearMapMatrix {
    pub fn zeros(rows: Vec<Label>, cols: Vec<Label>) -> Self {
        let data = vec![0.0; rows.len() * cols.len()];
        LinearMapMatrix { rows, cols, data }
    }

    pub fn identity(labels: Vec<Label>) -> Self {
        let mut m = Self::zeros(labels.clone(), labels);
        for i in 0..m.rows.len() {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn rows(&self) -> &[Label] {
        &self.rows
    }

    pub fn cols(&self) -> &[Label] {
        &self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows.len(), self.cols.len())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols.len() + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        let w = self.cols.len();
        self.data[r * w + c] = v;
    }

    pub fn row_lookup(&self) -> HashMap<Label, usize> {
        self.rows.iter().enumerate().map(|(i, l)| (*l, i)).collect()
    }

    pub fn col_lookup(&self) -> HashMap<Label, usize> {
        self.cols.iter().enumerate().map(|(i, l)| (*l, i)).collect()
    }

    /// Nonzero entries of column `c`.
    pub fn column(&self, c: usize) -> Vec<(Label, f64)> {
        (0..self.rows.len()).filter_map(|r| {
            let v = self.get(r, c);
            (v != 0.0).then_some((self.rows[r], v))
        })
        .collect()
    }

    /// `self ∘ rhs`; the columns of `self` must match the rows of `rhs`.
    pub fn compose(&self, rhs: &LinearMapMatrix) -> Result<LinearMapMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot compose {}x{} after {}x{}: basis labels differ",
                self.rows.len(),
                self.cols.len(),
                rhs.rows.len(),
                rhs.cols.len()
            )));
        }
        let (n, k, m) = (self.rows.len(), self.cols.len(), rhs.cols.len());
        let mut out = LinearMapMatrix::zeros(self.rows.clone(), rhs.cols.clone());
        for i in 0..n {
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == 0.0 {
                    continue;
                }
                let row = &rhs.data[l * m..(l + 1) * m];
                let dst = &mut out.data[i * m..(i + 1) * m];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `max |A − B|` entrywise; labels must agree.
    pub fn max_abs_diff(&self, other: &LinearMapMatrix) -> Result<f64> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch("matrices act between different bases".into()));
        }
        Ok(self.data.iter().zip(&other.data).fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }

    /// `max |A − I|`; rows and columns must carry the same labels.
    pub fn identity_residual(&self) -> Result<f64> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch("identity check on a non-square basis pair".into()));
        }
        self.max_abs_diff(&LinearMapMatrix::identity(self.rows.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lab(b: Option<i64>, p: usize) -> Label {
        Label { block: b, point: p }
    }

    #[test]
    fn compose_and_identity() {
        let a = vec![lab(None, 1), lab(None, 2)];
        let b = vec![lab(Some(0), 1), lab(Some(1), 1), lab(Some(1), 2)];
        let mut p = LinearMapMatrix::zeros(a.clone(), b.clone());
        p.set(0, 0, 1.0);
        p.set(0, 1, 1.0);
        p.set(1, 2, 1.0);
        let mut t = LinearMapMatrix::zeros(b, a);
        t.set(0, 0, 0.25);
        t.set(1, 0, 0.75);
        t.set(2, 1, 1.0);
        let pt = p.compose(&t).unwrap();
        assert_eq!(pt.identity_residual().unwrap(), 0.0);
        assert!(p.compose(&p).is_err());
        assert_eq!(t.column(0).len(), 2);
    }
}
