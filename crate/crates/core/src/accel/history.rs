//! Within-time-step difference data for the quasi-Newton updates.

use crate::densela::{sub, HouseholderQr, Matrix};
use crate::error::{Error, Result};

/// Raw solver output of one coupling iteration together with its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointSnapshot {
    x_tilde: Vec<f64>,
    residual: Vec<f64>,
    iteration: usize,
}

impl FixedPointSnapshot {
    /// Records `x_tilde` produced from input `x` in iteration `iteration` (1-based).
    pub fn new(x_tilde: &[f64], x: &[f64], iteration: usize) -> Result<Self> {
        if iteration == 0 {
            return Err(Error::Parameter("iteration index starts at 1".into()));
        }
        Ok(FixedPointSnapshot {
            residual: sub(x_tilde, x)?,
            x_tilde: x_tilde.to_vec(),
            iteration,
        })
    }

    pub fn x_tilde(&self) -> &[f64] {
        &self.x_tilde
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }
}

/// Residual differences `V` and output differences `W`, newest column first.
#[derive(Debug, Clone)]
pub struct PairHistory {
    dim: usize,
    v: Matrix,
    w: Matrix,
    snapshots: Vec<FixedPointSnapshot>,
}

impl PairHistory {
    pub fn new(dim: usize) -> Self {
        PairHistory {
            dim,
            v: Matrix::empty(dim),
            w: Matrix::empty(dim),
            snapshots: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn v(&self) -> &Matrix {
        &self.v
    }

    pub fn w(&self) -> &Matrix {
        &self.w
    }

    pub fn columns(&self) -> usize {
        self.v.cols()
    }

    pub fn snapshots(&self) -> &[FixedPointSnapshot] {
        &self.snapshots
    }

    /// Appends a snapshot; once two are present, prepends the pair
    /// `(R_new - R_last, x~_new - x~_last)` to `(V, W)`.
    pub fn push(&mut self, snapshot: FixedPointSnapshot) -> Result<()> {
        if snapshot.x_tilde.len() != self.dim {
            return Err(Error::Dimension(format!(
                "snapshot of length {} in history of dimension {}",
                snapshot.x_tilde.len(),
                self.dim
            )));
        }
        if let Some(last) = self.snapshots.last() {
            if snapshot.iteration != last.iteration + 1 {
                return Err(Error::Sequence {
                    last: last.iteration,
                    got: snapshot.iteration,
                });
            }
            let dr = sub(&snapshot.residual, &last.residual)?;
            let dx = sub(&snapshot.x_tilde, &last.x_tilde)?;
            self.v.insert_column(0, &dr)?;
            self.w.insert_column(0, &dx)?;
        }
        self.snapshots.push(snapshot);
        Ok(())
    }

    pub fn clear(&mut self) {
        *self = PairHistory::new(self.dim);
    }
}

/// Column-filtered copy of a `(V, W)` pair.
#[derive(Debug, Clone)]
pub struct FilteredPair {
    pub v: Matrix,
    pub w: Matrix,
    /// Original indices of the dropped columns, in drop order.
    pub dropped: Vec<usize>,
    /// Factorization of the filtered `v`.
    pub qr: HouseholderQr,
}

/// QR filtering: repeatedly drops the first column of `v` whose diagonal
/// entry in `R` is at most `eps_filter * max|diag(R)|`, refactorizing after
/// every drop. The paired column of `w` goes with it.
pub fn filter_columns(v: &Matrix, w: &Matrix, eps_filter: f64) -> Result<FilteredPair> {
    if v.cols() != w.cols() || v.rows() != w.rows() {
        return Err(Error::Dimension("V and W shapes differ".into()));
    }
    if !(eps_filter > 0.0) {
        return Err(Error::Parameter(format!(
            "filter threshold must be positive, got {eps_filter}"
        )));
    }
    let mut v = v.clone();
    let mut w = w.clone();
    let mut original: Vec<usize> = (0..v.cols()).collect();
    let mut dropped = Vec::new();
    loop {
        if v.cols() == 0 {
            return Err(Error::AllColumnsFiltered);
        }
        // columns beyond the row count are dependent on the leading ones
        let wide = v.cols() > v.rows();
        let qr = if wide {
            let lead: Vec<Vec<f64>> = v.columns().take(v.rows()).map(<[f64]>::to_vec).collect();
            HouseholderQr::new(&Matrix::from_columns(v.rows(), &lead)?)?
        } else {
            HouseholderQr::new(&v)?
        };
        match qr.first_deficient_column(eps_filter) {
            None if !wide => {
                return Ok(FilteredPair { v, w, dropped, qr });
            }
            None => {
                let j = v.rows();
                v.remove_column(j);
                w.remove_column(j);
                dropped.push(original.remove(j));
            }
            Some(j) => {
                v.remove_column(j);
                w.remove_column(j);
                dropped.push(original.remove(j));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snap(x_tilde: f64, x: f64, k: usize) -> FixedPointSnapshot {
        FixedPointSnapshot::new(&[x_tilde], &[x], k).unwrap()
    }

    #[test]
    fn first_snapshot_forms_no_pair() {
        let mut h = PairHistory::new(1);
        h.push(snap(1.0, 0.0, 1)).unwrap();
        assert_eq!(h.columns(), 0);
        assert_eq!(h.snapshots().len(), 1);
    }

    #[test]
    fn differences_follow_affine_example() {
        // x~ = 0.5 x + 1 with x0 = 0 and x1 = 0.5
        let mut h = PairHistory::new(1);
        h.push(snap(1.0, 0.0, 1)).unwrap();
        h.push(snap(1.25, 0.5, 2)).unwrap();
        assert_eq!(h.v().column(0), &[-0.25]);
        assert_eq!(h.w().column(0), &[0.25]);
    }

    #[test]
    fn newest_difference_comes_first() {
        let mut h = PairHistory::new(1);
        h.push(snap(1.0, 0.0, 1)).unwrap();
        h.push(snap(2.0, 0.0, 2)).unwrap();
        h.push(snap(4.0, 0.0, 3)).unwrap();
        assert_eq!(h.columns(), 2);
        assert_eq!(h.w().column(0), &[2.0]);
        assert_eq!(h.w().column(1), &[1.0]);
        assert_eq!(h.v().column(0), &[2.0]);
    }

    #[test]
    fn non_consecutive_snapshot_rejected() {
        let mut h = PairHistory::new(1);
        h.push(snap(1.0, 0.0, 1)).unwrap();
        assert_eq!(
            h.push(snap(1.0, 0.0, 3)),
            Err(Error::Sequence { last: 1, got: 3 })
        );
    }

    #[test]
    fn snapshot_residual_is_difference() {
        let s = FixedPointSnapshot::new(&[1.0, 2.0], &[1.0, 1.0], 1).unwrap();
        assert_eq!(s.residual(), &[0.0, 1.0]);
    }

    #[test]
    fn orthonormal_columns_survive_filtering() {
        let v = Matrix::from_columns(3, &[vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]]).unwrap();
        let f = filter_columns(&v, &v, 1e-8).unwrap();
        assert!(f.dropped.is_empty());
        assert_eq!(f.v.cols(), 2);
    }

    #[test]
    fn duplicate_column_is_dropped() {
        let c = vec![1.0, 2.0, 3.0];
        let v = Matrix::from_columns(3, &[c.clone(), c.clone()]).unwrap();
        let w = Matrix::from_columns(3, &[vec![1.0; 3], vec![2.0; 3]]).unwrap();
        let f = filter_columns(&v, &w, 1e-8).unwrap();
        assert_eq!(f.dropped, vec![1]);
        assert_eq!(f.w.column(0), &[1.0; 3]);
    }

    #[test]
    fn nearly_dependent_column_is_dropped() {
        let v = Matrix::from_columns(2, &[vec![1.0, 0.0], vec![1.0, 1e-12]]).unwrap();
        let f = filter_columns(&v, &v, 1e-8).unwrap();
        assert_eq!(f.dropped.len(), 1);
        assert_eq!(f.v.cols(), 1);
    }

    #[test]
    fn surplus_columns_are_dropped() {
        let v = Matrix::from_columns(1, &[vec![1.0], vec![2.0], vec![3.0]]).unwrap();
        let f = filter_columns(&v, &v, 1e-8).unwrap();
        assert_eq!(f.dropped, vec![1, 2]);
        assert_eq!(f.v.column(0), &[1.0]);
    }

    #[test]
    fn zero_columns_are_all_filtered() {
        let v = Matrix::zeros(3, 2);
        assert!(matches!(
            filter_columns(&v, &v, 1e-8),
            Err(Error::AllColumnsFiltered)
        ));
        assert!(matches!(
            filter_columns(&Matrix::empty(3), &Matrix::empty(3), 1e-8),
            Err(Error::AllColumnsFiltered)
        ));
    }
}
