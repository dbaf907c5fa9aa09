//! Interface quasi-Newton updates: inverse least squares (ILS) and the
//! implicit multi-vector variant (IMVLS) that carries Jacobian information
//! across time steps without ever forming an `m x m` matrix.

use std::collections::VecDeque;

use super::history::{filter_columns, PairHistory};
use crate::densela::{axpy, check_same_len, HouseholderQr, Matrix};
use crate::error::{Error, Result};

/// Result of one quasi-Newton update.
#[derive(Debug, Clone, PartialEq)]
pub struct IqnStep {
    pub next: Vec<f64>,
    /// Least-squares coefficients of the retained columns.
    pub alpha: Vec<f64>,
    pub dropped: Vec<usize>,
}

/// `base + W_f alpha` with `alpha = argmin |V_f alpha + residual|`, where
/// `(V_f, W_f)` is the filtered pair.
fn least_squares_step(
    v: &Matrix,
    w: &Matrix,
    base: &[f64],
    residual: &[f64],
    eps_filter: f64,
) -> Result<IqnStep> {
    let filtered = filter_columns(v, w, eps_filter)?;
    let rhs: Vec<f64> = residual.iter().map(|r| -r).collect();
    let alpha = filtered.qr.solve_least_squares(&rhs, 0.0)?;
    let mut next = base.to_vec();
    for (j, a) in alpha.iter().enumerate() {
        axpy(*a, filtered.w.column(j), &mut next);
    }
    Ok(IqnStep {
        next,
        alpha,
        dropped: filtered.dropped,
    })
}

/// ILS update `x~ + W alpha`, using only the current time step's pairs.
pub fn ils_update(
    history: &PairHistory,
    x_tilde: &[f64],
    residual: &[f64],
    eps_filter: f64,
) -> Result<IqnStep> {
    check_same_len(x_tilde, residual)?;
    if x_tilde.len() != history.dim() {
        return Err(Error::Dimension("update vector vs history".into()));
    }
    least_squares_step(history.v(), history.w(), x_tilde, residual, eps_filter)
}

#[derive(Debug, Clone)]
struct JacobianBlock {
    v: Matrix,
    /// Raw `W` of the step, kept so the block can be rebased on eviction.
    w: Matrix,
    w_tilde: Matrix,
    qr: HouseholderQr,
}

/// Inverse Jacobian of past time steps in implicit form,
/// `J r = sum_j W~_j (V_j^T V_j)^-1 V_j^T r`, oldest block first.
/// Without blocks it is the zero matrix.
///
/// Each `W~_j = W_j - J_{j-1} V_j` is a correction on top of the older
/// blocks, so evicting the oldest block recomputes every `W~_j` from the
/// stored `W_j`. The retained blocks then equal the recursion restarted at
/// the oldest kept step.
#[derive(Debug, Clone)]
pub struct MultiVectorJacobian {
    dim: usize,
    blocks: VecDeque<JacobianBlock>,
    max_blocks: usize,
    eps_filter: f64,
}

impl MultiVectorJacobian {
    /// `max_blocks == 0` keeps every block.
    pub fn new(dim: usize, max_blocks: usize, eps_filter: f64) -> Result<Self> {
        if !(eps_filter > 0.0) {
            return Err(Error::Parameter("filter threshold must be positive".into()));
        }
        Ok(MultiVectorJacobian {
            dim,
            blocks: VecDeque::new(),
            max_blocks,
            eps_filter,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn max_blocks(&self) -> usize {
        self.max_blocks
    }

    /// Column counts of the stored blocks, oldest first.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.v.cols()).collect()
    }

    /// Stores `(V, W~)` after filtering. A block whose columns are all
    /// filtered away is skipped.
    pub fn push_block(&mut self, v: &Matrix, w_tilde: &Matrix) -> Result<()> {
        if v.rows() != self.dim || w_tilde.rows() != self.dim || v.cols() != w_tilde.cols() {
            return Err(Error::Dimension("Jacobian block shape".into()));
        }
        let filtered = match filter_columns(v, w_tilde, self.eps_filter) {
            Ok(f) => f,
            Err(Error::AllColumnsFiltered) => return Ok(()),
            Err(e) => return Err(e),
        };
        let w = filtered.w.add(&self.apply_columns(&filtered.v)?)?;
        self.blocks.push_back(JacobianBlock {
            v: filtered.v,
            w,
            w_tilde: filtered.w,
            qr: filtered.qr,
        });
        let mut evicted = false;
        while self.max_blocks > 0 && self.blocks.len() > self.max_blocks {
            self.blocks.pop_front();
            evicted = true;
        }
        if evicted {
            self.rebase()?;
        }
        Ok(())
    }

    fn rebase(&mut self) -> Result<()> {
        let mut older = MultiVectorJacobian::new(self.dim, 0, self.eps_filter)?;
        for mut block in std::mem::take(&mut self.blocks) {
            block.w_tilde = block.w.sub(&older.apply_columns(&block.v)?)?;
            older.blocks.push_back(block);
        }
        self.blocks = older.blocks;
        Ok(())
    }

    /// Applies the implicit Jacobian to `r`.
    pub fn apply(&self, r: &[f64]) -> Result<Vec<f64>> {
        if r.len() != self.dim {
            return Err(Error::Dimension(format!(
                "vector of length {} for Jacobian of dimension {}",
                r.len(),
                self.dim
            )));
        }
        let mut out = vec![0.0; self.dim];
        for block in &self.blocks {
            let beta = block.qr.solve_least_squares(r, 0.0)?;
            for (j, b) in beta.iter().enumerate() {
                axpy(*b, block.w_tilde.column(j), &mut out);
            }
        }
        Ok(out)
    }

    /// `J V` column by column.
    pub fn apply_columns(&self, v: &Matrix) -> Result<Matrix> {
        let cols: Result<Vec<Vec<f64>>> = v.columns().map(|c| self.apply(c)).collect();
        Matrix::from_columns(self.dim, &cols?)
    }

    /// Stored `V_j` of block `j` (oldest first).
    pub fn block_v(&self, j: usize) -> Option<&Matrix> {
        self.blocks.get(j).map(|b| &b.v)
    }
}

/// Free-function form of [`MultiVectorJacobian::apply`].
pub fn mvj_apply(jac: &MultiVectorJacobian, r: &[f64]) -> Result<Vec<f64>> {
    jac.apply(r)
}

/// IMVLS update `x~ - J R + (W - J V) alpha`.
///
/// `jv` is the cached product `J V` for the current history (newest column
/// first). With no history this is `x~ - J R`; with an empty Jacobian it is
/// exactly the ILS update.
pub fn imvls_update(
    jac: &MultiVectorJacobian,
    history: &PairHistory,
    jv: &Matrix,
    x_tilde: &[f64],
    residual: &[f64],
    eps_filter: f64,
) -> Result<IqnStep> {
    check_same_len(x_tilde, residual)?;
    if jv.cols() != history.columns() {
        return Err(Error::Dimension(format!(
            "cached J V has {} columns, history {}",
            jv.cols(),
            history.columns()
        )));
    }
    let jr = jac.apply(residual)?;
    let base: Vec<f64> = x_tilde.iter().zip(&jr).map(|(x, j)| x - j).collect();
    if history.columns() == 0 {
        return Ok(IqnStep {
            next: base,
            alpha: Vec::new(),
            dropped: Vec::new(),
        });
    }
    let w_tilde = history.w().sub(jv)?;
    least_squares_step(history.v(), &w_tilde, &base, residual, eps_filter)
}

/// Closes a time step: appends the block `(V, W - J V)` built from this
/// step's history.
pub fn imvls_finalize_timestep(
    jac: &mut MultiVectorJacobian,
    history: &PairHistory,
    jv: &Matrix,
) -> Result<()> {
    if jv.cols() != history.columns() || jv.rows() != history.dim() {
        return Err(Error::Dimension(format!(
            "cached J V has {} columns, history {}",
            jv.cols(),
            history.columns()
        )));
    }
    if history.columns() == 0 {
        return Ok(());
    }
    let w_tilde = history.w().sub(jv)?;
    jac.push_block(history.v(), &w_tilde)
}
