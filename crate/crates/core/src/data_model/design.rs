use std::ops::Range;

use nalgebra::DMatrix;

use super::ModelId;
use crate::error::{Error, Result};

/// Design matrix `Z` (n × p) whose columns are partitioned into `J` groups.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    groups: Vec<Range<usize>>,
    intercept_group: Option<usize>,
    column_names: Vec<String>,
}

impl DesignMatrix {
    /// Builds a design whose groups are consecutive column blocks of the given sizes.
    pub fn new(values: DMatrix<f64>, group_sizes: &[usize]) -> Result<Self> {
        if values.nrows() == 0 {
            return Err(Error::Dimension("design needs at least one row".into()));
        }
        if group_sizes.contains(&0) {
            return Err(Error::Dimension("every group needs at least one column".into()));
        }
        let total: usize = group_sizes.iter().sum();
        if total != values.ncols() {
            return Err(Error::Dimension(format!(
                "group sizes sum to {total} but the design has {} columns",
                values.ncols()
            )));
        }
        let mut groups = Vec::with_capacity(group_sizes.len());
        let mut start = 0;
        for &s in group_sizes {
            groups.push(start..start + s);
            start += s;
        }
        let column_names = (0..values.ncols()).map(|j| format!("x{}", j + 1)).collect();
        Ok(Self { values, groups, intercept_group: None, column_names })
    }

    /// One group per column.
    pub fn singletons(values: DMatrix<f64>) -> Self {
        let sizes = vec![1; values.ncols()];
        Self::new(values, &sizes).expect("singleton grouping is always valid")
    }

    pub fn with_intercept_group(mut self, group: usize) -> Result<Self> {
        if group >= self.groups.len() {
            return Err(Error::Dimension(format!("intercept group {group} out of range")));
        }
        self.intercept_group = Some(group);
        Ok(self)
    }

    pub fn with_column_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.p() {
            return Err(Error::Dimension("one name per column required".into()));
        }
        self.column_names = names;
        Ok(self)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group(&self, j: usize) -> Range<usize> {
        self.groups[j].clone()
    }

    pub fn group_sizes(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.len()).collect()
    }

    pub fn intercept_group(&self) -> Option<usize> {
        self.intercept_group
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n();
        &self.values.as_slice()[j * n..(j + 1) * n]
    }

    /// Column indices of the active groups, in group order.
    pub fn columns_of(&self, model: &ModelId) -> Vec<usize> {
        model.active().flat_map(|j| self.groups[j].clone()).collect()
    }

    /// Dense `Z_γ`.
    pub fn submatrix(&self, model: &ModelId) -> DMatrix<f64> {
        let cols = self.columns_of(model);
        self.values.select_columns(cols.iter())
    }

    /// Sizes of the active groups in the order they appear in `Z_γ`.
    pub fn active_sizes(&self, model: &ModelId) -> Vec<usize> {
        model.active().map(|j| self.groups[j].len()).collect()
    }

    /// Copy with every non-constant column centered at zero mean.
    pub fn centered(&self) -> Self {
        self.map_columns(|col| {
            let mean = col.iter().sum::<f64>() / col.len() as f64;
            (mean, 1.0)
        })
    }

    /// Copy with every non-constant column centered and scaled to unit sample variance.
    pub fn standardized(&self) -> Self {
        self.map_columns(|col| {
            let n = col.len() as f64;
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
            (mean, var.sqrt())
        })
    }

    fn map_columns(&self, f: impl Fn(&[f64]) -> (f64, f64)) -> Self {
        let mut out = self.clone();
        for j in 0..self.p() {
            let col = self.column(j);
            let first = col[0];
            if col.iter().all(|v| *v == first) {
                continue;
            }
            let (shift, scale) = f(col);
            let scale = if scale > 0.0 { scale } else { 1.0 };
            for (i, v) in col.iter().enumerate() {
                out.values[(i, j)] = (v - shift) / scale;
            }
        }
        out
    }
}
