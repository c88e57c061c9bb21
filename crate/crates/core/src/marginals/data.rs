use crate::error::{GpnError, Result};

/// Observed sample of covariates `X`, binary treatment `Z` and outcome `Y`.
///
/// Covariates are stored row-major; `d` may be zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    d: usize,
    z: Vec<u8>,
    y: Vec<f64>,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, z: Vec<u8>, y: Vec<f64>) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(i) = rows.iter().position(|r| r.len() != d) {
            return Err(GpnError::InvalidData(format!(
                "row {i} has {} covariates, expected {d}",
                rows[i].len()
            )));
        }
        if rows.len() != y.len() {
            return Err(GpnError::LengthMismatch { expected: y.len(), got: rows.len() });
        }
        Self::from_flat(rows.concat(), d, z, y)
    }

    pub fn from_flat(x: Vec<f64>, d: usize, z: Vec<u8>, y: Vec<f64>) -> Result<Self> {
        let n = y.len();
        if n == 0 {
            return Err(GpnError::EmptyInput("dataset has no rows"));
        }
        if z.len() != n {
            return Err(GpnError::LengthMismatch { expected: n, got: z.len() });
        }
        if x.len() != n * d {
            return Err(GpnError::LengthMismatch { expected: n * d, got: x.len() });
        }
        if let Some(i) = z.iter().position(|&t| t > 1) {
            return Err(GpnError::InvalidData(format!("row {i}: treatment must be 0 or 1")));
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(GpnError::InvalidData(format!("row {i}: outcome is not finite")));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(GpnError::InvalidData(format!(
                "row {}, covariate {}: value is not finite",
                k / d.max(1),
                k % d.max(1)
            )));
        }
        Ok(Self { x, d, z, y })
    }

    pub fn n(&self) -> usize {
        self.y.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x_row(&self, i: usize) -> &[f64] {
        &self.x[i * self.d..(i + 1) * self.d]
    }

    pub fn x_flat(&self) -> &[f64] {
        &self.x
    }

    pub fn z(&self) -> &[u8] {
        &self.z
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn treated(&self) -> usize {
        self.z.iter().filter(|&&t| t == 1).count()
    }

    /// Rows at `idx`, in that order.
    pub fn subset(&self, idx: &[usize]) -> Result<Self> {
        if idx.is_empty() {
            return Err(GpnError::EmptyInput("empty subset"));
        }
        let mut x = Vec::with_capacity(idx.len() * self.d);
        for &i in idx {
            x.extend_from_slice(self.x_row(i));
        }
        Ok(Self {
            x,
            d: self.d,
            z: idx.iter().map(|&i| self.z[i]).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        })
    }

    /// Replace every covariate row by `f(row)`.
    pub fn map_covariates(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<Self> {
        let rows = (0..self.n()).map(|i| f(self.x_row(i))).collect();
        Self::new(rows, self.z.clone(), self.y.clone())
    }

    pub(crate) fn require_both_arms(&self) -> Result<()> {
        let t = self.treated();
        if t == 0 || t == self.n() {
            return Err(GpnError::DegenerateTreatment(format!(
                "{t} of {} units treated; both arms are required",
                self.n()
            )));
        }
        Ok(())
    }

    pub(crate) fn arm_indices(&self, arm: u8) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.z[i] == arm).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Dataset::new(vec![vec![1.0], vec![2.0, 3.0]], vec![0, 1], vec![0.0, 1.0]).is_err());
        assert!(Dataset::new(vec![vec![1.0]], vec![2], vec![0.0]).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN]], vec![1], vec![0.0]).is_err());
        assert!(Dataset::new(vec![], vec![], vec![]).is_err());
        let d = Dataset::new(vec![vec![1.0, 2.0], vec![3.0, 4.0]], vec![0, 1], vec![5.0, 6.0])
            .unwrap();
        assert_eq!(d.x_row(1), &[3.0, 4.0]);
        assert_eq!(d.treated(), 1);
        let s = d.subset(&[1, 1, 0]).unwrap();
        assert_eq!(s.y(), &[6.0, 6.0, 5.0]);
        assert!(d.require_both_arms().is_ok());
        assert!(s.subset(&[0]).unwrap().require_both_arms().is_err());
    }
}
