use crate::error::{Error, Result};

/// Where a sample came from.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub sampler: String,
    pub seed: u64,
    /// Number of particles of the generating law (0 for the mean-field law).
    pub n: usize,
}

/// A collection of `k`-dimensional draws stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSample {
    dim: usize,
    data: Vec<f64>,
    pub provenance: Provenance,
}

impl EmpiricalSample {
    pub fn new(dim: usize, data: Vec<f64>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Dimension("sample dimension must be positive".into()));
        }
        if data.is_empty() || !data.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!(
                "{} values do not form a non-empty set of {dim}-vectors",
                data.len()
            )));
        }
        Ok(EmpiricalSample {
            dim,
            data,
            provenance,
        })
    }

    /// One-dimensional sample from scalar draws.
    pub fn scalar(values: Vec<f64>, provenance: Provenance) -> Result<Self> {
        Self::new(1, values, provenance)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn draw(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn draws(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    /// The marginal of the first `k` coordinates.
    pub fn leading_marginal(&self, k: usize) -> Result<EmpiricalSample> {
        if k == 0 || k > self.dim {
            return Err(Error::Dimension(format!(
                "marginal of {k} coordinates from a {}-dimensional sample",
                self.dim
            )));
        }
        let data = self.draws().flat_map(|d| d[..k].iter().copied()).collect();
        Ok(EmpiricalSample {
            dim: k,
            data,
            provenance: self.provenance.clone(),
        })
    }

    /// Every coordinate of every draw pooled into one scalar sample. For an
    /// exchangeable law this is a sample of the one-dimensional marginal.
    pub fn pooled_coordinates(&self) -> EmpiricalSample {
        EmpiricalSample {
            dim: 1,
            data: self.data.clone(),
            provenance: self.provenance.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_checks() {
        assert!(EmpiricalSample::new(2, vec![1.0, 2.0, 3.0], Provenance::default()).is_err());
        assert!(EmpiricalSample::new(0, vec![1.0], Provenance::default()).is_err());
        assert!(EmpiricalSample::scalar(vec![], Provenance::default()).is_err());
        let s = EmpiricalSample::new(3, (0..6).map(f64::from).collect(), Provenance::default()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.draw(1), &[3.0, 4.0, 5.0]);
        assert_eq!(s.leading_marginal(2).unwrap().values(), &[0.0, 1.0, 3.0, 4.0]);
        assert!(s.leading_marginal(4).is_err());
    }
}
