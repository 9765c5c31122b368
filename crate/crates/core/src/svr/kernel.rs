use std::rc::Rc;

use crate::error::{Error, Result};

/// `exp(-gamma * |x - y|^2)`.
pub fn rbf_kernel(x: &[f64], y: &[f64], gamma: f64) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            actual: y.len(),
        });
    }
    Ok(rbf(x, y, gamma))
}

#[inline]
pub(crate) fn rbf(x: &[f64], y: &[f64], gamma: f64) -> f64 {
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (-gamma * d2).exp()
}

/// Rows of the training kernel matrix, evicted least-recently-used once
/// the byte budget is exhausted.
pub(crate) struct KernelCache<'a> {
    x: &'a [Vec<f64>],
    gamma: f64,
    rows: Vec<Option<Rc<[f64]>>>,
    last_used: Vec<u64>,
    clock: u64,
    resident: usize,
    capacity: usize,
}

impl<'a> KernelCache<'a> {
    pub fn new(x: &'a [Vec<f64>], gamma: f64, budget_bytes: usize) -> Self {
        let n = x.len();
        let row_bytes = (n * std::mem::size_of::<f64>()).max(1);
        KernelCache {
            x,
            gamma,
            rows: vec![None; n],
            last_used: vec![0; n],
            clock: 0,
            resident: 0,
            capacity: (budget_bytes / row_bytes).max(2),
        }
    }

    pub fn row(&mut self, i: usize) -> Rc<[f64]> {
        self.clock += 1;
        self.last_used[i] = self.clock;
        if let Some(r) = &self.rows[i] {
            return Rc::clone(r);
        }
        if self.resident >= self.capacity {
            let victim = (0..self.rows.len())
                .filter(|&k| k != i && self.rows[k].is_some())
                .min_by_key(|&k| self.last_used[k])
                .expect("cache holds at least one row");
            self.rows[victim] = None;
            self.resident -= 1;
        }
        let xi = &self.x[i];
        let row: Rc<[f64]> = self.x.iter().map(|xj| rbf(xi, xj, self.gamma)).collect();
        self.rows[i] = Some(Rc::clone(&row));
        self.resident += 1;
        row
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_examples() {
        let x = [0.3, -1.2, 4.0];
        assert_eq!(rbf_kernel(&x, &x, 0.5).unwrap(), 1.0);
        // |x - y|^2 = 1000 with gamma 1e-3 gives exp(-1).
        let a = vec![0.0; 10];
        let b = vec![10.0; 10];
        let k = rbf_kernel(&a, &b, 1e-3).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);
        assert!((k - 0.36788).abs() < 1e-5);
        assert!(matches!(rbf_kernel(&a, &x, 1.0), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn cache_rows_match_direct_evaluation_under_eviction() {
        let x: Vec<Vec<f64>> = (0..7).map(|i| vec![i as f64 * 0.3, (i * i) as f64 * 0.1]).collect();
        // Budget for 2 rows only.
        let mut cache = KernelCache::new(&x, 0.7, 2 * 7 * 8);
        for &i in &[0, 3, 5, 0, 6, 1, 3, 3, 2] {
            let row = cache.row(i);
            for j in 0..7 {
                assert_eq!(row[j], rbf(&x[i], &x[j], 0.7));
            }
            assert!(cache.resident <= 2);
        }
    }
}
