use super::{LhbpModel, OffspringLaw};

/// Exact first and second factorial moments of the laws of types `0..=K`.
#[derive(Clone, Debug)]
pub struct MomentTables {
    laws: Vec<OffspringLaw>,
    rows: Vec<Vec<(usize, f64)>>,
    p1: Vec<f64>,
}

pub fn moment_tables(model: &LhbpModel, max_type: usize) -> MomentTables {
    let laws: Vec<OffspringLaw> = (0..=max_type).map(|i| model.law(i)).collect();
    let rows = laws.iter().map(|l| l.mean_row()).collect();
    let p1 = laws.iter().map(|l| l.prob_one_child()).collect();
    MomentTables { laws, rows, p1 }
}

impl MomentTables {
    pub fn max_type(&self) -> usize {
        self.laws.len() - 1
    }

    /// Sparse row `(j, M_{i,j})`.
    pub fn m_row(&self, i: usize) -> &[(usize, f64)] {
        &self.rows[i]
    }

    pub fn m(&self, i: usize, j: usize) -> f64 {
        self.rows[i]
            .iter()
            .find(|&&(t, _)| t == j)
            .map_or(0.0, |&(_, v)| v)
    }

    /// Dense `(k+2) x (k+2)` block `A_{k,ij}`, `i, j` in `0..=k+1`.
    pub fn a_block(&self, k: usize) -> Vec<Vec<f64>> {
        let law = &self.laws[k];
        (0..=k + 1)
            .map(|i| (0..=k + 1).map(|j| law.second_factorial(i, j)).collect())
            .collect()
    }

    /// Probability that a type-`i` parent has exactly one child in total.
    pub fn p1(&self, i: usize) -> f64 {
        self.p1[i]
    }

    pub fn law(&self, i: usize) -> &OffspringLaw {
        &self.laws[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn example2_second_moments_and_p1() {
        let m = LhbpModel::example2(0.3).unwrap();
        let t = moment_tables(&m, 6);
        let a = t.a_block(1);
        assert!((a[0][0] - 0.54).abs() < 1e-14);
        for k in 0..=6 {
            assert_eq!(t.p1(k), 0.0);
            let a = t.a_block(k);
            for i in 0..=k + 1 {
                for j in 0..=k + 1 {
                    assert_eq!(a[i][j], a[j][i]);
                    assert!(a[i][j] >= 0.0);
                }
            }
        }
    }

    #[test]
    fn tridiagonal_row() {
        let m = LhbpModel::tridiagonal(0.1, 0.2, 0.8, 1.0).unwrap();
        let t = moment_tables(&m, 5);
        assert_eq!(t.m_row(5), &[(4, 0.1), (5, 0.2), (6, 0.8)]);
        assert_eq!(t.m(5, 7), 0.0);
    }
}
