//! Dense two-phase simplex with Bland's rule, sized for oracle subproblems
//! (a few dozen rows and columns).

const EPS: f64 = 1e-11;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum LpOutcome {
    Optimal(Vec<f64>),
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let pv = self.rows[r][c];
        self.rows[r].iter_mut().for_each(|x| *x /= pv);
        let prow = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                row.iter_mut().zip(&prow).for_each(|(x, p)| *x -= f * p);
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost . x` over the current basis; `allowed(j)` gates entering columns.
    fn optimize(&mut self, cost: &[f64], allowed: impl Fn(usize) -> bool) -> Result<(), LpOutcome> {
        for _ in 0..MAX_PIVOTS {
            let mut entering = None;
            for j in (0..self.cols).filter(|&j| allowed(j)) {
                if self.basis.contains(&j) {
                    continue;
                }
                let reduced = cost[j]
                    - self
                        .basis
                        .iter()
                        .enumerate()
                        .map(|(i, &b)| cost[b] * self.rows[i][j])
                        .sum::<f64>();
                if reduced < -EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(()) };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match leave {
                        None => true,
                        Some((li, lr)) => {
                            ratio < lr - EPS || (ratio <= lr + EPS && self.basis[i] < self.basis[li])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let Some((r, _)) = leave else { return Err(LpOutcome::Unbounded) };
            self.pivot(r, c);
        }
        Err(LpOutcome::Unbounded)
    }
}

/// `min c.x` subject to `A x = b`, `x >= 0`.
pub(crate) fn minimize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let m = a.len();
    let n = c.len();
    let cols = n + m;
    let mut rows = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row = vec![0.0; cols + 1];
        for j in 0..n {
            row[j] = sign * a[i][j];
        }
        row[n + i] = 1.0;
        row[cols] = sign * b[i];
        rows.push(row);
    }
    let mut t = Tableau {
        rows,
        basis: (n..n + m).collect(),
        cols,
    };
    let mut phase1 = vec![0.0; cols];
    phase1[n..].iter_mut().for_each(|x| *x = 1.0);
    if let Err(e) = t.optimize(&phase1, |_| true) {
        return e;
    }
    let infeas: f64 = (0..m).filter(|&i| t.basis[i] >= n).map(|i| t.rhs(i)).sum();
    let scale = 1.0 + b.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if infeas > 1e-9 * scale {
        return LpOutcome::Infeasible;
    }
    for i in 0..m {
        if t.basis[i] >= n {
            if let Some(j) = (0..n).find(|&j| t.rows[i][j].abs() > 1e-9) {
                t.pivot(i, j);
            }
        }
    }
    let mut phase2 = c.to_vec();
    phase2.resize(cols, 0.0);
    if let Err(e) = t.optimize(&phase2, |j| j < n) {
        return e;
    }
    let mut x = vec![0.0; n];
    for (i, &bv) in t.basis.iter().enumerate() {
        if bv < n {
            x[bv] = t.rhs(i).max(0.0);
        }
    }
    LpOutcome::Optimal(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_lp() {
        // min -x - y st x + 2y + s1 = 4, 3x + y + s2 = 6
        let c = [-1.0, -1.0, 0.0, 0.0];
        let a = vec![vec![1.0, 2.0, 1.0, 0.0], vec![3.0, 1.0, 0.0, 1.0]];
        let LpOutcome::Optimal(x) = minimize(&c, &a, &[4.0, 6.0]) else { panic!() };
        assert!((x[0] - 1.6).abs() < 1e-9 && (x[1] - 1.2).abs() < 1e-9, "{x:?}");
    }

    #[test]
    fn negative_rhs_and_infeasible() {
        // x - s = 2 (x >= 2), min x
        let LpOutcome::Optimal(x) = minimize(&[1.0, 0.0], &[vec![-1.0, 1.0]], &[-2.0]) else { panic!() };
        assert!((x[0] - 2.0).abs() < 1e-9);
        // x + y = -1 with x, y >= 0
        assert_eq!(minimize(&[1.0, 1.0], &[vec![1.0, 1.0]], &[-1.0]), LpOutcome::Infeasible);
        assert_eq!(minimize(&[-1.0, 0.0], &[vec![1.0, -1.0]], &[0.0]), LpOutcome::Unbounded);
    }
}
