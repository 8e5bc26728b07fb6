//! The three-axis dataset on which the exact step makes the first component
//! worse: priming aligned mostly with the smallest axis loses the ordering.

use std::fmt;

use crate::data::counterexample_dataset;
use crate::error::Result;
use crate::linalg::{covariance, dot, SymmetricMatrix};
use crate::ppca::{self, check_prop3, projected_covariance, ComponentSet};

#[derive(Debug, Clone)]
pub struct CounterexampleReport {
    pub epsilon: f64,
    /// `X^T X / n`.
    pub covariance: SymmetricMatrix,
    /// `Y^T Y / n` in the primed basis.
    pub projected_covariance: SymmetricMatrix,
    pub primed: ComponentSet,
    pub ppca: ComponentSet,
    /// `<e_1^priming, e_1>^2`
    pub priming_overlap: f64,
    /// `<e_1^ppca, e_1>^2`
    pub ppca_overlap: f64,
    pub prop3_flags: Vec<bool>,
}

impl CounterexampleReport {
    /// The exact step returned the primed directions in swapped order.
    pub fn ordering_swapped(&self) -> bool {
        let p = self.primed.vectors();
        let q = self.ppca.vectors();
        dot(&q[0], &p[1]).abs() > 1.0 - 1e-12 && dot(&q[1], &p[0]).abs() > 1.0 - 1e-12
    }
}

/// Primes with `{(eps, 0, sqrt(1 - eps^2)), (0, 1, 0)}` and runs the exact step
/// for two components.
pub fn run_counterexample(epsilon: f64) -> Result<CounterexampleReport> {
    let ds = counterexample_dataset();
    let n = ds.rows() as f64;
    let primed = ComponentSet::new(
        3,
        vec![
            vec![epsilon, 0.0, (1.0 - epsilon * epsilon).sqrt()],
            vec![0.0, 1.0, 0.0],
        ],
    )?;
    let proj = projected_covariance(&ds, &primed)?;
    let result = ppca::ppca(&ds, &primed, 2)?;
    let e1 = [1.0, 0.0, 0.0];
    let truth = ComponentSet::new(3, vec![e1.to_vec(), vec![0.0, 1.0, 0.0]])?;
    Ok(CounterexampleReport {
        epsilon,
        covariance: covariance(ds.matrix(), true),
        projected_covariance: proj.matrix.scaled(1.0 / n),
        priming_overlap: dot(&primed.vectors()[0], &e1).powi(2),
        ppca_overlap: dot(&result.components.vectors()[0], &e1).powi(2),
        prop3_flags: check_prop3(&ds, &primed, &truth, 2)?,
        primed,
        ppca: result.components,
    })
}

fn fmt_matrix(f: &mut fmt::Formatter<'_>, m: &SymmetricMatrix) -> fmt::Result {
    for i in 0..m.dim() {
        let row: Vec<String> = m.row(i).iter().map(|x| format!("{x:>12.8}")).collect();
        writeln!(f, "    [{}]", row.join(", "))?;
    }
    Ok(())
}

impl fmt::Display for CounterexampleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "dataset: {{±3 e1, ±2 e2, ±e3}}, epsilon = {}",
            self.epsilon
        )?;
        writeln!(f, "covariance (1/n) X^T X:")?;
        fmt_matrix(f, &self.covariance)?;
        writeln!(f, "projected covariance (1/n) Y^T Y in the primed basis:")?;
        fmt_matrix(f, &self.projected_covariance)?;
        for (name, set) in [("priming", &self.primed), ("ppca", &self.ppca)] {
            for (i, v) in set.vectors().iter().enumerate() {
                writeln!(f, "{name} e{}: {:?}", i + 1, v)?;
            }
        }
        writeln!(f, "<e1_priming, e1>^2 = {:e}", self.priming_overlap)?;
        writeln!(f, "<e1_ppca, e1>^2    = {:e}", self.ppca_overlap)?;
        writeln!(
            f,
            "variance-maximization conditions: {:?}",
            self.prop3_flags
        )?;
        let verdict = if self.ordering_swapped() {
            "ordering swapped: the exact step made the first component worse"
        } else {
            "ordering preserved"
        };
        write!(f, "verdict: {verdict}")
    }
}
