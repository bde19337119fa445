//! Exact reference optimum for very small problems by enumerating the
//! vertices of the feasible polytope. Slow by design of the method and
//! independent of any LP code.

use super::{FlowProblem, FlowSolution, OptimizerError, Sense, Status};

pub const ORACLE_MAX_VARS: usize = 12;
const MAX_BASES: u64 = 5_000_000;
const PIVOT_EPS: f64 = 1e-10;
const FEAS_EPS: f64 = 1e-7;

struct Row {
    a: Vec<f64>,
    b: f64,
    sense: Sense,
}

fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u64 = 1;
    for i in 0..k {
        c = c.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    c
}

/// Solves the square system in place; `None` when singular.
fn gauss(mut m: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))?;
        let scale = m[piv].iter().fold(0.0f64, |s, v| s.max(v.abs())).max(1.0);
        if m[piv][col].abs() < PIVOT_EPS * scale {
            return None;
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for i in col + 1..n {
            let f = m[i][col] / m[col][col];
            if f != 0.0 {
                for k in col..n {
                    m[i][k] -= f * m[col][k];
                }
                b[i] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (b[i] - s) / m[i][i];
    }
    Some(x)
}

/// Drops equality rows that are combinations of earlier ones. Returns
/// `None` when the equalities contradict each other.
fn independent(rows: &[&Row], n: usize) -> Option<Vec<usize>> {
    let mut basis: Vec<(Vec<f64>, f64, usize)> = Vec::new();
    let mut keep = Vec::new();
    for (idx, r) in rows.iter().enumerate() {
        let mut a = r.a.clone();
        let mut b = r.b;
        for (v, vb, p) in &basis {
            let f = a[*p] / v[*p];
            if f != 0.0 {
                for k in 0..n {
                    a[k] -= f * v[k];
                }
                b -= f * vb;
            }
        }
        let scale = r.a.iter().fold(1.0f64, |s, v| s.max(v.abs()));
        match (0..n).max_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs())) {
            Some(p) if a[p].abs() > PIVOT_EPS * scale => {
                basis.push((a, b, p));
                keep.push(idx);
            }
            _ if b.abs() > FEAS_EPS * (1.0 + r.b.abs()) => return None,
            _ => {}
        }
    }
    Some(keep)
}

fn feasible(rows: &[Row], x: &[f64]) -> bool {
    if x.iter().any(|v| *v < -FEAS_EPS) {
        return false;
    }
    rows.iter().all(|r| {
        let lhs: f64 = r.a.iter().zip(x).map(|(a, v)| a * v).sum();
        let eps = FEAS_EPS * (1.0 + r.b.abs());
        match r.sense {
            Sense::Le => lhs <= r.b + eps,
            Sense::Ge => lhs >= r.b - eps,
            Sense::Eq => (lhs - r.b).abs() <= eps,
        }
    })
}

/// Minimum-cost vertex of `problem`, found by solving every choice of
/// active constraints. Refuses problems above [`ORACLE_MAX_VARS`] variables
/// or with too many candidate bases. Only meaningful for problems bounded
/// below, which holds when costs are non-negative.
pub fn brute_force_oracle(problem: &FlowProblem) -> Result<FlowSolution, OptimizerError> {
    let n = problem.vars.len();
    if n > ORACLE_MAX_VARS {
        return Err(OptimizerError::OracleRefused(format!("{n} variables > {ORACLE_MAX_VARS}")));
    }
    let rows: Vec<Row> = problem
        .rows
        .iter()
        .map(|c| {
            let mut a = vec![0.0; n];
            for (j, v) in &c.terms {
                a[*j] += v;
            }
            Row {
                a,
                b: c.rhs,
                sense: c.sense,
            }
        })
        .collect();
    let equalities: Vec<&Row> = rows.iter().filter(|r| r.sense == Sense::Eq).collect();
    let Some(eq_keep) = independent(&equalities, n) else {
        return Ok(FlowSolution::failed(Status::Infeasible, "equalities contradict"));
    };
    let fixed: Vec<&Row> = eq_keep.iter().map(|i| equalities[*i]).collect();
    let free = n - fixed.len();

    // Candidates: inequality rows, then the bounds x_j >= 0.
    let inequalities: Vec<&Row> = rows.iter().filter(|r| r.sense != Sense::Eq).collect();
    let m = inequalities.len() + n;
    let bases = binomial(m, free);
    if bases > MAX_BASES {
        return Err(OptimizerError::OracleRefused(format!("{bases} candidate bases")));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut pick: Vec<usize> = (0..free).collect();
    loop {
        let mut mat: Vec<Vec<f64>> = fixed.iter().map(|r| r.a.clone()).collect();
        let mut rhs: Vec<f64> = fixed.iter().map(|r| r.b).collect();
        for &c in &pick {
            if c < inequalities.len() {
                mat.push(inequalities[c].a.clone());
                rhs.push(inequalities[c].b);
            } else {
                let mut e = vec![0.0; n];
                e[c - inequalities.len()] = 1.0;
                mat.push(e);
                rhs.push(0.0);
            }
        }
        if let Some(x) = gauss(mat, rhs) {
            if feasible(&rows, &x) {
                let cost = problem.objective_of(&x);
                if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                    best = Some((cost, x));
                }
            }
        }
        // Next combination in lexicographic order.
        let mut i = free;
        loop {
            if i == 0 {
                return Ok(match best {
                    Some((_, x)) => {
                        let x = x.into_iter().map(|v| if v.abs() < 1e-12 { 0.0 } else { v }).collect();
                        FlowSolution::from_values(problem, x, None)
                    }
                    None => FlowSolution::failed(Status::Infeasible, "no feasible vertex"),
                });
            }
            i -= 1;
            if pick[i] < m - free + i {
                pick[i] += 1;
                for k in i + 1..free {
                    pick[k] = pick[k - 1] + 1;
                }
                break;
            }
        }
    }
}
