//! A small log-det barrier solver for block LMIs with low-rank structure.
//!
//! Each constraint block is `F(y) = F₀ + Σₐ yₐ Fₐ ⪰ 0` where every `Fₐ` is a
//! short sum `Σ c (dᵤ dᵥᵀ + dᵥ dᵤᵀ)` of symmetric outer products drawn from a
//! per-block dictionary `D`. With `S = F⁻¹` and `G = DᵀSD` the barrier
//! gradient and Hessian need only entries of `G`:
//!
//! ```text
//! tr(S Fₐ)      = Σ 2c G[u,v]
//! tr(S Fₐ S Fᵦ) = Σ Σ 2 cₛ cᵣ (G[u,w] G[v,z] + G[u,z] G[v,w])
//! ```

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

/// `coef · (d_u d_vᵀ + d_v d_uᵀ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub u: usize,
    pub v: usize,
    pub coef: f64,
}

#[derive(Debug, Clone)]
pub struct Block {
    pub dict: DMatrix<f64>,
    pub constant: DMatrix<f64>,
    /// `(variable index, terms)`; variables absent from the list do not enter.
    pub vars: Vec<(usize, Vec<Term>)>,
}

impl Block {
    pub fn new(dict: DMatrix<f64>, constant: DMatrix<f64>) -> Self {
        assert_eq!(dict.nrows(), constant.nrows());
        assert!(constant.is_square());
        Self {
            dict,
            constant,
            vars: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.constant.nrows()
    }

    pub fn add(&mut self, var: usize, terms: Vec<Term>) {
        self.vars.push((var, terms));
    }

    /// `Σ yₐ Fₐ`, without the constant.
    pub fn linear(&self, y: &DVector<f64>) -> DMatrix<f64> {
        let l = self.dict.ncols();
        let mut c = DMatrix::<f64>::zeros(l, l);
        for (a, terms) in &self.vars {
            let ya = y[*a];
            if ya == 0.0 {
                continue;
            }
            for t in terms {
                c[(t.u, t.v)] += ya * t.coef;
            }
        }
        let c = &c + c.transpose();
        &self.dict * c * self.dict.transpose()
    }

    pub fn eval(&self, y: &DVector<f64>) -> DMatrix<f64> {
        &self.constant + self.linear(y)
    }
}

#[derive(Debug, Clone)]
pub struct Problem {
    pub num_vars: usize,
    pub objective: DVector<f64>,
    pub blocks: Vec<Block>,
}

#[derive(Debug, Clone, Copy)]
pub struct Options {
    pub t0: f64,
    pub mu: f64,
    /// Stop when the barrier duality-gap estimate falls below this.
    pub gap_tol: f64,
    pub max_newton: usize,
    pub max_outer: usize,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            t0: 1.0,
            mu: 10.0,
            gap_tol: 1e-8,
            max_newton: 80,
            max_outer: 40,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    /// The barrier path reached the gap tolerance.
    Converged,
    /// The caller's stopping predicate fired.
    Stopped,
    /// Iteration limits were hit; the iterate is strictly feasible.
    IterationLimit,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub y: DVector<f64>,
    pub objective: f64,
    pub status: Status,
    pub newton_steps: usize,
}

fn chol(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new((m + m.transpose()) * 0.5)
}

impl Problem {
    pub fn strictly_feasible(&self, y: &DVector<f64>) -> bool {
        self.blocks.iter().all(|b| chol(&b.eval(y)).is_some())
    }

    fn barrier(&self, y: &DVector<f64>, t: f64) -> Option<f64> {
        let mut val = t * self.objective.dot(y);
        for b in &self.blocks {
            let c = chol(&b.eval(y))?;
            val -= 2.0 * c.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        }
        Some(val)
    }

    fn total_dim(&self) -> f64 {
        self.blocks.iter().map(|b| b.dim()).sum::<usize>() as f64
    }

    fn grad_hess(&self, y: &DVector<f64>, t: f64) -> Option<(DVector<f64>, DMatrix<f64>)> {
        let k = self.num_vars;
        let mut g = &self.objective * t;
        let mut h = DMatrix::<f64>::zeros(k, k);
        for b in &self.blocks {
            let s = chol(&b.eval(y))?.inverse();
            let gm = b.dict.transpose() * s * &b.dict;
            for (a, terms) in &b.vars {
                g[*a] -= terms.iter().map(|t| 2.0 * t.coef * gm[(t.u, t.v)]).sum::<f64>();
            }
            for (i, (a, ta)) in b.vars.iter().enumerate() {
                for (bv, tb) in &b.vars[i..] {
                    let mut acc = 0.0;
                    for s in ta {
                        for r in tb {
                            acc += s.coef
                                * r.coef
                                * (gm[(s.u, r.u)] * gm[(s.v, r.v)] + gm[(s.u, r.v)] * gm[(s.v, r.u)]);
                        }
                    }
                    acc *= 2.0;
                    h[(*a, *bv)] += acc;
                    if a != bv {
                        h[(*bv, *a)] += acc;
                    }
                }
            }
        }
        Some((g, h))
    }

    /// Minimise `cᵀy` from a strictly feasible `y0`. `stop` is checked after
    /// every Newton step and may end the solve early.
    pub fn minimize<F>(&self, y0: DVector<f64>, opts: &Options, stop: F) -> Option<Outcome>
    where
        F: Fn(&DVector<f64>) -> bool,
    {
        if !self.strictly_feasible(&y0) {
            return None;
        }
        let mut y = y0;
        let mut t = opts.t0;
        let mut steps = 0;
        let m = self.total_dim();
        for _ in 0..opts.max_outer {
            for _ in 0..opts.max_newton {
                let (g, h) = self.grad_hess(&y, t)?;
                let dy = solve_spd(&h, &(-&g))?;
                let decrement = -g.dot(&dy);
                if !(decrement > 1e-12) {
                    break;
                }
                let f0 = self.barrier(&y, t)?;
                let mut step = 1.0;
                let mut accepted = false;
                for _ in 0..60 {
                    let trial = &y + &dy * step;
                    if let Some(f1) = self.barrier(&trial, t) {
                        if f1 <= f0 - 0.25 * step * decrement {
                            y = trial;
                            accepted = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                steps += 1;
                if stop(&y) {
                    return Some(self.outcome(y, Status::Stopped, steps));
                }
                if !accepted || decrement < 1e-10 {
                    break;
                }
            }
            if m / t < opts.gap_tol {
                return Some(self.outcome(y, Status::Converged, steps));
            }
            t *= opts.mu;
        }
        Some(self.outcome(y, Status::IterationLimit, steps))
    }

    fn outcome(&self, y: DVector<f64>, status: Status, newton_steps: usize) -> Outcome {
        Outcome {
            objective: self.objective.dot(&y),
            y,
            status,
            newton_steps,
        }
    }
}

/// Cholesky solve with escalating diagonal regularisation.
fn solve_spd(h: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let scale = h.diagonal().amax().max(1e-300);
    let mut reg = 0.0;
    for _ in 0..12 {
        let mut hr = h.clone();
        for i in 0..hr.nrows() {
            hr[(i, i)] += reg;
        }
        if let Some(c) = Cholesky::new(hr) {
            return Some(c.solve(rhs));
        }
        reg = if reg == 0.0 { 1e-14 * scale } else { reg * 100.0 };
    }
    None
}

/// Index of the packed upper-triangular entry `(p, q)`, `p ≤ q`, of an `n×n` symmetric matrix.
pub fn sym_index(n: usize, p: usize, q: usize) -> usize {
    let (p, q) = if p <= q { (p, q) } else { (q, p) };
    p * n - p * (p + 1) / 2 + q
}

pub fn sym_count(n: usize) -> usize {
    n * (n + 1) / 2
}

/// Unpack a symmetric matrix from variables starting at `offset`.
pub fn unpack_sym(y: &DVector<f64>, offset: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| y[offset + sym_index(n, i, j)])
}

pub fn pack_sym(m: &DMatrix<f64>, y: &mut DVector<f64>, offset: usize) {
    let n = m.nrows();
    for p in 0..n {
        for q in p..n {
            y[offset + sym_index(n, p, q)] = 0.5 * (m[(p, q)] + m[(q, p)]);
        }
    }
}

/// Terms expressing the symmetric basis element for `(p, q)` with unit
/// vectors `e_p = dict[base + p]`.
pub fn sym_basis_terms(base: usize, p: usize, q: usize, coef: f64) -> Vec<Term> {
    if p == q {
        vec![Term {
            u: base + p,
            v: base + p,
            coef: 0.5 * coef,
        }]
    } else {
        vec![Term {
            u: base + p,
            v: base + q,
            coef,
        }]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_round_trip() {
        let n = 4;
        let m = DMatrix::from_fn(n, n, |i, j| (i + j) as f64 + 0.5 * (i * j) as f64);
        let mut y = DVector::zeros(sym_count(n) + 2);
        pack_sym(&m, &mut y, 2);
        assert_eq!(unpack_sym(&y, 2, n), m);
        let mut seen = vec![false; sym_count(n)];
        for p in 0..n {
            for q in p..n {
                assert!(!seen[sym_index(n, p, q)]);
                seen[sym_index(n, p, q)] = true;
            }
        }
    }

    /// Minimise y subject to [[1, y], [y, 1]] ⪰ 0; the optimum is y = -1.
    #[test]
    fn scalar_lmi_optimum() {
        let dict = DMatrix::<f64>::identity(2, 2);
        let mut b = Block::new(dict, DMatrix::identity(2, 2));
        b.add(0, vec![Term { u: 0, v: 1, coef: 1.0 }]);
        let p = Problem {
            num_vars: 1,
            objective: DVector::from_element(1, 1.0),
            blocks: vec![b],
        };
        let out = p
            .minimize(DVector::zeros(1), &Options::default(), |_| false)
            .unwrap();
        assert_eq!(out.status, Status::Converged);
        assert!((out.y[0] + 1.0).abs() < 1e-6, "{}", out.y[0]);
    }

    #[test]
    fn rejects_infeasible_start() {
        let mut b = Block::new(DMatrix::identity(1, 1), DMatrix::from_element(1, 1, -1.0));
        b.add(0, vec![Term { u: 0, v: 0, coef: 0.5 }]);
        let p = Problem {
            num_vars: 1,
            objective: DVector::from_element(1, 1.0),
            blocks: vec![b],
        };
        assert!(p.minimize(DVector::zeros(1), &Options::default(), |_| false).is_none());
    }
}
