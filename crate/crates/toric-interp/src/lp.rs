//! Exact rational linear feasibility with certificates.
//!
//! `LinearSystem` holds rows `a.x >= b` and `a.x = b` over free rational
//! variables. [`LinearSystem::solve`] returns either a feasible point or a
//! Farkas witness: multipliers `y` (nonnegative on inequality rows) with
//! `sum y_i a_i = 0` and `sum y_i b_i > 0`, which refutes the system. Both
//! outcomes are checkable in exact arithmetic, and `solve` asserts its own
//! certificate before returning.
//!
//! Method: the feasibility question is phrased as `min t : a_i.x + t >= b_i,
//! t >= -1` (feasible iff the optimum is <= 0) and solved through the dual
//! standard-form program `max b'y : G'y = c, y >= 0` with a revised simplex
//! whose basis has size `n_vars + 1` - tiny for our systems, which have few
//! variables and many sparse rows. Bland's rule everywhere, so the iteration
//! is deterministic and cannot cycle.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Exact rational scalar used by the solver.
pub type Rat = BigRational;

/// Convenience: integer as a rational.
pub fn rat(n: i64) -> Rat {
    Rat::from(BigInt::from(n))
}

/// Row sense.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    /// Sparse coefficients `(var, coeff)`, no duplicate vars, no zeros.
    coeffs: Vec<(u32, Rat)>,
    relation: Relation,
    rhs: Rat,
}

/// A system of exact linear constraints over free rational variables.
#[derive(Debug, Clone, Default)]
pub struct LinearSystem {
    n_vars: usize,
    rows: Vec<Row>,
}

/// Farkas-style refutation: one multiplier per row of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct FarkasWitness {
    pub multipliers: Vec<Rat>,
}

/// Outcome of [`LinearSystem::solve`].
#[derive(Debug, Clone)]
pub enum Feasibility {
    Feasible(Vec<Rat>),
    Infeasible(FarkasWitness),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

impl LinearSystem {
    pub fn new(n_vars: usize) -> Self {
        Self { n_vars, rows: Vec::new() }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    fn push(&mut self, coeffs: Vec<(usize, Rat)>, relation: Relation, rhs: Rat) {
        let mut merged: Vec<(u32, Rat)> = Vec::with_capacity(coeffs.len());
        for (var, c) in coeffs {
            assert!(var < self.n_vars, "variable index out of range");
            if c.is_zero() {
                continue;
            }
            match merged.iter_mut().find(|(v, _)| *v == var as u32) {
                Some((_, acc)) => *acc += c,
                None => merged.push((var as u32, c)),
            }
        }
        merged.retain(|(_, c)| !c.is_zero());
        merged.sort_by_key(|&(v, _)| v);
        self.rows.push(Row { coeffs: merged, relation, rhs });
    }

    /// Adds `sum coeffs[i].1 * x_{coeffs[i].0} >= rhs`.
    pub fn add_ge(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.push(coeffs, Relation::Ge, rhs);
    }

    /// Adds `sum ... <= rhs` (stored negated as a `>=` row).
    pub fn add_le(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        let neg = coeffs.into_iter().map(|(v, c)| (v, -c)).collect();
        self.push(neg, Relation::Ge, -rhs);
    }

    /// Adds `sum ... = rhs`.
    pub fn add_eq(&mut self, coeffs: Vec<(usize, Rat)>, rhs: Rat) {
        self.push(coeffs, Relation::Eq, rhs);
    }

    /// True iff `x` satisfies every row exactly.
    pub fn check_solution(&self, x: &[Rat]) -> bool {
        if x.len() != self.n_vars {
            return false;
        }
        self.rows.iter().all(|row| {
            let lhs: Rat =
                row.coeffs.iter().map(|(v, c)| c * &x[*v as usize]).sum();
            match row.relation {
                Relation::Ge => lhs >= row.rhs,
                Relation::Eq => lhs == row.rhs,
            }
        })
    }

    /// True iff `w` is a valid refutation of the system: multipliers are
    /// nonnegative on `>=` rows, the combined left sides cancel, and the
    /// combined right side is positive.
    pub fn check_witness(&self, w: &FarkasWitness) -> bool {
        if w.multipliers.len() != self.rows.len() {
            return false;
        }
        let mut combined = vec![Rat::zero(); self.n_vars];
        let mut rhs = Rat::zero();
        for (row, y) in self.rows.iter().zip(&w.multipliers) {
            if row.relation == Relation::Ge && y.is_negative() {
                return false;
            }
            for (v, c) in &row.coeffs {
                combined[*v as usize] += c * y;
            }
            rhs += &row.rhs * y;
        }
        combined.iter().all(Rat::is_zero) && rhs.is_positive()
    }

    /// Decides feasibility, returning a self-checked certificate either way.
    pub fn solve(&self) -> Feasibility {
        let result = self.solve_inner();
        match &result {
            Feasibility::Feasible(x) => {
                assert!(self.check_solution(x), "solver produced an invalid solution");
            }
            Feasibility::Infeasible(w) => {
                assert!(self.check_witness(w), "solver produced an invalid witness");
            }
        }
        result
    }

    fn solve_inner(&self) -> Feasibility {
        if self.rows.is_empty() {
            return Feasibility::Feasible(vec![Rat::zero(); self.n_vars]);
        }
        if self.n_vars == 0 {
            // Rows reduce to `0 >= b` / `0 = b`.
            for (i, row) in self.rows.iter().enumerate() {
                let bad = match row.relation {
                    Relation::Ge => row.rhs.is_positive(),
                    Relation::Eq => !row.rhs.is_zero(),
                };
                if bad {
                    let mut multipliers = vec![Rat::zero(); self.rows.len()];
                    multipliers[i] = if row.relation == Relation::Eq && row.rhs.is_negative() {
                        -Rat::one()
                    } else {
                        Rat::one()
                    };
                    return Feasibility::Infeasible(FarkasWitness { multipliers });
                }
            }
            return Feasibility::Feasible(Vec::new());
        }
        Simplex::build(self).run()
    }
}

/// Dual column bookkeeping: which original row (and sign) a column encodes.
#[derive(Debug, Clone, Copy)]
enum ColumnSource {
    /// `row` taken with the given sign (`-1` only for the negated half of an
    /// equality row).
    Row { row: usize, negated: bool },
    /// The auxiliary bound `t >= -1`.
    Bound,
}

/// Revised simplex on the dual of the `min t` relaxation; see module docs.
struct Simplex {
    /// Basis dimension: `n_vars + 1` (the `+1` is the `t` coordinate).
    dim: usize,
    /// Sparse dual columns (rows of the relaxed primal), length `dim` each.
    columns: Vec<Vec<(u32, Rat)>>,
    /// Dual objective coefficient per column (= primal right-hand side).
    objective: Vec<Rat>,
    sources: Vec<ColumnSource>,
    /// Dual constraint right-hand side `c` (zeros, then 1 for the `t` row).
    c: Vec<Rat>,
    /// Dense inverse of the current basis matrix.
    binv: Vec<Vec<Rat>>,
    /// Basis member per basis slot: real column index or artificial marker.
    basis: Vec<BasisVar>,
    /// O(1) membership flag per real column.
    in_basis: Vec<bool>,
    n_rows: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BasisVar {
    Column(usize),
    Artificial(usize),
}

impl Simplex {
    fn build(sys: &LinearSystem) -> Self {
        let dim = sys.n_vars + 1;
        let t_slot = sys.n_vars as u32;
        let mut columns = Vec::new();
        let mut objective = Vec::new();
        let mut sources = Vec::new();
        for (i, row) in sys.rows.iter().enumerate() {
            let mut col: Vec<(u32, Rat)> = row.coeffs.clone();
            col.push((t_slot, Rat::one()));
            columns.push(col);
            objective.push(row.rhs.clone());
            sources.push(ColumnSource::Row { row: i, negated: false });
            if row.relation == Relation::Eq {
                let mut neg: Vec<(u32, Rat)> =
                    row.coeffs.iter().map(|(v, c)| (*v, -c.clone())).collect();
                neg.push((t_slot, Rat::one()));
                columns.push(neg);
                objective.push(-row.rhs.clone());
                sources.push(ColumnSource::Row { row: i, negated: true });
            }
        }
        // t >= -1 keeps the primal bounded so the dual is always feasible.
        columns.push(vec![(t_slot, Rat::one())]);
        objective.push(rat(-1));
        sources.push(ColumnSource::Bound);

        let mut binv = vec![vec![Rat::zero(); dim]; dim];
        for (i, row) in binv.iter_mut().enumerate() {
            row[i] = Rat::one();
        }
        let basis = (0..dim).map(BasisVar::Artificial).collect();
        let c = (0..dim)
            .map(|i| if i == dim - 1 { Rat::one() } else { Rat::zero() })
            .collect();
        let in_basis = vec![false; columns.len()];
        Simplex { dim, columns, objective, sources, c, binv, basis, in_basis, n_rows: sys.rows.len() }
    }

    /// Current basic values `B^-1 c`.
    fn basic_values(&self) -> Vec<Rat> {
        self.binv
            .iter()
            .map(|row| row.iter().zip(&self.c).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `B^-1 * column`.
    fn ftran(&self, col: &[(u32, Rat)]) -> Vec<Rat> {
        let mut out = vec![Rat::zero(); self.dim];
        for (out_k, binv_row) in out.iter_mut().zip(&self.binv) {
            for (j, v) in col {
                *out_k += &binv_row[*j as usize] * v;
            }
        }
        out
    }

    /// Simplex multipliers `obj_B^T B^-1` for the given per-slot objective.
    fn multipliers(&self, obj_of_basis: &[Rat]) -> Vec<Rat> {
        let mut pi = vec![Rat::zero(); self.dim];
        for (k, ob) in obj_of_basis.iter().enumerate() {
            if ob.is_zero() {
                continue;
            }
            for (pi_j, b) in pi.iter_mut().zip(&self.binv[k]) {
                *pi_j += ob * b;
            }
        }
        pi
    }

    fn pivot(&mut self, slot: usize, col_idx: usize, u: &[Rat]) {
        let pivot = u[slot].clone();
        let prow: Vec<Rat> = self.binv[slot].iter().map(|x| x / &pivot).collect();
        for k in 0..self.dim {
            if k == slot {
                continue;
            }
            if u[k].is_zero() {
                continue;
            }
            let factor = u[k].clone();
            for j in 0..self.dim {
                let delta = &factor * &prow[j];
                self.binv[k][j] -= delta;
            }
        }
        self.binv[slot] = prow;
        if let BasisVar::Column(old) = self.basis[slot] {
            self.in_basis[old] = false;
        }
        self.basis[slot] = BasisVar::Column(col_idx);
        self.in_basis[col_idx] = true;
    }

    /// Bland entering rule: first nonbasic column with positive reduced cost.
    fn entering(&self, pi: &[Rat], col_obj: impl Fn(usize) -> Rat) -> Option<usize> {
        for (j, col) in self.columns.iter().enumerate() {
            if self.in_basis[j] {
                continue;
            }
            let mut d = col_obj(j);
            for (v, cval) in col {
                d -= &pi[*v as usize] * cval;
            }
            if d.is_positive() {
                return Some(j);
            }
        }
        None
    }

    /// Bland leaving rule on the ratio test; `None` means unbounded.
    fn leaving(&self, u: &[Rat], values: &[Rat]) -> Option<usize> {
        let mut best: Option<(usize, Rat)> = None;
        for k in 0..self.dim {
            if !u[k].is_positive() {
                continue;
            }
            let ratio = &values[k] / &u[k];
            let better = match &best {
                None => true,
                Some((bk, br)) => {
                    ratio < *br || (ratio == *br && self.basis_order(k) < self.basis_order(*bk))
                }
            };
            if better {
                best = Some((k, ratio));
            }
        }
        best.map(|(k, _)| k)
    }

    fn basis_order(&self, slot: usize) -> usize {
        match self.basis[slot] {
            BasisVar::Column(j) => j,
            BasisVar::Artificial(k) => self.columns.len() + k,
        }
    }

    fn run(mut self) -> Feasibility {
        // Phase 1: drive the artificial start basis out. The artificial for
        // slot k has sign matching c[k] so the start is feasible; with c
        // mostly zero the start is degenerate, which Bland tolerates.
        // Artificial objective: -1 per artificial (maximization form).
        let mut guard = 0usize;
        loop {
            guard += 1;
            assert!(guard < 2_000_000, "phase-1 simplex exceeded iteration guard");
            let values = self.basic_values();
            debug_assert!(values.iter().all(|v| !v.is_negative()));
            let obj_of_basis: Vec<Rat> = self
                .basis
                .iter()
                .map(|b| match b {
                    BasisVar::Artificial(_) => rat(-1),
                    BasisVar::Column(_) => Rat::zero(),
                })
                .collect();
            if self.basis.iter().all(|b| matches!(b, BasisVar::Column(_))) {
                break;
            }
            let infeas: Rat = self
                .basis
                .iter()
                .zip(&values)
                .filter(|(b, _)| matches!(b, BasisVar::Artificial(_)))
                .map(|(_, v)| v.clone())
                .sum();
            if infeas.is_zero() {
                // Degenerate artificials at level zero: try to pivot each out.
                if !self.drive_out_artificials() {
                    break; // leftover rows are dependent; values stay zero
                }
                continue;
            }
            let pi = self.multipliers(&obj_of_basis);
            let entering = self.entering(&pi, |_| Rat::zero());
            let Some(j) = entering else {
                // Optimal with positive infeasibility: the dual system has no
                // solution, meaning no Farkas combination exists; the primal
                // is then unboundedly feasible. This cannot happen because the
                // t >= -1 bound keeps the dual feasible.
                unreachable!("dual phase 1 ended infeasible despite bounding row");
            };
            let u = self.ftran(&self.columns[j]);
            let Some(slot) = self.leaving(&u, &values) else {
                unreachable!("phase-1 ratio test unbounded");
            };
            self.pivot(slot, j, &u);
        }

        // Phase 2: maximize b^T y.
        let mut guard = 0usize;
        loop {
            guard += 1;
            assert!(guard < 2_000_000, "phase-2 simplex exceeded iteration guard");
            let values = self.basic_values();
            let obj_of_basis: Vec<Rat> = self
                .basis
                .iter()
                .map(|b| match b {
                    BasisVar::Artificial(_) => Rat::zero(),
                    BasisVar::Column(j) => self.objective[*j].clone(),
                })
                .collect();
            let pi = self.multipliers(&obj_of_basis);
            let entering = self.entering(&pi, |j| self.objective[j].clone());
            let Some(j) = entering else {
                return self.finish(&values);
            };
            let u = self.ftran(&self.columns[j]);
            let Some(slot) = self.leaving(&u, &values) else {
                // Dual unbounded would mean the primal relaxation is
                // infeasible, impossible since (x = 0, large t) satisfies it.
                unreachable!("dual phase 2 unbounded");
            };
            self.pivot(slot, j, &u);
        }
    }

    /// Pivots basic zero-level artificials out on any nonzero real entry.
    /// Returns false if none could be moved (dependent rows).
    fn drive_out_artificials(&mut self) -> bool {
        for slot in 0..self.dim {
            if !matches!(self.basis[slot], BasisVar::Artificial(_)) {
                continue;
            }
            for j in 0..self.columns.len() {
                if self.in_basis[j] {
                    continue;
                }
                let u = self.ftran(&self.columns[j]);
                if !u[slot].is_zero() {
                    self.pivot(slot, j, &u);
                    return true;
                }
            }
        }
        false
    }

    fn finish(&self, values: &[Rat]) -> Feasibility {
        // Any artificial must have settled at level zero.
        for (b, v) in self.basis.iter().zip(values) {
            if matches!(b, BasisVar::Artificial(_)) {
                assert!(v.is_zero(), "artificial variable stuck at nonzero level");
            }
        }
        let objective: Rat = self
            .basis
            .iter()
            .zip(values)
            .map(|(b, v)| match b {
                BasisVar::Column(j) => &self.objective[*j] * v,
                BasisVar::Artificial(_) => Rat::zero(),
            })
            .sum();
        if objective.is_positive() {
            // min t > 0: infeasible; the dual solution is the witness.
            let mut multipliers = vec![Rat::zero(); self.n_rows];
            for (b, v) in self.basis.iter().zip(values) {
                let BasisVar::Column(j) = b else { continue };
                match self.sources[*j] {
                    ColumnSource::Row { row, negated } => {
                        if negated {
                            multipliers[row] -= v;
                        } else {
                            multipliers[row] += v;
                        }
                    }
                    ColumnSource::Bound => {}
                }
            }
            Feasibility::Infeasible(FarkasWitness { multipliers })
        } else {
            // min t <= 0: recover (x, t) from the rows tight at the final
            // basis. Artificials left over from linearly dependent dual rows
            // reduce the tight system below full rank, but those rows'
            // dependencies are null directions of the entire constraint
            // matrix, so fixing the free coordinates at zero stays feasible.
            let mut mat: Vec<Vec<Rat>> = Vec::new();
            let mut rhs: Vec<Rat> = Vec::new();
            for b in &self.basis {
                let BasisVar::Column(j) = b else { continue };
                let mut dense = vec![Rat::zero(); self.dim];
                for (v, cval) in &self.columns[*j] {
                    dense[*v as usize] = cval.clone();
                }
                mat.push(dense);
                rhs.push(self.objective[*j].clone());
            }
            let z = solve_tight(mat, rhs, self.dim);
            Feasibility::Feasible(z[..self.dim - 1].to_vec())
        }
    }
}

/// Solves a consistent (possibly underdetermined) rational system by
/// Gauss-Jordan elimination, fixing free variables at zero.
fn solve_tight(mut m: Vec<Vec<Rat>>, mut b: Vec<Rat>, n_unknowns: usize) -> Vec<Rat> {
    let n_rows = m.len();
    let mut pivot_col_of_row = Vec::with_capacity(n_rows);
    let mut row = 0usize;
    for col in 0..n_unknowns {
        let Some(p) = (row..n_rows).find(|&r| !m[r][col].is_zero()) else {
            continue;
        };
        m.swap(row, p);
        b.swap(row, p);
        let inv = m[row][col].recip();
        for c in 0..n_unknowns {
            let v = &m[row][c] * &inv;
            m[row][c] = v;
        }
        let scaled = &b[row] * &inv;
        b[row] = scaled;
        for r in 0..n_rows {
            if r != row && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for c in 0..n_unknowns {
                    let delta = &f * &m[row][c];
                    m[r][c] -= delta;
                }
                let delta = &f * &b[row];
                b[r] -= delta;
            }
        }
        pivot_col_of_row.push(col);
        row += 1;
        if row == n_rows {
            break;
        }
    }
    for r in row..n_rows {
        assert!(b[r].is_zero(), "tight basis system is inconsistent");
    }
    let mut z = vec![Rat::zero(); n_unknowns];
    for (r, &col) in pivot_col_of_row.iter().enumerate() {
        z[col] = b[r].clone();
    }
    z
}
