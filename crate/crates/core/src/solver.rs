//! Sparse saddle-point systems: coordinate storage, elimination of fixed and
//! constrained unknowns by congruence, and the direct solve.

use std::collections::{BTreeMap, BTreeSet};

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Square system in coordinate form. Duplicate entries are summed in
/// insertion order, so assembly order fixes the floating-point result.
#[derive(Debug, Clone, PartialEq)]
pub struct SaddleSystem {
    pub n: usize,
    /// Unknowns `0..n_primal` are displacements, the rest multipliers.
    pub n_primal: usize,
    pub entries: Vec<(usize, usize, f64)>,
    pub rhs: Vec<f64>,
}

impl SaddleSystem {
    pub fn new(n: usize, n_primal: usize) -> Self {
        SaddleSystem {
            n,
            n_primal,
            entries: Vec::new(),
            rhs: vec![0.0; n],
        }
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        if v != 0.0 {
            self.entries.push((i, j, v));
        }
    }

    /// Scatters a local matrix; `None` marks inactive local unknowns.
    pub fn add_block(&mut self, dofs: &[Option<usize>], k: &DMatrix<f64>) {
        for (a, ia) in dofs.iter().enumerate() {
            let Some(i) = *ia else { continue };
            for (b, ib) in dofs.iter().enumerate() {
                if let Some(j) = *ib {
                    self.add(i, j, k[(a, b)]);
                }
            }
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for &(i, j, v) in &self.entries {
            y[i] += v * x[j];
        }
        y
    }

    /// Summed entries keyed by (row, col).
    pub fn compressed(&self) -> BTreeMap<(usize, usize), f64> {
        let mut m = BTreeMap::new();
        for &(i, j, v) in &self.entries {
            *m.entry((i, j)).or_insert(0.0) += v;
        }
        m
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut k = DMatrix::zeros(self.n, self.n);
        for &(i, j, v) in &self.entries {
            k[(i, j)] += v;
        }
        k
    }

    /// Maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        let mut r = vec![0.0_f64; self.n];
        for (&(i, _), v) in &self.compressed() {
            r[i] += v.abs();
        }
        r.into_iter().fold(0.0, f64::max)
    }

    pub fn is_symmetric(&self, rel_tol: f64) -> bool {
        let m = self.compressed();
        let scale = m.values().fold(0.0_f64, |a, v| a.max(v.abs()));
        m.iter().all(|(&(i, j), &v)| {
            (v - m.get(&(j, i)).copied().unwrap_or(0.0)).abs() <= rel_tol * scale
        })
    }

    /// Largest magnitude in the multiplier/multiplier block.
    pub fn dual_block_max(&self) -> f64 {
        self.compressed()
            .iter()
            .filter(|(&(i, j), _)| i >= self.n_primal && j >= self.n_primal)
            .fold(0.0, |a, (_, v)| a.max(v.abs()))
    }

    /// `|K x - f|_inf`.
    pub fn residual_norm(&self, x: &[f64]) -> f64 {
        self.matvec(x)
            .iter()
            .zip(&self.rhs)
            .fold(0.0, |a, (kx, f)| a.max((kx - f).abs()))
    }
}

/// Scalar multi-point constraint `x[slave] = sum w x[master]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMpc {
    pub slave: usize,
    pub masters: Vec<(usize, f64)>,
}

/// Affine substitution `x = T y + x0` from reduced to full unknowns.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction {
    /// Row of `T` for every full unknown.
    rows: Vec<Vec<(usize, f64)>>,
    offset: Vec<f64>,
    n_reduced: usize,
    n_primal_reduced: usize,
}

impl Reduction {
    pub fn identity(n: usize, n_primal: usize) -> Self {
        Reduction {
            rows: (0..n).map(|i| vec![(i, 1.0)]).collect(),
            offset: vec![0.0; n],
            n_reduced: n,
            n_primal_reduced: n_primal,
        }
    }

    /// Removes prescribed unknowns; their values move to the right-hand side.
    pub fn dirichlet(n: usize, n_primal: usize, fixed: &BTreeMap<usize, f64>) -> Self {
        let mut rows = Vec::with_capacity(n);
        let mut offset = vec![0.0; n];
        let mut k = 0;
        let mut n_primal_reduced = 0;
        for i in 0..n {
            if let Some(&v) = fixed.get(&i) {
                rows.push(Vec::new());
                offset[i] = v;
            } else {
                rows.push(vec![(k, 1.0)]);
                if i < n_primal {
                    n_primal_reduced += 1;
                }
                k += 1;
            }
        }
        Reduction {
            rows,
            offset,
            n_reduced: k,
            n_primal_reduced,
        }
    }

    /// Expresses slaves through their masters. Masters must not be slaves.
    pub fn mpc(n: usize, n_primal: usize, constraints: &[ScalarMpc]) -> Result<Self> {
        let mut slaves = BTreeMap::new();
        for c in constraints {
            if c.slave >= n || slaves.insert(c.slave, c).is_some() {
                return Err(Error::InvalidArgument(format!(
                    "conflicting constraints on unknown {}",
                    c.slave
                )));
            }
        }
        let mut index = vec![usize::MAX; n];
        let mut k = 0;
        let mut n_primal_reduced = 0;
        for i in 0..n {
            if !slaves.contains_key(&i) {
                index[i] = k;
                if i < n_primal {
                    n_primal_reduced += 1;
                }
                k += 1;
            }
        }
        let mut rows = Vec::with_capacity(n);
        for i in 0..n {
            match slaves.get(&i) {
                None => rows.push(vec![(index[i], 1.0)]),
                Some(c) => {
                    let mut row = Vec::with_capacity(c.masters.len());
                    for &(m, w) in &c.masters {
                        if m >= n || slaves.contains_key(&m) {
                            return Err(Error::InvalidArgument(format!(
                                "master {m} of unknown {i} is itself constrained"
                            )));
                        }
                        if w != 0.0 {
                            row.push((index[m], w));
                        }
                    }
                    rows.push(row);
                }
            }
        }
        Ok(Reduction {
            rows,
            offset: vec![0.0; n],
            n_reduced: k,
            n_primal_reduced,
        })
    }

    pub fn n_reduced(&self) -> usize {
        self.n_reduced
    }

    /// Reduced index of a full unknown kept as-is, if any.
    pub fn kept(&self, i: usize) -> Option<usize> {
        match self.rows[i].as_slice() {
            [(k, w)] if *w == 1.0 => Some(*k),
            _ => None,
        }
    }

    /// `T^T K T` and `T^T (f - K x0)`.
    pub fn reduce(&self, sys: &SaddleSystem) -> SaddleSystem {
        let mut f = sys.rhs.clone();
        if self.offset.iter().any(|&v| v != 0.0) {
            let kx = sys.matvec(&self.offset);
            for (fi, k) in f.iter_mut().zip(kx) {
                *fi -= k;
            }
        }
        let mut out = SaddleSystem::new(self.n_reduced, self.n_primal_reduced);
        out.entries.reserve(sys.entries.len());
        for &(i, j, v) in &sys.entries {
            for &(a, wa) in &self.rows[i] {
                for &(b, wb) in &self.rows[j] {
                    out.add(a, b, wa * wb * v);
                }
            }
        }
        for (i, fi) in f.iter().enumerate() {
            for &(a, wa) in &self.rows[i] {
                out.rhs[a] += wa * fi;
            }
        }
        out
    }

    pub fn expand(&self, y: &[f64]) -> Vec<f64> {
        self.rows
            .iter()
            .zip(&self.offset)
            .map(|(row, &x0)| x0 + row.iter().map(|&(a, w)| w * y[a]).sum::<f64>())
            .collect()
    }
}

/// Condenses slave unknowns into their masters. Without constraints the
/// system is returned unchanged.
pub fn apply_mpc(
    sys: &SaddleSystem,
    constraints: &[ScalarMpc],
) -> Result<(SaddleSystem, Reduction)> {
    if constraints.is_empty() {
        return Ok((sys.clone(), Reduction::identity(sys.n, sys.n_primal)));
    }
    let r = Reduction::mpc(sys.n, sys.n_primal, constraints)?;
    Ok((r.reduce(sys), r))
}

/// Relative residual accepted after refinement.
pub const SOLVE_TOL: f64 = 1e-8;
/// Residual accepted relative to the right-hand side.
pub const LOAD_TOL: f64 = 1e-4;

/// Sparse LU with one step of iterative refinement.
pub fn solve_system(sys: &SaddleSystem) -> Result<Vec<f64>> {
    let n = sys.n;
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut touched = BTreeSet::new();
    for &(i, _, v) in &sys.entries {
        if v != 0.0 {
            touched.insert(i);
        }
    }
    if touched.len() < n {
        let i = (0..n).find(|i| !touched.contains(i)).unwrap();
        let kind = if i < sys.n_primal {
            "displacement"
        } else {
            "multiplier"
        };
        return Err(Error::SingularSystem(format!(
            "{kind} unknown {i} has an empty row"
        )));
    }
    let trips: Vec<Triplet<usize, usize, f64>> = sys
        .entries
        .iter()
        .map(|&(row, col, val)| Triplet { row, col, val })
        .collect();
    let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &trips)
        .map_err(|e| Error::Solver(format!("matrix construction: {e:?}")))?;
    let lu = a
        .sp_lu()
        .map_err(|e| Error::Solver(format!("factorization: {e:?}")))?;
    let mut x = Mat::<f64>::from_fn(n, 1, |i, _| sys.rhs[i]);
    lu.solve_in_place(x.as_mut());
    let mut sol: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
    let kx = sys.matvec(&sol);
    let mut r = Mat::<f64>::from_fn(n, 1, |i, _| sys.rhs[i] - kx[i]);
    lu.solve_in_place(r.as_mut());
    for (i, s) in sol.iter_mut().enumerate() {
        *s += r[(i, 0)];
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem("non-finite solution".into()));
    }
    let res = sys.residual_norm(&sol);
    let xn = sol.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let fnorm = sys.rhs.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let scale = sys.norm_inf() * xn + fnorm;
    // a singular factorization still yields a small residual relative to the
    // exploding solution, so the load scale is checked as well
    if res > SOLVE_TOL * scale.max(f64::MIN_POSITIVE) || (fnorm > 0.0 && res > LOAD_TOL * fnorm) {
        return Err(Error::SingularSystem(format!(
            "residual {res:.3e} against scale {scale:.3e}"
        )));
    }
    log::debug!("solved {n} unknowns, residual {res:.3e}");
    Ok(sol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spd(n: usize) -> SaddleSystem {
        let mut s = SaddleSystem::new(n, n);
        for i in 0..n {
            s.add(i, i, 2.0);
            if i + 1 < n {
                s.add(i, i + 1, -1.0);
                s.add(i + 1, i, -1.0);
            }
        }
        s
    }

    #[test]
    fn duplicates_are_summed() {
        let mut s = SaddleSystem::new(2, 2);
        s.add(0, 0, 1.0);
        s.add(0, 0, 2.0);
        s.add(1, 1, 4.0);
        s.rhs = vec![6.0, 8.0];
        let x = solve_system(&s).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-14 && (x[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn tridiagonal_solve_matches_dense() {
        let mut s = spd(20);
        s.rhs = (0..20).map(|i| (i as f64).sin()).collect();
        let x = solve_system(&s).unwrap();
        let dense = s
            .to_dense()
            .lu()
            .solve(&nalgebra::DVector::from_vec(s.rhs.clone()))
            .unwrap();
        for i in 0..20 {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn saddle_with_zero_diagonal_solves() {
        // two springs tied by a multiplier: k1 u1 + l = 0, k2 u2 - l = f, u1 - u2 = 0
        let mut s = SaddleSystem::new(3, 2);
        s.add(0, 0, 1.0);
        s.add(1, 1, 3.0);
        s.add(0, 2, 1.0);
        s.add(2, 0, 1.0);
        s.add(1, 2, -1.0);
        s.add(2, 1, -1.0);
        s.rhs = vec![0.0, 4.0, 0.0];
        let x = solve_system(&s).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert!((x[2] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn empty_row_is_reported() {
        let mut s = SaddleSystem::new(2, 2);
        s.add(0, 0, 1.0);
        assert!(matches!(solve_system(&s), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut s = SaddleSystem::new(2, 2);
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            s.add(i, j, 1.0);
        }
        s.rhs = vec![1.0, 0.0];
        assert!(solve_system(&s).unwrap_err().is_solver());
    }

    #[test]
    fn dirichlet_reduction_keeps_symmetry_and_values() {
        let mut s = spd(4);
        s.rhs = vec![0.0, 0.0, 0.0, 1.0];
        let fixed = BTreeMap::from([(0, 0.5)]);
        let r = Reduction::dirichlet(4, 4, &fixed);
        let red = r.reduce(&s);
        assert_eq!(red.n, 3);
        assert!(red.is_symmetric(0.0));
        assert_eq!(red.rhs[0], 0.5);
        let x = r.expand(&solve_system(&red).unwrap());
        assert_eq!(x[0], 0.5);
        assert!(s.matvec(&x)[1..]
            .iter()
            .zip(&s.rhs[1..])
            .all(|(a, b)| (a - b).abs() < 1e-13));
    }

    #[test]
    fn single_slave_congruence_by_hand() {
        // slave 1 = (m0 + m2) / 2
        let mut s = SaddleSystem::new(3, 3);
        let k = [[4.0, 1.0, 0.5], [1.0, 3.0, 2.0], [0.5, 2.0, 5.0]];
        for i in 0..3 {
            for j in 0..3 {
                s.add(i, j, k[i][j]);
            }
        }
        s.rhs = vec![1.0, 2.0, 3.0];
        let c = ScalarMpc {
            slave: 1,
            masters: vec![(0, 0.5), (2, 0.5)],
        };
        let (red, r) = apply_mpc(&s, &[c]).unwrap();
        let d = red.to_dense();
        let t = nalgebra::DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.5, 0.5, 0.0, 1.0]);
        let oracle = t.transpose() * s.to_dense() * &t;
        assert!((d - oracle).amax() < 1e-14);
        assert_eq!(red.rhs, vec![2.0, 4.0]);
        let x = r.expand(&[2.0, 4.0]);
        assert_eq!(x, vec![2.0, 3.0, 4.0]);
    }

    #[test]
    fn no_constraints_leave_system_unchanged() {
        let s = spd(5);
        let (red, _) = apply_mpc(&s, &[]).unwrap();
        assert_eq!(red, s);
    }

    #[test]
    fn doubly_constrained_slave_rejected() {
        let s = spd(3);
        let c = ScalarMpc {
            slave: 1,
            masters: vec![(0, 1.0)],
        };
        assert!(apply_mpc(&s, &[c.clone(), c]).is_err());
        let chained = [
            ScalarMpc {
                slave: 1,
                masters: vec![(0, 1.0)],
            },
            ScalarMpc {
                slave: 2,
                masters: vec![(1, 1.0)],
            },
        ];
        assert!(apply_mpc(&s, &chained).is_err());
    }
}
