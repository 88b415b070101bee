//! Finite-difference Dirichlet Schrödinger operators `−Δ_h + V` on boxes and their lowest
//! eigenvalues, used as a local ground-energy proxy along windows moving to infinity.

use std::collections::{BTreeMap, BTreeSet};

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, out_of_range, Error, Result};
use crate::geometry::AxisBox;
use crate::numeric::csum;
use crate::potentials::{MassKey, ValphaPotential};

/// Largest number of grid nodes accepted by [`assemble`].
pub const MAX_NODES: usize = 1_000_000;

/// Cantor components with positive mass below `CELL_TOL·h` are dropped in cell averages.
pub const CELL_TOL: f64 = 1e-13;

/// Rows per block in products and reductions; fixed so results do not depend on the thread count.
const BLOCK: usize = 4096;

/// Symmetric sparse matrix in compressed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<f64>,
}

impl CsrMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
        match self.cols[s..e].binary_search(&j) {
            Ok(k) => self.vals[s + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).all(|k| self.get(self.cols[k], i) == self.vals[k]))
    }

    pub fn mul_into(&self, x: &[f64], y: &mut [f64]) {
        y.par_chunks_mut(BLOCK).enumerate().for_each(|(b, out)| {
            let base = b * BLOCK;
            for (r, yi) in out.iter_mut().enumerate() {
                let i = base + r;
                let mut s = 0.0;
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    s += self.vals[k] * x[self.cols[k]];
                }
                *yi = s;
            }
        });
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_into(x, &mut y);
        y
    }
}

/// `−Δ_h + V` with Dirichlet conditions on the interior nodes of `bbox`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteHamiltonian {
    pub bbox: AxisBox,
    pub h: f64,
    /// Interior nodes per axis.
    pub shape: Vec<usize>,
    pub potential: Vec<f64>,
    pub matrix: CsrMatrix,
}

/// How `V` is turned into node values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Discretization {
    /// `V` at the node.
    Pointwise,
    /// Mean of `V` over the node's dual cell `x + h[−½, ½]^d`.
    CellAverage,
}

fn interior_shape(bbox: &AxisBox, h: f64) -> Result<Vec<usize>> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(out_of_range("h", h, "h > 0"));
    }
    let mut shape = Vec::with_capacity(bbox.lo.len());
    for (lo, hi) in bbox.lo.iter().zip(&bbox.hi) {
        let steps = (hi - lo) / h;
        let k = steps.round();
        if (steps - k).abs() > 1e-9 * steps.max(1.0) || k < 2.0 {
            return Err(invalid(
                "h",
                format!("h = {h} must divide the edge {} at least twice", hi - lo),
            ));
        }
        shape.push(k as usize - 1);
    }
    let total = shape.iter().try_fold(1usize, |acc, &s| acc.checked_mul(s));
    match total {
        Some(t) if t <= MAX_NODES => Ok(shape),
        _ => Err(Error::TooLarge {
            what: "grid nodes".into(),
            limit: MAX_NODES as u64,
        }),
    }
}

fn node_coords(bbox: &AxisBox, h: f64, shape: &[usize], mut flat: usize) -> Vec<f64> {
    // First axis varies slowest.
    let mut x = vec![0.0; shape.len()];
    for a in (0..shape.len()).rev() {
        let i = flat % shape[a];
        flat /= shape[a];
        x[a] = bbox.lo[a] + h * (i + 1) as f64;
    }
    x
}

/// Nodes of the interior grid, first axis slowest.
pub fn grid_nodes(bbox: &AxisBox, h: f64) -> Result<Vec<Vec<f64>>> {
    let shape = interior_shape(bbox, h)?;
    let n: usize = shape.iter().product();
    Ok((0..n).map(|k| node_coords(bbox, h, &shape, k)).collect())
}

/// Operator from node values of the potential.
pub fn assemble_with_values(bbox: &AxisBox, h: f64, potential: Vec<f64>) -> Result<DiscreteHamiltonian> {
    let shape = interior_shape(bbox, h)?;
    let n: usize = shape.iter().product();
    if potential.len() != n {
        return Err(Error::FieldLength {
            expected: n,
            got: potential.len(),
        });
    }
    if let Some(v) = potential.iter().find(|v| !v.is_finite()) {
        return Err(out_of_range("V", *v, "finite values"));
    }
    let d = shape.len();
    let inv = 1.0 / (h * h);
    let mut strides = vec![1usize; d];
    for a in (0..d.saturating_sub(1)).rev() {
        strides[a] = strides[a + 1] * shape[a + 1];
    }
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(n * (2 * d + 1));
    let mut vals = Vec::with_capacity(n * (2 * d + 1));
    row_ptr.push(0);
    for (i, &vi) in potential.iter().enumerate().take(n) {
        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(2 * d + 1);
        entries.push((i, 2.0 * d as f64 * inv + vi));
        for a in 0..d {
            let pos = (i / strides[a]) % shape[a];
            if pos > 0 {
                entries.push((i - strides[a], -inv));
            }
            if pos + 1 < shape[a] {
                entries.push((i + strides[a], -inv));
            }
        }
        entries.sort_by_key(|e| e.0);
        for (c, v) in entries {
            cols.push(c);
            vals.push(v);
        }
        row_ptr.push(cols.len());
    }
    Ok(DiscreteHamiltonian {
        bbox: bbox.clone(),
        h,
        shape,
        potential,
        matrix: CsrMatrix { n, row_ptr, cols, vals },
    })
}

/// Standard `2d+1`-point stencil with `V` sampled at the nodes.
pub fn assemble(v: &(dyn Fn(&[f64]) -> f64 + Sync), bbox: &AxisBox, h: f64) -> Result<DiscreteHamiltonian> {
    let nodes = grid_nodes(bbox, h)?;
    let values: Vec<f64> = nodes.par_iter().map(|x| v(x)).collect();
    assemble_with_values(bbox, h, values)
}

/// Node values of `V_α`.
pub fn valpha_values(pot: &ValphaPotential, bbox: &AxisBox, h: f64, mode: Discretization) -> Result<Vec<f64>> {
    let nodes = grid_nodes(bbox, h)?;
    if mode == Discretization::Pointwise {
        return nodes.par_iter().map(|x| pot.eval(x)).collect();
    }
    let pieces = nodes
        .par_iter()
        .map(|x| {
            let cell = AxisBox::new(
                x.iter().map(|c| c - h / 2.0).collect(),
                x.iter().map(|c| c + h / 2.0).collect(),
            )?;
            pot.cell_pieces(&cell)
        })
        .collect::<Result<Vec<_>>>()?;
    // V_α varies only along x_1 inside a unit cube, so few distinct integrals occur.
    let keys: Vec<MassKey> = pieces
        .iter()
        .flatten()
        .map(|(k, _)| *k)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let tol = CELL_TOL * h;
    let masses = keys
        .par_iter()
        .map(|k| Ok((*k, k.mass(&pot.alpha, tol)?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    Ok(pieces
        .iter()
        .map(|p| csum(p.iter().map(|(k, w)| w * masses[k])))
        .collect())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    let parts: Vec<f64> = a
        .par_chunks(BLOCK)
        .zip(b.par_chunks(BLOCK))
        .map(|(x, y)| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>())
        .collect();
    csum(parts)
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.par_chunks_mut(BLOCK).zip(x.par_chunks(BLOCK)).for_each(|(ys, xs)| {
        for (yi, xi) in ys.iter_mut().zip(xs) {
            *yi += alpha * xi;
        }
    });
}

fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Bound on `‖Hx − λx‖` for unit `x`.
    pub tol: f64,
    /// Krylov basis size before a restart; `0` picks `max(2k + 20, 40)`.
    pub basis: usize,
    pub max_restarts: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            basis: 0,
            max_restarts: 2000,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenResult {
    /// Ascending.
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub matvecs: usize,
    pub restarts: usize,
}

/// Lowest `k` eigenpairs of a symmetric matrix by thick-restart Lanczos with full
/// reorthogonalization.
pub fn lowest_eigenvalues(op: &CsrMatrix, k: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.n;
    if k == 0 || k > n {
        return Err(invalid("k", format!("need 1 <= k <= {n}")));
    }
    if n <= 400 {
        return dense_lowest(op, k);
    }
    let m = if opts.basis == 0 {
        (2 * k + 20).max(40)
    } else {
        opts.basis
    }
    .min(n);
    if m <= k + 1 {
        return Err(invalid("basis", "basis must exceed k + 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut start: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
    let s = norm(&start);
    start.iter_mut().for_each(|v| *v /= s);

    let mut basis: Vec<Vec<f64>> = vec![start];
    let mut t = DMatrix::<f64>::zeros(m, m);
    let mut kept = 0usize;
    let mut matvecs = 0usize;
    let mut w = vec![0.0; n];
    for restart in 0..=opts.max_restarts {
        let mut residual_norm = 0.0;
        let mut residual = Vec::new();
        for j in kept..m {
            op.mul_into(&basis[j], &mut w);
            matvecs += 1;
            // Two passes of classical Gram-Schmidt.
            let mut coeff = vec![0.0; j + 1];
            for _ in 0..2 {
                let c: Vec<f64> = basis.par_iter().take(j + 1).map(|v| dot(v, &w)).collect();
                for (i, ci) in c.iter().enumerate() {
                    axpy(-ci, &basis[i], &mut w);
                    coeff[i] += ci;
                }
            }
            // After a restart this reproduces the coupling row of the kept Ritz vectors.
            for (i, ci) in coeff.iter().enumerate() {
                t[(i, j)] = *ci;
                t[(j, i)] = *ci;
            }
            let mut beta = norm(&w);
            if beta <= 1e-13 * t[(j, j)].abs().max(1.0) {
                // Invariant subspace: continue with a fresh orthogonal direction.
                let mut fresh: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
                for _ in 0..2 {
                    for v in basis.iter().take(j + 1) {
                        let c = dot(v, &fresh);
                        axpy(-c, v, &mut fresh);
                    }
                }
                let s = norm(&fresh);
                fresh.iter_mut().for_each(|v| *v /= s);
                w = fresh;
                beta = 0.0;
                if j + 1 < m {
                    basis.truncate(j + 1);
                    basis.push(w.clone());
                    t[(j + 1, j)] = 0.0;
                    t[(j, j + 1)] = 0.0;
                    continue;
                }
            } else {
                let inv = 1.0 / beta;
                w.iter_mut().for_each(|v| *v *= inv);
            }
            if j + 1 < m {
                basis.truncate(j + 1);
                basis.push(w.clone());
                t[(j + 1, j)] = beta;
                t[(j, j + 1)] = beta;
            } else {
                residual_norm = beta;
                residual = w.clone();
            }
        }
        let eig = SymmetricEigen::new(t.clone());
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let estimates: Vec<f64> = order
            .iter()
            .map(|&i| (residual_norm * eig.eigenvectors[(m - 1, i)]).abs())
            .collect();
        let converged = estimates[..k].iter().all(|r| *r <= 0.5 * opts.tol);
        let keep = if converged { k } else { (k + (m - k) / 2).min(m - 1) };
        let ritz: Vec<Vec<f64>> = order[..keep]
            .par_iter()
            .map(|&c| {
                let mut y = vec![0.0; n];
                for (r, v) in basis.iter().enumerate() {
                    axpy(eig.eigenvectors[(r, c)], v, &mut y);
                }
                y
            })
            .collect();
        if converged {
            let mut residuals = Vec::with_capacity(k);
            let mut values = Vec::with_capacity(k);
            let mut vectors = Vec::with_capacity(k);
            for y in &ritz {
                let mut y = y.clone();
                let s = norm(&y);
                y.iter_mut().for_each(|v| *v /= s);
                let hy = op.mul(&y);
                matvecs += 1;
                let lambda = dot(&y, &hy);
                let mut r = hy;
                axpy(-lambda, &y, &mut r);
                residuals.push(norm(&r));
                values.push(lambda);
                vectors.push(y);
            }
            if residuals.iter().all(|r| *r <= opts.tol) {
                return Ok(EigenResult {
                    values,
                    vectors,
                    residuals,
                    matvecs,
                    restarts: restart,
                });
            }
            // Orthogonality was lost; restart from the best vectors.
        }
        t.fill(0.0);
        for (i, &c) in order[..keep].iter().enumerate() {
            t[(i, i)] = eig.eigenvalues[c];
            let b = residual_norm * eig.eigenvectors[(m - 1, c)];
            t[(keep, i)] = b;
            t[(i, keep)] = b;
        }
        basis = ritz;
        basis.push(residual);
        kept = keep;
    }
    Err(Error::NoConvergence(format!(
        "Lanczos did not reach residual {} in {} restarts",
        opts.tol, opts.max_restarts
    )))
}

fn dense_lowest(op: &CsrMatrix, k: usize) -> Result<EigenResult> {
    let n = op.n;
    let a = DMatrix::from_fn(n, n, |i, j| op.get(i, j));
    let eig = SymmetricEigen::new(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let mut out = EigenResult {
        values: Vec::new(),
        vectors: Vec::new(),
        residuals: Vec::new(),
        matvecs: 0,
        restarts: 0,
    };
    for &c in &order[..k] {
        let y: Vec<f64> = eig.eigenvectors.column(c).iter().copied().collect();
        let hy = op.mul(&y);
        let lambda = dot(&y, &hy);
        let mut r = hy;
        axpy(-lambda, &y, &mut r);
        out.residuals.push(norm(&r));
        out.values.push(lambda);
        out.vectors.push(y);
    }
    Ok(out)
}

/// `xᵀHx / xᵀx`
pub fn rayleigh_quotient(op: &CsrMatrix, x: &[f64]) -> f64 {
    dot(x, &op.mul(x)) / dot(x, x)
}

/// A cube `center + half·[−1, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: Vec<f64>,
    pub half: f64,
}

impl Window {
    pub fn to_box(&self) -> Result<AxisBox> {
        AxisBox::new(
            self.center.iter().map(|c| c - self.half).collect(),
            self.center.iter().map(|c| c + self.half).collect(),
        )
    }
}

/// Windows centered at `(k, 0, …, 0)`.
pub fn axis_windows(d: usize, ks: &[i64], half: f64) -> Vec<Window> {
    ks.iter()
        .map(|&k| {
            let mut center = vec![0.0; d];
            center[0] = k as f64;
            Window { center, half }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// `|y|_∞` of the window center.
    pub index: f64,
    pub center: Vec<f64>,
    pub energies: Vec<f64>,
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BottomTrace {
    pub h: f64,
    pub nodes_per_window: usize,
    pub rows: Vec<TraceRow>,
    pub nondecreasing: bool,
    /// Last ground energy over the first.
    pub growth: f64,
}

/// Source of node values for each window.
pub enum WindowPotential<'a> {
    Field(&'a (dyn Fn(&[f64]) -> f64 + Sync)),
    Valpha(&'a ValphaPotential, Discretization),
}

impl WindowPotential<'_> {
    pub fn values(&self, bbox: &AxisBox, h: f64) -> Result<Vec<f64>> {
        match self {
            WindowPotential::Field(f) => Ok(grid_nodes(bbox, h)?.par_iter().map(|x| f(x)).collect()),
            WindowPotential::Valpha(p, mode) => valpha_values(p, bbox, h, *mode),
        }
    }
}

/// Lowest `k` Dirichlet energies on each window, with `nodes` interior points per axis.
pub fn bottom_trace(
    v: &WindowPotential,
    windows: &[Window],
    nodes: usize,
    k: usize,
    opts: &EigenOptions,
) -> Result<BottomTrace> {
    if windows.is_empty() {
        return Err(invalid("windows", "need at least one window"));
    }
    let h = 2.0 * windows[0].half / (nodes + 1) as f64;
    let mut rows = Vec::with_capacity(windows.len());
    for w in windows {
        if w.half != windows[0].half {
            return Err(invalid("windows", "all windows must have the same size"));
        }
        let bbox = w.to_box()?;
        let op = assemble_with_values(&bbox, h, v.values(&bbox, h)?)?;
        let eig = lowest_eigenvalues(&op.matrix, k, opts)?;
        rows.push(TraceRow {
            index: w.center.iter().fold(0.0, |m, c| m.max(c.abs())),
            center: w.center.clone(),
            energies: eig.values,
            residuals: eig.residuals,
        });
    }
    let ground: Vec<f64> = rows.iter().map(|r| r.energies[0]).collect();
    Ok(BottomTrace {
        h,
        nodes_per_window: nodes,
        nondecreasing: ground.windows(2).all(|p| p[1] >= p[0] - 1e-8),
        growth: ground[ground.len() - 1] / ground[0],
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonotonicityStep {
    pub half: f64,
    pub ground: f64,
    pub ok: bool,
}

/// Ground energy on nested windows `center + (half + s·h)[−1,1]^d`, `s = 0..steps`, on a common
/// grid; each enlargement must not raise it.
pub fn window_monotonicity(
    v: &WindowPotential,
    center: &[f64],
    half: f64,
    h: f64,
    steps: usize,
    opts: &EigenOptions,
) -> Result<Vec<MonotonicityStep>> {
    let mut out: Vec<MonotonicityStep> = Vec::with_capacity(steps + 1);
    for s in 0..=steps {
        let w = Window {
            center: center.to_vec(),
            half: half + s as f64 * h,
        };
        let bbox = w.to_box()?;
        let op = assemble_with_values(&bbox, h, v.values(&bbox, h)?)?;
        let ground = lowest_eigenvalues(&op.matrix, 1, opts)?.values[0];
        let ok = out.last().map_or(true, |p| ground <= p.ground + 2.0 * opts.tol);
        out.push(MonotonicityStep {
            half: w.half,
            ground,
            ok,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn cube(d: usize, lo: f64, hi: f64) -> AxisBox {
        AxisBox::new(vec![lo; d], vec![hi; d]).unwrap()
    }

    #[test]
    fn stencil_shape() {
        let op = assemble(&|_| 1.5, &cube(2, 0.0, 1.0), 0.25).unwrap();
        assert_eq!(op.shape, vec![3, 3]);
        let a = &op.matrix;
        assert!(a.is_symmetric());
        assert!(a.diagonal().iter().all(|v| (*v - (4.0 * 16.0 + 1.5)).abs() < 1e-12));
        assert_eq!(a.get(0, 1), -16.0);
        assert_eq!(a.get(0, 3), -16.0);
        assert_eq!(a.get(2, 3), 0.0);
        assert!(assemble(&|_| 0.0, &cube(1, 0.0, 1.0), 0.3).is_err());
        assert!(assemble(&|_| 0.0, &cube(3, 0.0, 1.0), 1e-3).is_err());
    }

    #[test]
    fn one_dimensional_laplacian() {
        // Exact discrete value 4/h² sin²(h/2) on [0, π].
        let n = 1000;
        let h = PI / n as f64;
        let op = assemble(&|_| 0.0, &AxisBox::new(vec![0.0], vec![PI]).unwrap(), h).unwrap();
        let res = lowest_eigenvalues(&op.matrix, 3, &EigenOptions::default()).unwrap();
        for (j, v) in res.values.iter().enumerate() {
            let m = (j + 1) as f64;
            let exact = 4.0 / (h * h) * (m * h / 2.0).sin().powi(2);
            assert!((v - exact).abs() < 1e-7, "{j}: {v} vs {exact}");
        }
        assert!(res.residuals.iter().all(|r| *r <= 1e-8));
    }

    #[test]
    fn shift_and_rayleigh() {
        let b = cube(3, 0.0, 1.0);
        let zero = assemble(&|_| 0.0, &b, 1.0 / 12.0).unwrap();
        let shifted = assemble(&|_| 2.5, &b, 1.0 / 12.0).unwrap();
        let opts = EigenOptions::default();
        let a = lowest_eigenvalues(&zero.matrix, 2, &opts).unwrap();
        let c = lowest_eigenvalues(&shifted.matrix, 2, &opts).unwrap();
        for (x, y) in a.values.iter().zip(&c.values) {
            assert!((y - x - 2.5).abs() < 1e-8);
        }
        let rq = rayleigh_quotient(&shifted.matrix, &c.vectors[0]);
        assert!((rq - c.values[0]).abs() < 1e-8);
        assert!(c.values[0] <= c.values[1]);
    }

    #[test]
    fn nested_windows() {
        let v = |x: &[f64]| x[0] * x[0] + (3.0 * x[1]).sin().abs();
        let steps = window_monotonicity(
            &WindowPotential::Field(&v),
            &[0.0, 0.0],
            1.0,
            0.1,
            4,
            &EigenOptions::default(),
        )
        .unwrap();
        assert!(steps.iter().all(|s| s.ok));
        assert!(steps.last().unwrap().ground < steps[0].ground);
    }
}
