//! Jacobi structures induced by a contact pair on the leaves of the other
//! form's characteristic foliation: Hamiltonian fields, brackets and bivectors
//! on a grid over one leaf.
//!
//! For the `α` side the leaf through a point is tangent to `ker β ∩ ker dβ`,
//! on which `α` restricts to a contact form. Given `f`, the Hamiltonian field
//! `X_f` is the vector in that distribution with `α(X_f) = f` and
//! `i_{X_f} dα = (E·f) α − df` on the leaf, `E` the Reeb field of `α`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::contact::{ContactError, ContactPair};
use crate::expr::{EvalError, Expr};
use crate::exterior::{contraction_matrix, BivectorValue, ExteriorError, VectorValue};
use crate::linalg::{null_space, pseudo_inverse};
use crate::manifold::{AxisKind, Domain, ManifoldModel, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JacobiError {
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("axis {0} is not a chart axis of the model")]
    NotChartAxis(usize),
    #[error("leaf grid needs distinct axes and a base point of dimension {dim}")]
    LeafGrid { dim: usize },
    #[error("leaf grid resolution {0} is below 4")]
    Resolution(usize),
    #[error("leaf distribution has dimension {got}, expected {expected}, at {point:?}")]
    LeafDimension {
        expected: usize,
        got: usize,
        point: Vec<f64>,
    },
    #[error("leaf distribution leaves the grid axes by {value:e} at {point:?}")]
    LeafNotAligned { value: f64, point: Vec<f64> },
    #[error("leaf system is inconsistent: residual {residual:e} at {point:?}")]
    Inconsistent { residual: f64, point: Vec<f64> },
    #[error("grid field has {got} values, the leaf grid has {expected} nodes")]
    GridSize { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, JacobiError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Side {
    Alpha,
    Beta,
}

/// Value and ambient gradient at a point.
pub type AnalyticFn = dyn Fn(&[f64]) -> (f64, Vec<f64>) + Send + Sync;

#[derive(Clone)]
pub enum ScalarField {
    Expr(Expr),
    /// Exact value and gradient supplied by a closure.
    Analytic(Arc<AnalyticFn>),
    /// One value per leaf-grid node; derivatives by finite differences.
    Grid(Vec<f64>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Expr(e) => write!(f, "Expr({e})"),
            ScalarField::Analytic(_) => write!(f, "Analytic(..)"),
            ScalarField::Grid(v) => write!(f, "Grid({} values)", v.len()),
        }
    }
}

impl From<Expr> for ScalarField {
    fn from(e: Expr) -> Self {
        ScalarField::Expr(e)
    }
}

/// A tensor grid over some chart axes of the model, the remaining
/// coordinates held at `base`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LeafGrid {
    pub axes: Vec<usize>,
    pub base: Vec<f64>,
    pub resolution: usize,
}

/// Vector field on the leaf grid, components along the leaf axes.
#[derive(Debug, Clone, PartialEq)]
pub struct GridVectorField {
    pub values: Vec<Vec<f64>>,
}

/// `Λ` at every leaf node, in ambient indices.
#[derive(Debug, Clone, PartialEq)]
pub struct BivectorField {
    pub values: Vec<BivectorValue>,
}

#[derive(Debug, Clone, Copy)]
struct Stencil {
    nodes: [usize; 3],
    offsets: [i64; 3],
    weights: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct JacobiSide {
    side: Side,
    dim: usize,
    grid: LeafGrid,
    domains: Vec<Domain>,
    steps: Vec<f64>,
    nodes: Vec<Vec<f64>>,
    /// Leaf components of the side's 1-form.
    theta: Vec<Vec<f64>>,
    /// Leaf components of the side's Reeb field.
    reeb: Vec<Vec<f64>>,
    s0: Vec<Vec<f64>>,
    /// `n_L × n_L` per node: `X_f = s0 f + s1 ∇f`.
    s1: Vec<Vec<Vec<f64>>>,
    leaf_dim: usize,
    max_system_residual: f64,
}

fn mat_vec(m: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    m.iter().map(|r| r.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

impl JacobiSide {
    /// Precomputes the leaf distribution and the Hamiltonian solve at every node.
    pub fn new(model: &ManifoldModel, pair: &ContactPair, side: Side, grid: LeafGrid, tol: f64) -> Result<Self> {
        let n = model.dim();
        let nl = grid.axes.len();
        let mut seen = vec![false; n];
        if grid.base.len() != n || nl == 0 {
            return Err(JacobiError::LeafGrid { dim: n });
        }
        for &a in &grid.axes {
            if a >= n || seen[a] {
                return Err(JacobiError::LeafGrid { dim: n });
            }
            seen[a] = true;
        }
        if grid.resolution < 4 {
            return Err(JacobiError::Resolution(grid.resolution));
        }
        let domains = grid
            .axes
            .iter()
            .map(|&a| match model.axes()[a].kind {
                AxisKind::Chart(d) => Ok(d),
                AxisKind::Invariant => Err(JacobiError::NotChartAxis(a)),
            })
            .collect::<Result<Vec<Domain>>>()?;
        let r = grid.resolution;
        let steps = domains.iter().map(|d| d.length() / r as f64).collect();
        let total = r.pow(nl as u32);
        let nodes: Vec<Vec<f64>> = (0..total)
            .map(|i| {
                let mut p = grid.base.clone();
                let mut rem = i;
                for a in (0..nl).rev() {
                    p[grid.axes[a]] = domains[a].node(rem % r, r);
                    rem /= r;
                }
                p
            })
            .collect();
        let side_k = match side {
            Side::Alpha => pair.k,
            Side::Beta => pair.l,
        };
        let m = 2 * side_k + 1;
        let in_leaf: Vec<bool> = (0..n).map(|a| grid.axes.contains(&a)).collect();

        struct NodeData {
            theta: Vec<f64>,
            reeb: Vec<f64>,
            s0: Vec<f64>,
            s1: Vec<Vec<f64>>,
            residual: f64,
        }
        let data = nodes
            .par_iter()
            .map(|p| -> Result<NodeData> {
                let v = pair.at(p)?;
                let reeb = v.reeb()?;
                if !(reeb.residual <= tol) {
                    return Err(JacobiError::Inconsistent {
                        residual: reeb.residual,
                        point: p.clone(),
                    });
                }
                let (theta, d_theta, other, d_other, e) = match side {
                    Side::Alpha => (&v.alpha, &v.d_alpha, &v.beta, &v.d_beta, &reeb.fields[0]),
                    Side::Beta => (&v.beta, &v.d_beta, &v.alpha, &v.d_alpha, &reeb.fields[1]),
                };
                // ker(other) ∩ ker(d other), rows scaled like the Reeb system
                let mut rows = vec![other.coeffs().to_vec()];
                let s = d_other.norm_inf();
                let inv = if s > 0.0 { 1.0 / s } else { 1.0 };
                rows.extend(
                    contraction_matrix(d_other)?
                        .into_iter()
                        .map(|r| r.into_iter().map(|x| x * inv).collect::<Vec<f64>>()),
                );
                let cutoff = tol.max(1e-10) * (1.0 + other.norm_inf());
                let basis = null_space(&rows, n, cutoff);
                if basis.len() != m {
                    return Err(JacobiError::LeafDimension {
                        expected: m,
                        got: basis.len(),
                        point: p.clone(),
                    });
                }
                let outside = basis
                    .iter()
                    .flat_map(|b| b.iter().enumerate().filter(|(a, _)| !in_leaf[*a]).map(|(_, x)| x.abs()))
                    .fold(0.0, f64::max);
                if !(outside <= tol) {
                    return Err(JacobiError::LeafNotAligned {
                        value: outside,
                        point: p.clone(),
                    });
                }
                let mdt = contraction_matrix(d_theta)?;
                let th = theta.coeffs();
                let th_v: Vec<f64> = basis.iter().map(|b| b.iter().zip(th).map(|(x, y)| x * y).sum()).collect();
                // K: row 0 θ(v_b); row a+1 dθ(v_b, v_a) = v_a · (M v_b)
                let mv: Vec<Vec<f64>> = basis.iter().map(|b| mat_vec(&mdt, b)).collect();
                let mut k_rows = vec![th_v.clone()];
                for va in &basis {
                    k_rows.push(mv.iter().map(|mb| va.iter().zip(mb).map(|(x, y)| x * y).sum()).collect());
                }
                let k_pinv = pseudo_inverse(&k_rows, 1e-12);
                // rhs = e0 f + G ∇f with G row a+1 = θ(v_a) E_L − (v_a)_L
                let leaf = |v: &[f64]| grid.axes.iter().map(|&a| v[a]).collect::<Vec<f64>>();
                let e_l = leaf(&e.0);
                let mut g_rows = vec![vec![0.0; nl]];
                for (a, va) in basis.iter().enumerate() {
                    let va_l = leaf(va);
                    g_rows.push((0..nl).map(|c| th_v[a] * e_l[c] - va_l[c]).collect());
                }
                let rhs_cols: Vec<Vec<f64>> = std::iter::once((0..=m).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect())
                    .chain((0..nl).map(|c| g_rows.iter().map(|r| r[c]).collect()))
                    .collect();
                let v_l: Vec<Vec<f64>> = (0..nl).map(|c| basis.iter().map(|b| b[grid.axes[c]]).collect()).collect();
                let mut residual = 0.0f64;
                let mut cols = Vec::with_capacity(nl + 1);
                for rhs in &rhs_cols {
                    let coeffs = mat_vec(&k_pinv, rhs);
                    let back = mat_vec(&k_rows, &coeffs);
                    let scale = rhs.iter().map(|x| x.abs()).fold(1.0, f64::max);
                    residual = residual.max(back.iter().zip(rhs).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale);
                    cols.push(mat_vec(&v_l, &coeffs));
                }
                let s0 = cols[0].clone();
                let s1 = (0..nl).map(|i| (0..nl).map(|c| cols[c + 1][i]).collect()).collect();
                Ok(NodeData {
                    theta: leaf(th),
                    reeb: e_l,
                    s0,
                    s1,
                    residual,
                })
            })
            .collect::<Result<Vec<NodeData>>>()?;
        let max_system_residual = data.iter().map(|d| d.residual).fold(0.0, f64::max);
        if !(max_system_residual <= tol) {
            let (i, _) = data
                .iter()
                .enumerate()
                .find(|(_, d)| !(d.residual <= tol))
                .expect("some node exceeds the tolerance");
            return Err(JacobiError::Inconsistent {
                residual: max_system_residual,
                point: nodes[i].clone(),
            });
        }
        let mut side_data = JacobiSide {
            side,
            dim: n,
            grid,
            domains,
            steps,
            nodes,
            theta: Vec::with_capacity(total),
            reeb: Vec::with_capacity(total),
            s0: Vec::with_capacity(total),
            s1: Vec::with_capacity(total),
            leaf_dim: m,
            max_system_residual,
        };
        for d in data {
            side_data.theta.push(d.theta);
            side_data.reeb.push(d.reeb);
            side_data.s0.push(d.s0);
            side_data.s1.push(d.s1);
        }
        Ok(side_data)
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn grid(&self) -> &LeafGrid {
        &self.grid
    }

    pub fn leaf_dim(&self) -> usize {
        self.leaf_dim
    }

    pub fn max_system_residual(&self) -> f64 {
        self.max_system_residual
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Vec<f64>] {
        &self.nodes
    }

    /// Reeb field of the side at each node, along the leaf axes.
    pub fn reeb(&self) -> &[Vec<f64>] {
        &self.reeb
    }

    fn nl(&self) -> usize {
        self.grid.axes.len()
    }

    fn index_along(&self, node: usize, axis: usize) -> usize {
        let r = self.grid.resolution;
        (node / r.pow((self.nl() - 1 - axis) as u32)) % r
    }

    fn stride(&self, axis: usize) -> usize {
        self.grid.resolution.pow((self.nl() - 1 - axis) as u32)
    }

    fn shift(&self, node: usize, axis: usize, delta: i64) -> usize {
        let r = self.grid.resolution as i64;
        let j = self.index_along(node, axis) as i64;
        let target = (j + delta).rem_euclid(r);
        (node as i64 + (target - j) * self.stride(axis) as i64) as usize
    }

    fn stencil(&self, node: usize, axis: usize) -> Stencil {
        let h = self.steps[axis];
        let r = self.grid.resolution;
        let j = self.index_along(node, axis);
        let at = |d: i64| self.shift(node, axis, d);
        match self.domains[axis] {
            Domain::Interval { .. } if j == 0 => Stencil {
                nodes: [node, at(1), at(2)],
                offsets: [0, 1, 2],
                weights: [-1.5 / h, 2.0 / h, -0.5 / h],
            },
            Domain::Interval { .. } if j == r - 1 => Stencil {
                nodes: [node, at(-1), at(-2)],
                offsets: [0, -1, -2],
                weights: [1.5 / h, -2.0 / h, 0.5 / h],
            },
            _ => Stencil {
                nodes: [at(-1), node, at(1)],
                offsets: [-1, 0, 1],
                weights: [-0.5 / h, 0.0, 0.5 / h],
            },
        }
    }

    /// Nodes away from box faces; suprema are taken over these.
    pub fn is_interior(&self, node: usize) -> bool {
        let r = self.grid.resolution;
        (0..self.nl()).all(|a| match self.domains[a] {
            Domain::Periodic => true,
            Domain::Interval { .. } => {
                let j = self.index_along(node, a);
                j > 0 && j < r - 1
            }
        })
    }

    /// Finite-difference derivative of nodal values along leaf axis `axis`.
    pub fn derivative(&self, values: &[f64], axis: usize) -> Vec<f64> {
        (0..self.len())
            .map(|i| {
                let s = self.stencil(i, axis);
                (0..3).map(|q| s.weights[q] * values[s.nodes[q]]).sum()
            })
            .collect()
    }

    /// Values and leaf gradients of `f` at every node.
    pub fn sample(&self, f: &ScalarField) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let nl = self.nl();
        match f {
            ScalarField::Expr(e) => {
                let partials: Vec<Expr> = self.grid.axes.iter().map(|&a| e.partial(a)).collect();
                let rows = self
                    .nodes
                    .par_iter()
                    .map(|p| {
                        let v = e.eval(p)?;
                        let g = partials.iter().map(|d| d.eval(p)).collect::<std::result::Result<Vec<f64>, EvalError>>()?;
                        Ok((v, g))
                    })
                    .collect::<Result<Vec<(f64, Vec<f64>)>>>()?;
                Ok(rows.into_iter().unzip())
            }
            ScalarField::Analytic(func) => Ok(self
                .nodes
                .par_iter()
                .map(|p| {
                    let (v, g) = func(p);
                    (v, self.grid.axes.iter().map(|&a| g[a]).collect())
                })
                .unzip()),
            ScalarField::Grid(values) => {
                if values.len() != self.len() {
                    return Err(JacobiError::GridSize {
                        expected: self.len(),
                        got: values.len(),
                    });
                }
                let d: Vec<Vec<f64>> = (0..nl).map(|a| self.derivative(values, a)).collect();
                let grads = (0..self.len()).map(|i| (0..nl).map(|a| d[a][i]).collect()).collect();
                Ok((values.clone(), grads))
            }
        }
    }

    fn field_from(&self, values: &[f64], grads: &[Vec<f64>]) -> GridVectorField {
        GridVectorField {
            values: (0..self.len())
                .map(|i| {
                    let lin = mat_vec(&self.s1[i], &grads[i]);
                    self.s0[i].iter().zip(lin).map(|(a, b)| a * values[i] + b).collect()
                })
                .collect(),
        }
    }

    /// `X_f` at every node.
    pub fn hamiltonian_field(&self, f: &ScalarField) -> Result<GridVectorField> {
        let (v, g) = self.sample(f)?;
        Ok(self.field_from(&v, &g))
    }

    /// `[X, Y]` along the leaf by finite differences.
    pub fn commutator(&self, x: &GridVectorField, y: &GridVectorField) -> GridVectorField {
        let nl = self.nl();
        // dx[c][a][i] = ∂_a X^c at node i
        let derivs = |f: &GridVectorField| -> Vec<Vec<Vec<f64>>> {
            (0..nl)
                .map(|c| {
                    let comp: Vec<f64> = f.values.iter().map(|v| v[c]).collect();
                    (0..nl).map(|a| self.derivative(&comp, a)).collect()
                })
                .collect()
        };
        let dx = derivs(x);
        let dy = derivs(y);
        GridVectorField {
            values: (0..self.len())
                .map(|i| {
                    (0..nl)
                        .map(|c| {
                            (0..nl)
                                .map(|a| x.values[i][a] * dy[c][a][i] - y.values[i][a] * dx[c][a][i])
                                .sum()
                        })
                        .collect()
                })
                .collect(),
        }
    }

    fn contract_theta(&self, v: &GridVectorField) -> Vec<f64> {
        v.values
            .iter()
            .zip(&self.theta)
            .map(|(x, t)| x.iter().zip(t).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `{f, g} = θ([X_f, X_g])` at every node.
    pub fn jacobi_bracket(&self, f: &ScalarField, g: &ScalarField) -> Result<ScalarField> {
        let xf = self.hamiltonian_field(f)?;
        let xg = self.hamiltonian_field(g)?;
        Ok(ScalarField::Grid(self.contract_theta(&self.commutator(&xf, &xg))))
    }

    fn grid_values(f: &ScalarField) -> &[f64] {
        match f {
            ScalarField::Grid(v) => v,
            _ => unreachable!("brackets are grid fields"),
        }
    }

    fn sup_interior(&self, values: impl Iterator<Item = f64>) -> f64 {
        values
            .enumerate()
            .filter(|(i, _)| self.is_interior(*i))
            .map(|(_, v)| v.abs())
            .fold(0.0, |m, v| if v.is_nan() || v > m { v } else { m })
    }

    /// `sup |{{f,g},h} + {{g,h},f} + {{h,f},g}|` over interior nodes.
    pub fn jacobi_identity_defect(&self, f: &ScalarField, g: &ScalarField, h: &ScalarField) -> Result<f64> {
        let fg = self.jacobi_bracket(f, g)?;
        let gh = self.jacobi_bracket(g, h)?;
        let hf = self.jacobi_bracket(h, f)?;
        let a = self.jacobi_bracket(&fg, h)?;
        let b = self.jacobi_bracket(&gh, f)?;
        let c = self.jacobi_bracket(&hf, g)?;
        let (a, b, c) = (Self::grid_values(&a), Self::grid_values(&b), Self::grid_values(&c));
        Ok(self.sup_interior((0..self.len()).map(|i| a[i] + b[i] + c[i])))
    }

    /// `sup |{1, g} − E·g|` over interior nodes.
    pub fn unit_bracket_defect(&self, g: &ScalarField) -> Result<f64> {
        let b = self.jacobi_bracket(&ScalarField::Expr(Expr::one()), g)?;
        let b = Self::grid_values(&b);
        let (_, grads) = self.sample(g)?;
        Ok(self.sup_interior((0..self.len()).map(|i| {
            let eg: f64 = self.reeb[i].iter().zip(&grads[i]).map(|(e, d)| e * d).sum();
            b[i] - eg
        })))
    }

    /// `sup |X_1 − E|` over all nodes.
    pub fn reeb_hamiltonian_defect(&self) -> Result<f64> {
        let x1 = self.hamiltonian_field(&ScalarField::Expr(Expr::one()))?;
        Ok(x1
            .values
            .iter()
            .zip(&self.reeb)
            .flat_map(|(x, e)| x.iter().zip(e).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max))
    }

    /// `sup |(L_X θ) ∧ θ|` over interior nodes, with
    /// `(L_X θ)_i = X^j ∂_j θ_i + θ_j ∂_i X^j` by finite differences.
    pub fn lie_derivative_defect(&self, x: &GridVectorField) -> f64 {
        let nl = self.nl();
        let d_theta: Vec<Vec<Vec<f64>>> = (0..nl)
            .map(|c| {
                let comp: Vec<f64> = self.theta.iter().map(|t| t[c]).collect();
                (0..nl).map(|a| self.derivative(&comp, a)).collect()
            })
            .collect();
        let d_x: Vec<Vec<Vec<f64>>> = (0..nl)
            .map(|c| {
                let comp: Vec<f64> = x.values.iter().map(|v| v[c]).collect();
                (0..nl).map(|a| self.derivative(&comp, a)).collect()
            })
            .collect();
        self.sup_interior((0..self.len()).map(|n| {
            let th = &self.theta[n];
            let l: Vec<f64> = (0..nl)
                .map(|i| {
                    (0..nl)
                        .map(|j| x.values[n][j] * d_theta[i][j][n] + th[j] * d_x[j][i][n])
                        .sum()
                })
                .collect();
            let mut worst = 0.0f64;
            for i in 0..nl {
                for j in i + 1..nl {
                    worst = worst.max((l[i] * th[j] - l[j] * th[i]).abs());
                }
            }
            worst
        }))
    }

    /// `Λ^{ij}(m) = {x_i − x_i(m), x_j − x_j(m)}(m)` from recentred coordinate
    /// probes; `E` is the side's Reeb field.
    pub fn build_bivector(&self) -> (BivectorField, GridVectorField) {
        let nl = self.nl();
        let values = (0..self.len())
            .into_par_iter()
            .map(|m| {
                // probe field X_i at a node offset `off` steps along `axis` from m
                let probe = |i: usize, q: usize, axis: usize, off: i64| -> Vec<f64> {
                    let disp = if axis == i { off as f64 * self.steps[i] } else { 0.0 };
                    (0..nl).map(|c| self.s0[q][c] * disp + self.s1[q][c][i]).collect()
                };
                let at_m = |i: usize| -> Vec<f64> { (0..nl).map(|c| self.s1[m][c][i]).collect() };
                let deriv = |i: usize, a: usize| -> Vec<f64> {
                    let s = self.stencil(m, a);
                    let mut out = vec![0.0; nl];
                    for q in 0..3 {
                        let x = probe(i, s.nodes[q], a, s.offsets[q]);
                        for c in 0..nl {
                            out[c] += s.weights[q] * x[c];
                        }
                    }
                    out
                };
                let mut lam = BivectorValue::zeros(self.dim);
                let d: Vec<Vec<Vec<f64>>> = (0..nl).map(|i| (0..nl).map(|a| deriv(i, a)).collect()).collect();
                for i in 0..nl {
                    for j in i + 1..nl {
                        let (xi, xj) = (at_m(i), at_m(j));
                        let bracket: f64 = (0..nl)
                            .map(|c| {
                                let comp: f64 = (0..nl).map(|a| xi[a] * d[j][a][c] - xj[a] * d[i][a][c]).sum();
                                self.theta[m][c] * comp
                            })
                            .sum();
                        lam.set(self.grid.axes[i], self.grid.axes[j], bracket);
                    }
                }
                lam
            })
            .collect();
        (
            BivectorField { values },
            GridVectorField {
                values: self.reeb.clone(),
            },
        )
    }

    /// `sup |Λ(df, dg) + f E·g − g E·f − {f, g}|` over interior nodes.
    pub fn bivector_consistency_defect(&self, lambda: &BivectorField, f: &ScalarField, g: &ScalarField) -> Result<f64> {
        let (fv, fg) = self.sample(f)?;
        let (gv, gg) = self.sample(g)?;
        let br = self.jacobi_bracket(f, g)?;
        let br = Self::grid_values(&br);
        let amb = |grad: &[f64]| {
            let mut v = vec![0.0; self.dim];
            for (c, &a) in self.grid.axes.iter().enumerate() {
                v[a] = grad[c];
            }
            v
        };
        Ok(self.sup_interior((0..self.len()).map(|i| {
            let ef: f64 = self.reeb[i].iter().zip(&fg[i]).map(|(e, d)| e * d).sum();
            let eg: f64 = self.reeb[i].iter().zip(&gg[i]).map(|(e, d)| e * d).sum();
            lambda.values[i].pair(&amb(&fg[i]), &amb(&gg[i])) + fv[i] * eg - gv[i] * ef - br[i]
        })))
    }

    /// Leaf field in ambient coordinates at a node.
    pub fn ambient(&self, field: &GridVectorField, node: usize) -> VectorValue {
        let mut v = vec![0.0; self.dim];
        for (c, &a) in self.grid.axes.iter().enumerate() {
            v[a] = field.values[node][c];
        }
        VectorValue(v)
    }
}

/// `Π_a (1 − s_a²)^4` with `s_a = dist(x_a, c_a) / radius`, zero outside; the
/// distance wraps on periodic axes.
pub fn bump(model: &ManifoldModel, center: Vec<f64>, radius: f64, axes: Vec<usize>) -> ScalarField {
    let periodic: Vec<bool> = (0..model.dim())
        .map(|a| matches!(model.axes()[a].kind, AxisKind::Chart(Domain::Periodic)))
        .collect();
    ScalarField::Analytic(Arc::new(move |p: &[f64]| {
        let n = p.len();
        let mut s = vec![0.0; n];
        for &a in &axes {
            let mut d = p[a] - center[a];
            if periodic[a] {
                let tau = std::f64::consts::TAU;
                d = (d + tau / 2.0).rem_euclid(tau) - tau / 2.0;
            }
            s[a] = d / radius;
        }
        if axes.iter().any(|&a| s[a].abs() >= 1.0) {
            return (0.0, vec![0.0; n]);
        }
        let factors: Vec<f64> = axes.iter().map(|&a| (1.0 - s[a] * s[a]).powi(4)).collect();
        let value: f64 = factors.iter().product();
        let mut grad = vec![0.0; n];
        for (k, &a) in axes.iter().enumerate() {
            let others: f64 = factors.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, f)| f).product();
            let df = 4.0 * (1.0 - s[a] * s[a]).powi(3) * (-2.0 * s[a]) / radius;
            grad[a] = df * others;
        }
        (value, grad)
    }))
}
