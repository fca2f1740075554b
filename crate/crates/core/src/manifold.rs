//! Manifold models: Lie groups with invariant frames, coordinate charts with
//! expression-valued fields, and products of both.
//!
//! Every model is presented through one global frame of `n` axes. A chart
//! axis carries the coordinate frame `dx^i`; an invariant axis carries a
//! left-invariant coframe `e^i` whose brackets come from structure constants.
//! Field coefficients are [`Expr`]s in the chart coordinates; they may not
//! depend on invariant axes.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::exterior::{
    binomial, multi_indices, ExteriorError, FormValue, MultiIndex, VectorValue, MAX_DIM,
};
use crate::expr::{EvalError, Expr};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("structure constants must be an {n}x{n}x{n} array")]
    StructureShape { n: usize },
    #[error("structure constants are not antisymmetric at ({i},{j},{k}): defect {defect:e}")]
    NotAntisymmetric {
        i: usize,
        j: usize,
        k: usize,
        defect: f64,
    },
    #[error("Jacobi identity fails at ({i},{j},{k};{l}): defect {defect:e}")]
    JacobiIdentity {
        i: usize,
        j: usize,
        k: usize,
        l: usize,
        defect: f64,
    },
    #[error("chart axis {axis} has resolution {resolution}; at least 4 is required")]
    Resolution { axis: usize, resolution: usize },
    #[error("interval [{lo}, {hi}] on axis {axis} is empty or not finite")]
    Interval { axis: usize, lo: f64, hi: f64 },
    #[error("model dimension {0} is out of range")]
    Dimension(usize),
    #[error("field has dimension {field}, model has {model}")]
    FieldDimension { field: usize, model: usize },
    #[error("coefficient {index} depends on x{axis}, which is not a chart coordinate")]
    NonCoordinateVariable { index: usize, axis: usize },
    #[error("integration needs a top-degree form, got degree {degree} on dimension {dim}")]
    NotTopDegree { degree: usize, dim: usize },
    #[error("model is not closed (axis {axis} is a bounded interval)")]
    NotClosed { axis: usize },
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

pub type Result<T> = std::result::Result<T, ModelError>;

/// Default per-axis resolution of chart models.
pub const DEFAULT_RESOLUTION: usize = 32;
/// Default per-axis resolution of product tensor grids.
pub const DEFAULT_COARSE_RESOLUTION: usize = 8;
/// Default number of random samples for fine checks on large models.
pub const DEFAULT_RANDOM_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Domain {
    /// `[0, 2π)` with wrap-around.
    Periodic,
    /// Closed box side `[lo, hi]`.
    Interval { lo: f64, hi: f64 },
}

impl Domain {
    pub fn length(self) -> f64 {
        match self {
            Domain::Periodic => TAU,
            Domain::Interval { lo, hi } => hi - lo,
        }
    }

    /// Node `j` of an `r`-point grid: `j h` on periodic axes, cell centres on boxes.
    pub fn node(self, j: usize, r: usize) -> f64 {
        let h = self.length() / r as f64;
        match self {
            Domain::Periodic => j as f64 * h,
            Domain::Interval { lo, .. } => lo + (j as f64 + 0.5) * h,
        }
    }

    fn random(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Domain::Periodic => rng.random_range(0.0..TAU),
            Domain::Interval { lo, hi } => rng.random_range(lo..=hi),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum AxisKind {
    /// A left-invariant frame direction of a Lie group factor.
    Invariant,
    Chart(Domain),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub kind: AxisKind,
    /// Grid resolution; 1 for invariant axes.
    pub resolution: usize,
}

impl Axis {
    pub fn is_chart(&self) -> bool {
        matches!(self.kind, AxisKind::Chart(_))
    }

    pub fn domain(&self) -> Option<Domain> {
        match self.kind {
            AxisKind::Chart(d) => Some(d),
            AxisKind::Invariant => None,
        }
    }

    /// Grid step at the axis resolution.
    pub fn step(&self) -> f64 {
        self.domain()
            .map_or(1.0, |d| d.length() / self.resolution as f64)
    }
}

/// Lie algebra given by `[e_i, e_j] = Σ_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LieGroupModel {
    dim: usize,
    constants: Vec<f64>,
}

impl LieGroupModel {
    pub fn new(constants: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = constants.len();
        if n == 0 || n > MAX_DIM {
            return Err(ModelError::Dimension(n));
        }
        let mut flat = Vec::with_capacity(n * n * n);
        for plane in &constants {
            if plane.len() != n || plane.iter().any(|row| row.len() != n) {
                return Err(ModelError::StructureShape { n });
            }
            for row in plane {
                flat.extend_from_slice(row);
            }
        }
        if flat.iter().any(|c| !c.is_finite()) {
            return Err(ModelError::StructureShape { n });
        }
        let model = LieGroupModel {
            dim: n,
            constants: flat,
        };
        model.validate()?;
        Ok(model)
    }

    /// The Heisenberg algebra: `[e_0, e_1] = e_2`, all other brackets zero.
    pub fn heisenberg3() -> Self {
        let mut c = vec![vec![vec![0.0; 3]; 3]; 3];
        c[0][1][2] = 1.0;
        c[1][0][2] = -1.0;
        LieGroupModel::new(c).expect("valid structure constants")
    }

    /// The abelian algebra of dimension `n`.
    pub fn abelian(n: usize) -> Result<Self> {
        LieGroupModel::new(vec![vec![vec![0.0; n]; n]; n])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.constants[(i * self.dim + j) * self.dim + k]
    }

    /// Largest Jacobi-identity defect over all index quadruples.
    pub fn jacobi_defect(&self) -> (f64, [usize; 4]) {
        let n = self.dim;
        let mut worst = (0.0, [0; 4]);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        let mut s = 0.0;
                        for m in 0..n {
                            s += self.c(i, j, m) * self.c(m, k, l)
                                + self.c(j, k, m) * self.c(m, i, l)
                                + self.c(k, i, m) * self.c(m, j, l);
                        }
                        if s.abs() > worst.0 {
                            worst = (s.abs(), [i, j, k, l]);
                        }
                    }
                }
            }
        }
        worst
    }

    fn validate(&self) -> Result<()> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let defect = (self.c(i, j, k) + self.c(j, i, k)).abs();
                    if defect > 1e-12 {
                        return Err(ModelError::NotAntisymmetric { i, j, k, defect });
                    }
                }
            }
        }
        let (defect, [i, j, k, l]) = self.jacobi_defect();
        if defect > 1e-12 {
            return Err(ModelError::JacobiIdentity {
                i,
                j,
                k,
                l,
                defect,
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartAxis {
    pub domain: Domain,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartModel {
    axes: Vec<ChartAxis>,
}

impl ChartModel {
    pub fn new(axes: Vec<ChartAxis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > MAX_DIM {
            return Err(ModelError::Dimension(axes.len()));
        }
        for (axis, a) in axes.iter().enumerate() {
            if a.resolution < 4 {
                return Err(ModelError::Resolution {
                    axis,
                    resolution: a.resolution,
                });
            }
            if let Domain::Interval { lo, hi } = a.domain {
                if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                    return Err(ModelError::Interval { axis, lo, hi });
                }
            }
        }
        Ok(ChartModel { axes })
    }

    pub fn torus(n: usize, resolution: usize) -> Result<Self> {
        ChartModel::new(vec![
            ChartAxis {
                domain: Domain::Periodic,
                resolution,
            };
            n
        ])
    }

    pub fn cube(n: usize, lo: f64, hi: f64, resolution: usize) -> Result<Self> {
        ChartModel::new(vec![
            ChartAxis {
                domain: Domain::Interval { lo, hi },
                resolution,
            };
            n
        ])
    }

    pub fn axes(&self) -> &[ChartAxis] {
        &self.axes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ModelShape {
    Lie(LieGroupModel),
    Chart(ChartModel),
    Product {
        left: Box<ManifoldModel>,
        right: Box<ManifoldModel>,
        coarse_resolution: usize,
    },
}

/// `[e_i, e_j] = c e_k` with `i < j`, in global axis numbering.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

/// A manifold model with its flattened global frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ManifoldModel {
    shape: ModelShape,
    axes: Vec<Axis>,
    brackets: Vec<Bracket>,
}

/// How to choose sample points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Sampling {
    /// Tensor grid at the model's own resolution (coarse resolution on products).
    Grid,
    /// Tensor grid with the given per-axis resolution on every chart axis.
    GridResolution(usize),
    /// Uniform random points.
    Random { count: usize, seed: u64 },
    /// `Grid` when it has at most `max_grid` points, otherwise `Random`.
    Auto {
        max_grid: usize,
        count: usize,
        seed: u64,
    },
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling::Auto {
            max_grid: 100_000,
            count: DEFAULT_RANDOM_SAMPLES,
            seed: 0,
        }
    }
}

impl ManifoldModel {
    pub fn lie(group: LieGroupModel) -> Self {
        let n = group.dim();
        let mut brackets = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                for k in 0..n {
                    let c = group.c(i, j, k);
                    if c != 0.0 {
                        brackets.push(Bracket { i, j, k, c });
                    }
                }
            }
        }
        ManifoldModel {
            axes: vec![
                Axis {
                    kind: AxisKind::Invariant,
                    resolution: 1,
                };
                n
            ],
            brackets,
            shape: ModelShape::Lie(group),
        }
    }

    pub fn chart(chart: ChartModel) -> Self {
        let axes = chart
            .axes()
            .iter()
            .map(|a| Axis {
                kind: AxisKind::Chart(a.domain),
                resolution: a.resolution,
            })
            .collect();
        ManifoldModel {
            axes,
            brackets: Vec::new(),
            shape: ModelShape::Chart(chart),
        }
    }

    pub fn product(left: ManifoldModel, right: ManifoldModel) -> Result<Self> {
        ManifoldModel::product_with_resolution(left, right, DEFAULT_COARSE_RESOLUTION)
    }

    pub fn product_with_resolution(
        left: ManifoldModel,
        right: ManifoldModel,
        coarse_resolution: usize,
    ) -> Result<Self> {
        let n = left.dim() + right.dim();
        if n > MAX_DIM {
            return Err(ModelError::Dimension(n));
        }
        if coarse_resolution < 4 {
            return Err(ModelError::Resolution {
                axis: 0,
                resolution: coarse_resolution,
            });
        }
        let offset = left.dim();
        let mut axes = left.axes.clone();
        axes.extend(right.axes.iter().copied());
        let mut brackets = left.brackets.clone();
        brackets.extend(right.brackets.iter().map(|b| Bracket {
            i: b.i + offset,
            j: b.j + offset,
            k: b.k + offset,
            c: b.c,
        }));
        Ok(ManifoldModel {
            axes,
            brackets,
            shape: ModelShape::Product {
                left: Box::new(left),
                right: Box::new(right),
                coarse_resolution,
            },
        })
    }

    pub fn heisenberg3() -> Self {
        ManifoldModel::lie(LieGroupModel::heisenberg3())
    }

    /// `T^n` with the default resolution.
    pub fn torus(n: usize) -> Result<Self> {
        Ok(ManifoldModel::chart(ChartModel::torus(n, DEFAULT_RESOLUTION)?))
    }

    pub fn shape(&self) -> &ModelShape {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn brackets(&self) -> &[Bracket] {
        &self.brackets
    }

    pub fn chart_axes(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&a| self.axes[a].is_chart()).collect()
    }

    pub fn has_chart_axes(&self) -> bool {
        self.axes.iter().any(Axis::is_chart)
    }

    /// No bounded interval axes.
    pub fn is_closed(&self) -> bool {
        self.first_open_axis().is_none()
    }

    fn first_open_axis(&self) -> Option<usize> {
        self.axes.iter().position(|a| {
            matches!(a.kind, AxisKind::Chart(Domain::Interval { .. }))
        })
    }

    /// `1e-8` on purely invariant models, `1e-6` when chart axes are present.
    pub fn default_tol(&self) -> f64 {
        if self.has_chart_axes() {
            1e-6
        } else {
            1e-8
        }
    }

    /// Per-axis finite-difference steps at the model resolution.
    pub fn fd_steps(&self) -> Vec<f64> {
        self.axes.iter().map(Axis::step).collect()
    }

    fn grid_resolution(&self) -> Vec<usize> {
        match &self.shape {
            ModelShape::Product {
                coarse_resolution, ..
            } => self
                .axes
                .iter()
                .map(|a| if a.is_chart() { *coarse_resolution } else { 1 })
                .collect(),
            _ => self.axes.iter().map(|a| a.resolution).collect(),
        }
    }

    fn tensor_grid(&self, res: &[usize]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let total: usize = res.iter().product();
        let mut out = Vec::with_capacity(total);
        let mut idx = vec![0usize; n];
        for _ in 0..total {
            out.push(
                (0..n)
                    .map(|a| match self.axes[a].kind {
                        AxisKind::Invariant => 0.0,
                        AxisKind::Chart(d) => d.node(idx[a], res[a]),
                    })
                    .collect(),
            );
            // odometer, last axis fastest
            for a in (0..n).rev() {
                idx[a] += 1;
                if idx[a] < res[a] {
                    break;
                }
                idx[a] = 0;
            }
        }
        out
    }

    fn grid_size(&self, res: &[usize]) -> usize {
        res.iter().try_fold(1usize, |acc, r| acc.checked_mul(*r)).unwrap_or(usize::MAX)
    }

    /// Sample points in deterministic order. Invariant axes always take the
    /// single formal value 0, so purely invariant models yield one point.
    pub fn sample_points(&self, sampling: &Sampling) -> Vec<Vec<f64>> {
        if !self.has_chart_axes() {
            return vec![vec![0.0; self.dim()]];
        }
        match *sampling {
            Sampling::Grid => self.tensor_grid(&self.grid_resolution()),
            Sampling::GridResolution(r) => {
                let res: Vec<usize> = self
                    .axes
                    .iter()
                    .map(|a| if a.is_chart() { r.max(1) } else { 1 })
                    .collect();
                self.tensor_grid(&res)
            }
            Sampling::Random { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count.max(1))
                    .map(|_| {
                        self.axes
                            .iter()
                            .map(|a| match a.kind {
                                AxisKind::Invariant => 0.0,
                                AxisKind::Chart(d) => d.random(&mut rng),
                            })
                            .collect()
                    })
                    .collect()
            }
            Sampling::Auto {
                max_grid,
                count,
                seed,
            } => {
                if self.grid_size(&self.grid_resolution()) <= max_grid {
                    self.sample_points(&Sampling::Grid)
                } else {
                    self.sample_points(&Sampling::Random { count, seed })
                }
            }
        }
    }

    /// Riemann sum of a density over the integration grid (the `Grid`
    /// sampling); invariant axes carry unit volume.
    pub fn integrate_density<E, F>(&self, density: F) -> std::result::Result<f64, E>
    where
        E: Send,
        F: Fn(&[f64]) -> std::result::Result<f64, E> + Sync,
    {
        use rayon::prelude::*;
        let res = self.grid_resolution();
        let cell: f64 = self
            .axes
            .iter()
            .zip(&res)
            .map(|(a, r)| a.domain().map_or(1.0, |d| d.length() / *r as f64))
            .product();
        let points = self.tensor_grid(&res);
        let values: Vec<f64> = points
            .par_iter()
            .map(|p| density(p))
            .collect::<std::result::Result<Vec<f64>, E>>()?;
        Ok(values.iter().sum::<f64>() * cell)
    }

    /// `∫ ω` for a top-degree field.
    pub fn integrate(&self, omega: &FormField) -> Result<f64> {
        self.check_field(omega.dim(), omega.coeffs())?;
        if omega.degree() != self.dim() {
            return Err(ModelError::NotTopDegree {
                degree: omega.degree(),
                dim: self.dim(),
            });
        }
        let top = omega.coeffs()[0].clone();
        self.integrate_density(|p| Ok::<f64, ModelError>(top.eval(p)?))
    }

    /// Error unless every chart axis is periodic.
    pub fn require_closed(&self) -> Result<()> {
        match self.first_open_axis() {
            Some(axis) => Err(ModelError::NotClosed { axis }),
            None => Ok(()),
        }
    }

    /// Checks that coefficient expressions only use chart coordinates.
    pub fn check_field(&self, dim: usize, coeffs: &[Expr]) -> Result<()> {
        if dim != self.dim() {
            return Err(ModelError::FieldDimension {
                field: dim,
                model: self.dim(),
            });
        }
        for (index, e) in coeffs.iter().enumerate() {
            for axis in 0..self.dim().max(e.max_var().map_or(0, |m| m + 1)) {
                if e.depends_on(axis) && (axis >= self.dim() || !self.axes[axis].is_chart()) {
                    return Err(ModelError::NonCoordinateVariable { index, axis });
                }
            }
        }
        Ok(())
    }

    /// `d ω`: coordinate derivatives on chart axes plus the
    /// Chevalley–Eilenberg term from the frame brackets,
    /// `(dω)(X_0..X_p) = Σ_r (-1)^r X_r ω(..X̂_r..) + Σ_{r<s} (-1)^{r+s} ω([X_r,X_s], ..X̂_r..X̂_s..)`.
    pub fn exterior_derivative(&self, omega: &FormField) -> Result<FormField> {
        self.check_field(omega.dim(), omega.coeffs())?;
        let n = self.dim();
        let p = omega.degree();
        if p >= n {
            return Err(ExteriorError::DegreeOverflow { p, q: 1, n }.into());
        }
        let coeffs = multi_indices(n, p + 1)
            .into_iter()
            .map(|j| {
                let entries: Vec<usize> = j.entries().collect();
                let mut terms = Vec::new();
                for (r, &a) in entries.iter().enumerate() {
                    if !self.axes[a].is_chart() {
                        continue;
                    }
                    let d = omega.coeff(j.without(a)).partial(a);
                    if !d.is_zero() {
                        terms.push(if r % 2 == 0 { d } else { Expr::neg(d) });
                    }
                }
                for b in &self.brackets {
                    if !(j.contains(b.i) && j.contains(b.j)) {
                        continue;
                    }
                    let r = j.count_below(b.i);
                    let s = j.count_below(b.j);
                    let rest = j.without(b.i).without(b.j);
                    if rest.contains(b.k) {
                        continue;
                    }
                    let sign_rs = if (r + s) % 2 == 0 { 1.0 } else { -1.0 };
                    let sign_k = if rest.count_below(b.k) % 2 == 0 { 1.0 } else { -1.0 };
                    let c = omega.coeff(rest.with(b.k));
                    if !c.is_zero() {
                        terms.push(c.clone().scale(sign_rs * sign_k * b.c));
                    }
                }
                Expr::sum(terms)
            })
            .collect();
        Ok(FormField {
            dim: n,
            degree: p + 1,
            coeffs,
        })
    }

    /// Symbolic bracket of expression vector fields:
    /// `[X,Y]^k = Σ_j (X^j ∂_j Y^k − Y^j ∂_j X^k) + Σ_{i,j} X^i Y^j c_{ij}^k`.
    pub fn lie_bracket_fields(&self, x: &VectorField, y: &VectorField) -> Result<VectorField> {
        self.check_field(x.dim(), &x.components)?;
        self.check_field(y.dim(), &y.components)?;
        let n = self.dim();
        let chart = self.chart_axes();
        let mut out: Vec<Vec<Expr>> = vec![Vec::new(); n];
        for (k, terms) in out.iter_mut().enumerate() {
            for &j in &chart {
                terms.push(Expr::mul(x.components[j].clone(), y.components[k].partial(j)));
                terms.push(Expr::neg(Expr::mul(
                    y.components[j].clone(),
                    x.components[k].partial(j),
                )));
            }
        }
        for b in &self.brackets {
            // X^i Y^j - X^j Y^i contributes c_{ij}^k
            let xy = Expr::sub(
                Expr::mul(x.components[b.i].clone(), y.components[b.j].clone()),
                Expr::mul(x.components[b.j].clone(), y.components[b.i].clone()),
            );
            out[b.k].push(xy.scale(b.c));
        }
        Ok(VectorField {
            components: out.into_iter().map(Expr::sum).collect(),
        })
    }

    /// Bracket of two pointwise-evaluable vector fields at `point`, with
    /// central differences of step `steps[a]` along each chart axis.
    pub fn lie_bracket_numeric<E, F, G>(
        &self,
        point: &[f64],
        steps: &[f64],
        x: F,
        y: G,
    ) -> std::result::Result<VectorValue, E>
    where
        F: Fn(&[f64]) -> std::result::Result<VectorValue, E>,
        G: Fn(&[f64]) -> std::result::Result<VectorValue, E>,
    {
        let n = self.dim();
        let x0 = x(point)?;
        let y0 = y(point)?;
        let mut out = vec![0.0; n];
        let mut shifted = point.to_vec();
        for j in self.chart_axes() {
            let h = steps[j];
            shifted[j] = point[j] + h;
            let (xp, yp) = (x(&shifted)?, y(&shifted)?);
            shifted[j] = point[j] - h;
            let (xm, ym) = (x(&shifted)?, y(&shifted)?);
            shifted[j] = point[j];
            for (k, o) in out.iter_mut().enumerate() {
                let dy = (yp.0[k] - ym.0[k]) / (2.0 * h);
                let dx = (xp.0[k] - xm.0[k]) / (2.0 * h);
                *o += x0.0[j] * dy - y0.0[j] * dx;
            }
        }
        for b in &self.brackets {
            out[b.k] += b.c * (x0.0[b.i] * y0.0[b.j] - x0.0[b.j] * y0.0[b.i]);
        }
        Ok(VectorValue(out))
    }
}

/// A differential form field: one coefficient expression per multi-index.
#[derive(Debug, Clone, PartialEq)]
pub struct FormField {
    dim: usize,
    degree: usize,
    coeffs: Vec<Expr>,
}

impl FormField {
    pub fn from_exprs(dim: usize, degree: usize, coeffs: Vec<Expr>) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(ExteriorError::DimensionTooLarge(dim).into());
        }
        if degree > dim {
            return Err(ExteriorError::DegreeTooLarge { p: degree, n: dim }.into());
        }
        let expected = binomial(dim, degree);
        if coeffs.len() != expected {
            return Err(ExteriorError::CoefficientCount {
                n: dim,
                p: degree,
                expected,
                got: coeffs.len(),
            }
            .into());
        }
        Ok(FormField {
            dim,
            degree,
            coeffs,
        })
    }

    /// A 1-form from its components.
    pub fn one_form(components: Vec<Expr>) -> Self {
        FormField {
            dim: components.len(),
            degree: 1,
            coeffs: components,
        }
    }

    /// An invariant (constant-coefficient) field.
    pub fn constant(value: &FormValue) -> Self {
        FormField {
            dim: value.dim(),
            degree: value.degree(),
            coeffs: value.coeffs().iter().map(|&c| Expr::num(c)).collect(),
        }
    }

    pub fn basis_one_form(dim: usize, axis: usize) -> Self {
        FormField::one_form(
            (0..dim)
                .map(|a| if a == axis { Expr::one() } else { Expr::zero() })
                .collect(),
        )
    }

    /// The coordinate volume element.
    pub fn volume(dim: usize) -> Self {
        FormField {
            dim,
            degree: dim,
            coeffs: vec![Expr::one()],
        }
    }

    pub fn zero(dim: usize, degree: usize) -> Self {
        FormField {
            dim,
            degree,
            coeffs: vec![Expr::zero(); binomial(dim, degree)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, index: MultiIndex) -> &Expr {
        &self.coeffs[index.rank(self.dim)]
    }

    pub fn eval(&self, point: &[f64]) -> Result<FormValue> {
        let coeffs = self
            .coeffs
            .iter()
            .map(|e| e.eval(point))
            .collect::<std::result::Result<Vec<f64>, EvalError>>()?;
        Ok(FormValue::from_coeffs(self.dim, self.degree, coeffs)?)
    }

    /// `self + s · other`, symbolically.
    pub fn axpy(&self, s: f64, other: &FormField) -> Result<FormField> {
        if self.dim != other.dim || self.degree != other.degree {
            return Err(ModelError::FieldDimension {
                field: other.dim,
                model: self.dim,
            });
        }
        Ok(FormField {
            dim: self.dim,
            degree: self.degree,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| Expr::add(a.clone(), b.clone().scale(s)))
                .collect(),
        })
    }

    pub fn scaled(&self, s: f64) -> FormField {
        FormField {
            dim: self.dim,
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c.clone().scale(s)).collect(),
        }
    }

    /// Pullback along the projection of `total`-dimensional product onto a
    /// factor whose axes start at `offset`.
    pub fn pullback(&self, offset: usize, total: usize) -> Result<FormField> {
        if offset + self.dim > total || total > MAX_DIM {
            return Err(ModelError::FieldDimension {
                field: self.dim,
                model: total,
            });
        }
        let mut coeffs = vec![Expr::zero(); binomial(total, self.degree)];
        for (index, e) in multi_indices(self.dim, self.degree)
            .into_iter()
            .zip(&self.coeffs)
        {
            let shifted = MultiIndex::from_mask(index.mask() << offset);
            coeffs[shifted.rank(total)] = e.shift_vars(offset);
        }
        Ok(FormField {
            dim: total,
            degree: self.degree,
            coeffs,
        })
    }
}

/// A vector field with expression components in the model frame.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub components: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Self {
        VectorField { components }
    }

    pub fn basis(dim: usize, axis: usize) -> Self {
        VectorField::new(
            (0..dim)
                .map(|a| if a == axis { Expr::one() } else { Expr::zero() })
                .collect(),
        )
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn eval(&self, point: &[f64]) -> Result<VectorValue> {
        Ok(VectorValue(
            self.components
                .iter()
                .map(|e| e.eval(point))
                .collect::<std::result::Result<_, _>>()?,
        ))
    }

    pub fn pullback(&self, offset: usize, total: usize) -> VectorField {
        let mut components = vec![Expr::zero(); total];
        for (i, c) in self.components.iter().enumerate() {
            components[offset + i] = c.shift_vars(offset);
        }
        VectorField { components }
    }
}
