//! Cartan class, contact-pair certificates, Reeb pairs and the standard
//! examples built from Darboux and torus contact forms.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::expr::Expr;
use crate::exterior::{
    contraction_matrix, wedge, wedge_all, wedge_power, ExteriorError, FormValue, VectorValue,
};
use crate::linalg::solve_least_squares;
use crate::manifold::{ChartModel, FormField, ManifoldModel, ModelError, Sampling};
use crate::verdict::{CheckItem, Probe, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ContactError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("expected a 1-form, got degree {0}")]
    NotOneForm(usize),
    #[error("1-form vanishes at {point:?}")]
    Vanishes { point: Vec<f64> },
    #[error("type ({k},{l}) needs dimension {expected}, model has dimension {dim}")]
    TypeDimension {
        k: usize,
        l: usize,
        expected: usize,
        dim: usize,
    },
    #[error("not a contact pair: check `{}` failed (value {:e}, threshold {:e})", .0.name, .0.value, .0.threshold)]
    NotContactPair(Box<CheckItem>),
    #[error("class is not constant: k = {k} at the first sample, differs at {witness:?}")]
    NonConstantClass { k: usize, witness: Witness },
    #[error("factor form has class 2*{k}+1 on a model of dimension {dim}")]
    NotMaximalClass { k: usize, dim: usize },
    #[error("form is not closed: |d| = {value:e} at {point:?}")]
    NotClosed { value: f64, point: Vec<f64> },
    #[error("model dimension {0} is even")]
    EvenDimension(usize),
}

pub type Result<T> = std::result::Result<T, ContactError>;

/// Tolerance and sampling shared by all checks of one run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Settings {
    pub tol: f64,
    pub sampling: Sampling,
    /// Number of sample points (taken in order) used for finite-difference commutators.
    pub commutator_points: usize,
}

impl Settings {
    pub fn for_model(model: &ManifoldModel) -> Self {
        Settings {
            tol: model.default_tol(),
            sampling: Sampling::default(),
            commutator_points: 64,
        }
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_sampling(mut self, sampling: Sampling) -> Self {
        self.sampling = sampling;
        self
    }
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else if value == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn evaluate_all<T, F>(points: &[Vec<f64>], f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&[f64]) -> Result<T> + Sync,
{
    points.par_iter().map(|p| f(p)).collect()
}

/// Solution of the stacked Reeb system at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebSolve {
    /// One field per 1-form: `θ_i(E_j) = δ_ij`, `i_{E_j} ω = 0` for every 2-form.
    pub fields: Vec<VectorValue>,
    /// Largest violation of the unscaled defining relations.
    pub residual: f64,
    pub smallest_singular_value: f64,
}

/// Solves `θ_i(E_j) = δ_ij` and `i_{E_j} ω_r = 0` by least squares. Each
/// 2-form block is divided by its sup norm before stacking.
pub fn reeb_solve(one_forms: &[&FormValue], two_forms: &[&FormValue]) -> Result<ReebSolve> {
    let n = one_forms.first().map_or(0, |a| a.dim());
    let mut rows: Vec<Vec<f64>> = one_forms.iter().map(|a| a.coeffs().to_vec()).collect();
    let mut blocks = Vec::with_capacity(two_forms.len());
    for w in two_forms {
        let m = contraction_matrix(w)?;
        let s = w.norm_inf();
        let inv = if s > 0.0 { 1.0 / s } else { 1.0 };
        rows.extend(m.iter().map(|r| r.iter().map(|x| x * inv).collect::<Vec<f64>>()));
        blocks.push(m);
    }
    let rhs: Vec<Vec<f64>> = (0..one_forms.len())
        .map(|j| (0..rows.len()).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let ls = solve_least_squares(&rows, &rhs, 1e-13);
    let mut residual = 0.0f64;
    for (j, x) in ls.solutions.iter().enumerate() {
        for (i, a) in one_forms.iter().enumerate() {
            let v: f64 = a.coeffs().iter().zip(x).map(|(c, e)| c * e).sum();
            let target = if i == j { 1.0 } else { 0.0 };
            residual = residual.max((v - target).abs());
        }
        for m in &blocks {
            for r in m {
                let v: f64 = r.iter().zip(x).map(|(c, e)| c * e).sum();
                residual = residual.max(v.abs());
            }
        }
    }
    if !residual.is_finite() {
        residual = f64::INFINITY;
    }
    Ok(ReebSolve {
        fields: ls
            .solutions
            .into_iter()
            .map(|s| VectorValue(if s.len() == n { s } else { vec![f64::NAN; n] }))
            .collect(),
        residual,
        smallest_singular_value: ls.smallest_singular_value,
    })
}

/// Class data of a 1-form at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PointClass {
    k: Option<usize>,
    scores: ClassScores,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct ClassScores {
    nondeg_at_k: f64,
    power_at_k: f64,
}

fn class_at(a: &FormValue, da: &FormValue, tol: f64) -> Result<PointClass> {
    let n = a.dim();
    let na = a.norm_inf();
    let nda = da.norm_inf();
    let mut best: Option<(usize, f64, f64)> = None;
    let mut k = 0;
    let mut power = FormValue::scalar(n, 1.0);
    while 2 * k < n {
        let w = wedge(a, &power)?;
        let nondeg = relative(w.norm_inf(), na * nda.powi(k as i32));
        let next = if 2 * k + 2 <= n {
            wedge(&power, da)?
        } else {
            FormValue::zero(n, 0)?
        };
        let pow = if 2 * k + 2 <= n {
            relative(next.norm_inf(), nda.powi(k as i32 + 1))
        } else {
            0.0
        };
        if nondeg > tol && pow <= tol {
            best = Some((k, nondeg, pow));
        }
        if 2 * k + 2 > n {
            break;
        }
        power = next;
        k += 1;
    }
    Ok(match best {
        Some((k, nondeg, pow)) => PointClass {
            k: Some(k),
            scores: ClassScores {
                nondeg_at_k: nondeg,
                power_at_k: pow,
            },
        },
        None => PointClass {
            k: None,
            scores: ClassScores {
                nondeg_at_k: 0.0,
                power_at_k: f64::INFINITY,
            },
        },
    })
}

/// Result of [`cartan_class`]: the largest `k` with `α∧(dα)^k ≠ 0` and
/// `(dα)^{k+1} = 0`; the class of the form is `2k + 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassReport {
    pub k: usize,
    pub constant: bool,
    pub points: usize,
    /// `min |α∧(dα)^k| / (|α| |dα|^k)` over the samples.
    pub min_nondegeneracy: f64,
    /// `max |(dα)^{k+1}| / |dα|^{k+1}` over the samples.
    pub max_power_residual: f64,
    /// First sample whose class differs from the first sample's.
    pub witness: Option<Witness>,
}

impl ClassReport {
    pub fn class(&self) -> usize {
        2 * self.k + 1
    }

    pub fn require_constant(&self) -> Result<usize> {
        match &self.witness {
            Some(w) => Err(ContactError::NonConstantClass {
                k: self.k,
                witness: w.clone(),
            }),
            None => Ok(self.k),
        }
    }
}

pub fn cartan_class(model: &ManifoldModel, alpha: &FormField, settings: &Settings) -> Result<ClassReport> {
    if alpha.degree() != 1 {
        return Err(ContactError::NotOneForm(alpha.degree()));
    }
    let d_alpha = model.exterior_derivative(alpha)?;
    let points = model.sample_points(&settings.sampling);
    let classes = evaluate_all(&points, |p| {
        let a = alpha.eval(p)?;
        if a.norm_inf() == 0.0 {
            return Err(ContactError::Vanishes { point: p.to_vec() });
        }
        class_at(&a, &d_alpha.eval(p)?, settings.tol)
    })?;
    let first = classes[0].k;
    let mut witness = None;
    let mut min_nondegeneracy = f64::INFINITY;
    let mut max_power_residual = 0.0f64;
    for (p, c) in points.iter().zip(&classes) {
        if c.k != first && witness.is_none() {
            witness = Some(Witness {
                point: p.clone(),
                t: None,
                value: c.k.map_or(-1.0, |k| k as f64),
            });
        }
        min_nondegeneracy = min_nondegeneracy.min(c.scores.nondeg_at_k);
        max_power_residual = max_power_residual.max(c.scores.power_at_k);
    }
    Ok(ClassReport {
        k: first.unwrap_or(0),
        constant: witness.is_none() && first.is_some(),
        points: points.len(),
        min_nondegeneracy,
        max_power_residual,
        witness: witness.or_else(|| {
            first.is_none().then(|| Witness {
                point: points[0].clone(),
                t: None,
                value: -1.0,
            })
        }),
    })
}

/// A candidate contact pair with its differentials.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactPair {
    pub alpha: FormField,
    pub beta: FormField,
    pub d_alpha: FormField,
    pub d_beta: FormField,
    pub k: usize,
    pub l: usize,
}

/// Pointwise values of a pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairPoint {
    pub alpha: FormValue,
    pub beta: FormValue,
    pub d_alpha: FormValue,
    pub d_beta: FormValue,
}

impl PairPoint {
    pub fn d_alpha_power(&self, k: usize) -> Result<FormValue> {
        Ok(wedge_power(&self.d_alpha, k)?)
    }

    pub fn d_beta_power(&self, l: usize) -> Result<FormValue> {
        Ok(wedge_power(&self.d_beta, l)?)
    }

    /// `θ∧(dα)^k∧η∧(dβ)^ℓ` as a top coefficient.
    pub fn top(&self, theta: &FormValue, eta: &FormValue, k: usize, l: usize) -> Result<f64> {
        let w = wedge_all(&[theta, &self.d_alpha_power(k)?, eta, &self.d_beta_power(l)?])?;
        Ok(w.top_coeff().unwrap_or(0.0))
    }

    /// `|α| |dα|^k |β| |dβ|^ℓ`, the scale for relative volume tests.
    pub fn scale(&self, k: usize, l: usize) -> f64 {
        self.alpha.norm_inf()
            * self.d_alpha.norm_inf().powi(k as i32)
            * self.beta.norm_inf()
            * self.d_beta.norm_inf().powi(l as i32)
    }

    pub fn reeb(&self) -> Result<ReebSolve> {
        reeb_solve(&[&self.alpha, &self.beta], &[&self.d_alpha, &self.d_beta])
    }
}

impl ContactPair {
    pub fn new(model: &ManifoldModel, alpha: FormField, beta: FormField, k: usize, l: usize) -> Result<Self> {
        for f in [&alpha, &beta] {
            if f.degree() != 1 {
                return Err(ContactError::NotOneForm(f.degree()));
            }
        }
        let expected = 2 * k + 2 * l + 2;
        if expected != model.dim() {
            return Err(ContactError::TypeDimension {
                k,
                l,
                expected,
                dim: model.dim(),
            });
        }
        let d_alpha = model.exterior_derivative(&alpha)?;
        let d_beta = model.exterior_derivative(&beta)?;
        Ok(ContactPair {
            alpha,
            beta,
            d_alpha,
            d_beta,
            k,
            l,
        })
    }

    pub fn at(&self, point: &[f64]) -> Result<PairPoint> {
        Ok(PairPoint {
            alpha: self.alpha.eval(point)?,
            beta: self.beta.eval(point)?,
            d_alpha: self.d_alpha.eval(point)?,
            d_beta: self.d_beta.eval(point)?,
        })
    }

    pub fn reeb_at(&self, point: &[f64]) -> Result<ReebSolve> {
        self.at(point)?.reeb()
    }

    /// Top coefficient of `α∧(dα)^k∧β∧(dβ)^ℓ`.
    pub fn volume_at(&self, point: &[f64]) -> Result<f64> {
        let v = self.at(point)?;
        v.top(&v.alpha, &v.beta, self.k, self.l)
    }
}

/// Solved Reeb fields at the sample points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReebSamples {
    pub points: Vec<Vec<f64>>,
    pub e_alpha: Vec<VectorValue>,
    pub e_beta: Vec<VectorValue>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Orientation {
    Positive,
    Negative,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContactPairCertificate {
    pub k: usize,
    pub l: usize,
    pub points: usize,
    pub min_abs_volume: f64,
    pub max_abs_volume: f64,
    pub min_relative_volume: f64,
    /// Sign of the volume coefficient against the coordinate volume element.
    pub orientation: Orientation,
    pub d_alpha_power_residual: f64,
    pub d_beta_power_residual: f64,
    pub reeb_residual: f64,
    pub smallest_singular_value: f64,
    pub commutator_defect: f64,
    pub checks: Vec<CheckItem>,
    #[serde(skip)]
    pub reeb: ReebSamples,
    #[serde(skip)]
    pub volumes: Vec<f64>,
}

impl ContactPairCertificate {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(CheckItem::passed)
    }

    pub fn first_failure(&self) -> Option<&CheckItem> {
        self.checks.iter().find(|c| c.failed())
    }
}

struct PairSample {
    volume: f64,
    scale: f64,
    d_alpha_power: f64,
    d_beta_power: f64,
    reeb: ReebSolve,
}

fn sample_pair(pair: &ContactPair, p: &[f64]) -> Result<PairSample> {
    let v = pair.at(p)?;
    let volume = v.top(&v.alpha, &v.beta, pair.k, pair.l)?;
    let n = v.alpha.dim();
    let da_pow = if 2 * pair.k + 2 <= n {
        relative(
            v.d_alpha_power(pair.k + 1)?.norm_inf(),
            v.d_alpha.norm_inf().powi(pair.k as i32 + 1),
        )
    } else {
        0.0
    };
    let db_pow = if 2 * pair.l + 2 <= n {
        relative(
            v.d_beta_power(pair.l + 1)?.norm_inf(),
            v.d_beta.norm_inf().powi(pair.l as i32 + 1),
        )
    } else {
        0.0
    };
    Ok(PairSample {
        volume,
        scale: v.scale(pair.k, pair.l),
        d_alpha_power: da_pow,
        d_beta_power: db_pow,
        reeb: v.reeb()?,
    })
}

/// Threshold for finite-difference commutators: the tolerance on purely
/// invariant models, otherwise the square of the coarsest chart step.
pub fn commutator_threshold(model: &ManifoldModel, tol: f64) -> f64 {
    let h = model
        .chart_axes()
        .into_iter()
        .map(|a| model.axes()[a].step())
        .fold(0.0, f64::max);
    tol.max(h * h)
}

/// `|[E_α, E_β]|` at each point, with Reeb fields re-solved at stencil points.
pub fn commutator_defects(model: &ManifoldModel, pair: &ContactPair, points: &[Vec<f64>]) -> Result<Vec<f64>> {
    let steps = model.fd_steps();
    evaluate_all(points, |p| {
        let e_alpha = |q: &[f64]| pair.reeb_at(q).map(|r| r.fields[0].clone());
        let e_beta = |q: &[f64]| pair.reeb_at(q).map(|r| r.fields[1].clone());
        Ok(model.lie_bracket_numeric(p, &steps, e_alpha, e_beta)?.norm_inf())
    })
}

/// Orientation item: the smaller of the largest positive and largest negative
/// relative volume coefficients must vanish.
fn orientation_item(
    name: &str,
    points: &[Vec<f64>],
    t: Option<f64>,
    rel_signed: &[f64],
    tol: f64,
) -> (CheckItem, Orientation) {
    let max_pos = rel_signed.iter().copied().fold(0.0, f64::max);
    let max_neg = rel_signed.iter().copied().fold(0.0f64, |m, v| m.max(-v));
    let minority_positive = max_pos < max_neg;
    let probes = points.iter().zip(rel_signed).map(|(p, &v)| {
        let minority = if minority_positive { v > 0.0 } else { v < 0.0 };
        Probe::new(p, t, if minority { v.abs() } else { 0.0 })
    });
    let mut item = CheckItem::must_vanish(name, tol, probes);
    let orientation = if item.failed() {
        // point of the opposite (majority) sign with the largest magnitude
        let (idx, _) = rel_signed
            .iter()
            .enumerate()
            .filter(|(_, v)| if minority_positive { **v < 0.0 } else { **v > 0.0 })
            .fold((0, 0.0), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
        item = item.with_note(format!(
            "opposite sign {:.16e} at {:?}",
            rel_signed[idx], points[idx]
        ));
        Orientation::Mixed
    } else if max_neg > max_pos {
        Orientation::Negative
    } else {
        Orientation::Positive
    };
    (item, orientation)
}

/// Evaluates every contact-pair condition and returns the certificate with
/// its check list, passing or not. Item names are prefixed with `prefix`.
pub fn assess_contact_pair(
    model: &ManifoldModel,
    pair: &ContactPair,
    settings: &Settings,
    t: Option<f64>,
    prefix: &str,
) -> Result<ContactPairCertificate> {
    let tol = settings.tol;
    let points = model.sample_points(&settings.sampling);
    let samples = evaluate_all(&points, |p| sample_pair(pair, p))?;

    let rel: Vec<f64> = samples.iter().map(|s| relative(s.volume, s.scale)).collect();
    let volume = CheckItem::must_exceed(
        "volume form",
        tol,
        points.iter().zip(&rel).map(|(p, v)| Probe::new(p, t, v.abs())),
    );
    let (orientation_check, orientation) = orientation_item("orientation constant", &points, t, &rel, tol);
    let da_pow = CheckItem::must_vanish(
        format!("d alpha^{} vanishes", pair.k + 1),
        tol,
        points.iter().zip(&samples).map(|(p, s)| Probe::new(p, t, s.d_alpha_power)),
    );
    let db_pow = CheckItem::must_vanish(
        format!("d beta^{} vanishes", pair.l + 1),
        tol,
        points.iter().zip(&samples).map(|(p, s)| Probe::new(p, t, s.d_beta_power)),
    );
    let reeb_rel = CheckItem::must_vanish(
        "Reeb relations",
        tol,
        points.iter().zip(&samples).map(|(p, s)| Probe::new(p, t, s.reeb.residual)),
    );
    let reeb_rank = CheckItem::must_exceed(
        "Reeb uniqueness",
        tol,
        points
            .iter()
            .zip(&samples)
            .map(|(p, s)| Probe::new(p, t, s.reeb.smallest_singular_value)),
    );
    let subset = &points[..points.len().min(settings.commutator_points.max(1))];
    let defects = commutator_defects(model, pair, subset)?;
    let commutator = CheckItem::must_vanish(
        "Reeb commutator",
        commutator_threshold(model, tol),
        subset.iter().zip(&defects).map(|(p, d)| Probe::new(p, t, *d)),
    );

    let checks: Vec<CheckItem> = [volume, orientation_check, da_pow, db_pow, reeb_rel, reeb_rank, commutator]
        .into_iter()
        .map(|c| c.with_prefix(prefix))
        .collect();
    let abs = samples.iter().map(|s| s.volume.abs());
    Ok(ContactPairCertificate {
        k: pair.k,
        l: pair.l,
        points: points.len(),
        min_abs_volume: abs.clone().fold(f64::INFINITY, f64::min),
        max_abs_volume: abs.fold(0.0, f64::max),
        min_relative_volume: rel.iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min),
        orientation,
        d_alpha_power_residual: samples.iter().map(|s| s.d_alpha_power).fold(0.0, f64::max),
        d_beta_power_residual: samples.iter().map(|s| s.d_beta_power).fold(0.0, f64::max),
        reeb_residual: samples.iter().map(|s| s.reeb.residual).fold(0.0, f64::max),
        smallest_singular_value: samples
            .iter()
            .map(|s| s.reeb.smallest_singular_value)
            .fold(f64::INFINITY, f64::min),
        commutator_defect: defects.iter().copied().fold(0.0, f64::max),
        checks,
        volumes: samples.iter().map(|s| s.volume).collect(),
        reeb: ReebSamples {
            e_alpha: samples.iter().map(|s| s.reeb.fields[0].clone()).collect(),
            e_beta: samples.iter().map(|s| s.reeb.fields[1].clone()).collect(),
            points,
        },
    })
}

/// Certifies `(α, β)` as a contact pair of type `(k, ℓ)`, or reports the first
/// failed condition with its witness.
pub fn verify_contact_pair(
    model: &ManifoldModel,
    alpha: &FormField,
    beta: &FormField,
    k: usize,
    l: usize,
    settings: &Settings,
) -> Result<ContactPairCertificate> {
    let pair = ContactPair::new(model, alpha.clone(), beta.clone(), k, l)?;
    let cert = assess_contact_pair(model, &pair, settings, None, "")?;
    match cert.first_failure() {
        Some(item) => Err(ContactError::NotContactPair(Box::new(item.clone()))),
        None => Ok(cert),
    }
}

/// The Reeb pair of a certified contact pair at the sample points.
pub fn reeb_pair(model: &ManifoldModel, pair: &ContactPair, settings: &Settings) -> Result<ReebSamples> {
    let cert = assess_contact_pair(model, pair, settings, None, "")?;
    match cert.first_failure() {
        Some(item) => Err(ContactError::NotContactPair(Box::new(item.clone()))),
        None => Ok(cert.reeb),
    }
}

/// `[-1, 1]^{2k+1}` with axes `x_1..x_k, y_1..y_k, z` and `α = dz + Σ x_i dy_i`.
pub fn darboux_model(k: usize) -> Result<(ManifoldModel, FormField)> {
    let n = 2 * k + 1;
    let model = ManifoldModel::chart(ChartModel::cube(n, -1.0, 1.0, crate::manifold::DEFAULT_RESOLUTION)?);
    let mut comps = vec![Expr::zero(); n];
    for i in 0..k {
        comps[k + i] = Expr::var(i);
    }
    comps[n - 1] = Expr::one();
    Ok((model, FormField::one_form(comps)))
}

/// `cos(x0) dx1 + sin(x0) dx2` on `T^3`.
pub fn torus_contact_form() -> FormField {
    FormField::one_form(vec![
        Expr::zero(),
        Expr::cos(Expr::var(0)),
        Expr::sin(Expr::var(0)),
    ])
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductPair {
    pub model: ManifoldModel,
    pub alpha: FormField,
    pub beta: FormField,
    pub k: usize,
    pub l: usize,
}

fn require_maximal_class(model: &ManifoldModel, form: &FormField, settings: &Settings) -> Result<usize> {
    let report = cartan_class(model, form, &Settings {
        sampling: Sampling::Grid,
        ..*settings
    })?;
    let k = report.require_constant()?;
    if 2 * k + 1 != model.dim() {
        return Err(ContactError::NotMaximalClass { k, dim: model.dim() });
    }
    Ok(k)
}

/// Pulls back contact forms of two odd-dimensional factors to their product.
pub fn product_contact_pair(
    left: &ManifoldModel,
    alpha: &FormField,
    right: &ManifoldModel,
    beta: &FormField,
    settings: &Settings,
) -> Result<ProductPair> {
    let left_settings = Settings {
        tol: left.default_tol().max(settings.tol),
        ..*settings
    };
    let right_settings = Settings {
        tol: right.default_tol().max(settings.tol),
        ..*settings
    };
    let k = require_maximal_class(left, alpha, &left_settings)?;
    let l = require_maximal_class(right, beta, &right_settings)?;
    let model = ManifoldModel::product(left.clone(), right.clone())?;
    let n = model.dim();
    Ok(ProductPair {
        alpha: alpha.pullback(0, n)?,
        beta: beta.pullback(left.dim(), n)?,
        model,
        k,
        l,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingleDeformationReport {
    pub dim: usize,
    /// `α` has maximal class and `α₀(Z) = 0` for its Reeb field `Z`.
    pub condition_ii: Vec<CheckItem>,
    /// `α₀ + tα` has maximal class for every positive `t` of the grid.
    pub condition_i: Vec<CheckItem>,
    pub ii_holds: bool,
    pub i_holds: bool,
    pub agree: bool,
    /// Class of `α₀` when `t = 0` is on the grid.
    pub class_at_zero: Option<ClassReport>,
}

/// Compares "α₀ + tα is contact for all t > 0" against "α is contact and
/// α₀ vanishes on its Reeb field", for a closed `α₀`.
pub fn verify_single_linear_deformation(
    model: &ManifoldModel,
    alpha0: &FormField,
    alpha: &FormField,
    t_grid: &[f64],
    settings: &Settings,
) -> Result<SingleDeformationReport> {
    let n = model.dim();
    if n % 2 == 0 {
        return Err(ContactError::EvenDimension(n));
    }
    for f in [alpha0, alpha] {
        if f.degree() != 1 {
            return Err(ContactError::NotOneForm(f.degree()));
        }
    }
    let m = (n - 1) / 2;
    let tol = settings.tol;
    let points = model.sample_points(&settings.sampling);
    let d0 = model.exterior_derivative(alpha0)?;
    let closedness = evaluate_all(&points, |p| Ok(d0.eval(p)?.norm_inf()))?;
    if let Some((p, v)) = points.iter().zip(&closedness).find(|(_, v)| !(**v <= tol)) {
        return Err(ContactError::NotClosed {
            value: *v,
            point: p.clone(),
        });
    }
    let d_alpha = model.exterior_derivative(alpha)?;

    // top coefficient of θ∧(dθ)^m relative to |θ||dθ|^m
    let contact_volume = |a: &FormValue, da: &FormValue| -> Result<(f64, f64)> {
        let w = wedge(a, &wedge_power(da, m)?)?;
        let v = w.top_coeff().unwrap_or(0.0);
        Ok((v, relative(v, a.norm_inf() * da.norm_inf().powi(m as i32))))
    };

    let data = evaluate_all(&points, |p| {
        let a = alpha.eval(p)?;
        let da = d_alpha.eval(p)?;
        let (_, rel) = contact_volume(&a, &da)?;
        let z = reeb_solve(&[&a], &[&da])?;
        let a0z = alpha0.eval(p)?.apply(&z.fields[0])?;
        Ok((rel, z.residual, a0z))
    })?;
    let condition_ii = vec![
        CheckItem::must_exceed(
            "alpha maximal class",
            tol,
            points.iter().zip(&data).map(|(p, d)| Probe::new(p, None, d.0.abs())),
        ),
        CheckItem::must_vanish(
            "Reeb relations",
            tol,
            points.iter().zip(&data).map(|(p, d)| Probe::new(p, None, d.1)),
        ),
        CheckItem::must_vanish(
            "alpha0(Z) vanishes",
            tol,
            points.iter().zip(&data).map(|(p, d)| Probe::new(p, None, d.2.abs())),
        ),
    ];

    let mut condition_i = Vec::new();
    let mut class_at_zero = None;
    for &t in t_grid {
        if t == 0.0 {
            class_at_zero = Some(cartan_class(model, alpha0, settings)?);
            continue;
        }
        if t < 0.0 {
            condition_i.push(CheckItem::skipped(
                format!("t={t}: maximal class"),
                "only positive t enter the criterion",
            ));
            continue;
        }
        let at = alpha0.axpy(t, alpha)?;
        let dat = d_alpha.scaled(t);
        let rel = evaluate_all(&points, |p| Ok(contact_volume(&at.eval(p)?, &dat.eval(p)?)?.1))?;
        condition_i.push(CheckItem::must_exceed(
            format!("t={t}: maximal class"),
            tol,
            points.iter().zip(&rel).map(|(p, v)| Probe::new(p, Some(t), v.abs())),
        ));
        condition_i.push(orientation_item(&format!("t={t}: orientation constant"), &points, Some(t), &rel, tol).0);
    }
    let ii_holds = condition_ii.iter().all(CheckItem::passed);
    let i_holds = condition_i.iter().all(CheckItem::passed);
    Ok(SingleDeformationReport {
        dim: n,
        condition_ii,
        condition_i,
        ii_holds,
        i_holds,
        agree: ii_holds == i_holds,
        class_at_zero,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exterior::MultiIndex;
    use crate::manifold::LieGroupModel;

    fn settings(model: &ManifoldModel) -> Settings {
        Settings::for_model(model)
    }

    #[test]
    fn darboux_class() {
        let (m, a) = darboux_model(1).unwrap();
        let r = cartan_class(&m, &a, &settings(&m)).unwrap();
        assert_eq!((r.k, r.class(), r.constant), (1, 3, true));
        let (m2, a2) = darboux_model(2).unwrap();
        let r2 = cartan_class(&m2, &a2, &settings(&m2)).unwrap();
        assert_eq!(r2.k, 2);
        let da = m2.exterior_derivative(&a2).unwrap();
        let p = vec![0.3, -0.2, 0.5, 0.1, 0.7];
        let top = wedge(&a2.eval(&p).unwrap(), &wedge_power(&da.eval(&p).unwrap(), 2).unwrap()).unwrap();
        assert_eq!(top.top_coeff().unwrap().abs(), 2.0);
    }

    #[test]
    fn closed_form_has_k_zero() {
        let m = ManifoldModel::torus(3).unwrap();
        let r = cartan_class(&m, &FormField::basis_one_form(3, 0), &settings(&m)).unwrap();
        assert_eq!(r.k, 0);
        assert!(r.constant);
    }

    #[test]
    fn heisenberg_e3_is_contact() {
        let m = ManifoldModel::heisenberg3();
        let r = cartan_class(&m, &FormField::basis_one_form(3, 2), &settings(&m)).unwrap();
        assert_eq!(r.k, 1);
    }

    #[test]
    fn vanishing_form_is_rejected() {
        let m = ManifoldModel::torus(3).unwrap();
        let a = FormField::one_form(vec![Expr::sin(Expr::var(0)), Expr::zero(), Expr::zero()]);
        assert!(matches!(
            cartan_class(&m, &a, &settings(&m)),
            Err(ContactError::Vanishes { .. })
        ));
    }

    #[test]
    fn heisenberg_pair_certificate() {
        let h = ManifoldModel::heisenberg3();
        let m = ManifoldModel::product(h.clone(), h).unwrap();
        let a = FormField::basis_one_form(6, 2);
        let b = FormField::basis_one_form(6, 5);
        let cert = verify_contact_pair(&m, &a, &b, 1, 1, &settings(&m)).unwrap();
        assert_eq!(cert.min_abs_volume, 1.0);
        assert!(cert.reeb.e_alpha[0].dist_inf(&VectorValue::basis(6, 2)) < 1e-15);
        assert!(cert.reeb.e_beta[0].dist_inf(&VectorValue::basis(6, 5)) < 1e-15);
        assert!(cert.commutator_defect < 1e-14);
    }

    #[test]
    fn type_00_on_t2() {
        let m = ManifoldModel::torus(2).unwrap();
        let cert = verify_contact_pair(
            &m,
            &FormField::basis_one_form(2, 0),
            &FormField::basis_one_form(2, 1),
            0,
            0,
            &settings(&m),
        )
        .unwrap();
        assert_eq!((cert.k, cert.l), (0, 0));
    }

    #[test]
    fn dimension_mismatch() {
        let m = ManifoldModel::torus(5).unwrap();
        let a = FormField::basis_one_form(5, 0);
        assert!(matches!(
            ContactPair::new(&m, a.clone(), a, 1, 1),
            Err(ContactError::TypeDimension { expected: 6, dim: 5, .. })
        ));
    }

    #[test]
    fn darboux_product_reeb_fields() {
        let (d, a) = darboux_model(1).unwrap();
        let s = settings(&d);
        let pp = product_contact_pair(&d, &a, &d, &a, &s).unwrap();
        assert_eq!((pp.k, pp.l), (1, 1));
        let cert = verify_contact_pair(&pp.model, &pp.alpha, &pp.beta, 1, 1, &Settings::for_model(&pp.model)).unwrap();
        for (ea, eb) in cert.reeb.e_alpha.iter().zip(&cert.reeb.e_beta) {
            assert!(ea.dist_inf(&VectorValue::basis(6, 2)) < 1e-10);
            assert!(eb.dist_inf(&VectorValue::basis(6, 5)) < 1e-10);
        }
    }

    #[test]
    fn failing_pair_reports_first_condition() {
        let m = ManifoldModel::torus(2).unwrap();
        let a = FormField::basis_one_form(2, 0);
        let err = verify_contact_pair(&m, &a, &a, 0, 0, &settings(&m)).unwrap_err();
        match err {
            ContactError::NotContactPair(item) => {
                assert_eq!(item.name, "volume form");
                assert!(item.witness.is_some());
            }
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn single_deformation_examples() {
        let m = ManifoldModel::torus(3).unwrap();
        let s = settings(&m);
        let grid = [0.01, 0.1, 0.5, 1.0, 2.0];
        let ok = verify_single_linear_deformation(&m, &FormField::basis_one_form(3, 0), &torus_contact_form(), &grid, &s)
            .unwrap();
        assert!(ok.ii_holds && ok.i_holds && ok.agree);
        let bad = verify_single_linear_deformation(&m, &FormField::basis_one_form(3, 1), &torus_contact_form(), &grid, &s)
            .unwrap();
        assert!(!bad.ii_holds && !bad.i_holds && bad.agree);
        let zero = verify_single_linear_deformation(&m, &FormField::basis_one_form(3, 0), &torus_contact_form(), &[0.0], &s)
            .unwrap();
        assert_eq!(zero.class_at_zero.unwrap().k, 0);
    }

    #[test]
    fn torus_contact_volume_sign() {
        let m = ManifoldModel::torus(3).unwrap();
        let a = torus_contact_form();
        let da = m.exterior_derivative(&a).unwrap();
        let p = [0.4, 1.0, 2.0];
        let w = wedge(&a.eval(&p).unwrap(), &da.eval(&p).unwrap()).unwrap();
        assert!((w.coeff(MultiIndex::from_entries(&[0, 1, 2]).unwrap()) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn mixed_lie_chart_product() {
        let h = ManifoldModel::lie(LieGroupModel::heisenberg3());
        let t3 = ManifoldModel::torus(3).unwrap();
        let s = Settings::for_model(&t3);
        let pp = product_contact_pair(&h, &FormField::basis_one_form(3, 2), &t3, &torus_contact_form(), &s).unwrap();
        let cert = verify_contact_pair(&pp.model, &pp.alpha, &pp.beta, 1, 1, &Settings::for_model(&pp.model)).unwrap();
        assert!(cert.passed());
        assert_eq!(cert.orientation, Orientation::Positive);
    }
}
