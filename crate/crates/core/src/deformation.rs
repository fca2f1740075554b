//! Linear deformations `(α₀ + tα, β₀ + tβ)` of a pair of closed 1-forms,
//! the functions `A, B, C` with `α_t∧(dα_t)^k∧β_t∧(dβ_t)^ℓ = t^{k+ℓ}(t²A + tB + C) Ω`,
//! and both directions of the deformation theorem.

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::contact::{assess_contact_pair, ContactError, ContactPair, PairPoint, Settings};
use crate::expr::Expr;
use crate::exterior::{wedge, wedge_all, ExteriorError, FormValue, VectorValue};
use crate::manifold::{FormField, ManifoldModel, ModelError};
use crate::verdict::{CheckItem, Direction, Probe, Sense, TheoremVerdict, Witness};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformationError {
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    #[error("{which} is not closed: |d{which}| = {value:e} at {point:?}")]
    NotClosed {
        which: &'static str,
        value: f64,
        point: Vec<f64>,
    },
    #[error("alpha0 and beta0 are linearly dependent at {point:?}")]
    Dependent { point: Vec<f64> },
    #[error("reference volume vanishes at {point:?}")]
    VolumeVanishes { point: Vec<f64> },
    #[error("invalid t grid: {0}")]
    TGrid(String),
}

pub type Result<T> = std::result::Result<T, DeformationError>;

/// `(α₀, β₀, α, β)` of declared type `(k, ℓ)`, with `α₀, β₀` closed.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationFamily {
    pub model: ManifoldModel,
    pub alpha0: FormField,
    pub beta0: FormField,
    pub alpha: FormField,
    pub beta: FormField,
    pub k: usize,
    pub l: usize,
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

fn dot(theta: &FormValue, v: &VectorValue) -> f64 {
    theta.coeffs().iter().zip(&v.0).map(|(a, b)| a * b).sum()
}

impl DeformationFamily {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        model: ManifoldModel,
        alpha0: FormField,
        beta0: FormField,
        alpha: FormField,
        beta: FormField,
        k: usize,
        l: usize,
        settings: &Settings,
    ) -> Result<Self> {
        // validates degrees and the type/dimension relation
        ContactPair::new(&model, alpha.clone(), beta.clone(), k, l)?;
        ContactPair::new(&model, alpha0.clone(), beta0.clone(), k, l)?;
        let points = model.sample_points(&settings.sampling);
        for (which, f) in [("alpha0", &alpha0), ("beta0", &beta0)] {
            let d = model.exterior_derivative(f)?;
            let norms = evaluate_all(&points, |p| Ok(d.eval(p)?.norm_inf()))?;
            if let Some((p, v)) = points.iter().zip(&norms).find(|(_, v)| !(**v <= settings.tol)) {
                return Err(DeformationError::NotClosed {
                    which,
                    value: *v,
                    point: p.clone(),
                });
            }
        }
        let independence = evaluate_all(&points, |p| {
            let a = alpha0.eval(p)?;
            let b = beta0.eval(p)?;
            Ok(relative(wedge(&a, &b)?.norm_inf(), a.norm_inf() * b.norm_inf()))
        })?;
        if let Some((p, _)) = points.iter().zip(&independence).find(|(_, v)| !(**v > settings.tol)) {
            return Err(DeformationError::Dependent { point: p.clone() });
        }
        Ok(DeformationFamily {
            model,
            alpha0,
            beta0,
            alpha,
            beta,
            k,
            l,
        })
    }

    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    /// `(α₀ + tα, β₀ + tβ)`.
    pub fn family_at(&self, t: f64) -> Result<(FormField, FormField)> {
        Ok((self.alpha0.axpy(t, &self.alpha)?, self.beta0.axpy(t, &self.beta)?))
    }

    pub fn pair_at(&self, t: f64) -> Result<ContactPair> {
        let (a, b) = self.family_at(t)?;
        Ok(ContactPair::new(&self.model, a, b, self.k, self.l)?)
    }

    /// The deformation direction `(α, β)` as a pair.
    pub fn base_pair(&self) -> Result<ContactPair> {
        Ok(ContactPair::new(&self.model, self.alpha.clone(), self.beta.clone(), self.k, self.l)?)
    }
}

/// Sampled `A, B, C` relative to a reference volume `Ω`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbcReport {
    pub points: usize,
    pub min_a: f64,
    pub max_a: f64,
    pub min_b: f64,
    pub max_b: f64,
    pub max_abs_b: f64,
    pub max_abs_c: f64,
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
    #[serde(skip)]
    pub a: Vec<f64>,
    #[serde(skip)]
    pub b: Vec<f64>,
    #[serde(skip)]
    pub c: Vec<f64>,
}

struct AbcPoint {
    a: f64,
    b: f64,
    c: f64,
}

fn abc_at(family: &DeformationFamily, pair: &ContactPair, omega: &FormField, p: &[f64]) -> Result<AbcPoint> {
    let v = pair.at(p)?;
    let a0 = family.alpha0.eval(p)?;
    let b0 = family.beta0.eval(p)?;
    let o = omega.eval(p)?.top_coeff().unwrap_or(0.0);
    if o == 0.0 || !o.is_finite() {
        return Err(DeformationError::VolumeVanishes { point: p.to_vec() });
    }
    let dak = v.d_alpha_power(pair.k)?;
    let dbl = v.d_beta_power(pair.l)?;
    let top = |x: &FormValue, y: &FormValue| -> Result<f64> {
        Ok(wedge_all(&[x, &dak, y, &dbl])?.top_coeff().unwrap_or(0.0))
    };
    Ok(AbcPoint {
        a: top(&v.alpha, &v.beta)? / o,
        b: (top(&a0, &v.beta)? + top(&v.alpha, &b0)?) / o,
        c: top(&a0, &b0)? / o,
    })
}

fn check_volume(model: &ManifoldModel, omega: &FormField) -> Result<()> {
    if omega.dim() != model.dim() || omega.degree() != model.dim() {
        return Err(ModelError::NotTopDegree {
            degree: omega.degree(),
            dim: model.dim(),
        }
        .into());
    }
    Ok(())
}

pub fn compute_abc(family: &DeformationFamily, omega: &FormField, settings: &Settings) -> Result<AbcReport> {
    check_volume(&family.model, omega)?;
    let pair = family.base_pair()?;
    let points = family.model.sample_points(&settings.sampling);
    let vals = evaluate_all(&points, |p| abc_at(family, &pair, omega, p))?;
    let fold = |f: fn(&AbcPoint) -> f64| {
        vals.iter()
            .map(f)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
    };
    let (min_a, max_a) = fold(|v| v.a);
    let (min_b, max_b) = fold(|v| v.b);
    Ok(AbcReport {
        points: points.len(),
        min_a,
        max_a,
        min_b,
        max_b,
        max_abs_b: vals.iter().map(|v| v.b.abs()).fold(0.0, f64::max),
        max_abs_c: vals.iter().map(|v| v.c.abs()).fold(0.0, f64::max),
        a: vals.iter().map(|v| v.a).collect(),
        b: vals.iter().map(|v| v.b).collect(),
        c: vals.iter().map(|v| v.c).collect(),
        samples: points,
    })
}

/// Largest relative gap between `α_t∧(dα_t)^k∧β_t∧(dβ_t)^ℓ` (differentiated
/// afresh for every `t`) and `t^{k+ℓ}(t²A + tB + C) Ω`.
pub fn volume_identity_defect(
    family: &DeformationFamily,
    omega: &FormField,
    t_samples: &[f64],
    settings: &Settings,
) -> Result<(f64, Option<Witness>)> {
    let abc = compute_abc(family, omega, settings)?;
    let kl = (family.k + family.l) as i32;
    let mut worst = (0.0f64, None);
    for &t in t_samples {
        let pair = family.pair_at(t)?;
        let defects = evaluate_all(&abc.samples, |p| Ok(pair.volume_at(p)?))?;
        for (i, lhs) in defects.iter().enumerate() {
            let o = omega.eval(&abc.samples[i])?.top_coeff().unwrap_or(0.0);
            let (a, b, c) = (abc.a[i], abc.b[i], abc.c[i]);
            let rhs = t.powi(kl) * (t * t * a + t * b + c) * o;
            let scale = (t.abs().powi(kl) * (t * t * a.abs() + t.abs() * b.abs() + c.abs()) * o.abs()).max(1.0);
            let d = (lhs - rhs).abs() / scale;
            if !(d <= worst.0) {
                worst = (
                    d,
                    Some(Witness {
                        point: abc.samples[i].clone(),
                        t: Some(t),
                        value: d,
                    }),
                );
            }
        }
    }
    Ok(worst)
}

fn wedge_power_pair(v: &PairPoint, k: usize, l: usize) -> Result<(FormValue, FormValue)> {
    Ok((v.d_alpha_power(k)?, v.d_beta_power(l)?))
}

/// Maximum relative defects of
/// `ω∧(dα)^k∧β∧(dβ)^ℓ = ω(E_α) α∧(dα)^k∧β∧(dβ)^ℓ` and
/// `ω∧α∧(dα)^k∧(dβ)^ℓ = −ω(E_β) α∧(dα)^k∧β∧(dβ)^ℓ` over samples and forms.
pub fn lemma_p1_p2_check(
    model: &ManifoldModel,
    pair: &ContactPair,
    omegas: &[FormField],
    settings: &Settings,
) -> Result<(f64, f64)> {
    let points = model.sample_points(&settings.sampling);
    let per_point = evaluate_all(&points, |p| {
        let v = pair.at(p)?;
        let reeb = v.reeb()?;
        let (dak, dbl) = wedge_power_pair(&v, pair.k, pair.l)?;
        let vol = wedge_all(&[&v.alpha, &dak, &v.beta, &dbl])?.top_coeff().unwrap_or(0.0);
        let scale = v.scale(pair.k, pair.l);
        let mut worst = (0.0f64, 0.0f64);
        for w in omegas {
            let o = w.eval(p)?;
            let s = scale * o.norm_inf();
            let p1 = wedge_all(&[&o, &dak, &v.beta, &dbl])?.top_coeff().unwrap_or(0.0);
            let p2 = wedge_all(&[&o, &v.alpha, &dak, &dbl])?.top_coeff().unwrap_or(0.0);
            let d1 = relative((p1 - dot(&o, &reeb.fields[0]) * vol).abs(), s);
            let d2 = relative((p2 + dot(&o, &reeb.fields[1]) * vol).abs(), s);
            worst = (worst.0.max(d1), worst.1.max(d2));
        }
        Ok(worst)
    })?;
    Ok(per_point
        .iter()
        .fold((0.0f64, 0.0f64), |acc, w| (acc.0.max(w.0), acc.1.max(w.1))))
}

/// Maximum relative `|ω∧(dα)^k∧ω̄∧(dβ)^ℓ|`. With `project`, each form is first
/// replaced by `ω − ω(E_β) β` so that it vanishes on `E_β`.
pub fn lemma_p3_check(
    model: &ManifoldModel,
    pair: &ContactPair,
    inputs: &[(FormField, FormField)],
    project: bool,
    settings: &Settings,
) -> Result<f64> {
    let points = model.sample_points(&settings.sampling);
    let per_point = evaluate_all(&points, |p| {
        let v = pair.at(p)?;
        let e_beta = v.reeb()?.fields[1].clone();
        let (dak, dbl) = wedge_power_pair(&v, pair.k, pair.l)?;
        let base = dak.norm_inf() * dbl.norm_inf();
        let mut worst = 0.0f64;
        for (w, wb) in inputs {
            let mut o = w.eval(p)?;
            let mut ob = wb.eval(p)?;
            if project {
                o = o.axpy(-dot(&o, &e_beta), &v.beta)?;
                ob = ob.axpy(-dot(&ob, &e_beta), &v.beta)?;
            }
            let c = wedge_all(&[&o, &dak, &ob, &dbl])?.top_coeff().unwrap_or(0.0);
            worst = worst.max(relative(c.abs(), base * o.norm_inf() * ob.norm_inf()));
        }
        Ok(worst)
    })?;
    Ok(per_point.into_iter().fold(0.0, f64::max))
}

/// `(|∫ α₀∧(dα)^k∧β∧(dβ)^ℓ|, |∫ α∧(dα)^k∧β₀∧(dβ)^ℓ|)` by quadrature.
pub fn stokes_vanishing_check(family: &DeformationFamily) -> Result<(f64, f64)> {
    family.model.require_closed()?;
    let pair = family.base_pair()?;
    let integral = |left: bool| -> Result<f64> {
        family.model.integrate_density(|p| {
            let v = pair.at(p)?;
            if left {
                Ok(v.top(&family.alpha0.eval(p)?, &v.beta, pair.k, pair.l)?)
            } else {
                Ok(v.top(&v.alpha, &family.beta0.eval(p)?, pair.k, pair.l)?)
            }
        })
    };
    Ok((integral(true)?.abs(), integral(false)?.abs()))
}

fn compatibility_items(
    family: &DeformationFamily,
    points: &[Vec<f64>],
    e_alpha: &[VectorValue],
    e_beta: &[VectorValue],
    tol: f64,
) -> Result<Vec<CheckItem>> {
    let vals = evaluate_all(points, |p| Ok((family.alpha0.eval(p)?, family.beta0.eval(p)?)))?;
    let item = |name: &str, first: bool, fields: &[VectorValue]| {
        CheckItem::must_vanish(
            name,
            tol,
            points.iter().zip(&vals).zip(fields).map(|((p, (a0, b0)), e)| {
                let form = if first { a0 } else { b0 };
                Probe::new(p, None, relative(dot(form, e).abs(), form.norm_inf() * e.norm_inf()))
            }),
        )
    };
    Ok(vec![
        item("alpha0(E_alpha) = 0", true, e_alpha),
        item("alpha0(E_beta) = 0", true, e_beta),
        item("beta0(E_alpha) = 0", false, e_alpha),
        item("beta0(E_beta) = 0", false, e_beta),
    ])
}

fn fmt_t(t: f64) -> String {
    format!("t={t}: ")
}

/// Forward direction: a certified pair `(α, β)` plus the four compatibility
/// conditions imply that `(α_t, β_t)` is a contact pair with Reeb pair
/// `(E_α / t, E_β / t)` for every nonzero `t`.
pub fn verify_forward(family: &DeformationFamily, t_grid: &[f64], settings: &Settings) -> Result<TheoremVerdict> {
    let tol = settings.tol;
    let base = family.base_pair()?;
    let cert = assess_contact_pair(&family.model, &base, settings, None, "(alpha, beta): ")?;
    let points = &cert.reeb.points;
    let mut hypotheses = cert.checks.clone();
    hypotheses.extend(compatibility_items(family, points, &cert.reeb.e_alpha, &cert.reeb.e_beta, tol)?);

    let mut conclusions = Vec::new();
    for &t in t_grid {
        let prefix = fmt_t(t);
        if t == 0.0 {
            conclusions.push(CheckItem::skipped(format!("{prefix}contact pair"), "t = 0 is excluded"));
            continue;
        }
        let cert_t = assess_contact_pair(&family.model, &family.pair_at(t)?, settings, Some(t), &prefix)?;
        conclusions.extend(cert_t.checks.iter().cloned());
        for (name, solved, expected) in [
            ("t E_alpha_t = E_alpha", &cert_t.reeb.e_alpha, &cert.reeb.e_alpha),
            ("t E_beta_t = E_beta", &cert_t.reeb.e_beta, &cert.reeb.e_beta),
        ] {
            conclusions.push(CheckItem::must_vanish(
                format!("{prefix}{name}"),
                tol,
                points
                    .iter()
                    .zip(solved.iter().zip(expected))
                    .map(|(p, (s, e))| Probe::new(p, Some(t), s.scaled(t).dist_inf(e))),
            ));
        }
    }
    let omega = FormField::volume(family.dim());
    let samples: Vec<f64> = t_grid.iter().copied().filter(|t| *t != 0.0).collect();
    let (defect, witness) = volume_identity_defect(family, &omega, &samples, settings)?;
    let mut identity = CheckItem::scalar("polynomial identity defect", Sense::MustVanish, defect, tol);
    identity.worst = witness;
    Ok(TheoremVerdict::new(Direction::Forward, hypotheses, conclusions, vec![identity]))
}

/// Checks a converse `t` grid: positive, at least four values, spanning two decades.
pub fn check_converse_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 4 {
        return Err(DeformationError::TGrid(format!("need at least 4 values, got {}", t_grid.len())));
    }
    if let Some(t) = t_grid.iter().find(|t| !(**t > 0.0) || !t.is_finite()) {
        return Err(DeformationError::TGrid(format!("values must be positive, got {t}")));
    }
    let lo = t_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = t_grid.iter().copied().fold(0.0, f64::max);
    if hi / lo < 100.0 {
        return Err(DeformationError::TGrid(format!(
            "values must span two orders of magnitude, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// Converse direction: contact pairs `(α_t, β_t)` with Reeb pairs
/// `(X / t, Y / t)` force `(α, β)` to be a contact pair with Reeb pair
/// `(X, Y)` and the compatibility conditions. The scaling of the Reeb pairs is
/// an explicit hypothesis, detected as constancy of `t E_{α_t}` and `t E_{β_t}`.
pub fn verify_converse(family: &DeformationFamily, t_grid: &[f64], settings: &Settings) -> Result<TheoremVerdict> {
    check_converse_grid(t_grid)?;
    let tol = settings.tol;
    let mut hypotheses = Vec::new();
    let mut scaled: Vec<(f64, Vec<VectorValue>, Vec<VectorValue>)> = Vec::new();
    let mut points = Vec::new();
    for &t in t_grid {
        let cert_t = assess_contact_pair(&family.model, &family.pair_at(t)?, settings, Some(t), &fmt_t(t))?;
        hypotheses.extend(cert_t.checks.iter().cloned());
        points = cert_t.reeb.points.clone();
        scaled.push((
            t,
            cert_t.reeb.e_alpha.iter().map(|e| e.scaled(t)).collect(),
            cert_t.reeb.e_beta.iter().map(|e| e.scaled(t)).collect(),
        ));
    }
    // largest deviation of t E_t from its value at the first t
    let spread = |alpha: bool| -> Vec<Probe> {
        points
            .iter()
            .enumerate()
            .map(|(i, p)| {
                let first = if alpha { &scaled[0].1[i] } else { &scaled[0].2[i] };
                let worst = scaled
                    .iter()
                    .map(|(_, xa, xb)| if alpha { &xa[i] } else { &xb[i] }.dist_inf(first))
                    .fold(0.0, f64::max);
                Probe::new(p, None, worst)
            })
            .collect()
    };
    hypotheses.push(CheckItem::must_vanish("t E_alpha_t constant in t", tol, spread(true)));
    hypotheses.push(CheckItem::must_vanish("t E_beta_t constant in t", tol, spread(false)));

    let base = family.base_pair()?;
    let cert = assess_contact_pair(&family.model, &base, settings, None, "(alpha, beta): ")?;
    let mut conclusions = cert.checks.clone();
    let (x, y) = (&scaled[0].1, &scaled[0].2);
    conclusions.push(CheckItem::must_vanish(
        "E_alpha = X",
        tol,
        points
            .iter()
            .zip(cert.reeb.e_alpha.iter().zip(x))
            .map(|(p, (e, x))| Probe::new(p, None, e.dist_inf(x))),
    ));
    conclusions.push(CheckItem::must_vanish(
        "E_beta = Y",
        tol,
        points
            .iter()
            .zip(cert.reeb.e_beta.iter().zip(y))
            .map(|(p, (e, y))| Probe::new(p, None, e.dist_inf(y))),
    ));
    conclusions.extend(compatibility_items(family, &points, &cert.reeb.e_alpha, &cert.reeb.e_beta, tol)?);

    let omega = FormField::volume(family.dim());
    let abc = compute_abc(family, &omega, settings)?;
    let mut facts = vec![
        CheckItem::must_vanish(
            "max |C|",
            tol,
            abc.samples.iter().zip(&abc.c).map(|(p, c)| Probe::new(p, None, c.abs())),
        ),
        CheckItem::must_vanish(
            "max |B|",
            tol,
            abc.samples.iter().zip(&abc.b).map(|(p, b)| Probe::new(p, None, b.abs())),
        ),
        CheckItem::must_vanish(
            "B nonnegative",
            tol,
            abc.samples.iter().zip(&abc.b).map(|(p, b)| Probe::new(p, None, (-b).max(0.0))),
        ),
    ];
    if family.model.is_closed() {
        let (s0, s1) = stokes_vanishing_check(family)?;
        facts.push(CheckItem::scalar("|integral alpha0 part|", Sense::MustVanish, s0, tol));
        facts.push(CheckItem::scalar("|integral beta0 part|", Sense::MustVanish, s1, tol));
        let ib = family
            .model
            .integrate_density(|p| abc_at(family, &base, &omega, p).map(|v| v.b))?;
        facts.push(CheckItem::scalar("|integral B Omega|", Sense::MustVanish, ib.abs(), tol));
    } else {
        for name in ["|integral alpha0 part|", "|integral beta0 part|", "|integral B Omega|"] {
            facts.push(CheckItem::skipped(name, "model is not closed"));
        }
    }
    Ok(TheoremVerdict::new(Direction::Converse, hypotheses, conclusions, facts))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub t: f64,
    pub min_volume_coeff: f64,
    pub max_volume_coeff: f64,
    pub max_reeb_residual: f64,
}

/// Volume coefficient range and Reeb residual of `(α_t, β_t)` for each `t`.
pub fn sweep(family: &DeformationFamily, t_grid: &[f64], settings: &Settings) -> Result<Vec<SweepRow>> {
    let points = family.model.sample_points(&settings.sampling);
    t_grid
        .iter()
        .map(|&t| {
            let pair = family.pair_at(t)?;
            let vals = evaluate_all(&points, |p| {
                let v = pair.at(p)?;
                Ok((v.top(&v.alpha, &v.beta, pair.k, pair.l)?, v.reeb()?.residual))
            })?;
            Ok(SweepRow {
                t,
                min_volume_coeff: vals.iter().map(|v| v.0).fold(f64::INFINITY, f64::min),
                max_volume_coeff: vals.iter().map(|v| v.0).fold(f64::NEG_INFINITY, f64::max),
                max_reeb_residual: vals.iter().map(|v| v.1).fold(0.0, f64::max),
            })
        })
        .collect()
}

/// A random 1-form: constant coefficients on invariant axes, and short
/// trigonometric sums of chart coordinates otherwise.
pub fn random_one_form<R: Rng>(model: &ManifoldModel, rng: &mut R) -> FormField {
    let chart = model.chart_axes();
    let n = model.dim();
    FormField::one_form(
        (0..n)
            .map(|_| {
                let mut terms = vec![Expr::num(rng.random_range(-1.0..1.0))];
                if !chart.is_empty() {
                    for _ in 0..2 {
                        let a = chart[rng.random_range(0..chart.len())];
                        let phase = rng.random_range(0.0..std::f64::consts::TAU);
                        let c = rng.random_range(-1.0..1.0);
                        terms.push(Expr::cos(Expr::add(Expr::var(a), Expr::num(phase))).scale(c));
                    }
                    let (a, b) = (chart[rng.random_range(0..chart.len())], chart[rng.random_range(0..chart.len())]);
                    terms.push(Expr::mul(Expr::sin(Expr::var(a)), Expr::cos(Expr::var(b))).scale(rng.random_range(-1.0..1.0)));
                }
                Expr::sum(terms)
            })
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact::torus_contact_form;
    use crate::verdict::Verdict;

    fn heisenberg_family() -> (DeformationFamily, Settings) {
        let h = ManifoldModel::heisenberg3();
        let m = ManifoldModel::product(h.clone(), h).unwrap();
        let s = Settings::for_model(&m);
        let e = |i| FormField::basis_one_form(6, i);
        (DeformationFamily::new(m, e(0), e(3), e(2), e(5), 1, 1, &s).unwrap(), s)
    }

    #[test]
    fn heisenberg_abc() {
        let (f, s) = heisenberg_family();
        let abc = compute_abc(&f, &FormField::volume(6), &s).unwrap();
        assert_eq!((abc.min_a, abc.max_a), (1.0, 1.0));
        assert_eq!(abc.max_abs_b, 0.0);
        assert_eq!(abc.max_abs_c, 0.0);
    }

    #[test]
    fn heisenberg_forward_holds() {
        let (f, s) = heisenberg_family();
        let v = verify_forward(&f, &[-1.0, -0.1, 0.1, 1.0, 2.0], &s).unwrap();
        assert_eq!(v.verdict, Verdict::Holds, "{:#?}", v.first_failed_hypothesis());
    }

    #[test]
    fn family_at_zero_is_base() {
        let (f, _) = heisenberg_family();
        let (a, b) = f.family_at(0.0).unwrap();
        let p = [0.0; 6];
        assert_eq!(a.eval(&p).unwrap(), f.alpha0.eval(&p).unwrap());
        assert_eq!(b.eval(&p).unwrap(), f.beta0.eval(&p).unwrap());
    }

    #[test]
    fn rejects_non_closed_and_dependent_inputs() {
        let t3 = ManifoldModel::torus(3).unwrap();
        let m = ManifoldModel::product(t3.clone(), t3).unwrap();
        let s = Settings::for_model(&m);
        let a = torus_contact_form().pullback(0, 6).unwrap();
        let b = torus_contact_form().pullback(3, 6).unwrap();
        let dx = |i| FormField::basis_one_form(6, i);
        assert!(matches!(
            DeformationFamily::new(m.clone(), a.clone(), dx(3), a.clone(), b.clone(), 1, 1, &s),
            Err(DeformationError::NotClosed { which: "alpha0", .. })
        ));
        assert!(matches!(
            DeformationFamily::new(m, dx(0), dx(0), a, b, 1, 1, &s),
            Err(DeformationError::Dependent { .. })
        ));
    }

    #[test]
    fn converse_grid_preconditions() {
        assert!(check_converse_grid(&[0.01, 0.1, 1.0, 10.0]).is_ok());
        assert!(check_converse_grid(&[0.1, 1.0, 10.0]).is_err());
        assert!(check_converse_grid(&[-0.01, 0.1, 1.0, 10.0]).is_err());
        assert!(check_converse_grid(&[1.0, 2.0, 3.0, 4.0]).is_err());
    }
}
