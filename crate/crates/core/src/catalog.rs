//! Named built-in models, forms, pairs and deformation families.

use serde::Serialize;
use thiserror::Error;

use crate::contact::{darboux_model, torus_contact_form, ContactError, Settings};
use crate::deformation::{DeformationError, DeformationFamily};
use crate::manifold::{FormField, ManifoldModel, ModelError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogError {
    #[error("unknown example `{0}`")]
    Unknown(String),
    #[error("darboux(k) needs 1 <= k <= 15, got {0}")]
    DarbouxOrder(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Contact(#[from] ContactError),
    #[error(transparent)]
    Deformation(#[from] DeformationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ExampleKind {
    /// A single contact form.
    Form,
    /// A closed form and a contact form on an odd-dimensional model.
    SingleDeformation,
    /// A contact pair.
    Pair,
    /// A linear deformation family `(α₀, β₀, α, β)`.
    Family,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExampleInfo {
    pub name: &'static str,
    pub kind: ExampleKind,
    pub dim: usize,
    /// `(k, ℓ)` for pairs and families, `(k, 0)` for single forms.
    pub pair_type: (usize, usize),
    pub description: &'static str,
}

const REGISTRY: &[ExampleInfo] = &[
    ExampleInfo {
        name: "darboux(k)",
        kind: ExampleKind::Form,
        dim: 3,
        pair_type: (1, 0),
        description: "dz + sum x_i dy_i on the box [-1,1]^(2k+1); dimension 2k+1 (listed for k = 1)",
    },
    ExampleInfo {
        name: "torus-contact",
        kind: ExampleKind::SingleDeformation,
        dim: 3,
        pair_type: (1, 0),
        description: "T^3 with alpha0 = dx0 and alpha = cos(x0) dx1 + sin(x0) dx2",
    },
    ExampleInfo {
        name: "heisenberg3",
        kind: ExampleKind::Form,
        dim: 3,
        pair_type: (1, 0),
        description: "Heisenberg algebra [e0,e1] = e2 with the invariant contact form e2*",
    },
    ExampleInfo {
        name: "heisenberg6-pair",
        kind: ExampleKind::Family,
        dim: 6,
        pair_type: (1, 1),
        description: "product of two Heisenberg groups: alpha0 = e0*, beta0 = f0*, alpha = e2*, beta = f2*",
    },
    ExampleInfo {
        name: "t6-pair-compatible",
        kind: ExampleKind::Family,
        dim: 6,
        pair_type: (1, 1),
        description: "T^3 x T^3 torus contact forms with alpha0 = dx0 (left), beta0 = dx3 (right)",
    },
    ExampleInfo {
        name: "t6-pair-incompatible",
        kind: ExampleKind::Family,
        dim: 6,
        pair_type: (1, 1),
        description: "T^3 x T^3 torus contact forms with alpha0 = dx1 (left), beta0 = dx3; alpha0(E_alpha) = cos(x0)",
    },
    ExampleInfo {
        name: "t2-pair-type00",
        kind: ExampleKind::Pair,
        dim: 2,
        pair_type: (0, 0),
        description: "T^2 with the closed pair (dx0, dx1)",
    },
    ExampleInfo {
        name: "darboux6-pair",
        kind: ExampleKind::Family,
        dim: 6,
        pair_type: (1, 1),
        description: "product of two darboux(1) boxes: alpha0 = dx0, beta0 = dx3, product contact pair",
    },
];

/// Registry entries whose name contains `filter` (all entries for an empty filter).
pub fn list_examples(filter: &str) -> Vec<ExampleInfo> {
    REGISTRY
        .iter()
        .filter(|e| e.name.contains(filter))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Example {
    Form {
        model: ManifoldModel,
        alpha: FormField,
    },
    SingleDeformation {
        model: ManifoldModel,
        alpha0: FormField,
        alpha: FormField,
    },
    Pair {
        model: ManifoldModel,
        alpha: FormField,
        beta: FormField,
        k: usize,
        l: usize,
    },
    Family(Box<DeformationFamily>),
}

impl Example {
    pub fn model(&self) -> &ManifoldModel {
        match self {
            Example::Form { model, .. }
            | Example::SingleDeformation { model, .. }
            | Example::Pair { model, .. } => model,
            Example::Family(f) => &f.model,
        }
    }
}

fn parse_darboux(name: &str) -> Option<usize> {
    let inner = name.strip_prefix("darboux(")?.strip_suffix(')')?;
    inner.trim().parse().ok()
}

fn torus_product() -> Result<ManifoldModel, CatalogError> {
    Ok(ManifoldModel::product(ManifoldModel::torus(3)?, ManifoldModel::torus(3)?)?)
}

fn family(
    model: ManifoldModel,
    alpha0: FormField,
    beta0: FormField,
    alpha: FormField,
    beta: FormField,
) -> Result<Example, CatalogError> {
    let settings = Settings::for_model(&model);
    Ok(Example::Family(Box::new(DeformationFamily::new(
        model, alpha0, beta0, alpha, beta, 1, 1, &settings,
    )?)))
}

/// Builds a registry entry; `darboux(k)` takes any order `k >= 1`.
pub fn example(name: &str) -> Result<Example, CatalogError> {
    if let Some(k) = parse_darboux(name) {
        if !(1..=15).contains(&k) {
            return Err(CatalogError::DarbouxOrder(k));
        }
        let (model, alpha) = darboux_model(k)?;
        return Ok(Example::Form { model, alpha });
    }
    let dx = |n: usize, i: usize| FormField::basis_one_form(n, i);
    match name {
        "torus-contact" => Ok(Example::SingleDeformation {
            model: ManifoldModel::torus(3)?,
            alpha0: dx(3, 0),
            alpha: torus_contact_form(),
        }),
        "heisenberg3" => Ok(Example::Form {
            model: ManifoldModel::heisenberg3(),
            alpha: dx(3, 2),
        }),
        "heisenberg6-pair" => {
            let h = ManifoldModel::heisenberg3();
            family(ManifoldModel::product(h.clone(), h)?, dx(6, 0), dx(6, 3), dx(6, 2), dx(6, 5))
        }
        "t6-pair-compatible" | "t6-pair-incompatible" => {
            let a0 = if name == "t6-pair-compatible" { 0 } else { 1 };
            family(
                torus_product()?,
                dx(6, a0),
                dx(6, 3),
                torus_contact_form().pullback(0, 6)?,
                torus_contact_form().pullback(3, 6)?,
            )
        }
        "t2-pair-type00" => Ok(Example::Pair {
            model: ManifoldModel::torus(2)?,
            alpha: dx(2, 0),
            beta: dx(2, 1),
            k: 0,
            l: 0,
        }),
        "darboux6-pair" => {
            let (d, a) = darboux_model(1)?;
            family(
                ManifoldModel::product(d.clone(), d)?,
                dx(6, 0),
                dx(6, 3),
                a.pullback(0, 6)?,
                a.pullback(3, 6)?,
            )
        }
        other => Err(CatalogError::Unknown(other.to_string())),
    }
}
