//! Pointwise alternating multilinear algebra.
//!
//! A [`FormValue`] is the value of a differential `p`-form at a single
//! tangent space of an `n`-dimensional manifold, stored as one coefficient
//! per increasing multi-index in lexicographic order. Wedge products use
//! the determinant (shuffle) convention, so `dx^I(e_I) = 1` with no
//! factorial normalisation.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// Largest ambient dimension supported by the bitmask multi-index encoding.
pub const MAX_DIM: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExteriorError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("degree overflow: {p} + {q} exceeds dimension {n}")]
    DegreeOverflow { p: usize, q: usize, n: usize },
    #[error("degree {p} exceeds dimension {n}")]
    DegreeTooLarge { p: usize, n: usize },
    #[error("dimension {0} exceeds the supported maximum of {MAX_DIM}")]
    DimensionTooLarge(usize),
    #[error("cannot contract a 0-form")]
    ContractScalar,
    #[error("expected {expected} vectors, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("expected a 2-form, got degree {0}")]
    NotTwoForm(usize),
    #[error("coefficient count {got} does not match C({n},{p}) = {expected}")]
    CoefficientCount {
        n: usize,
        p: usize,
        expected: usize,
        got: usize,
    },
}

pub type Result<T> = std::result::Result<T, ExteriorError>;

/// Binomial coefficient `C(n, k)`; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// A strictly increasing set of axis indices, stored as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(u32);

impl MultiIndex {
    pub const EMPTY: MultiIndex = MultiIndex(0);

    pub fn from_mask(mask: u32) -> Self {
        MultiIndex(mask)
    }

    /// Builds a multi-index from strictly increasing entries; `None` otherwise.
    pub fn from_entries(entries: &[usize]) -> Option<Self> {
        let mut mask = 0u32;
        let mut prev: Option<usize> = None;
        for &e in entries {
            if e >= MAX_DIM || prev.is_some_and(|p| p >= e) {
                return None;
            }
            mask |= 1 << e;
            prev = Some(e);
        }
        Some(MultiIndex(mask))
    }

    pub fn single(axis: usize) -> Self {
        MultiIndex(1 << axis)
    }

    pub fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, axis: usize) -> bool {
        self.0 & (1 << axis) != 0
    }

    pub fn entries(self) -> impl Iterator<Item = usize> {
        let mut m = self.0;
        std::iter::from_fn(move || {
            if m == 0 {
                None
            } else {
                let i = m.trailing_zeros() as usize;
                m &= m - 1;
                Some(i)
            }
        })
    }

    /// Number of entries strictly below `axis`.
    pub fn count_below(self, axis: usize) -> usize {
        (self.0 & ((1u32 << axis) - 1)).count_ones() as usize
    }

    pub fn with(self, axis: usize) -> Self {
        MultiIndex(self.0 | (1 << axis))
    }

    pub fn without(self, axis: usize) -> Self {
        MultiIndex(self.0 & !(1 << axis))
    }

    /// Position of this index in the lexicographic enumeration of all
    /// multi-indices of the same length over `n` axes.
    pub fn rank(self, n: usize) -> usize {
        let p = self.len();
        let mut rank = 0;
        let mut next = 0;
        for (i, c) in self.entries().enumerate() {
            for j in next..c {
                rank += binomial(n - 1 - j, p - 1 - i);
            }
            next = c + 1;
        }
        rank
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.entries().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// Sign `(-1)^inv` of the permutation that sorts the concatenation `I ++ J`
/// of two disjoint multi-indices.
pub fn shuffle_sign(left: MultiIndex, right: MultiIndex) -> f64 {
    let mut inversions = 0usize;
    for j in right.entries() {
        inversions += left.len() - left.count_below(j);
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// All multi-indices of length `p` over `n` axes, in lexicographic order.
pub fn multi_indices(n: usize, p: usize) -> Vec<MultiIndex> {
    let mut out = Vec::with_capacity(binomial(n, p));
    if p > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..p).collect();
    loop {
        out.push(MultiIndex::from_entries(&idx).expect("increasing"));
        // advance to the next combination
        let mut i = p;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] < n - p + i {
                idx[i] += 1;
                for j in i + 1..p {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n > MAX_DIM {
        Err(ExteriorError::DimensionTooLarge(n))
    } else {
        Ok(())
    }
}

/// A tangent vector: `n` components in the model frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorValue(pub Vec<f64>);

impl VectorValue {
    pub fn zeros(n: usize) -> Self {
        VectorValue(vec![0.0; n])
    }

    pub fn basis(n: usize, axis: usize) -> Self {
        let mut v = vec![0.0; n];
        v[axis] = 1.0;
        VectorValue(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, s: f64) -> Self {
        VectorValue(self.0.iter().map(|x| x * s).collect())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn dist_inf(&self, other: &VectorValue) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// A bivector at one point, one coefficient per increasing pair `(i, j)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BivectorValue {
    n: usize,
    coeffs: Vec<f64>,
}

impl BivectorValue {
    pub fn zeros(n: usize) -> Self {
        BivectorValue {
            n,
            coeffs: vec![0.0; binomial(n, 2)],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `Λ^{ij}` with antisymmetry applied for `i > j`.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => {
                self.coeffs[MultiIndex::from_mask((1 << i) | (1 << j)).rank(self.n)]
            }
            std::cmp::Ordering::Greater => -self.get(j, i),
        }
    }

    /// Sets `Λ^{ij}` (and implicitly `Λ^{ji} = -Λ^{ij}`).
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert_ne!(i, j, "diagonal bivector entries are identically zero");
        let (a, b, v) = if i < j { (i, j, value) } else { (j, i, -value) };
        let r = MultiIndex::from_mask((1 << a) | (1 << b)).rank(self.n);
        self.coeffs[r] = v;
    }

    /// `Λ(θ, η)` for two covectors given by their components.
    pub fn pair(&self, theta: &[f64], eta: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                acc += self.get(i, j) * (theta[i] * eta[j] - theta[j] * eta[i]);
            }
        }
        acc
    }

    /// The vector `Λ(θ, ·)`.
    pub fn contract(&self, theta: &[f64]) -> VectorValue {
        let mut out = vec![0.0; self.n];
        for (j, o) in out.iter_mut().enumerate() {
            for (i, t) in theta.iter().enumerate() {
                *o += t * self.get(i, j);
            }
        }
        VectorValue(out)
    }
}

/// The value of a `p`-form at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FormValue {
    n: usize,
    p: usize,
    coeffs: Vec<f64>,
}

impl FormValue {
    pub fn zero(n: usize, p: usize) -> Result<Self> {
        check_dim(n)?;
        if p > n {
            return Err(ExteriorError::DegreeTooLarge { p, n });
        }
        Ok(FormValue {
            n,
            p,
            coeffs: vec![0.0; binomial(n, p)],
        })
    }

    pub fn scalar(n: usize, value: f64) -> Self {
        FormValue {
            n,
            p: 0,
            coeffs: vec![value],
        }
    }

    pub fn from_coeffs(n: usize, p: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_dim(n)?;
        if p > n {
            return Err(ExteriorError::DegreeTooLarge { p, n });
        }
        let expected = binomial(n, p);
        if coeffs.len() != expected {
            return Err(ExteriorError::CoefficientCount {
                n,
                p,
                expected,
                got: coeffs.len(),
            });
        }
        Ok(FormValue { n, p, coeffs })
    }

    /// The basis form `dx^I`.
    pub fn basis(n: usize, index: MultiIndex) -> Result<Self> {
        let mut f = FormValue::zero(n, index.len())?;
        f.coeffs[index.rank(n)] = 1.0;
        Ok(f)
    }

    /// A 1-form from its `n` components.
    pub fn covector(components: &[f64]) -> Self {
        FormValue {
            n: components.len(),
            p: 1,
            coeffs: components.to_vec(),
        }
    }

    /// `dx^0 ∧ … ∧ dx^{n-1}`.
    pub fn volume(n: usize) -> Result<Self> {
        FormValue::from_coeffs(n, n, vec![1.0])
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.p
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, index: MultiIndex) -> f64 {
        debug_assert_eq!(index.len(), self.p);
        self.coeffs[index.rank(self.n)]
    }

    /// Coefficient of the coordinate volume element; `None` unless top degree.
    pub fn top_coeff(&self) -> Option<f64> {
        (self.p == self.n).then(|| self.coeffs[0])
    }

    pub fn terms(&self) -> impl Iterator<Item = (MultiIndex, f64)> + '_ {
        multi_indices(self.n, self.p)
            .into_iter()
            .zip(self.coeffs.iter().copied())
    }

    pub fn norm_inf(&self) -> f64 {
        norm_inf(self)
    }

    pub fn scaled(&self, s: f64) -> Self {
        FormValue {
            n: self.n,
            p: self.p,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &FormValue) -> Result<Self> {
        self.same_shape(other)?;
        Ok(FormValue {
            n: self.n,
            p: self.p,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &FormValue) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &FormValue) -> Result<Self> {
        self.add(&other.scaled(s))
    }

    fn same_shape(&self, other: &FormValue) -> Result<()> {
        if self.n != other.n {
            return Err(ExteriorError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        if self.p != other.p {
            return Err(ExteriorError::DegreeOverflow {
                p: self.p,
                q: other.p,
                n: self.n,
            });
        }
        Ok(())
    }

    /// Applies a 1-form to a vector.
    pub fn apply(&self, v: &VectorValue) -> Result<f64> {
        evaluate(self, std::slice::from_ref(v))
    }
}

/// `ω ∧ η` under the shuffle convention.
pub fn wedge(omega: &FormValue, eta: &FormValue) -> Result<FormValue> {
    if omega.n != eta.n {
        return Err(ExteriorError::DimensionMismatch {
            left: omega.n,
            right: eta.n,
        });
    }
    let n = omega.n;
    let (p, q) = (omega.p, eta.p);
    if p + q > n {
        return Err(ExteriorError::DegreeOverflow { p, q, n });
    }
    let left = multi_indices(n, p);
    let right = multi_indices(n, q);
    let mut out = FormValue::zero(n, p + q)?;
    for (i, &a) in left.iter().enumerate() {
        let ca = omega.coeffs[i];
        if ca == 0.0 {
            continue;
        }
        for (j, &b) in right.iter().enumerate() {
            let cb = eta.coeffs[j];
            if cb == 0.0 || a.mask() & b.mask() != 0 {
                continue;
            }
            let joined = MultiIndex::from_mask(a.mask() | b.mask());
            out.coeffs[joined.rank(n)] += shuffle_sign(a, b) * ca * cb;
        }
    }
    Ok(out)
}

/// Wedge of a sequence of factors, left to right.
pub fn wedge_all(factors: &[&FormValue]) -> Result<FormValue> {
    let (first, rest) = factors
        .split_first()
        .expect("wedge_all needs at least one factor");
    rest.iter().try_fold((*first).clone(), |acc, f| wedge(&acc, f))
}

/// Contraction `i_X ω`.
pub fn interior(x: &VectorValue, omega: &FormValue) -> Result<FormValue> {
    if x.dim() != omega.n {
        return Err(ExteriorError::DimensionMismatch {
            left: x.dim(),
            right: omega.n,
        });
    }
    if omega.p == 0 {
        return Err(ExteriorError::ContractScalar);
    }
    let n = omega.n;
    let mut out = FormValue::zero(n, omega.p - 1)?;
    for (index, c) in omega.terms() {
        if c == 0.0 {
            continue;
        }
        for (pos, a) in index.entries().enumerate() {
            let xa = x.0[a];
            if xa == 0.0 {
                continue;
            }
            let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
            out.coeffs[index.without(a).rank(n)] += sign * xa * c;
        }
    }
    Ok(out)
}

/// Full evaluation `ω(v_1, …, v_p)`.
pub fn evaluate(omega: &FormValue, vectors: &[VectorValue]) -> Result<f64> {
    if vectors.len() != omega.p {
        return Err(ExteriorError::Arity {
            expected: omega.p,
            got: vectors.len(),
        });
    }
    let mut acc = omega.clone();
    for v in vectors {
        acc = interior(v, &acc)?;
    }
    Ok(acc.coeffs[0])
}

/// `ω^k` for a 2-form; `k = 0` gives the scalar 1.
pub fn wedge_power(omega: &FormValue, k: usize) -> Result<FormValue> {
    if omega.p != 2 {
        return Err(ExteriorError::NotTwoForm(omega.p));
    }
    if 2 * k > omega.n {
        return Err(ExteriorError::DegreeOverflow {
            p: 2 * k,
            q: 0,
            n: omega.n,
        });
    }
    let mut acc = FormValue::scalar(omega.n, 1.0);
    for _ in 0..k {
        acc = wedge(&acc, omega)?;
    }
    Ok(acc)
}

/// Largest absolute coefficient.
pub fn norm_inf(omega: &FormValue) -> f64 {
    omega.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
}

/// Components `(i_X ω)_j` of a 2-form contracted with `X`, as a row operator:
/// returns the `n × n` matrix `M` with `(i_X ω)_j = Σ_i M[j][i] X^i`.
pub fn contraction_matrix(omega: &FormValue) -> Result<Vec<Vec<f64>>> {
    if omega.p != 2 {
        return Err(ExteriorError::NotTwoForm(omega.p));
    }
    let n = omega.n;
    let mut m = vec![vec![0.0; n]; n];
    for (index, c) in omega.terms() {
        let mut e = index.entries();
        let (a, b) = (e.next().unwrap(), e.next().unwrap());
        // ω = c dx^a∧dx^b: (i_X ω)_b = c X^a, (i_X ω)_a = -c X^b
        m[b][a] += c;
        m[a][b] -= c;
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(n: usize, i: usize) -> FormValue {
        FormValue::basis(n, MultiIndex::single(i)).unwrap()
    }

    #[test]
    fn lexicographic_rank_matches_enumeration() {
        for n in 0..8 {
            for p in 0..=n {
                let all = multi_indices(n, p);
                assert_eq!(all.len(), binomial(n, p));
                for (i, m) in all.iter().enumerate() {
                    assert_eq!(m.rank(n), i);
                }
                for w in all.windows(2) {
                    let a: Vec<_> = w[0].entries().collect();
                    let b: Vec<_> = w[1].entries().collect();
                    assert!(a < b);
                }
            }
        }
    }

    #[test]
    fn basis_wedges() {
        let w = wedge(&e(3, 0), &e(3, 1)).unwrap();
        assert_eq!(w.coeffs(), &[1.0, 0.0, 0.0]);
        let v = wedge(&e(3, 1), &e(3, 0)).unwrap();
        assert_eq!(v.coeffs(), &[-1.0, 0.0, 0.0]);
    }

    #[test]
    fn contact_form_wedge_area_element() {
        // (dz + x dy) ∧ (dx ∧ dy) at x = 0.7
        let alpha = FormValue::covector(&[0.0, 0.7, 1.0]);
        let dxdy = wedge(&e(3, 0), &e(3, 1)).unwrap();
        let w = wedge(&alpha, &dxdy).unwrap();
        assert_eq!(w.top_coeff(), Some(1.0));
    }

    #[test]
    fn interior_examples() {
        let dz = VectorValue::basis(3, 2);
        let alpha = FormValue::covector(&[0.0, 2.0, 1.0]);
        let c = interior(&dz, &alpha).unwrap();
        assert_eq!(c.degree(), 0);
        assert_eq!(c.coeffs(), &[1.0]);
        let dxdy = wedge(&e(3, 0), &e(3, 1)).unwrap();
        assert_eq!(interior(&dz, &dxdy).unwrap().norm_inf(), 0.0);
        assert_eq!(
            interior(&dz, &FormValue::scalar(3, 1.0)),
            Err(ExteriorError::ContractScalar)
        );
    }

    #[test]
    fn evaluate_examples() {
        let w = wedge(&e(2, 0), &e(2, 1)).unwrap();
        let (e0, e1) = (VectorValue::basis(2, 0), VectorValue::basis(2, 1));
        assert_eq!(evaluate(&w, &[e0.clone(), e1.clone()]).unwrap(), 1.0);
        assert_eq!(evaluate(&w, &[e1.clone(), e0]).unwrap(), -1.0);
        assert!(matches!(
            evaluate(&w, &[e1]),
            Err(ExteriorError::Arity { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn wedge_power_examples() {
        let dxdy = wedge(&e(3, 0), &e(3, 1)).unwrap();
        assert_eq!(wedge_power(&dxdy, 1).unwrap(), dxdy);
        assert_eq!(wedge_power(&dxdy, 0).unwrap().coeffs(), &[1.0]);
        assert!(wedge_power(&dxdy, 2).is_err());
        assert!(matches!(
            wedge_power(&e(3, 0), 1),
            Err(ExteriorError::NotTwoForm(1))
        ));
    }

    #[test]
    fn degree_overflow_is_an_error() {
        let dxdy = wedge(&e(3, 0), &e(3, 1)).unwrap();
        assert!(matches!(
            wedge(&dxdy, &dxdy),
            Err(ExteriorError::DegreeOverflow { p: 2, q: 2, n: 3 })
        ));
        assert!(wedge(&e(3, 0), &e(4, 0)).is_err());
    }

    #[test]
    fn norm_inf_examples() {
        assert_eq!(FormValue::zero(4, 2).unwrap().norm_inf(), 0.0);
        assert_eq!(FormValue::covector(&[0.0, 2.0, 1.0]).norm_inf(), 2.0);
    }

    #[test]
    fn bivector_storage_is_antisymmetric() {
        let mut b = BivectorValue::zeros(4);
        b.set(2, 1, 3.0);
        assert_eq!(b.get(1, 2), -3.0);
        assert_eq!(b.get(2, 1), 3.0);
        assert_eq!(b.get(3, 3), 0.0);
        assert_eq!(b.pair(&[0.0, 1.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0]), -3.0);
    }

    #[test]
    fn contraction_matrix_agrees_with_interior() {
        let omega = FormValue::from_coeffs(3, 2, vec![0.5, -1.5, 2.0]).unwrap();
        let m = contraction_matrix(&omega).unwrap();
        let x = VectorValue(vec![0.3, -0.2, 1.1]);
        let direct = interior(&x, &omega).unwrap();
        for j in 0..3 {
            let via: f64 = (0..3).map(|i| m[j][i] * x.0[i]).sum();
            assert!((via - direct.coeffs()[j]).abs() < 1e-15);
        }
    }
}
