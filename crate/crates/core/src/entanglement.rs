//! Entanglement certification from covariance matrices.
//!
//! Two families of tests are provided: the PPT test (partial time reversal
//! plus symplectic spectrum) and variance inequalities of the Duan and
//! van Loock–Furusawa type, which only need second moments of collective
//! quadratures.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dynamics::{rotate_frame, FrameRotation};
use crate::error::{Error, Result};
use crate::linalg;
use crate::scalar::Real;
use crate::state::{p_index, x_index, GaussianState};

/// A split of all modes of a state into two nonempty sides.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub side_a: Vec<String>,
    pub side_b: Vec<String>,
}

impl Bipartition {
    pub fn new<S: Into<String>>(
        side_a: impl IntoIterator<Item = S>,
        side_b: impl IntoIterator<Item = S>,
    ) -> Self {
        Self {
            side_a: side_a.into_iter().map(Into::into).collect(),
            side_b: side_b.into_iter().map(Into::into).collect(),
        }
    }

    pub fn swapped(&self) -> Self {
        Self {
            side_a: self.side_b.clone(),
            side_b: self.side_a.clone(),
        }
    }

    /// Every bipartition of `ids`, each listed once (the first id always on
    /// side A). Four modes give seven splits.
    pub fn all(ids: &[&str]) -> Vec<Self> {
        let n = ids.len();
        if n < 2 {
            return Vec::new();
        }
        (1..(1u64 << (n - 1)))
            .map(|mask| {
                let mut a = vec![ids[0].to_string()];
                let mut b = Vec::new();
                for (k, id) in ids.iter().enumerate().skip(1) {
                    if mask & (1 << (k - 1)) != 0 {
                        b.push(id.to_string());
                    } else {
                        a.push(id.to_string());
                    }
                }
                Self { side_a: a, side_b: b }
            })
            .collect()
    }

    /// Checks the split against a state and returns the mode indices of
    /// side B.
    fn validate<T: Real>(&self, s: &GaussianState<T>) -> Result<Vec<usize>> {
        if self.side_a.is_empty() || self.side_b.is_empty() {
            return Err(Error::Partition("both sides must be nonempty".into()));
        }
        let mut seen = HashSet::new();
        for id in self.side_a.iter().chain(&self.side_b) {
            s.index_of(id)?;
            if !seen.insert(id.as_str()) {
                return Err(Error::Partition(format!("mode `{id}` listed twice")));
            }
        }
        if seen.len() != s.n_modes() {
            return Err(Error::Partition(format!(
                "covers {} of {} modes",
                seen.len(),
                s.n_modes()
            )));
        }
        self.side_b.iter().map(|id| s.index_of(id)).collect()
    }
}

/// `γ̃ = ΛγΛ` with momenta of side B sign-flipped.
pub fn partial_time_reversal<T: Real>(s: &GaussianState<T>, part: &Bipartition) -> Result<DMatrix<T>> {
    let flipped = part.validate(s)?;
    let mut lambda = DVector::from_element(s.dim(), T::one());
    for k in flipped {
        lambda[p_index(k)] = -T::one();
    }
    let l = DMatrix::from_diagonal(&lambda);
    Ok(&l * s.cov() * &l)
}

/// Symplectic eigenvalues (moduli of the eigenvalues of `iJγ`), ascending.
pub fn symplectic_spectrum<T: Real>(gamma: &DMatrix<T>) -> Result<Vec<T>> {
    let dim = gamma.nrows();
    if dim == 0 || !dim.is_multiple_of(2) || gamma.ncols() != dim {
        return Err(Error::Dimension { expected: dim + dim % 2, got: gamma.ncols() });
    }
    let asym = linalg::max_asymmetry(gamma);
    if asym > T::symmetry_tol() * linalg::max_abs(gamma).max(T::one()) {
        return Err(Error::NotSymmetric(asym.as_f64()));
    }
    // γ^{1/2} J γ^{1/2} is antisymmetric with eigenvalues ±iν, so its
    // Gram matrix has every ν² twice.
    let root = linalg::sqrt_spd(gamma)?;
    let j = linalg::symplectic_form::<T>(dim / 2);
    let m = &root * j * &root;
    let gram = m.transpose() * &m;
    let mut sq: Vec<T> = SymmetricEigen::new(gram).eigenvalues.iter().copied().collect();
    sq.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
    let half = T::lit(0.5);
    Ok(sq
        .chunks(2)
        .map(|pair| ((pair[0] + pair[1]) * half).max(T::zero()).sqrt())
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EntanglementVerdict<T> {
    pub partition: Bipartition,
    pub min_pt_symplectic_eig: T,
    pub log_negativity: T,
    pub entangled: bool,
    /// Smallest eigenvalue within tolerance of 1: reported as not entangled.
    pub boundary: bool,
}

pub fn ppt_test<T: Real>(s: &GaussianState<T>, part: &Bipartition) -> Result<EntanglementVerdict<T>> {
    let pt = partial_time_reversal(s, part)?;
    let spectrum = symplectic_spectrum(&pt)?;
    let tol = T::boundary_tol();
    let min = spectrum[0];
    let log_negativity = spectrum
        .iter()
        .filter(|&&nu| nu < T::one())
        .fold(T::zero(), |acc, &nu| acc - nu.ln());
    Ok(EntanglementVerdict {
        partition: part.clone(),
        min_pt_symplectic_eig: min,
        log_negativity,
        entangled: min < T::one() - tol,
        boundary: (min - T::one()).abs() <= tol,
    })
}

/// PPT verdicts for every bipartition of the state's modes.
pub fn ppt_all<T: Real>(s: &GaussianState<T>) -> Result<Vec<EntanglementVerdict<T>>> {
    let ids: Vec<&str> = s.modes().iter().map(|m| m.id.as_str()).collect();
    Bipartition::all(&ids).iter().map(|p| ppt_test(s, p)).collect()
}

/// `Var(|λ|p₁ + p₂/λ) + Var(|λ|x₁ − x₂/λ)` in units of ħ. Separable states
/// give at least 2.
pub fn duan_sum<T: Real>(s: &GaussianState<T>, pair: (&str, &str), lambda: T) -> Result<T> {
    if lambda == T::zero() || !lambda.is_finite() {
        return Err(Error::Domain("lambda must be finite and nonzero".into()));
    }
    let (a, b) = (s.index_of(pair.0)?, s.index_of(pair.1)?);
    if a == b {
        return Err(Error::Domain("duan pair must name two distinct modes".into()));
    }
    let mut u = DVector::zeros(s.dim());
    u[p_index(a)] = lambda.abs();
    u[p_index(b)] = T::one() / lambda;
    let mut v = DVector::zeros(s.dim());
    v[x_index(a)] = lambda.abs();
    v[x_index(b)] = -T::one() / lambda;
    Ok(s.variance_of(&u)? + s.variance_of(&v)?)
}

/// Variance inequality `Var(Σ hₖ Xₖ) + Var(Σ gₖ Pₖ) ≥ f` over the first
/// `N` modes of a state.
///
/// `(Xₖ, Pₖ)` are the mode's own quadratures, except on modes listed in
/// `exchanged`, where `(Xₖ, Pₖ) = (pₖ, −xₖ)`. The local exchange does not
/// change separability, so the bound is unaffected.
#[derive(Debug, Clone, PartialEq)]
pub struct VarianceCriterion<T> {
    pub h: Vec<T>,
    pub g: Vec<T>,
    pub distinguished: (usize, usize),
    pub groups: (Vec<usize>, Vec<usize>),
    pub exchanged: Vec<usize>,
}

impl<T: Real> VarianceCriterion<T> {
    fn validate(&self) -> Result<()> {
        let n = self.h.len();
        if self.g.len() != n {
            return Err(Error::Criterion(format!("h has {n} entries, g has {}", self.g.len())));
        }
        let (l, m) = self.distinguished;
        let mut seen = HashSet::new();
        for &k in [l, m].iter().chain(&self.groups.0).chain(&self.groups.1) {
            if k >= n {
                return Err(Error::Criterion(format!("mode index {k} out of range")));
            }
            if !seen.insert(k) {
                return Err(Error::Criterion(format!("mode index {k} appears in both groups")));
            }
        }
        if let Some(&k) = self.exchanged.iter().find(|&&k| k >= n) {
            return Err(Error::Criterion(format!("exchanged index {k} out of range")));
        }
        Ok(())
    }
}

/// `f = |h_l g_l + Σ_I h_r g_r| + |h_m g_m + Σ_I′ h_s g_s|`.
pub fn vlf_bound<T: Real>(c: &VarianceCriterion<T>) -> Result<T> {
    c.validate()?;
    let side = |d: usize, group: &[usize]| {
        group
            .iter()
            .fold(c.h[d] * c.g[d], |acc, &k| acc + c.h[k] * c.g[k])
            .abs()
    };
    Ok(side(c.distinguished.0, &c.groups.0) + side(c.distinguished.1, &c.groups.1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum VlfVerdict<T> {
    SeparableConsistent { lhs: T, bound: T },
    Entangled { lhs: T, bound: T, violation: T },
}

impl<T: Copy> VlfVerdict<T> {
    pub fn lhs(&self) -> T {
        match *self {
            VlfVerdict::SeparableConsistent { lhs, .. } | VlfVerdict::Entangled { lhs, .. } => lhs,
        }
    }

    pub fn is_violated(&self) -> bool {
        matches!(self, VlfVerdict::Entangled { .. })
    }
}

/// Left-hand side `Var(u) + Var(v)` of a criterion on state `s`.
pub fn vlf_lhs<T: Real>(s: &GaussianState<T>, c: &VarianceCriterion<T>) -> Result<T> {
    c.validate()?;
    if c.h.len() > s.n_modes() {
        return Err(Error::Dimension { expected: s.n_modes(), got: c.h.len() });
    }
    let mut u = DVector::zeros(s.dim());
    let mut v = DVector::zeros(s.dim());
    for k in 0..c.h.len() {
        if c.exchanged.contains(&k) {
            u[p_index(k)] = c.h[k];
            v[x_index(k)] = -c.g[k];
        } else {
            u[x_index(k)] = c.h[k];
            v[p_index(k)] = c.g[k];
        }
    }
    Ok(s.variance_of(&u)? + s.variance_of(&v)?)
}

pub fn vlf_test<T: Real>(s: &GaussianState<T>, c: &VarianceCriterion<T>) -> Result<VlfVerdict<T>> {
    let lhs = vlf_lhs(s, c)?;
    let bound = vlf_bound(c)?;
    Ok(if lhs < bound {
        VlfVerdict::Entangled { lhs, bound, violation: bound - lhs }
    } else {
        VlfVerdict::SeparableConsistent { lhs, bound }
    })
}

/// The three inequalities certifying full inseparability of the 4-mode
/// linear cluster, written in the primed frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClusterInequality {
    /// `Var(p′₁ − x′₂) + Var(p′₂ − x′₁ − x′₃)`
    Delta1,
    /// `Var(p′₃ − x′₂ − x′₄) + Var(p′₂ − x′₁ − x′₃)`
    Delta2,
    /// `Var(p′₃ − x′₂ − x′₄) + Var(p′₄ − x′₃)`
    Delta3,
}

impl ClusterInequality {
    pub const ALL: [ClusterInequality; 3] = [Self::Delta1, Self::Delta2, Self::Delta3];

    pub fn name(self) -> &'static str {
        match self {
            Self::Delta1 => "delta1",
            Self::Delta2 => "delta2",
            Self::Delta3 => "delta3",
        }
    }

    pub fn criterion<T: Real>(self) -> VarianceCriterion<T> {
        let v = |xs: [f64; 4]| xs.iter().map(|&x| T::lit(x)).collect::<Vec<T>>();
        match self {
            Self::Delta1 => VarianceCriterion {
                h: v([1.0, -1.0, 0.0, 0.0]),
                g: v([1.0, 1.0, 1.0, 0.0]),
                distinguished: (0, 1),
                groups: (vec![], vec![2, 3]),
                exchanged: vec![0, 2],
            },
            Self::Delta2 => VarianceCriterion {
                h: v([0.0, -1.0, 1.0, -1.0]),
                g: v([1.0, 1.0, 1.0, 0.0]),
                distinguished: (1, 2),
                groups: (vec![0], vec![3]),
                exchanged: vec![0, 2],
            },
            Self::Delta3 => VarianceCriterion {
                h: v([0.0, 0.0, -1.0, 1.0]),
                g: v([0.0, 1.0, 1.0, 1.0]),
                distinguished: (2, 3),
                groups: (vec![0, 1], vec![]),
                exchanged: vec![1, 3],
            },
        }
    }
}

/// Evaluates a cluster inequality on four lab-frame modes: rotates them to
/// the primed frame, then applies the criterion in the listed order.
pub fn cluster_test<T: Real>(
    s: &GaussianState<T>,
    ids: [&str; 4],
    which: ClusterInequality,
) -> Result<VlfVerdict<T>> {
    let primed = rotate_frame(&FrameRotation::to_primed(ids), &s.reduce_to(&ids)?)?;
    vlf_test(&primed, &which.criterion())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::ModeLabel;

    fn vacuum(n: usize) -> GaussianState<f64> {
        GaussianState::vacuum((1..=n).map(|k| ModeLabel::atomic(format!("A{k}"))).collect()).unwrap()
    }

    fn diag(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_vec(v.to_vec()))
    }

    #[test]
    fn spectrum_examples() {
        let ones = symplectic_spectrum(&DMatrix::<f64>::identity(6, 6)).unwrap();
        assert!(ones.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert_eq!(ones.len(), 3);
        let th = symplectic_spectrum(&diag(&[2.5, 2.5])).unwrap();
        assert!((th[0] - 2.5).abs() < 1e-12);
        let sq = symplectic_spectrum(&diag(&[0.5, 2.0])).unwrap();
        assert!((sq[0] - 1.0).abs() < 1e-12);
        assert!(symplectic_spectrum(&diag(&[1.0, -1.0])).is_err());
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(symplectic_spectrum(&asym), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn bipartition_enumeration() {
        let parts = Bipartition::all(&["A", "B", "C", "D"]);
        assert_eq!(parts.len(), 7);
        assert!(parts.iter().all(|p| p.side_a.contains(&"A".to_string())));
        assert_eq!(Bipartition::all(&["A", "B"]).len(), 1);
    }

    #[test]
    fn invalid_partitions() {
        let s = vacuum(3);
        let bad = [
            Bipartition::new(["A1"], ["A2"]),
            Bipartition::new(["A1", "A2"], ["A2", "A3"]),
            Bipartition::new(Vec::<String>::new(), vec!["A1".into(), "A2".into(), "A3".into()]),
        ];
        for p in &bad {
            assert!(matches!(ppt_test(&s, p), Err(Error::Partition(_))));
        }
        assert!(matches!(
            ppt_test(&s, &Bipartition::new(["A1", "A2"], ["Z"])),
            Err(Error::UnknownMode(_))
        ));
    }

    #[test]
    fn pt_is_an_involution_and_product_states_are_ppt() {
        let s = vacuum(2);
        let part = Bipartition::new(["A1"], ["A2"]);
        let pt = partial_time_reversal(&s, &part).unwrap();
        let twice = GaussianState::new(s.modes().to_vec(), pt, DVector::zeros(4)).unwrap();
        assert_eq!(partial_time_reversal(&twice, &part).unwrap(), *s.cov());
        let v = ppt_test(&s, &part).unwrap();
        assert!(!v.entangled);
        assert!(v.boundary);
        assert_eq!(v.log_negativity, 0.0);
    }

    #[test]
    fn duan_on_vacuum_is_two() {
        let s = vacuum(2);
        assert!((duan_sum(&s, ("A1", "A2"), 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!((duan_sum(&s, ("A1", "A2"), -3.0).unwrap() - (9.0 + 1.0 / 9.0)).abs() < 1e-12);
        assert!(duan_sum(&s, ("A1", "A2"), 0.0).is_err());
        assert!(duan_sum(&s, ("A1", "A1"), 1.0).is_err());
    }

    #[test]
    fn vlf_bounds() {
        let two = VarianceCriterion {
            h: vec![1.0, -1.0],
            g: vec![1.0, 1.0],
            distinguished: (0, 1),
            groups: (vec![], vec![]),
            exchanged: vec![],
        };
        assert_eq!(vlf_bound(&two).unwrap(), 2.0);
        let zero_g = VarianceCriterion { g: vec![0.0, 0.0], ..two.clone() };
        assert_eq!(vlf_bound(&zero_g).unwrap(), 0.0);
        for which in ClusterInequality::ALL {
            assert_eq!(vlf_bound(&which.criterion::<f64>()).unwrap(), 2.0);
        }
        let overlap = VarianceCriterion {
            h: vec![1.0; 3],
            g: vec![1.0; 3],
            distinguished: (0, 1),
            groups: (vec![2], vec![2]),
            exchanged: vec![],
        };
        assert!(matches!(vlf_bound(&overlap), Err(Error::Criterion(_))));
    }

    #[test]
    fn cluster_criteria_on_vacuum() {
        let s = vacuum(4);
        let ids = ["A1", "A2", "A3", "A4"];
        let expect = [2.5, 3.0, 2.5];
        for (which, want) in ClusterInequality::ALL.into_iter().zip(expect) {
            let v = cluster_test(&s, ids, which).unwrap();
            assert!((v.lhs() - want).abs() < 1e-12, "{which:?}");
            assert!(!v.is_violated());
        }
    }

    #[test]
    fn exchanged_embedding_matches_direct_nullifiers() {
        // Random symmetric PD matrix; compare the criterion's LHS with the
        // nullifier variances written out in (x, p) coordinates.
        let mut m = DMatrix::<f64>::zeros(8, 8);
        for i in 0..8 {
            for j in 0..8 {
                m[(i, j)] = ((i * 7 + j * 3) % 5) as f64 * 0.1 - 0.2;
            }
        }
        let cov = &m * m.transpose() + DMatrix::identity(8, 8) * 2.0;
        let s = GaussianState::new(vacuum(4).modes().to_vec(), cov, DVector::zeros(8)).unwrap();
        let var = |terms: &[(usize, f64)]| {
            let mut h = DVector::zeros(8);
            for &(i, c) in terms {
                h[i] = c;
            }
            s.variance_of(&h).unwrap()
        };
        // p′₁ − x′₂ and p′₂ − x′₁ − x′₃ with 0-based mode k at (2k, 2k+1)
        let n1 = var(&[(1, 1.0), (2, -1.0)]);
        let n2 = var(&[(3, 1.0), (0, -1.0), (4, -1.0)]);
        let n3 = var(&[(5, 1.0), (2, -1.0), (6, -1.0)]);
        let n4 = var(&[(7, 1.0), (4, -1.0)]);
        let lhs = |w: ClusterInequality| vlf_lhs(&s, &w.criterion()).unwrap();
        assert!((lhs(ClusterInequality::Delta1) - (n1 + n2)).abs() < 1e-12);
        assert!((lhs(ClusterInequality::Delta2) - (n3 + n2)).abs() < 1e-12);
        assert!((lhs(ClusterInequality::Delta3) - (n3 + n4)).abs() < 1e-12);
    }
}
