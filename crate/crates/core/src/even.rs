//! The even-subalgebra module `V₀` that induction starts from.
//!
//! The even subalgebra of the quantum superalgebra splits into a left and a
//! right deformed `gl(2)` (generators `{E11, E22, E12, E21, L1}` and
//! `{E33, E44, E34, E43, L3}` respectively). `V₀` is the tensor product of one
//! irreducible of each factor, with tops `[m13, m23]` and `[m33, m43]` taken
//! from the global highest weight `[m13, m23, m33, m43]`. Left generators act
//! on the left Gel'fand–Zetlin pattern only, right generators on the right
//! pattern only; the odd raising generators annihilate all of `V₀` by the
//! induction construction, so this module deliberately exposes no odd action.
//!
//! Basis order is deterministic: descending `m11`, then descending `m31`, so
//! index 0 is the global highest vector (`m11 = m13`, `m31 = m33`).

use crate::error::{Error, Result};
use crate::gl2::{act_gl2, GZPattern, Gl2Fidirmod, Gl2Generator, Side};
use crate::scalars::{DeformParams, PqScalar};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Global highest weight `[m13, m23, m33, m43]` with weakly decreasing halves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HighestWeight(pub [i64; 4]);

impl HighestWeight {
    /// Validated constructor.
    pub fn new(signature: [i64; 4]) -> Result<Self> {
        let [m13, m23, m33, m43] = signature;
        if m13 < m23 || m33 < m43 {
            return Err(Error::InvalidWeight {
                weight: signature,
                reason: "each half of the signature must be weakly decreasing".into(),
            });
        }
        Ok(HighestWeight(signature))
    }

    /// `m13`.
    #[inline]
    pub fn m13(&self) -> i64 {
        self.0[0]
    }
    /// `m23`.
    #[inline]
    pub fn m23(&self) -> i64 {
        self.0[1]
    }
    /// `m33`.
    #[inline]
    pub fn m33(&self) -> i64 {
        self.0[2]
    }
    /// `m43`.
    #[inline]
    pub fn m43(&self) -> i64 {
        self.0[3]
    }

    /// Left spin `l = ½(m13 − m23)`.
    #[inline]
    pub fn l(&self) -> f64 {
        (self.m13() - self.m23()) as f64 / 2.0
    }

    /// Right spin `l′ = ½(m33 − m43)`.
    #[inline]
    pub fn l_prime(&self) -> f64 {
        (self.m33() - self.m43()) as f64 / 2.0
    }

    /// `m13 − m23` (twice the left spin, an integer).
    #[inline]
    pub fn two_l(&self) -> i64 {
        self.m13() - self.m23()
    }

    /// `m33 − m43` (twice the right spin, an integer).
    #[inline]
    pub fn two_l_prime(&self) -> i64 {
        self.m33() - self.m43()
    }
}

impl fmt::Display for HighestWeight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{},{},{},{}]",
            self.0[0], self.0[1], self.0[2], self.0[3]
        )
    }
}

/// One basis vector of `V₀`: a pair of Gel'fand–Zetlin patterns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TensorGZVector {
    /// Left pattern, top row `[m13, m23]`.
    pub left: GZPattern,
    /// Right pattern, top row `[m33, m43]`.
    pub right: GZPattern,
}

impl TensorGZVector {
    /// Eigenvalue of `E11` on this vector (`m11`).
    #[inline]
    pub fn e11(&self) -> i64 {
        self.left.m11
    }

    /// Eigenvalue of `E22` (`m13 + m23 − m11`).
    #[inline]
    pub fn e22(&self) -> i64 {
        self.left.m12 + self.left.m22 - self.left.m11
    }

    /// Eigenvalue of `E33` (`m31`).
    #[inline]
    pub fn e33(&self) -> i64 {
        self.right.m11
    }

    /// Eigenvalue of `E44` (`m33 + m43 − m31`).
    #[inline]
    pub fn e44(&self) -> i64 {
        self.right.m12 + self.right.m22 - self.right.m11
    }

    /// Eigenvalue of `h₂ = E22 + E33`, the Cartan combination entering the
    /// odd pair relation with the middle index.
    #[inline]
    pub fn h2(&self) -> i64 {
        self.e22() + self.e33()
    }
}

/// Even generators acting on `V₀` (global names; the left five touch the left
/// pattern, the right five the right pattern).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EvenGenerator {
    /// Left maximal-spin operator.
    L1,
    /// Right maximal-spin operator.
    L3,
    /// Diagonal generators.
    E11,
    /// Diagonal.
    E22,
    /// Diagonal.
    E33,
    /// Diagonal.
    E44,
    /// Left raising.
    E12,
    /// Left lowering.
    E21,
    /// Right raising.
    E34,
    /// Right lowering.
    E43,
}

impl EvenGenerator {
    /// All ten even generators in export order.
    pub const ALL: [EvenGenerator; 10] = [
        EvenGenerator::L1,
        EvenGenerator::L3,
        EvenGenerator::E11,
        EvenGenerator::E22,
        EvenGenerator::E33,
        EvenGenerator::E44,
        EvenGenerator::E12,
        EvenGenerator::E21,
        EvenGenerator::E34,
        EvenGenerator::E43,
    ];

    /// Which tensor factor this generator touches, and the factor-local name.
    fn factor(self) -> (Side, Gl2Generator) {
        match self {
            EvenGenerator::L1 => (Side::Left, Gl2Generator::L),
            EvenGenerator::E11 => (Side::Left, Gl2Generator::E11),
            EvenGenerator::E22 => (Side::Left, Gl2Generator::E22),
            EvenGenerator::E12 => (Side::Left, Gl2Generator::E12),
            EvenGenerator::E21 => (Side::Left, Gl2Generator::E21),
            EvenGenerator::L3 => (Side::Right, Gl2Generator::L),
            EvenGenerator::E33 => (Side::Right, Gl2Generator::E11),
            EvenGenerator::E44 => (Side::Right, Gl2Generator::E22),
            EvenGenerator::E34 => (Side::Right, Gl2Generator::E12),
            EvenGenerator::E43 => (Side::Right, Gl2Generator::E21),
        }
    }
}

impl fmt::Display for EvenGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// The even module `V₀`: tensor product of the left and right irreducibles
/// fixed by a global highest weight.
#[derive(Debug, Clone)]
pub struct EvenModule {
    weight: HighestWeight,
    left: Gl2Fidirmod,
    right: Gl2Fidirmod,
}

impl EvenModule {
    /// Build `V₀` for a validated weight.
    pub fn new(weight: HighestWeight) -> Result<Self> {
        let left = Gl2Fidirmod::new([weight.m13(), weight.m23()], Side::Left)?;
        let right = Gl2Fidirmod::new([weight.m33(), weight.m43()], Side::Right)?;
        Ok(EvenModule {
            weight,
            left,
            right,
        })
    }

    /// Build `V₀` directly from a signature.
    pub fn from_signature(signature: [i64; 4]) -> Result<Self> {
        Self::new(HighestWeight::new(signature)?)
    }

    /// The defining weight.
    #[inline]
    pub fn weight(&self) -> HighestWeight {
        self.weight
    }

    /// Left factor.
    #[inline]
    pub fn left(&self) -> &Gl2Fidirmod {
        &self.left
    }

    /// Right factor.
    #[inline]
    pub fn right(&self) -> &Gl2Fidirmod {
        &self.right
    }

    /// Dimension `(m13 − m23 + 1)(m33 − m43 + 1)`.
    pub fn dim(&self) -> usize {
        self.left.dim() * self.right.dim()
    }

    /// Ordered basis (descending `m11`, then descending `m31`).
    pub fn basis(&self) -> Vec<TensorGZVector> {
        let mut out = Vec::with_capacity(self.dim());
        for lp in self.left.patterns() {
            for rp in self.right.patterns() {
                out.push(TensorGZVector { left: lp, right: rp });
            }
        }
        out
    }

    /// Index of the basis vector with the given bottom labels.
    pub fn index_of(&self, m11: i64, m31: i64) -> Option<usize> {
        let li = self.left.index_of(m11)?;
        let ri = self.right.index_of(m31)?;
        Some(li * self.right.dim() + ri)
    }

    /// Index of a tensor vector (validates it belongs to this module).
    pub fn index_of_vector(&self, v: &TensorGZVector) -> Option<usize> {
        if v.left.m12 != self.weight.m13()
            || v.left.m22 != self.weight.m23()
            || v.right.m12 != self.weight.m33()
            || v.right.m22 != self.weight.m43()
        {
            return None;
        }
        self.index_of(v.left.m11, v.right.m11)
    }

    /// The highest-weight vector (`m11 = m13`, `m31 = m33`).
    pub fn highest(&self) -> TensorGZVector {
        TensorGZVector {
            left: self.left.highest(),
            right: self.right.highest(),
        }
    }

    /// The vector with given bottom labels, if admissible.
    pub fn vector(&self, m11: i64, m31: i64) -> Option<TensorGZVector> {
        self.index_of(m11, m31)?;
        Some(TensorGZVector {
            left: GZPattern {
                m12: self.weight.m13(),
                m22: self.weight.m23(),
                m11,
            },
            right: GZPattern {
                m12: self.weight.m33(),
                m22: self.weight.m43(),
                m11: m31,
            },
        })
    }

    /// Dense matrix of an even generator over the ordered basis.
    pub fn matrix(&self, gen: EvenGenerator, params: &DeformParams) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, v) in self.basis().iter().enumerate() {
            for (coeff, out) in act_even(gen, v, params) {
                let i = self
                    .index_of_vector(&out)
                    .expect("action stays inside the module");
                m[(i, j)] += coeff.value();
            }
        }
        m
    }
}

/// Action of one even generator on one tensor basis vector; the untouched
/// factor is carried along unchanged.
pub fn act_even(
    gen: EvenGenerator,
    v: &TensorGZVector,
    params: &DeformParams,
) -> Vec<(PqScalar, TensorGZVector)> {
    let (side, local) = gen.factor();
    match side {
        Side::Left => act_gl2(local, &v.left, params)
            .into_iter()
            .map(|(c, lp)| (c, TensorGZVector { left: lp, right: v.right }))
            .collect(),
        Side::Right => act_gl2(local, &v.right, params)
            .into_iter()
            .map(|(c, rp)| (c, TensorGZVector { left: v.left, right: rp }))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gl2::{gl2_lower, lowering_normalization};
    use approx::assert_relative_eq;

    fn sample_params() -> Vec<DeformParams> {
        [(1.3, 1.7), (0.8, 1.9), (2.0, 0.6)]
            .into_iter()
            .map(|(p, q)| DeformParams::new(p, q).unwrap())
            .collect()
    }

    #[test]
    fn basis_sizes() {
        assert_eq!(EvenModule::from_signature([1, 0, 0, -1]).unwrap().dim(), 4);
        assert_eq!(EvenModule::from_signature([0, 0, 0, 0]).unwrap().dim(), 1);
        assert_eq!(EvenModule::from_signature([3, 1, 2, 0]).unwrap().dim(), 9);
        assert!(EvenModule::from_signature([0, 1, 0, 0]).is_err());
    }

    #[test]
    fn basis_order_is_descending_then_descending() {
        let v0 = EvenModule::from_signature([1, 0, 0, -1]).unwrap();
        let labels: Vec<(i64, i64)> = v0
            .basis()
            .iter()
            .map(|v| (v.left.m11, v.right.m11))
            .collect();
        assert_eq!(labels, vec![(1, 0), (1, -1), (0, 0), (0, -1)]);
        assert_eq!(v0.index_of(1, 0), Some(0));
        assert_eq!(v0.index_of(0, -1), Some(3));
        assert_eq!(v0.index_of(2, 0), None);
    }

    #[test]
    fn highest_vector_is_annihilated_and_has_signature_eigenvalues() {
        let params = DeformParams::default();
        let v0 = EvenModule::from_signature([1, 0, 0, -1]).unwrap();
        let top = v0.highest();
        assert!(act_even(EvenGenerator::E12, &top, &params).is_empty());
        assert!(act_even(EvenGenerator::E34, &top, &params).is_empty());
        assert_eq!(top.e11(), 1);
        assert_eq!(top.e22(), 0);
        assert_eq!(top.e33(), 0);
        assert_eq!(top.e44(), -1);
        let e22 = act_even(EvenGenerator::E22, &top, &params);
        assert_relative_eq!(e22[0].0.value(), 0.0); // m23
    }

    #[test]
    fn left_spin_operator_is_constant_one_half() {
        let params = DeformParams::default();
        let v0 = EvenModule::from_signature([1, 0, 0, -1]).unwrap();
        for v in v0.basis() {
            let l1 = act_even(EvenGenerator::L1, &v, &params);
            assert_relative_eq!(l1[0].0.value(), 0.5);
        }
    }

    #[test]
    fn right_raising_changes_only_the_right_label() {
        let params = DeformParams::default();
        let v0 = EvenModule::from_signature([2, 0, 1, -1]).unwrap();
        let v = v0.vector(1, 0).unwrap();
        let out = act_even(EvenGenerator::E34, &v, &params);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].1.left.m11, 1);
        assert_eq!(out[0].1.right.m11, 1);
    }

    #[test]
    fn even_relations_hold_as_matrices() {
        for params in sample_params() {
            let v0 = EvenModule::from_signature([2, 0, 1, -1]).unwrap();
            let m =
                |g: EvenGenerator| -> DMatrix<f64> { v0.matrix(g, &params) };
            let (e11, e22, e33, e44) = (
                m(EvenGenerator::E11),
                m(EvenGenerator::E22),
                m(EvenGenerator::E33),
                m(EvenGenerator::E44),
            );
            let (e12, e21, e34, e43) = (
                m(EvenGenerator::E12),
                m(EvenGenerator::E21),
                m(EvenGenerator::E34),
                m(EvenGenerator::E43),
            );
            let comm = |a: &DMatrix<f64>, b: &DMatrix<f64>| a * b - b * a;

            // Cross-factor generators commute.
            assert!(comm(&e12, &e43).abs().max() <= 1e-12);
            assert!(comm(&e12, &e34).abs().max() <= 1e-12);
            assert!(comm(&e11, &e34).abs().max() <= 1e-12);
            assert!(comm(&e21, &e43).abs().max() <= 1e-12);

            // Diagonal shifts.
            assert!((comm(&e11, &e12) - &e12).abs().max() <= 1e-12);
            assert!((comm(&e22, &e12) + &e12).abs().max() <= 1e-12);
            assert!((comm(&e33, &e34) - &e34).abs().max() <= 1e-12);
            assert!((comm(&e44, &e43) - &e43).abs().max() <= 1e-12);

            // Raising/lowering pairs against their diagonal right sides.
            let basis = v0.basis();
            let diag_rhs = |h_of: &dyn Fn(&TensorGZVector) -> i64,
                            spin_of: &dyn Fn(&TensorGZVector) -> f64|
             -> DMatrix<f64> {
                DMatrix::from_fn(basis.len(), basis.len(), |i, j| {
                    if i != j {
                        return 0.0;
                    }
                    let h = h_of(&basis[i]) as f64;
                    let l = spin_of(&basis[i]);
                    (params.ratio_pow(l - h / 2.0) * params.bracket(h)).value()
                })
            };
            let rhs1 = diag_rhs(
                &|v| v.e11() - v.e22(),
                &|v| (v.left.m12 - v.left.m22) as f64 / 2.0,
            );
            assert!((comm(&e12, &e21) - rhs1).abs().max() <= 1e-11);
            let rhs3 = diag_rhs(
                &|v| v.e33() - v.e44(),
                &|v| (v.right.m12 - v.right.m22) as f64 / 2.0,
            );
            assert!((comm(&e34, &e43) - rhs3).abs().max() <= 1e-11);
        }
    }

    #[test]
    fn normalized_double_lowering_reproduces_every_basis_vector() {
        // Applying the two lowering chains with the two-factor normalization
        // reaches each (m11, m31) with coefficient exactly 1.
        for params in sample_params() {
            let v0 = EvenModule::from_signature([3, 1, 2, 0]).unwrap();
            for v in v0.basis() {
                let a = (v.left.m12 - v.left.m11) as u32;
                let b = (v.right.m12 - v.right.m11) as u32;
                let (cl, pl) = gl2_lower(v0.left(), a, &params).unwrap();
                let (cr, pr) = gl2_lower(v0.right(), b, &params).unwrap();
                assert_relative_eq!((cl * cr).value(), 1.0, max_relative = 1e-11);
                assert_eq!(pl.m11, v.left.m11);
                assert_eq!(pr.m11, v.right.m11);
            }
            // The normalization factors themselves are the two-factor pieces.
            let n = lowering_normalization([3, 1], 2, &params).unwrap();
            assert!(n.value() > 0.0);
        }
    }
}
