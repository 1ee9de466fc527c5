//! Deformed `gl(2)` irreducibles in the Gel'fand–Zetlin basis.
//!
//! A finite-dimensional irreducible `U_{p,q}[gl(2)]` module is labeled by an
//! integer top row `[m12, m22]` with `m12 ≥ m22`; its basis vectors are the
//! triangular patterns
//!
//! ```text
//!     [ m12   m22 ]
//!     [    m11    ]        m12 ≥ m11 ≥ m22,
//! ```
//!
//! ordered here by descending `m11`. With the shifted labels `l12 = m12 − 1`,
//! `l22 = m22 − 2`, `l11 = m11 − 1`, the generator action is
//!
//! ```text
//!     L    |m11⟩ = ½(l12 − l22 − 1)                 |m11⟩
//!     E11  |m11⟩ = (l11 + 1)                        |m11⟩
//!     E22  |m11⟩ = (l12 + l22 − l11 + 2)            |m11⟩
//!     E12  |m11⟩ = ([l12 − l11][l11 − l22])^½       |m11 + 1⟩
//!     E21  |m11⟩ = ([l12 − l11 + 1][l11 − l22 − 1])^½ |m11 − 1⟩
//! ```
//!
//! where `[x]` is the deformed bracket and `L` is the maximal-spin operator of
//! this factor (a constant, `½(m12 − m22)`, across the whole irreducible).
//! The same five formulas serve the left (`E11, E22, E12, E21, L1`) and right
//! (`E33, E44, E34, E43, L3`) even factors; only the labels are renamed.

use crate::error::{Error, Result};
use crate::scalars::{DeformParams, PqScalar};
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

/// One Gel'fand–Zetlin pattern of a `gl(2)` irreducible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GZPattern {
    /// Top-row first entry.
    pub m12: i64,
    /// Top-row second entry.
    pub m22: i64,
    /// Bottom entry, `m12 ≥ m11 ≥ m22`.
    pub m11: i64,
}

impl GZPattern {
    /// Construct with betweenness validation.
    pub fn new(m12: i64, m22: i64, m11: i64) -> Result<Self> {
        if m12 < m22 {
            return Err(Error::InvalidWeight {
                weight: [m12, m22, 0, 0],
                reason: "gl(2) top row must be weakly decreasing".into(),
            });
        }
        if m11 > m12 || m11 < m22 {
            return Err(Error::InvalidWeight {
                weight: [m12, m22, m11, 0],
                reason: "gl(2) pattern violates betweenness".into(),
            });
        }
        Ok(GZPattern { m12, m22, m11 })
    }

    /// Shifted label `l12 = m12 − 1`.
    #[inline]
    pub fn l12(&self) -> i64 {
        self.m12 - 1
    }

    /// Shifted label `l22 = m22 − 2`.
    #[inline]
    pub fn l22(&self) -> i64 {
        self.m22 - 2
    }

    /// Shifted label `l11 = m11 − 1`.
    #[inline]
    pub fn l11(&self) -> i64 {
        self.m11 - 1
    }

    /// Pattern with the bottom entry shifted by `delta` (no validation).
    #[inline]
    fn shifted(&self, delta: i64) -> GZPattern {
        GZPattern {
            m12: self.m12,
            m22: self.m22,
            m11: self.m11 + delta,
        }
    }
}

/// The five generators of one deformed `gl(2)` factor, in factor-local names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gl2Generator {
    /// Maximal-spin operator (central on the irreducible).
    L,
    /// First diagonal generator.
    E11,
    /// Second diagonal generator.
    E22,
    /// Raising generator.
    E12,
    /// Lowering generator.
    E21,
}

/// Which even factor an irreducible belongs to (they act on different tensor
/// slots and carry different global generator names).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    /// Indices 1,2 — generators `E11, E22, E12, E21, L1`.
    Left,
    /// Indices 3,4 — generators `E33, E44, E34, E43, L3`.
    Right,
}

/// Dimension of the irreducible with the given top row.
pub fn gl2_dim(top_row: [i64; 2]) -> Result<usize> {
    let [m12, m22] = top_row;
    if m12 < m22 {
        return Err(Error::InvalidWeight {
            weight: [m12, m22, 0, 0],
            reason: "gl(2) top row must be weakly decreasing".into(),
        });
    }
    Ok((m12 - m22 + 1) as usize)
}

/// One finite-dimensional deformed `gl(2)` irreducible with its ordered
/// pattern basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gl2Fidirmod {
    top_row: [i64; 2],
    side: Side,
}

impl Gl2Fidirmod {
    /// Construct an irreducible from its top row.
    pub fn new(top_row: [i64; 2], side: Side) -> Result<Self> {
        gl2_dim(top_row)?;
        Ok(Gl2Fidirmod { top_row, side })
    }

    /// The defining top row `[m12, m22]`.
    #[inline]
    pub fn top_row(&self) -> [i64; 2] {
        self.top_row
    }

    /// Which tensor slot this factor occupies.
    #[inline]
    pub fn side(&self) -> Side {
        self.side
    }

    /// Dimension `m12 − m22 + 1`.
    pub fn dim(&self) -> usize {
        (self.top_row[0] - self.top_row[1] + 1) as usize
    }

    /// Ordered basis: patterns by descending `m11` (index 0 is the highest).
    pub fn patterns(&self) -> impl Iterator<Item = GZPattern> + '_ {
        let [m12, m22] = self.top_row;
        (m22..=m12).rev().map(move |m11| GZPattern { m12, m22, m11 })
    }

    /// Index of the pattern with the given bottom entry, if in range.
    pub fn index_of(&self, m11: i64) -> Option<usize> {
        let [m12, m22] = self.top_row;
        (m22..=m12).contains(&m11).then(|| (m12 - m11) as usize)
    }

    /// Highest pattern (`m11 = m12`).
    pub fn highest(&self) -> GZPattern {
        GZPattern {
            m12: self.top_row[0],
            m22: self.top_row[1],
            m11: self.top_row[0],
        }
    }

    /// Dense matrix of a generator over the ordered pattern basis
    /// (`M[target, source]` convention).
    pub fn matrix(&self, gen: Gl2Generator, params: &DeformParams) -> DMatrix<f64> {
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (j, pat) in self.patterns().enumerate() {
            for (coeff, out) in act_gl2(gen, &pat, params) {
                if let Some(i) = self.index_of(out.m11) {
                    m[(i, j)] += coeff.value();
                }
            }
        }
        m
    }
}

/// Action of one `gl(2)` generator on one pattern: at most one term.
///
/// Raising/lowering results that would step outside betweenness come back as
/// the empty combination (their coefficient vanishes there, so nothing is
/// lost).
pub fn act_gl2(
    gen: Gl2Generator,
    pattern: &GZPattern,
    params: &DeformParams,
) -> Vec<(PqScalar, GZPattern)> {
    let (l12, l22, l11) = (pattern.l12(), pattern.l22(), pattern.l11());
    match gen {
        Gl2Generator::L => {
            let eig = (l12 - l22 - 1) as f64 / 2.0;
            vec![(PqScalar(eig), *pattern)]
        }
        Gl2Generator::E11 => vec![(PqScalar((l11 + 1) as f64), *pattern)],
        Gl2Generator::E22 => vec![(PqScalar((l12 + l22 - l11 + 2) as f64), *pattern)],
        Gl2Generator::E12 => {
            if pattern.m11 >= pattern.m12 {
                return vec![];
            }
            let c = (params.bracket_int(l12 - l11) * params.bracket_int(l11 - l22))
                .sqrt()
                .expect("raising radicand is a product of positive brackets");
            vec![(c, pattern.shifted(1))]
        }
        Gl2Generator::E21 => {
            if pattern.m11 <= pattern.m22 {
                return vec![];
            }
            let c = (params.bracket_int(l12 - l11 + 1) * params.bracket_int(l11 - l22 - 1))
                .sqrt()
                .expect("lowering radicand is a product of positive brackets");
            vec![(c, pattern.shifted(-1))]
        }
    }
}

/// Single lowering step norm: `E21 |m11⟩ = step_norm · |m11 − 1⟩`.
///
/// Equals `([m12 − m11 + 1][m11 − m22])^½` on the pattern's labels; zero when
/// already at the bottom.
pub fn step_norm(pattern: &GZPattern, params: &DeformParams) -> PqScalar {
    if pattern.m11 <= pattern.m22 {
        return PqScalar::ZERO;
    }
    (params.bracket_int(pattern.m12 - pattern.m11 + 1)
        * params.bracket_int(pattern.m11 - pattern.m22))
    .sqrt()
    .expect("lowering radicand is a product of positive brackets")
}

/// Normalization factor `N` of the lowering rule restricted to one factor:
///
/// ```text
///     N · (E21)^steps |highest⟩ = |m11 = m12 − steps⟩   exactly,
///     N = ( [m11 − m22]! / ([m12 − m22]! [m12 − m11]!) )^½ .
/// ```
pub fn lowering_normalization(
    top_row: [i64; 2],
    steps: u32,
    params: &DeformParams,
) -> Result<PqScalar> {
    let [m12, m22] = top_row;
    let width = m12 - m22;
    if (steps as i64) > width {
        return Err(Error::InvalidWeight {
            weight: [m12, m22, m12 - steps as i64, 0],
            reason: format!("lowering by {steps} exceeds the pattern range {width}"),
        });
    }
    let m11 = m12 - steps as i64;
    let num = params.bracket_factorial((m11 - m22) as u32);
    let den = params.bracket_factorial(width as u32) * params.bracket_factorial(steps);
    (num / den).sqrt()
}

/// Lower the highest pattern `steps` times with the normalization applied:
/// returns the reached pattern together with its coefficient, which is exactly
/// one by construction (asserted; exposed so callers can consume the telescoped
/// product form directly).
pub fn gl2_lower(
    fidirmod: &Gl2Fidirmod,
    steps: u32,
    params: &DeformParams,
) -> Result<(PqScalar, GZPattern)> {
    let norm = lowering_normalization(fidirmod.top_row(), steps, params)?;
    let mut pattern = fidirmod.highest();
    let mut coeff = PqScalar::ONE;
    for _ in 0..steps {
        coeff *= step_norm(&pattern, params);
        pattern = pattern.shifted(-1);
    }
    Ok((norm * coeff, pattern))
}
