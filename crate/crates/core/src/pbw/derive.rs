//! Mechanical derivation of the exchange table.
//!
//! Every product of two root-vector letters is expanded into the free algebra
//! over the three lowering Chevalley generators (`E21`, `E32`, `E43`), then
//! matched against the span of PBW-ordered words *modulo* the defining ideal
//! of the lowering zone. The ideal is generated by the even-even commutator,
//! the odd square, the two cubic Serre elements and the quartic extra-Serre
//! element; each rule is the unique solution of a dense least-squares system,
//! and both the residual and the uniqueness of the PBW coordinates are checked
//! numerically before a rule is accepted.
//!
//! The raising letter `E23` is handled separately: it is pushed symbolically
//! through a free word, consuming one anticommutator with `E32` and leaving a
//! diagonal `f(h₂ + s)` letter behind; collecting terms yields the crossing
//! rule for each odd letter. Crossing the right-factor even lowering letter
//! multiplies by the parameter ratio `q/p` — the unique dilation under which
//! the crossing rules stay compatible with the vanishing odd squares at
//! `p ≠ q` (any plain commutation there contradicts the ordered-basis
//! freeness; at `p = q` the ratio is 1 and the crossing degenerates to a
//! plain commutator).

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalars::DeformParams;

use super::Root;

/// A word in the free algebra over the lowering Chevalley letters,
/// encoded as bytes `1`, `2`, `3` for `E21`, `E32`, `E43`.
type FreeWord = Vec<u8>;

/// A finite linear combination of free words.
type FreeCombo = Vec<(f64, FreeWord)>;

/// Relative residual above which a derivation is rejected.
const RESIDUAL_TOL: f64 = 1e-9;

/// Leak of a PBW coordinate direction out of the row space above which
/// uniqueness is rejected.
const UNIQUENESS_TOL: f64 = 1e-8;

/// Multidegree of a free word: occurrence counts of the three letters.
fn multidegree(w: &[u8]) -> [usize; 3] {
    let mut d = [0usize; 3];
    for &c in w {
        d[(c - 1) as usize] += 1;
    }
    d
}

/// Product of two combinations (word concatenation, coefficient product).
fn combo_mul(a: &FreeCombo, b: &FreeCombo) -> FreeCombo {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for (ca, wa) in a {
        for (cb, wb) in b {
            let mut w = wa.clone();
            w.extend_from_slice(wb);
            out.push((ca * cb, w));
        }
    }
    out
}

/// Expansion of a root-vector letter into the free algebra.
///
/// The composite letters are nested twisted commutators of the Chevalley
/// generators; expanding them yields the fixed combinations below.
pub(super) fn letter_expansion(letter: Root, params: &DeformParams) -> FreeCombo {
    let p = params.p();
    let q = params.q();
    match letter {
        Root::F1 => vec![(1.0, vec![1])],
        Root::E32 => vec![(1.0, vec![2])],
        Root::F3 => vec![(1.0, vec![3])],
        // E31 = p⁻¹·E32·E21 − E21·E32
        Root::E31 => vec![(1.0 / p, vec![2, 1]), (-1.0, vec![1, 2])],
        // E42 = q⁻¹·E43·E32 − E32·E43
        Root::E42 => vec![(1.0 / q, vec![3, 2]), (-1.0, vec![2, 3])],
        // E41 = q⁻¹·E43·E31 − E31·E43, expanded through E31
        Root::E41 => vec![
            (1.0 / (p * q), vec![3, 2, 1]),
            (-1.0 / q, vec![3, 1, 2]),
            (-1.0 / p, vec![2, 1, 3]),
            (1.0, vec![1, 2, 3]),
        ],
    }
}

/// Generators of the two-sided defining ideal of the lowering zone.
fn ideal_generators(params: &DeformParams) -> Vec<FreeCombo> {
    let p = params.p();
    let q = params.q();
    let serre = |a: u8, b: u8| -> FreeCombo {
        // aab − (q + p⁻¹)·aba + (q/p)·baa
        vec![
            (1.0, vec![a, a, b]),
            (-(q + 1.0 / p), vec![a, b, a]),
            (q / p, vec![b, a, a]),
        ]
    };
    let e31 = letter_expansion(Root::E31, params);
    let e42 = letter_expansion(Root::E42, params);
    let mut extra = combo_mul(&e31, &e42);
    extra.extend(combo_mul(&e42, &e31));
    vec![
        // outer lowering generators commute
        vec![(1.0, vec![3, 1]), (-1.0, vec![1, 3])],
        // odd Chevalley square
        vec![(1.0, vec![2, 2])],
        // cubic Serre elements for each outer/odd pair
        serre(1, 2),
        serre(3, 2),
        // quartic extra-Serre element (vanishing odd anticommutator)
        extra,
    ]
}

/// All distinct free words with the given multidegree.
fn words_of_multidegree(d: [usize; 3]) -> Vec<FreeWord> {
    fn rec(d: [usize; 3], cur: &mut FreeWord, out: &mut Vec<FreeWord>) {
        if d == [0, 0, 0] {
            out.push(cur.clone());
            return;
        }
        for i in 0..3 {
            if d[i] > 0 {
                let mut d2 = d;
                d2[i] -= 1;
                cur.push((i + 1) as u8);
                rec(d2, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    rec(d, &mut Vec::new(), &mut out);
    out
}

/// All sub-multidegrees of `d` (componentwise ≤), in lexicographic order.
fn sub_multidegrees(d: [usize; 3]) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..=d[0] {
        for b in 0..=d[1] {
            for c in 0..=d[2] {
                out.push([a, b, c]);
            }
        }
    }
    out
}

/// All PBW-ordered words (as letter sequences) with the given multidegree:
/// odd letters at most once each, in alphabet order, then powers of the two
/// outer lowering letters.
pub(super) fn pbw_words_of_multidegree(d: [usize; 3]) -> Vec<Vec<Root>> {
    let mut out = Vec::new();
    for a in 0..=1usize {
        for b in 0..=1usize {
            for c in 0..=1usize {
                let used_f2 = a + b + c;
                if used_f2 > d[1] {
                    continue;
                }
                let e = d[1] - used_f2;
                if e > 1 {
                    continue;
                }
                if d[0] < a + b || d[2] < a + c {
                    continue;
                }
                let m = d[0] - a - b;
                let n = d[2] - a - c;
                let mut w = Vec::new();
                if a == 1 {
                    w.push(Root::E41);
                }
                if b == 1 {
                    w.push(Root::E31);
                }
                if c == 1 {
                    w.push(Root::E42);
                }
                if e == 1 {
                    w.push(Root::E32);
                }
                w.extend(std::iter::repeat(Root::F1).take(m));
                w.extend(std::iter::repeat(Root::F3).take(n));
                out.push(w);
            }
        }
    }
    out
}

/// Expansion of a PBW word into the free algebra.
fn pbw_word_expansion(word: &[Root], params: &DeformParams) -> FreeCombo {
    let mut acc: FreeCombo = vec![(1.0, Vec::new())];
    for &l in word {
        acc = combo_mul(&acc, &letter_expansion(l, params));
    }
    acc
}

/// Scatter a combination into a dense coordinate vector over `index`.
fn combo_to_vector(combo: &FreeCombo, index: &HashMap<FreeWord, usize>) -> DVector<f64> {
    let mut v = DVector::zeros(index.len());
    for (c, w) in combo {
        let i = *index
            .get(w)
            .expect("free word lies in the expected multidegree");
        v[i] += c;
    }
    v
}

/// Outcome of one mechanical pair derivation.
pub(super) struct DerivedRule {
    /// PBW-ordered replacement words with coefficients (empty means zero).
    pub rhs: Vec<(f64, Vec<Root>)>,
    /// Relative residual of the linear solve.
    pub residual: f64,
}

/// Derive the rewrite rule for the out-of-order product `left·right`.
///
/// Solves `left·right = Σ c_w·w + (ideal element)` in the free algebra at the
/// common multidegree, rejecting the outcome unless the residual is tiny and
/// the PBW coordinates are unique.
pub(super) fn derive_pair(
    left: Root,
    right: Root,
    params: &DeformParams,
) -> Result<DerivedRule> {
    let fail = |reason: String| Error::DerivationFailure {
        left: left.name().into(),
        right: right.name().into(),
        reason,
    };

    let product = combo_mul(
        &letter_expansion(left, params),
        &letter_expansion(right, params),
    );
    let degree = multidegree(&product[0].1);

    let words = words_of_multidegree(degree);
    let index: HashMap<FreeWord, usize> = words
        .iter()
        .cloned()
        .enumerate()
        .map(|(i, w)| (w, i))
        .collect();
    let rows = words.len();

    let pbw_words = pbw_words_of_multidegree(degree);
    let mut columns: Vec<DVector<f64>> = pbw_words
        .iter()
        .map(|w| combo_to_vector(&pbw_word_expansion(w, params), &index))
        .collect();
    let n_pbw = columns.len();

    // Ideal columns: u·g·v for each generator g and all flanking words.
    for g in ideal_generators(params) {
        let dg = multidegree(&g[0].1);
        if (0..3).any(|i| dg[i] > degree[i]) {
            continue;
        }
        let rest = [degree[0] - dg[0], degree[1] - dg[1], degree[2] - dg[2]];
        for du in sub_multidegrees(rest) {
            let dv = [rest[0] - du[0], rest[1] - du[1], rest[2] - du[2]];
            for u in words_of_multidegree(du) {
                for v in words_of_multidegree(dv) {
                    let mut col = DVector::zeros(rows);
                    for (c, w) in &g {
                        let mut full = u.clone();
                        full.extend_from_slice(w);
                        full.extend_from_slice(&v);
                        col[index[&full]] += c;
                    }
                    columns.push(col);
                }
            }
        }
    }

    let a = DMatrix::from_columns(&columns);
    let b = combo_to_vector(&product, &index);

    let svd = a.clone().svd(true, true);
    let sigma_max = svd.singular_values.max();
    let eps = sigma_max * 1e-12;
    let x = svd
        .solve(&b, eps)
        .map_err(|e| fail(format!("least-squares solve failed: {e}")))?;

    let residual = (&a * &x - &b).norm() / b.norm().max(1.0);
    if residual > RESIDUAL_TOL {
        return Err(fail(format!(
            "product is not reducible to PBW form (residual {residual:.3e})"
        )));
    }

    // Uniqueness: each PBW coordinate direction must lie inside the row
    // space of the system, i.e. no null vector may carry PBW weight.
    let v_t = svd.v_t.as_ref().expect("SVD computed with V^T");
    for i in 0..n_pbw {
        let mut inside = 0.0;
        for (j, &s) in svd.singular_values.iter().enumerate() {
            if s > eps {
                inside += v_t[(j, i)] * v_t[(j, i)];
            }
        }
        let leak = (1.0 - inside).abs();
        if leak > UNIQUENESS_TOL {
            return Err(fail(format!(
                "PBW coordinate {i} is not unique modulo the ideal (leak {leak:.3e})"
            )));
        }
    }

    let scale = x.rows(0, n_pbw).amax().max(1.0);
    let rhs: Vec<(f64, Vec<Root>)> = pbw_words
        .into_iter()
        .enumerate()
        .filter_map(|(i, w)| {
            let c = x[i];
            (c.abs() > 1e-10 * scale).then_some((c, w))
        })
        .collect();

    Ok(DerivedRule { rhs, residual })
}

/// One term produced while symbolically pushing the raising letter through a
/// free word: `coeff · word · [f(h₂ + shift)] · [E23]`.
struct PushTerm {
    coeff: f64,
    word: FreeWord,
    diag_shift: Option<i64>,
    has_e23: bool,
}

/// Shift picked up by a diagonal `f(h₂ + s)` letter crossing one lowering
/// Chevalley letter to its right.
fn h2_shift(letter: u8) -> i64 {
    match letter {
        1 => 1,
        2 => 0,
        3 => -1,
        _ => unreachable!("free words use letters 1..=3"),
    }
}

/// Push `E23` from the left through a free word.
///
/// Crossing the odd Chevalley letter consumes the anticommutator and leaves a
/// diagonal letter that then drifts to the right end, shifting its argument
/// by the weight of every letter it crosses. The left-factor even lowering
/// letter commutes plainly; the right-factor one dilates by the parameter
/// ratio `q/p` — both factors are pinned by requiring that the resulting
/// crossing rules commute with the vanishing squares of the composite odd
/// letters, which fails for every other choice once `p ≠ q`.
fn e23_through_word(w: &[u8], params: &DeformParams) -> Vec<PushTerm> {
    if w.is_empty() {
        return vec![PushTerm {
            coeff: 1.0,
            word: Vec::new(),
            diag_shift: None,
            has_e23: true,
        }];
    }
    let first = w[0];
    let rest = &w[1..];
    let mut out = Vec::new();
    let pass_factor = match first {
        1 => 1.0,
        2 => -1.0,
        3 => params.q() / params.p(),
        _ => unreachable!("free words use letters 1..=3"),
    };
    for mut t in e23_through_word(rest, params) {
        t.coeff *= pass_factor;
        t.word.insert(0, first);
        out.push(t);
    }
    if first == 2 {
        // Anticommutator term: E23·E32 + E32·E23 = f(h₂); the diagonal
        // letter then crosses the remaining suffix.
        let shift: i64 = rest.iter().map(|&l| h2_shift(l)).sum();
        out.push(PushTerm {
            coeff: 1.0,
            word: rest.to_vec(),
            diag_shift: Some(shift),
            has_e23: false,
        });
    }
    out
}

/// Crossing rule for the raising letter and one odd root letter:
/// `E23·X = −χ·X·E23 + Σ (outer word)·(Σ cⱼ·f(h₂ + j))`,
/// where `χ` is `(q/p)` raised to the number of right-factor even lowering
/// letters inside the expansion of `X`.
pub(super) struct E23Rule {
    /// The dilation factor `χ` of the passing term (`1` or `q/p`).
    pub pass_twist: f64,
    /// Corrections, each an outer lowering word (sorted, letters `F1`/`F3`
    /// only) paired with the diagonal polynomial evaluated on the vector to
    /// the right of that word.
    pub corrections: Vec<(Vec<Root>, Vec<(f64, i64)>)>,
}

/// Derive the crossing rule of `E23` past one odd root letter.
pub(super) fn derive_e23_rule(letter: Root, params: &DeformParams) -> Result<E23Rule> {
    let fail = |reason: String| Error::DerivationFailure {
        left: "E23".into(),
        right: letter.name().into(),
        reason,
    };
    let expansion = letter_expansion(letter, params);

    // Every word of one letter's expansion shares a multidegree, hence a
    // common crossing dilation (q/p)^{#right-factor letters}.
    let n3 = multidegree(&expansion[0].1)[2] as i32;
    let pass_twist = (params.q() / params.p()).powi(n3);

    let mut pass: HashMap<FreeWord, f64> = HashMap::new();
    let mut corrections: HashMap<(FreeWord, i64), f64> = HashMap::new();

    for (c, w) in &expansion {
        for t in e23_through_word(w, params) {
            if t.has_e23 {
                *pass.entry(t.word).or_insert(0.0) += c * t.coeff;
            } else {
                let shift = t.diag_shift.expect("non-pass terms carry a diagonal");
                if t.word.contains(&2) {
                    return Err(fail(
                        "correction word contains the odd Chevalley letter".into(),
                    ));
                }
                let mut sorted = t.word.clone();
                sorted.sort_unstable(); // F1 and F3 commute
                *corrections.entry((sorted, shift)).or_insert(0.0) += c * t.coeff;
            }
        }
    }

    // The passing part must reassemble to minus the dilated letter.
    for (c, w) in &expansion {
        let got = pass.remove(w).unwrap_or(0.0);
        let want = -pass_twist * c;
        if (got - want).abs() > 1e-12 * want.abs().max(1.0) {
            return Err(fail(format!(
                "passing part is not the dilated negated letter ({got} vs {want})"
            )));
        }
    }
    if pass.values().any(|c| c.abs() > 1e-12) {
        return Err(fail("passing part contains stray words".into()));
    }

    // Group the diagonal polynomials by outer word.
    let mut by_word: HashMap<FreeWord, Vec<(f64, i64)>> = HashMap::new();
    for ((w, shift), c) in corrections {
        if c.abs() > 1e-14 {
            by_word.entry(w).or_default().push((c, shift));
        }
    }
    let mut out: Vec<(Vec<Root>, Vec<(f64, i64)>)> = by_word
        .into_iter()
        .map(|(w, mut poly)| {
            poly.sort_by_key(|&(_, j)| std::cmp::Reverse(j));
            let letters = w
                .iter()
                .map(|&l| if l == 1 { Root::F1 } else { Root::F3 })
                .collect();
            (letters, poly)
        })
        .collect();
    out.sort_by_key(|(w, _)| w.len());
    Ok(E23Rule {
        pass_twist,
        corrections: out,
    })
}
