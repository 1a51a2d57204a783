//! Closed-form extremal boxes of the two-input no-signaling polytope and
//! exact locality tests.
//!
//! Both families live on the first `d = min_dim` outcomes of every input;
//! larger inputs receive zero probability on their extra outcomes.

use std::collections::HashSet;

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::lp::{self, LinearProgram, LpError};
use crate::nosignaling::{is_valid_box, BoxError, Coord, JointBox, Scenario};
use crate::rational::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VertexError {
    #[error("label {name}={value} out of range 0..{d}")]
    LabelRange {
        name: &'static str,
        value: usize,
        d: usize,
    },
    #[error("box is not a valid no-signaling box: {0}")]
    InvalidBox(String),
    #[error(transparent)]
    Box(#[from] BoxError),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// `a = αX ⊕ β`, `b = γY ⊕ δ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LocalVertexLabel {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
    pub delta: usize,
}

impl LocalVertexLabel {
    pub fn new(alpha: usize, beta: usize, gamma: usize, delta: usize) -> Self {
        Self {
            alpha,
            beta,
            gamma,
            delta,
        }
    }
}

/// `b ⊖ a = XY ⊕ αX ⊕ βY ⊕ γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NonlocalVertexLabel {
    pub alpha: usize,
    pub beta: usize,
    pub gamma: usize,
}

impl NonlocalVertexLabel {
    pub fn new(alpha: usize, beta: usize, gamma: usize) -> Self {
        Self { alpha, beta, gamma }
    }
}

fn check_label(name: &'static str, value: usize, d: usize) -> Result<(), VertexError> {
    if value < d {
        Ok(())
    } else {
        Err(VertexError::LabelRange { name, value, d })
    }
}

pub fn local_vertex(s: Scenario, l: LocalVertexLabel) -> Result<JointBox, VertexError> {
    let d = s.min_dim();
    check_label("alpha", l.alpha, d)?;
    check_label("beta", l.beta, d)?;
    check_label("gamma", l.gamma, d)?;
    check_label("delta", l.delta, d)?;
    let strategy = Strategy {
        a: [l.beta, (l.alpha + l.beta) % d],
        b: [l.delta, (l.gamma + l.delta) % d],
    };
    Ok(deterministic_box(s, strategy))
}

pub fn nonlocal_vertex(s: Scenario, l: NonlocalVertexLabel) -> Result<JointBox, VertexError> {
    let d = s.min_dim();
    check_label("alpha", l.alpha, d)?;
    check_label("beta", l.beta, d)?;
    check_label("gamma", l.gamma, d)?;
    let weight = Rational::new(1.into(), d.into());
    Ok(JointBox::from_fn(s, |c| {
        if c.a >= d || c.b >= d {
            return Rational::zero();
        }
        let diff = (c.b + d - c.a) % d;
        let rhs = (c.x * c.y + l.alpha * c.x + l.beta * c.y + l.gamma) % d;
        if diff == rhs {
            weight.clone()
        } else {
            Rational::zero()
        }
    }))
}

/// The Popescu–Rohrlich box on two outcomes: `b ⊖ a = XY`.
pub fn pr_box() -> JointBox {
    let s = Scenario::symmetric(2).expect("2 is a valid cardinality");
    nonlocal_vertex(s, NonlocalVertexLabel::new(0, 0, 0)).expect("labels in range")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(tag = "kind", content = "label", rename_all = "lowercase")]
pub enum VertexLabel {
    Local(LocalVertexLabel),
    Nonlocal(NonlocalVertexLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexKind {
    Local,
    Nonlocal,
    All,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub label: VertexLabel,
    pub table: JointBox,
}

/// Every label of the requested families in lexicographic order, locals
/// first, with later duplicates of an identical table removed.
pub fn enumerate_vertices(s: Scenario, kind: VertexKind) -> Vec<Vertex> {
    let d = s.min_dim();
    let mut out = Vec::new();
    if matches!(kind, VertexKind::Local | VertexKind::All) {
        for alpha in 0..d {
            for beta in 0..d {
                for gamma in 0..d {
                    for delta in 0..d {
                        let l = LocalVertexLabel::new(alpha, beta, gamma, delta);
                        out.push(Vertex {
                            label: VertexLabel::Local(l),
                            table: local_vertex(s, l).expect("labels in range"),
                        });
                    }
                }
            }
        }
    }
    if matches!(kind, VertexKind::Nonlocal | VertexKind::All) {
        for alpha in 0..d {
            for beta in 0..d {
                for gamma in 0..d {
                    let l = NonlocalVertexLabel::new(alpha, beta, gamma);
                    out.push(Vertex {
                        label: VertexLabel::Nonlocal(l),
                        table: nonlocal_vertex(s, l).expect("labels in range"),
                    });
                }
            }
        }
    }
    let mut seen = HashSet::new();
    out.retain(|v| seen.insert(v.table.clone()));
    out
}

/// A deterministic local strategy: Alice answers `a[X]`, Bob answers `b[Y]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Strategy {
    pub a: [usize; 2],
    pub b: [usize; 2],
}

pub fn deterministic_box(s: Scenario, st: Strategy) -> JointBox {
    JointBox::from_fn(s, |c| {
        if c.a == st.a[c.x] && c.b == st.b[c.y] {
            Rational::one()
        } else {
            Rational::zero()
        }
    })
}

/// All `Π d_X^A · Π d_Y^B` deterministic strategies in lexicographic order
/// of `(a0, a1, b0, b1)`.
pub fn all_strategies(s: Scenario) -> Vec<Strategy> {
    let mut out = Vec::new();
    for a0 in 0..s.d_a(0) {
        for a1 in 0..s.d_a(1) {
            for b0 in 0..s.d_b(0) {
                for b1 in 0..s.d_b(1) {
                    out.push(Strategy {
                        a: [a0, a1],
                        b: [b0, b1],
                    });
                }
            }
        }
    }
    out
}

/// Weights `w ≥ 0`, `Σ w = 1`, `Σ w_i g_i = target`, if any exist.
pub fn convex_decomposition(
    target: &JointBox,
    generators: &[JointBox],
) -> Result<Option<Vec<Rational>>, VertexError> {
    let s = target.scenario();
    for g in generators {
        if g.scenario() != s {
            return Err(BoxError::Shrinking {
                from: g.scenario(),
                to: s,
            }
            .into());
        }
    }
    let mut lp = LinearProgram::new(generators.len());
    for (i, p) in target.table().iter().enumerate() {
        let row = generators.iter().map(|g| g.table()[i].clone()).collect();
        lp.add_eq(row, p.clone());
    }
    lp.add_eq(vec![Rational::one(); generators.len()], Rational::one());
    Ok(lp::find_feasible_point(&lp)?)
}

/// Mixture weights over [`all_strategies`] reproducing `b`, if `b` is local.
pub fn local_decomposition(b: &JointBox) -> Result<Option<Vec<Rational>>, VertexError> {
    let report = is_valid_box(b);
    if !report.is_valid() {
        let first = report.violations[0].to_string();
        return Err(VertexError::InvalidBox(first));
    }
    let s = b.scenario();
    let gens: Vec<JointBox> = all_strategies(s)
        .into_iter()
        .map(|st| deterministic_box(s, st))
        .collect();
    convex_decomposition(b, &gens)
}

/// Exact membership in the local polytope.
pub fn is_local(b: &JointBox) -> Result<bool, VertexError> {
    Ok(local_decomposition(b)?.is_some())
}

/// Pads `b` with zero-probability outcomes up to `target`'s cardinalities.
pub fn embed(b: &JointBox, target: Scenario) -> Result<JointBox, VertexError> {
    let from = b.scenario();
    if !from.fits_in(&target) {
        return Err(BoxError::Shrinking { from, to: target }.into());
    }
    Ok(JointBox::from_fn(target, |c| {
        if from.contains(c) {
            b.get(c).clone()
        } else {
            Rational::zero()
        }
    }))
}

/// Dimension of the affine hull of `boxes`, from the exact rank of the
/// differences to the first box.
pub fn affine_dimension(boxes: &[JointBox]) -> usize {
    let Some(first) = boxes.first() else {
        return 0;
    };
    let diffs: Vec<Vec<Rational>> = boxes[1..]
        .iter()
        .map(|b| {
            b.table()
                .iter()
                .zip(first.table())
                .map(|(p, q)| p - q)
                .collect()
        })
        .collect();
    lp::rank(&diffs)
}

/// Coordinates with nonzero probability, in index order.
pub fn support(b: &JointBox) -> Vec<Coord> {
    b.scenario()
        .coords()
        .filter(|c| !b.get(*c).is_zero())
        .collect()
}
