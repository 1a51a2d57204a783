//! Hardy-type nonlocality arguments over two-input boxes.
//!
//! An argument names one success event set on the designated input pair
//! `(X0, Y0)` and three conditions that must carry zero probability. The
//! conventional argument uses the single events of the multi-level Hardy test
//! (first outcome against last outcome); the relaxed argument uses the
//! cumulative events `X_i < Y_j`. The relaxed argument may replace its last
//! zero with an upper bound `p`.
//!
//! Outcome relabelings and input swaps are applied on top of these logical
//! events, so one argument type covers every local relabeling of the test.

use std::collections::HashSet;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::lp::{self, LpError, LpResult};
use crate::nosignaling::{is_valid_box, Coord, ConstraintSystem, JointBox, Scenario};
use crate::rational::{self, Rational};
use crate::vertices::{
    all_strategies, deterministic_box, nonlocal_vertex, NonlocalVertexLabel, Strategy,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HardyError {
    #[error("relabeling for {party} input {input} is not a permutation of {count} outcomes")]
    InvalidPermutation {
        party: &'static str,
        input: usize,
        count: usize,
    },
    #[error("bound p = {0} must satisfy 0 <= p < 1")]
    BoundRange(String),
    #[error("the conventional argument has no bounded condition; p must be 0")]
    ConventionalBound,
    #[error("local-realistic optimization needs p = 0")]
    LhvBound,
    #[error("box scenario {got} does not match argument scenario {expected}")]
    ScenarioMismatch { expected: Scenario, got: Scenario },
    #[error("box is not a valid no-signaling box: {0}")]
    InvalidBox(String),
    #[error("argument not satisfied: condition {condition} has mass {mass} (event {event})")]
    NotSatisfied {
        condition: usize,
        event: Coord,
        mass: String,
    },
    #[error("exhaustive relabeling search supports at most 4 outcomes per input, got {0}")]
    ExhaustiveTooLarge(usize),
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ArgumentKind {
    Conventional,
    Relaxed,
}

impl fmt::Display for ArgumentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ArgumentKind::Conventional => "conventional",
            ArgumentKind::Relaxed => "relaxed",
        })
    }
}

/// Maps the argument's logical inputs and outcomes onto the box.
///
/// Logical input `x` of Alice reads physical input `x ^ swap_alice`, and
/// logical outcome `o` on it is physical outcome `alice[x][o]`. Bob likewise.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Relabeling {
    pub alice: [Vec<usize>; 2],
    pub bob: [Vec<usize>; 2],
    pub swap_alice: bool,
    pub swap_bob: bool,
}

impl Relabeling {
    pub fn identity(s: Scenario) -> Self {
        Self {
            alice: [(0..s.d_a(0)).collect(), (0..s.d_a(1)).collect()],
            bob: [(0..s.d_b(0)).collect(), (0..s.d_b(1)).collect()],
            swap_alice: false,
            swap_bob: false,
        }
    }

    /// Identity except for the listed outcome permutations.
    pub fn with_alice(mut self, x: usize, perm: Vec<usize>) -> Self {
        self.alice[x] = perm;
        self
    }

    pub fn with_bob(mut self, y: usize, perm: Vec<usize>) -> Self {
        self.bob[y] = perm;
        self
    }

    pub fn is_identity(&self) -> bool {
        !self.swap_alice
            && !self.swap_bob
            && self
                .alice
                .iter()
                .chain(&self.bob)
                .all(|p| p.iter().enumerate().all(|(i, &v)| i == v))
    }

    fn validate(&self, s: Scenario) -> Result<(), HardyError> {
        let check = |party, input: usize, perm: &[usize], count: usize| {
            let mut seen = vec![false; count];
            let ok = perm.len() == count
                && perm
                    .iter()
                    .all(|&v| v < count && !std::mem::replace(&mut seen[v], true));
            if ok {
                Ok(())
            } else {
                Err(HardyError::InvalidPermutation {
                    party,
                    input,
                    count,
                })
            }
        };
        for x in 0..2 {
            let px = x ^ self.swap_alice as usize;
            check("Alice", x, &self.alice[x], s.d_a(px))?;
        }
        for y in 0..2 {
            let py = y ^ self.swap_bob as usize;
            check("Bob", y, &self.bob[y], s.d_b(py))?;
        }
        Ok(())
    }

    fn map(&self, x: usize, y: usize, a: usize, b: usize) -> Coord {
        Coord::new(
            x ^ self.swap_alice as usize,
            y ^ self.swap_bob as usize,
            self.alice[x][a],
            self.bob[y][b],
        )
    }
}

impl Serialize for Relabeling {
    /// 1-based outcomes, matching every other external format.
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Out {
            alice: [Vec<usize>; 2],
            bob: [Vec<usize>; 2],
            swap_alice: bool,
            swap_bob: bool,
        }
        let one = |p: &Vec<usize>| p.iter().map(|v| v + 1).collect::<Vec<_>>();
        Out {
            alice: [one(&self.alice[0]), one(&self.alice[1])],
            bob: [one(&self.bob[0]), one(&self.bob[1])],
            swap_alice: self.swap_alice,
            swap_bob: self.swap_bob,
        }
        .serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct HardyArgument {
    pub kind: ArgumentKind,
    pub scenario: Scenario,
    pub relabeling: Relabeling,
    /// Upper bound on the last condition; zero for a strict Hardy test.
    #[serde(rename = "p", with = "rational::serde_str")]
    pub last_condition_bound: Rational,
    /// Success direction flipped: relaxed events read `a > b` instead of
    /// `a < b`; conventional events have every input's outcomes reversed.
    pub reversed: bool,
}

/// Concrete event sets of an argument, in box coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArgumentEvents {
    pub success: Vec<Coord>,
    /// Conditions in order; only the last may carry a nonzero bound.
    pub zero: [Vec<Coord>; 3],
}

/// Logical events of one condition on logical input pair `(x, y)`.
#[derive(Debug, Clone)]
struct LogicalSet {
    x: usize,
    y: usize,
    pairs: Vec<(usize, usize)>,
}

impl HardyArgument {
    pub fn new(
        kind: ArgumentKind,
        scenario: Scenario,
        p: Rational,
        relabeling: Relabeling,
    ) -> Result<Self, HardyError> {
        if p.is_negative() || p >= Rational::one() {
            return Err(HardyError::BoundRange(rational::format(&p)));
        }
        if kind == ArgumentKind::Conventional && !p.is_zero() {
            return Err(HardyError::ConventionalBound);
        }
        relabeling.validate(scenario)?;
        Ok(Self {
            kind,
            scenario,
            relabeling,
            last_condition_bound: p,
            reversed: false,
        })
    }

    pub fn conventional(s: Scenario) -> Self {
        Self::new(ArgumentKind::Conventional, s, Rational::zero(), Relabeling::identity(s))
            .expect("identity relabeling is valid")
    }

    pub fn relaxed(s: Scenario) -> Self {
        Self::new(ArgumentKind::Relaxed, s, Rational::zero(), Relabeling::identity(s))
            .expect("identity relabeling is valid")
    }

    pub fn relaxed_with_bound(s: Scenario, p: Rational) -> Result<Self, HardyError> {
        Self::new(ArgumentKind::Relaxed, s, p, Relabeling::identity(s))
    }

    pub fn with_reversed(mut self, reversed: bool) -> Self {
        self.reversed = reversed;
        self
    }

    /// Cardinalities as the argument sees them, after input swaps.
    pub fn logical_scenario(&self) -> Scenario {
        self.scenario
            .swapped(self.relabeling.swap_alice, self.relabeling.swap_bob)
    }

    fn logical_sets(&self) -> (LogicalSet, [LogicalSet; 3]) {
        logical_sets(self.kind, self.logical_scenario(), self.reversed)
    }

    pub fn events(&self) -> ArgumentEvents {
        let map = |set: &LogicalSet| -> Vec<Coord> {
            set.pairs
                .iter()
                .map(|&(a, b)| self.relabeling.map(set.x, set.y, a, b))
                .collect()
        };
        let (success, zero) = self.logical_sets();
        ArgumentEvents {
            success: map(&success),
            zero: [map(&zero[0]), map(&zero[1]), map(&zero[2])],
        }
    }

    /// Bound on condition `i`.
    fn bound(&self, i: usize) -> Rational {
        if i == 2 {
            self.last_condition_bound.clone()
        } else {
            Rational::zero()
        }
    }
}

fn logical_sets(kind: ArgumentKind, s: Scenario, reversed: bool) -> (LogicalSet, [LogicalSet; 3]) {
    let block = |x: usize, y: usize, keep: &dyn Fn(usize, usize) -> bool| LogicalSet {
        x,
        y,
        pairs: (0..s.d_a(x))
            .flat_map(|a| (0..s.d_b(y)).map(move |b| (a, b)))
            .filter(|&(a, b)| keep(a, b))
            .collect(),
    };
    match kind {
        ArgumentKind::Relaxed => {
            let lt = |a: usize, b: usize| if reversed { a > b } else { a < b };
            let gt = |a: usize, b: usize| if reversed { a < b } else { a > b };
            (
                block(0, 0, &lt),
                [block(1, 0, &lt), block(1, 1, &gt), block(0, 1, &lt)],
            )
        }
        ArgumentKind::Conventional => {
            // first/last outcome of each input, swapped when reversed
            let first_a = |x: usize| if reversed { s.d_a(x) - 1 } else { 0 };
            let last_b = |y: usize| if reversed { 0 } else { s.d_b(y) - 1 };
            let (fa0, fa1) = (first_a(0), first_a(1));
            let (lb0, lb1) = (last_b(0), last_b(1));
            (
                block(0, 0, &|a, b| a == fa0 && b == lb0),
                [
                    block(1, 0, &|a, b| a != fa1 && b == lb0),
                    block(0, 1, &|a, b| a == fa0 && b != lb1),
                    block(1, 1, &|a, b| a == fa1 && b == lb1),
                ],
            )
        }
    }
}

/// Constructs the argument and its event sets in one step.
pub fn build_argument(
    kind: ArgumentKind,
    s: Scenario,
    p: Rational,
    relabeling: Relabeling,
) -> Result<(HardyArgument, ArgumentEvents), HardyError> {
    let arg = HardyArgument::new(kind, s, p, relabeling)?;
    let events = arg.events();
    Ok((arg, events))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    #[serde(rename = "ns")]
    NoSignaling,
    #[serde(rename = "lhv")]
    LocalRealistic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationReport {
    pub argument: HardyArgument,
    pub optimum: Rational,
    pub witness: JointBox,
    pub regime: Regime,
}

impl OptimizationReport {
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "argument": self.argument,
            "regime": self.regime,
            "optimum": rational::format(&self.optimum),
            "optimum_decimal": rational::decimal(&self.optimum, 6),
            "witness": self.witness.to_json(),
        })
    }
}

/// Maximum success probability over the no-signaling polytope subject to the
/// argument's conditions, solved exactly.
pub fn max_success_ns(arg: &HardyArgument) -> Result<OptimizationReport, HardyError> {
    let s = arg.scenario;
    let ev = arg.events();
    let indicator = |set: &[Coord]| {
        let mut row = vec![Rational::zero(); s.num_coords()];
        for c in set {
            row[s.index(*c)] = Rational::one();
        }
        row
    };
    let mut lp = ConstraintSystem::polytope(s)
        .to_lp()
        .with_objective(indicator(&ev.success));
    lp.add_eq(indicator(&ev.zero[0]), Rational::zero());
    lp.add_eq(indicator(&ev.zero[1]), Rational::zero());
    lp.add_le(indicator(&ev.zero[2]), arg.last_condition_bound.clone());
    match lp::solve_max(&lp)? {
        LpResult::Optimal { value, solution } => Ok(OptimizationReport {
            argument: arg.clone(),
            optimum: value,
            witness: JointBox::new(s, solution).expect("solution has one entry per coordinate"),
            regime: Regime::NoSignaling,
        }),
        other => Err(HardyError::Internal(format!(
            "Hardy LP reported {:?}",
            other.status()
        ))),
    }
}

/// Success probability of the best deterministic local strategy that meets
/// every zero condition. Mixtures cannot do better than their best
/// component, so this is the local-realistic optimum.
pub fn max_success_lhv(arg: &HardyArgument) -> Result<OptimizationReport, HardyError> {
    if !arg.last_condition_bound.is_zero() {
        return Err(HardyError::LhvBound);
    }
    let s = arg.scenario;
    let ev = arg.events();
    let success: HashSet<Coord> = ev.success.iter().copied().collect();
    let zeros: Vec<HashSet<Coord>> = ev
        .zero
        .iter()
        .map(|z| z.iter().copied().collect())
        .collect();
    let cells = |st: &Strategy| {
        [(0, 0), (0, 1), (1, 0), (1, 1)].map(|(x, y)| Coord::new(x, y, st.a[x], st.b[y]))
    };
    let mut best: Option<(usize, Strategy)> = None;
    for st in all_strategies(s) {
        let cs = cells(&st);
        if zeros.iter().any(|z| cs.iter().any(|c| z.contains(c))) {
            continue;
        }
        let hits = cs.iter().filter(|c| success.contains(c)).count();
        if best.is_none_or(|(h, _)| hits > h) {
            best = Some((hits, st));
        }
    }
    let (hits, st) = best.ok_or_else(|| {
        HardyError::Internal("no deterministic strategy meets the zero conditions".into())
    })?;
    Ok(OptimizationReport {
        argument: arg.clone(),
        optimum: Rational::from_integer(hits.into()),
        witness: deterministic_box(s, st),
        regime: Regime::LocalRealistic,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PpOutcome {
    Satisfied(Rational),
    /// Condition `condition` (0-based) exceeds its bound; `event` is the
    /// first cell of that condition with nonzero probability.
    NotSatisfied {
        condition: usize,
        event: Coord,
        mass: Rational,
    },
}

impl PpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            PpOutcome::Satisfied(v) => Some(v),
            PpOutcome::NotSatisfied { .. } => None,
        }
    }

    fn into_result(self) -> Result<Rational, HardyError> {
        match self {
            PpOutcome::Satisfied(v) => Ok(v),
            PpOutcome::NotSatisfied {
                condition,
                event,
                mass,
            } => Err(HardyError::NotSatisfied {
                condition,
                event,
                mass: rational::format(&mass),
            }),
        }
    }
}

fn check_box(b: &JointBox, arg: &HardyArgument) -> Result<(), HardyError> {
    if b.scenario() != arg.scenario {
        return Err(HardyError::ScenarioMismatch {
            expected: arg.scenario,
            got: b.scenario(),
        });
    }
    let report = is_valid_box(b);
    match report.violations.first() {
        Some(v) => Err(HardyError::InvalidBox(v.to_string())),
        None => Ok(()),
    }
}

/// Paradoxical probability: the success mass, provided every condition holds.
pub fn evaluate_pp(b: &JointBox, arg: &HardyArgument) -> Result<PpOutcome, HardyError> {
    check_box(b, arg)?;
    let ev = arg.events();
    for (i, set) in ev.zero.iter().enumerate() {
        let mass = b.mass(set);
        if mass > arg.bound(i) {
            let event = *set
                .iter()
                .find(|c| !b.get(**c).is_zero())
                .expect("positive mass has a nonzero cell");
            return Ok(PpOutcome::NotSatisfied {
                condition: i,
                event,
                mass,
            });
        }
    }
    Ok(PpOutcome::Satisfied(b.mass(&ev.success)))
}

/// Which relabelings of each input to try.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RelabelSearch {
    /// Cyclic shifts composed with full reversal (the dihedral group).
    #[default]
    Cyclic,
    /// Every permutation; inputs may have at most 4 outcomes.
    Exhaustive,
}

fn dihedral(d: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::with_capacity(2 * d);
    for k in 0..d {
        out.push((0..d).map(|o| (o + k) % d).collect());
    }
    for k in 0..d {
        let p: Vec<usize> = (0..d).map(|o| (d - 1 - o + k) % d).collect();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                prefix.push(v);
                rec(prefix, used, out);
                prefix.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

impl RelabelSearch {
    fn group(self, d: usize) -> Result<Vec<Vec<usize>>, HardyError> {
        match self {
            RelabelSearch::Cyclic => Ok(dihedral(d)),
            RelabelSearch::Exhaustive if d <= 4 => Ok(permutations(d)),
            RelabelSearch::Exhaustive => Err(HardyError::ExhaustiveTooLarge(d)),
        }
    }
}

/// A relabeled variant of a base argument whose conditions the box meets.
#[derive(Debug, Clone)]
struct Candidate {
    argument: HardyArgument,
    success: Vec<Coord>,
    mass: Rational,
}

/// Enumerates relabelings `base ∘ g` (for `g` in the search group on every
/// logical input) and both success directions, keeping the first satisfied
/// variant for each distinct success set. Input swaps of `base` are kept.
fn satisfied_variants(
    b: &JointBox,
    base: &HardyArgument,
    search: RelabelSearch,
) -> Result<Vec<Candidate>, HardyError> {
    let ls = base.logical_scenario();
    let groups_a = [search.group(ls.d_a(0))?, search.group(ls.d_a(1))?];
    let groups_b = [search.group(ls.d_b(0))?, search.group(ls.d_b(1))?];
    let compose = |basep: &[usize], g: &[usize]| -> Vec<usize> { g.iter().map(|&o| basep[o]).collect() };
    let rel_a: [Vec<Vec<usize>>; 2] = [0, 1].map(|x| {
        groups_a[x].iter().map(|g| compose(&base.relabeling.alice[x], g)).collect()
    });
    let rel_b: [Vec<Vec<usize>>; 2] = [0, 1].map(|y| {
        groups_b[y].iter().map(|g| compose(&base.relabeling.bob[y], g)).collect()
    });
    let sw_a = base.relabeling.swap_alice as usize;
    let sw_b = base.relabeling.swap_bob as usize;
    let mass_of = |set: &LogicalSet, pa: &[usize], pb: &[usize]| -> Rational {
        set.pairs
            .iter()
            .map(|&(a, bb)| b.get(Coord::new(set.x ^ sw_a, set.y ^ sw_b, pa[a], pb[bb])))
            .sum()
    };

    let mut seen: HashSet<Vec<Coord>> = HashSet::new();
    let mut out = Vec::new();
    for reversed in [base.reversed, !base.reversed] {
        let (succ, conds) = logical_sets(base.kind, ls, reversed);
        // sat[c][i][j]: condition c holds with Alice relabeling i and Bob
        // relabeling j on the condition's logical inputs
        let sat: Vec<Vec<Vec<bool>>> = conds
            .iter()
            .enumerate()
            .map(|(ci, set)| {
                let bound = base.bound(ci);
                rel_a[set.x]
                    .iter()
                    .map(|pa| {
                        rel_b[set.y]
                            .iter()
                            .map(|pb| mass_of(set, pa, pb) <= bound)
                            .collect()
                    })
                    .collect()
            })
            .collect();
        for i0 in 0..rel_a[0].len() {
            for j0 in 0..rel_b[0].len() {
                let mut success: Vec<Coord> = succ
                    .pairs
                    .iter()
                    .map(|&(a, bb)| Coord::new(sw_a, sw_b, rel_a[0][i0][a], rel_b[0][j0][bb]))
                    .collect();
                success.sort();
                if seen.contains(&success) {
                    continue;
                }
                let mut found = None;
                'search: for i1 in 0..rel_a[1].len() {
                    for j1 in 0..rel_b[1].len() {
                        let ai = [i0, i1];
                        let bj = [j0, j1];
                        if conds
                            .iter()
                            .enumerate()
                            .all(|(c, set)| sat[c][ai[set.x]][bj[set.y]])
                        {
                            found = Some((i1, j1));
                            break 'search;
                        }
                    }
                }
                let Some((i1, j1)) = found else { continue };
                seen.insert(success.clone());
                let argument = HardyArgument {
                    kind: base.kind,
                    scenario: base.scenario,
                    relabeling: Relabeling {
                        alice: [rel_a[0][i0].clone(), rel_a[1][i1].clone()],
                        bob: [rel_b[0][j0].clone(), rel_b[1][j1].clone()],
                        swap_alice: base.relabeling.swap_alice,
                        swap_bob: base.relabeling.swap_bob,
                    },
                    last_condition_bound: base.last_condition_bound.clone(),
                    reversed,
                };
                let mass = b.mass(&success);
                out.push(Candidate {
                    argument,
                    success,
                    mass,
                });
            }
        }
    }
    Ok(out)
}

/// The relabeling of `base` that the box satisfies with the largest success
/// mass, ties broken by search order.
pub fn best_relabeling(
    b: &JointBox,
    base: &HardyArgument,
    search: RelabelSearch,
) -> Result<Option<(HardyArgument, Rational)>, HardyError> {
    check_box(b, base)?;
    let mut best: Option<Candidate> = None;
    for c in satisfied_variants(b, base, search)? {
        if best.as_ref().is_none_or(|bc| c.mass > bc.mass) {
            best = Some(c);
        }
    }
    Ok(best.map(|c| (c.argument, c.mass)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PnReport {
    pub pp: Rational,
    pub pn: Rational,
    /// Base argument first, then the complementary arguments.
    pub family: Vec<HardyArgument>,
}

impl PnReport {
    pub fn ppc(&self) -> Rational {
        &self.pn - &self.pp
    }
}

/// Probability of witnessing nonlocality: the largest total success mass of
/// a family of arguments that contains `base`, consists of relabelings of
/// `base` (same designated input pair, either success direction), is met by
/// the box, and has pairwise disjoint success sets.
pub fn compute_pn(
    b: &JointBox,
    base: &HardyArgument,
    search: RelabelSearch,
) -> Result<PnReport, HardyError> {
    let pp = evaluate_pp(b, base)?.into_result()?;
    let s = b.scenario();
    let pair = Coord::new(
        base.relabeling.swap_alice as usize,
        base.relabeling.swap_bob as usize,
        0,
        0,
    );
    let width = s.d_b(pair.y);
    let bit = |c: &Coord| c.a * width + c.b;
    let words = (s.d_a(pair.x) * width).div_ceil(64);
    let mask = |set: &[Coord]| {
        let mut m = vec![0u64; words];
        for c in set {
            let k = bit(c);
            m[k / 64] |= 1 << (k % 64);
        }
        m
    };
    let disjoint = |m: &[u64], n: &[u64]| m.iter().zip(n).all(|(x, y)| x & y == 0);

    let base_mask = mask(&base.events().success);
    let mut cands: Vec<(Vec<u64>, Candidate)> = satisfied_variants(b, base, search)?
        .into_iter()
        .filter(|c| c.mass.is_positive())
        .map(|c| (mask(&c.success), c))
        .filter(|(m, _)| disjoint(m, &base_mask))
        .collect();
    // heaviest first; stable sort keeps search order among equals
    cands.sort_by(|x, y| y.1.mass.cmp(&x.1.mass));

    let pair_total: Rational = (0..s.d_a(pair.x))
        .flat_map(|a| (0..width).map(move |bb| (a, bb)))
        .map(|(a, bb)| b.get(Coord::new(pair.x, pair.y, a, bb)))
        .sum();

    struct Search<'a> {
        cands: &'a [(Vec<u64>, Candidate)],
        cap: Rational,
        best: Rational,
        best_set: Vec<usize>,
    }
    impl Search<'_> {
        fn run(&mut self, from: usize, used: &[u64], current: &Rational, chosen: &mut Vec<usize>) {
            if *current > self.best {
                self.best = current.clone();
                self.best_set = chosen.clone();
            }
            if self.best >= self.cap {
                return;
            }
            let free: Vec<usize> = (from..self.cands.len())
                .filter(|&k| self.cands[k].0.iter().zip(used).all(|(x, y)| x & y == 0))
                .collect();
            let optimistic: Rational = free.iter().map(|&k| &self.cands[k].1.mass).sum();
            if current + &optimistic <= self.best {
                return;
            }
            for &k in &free {
                let next: Vec<u64> = used.iter().zip(&self.cands[k].0).map(|(x, y)| x | y).collect();
                chosen.push(k);
                self.run(k + 1, &next, &(current + &self.cands[k].1.mass), chosen);
                chosen.pop();
                if self.best >= self.cap {
                    return;
                }
            }
        }
    }
    let mut search_state = Search {
        cands: &cands,
        cap: pair_total - &pp,
        best: Rational::zero(),
        best_set: Vec::new(),
    };
    search_state.run(0, &base_mask, &Rational::zero(), &mut Vec::new());

    let mut family = vec![base.clone()];
    family.extend(search_state.best_set.iter().map(|&k| cands[k].1.argument.clone()));
    Ok(PnReport {
        pn: &pp + &search_state.best,
        pp,
        family,
    })
}

/// Contribution of complementary events: `PN − PP`.
pub fn ppc(b: &JointBox, base: &HardyArgument, search: RelabelSearch) -> Result<Rational, HardyError> {
    Ok(compute_pn(b, base, search)?.ppc())
}

/// Nonlocal vertex (first in label order) that meets the argument with the
/// largest paradoxical probability.
pub fn best_nonlocal_vertex(
    arg: &HardyArgument,
) -> Result<Option<(NonlocalVertexLabel, JointBox, Rational)>, HardyError> {
    let d = arg.scenario.min_dim();
    let mut best: Option<(NonlocalVertexLabel, JointBox, Rational)> = None;
    for alpha in 0..d {
        for beta in 0..d {
            for gamma in 0..d {
                let label = NonlocalVertexLabel::new(alpha, beta, gamma);
                let v = nonlocal_vertex(arg.scenario, label).expect("labels in range");
                if let PpOutcome::Satisfied(pp) = evaluate_pp(&v, arg)? {
                    if best.as_ref().is_none_or(|(_, _, bp)| pp > *bp) {
                        best = Some((label, v, pp));
                    }
                }
            }
        }
    }
    Ok(best)
}

/// Known quantum optimum, carried as a documented constant only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuantumReference {
    /// Closed form of the constant.
    pub expression: &'static str,
    /// Decimal approximation; the value is irrational.
    pub approx: f64,
    pub note: &'static str,
}

/// Two-qubit Hardy optimum (5√5 − 11)/2, which quantum theory does not
/// improve in higher dimension. No value is carried for relaxed tests with
/// more than two outcomes.
pub fn quantum_reference(kind: ArgumentKind, d: usize) -> Option<QuantumReference> {
    let approx = (5.0 * 5f64.sqrt() - 11.0) / 2.0;
    match (kind, d) {
        (_, 2) => Some(QuantumReference {
            expression: "(5*sqrt(5)-11)/2",
            approx,
            note: "reference only: two-qubit Hardy optimum, irrational",
        }),
        (ArgumentKind::Conventional, d) if d > 2 => Some(QuantumReference {
            expression: "(5*sqrt(5)-11)/2",
            approx,
            note: "reference only: dimension independent in QM",
        }),
        _ => None,
    }
}
