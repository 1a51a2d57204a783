//! Bipartite two-input boxes and the linear constraints that carve out the
//! no-signaling polytope.
//!
//! Outcomes are 0-based everywhere inside the crate. The JSON box format is
//! the only place they are written 1-based.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{Constraint, LinearProgram};
use crate::rational::{self, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BoxError {
    #[error("output cardinality must be at least 2, got {0}")]
    Cardinality(usize),
    #[error("outcome {outcome} out of range for {party} input {input} with {count} outcomes")]
    OutcomeRange {
        party: Party,
        input: usize,
        outcome: usize,
        count: usize,
    },
    #[error("input {0} out of range; inputs are 0 and 1")]
    InputRange(usize),
    #[error("table has {got} entries, scenario needs {expected}")]
    TableSize { expected: usize, got: usize },
    #[error("box table is missing entry {0}")]
    MissingEntry(Coord),
    #[error("box table lists entry {0} twice")]
    DuplicateEntry(Coord),
    #[error("scenario {from} does not embed into {to}")]
    Shrinking { from: Scenario, to: Scenario },
    #[error("box JSON: {0}")]
    Json(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice,
    Bob,
}

impl fmt::Display for Party {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Party::Alice => "Alice",
            Party::Bob => "Bob",
        })
    }
}

/// Output cardinalities for Alice's inputs `X ∈ {0,1}` and Bob's `Y ∈ {0,1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Scenario {
    #[serde(rename = "dA")]
    d_a: [usize; 2],
    #[serde(rename = "dB")]
    d_b: [usize; 2],
}

impl Scenario {
    pub fn new(d_a: [usize; 2], d_b: [usize; 2]) -> Result<Self, BoxError> {
        if let Some(&d) = d_a.iter().chain(&d_b).find(|&&d| d < 2) {
            return Err(BoxError::Cardinality(d));
        }
        Ok(Self { d_a, d_b })
    }

    /// Every input of both parties has `d` outcomes.
    pub fn symmetric(d: usize) -> Result<Self, BoxError> {
        Self::new([d, d], [d, d])
    }

    /// Alice's inputs have `da` outcomes, Bob's have `db`.
    pub fn parties(da: usize, db: usize) -> Result<Self, BoxError> {
        Self::new([da, da], [db, db])
    }

    /// `[dA0, dA1, dB0, dB1]`, the order used on the command line.
    pub fn from_dims(dims: [usize; 4]) -> Result<Self, BoxError> {
        Self::new([dims[0], dims[1]], [dims[2], dims[3]])
    }

    pub fn dims(&self) -> [usize; 4] {
        [self.d_a[0], self.d_a[1], self.d_b[0], self.d_b[1]]
    }

    pub fn d_a(&self, x: usize) -> usize {
        self.d_a[x]
    }

    pub fn d_b(&self, y: usize) -> usize {
        self.d_b[y]
    }

    pub fn outputs(&self, party: Party, input: usize) -> usize {
        match party {
            Party::Alice => self.d_a[input],
            Party::Bob => self.d_b[input],
        }
    }

    pub fn min_dim(&self) -> usize {
        self.dims().into_iter().min().expect("four cardinalities")
    }

    /// Same scenario with Alice's and/or Bob's inputs exchanged.
    pub fn swapped(&self, swap_alice: bool, swap_bob: bool) -> Scenario {
        let mut s = *self;
        if swap_alice {
            s.d_a.swap(0, 1);
        }
        if swap_bob {
            s.d_b.swap(0, 1);
        }
        s
    }

    /// Σ_{X,Y} d_X^A d_Y^B.
    pub fn num_coords(&self) -> usize {
        self.block_offset(2, 0)
    }

    /// Start of the `(x, y)` block in the lexicographic `(X, Y, a, b)` order.
    fn block_offset(&self, x: usize, y: usize) -> usize {
        let mut off = 0;
        for xx in 0..2 {
            for yy in 0..2 {
                if (xx, yy) == (x, y) {
                    return off;
                }
                off += self.d_a[xx] * self.d_b[yy];
            }
        }
        off
    }

    pub fn contains(&self, c: Coord) -> bool {
        c.x < 2 && c.y < 2 && c.a < self.d_a[c.x] && c.b < self.d_b[c.y]
    }

    /// Variable index of `c`. Panics if `c` lies outside the scenario.
    pub fn index(&self, c: Coord) -> usize {
        assert!(self.contains(c), "{c} outside scenario {self}");
        self.block_offset(c.x, c.y) + c.a * self.d_b[c.y] + c.b
    }

    /// All coordinates in index order.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..2).flat_map(move |x| {
            (0..2).flat_map(move |y| {
                (0..self.d_a[x])
                    .flat_map(move |a| (0..self.d_b[y]).map(move |b| Coord { x, y, a, b }))
            })
        })
    }

    /// True if every cardinality of `self` is at most the matching one in `other`.
    pub fn fits_in(&self, other: &Scenario) -> bool {
        self.dims().iter().zip(other.dims()).all(|(a, b)| *a <= b)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a0, a1, b0, b1] = self.dims();
        write!(f, "({a0},{a1},{b0},{b1})")
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            #[serde(rename = "dA")]
            d_a: [usize; 2],
            #[serde(rename = "dB")]
            d_b: [usize; 2],
        }
        let raw = Raw::deserialize(d)?;
        Scenario::new(raw.d_a, raw.d_b).map_err(serde::de::Error::custom)
    }
}

/// One cell `P(a, b | X=x, Y=y)` of a box, with 0-based outcomes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coord {
    pub x: usize,
    pub y: usize,
    pub a: usize,
    pub b: usize,
}

impl Coord {
    pub fn new(x: usize, y: usize, a: usize, b: usize) -> Self {
        Self { x, y, a, b }
    }
}

impl fmt::Display for Coord {
    /// Written with 1-based outcomes, as users see them.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "P(a={},b={}|X{},Y{})",
            self.a + 1,
            self.b + 1,
            self.x,
            self.y
        )
    }
}

/// A conditional probability table over a scenario. Tables that break
/// positivity, normalization or no-signaling are representable;
/// [`is_valid_box`] tells them apart.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JointBox {
    scenario: Scenario,
    table: Vec<Rational>,
}

impl JointBox {
    pub fn new(scenario: Scenario, table: Vec<Rational>) -> Result<Self, BoxError> {
        if table.len() != scenario.num_coords() {
            return Err(BoxError::TableSize {
                expected: scenario.num_coords(),
                got: table.len(),
            });
        }
        Ok(Self { scenario, table })
    }

    pub fn zeros(scenario: Scenario) -> Self {
        Self {
            scenario,
            table: vec![Rational::zero(); scenario.num_coords()],
        }
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(Coord) -> Rational) -> Self {
        let table = scenario.coords().map(&mut f).collect();
        Self { scenario, table }
    }

    /// Every block uniform: `P(a,b|X,Y) = 1/(d_X^A d_Y^B)`.
    pub fn uniform(scenario: Scenario) -> Self {
        Self::from_fn(scenario, |c| {
            Rational::new(
                1.into(),
                (scenario.d_a(c.x) * scenario.d_b(c.y)).into(),
            )
        })
    }

    pub fn scenario(&self) -> Scenario {
        self.scenario
    }

    pub fn table(&self) -> &[Rational] {
        &self.table
    }

    pub fn into_table(self) -> Vec<Rational> {
        self.table
    }

    pub fn get(&self, c: Coord) -> &Rational {
        &self.table[self.scenario.index(c)]
    }

    pub fn set(&mut self, c: Coord, p: Rational) {
        let i = self.scenario.index(c);
        self.table[i] = p;
    }

    /// Total probability of a set of cells.
    pub fn mass<'a>(&self, events: impl IntoIterator<Item = &'a Coord>) -> Rational {
        events.into_iter().map(|c| self.get(*c)).sum()
    }

    pub fn to_json(&self) -> BoxJson {
        BoxJson {
            scenario: self.scenario,
            table: self
                .scenario
                .coords()
                .zip(&self.table)
                .map(|(c, p)| EntryJson {
                    x: c.x,
                    y: c.y,
                    a: c.a + 1,
                    b: c.b + 1,
                    p: p.clone(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &BoxJson) -> Result<Self, BoxError> {
        let s = json.scenario;
        let mut table: Vec<Option<Rational>> = vec![None; s.num_coords()];
        for e in &json.table {
            if e.x > 1 {
                return Err(BoxError::InputRange(e.x));
            }
            if e.y > 1 {
                return Err(BoxError::InputRange(e.y));
            }
            let check = |party, input, outcome: usize| {
                let count = s.outputs(party, input);
                if outcome == 0 || outcome > count {
                    Err(BoxError::OutcomeRange {
                        party,
                        input,
                        outcome,
                        count,
                    })
                } else {
                    Ok(outcome - 1)
                }
            };
            let a = check(Party::Alice, e.x, e.a)?;
            let b = check(Party::Bob, e.y, e.b)?;
            let c = Coord::new(e.x, e.y, a, b);
            let slot = &mut table[s.index(c)];
            if slot.is_some() {
                return Err(BoxError::DuplicateEntry(c));
            }
            *slot = Some(e.p.clone());
        }
        let table = s
            .coords()
            .zip(table)
            .map(|(c, p)| p.ok_or(BoxError::MissingEntry(c)))
            .collect::<Result<_, _>>()?;
        Ok(Self { scenario: s, table })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("box serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self, BoxError> {
        let json: BoxJson = serde_json::from_str(s).map_err(|e| BoxError::Json(e.to_string()))?;
        Self::from_json(&json)
    }
}

/// Wire form of a box: `{"scenario": {"dA":[..],"dB":[..]}, "table": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxJson {
    pub scenario: Scenario,
    pub table: Vec<EntryJson>,
}

/// One table entry; `a` and `b` are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntryJson {
    pub x: usize,
    pub y: usize,
    pub a: usize,
    pub b: usize,
    #[serde(with = "rational::serde_str")]
    pub p: Rational,
}

/// What a constraint row expresses, used to name violations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConstraintLabel {
    Positivity {
        #[serde(serialize_with = "ser_coord")]
        coord: Coord,
    },
    Normalization {
        x: usize,
        y: usize,
    },
    /// Marginal of `party` for `input`/`outcome` must not depend on the far input.
    NoSignaling {
        party: Party,
        input: usize,
        #[serde(serialize_with = "ser_one_based")]
        outcome: usize,
    },
}

fn ser_one_based<S: serde::Serializer>(o: &usize, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u64(*o as u64 + 1)
}

fn ser_coord<S: serde::Serializer>(c: &Coord, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&c.to_string())
}

impl fmt::Display for ConstraintLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ConstraintLabel::Positivity { coord } => write!(f, "positivity of {coord}"),
            ConstraintLabel::Normalization { x, y } => write!(f, "normalization of block X{x},Y{y}"),
            ConstraintLabel::NoSignaling {
                party,
                input,
                outcome,
            } => {
                let far = match party {
                    Party::Alice => "Y",
                    Party::Bob => "X",
                };
                write!(
                    f,
                    "no-signaling: {party} marginal of outcome {} on input {input} must not depend on {far}",
                    outcome + 1
                )
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRow {
    pub label: ConstraintLabel,
    pub constraint: Constraint,
}

/// Constraint rows over the box coordinates of one scenario, indexed by
/// [`Scenario::index`].
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub scenario: Scenario,
    pub eq_rows: Vec<LabeledRow>,
    /// `row·x <= rhs`.
    pub ineq_rows: Vec<LabeledRow>,
}

impl ConstraintSystem {
    pub fn empty(scenario: Scenario) -> Self {
        Self {
            scenario,
            eq_rows: Vec::new(),
            ineq_rows: Vec::new(),
        }
    }

    pub fn extend(&mut self, other: ConstraintSystem) {
        assert_eq!(self.scenario, other.scenario, "mismatched scenarios");
        self.eq_rows.extend(other.eq_rows);
        self.ineq_rows.extend(other.ineq_rows);
    }

    /// Positivity, normalization and no-signaling together.
    pub fn polytope(scenario: Scenario) -> Self {
        let mut sys = build_positivity(scenario);
        sys.extend(build_normalization(scenario));
        sys.extend(build_nosignaling(scenario));
        sys
    }

    /// Turns the system into an LP with a zero objective. Positivity rows
    /// are dropped in favour of the LP's own nonnegativity.
    pub fn to_lp(&self) -> LinearProgram {
        let mut lp = LinearProgram::new(self.scenario.num_coords());
        for r in &self.eq_rows {
            lp.eq_constraints.push(r.constraint.clone());
        }
        for r in &self.ineq_rows {
            if !matches!(r.label, ConstraintLabel::Positivity { .. }) {
                lp.ineq_constraints.push(r.constraint.clone());
            }
        }
        lp
    }
}

fn zero_row(s: Scenario) -> Vec<Rational> {
    vec![Rational::zero(); s.num_coords()]
}

/// One `-P(a,b|X,Y) <= 0` row per coordinate.
pub fn build_positivity(s: Scenario) -> ConstraintSystem {
    let mut sys = ConstraintSystem::empty(s);
    for c in s.coords() {
        let mut row = zero_row(s);
        row[s.index(c)] = -Rational::one();
        sys.ineq_rows.push(LabeledRow {
            label: ConstraintLabel::Positivity { coord: c },
            constraint: Constraint::new(row, Rational::zero()),
        });
    }
    sys
}

/// Each of the four `(X, Y)` blocks sums to one.
pub fn build_normalization(s: Scenario) -> ConstraintSystem {
    let mut sys = ConstraintSystem::empty(s);
    for x in 0..2 {
        for y in 0..2 {
            let mut row = zero_row(s);
            for a in 0..s.d_a(x) {
                for b in 0..s.d_b(y) {
                    row[s.index(Coord::new(x, y, a, b))] = Rational::one();
                }
            }
            sys.eq_rows.push(LabeledRow {
                label: ConstraintLabel::Normalization { x, y },
                constraint: Constraint::new(row, Rational::one()),
            });
        }
    }
    sys
}

/// For each party, input and outcome, the marginal computed in the far
/// party's input-0 block equals the one from its input-1 block. All rows are
/// kept, including the one per (party, input) implied by normalization.
pub fn build_nosignaling(s: Scenario) -> ConstraintSystem {
    let mut sys = ConstraintSystem::empty(s);
    for x in 0..2 {
        for a in 0..s.d_a(x) {
            let mut row = zero_row(s);
            for b in 0..s.d_b(0) {
                row[s.index(Coord::new(x, 0, a, b))] += Rational::one();
            }
            for b in 0..s.d_b(1) {
                row[s.index(Coord::new(x, 1, a, b))] -= Rational::one();
            }
            sys.eq_rows.push(LabeledRow {
                label: ConstraintLabel::NoSignaling {
                    party: Party::Alice,
                    input: x,
                    outcome: a,
                },
                constraint: Constraint::new(row, Rational::zero()),
            });
        }
    }
    for y in 0..2 {
        for b in 0..s.d_b(y) {
            let mut row = zero_row(s);
            for a in 0..s.d_a(0) {
                row[s.index(Coord::new(0, y, a, b))] += Rational::one();
            }
            for a in 0..s.d_a(1) {
                row[s.index(Coord::new(1, y, a, b))] -= Rational::one();
            }
            sys.eq_rows.push(LabeledRow {
                label: ConstraintLabel::NoSignaling {
                    party: Party::Bob,
                    input: y,
                    outcome: b,
                },
                constraint: Constraint::new(row, Rational::zero()),
            });
        }
    }
    sys
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: ConstraintLabel,
    /// Left-hand side evaluated on the box.
    #[serde(with = "rational::serde_str")]
    pub value: Rational,
    #[serde(with = "rational::serde_str")]
    pub bound: Rational,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} (got {}, needs {})",
            self.constraint,
            rational::format(&self.value),
            rational::format(&self.bound)
        )
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ValidityReport {
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks positivity, normalization and no-signaling exactly and lists each
/// violated row. A positivity violation reports the entry and bound `0`.
pub fn is_valid_box(b: &JointBox) -> ValidityReport {
    let s = b.scenario();
    let mut violations = Vec::new();
    for c in s.coords() {
        let p = b.get(c);
        if p.is_negative() {
            violations.push(Violation {
                constraint: ConstraintLabel::Positivity { coord: c },
                value: p.clone(),
                bound: Rational::zero(),
            });
        }
    }
    let rows = build_normalization(s)
        .eq_rows
        .into_iter()
        .chain(build_nosignaling(s).eq_rows);
    for r in rows {
        let lhs = r.constraint.lhs(b.table());
        if lhs != r.constraint.rhs {
            violations.push(Violation {
                constraint: r.label,
                value: lhs,
                bound: r.constraint.rhs,
            });
        }
    }
    ValidityReport { violations }
}

/// Marginal probability of `outcome` for `party`'s `input`, summed over the
/// far party's input-0 block.
pub fn marginal(
    b: &JointBox,
    party: Party,
    input: usize,
    outcome: usize,
) -> Result<Rational, BoxError> {
    marginal_via(b, party, input, outcome, 0)
}

/// Marginal summed over the far party's `far_input` block.
pub fn marginal_via(
    b: &JointBox,
    party: Party,
    input: usize,
    outcome: usize,
    far_input: usize,
) -> Result<Rational, BoxError> {
    let s = b.scenario();
    if input > 1 {
        return Err(BoxError::InputRange(input));
    }
    if far_input > 1 {
        return Err(BoxError::InputRange(far_input));
    }
    let count = s.outputs(party, input);
    if outcome >= count {
        return Err(BoxError::OutcomeRange {
            party,
            input,
            outcome,
            count,
        });
    }
    Ok(match party {
        Party::Alice => (0..s.d_b(far_input))
            .map(|o| b.get(Coord::new(input, far_input, outcome, o)))
            .sum(),
        Party::Bob => (0..s.d_a(far_input))
            .map(|o| b.get(Coord::new(far_input, input, o, outcome)))
            .sum(),
    })
}

/// Σ_{X,Y} d_X^A d_Y^B − Σ_X d_X^A − Σ_Y d_Y^B.
pub fn polytope_dimension(s: Scenario) -> usize {
    let [a0, a1, b0, b1] = s.dims();
    s.num_coords() - (a0 + a1) - (b0 + b1)
}
