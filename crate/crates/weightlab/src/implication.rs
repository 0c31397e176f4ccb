//! The implication map between the conditions: proven edges, edges that
//! need a side condition, and non-implications with their witnesses.
//!
//! Three charts: "classes" (the weight classes `B1`, `Bp`, `RJ`, `RH`,
//! `Binf`, `AC`), "conditions" (`P1`..`P8`) and "p4-split" (`P4a`, `P4b`).
//! `RJ = P2`, `RH = P3`, `Binf = P7` and the union of the `Bp` is `P1`; the
//! intersection gets its own node `BpInt`.

use crate::conditions::{ConditionId, SweepConfig, Sweeper, Verdict};
use crate::error::{Error, Result};
use crate::families::{family_context, FamilyId, NamedFamily};
use crate::profile::Profile;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Node {
    P1,
    P2,
    P3,
    P4,
    P4a,
    P4b,
    P5,
    P6,
    P7,
    P8,
    B1,
    BpInt,
    AC,
}

pub const NODES: [Node; 13] = [
    Node::P1,
    Node::P2,
    Node::P3,
    Node::P4,
    Node::P4a,
    Node::P4b,
    Node::P5,
    Node::P6,
    Node::P7,
    Node::P8,
    Node::B1,
    Node::BpInt,
    Node::AC,
];

impl Node {
    fn idx(self) -> usize {
        NODES.iter().position(|n| *n == self).unwrap()
    }

    pub fn parse(s: &str) -> Option<Node> {
        NODES.iter().copied().find(|n| n.to_string().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Chart {
    Classes,
    Conditions,
    P4Split,
}

impl Chart {
    pub fn name(self) -> &'static str {
        match self {
            Chart::Classes => "classes",
            Chart::Conditions => "conditions",
            Chart::P4Split => "p4-split",
        }
    }
}

/// Side conditions: almost constant on top halves, or radially increasing
/// / decreasing with `0 < w(0) < inf`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Side {
    AC,
    INC,
    DEC,
}

#[derive(Clone, Debug, Serialize)]
pub struct Edge {
    pub from: Node,
    pub to: Node,
    pub chart: Chart,
}

#[derive(Clone, Debug, Serialize)]
pub struct CondEdge {
    pub from: Node,
    pub to: Node,
    pub side: Side,
}

/// `from` does not imply `to`; `witness` has `from` (and `also`) but not
/// `to`.
#[derive(Clone, Debug, Serialize)]
pub struct AntiEdge {
    pub from: Node,
    pub to: Node,
    pub witness: FamilyId,
    pub also: Vec<Node>,
    pub chart: Chart,
}

#[derive(Clone, Debug)]
pub struct ImplicationGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
    pub anti_edges: Vec<AntiEdge>,
    pub conditional: Vec<CondEdge>,
}

/// Which side conditions are in force for a given weight.
#[derive(Clone, Copy, Debug, Default)]
pub struct Context {
    pub ac: bool,
    pub inc: bool,
    pub dec: bool,
}

pub fn build_graph() -> ImplicationGraph {
    use Node::*;
    let e = |from, to, chart| Edge { from, to, chart };
    let edges = vec![
        e(P1, P2, Chart::Conditions),
        e(P2, P5, Chart::Conditions),
        e(P5, P4, Chart::Conditions),
        e(P8, P3, Chart::Conditions),
        e(P3, P6, Chart::Conditions),
        e(P6, P4, Chart::Conditions),
        e(P4, P7, Chart::Conditions),
        e(P6, P4a, Chart::P4Split),
        e(P4a, P4, Chart::P4Split),
        e(P2, P4b, Chart::P4Split),
        e(P4b, P5, Chart::P4Split),
        e(B1, BpInt, Chart::Classes),
        e(BpInt, P1, Chart::Classes),
        e(P2, P7, Chart::Classes),
        e(P3, P7, Chart::Classes),
    ];
    let mut conditional = Vec::new();
    // under AC everything from P1 to P8 collapses; P7 is implied by all of
    // them already, so P7 -> X closes the loop
    for to in [P1, P2, P3, P4, P4a, P4b, P5, P6, P8] {
        conditional.push(CondEdge { from: P7, to, side: Side::AC });
    }
    conditional.push(CondEdge { from: P4, to: AC, side: Side::DEC });
    conditional.push(CondEdge { from: P2, to: AC, side: Side::DEC });
    conditional.push(CondEdge { from: P3, to: AC, side: Side::DEC });
    conditional.push(CondEdge { from: P7, to: AC, side: Side::INC });
    let a = |from, to, witness, also: &[Node], chart| AntiEdge { from, to, witness, also: also.to_vec(), chart };
    let anti_edges = vec![
        a(P2, P1, FamilyId::Ex6_4, &[P8], Chart::Conditions),
        a(P5, P2, FamilyId::Ex6_3, &[P8], Chart::Conditions),
        a(P3, P8, FamilyId::Ex6_6, &[P1], Chart::Conditions),
        a(P6, P3, FamilyId::Ex6_5, &[P1], Chart::Conditions),
        a(P7, P4, FamilyId::Ex6_8, &[], Chart::Conditions),
        a(P8, P5, FamilyId::Ex6_2, &[], Chart::Conditions),
        a(P1, P6, FamilyId::Ex6_1, &[], Chart::Conditions),
        a(P4b, P2, FamilyId::ExP4_4, &[P8], Chart::P4Split),
        a(P5, P4b, FamilyId::ExP4_3, &[P8], Chart::P4Split),
        a(P4a, P6, FamilyId::ExP4_2, &[P1], Chart::P4Split),
        a(P4, P4a, FamilyId::ExP4_1, &[P1], Chart::P4Split),
        a(AC, B1, FamilyId::Ex6_9, &[P7], Chart::Classes),
        a(AC, P7, FamilyId::Ex6_10, &[], Chart::Classes),
        a(B1, P3, FamilyId::Ex6_1, &[], Chart::Classes),
        a(P3, P2, FamilyId::Ex6_3, &[], Chart::Classes),
        a(P2, P1, FamilyId::Ex6_4, &[P3], Chart::Classes),
        a(B1, AC, FamilyId::Ex6_6, &[P3], Chart::Classes),
        a(BpInt, B1, FamilyId::Ex6_7, &[P3], Chart::Classes),
    ];
    ImplicationGraph { nodes: NODES.to_vec(), edges, anti_edges, conditional }
}

impl ImplicationGraph {
    /// `reach[a][b]`: `a` implies `b` under `ctx` (reflexive).
    pub fn closure(&self, ctx: Context) -> Vec<Vec<bool>> {
        let n = NODES.len();
        let mut r = vec![vec![false; n]; n];
        for (i, row) in r.iter_mut().enumerate() {
            row[i] = true;
        }
        for e in &self.edges {
            r[e.from.idx()][e.to.idx()] = true;
        }
        for c in &self.conditional {
            let on = match c.side {
                Side::AC => ctx.ac,
                Side::INC => ctx.inc,
                Side::DEC => ctx.dec,
            };
            if on {
                r[c.from.idx()][c.to.idx()] = true;
            }
        }
        for k in 0..n {
            for i in 0..n {
                if r[i][k] {
                    for j in 0..n {
                        if r[k][j] {
                            r[i][j] = true;
                        }
                    }
                }
            }
        }
        r
    }

    pub fn implies(&self, a: Node, b: Node, ctx: Context) -> bool {
        self.closure(ctx)[a.idx()][b.idx()]
    }

    /// A directed cycle through distinct nodes under unconditional edges.
    pub fn has_cycle(&self) -> bool {
        let r = self.closure(Context::default());
        (0..NODES.len()).any(|i| (0..NODES.len()).any(|j| i != j && r[i][j] && r[j][i]))
    }

    /// Anti-edges contradicted by the unconditional closure.
    pub fn contradicted_anti_edges(&self) -> Vec<&AntiEdge> {
        let r = self.closure(Context::default());
        self.anti_edges.iter().filter(|a| r[a.from.idx()][a.to.idx()]).collect()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConsistencyViolation {
    pub family: String,
    pub from: String,
    pub to: String,
    pub from_verdict: String,
    pub to_verdict: String,
}

/// Every closure pair mapping a holding condition to a failing one. AC
/// edges switch on when `AC` holds; `ctx` supplies monotonicity. A
/// decreasing weight must also satisfy `P7`.
pub fn check_consistency(
    family: &str,
    verdicts: &BTreeMap<Node, Verdict>,
    graph: &ImplicationGraph,
    ctx: Context,
) -> Vec<ConsistencyViolation> {
    let ctx = Context { ac: ctx.ac || verdicts.get(&Node::AC).is_some_and(|v| v.holds()), ..ctx };
    let r = graph.closure(ctx);
    let mut out = Vec::new();
    for (a, va) in verdicts {
        if !va.holds() {
            continue;
        }
        for (b, vb) in verdicts {
            if a != b && vb.fails() && r[a.idx()][b.idx()] {
                out.push(ConsistencyViolation {
                    family: family.into(),
                    from: a.to_string(),
                    to: b.to_string(),
                    from_verdict: va.label().into(),
                    to_verdict: vb.label().into(),
                });
            }
        }
    }
    if ctx.dec {
        if let Some(v) = verdicts.get(&Node::P7).filter(|v| v.fails()) {
            out.push(ConsistencyViolation {
                family: family.into(),
                from: "DEC".into(),
                to: "P7".into(),
                from_verdict: "holds".into(),
                to_verdict: v.label().into(),
            });
        }
    }
    out
}

/// Verdicts of one family on every graph node.
#[derive(Clone, Debug, Serialize)]
pub struct FamilyVerdicts {
    pub family: FamilyId,
    pub verdicts: BTreeMap<Node, Verdict>,
}

/// Sweep a named family on every node. A non-integrable weight fails every
/// integral condition and is still swept for `AC`.
pub fn classify_family(id: FamilyId, cfg: SweepConfig) -> Result<FamilyVerdicts> {
    let p = NamedFamily::new(id).instantiate()?;
    classify_profile(id, &p, cfg)
}

pub fn classify_profile(id: FamilyId, p: &Profile, cfg: SweepConfig) -> Result<FamilyVerdicts> {
    let sw = Sweeper::new(p, cfg)?;
    let mut verdicts = BTreeMap::new();
    for n in NODES {
        let cond = ConditionId::parse(&n.to_string())?;
        let v = if !p.integrable() && n != Node::AC {
            Verdict::Fails { n: 0, value: "inf".into(), reason: "non-integrable".into() }
        } else {
            match sw.run(&cond) {
                Ok(r) => r.verdict,
                Err(Error::NonIntegrable | Error::DivergentMoment(_)) => {
                    Verdict::Fails { n: 0, value: "inf".into(), reason: "divergent moment".into() }
                }
                Err(e) => Verdict::Inconclusive { reason: e.to_string() },
            }
        };
        verdicts.insert(n, v);
    }
    Ok(FamilyVerdicts { family: id, verdicts })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CellKind {
    Edge,
    AntiEdge,
    Conditional,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Validated {
    Yes,
    No,
    Inconclusive,
}

impl Validated {
    pub fn name(self) -> &'static str {
        match self {
            Validated::Yes => "yes",
            Validated::No => "no",
            Validated::Inconclusive => "inconclusive",
        }
    }
}

/// One arrow of the figures with what the sweeps say about it.
#[derive(Clone, Debug, Serialize)]
pub struct FigureCell {
    pub from: Node,
    pub to: Node,
    pub kind: CellKind,
    /// Chart name, or the side condition of a conditional edge.
    pub group: String,
    pub witness: String,
    pub validated: Validated,
    pub note: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FigureReport {
    pub n_max: usize,
    pub divergence_factor: f64,
    pub cells: Vec<FigureCell>,
    pub violations: Vec<ConsistencyViolation>,
    pub families: Vec<FamilyVerdicts>,
}

impl FigureReport {
    /// 5 on a violation or a refuted anti-edge, else 4 on any inconclusive
    /// cell, else 0.
    pub fn exit_code(&self) -> i32 {
        if !self.violations.is_empty() || self.cells.iter().any(|c| c.validated == Validated::No) {
            5
        } else if self.cells.iter().any(|c| c.validated == Validated::Inconclusive) {
            4
        } else {
            0
        }
    }

    /// Columns `from,to,kind,witness,validated`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("from,to,kind,witness,validated\n");
        for c in &self.cells {
            let kind = match c.kind {
                CellKind::Edge => "edge",
                CellKind::AntiEdge => "anti_edge",
                CellKind::Conditional => "conditional",
            };
            out += &format!("{},{},{},{},{}\n", c.from, c.to, kind, c.witness, c.validated.name());
        }
        out
    }
}

/// Classify every named family and check the figures against the verdicts.
pub fn validate_figures(graph: &ImplicationGraph, cfg: SweepConfig) -> Result<FigureReport> {
    let fams = FamilyId::all().into_iter().map(|id| classify_family(id, cfg)).collect::<Result<Vec<_>>>()?;
    Ok(validate_verdicts(graph, fams, cfg))
}

/// The figure table from precomputed verdicts; a test can hand in a
/// corrupted graph or corrupted verdicts.
pub fn validate_verdicts(graph: &ImplicationGraph, fams: Vec<FamilyVerdicts>, cfg: SweepConfig) -> FigureReport {
    let ctx_of = |f: &FamilyVerdicts| {
        let ac = f.verdicts.get(&Node::AC).is_some_and(|v| v.holds());
        family_context(f.family, ac)
    };
    let mut violations = Vec::new();
    for f in &fams {
        violations.extend(check_consistency(&f.family.to_string(), &f.verdicts, graph, ctx_of(f)));
    }
    let conflict = |from: Node, to: Node, active: &dyn Fn(&FamilyVerdicts) -> bool| {
        let bad: Vec<String> = fams
            .iter()
            .filter(|f| active(f))
            .filter(|f| {
                f.verdicts.get(&from).is_some_and(|v| v.holds()) && f.verdicts.get(&to).is_some_and(|v| v.fails())
            })
            .map(|f| f.family.to_string())
            .collect();
        if bad.is_empty() {
            (Validated::Yes, String::new())
        } else {
            (Validated::No, format!("holds -> fails in {}", bad.join(" ")))
        }
    };
    let mut cells = Vec::new();
    for e in &graph.edges {
        let (validated, note) = conflict(e.from, e.to, &|_| true);
        cells.push(FigureCell {
            from: e.from,
            to: e.to,
            kind: CellKind::Edge,
            group: e.chart.name().into(),
            witness: String::new(),
            validated,
            note,
        });
    }
    for a in &graph.anti_edges {
        let (validated, note) = match fams.iter().find(|f| f.family == a.witness) {
            None => (Validated::Inconclusive, "witness not classified".to_string()),
            Some(f) => realize(a, &f.verdicts),
        };
        cells.push(FigureCell {
            from: a.from,
            to: a.to,
            kind: CellKind::AntiEdge,
            group: a.chart.name().into(),
            witness: a.witness.to_string(),
            validated,
            note,
        });
    }
    for c in &graph.conditional {
        let side = c.side;
        let active = |f: &FamilyVerdicts| {
            let ctx = ctx_of(f);
            match side {
                Side::AC => ctx.ac,
                Side::INC => ctx.inc,
                Side::DEC => ctx.dec,
            }
        };
        let (validated, note) = conflict(c.from, c.to, &active);
        cells.push(FigureCell {
            from: c.from,
            to: c.to,
            kind: CellKind::Conditional,
            group: format!("{side:?}"),
            witness: String::new(),
            validated,
            note,
        });
    }
    FigureReport { n_max: cfg.n_max, divergence_factor: cfg.factor, cells, violations, families: fams }
}

/// An anti-edge is realized when the witness has `from` and `also` but
/// not `to`.
fn realize(a: &AntiEdge, v: &BTreeMap<Node, Verdict>) -> (Validated, String) {
    let need: Vec<Node> = std::iter::once(a.from).chain(a.also.iter().copied()).collect();
    let get = |n: Node| v.get(&n).cloned().unwrap_or(Verdict::Inconclusive { reason: "not run".into() });
    let refuted: Vec<String> = need
        .iter()
        .filter(|n| get(**n).fails())
        .map(|n| format!("{n} fails"))
        .chain(get(a.to).holds().then(|| format!("{} holds", a.to)))
        .collect();
    if !refuted.is_empty() {
        return (Validated::No, refuted.join("; "));
    }
    let open: Vec<String> = need
        .iter()
        .chain(std::iter::once(&a.to))
        .filter(|n| matches!(get(**n), Verdict::Inconclusive { .. }))
        .map(|n| n.to_string())
        .collect();
    if open.is_empty() {
        (Validated::Yes, String::new())
    } else {
        (Validated::Inconclusive, format!("inconclusive: {}", open.join(" ")))
    }
}
