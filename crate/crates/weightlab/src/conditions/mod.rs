//! The condition functionals, evaluated scale by scale, and the sweep that
//! turns their samples into verdicts.

pub mod concentration;
pub mod functionals;
pub mod sweep;
pub mod verdict;

pub use concentration::Concentration;
pub use functionals::*;
pub use sweep::{classify, FunctionalSample, SweepConfig, SweepReport, Sweeper};
pub use verdict::{classify_series, Verdict};

use crate::error::{Error, Result};
use std::fmt;

/// A condition, optionally pinned to a parameter. Unpinned `P1`, `P3`, `P8`
/// and `P4` quantify existentially over their grids.
#[derive(Clone, Debug, PartialEq)]
pub enum ConditionId {
    P1(Option<f64>),
    P2,
    P3(Option<f64>),
    P4(Option<(f64, f64)>),
    P4a,
    P4b,
    P5,
    P6,
    P6e,
    P7,
    P8(Option<f64>),
    B1,
    /// `P1` for every `p` of the grid.
    BpInt,
    AC,
}

impl ConditionId {
    /// Everything `classify --conditions all` runs.
    pub fn all() -> Vec<ConditionId> {
        use ConditionId::*;
        vec![P1(None), P2, P3(None), P4(None), P4a, P4b, P5, P6, P6e, P7, P8(None), B1, BpInt, AC]
    }

    /// Name without parameters; also the graph node.
    pub fn node(&self) -> &'static str {
        use ConditionId::*;
        match self {
            P1(_) => "P1",
            P2 => "P2",
            P3(_) => "P3",
            P4(_) => "P4",
            P4a => "P4a",
            P4b => "P4b",
            P5 => "P5",
            P6 => "P6",
            P6e => "P6e",
            P7 => "P7",
            P8(_) => "P8",
            B1 => "B1",
            BpInt => "BpInt",
            AC => "AC",
        }
    }

    /// Parse `P2`, `P1(2)`, `P8(0.25)`, `P4(0.5,0.9)`.
    pub fn parse(s: &str) -> Result<ConditionId> {
        use ConditionId::*;
        let s = s.trim();
        let (head, args) = match s.find('(') {
            Some(i) if s.ends_with(')') => (&s[..i], Some(&s[i + 1..s.len() - 1])),
            Some(_) => return Err(Error::Malformed(format!("bad condition '{s}'"))),
            None => (s, None),
        };
        let nums: Vec<f64> = match args {
            None => vec![],
            Some(a) => a
                .split(',')
                .map(|t| t.trim().parse::<f64>().map_err(|_| Error::Malformed(format!("bad parameter in '{s}'"))))
                .collect::<Result<_>>()?,
        };
        let one = |lo: f64, hi: f64| -> Result<Option<f64>> {
            match nums.as_slice() {
                [] => Ok(None),
                [v] if *v > lo && *v < hi => Ok(Some(*v)),
                _ => Err(Error::Malformed(format!("parameter out of range in '{s}'"))),
            }
        };
        let bare = |c: ConditionId| if nums.is_empty() { Ok(c) } else { Err(Error::Malformed(format!("'{head}' takes no parameter"))) };
        match head.to_ascii_uppercase().as_str() {
            "P1" | "BPUNION" => Ok(P1(one(1.0, f64::INFINITY)?)),
            "P2" | "RJ" => bare(P2),
            "P3" | "RH" => Ok(P3(one(1.0, f64::INFINITY)?)),
            "P4" => match nums.as_slice() {
                [] => Ok(P4(None)),
                [a, b] if *a > 0.0 && *a < 1.0 && *b > 0.0 && *b < 1.0 => Ok(P4(Some((*a, *b)))),
                _ => Err(Error::Malformed(format!("P4 takes (alpha, beta) in (0,1): '{s}'"))),
            },
            "P4A" => bare(P4a),
            "P4B" => bare(P4b),
            "P5" => bare(P5),
            "P6" => bare(P6),
            "P6E" => bare(P6e),
            "P7" | "BINF" => bare(P7),
            "P8" => Ok(P8(one(0.0, 1.0 + f64::EPSILON)?)),
            "B1" => bare(B1),
            "BPINT" => bare(BpInt),
            "AC" => bare(AC),
            _ => Err(Error::Malformed(format!("unknown condition '{s}'"))),
        }
    }

    pub fn parse_list(s: &str) -> Result<Vec<ConditionId>> {
        if s.trim().eq_ignore_ascii_case("all") {
            return Ok(ConditionId::all());
        }
        // split on commas outside parentheses
        let mut out = Vec::new();
        let mut depth = 0;
        let mut start = 0;
        for (i, ch) in s.char_indices() {
            match ch {
                '(' => depth += 1,
                ')' => depth -= 1,
                ',' if depth == 0 => {
                    out.push(ConditionId::parse(&s[start..i])?);
                    start = i + 1;
                }
                _ => {}
            }
        }
        out.push(ConditionId::parse(&s[start..])?);
        Ok(out)
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConditionId::*;
        match self {
            P1(Some(p)) => write!(f, "P1({p})"),
            P3(Some(q)) => write!(f, "P3({q})"),
            P8(Some(b)) => write!(f, "P8({b})"),
            P4(Some((a, b))) => write!(f, "P4({a},{b})"),
            _ => write!(f, "{}", self.node()),
        }
    }
}

/// `{1 + 2^-j : j = 0..6} u {2, 3, 5, 10}`, shared by `P1` and `P3`.
pub fn exponent_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=6).map(|j| 1.0 + (-(j as f64)).exp2()).collect();
    for v in [3.0, 5.0, 10.0] {
        g.push(v);
    }
    g.sort_by(|a, b| a.partial_cmp(b).unwrap());
    g.dedup();
    g
}

/// `{0.1, ..., 0.9}` for the `P4` family.
pub fn tenths() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}
