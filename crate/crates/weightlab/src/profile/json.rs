//! Profile interchange format with decimal strings for exactness.

use super::{Coordinate, StepProfile, Tail};
use crate::error::{Error, Result};
use crate::numeric::Real;
use serde::{Deserialize, Serialize};

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct TailSpec {
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq)]
pub struct ProfileSpec {
    pub coordinate: String,
    pub breakpoints: Vec<String>,
    pub values: Vec<String>,
    pub tail: TailSpec,
}

fn parse_num(s: &str) -> Result<Real> {
    Real::parse(s).ok_or_else(|| Error::Malformed(format!("not a decimal: {s:?}")))
}

impl ProfileSpec {
    pub fn from_json(text: &str) -> Result<ProfileSpec> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn build(&self) -> Result<StepProfile> {
        let coord = match self.coordinate.as_str() {
            "u" => Coordinate::U,
            "s" => Coordinate::S,
            c => return Err(Error::Malformed(format!("unknown coordinate {c:?}"))),
        };
        let bps = self.breakpoints.iter().map(|s| parse_num(s)).collect::<Result<Vec<_>>>()?;
        let vals = self.values.iter().map(|s| parse_num(s)).collect::<Result<Vec<_>>>()?;
        let p = StepProfile::new(coord, bps, vals, Tail::forbid())?;
        match self.tail.mode.as_str() {
            "forbid" => Ok(p),
            "geometric" => {
                let rho = parse_num(self.tail.ratio.as_deref().ok_or_else(|| Error::Malformed("geometric tail needs ratio".into()))?)?;
                if rho.cmp_mid(&Real::zero()).is_le() || rho.cmp_mid(&Real::one()).is_ge() {
                    return Err(Error::Malformed("tail ratio must lie in (0, 1)".into()));
                }
                let t = p.geometric_tail(rho);
                Ok(p.with_tail(t))
            }
            m => Err(Error::Malformed(format!("unknown tail mode {m:?}"))),
        }
    }

    /// Serialize a profile; exact values print as fractions.
    pub fn from_profile(p: &StepProfile, tail: TailSpec) -> ProfileSpec {
        let show = |r: &Real| match r.as_rational() {
            Some(q) => q.to_string(),
            None => format!("{}", r.mid()),
        };
        ProfileSpec {
            coordinate: p.coord.tag().into(),
            breakpoints: p.breakpoints().iter().map(show).collect(),
            values: p.values().iter().map(show).collect(),
            tail,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }
}
