//! Depth-by-depth sweeps. The sample at depth `n` is the worst value over
//! candidate scales in `(2^-n-1, 2^-n]`: the dyadic scale itself and points
//! just above each breakpoint in the window, where step profiles put their
//! extremes.

use super::concentration::Concentration;
use super::functionals::*;
use super::verdict::{all_hold, any_holds, classify_series, Verdict};
use super::{exponent_grid, tenths, ConditionId};
use crate::error::{Error, Result};
use crate::numeric::Real;
use crate::profile::{s_to_u, Coordinate, Profile};
use rayon::prelude::*;
use serde::ser::{SerializeMap, Serializer};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Mutex, OnceLock};

#[derive(Clone, Copy, Debug)]
pub struct SweepConfig {
    pub n_max: usize,
    pub factor: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig { n_max: 40, factor: 1e3 }
    }
}

#[derive(Clone, Debug)]
pub struct FunctionalSample {
    pub n: usize,
    pub value: Real,
    pub aux: BTreeMap<String, String>,
}

impl Serialize for FunctionalSample {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let (lo, hi) = self.value.render();
        let mut m = s.serialize_map(Some(5))?;
        m.serialize_entry("n", &self.n)?;
        m.serialize_entry("x", &format!("2^-{}", self.n))?;
        m.serialize_entry("lo", &lo)?;
        m.serialize_entry("hi", &hi)?;
        m.serialize_entry("aux", &self.aux)?;
        m.end()
    }
}

/// One parameter's run of samples.
#[derive(Clone, Debug, Serialize)]
pub struct Series {
    pub param: String,
    #[serde(skip)]
    pub samples: Vec<FunctionalSample>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Series {
    pub fn values(&self) -> Vec<Real> {
        self.samples.iter().map(|s| s.value.clone()).collect()
    }

    /// Largest upper end over the samples.
    pub fn sup(&self) -> Real {
        self.samples.iter().map(|s| Real::point(s.value.hi())).fold(Real::zero(), |a, b| a.max(&b))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub condition: String,
    pub params: BTreeMap<String, String>,
    pub samples: Vec<FunctionalSample>,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub parts: Vec<Series>,
    pub caveat: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl SweepReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Called with `(depth, candidate index, scale)`.
type Sampler<'s> = dyn Fn(usize, usize, &Real) -> Result<(Real, Option<String>)> + Sync + 's;

/// `log2` of how far below `x` a sweep sample looks for `P8` levels.
const P8_REACH: i128 = 12;

/// A profile prepared for sweeping: converted to the `s` coordinate, with
/// candidate scales per depth.
pub struct Sweeper {
    pub profile: Profile,
    pub cfg: SweepConfig,
    scales: Vec<Vec<Real>>,
    critical: Vec<Real>,
    ac: OnceLock<Result<Series>>,
    curves: OnceLock<Vec<Vec<Result<Concentration>>>>,
    memo: Mutex<HashMap<String, Series>>,
    levels: OnceLock<Result<TailLevels>>,
}

/// Relative offsets `2^-j` above each breakpoint at depth `n`: `j = 0, 2,
/// ..., 12` plus `n + 12` and `2n + 12`, so a supremum that is only
/// approached at the breakpoint shows up as growth in `n`.
fn thetas(n: usize) -> Vec<Real> {
    let n = n as i128;
    (0..=6).map(|i| Real::pow2(-2 * i)).chain([Real::pow2(-(n + 12)), Real::pow2(-(2 * n + 12))]).collect()
}

impl Sweeper {
    pub fn new(profile: &Profile, cfg: SweepConfig) -> Result<Sweeper> {
        let profile = profile.to_s();
        let floor = profile.floor();
        let deepest = Real::pow2(-(cfg.n_max as i128));
        if deepest.cmp_mid(&floor) != Ordering::Greater {
            return Err(Error::BelowCoverage);
        }
        let breaks: Vec<Real> = match &profile {
            Profile::Step(s) => s.breakpoints(),
            Profile::Power(_) => vec![],
        };
        let scales = (0..=cfg.n_max)
            .map(|n| {
                let top = Real::pow2(-(n as i128));
                let bot = Real::pow2(-(n as i128) - 1);
                let mut c = vec![top.clone()];
                let th = thetas(n);
                for b in &breaks {
                    if b.cmp_mid(&bot) == Ordering::Less || b.cmp_mid(&top) != Ordering::Less {
                        continue;
                    }
                    for t in &th {
                        let y = b * &(Real::one() + t.clone());
                        if y.cmp_mid(&top) == Ordering::Less && !c.iter().any(|z| z.cmp_mid(&y).is_eq()) {
                            c.push(y);
                        }
                    }
                }
                c
            })
            .collect();
        let mut critical: Vec<Real> = breaks
            .iter()
            .filter(|b| b.cmp_mid(&Real::one()) == Ordering::Less)
            .flat_map(|b| ac_critical(Coordinate::S, b))
            .filter(|l| l.cmp_mid(&Real::zero()) == Ordering::Greater && l.cmp_mid(&Real::one()) != Ordering::Greater)
            .collect();
        critical.sort_by(|a, b| a.cmp_mid(b));
        Ok(Sweeper {
            profile,
            cfg,
            scales,
            critical,
            ac: OnceLock::new(),
            curves: OnceLock::new(),
            memo: Mutex::new(HashMap::new()),
            levels: OnceLock::new(),
        })
    }

    /// Run `f` over every depth; divergent moments become infinite samples.
    pub fn series(&self, param: String, f: &Sampler<'_>) -> Result<Series> {
        let rows: Vec<Result<(FunctionalSample, Option<String>)>> = self
            .scales
            .par_iter()
            .enumerate()
            .map(|(n, cands)| {
                let mut best: Option<(Real, Real, Option<String>)> = None;
                let mut err = None;
                for (i, x) in cands.iter().enumerate() {
                    let (v, note) = match f(n, i, x) {
                        Ok(v) => v,
                        Err(Error::DivergentMoment(m)) => {
                            err = Some(format!("divergent moment: {m}"));
                            (Real::inf(), None)
                        }
                        Err(e) => return Err(e),
                    };
                    if best.as_ref().map_or(true, |b| v.cmp_mid(&b.0) == Ordering::Greater) {
                        best = Some((v, x.clone(), note));
                    }
                }
                let (value, x, note) = best.expect("every depth has a scale");
                let mut aux = BTreeMap::new();
                aux.insert("scale".to_string(), x.to_string());
                if let Some(t) = note {
                    aux.insert("argmax".to_string(), t);
                }
                if let Some(e) = &err {
                    aux.insert("error".to_string(), e.clone());
                }
                Ok((FunctionalSample { n, value, aux }, err))
            })
            .collect();
        let mut samples = Vec::with_capacity(rows.len());
        let mut error = None;
        for r in rows {
            let (s, e) = r?;
            if error.is_none() {
                error = e;
            }
            samples.push(s);
        }
        let vals: Vec<Real> = samples.iter().map(|s| s.value.clone()).collect();
        let verdict = classify_series(&vals, self.cfg.factor);
        Ok(Series { param, samples, verdict, error })
    }

    fn plain(&self, f: impl Fn(&Profile, &Real) -> Result<Real> + Sync) -> Result<Series> {
        let p = &self.profile;
        self.series(String::new(), &|_, _, x| Ok((f(p, x)?, None)))
    }

    /// `ac_ratio` swept over arcs whose box scale `|I|(2 - |I|)` lies in
    /// each depth window.
    pub fn ac_series(&self) -> Result<Series> {
        self.ac.get_or_init(|| self.compute_ac()).clone()
    }

    fn compute_ac(&self) -> Result<Series> {
        let p = &self.profile;
        let rows: Vec<Result<FunctionalSample>> = (0..=self.cfg.n_max)
            .into_par_iter()
            .map(|n| {
                let hi = s_to_u(&Real::pow2(-(n as i128)));
                let lo = s_to_u(&Real::pow2(-(n as i128) - 1));
                let mut pts = vec![lo.clone()];
                for c in &self.critical {
                    if c.cmp_mid(&lo) == Ordering::Greater && c.cmp_mid(&hi) == Ordering::Less {
                        pts.push(c.clone());
                    }
                }
                pts.push(hi.clone());
                let mut cands: Vec<Real> = pts[1..].to_vec();
                for w in pts.windows(2) {
                    cands.push((&w[0] + &w[1]) * Real::ratio(1, 2));
                }
                let mut best: Option<(Real, Real)> = None;
                for l in cands {
                    let v = ac_ratio(p, &l)?;
                    if best.as_ref().map_or(true, |b| v.cmp_mid(&b.0) == Ordering::Greater) {
                        best = Some((v, l));
                    }
                }
                let (value, l) = best.unwrap();
                let mut aux = BTreeMap::new();
                aux.insert("arc".to_string(), l.to_string());
                Ok(FunctionalSample { n, value, aux })
            })
            .collect();
        let samples = rows.into_iter().collect::<Result<Vec<_>>>()?;
        let vals: Vec<Real> = samples.iter().map(|s| s.value.clone()).collect();
        let verdict = classify_series(&vals, self.cfg.factor);
        Ok(Series { param: String::new(), samples, verdict, error: None })
    }

    /// `P8` betas: `1, 1/2, 1/4, 1/8`, plus `1/(4 ac_sup)` when the AC sweep
    /// stays below 10.
    pub fn p8_grid(&self) -> Result<Vec<Real>> {
        let mut g = vec![Real::one(), Real::ratio(1, 2), Real::ratio(1, 4), Real::ratio(1, 8)];
        let ac = self.ac_series()?;
        let sup = ac.sup();
        if sup.is_finite() && sup.cmp_mid(&Real::int(10)) != Ordering::Greater {
            let b = (Real::int(4) * sup).recip();
            if !g.iter().any(|x| x.cmp_mid(&b) == Ordering::Equal) {
                g.push(b);
            }
        }
        Ok(g)
    }

    pub fn p1_series(&self, exp_p: f64) -> Result<Series> {
        let p = &self.profile;
        self.series(format!("p={exp_p}"), &|_, _, x| Ok((p1_functional(p, x, exp_p)?, None)))
    }

    pub fn p3_series(&self, q: f64) -> Result<Series> {
        let p = &self.profile;
        self.series(format!("q={q}"), &|_, _, x| Ok((rh_functional(p, x, q)?, None)))
    }

    pub fn p8_series(&self, beta: &Real) -> Result<Series> {
        let p = &self.profile;
        self.series(format!("beta={beta}"), &|n, i, x| {
            let (v, l) = match (p, self.curve(n, i)) {
                (Profile::Step(sp), Ok(Concentration::Step(c))) => {
                    let levels = self.levels.get_or_init(|| TailLevels::new(sp)).as_ref().map_err(|e| e.clone())?;
                    // levels reached only far below x belong to deeper scales
                    let near = (x * &Real::pow2(-P8_REACH)).max(sp.floor());
                    let cap = sp.ess_bounds(&near, x)?.1;
                    p8_curve(c, sp, beta, levels, Some(&cap))?
                }
                _ => p8_worst(p, x, beta)?,
            };
            Ok((v, Some(format!("lambda={l}"))))
        })
    }

    /// `1 / L_x(b)`: bounded iff a set of measure `b x` keeps a fixed share.
    pub fn low_share_series(&self, b: f64) -> Result<Series> {
        let br = Real::from_f64(b);
        self.series(format!("beta'={b}"), &|n, i, _| Ok((self.curve(n, i)?.l(&br)?.recip(), None)))
    }

    /// `1 / A_x(b)`: bounded iff a `b` share needs a fixed measure fraction.
    pub fn cover_series(&self, b: f64) -> Result<Series> {
        let br = Real::from_f64(b);
        self.series(format!("beta={b}"), &|n, i, _| Ok((self.curve(n, i)?.inverse(&br)?.recip(), None)))
    }

    /// `sup_x K_x(alpha)` against `beta`.
    pub fn p4_threshold(&self, alpha: f64, beta: f64) -> Result<Series> {
        let a = Real::from_f64(alpha);
        let mut s = self.series(format!("alpha={alpha},beta={beta}"), &|n, i, _| Ok((self.curve(n, i)?.k(&a)?, None)))?;
        s.verdict = p4_check(&s.samples, beta);
        Ok(s)
    }

    /// Level curve at candidate `i` of depth `n`, built once per sweeper.
    fn curve(&self, n: usize, i: usize) -> Result<&Concentration> {
        let all = self.curves.get_or_init(|| {
            self.scales
                .par_iter()
                .map(|c| c.iter().map(|x| Concentration::new(&self.profile, x)).collect())
                .collect()
        });
        all[n][i].as_ref().map_err(|e| e.clone())
    }

    /// Series over a parameter grid, shared between conditions that use the
    /// same grid (`P1` and `BpInt`, `P4` and `P4b`).
    fn grid(&self, tag: &str, params: &[f64], f: impl Fn(f64) -> Result<Series>) -> Result<Vec<Series>> {
        params
            .iter()
            .map(|&v| {
                let key = format!("{tag}:{v}");
                if let Some(s) = self.memo.lock().unwrap().get(&key) {
                    return Ok(s.clone());
                }
                let s = f(v)?;
                self.memo.lock().unwrap().insert(key, s.clone());
                Ok(s)
            })
            .collect()
    }

    pub fn run(&self, cond: &ConditionId) -> Result<SweepReport> {
        use ConditionId::*;
        let mut params = BTreeMap::new();
        let (verdict, parts, main): (Verdict, Vec<Series>, Option<Series>) = match cond {
            P1(Some(v)) => {
                params.insert("p".into(), v.to_string());
                let s = self.p1_series(*v)?;
                (s.verdict.clone(), vec![], Some(s))
            }
            P3(Some(v)) => {
                params.insert("q".into(), v.to_string());
                let s = self.p3_series(*v)?;
                (s.verdict.clone(), vec![], Some(s))
            }
            P8(Some(v)) => {
                params.insert("beta".into(), v.to_string());
                let s = self.p8_series(&Real::from_f64(*v))?;
                (s.verdict.clone(), vec![], Some(s))
            }
            P4(Some((a, b))) => {
                params.insert("alpha".into(), a.to_string());
                params.insert("beta".into(), b.to_string());
                let s = self.p4_threshold(*a, *b)?;
                (s.verdict.clone(), vec![], Some(s))
            }
            P1(None) => exists(self.grid("p1", &exponent_grid(), |v| self.p1_series(v))?),
            BpInt => forall(self.grid("p1", &exponent_grid(), |v| self.p1_series(v))?),
            P3(None) => exists(self.grid("p3", &exponent_grid(), |v| self.p3_series(v))?),
            P8(None) => exists(self.p8_grid()?.iter().map(|b| self.p8_series(b)).collect::<Result<_>>()?),
            P4(None) => exists(self.grid("low", &tenths(), |b| self.low_share_series(b))?),
            P4b => forall(self.grid("low", &tenths(), |b| self.low_share_series(b))?),
            P4a => forall(self.grid("cover", &tenths(), |b| self.cover_series(b))?),
            P2 => single(self.plain(rj_functional)?),
            P5 => single(self.plain(p5_functional)?),
            P6 => single(self.plain(p6_functional)?),
            P6e => single(self.plain(p6e_functional)?),
            P7 => single(self.plain(p7_functional)?),
            B1 => single(self.plain(b1_functional)?),
            AC => single(self.ac_series()?),
        };
        let main = main.or_else(|| deciding(&verdict, &parts));
        let error = main.as_ref().and_then(|s| s.error.clone()).or_else(|| parts.iter().find_map(|s| s.error.clone()));
        Ok(SweepReport {
            condition: cond.to_string(),
            params,
            samples: main.map(|s| s.samples).unwrap_or_default(),
            verdict,
            parts: if parts.len() > 1 { parts } else { vec![] },
            caveat: "finite-sweep",
            error,
        })
    }
}

fn single(s: Series) -> (Verdict, Vec<Series>, Option<Series>) {
    (s.verdict.clone(), vec![], Some(s))
}

fn exists(parts: Vec<Series>) -> (Verdict, Vec<Series>, Option<Series>) {
    let v = any_holds(&parts.iter().map(|s| s.verdict.clone()).collect::<Vec<_>>());
    (v, parts, None)
}

fn forall(parts: Vec<Series>) -> (Verdict, Vec<Series>, Option<Series>) {
    let v = all_hold(&parts.iter().map(|s| s.verdict.clone()).collect::<Vec<_>>());
    (v, parts, None)
}

/// The part whose verdict decided a grid condition.
fn deciding(v: &Verdict, parts: &[Series]) -> Option<Series> {
    parts
        .iter()
        .find(|s| s.verdict.label() == v.label())
        .or_else(|| parts.last())
        .cloned()
}

/// `P4(alpha, beta)` as a threshold test on the `K_x(alpha)` samples.
pub fn p4_check(samples: &[FunctionalSample], beta: f64) -> Verdict {
    let b = Real::from_f64(beta);
    for s in samples {
        if s.value.cmp_mid(&b) == Ordering::Greater {
            return Verdict::Fails { n: s.n, value: s.value.to_string(), reason: format!("K_x(alpha) above {beta}") };
        }
    }
    let sup = samples.iter().map(|s| Real::point(s.value.hi())).fold(Real::zero(), |a, c| a.max(&c));
    Verdict::Holds { bound: sup.to_string(), log2: sup.hi().log2_approx() }
}

/// Sweep one condition.
pub fn classify(p: &Profile, cond: &ConditionId, cfg: SweepConfig) -> Result<SweepReport> {
    if !p.integrable() && *cond != ConditionId::AC {
        return Err(Error::NonIntegrable);
    }
    Sweeper::new(p, cfg)?.run(cond)
}
