//! The nonlinearity `W` on `(-∞, 1]` and checks of its structural hypotheses.

use std::fmt;
use std::io::Read;
use std::path::Path;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// `(W(t), W'(t), W''(t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialValue {
    pub w: f64,
    pub wp: f64,
    pub wpp: f64,
}

#[derive(Clone)]
pub enum PotentialKind {
    /// `W(t) = t^2 / 2`.
    QuadraticPrototype,
    /// Cubic-Hermite interpolation of tabulated `(t, W, W')`.
    UserTabulated {
        t: Vec<f64>,
        w: Vec<f64>,
        wp: Vec<f64>,
    },
    /// Closed-form potential given by its value and first two derivatives.
    Analytic {
        name: String,
        w: ScalarFn,
        wp: ScalarFn,
        wpp: ScalarFn,
    },
}

impl fmt::Debug for PotentialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialKind::QuadraticPrototype => f.write_str("QuadraticPrototype"),
            PotentialKind::UserTabulated { t, .. } => {
                write!(f, "UserTabulated({} rows on [{}, {}])", t.len(), t[0], t[t.len() - 1])
            }
            PotentialKind::Analytic { name, .. } => write!(f, "Analytic({name})"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    pub strictly_convex: bool,
}

impl PotentialSpec {
    pub fn quadratic() -> Self {
        Self {
            kind: PotentialKind::QuadraticPrototype,
            strictly_convex: true,
        }
    }

    pub fn analytic<W, Wp, Wpp>(name: &str, w: W, wp: Wp, wpp: Wpp, strictly_convex: bool) -> Self
    where
        W: Fn(f64) -> f64 + Send + Sync + 'static,
        Wp: Fn(f64) -> f64 + Send + Sync + 'static,
        Wpp: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self {
            kind: PotentialKind::Analytic {
                name: name.to_string(),
                w: Arc::new(w),
                wp: Arc::new(wp),
                wpp: Arc::new(wpp),
            },
            strictly_convex,
        }
    }

    /// Tabulated potential from strictly increasing abscissae reaching `t = 1`.
    pub fn tabulated(t: Vec<f64>, w: Vec<f64>, wp: Vec<f64>, strictly_convex: bool) -> Result<Self> {
        if t.len() < 2 || w.len() != t.len() || wp.len() != t.len() {
            return Err(Error::Parse("tabulated potential needs at least two aligned rows".into()));
        }
        if !t.windows(2).all(|p| p[1] > p[0]) {
            return Err(Error::Parse("tabulated abscissae must be strictly increasing".into()));
        }
        if t[t.len() - 1] < 1.0 || t[t.len() - 1] > 1.0 + 1e-12 {
            return Err(Error::Parse("tabulated potential must end at t = 1".into()));
        }
        if t[0] > 0.0 {
            return Err(Error::Parse("tabulated potential must cover t = 0".into()));
        }
        Ok(Self {
            kind: PotentialKind::UserTabulated { t, w, wp },
            strictly_convex,
        })
    }

    /// Load `t,W,Wp` rows.
    pub fn read_csv<R: Read>(reader: R, strictly_convex: bool) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["t", "W", "Wp"] {
            return Err(Error::Parse(format!("expected header t,W,Wp, got {headers:?}")));
        }
        let (mut t, mut w, mut wp) = (Vec::new(), Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let mut vals = [0.0; 3];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = rec
                    .get(k)
                    .ok_or_else(|| Error::Parse("short row in potential table".into()))?
                    .trim()
                    .parse()
                    .map_err(|e| Error::Parse(format!("potential table: {e}")))?;
            }
            t.push(vals[0]);
            w.push(vals[1]);
            wp.push(vals[2]);
        }
        Self::tabulated(t, w, wp, strictly_convex)
    }

    pub fn load_csv(path: &Path, strictly_convex: bool) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, strictly_convex)
    }

    /// Lower end of the region where `W` can be evaluated.
    pub fn lower_limit(&self) -> f64 {
        match &self.kind {
            PotentialKind::UserTabulated { t, .. } => t[0],
            _ => f64::NEG_INFINITY,
        }
    }

    pub fn name(&self) -> String {
        match &self.kind {
            PotentialKind::QuadraticPrototype => "quadratic".into(),
            PotentialKind::UserTabulated { .. } => "tabulated".into(),
            PotentialKind::Analytic { name, .. } => name.clone(),
        }
    }

    pub fn eval(&self, t: f64) -> Result<PotentialValue> {
        if t.is_nan() {
            return Err(Error::NumericalBreakdown("potential evaluated at NaN".into()));
        }
        if t > 1.0 {
            return Err(Error::Domain(format!("W is defined on (-inf, 1], got t = {t}")));
        }
        match &self.kind {
            PotentialKind::QuadraticPrototype => Ok(PotentialValue {
                w: 0.5 * t * t,
                wp: t,
                wpp: 1.0,
            }),
            PotentialKind::Analytic { w, wp, wpp, .. } => Ok(PotentialValue {
                w: w(t),
                wp: wp(t),
                wpp: wpp(t),
            }),
            PotentialKind::UserTabulated { t: ts, w, wp } => {
                if t < ts[0] {
                    return Err(Error::Domain(format!(
                        "t = {t} lies below the tabulated range starting at {}",
                        ts[0]
                    )));
                }
                let k = match ts.partition_point(|x| *x <= t) {
                    0 => 0,
                    p => (p - 1).min(ts.len() - 2),
                };
                Ok(hermite(ts[k], ts[k + 1], [w[k], wp[k], w[k + 1], wp[k + 1]], t))
            }
        }
    }

    /// Value of `W'(1)`, the coefficient in the convexity threshold `sqrt(W'(1)/λ₁)`.
    pub fn wp_at_one(&self) -> f64 {
        self.eval(1.0).map(|v| v.wp).unwrap_or(f64::NAN)
    }

    /// Sample the hypotheses `W(0) = 0`, `W > 0` off zero, `W'' ≥ 0` (and `> 0` if claimed).
    pub fn validate(&self, sample_count: usize) -> ValidationReport {
        let count = sample_count.max(100);
        let lo = self.lower_limit().max(-3.0);
        let mut samples: Vec<f64> = (0..count)
            .map(|k| lo + (1.0 - lo) * k as f64 / (count - 1) as f64)
            .collect();
        samples.push(0.0);
        samples.sort_by(f64::total_cmp);
        samples.dedup();

        let mut checks = Vec::new();

        let zero = self.eval(0.0).map(|v| v.w).unwrap_or(f64::NAN);
        checks.push(HypothesisCheck::new(Hypothesis::ZeroAtOrigin, (zero != 0.0).then_some(0.0)));

        let positivity = samples
            .iter()
            .copied()
            .filter(|t| *t != 0.0)
            .find(|t| self.eval(*t).map_or(true, |v| !(v.w > 0.0)));
        checks.push(HypothesisCheck::new(Hypothesis::Positivity, positivity));

        let convexity = samples
            .iter()
            .copied()
            .find(|t| self.eval(*t).map_or(true, |v| !(v.wpp >= 0.0)));
        checks.push(HypothesisCheck::new(Hypothesis::Convexity, convexity));

        if self.strictly_convex {
            let strict = samples
                .iter()
                .copied()
                .find(|t| self.eval(*t).map_or(true, |v| !(v.wpp > 0.0)));
            checks.push(HypothesisCheck::new(Hypothesis::StrictConvexity, strict));
        }
        ValidationReport { checks }
    }
}

fn hermite(a: f64, b: f64, data: [f64; 4], t: f64) -> PotentialValue {
    let [w0, d0, w1, d1] = data;
    let dt = b - a;
    let s = (t - a) / dt;
    let s2 = s * s;
    let s3 = s2 * s;
    let w = (2.0 * s3 - 3.0 * s2 + 1.0) * w0
        + (s3 - 2.0 * s2 + s) * dt * d0
        + (-2.0 * s3 + 3.0 * s2) * w1
        + (s3 - s2) * dt * d1;
    let ds = (6.0 * s2 - 6.0 * s) * w0
        + (3.0 * s2 - 4.0 * s + 1.0) * dt * d0
        + (-6.0 * s2 + 6.0 * s) * w1
        + (3.0 * s2 - 2.0 * s) * dt * d1;
    let dss = (12.0 * s - 6.0) * w0
        + (6.0 * s - 4.0) * dt * d0
        + (-12.0 * s + 6.0) * w1
        + (6.0 * s - 2.0) * dt * d1;
    PotentialValue {
        w,
        wp: ds / dt,
        wpp: dss / (dt * dt),
    }
}

/// Evaluate the potential; equivalent to [`PotentialSpec::eval`].
pub fn eval_potential(spec: &PotentialSpec, t: f64) -> Result<PotentialValue> {
    spec.eval(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    ZeroAtOrigin,
    Positivity,
    Convexity,
    StrictConvexity,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisCheck {
    pub hypothesis: Hypothesis,
    pub passed: bool,
    pub witness: Option<f64>,
}

impl HypothesisCheck {
    fn new(hypothesis: Hypothesis, witness: Option<f64>) -> Self {
        Self {
            hypothesis,
            passed: witness.is_none(),
            witness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<HypothesisCheck>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, hypothesis: Hypothesis) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.hypothesis == hypothesis)
    }
}
