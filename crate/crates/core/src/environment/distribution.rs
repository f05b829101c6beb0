use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::EnvironmentError;
use crate::numerics;
use crate::scalar::Scalar;

const QUADRATURE_TOL: f64 = 1e-13;

/// Absolutely continuous edge-weight law supported in `[0, ∞)`.
///
/// Parses from and formats to the strings `uniform:lo:hi`,
/// `shiftexp:shift:rate` and `tri:lo:mode:hi`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum WeightDistribution<F> {
    Uniform { lo: F, hi: F },
    ShiftedExponential { shift: F, rate: F },
    Triangular { lo: F, mode: F, hi: F },
}

impl<F: Scalar> WeightDistribution<F> {
    pub fn uniform(lo: F, hi: F) -> Result<Self, EnvironmentError> {
        if !(lo.is_finite() && hi.is_finite()) || lo < F::zero() || hi <= lo {
            return Err(EnvironmentError::InvalidDistribution(format!(
                "uniform requires 0 <= lo < hi, got lo = {lo}, hi = {hi}"
            )));
        }
        Ok(Self::Uniform { lo, hi })
    }

    pub fn shifted_exponential(shift: F, rate: F) -> Result<Self, EnvironmentError> {
        if !(shift.is_finite() && rate.is_finite()) || shift < F::zero() || rate <= F::zero() {
            return Err(EnvironmentError::InvalidDistribution(format!(
                "shifted exponential requires shift >= 0 and rate > 0, got shift = {shift}, rate = {rate}"
            )));
        }
        Ok(Self::ShiftedExponential { shift, rate })
    }

    pub fn triangular(lo: F, mode: F, hi: F) -> Result<Self, EnvironmentError> {
        let finite = lo.is_finite() && mode.is_finite() && hi.is_finite();
        if !finite || lo < F::zero() || hi <= lo || mode < lo || mode > hi {
            return Err(EnvironmentError::InvalidDistribution(format!(
                "triangular requires 0 <= lo <= mode <= hi and lo < hi, got {lo}, {mode}, {hi}"
            )));
        }
        Ok(Self::Triangular { lo, mode, hi })
    }

    /// Closed support `[lower, upper]`; `upper` is `+∞` for the exponential law.
    pub fn support(&self) -> (F, F) {
        match *self {
            Self::Uniform { lo, hi } | Self::Triangular { lo, hi, .. } => (lo, hi),
            Self::ShiftedExponential { shift, .. } => (shift, F::infinity()),
        }
    }

    pub fn in_support(&self, w: F) -> bool {
        let (lo, hi) = self.support();
        w.is_finite() && w >= lo && w <= hi
    }

    /// Points where the density is not smooth.
    pub fn breakpoints(&self) -> Vec<F> {
        match *self {
            Self::Uniform { lo, hi } => vec![lo, hi],
            Self::ShiftedExponential { shift, .. } => vec![shift],
            Self::Triangular { lo, mode, hi } => vec![lo, mode, hi],
        }
    }

    pub fn density(&self, w: F) -> F {
        match *self {
            Self::Uniform { lo, hi } => {
                if w >= lo && w <= hi {
                    (hi - lo).recip()
                } else {
                    F::zero()
                }
            }
            Self::ShiftedExponential { shift, rate } => {
                if w >= shift {
                    rate * (-(rate * (w - shift))).exp()
                } else {
                    F::zero()
                }
            }
            Self::Triangular { lo, mode, hi } => {
                let two = F::lit(2.0);
                if w < lo || w > hi {
                    F::zero()
                } else if w < mode {
                    two * (w - lo) / ((hi - lo) * (mode - lo))
                } else if w > mode {
                    two * (hi - w) / ((hi - lo) * (hi - mode))
                } else {
                    two / (hi - lo)
                }
            }
        }
    }

    pub fn cdf(&self, w: F) -> F {
        match *self {
            Self::Uniform { lo, hi } => ((w - lo) / (hi - lo)).max(F::zero()).min(F::one()),
            Self::ShiftedExponential { shift, rate } => {
                if w <= shift {
                    F::zero()
                } else {
                    -(-(rate * (w - shift))).exp_m1()
                }
            }
            Self::Triangular { lo, mode, hi } => {
                if w <= lo {
                    F::zero()
                } else if w >= hi {
                    F::one()
                } else if w <= mode {
                    (w - lo) * (w - lo) / ((hi - lo) * (mode - lo))
                } else {
                    F::one() - self.sf(w)
                }
            }
        }
    }

    /// Survival function `1 − F(w)`, computed without cancellation.
    pub fn sf(&self, w: F) -> F {
        match *self {
            Self::Uniform { lo, hi } => ((hi - w) / (hi - lo)).max(F::zero()).min(F::one()),
            Self::ShiftedExponential { shift, rate } => {
                if w <= shift {
                    F::one()
                } else {
                    (-(rate * (w - shift))).exp()
                }
            }
            Self::Triangular { lo, mode, hi } => {
                if w <= lo {
                    F::one()
                } else if w >= hi {
                    F::zero()
                } else if w > mode {
                    (hi - w) * (hi - w) / ((hi - lo) * (hi - mode))
                } else {
                    F::one() - self.cdf(w)
                }
            }
        }
    }

    /// Lower quantile `Q(u)` for `u ∈ [0, 1]`.
    pub fn quantile(&self, u: F) -> F {
        let u = u.max(F::zero()).min(F::one());
        match *self {
            Self::Uniform { lo, hi } => lo + u * (hi - lo),
            Self::ShiftedExponential { shift, rate } => shift - (-u).ln_1p() / rate,
            Self::Triangular { lo, mode, hi } => {
                let split = (mode - lo) / (hi - lo);
                if u <= split {
                    lo + (u * (hi - lo) * (mode - lo)).sqrt()
                } else {
                    self.quantile_upper(F::one() - u)
                }
            }
        }
    }

    /// Upper quantile: the `w` with `1 − F(w) = p`. Accurate for tiny `p`.
    pub fn quantile_upper(&self, p: F) -> F {
        let p = p.max(F::zero()).min(F::one());
        match *self {
            Self::Uniform { lo, hi } => hi - p * (hi - lo),
            Self::ShiftedExponential { shift, rate } => shift - p.ln() / rate,
            Self::Triangular { lo, mode, hi } => {
                let split = (hi - mode) / (hi - lo);
                if p <= split {
                    hi - (p * (hi - lo) * (hi - mode)).sqrt()
                } else {
                    self.quantile(F::one() - p)
                }
            }
        }
    }

    /// `ν([a, b])` from the CDF.
    pub fn measure(&self, a: F, b: F) -> F {
        if b <= a {
            return F::zero();
        }
        // Subtract in the tail where the values are small.
        let (lo_cdf, hi_cdf) = (self.cdf(a), self.cdf(b));
        if hi_cdf <= F::lit(0.5) {
            hi_cdf - lo_cdf
        } else {
            self.sf(a) - self.sf(b)
        }
    }

    /// `ν([a, b])` by adaptive quadrature of the density, split at breakpoints.
    pub fn measure_by_quadrature(&self, a: F, b: F) -> Result<F, numerics::QuadratureError> {
        if b <= a {
            return Ok(F::zero());
        }
        let (lo, hi) = self.support();
        let a = a.max(lo);
        let b = b.min(hi);
        if !b.is_finite() {
            return Err(numerics::QuadratureError::NonFinite { a: a.as_f64(), b: b.as_f64() });
        }
        if b <= a {
            return Ok(F::zero());
        }
        let mut cuts = vec![a];
        cuts.extend(self.breakpoints().into_iter().filter(|&p| p > a && p < b));
        cuts.push(b);
        let tol = F::lit(QUADRATURE_TOL);
        let mut total = F::zero();
        for w in cuts.windows(2) {
            total = total + numerics::integrate(|x| self.density(x), w[0], w[1], tol)?;
        }
        Ok(total)
    }

    /// Quantile by monotone bisection on the CDF, to absolute tolerance `tol`.
    pub fn quantile_by_bisection(&self, u: F, tol: F) -> F {
        let (lo, hi) = self.support();
        let mut a = lo;
        let mut b = if hi.is_finite() {
            hi
        } else {
            let mut b = lo + F::one();
            while self.cdf(b) < u {
                b = lo + (b - lo) * F::lit(2.0);
            }
            b
        };
        while b - a > tol {
            let m = a + (b - a) / F::lit(2.0);
            if m <= a || m >= b {
                break;
            }
            if self.cdf(m) < u {
                a = m;
            } else {
                b = m;
            }
        }
        a + (b - a) / F::lit(2.0)
    }

    /// Convert the parameters to another scalar type.
    pub fn cast<G: Scalar>(&self) -> WeightDistribution<G> {
        let c = |v: F| G::lit(v.as_f64());
        match *self {
            Self::Uniform { lo, hi } => WeightDistribution::Uniform { lo: c(lo), hi: c(hi) },
            Self::ShiftedExponential { shift, rate } => {
                WeightDistribution::ShiftedExponential { shift: c(shift), rate: c(rate) }
            }
            Self::Triangular { lo, mode, hi } => WeightDistribution::Triangular { lo: c(lo), mode: c(mode), hi: c(hi) },
        }
    }
}

impl<F: Scalar> fmt::Display for WeightDistribution<F> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Uniform { lo, hi } => write!(f, "uniform:{lo}:{hi}"),
            Self::ShiftedExponential { shift, rate } => write!(f, "shiftexp:{shift}:{rate}"),
            Self::Triangular { lo, mode, hi } => write!(f, "tri:{lo}:{mode}:{hi}"),
        }
    }
}

impl<F: Scalar> FromStr for WeightDistribution<F> {
    type Err = EnvironmentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut parts = s.trim().split(':');
        let name = parts.next().unwrap_or_default();
        let params = parts
            .map(|p| {
                p.trim()
                    .parse::<f64>()
                    .map(F::lit)
                    .map_err(|_| EnvironmentError::InvalidDistribution(format!("bad number {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<F>, _>>()?;
        let arity = |k: usize| {
            if params.len() == k {
                Ok(())
            } else {
                Err(EnvironmentError::InvalidDistribution(format!(
                    "{name} takes {k} parameters, got {} in {s:?}",
                    params.len()
                )))
            }
        };
        match name {
            "uniform" => {
                arity(2)?;
                Self::uniform(params[0], params[1])
            }
            "shiftexp" => {
                arity(2)?;
                Self::shifted_exponential(params[0], params[1])
            }
            "tri" => {
                arity(3)?;
                Self::triangular(params[0], params[1], params[2])
            }
            other => Err(EnvironmentError::InvalidDistribution(format!(
                "unknown distribution {other:?}; expected uniform, shiftexp or tri"
            ))),
        }
    }
}
