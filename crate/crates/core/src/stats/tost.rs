use serde::{Deserialize, Serialize};

use super::dist::t_sf;
use super::{check_sample, describe, StatsError};

/// Variance assumption for the one-sided tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarianceModel {
    #[default]
    Welch,
    Pooled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TostResult {
    pub delta_lower: f64,
    pub delta_upper: f64,
    /// Test of H0: mean(a) - mean(b) ≤ -delta_lower.
    pub p_lower: f64,
    /// Test of H0: mean(a) - mean(b) ≥ delta_upper.
    pub p_upper: f64,
    pub alpha: f64,
    pub equivalent: bool,
}

struct Difference {
    diff: f64,
    se: f64,
    df: f64,
}

fn difference(a: &[f64], b: &[f64], model: VarianceModel) -> Result<Difference, StatsError> {
    check_sample(a)?;
    check_sample(b)?;
    let (ma, sa) = describe(a);
    let (mb, sb) = describe(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (se, df) = match model {
        VarianceModel::Welch => {
            let va = sa * sa / na;
            let vb = sb * sb / nb;
            let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
            ((va + vb).sqrt(), df)
        }
        VarianceModel::Pooled => {
            let df = na + nb - 2.0;
            let sp2 = ((na - 1.0) * sa * sa + (nb - 1.0) * sb * sb) / df;
            ((sp2 * (1.0 / na + 1.0 / nb)).sqrt(), df)
        }
    };
    if se == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    Ok(Difference { diff: ma - mb, se, df })
}

fn tost_from(d: &Difference, ei: (f64, f64), alpha: f64) -> TostResult {
    let (lo, hi) = ei;
    let p_lower = t_sf((d.diff + lo) / d.se, d.df);
    let p_upper = t_sf(-(d.diff - hi) / d.se, d.df);
    TostResult {
        delta_lower: lo,
        delta_upper: hi,
        p_lower,
        p_upper,
        alpha,
        equivalent: p_lower.max(p_upper) < alpha,
    }
}

fn check_alpha(alpha: f64) -> Result<(), StatsError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(StatsError::InvalidAlpha(alpha))
    }
}

/// Two one-sided tests for equivalence of means within `(-ei.0, +ei.1)`.
pub fn tost(a: &[f64], b: &[f64], ei: (f64, f64), alpha: f64, model: VarianceModel) -> Result<TostResult, StatsError> {
    if !(ei.0 > 0.0 && ei.1 > 0.0) {
        return Err(StatsError::InvalidInterval(ei.0, ei.1));
    }
    check_alpha(alpha)?;
    let d = difference(a, b, model)?;
    Ok(tost_from(&d, ei, alpha))
}

/// Smallest symmetric equivalence bound at which [`tost`] declares
/// equivalence, by bisection to `1e-6` of the search scale.
pub fn least_equivalence_interval(a: &[f64], b: &[f64], alpha: f64, model: VarianceModel) -> Result<f64, StatsError> {
    check_alpha(alpha)?;
    let d = difference(a, b, model)?;
    let (lo_v, hi_v) = a
        .iter()
        .chain(b)
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let scale = 10.0 * (hi_v - lo_v);
    let equivalent = |delta: f64| tost_from(&d, (delta, delta), alpha).equivalent;
    if scale.is_nan() || scale <= 0.0 || !equivalent(scale) {
        return Err(StatsError::NonBracketable(scale));
    }
    let (mut lo, mut hi) = (0.0, scale);
    let tol = 1e-6 * scale;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if equivalent(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
