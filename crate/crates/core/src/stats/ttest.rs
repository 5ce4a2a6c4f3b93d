use serde::{Deserialize, Serialize};

use super::dist::t_two_sided;
use super::{check_sample, describe, StatsError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

/// Welch's unequal-variance two-sample t-test.
pub fn welch_t(a: &[f64], b: &[f64]) -> Result<TTest, StatsError> {
    check_sample(a)?;
    check_sample(b)?;
    let (ma, sa) = describe(a);
    let (mb, sb) = describe(b);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let va = sa * sa / na;
    let vb = sb * sb / nb;
    if va + vb == 0.0 {
        return Err(StatsError::DegenerateVariance);
    }
    let t = (ma - mb) / (va + vb).sqrt();
    let df = (va + vb).powi(2) / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    Ok(TTest {
        t,
        df,
        p: t_two_sided(t, df),
    })
}

/// Paired t-test: one-sample test of `after - before` against zero.
///
/// All-zero differences give `t = 0, p = 1`; constant non-zero differences
/// have no variance and are rejected.
pub fn paired_t(before: &[f64], after: &[f64]) -> Result<TTest, StatsError> {
    if before.len() != after.len() {
        return Err(StatsError::LengthMismatch(before.len(), after.len()));
    }
    check_sample(before)?;
    check_sample(after)?;
    let diffs: Vec<f64> = after.iter().zip(before).map(|(a, b)| a - b).collect();
    let (m, s) = describe(&diffs);
    let n = diffs.len() as f64;
    let df = n - 1.0;
    let scale = diffs.iter().fold(0.0f64, |m, d| m.max(d.abs()));
    // spread at rounding level counts as none
    if s <= 1e-12 * scale || s == 0.0 {
        if scale == 0.0 {
            return Ok(TTest { t: 0.0, df, p: 1.0 });
        }
        return Err(StatsError::DegenerateVariance);
    }
    let t = m / (s / n.sqrt());
    Ok(TTest {
        t,
        df,
        p: t_two_sided(t, df),
    })
}
