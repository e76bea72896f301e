//! Empirical moment curves of `‖w_k − w*‖`.

use crate::error::{Error, Result};
use crate::record::RunRecord;

/// Safety factor applied when turning the observed third-moment maximum into
/// a usable moment bound.
pub const THIRD_MOMENT_SAFETY: f64 = 1.5;

/// Monte-Carlo moment curves across an ensemble, pointwise in k.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentCurves {
    pub ks: Vec<u64>,
    /// `mean ‖w_k − w*‖` per recorded k.
    pub mean_dist: Vec<f64>,
    /// `mean ‖w_k − w*‖²`.
    pub mean_dist_sq: Vec<f64>,
    /// `mean ‖w_k − w*‖³`.
    pub mean_dist_cubed: Vec<f64>,
    /// Maximum of the third-moment curve: the empirical moment bound.
    pub empirical_third_moment: f64,
    /// Whether `mean(dist^q) ≤ (mean(dist³))^{q/3}` held pointwise for
    /// q = 1, 2 (up to a 1e-12 relative rounding guard).
    pub holder_consistent: bool,
}

/// Track the q = 1, 2, 3 moment curves of the distance to the optimum and
/// check the moment chain `mean(dist^q) ≤ (mean(dist³))^{q/3}`, which holds
/// exactly for the empirical measure.
pub fn moment_track(ensemble: &[RunRecord]) -> Result<MomentCurves> {
    if ensemble.is_empty() {
        return Err(Error::InvalidArgument("empty ensemble".into()));
    }
    let ks: Vec<u64> = ensemble[0].trace.iter().map(|p| p.k).collect();
    for rec in ensemble {
        let other: Vec<u64> = rec.trace.iter().map(|p| p.k).collect();
        if other != ks {
            return Err(Error::InvalidArgument(
                "ensemble records have mismatching recording grids".into(),
            ));
        }
        if rec.trace.iter().any(|p| p.dist_to_opt.is_none()) {
            return Err(Error::MissingConstant("minimizer"));
        }
    }

    let n = ensemble.len() as f64;
    let mut mean_dist = vec![0.0; ks.len()];
    let mut mean_dist_sq = vec![0.0; ks.len()];
    let mut mean_dist_cubed = vec![0.0; ks.len()];
    for rec in ensemble {
        for (i, p) in rec.trace.iter().enumerate() {
            let d = p.dist_to_opt.expect("checked above");
            mean_dist[i] += d / n;
            mean_dist_sq[i] += d * d / n;
            mean_dist_cubed[i] += d * d * d / n;
        }
    }

    let mut holder_consistent = true;
    for i in 0..ks.len() {
        let m3 = mean_dist_cubed[i];
        let guard = 1.0 + 1e-12;
        if mean_dist[i] > m3.cbrt() * guard || mean_dist_sq[i] > m3.powf(2.0 / 3.0) * guard {
            holder_consistent = false;
        }
    }

    let empirical_third_moment = mean_dist_cubed.iter().cloned().fold(0.0, f64::max);
    Ok(MomentCurves {
        ks,
        mean_dist,
        mean_dist_sq,
        mean_dist_cubed,
        empirical_third_moment,
        holder_consistent,
    })
}

/// The pilot-ensemble moment estimate: safety factor times the maximum of
/// the per-iteration Monte-Carlo third moment.
pub fn estimate_third_moment(ensemble: &[RunRecord]) -> Result<f64> {
    Ok(THIRD_MOMENT_SAFETY * moment_track(ensemble)?.empirical_third_moment)
}
