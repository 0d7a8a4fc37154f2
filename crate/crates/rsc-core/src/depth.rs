//! Functional data ranking: modified band depth, the functional median, the
//! 50% central region and functional-boxplot outlier fences.

use crate::error::{Error, Result};
use crate::spectral::{check_shared_grid, Curve};

/// Depth ranking of a set of curves.
///
/// `order` sorts curve indices by decreasing depth; equal depths are broken by
/// the lowest original index.
#[derive(Debug, Clone)]
pub struct DepthRanking {
    pub depths: Vec<f64>,
    pub order: Vec<usize>,
}

/// Pointwise envelope of the deepest curves, plus its area in
/// (value units) x (grid-index units).
#[derive(Debug, Clone)]
pub struct CentralRegion {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub area: f64,
    /// Indices of the member curves, sorted ascending.
    pub member_indices: Vec<usize>,
}

fn pairs(n: usize) -> f64 {
    if n < 2 {
        0.0
    } else {
        (n * (n - 1) / 2) as f64
    }
}

fn validate_set(curves: &[&Curve]) -> Result<usize> {
    if curves.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "need at least 2 curves, got {}",
            curves.len()
        )));
    }
    check_shared_grid(curves)?;
    Ok(curves[0].len())
}

/// Modified band depth with 2-curve bands.
///
/// MBD_i averages, over all curve pairs {j,k}, the fraction of grid points
/// where min(y_j, y_k) <= y_i <= max(y_j, y_k); pairs containing i always
/// contribute 1. Computed per grid point from the sorted values: the number
/// of covering pairs is C(N,2) - C(below,2) - C(above,2), where `below` and
/// `above` count strictly smaller and strictly larger values.
pub fn modified_band_depth(curves: &[&Curve]) -> Result<DepthRanking> {
    let t = validate_set(curves)?;
    let n = curves.len();
    let total_pairs = pairs(n);
    let mut counts = vec![0.0f64; n];
    let mut idx: Vec<usize> = (0..n).collect();
    for g in 0..t {
        idx.sort_by(|&a, &b| {
            curves[a].values()[g]
                .partial_cmp(&curves[b].values()[g])
                .unwrap()
        });
        // Walk runs of tied values so `below`/`above` are strict counts.
        let mut start = 0;
        while start < n {
            let v = curves[idx[start]].values()[g];
            let mut end = start + 1;
            while end < n && curves[idx[end]].values()[g] == v {
                end += 1;
            }
            let below = start;
            let above = n - end;
            let covering = total_pairs - pairs(below) - pairs(above);
            for &i in &idx[start..end] {
                counts[i] += covering;
            }
            start = end;
        }
    }
    let depths: Vec<f64> = counts
        .into_iter()
        .map(|c| c / (t as f64 * total_pairs))
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| depths[b].partial_cmp(&depths[a]).unwrap().then(a.cmp(&b)));
    Ok(DepthRanking { depths, order })
}

/// Index of the maximum-depth curve; ties go to the lowest index.
pub fn functional_median(curves: &[&Curve]) -> Result<usize> {
    Ok(modified_band_depth(curves)?.order[0])
}

/// Envelope of the ceil(p * N) deepest curves and its rectangle-rule area
/// (unit spacing per grid index).
pub fn central_region(curves: &[&Curve], p: f64) -> Result<CentralRegion> {
    let t = validate_set(curves)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::Range(format!("coverage must be in (0, 1], got {p}")));
    }
    let ranking = modified_band_depth(curves)?;
    let n_members = ((p * curves.len() as f64).ceil() as usize).max(1);
    let mut members: Vec<usize> = ranking.order[..n_members].to_vec();
    members.sort_unstable();
    let mut lower = vec![f64::INFINITY; t];
    let mut upper = vec![f64::NEG_INFINITY; t];
    for &i in &members {
        for (g, &v) in curves[i].values().iter().enumerate() {
            lower[g] = lower[g].min(v);
            upper[g] = upper[g].max(v);
        }
    }
    let area = envelope_area(&lower, &upper);
    Ok(CentralRegion { lower, upper, area, member_indices: members })
}

/// Rectangle-rule area of an envelope with unit grid spacing.
pub fn envelope_area(lower: &[f64], upper: &[f64]) -> f64 {
    lower.iter().zip(upper).map(|(l, u)| u - l).sum()
}

/// Stored area accessor.
pub fn region_area(region: &CentralRegion) -> f64 {
    region.area
}

/// Functional-boxplot outlier detection: a curve is flagged when it exceeds
/// the 50% envelope inflated by 1.5x its pointwise height at any grid point.
/// Diagnostic only; never feeds clustering.
pub fn detect_outliers(curves: &[&Curve]) -> Result<Vec<usize>> {
    if curves.len() < 4 {
        return Err(Error::InsufficientData(format!(
            "outlier detection needs at least 4 curves, got {}",
            curves.len()
        )));
    }
    let region = central_region(curves, 0.5)?;
    let mut flagged = Vec::new();
    for (i, c) in curves.iter().enumerate() {
        let outside = c.values().iter().enumerate().any(|(g, &v)| {
            let height = region.upper[g] - region.lower[g];
            v > region.upper[g] + 1.5 * height || v < region.lower[g] - 1.5 * height
        });
        if outside {
            flagged.push(i);
        }
    }
    Ok(flagged)
}
