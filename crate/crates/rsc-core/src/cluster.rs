//! Agglomerative hierarchical clustering of channels under three
//! dissimilarity measures: distance of functional medians (FM), area of the
//! merged 50% central region (CR), and distance of functional means (MEAN).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::depth::{central_region, functional_median};
use crate::error::{Error, Result};
use crate::spectral::{check_shared_grid, ChannelEnsemble, Curve};

/// Dissimilarity measure driving the agglomeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Measure {
    Fm,
    Cr,
    Mean,
}

impl Measure {
    pub fn as_str(&self) -> &'static str {
        match self {
            Measure::Fm => "FM",
            Measure::Cr => "CR",
            Measure::Mean => "MEAN",
        }
    }
}

impl std::str::FromStr for Measure {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "FM" => Ok(Measure::Fm),
            "CR" => Ok(Measure::Cr),
            "MEAN" => Ok(Measure::Mean),
            other => Err(Error::InvalidInput(format!("unknown measure {other:?}"))),
        }
    }
}

/// Channel-to-cluster assignment with contiguous ids 0..k-1, labeled in
/// order of first occurrence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPartition {
    pub assignment: Vec<usize>,
    pub k: usize,
    pub measure: Measure,
}

/// One greedy merge: the pair chosen and the matrix minimum at that step.
/// `merged` holds the smallest member channel index of each side.
#[derive(Debug, Clone)]
pub struct MergeStep {
    pub n_before: usize,
    pub merged: (usize, usize),
    pub dissimilarity: f64,
}

#[derive(Debug, Clone, Default)]
pub struct MergeTrace {
    pub steps: Vec<MergeStep>,
}

/// Euclidean distance between two curves on a shared grid.
pub fn euclidean_curve_distance(a: &Curve, b: &Curve) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::Shape("curves do not share a grid".into()));
    }
    Ok(euclidean(a.values(), b.values()))
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn median_values<'a>(cluster: &[&'a Curve]) -> Result<&'a [f64]> {
    match cluster.len() {
        0 => Err(Error::InsufficientData("empty cluster".into())),
        1 => Ok(cluster[0].values()),
        _ => Ok(cluster[functional_median(cluster)?].values()),
    }
}

fn mean_values(cluster: &[&Curve]) -> Result<Vec<f64>> {
    if cluster.is_empty() {
        return Err(Error::InsufficientData("empty cluster".into()));
    }
    check_shared_grid(cluster)?;
    let t = cluster[0].len();
    let mut acc = vec![0.0; t];
    for c in cluster {
        for (a, v) in acc.iter_mut().zip(c.values()) {
            *a += v;
        }
    }
    let n = cluster.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    Ok(acc)
}

/// Distance between the functional medians of two pooled curve sets.
pub fn fm_dissimilarity(a: &[&Curve], b: &[&Curve]) -> Result<f64> {
    let ma = median_values(a)?;
    let mb = median_values(b)?;
    if ma.len() != mb.len() {
        return Err(Error::Shape("clusters live on different grids".into()));
    }
    Ok(euclidean(ma, mb))
}

/// Area of the 50% central region of the pooled set A union B.
pub fn cr_dissimilarity(a: &[&Curve], b: &[&Curve]) -> Result<f64> {
    let pooled: Vec<&Curve> = a.iter().chain(b.iter()).copied().collect();
    if pooled.len() < 2 {
        return Err(Error::InsufficientData(
            "CR dissimilarity needs at least 2 pooled curves".into(),
        ));
    }
    Ok(central_region(&pooled, 0.5)?.area)
}

/// Distance between the pointwise means of two pooled curve sets.
pub fn mean_dissimilarity(a: &[&Curve], b: &[&Curve]) -> Result<f64> {
    let ma = mean_values(a)?;
    let mb = mean_values(b)?;
    if ma.len() != mb.len() {
        return Err(Error::Shape("clusters live on different grids".into()));
    }
    Ok(euclidean(&ma, &mb))
}

/// Full greedy agglomeration history from m singletons down to one cluster.
#[derive(Debug, Clone)]
pub struct Agglomeration {
    pub measure: Measure,
    n_channels: usize,
    /// Cluster membership (channel lists) indexed by cluster count:
    /// `snapshots[k]` is the state with k clusters, for k = stop..=m.
    snapshots: Vec<(usize, Vec<Vec<usize>>)>,
    pub trace: MergeTrace,
    /// Area of the 50% central region of the whole pooled set; the CR
    /// elbow series point at one cluster.
    pub final_pool_area: Option<f64>,
}

impl Agglomeration {
    /// Partition at `k` clusters, if the run went that far.
    pub fn partition_at(&self, k: usize) -> Result<ClusterPartition> {
        let clusters = self
            .snapshots
            .iter()
            .find(|(n, _)| *n == k)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::Range(format!("no snapshot with {k} clusters")))?;
        let mut assignment = vec![usize::MAX; self.n_channels];
        for (cid, members) in clusters.iter().enumerate() {
            for &ch in members {
                assignment[ch] = cid;
            }
        }
        // Relabel ids in order of first occurrence over channels.
        let mut relabel = vec![usize::MAX; clusters.len()];
        let mut next = 0;
        for a in assignment.iter_mut() {
            if relabel[*a] == usize::MAX {
                relabel[*a] = next;
                next += 1;
            }
            *a = relabel[*a];
        }
        Ok(ClusterPartition { assignment, k, measure: self.measure })
    }

    /// The per-cluster-count minimum dissimilarity series, ascending in the
    /// number of clusters. The value at N is the matrix minimum observed
    /// with N clusters present; for CR a point at N=1 holds the area of the
    /// fully pooled central region.
    pub fn min_dissimilarity_series(&self) -> Vec<(usize, f64)> {
        let mut series: Vec<(usize, f64)> = self
            .trace
            .steps
            .iter()
            .map(|s| (s.n_before, s.dissimilarity))
            .collect();
        if let Some(area) = self.final_pool_area {
            series.push((1, area));
        }
        series.sort_by_key(|&(n, _)| n);
        series
    }
}

struct Engine<'a> {
    ensemble: &'a ChannelEnsemble,
    measure: Measure,
    clusters: Vec<Vec<usize>>,
    /// Representative curve values per cluster (median for FM, mean for MEAN).
    reps: Vec<Vec<f64>>,
    diss: Vec<Vec<f64>>,
}

impl<'a> Engine<'a> {
    fn pooled(&self, cluster: &[usize]) -> Vec<&'a Curve> {
        cluster
            .iter()
            .flat_map(|&ch| self.ensemble.channel_curves(ch))
            .collect()
    }

    fn representative(&self, cluster: &[usize]) -> Result<Vec<f64>> {
        let pool = self.pooled(cluster);
        match self.measure {
            Measure::Fm => Ok(median_values(&pool)?.to_vec()),
            Measure::Mean => mean_values(&pool),
            Measure::Cr => Ok(Vec::new()),
        }
    }

    fn pair_dissimilarity(&self, i: usize, j: usize) -> Result<f64> {
        match self.measure {
            Measure::Fm | Measure::Mean => Ok(euclidean(&self.reps[i], &self.reps[j])),
            Measure::Cr => {
                cr_dissimilarity(&self.pooled(&self.clusters[i]), &self.pooled(&self.clusters[j]))
            }
        }
    }

    fn new(ensemble: &'a ChannelEnsemble, measure: Measure) -> Result<Self> {
        let m = ensemble.n_channels();
        let clusters: Vec<Vec<usize>> = (0..m).map(|c| vec![c]).collect();
        let mut engine = Engine { ensemble, measure, clusters, reps: Vec::new(), diss: Vec::new() };
        engine.reps = engine
            .clusters
            .par_iter()
            .map(|c| engine.representative(c))
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<Vec<f64>> = (0..m)
            .into_par_iter()
            .map(|i| {
                (0..m)
                    .map(|j| {
                        if j <= i {
                            Ok(0.0)
                        } else {
                            engine.pair_dissimilarity(i, j)
                        }
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        engine.diss = rows;
        for i in 0..m {
            for j in 0..i {
                engine.diss[i][j] = engine.diss[j][i];
            }
        }
        Ok(engine)
    }

    /// Greedy argmin over the current matrix; ties break on the
    /// lexicographically smallest (i, j).
    fn argmin(&self) -> (usize, usize, f64) {
        let n = self.clusters.len();
        let mut best = (0usize, 1usize, f64::INFINITY);
        for i in 0..n {
            for j in (i + 1)..n {
                if self.diss[i][j] < best.2 {
                    best = (i, j, self.diss[i][j]);
                }
            }
        }
        best
    }

    fn merge(&mut self, p: usize, q: usize) -> Result<()> {
        let removed = self.clusters.remove(q);
        self.clusters[p].extend(removed);
        self.clusters[p].sort_unstable();
        self.reps.remove(q);
        self.reps[p] = self.representative(&self.clusters[p])?;
        self.diss.remove(q);
        for row in &mut self.diss {
            row.remove(q);
        }
        let n = self.clusters.len();
        let updated: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                if k == p {
                    Ok(0.0)
                } else {
                    self.pair_dissimilarity(p, k)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, d) in updated.into_iter().enumerate() {
            self.diss[p][k] = d;
            self.diss[k][p] = d;
        }
        Ok(())
    }
}

/// Runs the greedy agglomeration from m singleton channels down to
/// `stop_at` clusters, recording every step's matrix minimum and a
/// membership snapshot at every cluster count.
pub fn agglomerate(
    ensemble: &ChannelEnsemble,
    measure: Measure,
    stop_at: usize,
) -> Result<Agglomeration> {
    let m = ensemble.n_channels();
    if stop_at < 1 || stop_at > m {
        return Err(Error::Range(format!(
            "cluster target must be in 1..={m}, got {stop_at}"
        )));
    }
    let mut engine = Engine::new(ensemble, measure)?;
    let mut snapshots = vec![(m, engine.clusters.clone())];
    let mut trace = MergeTrace::default();
    while engine.clusters.len() > stop_at {
        let n_before = engine.clusters.len();
        let (p, q, d) = engine.argmin();
        if !d.is_finite() {
            return Err(Error::Numerical("non-finite dissimilarity in merge step".into()));
        }
        trace.steps.push(MergeStep {
            n_before,
            merged: (engine.clusters[p][0], engine.clusters[q][0]),
            dissimilarity: d,
        });
        engine.merge(p, q)?;
        snapshots.push((engine.clusters.len(), engine.clusters.clone()));
    }
    let final_pool_area = if measure == Measure::Cr && stop_at == 1 {
        let pool: Vec<&Curve> = (0..m).flat_map(|c| ensemble.channel_curves(c)).collect();
        Some(central_region(&pool, 0.5)?.area)
    } else {
        None
    };
    Ok(Agglomeration {
        measure,
        n_channels: m,
        snapshots,
        trace,
        final_pool_area,
    })
}

/// Clusters the ensemble down to `k_target` clusters.
pub fn hierarchical_cluster(
    ensemble: &ChannelEnsemble,
    measure: Measure,
    k_target: usize,
) -> Result<(ClusterPartition, MergeTrace)> {
    let agg = agglomerate(ensemble, measure, k_target)?;
    let partition = agg.partition_at(k_target)?;
    Ok((partition, agg.trace))
}

/// Per-cluster-count minimum dissimilarity series with the selected knee.
#[derive(Debug, Clone)]
pub struct ElbowResult {
    /// (number of clusters, minimum dissimilarity), ascending.
    pub series: Vec<(usize, f64)>,
    pub suggested_k: usize,
    /// False when the series has no distinct knee (near-zero curvature
    /// everywhere); `suggested_k` is then `k_min`.
    pub distinct_knee: bool,
}

/// Locates the knee of a minimum-dissimilarity series by maximizing the
/// second forward difference s(K) - 2 s(K+1) + s(K+2) over K in
/// [k_min, k_max]. When every value is positive the differences are taken
/// on the log scale: dissimilarity traces decay roughly geometrically as
/// the cluster count grows, and raw second differences then peak at the
/// steep left end of the curve instead of at the knee. The series is not
/// assumed monotone.
pub fn elbow_trace(series: &[(usize, f64)], k_min: usize, k_max: usize) -> Result<ElbowResult> {
    if k_min < 1 || k_max < k_min {
        return Err(Error::Range(format!("bad elbow window [{k_min}, {k_max}]")));
    }
    let log_scale = series.iter().all(|&(_, v)| v > 0.0);
    let mut by_n = std::collections::BTreeMap::new();
    for &(n, v) in series {
        by_n.insert(n, if log_scale { v.ln() } else { v });
    }
    let mut best: Option<(usize, f64)> = None;
    for k in k_min..=k_max {
        let (Some(&s0), Some(&s1), Some(&s2)) =
            (by_n.get(&k), by_n.get(&(k + 1)), by_n.get(&(k + 2)))
        else {
            continue;
        };
        let curvature = s0 - 2.0 * s1 + s2;
        let better = match best {
            None => true,
            Some((_, b)) => curvature > b,
        };
        if better {
            best = Some((k, curvature));
        }
    }
    let Some((suggested, max_curv)) = best else {
        return Err(Error::InsufficientData(
            "series too short for the elbow window".into(),
        ));
    };
    let scale = series.iter().map(|(_, v)| v.abs()).fold(0.0f64, f64::max);
    let distinct_knee = max_curv > 1e-9 * scale.max(1e-300);
    Ok(ElbowResult {
        series: series.to_vec(),
        suggested_k: if distinct_knee { suggested } else { k_min },
        distinct_knee,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{Curve, FrequencyGrid, ScaleTag};
    use approx::assert_relative_eq;
    use std::sync::Arc;

    fn make_curves(rows: &[Vec<f64>]) -> Vec<Curve> {
        let t = rows[0].len();
        let grid = Arc::new(FrequencyGrid::new(t, 2 * t, None).unwrap());
        rows.iter()
            .map(|r| Curve::new(grid.clone(), r.clone(), ScaleTag::LogPeriodogram).unwrap())
            .collect()
    }

    fn refs(curves: &[Curve]) -> Vec<&Curve> {
        curves.iter().collect()
    }

    fn toy_ensemble(channel_levels: &[f64], n_epochs: usize, t: usize) -> ChannelEnsemble {
        let grid = Arc::new(FrequencyGrid::new(t, 2 * t, None).unwrap());
        let mut curves = Vec::new();
        for (_, &level) in channel_levels.iter().enumerate() {
            for ep in 0..n_epochs {
                let vals: Vec<f64> = (0..t)
                    .map(|g| level + 0.01 * (ep as f64 - (n_epochs as f64 - 1.0) / 2.0) * (g as f64 * 0.3).sin())
                    .collect();
                curves.push(Curve::new(grid.clone(), vals, ScaleTag::LogPeriodogram).unwrap());
            }
        }
        let labels = (0..channel_levels.len()).map(|i| format!("ch{i}")).collect();
        ChannelEnsemble::new(grid, labels, n_epochs, curves).unwrap()
    }

    #[test]
    fn euclidean_distance_examples() {
        let curves = make_curves(&[vec![0.0; 50], vec![1.0; 50]]);
        assert_relative_eq!(
            euclidean_curve_distance(&curves[0], &curves[0]).unwrap(),
            0.0
        );
        assert_relative_eq!(
            euclidean_curve_distance(&curves[0], &curves[1]).unwrap(),
            50f64.sqrt(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn euclidean_distance_matches_loop_oracle() {
        use rand::rngs::StdRng;
        use rand::{Rng, SeedableRng};
        let mut rng = StdRng::seed_from_u64(9);
        let a: Vec<f64> = (0..30).map(|_| rng.random_range(-4.0..4.0)).collect();
        let b: Vec<f64> = (0..30).map(|_| rng.random_range(-4.0..4.0)).collect();
        let curves = make_curves(&[a.clone(), b.clone()]);
        let mut acc = 0.0;
        for i in 0..30 {
            acc += (a[i] - b[i]) * (a[i] - b[i]);
        }
        assert_relative_eq!(
            euclidean_curve_distance(&curves[0], &curves[1]).unwrap(),
            acc.sqrt(),
            max_relative = 1e-12
        );
    }

    #[test]
    fn fm_dissimilarity_basics() {
        let curves = make_curves(&[vec![0.0; 5], vec![1.0; 5], vec![2.0; 5]]);
        let all = refs(&curves);
        assert_relative_eq!(fm_dissimilarity(&all, &all).unwrap(), 0.0);
        // Singletons reduce to the plain curve distance.
        let a = vec![&curves[0]];
        let b = vec![&curves[2]];
        assert_relative_eq!(
            fm_dissimilarity(&a, &b).unwrap(),
            euclidean_curve_distance(&curves[0], &curves[2]).unwrap()
        );
        // A three-ordered-curves cluster vs its own middle curve.
        let middle = vec![&curves[1]];
        assert_relative_eq!(fm_dissimilarity(&all, &middle).unwrap(), 0.0);
    }

    #[test]
    fn cr_dissimilarity_identical_sets_zero() {
        let curves = make_curves(&vec![vec![1.0; 6]; 4]);
        let all = refs(&curves);
        assert_relative_eq!(cr_dissimilarity(&all, &all).unwrap(), 0.0);
    }

    #[test]
    fn cr_prefers_tight_bundles() {
        // Two tight same-center bundles pool to a smaller region than two
        // separated bundles with the same within-bundle spread.
        let bundle = |center: f64| -> Vec<Vec<f64>> {
            (0..4).map(|i| vec![center + 0.1 * i as f64; 10]).collect()
        };
        let x = make_curves(&bundle(0.0));
        let y_near = make_curves(&bundle(0.05));
        let y_far = make_curves(&bundle(5.0));
        let near = cr_dissimilarity(&refs(&x), &refs(&y_near)).unwrap();
        let far = cr_dissimilarity(&refs(&x), &refs(&y_far)).unwrap();
        assert!(near < far, "near={near} far={far}");
    }

    #[test]
    fn mean_sensitive_where_median_robust() {
        let clean: Vec<Vec<f64>> = vec![vec![1.0; 8]; 5];
        let mut contaminated = clean.clone();
        contaminated.push(vec![11.0; 8]);
        let clean_curves = make_curves(&clean);
        let cont_curves = make_curves(&contaminated);
        let fm = fm_dissimilarity(&refs(&cont_curves), &refs(&clean_curves)).unwrap();
        let mean = mean_dissimilarity(&refs(&cont_curves), &refs(&clean_curves)).unwrap();
        assert_relative_eq!(fm, 0.0);
        assert!(mean > 0.0);
    }

    #[test]
    fn mean_grows_linearly_in_shift_while_fm_stays_bounded() {
        let clean: Vec<Vec<f64>> = (0..6).map(|i| vec![0.01 * i as f64; 8]).collect();
        let clean_curves = make_curves(&clean);
        let mut last = 0.0;
        for c in [1.0, 2.0, 4.0] {
            // Shift fewer than half of the curves. The median moves by at
            // most one rank (0.02 -> 0.04), so FM stays at 0.02 * sqrt(8)
            // regardless of c, while MEAN tracks the shift linearly.
            let mut shifted = clean.clone();
            for row in shifted.iter_mut().take(2) {
                row.iter_mut().for_each(|v| *v += c);
            }
            let shifted_curves = make_curves(&shifted);
            let fm = fm_dissimilarity(&refs(&shifted_curves), &refs(&clean_curves)).unwrap();
            let mean = mean_dissimilarity(&refs(&shifted_curves), &refs(&clean_curves)).unwrap();
            assert_relative_eq!(fm, 0.02 * 8f64.sqrt(), max_relative = 1e-9);
            assert_relative_eq!(mean, 2.0 / 6.0 * c * 8f64.sqrt(), max_relative = 1e-9);
            assert!(mean > last);
            last = mean;
        }
    }

    #[test]
    fn identity_partition_when_k_equals_m() {
        let ens = toy_ensemble(&[0.0, 5.0, 10.0, 15.0], 3, 10);
        for measure in [Measure::Fm, Measure::Cr, Measure::Mean] {
            let (part, trace) = hierarchical_cluster(&ens, measure, 4).unwrap();
            assert_eq!(part.assignment, vec![0, 1, 2, 3]);
            assert!(trace.steps.is_empty());
        }
    }

    #[test]
    fn recovers_two_separated_groups() {
        let ens = toy_ensemble(&[0.0, 0.2, 10.0, 10.2], 4, 10);
        for measure in [Measure::Fm, Measure::Cr, Measure::Mean] {
            let (part, _) = hierarchical_cluster(&ens, measure, 2).unwrap();
            assert_eq!(part.assignment, vec![0, 0, 1, 1], "measure {measure:?}");
        }
    }

    #[test]
    fn single_cluster_endpoint() {
        let ens = toy_ensemble(&[0.0, 1.0, 2.0], 3, 8);
        for measure in [Measure::Cr, Measure::Mean] {
            let (part, _) = hierarchical_cluster(&ens, measure, 1).unwrap();
            assert_eq!(part.assignment, vec![0, 0, 0]);
        }
    }

    #[test]
    fn k_target_out_of_range() {
        let ens = toy_ensemble(&[0.0, 1.0], 3, 8);
        assert!(matches!(
            hierarchical_cluster(&ens, Measure::Fm, 0),
            Err(Error::Range(_))
        ));
        assert!(matches!(
            hierarchical_cluster(&ens, Measure::Fm, 3),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn traces_are_reproducible_and_greedy() {
        let ens = toy_ensemble(&[0.0, 0.4, 3.0, 3.5, 9.0], 4, 12);
        let a = agglomerate(&ens, Measure::Fm, 1).unwrap();
        let b = agglomerate(&ens, Measure::Fm, 1).unwrap();
        assert_eq!(a.trace.steps.len(), b.trace.steps.len());
        for (x, y) in a.trace.steps.iter().zip(&b.trace.steps) {
            assert_eq!(x.merged, y.merged);
            assert_eq!(x.dissimilarity.to_bits(), y.dissimilarity.to_bits());
        }
        let mut n = 5;
        for step in &a.trace.steps {
            assert_eq!(step.n_before, n);
            assert!(step.dissimilarity >= 0.0 && step.dissimilarity.is_finite());
            n -= 1;
        }
    }

    #[test]
    fn elbow_finds_planted_knee() {
        // Low within-group merge costs, then a jump once 5 groups remain.
        let series: Vec<(usize, f64)> = (2..=12)
            .map(|n| {
                let v = if n <= 5 { 40.0 + (5 - n) as f64 * 10.0 } else { 1.0 + (12 - n) as f64 * 0.1 };
                (n, v)
            })
            .collect();
        let res = elbow_trace(&series, 2, 10).unwrap();
        assert!(res.distinct_knee);
        assert_eq!(res.suggested_k, 5);
    }

    #[test]
    fn elbow_flags_linear_series() {
        let series: Vec<(usize, f64)> = (2..=12).map(|n| (n, 100.0 - 5.0 * n as f64)).collect();
        let res = elbow_trace(&series, 2, 10).unwrap();
        assert!(!res.distinct_knee);
        assert_eq!(res.suggested_k, 2);
    }

    #[test]
    fn elbow_rejects_short_series() {
        let series = vec![(2, 1.0), (3, 0.5)];
        assert!(matches!(
            elbow_trace(&series, 2, 10),
            Err(Error::InsufficientData(_))
        ));
    }
}
