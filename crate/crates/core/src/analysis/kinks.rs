//! Entanglement-Hamiltonian level crossings and min-entropy kinks.
//!
//! Sorted Schmidt values never cross; a crossing shows up as a change in the
//! particle-number sector of a level between consecutive samples. Each
//! sector's level is continuous, so the crossing time is found by linear
//! interpolation of the difference of the two sector levels.

use super::AnalysisError;
use crate::scalar::Real;
use crate::spectrum::EntanglementRecord;

/// Levels below this weight carry no meaningful sector label.
const LEVEL_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct KinkEvent<T> {
    pub t_c: T,
    /// `1 − m(t_c)/M`, interpolated like `t_c`.
    pub decayed_fraction: T,
    /// 1-based ranks of the crossing Schmidt values, `(1, 2)` for the
    /// ground-state crossing.
    pub pair: (usize, usize),
    pub from_sector: usize,
    pub to_sector: usize,
    /// 1-based position in time among the events of the same pair.
    pub ordinal: usize,
}

/// Zero crossings of `upper − lower`, linearly interpolated.
pub fn level_crossings<T: Real>(times: &[T], upper: &[T], lower: &[T]) -> Vec<T> {
    let n = times.len().min(upper.len()).min(lower.len());
    let mut out = Vec::new();
    for k in 1..n {
        let d0 = upper[k - 1] - lower[k - 1];
        let d1 = upper[k] - lower[k];
        if d0 == T::zero() && k == 1 {
            out.push(times[0]);
        }
        if (d0 > T::zero() && d1 <= T::zero()) || (d0 < T::zero() && d1 >= T::zero()) {
            let f = d0 / (d0 - d1);
            out.push(times[k - 1] + f * (times[k] - times[k - 1]));
        }
    }
    out
}

/// Weight of the first level at or after `from` that belongs to `sector`.
fn sector_level<T: Real>(r: &EntanglementRecord<T>, sector: usize, from: usize) -> Option<T> {
    r.levels.iter().skip(from).find(|l| l.sector == sector).map(|l| l.lambda)
}

/// Crossings between Schmidt levels `p` and `p + 1` for `p < pairs`.
///
/// Events are ordered by pair, then time. Only the first event of pair
/// `(1, 2)` marks the critical time used by the scaling analysis.
pub fn detect_kinks<T: Real>(
    records: &[EntanglementRecord<T>],
    pairs: usize,
) -> Result<Vec<KinkEvent<T>>, AnalysisError> {
    if records.iter().any(|r| r.levels.len() < 2) {
        return Err(AnalysisError::Input("kink detection needs at least 2 Schmidt values per record".into()));
    }
    let floor = T::lit(LEVEL_FLOOR);
    let depth = records.iter().map(|r| r.levels.len()).min().unwrap_or(0);
    let mut events = Vec::new();
    for p in 0..pairs.min(depth.saturating_sub(1)) {
        let mut ordinal = 0;
        for w in records.windows(2) {
            let (r0, r1) = (&w[0], &w[1]);
            let (s0, s1) = (r0.levels[p].sector, r1.levels[p].sector);
            if s0 == s1 || r0.levels[p].lambda < floor || r1.levels[p].lambda < floor {
                continue;
            }
            // deeper pairs: only a clean swap with the next level counts
            if p > 0 && r0.levels[p + 1].sector != s1 {
                continue;
            }
            let a0 = r0.levels[p].lambda;
            let b0 = sector_level(r0, s1, p + 1).unwrap_or(r0.levels[p + 1].lambda);
            let a1 = sector_level(r1, s0, p + 1).unwrap_or(r1.levels[p + 1].lambda);
            let b1 = r1.levels[p].lambda;
            let (d0, d1) = (a0 - b0, a1 - b1);
            let f = if d0 - d1 > T::zero() { (d0 / (d0 - d1)).max(T::zero()).min(T::one()) } else { T::zero() };
            ordinal += 1;
            events.push(KinkEvent {
                t_c: r0.time + f * (r1.time - r0.time),
                decayed_fraction: r0.decayed_fraction + f * (r1.decayed_fraction - r0.decayed_fraction),
                pair: (p + 1, p + 2),
                from_sector: s0,
                to_sector: s1,
                ordinal,
            });
        }
    }
    Ok(events)
}

/// The first ground-state crossing, if any.
pub fn first_kink<T: Real>(records: &[EntanglementRecord<T>]) -> Result<Option<KinkEvent<T>>, AnalysisError> {
    Ok(detect_kinks(records, 1)?.into_iter().next())
}

/// Slope discontinuities of a sampled curve (the min-entropy).
///
/// A kink between samples `j` and `j+1` leaves a pair of large second
/// differences at `j` and `j+1`. Candidates must exceed `threshold` times
/// the median second difference in a surrounding window; the kink time is
/// the intersection of the straight lines through the two samples on each
/// side.
pub fn min_entropy_kinks<T: Real>(times: &[T], values: &[T], threshold: T) -> Vec<T> {
    let n = times.len().min(values.len());
    if n < 6 {
        return Vec::new();
    }
    // d2[k] belongs to sample k (1..n-1)
    let mut d2 = vec![T::zero(); n];
    for k in 1..n - 1 {
        d2[k] = (values[k + 1] - T::lit(2.0) * values[k] + values[k - 1]).abs();
    }
    let window = 12usize;
    let background = |j: usize| -> T {
        let lo = j.saturating_sub(window).max(1);
        let hi = (j + window + 2).min(n - 1);
        let mut v: Vec<T> = (lo..hi).filter(|&k| k + 1 < j || k > j + 2).map(|k| d2[k]).collect();
        if v.is_empty() {
            return T::zero();
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        v[v.len() / 2]
    };
    let tiny = T::lit(1e-14);
    let mut out = Vec::new();
    let mut j = 2;
    while j + 2 < n {
        let pair = d2[j] + d2[j + 1];
        let is_peak = pair >= d2[j - 1] + d2[j] && pair > d2[j + 1] + d2[j + 2];
        if is_peak && pair > threshold * background(j) + tiny {
            let left = (values[j] - values[j - 1]) / (times[j] - times[j - 1]);
            let right = (values[j + 2] - values[j + 1]) / (times[j + 2] - times[j + 1]);
            let t = if (left - right).abs() > T::zero() {
                // left line through (t_j, v_j), right line through (t_{j+1}, v_{j+1})
                (values[j + 1] - values[j] + left * times[j] - right * times[j + 1]) / (left - right)
            } else {
                (times[j] + times[j + 1]) / T::lit(2.0)
            };
            out.push(t.max(times[j - 1]).min(times[j + 2]));
            j += 3;
        } else {
            j += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectrum::SchmidtLevel;

    fn record(t: f64, levels: &[(f64, usize)]) -> EntanglementRecord<f64> {
        EntanglementRecord {
            step: 0,
            time: t,
            m: 0.0,
            decayed_fraction: t / 100.0,
            s_vn: 0.0,
            renyi: vec![],
            s_min: -levels[0].0.ln(),
            levels: levels.iter().map(|&(l, s)| SchmidtLevel::new(l, s)).collect(),
            schmidt_total: 1.0,
        }
    }

    /// Two sector levels `0.6 − 0.01 t` (sector 3) and `0.4 + 0.01 t`
    /// (sector 2), reported in sorted order.
    fn synthetic(dt: f64, steps: usize) -> Vec<EntanglementRecord<f64>> {
        (0..=steps)
            .map(|k| {
                let t = k as f64 * dt;
                let (a, b) = (0.6 - 0.01 * t, 0.4 + 0.01 * t);
                if a >= b {
                    record(t, &[(a, 3), (b, 2)])
                } else {
                    record(t, &[(b, 2), (a, 3)])
                }
            })
            .collect()
    }

    #[test]
    fn synthetic_crossing_is_exact() {
        let recs = synthetic(0.3, 60);
        let ev = detect_kinks(&recs, 1).unwrap();
        assert_eq!(ev.len(), 1);
        assert!((ev[0].t_c - 10.0).abs() < 1e-12);
        assert!((ev[0].decayed_fraction - 0.1).abs() < 1e-12);
        assert_eq!((ev[0].from_sector, ev[0].to_sector), (3, 2));
        assert_eq!(ev[0].pair, (1, 2));
        assert_eq!(ev[0].ordinal, 1);
        let times: Vec<f64> = recs.iter().map(|r| r.time).collect();
        let up: Vec<f64> = times.iter().map(|t| 0.6 - 0.01 * t).collect();
        let lo: Vec<f64> = times.iter().map(|t| 0.4 + 0.01 * t).collect();
        let c = level_crossings(&times, &up, &lo);
        assert_eq!(c.len(), 1);
        assert!((c[0] - 10.0).abs() < 1e-12);
    }

    #[test]
    fn monotone_gap_has_no_kink() {
        let recs: Vec<_> = (0..50).map(|k| record(k as f64 * 0.1, &[(0.9 - 0.001 * k as f64, 4), (0.05, 3)])).collect();
        assert!(detect_kinks(&recs, 3).unwrap().is_empty());
        assert!(first_kink(&recs).unwrap().is_none());
    }

    #[test]
    fn needs_two_levels() {
        let recs = vec![record(0.0, &[(1.0, 3)])];
        assert!(detect_kinks(&recs, 1).is_err());
    }

    #[test]
    fn min_entropy_kink_on_synthetic_curve() {
        let recs = synthetic(0.02, 1000);
        let times: Vec<f64> = recs.iter().map(|r| r.time).collect();
        let s_min: Vec<f64> = recs.iter().map(|r| r.s_min).collect();
        let kinks = min_entropy_kinks(&times, &s_min, 10.0);
        assert_eq!(kinks.len(), 1, "{kinks:?}");
        assert!((kinks[0] - 10.0).abs() < 0.02);
    }

    #[test]
    fn smooth_curve_has_no_min_entropy_kink() {
        let times: Vec<f64> = (0..500).map(|k| k as f64 * 0.02).collect();
        let v: Vec<f64> = times.iter().map(|t| (0.3 * t).sin() + 0.1 * t * t).collect();
        assert!(min_entropy_kinks(&times, &v, 10.0).is_empty());
    }

    #[test]
    fn kink_off_grid() {
        // |t − 3.337| kink between samples
        let times: Vec<f64> = (0..400).map(|k| k as f64 * 0.02).collect();
        let v: Vec<f64> = times.iter().map(|t| 0.2 * t + 0.5 * (t - 3.337).max(0.0)).collect();
        let k = min_entropy_kinks(&times, &v, 10.0);
        assert_eq!(k.len(), 1);
        assert!((k[0] - 3.337).abs() < 1e-9);
    }
}
