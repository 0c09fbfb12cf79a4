//! Mean Sum of Distance between two curves and Table-style aggregation
//! (`mean ± std` per fold and pooled).

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::types::{Contour, PixelPoint};

#[derive(Debug, Clone, PartialEq)]
pub enum MetricsError {
    EmptyContour,
    InvalidSpacing(f64),
    /// No successfully evaluated record to aggregate.
    EmptyFold { fold_index: usize },
    NoRecords,
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::EmptyContour => f.write_str("contour has no points"),
            MetricsError::InvalidSpacing(s) => write!(f, "pixel spacing must be positive, got {s}"),
            MetricsError::EmptyFold { fold_index } => {
                write!(f, "fold {fold_index} has no successfully evaluated records")
            }
            MetricsError::NoRecords => f.write_str("no records to aggregate"),
        }
    }
}

impl core::error::Error for MetricsError {}

fn directed_sum(from: &[PixelPoint], to: &[PixelPoint]) -> f64 {
    from.iter()
        .map(|&a| {
            let nearest = to.iter().map(|&b| a.dist_sq(b)).min().unwrap_or(0);
            libm::sqrt(nearest as f64)
        })
        .sum()
}

/// MSD in pixels over raw point lists: the mean, over the points of both
/// curves, of the distance to the nearest point of the other curve.
pub fn msd_points(u: &[PixelPoint], v: &[PixelPoint]) -> Result<f64, MetricsError> {
    if u.is_empty() || v.is_empty() {
        return Err(MetricsError::EmptyContour);
    }
    let total = directed_sum(u, v) + directed_sum(v, u);
    Ok(total / (u.len() + v.len()) as f64)
}

pub fn msd_px(u: &Contour, v: &Contour) -> Result<f64, MetricsError> {
    msd_points(u.points(), v.points())
}

/// MSD in millimetres: `spacing * msd_px`.
pub fn msd(u: &Contour, v: &Contour, spacing_mm: f64) -> Result<f64, MetricsError> {
    if !(spacing_mm.is_finite() && spacing_mm > 0.0) {
        return Err(MetricsError::InvalidSpacing(spacing_mm));
    }
    Ok(spacing_mm * msd_px(u, v)?)
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvalStatus {
    Ok { msd_px: f64, msd_mm: f64 },
    ExtractionFailed { reason: String },
}

/// Outcome of evaluating one corpus entry.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalRecord {
    pub id: String,
    pub status: EvalStatus,
}

impl EvalRecord {
    pub fn ok(id: impl Into<String>, msd_px: f64, spacing_mm: f64) -> Self {
        Self {
            id: id.into(),
            status: EvalStatus::Ok {
                msd_px,
                msd_mm: msd_px * spacing_mm,
            },
        }
    }

    pub fn failed(id: impl Into<String>, reason: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            status: EvalStatus::ExtractionFailed {
                reason: reason.into(),
            },
        }
    }

    pub fn is_ok(&self) -> bool {
        matches!(self.status, EvalStatus::Ok { .. })
    }

    pub fn msd_mm(&self) -> Option<f64> {
        match self.status {
            EvalStatus::Ok { msd_mm, .. } => Some(msd_mm),
            EvalStatus::ExtractionFailed { .. } => None,
        }
    }

    pub fn msd_px(&self) -> Option<f64> {
        match self.status {
            EvalStatus::Ok { msd_px, .. } => Some(msd_px),
            EvalStatus::ExtractionFailed { .. } => None,
        }
    }
}

/// Mean with sample (n - 1) standard deviation; `std` is 0 for one value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
    pub count: usize,
}

impl MeanStd {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() == 1 {
            0.0
        } else {
            let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
            libm::sqrt(ss / (n - 1.0))
        };
        Some(Self {
            mean,
            std,
            count: values.len(),
        })
    }
}

/// Two decimals, e.g. `0.62 ± 0.17`.
impl fmt::Display for MeanStd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2} ± {:.2}", self.mean, self.std)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldReport {
    pub fold_index: usize,
    pub mean_mm: f64,
    pub std_mm: f64,
    pub count: usize,
    pub failures: usize,
}

impl FoldReport {
    pub fn stats(&self) -> MeanStd {
        MeanStd {
            mean: self.mean_mm,
            std: self.std_mm,
            count: self.count,
        }
    }
}

/// Failed records are counted but left out of the statistics.
pub fn aggregate_fold(records: &[EvalRecord], fold_index: usize) -> Result<FoldReport, MetricsError> {
    let values: Vec<f64> = records.iter().filter_map(EvalRecord::msd_mm).collect();
    let stats = MeanStd::of(&values).ok_or(MetricsError::EmptyFold { fold_index })?;
    Ok(FoldReport {
        fold_index,
        mean_mm: stats.mean,
        std_mm: stats.std,
        count: stats.count,
        failures: records.len() - values.len(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OverallSummary {
    /// Over every successful record of every fold.
    pub pooled: MeanStd,
    /// `pooled` with the single largest MSD removed; `None` with one record.
    pub worst_excluded: Option<MeanStd>,
    /// Over the per-fold means.
    pub fold_means: MeanStd,
    pub failures: usize,
}

pub fn aggregate_overall(reports: &[FoldReport], records: &[EvalRecord]) -> Result<OverallSummary, MetricsError> {
    let mut values: Vec<f64> = records.iter().filter_map(EvalRecord::msd_mm).collect();
    let pooled = MeanStd::of(&values).ok_or(MetricsError::NoRecords)?;
    let means: Vec<f64> = reports.iter().map(|r| r.mean_mm).collect();
    let fold_means = MeanStd::of(&means).ok_or(MetricsError::NoRecords)?;

    let worst = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i);
    if let Some(i) = worst {
        values.remove(i);
    }
    Ok(OverallSummary {
        pooled,
        worst_excluded: MeanStd::of(&values),
        fold_means,
        failures: records.len() - pooled.count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    fn c(pts: &[(u32, u32)]) -> Contour {
        Contour::new(pts.iter().map(|&(x, y)| PixelPoint::new(x, y)).collect()).unwrap()
    }

    fn recs(vals: &[f64]) -> Vec<EvalRecord> {
        vals.iter()
            .enumerate()
            .map(|(i, &v)| EvalRecord::ok(format!("r{i}"), v, 1.0))
            .collect()
    }

    #[test]
    fn msd_examples() {
        let u = c(&[(0, 0), (0, 1)]);
        let v = c(&[(3, 4), (3, 5)]);
        assert_eq!(msd(&u, &u, 1.7).unwrap(), 0.0);
        // nearest distances: 5 and sqrt(18) from each side
        let px = msd(&u, &v, 1.0).unwrap();
        assert!((px - (2.5 + 1.5 * core::f64::consts::SQRT_2)).abs() < 1e-12);
        let mm = msd(&u, &v, 192.0 / 136.0).unwrap();
        assert!((mm - px * 192.0 / 136.0).abs() < 1e-12);
        let far = c(&[(3, 4), (4, 4)]);
        let near = c(&[(0, 0), (0, 4)]);
        // (0,0)->(3,4)=5, (0,4)->(3,4)=3, (3,4)->(0,4)=3, (4,4)->(0,4)=4
        assert_eq!(msd(&near, &far, 1.0).unwrap(), 15.0 / 4.0);
        assert!(msd(&u, &v, 0.0).is_err());
        assert_eq!(msd_points(&[], &[PixelPoint::new(0, 0)]), Err(MetricsError::EmptyContour));
    }

    #[test]
    fn fold_examples() {
        let r = aggregate_fold(&recs(&[1.0, 1.0, 1.0]), 0).unwrap();
        assert_eq!((r.mean_mm, r.std_mm, r.count), (1.0, 0.0, 3));
        let r = aggregate_fold(&recs(&[0.5, 1.5]), 1).unwrap();
        assert_eq!(r.mean_mm, 1.0);
        assert!((r.std_mm - core::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(format!("{}", r.stats()), "1.00 ± 0.71");
        let r = aggregate_fold(&recs(&[2.0]), 2).unwrap();
        assert_eq!((r.mean_mm, r.std_mm, r.count), (2.0, 0.0, 1));
    }

    #[test]
    fn failures_excluded() {
        let mut rs = recs(&[1.0, 3.0]);
        rs.push(EvalRecord::failed("bad", "empty"));
        let r = aggregate_fold(&rs, 0).unwrap();
        assert_eq!((r.mean_mm, r.count, r.failures), (2.0, 2, 1));
        assert_eq!(
            aggregate_fold(&[EvalRecord::failed("x", "y")], 4),
            Err(MetricsError::EmptyFold { fold_index: 4 })
        );
    }

    #[test]
    fn overall_examples() {
        let rs = recs(&[1.0, 1.0]);
        let rep = aggregate_fold(&rs, 0).unwrap();
        let s = aggregate_overall(&[rep], &rs).unwrap();
        assert_eq!((s.pooled.mean, s.pooled.std), (1.0, 0.0));
        let w = s.worst_excluded.unwrap();
        assert_eq!((w.mean, w.std, w.count), (1.0, 0.0, 1));

        let rs = recs(&[1.0, 1.0, 1.0, 10.0]);
        let rep = aggregate_fold(&rs, 0).unwrap();
        let s = aggregate_overall(&[rep], &rs).unwrap();
        assert_eq!(s.worst_excluded.unwrap().mean, 1.0);

        let a = recs(&[0.4, 0.9, 1.3]);
        let b = recs(&[2.0, 0.1]);
        let reps = [aggregate_fold(&a, 0).unwrap(), aggregate_fold(&b, 1).unwrap()];
        let all: Vec<EvalRecord> = a.iter().chain(&b).cloned().collect();
        let s = aggregate_overall(&reps, &all).unwrap();
        assert_eq!(s.pooled, MeanStd::of(&[0.4, 0.9, 1.3, 2.0, 0.1]).unwrap());
        assert_eq!(s.fold_means.count, 2);
        assert!(aggregate_overall(&[], &[]).is_err());
    }

    fn arb_contour() -> impl Strategy<Value = Contour> {
        proptest::collection::vec((0u32..30, 0u32..30), 2..8).prop_filter_map("invalid contour", |v| {
            Contour::new(v.into_iter().map(|(x, y)| PixelPoint::new(x, y)).collect()).ok()
        })
    }

    proptest! {
        #[test]
        fn symmetric_and_translation_invariant(u in arb_contour(), v in arb_contour(), tx in 0u32..20, ty in 0u32..20) {
            prop_assert_eq!(msd_px(&u, &v).unwrap(), msd_px(&v, &u).unwrap());
            let shift = |k: &Contour| Contour::new(k.points().iter().map(|p| PixelPoint::new(p.x + tx, p.y + ty)).collect()).unwrap();
            prop_assert_eq!(msd_px(&shift(&u), &shift(&v)).unwrap(), msd_px(&u, &v).unwrap());
        }

        #[test]
        fn zero_iff_same_point_set(u in arb_contour(), v in arb_contour()) {
            let su: std::collections::BTreeSet<_> = u.points().iter().collect();
            let sv: std::collections::BTreeSet<_> = v.points().iter().collect();
            prop_assert_eq!(msd_px(&u, &v).unwrap() == 0.0, su == sv);
        }

        #[test]
        fn spacing_scales(u in arb_contour(), v in arb_contour(), s in 0.01f64..10.0) {
            prop_assert_eq!(msd(&u, &v, s).unwrap(), s * msd(&u, &v, 1.0).unwrap());
        }
    }
}
