//! Minimal dominating constants and domination verdicts.
//!
//! A curve dominates an estimate when `bound(t) >= ci_high(t)` at every grid
//! point inside the curve's validity interval. Calibration searches over the
//! curve's knob (see [`TailBoundCurve::knob`]), which weakens the bound as it
//! grows, so the dominating knobs form an interval `[k*, ∞)`.

use serde::{Deserialize, Serialize};

use crate::bounds::{BoundFamily, Sidedness, TailBoundCurve};
use crate::error::{invalid, Error, Result};
use crate::montecarlo::TailEstimate;

/// Relative resolution of the knob search.
pub const CALIBRATION_REL_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    pub t: f64,
    pub ci_high: f64,
    /// `None` outside the curve's validity interval.
    pub bound: Option<f64>,
    pub margin: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum CalibrationStatus {
    Dominated,
    ViolatedAt { t: Vec<f64> },
    /// No knob in the search interval dominates (listing the violating `t`
    /// at the weakest knob), or no grid point lies in the validity interval.
    OutOfGrid { t: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub family: BoundFamily,
    pub sidedness: Sidedness,
    pub margins: Vec<Margin>,
    /// Grid points outside the validity interval (not judged).
    pub excluded: Vec<f64>,
    pub status: CalibrationStatus,
}

impl DominationReport {
    pub fn dominated(&self) -> bool {
        self.status == CalibrationStatus::Dominated
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub family: BoundFamily,
    /// `"C"` or `"c"`.
    pub constant_name: String,
    /// Calibrated value of the named constant, when one dominates.
    pub value: Option<f64>,
    /// Knob equivalent of `value`.
    pub knob: Option<f64>,
    pub margins: Vec<Margin>,
    pub excluded: Vec<f64>,
    pub status: CalibrationStatus,
    /// True when the knob shrunk by `1 + CALIBRATION_REL_TOL` (the constant
    /// made that much stronger) was re-checked and fails to dominate.
    pub minimality_certified: bool,
    /// The search interval, in units of the named constant.
    pub search: (f64, f64),
}

fn check_compatible(estimate: &TailEstimate, curve: &TailBoundCurve) -> Result<()> {
    if estimate.sidedness != curve.sidedness() {
        return Err(Error::SidednessMismatch {
            estimate: estimate.sidedness.to_string(),
            curve: curve.sidedness().to_string(),
        });
    }
    if estimate.ci_high.len() != estimate.t_grid.len() {
        return Err(Error::DimensionMismatch {
            expected: estimate.t_grid.len(),
            got: estimate.ci_high.len(),
        });
    }
    Ok(())
}

/// Per-point margins `bound(t) − ci_high(t)` and the list of violating `t`.
fn margins(estimate: &TailEstimate, curve: &TailBoundCurve) -> Result<(Vec<Margin>, Vec<f64>, Vec<f64>)> {
    let mut out = Vec::with_capacity(estimate.t_grid.len());
    let mut excluded = Vec::new();
    let mut violating = Vec::new();
    for (&t, &hi) in estimate.t_grid.iter().zip(&estimate.ci_high) {
        let bound = curve.eval(t)?.value();
        let margin = bound.map(|b| b - hi);
        match margin {
            None => excluded.push(t),
            Some(m) if m < 0.0 => violating.push(t),
            _ => {}
        }
        out.push(Margin {
            t,
            ci_high: hi,
            bound,
            margin,
        });
    }
    Ok((out, excluded, violating))
}

/// Judges the curve against the estimate's upper confidence band.
pub fn domination_report(estimate: &TailEstimate, curve: &TailBoundCurve) -> Result<DominationReport> {
    check_compatible(estimate, curve)?;
    let (margins, excluded, violating) = margins(estimate, curve)?;
    let status = if violating.is_empty() {
        CalibrationStatus::Dominated
    } else {
        CalibrationStatus::ViolatedAt { t: violating }
    };
    Ok(DominationReport {
        family: curve.family(),
        sidedness: curve.sidedness(),
        margins,
        excluded,
        status,
    })
}

/// Finds the weakest-to-strongest boundary of the knob so that the curve
/// dominates `estimate`; `search` bounds the named constant (`C` or `c`).
pub fn min_dominating_constant(
    estimate: &TailEstimate,
    curve: &TailBoundCurve,
    search: (f64, f64),
) -> Result<CalibrationResult> {
    check_compatible(estimate, curve)?;
    let constant_name = curve
        .constant_name()
        .ok_or_else(|| invalid("family", format!("{} has no free constant to calibrate", curve.family())))?;
    let (s_lo, s_hi) = search;
    if !(s_lo > 0.0 && s_lo < s_hi && s_hi.is_finite()) {
        return Err(invalid("search", format!("need 0 < min < max, got [{s_lo}, {s_hi}]")));
    }
    // Knob endpoints: the knob equals the constant or its reciprocal.
    let (k_lo, k_hi) = if curve.constant_for_knob(2.0) == Some(2.0) {
        (s_lo, s_hi)
    } else {
        (1.0 / s_hi, 1.0 / s_lo)
    };
    let at = |k: f64| -> Result<(Vec<Margin>, Vec<f64>, Vec<f64>)> { margins(estimate, &curve.with_knob(k)?) };
    let dominates = |k: f64| -> Result<bool> { Ok(at(k)?.2.is_empty()) };

    let (weak_margins, excluded, weak_violations) = at(k_hi)?;
    let in_validity = estimate.t_grid.len() - excluded.len();
    let base = |status, value: Option<f64>, knob: Option<f64>, margins, certified| CalibrationResult {
        family: curve.family(),
        constant_name: constant_name.to_owned(),
        value,
        knob,
        margins,
        excluded: excluded.clone(),
        status,
        minimality_certified: certified,
        search,
    };
    if in_validity == 0 {
        return Ok(base(
            CalibrationStatus::OutOfGrid { t: Vec::new() },
            None,
            None,
            weak_margins,
            false,
        ));
    }
    if !weak_violations.is_empty() {
        return Ok(base(
            CalibrationStatus::OutOfGrid { t: weak_violations },
            None,
            None,
            weak_margins,
            false,
        ));
    }
    let (mut lo, mut hi) = (k_lo, k_hi);
    if dominates(lo)? {
        // Even the strongest admissible constant dominates.
        let m = at(lo)?.0;
        return Ok(base(
            CalibrationStatus::Dominated,
            curve.constant_for_knob(lo),
            Some(lo),
            m,
            false,
        ));
    }
    while hi / lo > 1.0 + CALIBRATION_REL_TOL {
        let mid = (lo * hi).sqrt();
        if dominates(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let certified = !dominates(hi / (1.0 + CALIBRATION_REL_TOL))?;
    let m = at(hi)?.0;
    Ok(base(
        CalibrationStatus::Dominated,
        curve.constant_for_knob(hi),
        Some(hi),
        m,
        certified,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::CurveParams;

    fn synthetic(t_grid: Vec<f64>, ci_high: Vec<f64>, side: Sidedness) -> TailEstimate {
        let n = t_grid.len();
        TailEstimate {
            statistic: "synthetic".into(),
            sidedness: side,
            seed: 0,
            n: 1,
            conf_level: 0.95,
            center: 0.0,
            center_std_error: 0.0,
            scale: 1.0,
            t_grid,
            counts: vec![0; n],
            p_hat: vec![0.0; n],
            ci_low: vec![0.0; n],
            ci_high,
        }
    }

    /// `2 exp(−t/C)`.
    fn exp_curve(c: f64) -> TailBoundCurve {
        TailBoundCurve::new(CurveParams::HansonWright {
            k: 1.0,
            hs: 0.0,
            op: 1.0,
            alpha: 2.0,
            c,
        })
        .unwrap()
    }

    #[test]
    fn binding_point_example() {
        let grid: Vec<f64> = (1..=10).map(f64::from).collect();
        let hi: Vec<f64> = grid.iter().map(|t| (-t).exp()).collect();
        let est = synthetic(grid, hi, Sidedness::TwoSided);
        let r = min_dominating_constant(&est, &exp_curve(1.0), (0.01, 100.0)).unwrap();
        let exact = 10.0 / (10.0 + 2f64.ln());
        assert!((exact - 0.935178).abs() < 1e-6);
        let v = r.value.unwrap();
        assert!(v >= exact && v <= exact * (1.0 + 2e-3), "{v}");
        assert_eq!(r.status, CalibrationStatus::Dominated);
        assert!(r.minimality_certified);
        assert_eq!(r.constant_name, "C");
        // Re-evaluate the certificate independently.
        assert!(domination_report(&est, &exp_curve(v)).unwrap().dominated());
        assert!(!domination_report(&est, &exp_curve(v / 1.001)).unwrap().dominated());
    }

    #[test]
    fn small_band_gives_small_constant() {
        let grid = vec![1.0, 2.0, 4.0];
        let est = synthetic(grid, vec![1e-6; 3], Sidedness::TwoSided);
        let r = min_dominating_constant(&est, &exp_curve(1.0), (1e-3, 100.0)).unwrap();
        assert_eq!(r.status, CalibrationStatus::Dominated);
        // Binding at t = 4: C = 4 / log(2e6).
        let exact = 4.0 / 2e6f64.ln();
        let v = r.value.unwrap();
        assert!(v >= exact && v <= exact * 1.002 && v < 0.3, "{v}");
    }

    #[test]
    fn c_family_knob_direction() {
        // 2 exp(−c t) against exp(−t) on [1, 10]: the largest c is 1 + log(2)/10.
        let grid: Vec<f64> = (1..=10).map(f64::from).collect();
        let hi: Vec<f64> = grid.iter().map(|t| (-t).exp()).collect();
        let est = synthetic(grid, hi, Sidedness::TwoSided);
        let curve = TailBoundCurve::new(CurveParams::EuclidNorm { alpha: 1.0, c: 1.0 }).unwrap();
        let r = min_dominating_constant(&est, &curve, (0.01, 100.0)).unwrap();
        let exact = 1.0 + 2f64.ln() / 10.0;
        let v = r.value.unwrap();
        assert!(v <= exact && v >= exact / (1.0 + 2e-3), "{v}");
        assert_eq!(r.constant_name, "c");
        assert!(r.minimality_certified);
    }

    #[test]
    fn out_of_grid_when_capped_below_one() {
        let est = synthetic(vec![5.0], vec![1.0], Sidedness::TwoSided);
        let r = min_dominating_constant(&est, &exp_curve(1.0), (0.01, 1.0)).unwrap();
        assert_eq!(r.status, CalibrationStatus::OutOfGrid { t: vec![5.0] });
        assert_eq!(r.value, None);
        // A point outside the validity interval is excluded, not judged.
        let curve = TailBoundCurve::new(CurveParams::MaxProductTail {
            n: 4,
            d: 2,
            k: 1.0,
            alpha: 1.0,
            c: 1.0,
        })
        .unwrap();
        let est = synthetic(vec![3.0], vec![1.0], Sidedness::Upper);
        let r = min_dominating_constant(&est, &curve, (0.01, 1.0)).unwrap();
        assert_eq!(r.excluded, vec![3.0]);
        assert!(matches!(r.status, CalibrationStatus::OutOfGrid { .. }));
    }

    #[test]
    fn report_examples() {
        let est = synthetic(vec![0.5, 1.0, 3.0], vec![0.9, 0.5, 0.1], Sidedness::TwoSided);
        let one = TailBoundCurve::new(CurveParams::HansonWright {
            k: 1.0,
            hs: 1.0,
            op: 1.0,
            alpha: 1.0,
            c: 1e12,
        })
        .unwrap();
        let r = domination_report(&est, &one).unwrap();
        assert!(r.dominated());
        assert_eq!(r.margins.len(), 3);
        let zero = TailBoundCurve::new(CurveParams::HansonWright {
            k: 1.0,
            hs: 0.0,
            op: 0.0,
            alpha: 1.0,
            c: 1.0,
        })
        .unwrap();
        let r = domination_report(&est, &zero).unwrap();
        assert_eq!(r.status, CalibrationStatus::ViolatedAt { t: vec![0.5, 1.0, 3.0] });

        let upper = synthetic(vec![1.0], vec![0.5], Sidedness::Upper);
        assert!(matches!(domination_report(&upper, &one), Err(Error::SidednessMismatch { .. })));
        let classical = TailBoundCurve::new(CurveParams::ClassicalConvex { a: -1.0, b: 1.0, mode: 1 }).unwrap();
        assert!(min_dominating_constant(&est, &classical, (0.1, 1.0)).is_err());
    }
}
