//! Small-gain stability test of a closed loop with a bounded time-varying
//! delay: the loop is declared safe when the complementary sensitivity
//! magnitude stays strictly below `1 / (ubd * omega)` across the whole
//! frequency sweep. The test only applies when the zero-delay loop is
//! stable; a failing precondition is reported as such, not as instability.

use crate::lti::{complementary_sensitivity, is_hurwitz, LtiError, RationalTf};
use thiserror::Error;

/// Logarithmic frequency sweep in rad per the transfer functions' time unit.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyGrid {
    pub omega_min: f64,
    pub omega_max: f64,
    pub points_per_decade: usize,
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid { omega_min: 1e-3, omega_max: 1e3, points_per_decade: 200 }
    }
}

impl FrequencyGrid {
    pub fn points(&self) -> Vec<f64> {
        let lo = self.omega_min.log10();
        let hi = self.omega_max.log10();
        let n = ((hi - lo) * self.points_per_decade as f64).ceil() as usize;
        let mut pts: Vec<f64> = (0..=n)
            .map(|i| 10f64.powf(lo + (hi - lo) * i as f64 / n as f64))
            .collect();
        if let Some(last) = pts.last_mut() {
            *last = self.omega_max;
        }
        pts
    }

    fn validate(&self) -> Result<(), StabilityError> {
        if !(self.omega_min > 0.0 && self.omega_max > self.omega_min)
            || self.points_per_decade == 0
        {
            return Err(StabilityError::InvalidGrid);
        }
        Ok(())
    }
}

/// One sweep sample: response magnitude against the stability limit.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub omega: f64,
    pub t_mag: f64,
    pub limit: f64,
}

/// Verdict of [`check`]: `holds` iff no violating frequency band was found.
#[derive(Debug, Clone)]
pub struct StabilityVerdict {
    pub holds: bool,
    /// `(omega_low, omega_high)` ranges where the criterion fails, edges
    /// refined by bisection to 1e-4 relative.
    pub violating_bands: Vec<(f64, f64)>,
    /// Smallest `limit - |T|` over the grid; positive when the test holds.
    pub margin: f64,
    pub grid: FrequencyGrid,
    pub sweep: Vec<SweepPoint>,
}

#[derive(Debug, Error)]
pub enum StabilityError {
    #[error("the zero-delay closed loop is not stable; the delay test does not apply")]
    NominallyUnstable,
    #[error("ubd must be >= 0, got {0}")]
    NegativeUbd(f64),
    #[error("grid must satisfy 0 < omega_min < omega_max and points_per_decade > 0")]
    InvalidGrid,
    #[error(transparent)]
    Lti(#[from] LtiError),
}

/// Maximum delay bound the loop provably tolerates on the given grid.
#[derive(Debug, Clone, Copy)]
pub struct MaxTolerableDelay {
    pub value: f64,
    /// True when the binding frequency is the last grid point, i.e. the
    /// value is limited by the sweep range rather than the response.
    pub grid_limited: bool,
}

fn nominal_t(p: &RationalTf, c: &RationalTf) -> Result<RationalTf, StabilityError> {
    let t = complementary_sensitivity(p, c)?;
    if t.den.degree() >= 1 && !is_hurwitz(&t.den)? {
        return Err(StabilityError::NominallyUnstable);
    }
    Ok(t)
}

/// Runs the small-gain sweep for a delay bound `ubd` (same time unit as the
/// transfer functions). Equality at a grid point counts as a violation.
/// `ubd = 0` holds vacuously.
pub fn check(
    p: &RationalTf,
    c: &RationalTf,
    ubd: f64,
    grid: &FrequencyGrid,
) -> Result<StabilityVerdict, StabilityError> {
    grid.validate()?;
    if ubd < 0.0 {
        return Err(StabilityError::NegativeUbd(ubd));
    }
    let t = nominal_t(p, c)?;

    let omegas = grid.points();
    let mut sweep = Vec::with_capacity(omegas.len());
    let mut margin = f64::INFINITY;
    for &omega in &omegas {
        let t_mag = t.magnitude(omega)?;
        let limit = if ubd == 0.0 { f64::INFINITY } else { 1.0 / (ubd * omega) };
        margin = margin.min(limit - t_mag);
        sweep.push(SweepPoint { omega, t_mag, limit });
    }
    if ubd == 0.0 {
        return Ok(StabilityVerdict {
            holds: true,
            violating_bands: Vec::new(),
            margin,
            grid: grid.clone(),
            sweep,
        });
    }

    let violated = |omega: f64| -> Result<bool, StabilityError> {
        Ok(t.magnitude(omega)? >= 1.0 / (ubd * omega))
    };
    let refine = |mut ok: f64, mut bad: f64| -> Result<f64, StabilityError> {
        while (ok - bad).abs() / ok.min(bad) > 1e-4 {
            let mid = (ok * bad).sqrt();
            if violated(mid)? {
                bad = mid;
            } else {
                ok = mid;
            }
        }
        Ok(bad)
    };

    let mut bands = Vec::new();
    let mut open: Option<f64> = None;
    for i in 0..sweep.len() {
        let bad = sweep[i].t_mag >= sweep[i].limit;
        if bad && open.is_none() {
            let low = if i == 0 {
                sweep[i].omega
            } else {
                refine(sweep[i - 1].omega, sweep[i].omega)?
            };
            open = Some(low);
        }
        if !bad {
            if let Some(low) = open.take() {
                let high = refine(sweep[i].omega, sweep[i - 1].omega)?;
                bands.push((low, high));
            }
        }
    }
    if let Some(low) = open.take() {
        bands.push((low, grid.omega_max));
    }

    Ok(StabilityVerdict {
        holds: bands.is_empty(),
        violating_bands: bands,
        margin,
        grid: grid.clone(),
        sweep,
    })
}

/// Largest `ubd` for which [`check`] still holds, found by bisection to
/// 1e-6 relative. Requires a nominally stable loop.
pub fn max_tolerable_delay(
    p: &RationalTf,
    c: &RationalTf,
    grid: &FrequencyGrid,
) -> Result<MaxTolerableDelay, StabilityError> {
    grid.validate()?;
    let t = nominal_t(p, c)?;

    let omegas = grid.points();
    let mut sup = 0.0;
    let mut arg_idx = 0;
    for (i, &omega) in omegas.iter().enumerate() {
        let v = omega * t.magnitude(omega)?;
        if v > sup {
            sup = v;
            arg_idx = i;
        }
    }
    if sup == 0.0 {
        // |T| identically zero on the grid; any delay passes the sweep.
        return Ok(MaxTolerableDelay { value: f64::INFINITY, grid_limited: true });
    }
    let grid_limited = arg_idx + 1 == omegas.len();

    let mut lo = 0.0;
    let mut hi = 1.000001 / sup;
    debug_assert!(!check(p, c, hi, grid)?.holds);
    while hi - lo > 1e-6 * hi {
        let mid = 0.5 * (lo + hi);
        if check(p, c, mid, grid)?.holds {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxTolerableDelay { value: lo, grid_limited })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lti::{reference_controller, reference_plant, Polynomial, TimeUnit};
    use approx::assert_relative_eq;

    fn grid() -> FrequencyGrid {
        FrequencyGrid::default()
    }

    #[test]
    fn reference_loop_fails_at_per_path_bound() {
        let v = check(&reference_plant(), &reference_controller(), 3.5, &grid()).unwrap();
        assert!(!v.holds);
        assert_eq!(v.violating_bands.len(), 1);
        let (lo, hi) = v.violating_bands[0];
        // Frozen reference edges for this loop at ubd = 3.5 ms.
        assert_relative_eq!(lo, 0.2355, max_relative = 2e-3);
        assert_relative_eq!(hi, 1.2120, max_relative = 2e-3);
        assert!(v.margin < 0.0);
    }

    #[test]
    fn reference_loop_fails_at_round_trip_bound() {
        let v = check(&reference_plant(), &reference_controller(), 7.0, &grid()).unwrap();
        assert!(!v.holds);
        assert_eq!(v.violating_bands.len(), 1);
        let (lo, hi) = v.violating_bands[0];
        assert_relative_eq!(lo, 0.1338, max_relative = 2e-3);
        assert_relative_eq!(hi, 5.2905, max_relative = 2e-3);
    }

    #[test]
    fn zero_ubd_holds_vacuously() {
        let v = check(&reference_plant(), &reference_controller(), 0.0, &grid()).unwrap();
        assert!(v.holds);
        assert!(v.violating_bands.is_empty());
        assert!(v.margin.is_infinite());
    }

    #[test]
    fn tiny_ubd_holds() {
        let v = check(&reference_plant(), &reference_controller(), 1e-4, &grid()).unwrap();
        assert!(v.holds);
        assert!(v.margin > 0.0);
    }

    #[test]
    fn band_edges_are_sign_changes() {
        let p = reference_plant();
        let c = reference_controller();
        let ubd = 3.5;
        let t = complementary_sensitivity(&p, &c).unwrap();
        let v = check(&p, &c, ubd, &grid()).unwrap();
        let gap = |omega: f64| t.magnitude(omega).unwrap() - 1.0 / (ubd * omega);
        for (lo, hi) in &v.violating_bands {
            assert!(gap(lo * (1.0 - 1e-3)) < 0.0);
            assert!(gap(lo * (1.0 + 1e-3)) > 0.0);
            assert!(gap(hi * (1.0 - 1e-3)) > 0.0);
            assert!(gap(hi * (1.0 + 1e-3)) < 0.0);
        }
    }

    #[test]
    fn holds_is_monotone_in_ubd() {
        let p = reference_plant();
        let c = reference_controller();
        let mut failed = false;
        for ubd in [1e-3, 0.1, 0.5, 1.0, 1.6, 1.7, 3.5, 7.0, 50.0] {
            let holds = check(&p, &c, ubd, &grid()).unwrap().holds;
            if failed {
                assert!(!holds, "held again at ubd = {ubd} after failing earlier");
            }
            failed = !holds;
        }
    }

    #[test]
    fn denser_grid_never_unfinds_a_violation() {
        let p = reference_plant();
        let c = reference_controller();
        for ubd in [1.0, 1.7, 3.5] {
            let coarse = check(&p, &c, ubd, &grid()).unwrap();
            let dense = check(
                &p,
                &c,
                ubd,
                &FrequencyGrid { points_per_decade: 400, ..grid() },
            )
            .unwrap();
            if !coarse.holds {
                assert!(!dense.holds);
            }
        }
    }

    #[test]
    fn nominally_unstable_loop_is_rejected() {
        // P = 1/(s-1) with unity feedback and C = 0.5: closed-loop pole at +0.5.
        let p = RationalTf::new(
            Polynomial::new([1.0]),
            Polynomial::new([-1.0, 1.0]),
            TimeUnit::Milliseconds,
        )
        .unwrap();
        let c = RationalTf::constant(0.5, TimeUnit::Milliseconds);
        assert!(matches!(
            check(&p, &c, 1.0, &grid()),
            Err(StabilityError::NominallyUnstable)
        ));
        assert!(matches!(
            max_tolerable_delay(&p, &c, &grid()),
            Err(StabilityError::NominallyUnstable)
        ));
    }

    #[test]
    fn max_tolerable_delay_reference_value() {
        let p = reference_plant();
        let c = reference_controller();
        let mtd = max_tolerable_delay(&p, &c, &grid()).unwrap();
        // Frozen reference: 1/sup(omega*|T|) for this loop.
        assert_relative_eq!(mtd.value, 1.63531, max_relative = 1e-3);
        assert!(!mtd.grid_limited);
        assert!(mtd.value < 3.5);
        assert!(check(&p, &c, mtd.value, &grid()).unwrap().holds);
        assert!(!check(&p, &c, mtd.value * 1.01, &grid()).unwrap().holds);
    }

    #[test]
    fn unit_mismatch_propagates() {
        let p = reference_plant();
        let c = RationalTf::constant(1.0, TimeUnit::Seconds);
        assert!(matches!(
            check(&p, &c, 1.0, &grid()),
            Err(StabilityError::Lti(LtiError::UnitMismatch { .. }))
        ));
    }
}
