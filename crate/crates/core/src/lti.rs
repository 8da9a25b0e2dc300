//! Rational transfer-function arithmetic for the control-side analysis:
//! polynomial algebra, frequency response, the Routh-Hurwitz stability
//! test, the first-order delay approximation and its robust weight, and
//! zero-order-hold discretization for simulation.
//!
//! Every transfer function carries its time unit. The plant of interest is
//! stated with time in milliseconds while network bounds come out in
//! seconds, and silently mixing the two is the dominant failure mode, so
//! mixed-unit operations are errors rather than conversions.

use nalgebra::{DMatrix, DVector, RowDVector};
use num_complex::Complex64;
use std::fmt;
use thiserror::Error;

/// Time base of a transfer function's Laplace variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    Seconds,
    Milliseconds,
}

impl TimeUnit {
    pub fn parse(s: &str) -> Option<TimeUnit> {
        match s {
            "s" | "sec" | "seconds" => Some(TimeUnit::Seconds),
            "ms" | "millis" | "milliseconds" => Some(TimeUnit::Milliseconds),
            _ => None,
        }
    }

    /// Factor converting a duration in seconds into this unit.
    pub fn per_second(&self) -> f64 {
        match self {
            TimeUnit::Seconds => 1.0,
            TimeUnit::Milliseconds => 1e3,
        }
    }
}

impl fmt::Display for TimeUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TimeUnit::Seconds => "s",
            TimeUnit::Milliseconds => "ms",
        })
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum LtiError {
    #[error("zero polynomial where a nonzero one is required")]
    ZeroPolynomial,
    #[error("polynomial must have degree >= 1")]
    DegreeTooLow,
    #[error("denominator magnitude below 1e-300 at omega = {omega}: pole on the axis")]
    PoleOnAxis { omega: f64 },
    #[error("improper transfer function: numerator degree {num} exceeds denominator degree {den}")]
    Improper { num: usize, den: usize },
    #[error("time units differ: {left} vs {right}")]
    UnitMismatch { left: TimeUnit, right: TimeUnit },
    #[error("{0}")]
    Invalid(String),
}

/// Real polynomial stored by ascending powers of the Laplace variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds from ascending coefficients, trimming trailing zeros so the
    /// leading coefficient is nonzero (the zero polynomial stays `[0]`).
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        let mut coeffs = coeffs.into();
        while coeffs.len() > 1 && coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Polynomial { coeffs }
    }

    pub fn zero() -> Self {
        Polynomial { coeffs: vec![0.0] }
    }

    pub fn one() -> Self {
        Polynomial { coeffs: vec![1.0] }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn leading(&self) -> f64 {
        *self.coeffs.last().unwrap()
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, s: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * s + c;
        }
        acc
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i] += c;
        }
        for (i, c) in other.coeffs.iter().enumerate() {
            out[i] += c;
        }
        Polynomial::new(out)
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        if self.is_zero() || other.is_zero() {
            return Polynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Polynomial::new(out)
    }

    pub fn scale(&self, k: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * k).collect::<Vec<_>>())
    }

    /// Roots via the companion matrix. Used by the explicit `reduce` and by
    /// configuration sanity checks; the stability primitive itself is the
    /// Routh test.
    pub fn roots(&self) -> Vec<Complex64> {
        let n = self.degree();
        if n == 0 {
            return Vec::new();
        }
        let lead = self.leading();
        let mut m = DMatrix::<f64>::zeros(n, n);
        for i in 1..n {
            m[(i, i - 1)] = 1.0;
        }
        for i in 0..n {
            m[(i, n - 1)] = -self.coeffs[i] / lead;
        }
        m.complex_eigenvalues().iter().map(|c| Complex64::new(c.re, c.im)).collect()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if *c == 0.0 && self.degree() > 0 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            match i {
                0 => write!(f, "{c}")?,
                1 => write!(f, "{c}*s")?,
                _ => write!(f, "{c}*s^{i}")?,
            }
            first = false;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Ratio of two real polynomials in the Laplace variable, tagged with its
/// time unit. No pole-zero cancellation ever happens implicitly; call
/// [`RationalTf::reduce`] for an explicit cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTf {
    pub num: Polynomial,
    pub den: Polynomial,
    pub unit: TimeUnit,
}

impl RationalTf {
    pub fn new(num: Polynomial, den: Polynomial, unit: TimeUnit) -> Result<Self, LtiError> {
        if den.is_zero() {
            return Err(LtiError::ZeroPolynomial);
        }
        Ok(RationalTf { num, den, unit })
    }

    pub fn constant(k: f64, unit: TimeUnit) -> Self {
        RationalTf { num: Polynomial::new([k]), den: Polynomial::one(), unit }
    }

    fn check_unit(&self, other: &RationalTf) -> Result<(), LtiError> {
        if self.unit != other.unit {
            return Err(LtiError::UnitMismatch { left: self.unit, right: other.unit });
        }
        Ok(())
    }

    /// Frequency response at `omega` rad per time unit.
    pub fn evaluate(&self, omega: f64) -> Result<Complex64, LtiError> {
        let s = Complex64::new(0.0, omega);
        let den = self.den.eval(s);
        if den.norm() < 1e-300 {
            return Err(LtiError::PoleOnAxis { omega });
        }
        Ok(self.num.eval(s) / den)
    }

    pub fn magnitude(&self, omega: f64) -> Result<f64, LtiError> {
        Ok(self.evaluate(omega)?.norm())
    }

    /// Series interconnection `self * other`.
    pub fn series(&self, other: &RationalTf) -> Result<RationalTf, LtiError> {
        self.check_unit(other)?;
        RationalTf::new(self.num.mul(&other.num), self.den.mul(&other.den), self.unit)
    }

    /// Explicit pole-zero cancellation: roots of numerator and denominator
    /// matched within `tol` (relative to their magnitudes) are removed.
    pub fn reduce(&self, tol: f64) -> RationalTf {
        if self.num.is_zero() {
            return self.clone();
        }
        let mut zeros = self.num.roots();
        let mut poles = self.den.roots();
        let mut cancelled = false;
        let mut zi = 0;
        while zi < zeros.len() {
            let z = zeros[zi];
            let matched = poles
                .iter()
                .position(|p| (z - p).norm() <= tol * (1.0 + z.norm().max(p.norm())));
            if let Some(pi) = matched {
                zeros.remove(zi);
                poles.remove(pi);
                cancelled = true;
            } else {
                zi += 1;
            }
        }
        if !cancelled {
            return self.clone();
        }
        let rebuild = |roots: &[Complex64], lead: f64| {
            let mut acc = vec![Complex64::new(1.0, 0.0)];
            for r in roots {
                let mut next = vec![Complex64::new(0.0, 0.0); acc.len() + 1];
                for (i, a) in acc.iter().enumerate() {
                    next[i] -= a * r;
                    next[i + 1] += a;
                }
                acc = next;
            }
            Polynomial::new(acc.iter().map(|c| c.re * lead).collect::<Vec<_>>())
        };
        RationalTf {
            num: rebuild(&zeros, self.num.leading()),
            den: rebuild(&poles, self.den.leading()),
            unit: self.unit,
        }
    }
}

/// Closed-loop transfer from setpoint to output for a unity feedback loop:
/// `T = P*C / (1 + P*C)`, formed symbolically without cancellation.
pub fn complementary_sensitivity(p: &RationalTf, c: &RationalTf) -> Result<RationalTf, LtiError> {
    if p.unit != c.unit {
        return Err(LtiError::UnitMismatch { left: p.unit, right: c.unit });
    }
    let num = p.num.mul(&c.num);
    let den = p.den.mul(&c.den).add(&num);
    RationalTf::new(num, den, p.unit)
}

/// Routh-Hurwitz test: true iff every root lies strictly in the open left
/// half-plane. Zero pivots are replaced by 1e-12; an all-zero row (roots
/// mirrored across the axis) fails the test.
pub fn is_hurwitz(p: &Polynomial) -> Result<bool, LtiError> {
    if p.is_zero() {
        return Err(LtiError::ZeroPolynomial);
    }
    if p.degree() < 1 {
        return Err(LtiError::DegreeTooLow);
    }
    let mut desc: Vec<f64> = p.coeffs().iter().rev().copied().collect();
    if desc[0] < 0.0 {
        for c in &mut desc {
            *c = -*c;
        }
    }
    // Necessary condition: all coefficients strictly positive.
    if desc.iter().any(|&c| c <= 0.0) {
        return Ok(false);
    }

    const EPS: f64 = 1e-12;
    let width = desc.len().div_ceil(2);
    let mut row_a: Vec<f64> = (0..width).map(|j| desc.get(2 * j).copied().unwrap_or(0.0)).collect();
    let mut row_b: Vec<f64> =
        (0..width).map(|j| desc.get(2 * j + 1).copied().unwrap_or(0.0)).collect();
    let mut first_column = vec![row_a[0]];
    for _ in 0..p.degree() {
        if row_b.iter().all(|&c| c == 0.0) {
            return Ok(false);
        }
        if row_b[0] == 0.0 {
            row_b[0] = EPS;
        }
        let pivot = row_b[0];
        first_column.push(pivot);
        let mut next = vec![0.0; width];
        for j in 0..width - 1 {
            next[j] = (pivot * row_a[j + 1] - row_a[0] * row_b[j + 1]) / pivot;
        }
        row_a = std::mem::take(&mut row_b);
        row_b = next;
    }
    Ok(first_column.iter().all(|&c| c > 0.0))
}

/// First-order rational approximation of a pure delay `exp(-tau s)`:
/// `(1 - (tau/2) s) / (1 + (tau/2) s)`, an all-pass.
pub fn delay_rational_approx(tau: f64, unit: TimeUnit) -> Result<RationalTf, LtiError> {
    if !(tau >= 0.0) {
        return Err(LtiError::Invalid(format!("delay must be >= 0, got {tau}")));
    }
    RationalTf::new(
        Polynomial::new([1.0, -tau / 2.0]),
        Polynomial::new([1.0, tau / 2.0]),
        unit,
    )
}

/// High-frequency gain of the robust delay weight.
pub const ROBUST_WEIGHT_HF_GAIN: f64 = 3.465;

/// First-order weight covering uncertain delays up to `ubd`:
/// `w_h(s) = ubd*s / (1 + ubd*s/3.465)`. Zero at DC, magnitude monotone
/// increasing towards exactly 3.465.
pub fn robust_weight(ubd: f64, unit: TimeUnit) -> Result<RationalTf, LtiError> {
    if !(ubd > 0.0) {
        return Err(LtiError::Invalid(format!("ubd must be > 0, got {ubd}")));
    }
    RationalTf::new(
        Polynomial::new([0.0, ubd]),
        Polynomial::new([1.0, ubd / ROBUST_WEIGHT_HF_GAIN]),
        unit,
    )
}

/// Continuous single-input single-output state-space realisation.
#[derive(Debug, Clone)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
}

impl StateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }
}

/// Discrete-time counterpart produced by [`discretize`].
#[derive(Debug, Clone)]
pub struct DiscreteStateSpace {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
    pub c: RowDVector<f64>,
    pub d: f64,
    pub step: f64,
}

impl DiscreteStateSpace {
    pub fn order(&self) -> usize {
        self.a.nrows()
    }

    pub fn output(&self, x: &DVector<f64>, u: f64) -> f64 {
        (&self.c * x)[0] + self.d * u
    }

    pub fn advance(&self, x: &mut DVector<f64>, u: f64) {
        *x = &self.a * &*x + &self.b * u;
    }
}

/// Controllable canonical realisation of a proper transfer function.
pub fn to_state_space(tf: &RationalTf) -> Result<StateSpace, LtiError> {
    if tf.den.is_zero() {
        return Err(LtiError::ZeroPolynomial);
    }
    if tf.num.degree() > tf.den.degree() && !tf.num.is_zero() {
        return Err(LtiError::Improper { num: tf.num.degree(), den: tf.den.degree() });
    }
    let n = tf.den.degree();
    let lead = tf.den.leading();
    let den: Vec<f64> = tf.den.coeffs().iter().map(|c| c / lead).collect();
    let mut num = vec![0.0; n + 1];
    for (i, c) in tf.num.coeffs().iter().enumerate() {
        num[i] = c / lead;
    }
    let d = num[n];
    if n == 0 {
        return Ok(StateSpace {
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            c: RowDVector::zeros(0),
            d,
        });
    }
    let mut a = DMatrix::zeros(n, n);
    for i in 0..n - 1 {
        a[(i, i + 1)] = 1.0;
    }
    for j in 0..n {
        a[(n - 1, j)] = -den[j];
    }
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let mut c = RowDVector::zeros(n);
    for j in 0..n {
        c[j] = num[j] - d * den[j];
    }
    Ok(StateSpace { a, b, c, d })
}

/// Matrix exponential by scaling and squaring with a 13-term series; the
/// scaled norm is kept at or below 1/2 so the truncation stays under 1e-12.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = m
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = m / 2f64.powi(squarings as i32);
    let mut acc = DMatrix::<f64>::identity(n, n);
    let mut term = DMatrix::<f64>::identity(n, n);
    for k in 1..=13 {
        term = &term * &scaled / k as f64;
        acc += &term;
    }
    for _ in 0..squarings {
        acc = &acc * &acc;
    }
    acc
}

/// Zero-order-hold discretization via the exponential of the augmented
/// `[[A, B], [0, 0]] * h` matrix.
pub fn discretize(ss: &StateSpace, step: f64) -> Result<DiscreteStateSpace, LtiError> {
    if !(step > 0.0) {
        return Err(LtiError::Invalid(format!("step must be > 0, got {step}")));
    }
    let n = ss.order();
    if n == 0 {
        return Ok(DiscreteStateSpace {
            a: DMatrix::zeros(0, 0),
            b: DVector::zeros(0),
            c: ss.c.clone(),
            d: ss.d,
            step,
        });
    }
    let mut aug = DMatrix::zeros(n + 1, n + 1);
    aug.view_mut((0, 0), (n, n)).copy_from(&(&ss.a * step));
    aug.view_mut((0, n), (n, 1)).copy_from(&(&ss.b * step));
    let e = expm(&aug);
    Ok(DiscreteStateSpace {
        a: e.view((0, 0), (n, n)).into_owned(),
        b: DVector::from_iterator(n, (0..n).map(|i| e[(i, n)])),
        c: ss.c.clone(),
        d: ss.d,
        step,
    })
}

/// The plant used throughout the reference scenario, time in milliseconds:
/// `2 / ((s + 5)(s + 0.2))`.
pub fn reference_plant() -> RationalTf {
    RationalTf::new(
        Polynomial::new([2.0]),
        Polynomial::new([1.0, 5.2, 1.0]),
        TimeUnit::Milliseconds,
    )
    .unwrap()
}

/// The matching PI controller `(0.5 s + 0.5) / s`.
pub fn reference_controller() -> RationalTf {
    RationalTf::new(
        Polynomial::new([0.5, 0.5]),
        Polynomial::new([0.0, 1.0]),
        TimeUnit::Milliseconds,
    )
    .unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn evaluate_dc_gain() {
        let p = reference_plant();
        let g = p.evaluate(0.0).unwrap();
        assert_relative_eq!(g.re, 2.0, max_relative = 1e-12);
        assert_relative_eq!(g.im, 0.0);
        let unity = RationalTf::constant(1.0, TimeUnit::Milliseconds);
        assert_eq!(unity.evaluate(12.3).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn integrator_pole_at_origin() {
        let c = reference_controller();
        assert_eq!(c.evaluate(0.0), Err(LtiError::PoleOnAxis { omega: 0.0 }));
        // Magnitude blows up as omega -> 0.
        assert!(c.magnitude(1e-9).unwrap() > 1e8);
    }

    #[test]
    fn closed_loop_denominator() {
        let t = complementary_sensitivity(&reference_plant(), &reference_controller()).unwrap();
        assert_eq!(t.den.coeffs(), &[1.0, 2.0, 5.2, 1.0]);
        assert_eq!(t.num.coeffs(), &[1.0, 1.0]);

        let one = RationalTf::constant(1.0, TimeUnit::Seconds);
        let t = complementary_sensitivity(&one, &one).unwrap();
        assert_relative_eq!(t.evaluate(3.0).unwrap().re, 0.5);

        let zero = RationalTf::constant(0.0, TimeUnit::Seconds);
        let t = complementary_sensitivity(&one, &zero).unwrap();
        assert_eq!(t.evaluate(1.0).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn unit_mismatch_is_an_error() {
        let p = reference_plant();
        let c = RationalTf::constant(1.0, TimeUnit::Seconds);
        assert!(matches!(p.series(&c), Err(LtiError::UnitMismatch { .. })));
        assert!(matches!(
            complementary_sensitivity(&p, &c),
            Err(LtiError::UnitMismatch { .. })
        ));
    }

    #[test]
    fn series_multiplies_responses() {
        let p = reference_plant();
        let c = reference_controller();
        let pc = p.series(&c).unwrap();
        for omega in [0.1, 0.5, 2.0, 40.0] {
            let direct = pc.evaluate(omega).unwrap();
            let product = p.evaluate(omega).unwrap() * c.evaluate(omega).unwrap();
            assert_relative_eq!(direct.re, product.re, max_relative = 1e-9);
            assert_relative_eq!(direct.im, product.im, max_relative = 1e-9);
        }
    }

    #[test]
    fn hurwitz_examples() {
        assert!(is_hurwitz(&Polynomial::new([1.0, 2.0, 5.2, 1.0])).unwrap());
        assert!(is_hurwitz(&Polynomial::new([1.0, 1.0, 1.0])).unwrap());
        // Missing quadratic term.
        assert!(!is_hurwitz(&Polynomial::new([1.0, 1.0, 0.0, 1.0])).unwrap());
        // Right-half-plane pair: s^2 - s + 1.
        assert!(!is_hurwitz(&Polynomial::new([1.0, -1.0, 1.0])).unwrap());
        // Imaginary-axis pair: s^2 + 1.
        assert!(!is_hurwitz(&Polynomial::new([1.0, 0.0, 1.0])).unwrap());
        assert_eq!(is_hurwitz(&Polynomial::zero()), Err(LtiError::ZeroPolynomial));
        assert_eq!(is_hurwitz(&Polynomial::new([3.0])), Err(LtiError::DegreeTooLow));
        // Negated stable polynomial is still stable.
        assert!(is_hurwitz(&Polynomial::new([-1.0, -2.0, -1.0])).unwrap());
    }

    #[test]
    fn delay_approximation_shape() {
        let d = delay_rational_approx(3.0, TimeUnit::Milliseconds).unwrap();
        assert_relative_eq!(d.evaluate(0.0).unwrap().re, 1.0);
        // High-frequency limit is -1; magnitude one everywhere (all-pass).
        let hf = d.evaluate(1e9).unwrap();
        assert_relative_eq!(hf.re, -1.0, max_relative = 1e-6);
        for omega in [1e-3, 0.1, 1.0, 10.0, 1e4] {
            assert_relative_eq!(d.magnitude(omega).unwrap(), 1.0, max_relative = 1e-9);
        }
        let id = delay_rational_approx(0.0, TimeUnit::Seconds).unwrap();
        assert_eq!(id.evaluate(7.0).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn robust_weight_shape() {
        let w = robust_weight(3.5, TimeUnit::Milliseconds).unwrap();
        assert_eq!(w.evaluate(0.0).unwrap(), Complex64::new(0.0, 0.0));
        assert_relative_eq!(w.magnitude(1e9).unwrap(), 3.465, max_relative = 1e-6);
        assert_relative_eq!(w.magnitude(1.0).unwrap(), 2.46240, max_relative = 1e-4);
        // Monotone increasing magnitude.
        let mut prev = 0.0;
        for i in 0..60 {
            let omega = 10f64.powf(-3.0 + i as f64 * 0.2);
            let m = w.magnitude(omega).unwrap();
            assert!(m >= prev);
            prev = m;
        }
        assert!(robust_weight(0.0, TimeUnit::Seconds).is_err());
    }

    #[test]
    fn state_space_first_order_pole() {
        let tf = RationalTf::new(
            Polynomial::new([1.0]),
            Polynomial::new([1.0, 1.0]),
            TimeUnit::Seconds,
        )
        .unwrap();
        let ss = to_state_space(&tf).unwrap();
        for h in [0.1, 0.01, 1.0] {
            let d = discretize(&ss, h).unwrap();
            assert_relative_eq!(d.a[(0, 0)], (-h).exp(), max_relative = 1e-12);
        }
    }

    #[test]
    fn state_space_constant_gain() {
        let tf = RationalTf::constant(4.5, TimeUnit::Seconds);
        let ss = to_state_space(&tf).unwrap();
        assert_eq!(ss.order(), 0);
        assert_eq!(ss.d, 4.5);
        let d = discretize(&ss, 0.1).unwrap();
        let x = DVector::zeros(0);
        assert_eq!(d.output(&x, 2.0), 9.0);
    }

    #[test]
    fn improper_is_rejected() {
        let tf = RationalTf::new(
            Polynomial::new([0.0, 0.0, 1.0]),
            Polynomial::new([1.0, 1.0]),
            TimeUnit::Seconds,
        )
        .unwrap();
        assert!(matches!(to_state_space(&tf), Err(LtiError::Improper { .. })));
    }

    #[test]
    fn reference_plant_discrete_poles() {
        let ss = to_state_space(&reference_plant()).unwrap();
        let d = discretize(&ss, 0.01).unwrap();
        let mut eigs: Vec<f64> = d.a.complex_eigenvalues().iter().map(|c| c.re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut expected = [(-5.0_f64 * 0.01).exp(), (-0.2_f64 * 0.01).exp()];
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (e, x) in eigs.iter().zip(expected.iter()) {
            assert_relative_eq!(e, x, max_relative = 1e-10);
        }
    }

    #[test]
    fn discrete_step_response_matches_exponential() {
        let tf = RationalTf::new(
            Polynomial::new([1.0]),
            Polynomial::new([1.0, 1.0]),
            TimeUnit::Seconds,
        )
        .unwrap();
        let d = discretize(&to_state_space(&tf).unwrap(), 0.05).unwrap();
        let mut x = DVector::zeros(1);
        for k in 0..200 {
            let t = k as f64 * 0.05;
            let y = d.output(&x, 1.0);
            assert_relative_eq!(y, 1.0 - (-t).exp(), epsilon = 1e-9);
            d.advance(&mut x, 1.0);
        }
    }

    #[test]
    fn reduce_cancels_matched_pairs_only_on_request() {
        // (s+1)(s+2) / ((s+1)(s+3))
        let num = Polynomial::new([1.0, 1.0]).mul(&Polynomial::new([2.0, 1.0]));
        let den = Polynomial::new([1.0, 1.0]).mul(&Polynomial::new([3.0, 1.0]));
        let tf = RationalTf::new(num, den, TimeUnit::Seconds).unwrap();
        assert_eq!(tf.num.degree(), 2);
        let red = tf.reduce(1e-9);
        assert_eq!(red.num.degree(), 1);
        assert_eq!(red.den.degree(), 1);
        for omega in [0.0, 0.7, 3.0] {
            let a = tf.evaluate(omega).unwrap();
            let b = red.evaluate(omega).unwrap();
            assert_relative_eq!(a.re, b.re, max_relative = 1e-9);
            assert_relative_eq!(a.im, b.im, max_relative = 1e-9);
        }
    }
}
