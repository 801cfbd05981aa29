use crate::error::{Error, Result};
use crate::scalar::Real;

/// Link and network parameters shared by both analyses.
///
/// All powers are linear. `p_star` is only needed by the connectivity
/// analysis; `theta_star` and `noise` only by the SINR analysis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T> {
    /// Spatial density of interferers (nodes per unit area).
    pub lambda: T,
    /// Amplitude loss exponent; received power decays as R^{-2b}.
    pub b: T,
    /// Probe transmit power.
    pub p0: T,
    /// Interferer transmit power.
    pub p1: T,
    /// Probe link distance.
    pub r0: T,
    /// Audibility threshold.
    pub p_star: Option<T>,
    /// SINR threshold.
    pub theta_star: Option<T>,
    /// Noise power.
    pub noise: Option<T>,
}

impl<T: Real> Scenario<T> {
    pub fn new(lambda: T, b: T, p0: T, p1: T, r0: T) -> Self {
        Self {
            lambda,
            b,
            p0,
            p1,
            r0,
            p_star: None,
            theta_star: None,
            noise: None,
        }
    }

    pub fn with_audibility(mut self, p_star: T) -> Self {
        self.p_star = Some(p_star);
        self
    }

    pub fn with_sinr(mut self, theta_star: T, noise: T) -> Self {
        self.theta_star = Some(theta_star);
        self.noise = Some(noise);
        self
    }

    /// Checks the fields every analysis relies on.
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, v: T, need: &str| {
            Err(Error::domain(
                "scenario",
                format!("{field} must be {need}, got {}", v.as_f64()),
            ))
        };
        if !(self.lambda >= T::zero()) || self.lambda.is_infinite() {
            return bad("lambda", self.lambda, "finite and nonnegative");
        }
        if !(self.b > T::zero()) {
            return bad("b", self.b, "positive");
        }
        if !(self.p0 > T::zero()) {
            return bad("p0", self.p0, "positive");
        }
        if !(self.p1 > T::zero()) {
            return bad("p1", self.p1, "positive");
        }
        if !(self.r0 > T::zero()) {
            return bad("r0", self.r0, "positive");
        }
        Ok(())
    }

    /// Audibility threshold, validated.
    pub fn audibility_threshold(&self) -> Result<T> {
        let p = self.p_star.ok_or(Error::MissingParameter("p_star"))?;
        if !(p > T::zero()) {
            return Err(Error::domain(
                "scenario",
                format!("p_star must be positive, got {}", p.as_f64()),
            ));
        }
        Ok(p)
    }

    /// `(theta_star, noise)`, validated, together with the b > 1 requirement of
    /// the stable interference law.
    pub fn sinr_parameters(&self) -> Result<(T, T)> {
        self.require_stable_exponent()?;
        let theta = self
            .theta_star
            .ok_or(Error::MissingParameter("theta_star"))?;
        let noise = self.noise.ok_or(Error::MissingParameter("noise"))?;
        if !(theta > T::zero()) {
            return Err(Error::domain(
                "scenario",
                format!("theta_star must be positive, got {}", theta.as_f64()),
            ));
        }
        if !(noise >= T::zero()) {
            return Err(Error::domain(
                "scenario",
                format!("noise must be nonnegative, got {}", noise.as_f64()),
            ));
        }
        Ok((theta, noise))
    }

    /// The aggregate interference is stable with alpha = 1/b only when b > 1.
    pub fn require_stable_exponent(&self) -> Result<()> {
        if !(self.b > T::one()) {
            return Err(Error::domain(
                "sinr",
                format!(
                    "b must exceed 1 for the SINR model (interference is stable with alpha = 1/b < 1), got b = {}",
                    self.b.as_f64()
                ),
            ));
        }
        Ok(())
    }

    /// r0^{2b}, the deterministic probe path loss.
    pub fn probe_path_loss(&self) -> T {
        self.r0.pow_real(T::lit(2.0) * self.b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_catches_bad_fields() {
        let ok = Scenario::new(1.0, 2.0, 10.0, 10.0, 1.0);
        assert!(ok.validate().is_ok());
        assert!(Scenario { lambda: -1.0, ..ok }.validate().is_err());
        assert!(Scenario { p0: 0.0, ..ok }.validate().is_err());
        assert!(Scenario { r0: f64::NAN, ..ok }.validate().is_err());
        assert_eq!(
            ok.audibility_threshold(),
            Err(Error::MissingParameter("p_star"))
        );
        assert!(ok.with_audibility(0.0).audibility_threshold().is_err());
    }

    #[test]
    fn sinr_requires_b_above_one() {
        let s = Scenario::new(1.0, 1.0, 10.0, 10.0, 1.0).with_sinr(1.0, 1.0);
        let err = s.sinr_parameters().unwrap_err();
        assert!(err.to_string().contains("b must exceed 1"), "{err}");
        let s = Scenario { b: 2.0, ..s };
        assert_eq!(s.sinr_parameters().unwrap(), (1.0, 1.0));
        assert!(Scenario {
            noise: Some(-1.0),
            ..s
        }
        .sinr_parameters()
        .is_err());
    }
}
