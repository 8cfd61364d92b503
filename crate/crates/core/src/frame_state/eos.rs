//! Linear barotropic equation of state `mu = p / w`.

use crate::error::{Error, Result};

/// Linear equation of state `p = w mu`.
///
/// `p_ref` fixes the integration constant of the enthalpy potential
/// `F = int dp / (mu + p)` through `F(p_ref) = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eos {
    pub w: f64,
    pub p_ref: f64,
}

/// Everything the evolution equations need from the equation of state at one density.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EosPoint {
    pub p: f64,
    /// `d mu / d p`, equal to `1 / w` for the linear family.
    pub mu_prime: f64,
    pub f: f64,
    pub df_dp: f64,
}

impl Eos {
    /// Accepts any `w > 0`. Values with `w > 1` are representable so that the
    /// hyperbolicity checks can refuse them; see [`Eos::is_causal`].
    pub fn new(w: f64, p_ref: f64) -> Result<Self> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidArgument(format!("eos.w must be positive, got {w}")));
        }
        if !(p_ref > 0.0 && p_ref.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "eos.p_ref must be positive, got {p_ref}"
            )));
        }
        Ok(Self { w, p_ref })
    }

    pub fn radiation() -> Self {
        Self { w: 1.0 / 3.0, p_ref: 1.0 }
    }

    pub fn mu_prime(&self) -> f64 {
        1.0 / self.w
    }

    /// Sound speed squared `dp/dmu`.
    pub fn sound_speed_sq(&self) -> f64 {
        self.w
    }

    /// `mu' >= 1`, i.e. sound no faster than light.
    pub fn is_causal(&self) -> bool {
        self.w <= 1.0
    }

    pub fn pressure(&self, mu: f64) -> f64 {
        self.w * mu
    }

    pub fn eval(&self, mu: f64) -> Result<EosPoint> {
        if !(mu > 0.0) {
            return Err(Error::NonPositiveDensity { index: 0, mu });
        }
        let p = self.w * mu;
        Ok(EosPoint {
            p,
            mu_prime: 1.0 / self.w,
            f: self.w / (1.0 + self.w) * (p / self.p_ref).ln(),
            df_dp: 1.0 / (mu + p),
        })
    }
}

impl Default for Eos {
    fn default() -> Self {
        Self::radiation()
    }
}

/// Free-function form of [`Eos::eval`].
pub fn eos_eval(eos: &Eos, mu: f64) -> Result<EosPoint> {
    eos.eval(mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radiation_normalization() {
        let eos = Eos::new(1.0 / 3.0, 1.0).unwrap();
        let e = eos.eval(3.0).unwrap();
        assert!((e.p - 1.0).abs() < 1e-15);
        assert!((e.mu_prime - 3.0).abs() < 1e-15);
        assert_eq!(e.f, 0.0);
    }

    #[test]
    fn stiff_fluid() {
        let eos = Eos::new(1.0, 1.0).unwrap();
        let e = eos.eval(2.0).unwrap();
        assert_eq!(e.p, 2.0);
        assert_eq!(e.mu_prime, 1.0);
        assert!(eos.is_causal());
    }

    #[test]
    fn potential_matches_quadrature() {
        // F(p) = int_{p_ref}^{p} dq / (q/w + q), Simpson's rule oracle.
        let eos = Eos::new(1.0 / 3.0, 1.0).unwrap();
        let mu = 3.0 * std::f64::consts::E;
        let e = eos.eval(mu).unwrap();
        let (a, b) = (1.0, eos.pressure(mu));
        let n = 2000;
        let h = (b - a) / n as f64;
        let g = |q: f64| 1.0 / (q / eos.w + q);
        let mut s = g(a) + g(b);
        for i in 1..n {
            let q = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 * g(q) } else { 2.0 * g(q) };
        }
        let quad = s * h / 3.0;
        assert!((quad - 0.25).abs() < 1e-12);
        assert!((e.f - 0.25).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_positive_density() {
        let eos = Eos::radiation();
        assert!(matches!(eos.eval(0.0), Err(Error::NonPositiveDensity { .. })));
        assert!(matches!(eos.eval(-1.0), Err(Error::NonPositiveDensity { .. })));
    }

    #[test]
    fn superluminal_is_flagged() {
        let eos = Eos::new(1.5, 1.0).unwrap();
        assert!(!eos.is_causal());
        assert!(eos.mu_prime() < 1.0);
    }
}
