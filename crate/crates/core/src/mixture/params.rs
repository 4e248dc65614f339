use std::fmt;

use crate::error::{Error, Result};

/// Species masses, reference densities and the interchange parameters
/// `delta` (momentum), `omega` (temperature) and `gamma` (kinetic-to-thermal
/// transfer).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureParams {
    pub m1: f64,
    pub m2: f64,
    pub n10: f64,
    pub n20: f64,
    pub delta: f64,
    pub omega: f64,
    pub gamma: f64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        Self {
            m1: 1.0,
            m2: 1.0,
            n10: 1.0,
            n20: 1.0,
            delta: 0.5,
            omega: 0.5,
            gamma: 0.0,
        }
    }
}

/// Which parameter region counts as admissible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime {
    /// `delta < 1`, `omega < 1`: the region where the model is posed.
    #[default]
    Strict,
    /// Also admits `delta = 1` and/or `omega = 1`, for kernel-structure studies.
    KernelStudy,
}

/// One of the admissibility constraint blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constraint {
    Masses,
    Densities,
    Delta,
    Omega,
    Gamma,
}

impl Constraint {
    /// The constraint written out as an inequality.
    pub fn statement(self) -> &'static str {
        match self {
            Constraint::Masses => "m1 >= m2 > 0",
            Constraint::Densities => "n10 > 0 and n20 > 0",
            Constraint::Delta => "(m1/m2 - 1)/(1 + m1/m2) <= delta < 1",
            Constraint::Omega => "0 <= omega < 1",
            Constraint::Gamma => "0 <= gamma <= (m1/3)(1 - delta)[(1 + m1/m2) delta + 1 - m1/m2]",
        }
    }

    /// Config keys involved in the constraint.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Constraint::Masses => &["m1", "m2"],
            Constraint::Densities => &["n10", "n20"],
            Constraint::Delta => &["delta"],
            Constraint::Omega => &["omega"],
            Constraint::Gamma => &["gamma"],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: Constraint,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (constraint: {})", self.message, self.constraint.statement())
    }
}

/// Admissibility verdict with the list of violated constraints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Admissibility {
    pub violations: Vec<Violation>,
}

impl Admissibility {
    pub fn is_admissible(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violates(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

impl fmt::Display for Admissibility {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("admissible");
        }
        let parts: Vec<String> = self.violations.iter().map(|v| v.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

impl MixtureParams {
    /// Mass ratio `r = m1 / m2`.
    pub fn mass_ratio(&self) -> f64 {
        self.m1 / self.m2
    }

    pub fn mass(&self, species: usize) -> f64 {
        if species == 0 {
            self.m1
        } else {
            self.m2
        }
    }

    pub fn n0(&self, species: usize) -> f64 {
        if species == 0 {
            self.n10
        } else {
            self.n20
        }
    }

    pub fn total_density(&self) -> f64 {
        self.n10 + self.n20
    }

    /// Smallest admissible `delta`: `(r - 1) / (1 + r)`.
    pub fn delta_lower_bound(&self) -> f64 {
        let r = self.mass_ratio();
        (r - 1.0) / (1.0 + r)
    }

    /// Largest admissible `gamma` for the current `delta`.
    pub fn gamma_upper_bound(&self) -> f64 {
        let r = self.mass_ratio();
        let d = self.delta;
        self.m1 / 3.0 * (1.0 - d) * ((1.0 + r) * d + 1.0 - r)
    }

    /// Returns a copy with `delta` and `omega` replaced.
    pub fn with_exchange(&self, delta: f64, omega: f64) -> Self {
        Self { delta, omega, ..*self }
    }

    pub fn validate(&self) -> Admissibility {
        validate_params_in(self, Regime::Strict)
    }

    /// `Ok` if admissible in `regime`, otherwise an [`Error::Inadmissible`]
    /// listing every violated constraint.
    pub fn check(&self, regime: Regime) -> Result<()> {
        let verdict = validate_params_in(self, regime);
        if verdict.is_admissible() {
            Ok(())
        } else {
            Err(Error::Inadmissible(verdict.to_string()))
        }
    }
}

/// Checks the strict admissibility region.
pub fn validate_params(p: &MixtureParams) -> Admissibility {
    validate_params_in(p, Regime::Strict)
}

pub fn validate_params_in(p: &MixtureParams, regime: Regime) -> Admissibility {
    let mut violations = Vec::new();
    let mut push = |constraint, message: String| violations.push(Violation { constraint, message });
    let all_finite = [p.m1, p.m2, p.n10, p.n20, p.delta, p.omega, p.gamma]
        .iter()
        .all(|x| x.is_finite());
    if !all_finite {
        push(Constraint::Masses, "all parameters must be finite".into());
        return Admissibility { violations };
    }

    let masses_ok = p.m2 > 0.0 && p.m1 >= p.m2;
    if !masses_ok {
        push(Constraint::Masses, format!("m1 = {}, m2 = {}", p.m1, p.m2));
    }
    if !(p.n10 > 0.0 && p.n20 > 0.0) {
        push(Constraint::Densities, format!("n10 = {}, n20 = {}", p.n10, p.n20));
    }

    let upper_ok = |x: f64| match regime {
        Regime::Strict => x < 1.0,
        Regime::KernelStudy => x <= 1.0,
    };
    if masses_ok {
        let lo = p.delta_lower_bound();
        if p.delta < lo {
            push(Constraint::Delta, format!("delta = {} is below the lower bound {}", p.delta, lo));
        }
    }
    if !upper_ok(p.delta) {
        push(Constraint::Delta, format!("delta = {} is not below 1", p.delta));
    }
    if p.omega < 0.0 {
        push(Constraint::Omega, format!("omega = {} is negative", p.omega));
    }
    if !upper_ok(p.omega) {
        push(Constraint::Omega, format!("omega = {} is not below 1", p.omega));
    }
    if p.gamma < 0.0 {
        push(Constraint::Gamma, format!("gamma = {} is negative", p.gamma));
    }
    if masses_ok {
        let hi = p.gamma_upper_bound();
        // The bound is closed; allow a few ulps so that gamma set to the bound
        // computed elsewhere is not rejected by rounding.
        if p.gamma > hi + 4.0 * f64::EPSILON * hi.abs().max(1.0) {
            push(Constraint::Gamma, format!("gamma = {} exceeds the upper bound {}", p.gamma, hi));
        }
    }
    Admissibility { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(m1: f64, m2: f64, delta: f64, omega: f64, gamma: f64) -> MixtureParams {
        MixtureParams {
            m1,
            m2,
            delta,
            omega,
            gamma,
            ..Default::default()
        }
    }

    #[test]
    fn equal_masses_allow_zero_exchange_parameters() {
        let p = params(1.0, 1.0, 0.0, 0.0, 0.0);
        assert_eq!(p.delta_lower_bound(), 0.0);
        assert!(validate_params(&p).is_admissible());
    }

    #[test]
    fn mass_ratio_two_sets_delta_floor_one_third() {
        let p = params(2.0, 1.0, 0.2, 0.5, 0.0);
        assert!((p.delta_lower_bound() - 1.0 / 3.0).abs() < 1e-15);
        let v = validate_params(&p);
        assert!(!v.is_admissible());
        assert!(v.violates(Constraint::Delta));
        assert!(v.to_string().contains("0.333"));
    }

    #[test]
    fn delta_one_only_in_kernel_study() {
        let p = params(1.0, 1.0, 1.0, 0.5, 0.0);
        assert!(validate_params(&p).violates(Constraint::Delta));
        assert!(validate_params_in(&p, Regime::KernelStudy).is_admissible());
        let q = params(1.0, 1.0, 0.5, 1.0, 0.0);
        assert!(validate_params(&q).violates(Constraint::Omega));
        assert!(validate_params_in(&q, Regime::KernelStudy).is_admissible());
    }

    #[test]
    fn gamma_closed_upper_bound() {
        let mut p = params(3.0, 1.0, 0.7, 0.2, 0.0);
        p.gamma = p.gamma_upper_bound();
        assert!(p.gamma > 0.0);
        assert!(validate_params(&p).is_admissible());
        p.gamma *= 1.01;
        assert!(validate_params(&p).violates(Constraint::Gamma));
    }

    #[test]
    fn lighter_first_species_rejected() {
        let p = params(1.0, 2.0, 0.5, 0.5, 0.0);
        assert!(validate_params(&p).violates(Constraint::Masses));
        assert!(p.check(Regime::Strict).is_err());
    }
}
