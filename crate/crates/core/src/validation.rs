use std::fmt;

/// One named constraint with its worst observed residual.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintCheck {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
}

impl ConstraintCheck {
    pub fn new(name: &'static str, residual: f64, tolerance: f64) -> Self {
        Self {
            name,
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<ConstraintCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(ConstraintCheck::passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConstraintCheck> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn check(&self, name: &str) -> Option<&ConstraintCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn residual(&self, name: &str) -> Option<f64> {
        self.check(name).map(|c| c.residual)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{:<22} residual {:>12.3e}  tolerance {:>8.1e}  {}",
                c.name,
                c.residual,
                c.tolerance,
                if c.passed() { "pass" } else { "FAIL" }
            )?;
        }
        Ok(())
    }
}
