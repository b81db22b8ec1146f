use std::time::Duration;

use serde::{Deserialize, Serialize};

/// Ceilings applied to one compile and one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceLimits {
    #[serde(with = "millis")]
    pub compile_timeout: Duration,
    /// Wall-clock allowance per test case; a run gets this times the number
    /// of cases.
    #[serde(with = "millis")]
    pub run_timeout_per_case: Duration,
    pub max_output_bytes_per_case: usize,
    pub memory_bytes: u64,
}

impl Default for ResourceLimits {
    fn default() -> Self {
        Self {
            compile_timeout: Duration::from_secs(10),
            run_timeout_per_case: Duration::from_secs(2),
            max_output_bytes_per_case: 64 * 1024,
            memory_bytes: 64 * 1024 * 1024,
        }
    }
}

impl ResourceLimits {
    pub fn check(&self) -> Result<(), String> {
        if self.compile_timeout.is_zero()
            || self.run_timeout_per_case.is_zero()
            || self.max_output_bytes_per_case == 0
            || self.memory_bytes == 0
        {
            return Err("resource limits must all be positive".into());
        }
        Ok(())
    }

    pub fn run_cap(&self, cases: usize) -> Duration {
        self.run_timeout_per_case * cases.max(1) as u32
    }

    pub fn output_cap(&self, cases: usize) -> usize {
        self.max_output_bytes_per_case.saturating_mul(cases.max(1))
    }
}

mod millis {
    use std::time::Duration;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_u64(d.as_millis() as u64)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Duration, D::Error> {
        u64::deserialize(d).map(Duration::from_millis)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults() {
        let l = ResourceLimits::default();
        assert_eq!(l.compile_timeout, Duration::from_secs(10));
        assert_eq!(l.run_timeout_per_case, Duration::from_secs(2));
        assert_eq!(l.memory_bytes, 64 << 20);
        assert_eq!(l.max_output_bytes_per_case, 64 << 10);
        assert!(l.check().is_ok());
        assert_eq!(l.run_cap(3), Duration::from_secs(6));
    }

    #[test]
    fn zero_rejected() {
        let l = ResourceLimits {
            memory_bytes: 0,
            ..Default::default()
        };
        assert!(l.check().is_err());
    }
}
