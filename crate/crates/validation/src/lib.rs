//! Acceptance report runner: each check prints one `PASS`/`FAIL` line.

use std::time::{Duration, Instant};

pub type CheckResult = Result<String, String>;

#[derive(Debug, Default)]
pub struct Report {
    failed: Vec<String>,
    total: usize,
}

impl Report {
    /// Runs `check`, failing it when it errors, panics or exceeds `budget`.
    pub fn check(&mut self, name: &str, budget: Duration, check: impl FnOnce() -> CheckResult) {
        self.total += 1;
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|p| Err(panic_message(p.as_ref())));
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > budget => Err(format!("{detail}; over budget of {budget:?}")),
            other => other,
        };
        let (tag, detail) = match &outcome {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag}  {name}  [{:.2}s]  {detail}", elapsed.as_secs_f64());
        if outcome.is_err() {
            self.failed.push(name.to_owned());
        }
    }

    pub fn failed(&self) -> &[String] {
        &self.failed
    }

    pub fn summary(&self) -> String {
        format!("{} of {} criteria passed", self.total - self.failed.len(), self.total)
    }
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| (*s).to_owned()))
        .unwrap_or_else(|| "panicked".to_owned())
}

/// Fails the enclosing check with a message unless `cond` holds.
#[macro_export]
macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}
