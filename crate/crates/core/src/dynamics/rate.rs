use crate::error::{Error, Result};
use crate::trace::IterationTrace;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    /// `exp(slope)` of the least-squares fit of `log err` against `n`.
    /// Not clamped: a growing error yields a value above 1.
    pub theta_hat: f64,
    pub window: usize,
    pub r_squared: f64,
}

/// Fits `log(err_n) = a + n log(theta)` over the trailing `window + 1`
/// records.
pub fn estimate_rate(trace: &IterationTrace, window: usize) -> Result<RateEstimate> {
    let recs = trace.records();
    let needed = window + 1;
    if window == 0 || recs.len() < needed {
        return Err(Error::InsufficientRecords {
            needed: needed.max(2),
            available: recs.len(),
        });
    }
    let tail = &recs[recs.len() - needed..];
    let mut pts = Vec::with_capacity(needed);
    for r in tail {
        match r.err {
            Some(e) if e > 0.0 && e.is_finite() => pts.push((r.iter as f64, e.ln())),
            _ => {
                return Err(Error::InsufficientRecords {
                    needed,
                    available: pts.len(),
                })
            }
        }
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let ss_res: f64 = pts
        .iter()
        .map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2))
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(RateEstimate {
        theta_hat: slope.exp(),
        window,
        r_squared,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::TraceRecord;

    fn trace_of(errs: impl Iterator<Item = f64>) -> IterationTrace {
        errs.enumerate()
            .map(|(iter, e)| TraceRecord {
                iter,
                err: Some(e),
                grad_norm: 0.0,
                energy: 0.0,
                wall_ns: 0,
            })
            .collect()
    }

    #[test]
    fn exact_geometric() {
        let t = trace_of((0..60).map(|n| 3.0 * 0.5f64.powi(n)));
        let r = estimate_rate(&t, 40).unwrap();
        assert!((r.theta_hat - 0.5).abs() <= 1e-10);
        assert!((r.r_squared - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn perturbed_geometric() {
        let t = trace_of((0..200).map(|n| 0.9f64.powi(n) * (1.0 + 0.01 * (-1.0f64).powi(n))));
        let r = estimate_rate(&t, 100).unwrap();
        assert!((0.89..=0.91).contains(&r.theta_hat), "{}", r.theta_hat);
    }

    #[test]
    fn constant_error() {
        let t = trace_of((0..20).map(|_| 0.25));
        let r = estimate_rate(&t, 10).unwrap();
        assert_eq!(r.theta_hat, 1.0);
    }

    #[test]
    fn too_few_records() {
        let t = trace_of((0..5).map(|n| 0.5f64.powi(n)));
        assert!(matches!(
            estimate_rate(&t, 10),
            Err(Error::InsufficientRecords { .. })
        ));
    }
}
