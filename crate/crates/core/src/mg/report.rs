//! Iteration histories and contraction numbers.

use alloc::vec::Vec;

/// Wall-clock seconds per phase. The core crate has no clock; callers with
/// one fill these in.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseTimings {
    pub assembly: f64,
    pub hierarchy: f64,
    pub smoothers: f64,
    pub iterate: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    /// Number of iterations performed.
    pub iterations: usize,
    /// `||r_i|| / ||b||`, starting with `i = 0`.
    pub residual_history: Vec<f64>,
    /// `||r_i|| / ||r_{i-1}||`.
    pub contraction: Vec<f64>,
    pub rho_max: f64,
    pub converged: bool,
    /// Divergence was detected and the iteration stopped.
    pub diverged: bool,
    pub timings: PhaseTimings,
}

/// Consecutive contraction numbers above one that count as divergence.
pub const DIVERGENCE_WINDOW: usize = 10;

impl SolveReport {
    pub(crate) fn from_history(history: Vec<f64>, converged: bool, diverged: bool) -> Self {
        let (contraction, rho_max) = contraction_stats(&history);
        Self {
            iterations: history.len().saturating_sub(1),
            residual_history: history,
            contraction,
            rho_max,
            converged,
            diverged,
            timings: PhaseTimings::default(),
        }
    }

    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}

/// Ratios of consecutive residual norms and their maximum. The first ratio
/// is excluded from the maximum when later ones exist. A ratio involving a
/// non-finite residual counts as infinite; the maximum is NaN only for a
/// history shorter than two.
pub fn contraction_stats(history: &[f64]) -> (Vec<f64>, f64) {
    let rho: Vec<f64> = history.windows(2).map(|w| w[1] / w[0]).collect();
    let tail = if rho.len() >= 2 { &rho[1..] } else { &rho[..] };
    let rho_max = tail
        .iter()
        .map(|r| if r.is_nan() { f64::INFINITY } else { *r })
        .fold(f64::NAN, |m, r| if m.is_nan() || r > m { r } else { m });
    (rho, rho_max)
}

/// True once the last [`DIVERGENCE_WINDOW`] ratios all exceed one, or the
/// newest residual is not finite.
pub(crate) fn is_diverging(history: &[f64]) -> bool {
    let Some(last) = history.last() else { return false };
    if !last.is_finite() {
        return true;
    }
    history.len() > DIVERGENCE_WINDOW
        && history[history.len() - DIVERGENCE_WINDOW - 1..].windows(2).all(|w| w[1] > w[0])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn non_finite_residual_gives_unbounded_contraction() {
        let (_, rho_max) = contraction_stats(&[1.0, 10.0, f64::INFINITY, f64::NAN]);
        assert_eq!(rho_max, f64::INFINITY);
    }

    #[test]
    fn geometric_history() {
        let (rho, m) = contraction_stats(&[1.0, 0.1, 0.01]);
        assert_eq!(rho.len(), 2);
        assert!((rho[0] - 0.1).abs() < 1e-15 && (rho[1] - 0.1).abs() < 1e-15);
        assert!((m - 0.1).abs() < 1e-15);
        let (_, m) = contraction_stats(&[1.0, 0.9, 0.1, 0.05]);
        assert!((m - 0.5).abs() < 1e-15);
    }

    #[test]
    fn divergence_window() {
        let mut h: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        assert!(!is_diverging(&h));
        h.push(11.0);
        assert!(is_diverging(&h));
        assert!(is_diverging(&[1.0, f64::NAN]));
    }
}
