//! Time-grid index arithmetic shared across modules.

/// Relative slack when deciding whether `t / step` sits on a grid point.
const GRID_TOL: f64 = 1e-9;

/// `floor(t / step)`, treating values within a relative 1e-9 of an integer as
/// that integer so grid-aligned times are not pushed one cell down by
/// rounding.
pub fn grid_floor(t: f64, step: f64) -> usize {
    let x = t / step;
    let r = x.round();
    if (x - r).abs() <= GRID_TOL * r.abs().max(1.0) {
        r.max(0.0) as usize
    } else {
        x.floor().max(0.0) as usize
    }
}

/// `t <= limit`, allowing an overshoot of 1e-9 grid steps.
pub fn le_tol(t: f64, limit: f64, step: f64) -> bool {
    t <= limit + GRID_TOL * step
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aligned_times_snap() {
        assert_eq!(grid_floor(0.5, 1e-4), 5000);
        assert_eq!(grid_floor(0.3, 0.1), 3);
        assert_eq!(grid_floor(0.35, 0.1), 3);
        assert_eq!(grid_floor(0.0, 0.1), 0);
        for k in 0..10_000usize {
            let dt = 1.0 / 10_000.0;
            assert_eq!(grid_floor(k as f64 * dt, dt), k);
            assert_eq!(grid_floor(k as f64 / 10_000.0, dt), k);
        }
    }
}
