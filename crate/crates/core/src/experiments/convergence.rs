/// Summaries per moving-average window.
pub const CONVERGENCE_WINDOW: usize = 5;
/// Allowed relative distance from the final moving average.
pub const CONVERGENCE_TOLERANCE: f64 = 0.05;

/// Trailing moving average; entry `i` averages `series[i+1-window..=i]` and
/// exists from `i = window - 1` on.
pub fn moving_average(series: &[f64], window: usize) -> Vec<f64> {
    if window == 0 || series.len() < window {
        return Vec::new();
    }
    series
        .windows(window)
        .map(|w| w.iter().sum::<f64>() / window as f64)
        .collect()
}

/// Index of the earliest summary from which the moving average stays within
/// tolerance of its final value for good. Falls back to the last index when
/// the curve never settles (or is too short to smooth).
pub fn detect_convergence(series: &[f64]) -> usize {
    let last = series.len().saturating_sub(1);
    let ma = moving_average(series, CONVERGENCE_WINDOW);
    let Some(&fin) = ma.last() else {
        return last;
    };
    let band = CONVERGENCE_TOLERANCE * fin.abs();
    let mut first = ma.len() - 1;
    for i in (0..ma.len()).rev() {
        if (ma[i] - fin).abs() <= band {
            first = i;
        } else {
            break;
        }
    }
    // a curve that only settles on its very last point has not converged
    if first == ma.len() - 1 && ma.len() > 1 {
        return last;
    }
    first + CONVERGENCE_WINDOW - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_series_converges_at_first_window() {
        assert_eq!(detect_convergence(&[3.0; 12]), CONVERGENCE_WINDOW - 1);
    }

    #[test]
    fn ramp_to_plateau() {
        let s: Vec<f64> = (0..60).map(|i| 100.0 * (i.min(30) as f64) / 30.0).collect();
        let idx = detect_convergence(&s);
        assert!((30..=35).contains(&idx), "{idx}");
    }

    #[test]
    fn diverging_series_never_converges() {
        let s: Vec<f64> = (0..20).map(|i| 2f64.powi(i)).collect();
        assert_eq!(detect_convergence(&s), 19);
    }

    #[test]
    fn short_series_fall_back_to_last() {
        assert_eq!(detect_convergence(&[1.0, 2.0]), 1);
        assert_eq!(detect_convergence(&[]), 0);
    }

    #[test]
    fn moving_average_shape() {
        let ma = moving_average(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 5);
        assert_eq!(ma, vec![3.0, 4.0]);
    }
}
