//! Derivative-free box-constrained polishing used by the inner searches.

/// Compass search on a box in unit coordinates.
///
/// Tries `±step` along each coordinate, accepts strict decreases, and halves
/// the steps once a sweep yields nothing. Stops when every step is below
/// `tol`. Returns the final point and its value.
pub(crate) fn compass_search<F>(
    f: F,
    start: Vec<f64>,
    start_value: f64,
    lo: &[f64],
    hi: &[f64],
    initial_step: &[f64],
    tol: f64,
) -> (Vec<f64>, f64)
where
    F: Fn(&[f64]) -> f64,
{
    let d = start.len();
    let mut x = start;
    let mut fx = start_value;
    let mut step = initial_step.to_vec();
    let mut trial = x.clone();
    // hard cap on sweeps; each productive sweep strictly decreases fx
    let mut budget = 200_000usize;
    while step.iter().any(|&s| s >= tol) && budget > 0 {
        let mut moved = false;
        for i in 0..d {
            if step[i] < tol {
                continue;
            }
            for sign in [1.0, -1.0] {
                budget = budget.saturating_sub(1);
                let v = (x[i] + sign * step[i]).clamp(lo[i], hi[i]);
                if v == x[i] {
                    continue;
                }
                trial.copy_from_slice(&x);
                trial[i] = v;
                let ft = f(&trial);
                if ft < fx {
                    x[i] = v;
                    fx = ft;
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            step.iter_mut().for_each(|s| *s *= 0.5);
        }
    }
    (x, fx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_quadratic_minimum() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 0.71).powi(2);
        let (x, fx) = compass_search(
            f,
            vec![0.5, 0.5],
            f(&[0.5, 0.5]),
            &[0.0; 2],
            &[1.0; 2],
            &[0.25; 2],
            1e-9,
        );
        assert!((x[0] - 0.3).abs() < 1e-8 && (x[1] - 0.71).abs() < 1e-8);
        assert!(fx < 1e-15);
    }

    #[test]
    fn respects_bounds() {
        let f = |x: &[f64]| x[0];
        let (x, _) = compass_search(f, vec![0.6], 0.6, &[0.5], &[0.7], &[0.05], 1e-9);
        assert_eq!(x, vec![0.5]);
    }

    #[test]
    fn keeps_start_on_plateau() {
        let (x, fx) = compass_search(|_| 1.0, vec![0.4], 1.0, &[0.0], &[1.0], &[0.1], 1e-6);
        assert_eq!((x, fx), (vec![0.4], 1.0));
    }
}
