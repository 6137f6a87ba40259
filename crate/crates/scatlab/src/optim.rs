//! Derivative-free Nelder-Mead simplex minimization.
//!
//! Small fixed-policy implementation for 1-3 dimensional pose
//! refinement. Never returns a point worse than the best start vertex.

/// Result of a simplex run.
#[derive(Debug, Clone)]
pub struct SimplexResult {
    pub x: Vec<f64>,
    pub value: f64,
    #[allow(dead_code)]
    pub iterations: usize,
    #[allow(dead_code)]
    pub converged: bool,
}

/// Minimize f starting from `x0` with initial steps `scale`.
///
/// Stops when the best value improves by less than `tol` across the
/// simplex or after `max_iter` iterations.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], scale: &[f64], max_iter: usize, tol: f64) -> SimplexResult
where
    F: FnMut(&[f64]) -> f64,
{
    assert_eq!(x0.len(), scale.len());
    let n = x0.len();
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut v = x0.to_vec();
        v[i] += scale[i];
        simplex.push(v);
    }
    let mut values: Vec<f64> = simplex.iter().map(|v| f(v)).collect();

    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        // order ascending by value
        let mut idx: Vec<usize> = (0..=n).collect();
        idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let ordered: Vec<Vec<f64>> = idx.iter().map(|&i| simplex[i].clone()).collect();
        let ordered_vals: Vec<f64> = idx.iter().map(|&i| values[i]).collect();
        simplex = ordered;
        values = ordered_vals;

        if values[n] - values[0] < tol {
            converged = true;
            break;
        }

        // centroid of all but the worst
        let mut centroid = vec![0.0; n];
        for v in simplex.iter().take(n) {
            for (c, x) in centroid.iter_mut().zip(v) {
                *c += x / n as f64;
            }
        }

        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
        };

        let reflected = lerp(&centroid, &simplex[n], -alpha);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = lerp(&centroid, &simplex[n], -gamma);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let contracted = if fr < values[n] {
                lerp(&centroid, &simplex[n], -rho)
            } else {
                lerp(&centroid, &simplex[n], rho)
            };
            let fc = f(&contracted);
            if fc < values[n].min(fr) {
                simplex[n] = contracted;
                values[n] = fc;
            } else {
                // shrink toward the best vertex
                for i in 1..=n {
                    simplex[i] = lerp(&simplex[0], &simplex[i], sigma);
                    values[i] = f(&simplex[i]);
                }
            }
        }
    }

    let mut best = 0;
    for i in 1..=n {
        if values[i] < values[best] {
            best = i;
        }
    }
    SimplexResult { x: simplex[best].clone(), value: values[best], iterations, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimizes_shifted_quadratic_1d() {
        let f = |x: &[f64]| (x[0] - 1.7).powi(2) + 0.3;
        let out = nelder_mead(f, &[0.0], &[0.5], 200, 1e-12);
        assert!((out.x[0] - 1.7).abs() < 1e-5);
        assert!((out.value - 0.3).abs() < 1e-9);
    }

    #[test]
    fn minimizes_rosenbrock_2d() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let out = nelder_mead(f, &[-1.2, 1.0], &[0.5, 0.5], 2000, 1e-14);
        assert!((out.x[0] - 1.0).abs() < 1e-4 && (out.x[1] - 1.0).abs() < 1e-4, "{:?}", out.x);
    }

    #[test]
    fn never_worse_than_start() {
        // adversarial non-smooth function
        let f = |x: &[f64]| x[0].abs().sqrt() + (x[1] * 3.0).sin().abs();
        let start = [0.9, 0.4];
        let f0 = f(&start);
        let out = nelder_mead(f, &start, &[0.2, 0.2], 50, 1e-12);
        assert!(out.value <= f0);
    }
}
